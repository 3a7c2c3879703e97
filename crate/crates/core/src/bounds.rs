//! Counting bounds: `Ω(ν)`, the normal-subgroup bound for the free group of
//! rank two, and the `g^{c·ln g}` envelopes.

use num_bigint::BigUint;
use num_traits::One;

/// Number of prime factors of `nu` counted with multiplicity.
pub fn big_omega(nu: u64) -> u32 {
    assert!(nu >= 1, "big_omega needs a positive argument");
    let mut n = nu;
    let mut count = 0;
    let mut d = 2u64;
    while d * d <= n {
        while n.is_multiple_of(d) {
            n /= d;
            count += 1;
        }
        d += 1;
    }
    if n > 1 {
        count += 1;
    }
    count
}

/// `Σ_{ν ≤ n} ν^{6(Ω(ν)+1)}`, exactly.
pub fn lubotzky_bound(n: u64) -> BigUint {
    assert!(n >= 1, "lubotzky_bound needs n ≥ 1");
    let mut total = BigUint::one();
    for nu in 2..=n {
        total += BigUint::from(nu).pow(6 * (big_omega(nu) + 1));
    }
    total
}

/// `(e^{(ln g)²}, e^{2(ln g)²})`.
pub fn envelope(g: u64) -> (f64, f64) {
    assert!(g >= 2, "envelope needs g ≥ 2");
    let l = libm::log(g as f64);
    (libm::exp(l * l), libm::exp(2.0 * l * l))
}

/// Natural logs of the envelope, for comparisons that must not overflow.
pub fn log_envelope(g: u64) -> (f64, f64) {
    assert!(g >= 2, "envelope needs g ≥ 2");
    let l = libm::log(g as f64);
    (l * l, 2.0 * l * l)
}

/// `ln(count) / (ln g)²`: the exponent `c` with `count = g^{c·ln g}`.
pub fn exponent_estimate(count: u64, g: u64) -> f64 {
    assert!(count >= 1 && g >= 2);
    let l = libm::log(g as f64);
    libm::log(count as f64) / (l * l)
}

/// Strict `lower(g) < count < upper(g)`, compared in log space.
pub fn within_envelope(count: u64, g: u64) -> bool {
    let (lo, hi) = log_envelope(g);
    let c = libm::log(count as f64);
    lo < c && c < hi
}

/// Bound figures for one genus.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub g: u64,
    pub r: u64,
    pub s: u64,
    pub q: Option<u64>,
    pub lower: f64,
    pub upper: f64,
    pub exponent: f64,
    pub index_cap: u64,
    pub signature_cap: u64,
}

impl BoundsReport {
    pub fn new(g: u64, r: u64, s: u64, q: Option<u64>) -> Self {
        let (lower, upper) = envelope(g);
        BoundsReport {
            g,
            r,
            s,
            q,
            lower,
            upper,
            exponent: exponent_estimate(s.max(1), g),
            index_cap: 84 * (g - 1),
            signature_cap: 84 * g,
        }
    }

    pub fn above_lower(&self) -> bool {
        libm::log(self.s as f64) > log_envelope(self.g).0
    }

    pub fn below_upper(&self) -> bool {
        libm::log(self.s as f64) < log_envelope(self.g).1
    }
}
