//! Signature arithmetic for hyperbolic triangle groups.
//!
//! A triangle group `Δ(p,q,r) = ⟨γ0, γ1 | γ0^p = γ1^q = (γ0γ1)^r = 1⟩` is
//! hyperbolic when its deficiency `μ = 1 − 1/p − 1/q − 1/r` is positive. A
//! torsion-free normal subgroup of index `n` uniformizes a surface of genus
//! `g` with `n·μ = 2g − 2`. All of that arithmetic is exact here.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

/// Exact rational used for deficiencies.
pub type Rational = Ratio<i64>;

/// Smallest hyperbolic deficiency, attained only by `(2,3,7)`.
pub const MIN_DEFICIENCY: (i64, i64) = (1, 42);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("malformed signature {0:?}: expected \"p,q,r\" with integers >= 2")]
    Malformed(alloc::string::String),
    #[error("signature entries must be at least 2, got ({0},{1},{2})")]
    Degenerate(u32, u32, u32),
    #[error("non-hyperbolic signature ({0},{1},{2})")]
    NonHyperbolic(u32, u32, u32),
}

/// A hyperbolic triangle signature, stored sorted `p <= q <= r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    p: u32,
    q: u32,
    r: u32,
}

/// Deficiency of an arbitrary triple; zero or negative for Euclidean and
/// spherical triples.
pub fn raw_deficiency(p: u32, q: u32, r: u32) -> Rational {
    let (p, q, r) = (i64::from(p), i64::from(q), i64::from(r));
    Ratio::new(p * q * r - q * r - p * r - p * q, p * q * r)
}

impl Signature {
    pub fn new(a: u32, b: u32, c: u32) -> Result<Self, SignatureError> {
        let mut v = [a, b, c];
        v.sort_unstable();
        let [p, q, r] = v;
        if p < 2 {
            return Err(SignatureError::Degenerate(p, q, r));
        }
        if raw_deficiency(p, q, r) <= Rational::zero() {
            return Err(SignatureError::NonHyperbolic(p, q, r));
        }
        let sig = Signature { p, q, r };
        debug_assert!(sig.deficiency() >= Ratio::new(MIN_DEFICIENCY.0, MIN_DEFICIENCY.1));
        Ok(sig)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn r(&self) -> u32 {
        self.r
    }

    /// `[p, q, r]`, the orders of `γ0`, `γ1` and `γ0γ1`.
    pub fn orders(&self) -> [u32; 3] {
        [self.p, self.q, self.r]
    }

    pub fn deficiency(&self) -> Rational {
        raw_deficiency(self.p, self.q, self.r)
    }

    /// Genus of a torsion-free normal subgroup of index `n`, if `1 + n·μ/2`
    /// is an integer of at least 2.
    pub fn genus_of_index(&self, n: u64) -> Option<u64> {
        let n = i64::try_from(n).ok()?;
        let g = Rational::from_integer(1) + self.deficiency() * n / 2;
        if !g.is_integer() {
            return None;
        }
        let g = g.to_integer();
        (g >= 2).then_some(g as u64)
    }

    /// Index `(2g − 2)/μ` of a torsion-free normal subgroup of genus `g`, if
    /// integral.
    pub fn index_of_genus(&self, g: u64) -> Option<u64> {
        if g < 2 {
            return None;
        }
        let two_g_minus_2 = Rational::from_integer(2 * i64::try_from(g).ok()? - 2);
        let n = two_g_minus_2 / self.deficiency();
        if !n.is_integer() {
            return None;
        }
        let n = n.to_integer() as u64;
        assert!(n <= 84 * (g - 1) && n > 2 * g - 2, "Riemann–Hurwitz sandwich violated");
        Some(n)
    }

    /// True when all three entries are pairwise distinct primes.
    pub fn is_prime_triple(&self) -> bool {
        let prime = |k: u32| k >= 2 && (2..k).take_while(|d| d * d <= k).all(|d| !k.is_multiple_of(d));
        self.p != self.q && self.q != self.r && prime(self.p) && prime(self.q) && prime(self.r)
    }

    /// Elementary divisors (> 1) of the abelianized triangle group, i.e. the
    /// Smith form of the relation matrix with rows `(p,0)`, `(0,q)`, `(r,r)`.
    /// A free factor would show up as `0`; hyperbolic signatures never have one.
    pub fn abelianization(&self) -> Vec<u64> {
        let rows =
            vec![vec![i64::from(self.p), 0], vec![0, i64::from(self.q)], vec![i64::from(self.r), i64::from(self.r)]];
        smith_diagonal(rows, 2).into_iter().filter(|&d| d != 1).map(|d| d as u64).collect()
    }

    /// Order of the abelianization.
    pub fn abelianization_order(&self) -> u64 {
        self.abelianization().iter().product()
    }

    /// Little-endian bytes `p ‖ q ‖ r`, used to namespace canonical keys.
    pub fn to_bytes(&self) -> [u8; 12] {
        let mut out = [0u8; 12];
        out[0..4].copy_from_slice(&self.p.to_le_bytes());
        out[4..8].copy_from_slice(&self.q.to_le_bytes());
        out[8..12].copy_from_slice(&self.r.to_le_bytes());
        out
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.p, self.q, self.r)
    }
}

impl FromStr for Signature {
    type Err = SignatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let malformed = || SignatureError::Malformed(s.into());
        if parts.len() != 3 {
            return Err(malformed());
        }
        let mut v = [0u32; 3];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot = part.parse().map_err(|_| malformed())?;
        }
        Signature::new(v[0], v[1], v[2])
    }
}

/// A genus together with the index of a torsion-free normal subgroup of
/// that genus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenusIndexPair {
    pub genus: u64,
    pub index: u64,
}

/// Every hyperbolic signature admitting a torsion-free normal subgroup of
/// some genus in `2..=g_max`, as far as arithmetic can tell: the index
/// `n = (2γ − 2)/μ` must be integral and divisible by `p`, `q` and `r`.
///
/// The enumeration runs over genus and index: for each `γ` and each
/// `n <= 84(γ − 1)`, it lists the triples of divisors of `n` with
/// `1/p + 1/q + 1/r = 1 − (2γ − 2)/n`. Output is sorted by signature.
pub fn admissible_signatures(g_max: u64) -> Vec<(Signature, Vec<GenusIndexPair>)> {
    let mut found: alloc::collections::BTreeMap<Signature, Vec<GenusIndexPair>> = alloc::collections::BTreeMap::new();
    for genus in 2..=g_max {
        let two_g_minus_2 = 2 * genus as i64 - 2;
        for n in (2 * genus - 1)..=84 * (genus - 1) {
            let n_i = n as i64;
            // 1/p + 1/q + 1/r = (n - (2g - 2)) / n
            let target = Ratio::new(n_i - two_g_minus_2, n_i);
            let divisors: Vec<u32> = (2..=n).filter(|d| n % d == 0).map(|d| d as u32).collect();
            for (i, &p) in divisors.iter().enumerate() {
                let rest_pq = target - Ratio::new(1, i64::from(p));
                if rest_pq <= Rational::zero() {
                    continue;
                }
                for &q in divisors.iter().skip(i) {
                    let rest = rest_pq - Ratio::new(1, i64::from(q));
                    if rest <= Rational::zero() {
                        continue;
                    }
                    if *rest.numer() != 1 {
                        continue;
                    }
                    let r = *rest.denom();
                    if r < i64::from(q) || n_i % r != 0 {
                        continue;
                    }
                    let sig = match Signature::new(p, q, r as u32) {
                        Ok(sig) => sig,
                        Err(_) => continue,
                    };
                    debug_assert_eq!(sig.index_of_genus(genus), Some(n));
                    found.entry(sig).or_default().push(GenusIndexPair { genus, index: n });
                }
            }
        }
    }
    found.into_iter().collect()
}

/// Diagonal of the Smith normal form of an integer matrix with `cols`
/// columns; entries are non-negative and each divides the next.
pub fn smith_diagonal(mut m: Vec<Vec<i64>>, cols: usize) -> Vec<i64> {
    let rows = m.len();
    let rank_bound = rows.min(cols);
    let mut diag = Vec::with_capacity(rank_bound);
    for t in 0..rank_bound {
        // pivot: smallest nonzero |entry| in the trailing block
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if m[i][j] != 0 && pivot.is_none_or(|(a, b)| m[i][j].abs() < m[a][b].abs()) {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                diag.push(0);
                break;
            };
            m.swap(t, pi);
            for row in m.iter_mut() {
                row.swap(t, pj);
            }
            let a = m[t][t];
            let mut clean = true;
            for i in (t + 1)..rows {
                let f = m[i][t] / a;
                for j in t..cols {
                    m[i][j] -= f * m[t][j];
                }
                clean &= m[i][t] == 0;
            }
            for j in (t + 1)..cols {
                let f = m[t][j] / a;
                for i in t..rows {
                    m[i][j] -= f * m[i][t];
                }
                clean &= m[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // divisibility: fold any offending entry into the pivot row
            let offending =
                (t + 1..rows).flat_map(|i| (t + 1..cols).map(move |j| (i, j))).find(|&(i, j)| m[i][j] % a != 0);
            match offending {
                Some((i, _)) => {
                    for j in t..cols {
                        m[t][j] += m[i][j];
                    }
                }
                None => {
                    diag.push(a.abs());
                    break;
                }
            }
        }
    }
    diag
}

/// `x` as `f64`; used only for reporting.
pub fn rational_to_f64(x: Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
