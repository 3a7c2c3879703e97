//! Analysis of complete regular coset tables: generator orders,
//! torsion-freeness, genus and canonical keys.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use sha2::{Digest, Sha256};

use crate::fpgroup::{CosetTable, Letter, Word};
use crate::signatures::Signature;

/// Order of a permutation group, or a marker that it exceeds the cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupOrder {
    Exact(u64),
    OverCap,
}

/// SHA-256 of `signature bytes ‖ canonical table bytes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(pub [u8; 32]);

impl CanonicalKey {
    pub fn to_hex(&self) -> String {
        use core::fmt::Write;
        let mut s = String::with_capacity(64);
        for b in self.0 {
            let _ = write!(s, "{b:02x}");
        }
        s
    }

    pub fn from_hex(s: &str) -> Option<CanonicalKey> {
        if s.len() != 64 {
            return None;
        }
        let mut out = [0u8; 32];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = u8::from_str_radix(s.get(2 * i..2 * i + 2)?, 16).ok()?;
        }
        Some(CanonicalKey(out))
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientInfo {
    /// Order of `Δ/Γ`, i.e. the number of cosets.
    pub n: u64,
    /// Orders of the images of `γ0`, `γ1`, `γ0γ1`.
    pub orders: [u32; 3],
    pub torsion_free: bool,
    /// Only defined for torsion-free kernels.
    pub genus: Option<u64>,
    pub canonical_key: CanonicalKey,
}

fn base_words() -> [Word; 3] {
    [Word::letter(Letter::G0), Word::letter(Letter::G1), Word::from_letters([Letter::G0, Letter::G1])]
}

/// Length of the cycle of `w` through `start`; `None` if the trace leaves
/// the defined part of the table or does not return within `limit` steps.
pub fn cycle_length(t: &CosetTable, start: u32, w: &Word, limit: usize) -> Option<u32> {
    let mut c = start;
    for k in 1..=limit {
        c = t.trace(c, w)?;
        if c == start {
            return Some(k as u32);
        }
    }
    None
}

/// Orders of `γ0`, `γ1` and `γ0γ1` in the quotient, read off as cycle
/// lengths through coset `0`.
///
/// In a regular table every cycle of a given word has the same length; this
/// is asserted for all cosets.
pub fn generator_orders(t: &CosetTable) -> [u32; 3] {
    let n = t.len();
    let mut out = [0u32; 3];
    for (slot, w) in out.iter_mut().zip(base_words().iter()) {
        let len = cycle_length(t, 0, w, n).expect("complete table");
        for c in 1..n as u32 {
            assert_eq!(cycle_length(t, c, w, n), Some(len), "cycle lengths differ in a regular table");
        }
        *slot = len;
    }
    out
}

pub fn is_torsion_free(sig: &Signature, info: &QuotientInfo) -> bool {
    info.orders == sig.orders()
}

/// Order of `⟨π_γ0, π_γ1⟩` by closure over products, giving up past `cap`.
pub fn permutation_group_order(t: &CosetTable, cap: usize) -> GroupOrder {
    let n = t.len();
    let gens = [t.permutation(Letter::G0), t.permutation(Letter::G1)];
    let identity: Vec<u32> = (0..n as u32).collect();
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut frontier = alloc::vec![identity.clone()];
    seen.insert(identity);
    while let Some(g) = frontier.pop() {
        for s in &gens {
            let h: Vec<u32> = g.iter().map(|&x| s[x as usize]).collect();
            if seen.insert(h.clone()) {
                if seen.len() > cap {
                    return GroupOrder::OverCap;
                }
                frontier.push(h);
            }
        }
    }
    GroupOrder::Exact(seen.len() as u64)
}

/// True if the table's permutation group has order exactly `n`.
pub fn is_regular(t: &CosetTable) -> bool {
    t.is_complete() && permutation_group_order(t, t.len() + 1) == GroupOrder::Exact(t.len() as u64)
}

pub fn canonical_key(sig: &Signature, t: &CosetTable) -> CanonicalKey {
    let mut h = Sha256::new();
    h.update(sig.to_bytes());
    h.update(t.to_bytes().expect("complete table"));
    let digest = h.finalize();
    let mut out = [0u8; 32];
    out.copy_from_slice(&digest);
    CanonicalKey(out)
}

/// Full analysis of a complete regular standard table over `sig`.
pub fn analyze(sig: &Signature, t: &CosetTable) -> QuotientInfo {
    let orders = generator_orders(t);
    for (o, e) in orders.iter().zip(sig.orders()) {
        assert_eq!(e % o, 0, "generator order must divide the signature entry");
    }
    let torsion_free = orders == sig.orders();
    let n = t.len() as u64;
    let genus = if torsion_free {
        let g = sig.genus_of_index(n);
        assert!(g.is_some() || n == 1, "torsion-free kernel with non-integral genus");
        g
    } else {
        None
    };
    QuotientInfo { n, orders, torsion_free, genus, canonical_key: canonical_key(sig, t) }
}
