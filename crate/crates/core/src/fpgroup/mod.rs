//! Words, triangle presentations, coset tables, coset enumeration and
//! Reidemeister–Schreier generators.

mod table;
mod todd_coxeter;
mod word;

use alloc::vec::Vec;

pub use table::{CosetTable, TableError, UNDEFINED};
pub use todd_coxeter::{todd_coxeter, EnumerationError};
pub use word::{Letter, Word, WordParseError};

use crate::signatures::Signature;

/// `⟨γ0, γ1 | γ0^p, γ1^q, (γ0γ1)^r⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    signature: Signature,
    relators: [Word; 3],
}

impl Presentation {
    pub fn triangle(signature: Signature) -> Self {
        let [p, q, r] = signature.orders();
        let relators = [
            Word::power(Letter::G0, p),
            Word::power(Letter::G1, q),
            Word::from_letters([Letter::G0, Letter::G1]).pow(r),
        ];
        Presentation { signature, relators }
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn relators(&self) -> &[Word; 3] {
        &self.relators
    }
}

/// Reidemeister–Schreier generators of the subgroup at coset `0`.
///
/// Uses the spanning tree of first appearances. Every edge `c·x = d` with
/// `x ∈ {γ0, γ1}` gives `w_c x w_d⁻¹`; the `n − 1` tree edges give trivial
/// words and are dropped, leaving `2n − (n − 1) = n + 1` generators.
pub fn schreier_generators(table: &CosetTable) -> Result<Vec<Word>, TableError> {
    if !table.is_complete() {
        return Err(TableError::Incomplete);
    }
    let parent = table.spanning_tree();
    let words = table.transversal();
    let mut gens = Vec::with_capacity(table.len() + 1);
    for c in 0..table.len() as u32 {
        for l in [Letter::G0, Letter::G1] {
            let d = table.get(c, l).expect("complete");
            let is_tree_edge = parent[d as usize] == Some((c, l)) || parent[c as usize] == Some((d, l.inverse()));
            if is_tree_edge {
                continue;
            }
            let mut w = words[c as usize].clone();
            w.push_run(l, 1);
            gens.push(w.concat(&words[d as usize].inverse()).reduce());
        }
    }
    Ok(gens)
}

/// Rewrites a word in the generators of a subgroup into the generators of an
/// overgroup, given the images of `γ0` and `γ1`.
pub fn rewrite_via_embedding(w: &Word, embedding: &[Word; 2]) -> Word {
    w.substitute(embedding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn z7_table() -> CosetTable {
        let g0: Vec<u32> = (0..7).map(|i| (i + 1) % 7).collect();
        let g1: Vec<u32> = (0..7).map(|i| (i + 2) % 7).collect();
        CosetTable::from_permutations(&g0, &g1).standardize()
    }

    #[test]
    fn triangle_relators() {
        let pres = Presentation::triangle(Signature::new(2, 3, 7).unwrap());
        let lens: Vec<usize> = pres.relators().iter().map(Word::len).collect();
        assert_eq!(lens, vec![2, 3, 14]);
    }

    #[test]
    fn schreier_counts() {
        let t = z7_table();
        let gens = schreier_generators(&t).unwrap();
        assert_eq!(gens.len(), 8);
        for g in &gens {
            assert_eq!(t.trace(0, g), Some(0));
        }
        let one = CosetTable::from_permutations(&[0], &[0]);
        let gens = schreier_generators(&one).unwrap();
        assert_eq!(gens, vec![Word::letter(Letter::G0), Word::letter(Letter::G1)]);
        assert_eq!(schreier_generators(&CosetTable::with_cosets(3)), Err(TableError::Incomplete));
    }

    #[test]
    fn rewrite_examples() {
        let e = [Word::parse("a b^-1").unwrap(), Word::parse("b a").unwrap()];
        assert_eq!(rewrite_via_embedding(&Word::letter(Letter::G0), &e), e[0]);
        assert!(rewrite_via_embedding(&Word::parse("a a^-1").unwrap(), &e).is_empty());
    }
}
