use alloc::vec;
use alloc::vec::Vec;

use super::word::{Letter, Word};

/// Marker for an undefined table entry.
pub const UNDEFINED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("coset table is incomplete")]
    Incomplete,
    #[error("table bytes are malformed: {0}")]
    Malformed(&'static str),
}

/// Action of the four letters on the cosets `0..n` of a subgroup `H`, where
/// coset `0` is `H` itself.
///
/// Rows are indexed by coset and columns by [`Letter::index`]. A letter
/// column and its inverse column are always mutually inverse partial
/// injections.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CosetTable {
    rows: Vec<[u32; 4]>,
}

impl CosetTable {
    /// A table with `n` cosets and no entries.
    pub fn with_cosets(n: usize) -> Self {
        CosetTable { rows: vec![[UNDEFINED; 4]; n] }
    }

    /// Builds a complete table from the permutations of `γ0` and `γ1`.
    pub fn from_permutations(g0: &[u32], g1: &[u32]) -> Self {
        assert_eq!(g0.len(), g1.len());
        let mut t = CosetTable::with_cosets(g0.len());
        for i in 0..g0.len() {
            t.set(i as u32, Letter::G0, g0[i]);
            t.set(i as u32, Letter::G1, g1[i]);
        }
        t
    }

    pub(crate) fn from_rows(rows: Vec<[u32; 4]>) -> Self {
        CosetTable { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    #[inline]
    pub fn get(&self, coset: u32, l: Letter) -> Option<u32> {
        let v = self.rows[coset as usize][l.index()];
        (v != UNDEFINED).then_some(v)
    }

    /// Sets `coset·l = target` and the matching inverse entry.
    pub fn set(&mut self, coset: u32, l: Letter, target: u32) {
        self.rows[coset as usize][l.index()] = target;
        self.rows[target as usize][l.inverse().index()] = coset;
    }

    pub fn rows(&self) -> &[[u32; 4]] {
        &self.rows
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(|&v| v != UNDEFINED))
    }

    /// Follows `w` from `start`; `None` if an entry on the way is undefined.
    pub fn trace(&self, start: u32, w: &Word) -> Option<u32> {
        let mut c = start;
        for &(l, k) in w.runs() {
            for _ in 0..k {
                c = self.get(c, l)?;
            }
        }
        Some(c)
    }

    /// Column of `l` as a permutation (complete tables only).
    pub fn permutation(&self, l: Letter) -> Vec<u32> {
        self.rows.iter().map(|r| r[l.index()]).collect()
    }

    /// Permutation induced by a word (complete tables only).
    pub fn word_permutation(&self, w: &Word) -> Vec<u32> {
        (0..self.len() as u32).map(|c| self.trace(c, w).expect("complete table")).collect()
    }

    /// True if numbering follows first appearance when scanning cosets in
    /// order and letters in [`Letter::ALL`] order.
    pub fn is_standard(&self) -> bool {
        let mut next = 1u32;
        for row in &self.rows {
            for &v in row {
                if v == UNDEFINED {
                    continue;
                }
                if v == next {
                    next += 1;
                } else if v > next {
                    return false;
                }
            }
        }
        true
    }

    /// Renumbers the cosets reachable from `0` into standard order. Cosets
    /// not reachable from `0` are dropped.
    pub fn standardize(&self) -> CosetTable {
        let n = self.len();
        let mut new_of = vec![UNDEFINED; n];
        let mut order: Vec<u32> = Vec::with_capacity(n);
        if n == 0 {
            return self.clone();
        }
        new_of[0] = 0;
        order.push(0);
        let mut i = 0;
        while i < order.len() {
            let old = order[i] as usize;
            for &v in &self.rows[old] {
                if v != UNDEFINED && new_of[v as usize] == UNDEFINED {
                    new_of[v as usize] = order.len() as u32;
                    order.push(v);
                }
            }
            i += 1;
        }
        let rows = order
            .iter()
            .map(|&old| {
                let mut row = [UNDEFINED; 4];
                for (j, &v) in self.rows[old as usize].iter().enumerate() {
                    if v != UNDEFINED {
                        row[j] = new_of[v as usize];
                    }
                }
                row
            })
            .collect();
        CosetTable { rows }
    }

    /// For each coset, the letter path from coset `0` along the tree of first
    /// appearances: `(parent, letter)`; coset `0` has none.
    pub fn spanning_tree(&self) -> Vec<Option<(u32, Letter)>> {
        let n = self.len();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        if n == 0 {
            return parent;
        }
        seen[0] = true;
        let mut queue = vec![0u32];
        let mut i = 0;
        while i < queue.len() {
            let c = queue[i];
            for l in Letter::ALL {
                if let Some(d) = self.get(c, l) {
                    if !seen[d as usize] {
                        seen[d as usize] = true;
                        parent[d as usize] = Some((c, l));
                        queue.push(d);
                    }
                }
            }
            i += 1;
        }
        parent
    }

    /// Tree words `w_c` with `trace(0, w_c) = c`.
    pub fn transversal(&self) -> Vec<Word> {
        let parent = self.spanning_tree();
        let mut words: Vec<Word> = Vec::with_capacity(self.len());
        for (c, p) in parent.iter().enumerate() {
            let w = match p {
                None => Word::empty(),
                Some((u, l)) => {
                    debug_assert!((*u as usize) < c || c == 0);
                    let mut w = words[*u as usize].clone();
                    w.push_run(*l, 1);
                    w
                }
            };
            words.push(w);
        }
        words
    }

    /// Canonical bytes: `n`, then the `γ0` column, then the `γ1` column, all
    /// little-endian `u32` with cosets numbered from 0.
    pub fn to_bytes(&self) -> Result<Vec<u8>, TableError> {
        if !self.is_complete() {
            return Err(TableError::Incomplete);
        }
        let n = self.len();
        let mut out = Vec::with_capacity(4 + 8 * n);
        out.extend_from_slice(&(n as u32).to_le_bytes());
        for col in [Letter::G0, Letter::G1] {
            for row in &self.rows {
                out.extend_from_slice(&row[col.index()].to_le_bytes());
            }
        }
        Ok(out)
    }

    /// Inverse of [`CosetTable::to_bytes`]; the inverse columns are rebuilt.
    pub fn from_bytes(bytes: &[u8]) -> Result<CosetTable, TableError> {
        let word = |i: usize| -> Result<u32, TableError> {
            bytes
                .get(4 * i..4 * i + 4)
                .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .ok_or(TableError::Malformed("truncated"))
        };
        let n = word(0)? as usize;
        if bytes.len() != 4 + 8 * n {
            return Err(TableError::Malformed("length does not match coset count"));
        }
        let g0: Vec<u32> = (0..n).map(|i| word(1 + i)).collect::<Result<_, _>>()?;
        let g1: Vec<u32> = (0..n).map(|i| word(1 + n + i)).collect::<Result<_, _>>()?;
        for col in [&g0, &g1] {
            let mut hit = vec![false; n];
            for &v in col.iter() {
                if v as usize >= n || hit[v as usize] {
                    return Err(TableError::Malformed("column is not a permutation"));
                }
                hit[v as usize] = true;
            }
        }
        Ok(CosetTable::from_permutations(&g0, &g1))
    }

    /// Checks that every relator closes at every coset.
    pub fn satisfies(&self, relators: &[Word]) -> bool {
        (0..self.len() as u32).all(|c| relators.iter().all(|r| self.trace(c, r) == Some(c)))
    }
}
