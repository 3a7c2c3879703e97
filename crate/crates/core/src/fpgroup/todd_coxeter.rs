//! Felsch-style coset enumeration with coincidence processing.
//!
//! Cosets are defined only at the first undefined entry; every new entry is
//! pushed on a deduction stack and all relator cycles through it are
//! scanned. Subgroup generators are traced at coset `0` after each round of
//! deductions. Coincidences are merged with a union–find forwarding array.

use alloc::vec;
use alloc::vec::Vec;

use super::table::{CosetTable, UNDEFINED};
use super::word::{Letter, Word};
use super::Presentation;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumerationError {
    #[error("coset enumeration exceeded {max_cosets} live cosets")]
    ResourceExceeded { max_cosets: usize },
}

struct Enumerator {
    rows: Vec<[u32; 4]>,
    /// Union–find forwarding: `fwd[c] == c` for live cosets.
    fwd: Vec<u32>,
    live: usize,
    max_cosets: usize,
    /// For each letter, relator cycles `(relator, start)` whose letter at
    /// `start` is that letter.
    occurrences: [Vec<(usize, usize)>; 4],
    relators: Vec<Vec<Letter>>,
    subgens: Vec<Vec<Letter>>,
    deductions: Vec<(u32, Letter)>,
}

/// Smallest period of a cyclic word.
fn period(w: &[Letter]) -> usize {
    let n = w.len();
    (1..=n).find(|&d| n.is_multiple_of(d) && (0..n).all(|i| w[i] == w[(i + d) % n])).unwrap_or(n)
}

impl Enumerator {
    fn new(relators: Vec<Vec<Letter>>, subgens: Vec<Vec<Letter>>, max_cosets: usize) -> Self {
        let mut occurrences: [Vec<(usize, usize)>; 4] = Default::default();
        for (ri, r) in relators.iter().enumerate() {
            for (pos, l) in r.iter().enumerate().take(period(r)) {
                occurrences[l.index()].push((ri, pos));
            }
        }
        Enumerator {
            rows: vec![[UNDEFINED; 4]],
            fwd: vec![0],
            live: 1,
            max_cosets,
            occurrences,
            relators,
            subgens,
            deductions: Vec::new(),
        }
    }

    fn rep(&mut self, mut c: u32) -> u32 {
        let mut root = c;
        while self.fwd[root as usize] != root {
            root = self.fwd[root as usize];
        }
        while self.fwd[c as usize] != root {
            let next = self.fwd[c as usize];
            self.fwd[c as usize] = root;
            c = next;
        }
        root
    }

    fn is_live(&self, c: u32) -> bool {
        self.fwd[c as usize] == c
    }

    fn define(&mut self, c: u32, l: Letter) -> Result<(), EnumerationError> {
        // allocated slots also bounded so dead cosets cannot grow memory forever
        if self.live >= self.max_cosets || self.rows.len() >= 8 * self.max_cosets + 64 {
            return Err(EnumerationError::ResourceExceeded { max_cosets: self.max_cosets });
        }
        let d = self.rows.len() as u32;
        self.rows.push([UNDEFINED; 4]);
        self.fwd.push(d);
        self.live += 1;
        self.set(c, l, d);
        Ok(())
    }

    fn set(&mut self, c: u32, l: Letter, d: u32) {
        self.rows[c as usize][l.index()] = d;
        self.rows[d as usize][l.inverse().index()] = c;
        self.deductions.push((c, l));
    }

    fn merge(&mut self, a: u32, b: u32, queue: &mut Vec<u32>) {
        let (a, b) = (self.rep(a), self.rep(b));
        if a == b {
            return;
        }
        let (keep, kill) = if a < b { (a, b) } else { (b, a) };
        self.fwd[kill as usize] = keep;
        self.live -= 1;
        queue.push(kill);
    }

    fn coincidence(&mut self, a: u32, b: u32) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut i = 0;
        while i < queue.len() {
            let dead = queue[i];
            i += 1;
            for l in Letter::ALL {
                let target = self.rows[dead as usize][l.index()];
                if target == UNDEFINED {
                    continue;
                }
                let inv = l.inverse().index();
                if self.rows[target as usize][inv] == dead {
                    self.rows[target as usize][inv] = UNDEFINED;
                }
                let mu = self.rep(dead);
                let nu = self.rep(target);
                let mu_l = self.rows[mu as usize][l.index()];
                let nu_inv = self.rows[nu as usize][inv];
                if mu_l != UNDEFINED {
                    self.merge(nu, mu_l, &mut queue);
                } else if nu_inv != UNDEFINED {
                    self.merge(mu, nu_inv, &mut queue);
                } else {
                    self.set(mu, l, nu);
                }
            }
        }
    }

    /// Scans the cyclic word starting at `start` from coset `c`; fills a
    /// single gap or records a coincidence.
    fn scan_cycle(&mut self, ri: usize, start: usize, c: u32) {
        let len = self.relators[ri].len();
        let at = |k: usize| (start + k) % len;
        let mut f = c;
        let mut i = 0;
        while i < len {
            let l = self.relators[ri][at(i)];
            let next = self.rows[f as usize][l.index()];
            if next == UNDEFINED {
                break;
            }
            f = next;
            i += 1;
        }
        if i == len {
            if f != c {
                self.coincidence(f, c);
            }
            return;
        }
        let mut b = c;
        let mut j = len;
        while j > i {
            let l = self.relators[ri][at(j - 1)].inverse();
            let next = self.rows[b as usize][l.index()];
            if next == UNDEFINED {
                break;
            }
            b = next;
            j -= 1;
        }
        if j == i {
            if f != b {
                self.coincidence(f, b);
            }
        } else if j == i + 1 {
            let l = self.relators[ri][at(i)];
            self.set(f, l, b);
        }
    }

    /// Traces a subgroup generator at coset 0, filling a single gap.
    fn scan_subgen(&mut self, gi: usize) {
        let len = self.subgens[gi].len();
        let root = self.rep(0);
        let mut f = root;
        let mut i = 0;
        while i < len {
            let next = self.rows[f as usize][self.subgens[gi][i].index()];
            if next == UNDEFINED {
                break;
            }
            f = next;
            i += 1;
        }
        if i == len {
            if f != root {
                self.coincidence(f, root);
            }
            return;
        }
        let mut b = root;
        let mut j = len;
        while j > i {
            let next = self.rows[b as usize][self.subgens[gi][j - 1].inverse().index()];
            if next == UNDEFINED {
                break;
            }
            b = next;
            j -= 1;
        }
        if j == i {
            if f != b {
                self.coincidence(f, b);
            }
        } else if j == i + 1 {
            let l = self.subgens[gi][i];
            self.set(f, l, b);
        }
    }

    fn process_deductions(&mut self) {
        loop {
            while let Some((c, l)) = self.deductions.pop() {
                if !self.is_live(c) {
                    continue;
                }
                let d = self.rows[c as usize][l.index()];
                if d == UNDEFINED || !self.is_live(d) {
                    continue;
                }
                for k in 0..self.occurrences[l.index()].len() {
                    let (ri, pos) = self.occurrences[l.index()][k];
                    if !self.is_live(c) {
                        break;
                    }
                    self.scan_cycle(ri, pos, c);
                }
                let li = l.inverse().index();
                for k in 0..self.occurrences[li].len() {
                    let (ri, pos) = self.occurrences[li][k];
                    if !self.is_live(d) {
                        break;
                    }
                    self.scan_cycle(ri, pos, d);
                }
            }
            let before = self.live;
            let marker = self.rows.len();
            for gi in 0..self.subgens.len() {
                self.scan_subgen(gi);
            }
            if self.deductions.is_empty() && self.live == before && self.rows.len() == marker {
                return;
            }
        }
    }

    fn first_gap(&self, from: usize) -> Option<(u32, Letter)> {
        (from..self.rows.len())
            .filter(|&c| self.is_live(c as u32))
            .find_map(|c| Letter::ALL.into_iter().find(|l| self.rows[c][l.index()] == UNDEFINED).map(|l| (c as u32, l)))
    }

    fn run(&mut self) -> Result<(), EnumerationError> {
        self.process_deductions();
        let mut cursor = 0usize;
        loop {
            let live_before = self.live;
            let Some((c, l)) = self.first_gap(cursor) else {
                return Ok(());
            };
            cursor = c as usize;
            self.define(c, l)?;
            self.process_deductions();
            if self.live <= live_before {
                // a coincidence may have emptied an earlier row's entry
                cursor = 0;
            }
        }
    }

    fn into_table(mut self) -> CosetTable {
        let n = self.rows.len();
        let mut compact = vec![UNDEFINED; n];
        let mut next = 0u32;
        for c in 0..n {
            if self.is_live(c as u32) {
                compact[c] = next;
                next += 1;
            }
        }
        let mut rows = Vec::with_capacity(next as usize);
        for c in 0..n {
            if !self.is_live(c as u32) {
                continue;
            }
            let mut row = [UNDEFINED; 4];
            for j in 0..4 {
                let v = self.rows[c][j];
                if v != UNDEFINED {
                    let r = self.rep(v);
                    row[j] = compact[r as usize];
                }
            }
            rows.push(row);
        }
        CosetTable::from_rows(rows).standardize()
    }
}

/// Enumerates the cosets of `⟨subgroup_gens⟩` in the group presented by
/// `pres`, returning a complete standard table.
///
/// Fails with [`EnumerationError::ResourceExceeded`] once more than
/// `max_cosets` cosets would be live at the same time; a table is only
/// returned when the enumeration closed.
pub fn todd_coxeter(
    pres: &Presentation,
    subgroup_gens: &[Word],
    max_cosets: usize,
) -> Result<CosetTable, EnumerationError> {
    assert!(max_cosets >= 1, "max_cosets must be positive");
    let relators: Vec<Vec<Letter>> = pres.relators().iter().map(Word::to_letter_vec).collect();
    let subgens: Vec<Vec<Letter>> =
        subgroup_gens.iter().map(|w| w.reduce().to_letter_vec()).filter(|w| !w.is_empty()).collect();
    let mut e = Enumerator::new(relators, subgens, max_cosets);
    e.run()?;
    Ok(e.into_table())
}
