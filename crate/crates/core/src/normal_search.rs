//! Exhaustive search for the normal subgroups of bounded index in a
//! hyperbolic triangle group.
//!
//! The search walks partial coset tables in standard numbering. The branch
//! point is always the first undefined `(coset, letter)` slot in scan order;
//! the choices are every existing coset not yet hit in that column, plus a
//! fresh coset while the bound allows. Every complete table reached this way
//! is standard, so each subgroup shows up exactly once.
//!
//! Deductions after each choice:
//!
//! * the three triangle relators are scanned around every new edge;
//! * choosing an existing coset `k` at slot `(c, x)` means `w_c x w_k⁻¹` lies
//!   in the subgroup. A normal subgroup contains all its conjugates, so that
//!   word is added as a relator and traced at every coset;
//! * a scan that closes on the wrong coset is a contradiction (two cosets
//!   that are distinct by construction would have to coincide).
//!
//! Optional prunes: `uniform_cycle` (all cycles of `γ0`, `γ1`, `γ0γ1` have a
//! common length, exactly the signature entry in torsion-free mode) and
//! `left_coherence` (left translations by tree words are partial injective
//! automorphisms). Complete tables are checked for regularity by closure.

use alloc::vec;
use alloc::vec::Vec;

use crate::fpgroup::{CosetTable, Letter, UNDEFINED};
use crate::quotient::{self, GroupOrder};
use crate::signatures::Signature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchMode {
    All,
    TorsionFreeOnly,
}

impl SearchMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SearchMode::All => "all",
            SearchMode::TorsionFreeOnly => "torsion-free",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub n_max: usize,
    pub mode: SearchMode,
    pub uniform_cycle: bool,
    pub left_coherence: bool,
    /// Maximum number of search nodes per call to [`NormalSearch::run`].
    pub node_budget: Option<u64>,
}

impl SearchConfig {
    pub fn new(n_max: usize, mode: SearchMode) -> Self {
        assert!(n_max >= 1, "n_max must be at least 1");
        SearchConfig { n_max, mode, uniform_cycle: true, left_coherence: false, node_budget: None }
    }

    pub fn torsion_free(n_max: usize) -> Self {
        SearchConfig::new(n_max, SearchMode::TorsionFreeOnly)
    }

    pub fn all(n_max: usize) -> Self {
        SearchConfig::new(n_max, SearchMode::All)
    }

    pub fn with_prunes(mut self, uniform_cycle: bool, left_coherence: bool) -> Self {
        self.uniform_cycle = uniform_cycle;
        self.left_coherence = left_coherence;
        self
    }

    pub fn with_node_budget(mut self, budget: Option<u64>) -> Self {
        self.node_budget = budget;
        self
    }
}

/// A complete standard coset table whose permutation group acts regularly,
/// i.e. the coset table of a normal subgroup (the kernel).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegularTable {
    signature: Signature,
    table: CosetTable,
}

impl RegularTable {
    /// Checks completeness, relators, standard numbering and regularity.
    pub fn new(signature: Signature, table: CosetTable) -> Option<Self> {
        let pres = crate::fpgroup::Presentation::triangle(signature);
        let ok = table.is_complete()
            && table.is_standard()
            && table.satisfies(pres.relators())
            && quotient::is_regular(&table);
        ok.then_some(RegularTable { signature, table })
    }

    pub(crate) fn new_unchecked(signature: Signature, table: CosetTable) -> Self {
        RegularTable { signature, table }
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn table(&self) -> &CosetTable {
        &self.table
    }

    pub fn index(&self) -> usize {
        self.table.len()
    }

    /// The table of `Δ` itself.
    pub fn is_whole_group(&self) -> bool {
        self.table.len() == 1
    }

    pub fn info(&self) -> quotient::QuotientInfo {
        quotient::analyze(&self.signature, &self.table)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.table.to_bytes().expect("complete")
    }
}

/// Deterministic counters of a search run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Choices applied.
    pub nodes: u64,
    /// Tables emitted.
    pub solutions: u64,
    /// Choices refuted by relator scans.
    pub relator_conflicts: u64,
    /// Choices refuted by cycle-length checks.
    pub cycle_prunes: u64,
    /// Choices refuted by left-translation checks.
    pub coherence_prunes: u64,
    /// Complete tables that were not regular or failed the mode filter.
    pub discarded: u64,
    /// Nodes per search depth.
    pub depth_profile: Vec<u64>,
}

/// Resumable position in the search tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub signature: Signature,
    pub n_max: usize,
    pub mode: SearchMode,
    /// For each open frame, the index of the next choice to try. All frames
    /// but the last are replayed with the choice before it.
    pub path: Vec<u32>,
    pub stats: SearchStats,
}

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"QPCK";
pub const CHECKPOINT_VERSION: u16 = 1;

impl Checkpoint {
    /// Versioned little-endian encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        for o in self.signature.orders() {
            out.extend_from_slice(&o.to_le_bytes());
        }
        out.extend_from_slice(&(self.n_max as u32).to_le_bytes());
        out.push(match self.mode {
            SearchMode::All => 0,
            SearchMode::TorsionFreeOnly => 1,
        });
        let s = &self.stats;
        for v in [s.nodes, s.solutions, s.relator_conflicts, s.cycle_prunes, s.coherence_prunes, s.discarded] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(s.depth_profile.len() as u32).to_le_bytes());
        for &v in &s.depth_profile {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(self.path.len() as u32).to_le_bytes());
        for &v in &self.path {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint, SearchError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != CHECKPOINT_MAGIC {
            return Err(SearchError::BadCheckpoint("bad magic"));
        }
        let version = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
        if version != CHECKPOINT_VERSION {
            return Err(SearchError::BadCheckpoint("unsupported version"));
        }
        let (a, b, c) = (r.u32()?, r.u32()?, r.u32()?);
        let signature = Signature::new(a, b, c).map_err(|_| SearchError::BadCheckpoint("bad signature"))?;
        let n_max = r.u32()? as usize;
        let mode = match r.take(1)?[0] {
            0 => SearchMode::All,
            1 => SearchMode::TorsionFreeOnly,
            _ => return Err(SearchError::BadCheckpoint("bad mode")),
        };
        let mut stats = SearchStats {
            nodes: r.u64()?,
            solutions: r.u64()?,
            relator_conflicts: r.u64()?,
            cycle_prunes: r.u64()?,
            coherence_prunes: r.u64()?,
            discarded: r.u64()?,
            depth_profile: Vec::new(),
        };
        let len = r.u32()?;
        for _ in 0..len {
            stats.depth_profile.push(r.u64()?);
        }
        let len = r.u32()?;
        let mut path = Vec::with_capacity(len as usize);
        for _ in 0..len {
            path.push(r.u32()?);
        }
        if r.pos != bytes.len() {
            return Err(SearchError::BadCheckpoint("trailing bytes"));
        }
        Ok(Checkpoint { signature, n_max, mode, path, stats })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8], SearchError> {
        let out = self.bytes.get(self.pos..self.pos + k).ok_or(SearchError::BadCheckpoint("truncated"))?;
        self.pos += k;
        Ok(out)
    }
    fn u32(&mut self) -> Result<u32, SearchError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, SearchError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("node budget exhausted after {} nodes", checkpoint.stats.nodes)]
    BudgetExceeded { checkpoint: Checkpoint },
    #[error("search interrupted after {} nodes", checkpoint.stats.nodes)]
    Interrupted { checkpoint: Checkpoint },
    #[error("checkpoint does not match this search: {0}")]
    BadCheckpoint(&'static str),
}

impl SearchError {
    pub fn checkpoint(&self) -> Option<&Checkpoint> {
        match self {
            SearchError::BudgetExceeded { checkpoint } | SearchError::Interrupted { checkpoint } => Some(checkpoint),
            SearchError::BadCheckpoint(_) => None,
        }
    }
}

const NEW_COSET: u32 = UNDEFINED;

/// The words whose cycles are constrained: `γ0`, `γ1`, `γ0γ1`.
const BASES: [&[Letter]; 3] = [&[Letter::G0], &[Letter::G1], &[Letter::G0, Letter::G1]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Refuted {
    Relator,
    Cycle,
    Coherence,
}

#[derive(Clone, Copy)]
struct Snapshot {
    trail: usize,
    relators: usize,
    occurrences: [usize; 4],
    cosets: usize,
    closed: [u32; 3],
    cursor: usize,
}

struct Frame {
    slot: (u32, Letter),
    choices: Vec<u32>,
    next: usize,
    snapshot: Snapshot,
}

/// Resumable normal-subgroup search over one signature.
pub struct NormalSearch {
    sig: Signature,
    cfg: SearchConfig,
    exponents: [u32; 3],
    rows: Vec<[u32; 4]>,
    /// Tree edge that created each coset.
    parent: Vec<(u32, Letter)>,
    cosets: usize,
    trail: Vec<(u32, Letter)>,
    relators: Vec<Vec<Letter>>,
    occurrences: [Vec<(u32, u32)>; 4],
    queue: Vec<(u32, Letter)>,
    /// Common closed cycle length of each base word; 0 while unknown.
    closed: [u32; 3],
    /// Slot index (`coset * 4 + letter`) below which everything is defined.
    cursor: usize,
    frames: Vec<Frame>,
    stats: SearchStats,
    started: bool,
    finished: bool,
    scratch: Vec<u32>,
}

fn period(w: &[Letter]) -> usize {
    let n = w.len();
    (1..=n).find(|&d| n.is_multiple_of(d) && (0..n).all(|i| w[i] == w[(i + d) % n])).unwrap_or(n)
}

impl NormalSearch {
    pub fn new(sig: Signature, cfg: SearchConfig) -> Self {
        assert!(cfg.n_max >= 1);
        let mut s = NormalSearch {
            sig,
            exponents: sig.orders(),
            rows: vec![[UNDEFINED; 4]; cfg.n_max],
            parent: vec![(0, Letter::G0); cfg.n_max],
            cosets: 1,
            trail: Vec::new(),
            relators: Vec::new(),
            occurrences: Default::default(),
            queue: Vec::new(),
            closed: [0; 3],
            cursor: 0,
            frames: Vec::new(),
            stats: SearchStats::default(),
            started: false,
            finished: false,
            scratch: Vec::new(),
            cfg,
        };
        for (base, &e) in BASES.iter().zip(sig.orders().iter()) {
            let r: Vec<Letter> = base.iter().copied().cycle().take(base.len() * e as usize).collect();
            s.push_relator(r);
        }
        s
    }

    /// Restores a search from a checkpoint produced by the same signature
    /// and configuration.
    pub fn resume(sig: Signature, cfg: SearchConfig, cp: &Checkpoint) -> Result<Self, SearchError> {
        if cp.signature != sig || cp.n_max != cfg.n_max || cp.mode != cfg.mode {
            return Err(SearchError::BadCheckpoint("signature or configuration differs"));
        }
        let mut s = NormalSearch::new(sig, cfg);
        s.started = true;
        s.push_frame_at_next_slot();
        for (depth, &next) in cp.path.iter().enumerate() {
            let last = depth + 1 == cp.path.len();
            let frame = s.frames.last_mut().ok_or(SearchError::BadCheckpoint("path too long"))?;
            if next as usize > frame.choices.len() {
                return Err(SearchError::BadCheckpoint("choice out of range"));
            }
            frame.next = next as usize;
            if last {
                break;
            }
            if next == 0 {
                return Err(SearchError::BadCheckpoint("inner frame without an applied choice"));
            }
            let slot = frame.slot;
            let choice = frame.choices[next as usize - 1];
            if s.apply(slot, choice).is_err() || !s.push_frame_at_next_slot() {
                return Err(SearchError::BadCheckpoint("replayed choice is inconsistent"));
            }
        }
        s.stats = cp.stats.clone();
        if cp.path.is_empty() {
            s.frames.clear();
            s.finished = true;
        }
        Ok(s)
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn push_relator(&mut self, r: Vec<Letter>) {
        let idx = self.relators.len() as u32;
        for (pos, l) in r.iter().enumerate().take(period(&r)) {
            self.occurrences[l.index()].push((idx, pos as u32));
        }
        self.relators.push(r);
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            trail: self.trail.len(),
            relators: self.relators.len(),
            occurrences: [
                self.occurrences[0].len(),
                self.occurrences[1].len(),
                self.occurrences[2].len(),
                self.occurrences[3].len(),
            ],
            cosets: self.cosets,
            closed: self.closed,
            cursor: self.cursor,
        }
    }

    fn restore(&mut self, snap: &Snapshot) {
        while self.trail.len() > snap.trail {
            let (c, l) = self.trail.pop().unwrap();
            let d = self.rows[c as usize][l.index()];
            self.rows[c as usize][l.index()] = UNDEFINED;
            self.rows[d as usize][l.inverse().index()] = UNDEFINED;
        }
        self.relators.truncate(snap.relators);
        for i in 0..4 {
            self.occurrences[i].truncate(snap.occurrences[i]);
        }
        self.cosets = snap.cosets;
        self.closed = snap.closed;
        self.cursor = snap.cursor;
        self.queue.clear();
    }

    #[inline]
    fn set(&mut self, c: u32, l: Letter, d: u32) -> Result<(), Refuted> {
        let cur = self.rows[c as usize][l.index()];
        if cur != UNDEFINED {
            return if cur == d { Ok(()) } else { Err(Refuted::Relator) };
        }
        if self.rows[d as usize][l.inverse().index()] != UNDEFINED {
            return Err(Refuted::Relator);
        }
        self.rows[c as usize][l.index()] = d;
        self.rows[d as usize][l.inverse().index()] = c;
        self.trail.push((c, l));
        self.queue.push((c, l));
        Ok(())
    }

    /// Scans relator `ri` rotated to `start` around coset `c`.
    fn scan(&mut self, ri: usize, start: usize, c: u32) -> Result<(), Refuted> {
        let rel = &self.relators[ri];
        let len = rel.len();
        let mut f = c;
        let mut i = 0;
        let mut pos = start;
        while i < len {
            let next = self.rows[f as usize][rel[pos].index()];
            if next == UNDEFINED {
                break;
            }
            f = next;
            i += 1;
            pos += 1;
            if pos == len {
                pos = 0;
            }
        }
        if i == len {
            return if f == c { Ok(()) } else { Err(Refuted::Relator) };
        }
        let gap_pos = pos;
        let mut b = c;
        let mut j = len;
        let mut bpos = if start == 0 { len - 1 } else { start - 1 };
        while j > i {
            let next = self.rows[b as usize][rel[bpos].inverse().index()];
            if next == UNDEFINED {
                break;
            }
            b = next;
            j -= 1;
            bpos = if bpos == 0 { len - 1 } else { bpos - 1 };
        }
        if j == i {
            return if f == b { Ok(()) } else { Err(Refuted::Relator) };
        }
        if j == i + 1 {
            let l = rel[gap_pos];
            return self.set(f, l, b);
        }
        Ok(())
    }

    /// Follows the cycle of base word `bi` from `s`. Returns the number of
    /// base steps if it closes.
    fn cycle_from(&self, bi: usize, s: u32) -> Option<u32> {
        let base = BASES[bi];
        let limit = self.exponents[bi] as usize + 1;
        let mut c = s;
        for k in 1..=limit {
            for &l in base {
                c = self.rows[c as usize][l.index()];
                if c == UNDEFINED {
                    return None;
                }
            }
            if c == s {
                return Some(k as u32);
            }
        }
        None
    }

    fn check_cycles(&mut self, c: u32, l: Letter, d: u32) -> Result<(), Refuted> {
        let (x_start, xy_start) = match l {
            Letter::G0 => (Some(c), Some(c)),
            Letter::G0Inv => (Some(d), Some(d)),
            Letter::G1 => (None, Some(self.rows[c as usize][Letter::G0Inv.index()])),
            Letter::G1Inv => (None, Some(self.rows[d as usize][Letter::G0Inv.index()])),
        };
        let y_start = match l {
            Letter::G1 => Some(c),
            Letter::G1Inv => Some(d),
            _ => None,
        };
        for (bi, start) in [(0, x_start), (1, y_start), (2, xy_start)] {
            let Some(s) = start else { continue };
            if s == UNDEFINED {
                continue;
            }
            let Some(k) = self.cycle_from(bi, s) else { continue };
            match self.cfg.mode {
                SearchMode::TorsionFreeOnly => {
                    if k != self.exponents[bi] {
                        return Err(Refuted::Cycle);
                    }
                }
                SearchMode::All => {
                    if self.closed[bi] == 0 {
                        self.closed[bi] = k;
                        if k < self.exponents[bi] {
                            let base = BASES[bi];
                            let r: Vec<Letter> = base.iter().copied().cycle().take(base.len() * k as usize).collect();
                            let ri = self.relators.len();
                            self.push_relator(r);
                            for coset in 0..self.cosets as u32 {
                                self.scan(ri, 0, coset)?;
                            }
                        }
                    } else if self.closed[bi] != k {
                        return Err(Refuted::Cycle);
                    }
                }
            }
        }
        Ok(())
    }

    fn propagate(&mut self) -> Result<(), Refuted> {
        while let Some((c, l)) = self.queue.pop() {
            let d = self.rows[c as usize][l.index()];
            let li = l.index();
            let mut k = 0;
            while k < self.occurrences[li].len() {
                let (ri, pos) = self.occurrences[li][k];
                self.scan(ri as usize, pos as usize, c)?;
                k += 1;
            }
            let ii = l.inverse().index();
            let mut k = 0;
            while k < self.occurrences[ii].len() {
                let (ri, pos) = self.occurrences[ii][k];
                self.scan(ri as usize, pos as usize, d)?;
                k += 1;
            }
            if self.cfg.uniform_cycle {
                self.check_cycles(c, l, d)?;
            }
        }
        Ok(())
    }

    fn tree_word(&self, c: u32) -> Vec<Letter> {
        let mut w = Vec::new();
        let mut cur = c;
        while cur != 0 {
            let (p, l) = self.parent[cur as usize];
            w.push(l);
            cur = p;
        }
        w.reverse();
        w
    }

    /// Partial left translations `i ↦ j·w_i` must be injective and respect
    /// every defined edge.
    fn check_left_coherence(&mut self) -> Result<(), Refuted> {
        let m = self.cosets;
        let mut image = core::mem::take(&mut self.scratch);
        image.clear();
        image.resize(2 * m, UNDEFINED);
        let result = (|| {
            for j in 1..m as u32 {
                let (img, hit) = image.split_at_mut(m);
                hit.fill(UNDEFINED);
                img[0] = j;
                hit[j as usize] = 0;
                for i in 1..m {
                    let (p, l) = self.parent[i];
                    let src = img[p as usize];
                    let v = if src == UNDEFINED { UNDEFINED } else { self.rows[src as usize][l.index()] };
                    img[i] = v;
                    if v != UNDEFINED {
                        if hit[v as usize] != UNDEFINED {
                            return Err(Refuted::Coherence);
                        }
                        hit[v as usize] = i as u32;
                    }
                }
                for i in 0..m {
                    let src = img[i];
                    if src == UNDEFINED {
                        continue;
                    }
                    for l in Letter::ALL {
                        let t = self.rows[i][l.index()];
                        if t == UNDEFINED {
                            continue;
                        }
                        let dst = img[t as usize];
                        let via = self.rows[src as usize][l.index()];
                        if dst != UNDEFINED && via != UNDEFINED && dst != via {
                            return Err(Refuted::Coherence);
                        }
                    }
                }
            }
            Ok(())
        })();
        self.scratch = image;
        result
    }

    fn apply(&mut self, slot: (u32, Letter), choice: u32) -> Result<(), Refuted> {
        let (c, l) = slot;
        if choice == NEW_COSET {
            let d = self.cosets as u32;
            self.cosets += 1;
            self.parent[d as usize] = (c, l);
            self.set(c, l, d)?;
            self.propagate()?;
        } else {
            self.set(c, l, choice)?;
            self.propagate()?;
            let mut w = self.tree_word(c);
            w.push(l);
            let back = self.tree_word(choice);
            w.extend(back.iter().rev().map(|x| x.inverse()));
            let w = crate::fpgroup::Word::from_letters(w).cyclic_reduce().to_letter_vec();
            if !w.is_empty() {
                let ri = self.relators.len();
                self.push_relator(w);
                for coset in 0..self.cosets as u32 {
                    self.scan(ri, 0, coset)?;
                    self.propagate()?;
                }
            }
        }
        if self.cfg.left_coherence {
            self.check_left_coherence()?;
        }
        Ok(())
    }

    fn next_slot(&mut self) -> Option<(u32, Letter)> {
        let end = self.cosets * 4;
        while self.cursor < end {
            let c = self.cursor / 4;
            let l = Letter::from_index(self.cursor % 4);
            if self.rows[c][l.index()] == UNDEFINED {
                return Some((c as u32, l));
            }
            self.cursor += 1;
        }
        None
    }

    fn choices(&self, slot: (u32, Letter)) -> Vec<u32> {
        let inv = slot.1.inverse().index();
        let mut out: Vec<u32> = (0..self.cosets as u32).filter(|&k| self.rows[k as usize][inv] == UNDEFINED).collect();
        if self.cosets < self.cfg.n_max {
            out.push(NEW_COSET);
        }
        out
    }

    /// Pushes a frame for the next undefined slot; returns false if the
    /// table is complete.
    fn push_frame_at_next_slot(&mut self) -> bool {
        match self.next_slot() {
            None => false,
            Some(slot) => {
                let choices = self.choices(slot);
                let snapshot = self.snapshot();
                self.frames.push(Frame { slot, choices, next: 0, snapshot });
                true
            }
        }
    }

    fn complete_table(&self) -> CosetTable {
        let mut t = CosetTable::with_cosets(self.cosets);
        for c in 0..self.cosets {
            for l in [Letter::G0, Letter::G1] {
                t.set(c as u32, l, self.rows[c][l.index()]);
            }
        }
        t
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            signature: self.sig,
            n_max: self.cfg.n_max,
            mode: self.cfg.mode,
            path: self.frames.iter().map(|f| f.next as u32).collect(),
            stats: self.stats.clone(),
        }
    }

    fn emit_if_valid(&mut self, sink: &mut dyn FnMut(RegularTable)) {
        let table = self.complete_table();
        debug_assert!(table.is_standard());
        let n = table.len();
        let regular = quotient::permutation_group_order(&table, n + 1) == GroupOrder::Exact(n as u64);
        let mode_ok = match self.cfg.mode {
            SearchMode::All => true,
            SearchMode::TorsionFreeOnly => regular && quotient::generator_orders(&table) == self.sig.orders(),
        };
        if regular && mode_ok {
            self.stats.solutions += 1;
            sink(RegularTable::new_unchecked(self.sig, table));
        } else {
            self.stats.discarded += 1;
        }
    }

    /// Runs until the tree is exhausted, the node budget is spent, or
    /// `interrupt` returns true (polled every 4096 nodes).
    pub fn run(
        &mut self,
        sink: &mut dyn FnMut(RegularTable),
        interrupt: &mut dyn FnMut(&SearchStats) -> bool,
    ) -> Result<(), SearchError> {
        if self.finished {
            return Ok(());
        }
        let start_nodes = self.stats.nodes;
        if !self.started {
            self.started = true;
            if !self.push_frame_at_next_slot() {
                self.emit_if_valid(sink);
            }
        }
        loop {
            let Some(top) = self.frames.last_mut() else {
                self.finished = true;
                return Ok(());
            };
            if top.next >= top.choices.len() {
                let frame = self.frames.pop().unwrap();
                self.restore(&frame.snapshot);
                continue;
            }
            if let Some(budget) = self.cfg.node_budget {
                if self.stats.nodes - start_nodes >= budget {
                    return Err(SearchError::BudgetExceeded { checkpoint: self.checkpoint() });
                }
            }
            if self.stats.nodes % 4096 == 4095 && interrupt(&self.stats) {
                return Err(SearchError::Interrupted { checkpoint: self.checkpoint() });
            }
            let top = self.frames.last_mut().unwrap();
            let slot = top.slot;
            let choice = top.choices[top.next];
            top.next += 1;
            let snap = top.snapshot;
            self.restore(&snap);
            let depth = self.frames.len() - 1;
            if self.stats.depth_profile.len() <= depth {
                self.stats.depth_profile.resize(depth + 1, 0);
            }
            self.stats.depth_profile[depth] += 1;
            self.stats.nodes += 1;
            match self.apply(slot, choice) {
                Ok(()) => {
                    if !self.push_frame_at_next_slot() {
                        self.emit_if_valid(sink);
                    }
                }
                Err(Refuted::Relator) => self.stats.relator_conflicts += 1,
                Err(Refuted::Cycle) => self.stats.cycle_prunes += 1,
                Err(Refuted::Coherence) => self.stats.coherence_prunes += 1,
            }
        }
    }
}

/// Collects every normal subgroup of index at most `cfg.n_max` (only the
/// torsion-free ones in torsion-free mode), in search order.
pub fn enumerate_normal(sig: Signature, cfg: SearchConfig) -> Result<Vec<RegularTable>, SearchError> {
    enumerate_normal_with_stats(sig, cfg).map(|(tables, _)| tables)
}

pub fn enumerate_normal_with_stats(
    sig: Signature,
    cfg: SearchConfig,
) -> Result<(Vec<RegularTable>, SearchStats), SearchError> {
    let mut search = NormalSearch::new(sig, cfg);
    let mut out = Vec::new();
    search.run(&mut |t| out.push(t), &mut |_| false)?;
    Ok((out, search.stats().clone()))
}

/// Counters of a complete run.
pub fn search_statistics(sig: Signature, cfg: SearchConfig) -> Result<SearchStats, SearchError> {
    enumerate_normal_with_stats(sig, cfg).map(|(_, s)| s)
}
