//! Inclusions between triangle groups, and the tests that decide whether a
//! kernel `Γ ◁ Δ` stays normal in a larger triangle group `Δ′ ⊃ Δ`.
//!
//! Surfaces are identified through the largest triangle group normalizing
//! `Γ`: two kernels give the same surface exactly when their closures agree
//! up to the orientation-preserving symmetries of that group, so the
//! surface key is the least canonical key over that orbit.

pub mod geometry;
mod rules;

use alloc::string::String;
use alloc::vec::Vec;

pub use rules::{
    inclusion_rules, parse_rules, pattern_in_sorted, rule_data, sorted_in_pattern, InclusionRule, Pattern,
    PatternEntry, RuleDataError, RuleInstance, MAX_INCLUSION_INDEX,
};

use crate::fpgroup::{schreier_generators, todd_coxeter, CosetTable, EnumerationError, Presentation, Word};
use crate::normal_search::RegularTable;
use crate::quotient::{self, CanonicalKey};
use crate::signatures::Signature;

use self::geometry::TriangleModel;

/// Orientation-preserving relabelings of the generators that keep the
/// orders: `γ0 ↦ g_π(0)`, `γ1 ↦ g_π(1)` with `g2 = γ1⁻¹γ0⁻¹`. The identity
/// comes first. Together with inner automorphisms these realize the
/// normalizer of `Δ` in `PSL₂(ℝ)`.
pub fn symmetries(sig: Signature) -> Vec<[Word; 2]> {
    let o = sig.orders();
    let g = [Word::parse("a").unwrap(), Word::parse("b").unwrap(), Word::parse("b^-1 a^-1").unwrap()];
    [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]]
        .iter()
        .filter(|pi| (0..3).all(|i| o[pi[i]] == o[i]))
        .map(|pi| [g[pi[0]].clone(), g[pi[1]].clone()])
        .collect()
}

/// Standard table of `α⁻¹(Γ)` for the automorphism `α` given by the images
/// of `γ0` and `γ1`.
pub fn transport(table: &CosetTable, images: &[Word; 2]) -> CosetTable {
    let g0 = table.word_permutation(&images[0]);
    let g1 = table.word_permutation(&images[1]);
    CosetTable::from_permutations(&g0, &g1).standardize()
}

/// Least canonical key over the symmetry orbit of a kernel.
pub fn orbit_key(sig: Signature, table: &CosetTable) -> CanonicalKey {
    symmetries(sig)
        .iter()
        .map(|s| quotient::canonical_key(&sig, &transport(table, s)))
        .min()
        .expect("identity is always a symmetry")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub instance: String,
    pub claimed_index: u32,
    /// Index of the embedded subgroup found by coset enumeration.
    pub found_index: Option<usize>,
    /// Embedded generators and their product are positive rotations of the
    /// right orders.
    pub orientation_ok: bool,
    pub quotients_checked: usize,
    /// Quotients of `Δ′` on which a rewritten relator of `Δ` fails to close.
    pub quotient_failures: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.found_index == Some(self.claimed_index as usize) && self.orientation_ok && self.quotient_failures == 0
    }
}

/// Checks an instance: the index by coset enumeration over the embedded
/// generators, orientation in a `PSL₂(ℝ)` model, and the rewritten relators
/// of `Δ` on each supplied complete table of `Δ′`.
pub fn validate_rule(inst: &RuleInstance, super_quotients: &[CosetTable]) -> ValidationReport {
    let pres = Presentation::triangle(inst.sup);
    let found_index = todd_coxeter(&pres, &inst.embedding, 64 * MAX_INCLUSION_INDEX as usize).ok().map(|t| t.len());
    let model = TriangleModel::new(inst.sup.orders());
    let third = inst.embedding[0].concat(&inst.embedding[1]).inverse();
    let orders = inst.sub.orders();
    let orientation_ok = model.is_positive_rotation(&inst.embedding[0], orders[0])
        && model.is_positive_rotation(&inst.embedding[1], orders[1])
        && model.is_positive_rotation(&third, orders[2]);
    let rewritten: Vec<Word> =
        Presentation::triangle(inst.sub).relators().iter().map(|r| r.substitute(&inst.embedding)).collect();
    let quotient_failures = super_quotients.iter().filter(|t| !t.satisfies(&rewritten)).count();
    ValidationReport {
        instance: alloc::format!("{inst}"),
        claimed_index: inst.index,
        found_index,
        orientation_ok,
        quotients_checked: super_quotients.len(),
        quotient_failures,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtensionError {
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error("rule {rule}: expected index {expected}, coset enumeration gave {found}")]
    IndexMismatch { rule: String, expected: usize, found: usize },
    #[error("record over {found} does not match rule over {expected}")]
    SignatureMismatch { expected: Signature, found: Signature },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionResult {
    pub super_signature: Signature,
    pub super_index: usize,
    pub table: RegularTable,
}

/// Coset budget for enumerating a kernel of index `expected` in `Δ′`. The
/// additive slack covers the enumerator's overshoot on small tables.
pub fn extension_budget(expected: usize) -> usize {
    (expected * 5).div_ceil(4) + 64
}

/// Tests whether the kernel given by `table` over `inst.sub` is normal in
/// `inst.sup`, returning its table there if so.
pub fn try_extend(table: &RegularTable, inst: &RuleInstance) -> Result<Option<ExtensionResult>, ExtensionError> {
    if table.signature() != inst.sub {
        return Err(ExtensionError::SignatureMismatch { expected: inst.sub, found: table.signature() });
    }
    let n = table.index();
    let expected = n * inst.index as usize;
    let gens: Vec<Word> = schreier_generators(table.table())
        .expect("regular tables are complete")
        .iter()
        .map(|w| w.substitute(&inst.embedding))
        .collect();
    let pres = Presentation::triangle(inst.sup);
    let t = todd_coxeter(&pres, &gens, extension_budget(expected))?;
    if t.len() != expected {
        return Err(ExtensionError::IndexMismatch { rule: inst.rule.clone(), expected, found: t.len() });
    }
    if !quotient::is_regular(&t) {
        return Ok(None);
    }
    Ok(Some(ExtensionResult {
        super_signature: inst.sup,
        super_index: expected,
        table: RegularTable::new_unchecked(inst.sup, t),
    }))
}

/// The inclusion table with instances cached per signature.
#[derive(Debug, Clone)]
pub struct Inclusions {
    rules: Vec<InclusionRule>,
}

/// Order in which applicable rules are tried during closure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleOrder {
    Forward,
    Reverse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    /// Kernel over the largest triangle group reached.
    pub top: RegularTable,
    /// Rules applied, in order.
    pub steps: Vec<String>,
    /// Identifies the surface.
    pub surface_key: CanonicalKey,
}

impl Inclusions {
    pub fn standard() -> Result<Inclusions, RuleDataError> {
        Ok(Inclusions { rules: inclusion_rules()? })
    }

    pub fn from_rules(rules: Vec<InclusionRule>) -> Inclusions {
        Inclusions { rules }
    }

    pub fn rules(&self) -> &[InclusionRule] {
        &self.rules
    }

    /// Every instance whose smaller group is `Δ(sig)`.
    pub fn instances_for(&self, sig: Signature) -> Vec<RuleInstance> {
        self.rules.iter().flat_map(|r| r.instances_for(sig)).collect()
    }

    /// One step up, trying each applicable instance against each symmetric
    /// image of the kernel.
    pub fn extend_once(
        &self,
        table: &RegularTable,
        order: RuleOrder,
    ) -> Result<Option<(String, ExtensionResult)>, ExtensionError> {
        let sig = table.signature();
        let mut instances = self.instances_for(sig);
        if order == RuleOrder::Reverse {
            instances.reverse();
        }
        let syms = symmetries(sig);
        for inst in &instances {
            for s in &syms {
                let image = RegularTable::new_unchecked(sig, transport(table.table(), s));
                if let Some(ext) = try_extend(&image, inst)? {
                    return Ok(Some((alloc::format!("{inst}"), ext)));
                }
            }
        }
        Ok(None)
    }

    /// Repeats [`Inclusions::extend_once`] until no rule applies.
    pub fn maximal_closure(&self, table: &RegularTable, order: RuleOrder) -> Result<Closure, ExtensionError> {
        let mut top = table.clone();
        let mut steps = Vec::new();
        while let Some((name, ext)) = self.extend_once(&top, order)? {
            steps.push(name);
            top = ext.table;
        }
        let surface_key = orbit_key(top.signature(), top.table());
        Ok(Closure { top, steps, surface_key })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_search::{enumerate_normal, SearchConfig};

    fn sig(p: u32, q: u32, r: u32) -> Signature {
        Signature::new(p, q, r).unwrap()
    }

    #[test]
    fn symmetry_counts() {
        assert_eq!(symmetries(sig(2, 3, 7)).len(), 1);
        assert_eq!(symmetries(sig(3, 3, 7)).len(), 2);
        assert_eq!(symmetries(sig(2, 7, 7)).len(), 2);
        assert_eq!(symmetries(sig(7, 7, 7)).len(), 6);
    }

    #[test]
    fn every_shipped_rule_validates() {
        let inc = Inclusions::standard().unwrap();
        for rule in inc.rules() {
            let vars: Vec<char> = rule.sub.0.iter().filter_map(|e| e.var).collect();
            let mut tried = 0;
            for x in 2..=9u32 {
                for y in 2..=5u32 {
                    let mut params: Vec<(char, u32)> = Vec::new();
                    for (i, v) in vars.iter().enumerate() {
                        if !params.iter().any(|(c, _)| c == v) {
                            params.push((*v, if i == 0 { x } else { y }));
                        }
                    }
                    if let Some(inst) = rule.instantiate(&params) {
                        let report = validate_rule(&inst, &[]);
                        assert!(report.passed(), "{report:?}");
                        tried += 1;
                    }
                }
            }
            assert!(tried > 0, "{}", rule.name);
        }
    }

    #[test]
    fn corrupted_embedding_is_reported() {
        let inc = Inclusions::standard().unwrap();
        let mut inst = inc.instances_for(sig(7, 7, 7)).into_iter().find(|i| i.sup == sig(2, 3, 7)).unwrap();
        assert!(validate_rule(&inst, &[]).passed());
        inst.embedding[1] = Word::parse("b a").unwrap();
        let report = validate_rule(&inst, &[]);
        assert!(!report.passed());
    }

    #[test]
    fn rewritten_relators_close_on_hurwitz_quotient() {
        let inc = Inclusions::standard().unwrap();
        let klein = enumerate_normal(sig(2, 3, 7), SearchConfig::torsion_free(168)).unwrap();
        let tables: Vec<CosetTable> = klein.iter().map(|t| t.table().clone()).collect();
        assert_eq!(tables.len(), 1);
        for inst in [sig(7, 7, 7), sig(2, 7, 7), sig(3, 3, 7)]
            .into_iter()
            .flat_map(|s| inc.instances_for(s))
            .filter(|i| i.sup == sig(2, 3, 7))
        {
            let report = validate_rule(&inst, &tables);
            assert!(report.passed() && report.quotients_checked == 1, "{report:?}");
        }
    }

    #[test]
    fn klein_quartic_closure() {
        let inc = Inclusions::standard().unwrap();
        let hurwitz = enumerate_normal(sig(2, 3, 7), SearchConfig::torsion_free(168)).unwrap();
        let klein = inc.maximal_closure(&hurwitz[0], RuleOrder::Forward).unwrap();
        assert_eq!(klein.top, hurwitz[0]);
        assert!(klein.steps.is_empty());
        let z7 = enumerate_normal(sig(7, 7, 7), SearchConfig::torsion_free(7)).unwrap();
        assert_eq!(z7.len(), 5);
        let mut to_klein = 0;
        for t in &z7 {
            let c = inc.maximal_closure(t, RuleOrder::Forward).unwrap();
            let r = inc.maximal_closure(t, RuleOrder::Reverse).unwrap();
            assert_eq!(c.surface_key, r.surface_key);
            assert_eq!(c.top.info().genus, Some(3));
            if c.surface_key == klein.surface_key {
                assert_eq!(c.top.signature(), sig(2, 3, 7));
                assert_eq!(c.top.index(), 168);
                to_klein += 1;
            } else {
                assert_eq!(c.top.signature(), sig(2, 7, 14));
            }
            let again = inc.maximal_closure(&c.top, RuleOrder::Forward).unwrap();
            assert_eq!(again.surface_key, c.surface_key);
            assert!(again.steps.is_empty());
        }
        assert_eq!(to_klein, 2);
    }
}
