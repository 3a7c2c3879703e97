//! The inclusion table: parsing, checksum and instantiation.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use sha2::{Digest, Sha256};

use crate::fpgroup::{Letter, Word};
use crate::signatures::Signature;

const DATA: &str = include_str!("../../data/inclusions.txt");
const DATA_SHA256: &str = include_str!("../../data/inclusions.sha256");

/// Largest index of an inclusion of one triangle group in another.
pub const MAX_INCLUSION_INDEX: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleDataError {
    #[error("inclusion data checksum mismatch")]
    Checksum,
    #[error("inclusion data line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// `coef` or `coef·var`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternEntry {
    pub coef: u32,
    pub var: Option<char>,
}

impl PatternEntry {
    fn eval(&self, params: &[(char, u32)]) -> Option<u32> {
        match self.var {
            None => Some(self.coef),
            Some(v) => params.iter().find(|(c, _)| *c == v).map(|(_, x)| self.coef * x),
        }
    }
}

impl fmt::Display for PatternEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.coef, self.var) {
            (c, None) => write!(f, "{c}"),
            (1, Some(v)) => write!(f, "{v}"),
            (c, Some(v)) => write!(f, "{c}{v}"),
        }
    }
}

/// Orders of `γ0`, `γ1`, `γ0γ1` as functions of the rule parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pattern(pub [PatternEntry; 3]);

impl Pattern {
    fn parse(s: &str) -> Result<Pattern, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("pattern needs three entries: {s}"));
        }
        let mut out = [PatternEntry { coef: 1, var: None }; 3];
        for (slot, part) in out.iter_mut().zip(parts) {
            let digits: String = part.chars().take_while(|c| c.is_ascii_digit()).collect();
            let rest = &part[digits.len()..];
            let var = match rest.len() {
                0 => None,
                1 if rest.chars().all(|c| c.is_ascii_lowercase()) => rest.chars().next(),
                _ => return Err(format!("bad pattern entry {part}")),
            };
            let coef = if digits.is_empty() {
                if var.is_none() {
                    return Err(format!("bad pattern entry {part}"));
                }
                1
            } else {
                digits.parse().map_err(|_| format!("bad coefficient in {part}"))?
            };
            *slot = PatternEntry { coef, var };
        }
        Ok(Pattern(out))
    }

    fn vars(&self) -> BTreeSet<char> {
        self.0.iter().filter_map(|e| e.var).collect()
    }

    pub fn eval(&self, params: &[(char, u32)]) -> Option<[u32; 3]> {
        Some([self.0[0].eval(params)?, self.0[1].eval(params)?, self.0[2].eval(params)?])
    }

    /// Parameter values making the pattern equal to `orders`.
    fn solve(&self, orders: [u32; 3]) -> Option<Vec<(char, u32)>> {
        let mut params: Vec<(char, u32)> = Vec::new();
        for (e, &x) in self.0.iter().zip(orders.iter()) {
            match e.var {
                None if e.coef == x => {}
                None => return None,
                Some(v) => {
                    if x % e.coef != 0 {
                        return None;
                    }
                    let val = x / e.coef;
                    match params.iter().find(|(c, _)| *c == v) {
                        Some(&(_, old)) if old != val => return None,
                        Some(_) => {}
                        None => params.push((v, val)),
                    }
                }
            }
        }
        params.sort();
        Some(params)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// A family of inclusions `Δ(sub) < Δ(super)` with embedding words in
/// pattern order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InclusionRule {
    pub name: String,
    pub sub: Pattern,
    pub sup: Pattern,
    pub index: u32,
    pub normal: bool,
    pub embedding: [Word; 2],
}

/// A rule at concrete parameter values, with the embedding rewritten
/// between the sorted presentations of both signatures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleInstance {
    pub rule: String,
    pub params: Vec<(char, u32)>,
    pub sub_orders: [u32; 3],
    pub super_orders: [u32; 3],
    pub sub: Signature,
    pub sup: Signature,
    pub index: u32,
    pub normal: bool,
    /// Pattern-order images of the smaller group's generators.
    pub pattern_embedding: [Word; 2],
    /// Images of the sorted `γ0, γ1` of `sub` as words in the sorted
    /// generators of `sup`.
    pub embedding: [Word; 2],
}

impl fmt::Display for RuleInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}) < ({}) [{}]", self.rule, self.sub, self.sup, self.index)
    }
}

fn standard_generators() -> [Word; 3] {
    [Word::letter(Letter::G0), Word::letter(Letter::G1), Word::from_letters([Letter::G1Inv, Letter::G0Inv])]
}

fn sort_permutation(orders: [u32; 3]) -> [usize; 3] {
    let mut idx = [0usize, 1, 2];
    idx.sort_by_key(|&i| orders[i]);
    idx
}

/// Sorted generators `h0, h1` as words in the pattern-order generators.
pub fn sorted_in_pattern(orders: [u32; 3]) -> [Word; 2] {
    let pi = sort_permutation(orders);
    let g = standard_generators();
    [g[pi[0]].clone(), g[pi[1]].clone()]
}

/// Pattern-order generators `g0, g1` as words in the sorted generators.
pub fn pattern_in_sorted(orders: [u32; 3]) -> [Word; 2] {
    let pi = sort_permutation(orders);
    let h = standard_generators();
    let mut g: [Word; 3] = [Word::empty(), Word::empty(), Word::empty()];
    g[pi[0]] = h[0].clone();
    g[pi[1]] = h[1].clone();
    // g0 g1 g2 = 1 fixes the remaining one.
    match pi[2] {
        0 => g[0] = g[1].concat(&g[2]).inverse().reduce(),
        1 => g[1] = g[0].inverse().concat(&g[2].inverse()).reduce(),
        _ => {}
    }
    [g[0].clone(), g[1].clone()]
}

impl InclusionRule {
    /// Instance at the given parameters, if both groups are hyperbolic and
    /// every entry is at least 2.
    pub fn instantiate(&self, params: &[(char, u32)]) -> Option<RuleInstance> {
        let sub_orders = self.sub.eval(params)?;
        let super_orders = self.sup.eval(params)?;
        if sub_orders.iter().chain(super_orders.iter()).any(|&x| x < 2) {
            return None;
        }
        let sub = Signature::new(sub_orders[0], sub_orders[1], sub_orders[2]).ok()?;
        let sup = Signature::new(super_orders[0], super_orders[1], super_orders[2]).ok()?;
        let to_sorted_super = pattern_in_sorted(super_orders);
        let embedding =
            sorted_in_pattern(sub_orders).map(|w| w.substitute(&self.embedding).substitute(&to_sorted_super));
        let mut params = params.to_vec();
        params.sort();
        Some(RuleInstance {
            rule: self.name.clone(),
            params,
            sub_orders,
            super_orders,
            sub,
            sup,
            index: self.index,
            normal: self.normal,
            pattern_embedding: self.embedding.clone(),
            embedding,
        })
    }

    /// All instances whose smaller group is `Δ(sig)`.
    pub fn instances_for(&self, sig: Signature) -> Vec<RuleInstance> {
        let [p, q, r] = sig.orders();
        let perms = [[p, q, r], [p, r, q], [q, p, r], [q, r, p], [r, p, q], [r, q, p]];
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for orders in perms {
            if let Some(params) = self.sub.solve(orders) {
                if seen.insert(params.clone()) {
                    out.extend(self.instantiate(&params));
                }
            }
        }
        out
    }
}

fn checksum_ok(data: &str, expected: &str) -> bool {
    let digest = Sha256::digest(data.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    hex == expected.trim()
}

/// Parses inclusion data in the shipped text format.
pub fn parse_rules(data: &str) -> Result<Vec<InclusionRule>, RuleDataError> {
    let err = |line: usize, message: String| RuleDataError::Syntax { line, message };
    let mut rules = Vec::new();
    let mut current: Option<(usize, String, Vec<(String, String)>)> = None;
    let mut saw_format = false;
    let finish = |block: (usize, String, Vec<(String, String)>)| -> Result<InclusionRule, RuleDataError> {
        let (line, name, fields) = block;
        let get = |key: &str| -> Result<&str, RuleDataError> {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| err(line, format!("rule {name} lacks {key}")))
        };
        let sub = Pattern::parse(get("sub")?).map_err(|m| err(line, m))?;
        let sup = Pattern::parse(get("super")?).map_err(|m| err(line, m))?;
        if !sup.vars().is_subset(&sub.vars()) {
            return Err(err(line, format!("rule {name}: super pattern has free parameters")));
        }
        let index: u32 = get("index")?.parse().map_err(|_| err(line, "bad index".to_string()))?;
        if !(2..=MAX_INCLUSION_INDEX).contains(&index) {
            return Err(err(line, format!("rule {name}: index {index} out of range")));
        }
        let normal = match get("normal")? {
            "yes" => true,
            "no" => false,
            other => return Err(err(line, format!("bad normal flag {other}"))),
        };
        let word = |key: &str| -> Result<Word, RuleDataError> {
            Word::parse(get(key)?).map_err(|e| err(line, format!("{key}: {e}")))
        };
        let embedding = [word("e0")?, word("e1")?];
        Ok(InclusionRule { name: name.clone(), sub, sup, index, normal, embedding })
    };
    for (i, raw) in data.lines().enumerate() {
        let line = i + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let (key, value) = match text.split_once(char::is_whitespace) {
            Some((k, v)) => (k, v.trim()),
            None => (text, ""),
        };
        match key {
            "format" => {
                if value != "1" {
                    return Err(err(line, format!("unsupported format {value}")));
                }
                saw_format = true;
            }
            "rule" => {
                if let Some(block) = current.take() {
                    rules.push(finish(block)?);
                }
                current = Some((line, value.to_string(), Vec::new()));
            }
            "sub" | "super" | "index" | "normal" | "e0" | "e1" => match current.as_mut() {
                Some((_, _, fields)) => fields.push((key.to_string(), value.to_string())),
                None => return Err(err(line, format!("{key} outside a rule"))),
            },
            other => return Err(err(line, format!("unknown key {other}"))),
        }
    }
    if let Some(block) = current.take() {
        rules.push(finish(block)?);
    }
    if !saw_format {
        return Err(err(0, "missing format line".to_string()));
    }
    Ok(rules)
}

/// The shipped inclusion table, after verifying its checksum.
pub fn inclusion_rules() -> Result<Vec<InclusionRule>, RuleDataError> {
    if !checksum_ok(DATA, DATA_SHA256) {
        return Err(RuleDataError::Checksum);
    }
    parse_rules(DATA)
}

/// The raw shipped data and its recorded digest.
pub fn rule_data() -> (&'static str, &'static str) {
    (DATA, DATA_SHA256.trim())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_data_parses() {
        let rules = inclusion_rules().unwrap();
        assert_eq!(rules.len(), 14);
        assert!(rules.iter().all(|r| r.index <= MAX_INCLUSION_INDEX));
        let s777 = Signature::new(7, 7, 7).unwrap();
        let s237 = Signature::new(2, 3, 7).unwrap();
        assert!(rules.iter().flat_map(|r| r.instances_for(s777)).any(|i| i.sup == s237 && i.index == 24));
    }

    #[test]
    fn tampered_data_is_rejected() {
        let (data, sum) = rule_data();
        assert!(checksum_ok(data, sum));
        let tampered = data.replace("index 24", "index 23");
        assert!(!checksum_ok(&tampered, sum));
    }

    #[test]
    fn parse_errors() {
        assert!(parse_rules("rule x\n sub 1,2,3\n").is_err());
        assert!(parse_rules("format 2\n").is_err());
        assert!(
            parse_rules("format 1\nrule x\n sub s,s,t\n super 2,s,2u\n index 2\n normal yes\n e0 a\n e1 b\n").is_err()
        );
        assert!(
            parse_rules("format 1\nrule x\n sub s,s,t\n super 2,s,2t\n index 30\n normal yes\n e0 a\n e1 b\n").is_err()
        );
        assert_eq!(parse_rules("format 1\n").unwrap().len(), 0);
    }

    #[test]
    fn instantiation() {
        let rules = inclusion_rules().unwrap();
        let iso = rules.iter().find(|r| r.name == "isosceles-double").unwrap();
        assert!(iso.instantiate(&[('s', 2), ('t', 5)]).is_none());
        let inst = iso.instantiate(&[('s', 5), ('t', 2)]).unwrap();
        assert_eq!(inst.sub, Signature::new(2, 5, 5).unwrap());
        assert_eq!(inst.sup, Signature::new(2, 4, 5).unwrap());
        let found = iso.instances_for(Signature::new(2, 5, 5).unwrap());
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].params, alloc::vec![('s', 5), ('t', 2)]);
        let fam = rules.iter().find(|r| r.name == "family-4a").unwrap();
        assert!(fam.instantiate(&[('n', 2)]).is_none());
    }

    #[test]
    fn relabeling_roundtrip() {
        use super::super::geometry::{Mat2, TriangleModel};
        let close = |x: Mat2, y: Mat2| {
            let d =
                |s: f64| (x.a - s * y.a).abs() + (x.b - s * y.b).abs() + (x.c - s * y.c).abs() + (x.d - s * y.d).abs();
            d(1.0) < 1e-8 || d(-1.0) < 1e-8
        };
        for orders in [[2, 3, 7], [7, 3, 2], [5, 2, 4], [4, 4, 3], [3, 7, 3], [7, 2, 3]] {
            let mut sorted = orders;
            sorted.sort();
            let m = TriangleModel::new(sorted);
            let there = pattern_in_sorted(orders);
            let back = sorted_in_pattern(orders).map(|w| w.substitute(&there));
            assert!(close(m.eval(&back[0]), m.eval(&Word::letter(Letter::G0))));
            assert!(close(m.eval(&back[1]), m.eval(&Word::letter(Letter::G1))));
            // pattern generators are positive rotations of the pattern orders
            assert!(m.is_positive_rotation(&there[0], orders[0]));
            assert!(m.is_positive_rotation(&there[1], orders[1]));
        }
    }
}
