//! Enumeration checked against brute-force counts that share no code with
//! the search.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use quasiplatonic_core::bounds::lubotzky_bound;
use quasiplatonic_core::normal_search::{enumerate_normal, RegularTable, SearchConfig};
use quasiplatonic_core::signatures::admissible_signatures;
use quasiplatonic_core::Signature;

fn sig(p: u32, q: u32, r: u32) -> Signature {
    Signature::new(p, q, r).unwrap()
}

fn is_abelian(t: &RegularTable) -> bool {
    let x = t.table().permutation(quasiplatonic_core::Letter::G0);
    let y = t.table().permutation(quasiplatonic_core::Letter::G1);
    common::compose(&x, &y) == common::compose(&y, &x)
}

#[test]
fn abelian_quotients_match_brute_force() {
    let cases = [
        (sig(7, 7, 7), 7),
        (sig(4, 4, 4), 4),
        (sig(4, 4, 4), 16),
        (sig(2, 4, 6), 24),
        (sig(3, 3, 4), 12),
        (sig(3, 6, 6), 18),
        (sig(2, 8, 8), 16),
        (sig(5, 5, 5), 25),
        (sig(2, 3, 7), 24),
    ];
    for (s, n) in cases {
        let tables = enumerate_normal(s, SearchConfig::all(n)).unwrap();
        let mut found: BTreeMap<usize, usize> = BTreeMap::new();
        for t in tables.iter().filter(|t| is_abelian(t)) {
            *found.entry(t.index()).or_default() += 1;
        }
        assert_eq!(found, common::abelian_kernels(s.orders(), n), "{s} at {n}");
    }
}

#[test]
fn small_abelian_examples() {
    let all = enumerate_normal(sig(7, 7, 7), SearchConfig::all(7)).unwrap();
    assert_eq!(all.len(), 9);
    assert_eq!(all.iter().filter(|t| t.info().torsion_free).count(), 5);
    let all = enumerate_normal(sig(4, 4, 4), SearchConfig::all(4)).unwrap();
    assert_eq!(all.len(), 11);
    assert_eq!(all.iter().filter(|t| t.info().torsion_free).count(), 0);
    assert_eq!(common::abelian_kernels([7, 7, 7], 7).values().sum::<usize>(), 9);
    assert_eq!(common::abelian_kernels([4, 4, 4], 4).values().sum::<usize>(), 11);
}

#[test]
fn hurwitz_quotient_of_order_168() {
    let g = common::psl27();
    assert_eq!(common::closure(&g).len(), 168);
    let (pairs, kernels) = common::epimorphisms([2, 3, 7], &g, true);
    assert_eq!(pairs % 336, 0);
    assert_eq!(pairs / 336, kernels.len());
    let tables = enumerate_normal(sig(2, 3, 7), SearchConfig::torsion_free(168)).unwrap();
    assert!(tables.iter().all(|t| t.index() == 168 && t.info().genus == Some(3)));
    let found: BTreeSet<Vec<u8>> = tables.iter().map(|t| t.to_bytes()).collect();
    assert_eq!(found, kernels);
}

#[test]
fn other_quotients_onto_psl27() {
    let g = common::psl27();
    for s in [sig(3, 3, 4), sig(2, 7, 7), sig(3, 3, 7), sig(4, 4, 4), sig(2, 4, 7)] {
        let (pairs, kernels) = common::epimorphisms(s.orders(), &g, true);
        assert_eq!(pairs, 336 * kernels.len(), "{s}");
        let found: BTreeSet<Vec<u8>> =
            enumerate_normal(s, SearchConfig::torsion_free(168)).unwrap().iter().map(|t| t.to_bytes()).collect();
        assert!(kernels.is_subset(&found), "{s}");
    }
}

#[test]
fn counts_below_lubotzky_bound() {
    for s in [sig(2, 3, 7), sig(7, 7, 7), sig(4, 4, 4), sig(2, 4, 6)] {
        let count = enumerate_normal(s, SearchConfig::all(32)).unwrap().len() as u64;
        assert!(lubotzky_bound(32) >= count.into(), "{s}");
    }
}

#[test]
fn distinct_prime_signatures_have_only_torsion_free_kernels() {
    let primes = [2u32, 3, 5, 7, 11, 13];
    let mut checked = 0;
    for (s, _) in admissible_signatures(5) {
        let [p, q, r] = s.orders();
        if !(primes.contains(&p) && primes.contains(&q) && primes.contains(&r) && p < q && q < r) {
            continue;
        }
        assert!(s.is_prime_triple());
        for t in enumerate_normal(s, SearchConfig::all(64)).unwrap() {
            assert!(t.is_whole_group() || t.info().torsion_free, "{s}");
        }
        checked += 1;
    }
    assert!(checked > 0);
    for t in enumerate_normal(sig(3, 5, 7), SearchConfig::all(64)).unwrap() {
        assert!(t.is_whole_group() || t.info().torsion_free);
    }
}

#[test]
fn small_index_agrees_with_plain_low_index_search() {
    for (s, _) in admissible_signatures(5) {
        let naive: BTreeSet<Vec<u8>> = common::normal_subgroups_naive(s.orders(), 8)
            .into_iter()
            .map(|(_, x, y)| common::regular_bytes(&x, &y))
            .collect();
        let ours: BTreeSet<Vec<u8>> =
            enumerate_normal(s, SearchConfig::all(8)).unwrap().iter().map(|t| t.to_bytes()).collect();
        assert_eq!(naive, ours, "{s}");
    }
}

#[test]
fn admissible_signatures_match_plain_loop() {
    let ours: BTreeSet<([u32; 3], u64, u64)> = admissible_signatures(5)
        .into_iter()
        .flat_map(|(s, ps)| ps.into_iter().map(move |p| (s.orders(), p.genus, p.index)))
        .collect();
    assert_eq!(ours, common::admissible_naive(5));
}
