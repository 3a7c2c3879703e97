//! Brute-force oracles shared by the integration tests. None of this code
//! calls into the search, deduction or analysis code under test.

#![allow(dead_code)]

use std::collections::BTreeSet;

pub type Perm = Vec<u32>;

pub fn compose(x: &Perm, y: &Perm) -> Perm {
    // apply x then y
    x.iter().map(|&i| y[i as usize]).collect()
}

pub fn perm_order(x: &Perm) -> u32 {
    let id: Perm = (0..x.len() as u32).collect();
    let mut p = x.clone();
    let mut k = 1;
    while p != id {
        p = compose(&p, x);
        k += 1;
    }
    k
}

/// Order of the generated group, or `cap + 1` once it exceeds `cap`.
pub fn group_order(gens: &[Perm], cap: usize) -> usize {
    let n = gens[0].len();
    let id: Perm = (0..n as u32).collect();
    let mut seen = BTreeSet::from([id.clone()]);
    let mut stack = vec![id];
    while let Some(g) = stack.pop() {
        for s in gens {
            let h = compose(&g, s);
            if seen.insert(h.clone()) {
                if seen.len() > cap {
                    return cap + 1;
                }
                stack.push(h);
            }
        }
    }
    seen.len()
}

/// Letters 0 = x, 1 = y, 2 = x⁻¹, 3 = y⁻¹.
fn inv(l: usize) -> usize {
    l ^ 2
}

/// All normal subgroups of index at most `n_max` in
/// `⟨x, y | x^p, y^q, (xy)^r⟩`, by plain low-index subgroup enumeration
/// followed by a regularity filter. Returns (index, x-permutation,
/// y-permutation) with cosets in first-appearance order.
pub fn normal_subgroups_naive(orders: [u32; 3], n_max: usize) -> Vec<(usize, Perm, Perm)> {
    let rel = |w: &[usize], k: u32| -> Vec<usize> { w.iter().cycle().take(w.len() * k as usize).copied().collect() };
    let relators = vec![rel(&[0], orders[0]), rel(&[1], orders[1]), rel(&[0, 1], orders[2])];
    let mut rows = vec![[u32::MAX; 4]; n_max];
    let mut out = Vec::new();
    dfs(&mut rows, 1, n_max, &relators, &mut out);
    out
}

fn consistent(rows: &mut [[u32; 4]], m: usize, relators: &[Vec<usize>]) -> bool {
    loop {
        let mut changed = false;
        for r in relators {
            for c in 0..m as u32 {
                let mut f = c;
                let mut i = 0;
                while i < r.len() && rows[f as usize][r[i]] != u32::MAX {
                    f = rows[f as usize][r[i]];
                    i += 1;
                }
                if i == r.len() {
                    if f != c {
                        return false;
                    }
                    continue;
                }
                let mut b = c;
                let mut j = r.len();
                while j > i && rows[b as usize][inv(r[j - 1])] != u32::MAX {
                    b = rows[b as usize][inv(r[j - 1])];
                    j -= 1;
                }
                if j == i {
                    if f != b {
                        return false;
                    }
                } else if j == i + 1 {
                    let l = r[i];
                    if rows[b as usize][inv(l)] != u32::MAX {
                        return false;
                    }
                    rows[f as usize][l] = b;
                    rows[b as usize][inv(l)] = f;
                    changed = true;
                }
            }
        }
        if !changed {
            return true;
        }
    }
}

fn dfs(rows: &mut Vec<[u32; 4]>, m: usize, n_max: usize, relators: &[Vec<usize>], out: &mut Vec<(usize, Perm, Perm)>) {
    let slot = (0..m).flat_map(|c| (0..4).map(move |l| (c, l))).find(|&(c, l)| rows[c][l] == u32::MAX);
    let Some((c, l)) = slot else {
        let x: Perm = (0..m).map(|i| rows[i][0]).collect();
        let y: Perm = (0..m).map(|i| rows[i][1]).collect();
        if group_order(&[x.clone(), y.clone()], m) == m {
            out.push((m, x, y));
        }
        return;
    };
    let mut choices: Vec<usize> = (0..m).filter(|&k| rows[k][inv(l)] == u32::MAX).collect();
    if m < n_max {
        choices.push(m);
    }
    for k in choices {
        let saved = rows.clone();
        let new_m = if k == m { m + 1 } else { m };
        rows[c][l] = k as u32;
        rows[k][inv(l)] = c as u32;
        if consistent(rows, new_m, relators) {
            dfs(rows, new_m, n_max, relators, out);
        }
        *rows = saved;
    }
}

/// Admissible (signature, genus, index) triples for genera 2..=g_max by a
/// plain triple loop: 1/p + 1/q + 1/r < 1, n = (2g − 2)/μ integral, and the
/// entries bounded by n.
pub fn admissible_naive(g_max: u64) -> BTreeSet<([u32; 3], u64, u64)> {
    let mut out = BTreeSet::new();
    let bound = 84 * g_max as u32;
    for p in 2..=bound {
        for q in p..=bound {
            for r in q..=bound {
                // μ = (pqr − qr − pr − pq) / pqr
                let (p64, q64, r64) = (p as u64, q as u64, r as u64);
                let den = p64 * q64 * r64;
                let num = den as i64 - (q64 * r64 + p64 * r64 + p64 * q64) as i64;
                if num <= 0 {
                    continue;
                }
                for g in 2..=g_max {
                    let top = (2 * g - 2) * den;
                    if top % num as u64 == 0 {
                        let n = top / num as u64;
                        if n.is_multiple_of(p64) && n.is_multiple_of(q64) && n.is_multiple_of(r64) && n <= 84 * (g - 1) {
                            out.insert(([p, q, r], g, n));
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn identity(n: usize) -> Perm {
    (0..n as u32).collect()
}

pub fn inverse(x: &Perm) -> Perm {
    let mut out = vec![0; x.len()];
    for (i, &v) in x.iter().enumerate() {
        out[v as usize] = i as u32;
    }
    out
}

/// Every element of the group generated by `gens`.
pub fn closure(gens: &[Perm]) -> Vec<Perm> {
    let id = identity(gens[0].len());
    let mut seen = BTreeSet::from([id.clone()]);
    let mut out = vec![id];
    let mut i = 0;
    while i < out.len() {
        for s in gens {
            let h = compose(&out[i], s);
            if seen.insert(h.clone()) {
                out.push(h);
            }
        }
        i += 1;
    }
    out
}

/// Canonical bytes of the regular action of `⟨x, y⟩` on itself, numbered
/// by first appearance from the identity when scanning elements in order and
/// letters as x, y, x⁻¹, y⁻¹.
pub fn regular_bytes(x: &Perm, y: &Perm) -> Vec<u8> {
    let letters = [x.clone(), y.clone(), inverse(x), inverse(y)];
    let mut order = vec![identity(x.len())];
    let mut index = std::collections::BTreeMap::from([(order[0].clone(), 0u32)]);
    let mut i = 0;
    while i < order.len() {
        for s in &letters {
            let h = compose(&order[i], s);
            if !index.contains_key(&h) {
                index.insert(h.clone(), order.len() as u32);
                order.push(h);
            }
        }
        i += 1;
    }
    let mut out = (order.len() as u32).to_le_bytes().to_vec();
    for s in &letters[..2] {
        for g in &order {
            out.extend_from_slice(&index[&compose(g, s)].to_le_bytes());
        }
    }
    out
}

/// Epimorphisms from `Δ(p,q,r)` onto the group `G` generated by `gens`:
/// the number of generating pairs `(x, y)` with `x^p = y^q = (xy)^r = 1`
/// (orders exactly `p, q, r` when `exact`), and the set of distinct kernels
/// as regular-table bytes.
pub fn epimorphisms(orders: [u32; 3], gens: &[Perm], exact: bool) -> (usize, BTreeSet<Vec<u8>>) {
    let elements = closure(gens);
    let n = elements.len();
    let ok = |g: &Perm, e: u32| {
        let o = perm_order(g);
        if exact {
            o == e
        } else {
            e.is_multiple_of(o)
        }
    };
    let xs: Vec<&Perm> = elements.iter().filter(|g| ok(g, orders[0])).collect();
    let ys: Vec<&Perm> = elements.iter().filter(|g| ok(g, orders[1])).collect();
    let mut pairs = 0;
    let mut kernels = BTreeSet::new();
    for x in &xs {
        for y in &ys {
            if ok(&compose(x, y), orders[2]) && group_order(&[(*x).clone(), (*y).clone()], n) == n {
                pairs += 1;
                kernels.insert(regular_bytes(x, y));
            }
        }
    }
    (pairs, kernels)
}

/// Kernels of homomorphisms from `Δ(p,q,r)` onto abelian groups, counted by
/// quotient order up to `n_max`. Every abelian quotient is a quotient of
/// `Z/p × Z/q` (images of `γ0`, `γ1`) and embeds in `(Z/L)²` with
/// `L = lcm(p,q,r)`; a kernel is recorded as the set of `(i, j)` with
/// `i·a + j·b = 0`.
pub fn abelian_kernels(orders: [u32; 3], n_max: usize) -> std::collections::BTreeMap<usize, usize> {
    let [p, q, r] = orders.map(|v| v as u64);
    let gcd = |mut a: u64, mut b: u64| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    let lcm = |a: u64, b: u64| a / gcd(a, b) * b;
    let l = lcm(lcm(p, q), r);
    let elems: Vec<(u64, u64)> = (0..l).flat_map(|u| (0..l).map(move |v| (u, v))).collect();
    let killed_by = |e: u64| -> Vec<(u64, u64)> {
        elems.iter().copied().filter(|&(u, v)| (u * e).is_multiple_of(l) && (v * e).is_multiple_of(l)).collect()
    };
    let (a_opts, b_opts) = (killed_by(p), killed_by(q));
    let mut kernels: BTreeSet<(usize, Vec<(u64, u64)>)> = BTreeSet::new();
    for &a in &a_opts {
        for &b in &b_opts {
            let c = ((a.0 + b.0) % l, (a.1 + b.1) % l);
            if (c.0 * r) % l != 0 || (c.1 * r) % l != 0 {
                continue;
            }
            let image: BTreeSet<(u64, u64)> =
                (0..p).flat_map(|i| (0..q).map(move |j| ((i * a.0 + j * b.0) % l, (i * a.1 + j * b.1) % l))).collect();
            if image.len() > n_max {
                continue;
            }
            let kernel: Vec<(u64, u64)> = (0..p)
                .flat_map(|i| (0..q).map(move |j| (i, j)))
                .filter(|&(i, j)| (i * a.0 + j * b.0) % l == 0 && (i * a.1 + j * b.1) % l == 0)
                .collect();
            kernels.insert((image.len(), kernel));
        }
    }
    let mut out = std::collections::BTreeMap::new();
    for (k, _) in kernels {
        *out.entry(k).or_insert(0) += 1;
    }
    out
}

/// `PSL(2,7)` acting on the projective line over `F_7` (point 7 is ∞),
/// generated by `z ↦ z + 1` and `z ↦ −1/z`.
pub fn psl27() -> Vec<Perm> {
    let t: Perm = (0..8).map(|z| if z == 7 { 7 } else { (z + 1) % 7 }).collect();
    let s: Perm = (0..8u32)
        .map(|z| match z {
            0 => 7,
            7 => 0,
            // −1/z: the inverse of z mod 7, negated.
            _ => (7 - (1..7).find(|w| (w * z) % 7 == 1).unwrap()) % 7,
        })
        .collect();
    vec![t, s]
}
