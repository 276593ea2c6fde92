use std::collections::BTreeSet;

use lexconf_core::verify::{automorphism_count_with_budget, isomorphic_with_budget};
use lexconf_core::{
    automorphism_count, compact_plane, detect_period, fold, fold_rows, generate_prefix,
    is_projective_plane, isomorphic, minimal_fold_multiplier, reference_plane, verify_configuration, wrap,
    Configuration, FoldError, FoldParams, IncidenceMatrix, PeriodResult,
};
use proptest::prelude::*;

fn period(n: u64) -> PeriodResult {
    detect_period(n, 1_000_000).unwrap()
}

fn folded(n: u64, m: u64, v: Option<u64>) -> IncidenceMatrix {
    let r = period(n);
    let params = FoldParams::new(&r, m, v).unwrap();
    fold(n, &r, &params, &fold_rows(n, &params).unwrap()).unwrap()
}

fn wrapped(n: u64, m: u64) -> IncidenceMatrix {
    let r = period(n);
    let params = FoldParams::for_wrap(&r, m, None).unwrap();
    wrap(n, &r, &params, &fold_rows(n, &params).unwrap()).unwrap()
}

fn plane(n: u64) -> IncidenceMatrix {
    let r = period(n);
    compact_plane(n, &r, &generate_prefix(n, r.p).unwrap()).unwrap()
}

/// Dense re-check: weights, symmetry and no 2x2 all-ones submatrix.
fn brute_force_tactical(b: &IncidenceMatrix, k: usize) {
    let d = b.as_binary().to_dense();
    let v = d.len();
    for i in 0..v {
        assert_eq!(d[i].iter().filter(|&&x| x == 1).count(), k, "row {i}");
        assert_eq!((0..v).filter(|&r| d[r][i] == 1).count(), k, "column {i}");
        for j in 0..v {
            assert_eq!(d[i][j], d[j][i], "symmetry at ({i}, {j})");
        }
    }
    for i in 0..v {
        for j in i + 1..v {
            let common = (0..v).filter(|&c| d[i][c] == 1 && d[j][c] == 1).count();
            assert!(common <= 1, "rows {i} and {j} share {common} columns");
        }
    }
}

fn brute_force_automorphisms(c: &Configuration) -> u64 {
    fn permutations(v: usize) -> Vec<Vec<usize>> {
        if v == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(v - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, v);
                out.push(q);
            }
        }
        out
    }
    let lines: BTreeSet<Vec<usize>> = c.lines().iter().cloned().collect();
    permutations(c.v())
        .into_iter()
        .filter(|perm| {
            c.lines().iter().all(|l| {
                let mut img: Vec<usize> = l.iter().map(|&p| perm[p - 1]).collect();
                img.sort_unstable();
                lines.contains(&img)
            })
        })
        .count() as u64
}

#[test]
fn minimal_folds_are_configurations() {
    for n in 1..=4 {
        let r = period(n);
        let m = minimal_fold_multiplier(&r);
        let b = folded(n, m, None);
        assert_eq!(b.size() as u64, r.p * m);
        brute_force_tactical(&b, n as usize + 1);
        let c = verify_configuration(&b, n as usize).unwrap();
        assert_eq!((c.v(), c.k()), (b.size(), n as usize + 1));
    }
}

#[test]
fn order_three_fold_and_wrap() {
    let b = folded(3, 2, None);
    assert_eq!(b.size(), 32);
    let c = verify_configuration(&b, 3).unwrap();
    assert!(!is_projective_plane(&c));

    let r = period(3);
    assert!(matches!(FoldParams::new(&r, 1, None), Err(FoldError::Constraint(_))));
    let e3 = wrapped(3, 1);
    brute_force_tactical(&e3, 4);
    let c = verify_configuration(&e3, 3).unwrap();
    assert_eq!((c.v(), c.k()), (16, 4));
    assert!(!is_projective_plane(&c));
    assert_eq!(automorphism_count(&c).unwrap(), 2);
}

#[test]
fn short_folds_are_rejected() {
    // p_bar <= 2(l_max - 2) for m = 1 at these orders
    for n in [2, 4] {
        let r = period(n);
        assert!(r.p <= 2 * (r.l_max - 2));
        assert!(matches!(FoldParams::new(&r, 1, None), Err(FoldError::Constraint(_))), "n = {n}");
    }
}

#[test]
fn compact_planes_are_desarguesian() {
    for n in [2usize, 4] {
        let c = verify_configuration(&plane(n as u64), n).unwrap();
        assert!(is_projective_plane(&c));
        assert!(isomorphic(&c, &reference_plane(n).unwrap()).unwrap(), "n = {n}");
    }
    let c = verify_configuration(&plane(1), 1).unwrap();
    assert_eq!(c.v(), 3);
    assert!(!is_projective_plane(&c));
}

#[test]
fn order_sixteen_plane() {
    let b = plane(16);
    assert_eq!(b.size(), 273);
    let c = verify_configuration(&b, 16).unwrap();
    assert!(is_projective_plane(&c));
    assert!(isomorphic(&c, &reference_plane(16).unwrap()).unwrap());
}

#[test]
fn fold_is_independent_of_offset() {
    for n in [1, 3] {
        let r = period(n);
        let m = minimal_fold_multiplier(&r);
        let base = verify_configuration(&folded(n, m, None), n as usize).unwrap();
        let v0 = r.pp + r.p * m;
        for extra in [1, 2, 5, r.p] {
            let other = verify_configuration(&folded(n, m, Some(v0 + extra)), n as usize).unwrap();
            assert!(isomorphic(&base, &other).unwrap(), "n = {n}, v = {}", v0 + extra);
        }
    }
}

#[test]
fn automorphisms_match_exhaustive_count() {
    let triangle = verify_configuration(&plane(1), 1).unwrap();
    let fano = reference_plane(2).unwrap();
    for c in [triangle, fano] {
        assert_eq!(automorphism_count(&c).unwrap(), brute_force_automorphisms(&c) as u128);
    }
    assert_eq!(brute_force_automorphisms(&reference_plane(2).unwrap()), 168);
}

#[test]
fn non_isomorphic_configurations() {
    // A 16_4 with a different automorphism group is not E(3).
    let e3 = verify_configuration(&wrapped(3, 1), 3).unwrap();
    let grid: Vec<Vec<usize>> = (0..16)
        .map(|t| {
            let (r, c) = (t / 4, t % 4);
            let mut l: Vec<usize> = (0..4).map(|s| 4 * ((r + s) % 4) + (c + s * s) % 4 + 1).collect();
            l.sort_unstable();
            l
        })
        .collect();
    if let Ok(other) = Configuration::from_lines(16, grid, 4) {
        if automorphism_count(&other).unwrap() != 2 {
            assert!(!isomorphic(&e3, &other).unwrap());
        }
    }
    assert!(!isomorphic(&reference_plane(3).unwrap(), &reference_plane(2).unwrap()).unwrap());
}

fn permutation(v: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((1..=v).collect::<Vec<_>>()).prop_shuffle()
}

fn relabel_case() -> impl Strategy<Value = (Configuration, Vec<usize>, Vec<usize>)> {
    let e3 = verify_configuration(&wrapped(3, 1), 3).unwrap();
    let cases = vec![reference_plane(2).unwrap(), reference_plane(3).unwrap(), reference_plane(4).unwrap(), e3];
    proptest::sample::select(cases).prop_flat_map(|c| {
        let v = c.v();
        (Just(c), permutation(v), permutation(v))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relabeling_preserves_isomorphism_class((c, points, lines) in relabel_case()) {
        let d = c.relabel(&points, &lines);
        prop_assert!(isomorphic(&c, &d).unwrap());
        prop_assert!(isomorphic(&d, &c).unwrap());
        prop_assert!(isomorphic(&d, &d).unwrap());
        prop_assert_eq!(automorphism_count(&c).unwrap(), automorphism_count(&d).unwrap());
    }
}

#[test]
fn size_limits() {
    let c = reference_plane(16).unwrap();
    assert!(isomorphic_with_budget(&c, &c, 500).is_err());
    assert!(automorphism_count_with_budget(&c, 500).is_err());
}
