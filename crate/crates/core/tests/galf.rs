use std::collections::BTreeSet;

use lexconf_core::{compute_galfs, generate_prefix, BinaryMatrix};
use proptest::prelude::*;

fn oracle(d: &[Vec<u8>]) -> BTreeSet<(usize, usize)> {
    let (rows, cols) = (d.len(), d.first().map_or(0, Vec::len));
    let mut out = BTreeSet::new();
    for i in 0..rows {
        for j in 0..cols {
            for k in 0..rows {
                for l in 0..cols {
                    if k != i && l != j && d[k][l] == 1 && d[k][j] == 1 && d[i][l] == 1 {
                        out.insert((i + 1, j + 1));
                    }
                }
            }
        }
    }
    out
}

fn flags(d: &[Vec<u8>]) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for (i, row) in d.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if x == 1 {
                out.insert((i + 1, j + 1));
            }
        }
    }
    out
}

fn has_rectangle(d: &[Vec<u8>]) -> bool {
    let cols = d.first().map_or(0, Vec::len);
    (0..d.len()).any(|i| {
        (i + 1..d.len()).any(|k| (0..cols).filter(|&j| d[i][j] == 1 && d[k][j] == 1).count() >= 2)
    })
}

#[test]
fn order_two_prefix() {
    let d: Vec<Vec<u8>> = generate_prefix(2, 7)
        .unwrap()
        .iter()
        .map(|r| (1..=7).map(|j| r.contains(j) as u8).collect())
        .collect();
    let galfs = compute_galfs(&BinaryMatrix::from_dense(&d));
    assert_eq!(galfs, oracle(&d));
    assert!(!galfs.is_empty());
    assert!(galfs.is_disjoint(&flags(&d)));
}

#[test]
fn greedy_prefixes_have_no_flag_galfs() {
    for n in 1..=4 {
        let rows = generate_prefix(n, 60).unwrap();
        let width = rows.iter().map(|r| r.length()).max().unwrap() as usize;
        let d: Vec<Vec<u8>> = rows
            .iter()
            .map(|r| (1..=width as u64).map(|j| r.contains(j) as u8).collect())
            .collect();
        assert!(compute_galfs(&BinaryMatrix::from_dense(&d)).is_disjoint(&flags(&d)), "n = {n}");
    }
}

proptest! {
    #[test]
    fn matches_oracle(d in (1usize..8, 1usize..8).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec(0u8..2, c), r)
    })) {
        let galfs = compute_galfs(&BinaryMatrix::from_dense(&d));
        prop_assert_eq!(&galfs, &oracle(&d));
        // a galf on a flag is exactly a rectangle corner
        prop_assert_eq!(!galfs.is_disjoint(&flags(&d)), has_rectangle(&d));
    }
}
