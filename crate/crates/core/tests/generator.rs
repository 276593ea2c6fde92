use std::collections::HashMap;

use lexconf_core::{generate_naive, generate_prefix, sigma, Generator, SparseRow};
use proptest::prelude::*;

/// Greedy construction on a fully stored dense prefix: cell (k, l) gets a one
/// unless the row is full, the column is full, or some earlier row i has
/// a_il = a_ij = 1 for a column j < l already chosen in row k.
fn dense_oracle(row_cap: usize, col_cap: usize, rows: usize) -> Vec<Vec<u64>> {
    let mut a: Vec<Vec<bool>> = Vec::new();
    let mut col_weight: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for _ in 0..rows {
        let mut row = vec![false; col_weight.len() + row_cap + 1];
        let mut chosen: Vec<usize> = Vec::new();
        let mut l = 0;
        while chosen.len() < row_cap {
            if l >= col_weight.len() {
                col_weight.push(0);
            }
            if l >= row.len() {
                row.push(false);
            }
            let column_full = col_weight[l] >= col_cap;
            let rectangle = a.iter().any(|prev| {
                prev.get(l).copied().unwrap_or(false) && chosen.iter().any(|&j| prev.get(j).copied().unwrap_or(false))
            });
            if !column_full && !rectangle {
                row[l] = true;
                chosen.push(l);
                col_weight[l] += 1;
            }
            l += 1;
        }
        out.push(chosen.iter().map(|&j| j as u64 + 1).collect());
        a.push(row);
    }
    out
}

fn ones(rows: &[SparseRow]) -> Vec<Vec<u64>> {
    rows.iter().map(|r| r.ones.clone()).collect()
}

#[test]
fn streaming_matches_dense_oracle() {
    for n in 1..=3u64 {
        let rows = generate_prefix(n, 200).unwrap();
        assert_eq!(ones(&rows), dense_oracle(n as usize + 1, n as usize + 1, 200), "n = {n}");
        for (t, r) in rows.iter().enumerate() {
            assert_eq!(r.index, t as u64 + 1);
        }
    }
}

#[test]
fn naive_matches_dense_oracle() {
    assert_eq!(ones(&generate_naive(2, 3, 5).unwrap()), dense_oracle(2, 3, 5));
    for (k, r) in [(3, 2), (2, 4), (4, 2), (3, 5)] {
        assert_eq!(ones(&generate_naive(k, r, 60).unwrap()), dense_oracle(k as usize, r as usize, 60), "({k}, {r})");
    }
    assert_eq!(ones(&generate_naive(1, 1, 4).unwrap()), vec![vec![1], vec![2], vec![3], vec![4]]);
}

#[test]
fn naive_square_type_is_the_order_matrix() {
    for n in 1..=4u64 {
        let naive = generate_naive(n + 1, n + 1, 100).unwrap();
        let prefix = generate_prefix(n, 100).unwrap();
        assert_eq!(naive, prefix, "n = {n}");
    }
}

#[test]
fn first_rows() {
    assert_eq!(ones(&generate_prefix(1, 6).unwrap()), vec![vec![1, 2], vec![1, 3], vec![2, 3], vec![4, 5], vec![4, 6], vec![5, 6]]);
    assert_eq!(
        ones(&generate_prefix(2, 4).unwrap()),
        vec![vec![1, 2, 3], vec![1, 4, 5], vec![1, 6, 7], vec![2, 4, 6]]
    );
    assert_eq!(ones(&generate_prefix(3, 1).unwrap()), vec![vec![1, 2, 3, 4]]);
    for n in 1..=6u64 {
        assert_eq!(generate_prefix(n, 1).unwrap()[0].ones, (1..=n + 1).collect::<Vec<_>>());
    }
}

#[test]
fn rectangle_free_prefixes() {
    for n in 1..=4u64 {
        let rows = generate_prefix(n, 500).unwrap();
        let width = rows.iter().map(|r| *r.ones.last().unwrap()).max().unwrap() as usize;
        let dense: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| {
                let mut d = vec![false; width + 1];
                for &j in &r.ones {
                    d[j as usize] = true;
                }
                d
            })
            .collect();
        for i in 0..dense.len() {
            for k in i + 1..dense.len() {
                let common = (1..=width).filter(|&c| dense[i][c] && dense[k][c]).count();
                assert!(common <= 1, "n = {n}: rows {} and {} share {common} columns", i + 1, k + 1);
            }
        }
    }
}

/// Weight, length, monotone g and f, symmetry, diagonal touch and column
/// weights over 10^4 rows.
fn check_properties(n: u64, count: u64) {
    let mut g = Generator::new(n).unwrap();
    let rows: Vec<SparseRow> = (&mut g).take(count as usize).collect();
    let bound = sigma(n as u32);
    let mut first_row: HashMap<u64, u64> = HashMap::new();
    let mut weight: HashMap<u64, u64> = HashMap::new();
    let mut prev_first = 0;
    for r in &rows {
        assert_eq!(r.weight() as u64, n + 1, "n = {n}, row {}", r.index);
        assert!(r.length() < bound, "n = {n}, row {} has length {}", r.index, r.length());
        let first = r.first().unwrap();
        assert!(first >= prev_first, "n = {n}: g decreases at row {}", r.index);
        assert!(first <= r.index, "n = {n}: row {} starts right of the diagonal", r.index);
        prev_first = first;
        for &j in &r.ones {
            first_row.entry(j).or_insert(r.index);
            *weight.entry(j).or_default() += 1;
        }
    }
    let max_col = *first_row.keys().max().unwrap();
    let mut prev_f = 0;
    for j in 1..=max_col {
        let f = *first_row.get(&j).unwrap_or_else(|| panic!("n = {n}: column {j} skipped"));
        assert!(f >= prev_f, "n = {n}: f decreases at column {j}");
        prev_f = f;
        let w = weight[&j];
        assert!(w <= n + 1);
        if j < g.frontier() {
            assert_eq!(w, n + 1, "n = {n}: column {j} left of the frontier is not full");
        }
    }
    for r in &rows {
        for &j in r.ones.iter().filter(|&&j| j <= count) {
            assert!(rows[(j - 1) as usize].contains(r.index), "n = {n}: a({}, {j}) without its mirror", r.index);
        }
    }
}

#[test]
fn properties_small_orders() {
    for n in 1..=4 {
        check_properties(n, 10_000);
    }
}

#[test]
fn properties_order_five() {
    check_properties(5, 10_000);
}

#[test]
fn properties_order_six() {
    check_properties(6, 10_000);
}

#[test]
fn invalid_orders() {
    assert!(Generator::new(0).is_err());
    assert!(generate_naive(0, 3, 1).is_err());
    assert!(generate_naive(3, 0, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn prefixes_are_consistent(n in 1u64..=5, short in 1u64..300, extra in 0u64..300) {
        let a = generate_prefix(n, short).unwrap();
        let b = generate_prefix(n, short + extra).unwrap();
        prop_assert_eq!(&a[..], &b[..short as usize]);
    }

    #[test]
    fn admissibility_agrees_with_emitted_rows(n in 1u64..=4, rows in 0u64..200) {
        // Replaying the scan of the next row through is_admissible reproduces it.
        let mut g = Generator::new(n).unwrap();
        for _ in 0..rows {
            g.next_row();
        }
        let expected = g.clone().next_row();
        let mut partial = Vec::new();
        let mut l = 1;
        while partial.len() < (n + 1) as usize {
            if g.is_admissible(&partial, l) {
                partial.push(l);
            }
            l += 1;
        }
        prop_assert_eq!(partial, expected.ones);
    }
}
