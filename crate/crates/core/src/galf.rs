//! Galfs: the missing fourth corners of would-be rectangles.
//!
//! A cell `(i, j)` is a galf when some flag `(k, l)` with `k != i`, `l != j`
//! has `a_kj = a_il = 1`. In a rectangle-free matrix no galf is a flag.

use std::collections::BTreeSet;

use crate::matrix::BinaryMatrix;

/// All galf cells of `m`, ascending by row then column.
pub fn compute_galfs(m: &BinaryMatrix) -> BTreeSet<(usize, usize)> {
    let cols = m.columns();
    let mut galfs = BTreeSet::new();
    // walk (i,l) -> (k,l) -> (k,j)
    for (i, l) in m.flags() {
        for &k in &cols[l - 1] {
            if k == i {
                continue;
            }
            for &j in m.row(k) {
                if j != l {
                    galfs.insert((i, j));
                }
            }
        }
    }
    galfs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_corners() {
        let m = BinaryMatrix::from_dense(&[vec![1, 1], vec![1, 0]]);
        assert_eq!(compute_galfs(&m).into_iter().collect::<Vec<_>>(), vec![(2, 2)]);
    }

    #[test]
    fn zero_matrix() {
        assert!(compute_galfs(&BinaryMatrix::zeros(4, 5)).is_empty());
    }

    #[test]
    fn full_rectangle_galfs_are_flags() {
        let m = BinaryMatrix::from_dense(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(compute_galfs(&m).len(), 4);
    }
}
