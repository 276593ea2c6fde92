//! Wrapping the periodic tail of the greedy matrix into a finite incidence
//! matrix.
//!
//! Rows `v + 1 ..= v + p_bar` are taken with `p_bar = p * m`. Row `i` keeps
//! the columns within `r = floor(p_bar / 2)` of its diagonal and wraps the
//! rest cyclically:
//!
//! ```text
//! b_ij = a(v+i, v+j)          if i - r <= j <= i + r
//!        a(v+i, v+j - p_bar)  if j > i + r
//!        a(v+i, v+j + p_bar)  if j < i - r
//! ```

use thiserror::Error;

use crate::generator::{Generator, ParamError};
use crate::matrix::{BinaryMatrix, IncidenceMatrix};
use crate::period::PeriodResult;
use crate::row::SparseRow;

/// Largest `p_bar` a fold will materialize.
pub const MAX_FOLD_SIZE: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FoldError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("fold parameters rejected: {0}")]
    Constraint(String),
    #[error("fold size {0} exceeds the limit {MAX_FOLD_SIZE}")]
    TooLarge(u64),
    #[error("supplied rows do not match: {0}")]
    Rows(String),
    #[error("compact plane needs preperiod 0, found {0}")]
    NonzeroPreperiod(u64),
    #[error("folded matrix failed its invariant check: {0}")]
    InvariantViolation(String),
}

/// Multiplier `m`, size `p_bar = p*m`, half-width `r` and base offset `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FoldParams {
    pub m: u64,
    pub p_bar: u64,
    pub r: u64,
    pub v: u64,
}

impl FoldParams {
    /// Parameters for a full fold: `floor(p_bar/2) > b`, `p_bar >= 2*l_max`
    /// and `v >= pp + p_bar`. `v` defaults to `pp + p_bar`.
    pub fn new(period: &PeriodResult, m: u64, v: Option<u64>) -> Result<Self, FoldError> {
        let params = Self::for_wrap(period, m, v)?;
        params.check_rectangle_bound(period)?;
        Ok(params)
    }

    /// Like [`FoldParams::new`] but without `p_bar >= 2*l_max`. Row and
    /// column weights and symmetry still hold; rectangle-freeness must be
    /// checked on the result.
    pub fn for_wrap(period: &PeriodResult, m: u64, v: Option<u64>) -> Result<Self, FoldError> {
        if m == 0 {
            return Err(FoldError::Constraint("multiplier m must be at least 1".into()));
        }
        let p_bar = period
            .p
            .checked_mul(m)
            .ok_or_else(|| FoldError::Constraint("p*m overflows".into()))?;
        let params = FoldParams {
            m,
            p_bar,
            r: p_bar / 2,
            v: v.unwrap_or(period.pp + p_bar),
        };
        params.check_weights(period)?;
        Ok(params)
    }

    fn check_weights(&self, period: &PeriodResult) -> Result<(), FoldError> {
        if self.p_bar != period.p * self.m || self.r != self.p_bar / 2 {
            return Err(FoldError::Constraint(format!(
                "p_bar = {} and r = {} are inconsistent with p = {} and m = {}",
                self.p_bar, self.r, period.p, self.m
            )));
        }
        if self.r <= period.b_breadth {
            return Err(FoldError::Constraint(format!(
                "floor(p_bar/2) = {} must exceed the breadth {}",
                self.r, period.b_breadth
            )));
        }
        if self.v < period.pp + self.p_bar {
            return Err(FoldError::Constraint(format!(
                "v = {} must be at least pp + p_bar = {}",
                self.v,
                period.pp + self.p_bar
            )));
        }
        if self.p_bar > MAX_FOLD_SIZE {
            return Err(FoldError::TooLarge(self.p_bar));
        }
        Ok(())
    }

    fn check_rectangle_bound(&self, period: &PeriodResult) -> Result<(), FoldError> {
        if self.p_bar < 2 * period.l_max {
            return Err(FoldError::Constraint(format!(
                "p_bar = {} must be at least 2*l_max = {}",
                self.p_bar,
                2 * period.l_max
            )));
        }
        Ok(())
    }

    /// Whether `p_bar >= 2*l_max`, the hypothesis that guarantees a
    /// rectangle-free fold.
    pub fn meets_rectangle_bound(&self, period: &PeriodResult) -> bool {
        self.check_rectangle_bound(period).is_ok()
    }
}

/// Regenerates rows `v + 1 ..= v + p_bar` of the order-`n` matrix.
pub fn fold_rows(n: u64, params: &FoldParams) -> Result<Vec<SparseRow>, FoldError> {
    let mut g = Generator::new(n)?;
    for _ in 0..params.v {
        g.next_row();
    }
    Ok(g.take(params.p_bar as usize).collect())
}

/// Builds the folded matrix and checks row/column weights, symmetry and
/// rectangle-freeness.
pub fn fold(
    n: u64,
    period: &PeriodResult,
    params: &FoldParams,
    rows: &[SparseRow],
) -> Result<IncidenceMatrix, FoldError> {
    params.check_weights(period)?;
    params.check_rectangle_bound(period)?;
    let b = build(n, params, rows)?;
    check_tactical(n, &b)?;
    if let Some((a, c, shared)) = b.find_rectangle() {
        return Err(FoldError::InvariantViolation(format!(
            "rows {a} and {c} share columns {shared:?}"
        )));
    }
    Ok(b)
}

/// The fold without the `p_bar >= 2*l_max` hypothesis. Weights and symmetry
/// are checked; rectangle-freeness is left to the caller.
pub fn wrap(
    n: u64,
    period: &PeriodResult,
    params: &FoldParams,
    rows: &[SparseRow],
) -> Result<IncidenceMatrix, FoldError> {
    params.check_weights(period)?;
    let b = build(n, params, rows)?;
    check_tactical(n, &b)?;
    Ok(b)
}

fn build(n: u64, params: &FoldParams, rows: &[SparseRow]) -> Result<IncidenceMatrix, FoldError> {
    let p_bar = params.p_bar as i64;
    let r = params.r as i64;
    let v = params.v as i64;
    if rows.len() as i64 != p_bar {
        return Err(FoldError::Rows(format!("expected {} rows, got {}", p_bar, rows.len())));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (t, row) in rows.iter().enumerate() {
        let i = t as i64 + 1;
        if row.index as i64 != v + i {
            return Err(FoldError::Rows(format!(
                "position {i} holds row {}, expected {}",
                row.index,
                v + i
            )));
        }
        if row.ones.len() as u64 != n + 1 {
            return Err(FoldError::Rows(format!("row {} has weight {}", row.index, row.ones.len())));
        }
        let mut cells = Vec::with_capacity(row.ones.len());
        for &c in &row.ones {
            let rel = c as i64 - v;
            let targets = [
                Some(rel).filter(|&j| (i - r..=i + r).contains(&j)),
                Some(rel + p_bar).filter(|&j| j > i + r),
                Some(rel - p_bar).filter(|&j| j < i - r),
            ];
            let mut landed = targets.into_iter().flatten().filter(|&j| (1..=p_bar).contains(&j));
            match (landed.next(), landed.next()) {
                (Some(j), None) => cells.push(j as usize),
                (None, _) => {
                    return Err(FoldError::InvariantViolation(format!(
                        "one at ({}, {c}) falls outside the folded band",
                        row.index
                    )))
                }
                (Some(_), Some(_)) => {
                    return Err(FoldError::InvariantViolation(format!(
                        "one at ({}, {c}) lands twice",
                        row.index
                    )))
                }
            }
        }
        out.push(cells);
    }
    let m = BinaryMatrix::from_rows(params.p_bar as usize, out)
        .map_err(|e| FoldError::InvariantViolation(e.to_string()))?;
    Ok(IncidenceMatrix::try_from(m).expect("fold output is square"))
}

fn check_tactical(n: u64, b: &IncidenceMatrix) -> Result<(), FoldError> {
    let k = n as usize + 1;
    if let Some((i, w)) = b.row_weights().into_iter().enumerate().find(|&(_, w)| w != k) {
        return Err(FoldError::InvariantViolation(format!("row {} has weight {w}", i + 1)));
    }
    if let Some((j, w)) = b.column_weights().into_iter().enumerate().find(|&(_, w)| w != k) {
        return Err(FoldError::InvariantViolation(format!("column {} has weight {w}", j + 1)));
    }
    if !b.is_symmetric() {
        return Err(FoldError::InvariantViolation("matrix is not symmetric".into()));
    }
    Ok(())
}

/// The leading `p x p` block of the matrix, for orders whose preperiod is 0.
/// `rows` must be rows `1 ..= p`.
pub fn compact_plane(
    n: u64,
    period: &PeriodResult,
    rows: &[SparseRow],
) -> Result<IncidenceMatrix, FoldError> {
    if period.pp != 0 {
        return Err(FoldError::NonzeroPreperiod(period.pp));
    }
    let p = period.p as usize;
    if rows.len() != p || rows.iter().enumerate().any(|(t, r)| r.index != t as u64 + 1) {
        return Err(FoldError::Rows(format!("expected rows 1..={p}")));
    }
    let b = IncidenceMatrix::try_from(BinaryMatrix::from_sparse_rows(rows, p))
        .expect("leading block is square");
    check_tactical(n, &b)?;
    if let Some((a, c, shared)) = b.find_rectangle() {
        return Err(FoldError::InvariantViolation(format!(
            "rows {a} and {c} share columns {shared:?}"
        )));
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::generate_prefix;

    fn period_n1() -> PeriodResult {
        PeriodResult {
            n: 1,
            pp: 0,
            p: 3,
            b_breadth: 1,
            l_max: 3,
            case1: true,
            rows_examined: 0,
        }
    }

    #[test]
    fn triangle_compact_plane() {
        let rows = generate_prefix(1, 3).unwrap();
        let b = compact_plane(1, &period_n1(), &rows).unwrap();
        assert_eq!(
            b.as_binary().to_dense(),
            vec![vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]]
        );
    }

    #[test]
    fn compact_needs_zero_preperiod() {
        let mut p = period_n1();
        p.pp = 48;
        let rows = generate_prefix(1, 3).unwrap();
        assert_eq!(compact_plane(1, &p, &rows), Err(FoldError::NonzeroPreperiod(48)));
    }

    #[test]
    fn two_triangles() {
        let period = period_n1();
        let params = FoldParams::new(&period, 2, None).unwrap();
        assert_eq!((params.p_bar, params.r, params.v), (6, 3, 6));
        let rows = fold_rows(1, &params).unwrap();
        assert_eq!(rows[0].index, 7);
        let b = fold(1, &period, &params, &rows).unwrap();
        assert_eq!(b.row_weights(), vec![2; 6]);
        assert_eq!(b.column_weights(), vec![2; 6]);
        // rows {1,2},{1,3},{2,3} and {4,5},{4,6},{5,6}
        let got: Vec<Vec<usize>> = (1..=6).map(|i| b.row(i).to_vec()).collect();
        assert_eq!(
            got,
            vec![vec![1, 2], vec![1, 3], vec![2, 3], vec![4, 5], vec![4, 6], vec![5, 6]]
        );
    }

    #[test]
    fn parameter_checks() {
        let period = period_n1();
        assert!(matches!(FoldParams::new(&period, 0, None), Err(FoldError::Constraint(_))));
        // p_bar = 3 < 2*l_max = 6
        assert!(matches!(FoldParams::new(&period, 1, None), Err(FoldError::Constraint(_))));
        assert!(matches!(FoldParams::new(&period, 2, Some(5)), Err(FoldError::Constraint(_))));
        assert!(FoldParams::new(&period, 2, Some(7)).is_ok());
        let params = FoldParams::new(&period, 2, None).unwrap();
        let rows = fold_rows(1, &params).unwrap();
        assert!(matches!(fold(1, &period, &params, &rows[1..]), Err(FoldError::Rows(_))));
    }
}
