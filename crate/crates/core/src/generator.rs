//! Streaming construction of the greedy rectangle-free matrix.
//!
//! Cells are visited in lexicographic order. A cell of the row under
//! construction receives a one when the row still has room, the column still
//! has room, and the new one would not close a rectangle of ones with the
//! rows above. For the order-`n` matrix both caps are `n + 1`; the naive
//! matrices of type `(k, r)` use a row cap `k` and a column cap `r`.
//!
//! Only a window of rows is kept. A row is dropped once every column holding
//! one of its ones is complete and lies left of the frontier, because no
//! later admissibility check can reach it.

use std::collections::VecDeque;

use thiserror::Error;

use crate::row::{chain_hash, SparseRow};

/// Largest supported configuration order.
pub const MAX_ORDER: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("order n must be between 1 and {MAX_ORDER}, got {0}")]
    Order(u64),
    #[error("naive matrix caps must be between 1 and {max}, got ({0}, {1})", max = MAX_ORDER + 1)]
    Caps(u64, u64),
    #[error("row count must be at least 1")]
    ZeroRows,
}

/// Row/column caps of a greedy construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Params {
    order: Option<u32>,
    row_cap: u32,
    col_cap: u32,
}

impl Params {
    /// The order-`n` construction: both caps are `n + 1`.
    pub fn new(n: u64) -> Result<Self, ParamError> {
        if n == 0 || n > MAX_ORDER as u64 {
            return Err(ParamError::Order(n));
        }
        let cap = n as u32 + 1;
        Ok(Params {
            order: Some(n as u32),
            row_cap: cap,
            col_cap: cap,
        })
    }

    /// Naive matrix of type `(row_cap, col_cap)`.
    pub fn naive(row_cap: u64, col_cap: u64) -> Result<Self, ParamError> {
        let max = MAX_ORDER as u64 + 1;
        if row_cap == 0 || col_cap == 0 || row_cap > max || col_cap > max {
            return Err(ParamError::Caps(row_cap, col_cap));
        }
        Ok(Params {
            order: None,
            row_cap: row_cap as u32,
            col_cap: col_cap as u32,
        })
    }

    pub fn order(&self) -> Option<u32> {
        self.order
    }

    pub fn row_cap(&self) -> u32 {
        self.row_cap
    }

    pub fn col_cap(&self) -> u32 {
        self.col_cap
    }

    /// `2n³ − n(n−3)`; only defined for the order-`n` construction.
    pub fn sigma(&self) -> Option<u64> {
        self.order.map(sigma)
    }

    /// Strict upper bound on the length of any row.
    pub fn length_bound(&self) -> u64 {
        match self.order {
            Some(n) => sigma(n),
            None => {
                let (k, r) = (self.row_cap as u64, self.col_cap as u64);
                4 * k * r * k.max(r) + 2 * (k + r) + 4
            }
        }
    }
}

/// `2n³ − n(n−3)`.
pub fn sigma(n: u32) -> u64 {
    let n = n as i128;
    (2 * n * n * n - n * (n - 3)) as u64
}

/// Resumable cursor of the streaming construction.
///
/// `live` holds the rows `first_live .. next_k` contiguously. `columns[t]`
/// lists the rows holding a one in column `frontier + t`; columns past the
/// end of the deque are empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    params: Params,
    next_k: u64,
    first_live: u64,
    live: VecDeque<SparseRow>,
    frontier: u64,
    columns: VecDeque<Vec<u64>>,
    rows_emitted: u64,
    running_hash: u64,
}

impl Generator {
    pub fn new(n: u64) -> Result<Self, ParamError> {
        Ok(Self::with_params(Params::new(n)?))
    }

    pub fn with_params(params: Params) -> Self {
        Generator {
            params,
            next_k: 1,
            first_live: 1,
            live: VecDeque::new(),
            frontier: 1,
            columns: VecDeque::new(),
            rows_emitted: 0,
            running_hash: 0,
        }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Index of the next row to be built.
    pub fn next_k(&self) -> u64 {
        self.next_k
    }

    /// Smallest column whose weight is below the column cap.
    pub fn frontier(&self) -> u64 {
        self.frontier
    }

    pub fn rows_emitted(&self) -> u64 {
        self.rows_emitted
    }

    /// Hash chain over every row emitted so far.
    pub fn running_hash(&self) -> u64 {
        self.running_hash
    }

    /// Rows not yet evicted, in ascending order.
    pub fn live_rows(&self) -> impl ExactSizeIterator<Item = &SparseRow> + '_ {
        self.live.iter()
    }

    /// Index of the oldest row still held.
    pub fn first_live(&self) -> u64 {
        self.first_live
    }

    pub(crate) fn live_row(&self, index: u64) -> Option<&SparseRow> {
        index
            .checked_sub(self.first_live)
            .and_then(|t| self.live.get(t as usize))
    }

    /// Rows holding a one in `column`, for columns at or right of the frontier.
    pub fn column_rows(&self, column: u64) -> &[u64] {
        if column < self.frontier {
            return &[];
        }
        self.columns
            .get((column - self.frontier) as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Current weight of `column`.
    pub fn column_weight(&self, column: u64) -> u32 {
        if column < self.frontier {
            self.params.col_cap
        } else {
            self.column_rows(column).len() as u32
        }
    }

    /// Weights of the incomplete columns at or right of the frontier, keyed
    /// by absolute column index. Empty columns are omitted.
    pub fn column_weights(&self) -> Vec<(u64, u32)> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, rows)| !rows.is_empty())
            .map(|(t, rows)| (self.frontier + t as u64, rows.len() as u32))
            .collect()
    }

    /// True when the frontier column holds no ones yet.
    pub fn frontier_is_empty(&self) -> bool {
        self.columns.front().is_none_or(|c| c.is_empty())
    }

    /// Whether cell `(next_k, l)` may receive a one given the ones already
    /// placed in the row under construction (all left of `l`).
    pub fn is_admissible(&self, partial_row: &[u64], l: u64) -> bool {
        if partial_row.len() >= self.params.row_cap as usize {
            return false;
        }
        if self.column_weight(l) >= self.params.col_cap {
            return false;
        }
        !self.closes_rectangle(partial_row, l)
    }

    fn closes_rectangle(&self, partial_row: &[u64], l: u64) -> bool {
        if partial_row.is_empty() {
            return false;
        }
        self.column_rows(l).iter().any(|&i| {
            let row = self
                .live_row(i)
                .expect("row holding a one at or right of the frontier was evicted");
            intersects(&row.ones, partial_row)
        })
    }

    /// Builds, records and returns the next row.
    pub fn next_row(&mut self) -> SparseRow {
        let cap = self.params.row_cap as usize;
        let bound = self.params.length_bound();
        let mut ones = Vec::with_capacity(cap);
        let mut l = self.frontier;
        loop {
            if self.is_admissible(&ones, l) {
                ones.push(l);
                if ones.len() == cap {
                    break;
                }
            }
            l += 1;
            if let Some(&first) = ones.first() {
                assert!(
                    l - first + 1 < bound,
                    "row {} exceeded the length bound {bound}",
                    self.next_k
                );
            }
        }
        let row = SparseRow::new(self.next_k, ones);
        self.commit(row.clone());
        row
    }

    fn commit(&mut self, row: SparseRow) {
        debug_assert_eq!(row.index, self.next_k);
        for &j in &row.ones {
            let t = (j - self.frontier) as usize;
            if self.columns.len() <= t {
                self.columns.resize_with(t + 1, Vec::new);
            }
            self.columns[t].push(row.index);
        }
        self.running_hash = chain_hash(self.running_hash, &row);
        self.live.push_back(row);
        self.next_k += 1;
        self.rows_emitted += 1;

        let cap = self.params.col_cap as usize;
        while self.columns.front().is_some_and(|c| c.len() >= cap) {
            self.columns.pop_front();
            self.frontier += 1;
        }
        self.evict();
    }

    fn evict(&mut self) {
        while let Some(front) = self.live.front() {
            match front.last() {
                Some(last) if last >= self.frontier => break,
                _ => {}
            }
            debug_assert!(front.ones.iter().all(|&j| j < self.frontier));
            self.live.pop_front();
            self.first_live += 1;
        }
    }

    /// Reassembles a generator from checkpointed parts, re-deriving the
    /// column lists from the live rows and cross-checking every recorded
    /// weight.
    pub fn from_parts(
        params: Params,
        next_k: u64,
        frontier: u64,
        live_rows: Vec<SparseRow>,
        column_weights: &[(u64, u32)],
        rows_emitted: u64,
        running_hash: u64,
    ) -> Result<Self, String> {
        if next_k == 0 || frontier == 0 {
            return Err("row and column indices are 1-based".into());
        }
        let first_live = live_rows.first().map_or(next_k, |r| r.index);
        for (t, row) in live_rows.iter().enumerate() {
            if row.index != first_live + t as u64 {
                return Err(format!("live rows are not contiguous at row {}", row.index));
            }
            if row.ones.len() != params.row_cap as usize {
                return Err(format!("row {} has weight {}", row.index, row.ones.len()));
            }
            if !row.ones.windows(2).all(|w| w[0] < w[1]) {
                return Err(format!("row {} is not ascending", row.index));
            }
        }
        if first_live + live_rows.len() as u64 != next_k {
            return Err("live rows do not end just before next_k".into());
        }
        let mut columns: VecDeque<Vec<u64>> = VecDeque::new();
        for row in &live_rows {
            for &j in row.ones.iter().filter(|&&j| j >= frontier) {
                let t = (j - frontier) as usize;
                if columns.len() <= t {
                    columns.resize_with(t + 1, Vec::new);
                }
                columns[t].push(row.index);
            }
        }
        let cap = params.col_cap as usize;
        if columns.iter().any(|c| c.len() > cap) {
            return Err("column weight above cap".into());
        }
        if columns.front().is_some_and(|c| c.len() >= cap) {
            return Err("frontier column is complete".into());
        }
        let derived: Vec<(u64, u32)> = columns
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(t, c)| (frontier + t as u64, c.len() as u32))
            .collect();
        if derived != column_weights {
            return Err("recorded column weights disagree with the live rows".into());
        }
        if live_rows
            .first()
            .is_some_and(|r| r.last().is_some_and(|last| last < frontier))
        {
            return Err("an evictable row was kept at the front of the window".into());
        }
        Ok(Generator {
            params,
            next_k,
            first_live,
            live: live_rows.into(),
            frontier,
            columns,
            rows_emitted,
            running_hash,
        })
    }
}

impl Iterator for Generator {
    type Item = SparseRow;

    fn next(&mut self) -> Option<SparseRow> {
        Some(self.next_row())
    }
}

fn intersects(a: &[u64], b: &[u64]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// The first `count` rows of the order-`n` matrix.
pub fn generate_prefix(n: u64, count: u64) -> Result<Vec<SparseRow>, ParamError> {
    if count == 0 {
        return Err(ParamError::ZeroRows);
    }
    Ok(Generator::new(n)?.take(count as usize).collect())
}

/// The first `rows` rows of the naive matrix of type `(k, r)`.
pub fn generate_naive(k: u64, r: u64, rows: u64) -> Result<Vec<SparseRow>, ParamError> {
    if rows == 0 {
        return Err(ParamError::ZeroRows);
    }
    let params = Params::naive(k, r)?;
    Ok(Generator::with_params(params).take(rows as usize).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(list: &[&[u64]]) -> Vec<Vec<u64>> {
        list.iter().map(|r| r.to_vec()).collect()
    }

    fn ones(prefix: &[SparseRow]) -> Vec<Vec<u64>> {
        prefix.iter().map(|r| r.ones.clone()).collect()
    }

    #[test]
    fn fresh_state() {
        let g = Generator::new(1).unwrap();
        assert_eq!(g.rows_emitted(), 0);
        assert_eq!(g.frontier(), 1);
        assert_eq!(g.next_k(), 1);
        assert_eq!(g.live_rows().len(), 0);
        assert!(g.column_weights().is_empty());
    }

    #[test]
    fn sigma_values() {
        assert_eq!(Generator::new(3).unwrap().params().sigma(), Some(54));
        assert_eq!(sigma(1), 4);
        assert_eq!(sigma(2), 18);
        assert_eq!(sigma(64), 2 * 64u64.pow(3) - 64 * 61);
    }

    #[test]
    fn rejects_bad_orders() {
        assert_eq!(Generator::new(0).unwrap_err(), ParamError::Order(0));
        assert_eq!(Generator::new(65).unwrap_err(), ParamError::Order(65));
        assert!(Generator::new(64).is_ok());
        assert!(generate_naive(0, 2, 3).is_err());
        assert!(generate_naive(2, 0, 3).is_err());
        assert_eq!(generate_prefix(1, 0).unwrap_err(), ParamError::ZeroRows);
    }

    #[test]
    fn admissibility_examples() {
        let mut g = Generator::new(1).unwrap();
        assert!(g.is_admissible(&[], 1));
        g.next_row();
        assert!(!g.is_admissible(&[1], 2));
        assert!(g.is_admissible(&[1], 3));
        assert!(!g.is_admissible(&[1, 3], 4));

        let mut g = Generator::new(2).unwrap();
        for _ in 0..3 {
            g.next_row();
        }
        assert!(!g.is_admissible(&[2, 4], 5));
        assert!(g.is_admissible(&[2, 4], 6));
        // column 1 is complete
        assert!(!g.is_admissible(&[], 1));
    }

    #[test]
    fn first_rows() {
        assert_eq!(ones(&generate_prefix(1, 3).unwrap()), rows(&[&[1, 2], &[1, 3], &[2, 3]]));
        assert_eq!(
            ones(&generate_prefix(1, 6).unwrap())[3..],
            rows(&[&[4, 5], &[4, 6], &[5, 6]])
        );
        assert_eq!(
            ones(&generate_prefix(2, 4).unwrap()),
            rows(&[&[1, 2, 3], &[1, 4, 5], &[1, 6, 7], &[2, 4, 6]])
        );
        assert_eq!(ones(&generate_prefix(3, 1).unwrap()), rows(&[&[1, 2, 3, 4]]));
        for n in 1..=8 {
            let first = generate_prefix(n, 1).unwrap();
            assert_eq!(first[0].ones, (1..=n + 1).collect::<Vec<_>>());
        }
    }

    #[test]
    fn naive_identity() {
        assert_eq!(ones(&generate_naive(1, 1, 4).unwrap()), rows(&[&[1], &[2], &[3], &[4]]));
    }

    #[test]
    fn window_stays_small() {
        let mut g = Generator::new(3).unwrap();
        for _ in 0..5000 {
            g.next_row();
        }
        let sigma = g.params().sigma().unwrap() as usize;
        assert!(g.live_rows().len() < sigma, "window grew to {}", g.live_rows().len());
        for row in g.live_rows() {
            assert!(row.last().unwrap() >= g.frontier() || row.index > g.first_live());
        }
    }

    #[test]
    fn from_parts_round_trip() {
        let mut g = Generator::new(3).unwrap();
        for _ in 0..100 {
            g.next_row();
        }
        let rebuilt = Generator::from_parts(
            *g.params(),
            g.next_k(),
            g.frontier(),
            g.live_rows().cloned().collect(),
            &g.column_weights(),
            g.rows_emitted(),
            g.running_hash(),
        )
        .unwrap();
        assert_eq!(rebuilt, g);

        let mut weights = g.column_weights();
        weights[0].1 += 1;
        assert!(Generator::from_parts(
            *g.params(),
            g.next_k(),
            g.frontier(),
            g.live_rows().cloned().collect(),
            &weights,
            g.rows_emitted(),
            g.running_hash(),
        )
        .is_err());
    }
}
