//! Completed rows of the greedy matrix and their text encoding.
//!
//! A row log holds one row per line as `k<TAB>j1,j2,...` with 1-based,
//! strictly ascending column indices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use xxhash_rust::xxh3::xxh3_64_with_seed;

/// One completed row: its 1-based index and the ascending columns of its ones.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SparseRow {
    pub index: u64,
    pub ones: Vec<u64>,
}

impl SparseRow {
    pub fn new(index: u64, ones: Vec<u64>) -> Self {
        debug_assert!(ones.windows(2).all(|w| w[0] < w[1]));
        SparseRow { index, ones }
    }

    pub fn weight(&self) -> usize {
        self.ones.len()
    }

    pub fn first(&self) -> Option<u64> {
        self.ones.first().copied()
    }

    pub fn last(&self) -> Option<u64> {
        self.ones.last().copied()
    }

    /// Last one-column minus first one-column plus one; zero for an empty row.
    pub fn length(&self) -> u64 {
        match (self.first(), self.last()) {
            (Some(a), Some(b)) => b - a + 1,
            _ => 0,
        }
    }

    pub fn contains(&self, column: u64) -> bool {
        self.ones.binary_search(&column).is_ok()
    }

    /// True when `other` is this row moved `shift` steps down the diagonal.
    pub fn is_shift_of(&self, other: &SparseRow, shift: u64) -> bool {
        self.index == other.index + shift
            && self.ones.len() == other.ones.len()
            && self.ones.iter().zip(&other.ones).all(|(a, b)| *a == *b + shift)
    }

    /// One line of the row log, without the trailing newline.
    pub fn to_log_line(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SparseRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t", self.index)?;
        for (i, j) in self.ones.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{j}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RowParseError {
    #[error("missing tab separator")]
    MissingTab,
    #[error("bad row index {0:?}")]
    BadIndex(String),
    #[error("bad column {0:?}")]
    BadColumn(String),
    #[error("columns are not strictly ascending")]
    NotAscending,
    #[error("column index 0 is not allowed")]
    ZeroColumn,
}

impl FromStr for SparseRow {
    type Err = RowParseError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let line = line.trim_end_matches(['\r', '\n']);
        let (index, cols) = line.split_once('\t').ok_or(RowParseError::MissingTab)?;
        let index: u64 = index
            .parse()
            .map_err(|_| RowParseError::BadIndex(index.to_string()))?;
        if index == 0 {
            return Err(RowParseError::BadIndex(index.to_string()));
        }
        let mut ones = Vec::new();
        if !cols.is_empty() {
            for c in cols.split(',') {
                let j: u64 = c.parse().map_err(|_| RowParseError::BadColumn(c.to_string()))?;
                if j == 0 {
                    return Err(RowParseError::ZeroColumn);
                }
                if ones.last().is_some_and(|&prev| prev >= j) {
                    return Err(RowParseError::NotAscending);
                }
                ones.push(j);
            }
        }
        Ok(SparseRow { index, ones })
    }
}

/// Extends a running hash chain by one row.
///
/// The chain starts at 0 and folds in each row's index followed by its
/// columns, all as little-endian u64.
pub fn chain_hash(prev: u64, row: &SparseRow) -> u64 {
    let mut buf = Vec::with_capacity(8 * (row.ones.len() + 1));
    buf.extend_from_slice(&row.index.to_le_bytes());
    for j in &row.ones {
        buf.extend_from_slice(&j.to_le_bytes());
    }
    xxh3_64_with_seed(&buf, prev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_line_format() {
        let row = SparseRow::new(2, vec![1, 3]);
        assert_eq!(row.to_log_line(), "2\t1,3");
        assert_eq!("2\t1,3".parse::<SparseRow>().unwrap(), row);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert_eq!("2 1,3".parse::<SparseRow>(), Err(RowParseError::MissingTab));
        assert_eq!("2\t3,1".parse::<SparseRow>(), Err(RowParseError::NotAscending));
        assert_eq!("2\t0,1".parse::<SparseRow>(), Err(RowParseError::ZeroColumn));
        assert!(matches!("x\t1".parse::<SparseRow>(), Err(RowParseError::BadIndex(_))));
        assert!(matches!("1\t1,,2".parse::<SparseRow>(), Err(RowParseError::BadColumn(_))));
    }

    #[test]
    fn shift_and_length() {
        let a = SparseRow::new(1, vec![1, 2]);
        let b = SparseRow::new(4, vec![4, 5]);
        assert!(b.is_shift_of(&a, 3));
        assert!(!b.is_shift_of(&a, 2));
        assert_eq!(SparseRow::new(2, vec![1, 3]).length(), 3);
        assert_eq!(SparseRow::new(2, vec![]).length(), 0);
    }

    #[test]
    fn chain_hash_depends_on_order() {
        let a = SparseRow::new(1, vec![1, 2]);
        let b = SparseRow::new(2, vec![1, 3]);
        let h1 = chain_hash(chain_hash(0, &a), &b);
        let h2 = chain_hash(chain_hash(0, &b), &a);
        assert_ne!(h1, h2);
    }
}
