//! Finite 0-1 matrices stored row-sparse, with 1-based indices.
//!
//! Text encodings:
//! * plain portable bitmap (`P1`): header `P1`, then `width height`, then one
//!   line of `0`/`1` characters per matrix row;
//! * sparse: line `i` lists the ascending one-columns of row `i`, comma
//!   separated (an empty line is an all-zero row);
//! * dense: one line of `0`/`1` characters per row.

use std::fmt::Write as _;

use thiserror::Error;

use crate::row::SparseRow;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("column {col} out of range in row {row} (width {width})")]
    OutOfRange { row: usize, col: usize, width: usize },
}

fn parse_err(line: usize, msg: impl Into<String>) -> MatrixError {
    MatrixError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Rectangular 0-1 matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<usize>>,
}

impl BinaryMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        BinaryMatrix {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    /// Builds a matrix from per-row one-columns (1-based, any order).
    pub fn from_rows(ncols: usize, rows: Vec<Vec<usize>>) -> Result<Self, MatrixError> {
        let mut out = Vec::with_capacity(rows.len());
        for (i, mut r) in rows.into_iter().enumerate() {
            r.sort_unstable();
            r.dedup();
            if let Some(&bad) = r.iter().find(|&&j| j == 0 || j > ncols) {
                return Err(MatrixError::OutOfRange {
                    row: i + 1,
                    col: bad,
                    width: ncols,
                });
            }
            out.push(r);
        }
        Ok(BinaryMatrix {
            nrows: out.len(),
            ncols,
            rows: out,
        })
    }

    pub fn from_dense(bits: &[Vec<u8>]) -> Self {
        let ncols = bits.iter().map(Vec::len).max().unwrap_or(0);
        let rows = bits
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &b)| b != 0)
                    .map(|(j, _)| j + 1)
                    .collect()
            })
            .collect();
        BinaryMatrix {
            nrows: bits.len(),
            ncols,
            rows,
        }
    }

    /// The leading `nrows x ncols` block of the rows of a generated prefix.
    /// Row `t` of the slice becomes row `t + 1`.
    pub fn from_sparse_rows(rows: &[SparseRow], ncols: usize) -> Self {
        let rows = rows
            .iter()
            .map(|r| {
                r.ones
                    .iter()
                    .filter(|&&j| j as usize <= ncols)
                    .map(|&j| j as usize)
                    .collect()
            })
            .collect::<Vec<_>>();
        BinaryMatrix {
            nrows: rows.len(),
            ncols,
            rows,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Ascending one-columns of row `i` (1-based).
    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i - 1]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i - 1].binary_search(&j).is_ok()
    }

    /// Ascending rows holding a one in each column; index 0 is column 1.
    pub fn columns(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.ncols];
        for (i, r) in self.rows.iter().enumerate() {
            for &j in r {
                cols[j - 1].push(i + 1);
            }
        }
        cols
    }

    pub fn flags(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&j| (i + 1, j)))
    }

    pub fn count_ones(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|r| {
                let mut line = vec![0u8; self.ncols];
                for &j in r {
                    line[j - 1] = 1;
                }
                line
            })
            .collect()
    }

    /// Plain PBM: `P1`, `width height`, then one line per row.
    pub fn to_p1(&self) -> String {
        let mut out = format!("P1\n{} {}\n", self.ncols, self.nrows);
        for line in self.to_dense() {
            out.extend(line.iter().map(|&b| if b == 1 { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }

    pub fn to_sparse_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            for (t, j) in r.iter().enumerate() {
                if t > 0 {
                    out.push(',');
                }
                write!(out, "{j}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn to_dense_text(&self) -> String {
        let mut out = String::new();
        for line in self.to_dense() {
            out.extend(line.iter().map(|&b| if b == 1 { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }

    pub fn parse_p1(text: &str) -> Result<Self, MatrixError> {
        // tokens with line numbers, comments stripped
        let mut header = Vec::new();
        let mut bits = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                if header.len() < 3 {
                    header.push((ln + 1, tok.to_string()));
                } else {
                    for ch in tok.chars() {
                        match ch {
                            '0' => bits.push(0u8),
                            '1' => bits.push(1u8),
                            other => return Err(parse_err(ln + 1, format!("bad pixel {other:?}"))),
                        }
                    }
                }
            }
        }
        if header.first().map(|(_, t)| t.as_str()) != Some("P1") {
            return Err(parse_err(1, "missing P1 magic"));
        }
        let dim = |t: Option<&(usize, String)>| -> Result<usize, MatrixError> {
            let (ln, s) = t.ok_or_else(|| parse_err(1, "truncated header"))?;
            s.parse().map_err(|_| parse_err(*ln, format!("bad dimension {s:?}")))
        };
        let width = dim(header.get(1))?;
        let height = dim(header.get(2))?;
        if bits.len() != width * height {
            return Err(parse_err(
                text.lines().count(),
                format!("expected {} pixels, found {}", width * height, bits.len()),
            ));
        }
        let dense: Vec<Vec<u8>> = if width == 0 {
            vec![Vec::new(); height]
        } else {
            bits.chunks(width).map(<[u8]>::to_vec).collect()
        };
        let mut m = Self::from_dense(&dense);
        m.ncols = width;
        Ok(m)
    }

    /// Sparse text; the width is the largest column seen unless `ncols` is given.
    pub fn parse_sparse(text: &str, ncols: Option<usize>) -> Result<Self, MatrixError> {
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            let mut r = Vec::new();
            if !line.is_empty() {
                for tok in line.split(|c: char| c == ',' || c.is_whitespace()) {
                    if tok.is_empty() {
                        continue;
                    }
                    let j: usize = tok
                        .parse()
                        .map_err(|_| parse_err(ln + 1, format!("bad column {tok:?}")))?;
                    if j == 0 {
                        return Err(parse_err(ln + 1, "column 0"));
                    }
                    r.push(j);
                }
            }
            rows.push(r);
        }
        let width = ncols.unwrap_or_else(|| rows.iter().flatten().copied().max().unwrap_or(0));
        Self::from_rows(width, rows)
    }

    pub fn parse_dense(text: &str) -> Result<Self, MatrixError> {
        let mut dense = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            let mut r = Vec::with_capacity(line.len());
            for ch in line.chars() {
                match ch {
                    '0' => r.push(0),
                    '1' => r.push(1),
                    c if c.is_whitespace() => {}
                    other => return Err(parse_err(ln + 1, format!("bad digit {other:?}"))),
                }
            }
            dense.push(r);
        }
        let width = dense.first().map_or(0, Vec::len);
        if let Some(ln) = dense.iter().position(|r| r.len() != width) {
            return Err(parse_err(ln + 1, "ragged rows"));
        }
        Ok(Self::from_dense(&dense))
    }
}

/// Square 0-1 matrix read as the incidence matrix of lines (rows) and
/// points (columns).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IncidenceMatrix(BinaryMatrix);

impl IncidenceMatrix {
    pub fn size(&self) -> usize {
        self.0.nrows
    }

    pub fn as_binary(&self) -> &BinaryMatrix {
        &self.0
    }

    pub fn row(&self, i: usize) -> &[usize] {
        self.0.row(i)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.0.get(i, j)
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.0.rows.iter().map(Vec::len).collect()
    }

    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.size()];
        for r in &self.0.rows {
            for &j in r {
                w[j - 1] += 1;
            }
        }
        w
    }

    pub fn is_symmetric(&self) -> bool {
        self.0.flags().all(|(i, j)| self.0.get(j, i))
    }

    /// First pair of rows sharing two or more columns, with the shared columns.
    pub fn find_rectangle(&self) -> Option<(usize, usize, Vec<usize>)> {
        let cols = self.0.columns();
        let mut seen = std::collections::HashSet::new();
        for lines in &cols {
            for (a_pos, &a) in lines.iter().enumerate() {
                for &b in &lines[a_pos + 1..] {
                    if !seen.insert((a, b)) {
                        let shared = self
                            .row(a)
                            .iter()
                            .filter(|j| self.row(b).binary_search(j).is_ok())
                            .copied()
                            .collect();
                        return Some((a, b, shared));
                    }
                }
            }
        }
        None
    }

    pub fn to_p1(&self) -> String {
        self.0.to_p1()
    }

    pub fn to_sparse_text(&self) -> String {
        self.0.to_sparse_text()
    }
}

impl TryFrom<BinaryMatrix> for IncidenceMatrix {
    type Error = MatrixError;

    fn try_from(m: BinaryMatrix) -> Result<Self, MatrixError> {
        if m.nrows != m.ncols {
            return Err(MatrixError::NotSquare {
                rows: m.nrows,
                cols: m.ncols,
            });
        }
        Ok(IncidenceMatrix(m))
    }
}

impl From<IncidenceMatrix> for BinaryMatrix {
    fn from(m: IncidenceMatrix) -> Self {
        m.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> BinaryMatrix {
        BinaryMatrix::from_dense(&[vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]])
    }

    #[test]
    fn p1_layout() {
        assert_eq!(triangle().to_p1(), "P1\n3 3\n110\n101\n011\n");
    }

    #[test]
    fn parse_all_formats() {
        let t = triangle();
        assert_eq!(BinaryMatrix::parse_p1(&t.to_p1()).unwrap(), t);
        assert_eq!(BinaryMatrix::parse_p1("P1 # c\n3 3\n1 1 0 1 0 1\n0 1 1").unwrap(), t);
        assert_eq!(BinaryMatrix::parse_sparse(&t.to_sparse_text(), None).unwrap(), t);
        assert_eq!(BinaryMatrix::parse_dense("110\n101\n011\n").unwrap(), t);
        assert!(BinaryMatrix::parse_p1("P1\n3 3\n110\n101\n01\n").is_err());
        assert!(BinaryMatrix::parse_p1("P4\n1 1\n1").is_err());
        assert!(BinaryMatrix::parse_dense("110\n10\n").is_err());
        assert!(BinaryMatrix::parse_sparse("1,x\n", None).is_err());
    }

    #[test]
    fn sparse_zero_rows() {
        let m = BinaryMatrix::parse_sparse("1\n\n", Some(2)).unwrap();
        assert_eq!(m.nrows(), 2);
        assert_eq!(m.row(2), &[] as &[usize]);
        assert_eq!(m.to_sparse_text(), "1\n\n");
    }

    #[test]
    fn incidence_checks() {
        let inc = IncidenceMatrix::try_from(triangle()).unwrap();
        assert!(inc.is_symmetric());
        assert_eq!(inc.column_weights(), vec![2, 2, 2]);
        assert_eq!(inc.find_rectangle(), None);

        let full = IncidenceMatrix::try_from(BinaryMatrix::from_dense(&[vec![1; 3], vec![1; 3], vec![1; 3]]))
            .unwrap();
        assert_eq!(full.find_rectangle(), Some((1, 2, vec![1, 2, 3])));

        let rect = BinaryMatrix::from_dense(&[vec![1, 1]]);
        assert!(IncidenceMatrix::try_from(rect).is_err());
    }
}
