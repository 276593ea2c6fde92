//! Configuration axioms, projective planes and incidence isomorphism.

mod field;
mod iso;

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

pub use field::FiniteField;

use crate::matrix::IncidenceMatrix;

/// Vertex budget for the isomorphism and automorphism searches.
pub const DEFAULT_VERTEX_BUDGET: usize = 10_000;

/// Orders accepted by [`reference_plane`].
pub const REFERENCE_ORDERS: [usize; 10] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("no reference plane of order {0}; supported orders are 2, 3, 4, 5, 7, 8, 9, 11, 13, 16")]
    UnsupportedOrder(usize),
    #[error("incidence graph has {vertices} vertices, above the budget of {budget}")]
    SizeLimit { vertices: usize, budget: usize },
}

/// The first axiom failure found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    LineWeight { line: usize, weight: usize, expected: usize },
    PointWeight { point: usize, weight: usize, expected: usize },
    SharedPoints { a: usize, b: usize, shared: Vec<usize> },
    PointOutOfRange { line: usize, point: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LineWeight { line, weight, expected } => {
                write!(f, "line {line} has {weight} points, expected {expected}")
            }
            Violation::PointWeight { point, weight, expected } => {
                write!(f, "point {point} lies on {weight} lines, expected {expected}")
            }
            Violation::SharedPoints { a, b, shared } => {
                let list: Vec<String> = shared.iter().map(usize::to_string).collect();
                write!(f, "lines {a} and {b} share {} points: {}", shared.len(), list.join(", "))
            }
            Violation::PointOutOfRange { line, point } => {
                write!(f, "line {line} contains point {point}, outside the point set")
            }
        }
    }
}

/// A symmetric configuration `v_k`: `v` points and `v` lines, `k` points on
/// every line, `k` lines through every point, two lines meeting at most once.
///
/// Only constructible through checks, so every value satisfies the axioms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    v: usize,
    k: usize,
    lines: Vec<Vec<usize>>,
}

impl Configuration {
    /// Lines are lists of 1-based points; order within a line is irrelevant.
    pub fn from_lines(v: usize, lines: Vec<Vec<usize>>, k: usize) -> Result<Self, Violation> {
        let mut lines = lines;
        for (t, line) in lines.iter_mut().enumerate() {
            line.sort_unstable();
            line.dedup();
            if let Some(&p) = line.iter().find(|&&p| p == 0 || p > v) {
                return Err(Violation::PointOutOfRange { line: t + 1, point: p });
            }
        }
        check_axioms(v, &lines, k)?;
        Ok(Configuration { v, k, lines })
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Ascending points of each line; index 0 is line 1.
    pub fn lines(&self) -> &[Vec<usize>] {
        &self.lines
    }

    pub fn to_incidence(&self) -> IncidenceMatrix {
        let m = crate::matrix::BinaryMatrix::from_rows(self.v, self.lines.clone())
            .expect("configuration points are in range");
        IncidenceMatrix::try_from(m).expect("configuration is square")
    }

    /// Renames point `p` to `points[p-1]` and line `t` to `lines[t-1]`
    /// (both permutations of `1..=v`).
    pub fn relabel(&self, points: &[usize], lines: &[usize]) -> Configuration {
        assert_eq!(points.len(), self.v);
        assert_eq!(lines.len(), self.lines.len());
        let mut out = vec![Vec::new(); self.lines.len()];
        for (t, line) in self.lines.iter().enumerate() {
            let mut l: Vec<usize> = line.iter().map(|&p| points[p - 1]).collect();
            l.sort_unstable();
            out[lines[t] - 1] = l;
        }
        Configuration::from_lines(self.v, out, self.k).expect("relabeling preserves the axioms")
    }

    /// Lines through each point; index 0 is point 1.
    pub fn point_lines(&self) -> Vec<Vec<usize>> {
        let mut through = vec![Vec::new(); self.v];
        for (t, line) in self.lines.iter().enumerate() {
            for &p in line {
                through[p - 1].push(t + 1);
            }
        }
        through
    }
}

fn check_axioms(v: usize, lines: &[Vec<usize>], k: usize) -> Result<(), Violation> {
    for (t, line) in lines.iter().enumerate() {
        if line.len() != k {
            return Err(Violation::LineWeight { line: t + 1, weight: line.len(), expected: k });
        }
    }
    let mut through = vec![Vec::new(); v];
    for (t, line) in lines.iter().enumerate() {
        for &p in line {
            through[p - 1].push(t + 1);
        }
    }
    for (p, ls) in through.iter().enumerate() {
        if ls.len() != k {
            return Err(Violation::PointWeight { point: p + 1, weight: ls.len(), expected: k });
        }
    }
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (p, ls) in through.iter().enumerate() {
        for (i, &a) in ls.iter().enumerate() {
            for &b in &ls[i + 1..] {
                if seen.insert((a, b), p + 1).is_some() {
                    let shared = lines[a - 1]
                        .iter()
                        .filter(|q| lines[b - 1].binary_search(q).is_ok())
                        .copied()
                        .collect();
                    return Err(Violation::SharedPoints { a, b, shared });
                }
            }
        }
    }
    Ok(())
}

/// Checks line weights, point weights and pairwise intersections of the
/// rows of `b` as lines of a `v_{n+1}` configuration.
pub fn verify_configuration(b: &IncidenceMatrix, n: usize) -> Result<Configuration, Violation> {
    let lines: Vec<Vec<usize>> = b.as_binary().rows().map(<[usize]>::to_vec).collect();
    Configuration::from_lines(b.size(), lines, n + 1)
}

/// Whether `c` is a projective plane of order `k - 1 >= 2`.
///
/// # Panics
///
/// If the point count matches but two points are not joined by a line,
/// which the axioms rule out.
pub fn is_projective_plane(c: &Configuration) -> bool {
    if c.k < 3 || c.v != c.k * c.k - c.k + 1 {
        return false;
    }
    let mut joined = vec![usize::MAX; c.v];
    for (p, ls) in c.point_lines().iter().enumerate() {
        joined[p] = p;
        for &t in ls {
            for &q in &c.lines[t - 1] {
                joined[q - 1] = p;
            }
        }
        if let Some(q) = joined.iter().position(|&x| x != p) {
            panic!("internal error: points {} and {} are not joined", p + 1, q + 1);
        }
    }
    true
}

/// The desarguesian plane of order `q`: points and lines are the
/// one-dimensional subspaces of the rank-3 vector space over the q-element
/// field, incident when their dot product vanishes.
pub fn reference_plane(q: usize) -> Result<Configuration, VerifyError> {
    if !REFERENCE_ORDERS.contains(&q) {
        return Err(VerifyError::UnsupportedOrder(q));
    }
    let f = FiniteField::new(q).ok_or(VerifyError::UnsupportedOrder(q))?;
    let mut vecs = vec![[0, 0, 1]];
    vecs.extend((0..q).map(|z| [0, 1, z]));
    vecs.extend((0..q).flat_map(|y| (0..q).map(move |z| [1, y, z])));
    let dot = |a: &[usize; 3], b: &[usize; 3]| {
        (0..3).fold(0, |acc, i| f.add(acc, f.mul(a[i], b[i])))
    };
    let lines = vecs
        .iter()
        .map(|l| {
            vecs.iter()
                .enumerate()
                .filter(|(_, p)| dot(l, p) == 0)
                .map(|(i, _)| i + 1)
                .collect()
        })
        .collect();
    Ok(Configuration::from_lines(vecs.len(), lines, q + 1).expect("coordinate plane satisfies the axioms"))
}

fn check_budget(c: &Configuration, budget: usize) -> Result<(), VerifyError> {
    let vertices = c.v + c.lines.len();
    if vertices > budget {
        return Err(VerifyError::SizeLimit { vertices, budget });
    }
    Ok(())
}

/// Whether a bijection maps points to points and lines to lines of `b`
/// while preserving incidence. Dualities are not considered.
pub fn isomorphic(a: &Configuration, b: &Configuration) -> Result<bool, VerifyError> {
    isomorphic_with_budget(a, b, DEFAULT_VERTEX_BUDGET)
}

pub fn isomorphic_with_budget(a: &Configuration, b: &Configuration, budget: usize) -> Result<bool, VerifyError> {
    check_budget(a, budget)?;
    check_budget(b, budget)?;
    if a.v != b.v || a.k != b.k {
        return Ok(false);
    }
    Ok(iso::isomorphic(&iso::Levi::new(a), &iso::Levi::new(b)))
}

/// Order of the group of incidence-preserving point/line permutations.
pub fn automorphism_count(c: &Configuration) -> Result<u128, VerifyError> {
    automorphism_count_with_budget(c, DEFAULT_VERTEX_BUDGET)
}

pub fn automorphism_count_with_budget(c: &Configuration, budget: usize) -> Result<u128, VerifyError> {
    check_budget(c, budget)?;
    Ok(iso::automorphism_count(&iso::Levi::new(c)))
}

/// Incidence graph in DOT: vertices `p1..pv`, `l1..lv`, one edge per flag.
pub fn levi_dot(c: &Configuration) -> String {
    let mut out = String::from("graph levi {\n");
    for p in 1..=c.v {
        let _ = writeln!(out, "  p{p};");
    }
    for t in 1..=c.lines.len() {
        let _ = writeln!(out, "  l{t};");
    }
    for (t, line) in c.lines.iter().enumerate() {
        for p in line {
            let _ = writeln!(out, "  l{} -- p{p};", t + 1);
        }
    }
    out.push_str("}\n");
    out
}

/// Structured text summary of a verification run.
#[derive(Clone, Debug)]
pub struct Report {
    pub size: usize,
    pub k: usize,
    pub verdict: Result<Configuration, Violation>,
    pub plane: Option<bool>,
    pub isomorphism: Option<(usize, bool)>,
    pub automorphisms: Option<u128>,
}

impl Report {
    /// Runs the axiom check and the plane test; isomorphism and
    /// automorphism fields are left for the caller.
    pub fn new(b: &IncidenceMatrix, n: usize) -> Self {
        let verdict = verify_configuration(b, n);
        let plane = verdict.as_ref().ok().map(is_projective_plane);
        Report {
            size: b.size(),
            k: n + 1,
            verdict,
            plane,
            isomorphism: None,
            automorphisms: None,
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "v: {}", self.size)?;
        writeln!(f, "k: {}", self.k)?;
        match &self.verdict {
            Ok(c) => {
                writeln!(f, "axioms: ok")?;
                writeln!(f, "configuration {}_{}", c.v, c.k)?;
            }
            Err(v) => writeln!(f, "axioms: violated: {v}")?,
        }
        match self.plane {
            Some(true) => writeln!(f, "projective plane of order {}", self.k - 1)?,
            Some(false) => writeln!(f, "not a projective plane")?,
            None => {}
        }
        if let Some((q, yes)) = self.isomorphism {
            let word = if yes { "yes" } else { "no" };
            writeln!(f, "isomorphic: {word} (reference plane of order {q})")?;
        }
        if let Some(a) = self.automorphisms {
            writeln!(f, "automorphisms: {a} (point/line maps, dualities excluded)")?;
        }
        Ok(())
    }
}
