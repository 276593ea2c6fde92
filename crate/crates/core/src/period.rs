//! Preperiod and period of the greedy matrix.
//!
//! Before row `k` is built, the ones that can still influence the future
//! form a finite window: the rows from `f` (the first row touching the
//! frontier column `l`) up to `k - 1`, restricted to columns `l ..= c`, where
//! `c` is the rightmost column holding a one. That window, taken relative to
//! `(f, l)`, is the defining matrix. Equal defining matrices produce
//! translated copies of everything that follows, so the sequence of defining
//! matrices is eventually periodic and its cycle is the matrix period.
//!
//! Detection runs a single cursor that feeds each defining matrix to two
//! detectors at once: a bounded window of recent content hashes (finds short
//! cycles at their first repetition) and Brent's power-of-two tortoise
//! (finds cycles of any length). A candidate is then confirmed by replaying
//! two fresh cursors `lambda` rows apart, which also pins the exact
//! preperiod as the last row whose shifted copy disagrees.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use xxhash_rust::xxh3::xxh3_128;

use crate::generator::{Generator, ParamError, Params};
use crate::persistence::Checkpoint;
use crate::row::SparseRow;

/// Finite state determining every row from `anchor_k` on.
///
/// Equality ignores the anchors: two defining matrices are equal when their
/// shapes and ones agree.
#[derive(Clone, Debug, Eq, Serialize, Deserialize)]
pub struct DefiningMatrix {
    d: u32,
    b: u32,
    /// `(row offset, column offset)` of each one, 0-based, row-major.
    cells: Vec<(u32, u32)>,
    anchor_k: u64,
    anchor_l: u64,
}

impl PartialEq for DefiningMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.b == other.b && self.cells == other.cells
    }
}

impl DefiningMatrix {
    pub fn from_parts(d: u32, b: u32, cells: Vec<(u32, u32)>, anchor_k: u64, anchor_l: u64) -> Self {
        DefiningMatrix {
            d,
            b,
            cells,
            anchor_k,
            anchor_l,
        }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    /// The frontier-column-is-empty state: all earlier columns are complete
    /// and nothing lies to the right.
    pub fn is_empty(&self) -> bool {
        self.d == 0
    }

    pub fn anchor_k(&self) -> u64 {
        self.anchor_k
    }

    pub fn anchor_l(&self) -> u64 {
        self.anchor_l
    }

    pub fn cells(&self) -> &[(u32, u32)] {
        &self.cells
    }

    /// Entry `(i, j)`, 1-based.
    pub fn get(&self, i: u32, j: u32) -> bool {
        self.cells.binary_search(&(i - 1, j - 1)).is_ok()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut out = vec![vec![0u8; self.b as usize]; self.d as usize];
        for &(r, c) in &self.cells {
            out[r as usize][c as usize] = 1;
        }
        out
    }

    pub fn content_hash(&self) -> u128 {
        let mut buf = Vec::with_capacity(8 * self.cells.len() + 8);
        for &(r, c) in &self.cells {
            buf.extend_from_slice(&r.to_le_bytes());
            buf.extend_from_slice(&c.to_le_bytes());
        }
        buf.extend_from_slice(&self.d.to_le_bytes());
        buf.extend_from_slice(&self.b.to_le_bytes());
        xxh3_128(&buf)
    }
}

/// Geometry of the current window: `(l, f, c)`, or `None` in the
/// empty-frontier case.
fn window_bounds(gen: &Generator) -> Option<(u64, u64, u64)> {
    if gen.frontier_is_empty() {
        return None;
    }
    let l = gen.frontier();
    let f = gen.column_rows(l)[0];
    let c = (f..gen.next_k())
        .filter_map(|i| gen.live_row(i).and_then(SparseRow::last))
        .max()
        .expect("frontier column has a one, so some row reaches it");
    Some((l, f, c))
}

/// The defining matrix of the generator's current state; `None` before the
/// first row.
pub fn defining_matrix(gen: &Generator) -> Option<DefiningMatrix> {
    let k = gen.next_k();
    if k < 2 {
        return None;
    }
    let Some((l, f, c)) = window_bounds(gen) else {
        return Some(DefiningMatrix::from_parts(0, 0, Vec::new(), k, gen.frontier()));
    };
    let mut cells = Vec::new();
    for i in f..k {
        let row = gen.live_row(i).expect("rows from f on are never evicted");
        for &j in row.ones.iter().filter(|&&j| j >= l) {
            cells.push(((i - f) as u32, (j - l) as u32));
        }
    }
    Some(DefiningMatrix::from_parts(
        (k - f) as u32,
        (c - l + 1) as u32,
        cells,
        k,
        l,
    ))
}

/// Content hash of the current defining matrix, without materializing it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Fingerprint {
    hash: u128,
    d: u32,
    b: u32,
    k: u64,
    l: u64,
}

fn fingerprint(gen: &Generator, scratch: &mut Vec<u8>) -> Fingerprint {
    let k = gen.next_k();
    scratch.clear();
    let (d, b) = match window_bounds(gen) {
        None => (0u32, 0u32),
        Some((l, f, c)) => {
            for i in f..k {
                let row = gen.live_row(i).expect("rows from f on are never evicted");
                for &j in row.ones.iter().filter(|&&j| j >= l) {
                    scratch.extend_from_slice(&((i - f) as u32).to_le_bytes());
                    scratch.extend_from_slice(&((j - l) as u32).to_le_bytes());
                }
            }
            ((k - f) as u32, (c - l + 1) as u32)
        }
    };
    scratch.extend_from_slice(&d.to_le_bytes());
    scratch.extend_from_slice(&b.to_le_bytes());
    Fingerprint {
        hash: xxh3_128(scratch),
        d,
        b,
        k,
        l: gen.frontier(),
    }
}

/// One remembered state of the hash window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowEntry {
    pub hash: u128,
    pub k: u64,
    pub l: u64,
}

/// Brent's tortoise: a full defining matrix saved at a power-of-two step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SavedState {
    pub hash: u128,
    pub matrix: DefiningMatrix,
}

/// Resumable state of the cycle detectors.
#[derive(Clone, Debug)]
pub struct DetectorCursor {
    pub window_capacity: u64,
    pub window: VecDeque<WindowEntry>,
    pub brent_power: u64,
    pub brent_lam: u64,
    pub brent_saved: Option<SavedState>,
    pub steps: u64,
    index: HashMap<u128, (u64, u64)>,
    scratch: Vec<u8>,
}

impl PartialEq for DetectorCursor {
    fn eq(&self, other: &Self) -> bool {
        self.window_capacity == other.window_capacity
            && self.window == other.window
            && self.brent_power == other.brent_power
            && self.brent_lam == other.brent_lam
            && self.brent_saved == other.brent_saved
            && self.steps == other.steps
    }
}

impl Eq for DetectorCursor {}

/// A suspected cycle: the state before row `k0` recurs `lambda` rows later.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub k0: u64,
    pub lambda: u64,
}

impl DetectorCursor {
    /// Tag stored in checkpoints for this detector layout.
    pub const ALGORITHM_TAG: u8 = 1;

    pub fn new(window_capacity: u64) -> Self {
        DetectorCursor {
            window_capacity,
            window: VecDeque::new(),
            brent_power: 1,
            brent_lam: 0,
            brent_saved: None,
            steps: 0,
            index: HashMap::new(),
            scratch: Vec::new(),
        }
    }

    pub fn from_parts(
        window_capacity: u64,
        window: Vec<WindowEntry>,
        brent_power: u64,
        brent_lam: u64,
        brent_saved: Option<SavedState>,
        steps: u64,
    ) -> Self {
        let index = window.iter().map(|e| (e.hash, (e.k, e.l))).collect();
        DetectorCursor {
            window_capacity,
            window: window.into(),
            brent_power,
            brent_lam,
            brent_saved,
            steps,
            index,
            scratch: Vec::new(),
        }
    }

    /// Feeds the generator's current state to both detectors.
    pub fn observe(&mut self, gen: &Generator) -> Option<Candidate> {
        let fp = fingerprint(gen, &mut self.scratch);
        if let Some(sigma) = gen.params().sigma() {
            assert!(
                (fp.d as u64) < sigma && (fp.b as u64) < sigma,
                "defining matrix {}x{} at row {} exceeds the bound {sigma}",
                fp.d,
                fp.b,
                fp.k
            );
        }

        let mut candidate = None;
        if let Some(&(k0, l0)) = self.index.get(&fp.hash) {
            if fp.k > k0 && fp.l - l0 == fp.k - k0 {
                candidate = Some(Candidate {
                    k0,
                    lambda: fp.k - k0,
                });
            }
        }
        if candidate.is_none() {
            if let Some(saved) = &self.brent_saved {
                let m = &saved.matrix;
                if saved.hash == fp.hash
                    && fp.k > m.anchor_k
                    && fp.l - m.anchor_l == fp.k - m.anchor_k
                    && defining_matrix(gen).as_ref() == Some(m)
                {
                    candidate = Some(Candidate {
                        k0: m.anchor_k,
                        lambda: fp.k - m.anchor_k,
                    });
                }
            }
        }

        if self.window_capacity > 0 {
            if self.window.len() as u64 >= self.window_capacity {
                if let Some(old) = self.window.pop_front() {
                    if self.index.get(&old.hash).is_some_and(|&(k, _)| k == old.k) {
                        self.index.remove(&old.hash);
                    }
                }
            }
            self.window.push_back(WindowEntry {
                hash: fp.hash,
                k: fp.k,
                l: fp.l,
            });
            self.index.insert(fp.hash, (fp.k, fp.l));
        }

        if self.brent_saved.is_none() || self.brent_power == self.brent_lam {
            if self.brent_saved.is_some() {
                self.brent_power *= 2;
            }
            self.brent_lam = 0;
            self.brent_saved = Some(SavedState {
                hash: fp.hash,
                matrix: defining_matrix(gen).expect("observe needs at least one row"),
            });
        }
        self.brent_lam += 1;
        self.steps += 1;
        candidate
    }
}

/// Period data of one order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodResult {
    pub n: u64,
    pub pp: u64,
    pub p: u64,
    /// Largest `|j - i|` over ones `(i, j)` with `i > pp`.
    pub b_breadth: u64,
    /// Largest row length over rows `i > pp`.
    pub l_max: u64,
    /// The empty-frontier shortcut fired (the matrix restarts itself).
    pub case1: bool,
    pub rows_examined: u64,
}

impl fmt::Display for PeriodResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n: {}", self.n)?;
        writeln!(f, "pp: {}", self.pp)?;
        writeln!(f, "p: {}", self.p)?;
        writeln!(f, "b_breadth: {}", self.b_breadth)?;
        writeln!(f, "l_max: {}", self.l_max)?;
        writeln!(f, "case1: {}", self.case1)?;
        write!(f, "rows_examined: {}", self.rows_examined)
    }
}

#[derive(Debug, Error)]
pub enum PeriodError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("row budget must be at least 1")]
    ZeroBudget,
    #[error("no cycle confirmed within {rows_examined} rows")]
    BudgetExhausted {
        checkpoint: Box<Checkpoint>,
        rows_examined: u64,
    },
    #[error("checkpoint was written for a naive matrix, not an order-n matrix")]
    NotOrderMatrix,
    #[error("cycle confirmation contradicted itself: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DetectorConfig {
    /// Rows the scanning cursor may build in one call.
    pub max_rows: u64,
    /// Number of recent state hashes kept for short-cycle lookups.
    pub window: u64,
    /// Rows between progress callbacks.
    pub progress_every: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            max_rows: 10_000_000,
            window: 1 << 16,
            progress_every: 1 << 16,
        }
    }
}

impl DetectorConfig {
    pub fn with_max_rows(max_rows: u64) -> Self {
        DetectorConfig {
            max_rows,
            ..Default::default()
        }
    }
}

/// View of a running detection, passed to progress callbacks.
#[derive(Clone, Copy, Debug)]
pub struct Progress<'a> {
    gen: &'a Generator,
    cursor: &'a DetectorCursor,
}

impl Progress<'_> {
    pub fn next_k(&self) -> u64 {
        self.gen.next_k()
    }

    pub fn frontier(&self) -> u64 {
        self.gen.frontier()
    }

    pub fn live_rows(&self) -> usize {
        self.gen.live_rows().len()
    }

    pub fn rows_emitted(&self) -> u64 {
        self.gen.rows_emitted()
    }

    /// Snapshot from which [`resume_detect`] continues this run.
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(self.gen.clone(), Some(self.cursor.clone()))
    }
}

/// Finds `(pp, p)` for order `n` with the default detector settings.
pub fn detect_period(n: u64, max_rows: u64) -> Result<PeriodResult, PeriodError> {
    detect_period_with(n, &DetectorConfig::with_max_rows(max_rows), |_| {})
}

pub fn detect_period_with(
    n: u64,
    config: &DetectorConfig,
    progress: impl FnMut(Progress<'_>),
) -> Result<PeriodResult, PeriodError> {
    let gen = Generator::new(n)?;
    let cursor = DetectorCursor::new(config.window);
    run(gen, cursor, config, progress)
}

/// Continues a detection that ran out of budget.
pub fn resume_detect(
    checkpoint: Checkpoint,
    config: &DetectorConfig,
    progress: impl FnMut(Progress<'_>),
) -> Result<PeriodResult, PeriodError> {
    if checkpoint.generator.params().order().is_none() {
        return Err(PeriodError::NotOrderMatrix);
    }
    let cursor = checkpoint
        .detector
        .unwrap_or_else(|| DetectorCursor::new(config.window));
    run(checkpoint.generator, cursor, config, progress)
}

fn run(
    mut gen: Generator,
    mut cursor: DetectorCursor,
    config: &DetectorConfig,
    mut progress: impl FnMut(Progress<'_>),
) -> Result<PeriodResult, PeriodError> {
    if config.max_rows == 0 {
        return Err(PeriodError::ZeroBudget);
    }
    let n = gen.params().order().ok_or(PeriodError::NotOrderMatrix)? as u64;
    let params = *gen.params();
    let start = gen.rows_emitted();
    let every = config.progress_every.max(1);
    loop {
        // budget is checked before observing so a resumed run sees each state once
        let done = gen.rows_emitted() - start;
        if done >= config.max_rows {
            let rows_examined = gen.rows_emitted();
            return Err(PeriodError::BudgetExhausted {
                checkpoint: Box::new(Checkpoint::new(gen, Some(cursor))),
                rows_examined,
            });
        }
        if gen.next_k() >= 2 {
            if gen.frontier_is_empty() {
                let p = gen.next_k() - 1;
                let confirmed = confirm(params, 1, p)?
                    .ok_or_else(|| PeriodError::Inconsistent(format!("restart at row {} did not repeat", p + 1)))?;
                return Ok(confirmed.into_result(n, true, gen.rows_emitted()));
            }
            if let Some(cand) = cursor.observe(&gen) {
                if let Some(confirmed) = confirm(params, cand.k0, cand.lambda)? {
                    return Ok(confirmed.into_result(n, false, gen.rows_emitted()));
                }
            }
        }
        gen.next_row();
        if done % every == every - 1 {
            progress(Progress {
                gen: &gen,
                cursor: &cursor,
            });
        }
    }
}

struct Confirmed {
    pp: u64,
    p: u64,
    /// Rows `pp + 1 ..= pp + 3 * lambda`.
    tail: Vec<SparseRow>,
    rows_used: u64,
}

impl Confirmed {
    fn into_result(self, n: u64, case1: bool, scanned: u64) -> PeriodResult {
        let period = &self.tail[..self.p as usize];
        let b_breadth = period
            .iter()
            .flat_map(|r| r.ones.iter().map(move |&j| j.abs_diff(r.index)))
            .max()
            .unwrap_or(0);
        let l_max = period.iter().map(SparseRow::length).max().unwrap_or(0);
        PeriodResult {
            n,
            pp: self.pp,
            p: self.p,
            b_breadth,
            l_max,
            case1,
            rows_examined: scanned + self.rows_used,
        }
    }
}

/// Replays the matrix with two cursors `lambda` rows apart.
///
/// Returns `None` when the states before rows `k0` and `k0 + lambda` are not
/// translates of each other (a hash collision upstream).
fn confirm(params: Params, k0: u64, lambda: u64) -> Result<Option<Confirmed>, PeriodError> {
    let mut lead = Generator::with_params(params);
    let mut trail = Generator::with_params(params);
    for _ in 0..lambda {
        lead.next_row();
    }
    let need = 3 * lambda as usize;
    let mut pp = 0;
    let mut tail = Vec::with_capacity(need);
    while trail.next_k() < k0 {
        let a = trail.next_row();
        let b = lead.next_row();
        if !b.is_shift_of(&a, lambda) {
            pp = a.index;
            tail.clear();
        } else if tail.len() < need {
            tail.push(a);
        }
    }

    let aligned = lead.frontier() == trail.frontier() + lambda
        && if k0 == 1 {
            lead.frontier_is_empty()
        } else {
            defining_matrix(&trail) == defining_matrix(&lead)
        };
    if !aligned {
        return Ok(None);
    }

    let mut checked = 0;
    while checked < 2 * lambda || tail.len() < need {
        let a = trail.next_row();
        let b = lead.next_row();
        if !b.is_shift_of(&a, lambda) {
            return Err(PeriodError::Inconsistent(format!(
                "row {} is not a shift of row {} although the states matched",
                b.index, a.index
            )));
        }
        if tail.len() < need {
            tail.push(a);
        }
        checked += 1;
    }

    // Shifting by a divisor over 2*lambda rows past pp extends to all rows
    // past pp by lambda-periodicity.
    let p = divisors(lambda)
        .into_iter()
        .find(|&d| (0..2 * lambda as usize).all(|t| tail[t + d as usize].is_shift_of(&tail[t], d)))
        .unwrap_or(lambda);

    Ok(Some(Confirmed {
        pp,
        p,
        tail,
        rows_used: lead.rows_emitted() + trail.rows_emitted(),
    }))
}

/// Divisors of `x` in ascending order, `x` included.
fn divisors(x: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= x {
        if x % d == 0 {
            small.push(d);
            if d * d != x {
                large.push(x / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Smallest `m >= 1` with `floor(p*m/2) > b_breadth` and `p*m >= 2*l_max`.
pub fn minimal_fold_multiplier(result: &PeriodResult) -> u64 {
    let p = result.p;
    (1..)
        .find(|&m| (p * m) / 2 > result.b_breadth && p * m >= 2 * result.l_max)
        .expect("both bounds are eventually met")
}
