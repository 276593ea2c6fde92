use std::fmt::Display;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use lexconf_core::persistence::{read_row_range, verify_log};
use lexconf_core::verify::{automorphism_count_with_budget, isomorphic_with_budget, Report};
use lexconf_core::{
    compact_plane, compute_galfs, detect_period, detect_period_with, fold_rows, generate_prefix, levi_dot,
    load_checkpoint, minimal_fold_multiplier, reference_plane, resume_detect, save_checkpoint, BinaryMatrix,
    Checkpoint, DetectorConfig, FoldError, FoldParams, Generator, IncidenceMatrix, MatrixError, ParamError,
    PeriodError, PeriodResult, PersistError, Progress, RowLogWriter, SparseRow, VerifyError,
};

use crate::{FoldArgs, GalfsArgs, GenArgs, InputFormat, MatrixFormat, PeriodArgs, VerifyArgs};

/// Exit status plus an optional message for standard error.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: Option<String>,
}

impl Failure {
    pub const OTHER: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const BUDGET: u8 = 3;
    pub const VIOLATION: u8 = 4;
    pub const IO: u8 = 5;

    fn new(code: u8, message: impl Display) -> Self {
        Failure {
            code,
            message: Some(message.to_string()),
        }
    }

    /// Exit code only; the report already explains the outcome.
    fn quiet(code: u8) -> Self {
        Failure { code, message: None }
    }

    pub fn code(&self) -> u8 {
        self.code
    }

    pub fn message(&self) -> Option<&str> {
        self.message.as_deref()
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(Failure::IO, e)
    }
}

impl From<PersistError> for Failure {
    fn from(e: PersistError) -> Self {
        Failure::new(Failure::IO, e)
    }
}

impl From<ParamError> for Failure {
    fn from(e: ParamError) -> Self {
        Failure::new(Failure::USAGE, e)
    }
}

impl From<MatrixError> for Failure {
    fn from(e: MatrixError) -> Self {
        Failure::new(Failure::OTHER, e)
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::UnsupportedOrder(_) => Failure::new(Failure::USAGE, e),
            VerifyError::SizeLimit { .. } => Failure::new(Failure::OTHER, e),
        }
    }
}

impl From<FoldError> for Failure {
    fn from(e: FoldError) -> Self {
        let code = match e {
            FoldError::Param(_) | FoldError::Constraint(_) | FoldError::TooLarge(_) | FoldError::NonzeroPreperiod(_) => {
                Failure::USAGE
            }
            FoldError::InvariantViolation(_) => Failure::VIOLATION,
            FoldError::Rows(_) => Failure::OTHER,
        };
        Failure::new(code, e)
    }
}

impl From<PeriodError> for Failure {
    fn from(e: PeriodError) -> Self {
        let code = match e {
            PeriodError::Param(_) | PeriodError::ZeroBudget | PeriodError::NotOrderMatrix => Failure::USAGE,
            PeriodError::BudgetExhausted { .. } => Failure::BUDGET,
            PeriodError::Inconsistent(_) => Failure::OTHER,
        };
        Failure::new(code, e)
    }
}

fn with_path<E: Into<Failure>>(path: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| {
        let f: Failure = e.into();
        let msg = f.message.unwrap_or_default();
        Failure::new(f.code, format!("{}: {msg}", path.display()))
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(with_path(path)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Rate limiter for progress lines and checkpoints.
struct Every {
    interval: Duration,
    last: Instant,
}

impl Every {
    fn secs(secs: u64) -> Self {
        Every {
            interval: Duration::from_secs(secs),
            last: Instant::now(),
        }
    }

    fn due(&mut self) -> bool {
        if self.interval.is_zero() || self.last.elapsed() < self.interval {
            return false;
        }
        self.last = Instant::now();
        true
    }
}

pub fn gen(a: GenArgs) -> Result<(), Failure> {
    if a.rows == 0 {
        return Err(Failure::new(Failure::USAGE, "--rows must be at least 1"));
    }
    let mut gen = Generator::new(a.n)?;
    let Some(out) = a.out.as_deref() else {
        let mut w = BufWriter::new(io::stdout().lock());
        for _ in 0..a.rows {
            writeln!(w, "{}", gen.next_row().to_log_line())?;
        }
        w.flush()?;
        return Ok(());
    };

    let ckpt = a.checkpoint.as_deref();
    let mut log = match ckpt.filter(|p| p.exists()) {
        Some(path) => {
            let c = load_checkpoint(path).map_err(with_path(path))?;
            if c.generator.params().order() != Some(a.n as u32) {
                return Err(Failure::new(
                    Failure::USAGE,
                    format!("{} was not written for order {}", path.display(), a.n),
                ));
            }
            verify_log(&c, out).map_err(with_path(out))?;
            let log = RowLogWriter::resume(out, c.log_offset).map_err(with_path(out))?;
            gen = c.generator;
            eprintln!("resuming after row {}", gen.rows_emitted());
            log
        }
        None => RowLogWriter::create(out).map_err(with_path(out))?,
    };
    if gen.rows_emitted() > a.rows {
        return Err(Failure::new(
            Failure::USAGE,
            format!("checkpoint is already at row {}, past --rows {}", gen.rows_emitted(), a.rows),
        ));
    }

    let save = |log: &mut RowLogWriter, gen: &Generator, path: &Path| -> Result<(), Failure> {
        let offset = log.sync().map_err(with_path(out))?;
        let c = Checkpoint::new(gen.clone(), None).with_log_offset(offset);
        save_checkpoint(&c, path).map_err(with_path(path))?;
        Ok(())
    };
    let mut progress = Every::secs(a.progress_secs);
    let mut timed = Every::secs(a.checkpoint_secs);
    let mut saved_at = gen.rows_emitted();
    while gen.rows_emitted() < a.rows {
        let row = gen.next_row();
        log.append(&row).map_err(with_path(out))?;
        if row.index % 1024 != 0 && row.index != a.rows {
            continue;
        }
        if let Some(path) = ckpt {
            if row.index - saved_at >= a.checkpoint_every || timed.due() {
                save(&mut log, &gen, path)?;
                saved_at = row.index;
            }
        }
        if progress.due() {
            eprintln!("row {} of {}, frontier column {}", row.index, a.rows, gen.frontier());
        }
    }
    log.sync().map_err(with_path(out))?;
    if let Some(path) = ckpt {
        save(&mut log, &gen, path)?;
    }
    println!("rows: {}", gen.rows_emitted());
    println!("running_hash: {:#018x}", gen.running_hash());
    Ok(())
}

pub fn period(a: PeriodArgs) -> Result<(), Failure> {
    if a.max_rows == 0 {
        return Err(Failure::new(Failure::USAGE, "--max-rows must be at least 1"));
    }
    let config = DetectorConfig {
        max_rows: a.max_rows,
        window: a.window.max(1),
        progress_every: 1 << 12,
    };
    let started = Instant::now();
    let mut progress = Every::secs(a.progress_secs);
    let mut timed = Every::secs(a.checkpoint_secs);
    let mut saved_at: Option<u64> = None;
    let periodic = a.checkpoint.clone();
    let callback = |p: Progress<'_>| {
        if let Some(path) = &periodic {
            let since = p.rows_emitted() - *saved_at.get_or_insert(p.rows_emitted());
            if since >= a.checkpoint_every || timed.due() {
                match save_checkpoint(&p.checkpoint(), path) {
                    Ok(_) => saved_at = Some(p.rows_emitted()),
                    Err(e) => eprintln!("warning: checkpoint {} not written: {e}", path.display()),
                }
            }
        }
        if progress.due() {
            eprintln!(
                "row {}, frontier column {}, {} live rows",
                p.next_k() - 1,
                p.frontier(),
                p.live_rows()
            );
        }
    };
    let (n, outcome) = match &a.resume {
        Some(path) => {
            let c = load_checkpoint(path).map_err(with_path(path))?;
            let n = c
                .generator
                .params()
                .order()
                .ok_or_else(|| Failure::new(Failure::USAGE, format!("{} is not an order-n run", path.display())))?;
            eprintln!("resuming after row {}", c.generator.rows_emitted());
            (n as u64, resume_detect(c, &config, callback))
        }
        None => {
            let n = a
                .n
                .ok_or_else(|| Failure::new(Failure::USAGE, "either -n or --resume is required"))?;
            (n, detect_period_with(n, &config, callback))
        }
    };
    eprintln!("wall time: {:.2} s", started.elapsed().as_secs_f64());

    match outcome {
        Ok(result) => {
            print_period(&result, a.json);
            Ok(())
        }
        Err(PeriodError::BudgetExhausted { checkpoint, rows_examined }) => {
            let path = a.checkpoint.clone().or_else(|| a.resume.clone()).unwrap_or_else(|| {
                a.checkpoint_dir
                    .clone()
                    .unwrap_or_else(|| PathBuf::from("."))
                    .join(format!("period-n{n}.ckpt"))
            });
            save_checkpoint(&checkpoint, &path).map_err(with_path(&path))?;
            if a.json {
                let v = serde_json::json!({
                    "n": n,
                    "status": "budget_exhausted",
                    "rows_examined": rows_examined,
                    "checkpoint": path.display().to_string(),
                });
                println!("{v:#}");
            } else {
                println!("budget exhausted: no period confirmed within {rows_examined} rows");
                println!("checkpoint: {}", path.display());
            }
            Err(Failure::quiet(Failure::BUDGET))
        }
        Err(e) => Err(e.into()),
    }
}

fn print_period(result: &PeriodResult, json: bool) {
    let m = minimal_fold_multiplier(result);
    if json {
        let mut v = serde_json::to_value(result).expect("period result serializes");
        v["minimal_m"] = m.into();
        println!("{v:#}");
    } else {
        println!("{result}");
        println!("minimal_m: {m}");
    }
}

fn period_or_budget(n: u64, max_rows: u64) -> Result<PeriodResult, Failure> {
    detect_period(n, max_rows).map_err(|e| match e {
        PeriodError::BudgetExhausted { rows_examined, .. } => Failure::new(
            Failure::BUDGET,
            format!("no period confirmed within {rows_examined} rows; raise --max-rows or use `lexconf period`"),
        ),
        other => other.into(),
    })
}

fn rows_for(n: u64, log: Option<&Path>, start: u64, count: u64) -> Result<Vec<SparseRow>, Failure> {
    match log {
        Some(path) => read_row_range(path, start, count).map_err(with_path(path)),
        None if start == 1 => Ok(generate_prefix(n, count)?),
        None => unreachable!("regenerated fold rows come from fold_rows"),
    }
}

pub fn fold(a: FoldArgs) -> Result<(), Failure> {
    let period = period_or_budget(a.n, a.max_rows)?;
    let b = if a.compact {
        let rows = rows_for(a.n, a.row_log.as_deref(), 1, period.p)?;
        compact_plane(a.n, &period, &rows)?
    } else {
        let m = a.m.unwrap_or_else(|| minimal_fold_multiplier(&period));
        let params = if a.wrap {
            FoldParams::for_wrap(&period, m, a.v)?
        } else {
            FoldParams::new(&period, m, a.v)?
        };
        let rows = match a.row_log.as_deref() {
            Some(path) => rows_for(a.n, Some(path), params.v + 1, params.p_bar)?,
            None => fold_rows(a.n, &params)?,
        };
        eprintln!(
            "fold: n = {}, pp = {}, p = {}, m = {}, p_bar = {}, v = {}",
            a.n, period.pp, period.p, params.m, params.p_bar, params.v
        );
        if a.wrap {
            if !params.meets_rectangle_bound(&period) {
                eprintln!(
                    "note: p_bar = {} < 2*l_max = {}; rectangle-freeness is not guaranteed, run `lexconf verify`",
                    params.p_bar,
                    2 * period.l_max
                );
            }
            lexconf_core::wrap(a.n, &period, &params, &rows)?
        } else {
            lexconf_core::fold(a.n, &period, &params, &rows)?
        }
    };
    let text = match a.format {
        MatrixFormat::Sparse => b.to_sparse_text(),
        MatrixFormat::P1 => b.to_p1(),
    };
    write_output(a.out.as_deref(), &text)
}

fn detect_format(text: &str) -> InputFormat {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if lines.first().is_some_and(|l| l.starts_with("P1")) {
        return InputFormat::P1;
    }
    if text.contains(',') {
        return InputFormat::Sparse;
    }
    let squashed: Vec<String> = lines
        .iter()
        .map(|l| l.chars().filter(|c| !c.is_whitespace()).collect())
        .collect();
    let dense = squashed
        .iter()
        .all(|l| l.len() == lines.len() && l.chars().all(|c| c == '0' || c == '1'));
    if dense {
        InputFormat::Dense
    } else {
        InputFormat::Sparse
    }
}

/// Parses a matrix file; sparse input is square when `square` is set.
fn read_matrix(path: &Path, format: InputFormat, square: bool) -> Result<BinaryMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(with_path(path))?;
    let format = match format {
        InputFormat::Auto => detect_format(&text),
        f => f,
    };
    let parsed = match format {
        InputFormat::P1 => BinaryMatrix::parse_p1(&text),
        InputFormat::Dense => BinaryMatrix::parse_dense(&text),
        InputFormat::Sparse | InputFormat::Auto => {
            let width = square.then(|| text.lines().count());
            BinaryMatrix::parse_sparse(&text, width)
        }
    };
    parsed.map_err(with_path(path))
}

pub fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let m = read_matrix(&a.file, a.input_format, true)?;
    let b = IncidenceMatrix::try_from(m).map_err(|e| Failure::new(Failure::VIOLATION, e))?;
    let budget = a.budget as usize;
    let mut report = Report::new(&b, a.n);
    if let Ok(c) = &report.verdict {
        if let Some(q) = a.iso {
            let reference = reference_plane(q)?;
            report.isomorphism = Some((q, isomorphic_with_budget(c, &reference, budget)?));
        }
        if a.aut {
            report.automorphisms = Some(automorphism_count_with_budget(c, budget)?);
        }
        if let Some(path) = &a.levi {
            fs::write(path, levi_dot(c)).map_err(with_path(path))?;
        }
    }
    print!("{report}");
    if report.verdict.is_err() {
        if a.levi.is_some() {
            eprintln!("no incidence graph written: the matrix is not a configuration");
        }
        return Err(Failure::quiet(Failure::VIOLATION));
    }
    Ok(())
}

pub fn galfs(a: GalfsArgs) -> Result<(), Failure> {
    let m = read_matrix(&a.file, a.input_format, false)?;
    let mut text = String::new();
    for (i, j) in compute_galfs(&m) {
        text.push_str(&format!("{i},{j}\n"));
    }
    write_output(a.out.as_deref(), &text)
}
