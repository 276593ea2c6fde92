//! `lexconf`: generate greedy rectangle-free matrices, find their periods,
//! fold them into configurations and verify the result.

mod commands;
mod count;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Failure;

#[derive(Parser)]
#[command(name = "lexconf", version, about, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write rows of the order-n matrix in row-log format.
    Gen(GenArgs),
    /// Find preperiod and period of the order-n matrix.
    Period(PeriodArgs),
    /// Fold one or more periods into a square incidence matrix.
    Fold(FoldArgs),
    /// Check configuration axioms and identify the incidence structure.
    Verify(VerifyArgs),
    /// List the galf cells of a finite 0-1 matrix.
    Galfs(GalfsArgs),
}

#[derive(Args)]
pub struct GenArgs {
    /// Order of the matrix (rows and columns hold n+1 ones).
    #[arg(short)]
    pub n: u64,
    /// Total number of rows the log should hold (accepts 10^6, 1e6).
    #[arg(long, value_parser = count::parse)]
    pub rows: u64,
    /// Row log path; rows go to standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Checkpoint path; an existing checkpoint is resumed.
    #[arg(long, requires = "out")]
    pub checkpoint: Option<PathBuf>,
    /// Rows between checkpoints.
    #[arg(long, value_parser = count::parse, default_value = "10^6")]
    pub checkpoint_every: u64,
    /// Seconds between checkpoints.
    #[arg(long, default_value_t = 600)]
    pub checkpoint_secs: u64,
    /// Seconds between progress lines on standard error (0 disables them).
    #[arg(long, default_value_t = 10)]
    pub progress_secs: u64,
}

#[derive(Args)]
pub struct PeriodArgs {
    #[arg(short)]
    pub n: Option<u64>,
    /// Rows the scanning cursor may build in this invocation.
    #[arg(long, value_parser = count::parse, default_value = "10^7")]
    pub max_rows: u64,
    /// Recent states kept for short-cycle lookups.
    #[arg(long, value_parser = count::parse, default_value = "65536")]
    pub window: u64,
    /// Where checkpoints are written. Defaults to the --resume file, else
    /// period-n<N>.ckpt in $LEXCONF_CHECKPOINT_DIR (or the working
    /// directory), when the budget runs out.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Rows between periodic checkpoints (only with --checkpoint).
    #[arg(long, value_parser = count::parse, default_value = "10^6")]
    pub checkpoint_every: u64,
    /// Seconds between periodic checkpoints (only with --checkpoint).
    #[arg(long, default_value_t = 600)]
    pub checkpoint_secs: u64,
    /// Continue the run stored in this checkpoint.
    #[arg(long, conflicts_with = "n")]
    pub resume: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = 10)]
    pub progress_secs: u64,
    #[arg(long, env = "LEXCONF_CHECKPOINT_DIR", hide_env_values = true, hide = true)]
    pub checkpoint_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MatrixFormat {
    Sparse,
    P1,
}

#[derive(Args)]
pub struct FoldArgs {
    #[arg(short)]
    pub n: u64,
    /// Period multiplier; defaults to the smallest valid one.
    #[arg(short, conflicts_with = "compact")]
    pub m: Option<u64>,
    /// Row offset of the folded block; defaults to pp + p*m.
    #[arg(long, conflicts_with = "compact")]
    pub v: Option<u64>,
    /// Leading p x p block (needs preperiod 0).
    #[arg(long)]
    pub compact: bool,
    /// Fold without the p*m >= 2*l_max hypothesis; output is still checked
    /// for weights and symmetry.
    #[arg(long, conflicts_with = "compact")]
    pub wrap: bool,
    #[arg(long, value_enum, default_value = "sparse")]
    pub format: MatrixFormat,
    /// Output path; the matrix goes to standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Read rows from this log instead of regenerating them.
    #[arg(long)]
    pub row_log: Option<PathBuf>,
    /// Row budget for the period search.
    #[arg(long, value_parser = count::parse, default_value = "10^7")]
    pub max_rows: u64,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum InputFormat {
    Auto,
    P1,
    Sparse,
    Dense,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Matrix file (P1 bitmap, sparse text or dense 0/1 text).
    pub file: PathBuf,
    /// Lines and points are expected to carry n+1 incidences.
    #[arg(short)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub input_format: InputFormat,
    /// Compare with the desarguesian plane of order q.
    #[arg(long)]
    pub iso: Option<usize>,
    /// Count automorphisms (point/line maps, dualities excluded).
    #[arg(long)]
    pub aut: bool,
    /// Write the incidence graph in DOT format.
    #[arg(long)]
    pub levi: Option<PathBuf>,
    /// Vertex limit for the isomorphism and automorphism searches.
    #[arg(long, value_parser = count::parse, default_value = "10^4")]
    pub budget: u64,
}

#[derive(Args)]
pub struct GalfsArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub input_format: InputFormat,
    /// Output path; the listing goes to standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Failure::USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Period(a) => commands::period(a),
        Command::Fold(a) => commands::fold(a),
        Command::Verify(a) => commands::verify(a),
        Command::Galfs(a) => commands::galfs(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(msg) = f.message() {
                eprintln!("lexconf: {msg}");
            }
            ExitCode::from(f.code())
        }
    }
}
