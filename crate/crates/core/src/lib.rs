//! Greedy rectangle-free matrices and the symmetric configurations folded
//! from their periods.
//!
//! [`Generator`] streams the rows of the greedy matrix for a given order,
//! [`detect_period`] finds its preperiod and period, [`fold`] turns one
//! period into a finite incidence matrix and [`verify`] decides what that
//! matrix is. [`persistence`] makes long runs resumable.

pub mod fold;
pub mod galf;
pub mod generator;
pub mod matrix;
pub mod period;
pub mod persistence;
pub mod row;
pub mod verify;

pub use fold::{compact_plane, fold, fold_rows, wrap, FoldError, FoldParams, MAX_FOLD_SIZE};
pub use galf::compute_galfs;
pub use generator::{generate_naive, generate_prefix, sigma, Generator, ParamError, Params};
pub use matrix::{BinaryMatrix, IncidenceMatrix, MatrixError};
pub use period::{
    defining_matrix, detect_period, detect_period_with, minimal_fold_multiplier, resume_detect,
    DefiningMatrix, DetectorConfig, PeriodError, PeriodResult, Progress,
};
pub use persistence::{load_checkpoint, save_checkpoint, Checkpoint, PersistError, RowLogWriter};
pub use row::SparseRow;
pub use verify::{
    automorphism_count, is_projective_plane, isomorphic, levi_dot, reference_plane,
    verify_configuration, Configuration, Violation, VerifyError,
};
