//! Experiment harness, file formats and command-line tool for `stit-core`.
//!
//! Ridge-function targets and covariate laws, Monte-Carlo risk and bias
//! estimation, convergence-rate fits, lower-bound and geometry checks, the
//! route-equivalence experiment, versioned JSON and CSV formats, SVG plots,
//! and the `stit` binary.

pub mod bias;
pub mod cli;
pub mod config;
pub mod equivalence;
pub mod error;
pub mod geometry;
pub mod io;
pub mod rates;
pub mod risk;
pub mod subopt;
pub mod svg;
pub mod target;

pub use error::{LabError, LabResult};
