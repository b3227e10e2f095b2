//! Command-line frontend for `wml-core`: run catalog experiments, evaluate
//! diagnostics at a point and sweep kernel parameters, emitting JSON or CSV.

mod app;
pub mod config;
pub mod output;

pub use app::run_cli;
