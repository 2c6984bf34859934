//! Run configuration, frequency sweeps, and result files.

pub mod config;
pub mod export;
pub mod sweep;

pub use config::{load_config, parse_config, OutputPaths, RunConfig, CONFIG_DIR_ENV};
pub use export::{read_csv, write_aperture_csv, write_csv, write_history, write_touchstone};
pub use sweep::{frequency_grid, sweep, sweep_model, SweepResult, SweepRow, DB_FLOOR};
