//! Experiment harness: configuration, deterministic sweeps over
//! `(N, d, gamma, delta/M, |S|)`, and CSV/plot-data/SVG emission.
//!
//! A sweep is reproducible from `(config, seed)` alone: trials derive
//! per-index seeds and run independently, output order is by trial index,
//! and re-runs produce byte-identical CSV regardless of thread count.
//! Per-trial timings are recorded only when `record_timings` is set, since
//! wall-clock values would break that guarantee.

mod config;
mod emit;
mod sweep;

pub use config::{Algorithm, Caps, ErasureModel, ExperimentConfig, FamilySpec, GridSpec};
pub use emit::{emit_plot_data, parse_csv, write_csv, PlotData, CSV_HEADER, PLOT_HEADER};
pub use sweep::{run_sweep, summarize, SweepOutput, SweepSummary, TrialRecord};
