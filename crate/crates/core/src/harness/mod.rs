//! Experiment orchestration: config files and presets, parallel sweeps over
//! `(loss, gain, d/w0, seed)` cells, CSV/PGM persistence and run manifests.

mod config;
mod manifest;
mod sweep;

pub use config::{ExperimentConfig, ObjectSource, SignalLevel, PRESET_NAMES};
pub use manifest::Manifest;
pub use sweep::{
    cell_params, cells, evaluate_cell, evaluate_records, grid_for_loss, resolution_table, run_resolution_curve,
    run_sweep, CellSpec, ResolutionRow, RunSummary, RESOLUTION_CSV_HEADER,
};
