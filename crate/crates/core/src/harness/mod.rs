//! Experiment orchestration: configuration, solver runs, map comparison and
//! slice extraction.

mod config;
mod experiment;
mod metrics;

pub use config::{
    AmplifiedConfig, ExperimentConfig, FdConfig, McConfig, MeasuredConfig, SliceConfig, Solver, SwapConfig,
};
pub use experiment::{run_experiment, ComparisonReport, PairMetrics, SliceRecord, SolverRecord};
pub use metrics::{compare_maps, compare_vectors, extract_slice, Axis, MapMetrics, Slice};
