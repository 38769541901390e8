//! Propagation and scoring strategies built on the walk circuits, and the
//! flux map type every solver produces.

mod amplified;
mod flux;
mod kernel;
mod measured;
mod swap_test;

pub use amplified::{
    amplified_probability, build_unrolled_walk, coherent_walk_state, optimal_iterations, run_amplified_walk, AmplifiedResult, AmplifiedWalk, GroverK,
    AMPLIFIED_MAX_QUBITS,
};
pub use flux::{FluxMap, Normalization};
pub use kernel::{exact_step_distribution, iterate_step_distribution, StepKernel};
pub use measured::{
    multinomial, run_measured_walk, AbsorbMode, MeasuredWalkOptions, StepRecord, WalkRunReport,
};
pub use swap_test::{build_swap_test, swap_test_pair, swap_test_score, SwapTestResult};
