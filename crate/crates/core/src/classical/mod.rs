//! Reference solvers: analog Monte Carlo and the deterministic lattice
//! fixed point.

mod fd;
mod mc;
mod sampling;

pub use fd::{fixed_point_residual, run_fd, run_fd_truncated, FdOptions};
pub use mc::{run_mc, trace_particle, McMode, McOptions, McResult, Termination, Trajectory};
pub use sampling::{
    flight_from_uniform, sample_collision, sample_flight, sample_source, sample_source_cell, Collision,
};
