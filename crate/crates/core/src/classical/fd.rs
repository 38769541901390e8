//! Deterministic lattice solver: the fixed point `phi = K phi + s` of the
//! scatter-only walk kernel, i.e. the expected collision density of the
//! lattice particle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GridGeometry, SourceSpec};
use crate::strategies::{FluxMap, Normalization, StepKernel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdOptions {
    /// Stop when the sup-norm of the update falls below this.
    pub tol: f64,
    /// Entries below this are raised to it.
    pub floor: f64,
    pub max_iterations: usize,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            floor: 1e-10,
            max_iterations: 100_000,
        }
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn to_flux(geometry: &GridGeometry, phi: Vec<f64>) -> Result<FluxMap> {
    FluxMap::new(geometry.n_x(), geometry.n_y(), phi, 0, Normalization::PerShot)
}

/// Solves by fixed-point iteration from `phi = s`.
pub fn run_fd(geometry: &GridGeometry, source: &SourceSpec, options: &FdOptions) -> Result<FluxMap> {
    if !(options.tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let s = source.distribution(geometry)?;
    let kernel = StepKernel::new(geometry);
    let mut phi = s.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..options.max_iterations {
        let mut next = kernel.scatter(&phi)?;
        next.iter_mut().zip(&s).for_each(|(n, s)| *n += s);
        residual = sup_diff(&next, &phi);
        phi = next;
        if residual < options.tol {
            for v in &mut phi {
                if *v < options.floor {
                    *v = options.floor;
                }
            }
            return to_flux(geometry, phi);
        }
    }
    Err(Error::NoConvergence {
        iterations: options.max_iterations,
        residual,
    })
}

/// Partial Neumann sum `sum_{t=0}^{n} K^t s`.
pub fn run_fd_truncated(geometry: &GridGeometry, source: &SourceSpec, n_iterations: usize) -> Result<FluxMap> {
    let s = source.distribution(geometry)?;
    let kernel = StepKernel::new(geometry);
    let mut term = s.clone();
    let mut phi = s;
    for _ in 0..n_iterations {
        term = kernel.scatter(&term)?;
        phi.iter_mut().zip(&term).for_each(|(p, t)| *p += t);
    }
    to_flux(geometry, phi)
}

/// `||phi - K phi - s||_inf`.
pub fn fixed_point_residual(geometry: &GridGeometry, source: &SourceSpec, phi: &[f64]) -> Result<f64> {
    let s = source.distribution(geometry)?;
    let kphi = StepKernel::new(geometry).scatter(phi)?;
    Ok(phi
        .iter()
        .zip(&kphi)
        .zip(&s)
        .map(|((p, k), s)| (p - k - s).abs())
        .fold(0.0, f64::max))
}
