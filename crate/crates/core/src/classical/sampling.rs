//! Source, flight and collision sampling for analog transport.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::geometry::{GridGeometry, Material, SourceSpec};

/// Samples a birth point in cm. A point source is born at its cell centre;
/// a weighted source picks a cell by weight and a uniform point inside it.
pub fn sample_source<R: Rng + ?Sized>(geometry: &GridGeometry, source: &SourceSpec, rng: &mut R) -> Result<(f64, f64)> {
    let h = geometry.cell_size();
    match source {
        SourceSpec::Point { x, y } => {
            geometry.check_cell(*x, *y)?;
            Ok(((*x as f64 + 0.5) * h, (*y as f64 + 0.5) * h))
        }
        SourceSpec::Weighted(_) => {
            let cell = sample_source_cell(geometry, source, rng)?;
            let (x, y) = geometry.cell_coords(cell);
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            Ok(((x as f64 + u) * h, (y as f64 + v) * h))
        }
    }
}

/// Flat index of a source cell drawn by weight.
pub fn sample_source_cell<R: Rng + ?Sized>(geometry: &GridGeometry, source: &SourceSpec, rng: &mut R) -> Result<usize> {
    match source {
        SourceSpec::Point { x, y } => {
            geometry.check_cell(*x, *y)?;
            Ok(geometry.cell_index(*x, *y))
        }
        SourceSpec::Weighted(_) => {
            let dist = source.distribution(geometry)?;
            let w = WeightedIndex::new(&dist).map_err(|e| Error::Source(e.to_string()))?;
            Ok(w.sample(rng))
        }
    }
}

/// Inverse-CDF flight length `-ln(u) / sigma_t` for `u` in (0, 1].
pub fn flight_from_uniform(sigma_t: f64, u: f64) -> f64 {
    -u.ln() / sigma_t
}

/// Exponential flight length with rate `sigma_t`.
pub fn sample_flight<R: Rng + ?Sized>(sigma_t: f64, rng: &mut R) -> f64 {
    // random() is in [0, 1); flip it to (0, 1] so the log stays finite
    let u = 1.0 - rng.random::<f64>();
    flight_from_uniform(sigma_t, u)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Collision {
    /// Isotropic scatter with the new flight angle in [0, 2 pi).
    Scatter { angle: f64 },
    Absorb,
}

pub fn sample_collision<R: Rng + ?Sized>(material: &Material, rng: &mut R) -> Collision {
    let p_scatter = material.sigma_s / material.sigma_t;
    if rng.random::<f64>() < p_scatter {
        Collision::Scatter {
            angle: 2.0 * PI * rng.random::<f64>(),
        }
    } else {
        Collision::Absorb
    }
}
