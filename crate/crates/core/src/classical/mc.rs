//! Analog Monte Carlo with a collision estimator.
//!
//! `Continuous` tracks particles in the physical domain with delta tracking
//! against the largest total cross section and mirror walls. `Lattice`
//! quantises every flight to one cell step in the nearest axis direction,
//! which is the particle picture of the lattice walk kernel.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Direction, GridGeometry, SourceSpec};
use crate::rng::RngStream;
use crate::strategies::{FluxMap, Normalization};

use super::sampling::{sample_collision, sample_flight, sample_source, sample_source_cell, Collision};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McMode {
    #[default]
    Continuous,
    Lattice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub n_particles: u64,
    pub max_collisions: u32,
    pub mode: McMode,
    /// Particles per parallel batch; each batch draws from its own split
    /// stream, so results do not depend on the thread count.
    pub batch_size: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            n_particles: 500_000,
            max_collisions: 1000,
            mode: McMode::Continuous,
            batch_size: 10_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Absorbed,
    LeakedCapped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Collision points in cm.
    pub points: Vec<(f64, f64)>,
    pub termination: Termination,
}

impl Trajectory {
    /// One `x y` line per collision.
    pub fn to_text(&self) -> String {
        self.points.iter().map(|(x, y)| format!("{x} {y}\n")).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    /// Collision tallies per source particle.
    pub flux: FluxMap,
    /// Trajectories stopped at `max_collisions`.
    pub capped: u64,
    pub collisions: u64,
}

/// Mirror fold of `v` into [0, l]; the flag is set on an odd number of
/// reflections.
fn fold(v: f64, l: f64) -> (f64, bool) {
    let period = 2.0 * l;
    let m = v.rem_euclid(period);
    let flipped = (v / l).floor().rem_euclid(2.0) == 1.0;
    (if m > l { period - m } else { m }, flipped)
}

fn cell_of_point(geometry: &GridGeometry, x: f64, y: f64) -> usize {
    let h = geometry.cell_size();
    let cx = ((x / h) as usize).min(geometry.width() - 1);
    let cy = ((y / h) as usize).min(geometry.height() - 1);
    geometry.cell_index(cx, cy)
}

fn lattice_direction(angle: f64) -> Direction {
    let sector = ((angle + FRAC_PI_4) / FRAC_PI_2).floor() as usize % 4;
    Direction::ALL[sector]
}

/// Follows one particle, reporting each collision's cell and point.
fn transport<R: Rng + ?Sized, F: FnMut(usize, (f64, f64))>(
    geometry: &GridGeometry,
    source: &SourceSpec,
    mode: McMode,
    max_collisions: u32,
    rng: &mut R,
    mut on_collision: F,
) -> Result<Termination> {
    let mut collisions = 0;
    match mode {
        McMode::Continuous => {
            let sigma_maj = geometry.materials().map(|(_, m)| m.sigma_t).fold(0.0, f64::max);
            let (w, h) = geometry.extent();
            let (mut x, mut y) = sample_source(geometry, source, rng)?;
            let angle = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            let (mut ux, mut uy) = (angle.cos(), angle.sin());
            loop {
                let rho = sample_flight(sigma_maj, rng);
                let (nx, fx) = fold(x + rho * ux, w);
                let (ny, fy) = fold(y + rho * uy, h);
                (x, y) = (nx, ny);
                if fx {
                    ux = -ux;
                }
                if fy {
                    uy = -uy;
                }
                let cell = cell_of_point(geometry, x, y);
                let m = geometry.material_at_index(cell);
                if m.sigma_t < sigma_maj && rng.random::<f64>() * sigma_maj >= m.sigma_t {
                    continue;
                }
                on_collision(cell, (x, y));
                collisions += 1;
                if collisions >= max_collisions {
                    return Ok(Termination::LeakedCapped);
                }
                match sample_collision(m, rng) {
                    Collision::Absorb => return Ok(Termination::Absorbed),
                    Collision::Scatter { angle } => (ux, uy) = (angle.cos(), angle.sin()),
                }
            }
        }
        McMode::Lattice => {
            let hcell = geometry.cell_size();
            let mut cell = sample_source_cell(geometry, source, rng)?;
            loop {
                let (cx, cy) = geometry.cell_coords(cell);
                on_collision(cell, ((cx as f64 + 0.5) * hcell, (cy as f64 + 0.5) * hcell));
                collisions += 1;
                if collisions >= max_collisions {
                    return Ok(Termination::LeakedCapped);
                }
                match sample_collision(geometry.material_at_index(cell), rng) {
                    Collision::Absorb => return Ok(Termination::Absorbed),
                    Collision::Scatter { angle } => {
                        let (nx, ny) = geometry.reflected_neighbor(cx, cy, lattice_direction(angle));
                        cell = geometry.cell_index(nx, ny);
                    }
                }
            }
        }
    }
}

/// Full collision history of one particle, for debugging dumps.
pub fn trace_particle<R: Rng + ?Sized>(
    geometry: &GridGeometry,
    source: &SourceSpec,
    mode: McMode,
    max_collisions: u32,
    rng: &mut R,
) -> Result<Trajectory> {
    let mut points = Vec::new();
    let termination = transport(geometry, source, mode, max_collisions, rng, |_, p| points.push(p))?;
    Ok(Trajectory { points, termination })
}

pub fn run_mc(
    geometry: &GridGeometry,
    source: &SourceSpec,
    options: &McOptions,
    rng: &RngStream,
) -> Result<McResult> {
    if options.n_particles == 0 {
        return Err(Error::InvalidParameter("n_particles must be at least 1".into()));
    }
    if options.max_collisions == 0 || options.batch_size == 0 {
        return Err(Error::InvalidParameter(
            "max_collisions and batch_size must be at least 1".into(),
        ));
    }
    source.validate(geometry)?;
    let n_batches = options.n_particles.div_ceil(options.batch_size);
    let batches: Vec<Result<(Vec<u64>, u64, u64)>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut stream = rng.split(b);
            let start = b * options.batch_size;
            let n = options.batch_size.min(options.n_particles - start);
            let mut tallies = vec![0u64; geometry.n_cells()];
            let (mut capped, mut collisions) = (0, 0);
            for _ in 0..n {
                let t = transport(geometry, source, options.mode, options.max_collisions, &mut stream, |c, _| {
                    tallies[c] += 1;
                    collisions += 1;
                })?;
                if t == Termination::LeakedCapped {
                    capped += 1;
                }
            }
            Ok((tallies, capped, collisions))
        })
        .collect();
    let mut tallies = vec![0u64; geometry.n_cells()];
    let (mut capped, mut collisions) = (0, 0);
    for b in batches {
        let (t, c, n) = b?;
        tallies.iter_mut().zip(&t).for_each(|(a, b)| *a += b);
        capped += c;
        collisions += n;
    }
    if capped > 0 {
        log::warn!("{capped} trajectories reached the {}-collision cap", options.max_collisions);
    }
    let per = options.n_particles as f64;
    let flux = FluxMap::new(
        geometry.n_x(),
        geometry.n_y(),
        tallies.iter().map(|&t| t as f64 / per).collect(),
        options.n_particles,
        Normalization::PerShot,
    )?;
    Ok(McResult {
        flux,
        capped,
        collisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Material;

    #[test]
    fn fold_reflects() {
        assert_eq!(fold(3.0, 10.0), (3.0, false));
        assert_eq!(fold(12.0, 10.0), (8.0, true));
        assert_eq!(fold(-2.0, 10.0), (2.0, true));
        assert_eq!(fold(23.0, 10.0), (3.0, false));
    }

    #[test]
    fn lattice_sectors() {
        assert_eq!(lattice_direction(0.1), Direction::Right);
        assert_eq!(lattice_direction(FRAC_PI_2), Direction::Up);
        assert_eq!(lattice_direction(3.0), Direction::Left);
        assert_eq!(lattice_direction(4.7), Direction::Down);
        assert_eq!(lattice_direction(6.2), Direction::Right);
    }

    #[test]
    fn pure_absorber_one_collision_each() {
        let g = GridGeometry::homogeneous(2, 2, 1.0, Material::new(1.0, 0.0, 1.0)).unwrap();
        for mode in [McMode::Continuous, McMode::Lattice] {
            let opts = McOptions {
                n_particles: 500,
                mode,
                batch_size: 64,
                ..Default::default()
            };
            let r = run_mc(&g, &SourceSpec::point(1, 1), &opts, &RngStream::new(1)).unwrap();
            assert_eq!(r.collisions, 500);
            assert!((r.flux.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_scatterer_hits_cap() {
        let g = GridGeometry::homogeneous(2, 2, 1.0, Material::new(1.0, 1.0, 0.0)).unwrap();
        let opts = McOptions {
            n_particles: 20,
            max_collisions: 50,
            batch_size: 7,
            ..Default::default()
        };
        let r = run_mc(&g, &SourceSpec::point(0, 0), &opts, &RngStream::new(1)).unwrap();
        assert_eq!(r.capped, 20);
        assert_eq!(r.collisions, 1000);
    }

    #[test]
    fn trajectory_points_stay_in_domain() {
        let g = GridGeometry::homogeneous(2, 2, 1.0, Material::new(1.0, 0.95, 0.05)).unwrap();
        let mut rng = RngStream::new(9);
        for _ in 0..50 {
            let t = trace_particle(&g, &SourceSpec::point(0, 3), McMode::Continuous, 1000, &mut rng).unwrap();
            assert!(!t.points.is_empty());
            assert!(t.points.iter().all(|&(x, y)| (0.0..=4.0).contains(&x) && (0.0..=4.0).contains(&y)));
        }
    }
}
