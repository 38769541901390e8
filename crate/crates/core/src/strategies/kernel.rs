//! Classical Markov kernel of the lattice walk. Mass in a cell stays with
//! probability `p_a` and moves to each reflected neighbour with `p_s / 4`.

use crate::error::{Error, Result};
use crate::geometry::{Direction, GridGeometry};

/// Per-cell transition table with precomputed reflected neighbours.
#[derive(Clone, Debug)]
pub struct StepKernel {
    stay: Vec<f64>,
    moves: Vec<[(usize, f64); 4]>,
}

impl StepKernel {
    pub fn new(geometry: &GridGeometry) -> Self {
        let n = geometry.n_cells();
        let mut stay = Vec::with_capacity(n);
        let mut moves = Vec::with_capacity(n);
        for i in 0..n {
            let (x, y) = geometry.cell_coords(i);
            let p = geometry.cell_probabilities_at_index(i);
            stay.push(p.p_a);
            moves.push(Direction::ALL.map(|d| {
                let (nx, ny) = geometry.reflected_neighbor(x, y, d);
                (geometry.cell_index(nx, ny), p.p_s_dir[d.index()])
            }));
        }
        Self { stay, moves }
    }

    pub fn n_cells(&self) -> usize {
        self.stay.len()
    }

    fn check(&self, dist: &[f64]) -> Result<()> {
        if dist.len() != self.n_cells() {
            return Err(Error::ShapeMismatch(format!(
                "distribution over {} cells for a {}-cell grid",
                dist.len(),
                self.n_cells()
            )));
        }
        Ok(())
    }

    /// Full step including the stay mass; preserves total mass.
    pub fn step(&self, dist: &[f64]) -> Result<Vec<f64>> {
        self.check(dist)?;
        let mut out = self.scatter(dist)?;
        for ((o, m), s) in out.iter_mut().zip(dist).zip(&self.stay) {
            *o += m * s;
        }
        Ok(out)
    }

    /// Scatter-only step: the stay mass is removed, so each cell keeps a
    /// fraction `1 - p_a` of its mass.
    pub fn scatter(&self, dist: &[f64]) -> Result<Vec<f64>> {
        self.check(dist)?;
        let mut out = vec![0.0; dist.len()];
        for (m, row) in dist.iter().zip(&self.moves) {
            if *m == 0.0 {
                continue;
            }
            for &(j, p) in row {
                out[j] += m * p;
            }
        }
        Ok(out)
    }
}

/// One application of the lattice walk kernel to a position distribution.
pub fn exact_step_distribution(geometry: &GridGeometry, dist: &[f64]) -> Result<Vec<f64>> {
    StepKernel::new(geometry).step(dist)
}

/// Distributions after `1..=n_steps` kernel applications.
pub fn iterate_step_distribution(
    geometry: &GridGeometry,
    dist: &[f64],
    n_steps: usize,
) -> Result<Vec<Vec<f64>>> {
    let kernel = StepKernel::new(geometry);
    let mut cur = dist.to_vec();
    let mut out = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        cur = kernel.step(&cur)?;
        out.push(cur.clone());
    }
    Ok(out)
}
