//! Measured walk: one coherent step per distinct position, position readout,
//! and re-injection of the shots as the next source.

use std::fmt;
use std::str::FromStr;

use log::debug;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GridGeometry, SourceSpec};
use crate::rng::RngStream;
use crate::statevector::StateVector;
use crate::walk::{build_walk_step, CoinMode, WalkRegisters, WalkStep};

use super::flux::{FluxMap, Normalization};

/// Treatment of shots whose step resolved to the stay outcome.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbsorbMode {
    /// The shot stays in place and keeps walking.
    #[default]
    SelfLoop,
    /// The shot is absorbed: removed and not tallied.
    Kill,
}

impl fmt::Display for AbsorbMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AbsorbMode::SelfLoop => "self-loop",
            AbsorbMode::Kill => "kill",
        })
    }
}

impl FromStr for AbsorbMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "self-loop" => Ok(AbsorbMode::SelfLoop),
            "kill" => Ok(AbsorbMode::Kill),
            other => Err(Error::InvalidParameter(format!(
                "absorb mode `{other}` (expected self-loop or kill)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredWalkOptions {
    pub n_steps: usize,
    pub n_shots: u64,
    pub absorb_mode: AbsorbMode,
    /// Coin backend used to build the single-step circuit.
    pub gate_level_coin: bool,
}

impl Default for MeasuredWalkOptions {
    fn default() -> Self {
        Self {
            n_steps: 10,
            n_shots: 1000,
            absorb_mode: AbsorbMode::SelfLoop,
            gate_level_coin: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub shots_in: u64,
    /// Surviving shots per cell after the step, row-major.
    pub histogram: Vec<u64>,
    /// Shots removed in kill mode.
    pub killed: u64,
    /// Shot-weighted exact probability that the coin ancilla reads zero.
    pub postselection_success: f64,
    /// Failed post-selection attempts drawn before each shot succeeded.
    pub postselection_failures: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkRunReport {
    pub flux: FluxMap,
    pub steps: Vec<StepRecord>,
    pub seed: u64,
    pub stream: u64,
    pub options: MeasuredWalkOptions,
    pub source: SourceSpec,
    pub n_x: usize,
    pub n_y: usize,
    /// Set when every shot was absorbed before the last step.
    pub truncated: bool,
    pub steps_completed: usize,
}

impl WalkRunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Multinomial draw of `n` over `probs` by sequential conditional binomials.
pub fn multinomial<R: Rng + ?Sized>(n: u64, probs: &[f64], rng: &mut R) -> Result<Vec<u64>> {
    let mut remaining_mass: f64 = probs.iter().sum();
    if !(remaining_mass > 0.0) || probs.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::InvalidParameter("cannot sample an empty distribution".into()));
    }
    let mut left = n;
    let mut out = vec![0; probs.len()];
    for (o, &p) in out.iter_mut().zip(probs) {
        if left == 0 {
            break;
        }
        if p == 0.0 {
            continue;
        }
        let q = (p / remaining_mass).clamp(0.0, 1.0);
        let k = if q >= 1.0 {
            left
        } else {
            Binomial::new(left, q)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?
                .sample(rng)
        };
        *o = k;
        left -= k;
        remaining_mass -= p;
    }
    // rounding can leave shots when the tail mass underflows
    if left > 0 {
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        out[last] += left;
    }
    Ok(out)
}

/// Joint one-step distribution over `(cell, moved)` for every cell that
/// holds shots, computed on fresh basis states.
struct StepCache {
    step: WalkStep,
    entries: Vec<Option<(Vec<f64>, f64)>>,
}

impl StepCache {
    fn fill(&mut self, cells: &[usize]) -> Result<()> {
        let missing: Vec<usize> = cells
            .iter()
            .copied()
            .filter(|&c| self.entries[c].is_none())
            .collect();
        let step = &self.step;
        let computed: Vec<Result<(usize, (Vec<f64>, f64))>> = missing
            .par_iter()
            .map(|&cell| {
                let state = StateVector::basis(step.n_qubits, position_index(&step.registers, cell))?;
                Ok((cell, step.cell_move_distribution(&state)?))
            })
            .collect();
        for r in computed {
            let (cell, entry) = r?;
            self.entries[cell] = Some(entry);
        }
        Ok(())
    }
}

/// Basis index with the position register holding `cell` and all else zero.
fn position_index(regs: &WalkRegisters, cell: usize) -> usize {
    regs.position()
        .iter()
        .enumerate()
        .filter(|(b, _)| (cell >> b) & 1 == 1)
        .fold(0, |acc, (_, &q)| acc | (1 << q))
}

pub fn run_measured_walk(
    geometry: &GridGeometry,
    source: &SourceSpec,
    options: &MeasuredWalkOptions,
    rng: &mut RngStream,
) -> Result<WalkRunReport> {
    if options.n_shots == 0 {
        return Err(Error::InvalidParameter("n_shots must be at least 1".into()));
    }
    if options.n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
    }
    let initial = source.distribution(geometry)?;
    let (regs, n_qubits) = WalkRegisters::contiguous(geometry.n_x(), geometry.n_y());
    let mode = if options.gate_level_coin {
        CoinMode::GateLevel
    } else {
        CoinMode::FastPath
    };
    let n_cells = geometry.n_cells();
    let mut cache = StepCache {
        step: build_walk_step(geometry, &regs, n_qubits, mode)?,
        entries: vec![None; n_cells],
    };

    let mut shots = multinomial(options.n_shots, &initial, rng)?;
    let mut tallies = vec![0u64; n_cells];
    let mut steps = Vec::with_capacity(options.n_steps);
    let mut truncated = false;

    for step in 1..=options.n_steps {
        let shots_in: u64 = shots.iter().sum();
        if shots_in == 0 {
            truncated = true;
            break;
        }
        let occupied: Vec<usize> = (0..n_cells).filter(|&c| shots[c] > 0).collect();
        cache.fill(&occupied)?;

        let mut next = vec![0u64; n_cells];
        let mut killed = 0;
        let mut failures = 0;
        let mut success_weight = 0.0;
        for &cell in &occupied {
            let count = shots[cell];
            let (joint, success) = cache.entries[cell].as_ref().expect("cache filled");
            success_weight += success * count as f64;
            if *success < 1.0 {
                let geo = Geometric::new(*success).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                for _ in 0..count {
                    failures += geo.sample(rng);
                }
            }
            let draws = multinomial(count, joint, rng)?;
            for (k, &d) in draws.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                let (target, moved) = (k / 2, k % 2 == 1);
                if !moved && options.absorb_mode == AbsorbMode::Kill {
                    killed += d;
                } else {
                    next[target] += d;
                }
            }
        }
        for (t, n) in tallies.iter_mut().zip(&next) {
            *t += n;
        }
        debug!("measured walk step {step}: {shots_in} shots in, {killed} killed");
        steps.push(StepRecord {
            step,
            shots_in,
            histogram: next.clone(),
            killed,
            postselection_success: success_weight / shots_in as f64,
            postselection_failures: failures,
        });
        shots = next;
    }
    if shots.iter().sum::<u64>() == 0 && steps.len() < options.n_steps {
        truncated = true;
    }

    let flux = FluxMap::new(
        geometry.n_x(),
        geometry.n_y(),
        tallies.iter().map(|&t| t as f64).collect(),
        options.n_shots,
        Normalization::PerStepSum,
    )?;
    Ok(WalkRunReport {
        flux,
        steps_completed: steps.len(),
        steps,
        seed: rng.seed(),
        stream: rng.stream(),
        options: options.clone(),
        source: source.clone(),
        n_x: geometry.n_x(),
        n_y: geometry.n_y(),
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_bypass_geometry, Material};

    #[test]
    fn multinomial_conserves_count() {
        let mut rng = RngStream::new(1);
        let out = multinomial(1000, &[0.2, 0.0, 0.5, 0.3], &mut rng).unwrap();
        assert_eq!(out.iter().sum::<u64>(), 1000);
        assert_eq!(out[1], 0);
        assert!(multinomial(5, &[0.0, 0.0], &mut rng).is_err());
    }

    #[test]
    fn self_loop_conserves_shots() {
        let g = build_bypass_geometry(3, 3).unwrap();
        let opts = MeasuredWalkOptions {
            n_steps: 10,
            n_shots: 1000,
            ..Default::default()
        };
        let r = run_measured_walk(&g, &SourceSpec::point(0, 0), &opts, &mut RngStream::new(5)).unwrap();
        assert_eq!(r.flux.total(), 10_000.0);
        assert!(r.steps.iter().all(|s| s.histogram.iter().sum::<u64>() == 1000));
        assert!(r.steps.iter().all(|s| (s.postselection_success - 1.0 / 1.8).abs() < 1e-12));
        assert!(!r.truncated);
    }

    #[test]
    fn kill_mode_truncates_when_everything_absorbs() {
        let g = GridGeometry::homogeneous(1, 1, 1.0, Material::new(1.0, 0.0, 1.0)).unwrap();
        let opts = MeasuredWalkOptions {
            n_steps: 3,
            n_shots: 50,
            absorb_mode: AbsorbMode::Kill,
            ..Default::default()
        };
        let r = run_measured_walk(&g, &SourceSpec::point(0, 0), &opts, &mut RngStream::new(5)).unwrap();
        assert!(r.truncated);
        assert_eq!(r.steps_completed, 1);
        assert_eq!(r.steps[0].killed, 50);
        assert_eq!(r.flux.total(), 0.0);
    }

    #[test]
    fn position_index_places_cell_bits() {
        let (regs, _) = WalkRegisters::contiguous(2, 2);
        assert_eq!(position_index(&regs, 0b1001), 0b1001);
    }
}
