//! Amplitude-amplified walk. The walk is unrolled with fresh coin and
//! ancilla qubits per step, so the preparation `A` is unitary and the coin
//! post-selection becomes part of the good-state predicate.

use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::geometry::{DetectorRegion, GridGeometry, SourceSpec};
use crate::statevector::StateVector;
use crate::walk::{
    build_boundary_conditions, build_position_coin, build_shift, build_source_prep, unrolled_layout,
    CoinMode, WalkRegisters,
};

/// Largest unrolled register the amplified walk will simulate.
pub const AMPLIFIED_MAX_QUBITS: usize = 24;

/// Below this the detector is treated as unreachable.
const MIN_GOOD_PROBABILITY: f64 = 1e-15;

/// Number of Grover iterates, written as a count or `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "KRepr", try_from = "KRepr")]
pub enum GroverK {
    Fixed(usize),
    Auto,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum KRepr {
    Count(usize),
    Text(String),
}

impl From<GroverK> for KRepr {
    fn from(k: GroverK) -> Self {
        match k {
            GroverK::Fixed(n) => KRepr::Count(n),
            GroverK::Auto => KRepr::Text("auto".into()),
        }
    }
}

impl TryFrom<KRepr> for GroverK {
    type Error = Error;

    fn try_from(r: KRepr) -> Result<Self> {
        match r {
            KRepr::Count(n) => Ok(GroverK::Fixed(n)),
            KRepr::Text(s) => s.parse(),
        }
    }
}

impl fmt::Display for GroverK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroverK::Fixed(k) => write!(f, "{k}"),
            GroverK::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for GroverK {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(GroverK::Auto);
        }
        s.parse()
            .map(GroverK::Fixed)
            .map_err(|_| Error::InvalidParameter(format!("grover k `{s}` (expected a count or auto)")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifiedResult {
    /// Good-state probability after `k` iterations.
    pub amplified: f64,
    /// Good-state probability of the unamplified state, `sin^2(theta)`.
    pub baseline: f64,
    pub k: usize,
    pub theta: f64,
    /// `sin^2((2k + 1) theta)`.
    pub predicted: f64,
    pub n_qubits: usize,
}

/// Analytic amplified probability `sin^2((2k + 1) arcsin(sqrt(a)))`.
pub fn amplified_probability(a: f64, k: usize) -> f64 {
    if k == 0 {
        return a;
    }
    let theta = a.sqrt().asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

/// Iteration count `floor(pi / (4 theta))` maximising the good probability.
pub fn optimal_iterations(a: f64) -> usize {
    let theta = a.sqrt().asin();
    (std::f64::consts::PI / (4.0 * theta)).floor() as usize
}

/// Source preparation followed by `n_steps` gate-level walk steps, each on
/// its own coin and ancilla qubits, with no resets.
pub fn build_unrolled_walk(
    geometry: &GridGeometry,
    source: &SourceSpec,
    n_steps: usize,
) -> Result<(Circuit, Vec<WalkRegisters>)> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
    }
    source.validate(geometry)?;
    let (registers, n_qubits) = unrolled_layout(geometry.n_x(), geometry.n_y(), n_steps);
    if n_qubits > AMPLIFIED_MAX_QUBITS {
        return Err(Error::QubitBudget {
            what: "unrolled walk",
            needed: n_qubits,
            max: AMPLIFIED_MAX_QUBITS,
        });
    }
    let mut prep = Circuit::with_registers(n_qubits, unrolled_register_names(&registers))?;
    prep.append(&build_source_prep(geometry, source, &registers[0], n_qubits)?)?;
    for regs in &registers {
        let coin = build_position_coin(geometry, regs, n_qubits, CoinMode::GateLevel)?;
        prep.append(coin.gates().expect("gate-level coin"))?;
        prep.append(&build_boundary_conditions(regs, n_qubits)?)?;
        prep.append(&build_shift(regs, n_qubits)?)?;
    }
    Ok((prep, registers))
}

fn unrolled_register_names(registers: &[WalkRegisters]) -> Vec<crate::circuit::Register> {
    let mut out = registers[0].named_registers("");
    out.retain(|r| r.name.starts_with("position"));
    for (s, regs) in registers.iter().enumerate() {
        let mut step = regs.named_registers(&format!("-{s}"));
        step.retain(|r| !r.name.starts_with("position"));
        out.extend(step);
    }
    out
}

/// Walk state after `n_steps` coherent steps with every coin ancilla
/// post-selected on zero. The position marginal is the lattice kernel
/// distribution after `n_steps`.
pub fn coherent_walk_state(
    geometry: &GridGeometry,
    source: &SourceSpec,
    n_steps: usize,
) -> Result<(StateVector, WalkRegisters)> {
    let (prep, registers) = build_unrolled_walk(geometry, source, n_steps)?;
    let mut state = StateVector::zero(prep.n_qubits)?;
    state.apply_circuit(&prep)?;
    for r in &registers {
        state.postselect(r.coin_ancilla, false)?;
    }
    Ok((state, registers[0].clone()))
}

/// Unrolled preparation circuit together with its good-state predicate.
#[derive(Clone, Debug)]
pub struct AmplifiedWalk {
    prep: Circuit,
    inverse: Circuit,
    registers: Vec<WalkRegisters>,
    detector_cells: Vec<bool>,
    ancilla_mask: usize,
}

impl AmplifiedWalk {
    pub fn build(
        geometry: &GridGeometry,
        source: &SourceSpec,
        n_steps: usize,
        detector: &DetectorRegion,
    ) -> Result<Self> {
        detector.validate(geometry)?;
        let (prep, registers) = build_unrolled_walk(geometry, source, n_steps)?;
        let inverse = prep.inverse()?;
        let mut detector_cells = vec![false; geometry.n_cells()];
        for (x, y) in detector.cells() {
            detector_cells[geometry.cell_index(x, y)] = true;
        }
        let ancilla_mask = registers.iter().fold(0, |m, r| m | (1 << r.coin_ancilla));
        Ok(Self {
            prep,
            inverse,
            registers,
            detector_cells,
            ancilla_mask,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.prep.n_qubits
    }

    /// The preparation circuit `A`.
    pub fn circuit(&self) -> &Circuit {
        &self.prep
    }

    pub fn registers(&self) -> &[WalkRegisters] {
        &self.registers
    }

    /// Detector cell reached and every coin ancilla at zero.
    pub fn is_good(&self, index: usize) -> bool {
        index & self.ancilla_mask == 0 && self.detector_cells[self.registers[0].cell_of(index)]
    }

    /// `A |0>`.
    pub fn prepare(&self) -> Result<StateVector> {
        let mut s = StateVector::zero(self.n_qubits())?;
        s.apply_circuit(&self.prep)?;
        Ok(s)
    }

    pub fn good_probability(&self, state: &StateVector) -> f64 {
        let good: f64 = state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.is_good(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        good / state.norm2()
    }

    /// One Grover iterate `Q = -A S_0 A^dagger S_good`.
    pub fn iterate(&self, state: &mut StateVector) -> Result<()> {
        for (i, a) in state.amplitudes_mut().iter_mut().enumerate() {
            if self.is_good(i) {
                *a = -*a;
            }
        }
        state.apply_circuit(&self.inverse)?;
        let amps = state.amplitudes_mut();
        amps[0] = -amps[0];
        state.apply_circuit(&self.prep)?;
        for a in state.amplitudes_mut() {
            *a = -*a;
        }
        Ok(())
    }
}

pub fn run_amplified_walk(
    geometry: &GridGeometry,
    source: &SourceSpec,
    n_steps: usize,
    detector: &DetectorRegion,
    k: GroverK,
) -> Result<AmplifiedResult> {
    let walk = AmplifiedWalk::build(geometry, source, n_steps, detector)?;
    Ok(walk.amplify(k, n_steps)?.0)
}

impl AmplifiedWalk {
    /// Prepares `A |0>` and applies `k` iterates; also returns the final
    /// state. `n_steps` only labels the unreachable-detector error.
    pub fn amplify(&self, k: GroverK, n_steps: usize) -> Result<(AmplifiedResult, StateVector)> {
        let mut state = self.prepare()?;
        let baseline = self.good_probability(&state);
        if baseline < MIN_GOOD_PROBABILITY {
            return Err(Error::DetectorUnreachable { steps: n_steps });
        }
        let k = match k {
            GroverK::Fixed(k) => k,
            GroverK::Auto if baseline > 0.5 => {
                warn!("good-state probability {baseline} exceeds 1/2; amplification skipped");
                0
            }
            GroverK::Auto => optimal_iterations(baseline),
        };
        for _ in 0..k {
            self.iterate(&mut state)?;
        }
        let result = AmplifiedResult {
            amplified: self.good_probability(&state),
            baseline,
            k,
            theta: baseline.sqrt().asin(),
            predicted: amplified_probability(baseline, k),
            n_qubits: self.n_qubits(),
        };
        Ok((result, state))
    }
}
