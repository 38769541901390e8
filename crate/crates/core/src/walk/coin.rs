//! Position-dependent coin.
//!
//! The coin register is first put in uniform superposition, then each basis
//! state `|k>` of the coin is damped by a factor `f_k` through a rotation of
//! the coin ancilla: `|k>|0> -> f_k |k>|0> + sqrt(1 - f_k^2) |k>|1>`.
//! Conditioned on the ancilla reading zero, coin state `k` then has
//! probability `p_k` of the cell. The factors share one global scale over all
//! cells so that post-selection does not reweight positions.

use num_complex::Complex64;

use crate::circuit::{Circuit, Control, GateOp};
use crate::error::{Error, Result};
use crate::geometry::{Direction, GridGeometry};
use crate::statevector::{BasisMask, StateVector};

use super::WalkRegisters;

/// Coin values `c2 c1 c0` of the stay outcome.
pub const STAY_STATES: [usize; 4] = [0b000, 0b001, 0b010, 0b011];

/// Coin basis value encoding a move in `dir`.
pub fn coin_state(dir: Direction) -> usize {
    match dir {
        Direction::Right => 0b100,
        Direction::Up => 0b110,
        Direction::Left => 0b101,
        Direction::Down => 0b111,
    }
}

/// Per-cell diagonal amplitudes `d_k = sqrt(p_k)` over the eight coin states.
#[derive(Clone, Debug, PartialEq)]
pub struct CoinSpec {
    amplitudes: Vec<[f64; 8]>,
}

impl CoinSpec {
    pub fn from_geometry(geometry: &GridGeometry) -> Self {
        let amplitudes = (0..geometry.n_cells())
            .map(|i| {
                let p = geometry.cell_probabilities_at_index(i);
                let mut d = [0.0; 8];
                for k in STAY_STATES {
                    d[k] = (p.p_a / 4.0).sqrt();
                }
                for dir in Direction::ALL {
                    d[coin_state(dir)] = p.p_s_dir[dir.index()].sqrt();
                }
                d
            })
            .collect();
        Self { amplitudes }
    }

    pub fn cell(&self, index: usize) -> &[f64; 8] {
        &self.amplitudes[index]
    }

    pub fn n_cells(&self) -> usize {
        self.amplitudes.len()
    }

    /// Conditional coin distribution of a cell, `d_k^2`.
    pub fn distribution(&self, index: usize) -> [f64; 8] {
        self.amplitudes[index].map(|d| d * d)
    }

    /// `1 / max_{cell,k} 8 d_k^2`; also the post-selection success
    /// probability of every cell.
    pub fn scale(&self) -> f64 {
        let max = self
            .amplitudes
            .iter()
            .flat_map(|d| d.iter())
            .fold(0.0f64, |m, d| m.max(8.0 * d * d));
        1.0 / max
    }

    /// Ancilla-zero amplitude factors `f_k = sqrt(8 scale) d_k`.
    pub fn factors(&self) -> Vec<[f64; 8]> {
        let s = (8.0 * self.scale()).sqrt();
        self.amplitudes.iter().map(|d| d.map(|v| s * v)).collect()
    }

    fn checked_factors(&self, geometry: &GridGeometry) -> Result<Vec<[f64; 8]>> {
        let factors = self.factors();
        for (i, f) in factors.iter().enumerate() {
            for &v in f {
                if !(0.0..=1.0 + 1e-12).contains(&v) {
                    let (x, y) = geometry.cell_coords(i);
                    return Err(Error::CoinAmplitude { x, y, value: v });
                }
            }
        }
        Ok(factors)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoinMode {
    /// One multi-controlled rotation block per cell.
    GateLevel,
    /// The same linear map applied directly to the amplitude array, with the
    /// ancilla post-selected in place.
    FastPath,
}

#[derive(Clone, Debug)]
pub enum CoinOperator {
    Gates(Circuit),
    Fast(FastCoin),
}

impl CoinOperator {
    /// Applies the coin and post-selects the coin ancilla on zero. Returns
    /// the success probability.
    pub fn apply(&self, state: &mut StateVector, registers: &WalkRegisters) -> Result<f64> {
        match self {
            CoinOperator::Gates(c) => {
                state.apply_circuit(c)?;
                state.postselect(registers.coin_ancilla, false)
            }
            CoinOperator::Fast(f) => f.apply(state),
        }
    }

    pub fn gates(&self) -> Option<&Circuit> {
        match self {
            CoinOperator::Gates(c) => Some(c),
            CoinOperator::Fast(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FastCoin {
    registers: WalkRegisters,
    n_qubits: usize,
    factors: Vec<[f64; 8]>,
}

impl FastCoin {
    pub fn apply(&self, state: &mut StateVector) -> Result<f64> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::QubitCountMismatch {
                circuit: self.n_qubits,
                state: state.n_qubits(),
            });
        }
        let regs = &self.registers;
        for &c in &regs.coin {
            state.apply_op(&GateOp::h(c))?;
        }
        let before = state.norm2();
        let anc = BasisMask::default().with(regs.coin_ancilla, true);
        for (i, a) in state.amplitudes_mut().iter_mut().enumerate() {
            if anc.matches(i) {
                *a = Complex64::new(0.0, 0.0);
            } else {
                *a *= self.factors[regs.cell_of(i)][regs.coin_of(i)];
            }
        }
        let after = state.recompute_norm2();
        if after <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(after / before)
    }
}

/// Position-dependent coin for `geometry` on `registers`. The coin register
/// must be cleared on entry.
pub fn build_position_coin(
    geometry: &GridGeometry,
    registers: &WalkRegisters,
    n_qubits: usize,
    mode: CoinMode,
) -> Result<CoinOperator> {
    registers.validate(n_qubits, &[])?;
    if registers.n_position() != geometry.n_x() + geometry.n_y()
        || registers.x.len() != geometry.n_x()
    {
        return Err(Error::Registers(format!(
            "position register of {}+{} qubits does not match a {}x{} grid",
            registers.x.len(),
            registers.y.len(),
            geometry.width(),
            geometry.height()
        )));
    }
    let spec = CoinSpec::from_geometry(geometry);
    let factors = spec.checked_factors(geometry)?;
    match mode {
        CoinMode::FastPath => Ok(CoinOperator::Fast(FastCoin {
            registers: registers.clone(),
            n_qubits,
            factors,
        })),
        CoinMode::GateLevel => {
            let mut c = Circuit::new(n_qubits);
            for &q in &registers.coin {
                c.push(GateOp::h(q))?;
            }
            let pos = registers.position();
            let [c0, c1, c2] = registers.coin;
            for (cell, f) in factors.iter().enumerate() {
                let cell_controls: Vec<Control> = pos
                    .iter()
                    .enumerate()
                    .map(|(b, &q)| Control::new(q, (cell >> b) & 1 == 1))
                    .collect();
                // the four stay states share one factor, selected by c2 = 0
                let mut blocks = vec![(vec![Control::zero(c2)], f[STAY_STATES[0]])];
                for dir in Direction::ALL {
                    let k = coin_state(dir);
                    let coin_controls = vec![
                        Control::new(c0, k & 1 == 1),
                        Control::new(c1, k & 2 == 2),
                        Control::one(c2),
                    ];
                    blocks.push((coin_controls, f[k]));
                }
                for (coin_controls, factor) in blocks {
                    let theta = 2.0 * factor.min(1.0).acos();
                    if theta.abs() < 1e-15 {
                        continue;
                    }
                    let mut controls = cell_controls.clone();
                    controls.extend(coin_controls);
                    c.push(GateOp::mc_ry(controls, registers.coin_ancilla, theta))?;
                }
            }
            Ok(CoinOperator::Gates(c))
        }
    }
}
