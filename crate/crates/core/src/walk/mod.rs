//! Circuit builders for one discrete-time walk iteration: source
//! preparation, position-dependent coin, reflective boundaries and the
//! QFT-adder shift.
//!
//! Position qubits hold the flat cell index `y * 2^n_x + x`: the `x`
//! register occupies the low position bits and `y` the high ones, each least
//! significant first.

mod boundary;
mod coin;
mod shift;
mod source;
mod step;

pub use boundary::{build_boundary_conditions, check_cleared};
pub use coin::{build_position_coin, coin_state, CoinMode, CoinOperator, CoinSpec, FastCoin, STAY_STATES};
pub use shift::build_shift;
pub use source::{build_source_prep, prepare_real_amplitudes};
pub use step::{build_walk_step, StepOutcome, WalkStep};

use crate::circuit::Register;
use crate::error::{Error, Result};
use crate::statevector::extract_bits;

/// Qubit assignment for one walk iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkRegisters {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    /// `[c0, c1, c2]`.
    pub coin: [usize; 3],
    pub coin_ancilla: usize,
    pub boundary_ancilla: usize,
}

impl WalkRegisters {
    /// Contiguous layout `x | y | coin | coin-ancilla | boundary-ancilla`.
    /// Returns the registers and the total qubit count.
    pub fn contiguous(n_x: usize, n_y: usize) -> (Self, usize) {
        let n_pos = n_x + n_y;
        let regs = Self {
            x: (0..n_x).collect(),
            y: (n_x..n_pos).collect(),
            coin: [n_pos, n_pos + 1, n_pos + 2],
            coin_ancilla: n_pos + 3,
            boundary_ancilla: n_pos + 4,
        };
        (regs, n_pos + 5)
    }

    /// Position qubits, least significant first (x then y).
    pub fn position(&self) -> Vec<usize> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    pub fn n_position(&self) -> usize {
        self.x.len() + self.y.len()
    }

    /// Flat cell index encoded in basis state `index`.
    #[inline]
    pub fn cell_of(&self, index: usize) -> usize {
        extract_bits(index, &self.x) | (extract_bits(index, &self.y) << self.x.len())
    }

    /// Coin value `c2 c1 c0` encoded in basis state `index`.
    #[inline]
    pub fn coin_of(&self, index: usize) -> usize {
        extract_bits(index, &self.coin)
    }

    fn all(&self) -> Vec<usize> {
        let mut v = self.position();
        v.extend(self.coin);
        v.push(self.coin_ancilla);
        v.push(self.boundary_ancilla);
        v
    }

    /// All qubits distinct, inside `n_qubits`, and none in `reserved`.
    pub fn validate(&self, n_qubits: usize, reserved: &[usize]) -> Result<()> {
        if self.x.is_empty() || self.y.is_empty() {
            return Err(Error::Registers("position registers must be non-empty".into()));
        }
        let all = self.all();
        for (i, &q) in all.iter().enumerate() {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
            if all[..i].contains(&q) {
                return Err(Error::Registers(format!("qubit {q} assigned twice")));
            }
            if reserved.contains(&q) {
                return Err(Error::Registers(format!(
                    "qubit {q} collides with a reserved register"
                )));
            }
        }
        Ok(())
    }

    /// Named ranges for the contiguous layout; `suffix` distinguishes the
    /// per-step registers of an unrolled walk.
    pub fn named_registers(&self, suffix: &str) -> Vec<Register> {
        let range = |qs: &[usize]| qs[0]..qs[qs.len() - 1] + 1;
        let mut regs = Vec::new();
        if suffix.is_empty() {
            regs.push(Register { name: "position-x".into(), qubits: range(&self.x) });
            regs.push(Register { name: "position-y".into(), qubits: range(&self.y) });
        }
        regs.push(Register { name: format!("coin{suffix}"), qubits: range(&self.coin) });
        regs.push(Register {
            name: format!("coin-ancilla{suffix}"),
            qubits: self.coin_ancilla..self.coin_ancilla + 1,
        });
        regs.push(Register {
            name: format!("boundary-ancilla{suffix}"),
            qubits: self.boundary_ancilla..self.boundary_ancilla + 1,
        });
        regs
    }
}

/// Layout for an unrolled walk with fresh coin and ancilla qubits per step:
/// `x | y | (coin, coin-ancilla, boundary-ancilla) * n_steps`.
pub fn unrolled_layout(n_x: usize, n_y: usize, n_steps: usize) -> (Vec<WalkRegisters>, usize) {
    let n_pos = n_x + n_y;
    let steps = (0..n_steps)
        .map(|s| {
            let base = n_pos + 5 * s;
            WalkRegisters {
                x: (0..n_x).collect(),
                y: (n_x..n_pos).collect(),
                coin: [base, base + 1, base + 2],
                coin_ancilla: base + 3,
                boundary_ancilla: base + 4,
            }
        })
        .collect();
    (steps, n_pos + 5 * n_steps)
}
