use rand::RngCore;

use crate::circuit::{Circuit, GateOp};
use crate::error::Result;
use crate::geometry::GridGeometry;
use crate::statevector::{extract_bits, StateVector};

use super::{
    build_boundary_conditions, build_position_coin, build_shift, check_cleared, CoinMode,
    CoinOperator, WalkRegisters,
};

/// One walk iteration: coin, boundaries, shift, then resets of the boundary
/// ancilla and the coin register.
#[derive(Clone, Debug)]
pub struct WalkStep {
    pub registers: WalkRegisters,
    pub n_qubits: usize,
    pub coin: CoinOperator,
    pub boundary: Circuit,
    pub shift: Circuit,
}

/// Outcome of a sampled iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    /// Conditional probability that the coin ancilla read zero.
    pub coin_success: f64,
    /// Whether the boundary ancilla reset found a reflection.
    pub reflected: bool,
    /// Coin value read out by the coin reset.
    pub coin: usize,
}

pub fn build_walk_step(
    geometry: &GridGeometry,
    registers: &WalkRegisters,
    n_qubits: usize,
    mode: CoinMode,
) -> Result<WalkStep> {
    Ok(WalkStep {
        registers: registers.clone(),
        n_qubits,
        coin: build_position_coin(geometry, registers, n_qubits, mode)?,
        boundary: build_boundary_conditions(registers, n_qubits)?,
        shift: build_shift(registers, n_qubits)?,
    })
}

impl WalkStep {
    /// Coin (post-selected), boundaries and shift, without the closing
    /// resets. Returns the coin success probability.
    pub fn apply_coherent(&self, state: &mut StateVector) -> Result<f64> {
        let regs = &self.registers;
        check_cleared(state, regs.boundary_ancilla)?;
        check_cleared(state, regs.coin_ancilla)?;
        let success = self.coin.apply(state, regs)?;
        state.apply_circuit(&self.boundary)?;
        state.apply_circuit(&self.shift)?;
        Ok(success)
    }

    /// Full iteration including the mid-circuit resets.
    pub fn apply<R: RngCore>(&self, state: &mut StateVector, rng: &mut R) -> Result<StepOutcome> {
        let regs = &self.registers;
        let coin_success = self.apply_coherent(state)?;
        let reflected = state.reset(regs.boundary_ancilla, rng)?;
        let mut coin = 0;
        for (b, &q) in regs.coin.iter().enumerate() {
            if state.reset(q, rng)? {
                coin |= 1 << b;
            }
        }
        Ok(StepOutcome {
            coin_success,
            reflected,
            coin,
        })
    }

    /// Gate-level iteration without resets; unitary on the enlarged space
    /// when the coin is gate-level. `None` for the fast-path coin.
    pub fn unitary_circuit(&self) -> Option<Result<Circuit>> {
        let coin = self.coin.gates()?;
        Some((|| {
            let mut c = Circuit::with_registers(self.n_qubits, self.registers.named_registers(""))?;
            c.append(coin)?.append(&self.boundary)?.append(&self.shift)?;
            Ok(c)
        })())
    }

    /// Exportable iteration: the unitary part followed by resets of the coin
    /// ancilla (post-selection point), boundary ancilla and coin register.
    pub fn to_circuit(&self) -> Option<Result<Circuit>> {
        let unitary = self.unitary_circuit()?;
        Some(unitary.and_then(|mut c| {
            let regs = &self.registers;
            c.push(GateOp::reset(regs.coin_ancilla))?;
            c.push(GateOp::reset(regs.boundary_ancilla))?;
            for &q in &regs.coin {
                c.push(GateOp::reset(q))?;
            }
            Ok(c)
        }))
    }

    /// Joint distribution after one coherent iteration from `state`, indexed
    /// by `cell * 2 + moved` where `moved` is the coin bit `c2`.
    pub fn cell_move_distribution(&self, state: &StateVector) -> Result<(Vec<f64>, f64)> {
        let mut s = state.clone();
        let success = self.apply_coherent(&mut s)?;
        let regs = &self.registers;
        let n_cells = 1usize << regs.n_position();
        let mut out = vec![0.0; 2 * n_cells];
        let norm = s.norm2();
        for (i, a) in s.amplitudes().iter().enumerate() {
            let p = a.norm_sqr();
            if p != 0.0 {
                let moved = extract_bits(i, &regs.coin[2..]);
                out[2 * regs.cell_of(i) + moved] += p / norm;
            }
        }
        Ok((out, success))
    }
}
