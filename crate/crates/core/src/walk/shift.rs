use std::f64::consts::PI;

use crate::circuit::{Circuit, Control, GateOp};
use crate::error::Result;
use crate::geometry::Direction;

use super::{coin_state, WalkRegisters};

/// QFT adder shift: in the Fourier basis of an axis register, a phase of
/// `+-pi / 2^(n-1-i)` on qubit `i` adds `+-1` modulo `2^n`. The ladders are
/// controlled on the full coin value, so the stay states (`c2 = 0`) leave the
/// position untouched.
pub fn build_shift(registers: &WalkRegisters, n_qubits: usize) -> Result<Circuit> {
    registers.validate(n_qubits, &[])?;
    let mut circuit = Circuit::new(n_qubits);
    let axes = [
        (&registers.x, Direction::Right, Direction::Left),
        (&registers.y, Direction::Up, Direction::Down),
    ];
    for (axis, forward, backward) in axes {
        let n = axis.len();
        circuit.push(GateOp::qft(axis.clone()))?;
        for (dir, sign) in [(forward, 1.0), (backward, -1.0)] {
            let controls = coin_controls(registers, coin_state(dir));
            for (i, &q) in axis.iter().enumerate() {
                let angle = sign * PI / (1u64 << (n - 1 - i)) as f64;
                circuit.push(GateOp::mc_phase(controls.clone(), q, angle))?;
            }
        }
        circuit.push(GateOp::inverse_qft(axis.clone()))?;
    }
    Ok(circuit)
}

fn coin_controls(registers: &WalkRegisters, value: usize) -> Vec<Control> {
    registers
        .coin
        .iter()
        .enumerate()
        .map(|(b, &q)| Control::new(q, (value >> b) & 1 == 1))
        .collect()
}
