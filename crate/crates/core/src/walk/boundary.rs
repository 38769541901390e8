use crate::circuit::{Circuit, Control, GateOp};
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::statevector::StateVector;

use super::{coin_state, WalkRegisters};

/// Reflective walls. Each prohibited (edge, direction) pair sets the boundary
/// ancilla through a multi-controlled X; the ancilla then flips `c0`, which
/// turns right into left and up into down. The four triggers need distinct
/// coin values, so at most one fires per basis state. The ancilla is left
/// holding the reflection flag and must be reset before the next iteration.
pub fn build_boundary_conditions(registers: &WalkRegisters, n_qubits: usize) -> Result<Circuit> {
    registers.validate(n_qubits, &[])?;
    let mut circuit = Circuit::new(n_qubits);
    let [c0, c1, c2] = registers.coin;
    let walls = [
        (&registers.x, true, Direction::Right),
        (&registers.x, false, Direction::Left),
        (&registers.y, true, Direction::Up),
        (&registers.y, false, Direction::Down),
    ];
    for (axis, all_ones, dir) in walls {
        let k = coin_state(dir);
        let mut controls: Vec<Control> = axis.iter().map(|&q| Control::new(q, all_ones)).collect();
        controls.push(Control::new(c0, k & 1 == 1));
        controls.push(Control::new(c1, k & 2 == 2));
        controls.push(Control::new(c2, k & 4 == 4));
        circuit.push(GateOp::mcx(controls, registers.boundary_ancilla))?;
    }
    circuit.push(GateOp::cnot(registers.boundary_ancilla, c0))?;
    Ok(circuit)
}

/// Fails unless `qubit` reads zero with certainty.
pub fn check_cleared(state: &StateVector, qubit: usize) -> Result<()> {
    if state.prob_one(qubit)? > 1e-12 {
        Err(Error::AncillaNotCleared(qubit))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::BasisMask;

    fn run(regs: &WalkRegisters, n: usize, x: usize, y: usize, coin: usize) -> (usize, usize) {
        let c = build_boundary_conditions(regs, n).unwrap();
        let mut idx = BasisMask::from_register(&regs.x, x).value
            | BasisMask::from_register(&regs.y, y).value
            | BasisMask::from_register(&regs.coin, coin).value;
        let mut s = StateVector::basis(n, idx).unwrap();
        s.apply_circuit(&c).unwrap();
        idx = s.amplitudes().iter().position(|a| a.norm() > 0.5).unwrap();
        (regs.coin_of(idx), regs.cell_of(idx))
    }

    #[test]
    fn right_edge_reflects_right_move() {
        let (regs, n) = WalkRegisters::contiguous(2, 2);
        let (coin, cell) = run(&regs, n, 3, 1, 0b100);
        assert_eq!(coin, 0b101);
        assert_eq!(cell, 1 * 4 + 3);
    }

    #[test]
    fn interior_unchanged() {
        let (regs, n) = WalkRegisters::contiguous(2, 2);
        assert_eq!(run(&regs, n, 1, 1, 0b100).0, 0b100);
    }

    #[test]
    fn bottom_edge_reflects_down_move() {
        let (regs, n) = WalkRegisters::contiguous(2, 2);
        assert_eq!(run(&regs, n, 2, 0, 0b111).0, 0b110);
    }

    #[test]
    fn dirty_ancilla_detected() {
        let (regs, n) = WalkRegisters::contiguous(1, 1);
        let s = StateVector::basis(n, 1 << regs.boundary_ancilla).unwrap();
        assert!(matches!(check_cleared(&s, regs.boundary_ancilla), Err(Error::AncillaNotCleared(_))));
    }
}
