use crate::circuit::{Circuit, Control, GateOp};
use crate::error::{Error, Result};
use crate::geometry::{GridGeometry, SourceSpec};

use super::WalkRegisters;

/// Prepares `sum_c sqrt(w_c / W) |c>` on the position register from |0...0>.
/// A point source needs only X gates; weighted sources go through
/// [`prepare_real_amplitudes`].
pub fn build_source_prep(
    geometry: &GridGeometry,
    source: &SourceSpec,
    registers: &WalkRegisters,
    n_qubits: usize,
) -> Result<Circuit> {
    let probs = source.distribution(geometry)?;
    let amplitudes: Vec<f64> = probs.iter().map(|p| p.sqrt()).collect();
    prepare_real_amplitudes(n_qubits, &registers.position(), &amplitudes)
}

/// State preparation for non-negative real amplitudes on `qubits` (least
/// significant first) by a binary tree of uniformly controlled Y rotations.
/// `amplitudes` need not be normalised.
pub fn prepare_real_amplitudes(n_qubits: usize, qubits: &[usize], amplitudes: &[f64]) -> Result<Circuit> {
    let m = qubits.len();
    if amplitudes.len() != 1 << m {
        return Err(Error::InvalidParameter(format!(
            "{} amplitudes for a {m}-qubit register",
            amplitudes.len()
        )));
    }
    if amplitudes.iter().any(|a| !(*a >= 0.0)) {
        return Err(Error::Source("amplitudes must be non-negative".into()));
    }
    let weights: Vec<f64> = amplitudes.iter().map(|a| a * a).collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Source("total source weight is zero".into()));
    }
    let mut circuit = Circuit::new(n_qubits);

    let nonzero: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    if let [only] = nonzero[..] {
        for (bit, &q) in qubits.iter().enumerate() {
            if (only >> bit) & 1 == 1 {
                circuit.push(GateOp::x(q))?;
            }
        }
        return Ok(circuit);
    }

    for level in (0..m).rev() {
        let block = 1usize << level;
        for prefix in 0..(1usize << (m - 1 - level)) {
            let base = prefix << (level + 1);
            let w0: f64 = weights[base..base + block].iter().sum();
            let w1: f64 = weights[base + block..base + 2 * block].iter().sum();
            if w0 + w1 <= 0.0 || w1 == 0.0 {
                continue;
            }
            let theta = 2.0 * w1.sqrt().atan2(w0.sqrt());
            let controls: Vec<Control> = (level + 1..m)
                .map(|b| Control::new(qubits[b], (base >> b) & 1 == 1))
                .collect();
            if controls.is_empty() {
                circuit.push(GateOp::ry(qubits[level], theta))?;
            } else {
                circuit.push(GateOp::mc_ry(controls, qubits[level], theta))?;
            }
        }
    }
    Ok(circuit)
}
