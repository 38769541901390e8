//! Swap-test scoring of a walk state against the normalised indicator of a
//! detector region.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Control, GateOp};
use crate::error::{Error, Result};
use crate::geometry::DetectorRegion;
use crate::statevector::{BasisMask, StateVector};
use crate::walk::{prepare_real_amplitudes, WalkRegisters};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapTestResult {
    /// `2 f - 1` with `f` the observed frequency of ancilla outcome zero.
    pub estimate: f64,
    /// Binomial standard error of the estimate, `2 sqrt(f (1 - f) / n)`.
    pub sigma: f64,
    pub n_shots: u64,
    pub zeros: u64,
    /// Exact probability of ancilla outcome zero.
    pub p0: f64,
    /// Exact squared overlap `2 p0 - 1`.
    pub exact: f64,
}

/// H on `ancilla`, controlled swaps of `a[i]` with `b[i]`, H on `ancilla`.
pub fn build_swap_test(n_qubits: usize, ancilla: usize, a: &[usize], b: &[usize]) -> Result<Circuit> {
    if a.len() != b.len() {
        return Err(Error::Registers(format!(
            "swap test registers of {} and {} qubits",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::EmptyRange);
    }
    let mut c = Circuit::new(n_qubits);
    c.push(GateOp::h(ancilla))?;
    for (&p, &q) in a.iter().zip(b) {
        c.push(GateOp::controlled_swap(vec![Control::one(ancilla)], p, q))?;
    }
    c.push(GateOp::h(ancilla))?;
    Ok(c)
}

/// Runs the swap test on a state that already holds both registers and a
/// cleared ancilla, then draws `n_shots` ancilla readouts.
fn run_swap_test<R: Rng + ?Sized>(
    mut state: StateVector,
    ancilla: usize,
    a: &[usize],
    b: &[usize],
    n_shots: u64,
    rng: &mut R,
) -> Result<SwapTestResult> {
    if n_shots == 0 {
        return Err(Error::InvalidParameter("n_shots must be at least 1".into()));
    }
    let circuit = build_swap_test(state.n_qubits(), ancilla, a, b)?;
    state.apply_circuit(&circuit)?;
    let p0 = state
        .probability_of(BasisMask::default().with(ancilla, false))?
        .clamp(0.0, 1.0);
    let zeros = Binomial::new(n_shots, p0)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .sample(rng);
    let f = zeros as f64 / n_shots as f64;
    Ok(SwapTestResult {
        estimate: 2.0 * f - 1.0,
        sigma: 2.0 * (f * (1.0 - f) / n_shots as f64).sqrt(),
        n_shots,
        zeros,
        p0,
        exact: 2.0 * p0 - 1.0,
    })
}

/// Scores the position register of `walk_state` against the uniform
/// superposition over `region`. Other registers of the walk state are traced
/// out, so the estimate is `<phi| rho_position |phi>`.
pub fn swap_test_score<R: Rng + ?Sized>(
    walk_state: &StateVector,
    registers: &WalkRegisters,
    region: &DetectorRegion,
    n_shots: u64,
    rng: &mut R,
) -> Result<SwapTestResult> {
    let n_pos = registers.n_position();
    let (width, height) = (1usize << registers.x.len(), 1usize << registers.y.len());
    if region.is_empty() {
        return Err(Error::Detector("region is empty".into()));
    }
    let mut amps = vec![0.0; 1 << n_pos];
    for (x, y) in region.cells() {
        if x >= width || y >= height {
            return Err(Error::Registers(format!(
                "region cell ({x}, {y}) does not fit the {width}x{height} position register"
            )));
        }
        amps[y * width + x] = 1.0;
    }
    let mut score = StateVector::zero(n_pos + 1)?;
    let score_qubits: Vec<usize> = (0..n_pos).collect();
    score.apply_circuit(&prepare_real_amplitudes(n_pos + 1, &score_qubits, &amps)?)?;
    let n = walk_state.n_qubits();
    let full = walk_state.tensor(&score)?;
    let b: Vec<usize> = (n..n + n_pos).collect();
    run_swap_test(full, n + n_pos, &registers.position(), &b, n_shots, rng)
}

/// Swap test between two states of equal width.
pub fn swap_test_pair<R: Rng + ?Sized>(
    psi: &StateVector,
    phi: &StateVector,
    n_shots: u64,
    rng: &mut R,
) -> Result<SwapTestResult> {
    let n = psi.n_qubits();
    if phi.n_qubits() != n {
        return Err(Error::QubitCountMismatch {
            circuit: n,
            state: phi.n_qubits(),
        });
    }
    let full = psi.tensor(phi)?.extend(1)?;
    let a: Vec<usize> = (0..n).collect();
    let b: Vec<usize> = (n..2 * n).collect();
    run_swap_test(full, 2 * n, &a, &b, n_shots, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn identical_and_orthogonal_pairs() {
        let mut rng = RngStream::new(2);
        let a = StateVector::basis(2, 1).unwrap();
        let b = StateVector::basis(2, 2).unwrap();
        let same = swap_test_pair(&a, &a, 1000, &mut rng).unwrap();
        assert_eq!(same.estimate, 1.0);
        let orth = swap_test_pair(&a, &b, 100_000, &mut rng).unwrap();
        assert!(orth.exact.abs() < 1e-12);
        assert!(orth.estimate.abs() < 4.0 * orth.sigma.max(1e-3));
    }

    #[test]
    fn mismatched_widths() {
        let mut rng = RngStream::new(2);
        let a = StateVector::zero(2).unwrap();
        let b = StateVector::zero(3).unwrap();
        assert!(swap_test_pair(&a, &b, 10, &mut rng).is_err());
    }
}
