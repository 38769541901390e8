//! Dense statevector simulation.
//!
//! Amplitudes are indexed so that qubit `q` is bit `q` of the basis index.
//! The squared norm is tracked explicitly: unitary gates leave it untouched,
//! post-selection lowers it, and measurement/reset keep it fixed by rescaling
//! the surviving branch.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, RngCore};

use crate::circuit::{inverse_qft_ops, qft_ops, Circuit, Control, GateKind, GateOp};
use crate::error::{Error, Result};

/// Structural tolerance used by tests and builders.
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance on norm preservation.
pub const NORM_TOL: f64 = 1e-12;
/// Largest register the dense simulator will allocate.
pub const MAX_QUBITS: usize = 26;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
    norm2: f64,
}

/// Bit pattern a basis index must match: `(index & mask) == value`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BasisMask {
    pub mask: usize,
    pub value: usize,
}

impl BasisMask {
    /// Requires `qubits[i]` to hold bit `i` of `value`.
    pub fn from_register(qubits: &[usize], value: usize) -> Self {
        let mut m = BasisMask::default();
        for (i, &q) in qubits.iter().enumerate() {
            m = m.with(q, (value >> i) & 1 == 1);
        }
        m
    }

    pub fn from_controls(controls: &[Control]) -> Self {
        controls
            .iter()
            .fold(BasisMask::default(), |m, c| m.with(c.qubit, c.on_one))
    }

    pub fn with(mut self, qubit: usize, one: bool) -> Self {
        self.mask |= 1 << qubit;
        if one {
            self.value |= 1 << qubit;
        } else {
            self.value &= !(1 << qubit);
        }
        self
    }

    #[inline]
    pub fn matches(&self, index: usize) -> bool {
        index & self.mask == self.value
    }
}

/// Reads the integer stored on `qubits` (least significant first) in `index`.
#[inline]
pub fn extract_bits(index: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &q)| acc | (((index >> q) & 1) << i))
}

impl StateVector {
    /// |0...0> on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::QubitBudget {
                what: "statevector",
                needed: n_qubits,
                max: MAX_QUBITS,
            });
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} outside dimension {dim}"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
            norm2: 1.0,
        })
    }

    /// Wraps raw amplitudes; the length must be a power of two. The squared
    /// norm is taken as given (no renormalisation).
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude array length {len} is not a power of two"
            )));
        }
        let norm2 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if norm2 <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
            norm2,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Tracked squared norm. Equals one until a post-selection happens.
    pub fn norm2(&self) -> f64 {
        self.norm2
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    /// Recomputes the squared norm from the amplitudes.
    pub fn recompute_norm2(&mut self) -> f64 {
        self.norm2 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        self.norm2
    }

    /// `self` on the low qubits, `other` on the high qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(Error::QubitBudget {
                what: "tensor product",
                needed: n,
                max: MAX_QUBITS,
            });
        }
        let mut amplitudes = Vec::with_capacity(1 << n);
        for b in &other.amplitudes {
            amplitudes.extend(self.amplitudes.iter().map(|a| a * b));
        }
        Ok(StateVector {
            n_qubits: n,
            amplitudes,
            norm2: self.norm2 * other.norm2,
        })
    }

    /// Appends `extra` qubits in |0>.
    pub fn extend(&self, extra: usize) -> Result<StateVector> {
        self.tensor(&StateVector::zero(extra)?)
    }

    /// <self|other> on raw amplitudes.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitCountMismatch {
                circuit: other.n_qubits,
                state: self.n_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            Err(Error::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Runs a circuit without measurement or reset.
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        self.run(circuit, None)
    }

    /// Runs a circuit whose measurements and resets draw from `rng`.
    pub fn apply_circuit_with_rng<R: RngCore>(&mut self, circuit: &Circuit, rng: &mut R) -> Result<()> {
        self.run(circuit, Some(rng))
    }

    fn run(&mut self, circuit: &Circuit, mut rng: Option<&mut dyn RngCore>) -> Result<()> {
        if circuit.n_qubits != self.n_qubits {
            return Err(Error::QubitCountMismatch {
                circuit: circuit.n_qubits,
                state: self.n_qubits,
            });
        }
        if rng.is_none() && !circuit.is_unitary() {
            return Err(Error::MissingRng);
        }
        for op in &circuit.ops {
            op.validate(self.n_qubits)?;
        }
        for op in &circuit.ops {
            match op.kind {
                GateKind::Measure => {
                    let r = rng.as_deref_mut().ok_or(Error::MissingRng)?;
                    self.measure(op.targets[0], r)?;
                }
                GateKind::Reset => {
                    let r = rng.as_deref_mut().ok_or(Error::MissingRng)?;
                    self.reset(op.targets[0], r)?;
                }
                _ => self.apply_unitary_op(op),
            }
        }
        Ok(())
    }

    /// Applies a single unitary op; measurement and reset need a random stream.
    pub fn apply_op(&mut self, op: &GateOp) -> Result<()> {
        op.validate(self.n_qubits)?;
        if !op.kind.is_unitary() {
            return Err(Error::MissingRng);
        }
        self.apply_unitary_op(op);
        Ok(())
    }

    fn apply_unitary_op(&mut self, op: &GateOp) {
        let ctrl = BasisMask::from_controls(&op.controls);
        match op.kind {
            GateKind::X | GateKind::Cnot | GateKind::Mcx => {
                let t = op.targets[0];
                self.apply_2x2(t, ctrl, [[ZERO, ONE], [ONE, ZERO]]);
            }
            GateKind::H => {
                let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                self.apply_2x2(op.targets[0], ctrl, [[s, s], [s, -s]]);
            }
            GateKind::Ry(theta) | GateKind::McRy(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                let (s, c) = (Complex64::new(s, 0.0), Complex64::new(c, 0.0));
                self.apply_2x2(op.targets[0], ctrl, [[c, -s], [s, c]]);
            }
            GateKind::Rz(theta) => {
                let t = op.targets[0];
                let lo = Complex64::from_polar(1.0, -theta / 2.0);
                let hi = Complex64::from_polar(1.0, theta / 2.0);
                self.apply_2x2(t, ctrl, [[lo, ZERO], [ZERO, hi]]);
            }
            GateKind::Phase(theta) | GateKind::McPhase(theta) => {
                let m = ctrl.with(op.targets[0], true);
                let phase = Complex64::from_polar(1.0, theta);
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    if m.matches(i) {
                        *a *= phase;
                    }
                }
            }
            GateKind::Swap => {
                let (a, b) = (op.targets[0], op.targets[1]);
                let m = ctrl.with(a, false).with(b, true);
                let flip = (1 << a) | (1 << b);
                for i in 0..self.amplitudes.len() {
                    if m.matches(i) {
                        self.amplitudes.swap(i, i ^ flip);
                    }
                }
            }
            GateKind::Qft => {
                for sub in qft_ops(&op.targets) {
                    self.apply_unitary_op(&sub);
                }
            }
            GateKind::InvQft => {
                for sub in inverse_qft_ops(&op.targets) {
                    self.apply_unitary_op(&sub);
                }
            }
            GateKind::Reset | GateKind::Measure => unreachable!("non-unitary op in unitary path"),
        }
    }

    /// Applies `m` to `target` on the subspace selected by `ctrl`.
    fn apply_2x2(&mut self, target: usize, ctrl: BasisMask, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << target;
        let sel = ctrl.with(target, false);
        for i in 0..self.amplitudes.len() {
            if !sel.matches(i) {
                continue;
            }
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[i | bit];
            self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// Multiplies every amplitude selected by `mask` by `factor`.
    pub fn scale_where(&mut self, mask: BasisMask, factor: Complex64) {
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if mask.matches(i) {
                *a *= factor;
            }
        }
    }

    /// Mutable access for amplitude-level kernels. The caller must call
    /// [`StateVector::recompute_norm2`] if the map is not norm-preserving.
    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    /// Probability (relative to `norm2`) that `qubit` reads one.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        self.probability_of(BasisMask::default().with(qubit, true))
    }

    /// Born-rule measurement; the surviving branch is rescaled so that the
    /// tracked norm is unchanged.
    pub fn measure(&mut self, qubit: usize, rng: &mut dyn RngCore) -> Result<bool> {
        let p1 = self.prob_one(qubit)?;
        let outcome = rng.random::<f64>() < p1;
        let p = if outcome { p1 } else { 1.0 - p1 };
        if p <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let keep = BasisMask::default().with(qubit, outcome);
        let factor = 1.0 / p.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if keep.matches(i) {
                *a *= factor;
            } else {
                *a = ZERO;
            }
        }
        Ok(outcome)
    }

    /// Measure, then flip to |0> if the outcome was one. Returns the outcome.
    pub fn reset(&mut self, qubit: usize, rng: &mut dyn RngCore) -> Result<bool> {
        let outcome = self.measure(qubit, rng)?;
        if outcome {
            self.apply_unitary_op(&GateOp::x(qubit));
        }
        Ok(outcome)
    }

    /// Projects `qubit` onto `value` without renormalising; the tracked norm
    /// drops accordingly. Returns the conditional success probability.
    pub fn postselect(&mut self, qubit: usize, value: bool) -> Result<f64> {
        self.check_qubit(qubit)?;
        let keep = BasisMask::default().with(qubit, value);
        let before = self.norm2;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if !keep.matches(i) {
                *a = ZERO;
            }
        }
        let after = self.recompute_norm2();
        if after <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(after / before)
    }

    /// Sum of |a|^2 over basis states matching `mask`, divided by `norm2`.
    pub fn probability_of(&self, mask: BasisMask) -> Result<f64> {
        if self.n_qubits < usize::BITS as usize && mask.mask >> self.n_qubits != 0 {
            let q = usize::BITS as usize - 1 - mask.mask.leading_zeros() as usize;
            return Err(Error::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            });
        }
        if self.norm2 <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let s: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask.matches(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        Ok(s / self.norm2)
    }

    /// Marginal distribution of the integer held on `qubits` (least
    /// significant first), normalised by `norm2`.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        if qubits.is_empty() {
            return Err(Error::EmptyRange);
        }
        for &q in qubits {
            self.check_qubit(q)?;
        }
        if self.norm2 <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut out = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p != 0.0 {
                out[extract_bits(i, qubits)] += p;
            }
        }
        out.iter_mut().for_each(|p| *p /= self.norm2);
        Ok(out)
    }

    /// Draws `n_shots` i.i.d. readouts of `qubits` from the Born marginal.
    pub fn sample_positions<R: Rng + ?Sized>(
        &self,
        qubits: &[usize],
        n_shots: u64,
        rng: &mut R,
    ) -> Result<BTreeMap<usize, u64>> {
        if n_shots == 0 {
            return Err(Error::InvalidParameter("n_shots must be at least 1".into()));
        }
        let probs = self.marginal(qubits)?;
        sample_histogram(&probs, n_shots, rng)
    }
}

/// Multinomial draw of `n` samples from a (possibly slightly unnormalised)
/// probability vector.
pub fn sample_histogram<R: Rng + ?Sized>(
    probs: &[f64],
    n: u64,
    rng: &mut R,
) -> Result<BTreeMap<usize, u64>> {
    let dist = rand_distr::weighted::WeightedIndex::new(probs)
        .map_err(|e| Error::InvalidParameter(format!("cannot sample distribution: {e}")))?;
    let mut counts = BTreeMap::new();
    for _ in 0..n {
        *counts.entry(rng.sample(&dist)).or_insert(0) += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_qft;
    use crate::rng::RngStream;

    fn approx(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn x_on_zero_gives_one() {
        let mut s = StateVector::zero(1).unwrap();
        let mut c = Circuit::new(1);
        c.push(GateOp::x(0)).unwrap();
        s.apply_circuit(&c).unwrap();
        assert!(approx(s.amplitude(1), ONE));
        assert!(approx(s.amplitude(0), ZERO));
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::zero(1).unwrap();
        let mut c = Circuit::new(1);
        c.push(GateOp::h(0)).unwrap();
        s.apply_circuit(&c).unwrap();
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!(approx(s.amplitude(0), r) && approx(s.amplitude(1), r));
    }

    #[test]
    fn cnot_truth_table() {
        // |10> means q1 = 1, q0 = 0, i.e. basis index 2.
        let mut s = StateVector::basis(2, 0b10).unwrap();
        let mut c = Circuit::new(2);
        c.push(GateOp::cnot(1, 0)).unwrap();
        s.apply_circuit(&c).unwrap();
        assert!(approx(s.amplitude(0b11), ONE));
    }

    #[test]
    fn control_on_zero() {
        let mut s = StateVector::basis(2, 0b00).unwrap();
        s.apply_op(&GateOp::mcx(vec![Control::zero(1)], 0)).unwrap();
        assert!(approx(s.amplitude(0b01), ONE));
    }

    #[test]
    fn measurement_requires_rng() {
        let mut s = StateVector::zero(1).unwrap();
        let mut c = Circuit::new(1);
        c.push(GateOp::measure(0)).unwrap();
        assert!(matches!(s.apply_circuit(&c), Err(Error::MissingRng)));
    }

    #[test]
    fn circuit_size_mismatch() {
        let mut s = StateVector::zero(2).unwrap();
        let c = Circuit::new(3);
        assert!(matches!(
            s.apply_circuit(&c),
            Err(Error::QubitCountMismatch { .. })
        ));
    }

    #[test]
    fn probability_masks() {
        let mut plus = StateVector::zero(1).unwrap();
        plus.apply_op(&GateOp::h(0)).unwrap();
        let p = plus.probability_of(BasisMask::default().with(0, false)).unwrap();
        assert!((p - 0.5).abs() < 1e-12);

        let s = StateVector::basis(2, 0b11).unwrap();
        let p = s.probability_of(BasisMask::default().with(1, false)).unwrap();
        assert_eq!(p, 0.0);
        assert!(s.probability_of(BasisMask::default().with(2, true)).is_err());
    }

    #[test]
    fn reset_returns_to_zero() {
        let mut rng = RngStream::new(7);
        for _ in 0..20 {
            let mut s = StateVector::zero(2).unwrap();
            s.apply_op(&GateOp::h(1)).unwrap();
            s.apply_op(&GateOp::cnot(1, 0)).unwrap();
            s.reset(1, &mut rng).unwrap();
            assert!(s.prob_one(1).unwrap() < 1e-15);
            assert!((s.norm2() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn postselect_lowers_norm() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_op(&GateOp::ry(0, 2.0 * (0.3f64).sqrt().acos())).unwrap();
        let p = s.postselect(0, false).unwrap();
        assert!((p - 0.3).abs() < 1e-12);
        assert!((s.norm2() - 0.3).abs() < 1e-12);
        // conditional probabilities are renormalised by norm2
        assert!((s.probability_of(BasisMask::default().with(0, false)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_state_samples_deterministically() {
        let s = StateVector::basis(3, 5).unwrap();
        let mut rng = RngStream::new(1);
        let h = s.sample_positions(&[0, 1, 2], 1000, &mut rng).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h[&5], 1000);
    }

    #[test]
    fn plus_state_sampling_band() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_op(&GateOp::h(0)).unwrap();
        let mut rng = RngStream::new(11);
        let h = s.sample_positions(&[0], 100_000, &mut rng).unwrap();
        let f0 = h.get(&0).copied().unwrap_or(0) as f64 / 100_000.0;
        assert!((0.49..=0.51).contains(&f0), "{f0}");
        assert_eq!(h.values().sum::<u64>(), 100_000);
    }

    #[test]
    fn sampling_rejects_empty_range_and_zero_shots() {
        let s = StateVector::zero(2).unwrap();
        let mut rng = RngStream::new(0);
        assert!(matches!(
            s.sample_positions(&[], 10, &mut rng),
            Err(Error::EmptyRange)
        ));
        assert!(s.sample_positions(&[0], 0, &mut rng).is_err());
    }

    #[test]
    fn qft_block_matches_expanded_circuit() {
        let qubits = [0, 2, 3];
        let expanded = build_qft(4, &qubits, false).unwrap();
        let mut block = Circuit::new(4);
        block.push(GateOp::qft(qubits.to_vec())).unwrap();
        for idx in 0..16 {
            let mut a = StateVector::basis(4, idx).unwrap();
            let mut b = a.clone();
            a.apply_circuit(&expanded).unwrap();
            b.apply_circuit(&block).unwrap();
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                assert!(approx(*x, *y));
            }
        }
    }

    #[test]
    fn tensor_places_other_on_high_qubits() {
        let a = StateVector::basis(2, 0b01).unwrap();
        let b = StateVector::basis(1, 1).unwrap();
        let t = a.tensor(&b).unwrap();
        assert_eq!(t.n_qubits(), 3);
        assert!(approx(t.amplitude(0b101), ONE));
    }
}
