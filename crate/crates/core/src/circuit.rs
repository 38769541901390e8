//! Gate-list circuit representation shared by the circuit builders, the
//! statevector simulator and the OpenQASM exporter.

use std::ops::Range;

use crate::error::{Error, Result};

/// A control qubit together with the basis value it must hold for the gate
/// to fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    pub on_one: bool,
}

impl Control {
    pub fn one(qubit: usize) -> Self {
        Self { qubit, on_one: true }
    }

    pub fn zero(qubit: usize) -> Self {
        Self { qubit, on_one: false }
    }

    pub fn new(qubit: usize, value: bool) -> Self {
        Self { qubit, on_one: value }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    X,
    H,
    Ry(f64),
    Rz(f64),
    Phase(f64),
    Cnot,
    /// Plain swap of two targets; with controls it is a (multi-)controlled swap.
    Swap,
    Mcx,
    McRy(f64),
    McPhase(f64),
    /// Quantum Fourier transform over `targets`, listed least significant first.
    Qft,
    InvQft,
    Reset,
    Measure,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::Phase(_) => "phase",
            GateKind::Cnot => "cnot",
            GateKind::Swap => "swap",
            GateKind::Mcx => "mcx",
            GateKind::McRy(_) => "mcry",
            GateKind::McPhase(_) => "mcphase",
            GateKind::Qft => "qft",
            GateKind::InvQft => "iqft",
            GateKind::Reset => "reset",
            GateKind::Measure => "measure",
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateKind::Reset | GateKind::Measure)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl GateOp {
    fn single(kind: GateKind, target: usize) -> Self {
        Self {
            kind,
            targets: vec![target],
            controls: Vec::new(),
        }
    }

    pub fn x(target: usize) -> Self {
        Self::single(GateKind::X, target)
    }

    pub fn h(target: usize) -> Self {
        Self::single(GateKind::H, target)
    }

    pub fn ry(target: usize, theta: f64) -> Self {
        Self::single(GateKind::Ry(theta), target)
    }

    pub fn rz(target: usize, theta: f64) -> Self {
        Self::single(GateKind::Rz(theta), target)
    }

    pub fn phase(target: usize, theta: f64) -> Self {
        Self::single(GateKind::Phase(theta), target)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cnot,
            targets: vec![target],
            controls: vec![Control::one(control)],
        }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self {
            kind: GateKind::Swap,
            targets: vec![a, b],
            controls: Vec::new(),
        }
    }

    pub fn controlled_swap(controls: Vec<Control>, a: usize, b: usize) -> Self {
        Self {
            kind: GateKind::Swap,
            targets: vec![a, b],
            controls,
        }
    }

    pub fn mcx(controls: Vec<Control>, target: usize) -> Self {
        Self {
            kind: GateKind::Mcx,
            targets: vec![target],
            controls,
        }
    }

    pub fn mc_ry(controls: Vec<Control>, target: usize, theta: f64) -> Self {
        Self {
            kind: GateKind::McRy(theta),
            targets: vec![target],
            controls,
        }
    }

    pub fn mc_phase(controls: Vec<Control>, target: usize, theta: f64) -> Self {
        Self {
            kind: GateKind::McPhase(theta),
            targets: vec![target],
            controls,
        }
    }

    pub fn qft(qubits: Vec<usize>) -> Self {
        Self {
            kind: GateKind::Qft,
            targets: qubits,
            controls: Vec::new(),
        }
    }

    pub fn inverse_qft(qubits: Vec<usize>) -> Self {
        Self {
            kind: GateKind::InvQft,
            targets: qubits,
            controls: Vec::new(),
        }
    }

    pub fn reset(target: usize) -> Self {
        Self::single(GateKind::Reset, target)
    }

    pub fn measure(target: usize) -> Self {
        Self::single(GateKind::Measure, target)
    }

    /// Checks arity, bounds and that targets and controls are disjoint.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let n_controls = self.controls.len();
        let n_targets = self.targets.len();
        let arity_ok = match self.kind {
            GateKind::X
            | GateKind::H
            | GateKind::Ry(_)
            | GateKind::Rz(_)
            | GateKind::Phase(_)
            | GateKind::Reset
            | GateKind::Measure => n_targets == 1 && n_controls == 0,
            GateKind::Cnot => n_targets == 1 && n_controls == 1,
            GateKind::Mcx | GateKind::McRy(_) | GateKind::McPhase(_) => {
                n_targets == 1 && n_controls >= 1
            }
            GateKind::Swap => n_targets == 2,
            GateKind::Qft | GateKind::InvQft => n_targets >= 1 && n_controls == 0,
        };
        if !arity_ok {
            return Err(Error::InvalidGate(format!(
                "{} with {} target(s) and {} control(s)",
                self.kind.name(),
                n_targets,
                n_controls
            )));
        }
        let mut seen = 0u128;
        let all = self
            .targets
            .iter()
            .copied()
            .chain(self.controls.iter().map(|c| c.qubit));
        for q in all {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
            if q >= 128 {
                return Err(Error::InvalidGate(format!("qubit index {q} too large")));
            }
            if seen & (1 << q) != 0 {
                return Err(Error::InvalidGate(format!(
                    "{} uses qubit {} more than once",
                    self.kind.name(),
                    q
                )));
            }
            seen |= 1 << q;
        }
        Ok(())
    }

    pub fn inverse(&self) -> Result<GateOp> {
        let kind = match self.kind {
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::Phase(t) => GateKind::Phase(-t),
            GateKind::McRy(t) => GateKind::McRy(-t),
            GateKind::McPhase(t) => GateKind::McPhase(-t),
            GateKind::Qft => GateKind::InvQft,
            GateKind::InvQft => GateKind::Qft,
            GateKind::Reset => return Err(Error::NonUnitary("reset")),
            GateKind::Measure => return Err(Error::NonUnitary("measure")),
            k => k,
        };
        Ok(GateOp {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        })
    }
}

/// Named contiguous qubit range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub qubits: Range<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub ops: Vec<GateOp>,
    pub registers: Vec<Register>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: Vec::new(),
            registers: Vec::new(),
        }
    }

    pub fn with_registers(n_qubits: usize, registers: Vec<Register>) -> Result<Self> {
        let circuit = Self {
            n_qubits,
            ops: Vec::new(),
            registers,
        };
        circuit.validate_registers()?;
        Ok(circuit)
    }

    pub fn push(&mut self, op: GateOp) -> Result<&mut Self> {
        op.validate(self.n_qubits)?;
        self.ops.push(op);
        Ok(self)
    }

    /// Appends every op of `other`; registers of `other` not yet present are
    /// adopted.
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.n_qubits > self.n_qubits {
            return Err(Error::QubitCountMismatch {
                circuit: other.n_qubits,
                state: self.n_qubits,
            });
        }
        for op in &other.ops {
            self.push(op.clone())?;
        }
        for reg in &other.registers {
            if !self.registers.iter().any(|r| r.name == reg.name) {
                self.registers.push(reg.clone());
            }
        }
        self.validate_registers()?;
        Ok(self)
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn validate_registers(&self) -> Result<()> {
        for (i, a) in self.registers.iter().enumerate() {
            if a.qubits.end > self.n_qubits || a.qubits.start > a.qubits.end {
                return Err(Error::Registers(format!(
                    "register `{}` spans {:?} outside {} qubits",
                    a.name, a.qubits, self.n_qubits
                )));
            }
            for b in &self.registers[i + 1..] {
                if a.name == b.name {
                    return Err(Error::Registers(format!("duplicate register `{}`", a.name)));
                }
                if a.qubits.start < b.qubits.end && b.qubits.start < a.qubits.end {
                    return Err(Error::Registers(format!(
                        "registers `{}` and `{}` overlap",
                        a.name, b.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_registers()?;
        self.ops.iter().try_for_each(|op| op.validate(self.n_qubits))
    }

    pub fn is_unitary(&self) -> bool {
        self.ops.iter().all(|op| op.kind.is_unitary())
    }

    /// Adjoint circuit: ops reversed and individually inverted.
    pub fn inverse(&self) -> Result<Circuit> {
        let ops = self
            .ops
            .iter()
            .rev()
            .map(GateOp::inverse)
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit {
            n_qubits: self.n_qubits,
            ops,
            registers: self.registers.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Standard QFT on `qubits` (least significant first) as H, controlled-phase
/// ladder and final bit-reversal swaps. Maps |x> to sum_k e^{2 pi i x k / 2^n} |k> / 2^{n/2}.
pub fn build_qft(n_qubits: usize, qubits: &[usize], inverse: bool) -> Result<Circuit> {
    if qubits.is_empty() {
        return Err(Error::EmptyRange);
    }
    let mut circuit = Circuit::new(n_qubits);
    for op in qft_ops(qubits) {
        circuit.push(op)?;
    }
    if inverse {
        circuit = circuit.inverse()?;
    }
    Ok(circuit)
}

/// Primitive ops of the forward QFT; also used to expand `Qft` blocks.
pub(crate) fn qft_ops(qubits: &[usize]) -> Vec<GateOp> {
    let n = qubits.len();
    let mut ops = Vec::with_capacity(n * (n + 1) / 2 + n / 2);
    for j in (0..n).rev() {
        ops.push(GateOp::h(qubits[j]));
        for k in (0..j).rev() {
            let angle = std::f64::consts::PI / (1u64 << (j - k)) as f64;
            ops.push(GateOp::mc_phase(vec![Control::one(qubits[k])], qubits[j], angle));
        }
    }
    for i in 0..n / 2 {
        ops.push(GateOp::swap(qubits[i], qubits[n - 1 - i]));
    }
    ops
}

pub(crate) fn inverse_qft_ops(qubits: &[usize]) -> Vec<GateOp> {
    qft_ops(qubits)
        .iter()
        .rev()
        .map(|op| op.inverse().expect("qft ops are unitary"))
        .collect()
}
