//! OpenQASM 2.0 export.
//!
//! Multi-controlled gates are written as recursive gate definitions over
//! `qelib1.inc` primitives, so any consumer that reads QASM 2.0 can expand
//! them. Controls on zero are wrapped in `x` gates, QFT blocks are expanded
//! to their primitive ladder, and reset and measurement are emitted natively.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::circuit::{inverse_qft_ops, qft_ops, Circuit, Control, GateKind, GateOp};
use crate::error::Result;

#[derive(Default)]
struct Needed {
    mcp: BTreeSet<usize>,
    mcx: BTreeSet<usize>,
    mcry: BTreeSet<usize>,
}

impl Needed {
    fn add_mcp(&mut self, n: usize) {
        if n >= 2 && self.mcp.insert(n) {
            self.add_mcx(n - 1);
            self.add_mcp(n - 1);
        }
    }

    fn add_mcx(&mut self, n: usize) {
        if n >= 3 && self.mcx.insert(n) {
            self.add_mcp(n);
        }
    }

    fn add_mcry(&mut self, n: usize) {
        if self.mcry.insert(n) {
            self.add_mcx(n);
        }
    }

    fn definitions(&self) -> String {
        let max = [&self.mcp, &self.mcx, &self.mcry]
            .iter()
            .filter_map(|s| s.last().copied())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for n in 1..=max {
            let c = args("c", n);
            if self.mcp.contains(&n) {
                let head = args("c", n - 1);
                let last = format!("c{}", n - 1);
                let _ = writeln!(
                    out,
                    "gate mcp{n}(theta) {c},t {{ cu1(theta/2) {last},t; {x} {head},{last}; cu1(-theta/2) {last},t; {x} {head},{last}; {p}(theta/2) {head},t; }}",
                    x = mcx_name(n - 1),
                    p = mcp_name(n - 1),
                );
            }
            if self.mcx.contains(&n) {
                let _ = writeln!(out, "gate mcx{n} {c},t {{ h t; mcp{n}(pi) {c},t; h t; }}");
            }
            if self.mcry.contains(&n) {
                let x = mcx_name(n);
                let _ = writeln!(
                    out,
                    "gate mcry{n}(theta) {c},t {{ ry(theta/2) t; {x} {c},t; ry(-theta/2) t; {x} {c},t; }}"
                );
            }
        }
        out
    }
}

fn args(prefix: &str, n: usize) -> String {
    (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(",")
}

fn mcx_name(n: usize) -> String {
    match n {
        1 => "cx".into(),
        2 => "ccx".into(),
        _ => format!("mcx{n}"),
    }
}

fn mcp_name(n: usize) -> String {
    if n == 1 {
        "cu1".into()
    } else {
        format!("mcp{n}")
    }
}

fn q(i: usize) -> String {
    format!("q[{i}]")
}

fn operands(controls: &[Control], targets: &[usize]) -> String {
    controls
        .iter()
        .map(|c| c.qubit)
        .chain(targets.iter().copied())
        .map(q)
        .collect::<Vec<_>>()
        .join(",")
}

/// Expands block ops into the primitive ops the exporter writes.
fn flatten(op: &GateOp) -> Vec<GateOp> {
    match op.kind {
        GateKind::Qft => qft_ops(&op.targets),
        GateKind::InvQft => inverse_qft_ops(&op.targets),
        _ => vec![op.clone()],
    }
}

fn emit_op(op: &GateOp, needed: &mut Needed, body: &mut String) {
    let negated: Vec<usize> = op.controls.iter().filter(|c| !c.on_one).map(|c| c.qubit).collect();
    for &n in &negated {
        let _ = writeln!(body, "x {};", q(n));
    }
    let nc = op.controls.len();
    let t = &op.targets;
    let line = match op.kind {
        GateKind::X if nc == 0 => format!("x {}", q(t[0])),
        GateKind::H => format!("h {}", q(t[0])),
        GateKind::Ry(a) => format!("ry({a}) {}", q(t[0])),
        GateKind::Rz(a) => format!("rz({a}) {}", q(t[0])),
        GateKind::Phase(a) => format!("u1({a}) {}", q(t[0])),
        GateKind::McPhase(a) if nc == 0 => format!("u1({a}) {}", q(t[0])),
        GateKind::McRy(a) if nc == 0 => format!("ry({a}) {}", q(t[0])),
        GateKind::X | GateKind::Cnot | GateKind::Mcx => {
            needed.add_mcx(nc);
            format!("{} {}", mcx_name(nc), operands(&op.controls, t))
        }
        GateKind::McRy(a) => {
            needed.add_mcry(nc);
            format!("mcry{nc}({a}) {}", operands(&op.controls, t))
        }
        GateKind::McPhase(a) => {
            needed.add_mcp(nc);
            format!("{}({a}) {}", mcp_name(nc), operands(&op.controls, t))
        }
        GateKind::Swap if nc == 0 => {
            let (a, b) = (q(t[0]), q(t[1]));
            format!("cx {a},{b};\ncx {b},{a};\ncx {a},{b}")
        }
        GateKind::Swap => {
            needed.add_mcx(nc + 1);
            let (a, b) = (q(t[0]), q(t[1]));
            let ctrl = operands(&op.controls, &[t[0]]);
            format!("cx {b},{a};\n{} {ctrl},{b};\ncx {b},{a}", mcx_name(nc + 1))
        }
        GateKind::Reset => format!("reset {}", q(t[0])),
        GateKind::Measure => format!("measure {} -> c[{}]", q(t[0]), t[0]),
        GateKind::Qft | GateKind::InvQft => unreachable!("blocks are flattened"),
    };
    let _ = writeln!(body, "{line};");
    for &n in &negated {
        let _ = writeln!(body, "x {};", q(n));
    }
}

/// Serialises `circuit` as OpenQASM 2.0 text.
pub fn to_qasm(circuit: &Circuit) -> Result<String> {
    circuit.validate()?;
    let mut needed = Needed::default();
    let mut body = String::new();
    for op in &circuit.ops {
        for prim in flatten(op) {
            emit_op(&prim, &mut needed, &mut body);
        }
    }
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    for r in &circuit.registers {
        let _ = writeln!(out, "// {}: q[{}..{}]", r.name, r.qubits.start, r.qubits.end - 1);
    }
    out.push_str(&needed.definitions());
    let _ = writeln!(out, "qreg q[{}];", circuit.n_qubits);
    if circuit.ops.iter().any(|op| op.kind == GateKind::Measure) {
        let _ = writeln!(out, "creg c[{}];", circuit.n_qubits);
    }
    out.push_str(&body);
    Ok(out)
}
