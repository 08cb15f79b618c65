//! Decomposition-rule registry: expands circuit ops into single-qubit and
//! C-NOT terminals for gate counting and noisy execution.
//!
//! The registered rules (per-gate counts in docs/decompositions.md):
//!
//! - negative controls: X-conjugation of the control qubit;
//! - X with one control: terminal C-NOT; with two controls: the 15-gate
//!   Toffoli sequence (9 singles + 6 C-NOTs);
//! - other single-qubit gates with one control: ZYZ/ABC rule (2 C-NOTs plus
//!   up to 6 singles and a control phase); with two controls: the
//!   square-root V-chain;
//! - swap: three C-NOTs (middle one carries any extra controls);
//! - QFT / inverse QFT: Hadamard + controlled-phase ladder + final swaps;
//! - ancilla phase shift on m qubits: X-conjugated controlled phase while at
//!   most two effective controls remain (m <= 2 here, or m = 3 uncontrolled
//!   via the V-chain); for larger m an ancilla-assisted cascade count is
//!   registered (2m + 1 + 18(m-1) singles, 12(m-1) C-NOTs) without an
//!   executable expansion;
//! - evolution and scrambler monoliths stay whole as C-A / CC-A class ops
//!   (custom noise durations); they have no registered gate count.

use std::f64::consts::FRAC_PI_4;

use crate::circuits::{Circuit, Control, Op};
use crate::error::{Error, Result};
use crate::gates::{self, GateClass, GateCount, GateKind};

/// Classification of a fully expanded op.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    Single(GateClass),
    Cnot,
    /// Singly-controlled evolution/scrambler monolith.
    CA,
    /// Doubly-controlled evolution monolith.
    CCA,
}

/// One step of expansion.
enum Expanded {
    Terminal(Terminal),
    Ops(Vec<Op>),
}

fn cx(control: usize, target: usize) -> Op {
    Op::new(gates::x(), vec![target], vec![Control::on(control)])
}

fn t_gate() -> gates::Gate {
    gates::phase(FRAC_PI_4)
}

fn t_dag() -> gates::Gate {
    gates::phase(-FRAC_PI_4)
}

fn expand_one(op: &Op) -> Result<Expanded> {
    // normalize negative controls by X-conjugation
    if op.controls.iter().any(|control| !control.value) {
        let mut ops = Vec::new();
        let flips: Vec<usize> = op
            .controls
            .iter()
            .filter(|control| !control.value)
            .map(|control| control.qubit)
            .collect();
        for &q in &flips {
            ops.push(Op::new(gates::x(), vec![q], vec![]));
        }
        ops.push(Op::new(
            op.gate.clone(),
            op.targets.clone(),
            op.controls.iter().map(|control| Control::on(control.qubit)).collect(),
        ));
        for &q in &flips {
            ops.push(Op::new(gates::x(), vec![q], vec![]));
        }
        return Ok(Expanded::Ops(ops));
    }

    let n_ctrl = op.controls.len();
    match op.gate.kind() {
        GateKind::PauliX => match n_ctrl {
            0 => Ok(Expanded::Terminal(Terminal::Single(op.gate.class()))),
            1 => Ok(Expanded::Terminal(Terminal::Cnot)),
            2 => Ok(Expanded::Ops(toffoli_sequence(
                op.controls[0].qubit,
                op.controls[1].qubit,
                op.targets[0],
            ))),
            k => Err(Error::UnregisteredComposite(format!(
                "X with {k} controls has no registered rule"
            ))),
        },
        GateKind::Single => match n_ctrl {
            0 => Ok(Expanded::Terminal(Terminal::Single(op.gate.class()))),
            1 => Ok(Expanded::Ops(controlled_single(
                op.gate.matrix(),
                op.controls[0].qubit,
                op.targets[0],
            ))),
            2 => Ok(Expanded::Ops(doubly_controlled_single(
                op.gate.matrix(),
                op.controls[0].qubit,
                op.controls[1].qubit,
                op.targets[0],
            )?)),
            k => Err(Error::UnregisteredComposite(format!(
                "'{}' with {k} controls has no registered rule",
                op.gate.label()
            ))),
        },
        GateKind::CnotMatrix => Ok(Expanded::Ops(vec![Op::new(
            gates::x(),
            vec![op.targets[1]],
            [&[Control::on(op.targets[0])], op.controls.as_slice()].concat(),
        )])),
        GateKind::CcxMatrix => Ok(Expanded::Ops(vec![Op::new(
            gates::x(),
            vec![op.targets[2]],
            [
                &[Control::on(op.targets[0]), Control::on(op.targets[1])],
                op.controls.as_slice(),
            ]
            .concat(),
        )])),
        GateKind::Swap => {
            let (a, b) = (op.targets[0], op.targets[1]);
            Ok(Expanded::Ops(vec![
                cx(b, a),
                Op::new(
                    gates::x(),
                    vec![b],
                    [&[Control::on(a)], op.controls.as_slice()].concat(),
                ),
                cx(b, a),
            ]))
        }
        GateKind::Qft => Ok(Expanded::Ops(qft_sequence(&op.targets, &op.controls, false))),
        GateKind::InverseQft => Ok(Expanded::Ops(qft_sequence(&op.targets, &op.controls, true))),
        GateKind::AncillaShift(phi) => {
            let m = op.targets.len();
            if m == 1 {
                // diag(e^{i phi}, 1): a virtual phase up to the X conjugation,
                // handled directly as a single
                return match n_ctrl {
                    0 => Ok(Expanded::Terminal(Terminal::Single(op.gate.class()))),
                    1 => Ok(Expanded::Ops(controlled_single(
                        op.gate.matrix(),
                        op.controls[0].qubit,
                        op.targets[0],
                    ))),
                    2 => Ok(Expanded::Ops(doubly_controlled_single(
                        op.gate.matrix(),
                        op.controls[0].qubit,
                        op.controls[1].qubit,
                        op.targets[0],
                    )?)),
                    k => Err(Error::UnregisteredComposite(format!(
                        "ancilla shift with {k} controls has no registered rule"
                    ))),
                };
            }
            if m - 1 + n_ctrl > 2 {
                return Err(Error::UnregisteredComposite(format!(
                    "ancilla shift on {m} qubits with {n_ctrl} controls has a count rule only"
                )));
            }
            let mut ops = Vec::new();
            for &t in &op.targets {
                ops.push(Op::new(gates::x(), vec![t], vec![]));
            }
            let mut controls: Vec<Control> = op.targets[..m - 1]
                .iter()
                .map(|&q| Control::on(q))
                .collect();
            controls.extend_from_slice(&op.controls);
            ops.push(Op::new(gates::phase(*phi), vec![op.targets[m - 1]], controls));
            for &t in &op.targets {
                ops.push(Op::new(gates::x(), vec![t], vec![]));
            }
            Ok(Expanded::Ops(ops))
        }
        GateKind::Evolution | GateKind::Scrambler => match n_ctrl {
            0 | 1 => Ok(Expanded::Terminal(Terminal::CA)),
            2 => Ok(Expanded::Terminal(Terminal::CCA)),
            k => Err(Error::UnregisteredComposite(format!(
                "evolution with {k} controls has no registered rule"
            ))),
        },
        GateKind::Opaque => Err(Error::UnregisteredComposite(op.gate.label().to_string())),
    }
}

/// 15-gate Toffoli: 9 singles and 6 C-NOTs, exact including phase.
fn toffoli_sequence(c1: usize, c2: usize, t: usize) -> Vec<Op> {
    vec![
        Op::new(gates::h(), vec![t], vec![]),
        cx(c2, t),
        Op::new(t_dag(), vec![t], vec![]),
        cx(c1, t),
        Op::new(t_gate(), vec![t], vec![]),
        cx(c2, t),
        Op::new(t_dag(), vec![t], vec![]),
        cx(c1, t),
        Op::new(t_gate(), vec![t], vec![]),
        Op::new(t_gate(), vec![c2], vec![]),
        Op::new(gates::h(), vec![t], vec![]),
        cx(c1, c2),
        Op::new(t_gate(), vec![c1], vec![]),
        Op::new(t_dag(), vec![c2], vec![]),
        cx(c1, c2),
    ]
}

/// ABC rule: U = e^{i alpha} A X B X C with A B C = I, phase on the control.
fn controlled_single(u: &nalgebra::DMatrix<num_complex::Complex64>, c: usize, t: usize) -> Vec<Op> {
    const EPS: f64 = 1e-14;
    let (alpha, beta, gamma, delta) = gates::zyz_angles(u);
    let mut ops = Vec::new();
    if beta.abs() < EPS && gamma.abs() < EPS && delta.abs() < EPS {
        // controlled global phase
        if alpha.abs() >= EPS {
            ops.push(Op::new(gates::phase(alpha), vec![c], vec![]));
        }
        return ops;
    }
    let push_rz = |ops: &mut Vec<Op>, angle: f64| {
        if angle.abs() >= EPS {
            ops.push(Op::new(gates::rz(angle), vec![t], vec![]));
        }
    };
    let push_ry = |ops: &mut Vec<Op>, angle: f64| {
        if angle.abs() >= EPS {
            ops.push(Op::new(gates::ry(angle), vec![t], vec![]));
        }
    };
    push_rz(&mut ops, (delta - beta) / 2.0);
    ops.push(cx(c, t));
    push_rz(&mut ops, -(delta + beta) / 2.0);
    push_ry(&mut ops, -gamma / 2.0);
    ops.push(cx(c, t));
    push_ry(&mut ops, gamma / 2.0);
    push_rz(&mut ops, beta);
    if alpha.abs() >= EPS {
        ops.push(Op::new(gates::phase(alpha), vec![c], vec![]));
    }
    ops
}

/// V-chain for a doubly-controlled single-qubit gate, V^2 = U.
fn doubly_controlled_single(
    u: &nalgebra::DMatrix<num_complex::Complex64>,
    c1: usize,
    c2: usize,
    t: usize,
) -> Result<Vec<Op>> {
    let v = gates::unitary_sqrt_2x2(u);
    let v_gate = gates::Gate::new("v", v.clone(), GateClass::U3, GateKind::Single)?;
    let v_dag = gates::Gate::new("v†", v.adjoint(), GateClass::U3, GateKind::Single)?;
    Ok(vec![
        Op::new(v_gate.clone(), vec![t], vec![Control::on(c2)]),
        cx(c1, c2),
        Op::new(v_dag, vec![t], vec![Control::on(c2)]),
        cx(c1, c2),
        Op::new(v_gate, vec![t], vec![Control::on(c1)]),
    ])
}

/// Standard QFT ladder over little-endian targets (targets[0] carries the
/// least-significant bit); extra controls are inherited by every element.
fn qft_sequence(targets: &[usize], controls: &[Control], inverse: bool) -> Vec<Op> {
    let m = targets.len();
    let mut ops: Vec<Op> = Vec::new();
    for i in (0..m).rev() {
        ops.push(Op::new(gates::h(), vec![targets[i]], controls.to_vec()));
        for k in 2..=i + 1 {
            let lambda = 2.0 * std::f64::consts::PI / (1u64 << k) as f64;
            let mut ctrl = vec![Control::on(targets[i + 1 - k])];
            ctrl.extend_from_slice(controls);
            ops.push(Op::new(gates::phase(lambda), vec![targets[i]], ctrl));
        }
    }
    // wrote the ladder in forward-QFT order up to the final bit-reversal
    let mut seq: Vec<Op> = Vec::new();
    if !inverse {
        seq = ops;
    } else {
        for op in ops.into_iter().rev() {
            seq.push(Op::new(op.gate.dagger(), op.targets, op.controls));
        }
    }
    let mut swaps: Vec<Op> = Vec::new();
    for j in 0..m / 2 {
        swaps.push(Op::new(
            gates::swap(),
            vec![targets[j], targets[m - 1 - j]],
            controls.to_vec(),
        ));
    }
    if inverse {
        let mut out = swaps;
        out.extend(seq);
        out
    } else {
        seq.extend(swaps);
        seq
    }
}

/// Fully expands an op into terminal ops for noisy execution.
pub fn expand_to_terminals(op: &Op) -> Result<Vec<(Op, Terminal)>> {
    let mut out = Vec::new();
    let mut stack = vec![op.clone()];
    while let Some(current) = stack.pop() {
        match expand_one(&current)? {
            Expanded::Terminal(t) => out.push((current, t)),
            Expanded::Ops(ops) => {
                for sub in ops.into_iter().rev() {
                    stack.push(sub);
                }
            }
        }
    }
    Ok(out)
}

/// Counts one op after full expansion. Evolution/scrambler monoliths have no
/// registered count and raise `UnregisteredComposite`.
pub fn count_op(op: &Op) -> Result<GateCount> {
    if let GateKind::AncillaShift(_) = op.gate.kind() {
        let m = op.targets.len();
        if m - 1 + op.controls.len() > 2 && op.controls.is_empty() {
            // ancilla-assisted cascade count, linear in m
            let m = m as u64;
            return Ok(GateCount {
                singles: 2 * m + 1 + 18 * (m - 1),
                cnots: 12 * (m - 1),
            });
        }
    }
    let mut count = GateCount::default();
    for (sub, terminal) in expand_to_terminals(op)? {
        match terminal {
            Terminal::Single(_) => count.singles += 1,
            Terminal::Cnot => count.cnots += 1,
            Terminal::CA | Terminal::CCA => {
                return Err(Error::UnregisteredComposite(format!(
                    "'{}' has custom timing but no registered gate count",
                    sub.gate.label()
                )))
            }
        }
    }
    Ok(count)
}

/// Counts a whole circuit; additive over ops.
pub fn count_circuit(circuit: &Circuit) -> Result<GateCount> {
    let mut total = GateCount::default();
    for op in circuit.ops() {
        total += count_op(op)?;
    }
    Ok(total)
}

/// Census of terminal classes after expansion (the same accounting noisy
/// execution uses); ops without an executable expansion tally as
/// "unexpandable".
pub fn class_census(circuit: &Circuit) -> std::collections::BTreeMap<String, u64> {
    let mut census = std::collections::BTreeMap::new();
    for op in circuit.ops() {
        match expand_to_terminals(op) {
            Ok(terminals) => {
                for (_, terminal) in terminals {
                    let key = match terminal {
                        Terminal::Single(GateClass::U1) => "u1",
                        Terminal::Single(GateClass::U2) => "u2",
                        Terminal::Single(_) => "u3",
                        Terminal::Cnot => "cnot",
                        Terminal::CA => "ca",
                        Terminal::CCA => "cca",
                    };
                    *census.entry(key.to_string()).or_insert(0) += 1;
                }
            }
            Err(_) => {
                *census.entry("unexpandable".to_string()).or_insert(0) += 1;
            }
        }
    }
    census
}
