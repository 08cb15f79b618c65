//! Circuit representation and the builders/simulators for the three
//! strategies: post-selection repeat-until-success, ancilla thermalisation
//! (perceptron and groundstate variants) and pi/3 fixed-point oblivious
//! amplitude amplification.

mod executor;
mod groundstate;
mod oaa;
mod perceptron;
mod rus;

pub use executor::{circuit_unitary, Executor, Register};
pub use groundstate::{
    build_nor, build_pea_unit, build_scrambler, simulate_groundstate_thermalise, ScramblingMode,
};
pub use oaa::{
    build_oaa, oaa_report, oaa_success_probability, oaa_with_angle_error, OaaReport,
};
pub use perceptron::{build_perceptron_unit, simulate_perceptron_thermalise};
pub use rus::{run_rus, RusResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::state::DensityMatrix;

/// A control qubit with polarity: `value = true` fires on |1>.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    pub value: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Self { qubit, value: true }
    }

    pub fn off(qubit: usize) -> Self {
        Self { qubit, value: false }
    }
}

/// One gate application: a gate, its target qubits and polarized controls.
#[derive(Debug, Clone)]
pub struct Op {
    pub gate: Gate,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl Op {
    pub fn new(gate: Gate, targets: Vec<usize>, controls: Vec<Control>) -> Self {
        Self { gate, targets, controls }
    }

    /// All qubits the op touches, targets then controls.
    pub fn participants(&self) -> Vec<usize> {
        let mut qs = self.targets.clone();
        qs.extend(self.controls.iter().map(|control| control.qubit));
        qs
    }

    /// The same op with extra controls appended.
    pub fn with_extra_controls(&self, extra: &[Control]) -> Op {
        let mut controls = self.controls.clone();
        controls.extend_from_slice(extra);
        Op {
            gate: self.gate.clone(),
            targets: self.targets.clone(),
            controls,
        }
    }
}

/// Circuit instruction stream. Qubits enter on `Alloc` in |0>, leave on
/// `TraceOut`; `Snapshot` marks a point where the reduced state of the kept
/// qubits should be recorded.
#[derive(Debug, Clone)]
pub enum Instruction {
    Alloc { qubits: Vec<usize> },
    Apply(Op),
    TraceOut { qubits: Vec<usize> },
    Snapshot { tag: usize, keep: Vec<usize> },
}

/// Ordered gate applications over logical qubit ids with explicit trace
/// points. Ids are dense starting at 0; `input_qubits` are bound to the
/// caller-provided input state at execution time, all other allocations
/// start in |0>.
#[derive(Debug, Clone, Default)]
pub struct Circuit {
    pub instructions: Vec<Instruction>,
    pub total_qubits: usize,
    pub input_qubits: Vec<usize>,
    /// Scalar phase factor of the whole circuit (tracks the global minus
    /// sign of the amplification recursion); irrelevant to probabilities.
    pub global_phase: num_complex::Complex64,
}

impl Circuit {
    pub fn new() -> Self {
        Self {
            instructions: Vec::new(),
            total_qubits: 0,
            input_qubits: Vec::new(),
            global_phase: num_complex::Complex64::new(1.0, 0.0),
        }
    }

    /// Allocates `n` fresh qubit ids (in |0> unless later bound as input).
    pub fn alloc(&mut self, n: usize) -> Vec<usize> {
        let ids: Vec<usize> = (self.total_qubits..self.total_qubits + n).collect();
        self.total_qubits += n;
        self.instructions.push(Instruction::Alloc { qubits: ids.clone() });
        ids
    }

    /// Allocates qubits bound to the execution-time input state.
    pub fn alloc_input(&mut self, n: usize) -> Vec<usize> {
        let ids = self.alloc(n);
        self.input_qubits.extend(ids.iter().copied());
        ids
    }

    pub fn push(&mut self, gate: Gate, targets: Vec<usize>, controls: Vec<Control>) {
        self.instructions.push(Instruction::Apply(Op::new(gate, targets, controls)));
    }

    pub fn trace_out(&mut self, qubits: Vec<usize>) {
        self.instructions.push(Instruction::TraceOut { qubits });
    }

    pub fn snapshot(&mut self, tag: usize, keep: Vec<usize>) {
        self.instructions.push(Instruction::Snapshot { tag, keep });
    }

    /// Appends another circuit's ops (no allocs/traces), remapping its qubit
    /// ids through `map` and adding `extra` controls to every op.
    pub fn append_remapped(&mut self, other: &Circuit, map: &[usize], extra: &[Control]) -> Result<()> {
        for instr in &other.instructions {
            match instr {
                Instruction::Apply(op) => {
                    let targets: Vec<usize> = op
                        .targets
                        .iter()
                        .map(|&q| map.get(q).copied().ok_or_else(|| unmapped(q)))
                        .collect::<Result<_>>()?;
                    let mut controls: Vec<Control> = op
                        .controls
                        .iter()
                        .map(|control| {
                            map.get(control.qubit)
                                .copied()
                                .map(|qubit| Control { qubit, value: control.value })
                                .ok_or_else(|| unmapped(control.qubit))
                        })
                        .collect::<Result<_>>()?;
                    controls.extend_from_slice(extra);
                    self.instructions
                        .push(Instruction::Apply(Op::new(op.gate.clone(), targets, controls)));
                }
                // the host circuit allocates its own qubits
                Instruction::Alloc { .. } => {}
                Instruction::TraceOut { .. } | Instruction::Snapshot { .. } => {
                    return Err(Error::InvalidInput(
                        "can only append pure gate sequences".into(),
                    ))
                }
            }
        }
        self.global_phase *= other.global_phase;
        Ok(())
    }

    /// Gate applications in order, ignoring allocation/trace structure.
    pub fn ops(&self) -> impl Iterator<Item = &Op> {
        self.instructions.iter().filter_map(|i| match i {
            Instruction::Apply(op) => Some(op),
            _ => None,
        })
    }

    /// The adjoint of a pure gate sequence (no allocs/traces).
    pub fn dagger(&self) -> Result<Circuit> {
        let mut out = Circuit::new();
        out.total_qubits = self.total_qubits;
        out.input_qubits = self.input_qubits.clone();
        out.global_phase = self.global_phase.conj();
        let mut ops: Vec<Op> = Vec::new();
        for instr in &self.instructions {
            match instr {
                Instruction::Apply(op) => ops.push(Op::new(
                    op.gate.dagger(),
                    op.targets.clone(),
                    op.controls.clone(),
                )),
                _ => {
                    return Err(Error::InvalidInput(
                        "can only invert pure gate sequences".into(),
                    ))
                }
            }
        }
        for op in ops.into_iter().rev() {
            out.instructions.push(Instruction::Apply(op));
        }
        Ok(out)
    }
}

fn unmapped(q: usize) -> Error {
    Error::IndexError(format!("qubit {q} has no remap entry"))
}

/// Configuration of a thermalisation run. `applications` counts the total
/// number of times the post-select unit acts (the first application plus the
/// conditioned reapplications).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThermaliseConfig {
    pub applications: u32,
    pub trailing_reset: bool,
    pub scrambling_mode: ScramblingMode,
    pub precision: usize,
    /// Energy shift applied as a phase on controlled powers; `None` shifts
    /// by the groundstate energy so the ground phase pattern is all zeros.
    pub energy_shift: Option<f64>,
    /// Trace ancillae at their trace points (default); turning this off
    /// keeps the full register live until the final reduction, for
    /// representation cross-checks.
    #[serde(default = "default_true")]
    pub eager_trace: bool,
}

fn default_true() -> bool {
    true
}

impl ThermaliseConfig {
    pub fn new(applications: u32) -> Result<Self> {
        if applications == 0 {
            return Err(Error::InvalidInput("applications must be >= 1".into()));
        }
        Ok(Self {
            applications,
            trailing_reset: true,
            scrambling_mode: ScramblingMode::ExactEigenbasis,
            precision: 2,
            energy_shift: None,
            eager_trace: true,
        })
    }

    pub fn with_trailing_reset(mut self, on: bool) -> Self {
        self.trailing_reset = on;
        self
    }

    pub fn with_scrambling(mut self, mode: ScramblingMode) -> Self {
        self.scrambling_mode = mode;
        self
    }

    pub fn with_precision(mut self, m: usize) -> Self {
        self.precision = m;
        self
    }

    pub fn with_eager_trace(mut self, eager: bool) -> Self {
        self.eager_trace = eager;
        self
    }
}

/// One point of a fidelity-versus-applications series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesPoint {
    #[serde(rename = "T")]
    pub applications: u32,
    pub fidelity_sim: f64,
    pub fidelity_pred: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_estimate: Option<f64>,
}

/// Output of a thermalisation simulation.
#[derive(Debug, Clone)]
pub struct ThermaliseRun {
    pub series: Vec<SeriesPoint>,
    /// Reduced target state after each application count.
    pub target_states: Vec<(u32, DensityMatrix)>,
    /// Total qubits allocated over the run and the live-register peak.
    pub qubits_allocated: usize,
    pub qubits_peak: usize,
    /// Terminal-class census of the built circuit (what noisy execution
    /// would apply).
    pub ops_by_class: std::collections::BTreeMap<String, u64>,
    /// Expanded single/C-NOT totals when every op has a registered count.
    pub expanded_count: Option<crate::gates::GateCount>,
}

impl ThermaliseRun {
    pub fn final_target(&self) -> &DensityMatrix {
        &self.target_states.last().expect("at least one application").1
    }
}
