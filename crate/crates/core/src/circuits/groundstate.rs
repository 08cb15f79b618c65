//! Groundstate preparation by phase estimation with ancilla thermalisation:
//! NOR compilation of the precision register, eigenstate scrambling, the
//! phase-estimation unit and the thermalisation loop.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::circuits::{Circuit, Control, Executor, Op, SeriesPoint, ThermaliseConfig, ThermaliseRun};
use crate::error::{Error, Result};
use crate::gates::{self, Gate, GateClass, GateKind};
use crate::hamiltonians::Hamiltonian;
use crate::noise::{NoiseProfile, NoiseRun};
use crate::state::MAX_MIXED_QUBITS;

/// How the reset redistributes excited weight over eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScramblingMode {
    /// Hadamard transform on eigenstate labels: V H^(x)n V^dag.
    ExactEigenbasis,
    /// Local Hadamards H^(x)n; exact only for diagonal Hamiltonians.
    Hadamard,
}

impl ScramblingMode {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "exact" | "exact-eigenbasis" => Ok(ScramblingMode::ExactEigenbasis),
            "hadamard" => Ok(ScramblingMode::Hadamard),
            other => Err(Error::InvalidInput(format!(
                "unknown scrambling mode '{other}' (expected exact or hadamard)"
            ))),
        }
    }
}

/// Ops computing NOT-OR of the precision register onto the last helper:
/// the helper ends |0> iff the precision register is |0...0>. Helpers must
/// arrive in |0>; m >= 2 uses an X-conjugated Toffoli cascade over m - 1
/// helpers, m = 1 a single X-conjugated copy.
fn nor_ops(precision: &[usize], helpers: &[usize]) -> Vec<Op> {
    let m = precision.len();
    let mut ops = Vec::new();
    if m == 1 {
        let (p, h) = (precision[0], helpers[0]);
        ops.push(Op::new(gates::x(), vec![p], vec![]));
        ops.push(Op::new(gates::x(), vec![h], vec![Control::on(p)]));
        ops.push(Op::new(gates::x(), vec![p], vec![]));
        ops.push(Op::new(gates::x(), vec![h], vec![]));
        return ops;
    }
    for &p in precision {
        ops.push(Op::new(gates::x(), vec![p], vec![]));
    }
    ops.push(Op::new(
        gates::x(),
        vec![helpers[0]],
        vec![Control::on(precision[0]), Control::on(precision[1])],
    ));
    for i in 2..m {
        ops.push(Op::new(
            gates::x(),
            vec![helpers[i - 1]],
            vec![Control::on(helpers[i - 2]), Control::on(precision[i])],
        ));
    }
    ops.push(Op::new(gates::x(), vec![*helpers.last().unwrap()], vec![]));
    for &p in precision {
        ops.push(Op::new(gates::x(), vec![p], vec![]));
    }
    ops
}

fn helper_count(m: usize) -> usize {
    (m - 1).max(1)
}

/// NOR circuit over `m` precision qubits (bound as inputs) plus fresh helper
/// ancillae; the last allocated qubit carries the result.
pub fn build_nor(m: usize) -> Result<Circuit> {
    if m == 0 {
        return Err(Error::InvalidInput("NOR needs at least one precision qubit".into()));
    }
    let mut circuit = Circuit::new();
    let precision = circuit.alloc_input(m);
    let helpers = circuit.alloc(helper_count(m));
    for op in nor_ops(&precision, &helpers) {
        circuit.push(op.gate, op.targets, op.controls);
    }
    Ok(circuit)
}

/// The scrambling gate: redistributes each eigenstate's weight uniformly
/// over all eigenstates (every matrix element of the label transform has
/// squared magnitude 1/2^n).
pub fn build_scrambler(hamiltonian: &Hamiltonian, mode: ScramblingMode) -> Gate {
    let n = hamiltonian.n_qubits();
    let mut h_all = DMatrix::identity(1, 1);
    for _ in 0..n {
        h_all = h_all.kronecker(gates::h().matrix());
    }
    let matrix = match mode {
        ScramblingMode::Hadamard => h_all,
        ScramblingMode::ExactEigenbasis => {
            let v = hamiltonian.basis_aligned_eigenvectors();
            &v * h_all * v.adjoint()
        }
    };
    Gate::new(
        match mode {
            ScramblingMode::Hadamard => "scramble-local",
            ScramblingMode::ExactEigenbasis => "scramble-eigen",
        },
        matrix,
        GateClass::CA,
        GateKind::Scrambler,
    )
    .expect("scrambler is unitary")
}

/// Preparation V H^(x)n taking |0...0> to the equal superposition of
/// eigenstates (exact mode); the local-Hadamard mode prepares uniform bit
/// strings instead.
fn eigenbasis_preparation(hamiltonian: &Hamiltonian) -> Gate {
    let n = hamiltonian.n_qubits();
    let mut h_all = DMatrix::identity(1, 1);
    for _ in 0..n {
        h_all = h_all.kronecker(gates::h().matrix());
    }
    let v = hamiltonian.basis_aligned_eigenvectors();
    Gate::new("prepare-eigen", v * h_all, GateClass::CA, GateKind::Scrambler)
        .expect("preparation is unitary")
}

/// Phase-estimation unit: Hadamards on `m` precision qubits (ids 0..m),
/// controlled powers of the shifted evolution on the targets (ids m..m+n,
/// bound as inputs), then the inverse QFT on the precision register.
///
/// The energy shift (groundstate energy when `None`) enters as a phase on
/// the controlled powers so the groundstate pattern is all zeros; phases
/// within `PHASE_SNAP_TOL` of the m-bit grid evolve exactly on it.
pub fn build_pea_unit(
    hamiltonian: &Hamiltonian,
    m: usize,
    tau: f64,
    shift: Option<f64>,
) -> Result<Circuit> {
    if m == 0 {
        return Err(Error::InvalidInput("need at least one precision qubit".into()));
    }
    let shift = shift.unwrap_or_else(|| hamiltonian.ground_energy());
    let mut circuit = Circuit::new();
    let precision = circuit.alloc(m);
    let targets = circuit.alloc_input(hamiltonian.n_qubits());
    for &p in &precision {
        circuit.push(gates::h(), vec![p], vec![]);
    }
    let base = hamiltonian.evolution_shifted_snapped(tau, shift, m);
    for (j, &p) in precision.iter().enumerate() {
        let power = gates::controlled_power(&base, j as u32)?;
        circuit.push(power, targets.clone(), vec![Control::on(p)]);
    }
    circuit.push(gates::inverse_qft(m)?, precision, vec![]);
    Ok(circuit)
}

/// Ancilla-thermalisation loop for groundstate preparation.
///
/// Prepares the target register (exact mode: equal superposition of
/// eigenstates; hadamard mode: uniform bit strings), applies the
/// phase-estimation unit, then for each further application: NOR on the
/// spent precision register, conditioned scrambler and conditioned unit on
/// fresh ancillae, tracing each ancilla right after its last use.
pub fn simulate_groundstate_thermalise(
    hamiltonian: &Hamiltonian,
    config: &ThermaliseConfig,
    noise: Option<&NoiseProfile>,
) -> Result<ThermaliseRun> {
    let n = hamiltonian.n_qubits();
    let m = config.precision;
    let total = config.applications;
    if m == 0 {
        return Err(Error::InvalidInput("need at least one precision qubit".into()));
    }
    if n + 2 * m + 1 > MAX_MIXED_QUBITS {
        return Err(Error::Capacity(format!(
            "{n} target + 2*{m} precision + 1 qubits exceed the {MAX_MIXED_QUBITS}-qubit cap"
        )));
    }
    let tau = 1.0;
    let unit = build_pea_unit(hamiltonian, m, tau, config.energy_shift)?;
    let scrambler = build_scrambler(hamiltonian, config.scrambling_mode);

    let mut circuit = Circuit::new();
    let targets = circuit.alloc(n);
    // initialisation mirrors the scrambling mode
    match config.scrambling_mode {
        ScramblingMode::ExactEigenbasis => {
            circuit.push(eigenbasis_preparation(hamiltonian), targets.clone(), vec![]);
        }
        ScramblingMode::Hadamard => {
            for &t in &targets {
                circuit.push(gates::h(), vec![t], vec![]);
            }
        }
    }
    let mut precision = circuit.alloc(m);
    let unit_map = |p: &[usize], t: &[usize]| -> Vec<usize> {
        let mut map = p.to_vec();
        map.extend_from_slice(t);
        map
    };
    circuit.append_remapped(&unit, &unit_map(&precision, &targets), &[])?;
    circuit.snapshot(1, targets.clone());

    for t in 2..=total {
        let helpers = circuit.alloc(helper_count(m));
        for op in nor_ops(&precision, &helpers) {
            circuit.push(op.gate, op.targets, op.controls);
        }
        let condition = *helpers.last().unwrap();
        let mut spent = precision.clone();
        spent.extend_from_slice(&helpers[..helpers.len() - 1]);
        circuit.trace_out(spent);
        // conditioned reset and re-application on fresh ancillae
        match config.scrambling_mode {
            ScramblingMode::ExactEigenbasis => {
                circuit.push(scrambler.clone(), targets.clone(), vec![Control::on(condition)]);
            }
            ScramblingMode::Hadamard => {
                for &q in &targets {
                    circuit.push(gates::h(), vec![q], vec![Control::on(condition)]);
                }
            }
        }
        precision = circuit.alloc(m);
        circuit.append_remapped(
            &unit,
            &unit_map(&precision, &targets),
            &[Control::on(condition)],
        )?;
        circuit.trace_out(vec![condition]);
        circuit.snapshot(t as usize, targets.clone());
    }
    circuit.trace_out(precision);

    let noise_run = noise.map(NoiseRun::new).transpose()?;
    let execution = Executor::new()
        .with_eager(config.eager_trace)
        .with_noise(noise_run)
        .run(&circuit, None)?;

    let ground = hamiltonian.groundstate();
    let n_states = hamiltonian.dim();
    let (_, n_star) = hamiltonian.shifted_phases(m, tau);
    let mut series = Vec::with_capacity(total as usize);
    let mut target_states = Vec::with_capacity(total as usize);
    for (tag, rho) in execution.snapshots {
        let t = tag as u32;
        series.push(SeriesPoint {
            applications: t,
            fidelity_sim: crate::state::fidelity_with_pure(&rho, &ground)?,
            fidelity_pred: analysis::predicted_groundstate_fidelity(n_states, n_star, t),
            q_estimate: None,
        });
        target_states.push((t, rho));
    }
    Ok(ThermaliseRun {
        series,
        target_states,
        qubits_allocated: circuit.total_qubits,
        qubits_peak: execution.register.peak(),
        ops_by_class: crate::decompose::class_census(&circuit),
        expanded_count: crate::gates::count_gates(&circuit).ok(),
    })
}
