//! Instruction-stream executor over a live register.
//!
//! The register maps logical qubit ids (allocation order) to physical
//! positions of the dense state. Tracing a qubit out compacts the physical
//! register while preserving relative order, which keeps the live register
//! small; a qubit is never touched after its trace point, so eager tracing
//! is exact.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuits::{Circuit, Instruction, Op};
use crate::error::{Error, Result};
use crate::noise::NoiseRun;
use crate::state::{
    self, DensityMatrix, PureState, State, MAX_MIXED_QUBITS, MAX_PURE_QUBITS,
};

/// Live register with logical-to-physical qubit bookkeeping.
#[derive(Debug, Clone)]
pub struct Register {
    state: Option<State>,
    /// live[physical position] = logical id, ascending in allocation order.
    live: Vec<usize>,
    peak: usize,
}

impl Register {
    pub fn new() -> Self {
        Self { state: None, live: Vec::new(), peak: 0 }
    }

    pub fn live_count(&self) -> usize {
        self.live.len()
    }

    pub fn peak(&self) -> usize {
        self.peak
    }

    fn capacity_for(&self, extra: usize, mixed: bool) -> Result<()> {
        let n = self.live.len() + extra;
        let cap = if mixed { MAX_MIXED_QUBITS } else { MAX_PURE_QUBITS };
        if n > cap {
            return Err(Error::Capacity(format!(
                "live register of {n} qubits exceeds the {cap}-qubit cap"
            )));
        }
        Ok(())
    }

    fn is_mixed(&self) -> bool {
        matches!(self.state, Some(State::Mixed(_)))
    }

    /// Adjoins `incoming` qubits (bound to `ids`) to the high end of the
    /// register.
    fn adjoin(&mut self, incoming: State, ids: &[usize]) -> Result<()> {
        let mixed = self.is_mixed() || matches!(incoming, State::Mixed(_));
        self.capacity_for(ids.len(), mixed)?;
        self.state = Some(match self.state.take() {
            None => incoming,
            Some(current) => state::tensor(&current, &incoming)?,
        });
        self.live.extend_from_slice(ids);
        self.peak = self.peak.max(self.live.len());
        Ok(())
    }

    pub fn alloc_zero(&mut self, ids: &[usize]) -> Result<()> {
        self.adjoin(State::Pure(PureState::zero(ids.len())?), ids)
    }

    pub fn alloc_input(&mut self, input: State, ids: &[usize]) -> Result<()> {
        let n = match &input {
            State::Pure(p) => p.n_qubits(),
            State::Mixed(d) => d.n_qubits(),
        };
        if n != ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "input state has {n} qubits, circuit binds {}",
                ids.len()
            )));
        }
        self.adjoin(input, ids)
    }

    fn physical(&self, id: usize) -> Result<usize> {
        self.live
            .iter()
            .position(|&q| q == id)
            .ok_or_else(|| Error::IndexError(format!("qubit {id} is not live")))
    }

    /// Applies a (controlled) unitary by logical ids.
    pub fn apply(&mut self, op: &Op) -> Result<()> {
        let targets: Vec<usize> = op.targets.iter().map(|&q| self.physical(q)).collect::<Result<_>>()?;
        let controls: Vec<(usize, bool)> = op
            .controls
            .iter()
            .map(|c| self.physical(c.qubit).map(|p| (p, c.value)))
            .collect::<Result<_>>()?;
        let state = self
            .state
            .as_mut()
            .ok_or_else(|| Error::InvalidInput("empty register".into()))?;
        state::apply_gate(state, op.gate.matrix(), &targets, &controls)
    }

    /// Converts the register to the density representation.
    pub fn to_mixed(&mut self) -> Result<()> {
        if let Some(State::Pure(p)) = &self.state {
            self.capacity_for(0, true)?;
            self.state = Some(State::Mixed(p.to_density()?));
        }
        Ok(())
    }

    /// Traces out the listed logical qubits.
    pub fn trace_out(&mut self, ids: &[usize]) -> Result<()> {
        if ids.is_empty() {
            return Ok(());
        }
        self.to_mixed()?;
        let physical: Vec<usize> = ids.iter().map(|&q| self.physical(q)).collect::<Result<_>>()?;
        let Some(State::Mixed(rho)) = &self.state else {
            return Err(Error::InvalidInput("empty register".into()));
        };
        let reduced = state::partial_trace(rho, &physical)?;
        self.state = Some(State::Mixed(reduced));
        self.live.retain(|q| !ids.contains(q));
        Ok(())
    }

    /// Reduced density matrix of the listed qubits, leaving the register
    /// untouched. Ids must be live and in ascending physical order.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let positions: Vec<usize> = keep.iter().map(|&q| self.physical(q)).collect::<Result<_>>()?;
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::IndexError(
                "snapshot qubits must be in ascending physical order".into(),
            ));
        }
        let rho = match self.state.as_ref() {
            Some(State::Pure(p)) => p.to_density()?,
            Some(State::Mixed(d)) => d.clone(),
            None => return Err(Error::InvalidInput("empty register".into())),
        };
        let drop: Vec<usize> = (0..self.live.len()).filter(|p| !positions.contains(p)).collect();
        if drop.is_empty() {
            return Ok(rho);
        }
        state::partial_trace(&rho, &drop)
    }

    /// Applies a single-qubit Kraus channel at a logical qubit.
    pub fn apply_channel(&mut self, channel: &crate::noise::KrausChannel, id: usize) -> Result<()> {
        self.to_mixed()?;
        let p = self.physical(id)?;
        let Some(State::Mixed(rho)) = &self.state else {
            return Err(Error::InvalidInput("empty register".into()));
        };
        let out = channel.apply(rho, p)?;
        self.state = Some(State::Mixed(out));
        Ok(())
    }

    pub fn state(&self) -> Option<&State> {
        self.state.as_ref()
    }

    pub fn into_state(self) -> Option<State> {
        self.state
    }

    /// Multiplies pure amplitudes by a scalar phase (no-op when mixed).
    pub fn apply_global_phase(&mut self, phase: Complex64) {
        if (phase - Complex64::new(1.0, 0.0)).norm() < 1e-15 {
            return;
        }
        if let Some(State::Pure(p)) = self.state.take() {
            let amps: Vec<Complex64> = p.amplitudes().iter().map(|a| a * phase).collect();
            self.state = Some(State::Pure(
                PureState::from_amplitudes(amps).expect("phase preserves norm"),
            ));
        } else if let Some(s) = self.state.take() {
            self.state = Some(s);
        }
    }
}

impl Default for Register {
    fn default() -> Self {
        Self::new()
    }
}

/// Result of executing a circuit: tagged snapshots plus the final register.
pub struct Execution {
    pub snapshots: Vec<(usize, DensityMatrix)>,
    pub register: Register,
}

/// Walks a circuit's instruction stream.
///
/// `eager` controls whether `TraceOut` instructions act immediately (the
/// default) or are deferred, keeping the full register live; both modes
/// yield identical reduced states because traced qubits are never touched
/// again.
pub struct Executor<'a> {
    eager: bool,
    noise: Option<NoiseRun<'a>>,
}

impl<'a> Executor<'a> {
    pub fn new() -> Self {
        Self { eager: true, noise: None }
    }

    pub fn with_eager(mut self, eager: bool) -> Self {
        self.eager = eager;
        self
    }

    pub fn with_noise(mut self, noise: Option<NoiseRun<'a>>) -> Self {
        self.noise = noise;
        self
    }

    /// Runs `circuit`, binding `input` to the circuit's input qubits.
    pub fn run(&mut self, circuit: &Circuit, input: Option<State>) -> Result<Execution> {
        let mut reg = Register::new();
        let mut input = input;
        let mut spent: HashSet<usize> = HashSet::new();
        let mut deferred: Vec<usize> = Vec::new();
        let mut snapshots = Vec::new();

        if self.noise.is_some() {
            // thermal channels need the density representation throughout
        }

        for instr in &circuit.instructions {
            match instr {
                Instruction::Alloc { qubits } => {
                    let binds_input = qubits.iter().any(|q| circuit.input_qubits.contains(q));
                    if binds_input {
                        if qubits != &circuit.input_qubits {
                            return Err(Error::InvalidInput(
                                "input qubits must be allocated together".into(),
                            ));
                        }
                        let state = input.take().ok_or_else(|| {
                            Error::InvalidInput("circuit expects an input state".into())
                        })?;
                        reg.alloc_input(state, qubits)?;
                    } else {
                        reg.alloc_zero(qubits)?;
                    }
                    if self.noise.is_some() {
                        reg.to_mixed()?;
                    }
                }
                Instruction::Apply(op) => {
                    for q in op.participants() {
                        if spent.contains(&q) {
                            return Err(Error::IndexError(format!(
                                "op '{}' touches qubit {q} after its trace point",
                                op.gate.label()
                            )));
                        }
                    }
                    match &mut self.noise {
                        None => reg.apply(op)?,
                        Some(noise) => noise.apply_noisy(&mut reg, op)?,
                    }
                }
                Instruction::TraceOut { qubits } => {
                    for &q in qubits {
                        spent.insert(q);
                    }
                    if self.eager {
                        reg.trace_out(qubits)?;
                    } else {
                        deferred.extend_from_slice(qubits);
                    }
                }
                Instruction::Snapshot { tag, keep } => {
                    snapshots.push((*tag, reg.reduced(keep)?));
                }
            }
        }
        reg.apply_global_phase(circuit.global_phase);
        Ok(Execution { snapshots, register: reg })
    }
}

impl<'a> Default for Executor<'a> {
    fn default() -> Self {
        Self::new()
    }
}

/// Dense unitary of a pure gate sequence (no trace points), by applying the
/// ops to every basis state.
pub fn circuit_unitary(circuit: &Circuit) -> Result<DMatrix<Complex64>> {
    let n = circuit.total_qubits;
    if n > 10 {
        return Err(Error::Capacity(format!(
            "unitary extraction over {n} qubits is not supported"
        )));
    }
    let dim = 1usize << n;
    let mut u = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut psi = PureState::basis(n, col)?;
        for instr in &circuit.instructions {
            match instr {
                Instruction::Apply(op) => {
                    let controls: Vec<(usize, bool)> =
                        op.controls.iter().map(|c| (c.qubit, c.value)).collect();
                    state::apply_to_pure(&mut psi, op.gate.matrix(), &op.targets, &controls)?;
                }
                Instruction::Alloc { .. } => {}
                _ => {
                    return Err(Error::InvalidInput(
                        "unitary extraction needs a pure gate sequence".into(),
                    ))
                }
            }
        }
        for (row, amp) in psi.amplitudes().iter().enumerate() {
            u[(row, col)] = amp * circuit.global_phase;
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::Control;
    use crate::gates;

    #[test]
    fn eager_and_deferred_traces_agree() {
        // entangle three qubits, trace the middle one early
        let mut c = Circuit::new();
        let q = c.alloc(3);
        c.push(gates::h(), vec![q[0]], vec![]);
        c.push(gates::x(), vec![q[1]], vec![Control::on(q[0])]);
        c.push(gates::ry(0.41), vec![q[2]], vec![Control::on(q[1])]);
        c.trace_out(vec![q[1]]);
        c.push(gates::h(), vec![q[2]], vec![]);
        c.snapshot(0, vec![q[0], q[2]]);

        let eager = Executor::new().run(&c, None).unwrap();
        let lazy = Executor::new().with_eager(false).run(&c, None).unwrap();
        let diff = eager.snapshots[0].1.max_abs_diff(&lazy.snapshots[0].1);
        assert!(diff < 1e-12, "representations disagree by {diff:e}");
    }

    #[test]
    fn ops_after_trace_point_are_rejected() {
        let mut c = Circuit::new();
        let q = c.alloc(2);
        c.trace_out(vec![q[1]]);
        c.push(gates::x(), vec![q[1]], vec![]);
        assert!(Executor::new().run(&c, None).is_err());
    }

    #[test]
    fn circuit_unitary_of_cnot_sequence() {
        let mut c = Circuit::new();
        let q = c.alloc(2);
        c.push(gates::x(), vec![q[1]], vec![Control::on(q[0])]);
        let u = circuit_unitary(&c).unwrap();
        let direct = {
            let mut m = DMatrix::<Complex64>::identity(4, 4);
            m[(1, 1)] = Complex64::new(0.0, 0.0);
            m[(3, 3)] = Complex64::new(0.0, 0.0);
            m[(1, 3)] = Complex64::new(1.0, 0.0);
            m[(3, 1)] = Complex64::new(1.0, 0.0);
            m
        };
        assert!((u - direct).map(|v| v.norm()).max() < 1e-12);
    }

    #[test]
    fn input_binding_feeds_the_right_qubits() {
        let mut c = Circuit::new();
        let input = c.alloc_input(1);
        let anc = c.alloc(1);
        c.push(gates::x(), vec![anc[0]], vec![Control::on(input[0])]);
        c.snapshot(0, vec![anc[0]]);
        let one = State::Pure(PureState::basis(1, 1).unwrap());
        let out = Executor::new().run(&c, Some(one)).unwrap();
        let rho = &out.snapshots[0].1;
        assert!((rho.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
    }
}
