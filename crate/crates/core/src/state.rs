//! Dense complex linear-algebra core: pure states, density matrices, gate
//! application, partial trace, projection, fidelity and sampling.
//!
//! Qubit ordering is little-endian throughout: qubit 0 is the
//! least-significant bit of a basis index. Bit strings in printed output are
//! most-significant-qubit first, so basis index 1 of a 2-qubit register
//! prints as "01".

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Maximum live qubits for a pure state (dense vector of 2^n amplitudes).
pub const MAX_PURE_QUBITS: usize = 20;
/// Maximum live qubits for a density matrix (dense 2^n x 2^n storage).
pub const MAX_MIXED_QUBITS: usize = 12;

/// Structural tolerance for norm/trace/Hermiticity checks.
pub const STRUCT_TOL: f64 = 1e-10;
/// Eigenvalue floor for positive-semidefiniteness checks.
pub const PSD_FLOOR: f64 = -1e-9;

/// Probability below which a projection is reported as an exact zero branch.
const ZERO_PROB: f64 = 1e-12;

/// A normalized pure state over `n_qubits` qubits.
#[derive(Debug, Clone)]
pub struct PureState {
    n_qubits: usize,
    amps: DVector<Complex64>,
}

/// A Hermitian, trace-one, positive-semidefinite density matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: DMatrix<Complex64>,
}

/// Either representation of a quantum state.
#[derive(Debug, Clone)]
pub enum State {
    Pure(PureState),
    Mixed(DensityMatrix),
}

/// Outcome record of projecting a sub-register onto a bit string.
///
/// A zero-probability branch carries no post state.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub outcome: Vec<bool>,
    pub probability: f64,
    pub post_state: Option<State>,
}

impl PureState {
    /// |0...0> on `n_qubits`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_pure_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut amps = DVector::zeros(dim);
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Computational basis state |index>.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_pure_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::IndexError(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = DVector::zeros(dim);
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Builds a state from raw amplitudes, checking length and norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "amplitude vector length {dim} is not a power of two"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_pure_capacity(n_qubits)?;
        let amps = DVector::from_vec(amps);
        let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STRUCT_TOL {
            return Err(Error::InvalidInput(format!(
                "pure state norm {norm} deviates from 1 beyond {STRUCT_TOL}"
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Normalizes an arbitrary nonzero vector into a state.
    pub fn from_unnormalized(amps: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidInput("cannot normalize the zero vector".into()));
        }
        let scaled = amps.into_iter().map(|c| c / norm).collect();
        Self::from_amplitudes(scaled)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amps.as_slice()
    }

    /// The rank-one density matrix |psi><psi|.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        check_mixed_capacity(self.n_qubits)?;
        let mat = &self.amps * self.amps.adjoint();
        Ok(DensityMatrix {
            n_qubits: self.n_qubits,
            mat,
        })
    }

    /// |<a|b>|^2 between two pure states.
    pub fn overlap_sq(&self, other: &PureState) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "overlap between {} and {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self.amps.dotc(&other.amps).norm_sqr())
    }
}

impl DensityMatrix {
    /// |0...0><0...0| on `n_qubits`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_mixed_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut mat = DMatrix::zeros(dim, dim);
        mat[(0, 0)] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, mat })
    }

    /// Builds from an explicit matrix, validating Hermiticity, trace and the
    /// PSD eigenvalue floor.
    pub fn try_new(mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = mat.nrows();
        if mat.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} is not a square power-of-two matrix",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_mixed_capacity(n_qubits)?;
        let herm_err = (&mat - mat.adjoint()).map(|c| c.norm()).max();
        if herm_err > STRUCT_TOL {
            return Err(Error::InvalidInput(format!(
                "density matrix deviates from Hermitian by {herm_err:e}"
            )));
        }
        let trace = mat.trace();
        if (trace.re - 1.0).abs() > STRUCT_TOL || trace.im.abs() > STRUCT_TOL {
            return Err(Error::InvalidInput(format!(
                "density matrix trace {trace} deviates from 1"
            )));
        }
        let min_eig = mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < PSD_FLOOR {
            return Err(Error::InvalidInput(format!(
                "density matrix minimum eigenvalue {min_eig:e} below PSD floor"
            )));
        }
        Ok(Self { n_qubits, mat })
    }

    pub(crate) fn from_parts_unchecked(n_qubits: usize, mat: DMatrix<Complex64>) -> Self {
        Self { n_qubits, mat }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Real diagonal, clamped at zero; used for computational-basis sampling.
    pub fn probabilities(&self) -> Vec<f64> {
        self.mat.diagonal().iter().map(|c| c.re.max(0.0)).collect()
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.mat - &other.mat).map(|c| c.norm()).max()
    }
}

fn check_pure_capacity(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_PURE_QUBITS {
        return Err(Error::Capacity(format!(
            "{n_qubits} qubits exceeds the {MAX_PURE_QUBITS}-qubit pure-state cap"
        )));
    }
    Ok(())
}

fn check_mixed_capacity(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_MIXED_QUBITS {
        return Err(Error::Capacity(format!(
            "{n_qubits} qubits exceeds the {MAX_MIXED_QUBITS}-qubit density-matrix cap"
        )));
    }
    Ok(())
}

/// Kronecker product of two states; qubit indices of `b` are offset by
/// `a.n_qubits()`, so `a` occupies the low bits of the joint index.
pub fn tensor(a: &State, b: &State) -> Result<State> {
    match (a, b) {
        (State::Pure(pa), State::Pure(pb)) => {
            check_pure_capacity(pa.n_qubits + pb.n_qubits)?;
            // b occupies the high bits, so it is the left kron factor
            let amps = pb.amps.kronecker(&pa.amps);
            Ok(State::Pure(PureState {
                n_qubits: pa.n_qubits + pb.n_qubits,
                amps: DVector::from_column_slice(amps.as_slice()),
            }))
        }
        _ => {
            let da = as_density(a)?;
            let db = as_density(b)?;
            check_mixed_capacity(da.n_qubits + db.n_qubits)?;
            let mat = db.mat.kronecker(&da.mat);
            Ok(State::Mixed(DensityMatrix {
                n_qubits: da.n_qubits + db.n_qubits,
                mat,
            }))
        }
    }
}

fn as_density(s: &State) -> Result<DensityMatrix> {
    match s {
        State::Pure(p) => p.to_density(),
        State::Mixed(d) => Ok(d.clone()),
    }
}

/// Validates targets/controls: in range, no duplicates, no overlap.
fn check_indices(
    n_qubits: usize,
    targets: &[usize],
    controls: &[(usize, bool)],
) -> Result<()> {
    let mut seen = vec![false; n_qubits];
    for &t in targets {
        if t >= n_qubits {
            return Err(Error::IndexError(format!(
                "target {t} out of range for {n_qubits} qubits"
            )));
        }
        if seen[t] {
            return Err(Error::IndexError(format!("qubit {t} referenced twice")));
        }
        seen[t] = true;
    }
    for &(c, _) in controls {
        if c >= n_qubits {
            return Err(Error::IndexError(format!(
                "control {c} out of range for {n_qubits} qubits"
            )));
        }
        if seen[c] {
            return Err(Error::IndexError(format!("qubit {c} referenced twice")));
        }
        seen[c] = true;
    }
    Ok(())
}

/// Bit-scatter table for a gate acting on `targets`: entry `j` is the basis
/// offset obtained by depositing the bits of `j` at the target positions.
fn scatter_table(targets: &[usize]) -> Vec<usize> {
    let gdim = 1usize << targets.len();
    (0..gdim)
        .map(|j| {
            targets
                .iter()
                .enumerate()
                .filter(|(b, _)| (j >> b) & 1 == 1)
                .map(|(_, &t)| 1usize << t)
                .sum()
        })
        .collect()
}

fn control_masks(controls: &[(usize, bool)]) -> (usize, usize) {
    let mut mask = 0usize;
    let mut value = 0usize;
    for &(c, pol) in controls {
        mask |= 1 << c;
        if pol {
            value |= 1 << c;
        }
    }
    (mask, value)
}

/// Core kernel: applies `gate` to the target axes of a dense amplitude slice
/// with stride-1 basis indexing, touching only indices whose control bits
/// match. `conj` applies the entrywise conjugate of the gate instead.
fn apply_kernel(
    amps: &mut [Complex64],
    n_qubits: usize,
    gate: &DMatrix<Complex64>,
    targets: &[usize],
    controls: &[(usize, bool)],
    conj: bool,
) {
    let dim = 1usize << n_qubits;
    let gdim = 1usize << targets.len();
    let spread = scatter_table(targets);
    let target_mask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let (cmask, cval) = control_masks(controls);
    let mut scratch = vec![Complex64::new(0.0, 0.0); gdim];

    for base in 0..dim {
        if base & target_mask != 0 || base & cmask != cval {
            continue;
        }
        for (j, s) in spread.iter().enumerate() {
            scratch[j] = amps[base | s];
        }
        for (j, s) in spread.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, v) in scratch.iter().enumerate() {
                let g = gate[(j, l)];
                acc += if conj { g.conj() } else { g } * v;
            }
            amps[base | s] = acc;
        }
    }
}

fn check_gate_dims(gate: &DMatrix<Complex64>, targets: &[usize]) -> Result<()> {
    let gdim = 1usize << targets.len();
    if gate.nrows() != gdim || gate.ncols() != gdim {
        return Err(Error::DimensionMismatch(format!(
            "gate is {}x{} but acts on {} target(s)",
            gate.nrows(),
            gate.ncols(),
            targets.len()
        )));
    }
    Ok(())
}

/// Applies a (controlled) unitary to a pure state in place.
pub fn apply_to_pure(
    psi: &mut PureState,
    gate: &DMatrix<Complex64>,
    targets: &[usize],
    controls: &[(usize, bool)],
) -> Result<()> {
    check_indices(psi.n_qubits, targets, controls)?;
    check_gate_dims(gate, targets)?;
    apply_kernel(
        psi.amps.as_mut_slice(),
        psi.n_qubits,
        gate,
        targets,
        controls,
        false,
    );
    Ok(())
}

/// Applies a (controlled) map `rho -> K rho K^dag` to a density matrix in
/// place. Exact conjugation for unitaries; also used per Kraus operator.
pub fn conjugate_density(
    rho: &mut DensityMatrix,
    gate: &DMatrix<Complex64>,
    targets: &[usize],
    controls: &[(usize, bool)],
) -> Result<()> {
    check_indices(rho.n_qubits, targets, controls)?;
    check_gate_dims(gate, targets)?;
    let n = rho.n_qubits;
    let dim = 1usize << n;
    // K on the row index, column by column (contiguous in nalgebra)
    for c in 0..dim {
        apply_kernel(&mut rho.mat.column_mut(c).as_mut_slice()[..], n, gate, targets, controls, false);
    }
    // conj(K) on the column index, row by row
    let mut row = vec![Complex64::new(0.0, 0.0); dim];
    for r in 0..dim {
        for c in 0..dim {
            row[c] = rho.mat[(r, c)];
        }
        apply_kernel(&mut row, n, gate, targets, controls, true);
        for c in 0..dim {
            rho.mat[(r, c)] = row[c];
        }
    }
    Ok(())
}

/// Applies a (controlled) unitary to either representation.
pub fn apply_gate(
    state: &mut State,
    gate: &DMatrix<Complex64>,
    targets: &[usize],
    controls: &[(usize, bool)],
) -> Result<()> {
    match state {
        State::Pure(p) => apply_to_pure(p, gate, targets, controls),
        State::Mixed(d) => conjugate_density(d, gate, targets, controls),
    }
}

/// Reduced density matrix after tracing out the `drop` qubits. Remaining
/// qubits keep their original relative order and are re-indexed densely.
pub fn partial_trace(rho: &DensityMatrix, drop: &[usize]) -> Result<DensityMatrix> {
    if drop.is_empty() {
        return Ok(rho.clone());
    }
    let n = rho.n_qubits;
    let mut is_dropped = vec![false; n];
    for &q in drop {
        if q >= n {
            return Err(Error::IndexError(format!(
                "cannot trace qubit {q} of a {n}-qubit register"
            )));
        }
        if is_dropped[q] {
            return Err(Error::IndexError(format!("qubit {q} dropped twice")));
        }
        is_dropped[q] = true;
    }
    let keep: Vec<usize> = (0..n).filter(|&q| !is_dropped[q]).collect();
    if keep.is_empty() {
        return Err(Error::InvalidInput(
            "cannot trace out every qubit of a register".into(),
        ));
    }
    let drop_sorted: Vec<usize> = (0..n).filter(|&q| is_dropped[q]).collect();
    let keep_spread = scatter_table(&keep);
    let drop_spread = scatter_table(&drop_sorted);
    let kdim = 1usize << keep.len();
    let mut out = DMatrix::zeros(kdim, kdim);
    for (a, &ra) in keep_spread.iter().enumerate() {
        for (b, &rb) in keep_spread.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &d in &drop_spread {
                acc += rho.mat[(ra | d, rb | d)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DensityMatrix {
        n_qubits: keep.len(),
        mat: out,
    })
}

/// Projects the listed qubits onto a bit-string outcome.
///
/// The record's probability is the squared norm of the projected component;
/// the post state is renormalized. A branch with (numerically) zero
/// probability yields `post_state: None` rather than dividing by zero.
pub fn project(state: &State, qubits: &[usize], outcome: &[bool]) -> Result<MeasurementRecord> {
    if qubits.len() != outcome.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} qubits vs {} outcome bits",
            qubits.len(),
            outcome.len()
        )));
    }
    let n = match state {
        State::Pure(p) => p.n_qubits,
        State::Mixed(d) => d.n_qubits,
    };
    check_indices(n, qubits, &[])?;
    let mut mask = 0usize;
    let mut value = 0usize;
    for (&q, &b) in qubits.iter().zip(outcome) {
        mask |= 1 << q;
        if b {
            value |= 1 << q;
        }
    }
    match state {
        State::Pure(p) => {
            let mut kept = p.amps.clone();
            let mut prob = 0.0;
            for (i, amp) in kept.iter_mut().enumerate() {
                if i & mask == value {
                    prob += amp.norm_sqr();
                } else {
                    *amp = Complex64::new(0.0, 0.0);
                }
            }
            let post_state = if prob > ZERO_PROB {
                let norm = prob.sqrt();
                Some(State::Pure(PureState {
                    n_qubits: p.n_qubits,
                    amps: kept / Complex64::new(norm, 0.0),
                }))
            } else {
                None
            };
            Ok(MeasurementRecord {
                outcome: outcome.to_vec(),
                probability: prob,
                post_state,
            })
        }
        State::Mixed(d) => {
            let dim = d.mat.nrows();
            let mut kept = DMatrix::zeros(dim, dim);
            let mut prob = 0.0;
            for r in 0..dim {
                if r & mask != value {
                    continue;
                }
                prob += d.mat[(r, r)].re;
                for c in 0..dim {
                    if c & mask == value {
                        kept[(r, c)] = d.mat[(r, c)];
                    }
                }
            }
            let post_state = if prob > ZERO_PROB {
                Some(State::Mixed(DensityMatrix {
                    n_qubits: d.n_qubits,
                    mat: kept / Complex64::new(prob, 0.0),
                }))
            } else {
                None
            };
            Ok(MeasurementRecord {
                outcome: outcome.to_vec(),
                probability: prob.max(0.0),
                post_state,
            })
        }
    }
}

/// <psi| rho |psi>, clamped to [0, 1].
pub fn fidelity_with_pure(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if rho.n_qubits != psi.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between {}-qubit density and {}-qubit state",
            rho.n_qubits, psi.n_qubits
        )));
    }
    let v = &rho.mat * &psi.amps;
    let f = psi.amps.dotc(&v);
    debug_assert!(f.im.abs() < 1e-12, "fidelity has imaginary part {}", f.im);
    Ok(f.re.clamp(0.0, 1.0))
}

/// Formats a basis index as a most-significant-qubit-first bit string.
pub fn format_bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Multinomial sample of computational-basis outcomes from the diagonal of
/// `rho`. Deterministic for a fixed seed.
pub fn sample_counts(rho: &DensityMatrix, shots: u64, seed: u64) -> BTreeMap<String, u64> {
    let probs = rho.probabilities();
    let total: f64 = probs.iter().sum();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p / total;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..shots {
        let r: f64 = rng.random();
        let idx = cumulative.partition_point(|&c| c < r).min(probs.len() - 1);
        *counts
            .entry(format_bitstring(idx, rho.n_qubits))
            .or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::from_amplitudes(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let zero = State::Pure(PureState::zero(1).unwrap());
        let one = State::Pure(PureState::basis(1, 1).unwrap());
        // |0> (x) |0> -> (1,0,0,0)
        if let State::Pure(p) = tensor(&zero, &zero).unwrap() {
            assert_eq!(p.amplitudes()[0], c(1.0, 0.0));
            assert_eq!(p.dim(), 4);
        } else {
            panic!("expected pure");
        }
        // |1> (x) |0>: qubit 0 carries the 1 -> index 1
        if let State::Pure(p) = tensor(&one, &zero).unwrap() {
            assert_eq!(p.amplitudes()[1], c(1.0, 0.0));
            assert_eq!(p.amplitudes()[0], c(0.0, 0.0));
        } else {
            panic!("expected pure");
        }
    }

    #[test]
    fn tensor_then_partial_trace_recovers_factor() {
        let rho_a = PureState::from_unnormalized(vec![c(1.0, 0.0), c(2.0, 1.0)])
            .unwrap()
            .to_density()
            .unwrap();
        let rho_b = PureState::from_unnormalized(vec![c(0.5, -0.25), c(1.0, 0.0)])
            .unwrap()
            .to_density()
            .unwrap();
        let joint = tensor(&State::Mixed(rho_a.clone()), &State::Mixed(rho_b)).unwrap();
        let State::Mixed(joint) = joint else { panic!() };
        let reduced = partial_trace(&joint, &[1]).unwrap();
        assert!(reduced.max_abs_diff(&rho_a) < 1e-12);
    }

    #[test]
    fn apply_x_flips_basis_state() {
        let mut s = PureState::zero(1).unwrap();
        apply_to_pure(&mut s, gates::x().matrix(), &[0], &[]).unwrap();
        assert_eq!(s.amplitudes()[1], c(1.0, 0.0));
    }

    #[test]
    fn controlled_minus_i_y_acts_only_when_control_set() {
        // -iY = [[0,-1],[1,0]]
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        // control qubit 1 in |1>, target qubit 0 in |0>: index 2 -> target flips to |1> (index 3)
        let mut s = PureState::basis(2, 2).unwrap();
        apply_to_pure(&mut s, &m, &[0], &[(1, true)]).unwrap();
        assert!((s.amplitudes()[3] - c(1.0, 0.0)).norm() < 1e-12);
        // control clear: untouched
        let mut s0 = PureState::zero(2).unwrap();
        apply_to_pure(&mut s0, &m, &[0], &[(1, true)]).unwrap();
        assert!((s0.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn hadamards_build_uniform_superposition() {
        let mut s = PureState::zero(2).unwrap();
        let h = gates::h();
        apply_to_pure(&mut s, h.matrix(), &[0], &[]).unwrap();
        apply_to_pure(&mut s, h.matrix(), &[1], &[]).unwrap();
        for a in s.amplitudes() {
            assert!((a - c(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn bell_state_traces_to_maximally_mixed() {
        let rho = bell().to_density().unwrap();
        let reduced = partial_trace(&rho, &[1]).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!((reduced.matrix() - expect).map(|v| v.norm()).max() < 1e-12);
    }

    #[test]
    fn trace_keeps_original_qubit_order() {
        // |01>: qubit 0 = 1, qubit 1 = 0. Dropping qubit 1 leaves |1><1|.
        let rho = PureState::basis(2, 1).unwrap().to_density().unwrap();
        let reduced = partial_trace(&rho, &[1]).unwrap();
        assert!((reduced.matrix()[(1, 1)] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn trace_all_qubits_rejected() {
        let rho = DensityMatrix::zero(2).unwrap();
        assert!(partial_trace(&rho, &[0, 1]).is_err());
    }

    #[test]
    fn project_bell_on_zero() {
        let s = State::Pure(bell());
        let rec = project(&s, &[1], &[false]).unwrap();
        assert!((rec.probability - 0.5).abs() < 1e-12);
        let Some(State::Pure(post)) = rec.post_state else { panic!() };
        assert!((post.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn project_zero_probability_branch_has_no_post_state() {
        let s = State::Pure(PureState::basis(1, 1).unwrap());
        let rec = project(&s, &[0], &[false]).unwrap();
        assert_eq!(rec.probability, 0.0);
        assert!(rec.post_state.is_none());
    }

    #[test]
    fn projection_probabilities_sum_to_one() {
        let mut s = PureState::zero(3).unwrap();
        let h = gates::h();
        for q in 0..3 {
            apply_to_pure(&mut s, h.matrix(), &[q], &[]).unwrap();
        }
        apply_to_pure(&mut s, gates::phase(0.7).matrix(), &[1], &[(2, true)]).unwrap();
        let st = State::Pure(s);
        let mut total = 0.0;
        for bits in 0..4usize {
            let outcome = [(bits & 1) == 1, (bits & 2) == 2];
            total += project(&st, &[0, 2], &outcome).unwrap().probability;
        }
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fidelity_basics() {
        let psi = bell();
        let rho = psi.to_density().unwrap();
        assert!((fidelity_with_pure(&rho, &psi).unwrap() - 1.0).abs() < 1e-12);

        let zero = PureState::zero(1).unwrap();
        let one = PureState::basis(1, 1).unwrap();
        assert!(fidelity_with_pure(&one.to_density().unwrap(), &zero).unwrap() < 1e-12);

        let mixed = DensityMatrix::try_new(DMatrix::from_row_slice(
            2,
            2,
            &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        ))
        .unwrap();
        assert!((fidelity_with_pure(&mixed, &zero).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_two_routes_agree() {
        // quadratic form vs trace of rho * |psi><psi|
        let mut s = PureState::zero(2).unwrap();
        apply_to_pure(&mut s, gates::ry(0.93).matrix(), &[0], &[]).unwrap();
        apply_to_pure(&mut s, gates::h().matrix(), &[1], &[]).unwrap();
        apply_to_pure(&mut s, gates::x().matrix(), &[0], &[(1, true)]).unwrap();
        let rho = partial_trace(&s.to_density().unwrap(), &[1]).unwrap();
        let psi = PureState::from_unnormalized(vec![c(0.6, 0.1), c(0.2, -0.7)]).unwrap();
        let quad = fidelity_with_pure(&rho, &psi).unwrap();
        let v = DVector::from_column_slice(psi.amplitudes());
        let proj = &v * v.adjoint();
        let tr = (rho.matrix() * proj).trace();
        assert!((quad - tr.re).abs() < 1e-12);
        assert!(tr.im.abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_and_concentrated() {
        let rho = DensityMatrix::zero(1).unwrap();
        let counts = sample_counts(&rho, 100, 7);
        assert_eq!(counts.get("0"), Some(&100));

        let mixed = DensityMatrix::try_new(DMatrix::from_row_slice(
            2,
            2,
            &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        ))
        .unwrap();
        let a = sample_counts(&mixed, 8192, 42);
        let b = sample_counts(&mixed, 8192, 42);
        assert_eq!(a, b);
        // binomial 3-sigma window around 4096
        let sigma = (8192.0f64 * 0.25).sqrt();
        for key in ["0", "1"] {
            let n = *a.get(key).unwrap_or(&0) as f64;
            assert!((n - 4096.0).abs() <= 3.0 * sigma, "{key}: {n}");
        }
    }

    #[test]
    fn bitstring_prints_msb_first() {
        assert_eq!(format_bitstring(1, 2), "01");
        assert_eq!(format_bitstring(2, 2), "10");
    }

    #[test]
    fn capacity_errors_are_explicit() {
        assert!(matches!(PureState::zero(21), Err(Error::Capacity(_))));
        assert!(matches!(DensityMatrix::zero(13), Err(Error::Capacity(_))));
    }
}
