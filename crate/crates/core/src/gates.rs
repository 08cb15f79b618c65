//! Gate library, inverse QFT, Hamiltonian exponentiation, trotterisation and
//! gate counting.
//!
//! Every constructor checks unitarity to 1e-10. The class tag drives both
//! noise durations and gate counting; composite gates must have a registered
//! decomposition before they can be counted or executed with noise (see
//! `decompose`).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_3, PI};
use std::ops::{Add, AddAssign};

use crate::circuits::Circuit;
use crate::decompose;
use crate::error::{Error, Result};
use crate::hamiltonians::Hamiltonian;

/// Unitarity tolerance for gate constructors.
pub const GATE_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Timing/counting class of a gate application.
///
/// `U1` are virtual phase rotations, `U2` single-pulse rotations (Hadamard),
/// `U3` generic single-qubit rotations. `CA`/`CCA` tag singly- and
/// doubly-controlled evolution monoliths which keep custom noise durations
/// instead of being decomposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateClass {
    U1,
    U2,
    U3,
    Cnot,
    CA,
    CCA,
    Composite,
}

/// Structural identity used by the decomposition registry.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    /// Arbitrary single-qubit unitary.
    Single,
    /// Pauli X; controlled forms are CNOT / Toffoli.
    PauliX,
    /// Library 4x4 CNOT matrix; targets[0] is the control.
    CnotMatrix,
    /// Library 8x8 Toffoli matrix; targets[0..2] are the controls.
    CcxMatrix,
    /// Two-qubit swap.
    Swap,
    /// Forward quantum Fourier transform.
    Qft,
    /// Inverse quantum Fourier transform.
    InverseQft,
    /// I - (1 - e^{i phi})|0..0><0..0| on all targets.
    AncillaShift(f64),
    /// Evolution monolith (controlled powers of exp(-iH tau)); kept whole.
    Evolution,
    /// Eigenbasis scrambler monolith; kept whole.
    Scrambler,
    /// No registered structure.
    Opaque,
}

/// A unitary gate with label, class and structural kind.
#[derive(Debug, Clone)]
pub struct Gate {
    label: String,
    matrix: DMatrix<Complex64>,
    arity: usize,
    class: GateClass,
    kind: GateKind,
}

impl Gate {
    /// Validates squareness, power-of-two dimension and unitarity.
    pub fn new(
        label: impl Into<String>,
        matrix: DMatrix<Complex64>,
        class: GateClass,
        kind: GateKind,
    ) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::DimensionMismatch(format!(
                "gate matrix {}x{} is not a square power-of-two matrix",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let err = (matrix.adjoint() * &matrix - DMatrix::identity(dim, dim))
            .map(|v| v.norm())
            .max();
        if err > GATE_TOL {
            return Err(Error::InvalidInput(format!(
                "gate '{}' deviates from unitary by {err:e}",
                label.into()
            )));
        }
        Ok(Self {
            label: label.into(),
            arity: dim.trailing_zeros() as usize,
            matrix,
            class,
            kind,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn class(&self) -> GateClass {
        self.class
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    /// The adjoint gate.
    pub fn dagger(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::Qft => GateKind::InverseQft,
            GateKind::InverseQft => GateKind::Qft,
            GateKind::AncillaShift(phi) => GateKind::AncillaShift(-phi),
            other => other.clone(),
        };
        Gate {
            label: format!("{}†", self.label),
            matrix: self.matrix.adjoint(),
            arity: self.arity,
            class: self.class,
            kind,
        }
    }
}

/// Single-qubit and C-NOT totals of a counted circuit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCount {
    pub singles: u64,
    pub cnots: u64,
}

impl GateCount {
    pub fn total(&self) -> u64 {
        self.singles + self.cnots
    }
}

impl Add for GateCount {
    type Output = GateCount;
    fn add(self, rhs: GateCount) -> GateCount {
        GateCount {
            singles: self.singles + rhs.singles,
            cnots: self.cnots + rhs.cnots,
        }
    }
}

impl AddAssign for GateCount {
    fn add_assign(&mut self, rhs: GateCount) {
        self.singles += rhs.singles;
        self.cnots += rhs.cnots;
    }
}

// ---------------------------------------------------------------------------
// Standard gate library
// ---------------------------------------------------------------------------

pub fn identity() -> Gate {
    Gate::new("i", DMatrix::identity(2, 2), GateClass::U1, GateKind::Single).unwrap()
}

pub fn x() -> Gate {
    let m = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
    Gate::new("x", m, GateClass::U3, GateKind::PauliX).unwrap()
}

pub fn y() -> Gate {
    let m = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
    Gate::new("y", m, GateClass::U3, GateKind::Single).unwrap()
}

pub fn z() -> Gate {
    let m = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
    Gate::new("z", m, GateClass::U1, GateKind::Single).unwrap()
}

pub fn h() -> Gate {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = DMatrix::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]);
    Gate::new("h", m, GateClass::U2, GateKind::Single).unwrap()
}

/// Rotation about Y: Ry(phi) = exp(-i phi Y / 2).
pub fn ry(phi: f64) -> Gate {
    let (s, co) = (phi / 2.0).sin_cos();
    let m = DMatrix::from_row_slice(2, 2, &[c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.)]);
    Gate::new(format!("ry({phi:.6})"), m, GateClass::U3, GateKind::Single).unwrap()
}

/// Rotation about Z: Rz(lambda) = diag(e^{-i lambda/2}, e^{i lambda/2}).
pub fn rz(lambda: f64) -> Gate {
    let e = Complex64::from_polar(1.0, lambda / 2.0);
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![e.conj(), e]));
    Gate::new(format!("rz({lambda:.6})"), m, GateClass::U1, GateKind::Single).unwrap()
}

/// Phase gate diag(1, e^{i lambda}).
pub fn phase(lambda: f64) -> Gate {
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        c(1., 0.),
        Complex64::from_polar(1.0, lambda),
    ]));
    Gate::new(format!("phase({lambda:.6})"), m, GateClass::U1, GateKind::Single).unwrap()
}

/// Library CNOT; targets[0] is the control when placed in a circuit.
pub fn cnot() -> Gate {
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = c(1., 0.);
    m[(2, 2)] = c(1., 0.);
    m[(1, 3)] = c(1., 0.);
    m[(3, 1)] = c(1., 0.);
    Gate::new("cnot", m, GateClass::Cnot, GateKind::CnotMatrix).unwrap()
}

/// Library Toffoli; targets[0..2] are the controls.
pub fn toffoli() -> Gate {
    let mut m = DMatrix::identity(8, 8);
    m[(3, 3)] = c(0., 0.);
    m[(7, 7)] = c(0., 0.);
    m[(3, 7)] = c(1., 0.);
    m[(7, 3)] = c(1., 0.);
    Gate::new("ccx", m, GateClass::Composite, GateKind::CcxMatrix).unwrap()
}

pub fn swap() -> Gate {
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = c(1., 0.);
    m[(3, 3)] = c(1., 0.);
    m[(1, 2)] = c(1., 0.);
    m[(2, 1)] = c(1., 0.);
    Gate::new("swap", m, GateClass::Composite, GateKind::Swap).unwrap()
}

/// Ancilla phase shift I - (1 - e^{i phi})|0..0><0..0| on `m` qubits.
///
/// Adds the phase e^{i phi} exactly on the all-zeros ancilla pattern.
pub fn ancilla_shift(m: usize, phi: f64) -> Result<Gate> {
    if m == 0 {
        return Err(Error::InvalidInput("ancilla shift needs at least one qubit".into()));
    }
    let dim = 1usize << m;
    let mut mat = DMatrix::identity(dim, dim);
    mat[(0, 0)] = Complex64::from_polar(1.0, phi);
    let class = if m == 1 { GateClass::U1 } else { GateClass::Composite };
    Gate::new(format!("s{m}({phi:.6})"), mat, class, GateKind::AncillaShift(phi))
}

/// The pi/3 ancilla phase shift used by fixed-point amplitude amplification.
pub fn s_pi3(m: usize) -> Result<Gate> {
    ancilla_shift(m, FRAC_PI_3)
}

/// Looks a gate up by name; rotation gates take one parameter, `s_pi3` takes
/// the ancilla count.
pub fn standard_gate(name: &str, params: &[f64]) -> Result<Gate> {
    let want = |k: usize| -> Result<()> {
        if params.len() != k {
            Err(Error::InvalidInput(format!(
                "gate '{name}' takes {k} parameter(s), got {}",
                params.len()
            )))
        } else {
            Ok(())
        }
    };
    match name.to_ascii_lowercase().as_str() {
        "i" | "id" => want(0).map(|_| identity()),
        "x" => want(0).map(|_| x()),
        "y" => want(0).map(|_| y()),
        "z" => want(0).map(|_| z()),
        "h" => want(0).map(|_| h()),
        "ry" => want(1).map(|_| ry(params[0])),
        "rz" => want(1).map(|_| rz(params[0])),
        "phase" | "p" => want(1).map(|_| phase(params[0])),
        "cnot" | "cx" => want(0).map(|_| cnot()),
        "ccx" | "toffoli" => want(0).map(|_| toffoli()),
        "s_pi3" => {
            want(1)?;
            s_pi3(params[0] as usize)
        }
        other => Err(Error::InvalidInput(format!("unknown gate name '{other}'"))),
    }
}

// ---------------------------------------------------------------------------
// QFT
// ---------------------------------------------------------------------------

fn qft_matrix(m: usize, sign: f64) -> DMatrix<Complex64> {
    let dim = 1usize << m;
    let norm = 1.0 / (dim as f64).sqrt();
    DMatrix::from_fn(dim, dim, |k, j| {
        Complex64::from_polar(norm, sign * 2.0 * PI * (j as f64) * (k as f64) / dim as f64)
    })
}

/// Forward QFT on `m` qubits: |j> -> sum_k e^{2 pi i jk / 2^m} |k> / sqrt(2^m).
pub fn qft(m: usize) -> Result<Gate> {
    if m == 0 || m > 10 {
        return Err(Error::InvalidInput(format!("qft size {m} outside 1..=10")));
    }
    Gate::new(format!("qft{m}"), qft_matrix(m, 1.0), GateClass::Composite, GateKind::Qft)
}

/// Inverse QFT on `m` qubits; for m = 1 this is the Hadamard.
pub fn inverse_qft(m: usize) -> Result<Gate> {
    if m == 0 || m > 10 {
        return Err(Error::InvalidInput(format!("qft size {m} outside 1..=10")));
    }
    Gate::new(
        format!("iqft{m}"),
        qft_matrix(m, -1.0),
        GateClass::Composite,
        GateKind::InverseQft,
    )
}

// ---------------------------------------------------------------------------
// Hamiltonian evolution and trotterisation
// ---------------------------------------------------------------------------

/// exp(-i H tau) through the Hamiltonian's cached eigensystem.
pub fn hamiltonian_evolution(hamiltonian: &Hamiltonian, tau: f64) -> Gate {
    hamiltonian.evolution(tau)
}

/// Pauli axis labels for Hamiltonian term strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    fn matrix(self) -> DMatrix<Complex64> {
        match self {
            PauliAxis::I => DMatrix::identity(2, 2),
            PauliAxis::X => x().matrix.clone(),
            PauliAxis::Y => y().matrix.clone(),
            PauliAxis::Z => z().matrix.clone(),
        }
    }
}

/// One weighted Pauli string h * sigma^a_1 (x) ... (x) sigma^a_n.
#[derive(Debug, Clone)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub axes: Vec<PauliAxis>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, axes: Vec<PauliAxis>) -> Self {
        Self { coefficient, axes }
    }

    /// Dense matrix of the Pauli string; axis 0 acts on qubit 0 (low bit).
    pub fn string_matrix(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::identity(1, 1);
        for axis in self.axes.iter().rev() {
            m = m.kronecker(&axis.matrix());
        }
        m
    }

    /// Dense n-qubit matrix h * sigma.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        self.string_matrix() * c(self.coefficient, 0.0)
    }
}

fn matrix_power(m: &DMatrix<Complex64>, mut e: u64) -> DMatrix<Complex64> {
    let mut result = DMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    result
}

/// First-order product formula (prod_a exp(-i h_a sigma^a tau/steps))^steps.
///
/// Factors multiply in term order; each factor is exact since Pauli strings
/// square to the identity: exp(-i a P) = cos(a) I - i sin(a) P.
pub fn trotterize(terms: &[PauliTerm], tau: f64, steps: u32) -> Result<Gate> {
    if steps == 0 {
        return Err(Error::InvalidInput("trotter steps must be >= 1".into()));
    }
    if terms.is_empty() {
        return Err(Error::InvalidInput("trotterize needs at least one term".into()));
    }
    let n = terms[0].axes.len();
    if terms.iter().any(|t| t.axes.len() != n) {
        return Err(Error::InvalidInput("pauli strings have mismatched lengths".into()));
    }
    let dim = 1usize << n;
    let mut step = DMatrix::identity(dim, dim);
    for term in terms {
        let a = term.coefficient * tau / steps as f64;
        let p = term.string_matrix();
        let factor = DMatrix::identity(dim, dim) * c(a.cos(), 0.0) + p * c(0.0, -a.sin());
        step = step * factor;
    }
    let total = matrix_power(&step, steps as u64);
    Gate::new(
        format!("trotter({} terms, steps={steps})", terms.len()),
        total,
        GateClass::Composite,
        GateKind::Opaque,
    )
}

/// A^{2^j} by repeated squaring, tagged as an evolution monolith so that a
/// circuit placement with one control is a C-A-class op.
pub fn controlled_power(a: &Gate, j: u32) -> Result<Gate> {
    let mut m = a.matrix.clone();
    for _ in 0..j {
        m = &m * &m;
    }
    Gate::new(
        format!("{}^(2^{j})", a.label),
        m,
        GateClass::CA,
        GateKind::Evolution,
    )
}

/// Counts single-qubit and C-NOT gates of a circuit after expanding every
/// op through the decomposition registry.
pub fn count_gates(circuit: &Circuit) -> Result<GateCount> {
    decompose::count_circuit(circuit)
}

// ---------------------------------------------------------------------------
// 2x2 decomposition helpers used by the registry
// ---------------------------------------------------------------------------

/// ZYZ angles (alpha, beta, gamma, delta) with
/// U = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta).
///
/// Plane rotations come out with beta = delta = 0 and signed gamma, so a
/// controlled Ry(phi) and its adjoint expand to the same four-op shape for
/// every phi (including +-pi, which the generic branch cannot reach without
/// extra Rz ops).
pub(crate) fn zyz_angles(u: &DMatrix<Complex64>) -> (f64, f64, f64, f64) {
    debug_assert_eq!(u.nrows(), 2);
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let alpha = det.arg() / 2.0;
    let su = u * Complex64::from_polar(1.0, -alpha);
    const EPS: f64 = 1e-12;
    let real = su.iter().all(|v| v.im.abs() < EPS);
    if real && (su[(0, 0)] - su[(1, 1)]).norm() < EPS && (su[(0, 1)] + su[(1, 0)]).norm() < EPS {
        let gamma = 2.0 * su[(1, 0)].re.atan2(su[(0, 0)].re);
        return (alpha, 0.0, gamma, 0.0);
    }
    let gamma = 2.0 * su[(1, 0)].norm().atan2(su[(0, 0)].norm());
    let sum_half = if su[(1, 1)].norm() > EPS { su[(1, 1)].arg() } else { 0.0 };
    let diff_half = if su[(1, 0)].norm() > EPS { su[(1, 0)].arg() } else { 0.0 };
    (alpha, sum_half + diff_half, gamma, sum_half - diff_half)
}

/// Principal square root of a 2x2 unitary via its spectral decomposition.
pub(crate) fn unitary_sqrt_2x2(u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    debug_assert_eq!(u.nrows(), 2);
    let off = u[(0, 1)].norm() + u[(1, 0)].norm();
    if off < 1e-14 {
        return DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::from_polar(1.0, u[(0, 0)].arg() / 2.0),
            Complex64::from_polar(1.0, u[(1, 1)].arg() / 2.0),
        ]));
    }
    let tr = u[(0, 0)] + u[(1, 1)];
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let disc = (tr * tr - det * c(4.0, 0.0)).sqrt();
    let l1 = (tr + disc) / c(2.0, 0.0);
    let l2 = (tr - disc) / c(2.0, 0.0);
    // eigenvector for l1; u is normal so the complement is the other one
    let v1 = if u[(0, 1)].norm() > 1e-14 {
        nalgebra::DVector::from_vec(vec![u[(0, 1)], l1 - u[(0, 0)]])
    } else {
        nalgebra::DVector::from_vec(vec![l1 - u[(1, 1)], u[(1, 0)]])
    };
    let v1 = &v1 / c(v1.norm(), 0.0);
    let v2 = nalgebra::DVector::from_vec(vec![-v1[1].conj(), v1[0].conj()]);
    let w = DMatrix::from_fn(2, 2, |i, j| if j == 0 { v1[i] } else { v2[i] });
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::from_polar(1.0, l1.arg() / 2.0),
        Complex64::from_polar(1.0, l2.arg() / 2.0),
    ]));
    &w * d * w.adjoint()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::state::{apply_to_pure, PureState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ry_half_pi_builds_plus_state() {
        let mut s = PureState::zero(1).unwrap();
        apply_to_pure(&mut s, ry(std::f64::consts::FRAC_PI_2).matrix(), &[0], &[]).unwrap();
        let a = s.amplitudes();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a[0].re - r).abs() < 1e-12 && (a[1].re - r).abs() < 1e-12);
    }

    #[test]
    fn ry_composes_to_identity() {
        let g = ry(0.77).matrix() * ry(-0.77).matrix();
        assert!((g - DMatrix::identity(2, 2)).map(|v| v.norm()).max() < 1e-12);
    }

    #[test]
    fn ancilla_shift_phases_only_all_zeros() {
        let g = s_pi3(2).unwrap();
        let m = g.matrix();
        let expect = Complex64::from_polar(1.0, FRAC_PI_3);
        assert!((m[(0, 0)] - expect).norm() < 1e-12);
        for k in 1..4 {
            assert!((m[(k, k)] - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn unknown_gate_name_is_rejected() {
        assert!(standard_gate("frobnicate", &[]).is_err());
    }

    #[test]
    fn inverse_qft_of_one_qubit_is_hadamard() {
        let g = inverse_qft(1).unwrap();
        assert!((g.matrix() - h().matrix()).map(|v| v.norm()).max() < 1e-12);
    }

    #[test]
    fn qft_inverse_cancels() {
        for m in 1..=4 {
            let prod = inverse_qft(m).unwrap().matrix() * qft(m).unwrap().matrix();
            let dim = 1 << m;
            assert!(
                (prod - DMatrix::identity(dim, dim)).map(|v| v.norm()).max() < 1e-10,
                "m = {m}"
            );
        }
    }

    #[test]
    fn inverse_qft_decodes_exact_phase() {
        // phase state for theta = 3/4 on two qubits maps to |j = 3>
        let m = 2;
        let dim = 1usize << m;
        let theta = 0.75;
        let amps: Vec<Complex64> = (0..dim)
            .map(|k| Complex64::from_polar(0.5, 2.0 * PI * theta * k as f64))
            .collect();
        let mut s = PureState::from_amplitudes(amps).unwrap();
        apply_to_pure(&mut s, inverse_qft(m).unwrap().matrix(), &[0, 1], &[]).unwrap();
        assert!((s.amplitudes()[3].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_qft_decodes_every_grid_phase() {
        for m in 1..=5usize {
            let dim = 1usize << m;
            for j in 0..dim {
                let theta = j as f64 / dim as f64;
                let amps: Vec<Complex64> = (0..dim)
                    .map(|k| {
                        Complex64::from_polar(1.0 / (dim as f64).sqrt(), 2.0 * PI * theta * k as f64)
                    })
                    .collect();
                let mut s = PureState::from_amplitudes(amps).unwrap();
                let targets: Vec<usize> = (0..m).collect();
                apply_to_pure(&mut s, inverse_qft(m).unwrap().matrix(), &targets, &[]).unwrap();
                assert!(
                    (s.amplitudes()[j].norm() - 1.0).abs() < 1e-10,
                    "m={m} j={j}"
                );
            }
        }
    }

    #[test]
    fn single_term_trotter_is_exact() {
        let term = PauliTerm::new(0.7, vec![PauliAxis::Z, PauliAxis::X]);
        let g1 = trotterize(std::slice::from_ref(&term), 0.31, 1).unwrap();
        let g9 = trotterize(std::slice::from_ref(&term), 0.31, 9).unwrap();
        assert!((g1.matrix() - g9.matrix()).map(|v| v.norm()).max() < 1e-12);
    }

    #[test]
    fn commuting_terms_split_exactly() {
        let t1 = PauliTerm::new(0.4, vec![PauliAxis::Z, PauliAxis::I]);
        let t2 = PauliTerm::new(-0.9, vec![PauliAxis::I, PauliAxis::Z]);
        let joint = trotterize(&[t1.clone(), t2.clone()], 0.5, 1).unwrap();
        let many = trotterize(&[t1, t2], 0.5, 7).unwrap();
        assert!((joint.matrix() - many.matrix()).map(|v| v.norm()).max() < 1e-12);
    }

    #[test]
    fn first_order_error_shrinks_linearly_in_steps() {
        // H = X + Z, tau = 0.1: ten times more steps, about ten times less error
        let terms = vec![
            PauliTerm::new(1.0, vec![PauliAxis::X]),
            PauliTerm::new(1.0, vec![PauliAxis::Z]),
        ];
        let tau = 0.1;
        let exact = {
            let hmat = terms[0].matrix() + terms[1].matrix();
            let eig = hmat.clone().symmetric_eigen();
            let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * tau)));
            &eig.eigenvectors * d * eig.eigenvectors.adjoint()
        };
        let err = |steps: u32| {
            (trotterize(&terms, tau, steps).unwrap().matrix() - &exact)
                .map(|v| v.norm())
                .max()
        };
        let ratio = err(1) / err(10);
        assert!((8.0..=12.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn trotter_error_monotone_on_random_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let axes = [PauliAxis::I, PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
        for _ in 0..5 {
            let terms: Vec<PauliTerm> = (0..3)
                .map(|_| {
                    PauliTerm::new(
                        rng.random_range(-1.0..1.0),
                        vec![axes[rng.random_range(0..4)], axes[rng.random_range(0..4)]],
                    )
                })
                .collect();
            let hmat = terms.iter().map(|t| t.matrix()).fold(
                DMatrix::<Complex64>::zeros(4, 4),
                |a, b| a + b,
            );
            let tau = 0.3;
            let eig = hmat.clone().symmetric_eigen();
            let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * tau)));
            let exact = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
            let errs: Vec<f64> = [1u32, 2, 4, 8]
                .iter()
                .map(|&s| {
                    (trotterize(&terms, tau, s).unwrap().matrix() - &exact)
                        .map(|v| v.norm())
                        .max()
                })
                .collect();
            for w in errs.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "errors not monotone: {errs:?}");
            }
        }
    }

    #[test]
    fn controlled_power_squares_diagonal_phases() {
        let a = Gate::new(
            "a",
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1., 0.), c(0., -1.)])),
            GateClass::CA,
            GateKind::Evolution,
        )
        .unwrap();
        let a2 = controlled_power(&a, 1).unwrap();
        assert!((a2.matrix()[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-12);
        let a1 = controlled_power(&a, 0).unwrap();
        assert!((a1.matrix() - a.matrix()).map(|v| v.norm()).max() < 1e-14);
    }

    #[test]
    fn zyz_reconstructs_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let u = random_unitary(&mut rng);
            let (alpha, beta, gamma, delta) = zyz_angles(&u);
            let rec = rz(beta).matrix() * ry(gamma).matrix() * rz(delta).matrix()
                * Complex64::from_polar(1.0, alpha);
            assert!((&rec - &u).map(|v| v.norm()).max() < 1e-10);
        }
    }

    #[test]
    fn unitary_sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let u = random_unitary(&mut rng);
            let v = unitary_sqrt_2x2(&u);
            assert!((&v * &v - &u).map(|x| x.norm()).max() < 1e-10);
        }
    }

    pub(crate) fn random_unitary(rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        // random ZYZ + phase
        let a: f64 = rng.random_range(-PI..PI);
        let b: f64 = rng.random_range(-PI..PI);
        let g: f64 = rng.random_range(0.0..PI);
        let d: f64 = rng.random_range(-PI..PI);
        rz(b).matrix() * ry(g).matrix() * rz(d).matrix() * Complex64::from_polar(1.0, a)
    }
}
