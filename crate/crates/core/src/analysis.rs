//! Closed-form predictions and resource formulas: activation angle, success
//! probability, fidelity predictions, iteration/depth counts and the
//! resource-comparison rows.

use serde::Serialize;
use std::fmt;

use crate::error::{Error, Result};
use crate::gates::GateCount;
use crate::state::DensityMatrix;

/// Perceptron activation angle q(theta) = arctan(tan^2 theta); the endpoints
/// +-pi/2 map to pi/2 by continuous extension.
pub fn q_activation(theta: f64) -> f64 {
    let t = theta.tan();
    let q = (t * t).atan();
    if q.is_nan() {
        std::f64::consts::FRAC_PI_2
    } else {
        q
    }
}

/// Success probability of the perceptron unit: cos^4 + sin^4, in [1/2, 1].
pub fn p_success(theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    s.powi(4) + c.powi(4)
}

/// Noiseless perceptron fidelity after `applications` total unit
/// applications with trailing reset: 1 - (1 - p)^T (1 - |<psi|psi'>|^2).
pub fn predicted_perceptron_fidelity(theta: f64, applications: u32, overlap_sq: f64) -> f64 {
    let p = p_success(theta);
    1.0 - (1.0 - p).powi(applications as i32) * (1.0 - overlap_sq)
}

/// Noiseless groundstate fidelity (1/N*) (1 - ((N - N*)/N)^T).
pub fn predicted_groundstate_fidelity(n_states: usize, n_star: usize, applications: u32) -> f64 {
    let j = (n_states - n_star) as f64 / n_states as f64;
    (1.0 - j.powi(applications as i32)) / n_star as f64
}

/// Iteration budget to reach failure weight eps with per-round success p0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterationCount {
    /// log(1/eps)/log(1/(1-p0)) - 1: extra applications beyond the first.
    pub extra_applications_real: f64,
    /// Smallest T >= 1 with (1-p0)^T <= eps: total unit applications.
    pub total_applications: u32,
}

pub fn iterations_for_epsilon(eps: f64, p0: f64) -> Result<IterationCount> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(Error::InvalidInput(format!("epsilon {eps} outside (0, 1)")));
    }
    if !(0.0..1.0).contains(&p0) || p0 == 0.0 {
        return Err(Error::InvalidInput(format!("p0 {p0} outside (0, 1)")));
    }
    let failure = 1.0 - p0;
    let real = (1.0 / eps).ln() / (1.0 / failure).ln() - 1.0;
    let mut total = ((eps.ln() / failure.ln()).ceil() as i64).max(1) as u32;
    // settle floating-point edges onto the defining inequality
    while failure.powi(total as i32) > eps {
        total += 1;
    }
    while total > 1 && failure.powi(total as i32 - 1) <= eps {
        total -= 1;
    }
    Ok(IterationCount { extra_applications_real: real, total_applications: total })
}

/// Nesting depth for fixed-point amplification.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AmplificationDepth {
    /// Smallest k >= 0 with (1-p)^(3^k) <= eps.
    pub k: u32,
    /// (loglog(1/eps) - loglog(1/(1-p))) / log 3.
    pub real_valued: f64,
}

pub fn oaa_depth(eps: f64, p: f64) -> Result<AmplificationDepth> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(Error::InvalidInput(format!("epsilon {eps} outside (0, 1)")));
    }
    if !(0.0..1.0).contains(&p) || p == 0.0 {
        return Err(Error::InvalidInput(format!("p {p} outside (0, 1)")));
    }
    let failure = 1.0 - p;
    let real = ((1.0 / eps).ln().ln() - (1.0 / failure).ln().ln()) / 3.0f64.ln();
    let mut k = 0u32;
    while failure.powf(3.0f64.powi(k as i32)) > eps {
        k += 1;
        if k > 60 {
            return Err(Error::InvalidInput("amplification depth search diverged".into()));
        }
    }
    Ok(AmplificationDepth { k, real_valued: real })
}

/// Closed form of the amplification gate-count recursion
/// Q(A_k) = (Q_U + Q_S) 3^k - Q_S, applied componentwise.
pub fn oaa_gate_count(q_u: GateCount, q_s: GateCount, k: u32) -> GateCount {
    let pow = 3u64.pow(k);
    GateCount {
        singles: (q_u.singles + q_s.singles) * pow - q_s.singles,
        cnots: (q_u.cnots + q_s.cnots) * pow - q_s.cnots,
    }
}

/// Gate count of the NOR construction: closed form mirroring the circuit
/// builder (X-conjugated copy for m = 1, Toffoli cascade for m >= 2, after
/// expansion to singles and C-NOTs).
pub fn nor_gate_count(m: usize) -> GateCount {
    if m == 1 {
        return GateCount { singles: 3, cnots: 1 };
    }
    let m = m as u64;
    GateCount {
        singles: 2 * m + 1 + 9 * (m - 1),
        cnots: 6 * (m - 1),
    }
}

/// Angle recovered from a single-qubit state prepared from |0>:
/// arcsin(sqrt(<1|rho|1>)).
pub fn estimate_q_angle(rho: &DensityMatrix) -> Result<f64> {
    if rho.n_qubits() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "angle estimate needs one qubit, got {}",
            rho.n_qubits()
        )));
    }
    Ok(rho.matrix()[(1, 1)].re.clamp(0.0, 1.0).sqrt().asin())
}

// ---------------------------------------------------------------------------
// Resource tables
// ---------------------------------------------------------------------------

/// Inputs for a resource-comparison row.
#[derive(Debug, Clone, Serialize)]
pub struct ResourceQuery {
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub p0: f64,
    /// Lower bound on the spectral gap.
    pub delta_gap: f64,
    /// Hamiltonian sparsity (operation count for one evolution step is
    /// assumed proportional to it).
    pub sparsity: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_u: Option<GateCount>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_w: Option<GateCount>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_s: Option<GateCount>,
}

impl ResourceQuery {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p0) || self.p0 == 0.0 {
            return Err(Error::InvalidInput(format!("p0 {} outside (0, 1]", self.p0)));
        }
        if !(0.0..1.0).contains(&self.epsilon) || self.epsilon == 0.0 {
            return Err(Error::InvalidInput(format!(
                "epsilon {} outside (0, 1)",
                self.epsilon
            )));
        }
        if self.delta_gap <= 0.0 {
            return Err(Error::InvalidInput("spectral gap bound must be > 0".into()));
        }
        if self.sparsity == 0 {
            return Err(Error::InvalidInput("sparsity must be >= 1".into()));
        }
        Ok(())
    }
}

/// One table cell: an exact number or a symbolic scaling expression with
/// leading constant 1.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Exact { value: f64 },
    Symbolic { asymptotic: String },
}

impl Cell {
    fn exact(value: f64) -> Self {
        Cell::Exact { value }
    }

    fn sym(expr: &str) -> Self {
        Cell::Symbolic { asymptotic: expr.to_string() }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Exact { value } => {
                if value.fract() == 0.0 && value.abs() < 1e15 {
                    write!(f, "{}", *value as i64)
                } else {
                    write!(f, "{value}")
                }
            }
            Cell::Symbolic { asymptotic } => write!(f, "{asymptotic}"),
        }
    }
}

/// Resource-comparison methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Postselect,
    Oaa,
    Thermalise,
    PeaPostselect,
    PeaThermalise,
    LcuThermalise,
    LcuOaa,
}

impl Method {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "postselect" => Ok(Method::Postselect),
            "oaa" => Ok(Method::Oaa),
            "thermalise" => Ok(Method::Thermalise),
            "pea-postselect" => Ok(Method::PeaPostselect),
            "pea-thermalise" => Ok(Method::PeaThermalise),
            "lcu-thermalise" => Ok(Method::LcuThermalise),
            "lcu-oaa" => Ok(Method::LcuOaa),
            other => Err(Error::InvalidInput(format!("unknown method '{other}'"))),
        }
    }

    pub fn all() -> [Method; 7] {
        [
            Method::Postselect,
            Method::Oaa,
            Method::Thermalise,
            Method::PeaPostselect,
            Method::PeaThermalise,
            Method::LcuThermalise,
            Method::LcuOaa,
        ]
    }
}

/// One row of the resource comparison: measurements, qubits and gates.
#[derive(Debug, Clone, Serialize)]
pub struct ResourceRow {
    pub method: Method,
    pub measurements: Cell,
    pub qubits: Cell,
    pub gates: Cell,
}

/// Evaluates one method's row. Cells are numeric where an exact formula
/// exists (expected measurements, iteration counts, amplification counts and
/// this crate's own qubit accounting) and symbolic otherwise.
pub fn resource_rows(query: &ResourceQuery, method: Method) -> Result<ResourceRow> {
    query.validate()?;
    let n = query.n as f64;
    let m = query.m as f64;
    let row = match method {
        Method::Postselect => ResourceRow {
            method,
            measurements: Cell::exact(1.0 / query.p0),
            qubits: Cell::exact(n + m),
            gates: match (&query.q_u, &query.q_w) {
                (Some(u), Some(w)) => Cell::exact((u.total() + w.total()) as f64),
                _ => Cell::sym("Q(U_{n+m}) + Q(W_n)"),
            },
        },
        Method::Oaa => {
            let depth = oaa_depth(query.epsilon, query.p0)?;
            ResourceRow {
                method,
                measurements: Cell::exact(0.0),
                qubits: Cell::sym("O(n + m)"),
                gates: match (&query.q_u, &query.q_s) {
                    (Some(u), Some(s)) => {
                        Cell::exact(oaa_gate_count(*u, *s, depth.k).total() as f64)
                    }
                    _ => Cell::sym("O(log(eps)/log(1-p0) * [m + Q(U_{n+m})])"),
                },
            }
        }
        Method::Thermalise => {
            let iters = iterations_for_epsilon(query.epsilon, query.p0)?;
            let per_iteration = 2 * query.m - 1;
            ResourceRow {
                method,
                measurements: Cell::exact(0.0),
                qubits: Cell::exact(
                    (query.n + iters.total_applications as usize * per_iteration) as f64,
                ),
                gates: Cell::sym("O(log(eps)/log(1-p0) * [m + Q(C-U_{n+m}) + Q(W_n)])"),
            }
        }
        Method::PeaPostselect => ResourceRow {
            method,
            measurements: Cell::sym("O(2^n)"),
            qubits: Cell::sym("O(n + log(1/Delta) + log(1/eps))"),
            gates: Cell::sym("O(2^(n/2) Delta^-1 eps^-1 d polylog(1/eps, 1/Delta))"),
        },
        Method::PeaThermalise => ResourceRow {
            method,
            measurements: Cell::exact(0.0),
            qubits: Cell::sym("O(2^n polylog(1/eps, 1/Delta))"),
            gates: Cell::sym("O(2^(3n/2) Delta^-1 eps^-1 d polylog(1/eps, 1/Delta))"),
        },
        Method::LcuThermalise => ResourceRow {
            method,
            measurements: Cell::exact(0.0),
            qubits: Cell::sym("O(2^(n/2) polylog(1/eps, 1/Delta))"),
            gates: Cell::sym("O(2^(n/2) Delta^-1 d polylog(1/eps, 1/Delta))"),
        },
        Method::LcuOaa => ResourceRow {
            method,
            measurements: Cell::exact(0.0),
            qubits: Cell::sym("O(n + log(1/Delta) + loglog(1/eps))"),
            gates: Cell::sym("O(2^(n/2) Delta^-1 d polylog(1/eps, 1/Delta))"),
        },
    };
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn activation_angle_values() {
        assert_eq!(q_activation(0.0), 0.0);
        assert!((q_activation(std::f64::consts::FRAC_PI_4) - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((q_activation(std::f64::consts::FRAC_PI_3) - 3.0f64.atan()).abs() < 1e-12);
        assert!((3.0f64.atan() - 1.249046).abs() < 1e-6);
        assert!((q_activation(std::f64::consts::FRAC_PI_2) - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn activation_angle_is_monotone_on_first_quadrant() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0 * std::f64::consts::FRAC_PI_2).collect();
        for w in grid.windows(2) {
            assert!(q_activation(w[1]) >= q_activation(w[0]) - 1e-15);
        }
        // even under theta -> -theta (odd symmetry composed with tan^2)
        assert!((q_activation(-0.7) - q_activation(0.7)).abs() < 1e-15);
    }

    #[test]
    fn success_probability_values_and_minimum() {
        assert_eq!(p_success(0.0), 1.0);
        assert!((p_success(std::f64::consts::FRAC_PI_4) - 0.5).abs() < 1e-12);
        let min = (0..=200)
            .map(|i| p_success(i as f64 / 200.0 * std::f64::consts::PI))
            .fold(f64::INFINITY, f64::min);
        assert!((min - 0.5).abs() < 1e-6);
    }

    #[test]
    fn perceptron_prediction_values() {
        let f = predicted_perceptron_fidelity(std::f64::consts::FRAC_PI_4, 2, 0.5);
        assert!((f - 0.875).abs() < 1e-12);
        assert_eq!(predicted_perceptron_fidelity(0.3, 7, 1.0), 1.0);
        assert_eq!(predicted_perceptron_fidelity(0.0, 3, 0.2), 1.0);
    }

    #[test]
    fn groundstate_prediction_values() {
        assert!((predicted_groundstate_fidelity(2, 1, 1) - 0.5).abs() < 1e-12);
        assert!((predicted_groundstate_fidelity(4, 4, 9) - 0.25).abs() < 1e-12);
        assert!((predicted_groundstate_fidelity(4, 1, 5) - (1.0 - 0.75f64.powi(5))).abs() < 1e-12);
        assert!((predicted_groundstate_fidelity(4, 1, 5) - 0.762695).abs() < 1e-6);
    }

    #[test]
    fn iteration_count_worked_values() {
        let it = iterations_for_epsilon(1e-3, 0.5).unwrap();
        assert!((it.extra_applications_real - 8.9658).abs() < 1e-3);
        assert_eq!(it.total_applications, 10);

        let half = iterations_for_epsilon(0.5, 0.5).unwrap();
        assert!(half.extra_applications_real.abs() < 1e-12);
        assert_eq!(half.total_applications, 1);

        // p0 -> 1 drives the budget to zero
        let near_one = iterations_for_epsilon(0.01, 0.999999).unwrap();
        assert!(near_one.extra_applications_real < 1e-3);
    }

    #[test]
    fn iteration_count_satisfies_defining_inequality() {
        for &(eps, p0) in &[(1e-3, 0.5), (0.2, 0.3), (1e-6, 0.9), (0.49, 0.77), (1e-2, 0.05)] {
            let it = iterations_for_epsilon(eps, p0).unwrap();
            let t = it.total_applications;
            let fail = 1.0 - p0;
            assert!(fail.powi(t as i32) <= eps, "eps={eps} p0={p0} T={t}");
            if t > 1 {
                assert!(fail.powi(t as i32 - 1) > eps, "eps={eps} p0={p0} T={t}");
            }
        }
    }

    #[test]
    fn amplification_depth_worked_values() {
        let d = oaa_depth(1e-3, 0.5).unwrap();
        assert_eq!(d.k, 3);
        assert!((d.real_valued - 2.093).abs() < 1e-3);
        assert_eq!(oaa_depth(0.6, 0.5).unwrap().k, 0);
    }

    #[test]
    fn amplification_count_recursion() {
        let q_u = GateCount { singles: 8, cnots: 2 };
        let q_s = GateCount { singles: 3, cnots: 1 };
        assert_eq!(oaa_gate_count(q_u, q_s, 0), q_u);
        let direct = oaa_gate_count(q_u, q_s, 2);
        assert_eq!(direct.total(), (10 + 4) * 9 - 4);
        for k in 1..=6 {
            let prev = oaa_gate_count(q_u, q_s, k - 1);
            let next = oaa_gate_count(q_u, q_s, k);
            assert_eq!(next.singles, 3 * prev.singles + 2 * q_s.singles);
            assert_eq!(next.cnots, 3 * prev.cnots + 2 * q_s.cnots);
        }
        let spec = oaa_gate_count(
            GateCount { singles: 10, cnots: 0 },
            GateCount { singles: 4, cnots: 0 },
            2,
        );
        assert_eq!(spec.total(), 122);
    }

    #[test]
    fn angle_estimate_values() {
        let mixed = DensityMatrix::try_new(nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[
                num_complex::Complex64::new(0.5, 0.0),
                num_complex::Complex64::new(0.0, 0.0),
                num_complex::Complex64::new(0.0, 0.0),
                num_complex::Complex64::new(0.5, 0.0),
            ],
        ))
        .unwrap();
        assert!((estimate_q_angle(&mixed).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    fn base_query() -> ResourceQuery {
        ResourceQuery {
            n: 1,
            m: 1,
            epsilon: 1e-3,
            p0: 0.5,
            delta_gap: 0.1,
            sparsity: 2,
            q_u: None,
            q_w: None,
            q_s: None,
        }
    }

    #[test]
    fn postselect_measurement_expectation() {
        let row = resource_rows(&base_query(), Method::Postselect).unwrap();
        match row.measurements {
            Cell::Exact { value } => assert!((value - 2.0).abs() < 1e-12),
            _ => panic!("expected exact cell"),
        }
    }

    #[test]
    fn thermalise_qubit_accounting() {
        let row = resource_rows(&base_query(), Method::Thermalise).unwrap();
        match row.qubits {
            Cell::Exact { value } => assert!((value - 11.0).abs() < 1e-12),
            _ => panic!("expected exact cell"),
        }
    }

    #[test]
    fn lcu_oaa_gates_are_symbolic() {
        let row = resource_rows(&base_query(), Method::LcuOaa).unwrap();
        match row.gates {
            Cell::Symbolic { asymptotic } => {
                assert!(asymptotic.contains("2^(n/2)") && asymptotic.contains("Delta^-1"))
            }
            _ => panic!("expected symbolic cell"),
        }
    }

    #[test]
    fn rejects_invalid_queries() {
        let mut q = base_query();
        q.p0 = 0.0;
        assert!(resource_rows(&q, Method::Postselect).is_err());
        let mut q = base_query();
        q.epsilon = 1.0;
        assert!(resource_rows(&q, Method::Oaa).is_err());
    }
}
