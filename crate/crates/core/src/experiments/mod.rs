//! Reproducible experiment runners behind the CLI: perceptron sweeps,
//! groundstate runs, amplification comparisons, the scrambling Monte Carlo,
//! resource tables and the preactivation helper.
//!
//! Every runner is deterministic per (config, seed); sweep points derive
//! their own seeds from the run seed and a stable hash of the grid point, so
//! parallel execution cannot change results.

pub mod output;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

use crate::analysis::{self, Method, ResourceQuery, ResourceRow};
use crate::circuits::{
    self, oaa_report, simulate_groundstate_thermalise, simulate_perceptron_thermalise,
    ScramblingMode, ThermaliseConfig,
};
use crate::error::{Error, Result};
use crate::gates::GateCount;
use crate::hamiltonians::Hamiltonian;
use crate::noise::NoiseProfile;
use crate::state::{sample_counts, PureState};

pub const SCHEMA_VERSION: u32 = 1;

/// FNV-1a over the run seed and grid-point coordinates.
fn point_seed(seed: u64, theta_bits: u64, index: u64) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for chunk in [seed, theta_bits, index] {
        for byte in chunk.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

/// One sweep entry: the perceptron carries theta and an angle estimate,
/// groundstate runs just the application count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(rename = "T")]
    pub applications: u32,
    pub fidelity_sim: f64,
    pub fidelity_pred: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_estimate: Option<f64>,
    /// Binomial standard error of the excited-population estimate
    /// (shots mode only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binomial_sigma: Option<f64>,
}

/// Gate totals with the redundant sum written out for direct plotting.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GateTotals {
    pub singles: u64,
    pub cnots: u64,
    pub total: u64,
}

impl From<GateCount> for GateTotals {
    fn from(c: GateCount) -> Self {
        Self { singles: c.singles, cnots: c.cnots, total: c.total() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ResourceCounts {
    pub qubits_allocated: usize,
    pub qubits_peak: usize,
    pub measurements: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ops_by_class: Option<BTreeMap<String, u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gates: Option<GateTotals>,
}

/// Canonical experiment output: JSON schema
/// {schema_version, experiment, config, seed, series[], counts{}}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub schema_version: u32,
    pub experiment: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub series: Vec<SeriesEntry>,
    pub counts: ResourceCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    pub wall_time_ms: f64,
}

// ---------------------------------------------------------------------------
// Perceptron sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerceptronMode {
    Exact,
    Shots,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerceptronArgs {
    pub thetas: Vec<f64>,
    pub iterations: u32,
    pub mode: PerceptronMode,
    pub shots: u64,
    pub trailing_reset: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseProfile>,
    pub seed: u64,
}

pub fn run_perceptron(args: &PerceptronArgs) -> Result<RunResult> {
    if args.thetas.is_empty() {
        return Err(Error::InvalidInput("theta grid is empty".into()));
    }
    if args.mode == PerceptronMode::Shots && args.shots == 0 {
        return Err(Error::InvalidInput("shots must be >= 1".into()));
    }
    let start = Instant::now();
    let input = PureState::zero(1)?;

    let per_theta: Vec<Result<(Vec<SeriesEntry>, circuits::ThermaliseRun)>> = args
        .thetas
        .par_iter()
        .map(|&theta| {
            let config = ThermaliseConfig::new(args.iterations)?
                .with_trailing_reset(args.trailing_reset);
            let run = simulate_perceptron_thermalise(theta, &config, &input, args.noise.as_ref())?;
            let mut entries = Vec::with_capacity(run.series.len());
            for (point, (t, rho)) in run.series.iter().zip(&run.target_states) {
                let entry = match args.mode {
                    PerceptronMode::Exact => SeriesEntry {
                        theta: Some(theta),
                        applications: point.applications,
                        fidelity_sim: point.fidelity_sim,
                        fidelity_pred: point.fidelity_pred,
                        q_estimate: point.q_estimate,
                        binomial_sigma: None,
                    },
                    PerceptronMode::Shots => {
                        let seed = point_seed(args.seed, theta.to_bits(), *t as u64);
                        let counts = sample_counts(rho, args.shots, seed);
                        let ones = *counts.get("1").unwrap_or(&0) as f64;
                        let p1 = ones / args.shots as f64;
                        let sigma = (p1 * (1.0 - p1) / args.shots as f64).sqrt();
                        // the output is a mixture of the rotated and reset
                        // states, so F = cos^2(q) + p1 identifies fidelity
                        // from the excited population alone
                        let q = analysis::q_activation(theta);
                        SeriesEntry {
                            theta: Some(theta),
                            applications: point.applications,
                            fidelity_sim: (q.cos().powi(2) + p1).min(1.0),
                            fidelity_pred: point.fidelity_pred,
                            q_estimate: Some(p1.sqrt().asin()),
                            binomial_sigma: Some(sigma),
                        }
                    }
                };
                entries.push(entry);
            }
            Ok((entries, run))
        })
        .collect();

    let mut series = Vec::new();
    let mut counts = ResourceCounts::default();
    for item in per_theta {
        let (entries, run) = item?;
        series.extend(entries);
        counts.qubits_allocated = counts.qubits_allocated.max(run.qubits_allocated);
        counts.qubits_peak = counts.qubits_peak.max(run.qubits_peak);
        counts.ops_by_class = Some(run.ops_by_class.clone());
        counts.gates = run.expanded_count.map(GateTotals::from);
    }
    Ok(RunResult {
        schema_version: SCHEMA_VERSION,
        experiment: "perceptron".into(),
        config: serde_json::to_value(args)?,
        seed: args.seed,
        series,
        counts,
        shots: (args.mode == PerceptronMode::Shots).then_some(args.shots),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

// ---------------------------------------------------------------------------
// Groundstate run
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct GroundstateArgs {
    pub hamiltonian: String,
    pub precision: usize,
    pub iterations: u32,
    pub scramble: ScramblingMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseProfile>,
    pub seed: u64,
}

pub fn run_groundstate(args: &GroundstateArgs, hamiltonian: &Hamiltonian) -> Result<RunResult> {
    let start = Instant::now();
    let config = ThermaliseConfig::new(args.iterations)?
        .with_precision(args.precision)
        .with_scrambling(args.scramble);
    let run = simulate_groundstate_thermalise(hamiltonian, &config, args.noise.as_ref())?;
    let series = run
        .series
        .iter()
        .map(|p| SeriesEntry {
            theta: None,
            applications: p.applications,
            fidelity_sim: p.fidelity_sim,
            fidelity_pred: p.fidelity_pred,
            q_estimate: None,
            binomial_sigma: None,
        })
        .collect();
    Ok(RunResult {
        schema_version: SCHEMA_VERSION,
        experiment: "groundstate".into(),
        config: serde_json::to_value(args)?,
        seed: args.seed,
        series,
        counts: ResourceCounts {
            qubits_allocated: run.qubits_allocated,
            qubits_peak: run.qubits_peak,
            measurements: 0,
            ops_by_class: Some(run.ops_by_class.clone()),
            gates: run.expanded_count.map(GateTotals::from),
        },
        shots: None,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

// ---------------------------------------------------------------------------
// Amplification report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct OaaArgs {
    pub p0: f64,
    pub k: u32,
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleErrorPoint {
    pub delta: f64,
    pub success: f64,
    pub failure_increase: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OaaRunReport {
    pub schema_version: u32,
    pub experiment: String,
    pub config: serde_json::Value,
    pub theta: f64,
    pub simulated_success: f64,
    pub predicted_success: f64,
    pub unit_gates: GateTotals,
    pub shift_gates: GateTotals,
    pub amplified_gates: GateTotals,
    pub recursion_gates: GateTotals,
    pub angle_sweep: Vec<AngleErrorPoint>,
    pub wall_time_ms: f64,
}

/// theta on [0, pi/4] with cos^4 + sin^4 = p0; requires p0 in (1/2, 1].
pub fn theta_for_success(p0: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&p0) {
        return Err(Error::InvalidInput(format!(
            "p0 {p0} outside [1/2, 1] reachable by the perceptron unit"
        )));
    }
    Ok(((2.0 * (1.0 - p0)).sqrt()).asin() / 2.0)
}

pub fn run_oaa(args: &OaaArgs) -> Result<OaaRunReport> {
    let start = Instant::now();
    let theta = theta_for_success(args.p0)?;
    let unit = circuits::build_perceptron_unit(theta);
    let input = PureState::zero(1)?;
    let report = oaa_report(&unit, args.k, args.p0, &input)?;
    let baseline_failure = 1.0 - report.simulated_success;
    let mut sweep = Vec::with_capacity(args.deltas.len());
    for &delta in &args.deltas {
        let success = circuits::oaa_with_angle_error(&unit, args.k, delta, &input)?;
        sweep.push(AngleErrorPoint {
            delta,
            success,
            failure_increase: (1.0 - success) - baseline_failure,
        });
    }
    let recursion =
        analysis::oaa_gate_count(report.unit_count, report.shift_count, args.k);
    Ok(OaaRunReport {
        schema_version: SCHEMA_VERSION,
        experiment: "oaa".into(),
        config: serde_json::to_value(args)?,
        theta,
        simulated_success: report.simulated_success,
        predicted_success: report.predicted_success,
        unit_gates: report.unit_count.into(),
        shift_gates: report.shift_count.into(),
        amplified_gates: report.amplified_count.into(),
        recursion_gates: recursion.into(),
        angle_sweep: sweep,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

// ---------------------------------------------------------------------------
// Scrambling Monte Carlo
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ScrambleArgs {
    pub qubits: usize,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantStats {
    pub mean: f64,
    pub std_dev: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScrambleReport {
    pub schema_version: u32,
    pub experiment: String,
    pub config: serde_json::Value,
    pub reference: f64,
    pub hadamard: VariantStats,
    pub local_x: VariantStats,
    /// Two-sample z statistic between the variants.
    pub variant_z: f64,
    pub wall_time_ms: f64,
}

fn haar_state(dim: usize, rng: &mut ChaCha8Rng) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| {
        Complex64::new(
            rng.sample::<f64, _>(rand_distr::StandardNormal),
            rng.sample::<f64, _>(rand_distr::StandardNormal),
        )
    });
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// A Haar state and a Haar-uniform perpendicular companion.
fn haar_pair(dim: usize, rng: &mut ChaCha8Rng) -> (DVector<Complex64>, DVector<Complex64>) {
    let lambda = haar_state(dim, rng);
    loop {
        let g = haar_state(dim, rng);
        let overlap = lambda.dotc(&g);
        let perp = &g - &lambda * overlap;
        let norm = perp.norm();
        if norm > 1e-8 {
            return (lambda, &perp / Complex64::new(norm, 0.0));
        }
    }
}

fn stats(values: &[f64]) -> VariantStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    VariantStats { mean, std_dev: var.sqrt(), std_error: (var / n).sqrt() }
}

fn overlap_trials(
    n_qubits: usize,
    trials: u64,
    seed: u64,
    local: &nalgebra::DMatrix<Complex64>,
) -> Vec<f64> {
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial + 1);
            let (lambda, perp) = haar_pair(1 << n_qubits, &mut rng);
            perp.dotc(&(local * lambda)).norm_sqr()
        })
        .collect()
}

/// Overlap statistics between a transformed Haar state and a perpendicular
/// companion, for local Hadamards and local X gates; both concentrate on
/// 1 / 2^n as the register grows.
pub fn run_scramble_study(args: &ScrambleArgs) -> Result<ScrambleReport> {
    if args.qubits == 0 || args.qubits > 8 {
        return Err(Error::InvalidInput(format!(
            "scramble study supports 1..=8 qubits, got {}",
            args.qubits
        )));
    }
    if args.trials < 2 {
        return Err(Error::InvalidInput("need at least two trials".into()));
    }
    let start = Instant::now();
    let n = args.qubits;
    let mut h_all = nalgebra::DMatrix::identity(1, 1);
    let mut x_all = nalgebra::DMatrix::identity(1, 1);
    for _ in 0..n {
        h_all = h_all.kronecker(crate::gates::h().matrix());
        x_all = x_all.kronecker(crate::gates::x().matrix());
    }
    let h_vals = overlap_trials(n, args.trials, args.seed, &h_all);
    let x_vals = overlap_trials(n, args.trials, args.seed.wrapping_add(0x9e3779b97f4a7c15), &x_all);
    let h_stats = stats(&h_vals);
    let x_stats = stats(&x_vals);
    let variant_z = (h_stats.mean - x_stats.mean)
        / (h_stats.std_error.powi(2) + x_stats.std_error.powi(2)).sqrt();
    Ok(ScrambleReport {
        schema_version: SCHEMA_VERSION,
        experiment: "scramble".into(),
        config: serde_json::to_value(args)?,
        reference: 1.0 / (1u64 << n) as f64,
        hadamard: h_stats,
        local_x: x_stats,
        variant_z,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

// ---------------------------------------------------------------------------
// Resources and preactivation
// ---------------------------------------------------------------------------

pub fn run_resources(query: &ResourceQuery, methods: &[Method]) -> Result<Vec<ResourceRow>> {
    methods
        .iter()
        .map(|&m| analysis::resource_rows(query, m))
        .collect()
}

/// Preactivation theta = sum_i x_i w_i + b for feeding the perceptron sweep.
pub fn preactivation(inputs: &[f64], weights: &[f64], bias: f64) -> Result<f64> {
    if inputs.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} inputs vs {} weights",
            inputs.len(),
            weights.len()
        )));
    }
    Ok(inputs.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() + bias)
}
