//! Thermal-relaxation noise channels and noisy circuit execution.
//!
//! Each gate class carries an implementation time; after every expanded op a
//! single-qubit thermal relaxation channel acts on each participating qubit.
//! Relaxation is zero-temperature (decay toward |0>) with population time
//! constant T1 and coherence time constant T2 <= 2 T1; both are sampled per
//! qubit from seeded normal distributions. Idle qubits receive no noise.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

use crate::circuits::{Circuit, Executor, Op, Register};
use crate::decompose::{self, Terminal};
use crate::error::{Error, Result};
use crate::gates::GateClass;
use crate::state::{DensityMatrix, State};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Implementation times per gate class, in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationsNs {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub cnot: f64,
    pub ca: f64,
    pub cca: f64,
}

impl DurationsNs {
    /// The published implementation times.
    pub fn standard() -> Self {
        Self { u1: 0.0, u2: 50.0, u3: 100.0, cnot: 300.0, ca: 1600.0, cca: 3000.0 }
    }

    pub fn zero() -> Self {
        Self { u1: 0.0, u2: 0.0, u3: 0.0, cnot: 0.0, ca: 0.0, cca: 0.0 }
    }

    fn for_terminal(&self, terminal: Terminal) -> f64 {
        match terminal {
            Terminal::Single(GateClass::U1) => self.u1,
            Terminal::Single(GateClass::U2) => self.u2,
            Terminal::Single(_) => self.u3,
            Terminal::Cnot => self.cnot,
            Terminal::CA => self.ca,
            Terminal::CCA => self.cca,
        }
    }
}

/// Thermal-relaxation parameterization: gate durations plus the per-qubit
/// T1/T2 sampling statistics (microseconds).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseProfile {
    pub durations_ns: DurationsNs,
    pub mu1_us: f64,
    pub mu2_us: f64,
    pub sigma_us: f64,
    pub seed: u64,
}

impl NoiseProfile {
    pub fn new(mu1_us: f64, mu2_us: f64, sigma_us: f64, seed: u64) -> Self {
        Self { durations_ns: DurationsNs::standard(), mu1_us, mu2_us, sigma_us, seed }
    }

    /// Low noise: T1 ~ 1800 us, T2 ~ 2000 us.
    pub fn low(seed: u64) -> Self {
        Self::new(1800.0, 2000.0, 10.0, seed)
    }

    /// Medium noise: T1 ~ 180 us, T2 ~ 200 us.
    pub fn medium(seed: u64) -> Self {
        Self::new(180.0, 200.0, 10.0, seed)
    }

    /// High noise: T1 ~ 50 us, T2 ~ 70 us.
    pub fn high(seed: u64) -> Self {
        Self::new(50.0, 70.0, 10.0, seed)
    }

    /// Infinite relaxation times: reproduces noiseless evolution.
    pub fn noiseless() -> Self {
        Self::new(f64::INFINITY, f64::INFINITY, 0.0, 0)
    }

    /// Looks a built-in profile up by name.
    pub fn builtin(name: &str, seed: u64) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "low" => Ok(Self::low(seed)),
            "medium" => Ok(Self::medium(seed)),
            "high" => Ok(Self::high(seed)),
            other => Err(Error::InvalidInput(format!(
                "unknown noise profile '{other}' (expected low, medium or high)"
            ))),
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.durations_ns;
        for (name, v) in [
            ("u1", d.u1),
            ("u2", d.u2),
            ("u3", d.u3),
            ("cnot", d.cnot),
            ("ca", d.ca),
            ("cca", d.cca),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidInput(format!("duration {name} = {v} is invalid")));
            }
        }
        if self.sigma_us < 0.0 {
            return Err(Error::InvalidInput("sigma must be >= 0".into()));
        }
        if self.mu1_us <= 0.0 || self.mu2_us <= 0.0 {
            return Err(Error::InvalidInput("mean relaxation times must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-qubit (T1, T2) draw: N(mu1, sigma^2) and N(mu2, sigma^2) with redraws
/// on non-positive values, then T2 clamped to 2 T1. Deterministic per
/// (profile seed, qubit), independent of sampling order.
pub fn sample_qubit_params(profile: &NoiseProfile, qubit: usize) -> (f64, f64) {
    if profile.sigma_us == 0.0 || !profile.mu1_us.is_finite() || !profile.mu2_us.is_finite() {
        let t1 = profile.mu1_us;
        return (t1, profile.mu2_us.min(2.0 * t1));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    rng.set_stream(qubit as u64 + 1);
    let n1 = Normal::new(profile.mu1_us, profile.sigma_us).expect("valid normal");
    let n2 = Normal::new(profile.mu2_us, profile.sigma_us).expect("valid normal");
    let t1 = loop {
        let v = n1.sample(&mut rng);
        if v > 0.0 {
            break v;
        }
    };
    let t2 = loop {
        let v = n2.sample(&mut rng);
        if v > 0.0 {
            break v.min(2.0 * t1);
        }
    };
    (t1, t2)
}

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    ops: Vec<DMatrix<Complex64>>,
}

impl KrausChannel {
    /// Validates the completeness relation sum K^dag K = I.
    pub fn new(ops: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidInput("channel needs at least one operator".into()));
        }
        let dim = ops[0].nrows();
        let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
        for k in &ops {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch("Kraus operators differ in size".into()));
            }
            sum += k.adjoint() * k;
        }
        let err = (sum - DMatrix::<Complex64>::identity(dim, dim))
            .map(|v| v.norm())
            .max();
        if err > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "Kraus completeness violated by {err:e}"
            )));
        }
        Ok(Self { ops })
    }

    pub fn operators(&self) -> &[DMatrix<Complex64>] {
        &self.ops
    }

    /// rho -> sum_k K rho K^dag on the given qubit of a density matrix.
    pub fn apply(&self, rho: &DensityMatrix, qubit: usize) -> Result<DensityMatrix> {
        let dim = rho.dim();
        let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
        for k in &self.ops {
            let mut branch = rho.clone();
            crate::state::conjugate_density(&mut branch, k, &[qubit], &[])?;
            acc += branch.matrix();
        }
        Ok(DensityMatrix::from_parts_unchecked(rho.n_qubits(), acc))
    }
}

/// Single-qubit thermal relaxation over duration `t`: population decays as
/// e^{-t/T1} toward |0>, coherence exactly as e^{-t/T2}. Amplitude damping
/// with gamma = 1 - e^{-t/T1} composed with pure dephasing supplying the
/// remaining coherence decay. Times share one unit; T2 <= 2 T1 required.
pub fn thermal_relaxation_channel(t1: f64, t2: f64, t: f64) -> Result<KrausChannel> {
    if t1 <= 0.0 || t2 <= 0.0 {
        return Err(Error::InvalidInput("relaxation times must be positive".into()));
    }
    if t2 > 2.0 * t1 {
        return Err(Error::InvalidInput(format!(
            "T2 = {t2} exceeds the CP bound 2 T1 = {}",
            2.0 * t1
        )));
    }
    if t < 0.0 {
        return Err(Error::InvalidInput("duration must be >= 0".into()));
    }
    let gamma = 1.0 - (-t / t1).exp();
    // residual dephasing so the off-diagonal factor is exactly e^{-t/T2}
    let residual = (-t / t2).exp() / (-t / (2.0 * t1)).exp();
    let p_z = ((1.0 - residual) / 2.0).clamp(0.0, 0.5);

    let k0 = DMatrix::from_row_slice(
        2,
        2,
        &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - gamma).sqrt(), 0.0)],
    );
    let k1 = DMatrix::from_row_slice(
        2,
        2,
        &[c(0.0, 0.0), c(gamma.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)],
    );
    let zmat = DMatrix::from_row_slice(
        2,
        2,
        &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
    );
    let w_i = c((1.0 - p_z).sqrt(), 0.0);
    let w_z = c(p_z.sqrt(), 0.0);
    let mut ops = vec![&k0 * w_i, &k1 * w_i];
    if p_z > 0.0 {
        ops.push(&zmat * &k0 * w_z);
        ops.push(&zmat * &k1 * w_z);
    }
    KrausChannel::new(ops)
}

/// Noise state for one circuit execution: caches per-qubit parameters and
/// per-(class, qubit) channels.
pub struct NoiseRun<'a> {
    profile: &'a NoiseProfile,
    params: HashMap<usize, (f64, f64)>,
    channels: HashMap<(u64, usize), KrausChannel>,
}

impl<'a> NoiseRun<'a> {
    pub fn new(profile: &'a NoiseProfile) -> Result<Self> {
        profile.validate()?;
        Ok(Self { profile, params: HashMap::new(), channels: HashMap::new() })
    }

    fn qubit_params(&mut self, qubit: usize) -> (f64, f64) {
        *self
            .params
            .entry(qubit)
            .or_insert_with(|| sample_qubit_params(self.profile, qubit))
    }

    fn relax(&mut self, reg: &mut Register, qubit: usize, duration_ns: f64) -> Result<()> {
        if duration_ns == 0.0 {
            return Ok(());
        }
        let (t1, t2) = self.qubit_params(qubit);
        if !t1.is_finite() && !t2.is_finite() {
            return Ok(());
        }
        let key = (duration_ns.to_bits(), qubit);
        if !self.channels.contains_key(&key) {
            let channel = thermal_relaxation_channel(t1, t2, duration_ns / 1000.0)?;
            self.channels.insert(key, channel);
        }
        let channel = self.channels.get(&key).unwrap();
        reg.apply_channel(channel, qubit)
    }

    /// Expands `op` through the decomposition registry and applies each
    /// terminal followed by relaxation on its participating qubits.
    pub fn apply_noisy(&mut self, reg: &mut Register, op: &Op) -> Result<()> {
        for (sub, terminal) in decompose::expand_to_terminals(op)? {
            reg.apply(&sub)?;
            let duration = self.profile.durations_ns.for_terminal(terminal);
            for q in sub.participants() {
                self.relax(reg, q, duration)?;
            }
        }
        Ok(())
    }
}

/// Executes a circuit on a density-matrix input with thermal relaxation
/// after every expanded op.
pub fn noisy_execute(
    circuit: &Circuit,
    input: &DensityMatrix,
    profile: &NoiseProfile,
) -> Result<DensityMatrix> {
    let noise = NoiseRun::new(profile)?;
    let execution = Executor::new()
        .with_noise(Some(noise))
        .run(circuit, Some(State::Mixed(input.clone())))?;
    match execution.register.into_state() {
        Some(State::Mixed(d)) => Ok(d),
        Some(State::Pure(p)) => p.to_density(),
        None => Err(Error::InvalidInput("circuit left an empty register".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::PureState;

    fn plus_density() -> DensityMatrix {
        PureState::from_unnormalized(vec![c(1.0, 0.0), c(1.0, 0.0)])
            .unwrap()
            .to_density()
            .unwrap()
    }

    #[test]
    fn zero_duration_channel_is_identity() {
        let ch = thermal_relaxation_channel(100.0, 150.0, 0.0).unwrap();
        let rho = plus_density();
        let out = ch.apply(&rho, 0).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-14);
    }

    #[test]
    fn population_decays_at_t1_rate() {
        let rho = PureState::basis(1, 1).unwrap().to_density().unwrap();
        let t1 = 37.0;
        let ch = thermal_relaxation_channel(t1, 1.5 * t1, t1).unwrap();
        let out = ch.apply(&rho, 0).unwrap();
        assert!((out.matrix()[(1, 1)].re - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn coherence_decays_at_t2_rate() {
        let rho = plus_density();
        let (t1, t2) = (80.0, 55.0);
        let ch = thermal_relaxation_channel(t1, t2, t2).unwrap();
        let out = ch.apply(&rho, 0).unwrap();
        let off = out.matrix()[(0, 1)].norm();
        assert!((off - (-1.0f64).exp() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn t2_beyond_twice_t1_is_rejected() {
        assert!(thermal_relaxation_channel(10.0, 21.0, 1.0).is_err());
    }

    #[test]
    fn channel_composition_is_a_semigroup() {
        let (t1, t2) = (64.0, 90.0);
        let one = thermal_relaxation_channel(t1, t2, 7.0).unwrap();
        let two = thermal_relaxation_channel(t1, t2, 3.0).unwrap();
        let joint = thermal_relaxation_channel(t1, t2, 10.0).unwrap();
        let rho = plus_density();
        let seq = two.apply(&one.apply(&rho, 0).unwrap(), 0).unwrap();
        let direct = joint.apply(&rho, 0).unwrap();
        assert!(seq.max_abs_diff(&direct) < 1e-10);
    }

    #[test]
    fn channels_preserve_density_validity() {
        let mut psi = PureState::zero(2).unwrap();
        crate::state::apply_to_pure(&mut psi, crate::gates::h().matrix(), &[0], &[]).unwrap();
        crate::state::apply_to_pure(&mut psi, crate::gates::x().matrix(), &[1], &[(0, true)]).unwrap();
        let rho = psi.to_density().unwrap();
        let ch = thermal_relaxation_channel(40.0, 60.0, 13.0).unwrap();
        let out = ch.apply(&rho, 1).unwrap();
        let tr = out.trace();
        assert!((tr.re - 1.0).abs() < 1e-10 && tr.im.abs() < 1e-12);
        let min_eig = out
            .matrix()
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(min_eig > -1e-9);
    }

    #[test]
    fn sampling_is_deterministic_and_clamped() {
        let profile = NoiseProfile::new(50.0, 70.0, 10.0, 9);
        let a = sample_qubit_params(&profile, 3);
        let b = sample_qubit_params(&profile, 3);
        assert_eq!(a, b);
        for q in 0..200 {
            let (t1, t2) = sample_qubit_params(&profile, q);
            assert!(t1 > 0.0 && t2 > 0.0 && t2 <= 2.0 * t1);
        }
    }

    #[test]
    fn zero_sigma_returns_means() {
        let profile = NoiseProfile::new(1800.0, 2000.0, 0.0, 1);
        assert_eq!(sample_qubit_params(&profile, 0), (1800.0, 2000.0));
        let tight = NoiseProfile::new(10.0, 50.0, 0.0, 1);
        assert_eq!(sample_qubit_params(&profile, 5), (1800.0, 2000.0));
        assert_eq!(sample_qubit_params(&tight, 0), (10.0, 20.0));
    }

    #[test]
    fn low_profile_draws_stay_within_five_sigma() {
        let profile = NoiseProfile::low(31);
        for q in 0..1000 {
            let (t1, t2) = sample_qubit_params(&profile, q);
            assert!((t1 - 1800.0).abs() <= 50.0, "t1 draw {t1}");
            assert!((t2 - 2000.0).abs() <= 50.0, "t2 draw {t2}");
        }
    }

    #[test]
    fn profile_json_roundtrip() {
        let profile = NoiseProfile::medium(17);
        let text = serde_json::to_string_pretty(&profile).unwrap();
        let back: NoiseProfile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.mu1_us, 180.0);
        assert_eq!(back.durations_ns, DurationsNs::standard());
        assert_eq!(back.seed, 17);
    }
}
