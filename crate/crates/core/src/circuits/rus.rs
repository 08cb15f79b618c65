//! Repeat-until-success execution of a post-select unit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::circuits::executor::circuit_unitary;
use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::state::PureState;

/// Outcome of a repeat-until-success loop.
#[derive(Debug, Clone)]
pub struct RusResult {
    pub trials_used: u64,
    pub succeeded: bool,
    pub final_state: PureState,
}

/// Kraus blocks of a post-select unit, indexed by ancilla outcome.
struct PostSelectBlocks {
    /// kraus[k] maps the target space; k is the ancilla basis index.
    kraus: Vec<DMatrix<Complex64>>,
    n_targets: usize,
}

fn ancilla_qubits(unit: &Circuit) -> Vec<usize> {
    (0..unit.total_qubits)
        .filter(|q| !unit.input_qubits.contains(q))
        .collect()
}

fn post_select_blocks(unit: &Circuit) -> Result<PostSelectBlocks> {
    let u = circuit_unitary(unit)?;
    let ancillae = ancilla_qubits(unit);
    let targets = &unit.input_qubits;
    let n_t = targets.len();
    let tdim = 1usize << n_t;
    let adim = 1usize << ancillae.len();
    let index = |anc_bits: usize, t_bits: usize| -> usize {
        let mut idx = 0usize;
        for (k, &q) in ancillae.iter().enumerate() {
            idx |= ((anc_bits >> k) & 1) << q;
        }
        for (j, &q) in targets.iter().enumerate() {
            idx |= ((t_bits >> j) & 1) << q;
        }
        idx
    };
    let kraus = (0..adim)
        .map(|outcome| {
            DMatrix::from_fn(tdim, tdim, |i, j| u[(index(outcome, i), index(0, j))])
        })
        .collect();
    Ok(PostSelectBlocks { kraus, n_targets: n_t })
}

/// Checks K^dag K = q I and returns (q, K / sqrt(q)); the unitary part is
/// the branch isometry whose adjoint is the exact reset.
fn isometry_of(k: &DMatrix<Complex64>) -> Result<(f64, DMatrix<Complex64>)> {
    let gram = k.adjoint() * k;
    let q = gram[(0, 0)].re;
    let dim = gram.nrows();
    let err = (&gram - DMatrix::identity(dim, dim) * Complex64::new(q, 0.0))
        .map(|v| v.norm())
        .max();
    if err > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "branch is not an isometry (K†K deviates from q·I by {err:e}); no exact reset exists"
        )));
    }
    Ok((q, k / Complex64::new(q.sqrt(), 0.0)))
}

/// Runs the post-select unit until the ancillae read `success_outcome`:
/// samples the outcome, and on failure applies the derived reset (the exact
/// inverse of the failure isometry) before retrying. Deterministic per rng
/// seed. Exhausting `max_trials` returns an explicit failure result.
pub fn run_rus(
    unit: &Circuit,
    success_outcome: &[bool],
    input: &PureState,
    rng: &mut ChaCha8Rng,
    max_trials: u64,
) -> Result<RusResult> {
    if max_trials == 0 {
        return Err(Error::InvalidInput("max_trials must be >= 1".into()));
    }
    let ancillae = ancilla_qubits(unit);
    if success_outcome.len() != ancillae.len() {
        return Err(Error::DimensionMismatch(format!(
            "unit has {} ancillae, success outcome gives {}",
            ancillae.len(),
            success_outcome.len()
        )));
    }
    if input.n_qubits() != unit.input_qubits.len() {
        return Err(Error::DimensionMismatch(format!(
            "unit takes {} target qubits, input has {}",
            unit.input_qubits.len(),
            input.n_qubits()
        )));
    }
    let blocks = post_select_blocks(unit)?;
    let success_index: usize = success_outcome
        .iter()
        .enumerate()
        .map(|(k, &b)| (b as usize) << k)
        .sum();

    let mut psi = DMatrix::from_column_slice(1 << blocks.n_targets, 1, input.amplitudes());
    for trial in 1..=max_trials {
        // outcome distribution on the current target state
        let probs: Vec<f64> = blocks
            .kraus
            .iter()
            .map(|k| (k * &psi).map(|a| a.norm_sqr()).sum())
            .collect();
        let total: f64 = probs.iter().sum();
        let draw: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut outcome = probs.len() - 1;
        for (k, p) in probs.iter().enumerate() {
            acc += p;
            if draw < acc {
                outcome = k;
                break;
            }
        }
        let branch = &blocks.kraus[outcome] * &psi;
        let norm = branch.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let branch = branch / Complex64::new(norm, 0.0);
        if outcome == success_index {
            let final_state = PureState::from_unnormalized(branch.iter().cloned().collect())?;
            return Ok(RusResult { trials_used: trial, succeeded: true, final_state });
        }
        // exact reset: adjoint of the failure isometry
        let (_, isometry) = isometry_of(&blocks.kraus[outcome])?;
        psi = isometry.adjoint() * branch;
    }
    Ok(RusResult {
        trials_used: max_trials,
        succeeded: false,
        final_state: PureState::from_unnormalized(psi.iter().cloned().collect())?,
    })
}
