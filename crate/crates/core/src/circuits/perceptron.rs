//! Quantum-perceptron unit circuit and its ancilla-thermalisation loop.

use std::f64::consts::FRAC_PI_2;

use crate::analysis;
use crate::circuits::{Circuit, Control, Executor, SeriesPoint, ThermaliseConfig, ThermaliseRun};
use crate::error::{Error, Result};
use crate::gates;
use crate::noise::{NoiseProfile, NoiseRun};
use crate::state::{PureState, State};

/// Two-qubit post-select unit: qubit 0 is the ancilla, qubit 1 the target.
///
/// Projecting the ancilla on |0> leaves the target rotated by the activation
/// angle, exp(-i q(theta) Y); projecting on |1> leaves
/// exp(+i pi/4 Y)|psi> up to a global phase, which the Ry(pi/2) reset
/// inverts exactly.
pub fn build_perceptron_unit(theta: f64) -> Circuit {
    let mut circuit = Circuit::new();
    let ancilla = circuit.alloc(1)[0];
    let target = circuit.alloc_input(1)[0];
    circuit.push(gates::ry(2.0 * theta), vec![ancilla], vec![]);
    // -iY on the target equals Ry(pi) exactly
    circuit.push(
        gates::ry(std::f64::consts::PI),
        vec![target],
        vec![Control::on(ancilla)],
    );
    circuit.push(gates::ry(-2.0 * theta), vec![ancilla], vec![]);
    circuit
}

/// Ancilla-thermalisation loop: applies the unit, then `T - 1` repetitions
/// of [conditioned Ry(pi/2) reset; conditioned unit on a fresh ancilla],
/// each conditioned on the previous ancilla reading |1>. Ancillae are traced
/// out right after their last use, so the live register never exceeds three
/// qubits. Returns the per-application fidelity series against the rotated
/// target together with the closed-form prediction.
pub fn simulate_perceptron_thermalise(
    theta: f64,
    config: &ThermaliseConfig,
    input: &PureState,
    noise: Option<&NoiseProfile>,
) -> Result<ThermaliseRun> {
    if input.n_qubits() != 1 {
        return Err(Error::DimensionMismatch(
            "perceptron target is a single qubit".into(),
        ));
    }
    let total = config.applications;
    if total > 12 {
        return Err(Error::InvalidInput(format!(
            "application count {total} exceeds the supported 12"
        )));
    }

    let unit = build_perceptron_unit(theta);
    let mut circuit = Circuit::new();
    let target = circuit.alloc_input(1)[0];
    let first = circuit.alloc(1)[0];
    circuit.append_remapped(&unit, &[first, target], &[])?;
    let mut prev = first;
    for t in 2..=total {
        // the conditioned reset doubles as the trailing reset of the
        // (t - 1)-application prefix, so snapshot right after it
        circuit.push(gates::ry(FRAC_PI_2), vec![target], vec![Control::on(prev)]);
        circuit.snapshot(t as usize - 1, vec![target]);
        let fresh = circuit.alloc(1)[0];
        circuit.append_remapped(&unit, &[fresh, target], &[Control::on(prev)])?;
        circuit.trace_out(vec![prev]);
        prev = fresh;
    }
    if config.trailing_reset {
        circuit.push(gates::ry(FRAC_PI_2), vec![target], vec![Control::on(prev)]);
    }
    circuit.snapshot(total as usize, vec![target]);
    circuit.trace_out(vec![prev]);

    let noise_run = noise.map(NoiseRun::new).transpose()?;
    let execution = Executor::new()
        .with_eager(config.eager_trace)
        .with_noise(noise_run)
        .run(&circuit, Some(State::Pure(input.clone())))?;

    // desired state exp(-i q Y)|psi> and its overlap with the input
    let q = analysis::q_activation(theta);
    let mut desired = input.clone();
    crate::state::apply_to_pure(&mut desired, gates::ry(2.0 * q).matrix(), &[0], &[])?;
    let overlap_sq = input.overlap_sq(&desired)?;
    let from_zero = (input.amplitudes()[0].norm() - 1.0).abs() < 1e-12;

    let mut series = Vec::with_capacity(total as usize);
    let mut target_states = Vec::with_capacity(total as usize);
    for (tag, rho) in execution.snapshots {
        let t = tag as u32;
        let fidelity_sim = crate::state::fidelity_with_pure(&rho, &desired)?;
        let q_estimate = if from_zero {
            Some(analysis::estimate_q_angle(&rho)?)
        } else {
            None
        };
        series.push(SeriesPoint {
            applications: t,
            fidelity_sim,
            fidelity_pred: analysis::predicted_perceptron_fidelity(theta, t, overlap_sq),
            q_estimate,
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::executor::circuit_unitary;
    use crate::state::{project, PureState, State};
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn unit_output(theta: f64, input: PureState) -> State {
        let circuit = build_perceptron_unit(theta);
        let mut executor = Executor::new();
        executor
            .run(&circuit, Some(State::Pure(input)))
            .unwrap()
            .register
            .into_state()
            .unwrap()
    }

    #[test]
    fn success_probability_is_half_at_quarter_pi() {
        let out = unit_output(FRAC_PI_4, PureState::zero(1).unwrap());
        let rec = project(&out, &[0], &[false]).unwrap();
        assert!((rec.probability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn theta_zero_always_succeeds_and_leaves_target() {
        let out = unit_output(0.0, PureState::zero(1).unwrap());
        let rec = project(&out, &[0], &[false]).unwrap();
        assert!((rec.probability - 1.0).abs() < 1e-12);
        let Some(State::Pure(post)) = rec.post_state else { panic!() };
        assert!((post.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn success_branch_rotates_by_activation_angle() {
        let theta = FRAC_PI_3;
        let out = unit_output(theta, PureState::zero(1).unwrap());
        let rec = project(&out, &[0], &[false]).unwrap();
        let Some(State::Pure(post)) = rec.post_state else { panic!() };
        let q = analysis::q_activation(theta);
        assert!((q - 3.0f64.atan()).abs() < 1e-12);
        // post state on the target (qubit 1): cos(q)|0> + sin(q)|1>
        assert!((post.amplitudes()[0].re - q.cos()).abs() < 1e-10);
        assert!((post.amplitudes()[2].re - q.sin()).abs() < 1e-10);
    }

    #[test]
    fn failure_branch_is_quarter_y_rotation_up_to_phase() {
        // <1|U|0> block should be proportional to exp(+i pi/4 Y)
        let u = circuit_unitary(&build_perceptron_unit(0.9)).unwrap();
        let k1 = nalgebra::DMatrix::from_fn(2, 2, |i, j| u[(2 * i + 1, 2 * j)]);
        let e = gates::ry(-FRAC_PI_2); // exp(+i pi/4 Y)
        // strip the scale and global phase, then compare
        let scale = k1[(0, 0)] / e.matrix()[(0, 0)];
        let diff = (&k1 / scale - e.matrix()).map(|v| v.norm()).max();
        assert!(diff < 1e-10);
    }

    #[test]
    fn thermalise_matches_closed_form_at_quarter_pi() {
        let input = PureState::zero(1).unwrap();
        let config = ThermaliseConfig::new(2).unwrap();
        let run = simulate_perceptron_thermalise(FRAC_PI_4, &config, &input, None).unwrap();
        assert_eq!(run.series.len(), 2);
        assert!((run.series[0].fidelity_sim - 0.75).abs() < 1e-9);
        assert!((run.series[1].fidelity_sim - 0.875).abs() < 1e-9);
        for p in &run.series {
            assert!((p.fidelity_sim - p.fidelity_pred).abs() < 1e-9);
        }
        assert!(run.qubits_peak <= 3);
    }

    #[test]
    fn theta_zero_thermalise_is_exact() {
        let input = PureState::zero(1).unwrap();
        let config = ThermaliseConfig::new(4).unwrap();
        let run = simulate_perceptron_thermalise(0.0, &config, &input, None).unwrap();
        for p in &run.series {
            assert!((p.fidelity_sim - 1.0).abs() < 1e-12);
            assert!(p.q_estimate.unwrap().abs() < 1e-7);
        }
    }

    #[test]
    fn closed_form_holds_across_grid() {
        let input = PureState::zero(1).unwrap();
        for &theta in &[
            std::f64::consts::FRAC_PI_8,
            FRAC_PI_4,
            3.0 * std::f64::consts::FRAC_PI_8,
        ] {
            let config = ThermaliseConfig::new(5).unwrap();
            let run = simulate_perceptron_thermalise(theta, &config, &input, None).unwrap();
            for p in &run.series {
                assert!(
                    (p.fidelity_sim - p.fidelity_pred).abs() < 1e-9,
                    "theta={theta} T={} sim={} pred={}",
                    p.applications,
                    p.fidelity_sim,
                    p.fidelity_pred
                );
            }
        }
    }

    #[test]
    fn fidelity_is_monotone_in_applications() {
        let input = PureState::zero(1).unwrap();
        let run = simulate_perceptron_thermalise(
            0.6,
            &ThermaliseConfig::new(6).unwrap(),
            &input,
            None,
        )
        .unwrap();
        for w in run.series.windows(2) {
            assert!(w[1].fidelity_sim >= w[0].fidelity_sim - 1e-12);
        }
    }

    #[test]
    fn without_trailing_reset_last_point_drops() {
        let input = PureState::zero(1).unwrap();
        let with = simulate_perceptron_thermalise(
            FRAC_PI_4,
            &ThermaliseConfig::new(3).unwrap(),
            &input,
            None,
        )
        .unwrap();
        let without = simulate_perceptron_thermalise(
            FRAC_PI_4,
            &ThermaliseConfig::new(3).unwrap().with_trailing_reset(false),
            &input,
            None,
        )
        .unwrap();
        // intermediate points share the retry reset; only the final differs
        assert!(
            (with.series[0].fidelity_sim - without.series[0].fidelity_sim).abs() < 1e-12
        );
        assert!(with.series[2].fidelity_sim > without.series[2].fidelity_sim);
    }
}
