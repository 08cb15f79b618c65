use qat::circuits::*;
use qat::hamiltonians;
use qat::noise::NoiseProfile;

fn main() {
    // criterion 5 question: what does the faithful m=1 H1 run produce?
    let h = hamiltonians::h1();
    let cfg = ThermaliseConfig::new(6).unwrap().with_precision(1);
    let run = simulate_groundstate_thermalise(&h, &cfg, None).unwrap();
    println!("m=1 sim : {:?}", run.series.iter().map(|p| p.fidelity_sim).collect::<Vec<_>>());
    println!("m=1 pred: {:?}", run.series.iter().map(|p| p.fidelity_pred).collect::<Vec<_>>());

    // eager vs full-register equivalence
    let cfg_e = ThermaliseConfig::new(3).unwrap().with_precision(2);
    let cfg_f = ThermaliseConfig::new(3).unwrap().with_precision(2).with_eager_trace(false);
    let a = simulate_groundstate_thermalise(&h, &cfg_e, None).unwrap();
    let b = simulate_groundstate_thermalise(&h, &cfg_f, None).unwrap();
    let d = a.final_target().max_abs_diff(b.final_target());
    println!("eager-vs-full H1 diff = {d:e}, peak eager={} full={}", a.qubits_peak, b.qubits_peak);

    // noise ordering at T=3 for H1
    let noiseless = simulate_groundstate_thermalise(&h, &ThermaliseConfig::new(3).unwrap().with_precision(2), None).unwrap();
    let inf = NoiseProfile::noiseless();
    let with_inf = simulate_groundstate_thermalise(&h, &ThermaliseConfig::new(3).unwrap().with_precision(2), Some(&inf)).unwrap();
    let diff = noiseless.final_target().max_abs_diff(with_inf.final_target());
    println!("infinite-noise vs noiseless diff = {diff:e}");
    for name in ["low", "medium", "high"] {
        let profile = NoiseProfile::builtin(name, 11).unwrap();
        let run = simulate_groundstate_thermalise(&h, &ThermaliseConfig::new(3).unwrap().with_precision(2), Some(&profile)).unwrap();
        println!("{name}: F(3) = {:.9}  (series {:?})", run.series[2].fidelity_sim,
                 run.series.iter().map(|p| (p.fidelity_sim * 1e6).round() / 1e6).collect::<Vec<_>>());
    }
}
