//! Experiment runner CLI.
//!
//! Subcommands: `perceptron`, `groundstate`, `oaa`, `scramble`, `resources`
//! and `preactivation`. Runs are deterministic per (flags, seed) and write
//! plot-ready JSON + CSV next to each other. `QAT_OUT_DIR` sets the default
//! output directory. Exit codes: 0 success, 2 validation error, 3 capacity
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qat::analysis::{Method, ResourceQuery};
use qat::circuits::ScramblingMode;
use qat::error::Error;
use qat::experiments::{
    self, output, GroundstateArgs, OaaArgs, PerceptronArgs, PerceptronMode, ScrambleArgs,
};
use qat::gates::GateCount;
use qat::hamiltonians::{self, Hamiltonian};
use qat::noise::NoiseProfile;

#[derive(Parser)]
#[command(
    name = "qat",
    version,
    about = "Quantum ancilla-thermalisation experiment runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Perceptron fidelity/angle sweep over a theta grid.
    Perceptron(PerceptronCmd),
    /// Groundstate preparation fidelity versus applications.
    Groundstate(GroundstateCmd),
    /// Fixed-point amplitude amplification report with angle-error sweep.
    Oaa(OaaCmd),
    /// Monte Carlo overlap statistics of the scrambling approximation.
    Scramble(ScrambleCmd),
    /// Resource-comparison table rows.
    Resources(ResourcesCmd),
    /// Preactivation helper: theta = sum x_i w_i + b.
    Preactivation(PreactivationCmd),
}

#[derive(Args)]
struct PerceptronCmd {
    /// Comma-separated angles; accepts decimals and pi fractions like 3pi/8.
    #[arg(long, value_name = "GRID")]
    theta_grid: String,
    /// Total unit applications T; the series covers 1..=T.
    #[arg(long, default_value_t = 5)]
    iterations: u32,
    /// exact: density-matrix fidelities; shots: sampled estimates.
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value_t = 8192)]
    shots: u64,
    /// none | low | medium | high | path to a profile JSON.
    #[arg(long, default_value = "none")]
    noise: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output path prefix (writes PREFIX.json and PREFIX.csv).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Drop the final conditioned reset.
    #[arg(long)]
    no_trailing_reset: bool,
}

#[derive(Args)]
struct GroundstateCmd {
    /// h1 | h2 | path to a Hamiltonian JSON.
    #[arg(long, default_value = "h1")]
    hamiltonian: String,
    /// Precision (phase-register) qubits per application.
    #[arg(long, default_value_t = 2)]
    precision: usize,
    #[arg(long, default_value_t = 5)]
    iterations: u32,
    /// exact | hadamard.
    #[arg(long, default_value = "exact")]
    scramble: String,
    #[arg(long, default_value = "none")]
    noise: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OaaCmd {
    /// Per-application success probability in [1/2, 1].
    #[arg(long)]
    p0: f64,
    /// Nesting depth.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Comma-separated phase-angle errors for the sweep.
    #[arg(long, default_value = "0.01,0.05,0.1")]
    delta: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScrambleCmd {
    #[arg(long, default_value_t = 4)]
    qubits: usize,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ResourcesCmd {
    /// all | postselect | oaa | thermalise | pea-postselect | pea-thermalise
    /// | lcu-thermalise | lcu-oaa.
    #[arg(long, default_value = "all")]
    method: String,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    p0: f64,
    #[arg(long, default_value_t = 0.1)]
    delta_gap: f64,
    #[arg(long, default_value_t = 2)]
    sparsity: usize,
    /// Optional exact gate counts as singles:cnots (e.g. 4:2).
    #[arg(long)]
    q_u: Option<String>,
    #[arg(long)]
    q_w: Option<String>,
    #[arg(long)]
    q_s: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PreactivationCmd {
    /// Comma-separated inputs x_i.
    #[arg(long)]
    inputs: String,
    /// Comma-separated weights w_i.
    #[arg(long)]
    weights: String,
    #[arg(long, default_value_t = 0.0)]
    bias: f64,
}

/// Parses an angle: a float, or "[k]pi[/d]" such as pi/8 or 3pi/4.
fn parse_angle(text: &str) -> Result<f64, Error> {
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (sign, t) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t),
    };
    if let Some(idx) = t.find("pi") {
        let (num, rest) = t.split_at(idx);
        let rest = &rest[2..];
        let k: f64 = if num.is_empty() { 1.0 } else { num.parse().map_err(bad_angle(text))? };
        let d: f64 = match rest.strip_prefix('/') {
            Some(den) => den.parse().map_err(bad_angle(text))?,
            None if rest.is_empty() => 1.0,
            None => return Err(Error::InvalidInput(format!("cannot parse angle '{text}'"))),
        };
        return Ok(sign * k * std::f64::consts::PI / d);
    }
    Err(Error::InvalidInput(format!("cannot parse angle '{text}'")))
}

fn bad_angle(text: &str) -> impl Fn(std::num::ParseFloatError) -> Error + '_ {
    move |e| Error::InvalidInput(format!("cannot parse angle '{text}': {e}"))
}

fn parse_list<T, F: Fn(&str) -> Result<T, Error>>(text: &str, f: F) -> Result<Vec<T>, Error> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| f(s.trim()))
        .collect()
}

fn parse_noise(text: &str, seed: u64) -> Result<Option<NoiseProfile>, Error> {
    match text {
        "none" => Ok(None),
        "low" | "medium" | "high" => Ok(Some(NoiseProfile::builtin(text, seed)?)),
        path => Ok(Some(NoiseProfile::from_json_file(Path::new(path))?)),
    }
}

fn parse_hamiltonian(text: &str) -> Result<Hamiltonian, Error> {
    match text {
        "h1" | "h2" => hamiltonians::builtin(text),
        path => hamiltonians::from_json_file(Path::new(path)),
    }
}

fn parse_gate_count(text: &str) -> Result<GateCount, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "gate count '{text}' should be singles:cnots"
        )));
    }
    let singles = parts[0]
        .parse()
        .map_err(|e| Error::InvalidInput(format!("bad count '{text}': {e}")))?;
    let cnots = parts[1]
        .parse()
        .map_err(|e| Error::InvalidInput(format!("bad count '{text}': {e}")))?;
    Ok(GateCount { singles, cnots })
}

fn out_prefix(out: Option<PathBuf>, experiment: &str, seed: u64) -> PathBuf {
    out.unwrap_or_else(|| {
        let dir = std::env::var("QAT_OUT_DIR").unwrap_or_else(|_| ".".into());
        Path::new(&dir).join(format!("{experiment}-{seed}"))
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Perceptron(cmd) => {
            let mode = match cmd.mode.as_str() {
                "exact" => PerceptronMode::Exact,
                "shots" => PerceptronMode::Shots,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown mode '{other}' (expected exact or shots)"
                    )))
                }
            };
            let args = PerceptronArgs {
                thetas: parse_list(&cmd.theta_grid, parse_angle)?,
                iterations: cmd.iterations,
                mode,
                shots: cmd.shots,
                trailing_reset: !cmd.no_trailing_reset,
                noise: parse_noise(&cmd.noise, cmd.seed)?,
                seed: cmd.seed,
            };
            let result = experiments::run_perceptron(&args)?;
            let prefix = out_prefix(cmd.out, &result.experiment, result.seed);
            let (json_path, csv_path) = output::write_run(&prefix, &result)?;
            println!("theta        T   fidelity_sim   fidelity_pred  q_estimate");
            for e in &result.series {
                println!(
                    "{:<12.6} {:<3} {:<14.10} {:<14.10} {}",
                    e.theta.unwrap_or(f64::NAN),
                    e.applications,
                    e.fidelity_sim,
                    e.fidelity_pred,
                    e.q_estimate.map(|q| format!("{q:.10}")).unwrap_or_default(),
                );
            }
            println!("wrote {} and {}", json_path.display(), csv_path.display());
        }
        Command::Groundstate(cmd) => {
            let hamiltonian = parse_hamiltonian(&cmd.hamiltonian)?;
            let args = GroundstateArgs {
                hamiltonian: cmd.hamiltonian.clone(),
                precision: cmd.precision,
                iterations: cmd.iterations,
                scramble: ScramblingMode::parse(&cmd.scramble)?,
                noise: parse_noise(&cmd.noise, cmd.seed)?,
                seed: cmd.seed,
            };
            let result = experiments::run_groundstate(&args, &hamiltonian)?;
            let prefix = out_prefix(cmd.out, &result.experiment, result.seed);
            let (json_path, csv_path) = output::write_run(&prefix, &result)?;
            println!("T   fidelity_sim   fidelity_pred");
            for e in &result.series {
                println!(
                    "{:<3} {:<14.10} {:<14.10}",
                    e.applications, e.fidelity_sim, e.fidelity_pred
                );
            }
            println!("wrote {} and {}", json_path.display(), csv_path.display());
        }
        Command::Oaa(cmd) => {
            let args = OaaArgs {
                p0: cmd.p0,
                k: cmd.k,
                deltas: parse_list(&cmd.delta, |s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::InvalidInput(format!("bad delta '{s}': {e}")))
                })?,
            };
            let report = experiments::run_oaa(&args)?;
            println!(
                "k={}  simulated={:.12}  predicted={:.12}",
                report.config["k"], report.simulated_success, report.predicted_success
            );
            println!(
                "gates: unit {} + shift {} -> amplified {} (recursion {})",
                report.unit_gates.total,
                report.shift_gates.total,
                report.amplified_gates.total,
                report.recursion_gates.total
            );
            for p in &report.angle_sweep {
                println!(
                    "delta={:<6} success={:.12} failure_increase={:+.3e}",
                    p.delta, p.success, p.failure_increase
                );
            }
            if let Some(out) = cmd.out {
                output::write_json(&out, &report)?;
                println!("wrote {}", out.display());
            }
        }
        Command::Scramble(cmd) => {
            let report = experiments::run_scramble_study(&ScrambleArgs {
                qubits: cmd.qubits,
                trials: cmd.trials,
                seed: cmd.seed,
            })?;
            println!(
                "n={} trials={} reference=1/2^n={:.6}",
                cmd.qubits, cmd.trials, report.reference
            );
            println!(
                "hadamard: mean={:.6} std={:.6} stderr={:.6}",
                report.hadamard.mean, report.hadamard.std_dev, report.hadamard.std_error
            );
            println!(
                "local_x : mean={:.6} std={:.6} stderr={:.6}",
                report.local_x.mean, report.local_x.std_dev, report.local_x.std_error
            );
            println!("two-sample z = {:.3}", report.variant_z);
            if let Some(out) = cmd.out {
                output::write_json(&out, &report)?;
                println!("wrote {}", out.display());
            }
        }
        Command::Resources(cmd) => {
            let methods = if cmd.method == "all" {
                Method::all().to_vec()
            } else {
                vec![Method::parse(&cmd.method)?]
            };
            let query = ResourceQuery {
                n: cmd.n,
                m: cmd.m,
                epsilon: cmd.epsilon,
                p0: cmd.p0,
                delta_gap: cmd.delta_gap,
                sparsity: cmd.sparsity,
                q_u: cmd.q_u.as_deref().map(parse_gate_count).transpose()?,
                q_w: cmd.q_w.as_deref().map(parse_gate_count).transpose()?,
                q_s: cmd.q_s.as_deref().map(parse_gate_count).transpose()?,
            };
            let rows = experiments::run_resources(&query, &methods)?;
            println!("{:<18} {:<14} {:<42} gates", "method", "measurements", "qubits");
            for row in &rows {
                println!(
                    "{:<18} {:<14} {:<42} {}",
                    format!("{:?}", row.method).to_lowercase(),
                    row.measurements.to_string(),
                    row.qubits.to_string(),
                    row.gates
                );
            }
            if let Some(out) = cmd.out {
                output::write_json(&out, &rows)?;
                println!("wrote {}", out.display());
            }
        }
        Command::Preactivation(cmd) => {
            let xs = parse_list(&cmd.inputs, |s| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("bad input '{s}': {e}")))
            })?;
            let ws = parse_list(&cmd.weights, |s| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("bad weight '{s}': {e}")))
            })?;
            let theta = experiments::preactivation(&xs, &ws, cmd.bias)?;
            println!("{theta}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Capacity(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
