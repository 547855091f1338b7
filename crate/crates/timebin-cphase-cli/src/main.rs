//! Command-line front end: every pipeline as a reproducible, seeded,
//! file-based run. Each output embeds the schema version and the fully
//! resolved configuration, so rerunning a command with the same seed
//! reproduces the files byte for byte.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector4;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use timebin_cphase::density::{DensityMatrix, StateVector};
use timebin_cphase::gate::{
    self, canonical_global_phase, SwitchProfile, TimeBinQubitSpec,
};
use timebin_cphase::hom::{self, HomScanConfig, HomScanMode};
use timebin_cphase::metrics::{self, MetricsReport};
use timebin_cphase::noise::{self, NoiseConfig};
use timebin_cphase::tomography::{self, CountsRecord, ProjectorSet};
use timebin_cphase::{Error as LibError, SCHEMA_VERSION};

const DEFAULT_ATT1: f64 = 0.577_350_269_189_625_8; // sqrt(1/3)
const DEFAULT_THETA2: f64 = 1.910_633_236_249_018_6; // 2 acos(1/sqrt 3)

/// Simulator for a time-bin-qubit controlled-phase gate built from a
/// time-dependent 2x2 optical switch.
#[derive(Parser)]
#[command(name = "timebin-cphase", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the gate pipeline and write the post-selected state.
    Gate(GateArgs),
    /// Hong-Ou-Mandel delay scan with sampled counting statistics.
    Hom(HomArgs),
    /// Quantum state tomography.
    #[command(subcommand)]
    Qst(QstCommand),
    /// Entanglement metrics of a stored state.
    Metrics(MetricsArgs),
    /// Noise modelling.
    #[command(subcommand)]
    Noise(NoiseCommand),
}

#[derive(Subcommand)]
enum QstCommand {
    /// Simulate the 16 projective settings on a stored state.
    Simulate(QstSimulateArgs),
    /// Reconstruct a density matrix from stored counts.
    Reconstruct(QstReconstructArgs),
}

#[derive(Subcommand)]
enum NoiseCommand {
    /// Sweep the switch-drift width and tabulate state quality.
    Sweep(NoiseSweepArgs),
}

#[derive(Args, Serialize)]
struct GateArgs {
    /// Relative phase of qubit A (radians).
    #[arg(long, default_value_t = 0.0)]
    phi_a: f64,
    /// Relative phase of qubit B (radians).
    #[arg(long, default_value_t = 0.0)]
    phi_b: f64,
    /// t1 amplitude of qubit A; the t2 amplitude is sqrt(1 - c1a^2).
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    c1a: f64,
    /// t1 amplitude of qubit B.
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    c1b: f64,
    /// Preparation-stage amplitude attenuation of the t1 component; the
    /// default sqrt(1/3) is the value that balances the gate.
    #[arg(long, default_value_t = DEFAULT_ATT1)]
    att1: f64,
    /// Switch angle for the first time bin (radians).
    #[arg(long, default_value_t = 0.0)]
    theta1: f64,
    /// Switch angle for the second time bin (radians); the default
    /// 2 acos(1/sqrt 3) is a one-third beam splitter.
    #[arg(long, default_value_t = DEFAULT_THETA2)]
    theta2: f64,
    /// Output JSON path.
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct HomArgs {
    /// Intensity reflectivity of the splitting time bin.
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    /// First delay (ps).
    #[arg(long, default_value_t = -60.0)]
    delay_min: f64,
    /// Last delay (ps).
    #[arg(long, default_value_t = 60.0)]
    delay_max: f64,
    /// Number of scan points.
    #[arg(long, default_value_t = 61)]
    points: usize,
    /// Temporal-overlap width (ps).
    #[arg(long, default_value_t = 10.0)]
    sigma: f64,
    /// Pair events per scan point.
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Which temporal mode carries the photon pair.
    #[arg(long, value_enum, default_value_t = ModeArg::T2Split)]
    mode: ModeArg,
    /// Output CSV path; a JSON summary lands next to it.
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    /// Both photons in t1: the switch is transparent, no dip.
    T1Pass,
    /// Both photons in t2: the switch splits with the given ratio.
    T2Split,
}

impl From<ModeArg> for HomScanMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::T1Pass => HomScanMode::T1Pass,
            ModeArg::T2Split => HomScanMode::T2Split,
        }
    }
}

#[derive(Args, Serialize)]
struct QstSimulateArgs {
    /// State file: a density-matrix JSON, a state-vector JSON, or a gate
    /// output containing a "density_matrix" field.
    #[arg(long)]
    state: PathBuf,
    /// Shots per measurement setting.
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON path.
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct QstReconstructArgs {
    /// Counts file produced by `qst simulate`.
    #[arg(long)]
    counts: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Mle)]
    method: MethodArg,
    /// Convergence tolerance on the log-likelihood improvement.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    /// Named target state (cp-plus-plus, t1t1, t1t2, t2t1, t2t2) or a
    /// state-vector JSON path.
    #[arg(long, default_value = "cp-plus-plus")]
    target: String,
    /// Output JSON path.
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    Linear,
    Mle,
}

#[derive(Args, Serialize)]
struct MetricsArgs {
    /// State file (density matrix, state vector, or gate output).
    #[arg(long)]
    state: PathBuf,
    /// Named target state or a state-vector JSON path.
    #[arg(long, default_value = "cp-plus-plus")]
    target: String,
    /// Output JSON path.
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct NoiseSweepArgs {
    #[arg(long, default_value_t = 0.0)]
    sigma_min: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma_max: f64,
    #[arg(long, default_value_t = 0.05)]
    sigma_step: f64,
    /// Mean correlated pairs per pulse.
    #[arg(long, default_value_t = 0.028)]
    mu: f64,
    #[arg(long, default_value_t = 2.5e8)]
    rep_rate_hz: f64,
    /// Detector efficiency, first output arm.
    #[arg(long, default_value_t = 0.57)]
    eta_c: f64,
    /// Detector efficiency, second output arm.
    #[arg(long, default_value_t = 0.62)]
    eta_d: f64,
    /// Dark counts per second and detector.
    #[arg(long, default_value_t = 40.0)]
    dark_cps: f64,
    /// Insertion loss of one analysis interferometer (dB).
    #[arg(long, default_value_t = 2.0)]
    loss_interferometer_db: f64,
    /// Insertion loss of the switch (dB).
    #[arg(long, default_value_t = 7.7)]
    loss_switch_db: f64,
    /// Drift-averaging grid points (odd).
    #[arg(long, default_value_t = 21)]
    grid_points: usize,
    /// Output CSV path; a JSON summary lands next to it.
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

enum CliError {
    /// Exit code 2.
    Usage(String),
    /// Exit code 3.
    Numerical(String),
}

impl From<LibError> for CliError {
    fn from(e: LibError) -> Self {
        match e {
            LibError::InvalidParameter { .. }
            | LibError::InvalidInput(_)
            | LibError::InvalidDensityMatrix(_)
            | LibError::UnexpectedMode { .. }
            | LibError::RankDeficient { .. }
            | LibError::VisibilityEstimate(_) => CliError::Usage(e.to_string()),
            LibError::Numerical(_)
            | LibError::EmptyPostselection { .. }
            | LibError::ZeroNorm { .. }
            | LibError::NonUnitary { .. }
            | LibError::PhotonNumberMismatch { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gate(args) => cmd_gate(args),
        Command::Hom(args) => cmd_hom(args),
        Command::Qst(QstCommand::Simulate(args)) => cmd_qst_simulate(args),
        Command::Qst(QstCommand::Reconstruct(args)) => cmd_qst_reconstruct(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Noise(NoiseCommand::Sweep(args)) => cmd_noise_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<serde_json::Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{} is not valid JSON: {e}", path.display())))
}

/// Accepts a bare density matrix, a state vector, or any envelope with a
/// `density_matrix` field.
fn load_density(path: &Path) -> Result<DensityMatrix, CliError> {
    let value = read_json(path)?;
    let source = if let Some(inner) = value.get("density_matrix") {
        inner.clone()
    } else {
        value
    };
    if source.get("amp_re").is_some() {
        let sv: StateVector = serde_json::from_value(source)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        return sv.to_density().map_err(CliError::from);
    }
    serde_json::from_value(source).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parse_target(spec: &str) -> Result<(String, Vector4<Complex64>), CliError> {
    let basis = |i: usize| {
        let mut v = Vector4::from_element(Complex64::new(0.0, 0.0));
        v[i] = Complex64::new(1.0, 0.0);
        v
    };
    let vec = match spec {
        "cp-plus-plus" => metrics::cphase_plus_target(),
        "t1t1" => basis(0),
        "t1t2" => basis(1),
        "t2t1" => basis(2),
        "t2t2" => basis(3),
        path => {
            let value = read_json(Path::new(path))?;
            let sv: StateVector = serde_json::from_value(value)
                .map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
            *sv.amplitudes()
        }
    };
    Ok((spec.to_string(), vec))
}

/// Sidecar path for CSV outputs: the same stem with a .json extension.
fn sidecar_path(out: &Path) -> PathBuf {
    let sidecar = out.with_extension("json");
    if sidecar == out {
        out.with_extension("summary.json")
    } else {
        sidecar
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn cmd_gate(args: GateArgs) -> Result<(), CliError> {
    let a = TimeBinQubitSpec::from_c1(args.c1a, args.phi_a, args.att1)?;
    let b = TimeBinQubitSpec::from_c1(args.c1b, args.phi_b, args.att1)?;
    let profile = SwitchProfile::new(args.theta1, args.theta2);
    let result = gate::run_gate(&a, &b, &profile)?;
    let state = canonical_global_phase(&result.state);
    let density = DensityMatrix::from_pure(&state)?;
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "config": serde_json::to_value(&args).expect("args serialize"),
        "probability": result.probability,
        "state": StateVector::new(state),
        "density_matrix": density,
    });
    write_file(&args.out, &pretty(&out))
}

fn cmd_hom(args: HomArgs) -> Result<(), CliError> {
    let config = HomScanConfig {
        reflectivity: args.ratio,
        delays_ps: HomScanConfig::delay_grid(args.delay_min, args.delay_max, args.points),
        sigma_ps: args.sigma,
        shots_per_point: args.shots,
        seed: args.seed,
        mode: args.mode.into(),
    };
    let scan = hom::hom_scan(&config)?;
    let mut csv = Vec::new();
    hom::write_csv(&scan, &mut csv)
        .map_err(|e| CliError::Usage(format!("cannot encode CSV: {e}")))?;
    write_file(
        &args.out,
        std::str::from_utf8(&csv).expect("CSV is UTF-8"),
    )?;

    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "config": serde_json::to_value(&args).expect("args serialize"),
        "V": scan.visibility.visibility,
        "sigma_V": scan.visibility.sigma,
        "R": args.ratio,
        "flat_trace": scan.is_flat_analytic(),
    });
    write_file(&sidecar_path(&args.out), &pretty(&summary))
}

fn cmd_qst_simulate(args: QstSimulateArgs) -> Result<(), CliError> {
    let rho = load_density(&args.state)?;
    let counts = tomography::simulate_counts(&rho, &ProjectorSet::standard(), args.shots, args.seed)?;
    let mut out = serde_json::to_value(&counts).expect("counts serialize");
    let obj = out.as_object_mut().expect("counts are an object");
    obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
    obj.insert(
        "config".into(),
        serde_json::to_value(&args).expect("args serialize"),
    );
    write_file(&args.out, &pretty(&out))
}

fn cmd_qst_reconstruct(args: QstReconstructArgs) -> Result<(), CliError> {
    let value = read_json(&args.counts)?;
    let counts: CountsRecord = serde_json::from_value(value)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.counts.display())))?;
    let report = match args.method {
        MethodArg::Mle => tomography::mle_reconstruct(&counts, args.tol, args.max_iter)?,
        MethodArg::Linear => tomography::linear_reconstruct(&counts)?,
    };
    let (label, target) = parse_target(&args.target)?;
    let metrics_report = MetricsReport::compute(&report.estimate, &label, &target)?;
    let negative: Vec<f64> = report
        .estimate
        .eigenvalues()
        .into_iter()
        .filter(|&l| l < -1e-10)
        .collect();

    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "config": serde_json::to_value(&args).expect("args serialize"),
        "report": report,
        "negative_eigenvalues": negative,
        "metrics": metrics_report,
    });
    write_file(&args.out, &pretty(&out))?;
    if !report.converged {
        return Err(CliError::Numerical(format!(
            "reconstruction did not converge within {} iterations (report written to {})",
            report.iterations,
            args.out.display()
        )));
    }
    Ok(())
}

fn cmd_metrics(args: MetricsArgs) -> Result<(), CliError> {
    let rho = load_density(&args.state)?;
    let (label, target) = parse_target(&args.target)?;
    let report = MetricsReport::compute(&rho, &label, &target)?;
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "config": serde_json::to_value(&args).expect("args serialize"),
        "metrics": report,
    });
    write_file(&args.out, &pretty(&out))
}

fn cmd_noise_sweep(args: NoiseSweepArgs) -> Result<(), CliError> {
    if args.sigma_step <= 0.0 || args.sigma_max < args.sigma_min {
        return Err(CliError::Usage(
            "sigma range needs sigma_step > 0 and sigma_max >= sigma_min".into(),
        ));
    }
    let cfg = NoiseConfig {
        sigma_theta_rad: args.sigma_min,
        mu_pairs: args.mu,
        rep_rate_hz: args.rep_rate_hz,
        eta_det: [args.eta_c, args.eta_d],
        dark_cps: args.dark_cps,
        loss_interferometer_db: args.loss_interferometer_db,
        loss_switch_db: args.loss_switch_db,
        drift_grid_points: args.grid_points,
    };
    let steps = ((args.sigma_max - args.sigma_min) / args.sigma_step).round() as usize;
    let sigmas: Vec<f64> = (0..=steps)
        .map(|i| args.sigma_min + args.sigma_step * i as f64)
        .filter(|&s| s <= args.sigma_max + 1e-12)
        .collect();

    let plus = TimeBinQubitSpec::plus(gate::one_third_amplitude());
    let rows = noise::noise_sweep(
        &plus,
        &plus,
        &SwitchProfile::default(),
        &cfg,
        &sigmas,
        &metrics::cphase_plus_target(),
    )?;
    let mut csv = Vec::new();
    noise::write_sweep_csv(&rows, &mut csv)
        .map_err(|e| CliError::Usage(format!("cannot encode CSV: {e}")))?;
    write_file(&args.out, std::str::from_utf8(&csv).expect("CSV is UTF-8"))?;

    let rate = noise::coincidence_rate_estimate(&cfg)?;
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "config": serde_json::to_value(&args).expect("args serialize"),
        "rows": rows.len(),
        "rate_estimate": rate,
    });
    write_file(&sidecar_path(&args.out), &pretty(&summary))
}
