//! End-to-end checks of the binary: file outputs, exit codes, and
//! bit-for-bit reproducibility.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_timebin-cphase"))
}

struct Workdir(PathBuf);

impl Workdir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("timebin-cphase-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Workdir(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Workdir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run_ok(args: &[&str]) {
    let output = bin().args(args).output().unwrap();
    assert!(
        output.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&output.stderr)
    );
}

fn json_of(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gate_defaults_write_the_entangled_state() {
    let dir = Workdir::new("gate-defaults");
    let out = dir.path("gate.json");
    run_ok(&["gate", "--out", out.to_str().unwrap()]);
    let doc = json_of(&out);
    assert_eq!(doc["schema_version"], 1);
    let p = doc["probability"].as_f64().unwrap();
    assert!((p - 1.0 / 9.0).abs() < 1e-12);
    let re: Vec<f64> = doc["state"]["amp_re"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let expect = [0.5, 0.5, 0.5, -0.5];
    for (got, want) in re.iter().zip(expect) {
        assert!((got - want).abs() < 1e-12, "{re:?}");
    }
    // config echo carries the resolved defaults
    assert!((doc["config"]["att1"].as_f64().unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
}

#[test]
fn gate_phase_flip_moves_the_sign() {
    let dir = Workdir::new("gate-phase");
    let out = dir.path("gate.json");
    run_ok(&[
        "gate",
        "--phi-a",
        "3.141592653589793",
        "--phi-b",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    let doc = json_of(&out);
    let re: Vec<f64> = doc["state"]["amp_re"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let expect = [0.5, 0.5, -0.5, 0.5];
    for (got, want) in re.iter().zip(expect) {
        assert!((got - want).abs() < 1e-9, "{re:?}");
    }
}

#[test]
fn gate_basis_input_passes_straight_through() {
    let dir = Workdir::new("gate-basis");
    let out = dir.path("gate.json");
    run_ok(&["gate", "--c1a", "1", "--c1b", "1", "--out", out.to_str().unwrap()]);
    let doc = json_of(&out);
    let re = doc["state"]["amp_re"].as_array().unwrap();
    assert!((re[0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    for amp in re.iter().skip(1) {
        assert!(amp.as_f64().unwrap().abs() < 1e-12);
    }
    // both t1 components attenuated by default: success (1/3)^2
    let p = doc["probability"].as_f64().unwrap();
    assert!((p - 1.0 / 9.0).abs() < 1e-12);
}

#[test]
fn hom_summaries_match_theory() {
    let dir = Workdir::new("hom");
    let half = dir.path("half.csv");
    run_ok(&["hom", "--ratio", "0.5", "--out", half.to_str().unwrap()]);
    let summary = json_of(&dir.path("half.json"));
    assert!((summary["V"].as_f64().unwrap() - 1.0).abs() < 0.02);
    assert_eq!(summary["flat_trace"], false);
    assert_eq!(summary["R"].as_f64().unwrap(), 0.5);

    let third = dir.path("third.csv");
    run_ok(&["hom", "--ratio", "0.3333333", "--out", third.to_str().unwrap()]);
    let summary = json_of(&dir.path("third.json"));
    assert!((summary["V"].as_f64().unwrap() - 0.8).abs() < 0.03);

    let flat = dir.path("flat.csv");
    run_ok(&["hom", "--mode", "t1-pass", "--out", flat.to_str().unwrap()]);
    let summary = json_of(&dir.path("flat.json"));
    assert_eq!(summary["flat_trace"], true);

    let header = std::fs::read_to_string(&half).unwrap();
    assert!(header.starts_with("delay_ps,p_analytic,coincidences,shots\n"));
}

#[test]
fn qst_round_trip_through_files() {
    let dir = Workdir::new("qst");
    let gate = dir.path("gate.json");
    run_ok(&["gate", "--out", gate.to_str().unwrap()]);

    let counts = dir.path("counts.json");
    run_ok(&[
        "qst",
        "simulate",
        "--state",
        gate.to_str().unwrap(),
        "--shots",
        "100000",
        "--seed",
        "1",
        "--out",
        counts.to_str().unwrap(),
    ]);
    let counts_doc = json_of(&counts);
    assert_eq!(counts_doc["settings"].as_array().unwrap().len(), 16);

    let recon = dir.path("recon.json");
    run_ok(&[
        "qst",
        "reconstruct",
        "--counts",
        counts.to_str().unwrap(),
        "--out",
        recon.to_str().unwrap(),
    ]);
    let doc = json_of(&recon);
    assert_eq!(doc["report"]["converged"], true);
    assert!(doc["metrics"]["fidelity_to_target"].as_f64().unwrap() >= 0.99);
}

#[test]
fn qst_simulate_from_maximally_mixed() {
    let dir = Workdir::new("qst-mixed");
    let state = dir.path("mixed.json");
    let zeros = vec![vec![0.0f64; 4]; 4];
    let quarter = serde_json::json!({
        "dim": 4,
        "basis": ["t1t1", "t1t2", "t2t1", "t2t2"],
        "re": [[0.25,0.0,0.0,0.0],[0.0,0.25,0.0,0.0],[0.0,0.0,0.25,0.0],[0.0,0.0,0.0,0.25]],
        "im": zeros,
    });
    std::fs::write(&state, serde_json::to_string(&quarter).unwrap()).unwrap();
    let counts = dir.path("counts.json");
    run_ok(&[
        "qst",
        "simulate",
        "--state",
        state.to_str().unwrap(),
        "--shots",
        "100000",
        "--seed",
        "3",
        "--out",
        counts.to_str().unwrap(),
    ]);
    let doc = json_of(&counts);
    for setting in doc["settings"].as_array().unwrap() {
        let k = setting["k"].as_f64().unwrap();
        // five-sigma window around 0.25 * shots
        assert!((k - 25_000.0).abs() < 5.0 * (100_000.0f64 * 0.25 * 0.75).sqrt());
    }
}

#[test]
fn linear_method_reports_negative_eigenvalues() {
    let dir = Workdir::new("qst-linear");
    let gate = dir.path("gate.json");
    run_ok(&["gate", "--out", gate.to_str().unwrap()]);
    let counts = dir.path("counts.json");
    run_ok(&[
        "qst",
        "simulate",
        "--state",
        gate.to_str().unwrap(),
        "--shots",
        "500",
        "--seed",
        "1",
        "--out",
        counts.to_str().unwrap(),
    ]);
    let recon = dir.path("linear.json");
    run_ok(&[
        "qst",
        "reconstruct",
        "--counts",
        counts.to_str().unwrap(),
        "--method",
        "linear",
        "--out",
        recon.to_str().unwrap(),
    ]);
    let doc = json_of(&recon);
    assert_eq!(doc["report"]["method"], "linear");
    let negative = doc["negative_eigenvalues"].as_array().unwrap();
    assert!(
        !negative.is_empty(),
        "finite counts of a pure state should produce an indefinite linear estimate"
    );
}

#[test]
fn metrics_of_the_gate_output() {
    let dir = Workdir::new("metrics");
    let gate = dir.path("gate.json");
    run_ok(&["gate", "--out", gate.to_str().unwrap()]);
    let out = dir.path("metrics.json");
    run_ok(&[
        "metrics",
        "--state",
        gate.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let doc = json_of(&out);
    let m = &doc["metrics"];
    assert!((m["fidelity_to_target"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((m["concurrence"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(m["target"], "cp-plus-plus");
}

#[test]
fn noise_sweep_columns_behave() {
    let dir = Workdir::new("sweep");
    let out = dir.path("sweep.csv");
    run_ok(&["noise", "sweep", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("sigma_theta_rad,fidelity,concurrence,min_pt_eigenvalue,werner_p")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    assert!((rows[0][1] - 1.0).abs() < 1e-9, "sigma=0 fidelity {}", rows[0][1]);
    for pair in rows.windows(2) {
        assert!(pair[1][1] < pair[0][1], "fidelity not strictly decreasing");
    }
    for row in &rows {
        assert!(row[4] < 1.0, "werner_p must reflect accidentals");
    }
    let summary = json_of(&dir.path("sweep.json"));
    assert!(summary["rate_estimate"]["rate_hz"].as_f64().unwrap() > 0.0);
    assert!(summary["rate_estimate"]["caveat"].as_str().unwrap().len() > 10);
}

#[test]
fn exit_codes_separate_usage_from_numerics() {
    let dir = Workdir::new("exit");
    let out = dir.path("x.json");
    // invalid argument
    let status = bin()
        .args(["gate", "--c1a", "1.5", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    // clap-level parse error
    let status = bin().args(["gate", "--no-such-flag"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    // empty post-selection is a numerical failure
    let status = bin()
        .args([
            "gate", "--att1", "0", "--c1a", "1", "--c1b", "1", "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
    // missing input file
    let status = bin()
        .args(["metrics", "--state", "/nonexistent.json", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_three_but_writes_the_report() {
    let dir = Workdir::new("nonconv");
    let gate = dir.path("gate.json");
    run_ok(&["gate", "--out", gate.to_str().unwrap()]);
    let counts = dir.path("counts.json");
    run_ok(&[
        "qst",
        "simulate",
        "--state",
        gate.to_str().unwrap(),
        "--shots",
        "5000",
        "--seed",
        "2",
        "--out",
        counts.to_str().unwrap(),
    ]);
    let recon = dir.path("recon.json");
    let status = bin()
        .args([
            "qst",
            "reconstruct",
            "--counts",
            counts.to_str().unwrap(),
            "--tol",
            "0",
            "--max-iter",
            "2",
            "--out",
            recon.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
    let doc = json_of(&recon);
    assert_eq!(doc["report"]["converged"], false);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = Workdir::new("repro");
    let gate = dir.path("gate.json");
    run_ok(&["gate", "--out", gate.to_str().unwrap()]);
    for name in ["a", "b"] {
        run_ok(&[
            "hom",
            "--shots",
            "20000",
            "--seed",
            "5",
            "--out",
            dir.path(&format!("hom-{name}.csv")).to_str().unwrap(),
        ]);
        run_ok(&[
            "qst",
            "simulate",
            "--state",
            gate.to_str().unwrap(),
            "--shots",
            "5000",
            "--seed",
            "9",
            "--out",
            dir.path(&format!("counts-{name}.json")).to_str().unwrap(),
        ]);
    }
    let a = std::fs::read(dir.path("counts-a.json")).unwrap();
    let b = std::fs::read(dir.path("counts-b.json")).unwrap();
    assert_eq!(a, b, "counts output differs between runs");
    for ext in ["csv", "json"] {
        let a = std::fs::read(dir.path(&format!("hom-a.{ext}"))).unwrap();
        let b = std::fs::read(dir.path(&format!("hom-b.{ext}"))).unwrap();
        assert_eq!(a, b, "hom {ext} differs between runs");
    }
}
