//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `--nocapture` to see them). Tolerances are pinned
//! here, not configurable.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use timebin_cphase::density::{DensityMatrix, Subsystem};
use timebin_cphase::gate::{
    self, ideal_output_state, max_deviation_up_to_phase, one_third_amplitude, SwitchProfile,
    TimeBinQubitSpec,
};
use timebin_cphase::hom::{self, HomScanConfig, HomScanMode};
use timebin_cphase::metrics::{
    self, cphase_plus_target, concurrence, fidelity_pure, linear_entropy,
    partial_transpose_spectrum, von_neumann_entropy,
};
use timebin_cphase::noise::{self, NoiseConfig};
use timebin_cphase::rng::derive_rng;
use timebin_cphase::tomography::{mle_reconstruct, simulate_counts, ProjectorSet};

fn operating_plus() -> TimeBinQubitSpec {
    TimeBinQubitSpec::plus(one_third_amplitude())
}

#[test]
fn a1_gate_identity() {
    let start = Instant::now();
    let result = gate::run_gate(&operating_plus(), &operating_plus(), &SwitchProfile::default())
        .expect("gate succeeds");
    let target = cphase_plus_target();
    let deviation = max_deviation_up_to_phase(&result.state, &target);
    assert!(
        deviation < 1e-12,
        "state deviates from (1,1,1,-1)/2 by {deviation}"
    );
    assert!(
        (result.probability - 1.0 / 9.0).abs() < 1e-12,
        "success probability {} != 1/9",
        result.probability
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("A1 gate identity: PASS ({elapsed:?})");
}

#[test]
fn a2_closed_form_equivalence() {
    let start = Instant::now();
    let mut rng = derive_rng(2024, "acceptance-a2");
    let att = one_third_amplitude();
    for trial in 0..200 {
        let a = TimeBinQubitSpec::from_c1(
            rng.gen_range(0.02..0.98),
            rng.gen_range(0.0..std::f64::consts::TAU),
            att,
        )
        .unwrap();
        let b = TimeBinQubitSpec::from_c1(
            rng.gen_range(0.02..0.98),
            rng.gen_range(0.0..std::f64::consts::TAU),
            att,
        )
        .unwrap();
        let pipeline = gate::run_gate(&a, &b, &SwitchProfile::default()).unwrap();
        let formula = ideal_output_state(&a, &b);
        let deviation = max_deviation_up_to_phase(&pipeline.state, &formula);
        assert!(deviation < 1e-10, "trial {trial}: deviation {deviation}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("A2 closed-form equivalence (200 random inputs): PASS ({elapsed:?})");
}

#[test]
fn a3_hom_visibilities() {
    let start = Instant::now();
    assert!((hom::visibility_theory(0.5).unwrap() - 1.0).abs() < 1e-9);
    assert!((hom::visibility_theory(1.0 / 3.0).unwrap() - 0.8).abs() < 1e-9);

    let scan_config = |ratio: f64, mode: HomScanMode| HomScanConfig {
        reflectivity: ratio,
        delays_ps: HomScanConfig::delay_grid(-60.0, 60.0, 61),
        sigma_ps: 10.0,
        shots_per_point: 100_000,
        seed: 42,
        mode,
    };
    let balanced = hom::hom_scan(&scan_config(0.5, HomScanMode::T2Split)).unwrap();
    assert!(
        (balanced.visibility.visibility - 1.0).abs() < 0.02,
        "balanced visibility {}",
        balanced.visibility.visibility
    );
    let third = hom::hom_scan(&scan_config(1.0 / 3.0, HomScanMode::T2Split)).unwrap();
    assert!(
        (third.visibility.visibility - 0.8).abs() < 0.03,
        "one-third visibility {}",
        third.visibility.visibility
    );
    let flat = hom::hom_scan(&scan_config(0.5, HomScanMode::T1Pass)).unwrap();
    let (min, max) = flat.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.p_analytic), hi.max(p.p_analytic))
    });
    assert!(max - min < 1e-12, "t1 trace is not flat: spread {}", max - min);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("A3 HOM visibilities (1.0 / 0.8 / flat t1): PASS ({elapsed:?})");
}

#[test]
fn a4_tomography_round_trip() {
    let start = Instant::now();
    let truth = DensityMatrix::from_pure(&cphase_plus_target()).unwrap();
    let counts = simulate_counts(&truth, &ProjectorSet::standard(), 100_000, 7).unwrap();
    let report = mle_reconstruct(&counts, 1e-10, 5000).unwrap();
    assert!(report.converged, "MLE did not converge");
    assert!(report.iterations < 5000);
    let fidelity = fidelity_pure(&report.estimate, &cphase_plus_target()).unwrap();
    assert!(fidelity >= 0.99, "round-trip fidelity {fidelity}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "A4 tomography round trip (fidelity {fidelity:.4}, {} iterations): PASS ({elapsed:?})",
        report.iterations
    );
}

#[test]
fn a5_peres_criterion() {
    let ideal = DensityMatrix::from_pure(&cphase_plus_target()).unwrap();
    let (spectrum, _) = partial_transpose_spectrum(&ideal, Subsystem::Second).unwrap();
    let expect = [-0.5, 0.5, 0.5, 0.5];
    for (got, want) in spectrum.iter().zip(expect) {
        assert!((got - want).abs() < 1e-9, "PT spectrum {spectrum:?}");
    }
    // trace preservation, mirrored on published-style eigenvalue lists
    let mut rng = derive_rng(5, "acceptance-a5");
    for _ in 0..50 {
        let rho = DensityMatrix::random_hs(&mut rng, 4).unwrap();
        let (s, _) = partial_transpose_spectrum(&rho, Subsystem::Second).unwrap();
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
    let reference = [-0.204, 0.18, 0.403, 0.621];
    assert!((reference.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    println!("A5 Peres criterion (PT spectrum and trace): PASS");
}

#[test]
fn a6_metrics_on_ideal_output() {
    let ideal = DensityMatrix::from_pure(&cphase_plus_target()).unwrap();
    let c = concurrence(&ideal).unwrap();
    assert!((c - 1.0).abs() < 1e-9, "concurrence {c}");
    let s = von_neumann_entropy(&ideal);
    assert!(s.abs() < 1e-9, "entropy {s}");
    let l = linear_entropy(&ideal);
    assert!(l.abs() < 1e-9, "linear entropy {l}");
    let f = fidelity_pure(&ideal, &cphase_plus_target()).unwrap();
    assert!((f - 1.0).abs() < 1e-12, "fidelity {f}");
    println!("A6 metrics on ideal output: PASS");
}

#[test]
fn a7_cnot_identity() {
    let (_, deviation) = metrics::cnot_from_cphase();
    assert!(deviation <= 1e-12, "CNOT deviation {deviation}");
    println!("A7 CNOT from sandwiched Hadamards: PASS (deviation {deviation:.2e})");
}

#[test]
fn a8_ppt_concurrence_agreement() {
    let mut rng = derive_rng(8, "acceptance-a8");
    let mut entangled = 0usize;
    for trial in 0..500 {
        let rho = DensityMatrix::random_hs(&mut rng, 4).unwrap();
        let c = concurrence(&rho).unwrap();
        let (spectrum, _) = partial_transpose_spectrum(&rho, Subsystem::Second).unwrap();
        let c_positive = c > 1e-8;
        let npt = spectrum[0] < -1e-8;
        assert_eq!(
            c_positive, npt,
            "trial {trial}: concurrence {c} vs min PT {}",
            spectrum[0]
        );
        entangled += usize::from(c_positive);
    }
    // both classes must actually be exercised
    assert!(entangled > 50 && entangled < 450);
    println!("A8 PPT/concurrence agreement on 500 states ({entangled} entangled): PASS");
}

#[test]
fn a9_noise_reproduction() {
    let start = Instant::now();
    let plus = operating_plus();
    let profile = SwitchProfile::default();

    // (i) fidelity under drift is non-increasing on the sigma grid
    let mut last = f64::INFINITY;
    for i in 0..=10 {
        let sigma = 0.05 * i as f64;
        let rho = noise::drift_averaged_state(&plus, &plus, &profile, sigma, 21).unwrap();
        let f = fidelity_pure(&rho, &cphase_plus_target()).unwrap();
        assert!(f <= last + 1e-12, "fidelity rose at sigma {sigma}");
        last = f;
    }

    // (ii) the committed fixture lands in the reported band, entangled
    let fixture_path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../timebin-cphase/tests/fixtures/noise_config.json");
    let cfg: NoiseConfig =
        serde_json::from_str(&std::fs::read_to_string(fixture_path).unwrap()).unwrap();
    let report = noise::noisy_state(&plus, &plus, &profile, &cfg).unwrap();
    let fidelity = fidelity_pure(&report.rho, &cphase_plus_target()).unwrap();
    assert!(
        (0.542..=0.698).contains(&fidelity),
        "fixture fidelity {fidelity} outside [0.542, 0.698]"
    );
    let (pt, _) = partial_transpose_spectrum(&report.rho, Subsystem::Second).unwrap();
    assert!(pt[0] < 0.0, "fixture state is not entangled: min PT {}", pt[0]);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "A9 noise reproduction (fixture fidelity {fidelity:.3}, min PT {:.3}): PASS ({elapsed:?})",
        pt[0]
    );
}

#[test]
fn a10_reproducibility() {
    let dir = std::env::temp_dir().join(format!("timebin-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bin = env!("CARGO_BIN_EXE_timebin-cphase");
    let gate = dir.join("gate.json");

    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().unwrap();
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };

    run(&["gate", "--out", gate.to_str().unwrap()]);
    let mut artifacts: Vec<(String, Vec<u8>)> = Vec::new();
    for pass in 0..2 {
        let tag = |name: &str| dir.join(format!("{name}-{pass}")).to_str().unwrap().to_string();
        let gate_out = tag("gate.json");
        run(&["gate", "--phi-a", "0.3", "--out", &gate_out]);
        let hom_out = tag("hom.csv");
        run(&["hom", "--shots", "30000", "--seed", "11", "--out", &hom_out]);
        let counts_out = tag("counts.json");
        run(&[
            "qst",
            "simulate",
            "--state",
            gate.to_str().unwrap(),
            "--shots",
            "20000",
            "--seed",
            "13",
            "--out",
            &counts_out,
        ]);
        let sweep_out = tag("sweep.csv");
        run(&[
            "noise", "sweep", "--sigma-max", "0.2", "--sigma-step", "0.1", "--out", &sweep_out,
        ]);
        for path in [gate_out, hom_out, counts_out, sweep_out] {
            let name = path.rsplit('/').next().unwrap().replace(&format!("-{pass}"), "");
            artifacts.push((format!("{name}#{pass}"), std::fs::read(&path).unwrap()));
        }
    }
    for i in 0..4 {
        let (name_a, bytes_a) = &artifacts[i];
        let (name_b, bytes_b) = &artifacts[i + 4];
        assert_eq!(bytes_a, bytes_b, "{name_a} vs {name_b} differ");
    }
    std::fs::remove_dir_all(&dir).ok();
    println!("A10 byte-identical reruns (gate, hom, qst, sweep): PASS");
}
