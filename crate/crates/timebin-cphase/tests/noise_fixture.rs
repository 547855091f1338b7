//! The committed noise fixture: a drift-plus-accidentals budget whose
//! pipeline output is heavily degraded yet still entangled.

use timebin_cphase::density::Subsystem;
use timebin_cphase::gate::{one_third_amplitude, SwitchProfile, TimeBinQubitSpec};
use timebin_cphase::metrics::{cphase_plus_target, fidelity_pure, partial_transpose_spectrum};
use timebin_cphase::noise::{noisy_state, NoiseConfig};

fn fixture() -> NoiseConfig {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/noise_config.json");
    let text = std::fs::read_to_string(path).expect("fixture file present");
    serde_json::from_str(&text).expect("fixture parses")
}

#[test]
fn fixture_lands_in_the_low_fidelity_band_and_stays_entangled() {
    let cfg = fixture();
    cfg.validate().unwrap();
    let plus = TimeBinQubitSpec::plus(one_third_amplitude());
    let report = noisy_state(&plus, &plus, &SwitchProfile::default(), &cfg).unwrap();

    let fidelity = fidelity_pure(&report.rho, &cphase_plus_target()).unwrap();
    assert!(
        (0.542..=0.698).contains(&fidelity),
        "fixture fidelity {fidelity} left the band"
    );

    let (pt, negativity) = partial_transpose_spectrum(&report.rho, Subsystem::Second).unwrap();
    assert!(pt[0] < 0.0, "fixture state lost its entanglement witness");
    assert!(negativity > 0.0);

    assert!(report.drift_average_applied);
    assert!(report.werner_p > 0.0 && report.werner_p < 1.0);
    report.rho.validate_physical(1e-10, 1e-10).unwrap();
}
