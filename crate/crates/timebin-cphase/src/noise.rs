//! Experimental imperfections layered on top of the ideal gate.
//!
//! Three effects are modelled, matching the dominant error sources of a
//! fiber-based realization:
//!
//! * **splitting-ratio drift** — the switch angle for the second time bin
//!   wanders quasi-statically (slow bias drift), so the observed state is
//!   an incoherent average of pure gate outputs over a Gaussian of angle
//!   offsets;
//! * **accidental coincidences** — double pair emission and detector dark
//!   counts produce uncorrelated coincidences, mixed in as white noise
//!   (a Werner-form admixture of `I/4`);
//! * **component losses and detector efficiency** — fold into the
//!   coincidence-rate estimate and the weighting between true and
//!   accidental events.
//!
//! The coincidence-rate estimate is advisory: couplings and filter losses
//! outside the model make the measured rate lower than predicted.

use std::io::Write;

use nalgebra::{DMatrix, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::gate::{run_gate, SwitchProfile, TimeBinQubitSpec};
use crate::metrics;

/// Post-selection success probability of the balanced gate.
const GATE_SUCCESS: f64 = 1.0 / 9.0;

/// Knobs for the imperfection model. Defaults reflect a realistic
/// telecom-band setup: 0.028 pairs per pulse at a 250 MHz repetition rate,
/// detector efficiencies of 57% and 62%, fewer than 40 dark counts per
/// second, and insertion losses of 2.0 dB per interferometer and 7.7 dB
/// for the switch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Standard deviation of the quasi-static drift of `theta(t2)`, rad.
    pub sigma_theta_rad: f64,
    /// Mean correlated pairs per pump pulse.
    pub mu_pairs: f64,
    pub rep_rate_hz: f64,
    /// Detector efficiencies at the two output arms.
    pub eta_det: [f64; 2],
    /// Dark counts per second, per detector.
    pub dark_cps: f64,
    pub loss_interferometer_db: f64,
    pub loss_switch_db: f64,
    /// Grid points for drift averaging; must be odd so the grid has a
    /// center point.
    pub drift_grid_points: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            sigma_theta_rad: 0.0,
            mu_pairs: 0.028,
            rep_rate_hz: 2.5e8,
            eta_det: [0.57, 0.62],
            dark_cps: 40.0,
            loss_interferometer_db: 2.0,
            loss_switch_db: 7.7,
            drift_grid_points: 21,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 7] = [
            (
                "sigma_theta_rad",
                self.sigma_theta_rad,
                self.sigma_theta_rad >= 0.0,
            ),
            ("mu_pairs", self.mu_pairs, (0.0..0.5).contains(&self.mu_pairs)),
            ("rep_rate_hz", self.rep_rate_hz, self.rep_rate_hz > 0.0),
            ("dark_cps", self.dark_cps, self.dark_cps >= 0.0),
            (
                "loss_interferometer_db",
                self.loss_interferometer_db,
                self.loss_interferometer_db >= 0.0,
            ),
            (
                "loss_switch_db",
                self.loss_switch_db,
                self.loss_switch_db >= 0.0,
            ),
            (
                "eta_det",
                self.eta_det[0].min(self.eta_det[1]),
                self.eta_det.iter().all(|e| (0.0..=1.0).contains(e)),
            ),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    constraint: "outside its physical range (pair rate must also stay << 1)",
                });
            }
        }
        if self.drift_grid_points % 2 == 0 || self.drift_grid_points == 0 {
            return Err(Error::InvalidParameter {
                name: "drift_grid_points",
                value: self.drift_grid_points as f64,
                constraint: "grid needs an odd number of points (center point required)",
            });
        }
        Ok(())
    }

    /// Linear intensity transmission of one photon path (one analysis
    /// interferometer plus the switch).
    pub fn photon_transmission(&self) -> f64 {
        db_to_transmission(self.loss_interferometer_db + self.loss_switch_db)
    }
}

/// `10^(-dB/10)`.
pub fn db_to_transmission(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

/// Incoherent average of gate outputs over a Gaussian of `theta(t2)`
/// offsets: a symmetric uniform grid of `grid_points` spanning `±4 sigma`,
/// each branch weighted by the Gaussian density times its success
/// probability. `sigma = 0` returns the undrifted projector.
pub fn drift_averaged_state(
    a: &TimeBinQubitSpec,
    b: &TimeBinQubitSpec,
    profile: &SwitchProfile,
    sigma_theta: f64,
    grid_points: usize,
) -> Result<DensityMatrix> {
    if sigma_theta < 0.0 {
        return Err(Error::InvalidParameter {
            name: "sigma_theta",
            value: sigma_theta,
            constraint: "drift width must be nonnegative",
        });
    }
    if grid_points % 2 == 0 || grid_points == 0 {
        return Err(Error::InvalidParameter {
            name: "grid_points",
            value: grid_points as f64,
            constraint: "grid needs an odd number of points (center point required)",
        });
    }
    if sigma_theta == 0.0 {
        let result = run_gate(a, b, profile)?;
        return DensityMatrix::from_pure(&result.state);
    }

    let mut accumulated: DMatrix<Complex64> = DMatrix::zeros(4, 4);
    let mut total_weight = 0.0;
    let half_span = 4.0 * sigma_theta;
    let step = 2.0 * half_span / (grid_points - 1) as f64;
    for j in 0..grid_points {
        let delta = -half_span + step * j as f64;
        let weight = (-delta * delta / (2.0 * sigma_theta * sigma_theta)).exp();
        let drifted = SwitchProfile::new(profile.theta_t1, profile.theta_t2 + delta);
        let branch = match run_gate(a, b, &drifted) {
            Ok(r) => r,
            // a branch whose coincidence amplitude vanishes contributes
            // zero weight
            Err(Error::EmptyPostselection { .. }) => continue,
            Err(e) => return Err(e),
        };
        let w = weight * branch.probability;
        for r in 0..4 {
            for c in 0..4 {
                accumulated[(r, c)] +=
                    Complex64::new(w, 0.0) * branch.state[r] * branch.state[c].conj();
            }
        }
        total_weight += w;
    }
    if total_weight <= 0.0 {
        return Err(Error::Numerical(
            "drift averaging collected no successful branches".into(),
        ));
    }
    DensityMatrix::from_matrix(crate::density::hermitize(
        &accumulated.map(|z| z / total_weight),
    ))
}

/// Mixes accidental coincidences into the signal state as white noise.
///
/// Per pulse, true coincidences occur with probability `mu G` where `G`
/// folds the gate success, both photon transmissions and both detector
/// efficiencies. Accidentals come from Poissonian double pairs
/// (`mu^2/2 . G`), dark-dark coincidences within one repetition period,
/// and dark-photon cross terms. The output is
/// `p rho + (1 - p) I/4` with `p = R_true / (R_true + R_acc)`.
pub fn accidental_mixing(
    rho_signal: &DensityMatrix,
    cfg: &NoiseConfig,
) -> Result<(DensityMatrix, f64)> {
    cfg.validate()?;
    if rho_signal.dim() != 4 {
        return Err(Error::InvalidDensityMatrix(
            "accidental mixing acts on two-qubit states".into(),
        ));
    }
    let t = cfg.photon_transmission();
    let [eta_c, eta_d] = cfg.eta_det;
    let g = GATE_SUCCESS * t * t * eta_c * eta_d;
    let mu = cfg.mu_pairs;

    let p_true = mu * g;
    let p_dark = cfg.dark_cps / cfg.rep_rate_hz;
    // singles at each arm; on average half of the photon flux exits each port
    let q_c = 0.5 * mu * t * eta_c;
    let q_d = 0.5 * mu * t * eta_d;
    let p_acc = 0.5 * mu * mu * g + p_dark * q_d + p_dark * q_c + p_dark * p_dark;

    let werner_p = if p_true + p_acc <= 0.0 {
        1.0
    } else {
        p_true / (p_true + p_acc)
    };
    let mixed = rho_signal.mix(&DensityMatrix::maximally_mixed(4)?, werner_p)?;
    Ok((mixed, werner_p))
}

/// Advisory coincidence-rate estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate_hz: f64,
    /// What the estimate leaves out.
    pub caveat: String,
}

/// `mu . rep_rate . (1/9) . t_C t_D . eta_C eta_D`; an upper bound on the
/// observable coincidence rate.
pub fn coincidence_rate_estimate(cfg: &NoiseConfig) -> Result<RateEstimate> {
    cfg.validate()?;
    let t = cfg.photon_transmission();
    let rate =
        cfg.mu_pairs * cfg.rep_rate_hz * GATE_SUCCESS * t * t * cfg.eta_det[0] * cfg.eta_det[1];
    Ok(RateEstimate {
        rate_hz: rate,
        caveat: "ignores fiber coupling, spectral filtering and interferometer time-slot \
                 post-selection losses; measured rates fall below this estimate"
            .into(),
    })
}

/// Drift-averaged then accidental-mixed state with the bookkeeping a
/// calibration run wants.
#[derive(Debug, Clone, Serialize)]
pub struct NoisyStateReport {
    pub rho: DensityMatrix,
    pub werner_p: f64,
    pub drift_average_applied: bool,
    pub predicted_coincidence_rate_hz: f64,
}

/// Full imperfection pipeline for the given gate inputs.
pub fn noisy_state(
    a: &TimeBinQubitSpec,
    b: &TimeBinQubitSpec,
    profile: &SwitchProfile,
    cfg: &NoiseConfig,
) -> Result<NoisyStateReport> {
    cfg.validate()?;
    let drifted = drift_averaged_state(a, b, profile, cfg.sigma_theta_rad, cfg.drift_grid_points)?;
    let (rho, werner_p) = accidental_mixing(&drifted, cfg)?;
    Ok(NoisyStateReport {
        rho,
        werner_p,
        drift_average_applied: cfg.sigma_theta_rad > 0.0,
        predicted_coincidence_rate_hz: coincidence_rate_estimate(cfg)?.rate_hz,
    })
}

/// One row of a drift sweep. `fidelity` describes the drift-averaged state
/// alone; `concurrence` and `min_pt_eigenvalue` describe the state after
/// accidental mixing, so the row shows whether entanglement survives the
/// full noise budget.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepRow {
    pub sigma_theta_rad: f64,
    pub fidelity: f64,
    pub concurrence: f64,
    pub min_pt_eigenvalue: f64,
    pub werner_p: f64,
}

/// Sweeps the drift width over `sigmas` at fixed gate inputs.
pub fn noise_sweep(
    a: &TimeBinQubitSpec,
    b: &TimeBinQubitSpec,
    profile: &SwitchProfile,
    cfg: &NoiseConfig,
    sigmas: &[f64],
    target: &Vector4<Complex64>,
) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let drifted = drift_averaged_state(a, b, profile, sigma, cfg.drift_grid_points)?;
        let fidelity = metrics::fidelity_pure(&drifted, target)?;
        let (mixed, werner_p) = accidental_mixing(&drifted, cfg)?;
        let concurrence = metrics::concurrence(&mixed)?;
        let (pt, _) =
            metrics::partial_transpose_spectrum(&mixed, crate::density::Subsystem::Second)?;
        rows.push(SweepRow {
            sigma_theta_rad: sigma,
            fidelity,
            concurrence,
            min_pt_eigenvalue: pt[0],
            werner_p,
        });
    }
    Ok(rows)
}

/// CSV layout: `sigma_theta_rad,fidelity,concurrence,min_pt_eigenvalue,werner_p`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "sigma_theta_rad,fidelity,concurrence,min_pt_eigenvalue,werner_p"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.sigma_theta_rad, r.fidelity, r.concurrence, r.min_pt_eigenvalue, r.werner_p
        )?;
    }
    Ok(())
}
