//! Hong-Ou-Mandel delay scans through the switch.
//!
//! Two photons, one per input port, arrive with a relative delay `tau`. The
//! mode overlap is modelled as Gaussian, `v(tau) = exp(-tau^2 / (2 sigma^2))`,
//! and the coincidence probability at a splitter of intensity reflectivity
//! `R = sin^2(theta/2)` interpolates between the classical value `R^2 + T^2`
//! for distinguishable photons and `(T - R)^2` at perfect overlap:
//!
//! ```text
//! p(tau) = (R^2 + T^2) - 2 R T v(tau)
//! ```
//!
//! The dip visibility is `(baseline - minimum)/baseline`, which for the
//! analytic trace equals `2RT / (R^2 + T^2)` — 1.0 for a balanced splitter
//! and 0.8 for a one-third splitter. A scan in `t1_pass` mode sends both
//! photons through the transparent first time bin, where no mixing occurs
//! and the trace stays flat.
//!
//! Counting statistics are binomial per scan point, with one random
//! substream per point so results do not depend on evaluation order.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_rng_indexed, sample_binomial};

/// Which temporal mode the photon pair occupies during the scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomScanMode {
    /// Both photons in `t1`; the switch is transparent and no dip forms.
    T1Pass,
    /// Both photons in `t2`, which the switch splits with reflectivity `R`.
    T2Split,
}

/// Delay-scan configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomScanConfig {
    /// Intensity reflectivity `R = sin^2(theta/2)` of the splitting bin.
    pub reflectivity: f64,
    /// Scan delays in picoseconds.
    pub delays_ps: Vec<f64>,
    /// Temporal-overlap width in picoseconds.
    pub sigma_ps: f64,
    pub shots_per_point: u64,
    pub seed: u64,
    pub mode: HomScanMode,
}

impl HomScanConfig {
    /// Uniform delay grid between `min_ps` and `max_ps` inclusive.
    pub fn delay_grid(min_ps: f64, max_ps: f64, points: usize) -> Vec<f64> {
        if points <= 1 {
            return vec![min_ps];
        }
        let step = (max_ps - min_ps) / (points - 1) as f64;
        (0..points).map(|i| min_ps + step * i as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reflectivity > 0.0 && self.reflectivity < 1.0) {
            return Err(Error::InvalidParameter {
                name: "reflectivity",
                value: self.reflectivity,
                constraint: "intensity reflectivity must lie strictly inside (0, 1)",
            });
        }
        if self.sigma_ps <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "sigma_ps",
                value: self.sigma_ps,
                constraint: "overlap width must be positive",
            });
        }
        if self.delays_ps.is_empty() {
            return Err(Error::InvalidParameter {
                name: "delays_ps",
                value: 0.0,
                constraint: "at least one delay point is required",
            });
        }
        if self.shots_per_point == 0 {
            return Err(Error::InvalidParameter {
                name: "shots_per_point",
                value: 0.0,
                constraint: "shots per point must be positive",
            });
        }
        Ok(())
    }
}

/// One scan point: analytic probability and sampled counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomScanPoint {
    pub delay_ps: f64,
    pub p_analytic: f64,
    pub coincidences: u64,
    pub shots: u64,
}

/// Dip visibility with its propagated one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityEstimate {
    pub visibility: f64,
    pub sigma: f64,
}

/// Full scan output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomScanResult {
    pub config: HomScanConfig,
    pub points: Vec<HomScanPoint>,
    /// Estimate from the sampled counts.
    pub visibility: VisibilityEstimate,
}

impl HomScanResult {
    /// True when the analytic trace is flat to 1e-12 (the `t1_pass`
    /// signature: the switch did not act as a beam splitter).
    pub fn is_flat_analytic(&self) -> bool {
        let (min, max) = self
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.p_analytic), hi.max(p.p_analytic))
            });
        max - min < 1e-12
    }
}

/// Theoretical dip visibility `2RT/(R^2 + T^2)` with `T = 1 - R`.
pub fn visibility_theory(reflectivity: f64) -> Result<f64> {
    if !(reflectivity > 0.0 && reflectivity < 1.0) {
        return Err(Error::InvalidParameter {
            name: "reflectivity",
            value: reflectivity,
            constraint: "intensity reflectivity must lie strictly inside (0, 1)",
        });
    }
    let r = reflectivity;
    let t = 1.0 - r;
    Ok(2.0 * r * t / (r * r + t * t))
}

/// Gaussian temporal overlap `exp(-tau^2 / (2 sigma^2))`.
pub fn temporal_overlap(delay_ps: f64, sigma_ps: f64) -> f64 {
    (-delay_ps * delay_ps / (2.0 * sigma_ps * sigma_ps)).exp()
}

/// Coincidence probability `(R^2 + T^2) - 2RT v` for overlap `v`;
/// distinguishable photons (`v = 0`) give the classical `R^2 + T^2`.
pub fn coincidence_probability(reflectivity: f64, overlap: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&reflectivity) {
        return Err(Error::InvalidParameter {
            name: "reflectivity",
            value: reflectivity,
            constraint: "intensity reflectivity must lie in [0, 1]",
        });
    }
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::InvalidParameter {
            name: "overlap",
            value: overlap,
            constraint: "mode overlap must lie in [0, 1]",
        });
    }
    let r = reflectivity;
    let t = 1.0 - r;
    Ok((r * r + t * t) - 2.0 * r * t * overlap)
}

/// Runs a delay scan: analytic probabilities plus binomially sampled
/// coincidences, one substream per point, and the visibility estimated
/// from the sampled data.
pub fn hom_scan(config: &HomScanConfig) -> Result<HomScanResult> {
    config.validate()?;
    let effective_r = match config.mode {
        HomScanMode::T1Pass => 0.0,
        HomScanMode::T2Split => config.reflectivity,
    };
    let mut points = Vec::with_capacity(config.delays_ps.len());
    for (i, &delay) in config.delays_ps.iter().enumerate() {
        let v = temporal_overlap(delay, config.sigma_ps);
        let p = coincidence_probability(effective_r, v)?;
        let mut rng = derive_rng_indexed(config.seed, "hom-point", i as u64);
        let k = sample_binomial(&mut rng, config.shots_per_point, p);
        points.push(HomScanPoint {
            delay_ps: delay,
            p_analytic: p,
            coincidences: k,
            shots: config.shots_per_point,
        });
    }
    let visibility = estimate_from_fractions(
        &points
            .iter()
            .map(|pt| {
                let frac = pt.coincidences as f64 / pt.shots as f64;
                let se = (frac * (1.0 - frac) / pt.shots as f64).sqrt();
                (pt.delay_ps, frac, se)
            })
            .collect::<Vec<_>>(),
        config.sigma_ps,
    )?;
    Ok(HomScanResult {
        config: config.clone(),
        points,
        visibility,
    })
}

/// Visibility of the sampled trace of a finished scan.
pub fn visibility_estimate(scan: &HomScanResult) -> Result<VisibilityEstimate> {
    estimate_from_fractions(
        &scan
            .points
            .iter()
            .map(|pt| {
                let frac = pt.coincidences as f64 / pt.shots as f64;
                let se = (frac * (1.0 - frac) / pt.shots as f64).sqrt();
                (pt.delay_ps, frac, se)
            })
            .collect::<Vec<_>>(),
        scan.config.sigma_ps,
    )
}

/// Visibility of the noise-free analytic trace; the uncertainty is zero.
pub fn visibility_analytic(scan: &HomScanResult) -> Result<VisibilityEstimate> {
    estimate_from_fractions(
        &scan
            .points
            .iter()
            .map(|pt| (pt.delay_ps, pt.p_analytic, 0.0))
            .collect::<Vec<_>>(),
        scan.config.sigma_ps,
    )
}

/// `V = (baseline - minimum)/baseline`. The baseline averages the points
/// with `|tau| > 3 sigma`; the minimum is taken over the whole scan. The
/// uncertainty propagates the binomial standard errors of both.
fn estimate_from_fractions(
    points: &[(f64, f64, f64)],
    sigma_ps: f64,
) -> Result<VisibilityEstimate> {
    let baseline: Vec<&(f64, f64, f64)> = points
        .iter()
        .filter(|(delay, _, _)| delay.abs() > 3.0 * sigma_ps)
        .collect();
    if baseline.len() < 2 {
        return Err(Error::VisibilityEstimate(format!(
            "need at least 2 baseline points with |delay| > 3 sigma, found {}",
            baseline.len()
        )));
    }
    let n_base = baseline.len() as f64;
    let base_mean: f64 = baseline.iter().map(|(_, p, _)| p).sum::<f64>() / n_base;
    let base_se: f64 =
        baseline.iter().map(|(_, _, se)| se * se).sum::<f64>().sqrt() / n_base;
    if base_mean <= 0.0 {
        return Err(Error::VisibilityEstimate(
            "baseline coincidence probability is zero".into(),
        ));
    }
    let (_, p_min, se_min) = points
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("points is nonempty");
    let visibility = (base_mean - p_min) / base_mean;
    let sigma = ((se_min / base_mean).powi(2)
        + (p_min * base_se / (base_mean * base_mean)).powi(2))
    .sqrt();
    Ok(VisibilityEstimate { visibility, sigma })
}

/// Writes the scan as CSV: `delay_ps,p_analytic,coincidences,shots`.
pub fn write_csv<W: Write>(scan: &HomScanResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "delay_ps,p_analytic,coincidences,shots")?;
    for p in &scan.points {
        writeln!(
            out,
            "{},{},{},{}",
            p.delay_ps, p.p_analytic, p.coincidences, p.shots
        )?;
    }
    Ok(())
}
