//! Quantum state tomography for two time-bin qubits.
//!
//! Measurements are the 16 product projectors built from the single-qubit
//! kets `t1`, `t2`, `plus = (|t1> + |t2>)/sqrt 2` and
//! `plusi = (|t1> + i|t2>)/sqrt 2` — an informationally complete set.
//! Counts are binomial per setting. Reconstruction offers two routes:
//!
//! * **linear inversion** — least-squares solution of
//!   `Tr(P_i rho) = k_i / n_i` over the Hermitian matrices; fast, unbiased,
//!   but the estimate may have negative eigenvalues on finite counts;
//! * **maximum likelihood** — ascент of the binomial log-likelihood over
//!   the Cholesky-type parametrization `rho = T^H T / Tr(T^H T)` with `T`
//!   lower triangular (16 real parameters), which is positive
//!   semidefinite and trace-one by construction.
//!
//! The optimizer is a deterministic BFGS with backtracking line search,
//! initialized from the positivity-projected linear-inversion estimate.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{hermitian_eigen, hermitize, DensityMatrix};
use crate::error::{Error, Result};
use crate::rng::{derive_rng_indexed, sample_binomial};

/// Probability clamp applied inside logarithms.
const P_CLAMP: f64 = 1e-12;

/// Single-qubit measurement ket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKet {
    #[serde(rename = "t1")]
    T1,
    #[serde(rename = "t2")]
    T2,
    #[serde(rename = "plus")]
    Plus,
    #[serde(rename = "plusi")]
    PlusI,
}

impl BasisKet {
    pub fn all() -> [BasisKet; 4] {
        [BasisKet::T1, BasisKet::T2, BasisKet::Plus, BasisKet::PlusI]
    }

    pub fn ket(&self) -> Vector2<Complex64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            BasisKet::T1 => Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            BasisKet::T2 => Vector2::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            BasisKet::Plus => Vector2::new(Complex64::new(h, 0.0), Complex64::new(h, 0.0)),
            BasisKet::PlusI => Vector2::new(Complex64::new(h, 0.0), Complex64::new(0.0, h)),
        }
    }

    fn projector2(&self) -> Matrix2<Complex64> {
        let k = self.ket();
        Matrix2::from_fn(|r, c| k[r] * k[c].conj())
    }
}

/// Ordered list of product-projector settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSet {
    settings: Vec<(BasisKet, BasisKet)>,
}

impl ProjectorSet {
    /// The standard 16-setting set `{t1, t2, plus, plusi}^2`, first-qubit
    /// ket varying slowest.
    pub fn standard() -> Self {
        let mut settings = Vec::with_capacity(16);
        for a in BasisKet::all() {
            for b in BasisKet::all() {
                settings.push((a, b));
            }
        }
        ProjectorSet { settings }
    }

    pub fn from_settings(settings: Vec<(BasisKet, BasisKet)>) -> Self {
        ProjectorSet { settings }
    }

    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    pub fn settings(&self) -> &[(BasisKet, BasisKet)] {
        &self.settings
    }

    /// Rank-one projector `|a><a| ⊗ |b><b|` for setting `i`.
    pub fn projector(&self, i: usize) -> DMatrix<Complex64> {
        let (a, b) = self.settings[i];
        let pa = a.projector2();
        let pb = b.projector2();
        DMatrix::from_fn(4, 4, |r, c| pa[(r / 2, c / 2)] * pb[(r % 2, c % 2)])
    }

    /// Rank of the induced linear map from Hermitian matrices to setting
    /// probabilities; 16 means informationally complete.
    pub fn design_rank(&self) -> usize {
        let design = design_matrix(self);
        design.svd(false, false).rank(RANK_TOLERANCE)
    }
}

/// Observed counts for every setting, with the seed that generated them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingCounts {
    pub a: BasisKet,
    pub b: BasisKet,
    /// Coincidence counts. Real-valued so that exact probabilities can be
    /// used as pseudo-counts; sampled data always carries integers.
    pub k: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub settings: Vec<SettingCounts>,
    pub seed: u64,
}

impl CountsRecord {
    pub fn validate(&self) -> Result<()> {
        if self.settings.is_empty() {
            return Err(Error::InvalidInput("counts record has no settings".into()));
        }
        for s in &self.settings {
            if s.n == 0 {
                return Err(Error::InvalidInput("setting with zero shots".into()));
            }
            if !(0.0..=s.n as f64).contains(&s.k) {
                return Err(Error::InvalidInput(format!(
                    "counts k = {} outside [0, n = {}]",
                    s.k, s.n
                )));
            }
        }
        Ok(())
    }

    pub fn projector_set(&self) -> ProjectorSet {
        ProjectorSet::from_settings(self.settings.iter().map(|s| (s.a, s.b)).collect())
    }
}

/// Draws binomial counts for every setting of `set` from the Born-rule
/// probabilities of `rho`, one random substream per setting.
pub fn simulate_counts(
    rho: &DensityMatrix,
    set: &ProjectorSet,
    shots: u64,
    seed: u64,
) -> Result<CountsRecord> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDensityMatrix(
            "tomography simulates two-qubit states".into(),
        ));
    }
    rho.validate_physical(1e-6, crate::density::PSD_TOLERANCE)?;
    if shots == 0 {
        return Err(Error::InvalidParameter {
            name: "shots",
            value: 0.0,
            constraint: "shots must be positive",
        });
    }
    let mut settings = Vec::with_capacity(set.len());
    for i in 0..set.len() {
        let p = rho.expectation(&set.projector(i)).clamp(0.0, 1.0);
        let mut rng = derive_rng_indexed(seed, "qst-setting", i as u64);
        let k = sample_binomial(&mut rng, shots, p);
        let (a, b) = set.settings()[i];
        settings.push(SettingCounts {
            a,
            b,
            k: k as f64,
            n: shots,
        });
    }
    Ok(CountsRecord { settings, seed })
}

const RANK_TOLERANCE: f64 = 1e-10;

/// Orthogonal-ish basis of the 16-dimensional real space of Hermitian 4x4
/// matrices: 4 diagonal units, then real and imaginary off-diagonal units.
fn hermitian_basis() -> Vec<DMatrix<Complex64>> {
    let mut basis = Vec::with_capacity(16);
    for d in 0..4 {
        let mut m = DMatrix::zeros(4, 4);
        m[(d, d)] = Complex64::new(1.0, 0.0);
        basis.push(m);
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            let mut re = DMatrix::zeros(4, 4);
            re[(i, j)] = Complex64::new(1.0, 0.0);
            re[(j, i)] = Complex64::new(1.0, 0.0);
            basis.push(re);
            let mut im = DMatrix::zeros(4, 4);
            im[(i, j)] = Complex64::new(0.0, -1.0);
            im[(j, i)] = Complex64::new(0.0, 1.0);
            basis.push(im);
        }
    }
    basis
}

fn hermitian_basis_label(k: usize) -> String {
    let labels = crate::density::basis_labels(4);
    if k < 4 {
        return format!("diag(|{}>)", labels[k]);
    }
    let mut idx = 4;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if idx == k {
                return format!("Re|{}><{}|", labels[i], labels[j]);
            }
            if idx + 1 == k {
                return format!("Im|{}><{}|", labels[i], labels[j]);
            }
            idx += 2;
        }
    }
    format!("H[{k}]")
}

fn design_matrix(set: &ProjectorSet) -> DMatrix<f64> {
    let basis = hermitian_basis();
    DMatrix::from_fn(set.len(), 16, |row, col| {
        (set.projector(row) * &basis[col]).trace().re
    })
}

/// Least-squares linear-inversion estimate with its residual.
#[derive(Debug, Clone)]
pub struct LinearInversion {
    /// Hermitian, trace-normalized estimate; eigenvalues may be negative.
    pub matrix: DensityMatrix,
    /// `||A x - f||_2` of the least-squares system before normalization.
    pub residual: f64,
}

/// Solves `Tr(P_i rho) = k_i / n_i` in the least-squares sense over
/// Hermitian matrices with the trace pinned to one. With the standard
/// 16-setting design the unconstrained system would be square and would
/// absorb any frequencies; the trace constraint is what exposes
/// inconsistent data as a nonzero residual. Negative eigenvalues are
/// reported, not hidden: inspect [`DensityMatrix::eigenvalues`] on the
/// result.
pub fn linear_inversion(counts: &CountsRecord) -> Result<LinearInversion> {
    counts.validate()?;
    let set = counts.projector_set();
    let design = design_matrix(&set);
    let freqs = DVector::from_fn(counts.settings.len(), |i, _| {
        counts.settings[i].k / counts.settings[i].n as f64
    });

    let svd = design.clone().svd(true, true);
    let rank = svd.rank(RANK_TOLERANCE);
    if rank < 16 {
        let v_t = svd.v_t.as_ref().expect("svd computed with vectors");
        let mut directions = Vec::new();
        for row in rank..16 {
            let null_vec = v_t.row(row);
            let mut parts: Vec<(f64, usize)> = (0..16)
                .map(|k| (null_vec[k].abs(), k))
                .filter(|(w, _)| *w > 0.25)
                .collect();
            parts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            let names: Vec<String> = parts
                .into_iter()
                .take(3)
                .map(|(_, k)| hermitian_basis_label(k))
                .collect();
            directions.push(if names.is_empty() {
                "mixed direction".to_string()
            } else {
                names.join(" + ")
            });
        }
        return Err(Error::RankDeficient {
            rank,
            directions: directions.join("; "),
        });
    }

    // parametrize the trace-one affine subspace: x = x_p + B z with
    // x_p = diag(|t2t2>) and B spanning trace-free diagonal deviations
    // plus all off-diagonal components
    let mut x_p = DVector::zeros(16);
    x_p[3] = 1.0;
    let mut basis_free = DMatrix::zeros(16, 15);
    for d in 0..3 {
        basis_free[(d, d)] = 1.0;
        basis_free[(3, d)] = -1.0;
    }
    for k in 4..16 {
        basis_free[(k, k - 1)] = 1.0;
    }
    let reduced = &design * &basis_free;
    let rhs = &freqs - &design * &x_p;
    let x = {
        let z = reduced
            .svd(true, true)
            .solve(&rhs, RANK_TOLERANCE)
            .map_err(|e| Error::Numerical(format!("least-squares solve failed: {e}")))?;
        x_p + basis_free * z
    };
    let residual = ((&design * &x) - &freqs).norm();

    let basis = hermitian_basis();
    let mut m: DMatrix<Complex64> = DMatrix::zeros(4, 4);
    for (k, h) in basis.iter().enumerate() {
        m += h.map(|z| z * x[k]);
    }
    let matrix = DensityMatrix::from_matrix(m)?;
    Ok(LinearInversion { matrix, residual })
}

/// Binomial log-likelihood of `rho` for the observed counts.
pub fn log_likelihood(counts: &CountsRecord, rho: &DensityMatrix) -> Result<f64> {
    counts.validate()?;
    let set = counts.projector_set();
    let mut total = 0.0;
    for (i, s) in counts.settings.iter().enumerate() {
        let p = rho
            .expectation(&set.projector(i))
            .clamp(P_CLAMP, 1.0 - P_CLAMP);
        total += s.k * p.ln() + (s.n as f64 - s.k) * (1.0 - p).ln();
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReconstructionMethod {
    Linear,
    Mle,
}

/// Outcome of a reconstruction.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    #[serde(rename = "density_matrix")]
    pub estimate: DensityMatrix,
    #[serde(rename = "loglik")]
    pub log_likelihood: f64,
    #[serde(rename = "iters")]
    pub iterations: usize,
    pub converged: bool,
    pub method: ReconstructionMethod,
}

// --- maximum likelihood over the Cholesky parametrization ---------------

/// Lower-triangular T from the 16 real parameters: 4 real diagonal entries
/// followed by (re, im) pairs for the entries below the diagonal.
fn build_t(params: &[f64; 16]) -> DMatrix<Complex64> {
    let mut t: DMatrix<Complex64> = DMatrix::zeros(4, 4);
    for d in 0..4 {
        t[(d, d)] = Complex64::new(params[d], 0.0);
    }
    let mut idx = 4;
    for i in 1..4 {
        for j in 0..i {
            t[(i, j)] = Complex64::new(params[idx], params[idx + 1]);
            idx += 2;
        }
    }
    t
}

fn rho_from_t(t: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let gram = t.adjoint() * t;
    let trace = gram.trace().re;
    gram.map(|z| z / trace)
}

/// Log-likelihood and its gradient in the 16 parameters.
fn likelihood_and_gradient(
    params: &[f64; 16],
    projectors: &[DMatrix<Complex64>],
    counts: &CountsRecord,
) -> (f64, [f64; 16]) {
    let t = build_t(params);
    let gram = t.adjoint() * &t;
    let g = gram.trace().re;
    let mut loglik = 0.0;
    let mut w: DMatrix<Complex64> = DMatrix::zeros(4, 4);
    for (i, s) in counts.settings.iter().enumerate() {
        let p_raw = (&projectors[i] * &gram).trace().re / g;
        let p = p_raw.clamp(P_CLAMP, 1.0 - P_CLAMP);
        loglik += s.k * p.ln() + (s.n as f64 - s.k) * (1.0 - p).ln();
        let weight = s.k / p - (s.n as f64 - s.k) / (1.0 - p);
        w += projectors[i].map(|z| z * weight);
        for d in 0..4 {
            w[(d, d)] -= Complex64::new(weight * p_raw, 0.0);
        }
    }
    // dL/d(conj T) = T W / G for L(T) = sum_i w_i Tr(P_i T^H T) / Tr(T^H T)
    let grad_mat = (&t * w).map(|z| z / g);
    let mut grad = [0.0; 16];
    for d in 0..4 {
        grad[d] = 2.0 * grad_mat[(d, d)].re;
    }
    let mut idx = 4;
    for i in 1..4 {
        for j in 0..i {
            grad[idx] = 2.0 * grad_mat[(i, j)].re;
            grad[idx + 1] = 2.0 * grad_mat[(i, j)].im;
            idx += 2;
        }
    }
    (loglik, grad)
}

/// Positivity-projected linear-inversion estimate, lightly mixed with the
/// identity so the Cholesky-type factor exists.
fn mle_start(counts: &CountsRecord) -> Result<DMatrix<Complex64>> {
    let projected = match linear_inversion(counts) {
        Ok(lin) => {
            let (vals, vecs) = hermitian_eigen(lin.matrix.matrix());
            let mut m: DMatrix<Complex64> = DMatrix::zeros(4, 4);
            let mut total = 0.0;
            for (i, l) in vals.iter().enumerate() {
                let l = l.max(0.0);
                total += l;
                let col = vecs.column(i);
                for r in 0..4 {
                    for c in 0..4 {
                        m[(r, c)] += Complex64::new(l, 0.0) * col[r] * col[c].conj();
                    }
                }
            }
            if total < 1e-12 {
                DMatrix::identity(4, 4).map(|z: Complex64| z * 0.25)
            } else {
                m.map(|z| z / total)
            }
        }
        // a deficient measurement set still admits MLE; start from the
        // maximally mixed state
        Err(Error::RankDeficient { .. }) => DMatrix::identity(4, 4).map(|z: Complex64| z * 0.25),
        Err(e) => return Err(e),
    };
    let eps = 1e-3;
    let eye = DMatrix::identity(4, 4).map(|z: Complex64| z * (0.25 * eps));
    Ok(projected.map(|z| z * (1.0 - eps)) + eye)
}

/// Lower-triangular `T` with `T^H T = rho` for positive-definite `rho`
/// (reverse-ordered Cholesky factorization).
fn reverse_cholesky(rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let flip = |m: &DMatrix<Complex64>| DMatrix::from_fn(4, 4, |r, c| m[(3 - r, 3 - c)]);
    let flipped = flip(rho);
    let chol = nalgebra::Cholesky::new(flipped)
        .ok_or_else(|| Error::Numerical("MLE start point is not positive definite".into()))?;
    let l = DMatrix::from_fn(4, 4, |r, c| chol.l()[(r, c)]);
    Ok(flip(&l).adjoint())
}

/// Maximum-likelihood reconstruction: BFGS ascent of the binomial
/// log-likelihood over `rho = T^H T / Tr(T^H T)`. Converged means the
/// likelihood improved by less than `tol` in the final step; otherwise the
/// report carries the best iterate with `converged = false`.
pub fn mle_reconstruct(
    counts: &CountsRecord,
    tol: f64,
    max_iter: usize,
) -> Result<ReconstructionReport> {
    counts.validate()?;
    let set = counts.projector_set();
    let projectors: Vec<DMatrix<Complex64>> =
        (0..set.len()).map(|i| set.projector(i)).collect();

    let start = mle_start(counts)?;
    let t0 = reverse_cholesky(&start)?;
    let mut params = [0.0; 16];
    for d in 0..4 {
        params[d] = t0[(d, d)].re;
    }
    let mut idx = 4;
    for i in 1..4 {
        for j in 0..i {
            params[idx] = t0[(i, j)].re;
            params[idx + 1] = t0[(i, j)].im;
            idx += 2;
        }
    }

    let (mut loglik, mut grad) = likelihood_and_gradient(&params, &projectors, counts);
    let mut h_inv = DMatrix::<f64>::identity(16, 16);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..max_iter {
        iterations = iter + 1;
        let g_vec = DVector::from_row_slice(&grad);
        let direction = &h_inv * &g_vec; // ascent direction
        let slope: f64 = grad
            .iter()
            .zip(direction.iter())
            .map(|(g, d)| g * d)
            .sum();
        let (direction, slope) = if slope <= 0.0 {
            // curvature information went stale; fall back to plain ascent
            h_inv = DMatrix::identity(16, 16);
            (g_vec.clone(), g_vec.norm_squared())
        } else {
            (direction, slope)
        };

        // backtracking line search on the likelihood
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = params;
            for (k, v) in trial.iter_mut().enumerate() {
                *v += alpha * direction[k];
            }
            let (trial_loglik, trial_grad) =
                likelihood_and_gradient(&trial, &projectors, counts);
            if trial_loglik >= loglik + 1e-4 * alpha * slope {
                accepted = Some((trial, trial_loglik, trial_grad));
                break;
            }
            alpha *= 0.5;
        }
        let Some((new_params, new_loglik, new_grad)) = accepted else {
            // no uphill step exists at line-search resolution
            converged = true;
            break;
        };

        let improvement = new_loglik - loglik;

        // BFGS update of the inverse Hessian approximation
        let s = DVector::from_fn(16, |k, _| new_params[k] - params[k]);
        let y = DVector::from_fn(16, |k, _| -(new_grad[k] - grad[k])); // minimize -L
        let sy = s.dot(&y);
        if sy > 1e-12 {
            let rho_bfgs = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // Sherman-Morrison form of the BFGS inverse update
            h_inv = &h_inv + (&s * s.transpose()) * (rho_bfgs * (1.0 + rho_bfgs * yhy))
                - (&hy * s.transpose() + &s * hy.transpose()) * rho_bfgs;
        }

        params = new_params;
        loglik = new_loglik;
        grad = new_grad;

        if improvement.abs() < tol {
            converged = true;
            break;
        }
    }

    let estimate = DensityMatrix::from_matrix(hermitize(&rho_from_t(&build_t(&params))))?;
    Ok(ReconstructionReport {
        estimate,
        log_likelihood: loglik,
        iterations,
        converged,
        method: ReconstructionMethod::Mle,
    })
}

/// Reconstruction report for the linear-inversion route, so both methods
/// share one output shape.
pub fn linear_reconstruct(counts: &CountsRecord) -> Result<ReconstructionReport> {
    let lin = linear_inversion(counts)?;
    let loglik = log_likelihood(counts, &lin.matrix)?;
    Ok(ReconstructionReport {
        estimate: lin.matrix,
        log_likelihood: loglik,
        iterations: 0,
        converged: true,
        method: ReconstructionMethod::Linear,
    })
}
