//! State-quality and entanglement measures for two-qubit states.
//!
//! Everything operates on the canonical basis `|t1 t1>, |t1 t2>, |t2 t1>,
//! |t2 t2>`. Concurrence follows the Wootters construction; separability is
//! judged by the Peres criterion (a two-qubit state is entangled exactly
//! when its partial transpose has a negative eigenvalue). Entropies are in
//! bits. Linear entropy is reported in two conventions, the `[0, 1]`
//! normalization `(4/3)(1 - Tr rho^2)` and the raw `1 - Tr rho^2`, since
//! both are common in the literature.

use nalgebra::{DMatrix, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{hermitian_eigen, hermitize, DensityMatrix, Subsystem};
use crate::error::{Error, Result};

/// `<psi| rho |psi>` against a normalized pure target (probability-type
/// fidelity, no square root). The target is normalized first.
pub fn fidelity_pure(rho: &DensityMatrix, target: &Vector4<Complex64>) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDensityMatrix(
            "fidelity target is a two-qubit pure state".into(),
        ));
    }
    let norm = target.norm();
    if norm < 1e-14 {
        return Err(Error::ZeroNorm {
            norm_sq: norm * norm,
        });
    }
    let t = target / Complex64::new(norm, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..4 {
        for c in 0..4 {
            acc += t[r].conj() * rho.entry(r, c) * t[c];
        }
    }
    Ok(acc.re)
}

/// Von Neumann entropy `-sum lambda log2 lambda` in bits, with
/// `0 log 0 := 0`. Eigenvalues within 1e-10 of zero are clamped before the
/// logarithm.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .map(|l| if l.abs() < 1e-10 { 0.0 } else { l })
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum()
}

/// Linear entropy normalized to `[0, 1]`: `(d/(d-1))(1 - Tr rho^2)`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    let d = rho.dim() as f64;
    d / (d - 1.0) * (1.0 - rho.purity())
}

/// Unnormalized linear entropy `1 - Tr rho^2`.
pub fn linear_entropy_raw(rho: &DensityMatrix) -> f64 {
    1.0 - rho.purity()
}

fn sigma_y_pair() -> Matrix4<Complex64> {
    // sigma_y ⊗ sigma_y is real: antidiagonal (-1, 1, 1, -1)
    let mut m = Matrix4::zeros();
    m[(0, 3)] = Complex64::new(-1.0, 0.0);
    m[(1, 2)] = Complex64::new(1.0, 0.0);
    m[(2, 1)] = Complex64::new(1.0, 0.0);
    m[(3, 0)] = Complex64::new(-1.0, 0.0);
    m
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)` where the `l` are the
/// decreasing square roots of the eigenvalues of
/// `rho (sy ⊗ sy) rho* (sy ⊗ sy)`, conjugation taken in the canonical
/// basis. The `l` equal the singular values of
/// `sqrt(rho) (sy ⊗ sy) conj(sqrt(rho))`, which is how they are computed;
/// the SVD keeps the near-zero values at machine precision.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDensityMatrix(
            "concurrence is defined for two-qubit states".into(),
        ));
    }
    let m = rho.matrix();
    let s = sigma_y_pair();
    let s_dyn = DMatrix::from_fn(4, 4, |r, c| s[(r, c)]);

    // sqrt(rho) via eigendecomposition with negative eigenvalues clamped
    let (vals, vecs) = hermitian_eigen(m);
    let mut sqrt_rho: DMatrix<Complex64> = DMatrix::zeros(4, 4);
    for (i, l) in vals.iter().enumerate() {
        let root = l.max(0.0).sqrt();
        let col = vecs.column(i);
        for r in 0..4 {
            for c in 0..4 {
                sqrt_rho[(r, c)] += Complex64::new(root, 0.0) * col[r] * col[c].conj();
            }
        }
    }
    let core = &sqrt_rho * s_dyn * sqrt_rho.map(|z| z.conj());
    let svd = core.svd(false, false);
    let mut lambdas: Vec<f64> = svd.singular_values.iter().copied().collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Transposes the indices of one subsystem of a two-qubit matrix.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: Subsystem) -> Result<DMatrix<Complex64>> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDensityMatrix(
            "partial transpose is defined for two-qubit states".into(),
        ));
    }
    let m = rho.matrix();
    let mut out = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let (row, col) = match subsystem {
                        Subsystem::First => (2 * k + j, 2 * i + l),
                        Subsystem::Second => (2 * i + l, 2 * k + j),
                    };
                    out[(2 * i + j, 2 * k + l)] = m[(row, col)];
                }
            }
        }
    }
    Ok(out)
}

/// Eigenvalues of the partial transpose, ascending, plus the negativity
/// (the absolute sum of the negative eigenvalues). The eigenvalues always
/// sum to one: partial transposition preserves the trace.
pub fn partial_transpose_spectrum(
    rho: &DensityMatrix,
    subsystem: Subsystem,
) -> Result<([f64; 4], f64)> {
    let pt = partial_transpose(rho, subsystem)?;
    let (vals, _) = hermitian_eigen(&hermitize(&pt));
    let mut spectrum = [0.0; 4];
    spectrum.copy_from_slice(&vals);
    let negativity = spectrum.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    Ok((spectrum, negativity))
}

fn hadamard() -> nalgebra::Matrix2<Complex64> {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    nalgebra::Matrix2::new(h, h, h, -h)
}

/// `(I ⊗ H) . diag(1,1,1,-1) . (I ⊗ H)` and its largest absolute deviation
/// from the canonical controlled-NOT (control on the first qubit).
pub fn cnot_from_cphase() -> (Matrix4<Complex64>, f64) {
    let h = hadamard();
    let mut ih = Matrix4::zeros();
    for blk in 0..2 {
        for r in 0..2 {
            for c in 0..2 {
                ih[(2 * blk + r, 2 * blk + c)] = h[(r, c)];
            }
        }
    }
    let cp = crate::gate::ideal_cphase_matrix();
    let result = ih * cp * ih;

    let mut cnot = Matrix4::zeros();
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        cnot[(r, c)] = Complex64::new(1.0, 0.0);
    }
    let mut dev: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            dev = dev.max((result[(r, c)] - cnot[(r, c)]).norm());
        }
    }
    (result, dev)
}

/// Every quantity the analysis chain reports for one state, against a named
/// pure target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub target: String,
    pub fidelity_to_target: f64,
    pub von_neumann_entropy_bits: f64,
    /// Entropies of the two reduced single-qubit states, `[first, second]`.
    pub reduced_von_neumann_entropy_bits: [f64; 2],
    /// `(4/3)(1 - Tr rho^2)`, the `[0, 1]`-normalized convention.
    pub linear_entropy: f64,
    /// `1 - Tr rho^2`, the unnormalized convention.
    pub linear_entropy_unnormalized: f64,
    pub concurrence: f64,
    /// Partial-transpose eigenvalues (second subsystem), ascending.
    pub pt_eigenvalues: [f64; 4],
    pub negativity: f64,
}

impl MetricsReport {
    pub fn compute(
        rho: &DensityMatrix,
        target_label: &str,
        target: &Vector4<Complex64>,
    ) -> Result<Self> {
        let (pt_eigenvalues, negativity) = partial_transpose_spectrum(rho, Subsystem::Second)?;
        Ok(MetricsReport {
            target: target_label.to_string(),
            fidelity_to_target: fidelity_pure(rho, target)?,
            von_neumann_entropy_bits: von_neumann_entropy(rho),
            reduced_von_neumann_entropy_bits: [
                von_neumann_entropy(&rho.reduced(Subsystem::First)?),
                von_neumann_entropy(&rho.reduced(Subsystem::Second)?),
            ],
            linear_entropy: linear_entropy(rho),
            linear_entropy_unnormalized: linear_entropy_raw(rho),
            concurrence: concurrence(rho)?,
            pt_eigenvalues,
            negativity,
        })
    }
}

/// The maximally entangled state the ideal gate produces from `|+>|+>`:
/// `(|t1 t1> + |t1 t2> + |t2 t1> - |t2 t2>)/2`.
pub fn cphase_plus_target() -> Vector4<Complex64> {
    Vector4::new(
        Complex64::new(0.5, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(-0.5, 0.0),
    )
}
