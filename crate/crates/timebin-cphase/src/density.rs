//! Density matrices and pure-state vectors for one or two time-bin qubits.
//!
//! Two-qubit objects use the fixed basis order `|t1 t1>, |t1 t2>, |t2 t1>,
//! |t2 t2>` where the first label belongs to the first qubit (the `C`-port
//! side after the gate). Single-qubit objects use `|t1>, |t2>`. Every
//! serialized matrix names this basis explicitly so files are unambiguous.

use nalgebra::{DMatrix, Matrix4, Vector4};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hermiticity and trace tolerance for accepting a matrix.
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;
/// Most negative eigenvalue tolerated by physicality checks.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Which qubit of a two-qubit state an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    First,
    Second,
}

pub(crate) fn basis_labels(dim: usize) -> Vec<&'static str> {
    match dim {
        2 => vec!["t1", "t2"],
        4 => vec!["t1t1", "t1t2", "t2t1", "t2t2"],
        _ => unreachable!("dims are validated to 2 or 4"),
    }
}

/// Hermitian, trace-one matrix over the time-bin qubit basis.
///
/// The container admits indefinite matrices (linear-inversion tomography
/// legitimately produces them); [`DensityMatrix::validate_physical`] checks
/// positivity where an operation requires a physical state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Accepts a square 2x2 or 4x4 matrix that is Hermitian and trace-one
    /// within [`HERMITICITY_TOLERANCE`].
    pub fn from_matrix(mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = mat.nrows();
        if mat.ncols() != dim || (dim != 2 && dim != 4) {
            return Err(Error::InvalidDensityMatrix(format!(
                "expected a square 2x2 or 4x4 matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let mut herm_dev: f64 = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                herm_dev = herm_dev.max((mat[(r, c)] - mat[(c, r)].conj()).norm());
            }
        }
        if herm_dev > HERMITICITY_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian: max |m - m^H| = {herm_dev:.3e}"
            )));
        }
        let tr = mat.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > HERMITICITY_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace is {tr} instead of 1"
            )));
        }
        Ok(DensityMatrix { mat })
    }

    /// Projector onto a pure state; the vector is normalized first.
    pub fn from_pure(state: &Vector4<Complex64>) -> Result<Self> {
        let norm = state.norm();
        if norm < 1e-14 {
            return Err(Error::ZeroNorm {
                norm_sq: norm * norm,
            });
        }
        let v = state / Complex64::new(norm, 0.0);
        let mut mat = DMatrix::zeros(4, 4);
        for r in 0..4 {
            for c in 0..4 {
                mat[(r, c)] = v[r] * v[c].conj();
            }
        }
        Self::from_matrix(mat)
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidDensityMatrix(format!(
                "dimension {dim} unsupported"
            )));
        }
        let mat = DMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Self::from_matrix(mat)
    }

    /// Hilbert-Schmidt random state `G G^H / Tr` from a complex Ginibre draw.
    pub fn random_hs<R: Rng>(rng: &mut R, dim: usize) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidDensityMatrix(format!(
                "dimension {dim} unsupported"
            )));
        }
        use rand_distr::StandardNormal;
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let rho = &g * g.adjoint();
        let tr = rho.trace().re;
        let mat = rho.map(|z| z / tr);
        // symmetrize away the last few ulps
        let mat = hermitize(&mat);
        Self::from_matrix(mat)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// Eigenvalues in ascending order (real: the matrix is Hermitian).
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()
            .first()
            .copied()
            .unwrap_or(f64::NAN)
    }

    /// Errors unless the smallest eigenvalue is above `-tol` and the trace
    /// is within `trace_tol` of one.
    pub fn validate_physical(&self, trace_tol: f64, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > trace_tol {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} deviates from 1 by more than {trace_tol:.1e}"
            )));
        }
        let min = self.min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidDensityMatrix(format!(
                "minimum eigenvalue {min:.3e} below -{tol:.1e}"
            )));
        }
        Ok(())
    }

    /// `Tr(op . rho)`, real part (exact for Hermitian `op`).
    pub fn expectation(&self, op: &DMatrix<Complex64>) -> f64 {
        (op * &self.mat).trace().re
    }

    /// `u . rho . u^H`, re-symmetrized.
    pub fn conjugate_by(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::InvalidInput(
                "conjugating matrix has the wrong dimension".into(),
            ));
        }
        let m = u * &self.mat * u.adjoint();
        Self::from_matrix(hermitize(&m))
    }

    /// Reduced state of one qubit of a two-qubit state.
    pub fn reduced(&self, keep: Subsystem) -> Result<Self> {
        if self.dim() != 4 {
            return Err(Error::InvalidDensityMatrix(
                "partial trace needs a two-qubit state".into(),
            ));
        }
        let mut out = DMatrix::zeros(2, 2);
        for r in 0..2 {
            for c in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    let (row, col) = match keep {
                        Subsystem::First => (2 * r + k, 2 * c + k),
                        Subsystem::Second => (2 * k + r, 2 * k + c),
                    };
                    acc += self.mat[(row, col)];
                }
                out[(r, c)] = acc;
            }
        }
        Self::from_matrix(hermitize(&out))
    }

    /// Convex mixture `p . self + (1 - p) . other`.
    pub fn mix(&self, other: &Self, p: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidInput("mixing states of different dimension".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                constraint: "mixing weight must lie in [0, 1]",
            });
        }
        let mat = self.mat.map(|z| z * p) + other.mat.map(|z| z * (1.0 - p));
        Self::from_matrix(mat)
    }

    pub fn as_matrix4(&self) -> Result<Matrix4<Complex64>> {
        if self.dim() != 4 {
            return Err(Error::InvalidDensityMatrix(
                "expected a two-qubit state".into(),
            ));
        }
        Ok(Matrix4::from_fn(|r, c| self.mat[(r, c)]))
    }
}

pub(crate) fn hermitize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Hermitian eigendecomposition returning `(ascending eigenvalues, columns)`.
pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let dim = m.nrows();
    let mut vecs = DMatrix::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixJson {
    dim: usize,
    basis: Vec<String>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dim = self.dim();
        let mirror = DensityMatrixJson {
            dim,
            basis: basis_labels(dim).iter().map(|s| s.to_string()).collect(),
            re: (0..dim)
                .map(|r| (0..dim).map(|c| self.mat[(r, c)].re).collect())
                .collect(),
            im: (0..dim)
                .map(|r| (0..dim).map(|c| self.mat[(r, c)].im).collect())
                .collect(),
        };
        mirror.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let mirror = DensityMatrixJson::deserialize(deserializer)?;
        let dim = mirror.dim;
        if dim != 2 && dim != 4 {
            return Err(D::Error::custom("dim must be 2 or 4"));
        }
        let expected = basis_labels(dim);
        if mirror.basis != expected {
            return Err(D::Error::custom(format!(
                "basis must be {expected:?} (canonical time-bin order)"
            )));
        }
        if mirror.re.len() != dim
            || mirror.im.len() != dim
            || mirror.re.iter().any(|row| row.len() != dim)
            || mirror.im.iter().any(|row| row.len() != dim)
        {
            return Err(D::Error::custom("re/im must be dim x dim row-major arrays"));
        }
        let mat = DMatrix::from_fn(dim, dim, |r, c| {
            Complex64::new(mirror.re[r][c], mirror.im[r][c])
        });
        DensityMatrix::from_matrix(mat).map_err(D::Error::custom)
    }
}

/// Pure two-qubit state vector with the canonical basis spelled out, the
/// state-vector counterpart of the density-matrix JSON schema.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vector4<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vector4<Complex64>) -> Self {
        StateVector { amps }
    }

    pub fn amplitudes(&self) -> &Vector4<Complex64> {
        &self.amps
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_pure(&self.amps)
    }
}

#[derive(Serialize, Deserialize)]
struct StateVectorJson {
    dim: usize,
    basis: Vec<String>,
    amp_re: Vec<f64>,
    amp_im: Vec<f64>,
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mirror = StateVectorJson {
            dim: 4,
            basis: basis_labels(4).iter().map(|s| s.to_string()).collect(),
            amp_re: self.amps.iter().map(|z| z.re).collect(),
            amp_im: self.amps.iter().map(|z| z.im).collect(),
        };
        mirror.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let mirror = StateVectorJson::deserialize(deserializer)?;
        if mirror.dim != 4 || mirror.amp_re.len() != 4 || mirror.amp_im.len() != 4 {
            return Err(D::Error::custom("state vector must have dim 4"));
        }
        if mirror.basis != basis_labels(4) {
            return Err(D::Error::custom("basis must be the canonical time-bin order"));
        }
        let amps = Vector4::from_fn(|i, _| Complex64::new(mirror.amp_re[i], mirror.amp_im[i]));
        Ok(StateVector { amps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mixed_state_basics() {
        let rho = DensityMatrix::maximally_mixed(4).unwrap();
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.purity(), 0.25, epsilon = 1e-15);
        rho.validate_physical(1e-10, PSD_TOLERANCE).unwrap();
        let eig = rho.eigenvalues();
        for v in eig {
            assert_abs_diff_eq!(v, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn pure_state_projector() {
        let v = Vector4::new(
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.5, 0.0),
        );
        let rho = DensityMatrix::from_pure(&v).unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.entry(0, 3).re, -0.25, epsilon = 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = DMatrix::identity(4, 4).map(|z: Complex64| z * 0.25);
        m[(0, 1)] = Complex64::new(0.3, 0.0);
        assert!(DensityMatrix::from_matrix(m).is_err());
    }

    #[test]
    fn random_states_are_physical() {
        let mut rng = derive_rng(41, "density-random");
        for _ in 0..50 {
            let rho = DensityMatrix::random_hs(&mut rng, 4).unwrap();
            rho.validate_physical(1e-10, PSD_TOLERANCE).unwrap();
            let eig = rho.eigenvalues();
            assert_abs_diff_eq!(eig.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn reduced_states_of_product() {
        // |t1>< t1| ⊗ I/2
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        m[(1, 1)] = Complex64::new(0.5, 0.0);
        let rho = DensityMatrix::from_matrix(m).unwrap();
        let first = rho.reduced(Subsystem::First).unwrap();
        assert_abs_diff_eq!(first.entry(0, 0).re, 1.0, epsilon = 1e-14);
        let second = rho.reduced(Subsystem::Second).unwrap();
        assert_abs_diff_eq!(second.entry(0, 0).re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(second.entry(1, 1).re, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let mut rng = derive_rng(43, "density-json");
        let rho = DensityMatrix::random_hs(&mut rng, 4).unwrap();
        let text = serde_json::to_string(&rho).unwrap();
        assert!(text.contains("\"basis\":[\"t1t1\",\"t1t2\",\"t2t1\",\"t2t2\"]"));
        let back: DensityMatrix = serde_json::from_str(&text).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert_abs_diff_eq!((back.entry(r, c) - rho.entry(r, c)).norm(), 0.0, epsilon = 0.0);
            }
        }
    }

    #[test]
    fn json_rejects_wrong_basis() {
        let text = r#"{"dim":2,"basis":["t2","t1"],"re":[[1.0,0.0],[0.0,0.0]],"im":[[0.0,0.0],[0.0,0.0]]}"#;
        assert!(serde_json::from_str::<DensityMatrix>(text).is_err());
    }
}
