//! Controlled-phase gate pipeline for two time-bin qubits.
//!
//! A qubit enters on port `A` or `B` as `c1|t1> + c2 e^{i phi}|t2>` with an
//! amplitude attenuator acting on the `t1` component at preparation. The
//! 2x2 switch rotates the port pair by a time-bin-dependent angle:
//!
//! ```text
//! |tk>_A -> cos(theta_k/2)|tk>_C - sin(theta_k/2)|tk>_D
//! |tk>_B -> sin(theta_k/2)|tk>_C + cos(theta_k/2)|tk>_D
//! ```
//!
//! At the operating point `theta(t1) = 0`, `theta(t2) = 2 acos(1/sqrt 3)`
//! the switch passes the first bin and splits the second with transmission
//! amplitude `1/sqrt 3` from `A` to `C`. Conditioned on a coincidence
//! between ports `C` and `D`, and with a one-third intensity attenuation of
//! `t1` at each source, the surviving two-qubit amplitudes realize
//! `diag(1, 1, 1, -1)` with overall success probability 1/9.

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::fock::{FockBasisState, FockState, ModeIndex, Port, TimeBin};

/// Amplitude attenuation `sqrt(1/3)` that balances the gate.
pub fn one_third_amplitude() -> f64 {
    (1.0f64 / 3.0).sqrt()
}

/// Switch angle `2 acos(1/sqrt 3)` that makes the second bin a one-third
/// beam splitter (transmission `cos^2(theta/2) = 1/3` from `A` to `C`).
pub fn one_third_splitter_angle() -> f64 {
    2.0 * (1.0f64 / 3.0f64.sqrt()).acos()
}

/// One input time-bin qubit: `c1|t1> + c2 e^{i phi}|t2>` with `c1, c2 >= 0`
/// and `c1^2 + c2^2 = 1`, plus the preparation-stage amplitude attenuation
/// applied to the `t1` component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeBinQubitSpec {
    c1: f64,
    c2: f64,
    phi: f64,
    att1: f64,
}

impl TimeBinQubitSpec {
    pub fn new(c1: f64, c2: f64, phi: f64, att1: f64) -> Result<Self> {
        if c1 < 0.0 || c2 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "c1/c2",
                value: c1.min(c2),
                constraint: "amplitudes are nonnegative reals",
            });
        }
        let norm = c1 * c1 + c2 * c2;
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "c1^2 + c2^2",
                value: norm,
                constraint: "qubit amplitudes must be normalized within 1e-12",
            });
        }
        if !(0.0..=1.0).contains(&att1) {
            return Err(Error::InvalidParameter {
                name: "att1",
                value: att1,
                constraint: "attenuation is an amplitude factor in [0, 1]",
            });
        }
        Ok(TimeBinQubitSpec { c1, c2, phi, att1 })
    }

    /// Spec from the `t1` amplitude alone; `c2 = sqrt(1 - c1^2)`.
    pub fn from_c1(c1: f64, phi: f64, att1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c1) {
            return Err(Error::InvalidParameter {
                name: "c1",
                value: c1,
                constraint: "c1 must lie in [0, 1]",
            });
        }
        Self::new(c1, (1.0 - c1 * c1).max(0.0).sqrt(), phi, att1)
    }

    /// `(|t1> + |t2>)/sqrt 2`.
    pub fn plus(att1: f64) -> Self {
        Self::new(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.0, att1)
            .expect("|+> is normalized")
    }

    /// Basis state `|t1>` or `|t2>`.
    pub fn time_bin(bin: TimeBin, att1: f64) -> Self {
        match bin {
            TimeBin::T1 => Self::new(1.0, 0.0, 0.0, att1),
            TimeBin::T2 => Self::new(0.0, 1.0, 0.0, att1),
        }
        .expect("basis states are normalized")
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn att1(&self) -> f64 {
        self.att1
    }
}

impl<'de> Deserialize<'de> for TimeBinQubitSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Mirror {
            c1: f64,
            c2: f64,
            phi: f64,
            att1: f64,
        }
        let m = Mirror::deserialize(deserializer)?;
        TimeBinQubitSpec::new(m.c1, m.c2, m.phi, m.att1).map_err(serde::de::Error::custom)
    }
}

/// Phase-difference schedule of the switch, one angle per time bin, in
/// radians. The default is the C-Phase operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchProfile {
    pub theta_t1: f64,
    pub theta_t2: f64,
}

impl Default for SwitchProfile {
    fn default() -> Self {
        SwitchProfile {
            theta_t1: 0.0,
            theta_t2: one_third_splitter_angle(),
        }
    }
}

impl SwitchProfile {
    pub fn new(theta_t1: f64, theta_t2: f64) -> Self {
        SwitchProfile { theta_t1, theta_t2 }
    }

    pub fn theta(&self, bin: TimeBin) -> f64 {
        match bin {
            TimeBin::T1 => self.theta_t1,
            TimeBin::T2 => self.theta_t2,
        }
    }

    /// Port-pair rotation for one bin: rows are the inputs `(A, B)`,
    /// columns the outputs `(C, D)`; the `A` row carries `-sin(theta/2)`
    /// on the `D` output.
    pub fn rotation(&self, bin: TimeBin) -> Matrix2<Complex64> {
        let half = 0.5 * self.theta(bin);
        let (s, c) = half.sin_cos();
        Matrix2::new(
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        )
    }
}

/// Coincidence-projected two-qubit state and its success probability.
///
/// The probability is the squared norm of the projected component and
/// therefore already contains the preparation attenuation factors carried
/// by the sub-normalized input state. The stored vector is normalized, in
/// the basis `|t1 t1>, |t1 t2>, |t2 t1>, |t2 t2>` (C-side bin first).
#[derive(Debug, Clone, PartialEq)]
pub struct PostselectResult {
    pub state: Vector4<Complex64>,
    pub probability: f64,
}

/// Sub-normalized single-photon state for one prepared qubit.
///
/// Amplitudes are `(att1 c1, c2 e^{i phi})` on `(port, t1)` and
/// `(port, t2)`; the squared norm `att1^2 c1^2 + c2^2` is the preparation
/// success probability.
pub fn prepare_qubit(spec: &TimeBinQubitSpec, port: Port) -> Result<FockState> {
    if !port.is_input() {
        return Err(Error::UnexpectedMode {
            mode: port.to_string(),
            context: "qubits are prepared on input ports A or B",
        });
    }
    let t1 = ModeIndex::new(port, TimeBin::T1);
    let t2 = ModeIndex::new(port, TimeBin::T2);
    FockState::from_terms(
        1,
        [
            (
                FockBasisState::single(t1),
                Complex64::new(spec.att1 * spec.c1, 0.0),
            ),
            (
                FockBasisState::single(t2),
                Complex64::from_polar(spec.c2, spec.phi),
            ),
        ],
    )
}

/// Two-photon product state of qubit `a` on port `A` and qubit `b` on `B`.
pub fn prepare_input_pair(a: &TimeBinQubitSpec, b: &TimeBinQubitSpec) -> Result<FockState> {
    prepare_qubit(a, Port::A)?.tensor(&prepare_qubit(b, Port::B)?)
}

/// Routes every photon through the switch: per time bin `t_k` the port
/// pair `(A, B)` is rotated by `theta(t_k)` onto `(C, D)`.
pub fn apply_switch(state: &FockState, profile: &SwitchProfile) -> Result<FockState> {
    if !state.supported_on_ports(&[Port::A, Port::B]) {
        return Err(Error::UnexpectedMode {
            mode: "C or D".into(),
            context: "switch input must be supported on ports A and B",
        });
    }
    let mut out = state.clone();
    for bin in [TimeBin::T1, TimeBin::T2] {
        out = out.apply_two_mode_unitary(
            [ModeIndex::new(Port::A, bin), ModeIndex::new(Port::B, bin)],
            [ModeIndex::new(Port::C, bin), ModeIndex::new(Port::D, bin)],
            &profile.rotation(bin),
        )?;
    }
    Ok(out)
}

/// Projects onto exactly one photon at port `C` and one at port `D` (any
/// time bins) and returns the normalized qubit-pair state with the
/// projection probability.
pub fn postselect_coincidence(state: &FockState) -> Result<PostselectResult> {
    if state.photons() != 2 {
        return Err(Error::PhotonNumberMismatch {
            left: state.photons(),
            right: 2,
        });
    }
    if !state.supported_on_ports(&[Port::C, Port::D]) {
        return Err(Error::UnexpectedMode {
            mode: "A or B".into(),
            context: "post-selection acts on the switch output ports",
        });
    }
    let mut amps = Vector4::from_element(Complex64::new(0.0, 0.0));
    for (basis, amp) in state.terms() {
        let c = [
            basis.occupation(ModeIndex::new(Port::C, TimeBin::T1)),
            basis.occupation(ModeIndex::new(Port::C, TimeBin::T2)),
        ];
        let d = [
            basis.occupation(ModeIndex::new(Port::D, TimeBin::T1)),
            basis.occupation(ModeIndex::new(Port::D, TimeBin::T2)),
        ];
        if c[0] + c[1] == 1 && d[0] + d[1] == 1 {
            let i = if c[1] == 1 { 1 } else { 0 };
            let j = if d[1] == 1 { 1 } else { 0 };
            amps[2 * i + j] += amp;
        }
    }
    let probability: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    if probability <= 1e-28 {
        return Err(Error::EmptyPostselection {
            norm_sq: probability,
        });
    }
    let scale = Complex64::new(probability.sqrt(), 0.0);
    Ok(PostselectResult {
        state: amps / scale,
        probability,
    })
}

/// Full pipeline: prepare both qubits, apply the switch, post-select.
pub fn run_gate(
    a: &TimeBinQubitSpec,
    b: &TimeBinQubitSpec,
    profile: &SwitchProfile,
) -> Result<PostselectResult> {
    let input = prepare_input_pair(a, b)?;
    let routed = apply_switch(&input, profile)?;
    postselect_coincidence(&routed)
}

/// Probability that the gate succeeds for the given inputs.
pub fn gate_success_probability(
    a: &TimeBinQubitSpec,
    b: &TimeBinQubitSpec,
    profile: &SwitchProfile,
) -> Result<f64> {
    Ok(run_gate(a, b, profile)?.probability)
}

/// The ideal two-qubit controlled-phase unitary `diag(1, 1, 1, -1)`.
pub fn ideal_cphase_matrix() -> Matrix4<Complex64> {
    Matrix4::from_diagonal(&Vector4::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
    ))
}

/// Conjugates a two-qubit density matrix by the ideal gate. Trace and the
/// eigenvalue multiset are preserved.
pub fn ideal_cphase_apply(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDensityMatrix(
            "the gate acts on two-qubit states".into(),
        ));
    }
    let cp = ideal_cphase_matrix();
    let u = DMatrix::from_fn(4, 4, |r, c| cp[(r, c)]);
    rho.conjugate_by(&u)
}

/// Closed-form ideal gate output for two input specs: amplitudes
/// `(c1a c1b, c1a c2b e^{i phi_b}, c2a c1b e^{i phi_a},
/// -c2a c2b e^{i(phi_a + phi_b)})`. This is what the physical pipeline
/// produces (after renormalization) at the operating point.
pub fn ideal_output_state(a: &TimeBinQubitSpec, b: &TimeBinQubitSpec) -> Vector4<Complex64> {
    Vector4::new(
        Complex64::new(a.c1 * b.c1, 0.0),
        Complex64::from_polar(a.c1 * b.c2, b.phi),
        Complex64::from_polar(a.c2 * b.c1, a.phi),
        -Complex64::from_polar(a.c2 * b.c2, a.phi + b.phi),
    )
}

/// Product-state coefficient vector of the two input qubits (no gate).
pub fn input_product_state(a: &TimeBinQubitSpec, b: &TimeBinQubitSpec) -> Vector4<Complex64> {
    Vector4::new(
        Complex64::new(a.c1 * b.c1, 0.0),
        Complex64::from_polar(a.c1 * b.c2, b.phi),
        Complex64::from_polar(a.c2 * b.c1, a.phi),
        Complex64::from_polar(a.c2 * b.c2, a.phi + b.phi),
    )
}

/// Unnormalized diagonal map of bin-preserving coincidence amplitudes for
/// the inputs `|t1 t1>, |t1 t2>, |t2 t1>, |t2 t2>`, including the per-qubit
/// `att1` on every `t1` component:
/// `diag(att1^2 cos t1, att1 ch1 ch2, att1 ch1 ch2, cos t2)` with
/// `ch_k = cos(theta_k / 2)`. For `theta(t1) = 0` this is the exact
/// conditional gate; bin-swapping coincidence terms vanish there.
pub fn effective_conditional_gate(profile: &SwitchProfile, att1: f64) -> Matrix4<Complex64> {
    let ch1 = (0.5 * profile.theta_t1).cos();
    let ch2 = (0.5 * profile.theta_t2).cos();
    Matrix4::from_diagonal(&Vector4::new(
        Complex64::new(att1 * att1 * profile.theta_t1.cos(), 0.0),
        Complex64::new(att1 * ch1 * ch2, 0.0),
        Complex64::new(att1 * ch1 * ch2, 0.0),
        Complex64::new(profile.theta_t2.cos(), 0.0),
    ))
}

/// Rotates the global phase so the first amplitude above `1e-12` in
/// magnitude is real and positive; used before serializing state vectors.
pub fn canonical_global_phase(v: &Vector4<Complex64>) -> Vector4<Complex64> {
    for amp in v.iter() {
        if amp.norm() > 1e-12 {
            let phase = amp / Complex64::new(amp.norm(), 0.0);
            return v.map(|z| z / phase);
        }
    }
    *v
}

/// Largest elementwise deviation between `a` and `b` after aligning their
/// global phases; `f64::INFINITY` when the states are orthogonal.
pub fn max_deviation_up_to_phase(a: &Vector4<Complex64>, b: &Vector4<Complex64>) -> f64 {
    let overlap: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    if overlap.norm() < 1e-14 {
        return f64::INFINITY;
    }
    let phase = overlap / Complex64::new(overlap.norm(), 0.0);
    (0..4)
        .map(|i| (a[i] - b[i] * phase).norm())
        .fold(0.0, f64::max)
}
