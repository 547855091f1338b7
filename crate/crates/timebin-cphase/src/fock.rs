//! Exact bosonic state algebra over labelled optical modes.
//!
//! The simulator tracks at most two photons distributed over eight modes:
//! four ports (inputs `A`, `B`; outputs `C`, `D`) times two time bins. A
//! [`FockState`] is a sparse complex-amplitude expansion over
//! [`FockBasisState`] occupation vectors; all terms of one state share a
//! single total photon number. States may be sub-normalized — the missing
//! weight encodes heralding or attenuation probability.
//!
//! Mode-pair transforms act by creation-operator substitution. Writing a
//! basis state as a normalized monomial of creation operators on the
//! vacuum, the transform replaces the operators of the two input modes by
//! unitary mixtures of the operators of the two output modes and re-expands
//! the product. This reproduces multi-photon interference (in particular
//! Hong-Ou-Mandel bunching) exactly.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitudes smaller than this in magnitude are dropped after every
/// transform; well below the 1e-12 tolerances used by all contracts.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Maximum unitarity residual accepted by mode-pair transforms.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

/// Optical port label. `A` and `B` are the switch inputs, `C` and `D` the
/// outputs; the switch relabels ports, so input and output ports never
/// coexist in one state's support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Port {
    A,
    B,
    C,
    D,
}

impl Port {
    pub fn is_input(self) -> bool {
        matches!(self, Port::A | Port::B)
    }

    pub fn is_output(self) -> bool {
        !self.is_input()
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Port::A => "A",
            Port::B => "B",
            Port::C => "C",
            Port::D => "D",
        };
        f.write_str(s)
    }
}

/// Temporal mode of a time-bin qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TimeBin {
    T1,
    T2,
}

impl fmt::Display for TimeBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeBin::T1 => "t1",
            TimeBin::T2 => "t2",
        })
    }
}

/// One of the eight optical modes: a port and a time bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub port: Port,
    pub bin: TimeBin,
}

impl ModeIndex {
    pub const fn new(port: Port, bin: TimeBin) -> Self {
        ModeIndex { port, bin }
    }

    /// Position in the canonical mode ordering
    /// `(A,t1),(A,t2),(B,t1),(B,t2),(C,t1),(C,t2),(D,t1),(D,t2)`.
    pub fn canonical(self) -> usize {
        let p = match self.port {
            Port::A => 0,
            Port::B => 1,
            Port::C => 2,
            Port::D => 3,
        };
        let b = match self.bin {
            TimeBin::T1 => 0,
            TimeBin::T2 => 1,
        };
        2 * p + b
    }

    pub fn from_canonical(index: usize) -> Option<Self> {
        if index >= 8 {
            return None;
        }
        let port = [Port::A, Port::B, Port::C, Port::D][index / 2];
        let bin = [TimeBin::T1, TimeBin::T2][index % 2];
        Some(ModeIndex::new(port, bin))
    }

    /// All eight modes in canonical order.
    pub fn all() -> [ModeIndex; 8] {
        let mut out = [ModeIndex::new(Port::A, TimeBin::T1); 8];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = ModeIndex::from_canonical(i).unwrap();
        }
        out
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.port, self.bin)
    }
}

/// Photon occupation numbers for the eight canonical modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockBasisState {
    occ: [u8; 8],
}

// Canonical basis order: occupation vectors with the same photon total are
// compared by descending lexicographic order, so the state with all photons
// in (A,t1) comes first. BTreeMap iteration and basis_index both follow it.
impl Ord for FockBasisState {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.occ.cmp(&self.occ)
    }
}

impl PartialOrd for FockBasisState {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl FockBasisState {
    pub fn vacuum() -> Self {
        FockBasisState { occ: [0; 8] }
    }

    /// Basis state from explicit `(mode, count)` pairs; unlisted modes are
    /// empty. Counts for a repeated mode accumulate.
    pub fn from_occupations(pairs: &[(ModeIndex, u8)]) -> Self {
        let mut occ = [0u8; 8];
        for &(mode, n) in pairs {
            occ[mode.canonical()] += n;
        }
        FockBasisState { occ }
    }

    /// Single photon in `mode`.
    pub fn single(mode: ModeIndex) -> Self {
        Self::from_occupations(&[(mode, 1)])
    }

    pub fn occupation(&self, mode: ModeIndex) -> u8 {
        self.occ[mode.canonical()]
    }

    pub fn occupations(&self) -> [u8; 8] {
        self.occ
    }

    pub fn photons(&self) -> u8 {
        self.occ.iter().sum()
    }

    fn with_occ(occ: [u8; 8]) -> Self {
        FockBasisState { occ }
    }

    /// Rank of this state within the family of all basis states sharing its
    /// photon total, under the canonical order. Bijective and stable; pairs
    /// with [`FockBasisState::from_index`]. Occupation counts are unsigned
    /// by construction, so no invalid input exists.
    pub fn basis_index(&self) -> usize {
        let mut rank = 0usize;
        let mut remaining = self.photons() as usize;
        for pos in 0..8 {
            let here = self.occ[pos] as usize;
            // states placing more than `here` photons in this mode come first
            for v in (here + 1)..=remaining {
                rank += distributions(remaining - v, 7 - pos);
            }
            remaining -= here;
        }
        rank
    }

    /// Inverse of [`FockBasisState::basis_index`] for a given photon total.
    pub fn from_index(photons: u8, index: usize) -> Option<Self> {
        let mut occ = [0u8; 8];
        let mut remaining = photons as usize;
        let mut index = index;
        for pos in 0..8 {
            let mut placed = None;
            for v in (0..=remaining).rev() {
                let block = distributions(remaining - v, 7 - pos);
                if index < block {
                    placed = Some(v);
                    break;
                }
                index -= block;
            }
            let v = placed?;
            occ[pos] = v as u8;
            remaining -= v;
        }
        if remaining == 0 && index == 0 {
            Some(FockBasisState { occ })
        } else {
            None
        }
    }

    /// All basis states with the given photon total, in canonical order.
    pub fn enumerate(photons: u8) -> Vec<Self> {
        let count = count_states(photons as usize);
        (0..count)
            .map(|i| Self::from_index(photons, i).expect("index within family"))
            .collect()
    }

    /// Ports occupied by at least one photon.
    pub fn ports(&self) -> impl Iterator<Item = Port> + '_ {
        (0..8).filter_map(move |i| {
            if self.occ[i] > 0 {
                ModeIndex::from_canonical(i).map(|m| m.port)
            } else {
                None
            }
        })
    }
}

impl fmt::Display for FockBasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &n) in self.occ.iter().enumerate() {
            if n > 0 {
                if !first {
                    write!(f, " ")?;
                }
                let mode = ModeIndex::from_canonical(i).unwrap();
                write!(f, "{}^{}", mode, n)?;
                first = false;
            }
        }
        if first {
            write!(f, "|vac>")?;
        }
        Ok(())
    }
}

/// Number of ways to distribute `photons` indistinguishable photons over
/// `modes` modes (weak compositions).
fn distributions(photons: usize, modes: usize) -> usize {
    if modes == 0 {
        return usize::from(photons == 0);
    }
    binomial(photons + modes - 1, modes - 1)
}

fn count_states(photons: usize) -> usize {
    distributions(photons, 8)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num = 1usize;
    for i in 0..k {
        num = num * (n - i) / (i + 1);
    }
    num
}

fn factorial(n: u8) -> f64 {
    const TABLE: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];
    TABLE[n as usize]
}

/// Sparse complex-amplitude expansion over a fixed photon total.
///
/// The squared-amplitude sum lies in `[0, 1 + 1e-12]`; a deficit from 1 is
/// the probability lost to heralding or attenuation. Terms below
/// [`PRUNE_THRESHOLD`] in magnitude are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    photons: u8,
    terms: BTreeMap<FockBasisState, Complex64>,
}

impl FockState {
    /// Builds a state from `(basis state, amplitude)` terms. Every term must
    /// carry `photons` photons; duplicate basis states accumulate.
    pub fn from_terms<I>(photons: u8, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FockBasisState, Complex64)>,
    {
        let mut map: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
        for (basis, amp) in terms {
            if basis.photons() != photons {
                return Err(Error::PhotonNumberMismatch {
                    left: photons,
                    right: basis.photons(),
                });
            }
            *map.entry(basis).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        map.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        let state = FockState { photons, terms: map };
        let n = state.norm_sq();
        if n > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "state squared norm {n} exceeds 1"
            )));
        }
        Ok(state)
    }

    /// Unit-amplitude basis state.
    pub fn basis_state(basis: FockBasisState) -> Self {
        let photons = basis.photons();
        let mut terms = BTreeMap::new();
        terms.insert(basis, Complex64::new(1.0, 0.0));
        FockState { photons, terms }
    }

    pub fn photons(&self) -> u8 {
        self.photons
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical basis order.
    pub fn terms(&self) -> impl Iterator<Item = (&FockBasisState, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, basis: &FockBasisState) -> Complex64 {
        self.terms
            .get(basis)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Returns the unit-norm state and the norm that was divided out.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        let norm_sq = self.norm_sq();
        if norm_sq <= 1e-28 {
            return Err(Error::ZeroNorm { norm_sq });
        }
        let norm = norm_sq.sqrt();
        let terms = self
            .terms
            .iter()
            .map(|(b, a)| (*b, a / norm))
            .collect();
        Ok((
            FockState {
                photons: self.photons,
                terms,
            },
            norm,
        ))
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        if self.photons != other.photons {
            return Err(Error::PhotonNumberMismatch {
                left: self.photons,
                right: other.photons,
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (basis, amp) in &self.terms {
            acc += amp.conj() * other.amplitude(basis);
        }
        Ok(acc)
    }

    /// Product state of two expansions. Overlapping modes pick up the exact
    /// bosonic combinatorial factor `sqrt(C(n1 + n2, n1))` per mode.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let photons = self.photons + other.photons;
        let mut terms: Vec<(FockBasisState, Complex64)> = Vec::new();
        for (ba, aa) in &self.terms {
            for (bb, ab) in &other.terms {
                let mut occ = [0u8; 8];
                let mut factor = 1.0;
                for i in 0..8 {
                    let (n1, n2) = (ba.occupations()[i], bb.occupations()[i]);
                    occ[i] = n1 + n2;
                    if n1 > 0 && n2 > 0 {
                        factor *= binomial((n1 + n2) as usize, n1 as usize) as f64;
                    }
                }
                terms.push((FockBasisState::with_occ(occ), aa * ab * factor.sqrt()));
            }
        }
        FockState::from_terms(photons, terms)
    }

    /// Rewrites the creation operators of the two `input` modes as the
    /// `u`-mixed combinations of the two `output` modes and re-expands.
    ///
    /// Row `r` of `u` gives the amplitudes with which a photon in
    /// `input[r]` reaches `output[0]` and `output[1]`. With
    /// `output == input` this is an in-place two-mode beam splitter; with
    /// fresh output modes it also relabels ports, which requires the output
    /// modes to start unoccupied. Photon number and norm are conserved.
    pub fn apply_two_mode_unitary(
        &self,
        input: [ModeIndex; 2],
        output: [ModeIndex; 2],
        u: &Matrix2<Complex64>,
    ) -> Result<Self> {
        if input[0] == input[1] || output[0] == output[1] {
            return Err(Error::InvalidInput(
                "mode-pair transform needs two distinct modes".into(),
            ));
        }
        let residual = unitarity_residual(u);
        if residual > UNITARITY_TOLERANCE {
            return Err(Error::NonUnitary { residual });
        }
        for &out in &output {
            if out == input[0] || out == input[1] {
                continue;
            }
            for basis in self.terms.keys() {
                if basis.occupation(out) > 0 {
                    return Err(Error::UnexpectedMode {
                        mode: out.to_string(),
                        context: "relabelling target mode is already occupied",
                    });
                }
            }
        }

        let (i0, i1) = (input[0].canonical(), input[1].canonical());
        let (o0, o1) = (output[0].canonical(), output[1].canonical());
        let mut terms: Vec<(FockBasisState, Complex64)> = Vec::new();
        for (basis, amp) in &self.terms {
            let occ = basis.occupations();
            let j = occ[i0];
            let k = occ[i1];
            let mut rest = occ;
            rest[i0] = 0;
            rest[i1] = 0;
            // amp / sqrt(j! k!) * (u00 b0 + u01 b1)^j (u10 b0 + u11 b1)^k
            let base = amp / (factorial(j) * factorial(k)).sqrt();
            for p in 0..=j {
                for q in 0..=k {
                    let coeff = binomial(j as usize, p as usize) as f64
                        * binomial(k as usize, q as usize) as f64;
                    let weight = u[(0, 0)].powu(p as u32)
                        * u[(0, 1)].powu((j - p) as u32)
                        * u[(1, 0)].powu(q as u32)
                        * u[(1, 1)].powu((k - q) as u32);
                    let n0 = p + q;
                    let n1 = (j - p) + (k - q);
                    let mut occ_out = rest;
                    occ_out[o0] += n0;
                    occ_out[o1] += n1;
                    let norm_back = (factorial(n0) * factorial(n1)).sqrt();
                    terms.push((
                        FockBasisState::with_occ(occ_out),
                        base * coeff * weight * norm_back,
                    ));
                }
            }
        }
        FockState::from_terms(self.photons, terms)
    }

    /// In-place two-mode unitary on `m1`, `m2`.
    pub fn apply_mode_pair_unitary(
        &self,
        m1: ModeIndex,
        m2: ModeIndex,
        u: &Matrix2<Complex64>,
    ) -> Result<Self> {
        self.apply_two_mode_unitary([m1, m2], [m1, m2], u)
    }

    /// Scales each term by `factor^n` where `n` is the photon count in
    /// `mode`; models a lossy amplitude attenuator on that mode.
    pub fn attenuate_mode(&self, mode: ModeIndex, factor: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&factor) {
            return Err(Error::InvalidParameter {
                name: "factor",
                value: factor,
                constraint: "amplitude attenuation must lie in [0, 1]",
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|(b, a)| (*b, a * factor.powi(b.occupation(mode) as i32)))
            .collect::<Vec<_>>();
        FockState::from_terms(self.photons, terms)
    }

    /// True when every occupied mode belongs to one of `ports`.
    pub fn supported_on_ports(&self, ports: &[Port]) -> bool {
        self.terms
            .keys()
            .all(|b| b.ports().all(|p| ports.contains(&p)))
    }
}

fn unitarity_residual(u: &Matrix2<Complex64>) -> f64 {
    let gram = u.adjoint() * u;
    let mut residual: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let expect = if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            residual = residual.max((gram[(r, c)] - expect).norm());
        }
    }
    residual
}

// Debug-only JSON form: {"photons": n, "terms": [{"occ": [...8 ints...], "re": .., "im": ..}]}
#[derive(Serialize, Deserialize)]
struct FockTermJson {
    occ: [u8; 8],
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct FockStateJson {
    photons: u8,
    terms: Vec<FockTermJson>,
}

impl Serialize for FockState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mirror = FockStateJson {
            photons: self.photons,
            terms: self
                .terms
                .iter()
                .map(|(b, a)| FockTermJson {
                    occ: b.occupations(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        };
        mirror.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FockState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let mirror = FockStateJson::deserialize(deserializer)?;
        FockState::from_terms(
            mirror.photons,
            mirror
                .terms
                .into_iter()
                .map(|t| (FockBasisState::with_occ(t.occ), Complex64::new(t.re, t.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}
