//! Spectral representation of wave states on the unit interval and the unit
//! square.
//!
//! States are stored as coefficients in the orthonormal Dirichlet eigenbasis
//! of `-Δ`:
//!
//! * interval: `e_n(x) = √2 sin(nπx)`, `λ_n = (nπ)²`, `n = 1..=N`;
//! * square: `e_k(x) = 2 sin(k₁πx₁) sin(k₂πx₂)`, `λ_k = π²(k₁² + k₂²)`.
//!
//! Square modes are flattened `k₂`-major: index `(k₂-1)·K₁ + (k₁-1)`, so every
//! fixed-`k₂` slice is contiguous.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Interval { n: usize },
    Square { k1: usize, k2: usize },
}

/// A retained eigenmode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Line(usize),
    Plane(usize, usize),
}

impl Mode {
    pub fn eigenvalue(self) -> f64 {
        match self {
            Mode::Line(n) => {
                let n = n as f64;
                PI * PI * n * n
            }
            Mode::Plane(k1, k2) => {
                let (a, b) = (k1 as f64, k2 as f64);
                PI * PI * (a * a + b * b)
            }
        }
    }

    pub fn frequency(self) -> f64 {
        match self {
            Mode::Line(n) => PI * n as f64,
            Mode::Plane(k1, k2) => PI * (k1 as f64).hypot(k2 as f64),
        }
    }
}

impl DomainSpec {
    pub fn interval(n: usize) -> Result<Self> {
        let d = DomainSpec::Interval { n };
        d.validate()?;
        Ok(d)
    }

    pub fn square(k1: usize, k2: usize) -> Result<Self> {
        let d = DomainSpec::Square { k1, k2 };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DomainSpec::Interval { n: 0 } => Err(Error::InvalidDomain("interval truncation must be >= 1".into())),
            DomainSpec::Square { k1, k2 } if k1 == 0 || k2 == 0 => {
                Err(Error::InvalidDomain("square truncation components must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Number of retained modes (flattened length).
    pub fn len(&self) -> usize {
        match *self {
            DomainSpec::Interval { n } => n,
            DomainSpec::Square { k1, k2 } => k1 * k2,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mode(&self, index: usize) -> Mode {
        match *self {
            DomainSpec::Interval { n } => {
                assert!(index < n, "mode index {index} out of range");
                Mode::Line(index + 1)
            }
            DomainSpec::Square { k1, k2 } => {
                assert!(index < k1 * k2, "mode index {index} out of range");
                Mode::Plane(index % k1 + 1, index / k1 + 1)
            }
        }
    }

    /// Flattened index of a mode, if it is retained.
    pub fn index_of(&self, mode: Mode) -> Option<usize> {
        match (*self, mode) {
            (DomainSpec::Interval { n }, Mode::Line(m)) if (1..=n).contains(&m) => Some(m - 1),
            (DomainSpec::Square { k1, k2 }, Mode::Plane(a, b)) if (1..=k1).contains(&a) && (1..=k2).contains(&b) => {
                Some((b - 1) * k1 + (a - 1))
            }
            _ => None,
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.len()).map(move |i| self.mode(i))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes().map(Mode::eigenvalue).collect()
    }

    /// `true` when `other` has the same shape and at least as many modes per axis.
    pub fn contains(&self, other: &DomainSpec) -> bool {
        match (*self, *other) {
            (DomainSpec::Interval { n }, DomainSpec::Interval { n: m }) => m <= n,
            (DomainSpec::Square { k1, k2 }, DomainSpec::Square { k1: a, k2: b }) => a <= k1 && b <= k2,
            _ => false,
        }
    }
}

/// `ω = √λ` for every retained mode, in canonical order.
pub fn eigen_frequencies(domain: &DomainSpec) -> Vec<f64> {
    domain.modes().map(Mode::frequency).collect()
}

/// Wave state `(position, velocity)` in the orthonormal eigenbasis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModalState")]
pub struct ModalState {
    domain: DomainSpec,
    pos: Vec<f64>,
    vel: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModalState {
    domain: DomainSpec,
    pos: Vec<f64>,
    vel: Vec<f64>,
}

impl TryFrom<RawModalState> for ModalState {
    type Error = Error;

    fn try_from(raw: RawModalState) -> Result<Self> {
        ModalState::new(raw.domain, raw.pos, raw.vel)
    }
}

impl ModalState {
    pub fn new(domain: DomainSpec, pos: Vec<f64>, vel: Vec<f64>) -> Result<Self> {
        domain.validate()?;
        let n = domain.len();
        if pos.len() != n || vel.len() != n {
            return Err(Error::InvalidState(format!(
                "expected {n} coefficients, got pos={} vel={}",
                pos.len(),
                vel.len()
            )));
        }
        if pos.iter().chain(&vel).any(|c| !c.is_finite()) {
            return Err(Error::InvalidState("coefficients must be finite".into()));
        }
        Ok(ModalState { domain, pos, vel })
    }

    pub fn zeros(domain: DomainSpec) -> Self {
        let n = domain.len();
        ModalState { domain, pos: vec![0.0; n], vel: vec![0.0; n] }
    }

    /// State supported on one mode.
    pub fn single_mode(domain: DomainSpec, mode: Mode, pos: f64, vel: f64) -> Result<Self> {
        let idx =
            domain.index_of(mode).ok_or_else(|| Error::InvalidState(format!("{mode:?} not retained in {domain:?}")))?;
        let mut s = ModalState::zeros(domain);
        s.pos[idx] = pos;
        s.vel[idx] = vel;
        ModalState::new(s.domain, s.pos, s.vel)
    }

    /// Random state whose traveling-wave amplitudes are i.i.d. standard
    /// complex normals: `pos ~ N(0,1)`, `vel ~ ω·N(0,1)`.
    pub fn random<R: Rng + ?Sized>(domain: DomainSpec, rng: &mut R) -> Self {
        let omega = eigen_frequencies(&domain);
        let pos = (0..domain.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let vel = omega.iter().map(|w| w * rng.sample::<f64, _>(StandardNormal)).collect();
        ModalState { domain, pos, vel }
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn pos(&self) -> &[f64] {
        &self.pos
    }

    pub fn vel(&self) -> &[f64] {
        &self.vel
    }

    pub fn is_zero(&self) -> bool {
        self.pos.iter().chain(&self.vel).all(|&c| c == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        ModalState {
            domain: self.domain,
            pos: self.pos.iter().map(|x| c * x).collect(),
            vel: self.vel.iter().map(|x| c * x).collect(),
        }
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: f64, other: &ModalState) -> Result<Self> {
        ensure_same_domain(&self.domain, &other.domain)?;
        Ok(ModalState {
            domain: self.domain,
            pos: self.pos.iter().zip(&other.pos).map(|(a, b)| a + c * b).collect(),
            vel: self.vel.iter().zip(&other.vel).map(|(a, b)| a + c * b).collect(),
        })
    }

    /// Zero-pads the state into a larger truncation of the same domain.
    pub fn embed(&self, larger: DomainSpec) -> Result<Self> {
        larger.validate()?;
        if !larger.contains(&self.domain) {
            return Err(Error::DomainMismatch { left: self.domain, right: larger });
        }
        let mut out = ModalState::zeros(larger);
        for (i, mode) in self.domain.modes().enumerate() {
            let j = larger.index_of(mode).expect("contained mode");
            out.pos[j] = self.pos[i];
            out.vel[j] = self.vel[i];
        }
        Ok(out)
    }
}

pub(crate) fn ensure_same_domain(a: &DomainSpec, b: &DomainSpec) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DomainMismatch { left: *a, right: *b })
    }
}

/// Amplitudes of `φ(t) = Σ_k (α_k e^{iω_k t} + α_{-k} e^{-iω_k t}) e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TravelingWaveCoeffs {
    pub domain: DomainSpec,
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
}

pub fn to_traveling_wave(state: &ModalState) -> TravelingWaveCoeffs {
    let omega = eigen_frequencies(&state.domain);
    let mut plus = Vec::with_capacity(omega.len());
    let mut minus = Vec::with_capacity(omega.len());
    for ((&p, &v), &w) in state.pos.iter().zip(&state.vel).zip(&omega) {
        let a = Complex64::new(0.5 * p, -0.5 * v / w);
        plus.push(a);
        minus.push(a.conj());
    }
    TravelingWaveCoeffs { domain: state.domain, plus, minus }
}

/// Inverse of [`to_traveling_wave`]; imaginary parts (zero for coefficients
/// of a real state) are discarded.
pub fn from_traveling_wave(coeffs: &TravelingWaveCoeffs) -> ModalState {
    let omega = eigen_frequencies(&coeffs.domain);
    let mut pos = Vec::with_capacity(omega.len());
    let mut vel = Vec::with_capacity(omega.len());
    for ((&ap, &am), &w) in coeffs.plus.iter().zip(&coeffs.minus).zip(&omega) {
        pos.push((ap + am).re);
        // vel = Re(iω(α₊ − α₋)) = −ω·Im(α₊ − α₋)
        vel.push(-w * (ap - am).im);
    }
    ModalState { domain: coeffs.domain, pos, vel }
}

/// Norm pair `(H_a, H_{a-1/2})` of the Sobolev scale built on `A = -Δ`.
///
/// The dual pair `(H_{-α}, H_{-α-1/2})` is `SobolevIndex::new(-α)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SobolevRepr", into = "SobolevRepr")]
pub struct SobolevIndex {
    pub a: f64,
}

impl SobolevIndex {
    /// `H¹₀ × L²`.
    pub const ENERGY: SobolevIndex = SobolevIndex { a: 0.5 };
    /// `L² × H⁻¹`.
    pub const WEAK: SobolevIndex = SobolevIndex { a: 0.0 };

    pub fn new(a: f64) -> Self {
        SobolevIndex { a }
    }

    /// Position-component weight `λ^{2a}`.
    pub fn pos_weight(&self, lambda: f64) -> f64 {
        lambda.powf(2.0 * self.a)
    }

    /// Velocity-component weight `λ^{2a-1}`.
    pub fn vel_weight(&self, lambda: f64) -> f64 {
        lambda.powf(2.0 * self.a - 1.0)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SobolevRepr {
    Named(String),
    Exponent { a: f64 },
}

impl TryFrom<SobolevRepr> for SobolevIndex {
    type Error = String;

    fn try_from(r: SobolevRepr) -> std::result::Result<Self, String> {
        match r {
            SobolevRepr::Named(s) => match s.as_str() {
                "energy" => Ok(SobolevIndex::ENERGY),
                "weak" => Ok(SobolevIndex::WEAK),
                other => Err(format!("unknown norm pair {other:?} (expected \"energy\", \"weak\" or {{\"a\": x}})")),
            },
            SobolevRepr::Exponent { a } if a.is_finite() => Ok(SobolevIndex { a }),
            SobolevRepr::Exponent { .. } => Err("norm pair exponent must be finite".into()),
        }
    }
}

impl From<SobolevIndex> for SobolevRepr {
    fn from(s: SobolevIndex) -> Self {
        if s == SobolevIndex::ENERGY {
            SobolevRepr::Named("energy".into())
        } else if s == SobolevIndex::WEAK {
            SobolevRepr::Named("weak".into())
        } else {
            SobolevRepr::Exponent { a: s.a }
        }
    }
}

/// `√(Σ λ^{2a} pos² + Σ λ^{2a-1} vel²)`.
pub fn state_norm(state: &ModalState, pair: SobolevIndex) -> f64 {
    state
        .domain
        .modes()
        .zip(state.pos.iter().zip(&state.vel))
        .map(|(m, (p, v))| {
            let lam = m.eigenvalue();
            pair.pos_weight(lam) * p * p + pair.vel_weight(lam) * v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// `⟨a, b⟩ = Σ a.pos·b.vel − Σ a.vel·b.pos`.
pub fn dual_pairing(a: &ModalState, b: &ModalState) -> Result<f64> {
    ensure_same_domain(&a.domain, &b.domain)?;
    Ok(a.pos.iter().zip(&b.vel).map(|(x, y)| x * y).sum::<f64>()
        - a.vel.iter().zip(&b.pos).map(|(x, y)| x * y).sum::<f64>())
}

/// Exact solution of the homogeneous wave equation at time `t`.
pub fn evolve_free(state: &ModalState, t: f64) -> ModalState {
    let omega = eigen_frequencies(&state.domain);
    let mut pos = Vec::with_capacity(omega.len());
    let mut vel = Vec::with_capacity(omega.len());
    for ((&p, &v), &w) in state.pos.iter().zip(&state.vel).zip(&omega) {
        let (s, c) = (w * t).sin_cos();
        pos.push(p * c + v / w * s);
        vel.push(-w * p * s + v * c);
    }
    ModalState { domain: state.domain, pos, vel }
}
