//! Exact time-Gram forms of observed wave traces and the observability /
//! admissibility constants they induce.
//!
//! A free solution is `φ(t) = Σ_k (α_k e^{iω_k t} + α_{-k} e^{-iω_k t}) e_k`.
//! Both supported observations split into real channels
//! `y_c(t) = Σ_{k ∈ c} w_k φ_k(t)`:
//!
//! * `SquareLeftEdge`: one channel per `k₂`, measured against the boundary
//!   basis `√2 sin(k₂πx₂)` on `Γ₀ = {0}×(0,1)`, with `w_k = √2 k₁π`. The
//!   outward normal derivative is `∂_ν φ = −Σ_c y_c √2 sin(k₂πx₂)`.
//! * `IntervalPoint(ξ)`: a single channel `y = φ(ξ, t)`, `w_n = √2 sin(nπξ)`.
//!
//! Channels are orthogonal in time-space, so the Gram form is block diagonal
//! with one Hermitian block per channel over the coordinates
//! `[α_{+,1..m}, α_{−,1..m}]` of the modes feeding it.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, CVector};
use crate::spectral::{
    ensure_same_domain, from_traveling_wave, state_norm, to_traveling_wave, DomainSpec, ModalState, Mode, SobolevIndex,
    TravelingWaveCoeffs,
};

/// Frequency differences below this are treated as exact resonances.
pub const RESONANCE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservationKind {
    /// Normal derivative on `Γ₀ = {0}×(0,1)` of the unit square.
    SquareLeftEdge,
    /// Pointwise trace `φ(ξ, t)` on the unit interval.
    IntervalPoint { xi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationGeometry {
    pub kind: ObservationKind,
    pub horizon: f64,
}

impl ObservationGeometry {
    pub fn new(kind: ObservationKind, horizon: f64) -> Result<Self> {
        let g = ObservationGeometry { kind, horizon };
        g.validate()?;
        Ok(g)
    }

    pub fn square_left_edge(horizon: f64) -> Result<Self> {
        Self::new(ObservationKind::SquareLeftEdge, horizon)
    }

    pub fn interval_point(xi: f64, horizon: f64) -> Result<Self> {
        Self::new(ObservationKind::IntervalPoint { xi }, horizon)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidGeometry(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if let ObservationKind::IntervalPoint { xi } = self.kind {
            if !(xi > 0.0 && xi < 1.0) {
                return Err(Error::InvalidGeometry(format!("observation point must lie in (0,1), got {xi}")));
            }
        }
        Ok(())
    }

    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new(self.kind, horizon)
    }

    pub fn check_domain(&self, domain: &DomainSpec) -> Result<()> {
        domain.validate()?;
        match (self.kind, domain) {
            (ObservationKind::SquareLeftEdge, DomainSpec::Square { .. })
            | (ObservationKind::IntervalPoint { .. }, DomainSpec::Interval { .. }) => Ok(()),
            _ => Err(Error::InvalidGeometry(format!("{:?} cannot observe {domain:?}", self.kind))),
        }
    }

    pub fn num_channels(&self, domain: &DomainSpec) -> usize {
        match *domain {
            DomainSpec::Square { k2, .. } => k2,
            DomainSpec::Interval { .. } => 1,
        }
    }

    /// Channel fed by `mode`.
    pub fn channel_of(&self, mode: Mode) -> usize {
        match mode {
            Mode::Plane(_, k2) => k2 - 1,
            Mode::Line(_) => 0,
        }
    }

    /// Trace weight `w_k` of a mode in its channel.
    pub fn trace_weight(&self, mode: Mode) -> f64 {
        match (self.kind, mode) {
            (ObservationKind::SquareLeftEdge, Mode::Plane(k1, _)) => SQRT_2 * PI * k1 as f64,
            (ObservationKind::IntervalPoint { xi }, Mode::Line(n)) => SQRT_2 * sin_pi(n as f64 * xi),
            _ => panic!("geometry {:?} incompatible with {mode:?}", self.kind),
        }
    }

    /// Sign relating the channel signal to the physical observed quantity:
    /// `∂_ν φ` on the left edge points in `−x₁`.
    pub fn trace_sign(&self) -> f64 {
        match self.kind {
            ObservationKind::SquareLeftEdge => -1.0,
            ObservationKind::IntervalPoint { .. } => 1.0,
        }
    }
}

/// `sin(πx)` with exact zeros at integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    // r ∈ [-1, 1]
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    let folded = if r > 0.5 {
        1.0 - r
    } else if r < -0.5 {
        -1.0 - r
    } else {
        r
    };
    (PI * folded).sin()
}

/// `∫₀ᵀ e^{iδt} dt`.
pub fn exp_integral(delta: f64, horizon: f64) -> Complex64 {
    if delta.abs() < RESONANCE_EPS {
        return Complex64::new(horizon, 0.5 * delta * horizon * horizon);
    }
    // (e^{iδT} − 1)/(iδ) written without cancellation
    let half = 0.5 * delta * horizon;
    Complex64::new((delta * horizon).sin() / delta, 2.0 * half.sin().powi(2) / delta)
}

#[derive(Clone, Debug)]
pub struct GramBlock {
    pub channel: usize,
    /// Flattened mode indices feeding the channel.
    pub modes: Vec<usize>,
    pub frequencies: Vec<f64>,
    pub weights: Vec<f64>,
    /// `2m × 2m` Hermitian matrix over `[α₊; α₋]`.
    pub matrix: CMatrix,
}

impl GramBlock {
    pub fn dim(&self) -> usize {
        2 * self.modes.len()
    }

    /// Signed frequency `±ω` of block coordinate `i`.
    pub fn coordinate_frequency(&self, i: usize) -> f64 {
        let m = self.modes.len();
        if i < m {
            self.frequencies[i]
        } else {
            -self.frequencies[i - m]
        }
    }

    pub(crate) fn gather(&self, tw: &TravelingWaveCoeffs) -> CVector {
        let m = self.modes.len();
        CVector::from_fn(2 * m, |i, _| if i < m { tw.plus[self.modes[i]] } else { tw.minus[self.modes[i - m]] })
    }

    pub(crate) fn scatter(&self, v: &CVector, tw: &mut TravelingWaveCoeffs) {
        let m = self.modes.len();
        for (j, &k) in self.modes.iter().enumerate() {
            tw.plus[k] = v[j];
            tw.minus[k] = v[j + m];
        }
    }

    /// Diagonal of the pair's norm form in traveling-wave coordinates:
    /// `λ^{2a}(pos² + vel²/λ) = 2λ^{2a}(|α₊|² + |α₋|²)`.
    pub(crate) fn norm_diagonal(&self, pair: SobolevIndex) -> DVector<f64> {
        let m = self.modes.len();
        DVector::from_fn(2 * m, |i, _| {
            let w = self.frequencies[i % m];
            2.0 * pair.pos_weight(w * w)
        })
    }
}

#[derive(Clone, Debug)]
pub struct ObservationGram {
    pub geometry: ObservationGeometry,
    pub domain: DomainSpec,
    pub blocks: Vec<GramBlock>,
}

pub fn assemble_gram(geometry: &ObservationGeometry, domain: &DomainSpec) -> Result<ObservationGram> {
    geometry.validate()?;
    geometry.check_domain(domain)?;
    let channels = geometry.num_channels(domain);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); channels];
    for (i, mode) in domain.modes().enumerate() {
        members[geometry.channel_of(mode)].push(i);
    }
    let horizon = geometry.horizon;
    let blocks = members
        .into_par_iter()
        .enumerate()
        .map(|(channel, modes)| {
            let frequencies: Vec<f64> = modes.iter().map(|&i| domain.mode(i).frequency()).collect();
            let weights: Vec<f64> = modes.iter().map(|&i| geometry.trace_weight(domain.mode(i))).collect();
            let m = modes.len();
            let nu = |i: usize| if i < m { frequencies[i] } else { -frequencies[i - m] };
            let w = |i: usize| weights[i % m];
            let mut matrix = CMatrix::zeros(2 * m, 2 * m);
            for i in 0..2 * m {
                for j in i..2 * m {
                    let g = exp_integral(nu(j) - nu(i), horizon) * (w(i) * w(j));
                    matrix[(i, j)] = g;
                    matrix[(j, i)] = g.conj();
                }
                matrix[(i, i)].im = 0.0;
            }
            GramBlock { channel, modes, frequencies, weights, matrix }
        })
        .collect();
    Ok(ObservationGram { geometry: *geometry, domain: *domain, blocks })
}

/// `∫₀ᵀ Σ_c |y_c(t)|² dt` for the free solution starting at `state`.
pub fn observed_energy(state: &ModalState, gram: &ObservationGram) -> Result<f64> {
    ensure_same_domain(state.domain(), &gram.domain)?;
    let tw = to_traveling_wave(state);
    let total: f64 = gram
        .blocks
        .iter()
        .map(|b| {
            let a = b.gather(&tw);
            a.dotc(&(&b.matrix * &a)).re
        })
        .sum();
    Ok(total.max(0.0))
}

/// Extremal generalized eigenpair of `(Gram, NormGram)`.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub value: f64,
    /// Extremal state, normalized to unit `pair` norm.
    pub state: ModalState,
}

/// Per-block whitened spectra `D^{-1/2} G D^{-1/2}`.
pub(crate) fn whitened_spectra(
    gram: &ObservationGram,
    pair: SobolevIndex,
) -> Result<Vec<(crate::linalg::HermitianEigen, DVector<f64>)>> {
    gram.blocks
        .par_iter()
        .map(|b| {
            let d = b.norm_diagonal(pair);
            let s = d.map(|x| 1.0 / x.sqrt());
            let m = CMatrix::from_fn(b.dim(), b.dim(), |i, j| b.matrix[(i, j)] * (s[i] * s[j]));
            Ok((hermitian_eigen(&m)?, s))
        })
        .collect()
}

/// Real state whose free solution realizes a block eigenvector.
pub(crate) fn eigvec_to_state(
    gram: &ObservationGram,
    block: usize,
    whitened: &CVector,
    scale: &DVector<f64>,
    pair: SobolevIndex,
) -> ModalState {
    let b = &gram.blocks[block];
    let alpha = whitened.component_mul(&scale.map(|x| Complex64::new(x, 0.0)));
    let n = gram.domain.len();
    let mut tw = TravelingWaveCoeffs {
        domain: gram.domain,
        plus: vec![Complex64::default(); n],
        minus: vec![Complex64::default(); n],
    };
    b.scatter(&alpha, &mut tw);
    // the form is invariant under (α₊, α₋) ↦ (conj α₋, conj α₊); split into
    // the two real parts and keep the larger
    let mut re_part = tw.clone();
    let mut im_part = tw.clone();
    for k in 0..n {
        let (p, m) = (tw.plus[k], tw.minus[k]);
        re_part.plus[k] = (p + m.conj()) * 0.5;
        re_part.minus[k] = re_part.plus[k].conj();
        im_part.plus[k] = (p - m.conj()) * Complex64::new(0.0, -0.5);
        im_part.minus[k] = im_part.plus[k].conj();
    }
    let u = from_traveling_wave(&re_part);
    let v = from_traveling_wave(&im_part);
    let (nu, nv) = (state_norm(&u, pair), state_norm(&v, pair));
    let (s, ns) = if nu >= nv { (u, nu) } else { (v, nv) };
    if ns > 0.0 {
        s.scaled(1.0 / ns)
    } else {
        s
    }
}

/// Smallest generalized eigenvalue of `(Gram, NormGram)`: the truncated
/// observability constant `C_T` for the norm `pair`.
pub fn min_quotient(gram: &ObservationGram, pair: SobolevIndex) -> Result<Quotient> {
    let spectra = whitened_spectra(gram, pair)?;
    let (block, (eig, scale)) = spectra
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.values[0].total_cmp(&b.1 .0.values[0]))
        .expect("at least one block");
    let v = eig.vectors.column(0).into_owned();
    Ok(Quotient { value: eig.values[0], state: eigvec_to_state(gram, block, &v, scale, pair) })
}

/// Largest generalized eigenvalue: the truncated admissibility constant.
pub fn max_quotient(gram: &ObservationGram, pair: SobolevIndex) -> Result<f64> {
    let spectra = whitened_spectra(gram, pair)?;
    Ok(spectra.iter().map(|(e, _)| *e.values.last().expect("nonempty block")).fold(f64::NEG_INFINITY, f64::max))
}

/// Smallest raw eigenvalue over all blocks and the largest block norm.
pub fn raw_spectrum_bounds(gram: &ObservationGram) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for b in &gram.blocks {
        let e = hermitian_eigen(&b.matrix)?;
        lo = lo.min(e.values[0]);
        hi = hi.max(e.values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    Ok((lo, hi))
}

/// Writes the Gram form as `row,col,re,im` over the concatenated block
/// coordinates (block order, then `[α₊; α₋]` within a block). Entries
/// outside the diagonal blocks are zero and omitted.
pub fn write_gram_csv<W: Write>(gram: &ObservationGram, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "col", "re", "im"])?;
    let mut offset = 0;
    for b in &gram.blocks {
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                let g = b.matrix[(i, j)];
                w.write_record(&[
                    (offset + i).to_string(),
                    (offset + j).to_string(),
                    format!("{:e}", g.re),
                    format!("{:e}", g.im),
                ])?;
            }
        }
        offset += b.dim();
    }
    w.flush()
}
