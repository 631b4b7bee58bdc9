//! Hilbert Uniqueness Method on the truncated spectral space.
//!
//! The HUM operator is never built: its quadratic form is the observation
//! Gram form, so the minimizer of
//! `J(φ) = ½ ∫₀ᵀ Σ_c |y_c|² dt + ⟨φ, z⟩` solves `G α = −b`, where `b`
//! represents `φ ↦ ⟨φ, z⟩` in traveling-wave coordinates. The control is the
//! observed trace of the minimizer's free solution, `u_c = y_c(φ̃)`; it enters
//! mode `k` of the controlled equation as the forcing `w_k u_{c(k)}(t)`.
//!
//! For the square this is the Dirichlet control `g = −∂_ν φ̃` on `Γ₀`
//! (`g = Σ_c u_c √2 sin(k₂πx₂)`), and for the interval the Dirac control
//! `v = φ̃(ξ, ·)`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{conjugate_gradient, CVector};
use crate::observability::{
    eigvec_to_state, exp_integral, observed_energy, sin_pi, whitened_spectra, ObservationGeometry, ObservationGram,
    ObservationKind,
};
use crate::spectral::{
    dual_pairing, eigen_frequencies, ensure_same_domain, evolve_free, from_traveling_wave, state_norm,
    to_traveling_wave, DomainSpec, ModalState, SobolevIndex, TravelingWaveCoeffs,
};

/// Whitened eigenvalues at or below this fraction of the largest one count as
/// a kernel of the truncated Gram form.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// One term `a e^{iμt}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub amplitude_re: f64,
    pub amplitude_im: f64,
    pub frequency: f64,
}

impl ExpTerm {
    pub fn new(amplitude: Complex64, frequency: f64) -> Self {
        ExpTerm { amplitude_re: amplitude.re, amplitude_im: amplitude.im, frequency }
    }

    pub fn amplitude(&self) -> Complex64 {
        Complex64::new(self.amplitude_re, self.amplitude_im)
    }
}

/// Finite exponential sum `Σ_j a_j e^{iμ_j t}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExpSum {
    pub terms: Vec<ExpTerm>,
}

impl ExpSum {
    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|term| term.amplitude() * Complex64::new(0.0, term.frequency * t).exp()).sum()
    }

    /// `∫₀ᵀ |s(t)|² dt` in closed form.
    pub fn norm_sq(&self, horizon: f64) -> f64 {
        let mut acc = 0.0;
        for (i, a) in self.terms.iter().enumerate() {
            acc += a.amplitude().norm_sqr() * horizon;
            for b in &self.terms[i + 1..] {
                let cross = a.amplitude().conj() * b.amplitude() * exp_integral(b.frequency - a.frequency, horizon);
                acc += 2.0 * cross.re;
            }
        }
        acc.max(0.0)
    }
}

/// Control as exponential sums, one per observation channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    pub geometry: ObservationGeometry,
    pub domain: DomainSpec,
    pub channels: Vec<ExpSum>,
}

impl ControlSignal {
    pub fn zero(geometry: ObservationGeometry, domain: DomainSpec) -> Result<Self> {
        geometry.check_domain(&domain)?;
        Ok(ControlSignal { geometry, domain, channels: vec![ExpSum::default(); geometry.num_channels(&domain)] })
    }

    pub fn horizon(&self) -> f64 {
        self.geometry.horizon
    }

    /// `‖u‖_{L²(0,T; U)}`.
    pub fn cost(&self) -> f64 {
        self.channels.iter().map(|c| c.norm_sq(self.horizon())).sum::<f64>().sqrt()
    }

    /// Real channel values at time `t`.
    pub fn sample(&self, t: f64) -> Vec<f64> {
        self.channels.iter().map(|c| c.eval(t).re).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.channels.iter().all(|c| c.terms.iter().all(|t| t.amplitude() == Complex64::default()))
    }

    /// Samples on `t = 0, dt, …, T` (the last sample is `T`), one column per
    /// channel (`g_k2` for the square, `v` for the interval).
    pub fn write_csv<W: Write>(&self, dt: f64, out: W) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("sampling step must be > 0, got {dt}")));
        }
        let header = channel_header(&self.geometry, self.channels.len());
        write_samples(out, &header, self.horizon(), dt, |t| self.sample(t))
    }
}

pub(crate) fn channel_header(geometry: &ObservationGeometry, channels: usize) -> Vec<String> {
    let mut header = vec!["t".to_string()];
    match geometry.kind {
        ObservationKind::SquareLeftEdge => header.extend((1..=channels).map(|k| format!("k2_{k}"))),
        ObservationKind::IntervalPoint { .. } => header.push("v".into()),
    }
    header
}

pub(crate) fn write_samples<W: Write, F: Fn(f64) -> Vec<f64>>(
    out: W,
    header: &[String],
    horizon: f64,
    dt: f64,
    f: F,
) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv output: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io)?;
    // slack so that T/dt landing a hair above an integer adds no duplicate sample
    let steps = ((horizon / dt) * (1.0 - 1e-12)).ceil() as usize;
    for i in 0..=steps {
        let t = (i as f64 * dt).min(horizon);
        let mut row = vec![format!("{t}")];
        row.extend(f(t).into_iter().map(|v| format!("{v:e}")));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv output: {e}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumOptions {
    /// Relative residual target in whitened coordinates.
    pub tol: f64,
    /// Defaults to `4 × #modes`.
    pub max_iter: Option<usize>,
    /// Norm pair used for whitening.
    pub pair: SobolevIndex,
}

impl Default for HumOptions {
    fn default() -> Self {
        HumOptions { tol: 1e-10, max_iter: None, pair: SobolevIndex::WEAK }
    }
}

#[derive(Clone, Debug)]
pub struct HumSolution {
    pub minimizer: ModalState,
    pub control: ControlSignal,
    /// `‖Gα + b‖ / ‖b‖` in whitened coordinates.
    pub residual: f64,
    pub iterations: usize,
    /// `α*Gα` at the solution, i.e. the squared control cost.
    pub gram_energy: f64,
    /// Traveling-wave coordinates of the minimizer returned by the solve.
    pub coefficients: TravelingWaveCoeffs,
}

/// `J(φ) = ½·observed_energy(φ) + ⟨φ, z⟩`.
pub fn evaluate_j(candidate: &ModalState, target: &ModalState, gram: &ObservationGram) -> Result<f64> {
    ensure_same_domain(candidate.domain(), target.domain())?;
    Ok(0.5 * observed_energy(candidate, gram)? + dual_pairing(candidate, target)?)
}

/// Per-block representation `b` of `φ ↦ ⟨φ, z⟩`, so that
/// `⟨φ, z⟩ = Re(b*α(φ))`.
fn rhs_blocks(target: &ModalState, gram: &ObservationGram) -> Vec<CVector> {
    let omega = eigen_frequencies(&gram.domain);
    gram.blocks
        .iter()
        .map(|b| {
            let m = b.modes.len();
            CVector::from_fn(2 * m, |i, _| {
                let k = b.modes[i % m];
                let (zp, zv) = (target.pos()[k], target.vel()[k]);
                let iwz = omega[k] * zp;
                if i < m {
                    Complex64::new(zv, iwz)
                } else {
                    Complex64::new(zv, -iwz)
                }
            })
        })
        .collect()
}

fn zero_coeffs(domain: DomainSpec) -> TravelingWaveCoeffs {
    let n = domain.len();
    TravelingWaveCoeffs { domain, plus: vec![Complex64::default(); n], minus: vec![Complex64::default(); n] }
}

/// Minimizes `J` by conjugate gradient on the whitened block-diagonal
/// system `D^{-1/2} G D^{-1/2} β = −D^{-1/2} b`.
pub fn solve_hum(target: &ModalState, gram: &ObservationGram, opts: &HumOptions) -> Result<HumSolution> {
    ensure_same_domain(target.domain(), &gram.domain)?;
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {}", opts.tol)));
    }
    let rhs = rhs_blocks(target, gram);
    let scales: Vec<DVector<f64>> =
        gram.blocks.iter().map(|b| b.norm_diagonal(opts.pair).map(|x| 1.0 / x.sqrt())).collect();
    let whitened_rhs: Vec<CVector> =
        rhs.iter().zip(&scales).map(|(b, s)| -b.component_mul(&s.map(|x| Complex64::new(x, 0.0)))).collect();

    if whitened_rhs.iter().all(|b| b.iter().all(|c| *c == Complex64::default())) {
        return Ok(HumSolution {
            minimizer: ModalState::zeros(gram.domain),
            control: ControlSignal::zero(gram.geometry, gram.domain)?,
            residual: 0.0,
            iterations: 0,
            gram_energy: 0.0,
            coefficients: zero_coeffs(gram.domain),
        });
    }

    check_solvable(gram, opts.pair, &whitened_rhs)?;

    // whitened operator, applied block by block
    let blocks: Vec<_> = gram
        .blocks
        .iter()
        .zip(&scales)
        .map(|(b, s)| nalgebra::DMatrix::from_fn(b.dim(), b.dim(), |i, j| b.matrix[(i, j)] * (s[i] * s[j])))
        .collect();
    let offsets: Vec<usize> = blocks
        .iter()
        .scan(0, |acc, m| {
            let o = *acc;
            *acc += m.nrows();
            Some(o)
        })
        .collect();
    let total = offsets.last().unwrap() + blocks.last().unwrap().nrows();
    let mut b_all = CVector::zeros(total);
    for (o, b) in offsets.iter().zip(&whitened_rhs) {
        b_all.rows_mut(*o, b.len()).copy_from(b);
    }
    let apply = |v: &CVector| {
        let mut out = CVector::zeros(total);
        for (o, m) in offsets.iter().zip(&blocks) {
            let seg = m * v.rows(*o, m.nrows());
            out.rows_mut(*o, m.nrows()).copy_from(&seg);
        }
        out
    };
    let max_iter = opts.max_iter.unwrap_or(4 * gram.domain.len());
    let cg = conjugate_gradient(apply, &b_all, opts.tol, max_iter);
    if !cg.converged {
        return Err(Error::MaxIterExceeded { iterations: cg.iterations, residual: cg.relative_residual });
    }

    let mut coefficients = zero_coeffs(gram.domain);
    let mut gram_energy = 0.0;
    for ((o, b), s) in offsets.iter().zip(&gram.blocks).zip(&scales) {
        let beta = cg.solution.rows(*o, b.dim()).into_owned();
        let alpha = beta.component_mul(&s.map(|x| Complex64::new(x, 0.0)));
        gram_energy += alpha.dotc(&(&b.matrix * &alpha)).re;
        b.scatter(&alpha, &mut coefficients);
    }
    let minimizer = from_traveling_wave(&coefficients);
    let control = synthesize_control(&minimizer, &gram.geometry)?;
    Ok(HumSolution {
        minimizer,
        control,
        residual: cg.relative_residual,
        iterations: cg.iterations,
        gram_energy,
        coefficients,
    })
}

/// Rejects targets that excite a numerical kernel of the Gram form.
fn check_solvable(gram: &ObservationGram, pair: SobolevIndex, whitened_rhs: &[CVector]) -> Result<()> {
    let spectra = whitened_spectra(gram, pair)?;
    let top = spectra.iter().map(|(e, _)| *e.values.last().unwrap()).fold(0.0f64, f64::max);
    let rhs_norm = whitened_rhs.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt();
    let cutoff = SINGULAR_RTOL * top;
    for (block, ((eig, scale), rhs)) in spectra.iter().zip(whitened_rhs).enumerate() {
        for (k, &lam) in eig.values.iter().enumerate() {
            if lam > cutoff {
                break;
            }
            let v = eig.vectors.column(k);
            let projection = v.dotc(rhs).norm() / rhs_norm;
            if projection > 1e-10 {
                let direction = eigvec_to_state(gram, block, &v.into_owned(), scale, pair);
                return Err(Error::NotObservableAtTruncation {
                    min_eigenvalue: lam,
                    projection,
                    null_direction: Box::new(direction),
                });
            }
        }
    }
    Ok(())
}

/// Dense direct solve of `G α = −b` per block (LU). Reference path for the
/// conjugate-gradient solver.
pub fn solve_hum_direct(target: &ModalState, gram: &ObservationGram) -> Result<TravelingWaveCoeffs> {
    ensure_same_domain(target.domain(), &gram.domain)?;
    let rhs = rhs_blocks(target, gram);
    let mut coefficients = zero_coeffs(gram.domain);
    for (b, r) in gram.blocks.iter().zip(rhs) {
        let alpha = b
            .matrix
            .clone()
            .lu()
            .solve(&(-r))
            .ok_or_else(|| Error::InvalidArgument(format!("Gram block for channel {} is singular", b.channel)))?;
        b.scatter(&alpha, &mut coefficients);
    }
    Ok(coefficients)
}

/// Control `u_c = y_c(φ̃)` as an exponential sum (no time sampling).
pub fn synthesize_control(minimizer: &ModalState, geometry: &ObservationGeometry) -> Result<ControlSignal> {
    let domain = *minimizer.domain();
    let mut control = ControlSignal::zero(*geometry, domain)?;
    let tw = to_traveling_wave(minimizer);
    for (k, mode) in domain.modes().enumerate() {
        let w = geometry.trace_weight(mode);
        if w == 0.0 || (tw.plus[k] == Complex64::default() && tw.minus[k] == Complex64::default()) {
            continue;
        }
        let omega = mode.frequency();
        let channel = &mut control.channels[geometry.channel_of(mode)];
        channel.terms.push(ExpTerm::new(tw.plus[k] * w, omega));
        channel.terms.push(ExpTerm::new(tw.minus[k] * w, -omega));
    }
    Ok(control)
}

/// State at time `T` of the controlled equation `z̈ + Az = Σ_c w u_c`,
/// computed per mode by Duhamel's formula in closed form.
pub fn simulate_controlled(initial: &ModalState, control: &ControlSignal, horizon: f64) -> Result<ModalState> {
    if (horizon - control.horizon()).abs() > 1e-12 * horizon.abs().max(1.0) {
        return Err(Error::HorizonMismatch { control: control.horizon(), requested: horizon });
    }
    ensure_same_domain(initial.domain(), &control.domain)?;
    let free = evolve_free(initial, horizon);
    let geometry = &control.geometry;
    let mut pos = free.pos().to_vec();
    let mut vel = free.vel().to_vec();
    for (k, mode) in initial.domain().modes().enumerate() {
        let w = geometry.trace_weight(mode);
        let channel = &control.channels[geometry.channel_of(mode)];
        if w == 0.0 || channel.terms.is_empty() {
            continue;
        }
        let omega = mode.frequency();
        let rot = Complex64::new(0.0, omega * horizon).exp();
        let (mut is, mut ic) = (Complex64::default(), Complex64::default());
        for term in &channel.terms {
            // ∫₀ᵀ e^{±iω(T−s)} e^{iμs} ds
            let fwd = rot * exp_integral(term.frequency - omega, horizon);
            let bwd = rot.conj() * exp_integral(term.frequency + omega, horizon);
            let a = term.amplitude();
            is += a * (fwd - bwd) * Complex64::new(0.0, -0.5);
            ic += a * (fwd + bwd) * 0.5;
        }
        pos[k] += w * is.re / omega;
        vel[k] += w * ic.re;
    }
    ModalState::new(*initial.domain(), pos, vel)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    /// `‖u‖_{L²}` from the exponential-sum control.
    pub cost: f64,
    pub target_norm: f64,
    /// `cost / ‖target‖`; `None` for a zero target.
    pub ratio: Option<f64>,
    /// `√(α*Gα) / ‖target‖` from the solver's coefficients.
    pub gram_ratio: Option<f64>,
}

pub fn verify_cost_bound(solution: &HumSolution, target: &ModalState, pair: SobolevIndex) -> CostReport {
    let cost = solution.control.cost();
    let target_norm = state_norm(target, pair);
    let (ratio, gram_ratio) = if target_norm > 0.0 {
        (Some(cost / target_norm), Some(solution.gram_energy.max(0.0).sqrt() / target_norm))
    } else {
        (None, None)
    };
    CostReport { cost, target_norm, ratio, gram_ratio }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferValue {
    pub re: f64,
    pub im: f64,
    /// Upper bound on `|H(λ) − H_N(λ)|` from the omitted modes.
    pub tail_bound: f64,
}

impl TransferValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn interval_point(geometry: &ObservationGeometry, domain: &DomainSpec) -> Result<(f64, usize)> {
    match (geometry.kind, *domain) {
        (ObservationKind::IntervalPoint { xi }, DomainSpec::Interval { n }) => Ok((xi, n)),
        _ => Err(Error::InvalidGeometry("transfer function needs an interval point observation".into())),
    }
}

/// `H_N(λ) = λ Σ_{n≤N} e_n(ξ)² / (λ² + (nπ)²)` with a bound on the tail.
///
/// With `e_n(ξ)² = 1 − cos(2nπξ)`, the tail splits into
/// `λ Σ_{n>N} 1/(λ²+n²π²)`, evaluated exactly from
/// `Σ_{n≥1} 1/(λ²+n²π²) = (λ coth λ − 1)/(2λ²)`, and an oscillating part
/// bounded by summation by parts: partial sums of `cos(2mπξ)` over any
/// index range are at most `1/sin(πξ)` in modulus.
pub fn transfer_function(
    lambda: Complex64,
    geometry: &ObservationGeometry,
    domain: &DomainSpec,
) -> Result<TransferValue> {
    let (xi, n) = interval_point(geometry, domain)?;
    if lambda.re.is_nan() || lambda.re <= 0.0 {
        return Err(Error::InvalidArgument(format!("transfer function needs Re λ > 0, got {lambda}")));
    }
    let l2 = lambda * lambda;
    let c = |k: usize| (l2 + (PI * k as f64).powi(2)).inv();
    let mut partial = Complex64::default();
    let mut flat = Complex64::default();
    for k in 1..=n {
        let s = sin_pi(k as f64 * xi);
        let ck = c(k);
        partial += ck * (2.0 * s * s);
        flat += ck;
    }
    let flat_all = (lambda / lambda.tanh() - 1.0) / (2.0 * l2);
    let smooth_tail = lambda * (flat_all - flat);

    let mag = lambda.norm();
    let sweep_start = ((2.0 * mag / PI).ceil() as usize).max(n + 1);
    let mut variation = 0.0;
    for k in n + 1..sweep_start {
        variation += (c(k) - c(k + 1)).norm();
    }
    // for kπ ≥ 2|λ|: |λ² + k²π²| ≥ ¾k²π², telescoping the rest
    variation += 16.0 / (9.0 * PI * PI * (sweep_start as f64).powi(2));
    let partial_sums = 1.0 / sin_pi(xi).abs();
    let tail_bound = smooth_tail.norm() + mag * partial_sums * variation;

    let value = lambda * partial;
    Ok(TransferValue { re: value.re, im: value.im, tail_bound })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferScan {
    pub delta: f64,
    pub max_im: f64,
    pub samples: usize,
    pub modes: usize,
    /// `max |H_N|` over the sampled line.
    pub sup: f64,
    pub argmax_im: f64,
    /// Tail bound at the maximizing sample.
    pub tail_at_sup: f64,
    /// Largest tail bound over the whole line.
    pub max_tail: f64,
    /// `max |H(conj λ) − conj H(λ)|` over the samples.
    pub conjugate_symmetry_error: f64,
}

/// Samples `H_N` on `Re λ = δ`, `Im λ ∈ [−M, M]`.
pub fn transfer_scan(
    delta: f64,
    max_im: f64,
    samples: usize,
    geometry: &ObservationGeometry,
    domain: &DomainSpec,
) -> Result<TransferScan> {
    let (_, modes) = interval_point(geometry, domain)?;
    if samples < 2 || max_im.is_nan() || max_im <= 0.0 {
        return Err(Error::InvalidArgument("scan needs at least 2 samples and M > 0".into()));
    }
    let mut scan = TransferScan {
        delta,
        max_im,
        samples,
        modes,
        sup: 0.0,
        argmax_im: 0.0,
        tail_at_sup: 0.0,
        max_tail: 0.0,
        conjugate_symmetry_error: 0.0,
    };
    for i in 0..samples {
        let y = -max_im + 2.0 * max_im * i as f64 / (samples - 1) as f64;
        let lam = Complex64::new(delta, y);
        let h = transfer_function(lam, geometry, domain)?;
        let hc = transfer_function(lam.conj(), geometry, domain)?;
        scan.conjugate_symmetry_error = scan.conjugate_symmetry_error.max((hc.value() - h.value().conj()).norm());
        scan.max_tail = scan.max_tail.max(h.tail_bound);
        let mag = h.value().norm();
        if mag > scan.sup {
            scan.sup = mag;
            scan.argmax_im = y;
            scan.tail_at_sup = h.tail_bound;
        }
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observability::assemble_gram;
    use crate::spectral::Mode;

    #[test]
    fn exp_sum_norm_of_cosine() {
        // cos(ωt) = ½e^{iωt} + ½e^{-iωt}
        let (w, t) = (2.3, 5.0);
        let s = ExpSum {
            terms: vec![ExpTerm::new(Complex64::new(0.5, 0.0), w), ExpTerm::new(Complex64::new(0.5, 0.0), -w)],
        };
        let exact = t / 2.0 + (2.0 * w * t).sin() / (4.0 * w);
        assert!((s.norm_sq(t) - exact).abs() < 1e-13);
        assert!((s.eval(1.1).re - (w * 1.1).cos()).abs() < 1e-15);
    }

    #[test]
    fn zero_target_gives_zero_solution() {
        let g = ObservationGeometry::square_left_edge(9.0).unwrap();
        let d = DomainSpec::square(3, 3).unwrap();
        let gram = assemble_gram(&g, &d).unwrap();
        let sol = solve_hum(&ModalState::zeros(d), &gram, &HumOptions::default()).unwrap();
        assert!(sol.minimizer.is_zero());
        assert!(sol.control.is_zero());
        assert_eq!(sol.residual, 0.0);
        let report = verify_cost_bound(&sol, &ModalState::zeros(d), SobolevIndex::ENERGY);
        assert_eq!(report.ratio, None);
    }

    #[test]
    fn j_trivial_cases() {
        let g = ObservationGeometry::interval_point(0.3, 2.0).unwrap();
        let d = DomainSpec::interval(4).unwrap();
        let gram = assemble_gram(&g, &d).unwrap();
        let s = ModalState::new(d, vec![1.0, 0.5, 0.0, -0.2], vec![0.0, 1.0, 2.0, 0.0]).unwrap();
        assert_eq!(evaluate_j(&ModalState::zeros(d), &s, &gram).unwrap(), 0.0);
        let j = evaluate_j(&s, &ModalState::zeros(d), &gram).unwrap();
        assert!((j - 0.5 * observed_energy(&s, &gram).unwrap()).abs() < 1e-15);
        assert!(j >= 0.0);
    }

    #[test]
    fn midpoint_kernel_detected() {
        let g = ObservationGeometry::interval_point(0.5, 3.0).unwrap();
        let d = DomainSpec::interval(4).unwrap();
        let gram = assemble_gram(&g, &d).unwrap();
        let even = ModalState::single_mode(d, Mode::Line(2), 1.0, 0.0).unwrap();
        match solve_hum(&even, &gram, &HumOptions::default()) {
            Err(Error::NotObservableAtTruncation { null_direction, .. }) => {
                assert!(null_direction.pos()[0].abs() < 1e-12 && null_direction.pos()[2].abs() < 1e-12);
            }
            other => panic!("expected kernel error, got {other:?}"),
        }
        // odd-only targets lie in the range and are controllable
        let odd = ModalState::single_mode(d, Mode::Line(3), 1.0, 0.0).unwrap();
        let sol = solve_hum(&odd, &gram, &HumOptions::default()).unwrap();
        let fin = simulate_controlled(&odd, &sol.control, 3.0).unwrap();
        assert!(state_norm(&fin, SobolevIndex::WEAK) < 1e-8);
    }

    #[test]
    fn zero_control_is_free_evolution() {
        let g = ObservationGeometry::square_left_edge(2.5).unwrap();
        let d = DomainSpec::square(2, 3).unwrap();
        let s = ModalState::new(d, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let u = ControlSignal::zero(g, d).unwrap();
        assert_eq!(simulate_controlled(&s, &u, 2.5).unwrap(), evolve_free(&s, 2.5));
        assert!(matches!(simulate_controlled(&s, &u, 3.0), Err(Error::HorizonMismatch { .. })));
    }

    #[test]
    fn single_mode_control_is_one_conjugate_pair() {
        let g = ObservationGeometry::square_left_edge(4.0).unwrap();
        let d = DomainSpec::square(3, 2).unwrap();
        let m = ModalState::single_mode(d, Mode::Plane(2, 1), 0.7, 0.0).unwrap();
        let u = synthesize_control(&m, &g).unwrap();
        assert_eq!(u.channels[0].terms.len(), 2);
        assert!(u.channels[1].terms.is_empty());
        let (a, b) = (u.channels[0].terms[0], u.channels[0].terms[1]);
        assert_eq!(a.amplitude(), b.amplitude().conj());
        assert_eq!(a.frequency, -b.frequency);
        // u(t) = √2·2π·0.7 cos(ωt)
        let w = Mode::Plane(2, 1).frequency();
        let amp = 2f64.sqrt() * 2.0 * PI * 0.7;
        let exact = amp * (4.0 / 2.0 + (2.0 * w * 4.0).sin() / (4.0 * w)).sqrt();
        assert!((u.cost() - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn transfer_one_term_closed_form() {
        let g = ObservationGeometry::interval_point(0.5, 1.0).unwrap();
        let d = DomainSpec::interval(1).unwrap();
        let lam = 2.5;
        let h = transfer_function(Complex64::new(lam, 0.0), &g, &d).unwrap();
        let exact = 2.0 * lam / (lam * lam + PI * PI);
        assert!((h.value() - exact).norm() < 1e-15);
        assert!(transfer_function(Complex64::new(0.0, 1.0), &g, &d).is_err());
        let sq = ObservationGeometry::square_left_edge(1.0).unwrap();
        assert!(transfer_function(Complex64::new(1.0, 0.0), &sq, &DomainSpec::square(1, 1).unwrap()).is_err());
    }
}
