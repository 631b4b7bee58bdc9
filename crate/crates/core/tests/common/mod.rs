//! Reference computations that avoid the library's closed forms.
#![allow(dead_code)]

use std::f64::consts::{PI, SQRT_2};

use wave_hum::hum::ControlSignal;
use wave_hum::spectral::{DomainSpec, ModalState};

/// Modal coefficient `c(t) = p cos ωt + (v/ω) sin ωt`.
fn coeff(p: f64, v: f64, omega: f64, t: f64) -> f64 {
    p * (omega * t).cos() + v / omega * (omega * t).sin()
}

/// Spatial integrand of the observation at time `t`, from the eigenfunctions
/// themselves. Square: `∫₀¹ |∂_{x1} φ(0, x2, t)|² dx2` by a midpoint rule in
/// `x2` that is exact for the trigonometric degrees involved. Interval:
/// `|φ(ξ, t)|²`.
fn observed_density(state: &ModalState, xi: f64, t: f64) -> f64 {
    match *state.domain() {
        DomainSpec::Square { k1, k2 } => {
            let m = 4 * k2 + 4;
            let mut c = vec![0.0; k1 * k2];
            for (idx, slot) in c.iter_mut().enumerate() {
                let (a, b) = (idx % k1 + 1, idx / k1 + 1);
                let omega = PI * ((a * a + b * b) as f64).sqrt();
                *slot = coeff(state.pos()[idx], state.vel()[idx], omega, t);
            }
            (0..m)
                .map(|j| {
                    let x2 = (j as f64 + 0.5) / m as f64;
                    let mut d = 0.0;
                    for (idx, ck) in c.iter().enumerate() {
                        let (a, b) = (idx % k1 + 1, idx / k1 + 1);
                        // ∂_{x1} [2 sin(aπx1) sin(bπx2)] at x1 = 0
                        d += ck * 2.0 * a as f64 * PI * (b as f64 * PI * x2).sin();
                    }
                    d * d
                })
                .sum::<f64>()
                / m as f64
        }
        DomainSpec::Interval { n } => {
            let y: f64 = (1..=n)
                .map(|k| {
                    let omega = k as f64 * PI;
                    coeff(state.pos()[k - 1], state.vel()[k - 1], omega, t) * SQRT_2 * (k as f64 * PI * xi).sin()
                })
                .sum();
            y * y
        }
    }
}

/// Composite trapezoid in time with `steps` panels.
pub fn trapezoid_observed_energy(state: &ModalState, xi: f64, horizon: f64, steps: usize) -> f64 {
    let h = horizon / steps as f64;
    let mut acc = 0.5 * (observed_density(state, xi, 0.0) + observed_density(state, xi, horizon));
    for i in 1..steps {
        acc += observed_density(state, xi, i as f64 * h);
    }
    acc * h
}

/// Matrix `M[k][c]` with forcing `f_k(t) = Σ_c M[k][c] u_c(t)`, from the
/// eigenfunctions: square `f_k = ∫₀¹ g(x2,t) ∂_{x1}e_k(0,x2) dx2` with
/// `g = Σ_c u_c √2 sin((c+1) π x2)` (midpoint rule in `x2`); interval
/// `f_n = v(t) e_n(ξ)`.
fn forcing_matrix(domain: &DomainSpec, xi: f64) -> Vec<Vec<f64>> {
    match *domain {
        DomainSpec::Square { k1, k2 } => {
            let m = 4 * k2 + 4;
            (0..k1 * k2)
                .map(|idx| {
                    let (a, b) = (idx % k1 + 1, idx / k1 + 1);
                    (0..k2)
                        .map(|c| {
                            (0..m)
                                .map(|j| {
                                    let x2 = (j as f64 + 0.5) / m as f64;
                                    SQRT_2
                                        * ((c + 1) as f64 * PI * x2).sin()
                                        * 2.0
                                        * a as f64
                                        * PI
                                        * (b as f64 * PI * x2).sin()
                                })
                                .sum::<f64>()
                                / m as f64
                        })
                        .collect()
                })
                .collect()
        }
        DomainSpec::Interval { n } => (1..=n).map(|k| vec![SQRT_2 * (k as f64 * PI * xi).sin()]).collect(),
    }
}

/// Classical RK4 on `z̈_k + ω_k² z_k = f_k(t)`.
pub fn rk4_controlled(initial: &ModalState, control: &ControlSignal, xi: f64, steps: usize) -> ModalState {
    let domain = *initial.domain();
    let omega2: Vec<f64> = domain.eigenvalues();
    let m = forcing_matrix(&domain, xi);
    let horizon = control.horizon();
    let h = horizon / steps as f64;
    let mut p = initial.pos().to_vec();
    let mut v = initial.vel().to_vec();
    let force = |t: f64| -> Vec<f64> {
        let u = control.sample(t);
        m.iter().map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum()).collect()
    };
    let rhs = |f: &[f64], p: &[f64], v: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let dv = p.iter().zip(&omega2).zip(f).map(|((p, w2), f)| f - w2 * p).collect();
        (v.to_vec(), dv)
    };
    let axpy = |x: &[f64], a: f64, y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(x, y)| x + a * y).collect() };
    let mut f0 = force(0.0);
    for i in 0..steps {
        let t = i as f64 * h;
        let (fm, f1) = (force(t + h / 2.0), force(t + h));
        let (k1p, k1v) = rhs(&f0, &p, &v);
        let (k2p, k2v) = rhs(&fm, &axpy(&p, h / 2.0, &k1p), &axpy(&v, h / 2.0, &k1v));
        let (k3p, k3v) = rhs(&fm, &axpy(&p, h / 2.0, &k2p), &axpy(&v, h / 2.0, &k2v));
        let (k4p, k4v) = rhs(&f1, &axpy(&p, h, &k3p), &axpy(&v, h, &k3v));
        for k in 0..p.len() {
            p[k] += h / 6.0 * (k1p[k] + 2.0 * k2p[k] + 2.0 * k3p[k] + k4p[k]);
            v[k] += h / 6.0 * (k1v[k] + 2.0 * k2v[k] + 2.0 * k3v[k] + k4v[k]);
        }
        f0 = f1;
    }
    ModalState::new(domain, p, v).expect("finite state")
}

/// `‖a − b‖ / ‖b‖` over all coordinates.
pub fn rel_diff(a: &ModalState, b: &ModalState) -> f64 {
    let num: f64 = a.pos().iter().zip(b.pos()).chain(a.vel().iter().zip(b.vel())).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.pos().iter().chain(b.vel()).map(|y| y * y).sum();
    (num / den).sqrt()
}

pub fn euclid(a: &ModalState) -> f64 {
    a.pos().iter().chain(a.vel()).map(|x| x * x).sum::<f64>().sqrt()
}

pub fn abs_diff(a: &ModalState, b: &ModalState) -> f64 {
    a.pos().iter().zip(b.pos()).chain(a.vel().iter().zip(b.vel())).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
