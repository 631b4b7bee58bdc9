//! Continued fractions, membership in the set of bounded-partial-quotient
//! irrationals, and the `sin²(nπξ)`-weighted dual norm for pointwise
//! observation on the interval.
//!
//! Rationals and quadratic surds are expanded in exact integer arithmetic;
//! decimals are expanded as the interval `[d, d + 10^{-precision}]` and a
//! quotient is certified only when both endpoints agree on it.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::ModalState;

/// A number in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RealSpec {
    Rational {
        p: i64,
        q: i64,
    },
    /// `(a + b√d) / c`.
    QuadraticSurd {
        a: i64,
        b: i64,
        d: i64,
        c: i64,
    },
    /// Decimal expansion `0.xxxx`, of which the first `precision` fractional
    /// digits are certified.
    Decimal {
        digits: String,
        precision: usize,
    },
}

impl RealSpec {
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        let r = RealSpec::Rational { p, q };
        r.validate()?;
        Ok(r)
    }

    pub fn surd(a: i64, b: i64, d: i64, c: i64) -> Result<Self> {
        let r = RealSpec::QuadraticSurd { a, b, d, c };
        r.validate()?;
        Ok(r)
    }

    pub fn decimal(digits: &str) -> Result<Self> {
        let precision = digits.split_once('.').map(|(_, f)| f.len()).unwrap_or(0);
        let r = RealSpec::Decimal { digits: digits.to_string(), precision };
        r.validate()?;
        Ok(r)
    }

    /// `√2 − 1`.
    pub fn sqrt2_minus_1() -> Self {
        RealSpec::QuadraticSurd { a: -1, b: 1, d: 2, c: 1 }
    }

    /// `(√5 − 1)/2`.
    pub fn golden_conjugate() -> Self {
        RealSpec::QuadraticSurd { a: -1, b: 1, d: 5, c: 2 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RealSpec::Rational { p, q } => {
                if q <= 0 || p <= 0 || p >= q {
                    return Err(Error::InvalidReal(format!("{p}/{q} is not in (0,1) with q > 0")));
                }
                if p.gcd(&q) != 1 {
                    return Err(Error::InvalidReal(format!("{p}/{q} is not in lowest terms")));
                }
            }
            RealSpec::QuadraticSurd { b, d, c, .. } => {
                if b == 0 || c == 0 {
                    return Err(Error::InvalidReal("surd needs b != 0 and c != 0".into()));
                }
                if d < 2 || !is_square_free(d) {
                    return Err(Error::InvalidReal(format!("d = {d} must be square-free and > 1")));
                }
                let s = self.surd_form().expect("surd");
                if !(s.floor() == BigInt::zero()) {
                    return Err(Error::InvalidReal(format!("{self:?} is not in (0,1)")));
                }
            }
            RealSpec::Decimal { ref digits, precision } => {
                let (num, den) = parse_decimal(digits)?;
                let frac_len = digits.split_once('.').map(|(_, f)| f.len()).unwrap_or(0);
                if precision == 0 || precision > frac_len {
                    return Err(Error::InvalidReal(format!(
                        "precision {precision} must be in 1..={frac_len} (digits after the point)"
                    )));
                }
                if num.is_zero() || num >= den {
                    return Err(Error::InvalidReal(format!("{digits} is not in (0,1)")));
                }
            }
        }
        Ok(())
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            RealSpec::Rational { p, q } => p as f64 / q as f64,
            RealSpec::QuadraticSurd { a, b, d, c } => {
                let (a, b, d, c) = (a as f64, b as f64, d as f64, c as f64);
                // a + b√d = (a² − b²d)/(a − b√d) when the terms nearly cancel
                if a * b < 0.0 {
                    (a * a - b * b * d) / (a - b * d.sqrt()) / c
                } else {
                    (a + b * d.sqrt()) / c
                }
            }
            RealSpec::Decimal { ref digits, .. } => digits.parse().unwrap_or(f64::NAN),
        }
    }

    /// `1 − x`.
    pub fn reflect(&self) -> Self {
        match *self {
            RealSpec::Rational { p, q } => RealSpec::Rational { p: q - p, q },
            RealSpec::QuadraticSurd { a, b, d, c } => RealSpec::QuadraticSurd { a: c - a, b: -b, d, c },
            RealSpec::Decimal { ref digits, precision } => {
                let (num, den) = parse_decimal(digits).expect("validated decimal");
                let width = digits.split_once('.').map(|(_, f)| f.len()).unwrap_or(0);
                let rest = (&den - num).to_string();
                RealSpec::Decimal { digits: format!("0.{rest:0>width$}"), precision }
            }
        }
    }

    fn surd_form(&self) -> Option<Surd> {
        match *self {
            RealSpec::QuadraticSurd { a, b, d, c } => Some(Surd::new(a, b, d, c)),
            _ => None,
        }
    }
}

impl std::str::FromStr for RealSpec {
    type Err = Error;

    /// Accepts `p/q`, `surd:a,b,d,c` for `(a + b√d)/c`, the names
    /// `sqrt2-1` and `golden`, or a decimal `0.xxxx`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidReal(format!("cannot parse {s:?}"));
        if s == "sqrt2-1" {
            return Ok(RealSpec::sqrt2_minus_1());
        }
        if s == "golden" {
            return Ok(RealSpec::golden_conjugate());
        }
        if let Some(rest) = s.strip_prefix("surd:") {
            let v: Vec<i64> = rest.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
            if v.len() != 4 {
                return Err(bad());
            }
            return RealSpec::surd(v[0], v[1], v[2], v[3]);
        }
        if let Some((p, q)) = s.split_once('/') {
            return RealSpec::rational(p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
        }
        RealSpec::decimal(s)
    }
}

fn is_square_free(d: i64) -> bool {
    let mut k = 2i64;
    while k * k <= d {
        if d % (k * k) == 0 {
            return false;
        }
        k += 1;
    }
    true
}

fn parse_decimal(digits: &str) -> Result<(BigInt, BigInt)> {
    let bad = || Error::InvalidReal(format!("malformed decimal {digits:?}"));
    let (int, frac) = digits.split_once('.').ok_or_else(bad)?;
    if int.is_empty() || !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let num: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    Ok((num, BigInt::from(10u32).pow(frac.len() as u32)))
}

/// `(P + √D)/Q` with `Q | D − P²`, the state of the Lagrange expansion.
#[derive(Clone, Debug)]
struct Surd {
    p: BigInt,
    d: BigInt,
    q: BigInt,
    sqrt_floor: BigInt,
}

impl Surd {
    fn new(a: i64, b: i64, d: i64, c: i64) -> Surd {
        // normalize to b > 0, then (a + √(b²d))/c = (a|c| + √(b²c²d)) / (c|c|)
        let (a, b, c) = if b < 0 { (-a, -b, -c) } else { (a, b, c) };
        let (a, b, d, c) = (BigInt::from(a), BigInt::from(b), BigInt::from(d), BigInt::from(c));
        let dd = &b * &b * &c * &c * d;
        let p = &a * c.abs();
        let q = &c * c.abs();
        let sqrt_floor = dd.sqrt();
        Surd { p, d: dd, q, sqrt_floor }
    }

    /// `⌊(P + √D)/Q⌋`, exact because `D` is not a perfect square.
    fn floor(&self) -> BigInt {
        let n = &self.p + &self.sqrt_floor;
        if self.q.is_positive() {
            n.div_floor(&self.q)
        } else {
            -(n.div_floor(&(-&self.q)) + BigInt::one())
        }
    }

    /// Gauss map: returns the quotient and moves to `1/(x − a)`.
    fn step(&mut self) -> BigInt {
        let a = self.floor();
        let p_next = &a * &self.q - &self.p;
        let q_next = (&self.d - &p_next * &p_next) / &self.q;
        self.p = p_next;
        self.q = q_next;
        a
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    /// Number of quotients `a₁, a₂, …` before the cycle starts.
    pub preperiod: usize,
    pub cycle: Vec<u64>,
}

impl Period {
    pub fn len(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle.is_empty()
    }
}

/// `x = [0; a₁, a₂, …]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfExpansion {
    pub quotients: Vec<u64>,
    /// The expansion ends (the input is rational).
    pub terminated: bool,
    pub periodic: Option<Period>,
}

impl CfExpansion {
    /// The repeating cycle, if one was detected.
    pub fn cycle(&self) -> Option<&[u64]> {
        self.periodic.as_ref().map(|p| p.cycle.as_slice())
    }

    pub fn max_quotient(&self) -> Option<u64> {
        self.quotients.iter().copied().max()
    }
}

fn to_quotient(a: &BigInt) -> Result<u64> {
    a.to_u64().ok_or_else(|| Error::InvalidReal(format!("partial quotient {a} does not fit in u64")))
}

/// Partial quotients `a₁, a₂, …` of `x ∈ (0,1)`, at most `max_terms` of them.
pub fn continued_fraction(x: &RealSpec, max_terms: usize) -> Result<CfExpansion> {
    x.validate()?;
    match x {
        RealSpec::Rational { p, q } => {
            let (mut num, mut den) = (*q as u64, *p as u64);
            let mut quotients = Vec::new();
            while den != 0 && quotients.len() < max_terms {
                quotients.push(num / den);
                (num, den) = (den, num % den);
            }
            Ok(CfExpansion { quotients, terminated: den == 0, periodic: None })
        }
        RealSpec::QuadraticSurd { .. } => {
            // run the Lagrange recurrence until a state repeats, then unroll
            let mut s = x.surd_form().expect("surd");
            s.step(); // a₀ = 0
            let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
            let mut head = Vec::new();
            let start = loop {
                let key = (s.p.clone(), s.q.clone());
                if let Some(&start) = seen.get(&key) {
                    break start;
                }
                seen.insert(key, head.len());
                head.push(to_quotient(&s.step())?);
            };
            let period = Period { preperiod: start, cycle: head[start..].to_vec() };
            let quotients = (0..max_terms)
                .map(|i| if i < start { head[i] } else { period.cycle[(i - start) % period.cycle.len()] })
                .collect();
            Ok(CfExpansion { quotients, terminated: false, periodic: Some(period) })
        }
        RealSpec::Decimal { digits, precision } => {
            let (num, den) = parse_decimal(digits)?;
            let frac_len = digits.split_once('.').map(|(_, f)| f.len()).unwrap_or(0);
            // truncate to the certified digits
            let scale = BigInt::from(10u32).pow((frac_len - precision) as u32);
            let lo_num = num / &scale;
            let den = den / scale;
            let hi_num = &lo_num + BigInt::one();
            let (mut lo, mut hi) = ((den.clone(), lo_num), (den, hi_num));
            let mut quotients = Vec::new();
            while quotients.len() < max_terms {
                if lo.1.is_zero() || hi.1.is_zero() {
                    return Err(Error::PrecisionExhausted { certified: quotients });
                }
                let (a_lo, r_lo) = lo.0.div_rem(&lo.1);
                let (a_hi, r_hi) = hi.0.div_rem(&hi.1);
                if a_lo != a_hi {
                    return Err(Error::PrecisionExhausted { certified: quotients });
                }
                quotients.push(to_quotient(&a_lo)?);
                lo = (lo.1, r_lo);
                hi = (hi.1, r_hi);
            }
            Ok(CfExpansion { quotients, terminated: false, periodic: None })
        }
    }
}

/// Convergents `p_k/q_k` of `[0; a₁, …, a_k]`, `k = 1..`.
pub fn convergents(quotients: &[u64]) -> Vec<(BigInt, BigInt)> {
    let (mut p_prev, mut p) = (BigInt::one(), BigInt::zero());
    let (mut q_prev, mut q) = (BigInt::zero(), BigInt::one());
    quotients
        .iter()
        .map(|&a| {
            let a = BigInt::from(a);
            let p_next = &a * &p + &p_prev;
            let q_next = &a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            (p.clone(), q.clone())
        })
        .collect()
}

/// Exact test of `|x − p/q| < 1/q²` for rational and surd `x`.
pub fn within_inverse_square(x: &RealSpec, p: &BigInt, q: &BigInt) -> Result<bool> {
    x.validate()?;
    if !q.is_positive() {
        return Err(Error::InvalidArgument("convergent denominator must be positive".into()));
    }
    match *x {
        RealSpec::Rational { p: xp, q: xq } => {
            // |q·xp − p·xq|·q < xq
            let gap = (q * xp - p * xq).abs() * q;
            Ok(gap < BigInt::from(xq))
        }
        RealSpec::QuadraticSurd { a, b, d, c } => {
            // q²(a + b√d) − pqc lies strictly inside (−|c|, |c|)
            let u = q * q * a - p * q * c;
            let v = q * q * b;
            let c = BigInt::from(c).abs();
            let d = BigInt::from(d);
            Ok(sign_surd(&(&u - &c), &v, &d) < 0 && sign_surd(&(&u + &c), &v, &d) > 0)
        }
        RealSpec::Decimal { .. } => Err(Error::InvalidReal("exact comparison needs a rational or surd".into())),
    }
}

/// Sign of `u + v√d` for non-square `d > 0`.
fn sign_surd(u: &BigInt, v: &BigInt, d: &BigInt) -> i32 {
    let sign = |x: &BigInt| {
        if x.is_positive() {
            1
        } else if x.is_negative() {
            -1
        } else {
            0
        }
    };
    let (su, sv) = (sign(u), sign(v));
    if sv == 0 {
        return su;
    }
    if su == 0 || su == sv {
        return sv;
    }
    // opposite signs: compare u² with v²d
    let uu = u * u;
    let vvd = v * v * d;
    if uu > vvd {
        su
    } else {
        sv
    }
}

/// Three-valued membership in the set of irrationals of `(0,1)` with bounded
/// partial quotients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// Eventually periodic expansion, hence bounded by `bound`.
    InSCertified { bound: u64, cycle: Vec<u64> },
    /// No proof either way; the first `depth` quotients are at most `max_quotient`.
    InSUpToDepth { depth: usize, max_quotient: u64 },
    /// The expansion terminates.
    NotInSRational { quotients: Vec<u64> },
    /// Decimal precision ran out before `depth` quotients were certified.
    Inconclusive { certified: usize, max_quotient: Option<u64> },
}

impl Verdict {
    pub fn reason_code(&self) -> &'static str {
        match self {
            Verdict::InSCertified { .. } => "periodic_expansion",
            Verdict::InSUpToDepth { .. } => "depth_limited",
            Verdict::NotInSRational { .. } => "terminating_expansion",
            Verdict::Inconclusive { .. } => "precision_exhausted",
        }
    }
}

pub fn is_in_s(x: &RealSpec, depth: usize) -> Result<Verdict> {
    match x {
        RealSpec::Rational { .. } => {
            let cf = continued_fraction(x, usize::MAX)?;
            Ok(Verdict::NotInSRational { quotients: cf.quotients })
        }
        RealSpec::QuadraticSurd { .. } => {
            let cf = continued_fraction(x, 0)?;
            let p = cf.periodic.expect("quadratic surds are eventually periodic");
            let head = continued_fraction(x, p.preperiod)?.quotients;
            let bound = head.iter().chain(&p.cycle).copied().max().unwrap_or(0);
            Ok(Verdict::InSCertified { bound, cycle: p.cycle })
        }
        RealSpec::Decimal { .. } => match continued_fraction(x, depth) {
            Ok(cf) => Ok(Verdict::InSUpToDepth { depth, max_quotient: cf.max_quotient().unwrap_or(0) }),
            Err(Error::PrecisionExhausted { certified }) => {
                Ok(Verdict::Inconclusive { certified: certified.len(), max_quotient: certified.iter().copied().max() })
            }
            Err(e) => Err(e),
        },
    }
}

/// `|sin(nπx)|`, with exact zeros and no cancellation near them.
pub fn abs_sin_n_pi(x: &RealSpec, n: u64) -> f64 {
    let dist = match *x {
        RealSpec::Rational { p, q } => {
            let r = ((n as i128 * p as i128) % q as i128) as f64;
            let q = q as f64;
            r.min(q - r) / q
        }
        RealSpec::QuadraticSurd { a, b, d, c } => surd_distance_to_integer(n, a, b, d, c),
        RealSpec::Decimal { ref digits, .. } => {
            let (num, den) = parse_decimal(digits).expect("validated decimal");
            let r = (num * BigInt::from(n)).mod_floor(&den);
            let other = &den - &r;
            let near = if r < other { r } else { other };
            ratio_to_f64(&near, &den)
        }
    };
    (std::f64::consts::PI * dist).sin()
}

fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    // scale to keep 60 significant bits
    let shift = den.bits().saturating_sub(60);
    let n = (num >> shift).to_f64().unwrap_or(0.0);
    let d = (den >> shift).to_f64().unwrap_or(1.0);
    n / d
}

/// Distance from `n(a + b√d)/c` to the nearest integer.
fn surd_distance_to_integer(n: u64, a: i64, b: i64, d: i64, c: i64) -> f64 {
    let nb = n as i64;
    let s = Surd::new(a * nb, b * nb, d, c);
    let m = s.floor();
    // n·x − m = (u + v√d)/c with u = na − mc, v = nb
    let u = BigInt::from(a) * n - &m * c;
    let v = BigInt::from(b) * n;
    let dd = BigInt::from(d);
    let sq = (d as f64).sqrt();
    let uf = u.to_f64().unwrap_or(f64::NAN);
    let vf = v.to_f64().unwrap_or(f64::NAN);
    let num = if u.sign() == v.sign() || u.is_zero() {
        uf + vf * sq
    } else {
        // exact numerator (u² − v²d), denominator without cancellation
        let top = (&u * &u - &v * &v * dd).to_f64().unwrap_or(f64::NAN);
        top / (uf - vf * sq)
    };
    let frac = num / c as f64;
    frac.min(1.0 - frac).abs()
}

/// Bare-sine coefficients: `u⁰ = Σ a_n sin(nπx)`, `u¹ = Σ b_n sin(nπx)` (the orthonormal basis carries a `√2`).
pub fn bare_sine_coefficients(state: &ModalState) -> (Vec<f64>, Vec<f64>) {
    let s = std::f64::consts::SQRT_2;
    (state.pos().iter().map(|p| s * p).collect(), state.vel().iter().map(|v| s * v).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DualWeightNorm {
    Finite {
        value: f64,
    },
    /// `sin(nπξ) = 0` while mode `n` carries a nonzero coefficient.
    Infinite {
        mode: u64,
    },
}

/// `√(Σ_{n≤N} (n²a_n² + b_n²)/sin²(nπξ))` for bare-sine coefficients.
pub fn dual_weight_norm(a: &[f64], b: &[f64], xi: &RealSpec) -> Result<DualWeightNorm> {
    xi.validate()?;
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!("coefficient lengths differ: {} vs {}", a.len(), b.len())));
    }
    let mut acc = 0.0;
    for (i, (an, bn)) in a.iter().zip(b).enumerate() {
        let n = (i + 1) as u64;
        let top = (n as f64 * an).powi(2) + bn * bn;
        if top == 0.0 {
            continue;
        }
        let s = abs_sin_n_pi(xi, n);
        if s == 0.0 {
            return Ok(DualWeightNorm::Infinite { mode: n });
        }
        acc += top / (s * s);
    }
    Ok(DualWeightNorm::Finite { value: acc.sqrt() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SineGapScan {
    pub n_max: u64,
    /// `min_{n ≤ N} n·|sin(nπξ)|`.
    pub min_value: f64,
    pub argmin: u64,
    /// `(n, n·|sin(nπξ)|)` each time a new running minimum is reached.
    pub record_lows: Vec<(u64, f64)>,
}

pub fn sine_gap_scan(xi: &RealSpec, n_max: u64) -> Result<SineGapScan> {
    xi.validate()?;
    if n_max == 0 {
        return Err(Error::InvalidArgument("scan needs N >= 1".into()));
    }
    let mut scan = SineGapScan { n_max, min_value: f64::INFINITY, argmin: 0, record_lows: Vec::new() };
    for n in 1..=n_max {
        let v = n as f64 * abs_sin_n_pi(xi, n);
        if v < scan.min_value {
            scan.min_value = v;
            scan.argmin = n;
            scan.record_lows.push((n, v));
        }
    }
    Ok(scan)
}
