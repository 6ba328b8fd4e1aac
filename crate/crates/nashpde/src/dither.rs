//! Probe synthesis, demodulation signals and probing frequencies.
//!
//! Every channel except Stefan admits a phasor probe `S(t) = Im[A e^{jwt}]`
//! whose complex amplitude `A` solves the motion-planning problem that puts
//! a pure `a sin(wt)` at the map input. The Stefan probe is a truncated
//! power series in the reference interface and is carried as a
//! trigonometric polynomial.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::pde_sim::{ChannelKind, DelayProfile};

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Real trigonometric polynomial `sum_n Re[2 F_n e^{j n w t}]`, stored by
/// its nonnegative-frequency complex coefficients (`F_0` counted once).
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    omega: f64,
    coef: Vec<Complex64>,
}

impl TrigPoly {
    pub fn constant(omega: f64, c: f64) -> Self {
        Self { omega, coef: vec![Complex64::new(c, 0.0)] }
    }

    /// `c0 + amp sin(w t)`.
    pub fn offset_sine(omega: f64, c0: f64, amp: f64) -> Self {
        // sin x = Re[-j e^{jx}] = Re[2 F_1 e^{jx}] with F_1 = -j/2.
        Self { omega, coef: vec![Complex64::new(c0, 0.0), Complex64::new(0.0, -0.5 * amp)] }
    }

    pub fn degree(&self) -> usize {
        self.coef.len() - 1
    }

    fn two_sided(&self, n: i64) -> Complex64 {
        let k = n.unsigned_abs() as usize;
        match self.coef.get(k) {
            Some(c) if n >= 0 => *c,
            Some(c) => c.conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let (da, db) = (self.degree() as i64, other.degree() as i64);
        let d = da + db;
        let mut coef = vec![Complex64::new(0.0, 0.0); d as usize + 1];
        for (n, c) in coef.iter_mut().enumerate() {
            let n = n as i64;
            for k in -da..=da {
                let m = n - k;
                if m.abs() <= db {
                    *c += self.two_sided(k) * other.two_sided(m);
                }
            }
        }
        TrigPoly { omega: self.omega, coef }
    }

    pub fn pow(&self, p: usize) -> TrigPoly {
        let mut out = TrigPoly::constant(self.omega, 1.0);
        for _ in 0..p {
            out = out.mul(self);
        }
        out
    }

    pub fn derivative(&self, order: usize) -> TrigPoly {
        let coef = self
            .coef
            .iter()
            .enumerate()
            .map(|(n, c)| c * (J * (n as f64 * self.omega)).powu(order as u32))
            .collect();
        TrigPoly { omega: self.omega, coef }
    }

    pub fn scale(&self, s: f64) -> TrigPoly {
        TrigPoly { omega: self.omega, coef: self.coef.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let n = self.coef.len().max(other.coef.len());
        let coef = (0..n)
            .map(|k| {
                self.coef.get(k).copied().unwrap_or_default() + other.coef.get(k).copied().unwrap_or_default()
            })
            .collect();
        TrigPoly { omega: self.omega, coef }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with(&harmonics(self.omega, t, self.degree()))
    }

    /// Evaluate with precomputed `e^{j n w t}`, `n = 0..`.
    pub fn eval_with(&self, e: &[Complex64]) -> f64 {
        let mut acc = self.coef[0].re;
        for (c, z) in self.coef.iter().zip(e).skip(1) {
            acc += 2.0 * (c * z).re;
        }
        acc
    }

    /// Largest coefficient magnitude; a uniform bound on the polynomial is
    /// `|F_0| + 2 sum |F_n|`.
    pub fn bound(&self) -> f64 {
        self.coef[0].norm() + 2.0 * self.coef.iter().skip(1).map(|c| c.norm()).sum::<f64>()
    }
}

pub fn harmonics(omega: f64, t: f64, degree: usize) -> Vec<Complex64> {
    let e1 = Complex64::from_polar(1.0, omega * t);
    let mut e = Vec::with_capacity(degree + 1);
    let mut z = Complex64::new(1.0, 0.0);
    for _ in 0..=degree {
        e.push(z);
        z *= e1;
    }
    e
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Motion-planning series for the one-phase Stefan channel around the
/// reference interface `s_ref(t) = s_c + a sin(w t)`.
#[derive(Debug, Clone)]
pub struct StefanSeries {
    pub terms: usize,
    /// Boundary flux `S(t) = -beta_x(0, t)`.
    pub flux: TrigPoly,
    /// `beta(x, t) = sum_m x^m q[m](t)`.
    pub q: Vec<TrigPoly>,
    pub interface: TrigPoly,
    /// Size of the last retained flux term, a proxy for the truncation error.
    pub tail: f64,
}

impl StefanSeries {
    pub fn new(a: f64, omega: f64, s_c: f64, terms: usize) -> Self {
        let s = TrigPoly::offset_sine(omega, s_c, a);
        let neg = s.scale(-1.0);
        let mut flux = TrigPoly::constant(omega, 0.0);
        let mut q = vec![TrigPoly::constant(omega, 0.0); 2 * terms + 1];
        let mut tail = 0.0;
        // Powers of -s_ref, built once.
        let pows: Vec<TrigPoly> = {
            let mut v = vec![TrigPoly::constant(omega, 1.0)];
            for p in 1..=2 * terms {
                let next = v[p - 1].mul(&neg);
                v.push(next);
            }
            v
        };
        for i in 1..=terms {
            // -beta_x(0,t) = sum_i 1/(2i-1)! d^i/dt^i [s^{2i-1}]
            let term = pows[2 * i - 1].scale(-1.0).derivative(i).scale(1.0 / factorial(2 * i - 1));
            tail = term.bound();
            flux = flux.add(&term);
            // (x - s)^{2i} = sum_m C(2i, m) x^m (-s)^{2i-m}
            for (m, qm) in q.iter_mut().enumerate().take(2 * i + 1) {
                let c = binomial(2 * i, m) / factorial(2 * i);
                *qm = qm.add(&pows[2 * i - m].derivative(i).scale(c));
            }
        }
        Self { terms, flux, q, interface: s, tail }
    }

    pub fn degree(&self) -> usize {
        2 * self.terms
    }

    pub fn field(&self, x: f64, e: &[Complex64]) -> f64 {
        self.q.iter().rev().fold(0.0, |acc, qm| acc * x + qm.eval_with(e))
    }

    pub fn field_rate(&self, x: f64, t: f64) -> f64 {
        let e = harmonics(self.flux.omega, t, self.degree());
        self.q.iter().rev().fold(0.0, |acc, qm| acc * x + qm.derivative(1).eval_with(&e))
    }

    /// `int_0^X beta(x, t) dx` in closed form.
    pub fn field_integral(&self, upper: f64, e: &[Complex64]) -> f64 {
        let mut acc = 0.0;
        let mut xp = upper;
        for (m, qm) in self.q.iter().enumerate() {
            acc += xp / (m + 1) as f64 * qm.eval_with(e);
            xp *= upper;
        }
        acc
    }
}

/// Configured probe for one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub a: f64,
    pub omega: f64,
    #[serde(default = "default_terms")]
    pub series_terms: usize,
    /// Override of the distributed-delay normalizer.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Nominal interface the Stefan reference oscillates about.
    #[serde(default)]
    pub stefan_center: Option<f64>,
}

fn default_terms() -> usize {
    0
}

impl ProbeSpec {
    pub fn new(a: f64, omega: f64) -> Self {
        Self { a, omega, series_terms: 0, gamma: None, stefan_center: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(config(format!("probe amplitude must be nonnegative, got {}", self.a)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(config(format!("probe frequency must be positive, got {}", self.omega)));
        }
        Ok(())
    }
}

/// Default series truncation per class; 0 in the spec means "use this".
pub fn default_series_terms(kind: &ChannelKind) -> usize {
    match kind {
        ChannelKind::Rad { .. } => 12,
        ChannelKind::Stefan { .. } => 8,
        _ => 1,
    }
}

/// Compiled probe bound to a channel class.
#[derive(Debug, Clone)]
pub struct Probe {
    pub a: f64,
    pub omega: f64,
    kind: ChannelKind,
    phasor: Complex64,
    stefan: Option<StefanSeries>,
    /// Truncation tail estimate for series-defined probes.
    pub tail: f64,
}

fn sqrt_jw(omega: f64) -> Complex64 {
    let s = (omega / 2.0).sqrt();
    Complex64::new(s, s)
}

/// `sigma` with `sigma^2 = w^2 / (1 + j w d)`, imaginary part nonpositive.
pub fn kv_wavenumber(omega: f64, damping: f64) -> Complex64 {
    (Complex64::new(omega * omega, 0.0) / Complex64::new(1.0, omega * damping)).sqrt()
}

fn rad_q(eps: f64, xi: f64, omega: f64) -> Complex64 {
    (Complex64::new(xi, omega) / eps).sqrt()
}

/// `cosh(q x) + c sinh(q x) / q`, with the `q -> 0` limit.
fn cosh_plus_sinhc(q: Complex64, x: f64, c: f64) -> Complex64 {
    let z = q * x;
    let sinhc = if z.norm() < 1e-8 { Complex64::new(x, 0.0) } else { z.sinh() / q };
    z.cosh() + c * sinhc
}

impl Probe {
    pub fn new(spec: &ProbeSpec, kind: &ChannelKind) -> Result<Self> {
        spec.validate()?;
        kind.validate()?;
        let (a, w) = (spec.a, spec.omega);
        let terms = if spec.series_terms == 0 { default_series_terms(kind) } else { spec.series_terms };
        let mut tail = 0.0;
        let mut stefan = None;
        let phasor = match kind {
            ChannelKind::Direct | ChannelKind::VariableDelay { .. } => Complex64::new(a, 0.0),
            ChannelKind::Transport { delay } => a * Complex64::from_polar(1.0, w * delay),
            ChannelKind::Heat { length } => a * (sqrt_jw(w) * *length).cosh(),
            ChannelKind::Wave { length } => Complex64::new(a * (w * length).cos(), 0.0),
            ChannelKind::WaveKv { length, damping } => a * (kv_wavenumber(w, *damping) * *length).cos(),
            ChannelKind::Rad { diffusivity, advection, .. } => {
                let xi = kind.rad_xi().unwrap_or(0.0);
                let (eps, b) = (*diffusivity, *advection);
                let r = b / (2.0 * eps);
                // Truncated series in powers of (xi + jw)/eps.
                let z = Complex64::new(xi, w) / eps;
                let mut zk = Complex64::new(1.0, 0.0);
                let mut sum = Complex64::new(0.0, 0.0);
                for k in 0..terms {
                    let term = zk * (1.0 / factorial(2 * k) + r / factorial(2 * k + 1));
                    sum += term;
                    tail = a * (-r).exp() * term.norm();
                    zk *= z;
                }
                a * (-r).exp() * sum
            }
            ChannelKind::DistributedDelay { cdf } => {
                let b = cdf.transform(w);
                let gamma = spec.gamma.unwrap_or(b.norm_sqr());
                if !(gamma > 0.0) {
                    return Err(config("distributed-delay normalizer must be positive"));
                }
                a / gamma * b
            }
            ChannelKind::Stefan { s0, .. } => {
                let series = StefanSeries::new(a, w, spec.stefan_center.unwrap_or(*s0), terms);
                tail = series.tail;
                stefan = Some(series);
                Complex64::new(0.0, 0.0)
            }
        };
        Ok(Self { a, omega: w, kind: kind.clone(), phasor, stefan, tail })
    }

    pub fn kind(&self) -> &ChannelKind {
        &self.kind
    }

    pub fn phasor(&self) -> Complex64 {
        self.phasor
    }

    pub fn stefan(&self) -> Option<&StefanSeries> {
        self.stefan.as_ref()
    }

    /// `S(t)`.
    pub fn value(&self, t: f64) -> f64 {
        match &self.stefan {
            Some(s) => s.flux.eval(t),
            None => (self.phasor * Complex64::from_polar(1.0, self.omega * t)).im,
        }
    }

    /// Perturbation seen at the map input, `a sin(w (t - D(t)))` for the
    /// variable delay and `a sin(w t)` otherwise.
    pub fn target(&self, t: f64) -> f64 {
        self.a * (self.omega * demod_time(&self.kind, t)).sin()
    }

    /// Reference profile `(beta, beta_t)` at `x` for distributed channels.
    pub fn profile(&self, x: f64, t: f64) -> (f64, f64) {
        let w = self.omega;
        let p = match self.kind {
            ChannelKind::Heat { .. } => self.a * (sqrt_jw(w) * x).cosh(),
            ChannelKind::Wave { .. } => Complex64::new(self.a * (w * x).cos(), 0.0),
            ChannelKind::WaveKv { damping, .. } => self.a * (kv_wavenumber(w, damping) * x).cos(),
            ChannelKind::Rad { diffusivity, advection, .. } => {
                let xi = self.kind.rad_xi().unwrap_or(0.0);
                let r = advection / (2.0 * diffusivity);
                self.a * (-r * x).exp() * cosh_plus_sinhc(rad_q(diffusivity, xi, w), x, r)
            }
            ChannelKind::Stefan { .. } => {
                let s = self.stefan.as_ref().expect("Stefan probe carries its series");
                let e = harmonics(w, t, s.degree());
                return (s.field(x, &e), s.field_rate(x, t));
            }
            _ => return (0.0, 0.0),
        };
        let z = p * Complex64::from_polar(1.0, w * t);
        (z.im, (J * w * z).im)
    }
}

/// Time argument of the demodulators: `t - D(t)` for a variable delay.
pub fn demod_time(kind: &ChannelKind, t: f64) -> f64 {
    match kind {
        ChannelKind::VariableDelay { profile } => profile.phi(t),
        _ => t,
    }
}

pub fn demod_m(a: f64, omega: f64, t: f64) -> f64 {
    2.0 / a * (omega * t).sin()
}

pub fn demod_n_game(a: f64, omega: f64, t: f64) -> f64 {
    let s = (omega * t).sin();
    16.0 / (a * a) * (s * s - 0.5)
}

pub fn demod_n_scalar(a: f64, omega: f64, t: f64) -> f64 {
    -8.0 / (a * a) * (2.0 * omega * t).cos()
}

pub fn demod_variable_delay(a: f64, omega: f64, t: f64, delay: &DelayProfile) -> (f64, f64) {
    let p = delay.phi(t);
    (demod_m(a, omega, p), demod_n_scalar(a, omega, p))
}

pub type Rational = Ratio<i64>;

/// Best rational approximation with bounded denominator (continued fractions).
pub fn rational_from_f64(x: f64, max_den: i64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(config(format!("cannot represent {x} as a rational")));
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    loop {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i64;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-12 || (h1 as f64 / k1 as f64 - x).abs() <= 1e-12 * x.abs().max(1.0) {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 == 0 {
        return Err(config(format!("cannot represent {x} as a rational")));
    }
    Ok(Rational::new(h1, k1))
}

/// Violations of the probing-frequency exclusion rule among `w`.
pub fn exclusion_violations(w: &[Rational]) -> Vec<String> {
    let n = w.len();
    let mut bad = Vec::new();
    let two = Rational::from_integer(2);
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            if w[i] == w[j] {
                bad.push(format!("w'{i} = w'{j}"));
            }
            for k in (0..n).filter(|&k| k != i && k != j) {
                if w[i] == (w[j] + w[k]) / two {
                    bad.push(format!("w'{i} = (w'{j} + w'{k})/2"));
                }
                if w[i] == w[j] + two * w[k] {
                    bad.push(format!("w'{i} = w'{j} + 2w'{k}"));
                }
                for l in (0..n).filter(|&l| l != i && l != j && l != k) {
                    if w[i] == w[j] + w[k] + w[l] || w[i] == w[j] + w[k] - w[l] {
                        bad.push(format!("w'{i} = w'{j} + w'{k} +/- w'{l}"));
                    }
                }
            }
        }
    }
    bad.sort();
    bad.dedup();
    bad
}

/// Probing frequencies `w_i = w_base * w'_i` and their common period.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySet {
    pub omega_base: Rational,
    pub multipliers: Vec<Rational>,
    pub period: f64,
}

impl FrequencySet {
    pub fn new(omega_base: Rational, multipliers: Vec<Rational>) -> Result<Self> {
        if multipliers.is_empty() {
            return Err(config("at least one probing frequency is required"));
        }
        if omega_base <= Rational::from_integer(0) || multipliers.iter().any(|m| *m <= Rational::from_integer(0)) {
            return Err(config("probing frequencies must be positive"));
        }
        let bad = exclusion_violations(&multipliers);
        if !bad.is_empty() {
            return Err(config(format!("probing frequencies violate the exclusion rule: {}", bad.join(", "))));
        }
        let freqs: Vec<Rational> = multipliers.iter().map(|m| omega_base * m).collect();
        let period = averaging_period(&freqs)?;
        Ok(Self { omega_base, multipliers, period })
    }

    /// Build from absolute frequencies with unit base.
    pub fn from_frequencies(omegas: &[f64]) -> Result<Self> {
        let m = omegas.iter().map(|&w| rational_from_f64(w, 10_000)).collect::<Result<Vec<_>>>()?;
        Self::new(Rational::from_integer(1), m)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.multipliers.iter().map(|m| ratio_f64(self.omega_base * m)).collect()
    }
}

fn ratio_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `2 pi LCM{1 / w_i}` computed in exact rational arithmetic.
pub fn averaging_period(freqs: &[Rational]) -> Result<f64> {
    // 1/w = q/p; LCM of fractions = lcm(numerators) / gcd(denominators).
    let mut num = 1i64;
    let mut den = 0i64;
    for w in freqs {
        let (p, q) = (*w.numer(), *w.denom());
        num = num.checked_mul(q / num.gcd(&q)).ok_or_else(|| Error::Config("averaging period overflows".into()))?;
        den = den.gcd(&p);
    }
    Ok(2.0 * PI * num as f64 / den as f64)
}

/// Greedy search over the ladder `1, 5/4, 3/2, ...` for `n` admissible
/// multipliers.
pub fn select_frequencies(n: usize, omega_base: f64) -> Result<FrequencySet> {
    if n == 0 {
        return Err(config("player count must be at least 1"));
    }
    let mut chosen: Vec<Rational> = Vec::with_capacity(n);
    let mut m = 4i64;
    while chosen.len() < n {
        let cand = Rational::new(m, 4);
        chosen.push(cand);
        if !exclusion_violations(&chosen).is_empty() {
            chosen.pop();
        }
        m += 1;
    }
    FrequencySet::new(rational_from_f64(omega_base, 10_000)?, chosen)
}
