//! One-dimensional actuation channels. Each maps the boundary input
//! `theta(t)` to the propagated action `Theta(t)` seen by the payoff.

mod delay;
mod parabolic;
mod stefan;
mod wave;

pub use delay::{DelayLine, DistributedDelay, History, VariableDelay};
pub use parabolic::Parabolic;
pub use stefan::Stefan;
pub use wave::Wave;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// `D(t) = mean + amplitude * sin(frequency * t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayProfile {
    pub mean: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub frequency: f64,
}

impl DelayProfile {
    pub fn constant(d: f64) -> Self {
        Self { mean: d, amplitude: 0.0, frequency: 0.0 }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.mean + self.amplitude * (self.frequency * t).sin()
    }

    pub fn rate(&self, t: f64) -> f64 {
        self.amplitude * self.frequency * (self.frequency * t).cos()
    }

    pub fn max(&self) -> f64 {
        self.mean + self.amplitude.abs()
    }

    /// `phi(t) = t - D(t)`.
    pub fn phi(&self, t: f64) -> f64 {
        t - self.at(t)
    }

    /// Inverse of `phi` by bisection; `phi` is strictly increasing once validated.
    pub fn phi_inverse(&self, t: f64) -> f64 {
        let (mut lo, mut hi) = (t, t + self.max() + 1.0);
        while self.phi(hi) < t {
            hi += self.max() + 1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.phi(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-10 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean - self.amplitude.abs() > 0.0) {
            return Err(config("variable delay must stay positive"));
        }
        if !((self.amplitude * self.frequency).abs() < 1.0) {
            return Err(config("variable delay must satisfy |dD/dt| < 1 so that t - D(t) is invertible"));
        }
        Ok(())
    }
}

/// Piecewise-linear cumulative lag distribution on `[0, D]`. Repeated
/// abscissae encode jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCdf {
    pub points: Vec<[f64; 2]>,
}

impl LagCdf {
    pub fn step_at(d: f64) -> Self {
        Self { points: vec![[0.0, 0.0], [d, 0.0], [d, 1.0]] }
    }

    pub fn uniform(d: f64) -> Self {
        Self { points: vec![[0.0, 0.0], [d, 1.0]] }
    }

    pub fn horizon(&self) -> f64 {
        self.points.last().map(|p| p[0]).unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.points;
        if p.len() < 2 {
            return Err(config("lag distribution needs at least two points"));
        }
        if p[0][0] != 0.0 || p[0][1] != 0.0 {
            return Err(config("lag distribution must start at (0, 0)"));
        }
        if (p[p.len() - 1][1] - 1.0).abs() > 1e-12 {
            return Err(config("lag distribution must end at probability 1"));
        }
        if p.windows(2).any(|w| w[1][0] < w[0][0] || w[1][1] < w[0][1]) {
            return Err(config("lag distribution must be nondecreasing"));
        }
        if !(self.horizon() > 0.0) {
            return Err(config("lag distribution horizon must be positive"));
        }
        Ok(())
    }

    /// Right-continuous CDF value.
    pub fn value(&self, s: f64) -> f64 {
        let p = &self.points;
        let mut v = 0.0;
        for w in p.windows(2) {
            let ([s0, b0], [s1, b1]) = (w[0], w[1]);
            if s >= s1 {
                v = b1;
            } else if s >= s0 && s1 > s0 {
                return b0 + (b1 - b0) * (s - s0) / (s1 - s0);
            } else {
                break;
            }
        }
        v
    }

    /// `B(w) = int e^{j w s} dbeta(s)`, exact on each piece.
    pub fn transform(&self, omega: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for w in self.points.windows(2) {
            let ([s0, b0], [s1, b1]) = (w[0], w[1]);
            let mass = b1 - b0;
            if mass == 0.0 {
                continue;
            }
            if s1 == s0 {
                acc += mass * Complex64::from_polar(1.0, omega * s0);
            } else {
                let rho = mass / (s1 - s0);
                let e1 = Complex64::from_polar(1.0, omega * s1);
                let e0 = Complex64::from_polar(1.0, omega * s0);
                acc += rho * (e1 - e0) / Complex64::new(0.0, omega);
            }
        }
        acc
    }

    /// Quadrature weights `w_m` with `int f(s) dbeta(s) ~ sum_m w_m f(m dt)`
    /// for `f` linear between grid points.
    pub fn grid_weights(&self, dt: f64) -> Vec<f64> {
        let n = (self.horizon() / dt).ceil() as usize + 1;
        let mut w = vec![0.0; n + 1];
        for seg in self.points.windows(2) {
            let ([s0, b0], [s1, b1]) = (seg[0], seg[1]);
            let mass = b1 - b0;
            if mass == 0.0 {
                continue;
            }
            if s1 == s0 {
                let x = s0 / dt;
                let m = x.floor() as usize;
                let f = x - m as f64;
                w[m] += mass * (1.0 - f);
                if f > 0.0 {
                    w[m + 1] += mass * f;
                }
            } else {
                let rho = mass / (s1 - s0);
                let m_lo = (s0 / dt).floor() as usize;
                let m_hi = ((s1 / dt).ceil() as usize + 1).min(n);
                for (m, wm) in w.iter_mut().enumerate().take(m_hi + 1).skip(m_lo.saturating_sub(1)) {
                    *wm += rho * hat_integral(m, dt, s0, s1);
                }
            }
        }
        w
    }

    /// Weights `v_m` with `int_0^D (1 - beta(s)) f(s) ds ~ sum_m v_m f(m dt)`
    /// for `f` linear between grid points. Exact: on each sub-piece the
    /// integrand is quadratic, so Simpson's rule is exact there.
    pub fn survival_weights(&self, dt: f64) -> Vec<f64> {
        let d = self.horizon();
        let cells = (d / dt).ceil() as usize;
        let mut v = vec![0.0; cells + 2];
        let breaks: Vec<f64> = self.points.iter().map(|p| p[0]).collect();
        let surv = |s: f64| 1.0 - self.value_left(s);
        for m in 0..cells {
            let (c0, c1) = (m as f64 * dt, ((m + 1) as f64 * dt).min(d));
            if c1 <= c0 {
                continue;
            }
            let mut cuts = vec![c0];
            cuts.extend(breaks.iter().copied().filter(|&b| b > c0 && b < c1));
            cuts.push(c1);
            for seg in cuts.windows(2) {
                let (lo, hi) = (seg[0], seg[1]);
                let mid = 0.5 * (lo + hi);
                // Survival is linear on (lo, hi); sample it inside to skip jumps.
                let (fl, fm, fh) = {
                    let e = 1e-12 * (hi - lo);
                    let (sl, sh) = (surv(lo + e), surv(hi - e));
                    (sl, 0.5 * (sl + sh), sh)
                };
                let left = |s: f64| 1.0 - (s - c0) / dt;
                let h6 = (hi - lo) / 6.0;
                v[m] += h6 * (fl * left(lo) + 4.0 * fm * left(mid) + fh * left(hi));
                v[m + 1] += h6 * (fl * (1.0 - left(lo)) + 4.0 * fm * (1.0 - left(mid)) + fh * (1.0 - left(hi)));
            }
        }
        v
    }

    /// Left limit of the CDF.
    fn value_left(&self, s: f64) -> f64 {
        let p = &self.points;
        let mut v = 0.0;
        for w in p.windows(2) {
            let ([s0, b0], [s1, b1]) = (w[0], w[1]);
            if s > s1 {
                v = b1;
            } else if s > s0 && s1 > s0 {
                return b0 + (b1 - b0) * (s - s0) / (s1 - s0);
            } else if s <= s0 {
                break;
            }
        }
        v
    }
}

/// `int_lo^hi h_m(s) ds` for the hat function centred on `m dt`.
fn hat_integral(m: usize, dt: f64, lo: f64, hi: f64) -> f64 {
    let c = m as f64 * dt;
    // Rising half on [c - dt, c], falling half on [c, c + dt].
    let rise = |s: f64| {
        let u = (s - (c - dt)) / dt;
        0.5 * u * u * dt
    };
    let fall = |s: f64| {
        let u = (s - c) / dt;
        (u - 0.5 * u * u) * dt
    };
    let mut total = 0.0;
    let (a, b) = (lo.max(c - dt), hi.min(c));
    if b > a {
        total += rise(b) - rise(a);
    }
    let (a, b) = (lo.max(c), hi.min(c + dt));
    if b > a {
        total += fall(b) - fall(a);
    }
    total
}

/// Actuation channel classes. Lengths and delays in their physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelKind {
    /// No actuation dynamics, `Theta = theta`.
    Direct,
    Transport { delay: f64 },
    Heat { length: f64 },
    /// Undamped string, free at 0 and driven at `length`.
    Wave { length: f64 },
    WaveKv { length: f64, damping: f64 },
    /// Reaction-advection-diffusion on the unit interval.
    Rad { diffusivity: f64, advection: f64, reaction: f64 },
    /// One-phase Stefan problem with unit coefficients, flux actuation at 0.
    Stefan { s0: f64, cap: f64 },
    VariableDelay { profile: DelayProfile },
    DistributedDelay { cdf: LagCdf },
}

impl ChannelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Direct => "direct",
            ChannelKind::Transport { .. } => "transport",
            ChannelKind::Heat { .. } => "heat",
            ChannelKind::Wave { .. } => "wave",
            ChannelKind::WaveKv { .. } => "wave_kv",
            ChannelKind::Rad { .. } => "rad",
            ChannelKind::Stefan { .. } => "stefan",
            ChannelKind::VariableDelay { .. } => "variable_delay",
            ChannelKind::DistributedDelay { .. } => "distributed_delay",
        }
    }

    /// `xi = b^2 / (4 eps) - lambda` for the RAD class.
    pub fn rad_xi(&self) -> Option<f64> {
        match *self {
            ChannelKind::Rad { diffusivity, advection, reaction } => {
                Some(advection * advection / (4.0 * diffusivity) - reaction)
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config(format!("{what} must be positive, got {v}")))
            }
        };
        match self {
            ChannelKind::Direct => Ok(()),
            ChannelKind::Transport { delay } => pos(*delay, "transport delay"),
            ChannelKind::Heat { length } | ChannelKind::Wave { length } => pos(*length, "domain length"),
            ChannelKind::WaveKv { length, damping } => {
                pos(*length, "domain length")?;
                pos(*damping, "Kelvin-Voigt damping")
            }
            ChannelKind::Rad { diffusivity, .. } => {
                pos(*diffusivity, "diffusivity")?;
                let xi = self.rad_xi().unwrap_or(0.0);
                if xi < 0.0 {
                    return Err(crate::error::Error::Unsupported(format!(
                        "RAD kernel needs b^2/(4 eps) - lambda >= 0, got {xi}"
                    )));
                }
                Ok(())
            }
            ChannelKind::Stefan { s0, cap } => {
                pos(*s0, "initial interface")?;
                if !(cap > s0) {
                    return Err(config("Stefan domain cap must exceed the initial interface"));
                }
                Ok(())
            }
            ChannelKind::VariableDelay { profile } => profile.validate(),
            ChannelKind::DistributedDelay { cdf } => cdf.validate(),
        }
    }

    /// Default step: the probe period, the diffusion time of one cell or
    /// the wave transit of one cell, whichever binds.
    pub fn recommended_dt(&self, cells: usize, omega_max: f64) -> f64 {
        let m = cells.max(1) as f64;
        let probe = 2.0 * std::f64::consts::PI / (40.0 * omega_max);
        match *self {
            ChannelKind::Heat { length } => probe.min(length * length / (10.0 * m * m)),
            ChannelKind::Rad { diffusivity, .. } => probe.min(1.0 / (10.0 * m * m * diffusivity)),
            ChannelKind::Stefan { s0, .. } => probe.min(s0 * s0 / (10.0 * m * m)),
            ChannelKind::Wave { length } | ChannelKind::WaveKv { length, .. } => probe.min(0.5 * length / m),
            _ => probe,
        }
    }
}

/// Stateful channel. `advance` consumes the boundary input at the new time.
#[derive(Debug, Clone)]
pub enum Channel {
    Direct { value: f64 },
    Transport(DelayLine),
    Parabolic(Parabolic),
    Wave(Wave),
    Stefan(Stefan),
    VariableDelay(VariableDelay),
    Distributed(DistributedDelay),
}

impl Channel {
    /// Build a channel at rest with every state sample equal to `value`.
    pub fn new(kind: &ChannelKind, cells: usize, dt: f64, value: f64) -> Result<Self> {
        kind.validate()?;
        if !(dt > 0.0) {
            return Err(config("time step must be positive"));
        }
        Ok(match *kind {
            ChannelKind::Direct => Channel::Direct { value },
            ChannelKind::Transport { delay } => Channel::Transport(DelayLine::new(delay_steps(delay, dt)?, value)),
            ChannelKind::Heat { length } => Channel::Parabolic(Parabolic::new(length, 1.0, 0.0, 0.0, cells, dt, value)?),
            ChannelKind::Rad { diffusivity, advection, reaction } => {
                Channel::Parabolic(Parabolic::new(1.0, diffusivity, advection, reaction, cells, dt, value)?)
            }
            ChannelKind::Wave { length } => Channel::Wave(Wave::new(length, 0.0, cells, dt, value)?),
            ChannelKind::WaveKv { length, damping } => Channel::Wave(Wave::new(length, damping, cells, dt, value)?),
            ChannelKind::Stefan { s0, cap } => Channel::Stefan(Stefan::new(s0, cap, cells, dt)?),
            ChannelKind::VariableDelay { profile } => Channel::VariableDelay(VariableDelay::new(profile, dt, value)),
            ChannelKind::DistributedDelay { ref cdf } => Channel::Distributed(DistributedDelay::new(cdf, dt, value)),
        })
    }

    /// Current propagated action.
    pub fn output(&self) -> f64 {
        match self {
            Channel::Direct { value } => *value,
            Channel::Transport(d) => d.oldest(),
            Channel::Parabolic(p) => p.values()[0],
            Channel::Wave(w) => w.values()[0],
            Channel::Stefan(s) => s.interface(),
            Channel::VariableDelay(v) => v.output(),
            Channel::Distributed(d) => d.output(),
        }
    }

    pub fn advance(&mut self, theta_next: f64) -> Result<()> {
        match self {
            Channel::Direct { value } => *value = theta_next,
            Channel::Transport(d) => d.push(theta_next),
            Channel::Parabolic(p) => p.advance(theta_next),
            Channel::Wave(w) => w.advance(theta_next),
            Channel::Stefan(s) => s.advance(theta_next)?,
            Channel::VariableDelay(v) => v.advance(theta_next),
            Channel::Distributed(d) => d.advance(theta_next),
        }
        Ok(())
    }

    /// Seed delay-type channels with the input history `theta(t)`, `t <= 0`.
    pub fn fill_history(&mut self, dt: f64, f: impl Fn(f64) -> f64) {
        match self {
            Channel::Transport(d) => d.fill_with(|k| f(-(k as f64) * dt)),
            Channel::VariableDelay(v) => v.fill_with(f),
            Channel::Distributed(d) => d.fill_with(f),
            Channel::Direct { value } => *value = f(0.0),
            _ => {}
        }
    }

    /// Seed distributed channels with `(a(x), a_t(x))`; `theta0` is the
    /// boundary input at `t = 0` (the flux for Stefan).
    pub fn set_profile(&mut self, f: impl Fn(f64) -> (f64, f64), theta0: f64) {
        match self {
            Channel::Parabolic(p) => p.set_profile(|x| f(x).0),
            Channel::Wave(w) => w.set_profile(f),
            Channel::Stefan(s) => s.set_state(|x| f(x).0, theta0),
            _ => {}
        }
    }

    /// Grid and profile for spatially distributed channels.
    pub fn profile(&self) -> Option<(Vec<f64>, &[f64])> {
        match self {
            Channel::Parabolic(p) => Some((p.grid(), p.values())),
            Channel::Wave(w) => Some((w.grid(), w.values())),
            Channel::Stefan(s) => Some((s.grid(), s.values())),
            _ => None,
        }
    }

    /// Composite trapezoid of `w(x) * profile(x)` over the channel domain.
    pub fn weighted_integral(&self, w: impl Fn(f64) -> f64) -> Option<f64> {
        self.profile().map(|(x, v)| trapezoid_weighted(&x, v, w))
    }
}

pub fn trapezoid_weighted(x: &[f64], v: &[f64], w: impl Fn(f64) -> f64) -> f64 {
    x.windows(2)
        .zip(v.windows(2))
        .map(|(xs, vs)| 0.5 * (xs[1] - xs[0]) * (w(xs[0]) * vs[0] + w(xs[1]) * vs[1]))
        .sum()
}

/// Number of steps in a delay; the step must divide it.
pub fn delay_steps(delay: f64, dt: f64) -> Result<usize> {
    let n = (delay / dt).round();
    if n < 1.0 || ((n * dt - delay).abs() > 1e-9 * delay.max(1.0)) {
        return Err(config(format!("delay {delay} is not an integer multiple of dt {dt}")));
    }
    Ok(n as usize)
}

/// Shrink `dt` so that `delay` is an exact multiple of it.
pub fn snap_dt(delay: f64, dt: f64) -> f64 {
    delay / (delay / dt).ceil()
}

/// Solve a tridiagonal system in place (Thomas algorithm). `lo[0]` and
/// `up[n-1]` are ignored.
pub(crate) fn solve_tridiagonal(lo: &[f64], di: &[f64], up: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = di.len();
    let mut denom = di[0];
    scratch[0] = up[0] / denom;
    rhs[0] /= denom;
    for j in 1..n {
        denom = di[j] - lo[j] * scratch[j - 1];
        scratch[j] = if j + 1 < n { up[j] / denom } else { 0.0 };
        rhs[j] = (rhs[j] - lo[j] * rhs[j - 1]) / denom;
    }
    for j in (0..n - 1).rev() {
        rhs[j] -= scratch[j] * rhs[j + 1];
    }
}

/// Thomas elimination of a fixed tridiagonal matrix, factored once.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    lo: Vec<f64>,
    inv: Vec<f64>,
    c: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lo: &[f64], di: &[f64], up: &[f64]) -> Self {
        let n = di.len();
        let (mut inv, mut c) = (vec![0.0; n], vec![0.0; n]);
        for j in 0..n {
            let denom = if j == 0 { di[0] } else { di[j] - lo[j] * c[j - 1] };
            inv[j] = 1.0 / denom;
            c[j] = if j + 1 < n { up[j] * inv[j] } else { 0.0 };
        }
        Self { lo: lo.to_vec(), inv, c }
    }

    pub fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] *= self.inv[0];
        for j in 1..n {
            rhs[j] = (rhs[j] - self.lo[j] * rhs[j - 1]) * self.inv[j];
        }
        for j in (0..n - 1).rev() {
            rhs[j] -= self.c[j] * rhs[j + 1];
        }
    }
}
