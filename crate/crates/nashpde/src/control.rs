//! Compensating update laws. Each law forms a bracket from the live
//! gradient and Hessian estimates plus its own record of past control
//! (a delay line, or a copy of the actuation PDE driven by `U`), and the
//! bracket is passed through the `c / (s + c)` filter.

use serde::{Deserialize, Serialize};

use crate::dither::{harmonics, Probe};
use crate::error::{config, Result};
use crate::estimate::LowPass;
use crate::pde_sim::{trapezoid_weighted, Channel, ChannelKind, DelayLine, DelayProfile, History, Parabolic, Wave};

/// Which of the two equivalent heat-channel laws to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HeatForm {
    /// `k [G + H int_0^D (D - x) u(x) dx]` with `u` from a copy PDE.
    #[default]
    Integral,
    /// `k [G + H (theta_hat - Theta + a sin wt)]`.
    State,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompensatorSpec {
    pub k: f64,
    /// Filter pole; `None` is the unfiltered limit.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub form: HeatForm,
    /// Kernel parameter of the Kelvin-Voigt law.
    #[serde(default = "one")]
    pub kernel_c: f64,
    /// Gain on the boundary terms of the undamped wave law.
    #[serde(default = "one")]
    pub wave_gain: f64,
    /// Drop the predictor terms, leaving `k G`.
    #[serde(default)]
    pub uncompensated: bool,
}

fn one() -> f64 {
    1.0
}

impl CompensatorSpec {
    pub fn new(k: f64, c: Option<f64>) -> Self {
        Self { k, c, form: HeatForm::Integral, kernel_c: 1.0, wave_gain: 1.0, uncompensated: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(config(format!("adaptation gain must be nonnegative, got {}", self.k)));
        }
        if let Some(c) = self.c {
            if !(c > 0.0) {
                return Err(config(format!("filter pole must be positive, got {c}")));
            }
        }
        if !(self.kernel_c > 0.0) {
            return Err(config("kernel parameter must be positive"));
        }
        Ok(())
    }
}

/// Modified Bessel function `I1` by its power series.
pub fn bessel_i1(z: f64) -> f64 {
    z * i1_over_z(z)
}

/// `I1(z) / z`, finite at `z = 0` where it equals 1/2.
pub fn i1_over_z(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 0.5;
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + 1.0));
        sum += term;
        if term < 1e-14 * sum {
            break;
        }
    }
    sum
}

/// Kelvin-Voigt kernel weight `c D I1(r) / r`, `r = sqrt(c (D^2 - s^2))`.
pub fn kv_kernel(c: f64, d: f64, s: f64) -> f64 {
    let r = (c * (d * d - s * s)).max(0.0).sqrt();
    c * d * i1_over_z(r)
}

/// RAD constants `gamma(1)` and `m(z)` with their `xi -> 0` limits.
pub fn rad_gamma1(eps: f64, b: f64, xi: f64) -> f64 {
    let r = b / (2.0 * eps);
    let q = (xi / eps).sqrt();
    let sinhc = if q < 1e-8 { 1.0 } else { q.sinh() / q };
    q.cosh() + r * sinhc
}

pub fn rad_m(eps: f64, xi: f64, z: f64) -> f64 {
    let q = (xi / eps).sqrt();
    let sinhc = if q * z.abs() < 1e-8 { z } else { (q * z).sinh() / q };
    sinhc / eps
}

/// Per-law memory.
#[derive(Debug, Clone)]
enum Memory {
    None,
    /// Constant-delay predictor: `int_{t-D}^t U`.
    Delay(DelayLine),
    /// Copy of a parabolic channel with weights on its grid.
    Parabolic { copy: Parabolic, weights: Vec<f64>, gradient_gain: f64, outer: f64 },
    HeatState,
    /// Copy of the wave channel; `weights` are plain trapezoid weights.
    Wave { copy: Wave, weights: Vec<f64> },
    WaveKv { copy: Wave, weights: Vec<f64> },
    Stefan,
    Variable { hist: History, profile: DelayProfile, dt: f64 },
    Distributed { line: DelayLine, weights: Vec<f64> },
}

/// Inputs a law may read at the current step.
#[derive(Debug, Clone, Copy)]
pub struct LawInputs<'a> {
    pub t: f64,
    pub g: f64,
    pub h_hat: f64,
    pub theta_hat: f64,
    pub output: f64,
    pub probe: &'a Probe,
    pub channel: &'a Channel,
}

#[derive(Debug, Clone)]
pub struct Compensator {
    pub spec: CompensatorSpec,
    memory: Memory,
    filter: LowPass,
    dt: f64,
}

impl Compensator {
    pub fn new(spec: &CompensatorSpec, kind: &ChannelKind, cells: usize, dt: f64) -> Result<Self> {
        spec.validate()?;
        kind.validate()?;
        let memory = if spec.uncompensated {
            Memory::None
        } else {
            match kind {
                ChannelKind::Direct => Memory::None,
                ChannelKind::Transport { delay } => Memory::Delay(DelayLine::new(crate::pde_sim::delay_steps(*delay, dt)?, 0.0)),
                ChannelKind::Heat { length } => match spec.form {
                    HeatForm::State => Memory::HeatState,
                    HeatForm::Integral => {
                        let copy = Parabolic::new(*length, 1.0, 0.0, 0.0, cells, dt, 0.0)?;
                        let weights = quadrature(&copy.grid(), |x| length - x);
                        Memory::Parabolic { copy, weights, gradient_gain: 1.0, outer: 1.0 }
                    }
                },
                ChannelKind::Rad { diffusivity, advection, reaction } => {
                    let xi = kind.rad_xi().unwrap_or(0.0);
                    let (eps, b) = (*diffusivity, *advection);
                    let r = b / (2.0 * eps);
                    let copy = Parabolic::new(1.0, eps, b, *reaction, cells, dt, 0.0)?;
                    let weights = quadrature(&copy.grid(), |s| (r * s).exp() * rad_m(eps, xi, 1.0 - s));
                    Memory::Parabolic { copy, weights, gradient_gain: rad_gamma1(eps, b, xi), outer: (-r).exp() }
                }
                ChannelKind::Wave { length } => {
                    let copy = Wave::new(*length, 0.0, cells, dt, 0.0)?;
                    let weights = quadrature(&copy.grid(), |_| 1.0);
                    Memory::Wave { copy, weights }
                }
                ChannelKind::WaveKv { length, damping } => {
                    let copy = Wave::new(*length, *damping, cells, dt, 0.0)?;
                    let weights = quadrature(&copy.grid(), |s| kv_kernel(spec.kernel_c, *length, s));
                    Memory::WaveKv { copy, weights }
                }
                ChannelKind::Stefan { .. } => Memory::Stefan,
                ChannelKind::VariableDelay { profile } => {
                    let cap = (profile.max() / dt).ceil() as usize + 4;
                    Memory::Variable { hist: History::new(cap, dt, 0.0), profile: *profile, dt }
                }
                ChannelKind::DistributedDelay { cdf } => {
                    let weights = cdf.survival_weights(dt);
                    Memory::Distributed { line: DelayLine::new(weights.len() - 1, 0.0), weights }
                }
            }
        };
        Ok(Self { spec: spec.clone(), memory, filter: LowPass::new(spec.c, 0.0), dt })
    }

    /// Current filtered control `U`.
    pub fn output(&self) -> f64 {
        self.filter.y
    }

    /// The predictor term multiplying the Hessian estimate, and the
    /// coefficient on `G`.
    pub fn predictor(&self, inp: &LawInputs) -> (f64, f64) {
        match &self.memory {
            Memory::None => (1.0, 0.0),
            Memory::Delay(line) => (1.0, line.trapezoid(self.dt)),
            Memory::Parabolic { copy, weights, gradient_gain, .. } => {
                (*gradient_gain, dot(copy.values(), weights))
            }
            Memory::HeatState => (1.0, inp.theta_hat - inp.output + inp.probe.a * (inp.probe.omega * inp.t).sin()),
            Memory::Wave { .. } => (1.0, 0.0),
            Memory::WaveKv { copy, weights } => (1.0, -dot(copy.values(), weights)),
            Memory::Stefan => (1.0, stefan_u_integral(inp)),
            Memory::Variable { hist, profile, dt } => (1.0, variable_delay_integral(hist, profile, *dt, inp.t)),
            Memory::Distributed { line, weights } => {
                (1.0, weights.iter().enumerate().map(|(m, w)| w * line.lag(m)).sum())
            }
        }
    }

    /// Bracket inside the filter at the current step.
    pub fn bracket(&self, inp: &LawInputs) -> f64 {
        let k = self.spec.k;
        match &self.memory {
            Memory::Wave { copy, weights } => {
                // rho(s) = k [0 I] e^{As} [0 I]^T = k since A is nilpotent.
                let rho = k;
                let m = copy.cells();
                let u_d = copy.values()[m];
                let ut_d = copy.velocities()[m];
                let ut_int = rho * dot(copy.velocities(), weights);
                self.spec.wave_gain * (k * inp.h_hat * u_d - ut_d) + rho * inp.g + inp.h_hat * ut_int
            }
            Memory::Parabolic { outer, .. } => {
                let (gg, p) = self.predictor(inp);
                k * outer * (gg * inp.g + inp.h_hat * p)
            }
            _ => {
                let (gg, p) = self.predictor(inp);
                k * (gg * inp.g + inp.h_hat * p)
            }
        }
    }

    /// Filter the bracket into the new control and feed it to the memory.
    pub fn update(&mut self, inp: &LawInputs) -> Result<f64> {
        let b = self.bracket(inp);
        let u = match &self.memory {
            // The -d/dt u(D) term of the wave law is U' itself; an explicit
            // difference of it inside the filter is unstable, so it is taken
            // at the new step and solved for.
            Memory::Wave { copy, .. } => {
                let g = self.spec.wave_gain / self.dt;
                let y = self.filter.y;
                let b0 = b + self.spec.wave_gain * copy.velocities()[copy.cells()];
                let u = match self.spec.c {
                    Some(c) => {
                        let f = (-c * self.dt).exp();
                        (f * y + (1.0 - f) * (b0 + g * y)) / (1.0 + (1.0 - f) * g)
                    }
                    None => (b0 + g * y) / (1.0 + g),
                };
                self.filter.y = u;
                u
            }
            _ => self.filter.step(b, self.dt),
        };
        if !u.is_finite() {
            return Err(crate::error::Error::Simulation { t: inp.t, msg: "control became non-finite".into() });
        }
        match &mut self.memory {
            Memory::Delay(line) => line.push(u),
            Memory::Parabolic { copy, .. } => copy.advance(u),
            Memory::Wave { copy, .. } | Memory::WaveKv { copy, .. } => copy.advance(u),
            Memory::Variable { hist, .. } => hist.push(u),
            Memory::Distributed { line, .. } => line.push(u),
            Memory::None | Memory::HeatState | Memory::Stefan => {}
        }
        Ok(u)
    }
}

/// Trapezoid weights on `x` times the kernel, so a quadrature is one dot product.
fn quadrature(x: &[f64], kernel: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut q = vec![0.0; x.len()];
    for (j, xs) in x.windows(2).enumerate() {
        let h = 0.5 * (xs[1] - xs[0]);
        q[j] += h;
        q[j + 1] += h;
    }
    q.iter_mut().zip(x).for_each(|(q, &s)| *q *= kernel(s));
    q
}

fn dot(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// `int_0^{s(t)} (alpha - beta) dx` on the live Stefan channel.
fn stefan_u_integral(inp: &LawInputs) -> f64 {
    let (Channel::Stefan(st), Some(series)) = (inp.channel, inp.probe.stefan()) else {
        return 0.0;
    };
    let alpha = trapezoid_weighted(&st.grid(), st.values(), |_| 1.0);
    let e = harmonics(inp.probe.omega, inp.t, series.degree());
    alpha - series.field_integral(st.interface(), &e)
}

/// `int_0^1 u(s, t) (phi^{-1}(t) - t) ds` with
/// `u(s, t) = U(phi(t + s (phi^{-1}(t) - t)))`.
fn variable_delay_integral(hist: &History, profile: &DelayProfile, dt: f64, t: f64) -> f64 {
    let span = profile.phi_inverse(t) - t;
    let n = (span / dt - 1e-6).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let f = |r: f64| hist.at(profile.phi(r));
    let inner: f64 = (1..n).map(|j| f(t + j as f64 * h)).sum();
    h * (inner + 0.5 * (f(t) + f(t + span)))
}

/// Classical scalar ES step `u+ = u + dt k M y`.
pub fn baseline_classical_es(y: f64, m: f64, k: f64, dt: f64, u_hat: f64) -> f64 {
    u_hat + dt * k * m * y
}

/// Two-player NES step `u_i+ = u_i + dt k_i mu_i J_i`.
pub fn baseline_nes(y_i: f64, mu_i: f64, k_i: f64, dt: f64, u_hat: f64) -> f64 {
    u_hat + dt * k_i * mu_i * y_i
}
