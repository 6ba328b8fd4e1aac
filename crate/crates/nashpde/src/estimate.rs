//! Demodulated gradient and Hessian estimates, Pi-window averaging and the
//! first-order low-pass filter shared by all filtered laws.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub fn gradient_estimate(y: f64, m: f64) -> f64 {
    m * y
}

pub fn hessian_estimate(y: f64, n: f64) -> f64 {
    n * y
}

/// `c / (s + c)` discretized exactly for piecewise-constant input. A
/// corner of `None` is the unfiltered limit (output equals input).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowPass {
    pub corner: Option<f64>,
    pub y: f64,
}

impl LowPass {
    pub fn new(corner: Option<f64>, y0: f64) -> Self {
        Self { corner, y: y0 }
    }

    pub fn step(&mut self, u: f64, dt: f64) -> f64 {
        match self.corner {
            Some(c) => {
                let f = (-c * dt).exp();
                self.y = f * self.y + (1.0 - f) * u;
            }
            None => self.y = u,
        }
        self.y
    }
}

/// Removes the slowly varying part of the payoff before demodulation,
/// `y - eta` with `eta` a low-pass of `y` seeded on the first sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Washout {
    lp: Option<LowPass>,
    corner: f64,
}

impl Washout {
    pub fn new(corner: f64) -> Self {
        Self { lp: None, corner }
    }

    pub fn apply(&mut self, y: f64, dt: f64) -> f64 {
        let lp = self.lp.get_or_insert(LowPass::new(Some(self.corner), y));
        let out = y - lp.y;
        lp.step(y, dt);
        out
    }
}

/// Running Hessian estimate fed to the compensators: a slow low-pass of
/// `N y`, optionally kept nonpositive so the sign convention of the laws
/// holds during transients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianTracker {
    lp: LowPass,
    clamp: bool,
}

impl HessianTracker {
    pub fn new(corner: Option<f64>, h0: f64, clamp: bool) -> Self {
        Self { lp: LowPass::new(corner, h0), clamp }
    }

    pub fn value(&self) -> f64 {
        if self.clamp {
            self.lp.y.min(0.0)
        } else {
            self.lp.y
        }
    }

    pub fn step(&mut self, raw: f64, dt: f64) -> f64 {
        self.lp.step(raw, dt);
        self.value()
    }
}

/// Trapezoid mean of the last `period` seconds of a uniformly sampled
/// signal (oldest first). A fractional leading interval is interpolated.
pub fn windowed_average(samples: &[f64], dt: f64, period: f64) -> Result<f64> {
    let cells = period / dt;
    let whole = (cells + 1e-9).floor() as usize;
    let frac = (cells - whole as f64).max(0.0);
    let need = whole + 1 + usize::from(frac > 1e-9);
    if samples.len() < need || whole == 0 {
        return Err(Error::InsufficientSpan { need: period, have: samples.len().saturating_sub(1) as f64 * dt });
    }
    let tail = &samples[samples.len() - whole - 1..];
    let mut acc: f64 = tail.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum();
    if frac > 1e-9 {
        let (a, b) = (samples[samples.len() - whole - 2], tail[0]);
        let start = b + (a - b) * frac;
        acc += 0.5 * frac * (start + b);
    }
    Ok(acc / cells)
}

/// Bounded ring of recent samples for Pi-window diagnostics.
#[derive(Debug, Clone)]
pub struct Window {
    dt: f64,
    period: f64,
    buf: VecDeque<f64>,
    cap: usize,
}

impl Window {
    pub fn new(dt: f64, period: f64) -> Self {
        let cap = (period / dt).ceil() as usize + 2;
        Self { dt, period, buf: VecDeque::with_capacity(cap), cap }
    }

    pub fn push(&mut self, v: f64) {
        if self.buf.len() == self.cap {
            self.buf.pop_front();
        }
        self.buf.push_back(v);
    }

    pub fn span(&self) -> f64 {
        self.buf.len().saturating_sub(1) as f64 * self.dt
    }

    pub fn average(&mut self) -> Result<f64> {
        windowed_average(self.buf.make_contiguous(), self.dt, self.period)
    }
}

/// Per-player estimator state.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    pub g: f64,
    pub h_hat: f64,
    pub g_window: Window,
    pub h_window: Window,
}

impl EstimatorState {
    pub fn new(dt: f64, period: f64) -> Self {
        Self { g: 0.0, h_hat: 0.0, g_window: Window::new(dt, period), h_window: Window::new(dt, period) }
    }

    pub fn update(&mut self, y: f64, m: f64, n: f64) {
        self.g = gradient_estimate(y, m);
        self.h_hat = hessian_estimate(y, n);
        self.g_window.push(self.g);
        self.h_window.push(self.h_hat);
    }
}
