//! Pre-flight stability checks and post-run convergence metrics.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::game::{check_diagonal_dominance, Dominance, GameHessian, QuadraticGame};

/// Largest real part among the eigenvalues of `K H`.
pub fn hurwitz_check(h: &GameHessian, k: &[f64]) -> Result<f64> {
    let n = h.matrix.nrows();
    if k.len() != n {
        return Err(input(format!("gain vector has {} entries for {n} players", k.len())));
    }
    let kh = DMatrix::from_fn(n, n, |i, j| k[i] * h.matrix[(i, j)]);
    Ok(kh.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Order-one constants of the small-gain argument, exposed because only
/// their orders are known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallGainConstants {
    /// `gamma_0 = g0 * eps`.
    pub g0: f64,
    pub gamma1: f64,
}

impl Default for SmallGainConstants {
    fn default() -> Self {
        Self { g0: 1.0, gamma1: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerGain {
    pub k_h: f64,
    pub sigma: f64,
    pub k1: f64,
    pub gamma3: f64,
    pub lhs1: f64,
    pub lhs2: f64,
    /// `|H_ij| < k_H < |H_ii| / eps` is satisfiable.
    pub window: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallGain {
    pub epsilon: f64,
    pub players: Vec<PlayerGain>,
    /// `1 - max LHS` over players and both inequalities.
    pub margin: f64,
    pub pass: bool,
}

/// Evaluate both small-gain inequalities for every player at `eps`.
pub fn small_gain_margin(game: &QuadraticGame, k: &[f64], delays: &[f64], eps: f64, c: SmallGainConstants) -> Result<SmallGain> {
    let n = game.players();
    if k.len() != n || delays.len() != n {
        return Err(input("gain and delay vectors must have one entry per player"));
    }
    let d2: f64 = delays.iter().map(|d| d * d).sum();
    let mut players = Vec::with_capacity(n);
    for (i, p) in game.payoffs.iter().enumerate() {
        let hii = p.h_quad[i][i].abs();
        let off = (0..n).filter(|&j| j != i).map(|j| p.h_quad[i][j].abs()).fold(0.0, f64::max);
        let k_h = off * (1.0 + 1e-6);
        let window = k_h < hii / eps;
        let sigma = hii * k[i];
        let k1 = eps * k[i] * k_h * d2 / 3f64.sqrt();
        let gamma3 = hii * k1;
        let lhs1 = (c.g0 * eps).max(c.gamma1 * k1);
        let lhs2 = gamma3 * c.gamma1 * k[i];
        players.push(PlayerGain { k_h, sigma, k1, gamma3, lhs1, lhs2, window });
    }
    let worst = players.iter().map(|p| p.lhs1.max(p.lhs2)).fold(0.0, f64::max);
    let margin = 1.0 - worst;
    let pass = margin > 0.0 && players.iter().all(|p| p.window);
    Ok(SmallGain { epsilon: eps, players, margin, pass })
}

/// Largest `eps` in `(0, 1]` at which the small-gain check passes, by
/// bisection; `None` if it fails for every `eps`.
pub fn epsilon_star(game: &QuadraticGame, k: &[f64], delays: &[f64], c: SmallGainConstants) -> Result<Option<f64>> {
    let ok = |e: f64| small_gain_margin(game, k, delays, e, c).map(|r| r.pass);
    if ok(1.0)? {
        return Ok(Some(1.0));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    if !ok(1e-12)? {
        return Ok(None);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub dominance: Dominance,
    pub hurwitz_max_re: f64,
    pub small_gain: SmallGain,
    pub epsilon_star: Option<f64>,
}

pub fn stability_report(game: &QuadraticGame, k: &[f64], delays: &[f64], c: SmallGainConstants) -> Result<StabilityReport> {
    let h = game.hessian();
    Ok(StabilityReport {
        dominance: check_diagonal_dominance(&h),
        hurwitz_max_re: hurwitz_check(&h, k)?,
        small_gain: small_gain_margin(game, k, delays, game.epsilon, c)?,
        epsilon_star: epsilon_star(game, k, delays, c)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceMetrics {
    /// `sup |Theta_i - Theta*_i|` over the last 20% of the run.
    pub tail_residual: Vec<f64>,
    /// Same for the applied input `theta_i`.
    pub tail_residual_input: Vec<f64>,
    /// `C (|a_i| + 1 / w_i)`, inflated by `e^{D sqrt(w/2)}` on the input side
    /// of heat players.
    pub band: Vec<f64>,
    pub band_input: Vec<f64>,
    /// `sup ||Theta - Theta*||_2` over the final averaging period.
    pub periodic_norm: f64,
}

/// Per-player band data for `convergence_metrics`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub a: f64,
    pub omega: f64,
    /// Heat-channel length, if any, for the input-side inflation.
    pub heat_length: Option<f64>,
}

pub fn band_for(b: &BandSpec, c: f64) -> (f64, f64) {
    let out = c * (b.a.abs() + 1.0 / b.omega);
    let input = match b.heat_length {
        Some(d) => out.max(b.a.abs() * (d * (b.omega / 2.0).sqrt()).exp()),
        None => out,
    };
    (out, input)
}

/// Metrics from sampled series; `outputs[i]` and `inputs[i]` share `times`.
pub fn convergence_metrics(
    times: &[f64],
    outputs: &[Vec<f64>],
    inputs: &[Vec<f64>],
    theta_star: &[f64],
    bands: &[BandSpec],
    period: f64,
    band_constant: f64,
) -> Result<ConvergenceMetrics> {
    let t_end = *times.last().ok_or_else(|| input("empty series"))?;
    let t0 = times[0];
    if t_end - t0 < 5.0 * period {
        return Err(Error::InsufficientSpan { need: 5.0 * period, have: t_end - t0 });
    }
    let tail_start = t0 + 0.8 * (t_end - t0);
    let sup = |s: &[f64], star: f64| {
        times.iter().zip(s).filter(|(t, _)| **t >= tail_start).map(|(_, v)| (v - star).abs()).fold(0.0, f64::max)
    };
    let tail_residual = outputs.iter().zip(theta_star).map(|(s, &x)| sup(s, x)).collect();
    let tail_residual_input = inputs.iter().zip(theta_star).map(|(s, &x)| sup(s, x)).collect();
    let (band, band_input) = bands.iter().map(|b| band_for(b, band_constant)).unzip();
    let last = t_end - period;
    let periodic_norm = (0..times.len())
        .filter(|&k| times[k] >= last)
        .map(|k| outputs.iter().zip(theta_star).map(|(s, x)| (s[k] - x).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    Ok(ConvergenceMetrics { tail_residual, tail_residual_input, band, band_input, periodic_norm })
}

/// Earliest time at which `|x(t)| > threshold` strictly, or a non-finite
/// sample appears.
pub fn divergence_detector(times: &[f64], series: &[f64], threshold: f64) -> Option<f64> {
    times.iter().zip(series).find(|(_, v)| !v.is_finite() || v.abs() > threshold).map(|(t, _)| *t)
}

/// Streaming version of the tail statistics, fed at full loop resolution.
#[derive(Debug, Clone)]
pub struct TailTracker {
    start: f64,
    star: Vec<f64>,
    pub sup_output: Vec<f64>,
    pub sup_input: Vec<f64>,
}

impl TailTracker {
    pub fn new(start: f64, star: Vec<f64>) -> Self {
        let n = star.len();
        Self { start, star, sup_output: vec![0.0; n], sup_input: vec![0.0; n] }
    }

    pub fn record(&mut self, t: f64, outputs: &[f64], inputs: &[f64]) {
        if t < self.start {
            return;
        }
        for i in 0..self.star.len() {
            self.sup_output[i] = self.sup_output[i].max((outputs[i] - self.star[i]).abs());
            self.sup_input[i] = self.sup_input[i].max((inputs[i] - self.star[i]).abs());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::duopoly;
    use approx::assert_abs_diff_eq;

    #[test]
    fn duopoly_hurwitz() {
        let g = duopoly(1.0).unwrap();
        let re = hurwitz_check(&g.hessian(), &[2.0, 5.0]).unwrap();
        // trace -70, det 750: eigenvalues -35 +/- sqrt(475).
        assert_abs_diff_eq!(re, -35.0 + 475f64.sqrt(), epsilon = 1e-9);
        assert_eq!(hurwitz_check(&g.hessian(), &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn small_gain_vanishes_with_eps() {
        let g = duopoly(1.0).unwrap();
        let r = small_gain_margin(&g, &[2.0, 5.0], &[30.0, 3.0], 1e-9, SmallGainConstants::default()).unwrap();
        assert!(r.pass && r.margin > 0.99);
        let m: Vec<f64> = [0.25, 0.5, 1.0]
            .iter()
            .map(|&e| small_gain_margin(&g, &[2.0, 5.0], &[30.0, 3.0], e, SmallGainConstants::default()).unwrap().margin)
            .collect();
        assert!(m[0] > m[1] && m[1] > m[2]);
    }

    #[test]
    fn epsilon_star_is_the_boundary() {
        let g = duopoly(1.0).unwrap();
        let (k, d) = ([0.01, 0.01], [1.0, 1.0]);
        let e = epsilon_star(&g, &k, &d, SmallGainConstants::default()).unwrap().unwrap();
        let c = SmallGainConstants::default();
        if e < 1.0 {
            assert!(small_gain_margin(&g, &k, &d, e, c).unwrap().pass);
            assert!(!small_gain_margin(&g, &k, &d, e + 1e-9, c).unwrap().pass);
        }
    }

    #[test]
    fn metrics_on_synthetic_series() {
        let dt = 0.01;
        let times: Vec<f64> = (0..=10000).map(|k| k as f64 * dt).collect();
        let a = 0.3;
        let s: Vec<f64> = times.iter().map(|t| 2.0 + a * (7.0 * t).sin()).collect();
        let band = BandSpec { a, omega: 7.0, heat_length: None };
        let m = convergence_metrics(&times, std::slice::from_ref(&s), std::slice::from_ref(&s), &[2.0], &[band], 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(m.tail_residual[0], a, epsilon = 1e-3);
        let decay: Vec<f64> = times.iter().map(|t| 2.0 + (-t).exp()).collect();
        let m = convergence_metrics(&times, std::slice::from_ref(&decay), std::slice::from_ref(&decay), &[2.0], &[band], 1.0, 1.0).unwrap();
        assert!(m.tail_residual[0] <= (-0.8f64 * 100.0).exp() + 1e-15);
        assert!(convergence_metrics(&times[..100], &[vec![0.0; 100]], &[vec![0.0; 100]], &[0.0], &[band], 1.0, 1.0).is_err());
    }

    #[test]
    fn divergence_threshold_is_strict() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(divergence_detector(&t, &[1.0, 2.0, 3.0], 10.0), None);
        assert_eq!(divergence_detector(&t, &[1.0, 10.0, 3.0], 10.0), None);
        assert_eq!(divergence_detector(&t, &[1.0, 10.5, 3.0], 10.0), Some(1.0));
        assert_eq!(divergence_detector(&t, &[1.0, f64::NAN, 3.0], 10.0), Some(1.0));
    }
}
