//! Closed-loop scenario runner, built-in catalog and exporters.

pub mod builtins;
pub mod config;
pub mod export;

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{band_for, stability_report, BandSpec, ConvergenceMetrics, SmallGainConstants, StabilityReport, TailTracker};
use crate::control::{Compensator, LawInputs};
use crate::dither::{demod_m, demod_n_game, demod_n_scalar, demod_time, FrequencySet, Probe};
use crate::error::{config, Error, Result};
use crate::estimate::{HessianTracker, Washout};
use crate::pde_sim::{delay_steps, snap_dt, Channel, ChannelKind};

pub use builtins::{builtin, builtin_scenarios};
pub use config::{Algorithm, EstimatorSpec, GainConvention, MapSpec, Numerics, PlayerSpec, ScenarioConfig, TrafficSpec};

/// Greenshields linearization `u = v_f (1 - 2 rho_r / rho_m)`, `D = L / u`.
pub fn traffic_linearize(vf: f64, rho_m: f64, rho_r: f64, length: f64) -> Result<(f64, f64)> {
    if !(vf > 0.0 && rho_m > 0.0 && length > 0.0 && rho_r >= 0.0) {
        return Err(config("traffic parameters must be positive"));
    }
    if rho_r >= 0.5 * rho_m {
        return Err(config(format!("reference density {rho_r} is not below the critical density {}", 0.5 * rho_m)));
    }
    let u = vf * (1.0 - 2.0 * rho_r / rho_m);
    Ok((u, length / u))
}

/// Sampled signals of one player.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PlayerSeries {
    /// Applied boundary input `theta_hat + S` (the flux for Stefan).
    pub theta: Vec<f64>,
    /// Propagated action at the map input.
    pub big_theta: Vec<f64>,
    pub y: Vec<f64>,
    pub g: Vec<f64>,
    pub h_hat: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub config_hash: String,
    /// The loop is deterministic; recorded for completeness.
    pub seed: u64,
    pub wall_time_s: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioResult {
    pub name: String,
    pub dt: f64,
    pub sample_dt: f64,
    /// Averaging period (s).
    pub period: f64,
    pub theta_star: Vec<f64>,
    pub times: Vec<f64>,
    pub players: Vec<PlayerSeries>,
    /// Full-resolution sup of `|Theta - Theta*|` and `|theta - Theta*|`
    /// over the last 20% of the simulated span.
    pub tail_output: Vec<f64>,
    pub tail_input: Vec<f64>,
    pub metrics: Option<ConvergenceMetrics>,
    pub stability: Option<StabilityReport>,
    /// First time the divergence detector fired; the run stops there.
    pub divergence: Option<f64>,
    /// Channel failure that ended the run early, if any.
    pub failure: Option<String>,
    pub meta: RunMeta,
}

impl ScenarioResult {
    pub fn converged_within(&self, tol: f64) -> bool {
        self.divergence.is_none() && self.failure.is_none() && self.tail_output.iter().all(|&r| r <= tol)
    }
}

/// Per-run command-line style overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub no_compensation: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(dt) = self.dt {
            cfg.numerics.dt = Some(dt);
        }
        if let Some(t) = self.t_end {
            cfg.numerics.t_end = t;
        }
        if self.no_compensation {
            cfg.compensation = false;
        }
    }
}

/// Step size actually used: the configured or recommended step, shrunk so
/// every transport delay is an integer number of steps.
pub fn resolve_dt(cfg: &ScenarioConfig) -> Result<f64> {
    let w_max = cfg.omegas().into_iter().fold(0.0, f64::max);
    let mut dt = match cfg.numerics.dt {
        Some(dt) => dt,
        None => cfg.players.iter().map(|p| p.channel.recommended_dt(cfg.numerics.cells, w_max)).fold(f64::INFINITY, f64::min),
    };
    let delays: Vec<f64> = cfg
        .players
        .iter()
        .filter_map(|p| match p.channel {
            ChannelKind::Transport { delay } => Some(delay),
            _ => None,
        })
        .collect();
    if let Some(&d) = delays.first() {
        dt = snap_dt(d, dt);
    }
    for &d in &delays {
        delay_steps(d, dt)?;
    }
    Ok(dt)
}

/// Characteristic delay or length per player, used by the small-gain check.
fn channel_scale(kind: &ChannelKind) -> f64 {
    match kind {
        ChannelKind::Direct | ChannelKind::Stefan { .. } => 0.0,
        ChannelKind::Transport { delay } => *delay,
        ChannelKind::Heat { length } | ChannelKind::Wave { length } | ChannelKind::WaveKv { length, .. } => *length,
        ChannelKind::Rad { .. } => 1.0,
        ChannelKind::VariableDelay { profile } => profile.max(),
        ChannelKind::DistributedDelay { cdf } => cdf.horizon(),
    }
}

pub fn config_hash(cfg: &ScenarioConfig) -> String {
    let mut h = DefaultHasher::new();
    cfg.to_json().hash(&mut h);
    format!("{:016x}", h.finish())
}

/// Stability report for game maps; `None` for scalar maps.
pub fn check(cfg: &ScenarioConfig) -> Result<Option<StabilityReport>> {
    cfg.validate()?;
    match &cfg.map {
        MapSpec::Game { game } => {
            let d: Vec<f64> = cfg.players.iter().map(|p| channel_scale(&p.channel)).collect();
            Ok(Some(stability_report(game, &cfg.effective_gains(), &d, SmallGainConstants::default())?))
        }
        MapSpec::Scalar { .. } => Ok(None),
    }
}

struct Player {
    probe: Probe,
    channel: Channel,
    comp: Compensator,
    washout: Option<Washout>,
    tracker: HessianTracker,
    theta_hat: f64,
    is_stefan: bool,
}

/// Run one scenario to `t_end` or until divergence.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    let started = Instant::now();
    cfg.validate()?;
    let dt = resolve_dt(cfg)?;
    let n = cfg.players.len();
    let cells = cfg.numerics.cells;
    let gains = cfg.effective_gains();
    let omegas = cfg.omegas();
    let period = FrequencySet::from_frequencies(&omegas)?.period;
    let theta_star = cfg.map.optimum()?;
    let game = matches!(cfg.map, MapSpec::Game { .. });

    let mut players = Vec::with_capacity(n);
    for (p, &k) in cfg.players.iter().zip(&gains) {
        let probe = Probe::new(&p.probe, &p.channel)?;
        let mut spec = p.controller.clone();
        spec.k = k;
        spec.uncompensated |= !cfg.compensation;
        let comp = Compensator::new(&spec, &p.channel, cells, dt)?;
        let is_stefan = matches!(p.channel, ChannelKind::Stefan { .. });
        let mut channel = Channel::new(&p.channel, cells, dt, p.theta0)?;
        let th0 = p.theta0;
        channel.fill_history(dt, |t| th0 + probe.value(t));
        if is_stefan {
            channel.set_profile(|x| probe.profile(x, 0.0), probe.value(0.0));
        } else {
            channel.set_profile(
                |x| {
                    let (b, bt) = probe.profile(x, 0.0);
                    (th0 + b, bt)
                },
                th0,
            );
        }
        players.push(Player {
            probe,
            channel,
            comp,
            washout: cfg.estimator.washout.map(Washout::new),
            tracker: HessianTracker::new(cfg.estimator.hessian_corner, cfg.estimator.hessian_init, cfg.estimator.clamp),
            theta_hat: th0,
            is_stefan,
        });
    }

    let t_end = cfg.numerics.t_end;
    let steps = (t_end / dt).round() as usize;
    let w_max = omegas.iter().copied().fold(0.0, f64::max);
    let stride = ((2.0 * PI / w_max) / (cfg.numerics.samples_per_period.max(1) as f64 * dt)).floor().max(1.0) as usize;
    let star_norm = theta_star.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let threshold = 1e3 * star_norm;

    let mut series = vec![PlayerSeries::default(); n];
    let mut times = Vec::with_capacity(steps / stride + 2);
    let mut tail = TailTracker::new(0.8 * t_end, theta_star.clone());
    let mut big = vec![0.0; n];
    let mut applied = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut divergence = None;
    let mut failure = None;

    'outer: for it in 0..=steps {
        let t = it as f64 * dt;
        for (i, p) in players.iter().enumerate() {
            big[i] = p.channel.output();
            applied[i] = if p.is_stefan { p.comp.output() + p.probe.value(t) } else { p.theta_hat + p.probe.value(t) };
        }
        if big.iter().any(|v| !v.is_finite() || v.abs() > threshold) {
            divergence = Some(t);
            break;
        }
        cfg.map.evaluate(&big, &mut y);
        tail.record(t, &big, &applied);
        let record = it % stride == 0;
        if record {
            times.push(t);
        }
        for (i, p) in players.iter_mut().enumerate() {
            let yi = match p.washout.as_mut() {
                Some(w) => w.apply(y[i], dt),
                None => y[i],
            };
            let a = p.probe.a;
            let w = p.probe.omega;
            let tau = demod_time(p.probe.kind(), t);
            // A switched-off probe demodulates to nothing.
            let (m, nn) = if a == 0.0 {
                (0.0, 0.0)
            } else if game {
                (demod_m(a, w, tau), demod_n_game(a, w, tau))
            } else {
                (demod_m(a, w, tau), demod_n_scalar(a, w, tau))
            };
            let (g, u) = match cfg.algorithm {
                Algorithm::Compensated => {
                    let g = m * yi;
                    let h = p.tracker.step(nn * yi, dt);
                    let inp = LawInputs { t, g, h_hat: h, theta_hat: p.theta_hat, output: big[i], probe: &p.probe, channel: &p.channel };
                    match p.comp.update(&inp) {
                        Ok(u) => (g, u),
                        Err(e) => {
                            failure = Some(e.to_string());
                            break 'outer;
                        }
                    }
                }
                Algorithm::BaselineEs => {
                    let g = m * yi;
                    (g, gains[i] * g)
                }
                Algorithm::BaselineNes => {
                    let mu = a * (w * t).sin();
                    (mu * yi, gains[i] * mu * yi)
                }
            };
            if record {
                let s = &mut series[i];
                s.theta.push(applied[i]);
                s.big_theta.push(big[i]);
                s.y.push(y[i]);
                s.g.push(g);
                s.h_hat.push(p.tracker.value());
                s.u.push(u);
            }
            if it == steps {
                continue;
            }
            let next = t + dt;
            let input = if p.is_stefan {
                u + p.probe.value(next)
            } else {
                p.theta_hat += dt * u;
                p.theta_hat + p.probe.value(next)
            };
            if let Err(e) = p.channel.advance(input) {
                failure = Some(e.to_string());
                break 'outer;
            }
        }
    }
    // A run cut short mid-step may leave one player's sample unpushed.
    let len = series.iter().map(|s| s.u.len()).min().unwrap_or(0);
    times.truncate(len);
    for s in &mut series {
        for v in [&mut s.theta, &mut s.big_theta, &mut s.y, &mut s.g, &mut s.h_hat, &mut s.u] {
            v.truncate(len);
        }
    }

    let bands: Vec<BandSpec> = cfg
        .players
        .iter()
        .map(|p| BandSpec {
            a: p.probe.a,
            omega: p.probe.omega,
            heat_length: match p.channel {
                ChannelKind::Heat { length } => Some(length),
                _ => None,
            },
        })
        .collect();
    let complete = divergence.is_none() && failure.is_none();
    let metrics = if complete && t_end >= 5.0 * period {
        let (band, band_input) = bands.iter().map(|b| band_for(b, cfg.band_constant)).unzip();
        let last = t_end - period;
        let periodic_norm = (0..times.len())
            .filter(|&k| times[k] >= last)
            .map(|k| series.iter().zip(&theta_star).map(|(s, x)| (s.big_theta[k] - x).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        Some(ConvergenceMetrics {
            tail_residual: tail.sup_output.clone(),
            tail_residual_input: tail.sup_input.clone(),
            band,
            band_input,
            periodic_norm,
        })
    } else {
        None
    };
    let stability = match check(cfg) {
        Ok(s) => s,
        Err(Error::Singular(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ScenarioResult {
        name: cfg.name.clone(),
        dt,
        sample_dt: stride as f64 * dt,
        period,
        theta_star,
        times,
        players: series,
        tail_output: tail.sup_output,
        tail_input: tail.sup_input,
        metrics,
        stability,
        divergence,
        failure,
        meta: RunMeta { config_hash: config_hash(cfg), seed: 0, wall_time_s: started.elapsed().as_secs_f64(), steps },
    })
}

/// Sweepable parameters.
pub fn with_param(cfg: &ScenarioConfig, param: &str, value: f64) -> Result<ScenarioConfig> {
    let mut c = cfg.clone();
    match param {
        "epsilon" => match &mut c.map {
            MapSpec::Game { game } => *game = game.with_epsilon(value)?,
            MapSpec::Scalar { .. } => return Err(config("epsilon applies to game maps only")),
        },
        "t_end" => c.numerics.t_end = value,
        "dt" => c.numerics.dt = Some(value),
        _ => return Err(config(format!("unknown sweep parameter '{param}' (epsilon, t_end, dt)"))),
    }
    c.name = format!("{}-{param}-{value}", cfg.name);
    Ok(c)
}

/// Run one scenario per value, in parallel; results keep the input order.
pub fn sweep(cfg: &ScenarioConfig, param: &str, values: &[f64]) -> Result<Vec<ScenarioResult>> {
    let cfgs = values.iter().map(|&v| with_param(cfg, param, v)).collect::<Result<Vec<_>>>()?;
    cfgs.par_iter().map(run_scenario).collect()
}
