//! Scenario configuration. Everything here round-trips through JSON; the
//! units of each field are noted on the field.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::CompensatorSpec;
use crate::dither::ProbeSpec;
use crate::error::{config, Error, Result};
use crate::game::QuadraticGame;
use crate::pde_sim::ChannelKind;

/// The unknown static map behind the actuation channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MapSpec {
    /// N-player quadratic game; player `i` measures `J_i`.
    Game { game: QuadraticGame },
    /// Single-player map `y = y_star + (h / 2) (Theta - theta_star)^2`.
    Scalar { h: f64, theta_star: f64, #[serde(default)] y_star: f64 },
}

impl MapSpec {
    pub fn players(&self) -> usize {
        match self {
            MapSpec::Game { game } => game.players(),
            MapSpec::Scalar { .. } => 1,
        }
    }

    /// Map outputs at the propagated actions.
    pub fn evaluate(&self, theta: &[f64], out: &mut [f64]) {
        match self {
            MapSpec::Game { game } => {
                for (i, p) in game.payoffs.iter().enumerate() {
                    out[i] = crate::game::eval_unchecked(p, game.epsilon, theta);
                }
            }
            MapSpec::Scalar { h, theta_star, y_star } => {
                let e = theta[0] - theta_star;
                out[0] = y_star + 0.5 * h * e * e;
            }
        }
    }

    pub fn optimum(&self) -> Result<Vec<f64>> {
        match self {
            MapSpec::Game { game } => game.nash_equilibrium(),
            MapSpec::Scalar { theta_star, .. } => Ok(vec![*theta_star]),
        }
    }

    /// Own curvature `H_ii` of each player.
    pub fn own_curvature(&self) -> Vec<f64> {
        match self {
            MapSpec::Game { game } => game.payoffs.iter().enumerate().map(|(i, p)| p.h_quad[i][i]).collect(),
            MapSpec::Scalar { h, .. } => vec![*h],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSpec {
    pub channel: ChannelKind,
    pub probe: ProbeSpec,
    pub controller: CompensatorSpec,
    /// Initial integrator state `theta_hat(0)` (action units). For the
    /// Stefan channel the action is the interface position and this field
    /// is unused; the interface starts at `s0`.
    pub theta0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    /// Time step (s); derived from the channels and probes when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Grid cells of distributed channels.
    #[serde(default = "default_cells")]
    pub cells: usize,
    /// Horizon (s).
    pub t_end: f64,
    /// Export samples per period of the fastest probe.
    #[serde(default = "default_samples")]
    pub samples_per_period: usize,
}

fn default_cells() -> usize {
    100
}

fn default_samples() -> usize {
    20
}

/// How `k` enters the law. `DitherPower` scales it by `a^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GainConvention {
    #[default]
    Direct,
    DitherPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    /// Corner (rad/s) of the washout applied to `y` before demodulation;
    /// `None` feeds the raw payoff.
    #[serde(default = "default_washout")]
    pub washout: Option<f64>,
    /// Corner (rad/s) of the low-pass on `N y`; `None` uses it raw.
    #[serde(default = "default_hessian_corner")]
    pub hessian_corner: Option<f64>,
    #[serde(default)]
    pub hessian_init: f64,
    /// Keep the running Hessian estimate nonpositive.
    #[serde(default = "yes")]
    pub clamp: bool,
}

fn default_washout() -> Option<f64> {
    Some(10.0)
}

fn default_hessian_corner() -> Option<f64> {
    Some(0.01)
}

fn yes() -> bool {
    true
}

impl Default for EstimatorSpec {
    fn default() -> Self {
        Self { washout: default_washout(), hessian_corner: default_hessian_corner(), hessian_init: 0.0, clamp: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Per-class compensated law.
    #[default]
    Compensated,
    /// `u_hat' = k M y` on a static map.
    BaselineEs,
    /// `u_hat' = k mu J` with `mu = a sin(w t)`.
    BaselineNes,
}

/// Greenshields free-flow linearization; sets the transport delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficSpec {
    /// Free-flow speed (m/s).
    pub free_speed: f64,
    /// Jam density (veh/km).
    pub jam_density: f64,
    /// Reference density (veh/km).
    pub reference_density: f64,
    /// Road length (m).
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub map: MapSpec,
    pub players: Vec<PlayerSpec>,
    pub numerics: Numerics,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub gain_convention: GainConvention,
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default = "yes")]
    pub compensation: bool,
    #[serde(default)]
    pub traffic: Option<TrafficSpec>,
    /// Acceptable tail residual of `Theta` (action units), if declared.
    #[serde(default)]
    pub tail_tolerance: Option<f64>,
    /// Prefactor of the `|a| + 1/w` band.
    #[serde(default = "default_band")]
    pub band_constant: f64,
}

fn default_band() -> f64 {
    1.0
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Apply derived settings (the traffic delay) in place.
    pub fn resolve(&mut self) -> Result<()> {
        if let Some(tr) = self.traffic {
            let (_, delay) = super::traffic_linearize(tr.free_speed, tr.jam_density, tr.reference_density, tr.length)?;
            for p in &mut self.players {
                match &mut p.channel {
                    ChannelKind::Transport { delay: d } => *d = delay,
                    _ => return Err(config("traffic scenarios need a transport channel")),
                }
            }
        }
        Ok(())
    }

    /// Effective adaptation gains after the gain convention.
    pub fn effective_gains(&self) -> Vec<f64> {
        self.players
            .iter()
            .map(|p| match self.gain_convention {
                GainConvention::Direct => p.controller.k,
                GainConvention::DitherPower => p.controller.k * p.probe.a * p.probe.a / 2.0,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.map.players();
        if self.players.len() != n {
            return Err(config(format!("map has {n} players, config lists {}", self.players.len())));
        }
        if let MapSpec::Game { game } = &self.map {
            game.nash_equilibrium()?;
        }
        if let MapSpec::Scalar { h, .. } = self.map {
            if !(h < 0.0) {
                return Err(config("scalar map must be strictly concave (h < 0)"));
            }
        }
        for p in &self.players {
            p.channel.validate()?;
            p.probe.validate()?;
            p.controller.validate()?;
            if self.algorithm != Algorithm::Compensated && p.channel != ChannelKind::Direct {
                return Err(config("baseline algorithms run on a static map (direct channel)"));
            }
        }
        if !(self.numerics.t_end > 0.0) {
            return Err(config("t_end must be positive"));
        }
        if let Some(dt) = self.numerics.dt {
            if !(dt > 0.0) {
                return Err(config("dt must be positive"));
            }
        }
        if self.numerics.cells < 3 {
            return Err(config("distributed channels need at least 3 cells"));
        }
        if n > 1 {
            let fs = crate::dither::FrequencySet::from_frequencies(&self.omegas());
            fs?;
        }
        Ok(())
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.players.iter().map(|p| p.probe.omega).collect()
    }
}
