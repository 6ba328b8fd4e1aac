//! Named, fully parameterized scenarios.

use crate::control::CompensatorSpec;
use crate::dither::ProbeSpec;
use crate::error::{config, Result};
use crate::game::{duopoly, market_duopoly, QuadraticGame, QuadraticPayoff};
use crate::pde_sim::{ChannelKind, DelayProfile, LagCdf};

use super::config::*;

/// Default scalar map: `y = -(Theta - 1)^2`.
const SCALAR_H: f64 = -2.0;
const SCALAR_STAR: f64 = 1.0;
/// Tail tolerance declared by the scalar class scenarios.
pub const SCALAR_TOLERANCE: f64 = 0.2;

/// The two-firm transport/heat duopoly at coupling `eps`.
pub fn duopoly_hetero(eps: f64) -> Result<ScenarioConfig> {
    let player = |channel, a, w, k, theta0| PlayerSpec {
        channel,
        probe: ProbeSpec::new(a, w),
        controller: CompensatorSpec::new(k, Some(100.0)),
        theta0,
    };
    Ok(ScenarioConfig {
        name: "duopoly-hetero".into(),
        description: "Two players, transport delay D1 = 30 s and heat channel D2 = 3, coupling eps".into(),
        map: MapSpec::Game { game: duopoly(eps)? },
        players: vec![
            player(ChannelKind::Transport { delay: 30.0 }, 0.075, 26.75, 2.0, 50.0),
            player(ChannelKind::Heat { length: 3.0 }, 0.05, 22.0, 5.0, 110.0 / 3.0),
        ],
        numerics: Numerics { dt: None, cells: 100, t_end: 500.0, samples_per_period: 20 },
        // A slow Hessian filter keeps the start-up transient from inflating
        // the estimate; at 0.01 the smaller eps runs never recover.
        estimator: EstimatorSpec { hessian_corner: Some(0.003), ..EstimatorSpec::default() },
        gain_convention: GainConvention::DitherPower,
        algorithm: Algorithm::Compensated,
        compensation: true,
        traffic: None,
        tail_tolerance: Some(1.0),
        band_constant: 1.0,
    })
}

/// Game with `H_ii = -diag`, `H_ij = coupling` and Nash point `star`.
pub fn symmetric_game(star: &[f64], diag: f64, coupling: f64) -> Result<QuadraticGame> {
    let n = star.len();
    let payoffs = (0..n)
        .map(|i| {
            let mut h = vec![vec![0.0; n]; n];
            h[i][i] = -diag;
            for j in (0..n).filter(|&j| j != i) {
                h[i][j] = coupling;
                h[j][i] = coupling;
            }
            // Own linear term from H theta* = -h; the rest are zero.
            let hi = diag * star[i] - coupling * (0..n).filter(|&j| j != i).map(|j| star[j]).sum::<f64>();
            let mut lin = vec![0.0; n];
            lin[i] = hi;
            QuadraticPayoff { owner: i, h_quad: h, h_lin: lin, c: 0.0 }
        })
        .collect();
    QuadraticGame::new(payoffs, 1.0)
}

fn scalar(name: &str, description: &str, channel: ChannelKind, probe: ProbeSpec, controller: CompensatorSpec, numerics: Numerics) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        description: description.into(),
        map: MapSpec::Scalar { h: SCALAR_H, theta_star: SCALAR_STAR, y_star: 0.0 },
        estimator: EstimatorSpec { hessian_corner: Some(0.1), ..EstimatorSpec::default() },
        players: vec![PlayerSpec { channel, probe, controller, theta0: 0.0 }],
        numerics,
        gain_convention: GainConvention::Direct,
        algorithm: Algorithm::Compensated,
        compensation: true,
        traffic: None,
        tail_tolerance: Some(SCALAR_TOLERANCE),
        band_constant: 1.0,
    }
}

fn numerics(dt: Option<f64>, cells: usize, t_end: f64) -> Numerics {
    Numerics { dt, cells, t_end, samples_per_period: 20 }
}

fn multi(name: &str, description: &str, game: QuadraticGame, players: Vec<PlayerSpec>, t_end: f64, dt: Option<f64>) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        description: description.into(),
        map: MapSpec::Game { game },
        estimator: EstimatorSpec { hessian_corner: Some(0.1), ..EstimatorSpec::default() },
        players,
        numerics: numerics(dt, 50, t_end),
        gain_convention: GainConvention::Direct,
        algorithm: Algorithm::Compensated,
        compensation: true,
        traffic: None,
        tail_tolerance: Some(SCALAR_TOLERANCE),
        band_constant: 1.0,
    }
}

/// Every built-in scenario, in catalog order.
pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    let mut v = vec![duopoly_hetero(1.0).expect("duopoly is well formed")];
    let k = |k: f64, c: f64| CompensatorSpec::new(k, Some(c));

    let star = [1.0, 2.0, 3.0];
    let wn = crate::dither::select_frequencies(3, 10.0).expect("ladder has room").frequencies();
    v.push(multi(
        "nplayer-heat",
        "Three players, each behind a unit heat channel",
        symmetric_game(&star, 4.0, 1.0).expect("game is well formed"),
        (0..3)
            .map(|i| PlayerSpec {
                channel: ChannelKind::Heat { length: 1.0 },
                probe: ProbeSpec::new(0.05, wn[i]),
                controller: k(0.1, 20.0),
                theta0: 0.0,
            })
            .collect(),
        120.0,
        Some(2e-4),
    ));
    v.push(multi(
        "nplayer-delay",
        "Three players with transport delays 1, 2 and 3 s",
        symmetric_game(&star, 4.0, 1.0).expect("game is well formed"),
        (0..3)
            .map(|i| PlayerSpec {
                channel: ChannelKind::Transport { delay: (i + 1) as f64 },
                probe: ProbeSpec::new(0.05, wn[i]),
                controller: k(0.05, 5.0),
                theta0: 0.0,
            })
            .collect(),
        250.0,
        None,
    ));

    let p = |a: f64, w: f64| ProbeSpec::new(a, w);
    v.push(scalar("delay-es", "Scalar ES through a 1 s transport delay", ChannelKind::Transport { delay: 1.0 }, p(0.05, 10.0), k(0.25, 10.0), numerics(None, 100, 80.0)));
    v.push(scalar("heat-es", "Scalar ES through a unit heat channel", ChannelKind::Heat { length: 1.0 }, p(0.05, 10.0), k(0.25, 10.0), numerics(None, 50, 80.0)));
    v.push(scalar(
        "rad-es",
        "Scalar ES through a reaction-advection-diffusion channel (eps = 1, b = 2, lambda = 0)",
        ChannelKind::Rad { diffusivity: 1.0, advection: 2.0, reaction: 0.0 },
        p(0.05, 10.0),
        k(0.25, 10.0),
        numerics(None, 50, 80.0),
    ));
    v.push(scalar("wave-es", "Scalar ES through an undamped string", ChannelKind::Wave { length: 1.0 }, p(0.05, 2.0), k(0.2, 10.0), numerics(None, 100, 300.0)));
    v.push(scalar(
        "wave-kv-es",
        "Scalar ES through a Kelvin-Voigt damped string",
        ChannelKind::WaveKv { length: 1.0, damping: 0.5 },
        p(0.05, 4.0),
        k(0.25, 10.0),
        numerics(None, 100, 80.0),
    ));
    v.push(scalar(
        "variable-delay-es",
        "Scalar ES through the delay D(t) = 1 + 0.2 sin(0.5 t)",
        ChannelKind::VariableDelay { profile: DelayProfile { mean: 1.0, amplitude: 0.2, frequency: 0.5 } },
        p(0.05, 10.0),
        k(0.25, 10.0),
        numerics(None, 100, 80.0),
    ));
    v.push(scalar(
        "distributed-delay-es",
        "Scalar ES through a delay uniformly distributed on [0, 1] s",
        ChannelKind::DistributedDelay { cdf: LagCdf::uniform(1.0) },
        p(0.05, 10.0),
        k(0.25, 10.0),
        numerics(None, 100, 80.0),
    ));
    v.push(scalar(
        "stefan-es",
        "Interface-position ES on a one-phase Stefan problem",
        ChannelKind::Stefan { s0: 0.5, cap: 3.0 },
        p(0.05, 1.0),
        k(0.25, 10.0),
        numerics(Some(2e-3), 50, 150.0),
    ));
    let mut kv = scalar(
        "wave-kv-source-seek",
        "Source seeking at the tip of a damped cable, map peak at 2",
        ChannelKind::WaveKv { length: 1.0, damping: 0.3 },
        p(0.1, 5.0),
        k(0.3, 10.0),
        numerics(None, 100, 150.0),
    );
    kv.map = MapSpec::Scalar { h: -1.0, theta_star: 2.0, y_star: 1.0 };
    v.push(kv);

    v.push(traffic_bottleneck());

    let mut es = scalar("baseline-es", "Classical ES on a static map", ChannelKind::Direct, p(0.1, 50.0), CompensatorSpec::new(1.0, None), numerics(None, 100, 40.0));
    es.algorithm = Algorithm::BaselineEs;
    v.push(es);

    let market = market_duopoly(1.0, 1.0, 1.0, 1.0).expect("market is well formed");
    let mut nes = multi(
        "baseline-duopoly",
        "Two-firm price competition, m1 = m2 = 1, Sd = 1, p = 1",
        market,
        [(1.0, 26.75), (1.0, 22.0)]
            .iter()
            .map(|&(u0, w)| PlayerSpec { channel: ChannelKind::Direct, probe: p(0.1, w), controller: CompensatorSpec::new(100.0, None), theta0: u0 })
            .collect(),
        60.0,
        None,
    );
    nes.algorithm = Algorithm::BaselineNes;
    v.push(nes);
    v
}

/// Ramp-metering ES on a Greenshields freeway section. Density in veh/km,
/// flow in veh/s.
pub fn traffic_bottleneck() -> ScenarioConfig {
    let jam = 160.0;
    let tr = TrafficSpec { free_speed: 30.0, jam_density: jam, reference_density: 40.0, length: 600.0 };
    let mut cfg = scalar(
        "traffic-bottleneck",
        "Outflow maximization through the freeway transport delay L/u",
        ChannelKind::Transport { delay: 1.0 },
        ProbeSpec::new(1.0, 0.5),
        CompensatorSpec::new(4.0, Some(1.0)),
        numerics(None, 100, 1500.0),
    );
    cfg.map = MapSpec::Scalar { h: -0.005, theta_star: 0.2 * jam, y_star: 0.5 };
    cfg.players[0].theta0 = tr.reference_density;
    cfg.traffic = Some(tr);
    cfg.tail_tolerance = Some(2.0);
    cfg.estimator.hessian_corner = Some(0.01);
    // The probe is slow here; the washout must sit below it.
    cfg.estimator.washout = Some(0.05);
    cfg.resolve().expect("traffic parameters are in free flow");
    cfg
}

/// Look up a built-in by name. `duopoly-hetero` accepts an `@eps` suffix.
pub fn builtin(name: &str) -> Result<ScenarioConfig> {
    if let Some(eps) = name.strip_prefix("duopoly-hetero@") {
        let e: f64 = eps.parse().map_err(|_| config(format!("bad coupling in '{name}'")))?;
        let mut c = duopoly_hetero(e)?;
        c.name = format!("duopoly-hetero-eps{e}");
        return Ok(c);
    }
    builtin_scenarios()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| config(format!("no built-in scenario named '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_valid() {
        let all = builtin_scenarios();
        assert!(all.len() >= 12);
        for c in &all {
            c.validate().unwrap_or_else(|e| panic!("{}: {e}", c.name));
        }
        let mut names: Vec<_> = all.iter().map(|c| c.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), all.len());
    }

    #[test]
    fn symmetric_game_hits_its_star() {
        let g = symmetric_game(&[1.0, 2.0, 3.0], 4.0, 1.0).unwrap();
        let x = g.nash_equilibrium().unwrap();
        for (a, b) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn traffic_delay_matches_linearization() {
        let c = traffic_bottleneck();
        assert_eq!(c.players[0].channel, ChannelKind::Transport { delay: 40.0 });
    }
}
