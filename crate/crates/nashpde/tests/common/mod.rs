#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use nashpde::dither::{Probe, ProbeSpec};
use nashpde::pde_sim::{Channel, ChannelKind};

/// Least-squares sinusoid fit at `omega`: amplitude and phase of `v - mean`.
pub fn fit_sine(t: &[f64], v: &[f64], omega: f64) -> (f64, f64) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let (mut ss, mut cc, mut sc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &y) in t.iter().zip(v) {
        let (s, c) = (omega * t).sin_cos();
        ss += s * s;
        cc += c * c;
        sc += s * c;
        ys += (y - mean) * s;
        yc += (y - mean) * c;
    }
    let det = ss * cc - sc * sc;
    let a = (ys * cc - yc * sc) / det;
    let b = (yc * ss - ys * sc) / det;
    (a.hypot(b), b.atan2(a))
}

/// Drive a channel with its motion-planning probe from the matching
/// initial state and return `(amplitude, phase)` of the output over the
/// last `periods` periods of `t_end`.
pub fn round_trip(kind: &ChannelKind, a: f64, omega: f64, cells: usize, dt: f64, t_end: f64, periods: f64) -> (f64, f64) {
    let probe = Probe::new(&ProbeSpec::new(a, omega), kind).unwrap();
    let stefan = matches!(kind, ChannelKind::Stefan { .. });
    let mut ch = Channel::new(kind, cells, dt, 0.0).unwrap();
    ch.fill_history(dt, |t| probe.value(t));
    if stefan {
        ch.set_profile(|x| probe.profile(x, 0.0), probe.value(0.0));
    } else {
        ch.set_profile(|x| probe.profile(x, 0.0), 0.0);
    }
    let steps = (t_end / dt).round() as usize;
    let start = t_end - periods * 2.0 * PI / omega;
    let (mut ts, mut vs) = (Vec::new(), Vec::new());
    for it in 0..steps {
        let t = it as f64 * dt;
        if t >= start {
            ts.push(t);
            vs.push(ch.output());
        }
        ch.advance(probe.value(t + dt)).unwrap();
    }
    fit_sine(&ts, &vs, omega)
}

/// Wrap a phase difference into `(-pi, pi]`.
pub fn wrap(p: f64) -> f64 {
    let mut p = p % (2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

use nashpde::game::{QuadraticGame, QuadraticPayoff};
use nashpde::dither::{demod_m, demod_n_game};
use nashpde::estimate::{gradient_estimate, hessian_estimate, windowed_average};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random strictly row-dominant quadratic game with `n` players.
pub fn random_game(seed: u64, n: usize) -> QuadraticGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut payoffs = Vec::with_capacity(n);
    for i in 0..n {
        let mut h = vec![vec![0.0f64; n]; n];
        for j in 0..n {
            for k in j..n {
                let v = rng.gen_range(-3.0..3.0);
                h[j][k] = v;
                h[k][j] = v;
            }
        }
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| h[i][j].abs()).sum();
        h[i][i] = -(off + rng.gen_range(0.5..5.0));
        let h_lin = (0..n).map(|_| rng.gen_range(-20.0..20.0)).collect();
        payoffs.push(QuadraticPayoff { owner: i, h_quad: h, h_lin, c: rng.gen_range(-100.0..100.0) });
    }
    QuadraticGame::new(payoffs, 1.0).unwrap()
}

/// Grid best responses on `theta* +- 10`, 401 points per axis; returns the
/// grid pair closest to being a mutual best response.
pub fn grid_fixed_point(g: &QuadraticGame, star: &[f64]) -> (f64, f64, f64) {
    let n = 401;
    let h = 20.0 / (n - 1) as f64;
    let x: Vec<f64> = (0..n).map(|k| star[0] - 10.0 + h * k as f64).collect();
    let y: Vec<f64> = (0..n).map(|k| star[1] - 10.0 + h * k as f64).collect();
    let argmax = |f: &dyn Fn(usize) -> f64| (0..n).max_by(|&a, &b| f(a).total_cmp(&f(b))).unwrap();
    let br1: Vec<usize> = (0..n).map(|j| argmax(&|i| g.payoffs_at(&[x[i], y[j]]).unwrap()[0])).collect();
    let br2: Vec<usize> = (0..n).map(|i| argmax(&|j| g.payoffs_at(&[x[i], y[j]]).unwrap()[1])).collect();
    let mut best = (usize::MAX, 0, 0);
    for i in 0..n {
        for j in 0..n {
            let score = i.abs_diff(br1[j]) + j.abs_diff(br2[i]);
            if score < best.0 {
                best = (score, i, j);
            }
        }
    }
    (x[best.1], y[best.2], h)
}

/// Frozen actions, static map: Pi-window averages of `N y` and `M y`.
pub fn frozen_estimates(g: &QuadraticGame, theta: &[f64], a: &[f64], w: &[f64], period: f64) -> (Vec<f64>, Vec<f64>) {
    let n = g.players();
    let dt = period / 20_000.0;
    let steps = 20_000;
    let mut gs = vec![Vec::with_capacity(steps + 1); n];
    let mut hs = vec![Vec::with_capacity(steps + 1); n];
    let mut big = vec![0.0; n];
    for it in 0..=steps {
        let t = it as f64 * dt;
        for i in 0..n {
            big[i] = theta[i] + a[i] * (w[i] * t).sin();
        }
        let y = g.payoffs_at(&big).unwrap();
        for i in 0..n {
            gs[i].push(gradient_estimate(y[i], demod_m(a[i], w[i], t)));
            hs[i].push(hessian_estimate(y[i], demod_n_game(a[i], w[i], t)));
        }
    }
    let avg = |v: &Vec<Vec<f64>>| v.iter().map(|s| windowed_average(s, dt, period).unwrap()).collect();
    (avg(&gs), avg(&hs))
}
