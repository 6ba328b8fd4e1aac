//! CSV, manifest, report and SVG writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{ScenarioConfig, ScenarioResult};
use crate::error::{Error, Result};

/// Exported signals: CSV column stem, SVG file slug and unit.
pub const SIGNALS: [(&str, &str, &str); 6] = [
    ("theta", "input", "action"),
    ("Theta", "action", "action"),
    ("y", "payoff", "payoff"),
    ("G", "gradient", "payoff/action"),
    ("H", "hessian", "payoff/action^2"),
    ("U", "control", "action/s"),
];

fn column<'a>(r: &'a ScenarioResult, i: usize, sig: &str) -> &'a [f64] {
    let p = &r.players[i];
    match sig {
        "theta" => &p.theta,
        "Theta" => &p.big_theta,
        "y" => &p.y,
        "G" => &p.g,
        "H" => &p.h_hat,
        _ => &p.u,
    }
}

/// One row per sample; the header carries units in brackets.
pub fn to_csv(r: &ScenarioResult) -> String {
    let mut s = String::from("t [s]");
    for i in 0..r.players.len() {
        for (sig, _, unit) in SIGNALS {
            let _ = write!(s, ",{sig}_{} [{unit}]", i + 1);
        }
    }
    s.push('\n');
    for (k, t) in r.times.iter().enumerate() {
        let _ = write!(s, "{t:.6}");
        for i in 0..r.players.len() {
            for (sig, _, _) in SIGNALS {
                let _ = write!(s, ",{:.9e}", column(r, i, sig)[k]);
            }
        }
        s.push('\n');
    }
    s
}

pub fn manifest(cfg: &ScenarioConfig, r: &ScenarioResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", cfg.name);
    let _ = writeln!(s, "config_hash: {}", r.meta.config_hash);
    let _ = writeln!(s, "seed: {}", r.meta.seed);
    let _ = writeln!(s, "dt: {:e}", r.dt);
    let _ = writeln!(s, "sample_dt: {:e}", r.sample_dt);
    let _ = writeln!(s, "steps: {}", r.meta.steps);
    let _ = writeln!(s, "cells: {}", cfg.numerics.cells);
    let _ = writeln!(s, "t_end: {}", cfg.numerics.t_end);
    let _ = writeln!(s, "averaging_period: {:.9}", r.period);
    let _ = writeln!(s, "integrator: explicit Euler on theta_hat, exact exponential filters");
    let _ = writeln!(s, "resolved config:");
    s.push_str(&cfg.to_json());
    s.push('\n');
    s
}

pub fn report(cfg: &ScenarioConfig, r: &ScenarioResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", r.name);
    if !cfg.description.is_empty() {
        let _ = writeln!(s, "{}", cfg.description);
    }
    let _ = writeln!(s, "target: {:?}", r.theta_star);
    let _ = writeln!(s, "wall time: {:.3} s", r.meta.wall_time_s);
    match (r.divergence, &r.failure) {
        (Some(t), _) => {
            let _ = writeln!(s, "DIVERGED at t = {t:.3} s");
        }
        (None, Some(msg)) => {
            let _ = writeln!(s, "STOPPED: {msg}");
        }
        _ => {}
    }
    for i in 0..r.players.len() {
        let _ = writeln!(s, "player {}: tail |Theta - Theta*| = {:.6}, tail |theta - Theta*| = {:.6}", i + 1, r.tail_output[i], r.tail_input[i]);
    }
    if let Some(m) = &r.metrics {
        let _ = writeln!(s, "band (|a| + 1/w): {:?}", m.band);
        let _ = writeln!(s, "input band: {:?}", m.band_input);
        let _ = writeln!(s, "periodic norm over final period: {:.6}", m.periodic_norm);
    }
    if let Some(tol) = cfg.tail_tolerance {
        let ok = r.converged_within(tol);
        let _ = writeln!(s, "tail tolerance {tol}: {}", if ok { "met" } else { "not met" });
    }
    if let Some(st) = &r.stability {
        let _ = writeln!(s, "diagonal dominance: {} margins {:?}", st.dominance.pass, st.dominance.margins);
        let _ = writeln!(s, "max Re eig(KH): {:.6e}", st.hurwitz_max_re);
        let _ = writeln!(s, "small-gain margin at eps = {}: {:.6} ({})", st.small_gain.epsilon, st.small_gain.margin, if st.small_gain.pass { "pass" } else { "fail" });
        match st.epsilon_star {
            Some(e) => {
                let _ = writeln!(s, "largest passing eps: {e:.6}");
            }
            None => {
                let _ = writeln!(s, "largest passing eps: none");
            }
        }
    }
    s
}

/// Self-contained line chart, one polyline per player.
pub fn svg(r: &ScenarioResult, sig: &str) -> String {
    const W: f64 = 800.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let t0 = r.times.first().copied().unwrap_or(0.0);
    let t1 = r.times.last().copied().unwrap_or(1.0).max(t0 + 1e-12);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..r.players.len() {
        for &v in column(r, i, sig).iter().filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let px = |t: f64| PAD + (t - t0) / (t1 - t0) * (W - 2.0 * PAD);
    let py = |v: f64| H - PAD - (v - lo) / (hi - lo) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * PAD, H - 2.0 * PAD);
    let _ = writeln!(s, r#"<text x="{}" y="30" font-family="sans-serif" font-size="14" text-anchor="middle">{} / {}</text>"#, W / 2.0, escape(&r.name), sig);
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="11">{t0:.1} s</text>"#, H - PAD + 15.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{t1:.1} s</text>"#, W - PAD, H - PAD + 15.0);
    let _ = writeln!(s, r#"<text x="5" y="{}" font-family="sans-serif" font-size="11">{hi:.4}</text>"#, PAD + 4.0);
    let _ = writeln!(s, r#"<text x="5" y="{}" font-family="sans-serif" font-size="11">{lo:.4}</text>"#, H - PAD);
    for i in 0..r.players.len() {
        let mut pts = String::new();
        for (t, v) in r.times.iter().zip(column(r, i, sig)).filter(|(_, v)| v.is_finite()) {
            let _ = write!(pts, "{:.2},{:.2} ", px(*t), py(*v));
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1" points="{}"/>"#, COLORS[i % COLORS.len()], pts.trim_end());
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn write(path: PathBuf, body: &str) -> Result<PathBuf> {
    fs::write(&path, body).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    Ok(path)
}

/// Write `<name>.csv`, `.manifest.txt`, `.report.txt` and optionally one
/// `.<signal>.svg` per signal into `dir`.
pub fn export(cfg: &ScenarioConfig, r: &ScenarioResult, dir: &Path, with_svg: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
    let mut out = vec![
        write(dir.join(format!("{}.csv", r.name)), &to_csv(r))?,
        write(dir.join(format!("{}.manifest.txt", r.name)), &manifest(cfg, r))?,
        write(dir.join(format!("{}.report.txt", r.name)), &report(cfg, r))?,
    ];
    if with_svg {
        for (sig, slug, _) in SIGNALS {
            out.push(write(dir.join(format!("{}.{slug}.svg", r.name)), &svg(r, sig))?);
        }
    }
    Ok(out)
}
