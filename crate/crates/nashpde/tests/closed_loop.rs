use std::process::Command;

use nashpde::control::HeatForm;
use nashpde::harness::{builtin, export, run_scenario, MapSpec};

fn csv_of(name: &str) -> String {
    let cfg = builtin(name).unwrap();
    export::to_csv(&run_scenario(&cfg).unwrap())
}

#[test]
fn repeated_runs_are_byte_identical() {
    for name in ["delay-es", "wave-kv-es", "distributed-delay-es"] {
        assert_eq!(csv_of(name), csv_of(name), "{name}");
    }
}

/// Decay rate of the period-averaged `Theta - theta*` on the delay loop
/// with `k = 0.1`, `H = -2` and the Hessian estimate pinned at `H`.
fn averaged_decay_rate(a: f64, washout: Option<f64>) -> f64 {
    let mut cfg = builtin("delay-es").unwrap();
    cfg.players[0].controller.k = 0.1;
    cfg.players[0].probe.a = a;
    cfg.estimator.hessian_init = -2.0;
    cfg.estimator.hessian_corner = Some(1e-4);
    cfg.estimator.washout = washout;
    cfg.numerics.t_end = 40.0;
    let r = run_scenario(&cfg).unwrap();
    let star = r.theta_star[0];
    let w = cfg.players[0].probe.omega;
    let per = ((2.0 * std::f64::consts::PI / w) / r.sample_dt).round() as usize;
    let th = &r.players[0].big_theta;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for k in per..th.len() {
        let t = r.times[k];
        let e = th[k + 1 - per..=k].iter().sum::<f64>() / per as f64 - star;
        if t >= 3.0 && e.abs() > 0.1 {
            xs.push(t);
            ys.push(e.abs().ln());
        }
    }
    assert!(xs.len() > 20);
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    -sxy / sxx
}

#[test]
fn average_error_decays_at_k_h() {
    // Average loop e' = k H e after the delay: rate 0.2. Without a washout
    // the DC payoff ripples theta_hat by k (2/a) |y| / w, so the probe must
    // be large for the average to describe the loop.
    let rate = averaged_decay_rate(0.4, None);
    assert!((rate - 0.2).abs() <= 0.02, "fitted rate {rate}");
    // The washout scales the in-phase gradient by w^2 / (w^2 + c^2).
    let (w, c) = (10.0, 10.0);
    let want = 0.2 * w * w / (w * w + c * c);
    let rate = averaged_decay_rate(0.05, Some(c));
    assert!((rate - want).abs() <= 0.1 * want, "fitted rate {rate}, average system {want}");
}

#[test]
fn heat_forms_agree_on_the_scalar_loop() {
    let a = builtin("heat-es").unwrap();
    let mut b = a.clone();
    b.players[0].controller.form = HeatForm::State;
    let (ra, rb) = (run_scenario(&a).unwrap(), run_scenario(&b).unwrap());
    let sup = ra.players[0].big_theta.iter().zip(&rb.players[0].big_theta).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(sup <= 0.02 * ra.theta_star[0].abs(), "sup gap {sup}");
}

#[test]
fn excessive_gain_trips_the_detector() {
    let mut cfg = builtin("delay-es").unwrap();
    cfg.players[0].controller.k = 50.0;
    cfg.players[0].controller.uncompensated = true;
    let r = run_scenario(&cfg).unwrap();
    let t = r.divergence.expect("should diverge");
    assert!(t < cfg.numerics.t_end);
    assert!(r.metrics.is_none());
    assert!(*r.times.last().unwrap() <= t);
}

#[test]
fn scalar_target_is_reached_from_json() {
    let mut cfg = builtin("delay-es").unwrap();
    cfg.map = MapSpec::Scalar { h: -2.0, theta_star: -0.5, y_star: 3.0 };
    let back = nashpde::harness::ScenarioConfig::from_json(&cfg.to_json()).unwrap();
    let r = run_scenario(&back).unwrap();
    assert!(r.converged_within(0.2), "{:?}", r.tail_output);
}

#[test]
fn export_writes_consistent_files() {
    let cfg = builtin("wave-kv-es").unwrap();
    let r = run_scenario(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = export::export(&cfg, &r, dir.path(), true).unwrap();
    assert_eq!(files.len(), 3 + export::SIGNALS.len());
    let csv = std::fs::read_to_string(dir.path().join("wave-kv-es.csv")).unwrap();
    assert_eq!(csv.lines().count(), r.times.len() + 1);
    let width = csv.lines().next().unwrap().split(',').count();
    assert_eq!(width, 1 + export::SIGNALS.len());
    assert!(csv.lines().all(|l| l.split(',').count() == width));
    for (_, slug, _) in export::SIGNALS {
        let svg = std::fs::read_to_string(dir.path().join(format!("wave-kv-es.{slug}.svg"))).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 1);
    }
    let manifest = std::fs::read_to_string(dir.path().join("wave-kv-es.manifest.txt")).unwrap();
    assert!(manifest.contains(&r.meta.config_hash));
}

#[test]
fn cli_lists_runs_and_rejects() {
    let exe = env!("CARGO_BIN_EXE_nashpde");
    let out = Command::new(exe).arg("list").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("duopoly-hetero"));

    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(exe).args(["run", "delay-es", "--t-end", "20", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("delay-es.csv").exists());

    let out = Command::new(exe).args(["check", "duopoly-hetero"]).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("Hurwitz"));

    let out = Command::new(exe).args(["run", "no-such-scenario"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
