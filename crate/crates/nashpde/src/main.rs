use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nashpde::harness::{self, export, Overrides, ScenarioConfig};

#[derive(Parser)]
#[command(name = "nashpde", version, about = "Nash equilibrium and extremum seeking through PDE channels")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct RunOpts {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the time step (s).
    #[arg(long)]
    dt: Option<f64>,
    /// Override the horizon (s).
    #[arg(long)]
    t_end: Option<f64>,
    /// Replace every compensating law by plain `k G`.
    #[arg(long)]
    no_compensation: bool,
    /// Also write one SVG chart per signal.
    #[arg(long)]
    svg: bool,
}

impl RunOpts {
    fn overrides(&self) -> Overrides {
        Overrides { dt: self.dt, t_end: self.t_end, no_compensation: self.no_compensation }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a built-in scenario or a JSON config file.
    Run {
        scenario: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// List the built-in scenarios.
    List,
    /// Run one scenario per parameter value.
    Sweep {
        #[arg(default_value = "duopoly-hetero")]
        scenario: String,
        #[arg(long, default_value = "epsilon")]
        param: String,
        #[arg(long, value_delimiter = ',', default_value = "1,0.75,0.5,0.25")]
        values: Vec<f64>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Print the stability report without simulating.
    Check { scenario: String },
    /// Print the resolved JSON config of a scenario.
    Show { scenario: String },
}

fn load(name: &str) -> nashpde::Result<ScenarioConfig> {
    let p = Path::new(name);
    if p.extension().is_some_and(|e| e == "json") || p.exists() {
        ScenarioConfig::load(p)
    } else {
        harness::builtin(name)
    }
}

fn summarize(r: &harness::ScenarioResult) {
    let status = match (r.divergence, &r.failure) {
        (Some(t), _) => format!("diverged at t = {t:.3}"),
        (None, Some(m)) => format!("stopped: {m}"),
        _ => "completed".into(),
    };
    println!("{}: {status}, {:.2} s wall", r.name, r.meta.wall_time_s);
    for (i, (o, s)) in r.tail_output.iter().zip(&r.theta_star).enumerate() {
        let tail = if r.divergence.is_some() { "n/a".into() } else { format!("{o:.4}") };
        println!("  player {}: target {s:.4}, tail residual {tail}", i + 1);
    }
}

fn run(cmd: Cmd) -> nashpde::Result<()> {
    match cmd {
        Cmd::List => {
            let mut out = std::io::stdout().lock();
            for c in harness::builtin_scenarios() {
                // A closed pipe (`| head`) is not an error worth reporting.
                if writeln!(out, "{:<24} {}", c.name, c.description).is_err() {
                    break;
                }
            }
        }
        Cmd::Show { scenario } => println!("{}", load(&scenario)?.to_json()),
        Cmd::Check { scenario } => {
            let cfg = load(&scenario)?;
            match harness::check(&cfg)? {
                Some(st) => {
                    println!("diagonal dominance: {} margins {:?}", st.dominance.pass, st.dominance.margins);
                    println!("max Re eig(KH): {:.6e} ({})", st.hurwitz_max_re, if st.hurwitz_max_re < 0.0 { "Hurwitz" } else { "not Hurwitz" });
                    println!("small-gain margin at eps = {}: {:.6} ({})", st.small_gain.epsilon, st.small_gain.margin, if st.small_gain.pass { "pass" } else { "fail" });
                    for (i, p) in st.small_gain.players.iter().enumerate() {
                        println!("  player {}: k_H {:.4} lhs1 {:.4e} lhs2 {:.4e} window {}", i + 1, p.k_h, p.lhs1, p.lhs2, p.window);
                    }
                    match st.epsilon_star {
                        Some(e) => println!("largest passing eps: {e:.6}"),
                        None => println!("largest passing eps: none"),
                    }
                }
                None => println!("{}: scalar map, no game stability checks", cfg.name),
            }
        }
        Cmd::Run { scenario, opts } => {
            let mut cfg = load(&scenario)?;
            opts.overrides().apply(&mut cfg);
            let r = harness::run_scenario(&cfg)?;
            summarize(&r);
            for p in export::export(&cfg, &r, &opts.out, opts.svg)? {
                println!("  wrote {}", p.display());
            }
        }
        Cmd::Sweep { scenario, param, values, opts } => {
            let mut cfg = load(&scenario)?;
            opts.overrides().apply(&mut cfg);
            let results = harness::sweep(&cfg, &param, &values)?;
            for (v, r) in values.iter().zip(&results) {
                let c = harness::with_param(&cfg, &param, *v)?;
                summarize(r);
                export::export(&c, r, &opts.out, opts.svg)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
