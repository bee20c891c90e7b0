use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use strat2d::harness::{run_experiment, ExperimentConfig, ExperimentKind};
use strat2d::Error;

/// Pseudospectral experiments on the 2D stratified Boussinesq system.
///
/// Settings are layered: built-in defaults, then `--config`, then subcommand flags,
/// then `--override key=value` in the order given. Exit status is 0 when every
/// attached check passes, 1 when a check fails, 2 for configuration errors and
/// 3 for runtime failures.
#[derive(Parser)]
#[command(name = "strat2d", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment file (a run manifest also works)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dotted-path assignment, value parsed as JSON when possible
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output directory
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Print the manifest JSON instead of the summary
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Nonlinear runs over kappa x seeds x schemes with diagnostics CSV
    Simulate {
        #[arg(long, value_name = "LIST")]
        kappa_list: Option<String>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        scheme: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Frozen-transport iteration and its uniformity report
    Picard {
        #[arg(long, value_name = "LIST")]
        kappa_list: Option<String>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        t_final: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Time-integrated dispersive norms over a kappa list and their log-log slope
    StrichartzSweep {
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        r: Option<String>,
        /// Switches to the Besov form with this summation index
        #[arg(long)]
        q: Option<String>,
        /// Besov smoothness (implies the Besov form)
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, value_name = "LIST")]
        kappa_list: Option<String>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Lifespan table over a kappa list with fixed data
    LifespanSweep {
        #[arg(long, value_name = "LIST")]
        kappa_list: Option<String>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Ratio batteries for the commutator, product and Bernstein inequalities
    VerifyEstimates {
        /// bracket, lambda, smoothed, product or bernstein (repeatable)
        #[arg(long)]
        lemma: Vec<String>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Large-kappa threshold from T, z, C6, C7 and gamma
    Kappa0 {
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        z: Option<f64>,
        #[arg(long)]
        c6: Option<f64>,
        #[arg(long)]
        c7: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Radial profiles of the dyadic bands and the partition residual
    Bands {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        box_scale: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn list(s: &str) -> anyhow::Result<Value> {
    let xs = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad number {t:?} in list")))
        .collect::<anyhow::Result<Vec<f64>>>()?;
    Ok(json!(xs))
}

/// `inf` or a finite number.
fn exponent(s: &str) -> anyhow::Result<Value> {
    match s.trim() {
        "inf" | "infinity" | "Infinity" => Ok(json!("inf")),
        t => {
            let x: f64 = t.parse().with_context(|| format!("bad exponent {s:?}"))?;
            anyhow::ensure!(x.is_finite(), "bad exponent {s:?}");
            Ok(json!(x))
        }
    }
}

struct Flags(Vec<(String, Value)>);

impl Flags {
    fn set<T: Into<Value>>(&mut self, key: &str, v: Option<T>) {
        if let Some(v) = v {
            self.0.push((key.into(), v.into()));
        }
    }
}

fn plan(cmd: Command) -> anyhow::Result<(ExperimentKind, Common, Flags)> {
    let mut f = Flags(Vec::new());
    let (kind, common) = match cmd {
        Command::Simulate {
            kappa_list,
            t_final,
            seed,
            n,
            scheme,
            common,
        } => {
            f.set("kappas", kappa_list.as_deref().map(list).transpose()?);
            f.set("t_final", t_final);
            f.set("seeds", seed.map(|s| json!([s])));
            f.set("grid.n", n);
            f.set("schemes", scheme.map(|s| json!([s])));
            (ExperimentKind::Simulate, common)
        }
        Command::Picard {
            kappa_list,
            n_max,
            s,
            q,
            t_final,
            common,
        } => {
            f.set("kappas", kappa_list.as_deref().map(list).transpose()?);
            f.set("picard.n_max", n_max);
            f.set("norms.s", s);
            f.set("norms.q", q.as_deref().map(exponent).transpose()?);
            f.set("picard.t_final", t_final);
            (ExperimentKind::Picard, common)
        }
        Command::StrichartzSweep {
            gamma,
            r,
            q,
            s,
            kappa_list,
            t_max,
            seed,
            common,
        } => {
            f.set("strichartz.gamma", gamma.as_deref().map(exponent).transpose()?);
            f.set("strichartz.r", r.as_deref().map(exponent).transpose()?);
            if q.is_some() || s.is_some() {
                let q = q.as_deref().map(exponent).transpose()?.unwrap_or(json!("inf"));
                f.set("strichartz.space", Some(json!({ "space": "besov", "s": s.unwrap_or(0.0), "q": q })));
            }
            f.set("strichartz.kappas", kappa_list.as_deref().map(list).transpose()?);
            f.set("strichartz.t_max", t_max);
            f.set("strichartz.seed", seed);
            (ExperimentKind::Strichartz, common)
        }
        Command::LifespanSweep {
            kappa_list,
            theta,
            t_final,
            seed,
            common,
        } => {
            f.set("kappas", kappa_list.as_deref().map(list).transpose()?);
            f.set("theta", theta);
            f.set("t_final", t_final);
            f.set("seeds", seed.map(|s| json!([s])));
            (ExperimentKind::LifespanSweep, common)
        }
        Command::VerifyEstimates {
            lemma,
            s,
            q,
            trials,
            seed,
            n,
            common,
        } => {
            if !lemma.is_empty() {
                f.set("estimates.lemmas", Some(json!(lemma)));
            }
            f.set("estimates.s", s);
            f.set("estimates.q", q.as_deref().map(exponent).transpose()?);
            f.set("estimates.trials", trials);
            f.set("estimates.seed", seed);
            f.set("estimates.n", n);
            (ExperimentKind::VerifyEstimates, common)
        }
        Command::Kappa0 {
            t,
            z,
            c6,
            c7,
            gamma,
            common,
        } => {
            f.set("kappa0.t", t);
            f.set("kappa0.z", z);
            f.set("kappa0.c6", c6);
            f.set("kappa0.c7", c7);
            f.set("kappa0.gamma", gamma);
            (ExperimentKind::Kappa0, common)
        }
        Command::Bands { n, box_scale, common } => {
            f.set("grid.n", n);
            f.set("grid.box_scale", box_scale);
            (ExperimentKind::Bands, common)
        }
    };
    Ok((kind, common, f))
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn resolve(kind: ExperimentKind, common: &Common, flags: Flags) -> Result<ExperimentConfig, Failure> {
    let mut base = match &common.config {
        Some(p) => ExperimentConfig::load_value(p).map_err(|e| Failure::Config(e.into()))?,
        None => json!({}),
    };
    if let Value::Object(m) = &mut base {
        m.insert("kind".into(), json!(kind));
    }
    let mut overrides: Vec<String> = flags.0.into_iter().map(|(k, v)| format!("{k}={v}")).collect();
    if let Some(out) = &common.output {
        overrides.push(format!("output={}", json!(out)));
    }
    overrides.extend(common.overrides.iter().cloned());
    ExperimentConfig::resolve(base, &overrides).map_err(|e| Failure::Config(e.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common, flags) = match plan(cli.command) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let outcome = resolve(kind, &common, flags).and_then(|cfg| {
        run_experiment(&cfg).map_err(|e| match e {
            Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidGrid(_) => Failure::Config(e.into()),
            other => Failure::Runtime(other.into()),
        })
    });
    match outcome {
        Ok(m) => {
            if common.json {
                println!("{}", serde_json::to_string_pretty(&m).expect("manifest serializes"));
            } else {
                for r in &m.runs {
                    let status = serde_json::to_value(&r.status).expect("status serializes");
                    println!(
                        "run {:03} kappa={} seed={} {:?}: {}",
                        r.spec.index, r.spec.kappa, r.spec.seed, r.spec.scheme, status["status"]
                    );
                }
                for c in &m.checks {
                    println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
                }
                println!("manifest: {}", m.config.output.join("manifest.json").display());
            }
            if m.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
