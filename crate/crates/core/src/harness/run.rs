use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{sweep_schedule, ExperimentConfig, ExperimentKind, RunSpec};
use crate::dispersive::{kappa0_estimate, strichartz_sweep, SweepResult};
use crate::error::{Error, Result};
use crate::estimates::{verify_bernstein, verify_commutator_lemma, verify_product_rule, Lemma, RatioReport, TrialSetup};
use crate::littlewood_paley::{psi, DyadicBank};
use crate::picard::{local_time, picard_run, uniformity_report, PicardConfig, PicardRun};
use crate::snapshot::Snapshot;
use crate::solver::{gronwall_fit, lifespan, run, Outcome, RunConfig, SimState, StepperConfig};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    Blowup { t: f64, reason: String },
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(flatten)]
    pub spec: RunSpec,
    #[serde(flatten)]
    pub status: RunStatus,
    /// Paths relative to the output directory.
    pub files: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub runs: Vec<RunRecord>,
    /// Files written by the aggregation step.
    pub files: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

/// Worker count from `STRAT2D_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("STRAT2D_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Results the aggregation step needs beyond the manifest record.
enum Payload {
    None,
    Lifespan { t_life: f64 },
    Picard(Box<PicardRun>),
    Strichartz(SweepResult),
    Estimates(Vec<RatioReport>),
    Bands { residual: f64 },
    Kappa0 { log_value: f64 },
}

struct Finished {
    record: RunRecord,
    payload: Payload,
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    out: &'a Path,
    /// Picard horizon per seed.
    horizons: BTreeMap<u64, f64>,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(v)? + "\n")?;
    Ok(())
}

fn initial_state(config: &ExperimentConfig, spec: &RunSpec) -> Result<SimState> {
    let mut init = config.initial.clone();
    init.vorticity = init.vorticity.with_seed(spec.seed);
    let (w, r) = init.build(config.grid);
    SimState::new(w, r, spec.kappa)
}

fn stepper(config: &ExperimentConfig, spec: &RunSpec) -> StepperConfig {
    StepperConfig {
        scheme: spec.scheme,
        dt: config.dt,
        ..StepperConfig::default()
    }
}

fn run_one(ctx: &Ctx, spec: &RunSpec) -> Result<Finished> {
    let config = ctx.config;
    let rel = format!("run-{:03}", spec.index);
    let dir = ctx.out.join(&rel);
    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    let mut metrics = BTreeMap::new();
    let mut status = RunStatus::Ok;
    let mut file = |name: &str| {
        files.push(format!("{rel}/{name}"));
        dir.join(name)
    };
    let payload = match config.kind {
        ExperimentKind::Simulate => {
            let st = initial_state(config, spec)?;
            let rc = RunConfig {
                norms: config.norms,
                keep_snapshots: config.keep_snapshots,
                ..RunConfig::new(config.t_final, config.sample_interval)
            };
            let tr = run(&st, &stepper(config, spec), &rc)?;
            write_csv(&file("diagnostics.csv"), &tr.records)?;
            for (i, s) in tr.snapshots.iter().enumerate() {
                Snapshot::spectral("omega", s.t, &s.omega).save(&file(&format!("omega-{i:04}.json")))?;
                Snapshot::spectral("rho", s.t, &s.rho).save(&file(&format!("rho-{i:04}.json")))?;
            }
            metrics.insert("energy_drift".into(), tr.max_energy_drift());
            metrics.insert("max_z_ratio".into(), tr.max_z_ratio());
            metrics.insert("c6".into(), gronwall_fit(&tr.records)?);
            metrics.insert("steps".into(), tr.steps as f64);
            if let Outcome::Blowup { t, reason } = &tr.outcome {
                status = RunStatus::Blowup { t: *t, reason: reason.clone() };
            }
            Payload::None
        }
        ExperimentKind::LifespanSweep => {
            let st = initial_state(config, spec)?;
            let rep = lifespan(&st, &stepper(config, spec), config.t_final, config.theta, config.norms)?;
            #[derive(Serialize)]
            struct Row {
                t: f64,
                b: f64,
            }
            write_csv(&file("b-curve.csv"), rep.b_curve.iter().map(|&(t, b)| Row { t, b }))?;
            metrics.insert("t_life".into(), rep.t_life);
            metrics.insert("reached".into(), if rep.reached { 1.0 } else { 0.0 });
            Payload::Lifespan { t_life: rep.t_life }
        }
        ExperimentKind::Picard => {
            let st = initial_state(config, spec)?;
            let p = &config.picard;
            let pc = PicardConfig {
                scheme: spec.scheme,
                dt: p.dt,
                sample_stride: p.sample_stride,
                norms: config.norms,
                dealias: true,
            };
            let t = ctx.horizons[&spec.seed];
            let pr = picard_run(&st.omega, &st.rho, spec.kappa, t, p.n_max, &pc)?;
            #[derive(Serialize)]
            struct Row {
                n: usize,
                t: f64,
                a: f64,
                a_bar: Option<f64>,
            }
            let rows = pr.traces.iter().flat_map(|tr| {
                (0..tr.times.len()).map(move |i| Row {
                    n: tr.n,
                    t: tr.times[i],
                    a: tr.a[i],
                    a_bar: tr.a_bar.get(i).copied(),
                })
            });
            write_csv(&file("iterations.csv"), rows)?;
            metrics.insert("t_final".into(), t);
            metrics.insert("a0".into(), pr.a0);
            metrics.insert("sup_ratio".into(), pr.sup_ratio());
            Payload::Picard(Box::new(pr))
        }
        ExperimentKind::Strichartz => {
            let res = strichartz_sweep(&config.strichartz)?;
            #[derive(Serialize)]
            struct Row {
                kappa: f64,
                nodes: usize,
                field: usize,
                value: f64,
            }
            let rows = res.rows.iter().flat_map(|r| {
                r.values.iter().enumerate().map(move |(i, &v)| Row {
                    kappa: r.kappa,
                    nodes: r.nodes,
                    field: i,
                    value: v,
                })
            });
            write_csv(&file("samples.csv"), rows)?;
            #[derive(Serialize)]
            struct Mean {
                kappa: f64,
                nodes: usize,
                mean: f64,
            }
            write_csv(
                &file("means.csv"),
                res.rows.iter().map(|r| Mean {
                    kappa: r.kappa,
                    nodes: r.nodes,
                    mean: r.mean,
                }),
            )?;
            write_json(&file("fit.json"), &res)?;
            metrics.insert("slope".into(), res.fit.slope);
            metrics.insert("r_squared".into(), res.fit.r_squared);
            Payload::Strichartz(res)
        }
        ExperimentKind::VerifyEstimates => {
            let e = &config.estimates;
            let setup = TrialSetup::default().with_n(e.n);
            let mut reports = Vec::new();
            for &lemma in &e.lemmas {
                let rep = match lemma {
                    Lemma::Bernstein => verify_bernstein(e.band, e.trials, e.seed, setup.grid)?,
                    Lemma::Product => verify_product_rule(e.s, e.q, e.trials, e.seed, &setup)?,
                    l => verify_commutator_lemma(l, e.s, e.q, e.trials, e.seed, &setup)?,
                };
                #[derive(Serialize)]
                struct Row {
                    trial: usize,
                    lhs: f64,
                    rhs: f64,
                    ratio: f64,
                }
                let ratios = rep.ratios();
                write_csv(
                    &file(&format!("{}.csv", lemma.name())),
                    (0..rep.lhs.len()).map(|i| Row {
                        trial: i,
                        lhs: rep.lhs[i],
                        rhs: rep.rhs[i],
                        ratio: ratios[i],
                    }),
                )?;
                write_json(&file(&format!("{}.json", lemma.name())), &rep)?;
                metrics.insert(format!("{}_max_ratio", lemma.name()), rep.max_ratio);
                reports.push(rep);
            }
            Payload::Estimates(reports)
        }
        ExperimentKind::Kappa0 => {
            let k = kappa0_estimate(&config.kappa0)?;
            write_json(&file("kappa0.json"), &serde_json::json!({ "inputs": config.kappa0, "kappa0": k }))?;
            metrics.insert("log_kappa0".into(), k.log_value);
            Payload::Kappa0 { log_value: k.log_value }
        }
        ExperimentKind::Bands => {
            let bank = DyadicBank::build(config.grid)?;
            #[derive(Serialize)]
            struct Row {
                xi: f64,
                j: i32,
                value: f64,
            }
            let (lo, hi) = (config.grid.min_frequency() / 2.0, config.grid.max_resolved_frequency());
            let m = 400;
            let mut rows = Vec::new();
            for i in 0..=m {
                let xi = lo * (hi / lo).powf(i as f64 / m as f64);
                for j in bank.range() {
                    rows.push(Row { xi, j, value: psi(j, xi) });
                }
            }
            write_csv(&file("bands.csv"), rows)?;
            let residual = bank.partition_residual();
            metrics.insert("partition_residual".into(), residual);
            Payload::Bands { residual }
        }
    };
    Ok(Finished {
        record: RunRecord {
            spec: *spec,
            status,
            files,
            metrics,
        },
        payload,
    })
}

fn check(name: &str, pass: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        pass,
        detail,
    }
}

fn aggregate(config: &ExperimentConfig, out: &Path, done: &[Finished], files: &mut Vec<String>) -> Result<Vec<CheckResult>> {
    let c = &config.checks;
    let failed = done.iter().filter(|f| matches!(f.record.status, RunStatus::Failed { .. })).count();
    let mut checks = vec![check("runs-completed", failed == 0, format!("{failed} of {} runs failed", done.len()))];
    // runs sharing data and scheme, in schedule (kappa) order
    let groups = |f: &dyn Fn(&Finished) -> bool| -> BTreeMap<(u64, String), Vec<usize>> {
        let mut g: BTreeMap<(u64, String), Vec<usize>> = BTreeMap::new();
        for (i, d) in done.iter().enumerate().filter(|(_, d)| f(d)) {
            g.entry((d.record.spec.seed, format!("{:?}", d.record.spec.scheme))).or_default().push(i);
        }
        g
    };
    match config.kind {
        ExperimentKind::LifespanSweep => {
            #[derive(Serialize)]
            struct Row {
                kappa: f64,
                seed: u64,
                scheme: String,
                t_life: Option<f64>,
                b_curve_file: String,
            }
            let rows = done.iter().map(|d| Row {
                kappa: d.record.spec.kappa,
                seed: d.record.spec.seed,
                scheme: format!("{:?}", d.record.spec.scheme),
                t_life: match d.payload {
                    Payload::Lifespan { t_life } => Some(t_life),
                    _ => None,
                },
                b_curve_file: d.record.files.first().cloned().unwrap_or_default(),
            });
            write_csv(&out.join("lifespan.csv"), rows)?;
            files.push("lifespan.csv".into());
            for ((seed, scheme), mut idx) in groups(&|d| matches!(d.payload, Payload::Lifespan { .. })) {
                idx.sort_by(|&a, &b| done[a].record.spec.kappa.abs().total_cmp(&done[b].record.spec.kappa.abs()));
                let ts: Vec<f64> = idx
                    .iter()
                    .map(|&i| match done[i].payload {
                        Payload::Lifespan { t_life } => t_life,
                        _ => unreachable!(),
                    })
                    .collect();
                let ok = ts.windows(2).all(|w| w[1] >= (1.0 - c.lifespan_tolerance) * w[0]);
                checks.push(check(
                    &format!("lifespan-monotone[seed={seed},{scheme}]"),
                    ok,
                    format!("t_life by |kappa|: {ts:?}"),
                ));
            }
        }
        ExperimentKind::Picard => {
            let mut reports = Vec::new();
            for ((seed, scheme), idx) in groups(&|d| matches!(d.payload, Payload::Picard(_))) {
                let runs: Vec<PicardRun> = idx
                    .iter()
                    .map(|&i| match &done[i].payload {
                        Payload::Picard(p) => (**p).clone(),
                        _ => unreachable!(),
                    })
                    .collect();
                let rep = uniformity_report(&runs, c.uniformity_factor)?;
                checks.push(check(
                    &format!("picard-uniform[seed={seed},{scheme}]"),
                    rep.pass,
                    format!("spread {:.4} (limit {})", rep.spread, c.uniformity_factor),
                ));
                let mut cauchy = Vec::new();
                for r in &runs {
                    let worst = r
                        .cauchy_ratios()
                        .into_iter()
                        .filter(|(n, _)| *n >= c.cauchy_from)
                        .map(|(_, x)| x)
                        .fold(0.0, f64::max);
                    checks.push(check(
                        &format!("picard-cauchy[seed={seed},{scheme},kappa={}]", r.kappa),
                        worst <= c.cauchy_max,
                        format!("worst ratio {worst:.4} for n >= {}", c.cauchy_from),
                    ));
                    cauchy.push(serde_json::json!({ "kappa": r.kappa, "ratios": r.cauchy_ratios() }));
                }
                reports.push(serde_json::json!({ "seed": seed, "scheme": scheme, "report": rep, "cauchy": cauchy }));
            }
            write_json(&out.join("uniformity.json"), &reports)?;
            files.push("uniformity.json".into());
        }
        ExperimentKind::Strichartz => {
            for d in done {
                if let Payload::Strichartz(res) = &d.payload {
                    let off = (res.fit.slope - res.target_slope).abs();
                    checks.push(check(
                        "strichartz-slope",
                        off <= c.slope_tolerance,
                        format!("slope {:.4}, target {:.4}", res.fit.slope, res.target_slope),
                    ));
                }
            }
        }
        ExperimentKind::VerifyEstimates => {
            for d in done {
                if let Payload::Estimates(reps) = &d.payload {
                    for r in reps {
                        let name = r.lemma.name();
                        let finite = r.is_finite() && r.violations == 0;
                        checks.push(check(
                            &format!("{name}-finite"),
                            finite,
                            format!("max ratio {:.4e}, violations {}", r.max_ratio, r.violations),
                        ));
                        if let Some(ch) = r.resolution_change() {
                            checks.push(check(
                                &format!("{name}-resolution"),
                                ch <= c.resolution_tolerance,
                                format!("relative change {ch:.4} under grid doubling"),
                            ));
                        }
                    }
                }
            }
        }
        ExperimentKind::Bands => {
            for d in done {
                if let Payload::Bands { residual } = d.payload {
                    checks.push(check(
                        "partition-of-unity",
                        residual < c.partition_tolerance,
                        format!("residual {residual:e}"),
                    ));
                }
            }
        }
        ExperimentKind::Kappa0 => {
            for d in done {
                if let Payload::Kappa0 { log_value } = d.payload {
                    checks.push(check("kappa0-evaluated", log_value.is_finite(), format!("ln kappa0 = {log_value}")));
                }
            }
        }
        ExperimentKind::Simulate => {}
    }
    Ok(checks)
}

/// Expands the schedule, runs it on the worker pool and writes every product under `config.output`.
///
/// Numerical failures are recorded per run; only configuration and I/O problems abort.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunManifest> {
    config.validate()?;
    let start = Instant::now();
    let out: PathBuf = config.output.clone();
    fs::create_dir_all(&out)?;
    let specs = sweep_schedule(config);
    let mut horizons = BTreeMap::new();
    if config.kind == ExperimentKind::Picard {
        for &seed in &config.seeds {
            let t = match config.picard.t_final {
                Some(t) => t,
                None => {
                    let spec = RunSpec {
                        index: 0,
                        kappa: 0.0,
                        seed,
                        scheme: config.schemes[0],
                    };
                    let st = initial_state(config, &spec)?;
                    let sc = StepperConfig {
                        dt: crate::solver::DtPolicy::Fixed { dt: config.picard.dt },
                        ..stepper(config, &spec)
                    };
                    local_time(&st.omega, &st.rho, &sc, config.picard.t_search, config.picard.growth, config.norms)?
                }
            };
            horizons.insert(seed, t);
        }
    }
    let ctx = Ctx {
        config,
        out: &out,
        horizons,
    };
    let threads = thread_cap().unwrap_or_else(crate::par::default_threads);
    let done: Vec<Finished> = crate::par::install(threads, || {
        crate::par::map_collect(&specs, |spec| match run_one(&ctx, spec) {
            Ok(f) => f,
            Err(Error::BlowupSuspected { t, reason }) => Finished {
                record: RunRecord {
                    spec: *spec,
                    status: RunStatus::Blowup { t, reason },
                    files: Vec::new(),
                    metrics: BTreeMap::new(),
                },
                payload: Payload::None,
            },
            Err(e) => Finished {
                record: RunRecord {
                    spec: *spec,
                    status: RunStatus::Failed { message: e.to_string() },
                    files: Vec::new(),
                    metrics: BTreeMap::new(),
                },
                payload: Payload::None,
            },
        })
    });
    let mut files = Vec::new();
    let checks = aggregate(config, &out, &done, &mut files)?;
    let all_pass = checks.iter().all(|c| c.pass);
    let manifest = RunManifest {
        tool: "strat2d".into(),
        version: ARTIFACT_VERSION.into(),
        config: config.clone(),
        seeds: config.seeds.clone(),
        threads,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        runs: done.into_iter().map(|d| d.record).collect(),
        files,
        checks,
        all_pass,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(manifest)
}
