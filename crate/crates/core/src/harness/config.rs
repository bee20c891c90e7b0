use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::data::{DensityMode, InitialData, Preset};
use crate::dispersive::{Kappa0Inputs, SweepConfig};
use crate::error::{Error, Result};
use crate::estimates::Lemma;
use crate::grid::GridSpec;
use crate::solver::{DtPolicy, NormPair, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Picard,
    Strichartz,
    LifespanSweep,
    VerifyEstimates,
    Kappa0,
    Bands,
}

impl ExperimentKind {
    /// Kinds that expand over `kappas x seeds x schemes`.
    pub fn is_sweep(self) -> bool {
        matches!(self, ExperimentKind::Simulate | ExperimentKind::Picard | ExperimentKind::LifespanSweep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardSection {
    pub n_max: usize,
    /// Horizon; when absent the local time at `kappa = 0` is measured per seed.
    pub t_final: Option<f64>,
    /// Growth of `z` defining the local time.
    pub growth: f64,
    /// Search window for the local time.
    pub t_search: f64,
    pub dt: f64,
    pub sample_stride: usize,
}

impl Default for PicardSection {
    fn default() -> Self {
        PicardSection {
            n_max: 8,
            t_final: None,
            growth: 1.1,
            t_search: 2.0,
            dt: 2e-3,
            sample_stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimateSection {
    pub lemmas: Vec<Lemma>,
    pub s: f64,
    #[serde(with = "crate::littlewood_paley::exponent")]
    pub q: f64,
    pub trials: usize,
    pub seed: u64,
    pub n: usize,
    /// Band used by the Bernstein check.
    pub band: i32,
}

impl Default for EstimateSection {
    fn default() -> Self {
        EstimateSection {
            lemmas: vec![Lemma::Bracket, Lemma::Lambda, Lemma::Smoothed, Lemma::Product, Lemma::Bernstein],
            s: 1.0,
            q: 1.0,
            trials: 100,
            seed: 0,
            n: 64,
            band: 2,
        }
    }
}

/// Tolerances for the pass/fail flags attached to each experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Checks {
    pub lifespan_tolerance: f64,
    pub uniformity_factor: f64,
    pub cauchy_max: f64,
    pub cauchy_from: usize,
    pub slope_tolerance: f64,
    pub resolution_tolerance: f64,
    pub partition_tolerance: f64,
}

impl Default for Checks {
    fn default() -> Self {
        Checks {
            lifespan_tolerance: 0.05,
            uniformity_factor: 1.5,
            cauchy_max: 0.6,
            cauchy_from: 3,
            slope_tolerance: 0.08,
            resolution_tolerance: 0.25,
            partition_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_dt")]
    pub dt: DtPolicy,
    #[serde(default = "default_initial")]
    pub initial: InitialData,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_kappas")]
    pub kappas: Vec<f64>,
    #[serde(default)]
    pub norms: NormPair,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    #[serde(default)]
    pub keep_snapshots: bool,
    /// Threshold on the running integral `b` for lifespan sweeps.
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub picard: PicardSection,
    #[serde(default)]
    pub strichartz: SweepConfig,
    #[serde(default)]
    pub estimates: EstimateSection,
    #[serde(default = "default_kappa0")]
    pub kappa0: Kappa0Inputs,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub checks: Checks,
}

fn default_grid() -> GridSpec {
    GridSpec::new(64, 1.0).expect("valid grid")
}
fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::IntegratingFactor]
}
fn default_dt() -> DtPolicy {
    DtPolicy::Fixed { dt: 2e-3 }
}
fn default_initial() -> InitialData {
    InitialData {
        vorticity: Preset::RandomSpectrum {
            alpha: 2.5,
            seed: 3,
            amplitude: 1.0,
            xi_min: 1.0,
            xi_max: 4.0,
        },
        density: DensityMode::Balanced,
    }
}
fn default_seeds() -> Vec<u64> {
    vec![3]
}
fn default_kappas() -> Vec<f64> {
    vec![0.0]
}
fn default_t_final() -> f64 {
    1.0
}
fn default_sample_interval() -> f64 {
    0.05
}
fn default_theta() -> f64 {
    4.0
}
fn default_kappa0() -> Kappa0Inputs {
    Kappa0Inputs {
        t: 1.0,
        z: 1.0,
        c6: 0.1,
        c7: 1.0,
        gamma: 4.0,
    }
}
fn default_output() -> PathBuf {
    PathBuf::from("strat2d-out")
}

impl ExperimentConfig {
    /// Defaults for `kind`.
    pub fn new(kind: ExperimentKind) -> Self {
        Self::from_value(serde_json::json!({ "kind": kind })).expect("defaults are valid")
    }

    pub fn from_value(v: Value) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Fills defaults into `v`, then applies `key=value` overrides and validates.
    pub fn resolve(v: Value, overrides: &[String]) -> Result<Self> {
        let base: ExperimentConfig = serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
        let mut full = serde_json::to_value(&base)?;
        apply_overrides(&mut full, overrides)?;
        Self::from_value(full)
    }

    /// Reads a config file, or the `config` member of a run manifest.
    pub fn load_value(path: &Path) -> Result<Value> {
        let text = std::fs::read_to_string(path)?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(match v {
            Value::Object(mut m) if m.contains_key("config") && !m.contains_key("kind") => {
                m.remove("config").expect("checked")
            }
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.grid.validate()?;
        if self.kind.is_sweep() {
            if self.kappas.is_empty() {
                return bad("kappa list is empty".into());
            }
            if self.seeds.is_empty() {
                return bad("seed list is empty".into());
            }
            if self.schemes.is_empty() {
                return bad("scheme list is empty".into());
            }
        }
        if self.kappas.iter().any(|k| !k.is_finite()) {
            return bad("kappa values must be finite".into());
        }
        if !(self.t_final > 0.0) || !(self.sample_interval > 0.0) {
            return bad(format!(
                "t_final ({}) and sample_interval ({}) must be positive",
                self.t_final, self.sample_interval
            ));
        }
        if !(self.theta > 0.0) {
            return bad(format!("theta must be positive, got {}", self.theta));
        }
        if self.kind == ExperimentKind::Picard && self.picard.n_max < 1 {
            return bad("picard.n_max must be at least 1".into());
        }
        if self.kind == ExperimentKind::Strichartz && self.strichartz.kappas.is_empty() {
            return bad("strichartz.kappas is empty".into());
        }
        if self.kind == ExperimentKind::VerifyEstimates && self.estimates.lemmas.is_empty() {
            return bad("estimates.lemmas is empty".into());
        }
        Ok(())
    }
}

/// Sets `path` (dot separated) in `root` to `raw`, parsed as JSON when possible and as a string otherwise.
pub fn apply_override(root: &mut Value, path: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("bad override key {path:?}")));
    }
    for (i, key) in keys.iter().enumerate() {
        if !cur.is_object() {
            return Err(Error::Config(format!("override {path:?} descends into a non-object")));
        }
        let map = cur.as_object_mut().expect("checked");
        if i + 1 == keys.len() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        cur = map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Applies `key=value` strings in order.
pub fn apply_overrides(root: &mut Value, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
        apply_override(root, k.trim(), v.trim())?;
    }
    Ok(())
}

/// One independent unit of work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub index: usize,
    pub kappa: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

/// Expansion order: `kappa` outermost, then seed, then scheme. Single-shot kinds give one spec.
pub fn sweep_schedule(config: &ExperimentConfig) -> Vec<RunSpec> {
    let first_seed = config.seeds.first().copied().unwrap_or(0);
    let first_scheme = config.schemes.first().copied().unwrap_or(Scheme::IntegratingFactor);
    if !config.kind.is_sweep() {
        return vec![RunSpec {
            index: 0,
            kappa: config.kappas.first().copied().unwrap_or(0.0),
            seed: first_seed,
            scheme: first_scheme,
        }];
    }
    let mut out = Vec::new();
    for &kappa in &config.kappas {
        for &seed in &config.seeds {
            for &scheme in &config.schemes {
                out.push(RunSpec {
                    index: out.len(),
                    kappa,
                    seed,
                    scheme,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for k in [
            ExperimentKind::Simulate,
            ExperimentKind::Picard,
            ExperimentKind::Strichartz,
            ExperimentKind::LifespanSweep,
            ExperimentKind::VerifyEstimates,
            ExperimentKind::Kappa0,
            ExperimentKind::Bands,
        ] {
            ExperimentConfig::new(k).validate().unwrap();
        }
    }

    #[test]
    fn empty_kappa_list_is_rejected() {
        let v = serde_json::json!({"kind": "lifespan-sweep", "kappas": []});
        assert!(matches!(ExperimentConfig::from_value(v), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_preset_and_fields_are_rejected() {
        let v = serde_json::json!({"kind": "simulate", "initial": {"preset": "vortex-sheet"}});
        assert!(ExperimentConfig::from_value(v).is_err());
        let v = serde_json::json!({"kind": "simulate", "kapas": [1.0]});
        assert!(ExperimentConfig::from_value(v).is_err());
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let v = serde_json::json!({"kind": "simulate"});
        let c = ExperimentConfig::resolve(
            v,
            &["kappas=[0,16]".into(), "grid.n=32".into(), "initial.preset=taylor-green".into()],
        )
        .unwrap();
        assert_eq!(c.kappas, vec![0.0, 16.0]);
        assert_eq!(c.grid.n, 32);
        assert!(matches!(c.initial.vorticity, Preset::TaylorGreen { .. }));
        let mut v = serde_json::json!({"kind": "simulate", "t_final": 1.0});
        assert!(apply_overrides(&mut v, &["t_final.x=1".into()]).is_err());
        assert!(apply_overrides(&mut v, &["noequals".into()]).is_err());
    }

    #[test]
    fn schedule_order_is_kappa_then_seed_then_scheme() {
        let mut c = ExperimentConfig::new(ExperimentKind::Simulate);
        assert_eq!(sweep_schedule(&c).len(), 1);
        c.kappas = vec![0.0, 4.0, 16.0, 64.0, 256.0];
        c.seeds = vec![1, 2, 3];
        let s = sweep_schedule(&c);
        assert_eq!(s.len(), 15);
        assert_eq!((s[0].kappa, s[0].seed), (0.0, 1));
        assert_eq!((s[1].kappa, s[1].seed), (0.0, 2));
        assert_eq!((s[3].kappa, s[3].seed), (4.0, 1));
        assert!(s.iter().enumerate().all(|(i, r)| r.index == i));
        c.schemes = vec![Scheme::Rk4, Scheme::IntegratingFactor];
        let s = sweep_schedule(&c);
        assert_eq!((s[0].scheme, s[1].scheme, s[2].seed), (Scheme::Rk4, Scheme::IntegratingFactor, 2));
    }
}
