use serde::{Deserialize, Serialize};

use super::diagnostics::{DiagnosticsRecord, Diagnostician, NormPair};
use super::{SimState, Stepper, StepperConfig};
use crate::error::{Error, Result};
use crate::littlewood_paley::DyadicBank;

fn default_guard() -> f64 {
    1e6
}

/// Output cadence, stopping rules and diagnostics norms for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub t_final: f64,
    /// Spacing of recorded diagnostics (and snapshots); steps are clipped to land on it.
    pub sample_interval: f64,
    #[serde(default)]
    pub norms: NormPair,
    /// Stop when `z > guard * z(0)`.
    #[serde(default = "default_guard")]
    pub guard: f64,
    #[serde(default)]
    pub keep_snapshots: bool,
    /// Stop once the running integral `b` reaches this value.
    #[serde(default)]
    pub stop_at_b: Option<f64>,
}

impl RunConfig {
    pub fn new(t_final: f64, sample_interval: f64) -> Self {
        RunConfig {
            t_final,
            sample_interval,
            norms: NormPair::default(),
            guard: default_guard(),
            keep_snapshots: false,
            stop_at_b: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final >= 0.0) || !(self.sample_interval > 0.0) || !(self.guard > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "bad run configuration: t_final {}, sample_interval {}, guard {}",
                self.t_final, self.sample_interval, self.guard
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Outcome {
    Completed,
    Blowup { t: f64, reason: String },
    ThresholdReached { t: f64 },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    /// States at the recorded times (only with `keep_snapshots`).
    pub snapshots: Vec<SimState>,
    /// `(t, b(t))` after every step.
    pub b_curve: Vec<(f64, f64)>,
    pub outcome: Outcome,
    pub steps: usize,
    pub final_state: SimState,
}

impl Trajectory {
    /// Converts a guard stop into an error.
    pub fn into_checked(self) -> Result<Self> {
        match &self.outcome {
            Outcome::Blowup { t, reason } => Err(Error::BlowupSuspected {
                t: *t,
                reason: reason.clone(),
            }),
            _ => Ok(self),
        }
    }

    pub fn max_z_ratio(&self) -> f64 {
        let z0 = self.records.first().map_or(0.0, |r| r.z);
        if z0 == 0.0 {
            return 1.0;
        }
        self.records.iter().map(|r| r.z / z0).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.records.first().map_or(0.0, |r| r.energy);
        let drift = self.records.iter().map(|r| (r.energy - e0).abs()).fold(0.0, f64::max);
        if e0 == 0.0 {
            drift
        } else {
            drift / e0
        }
    }
}

/// Advances `initial` to `config.t_final`, recording diagnostics on the sample grid.
pub fn run(initial: &SimState, stepper: &StepperConfig, config: &RunConfig) -> Result<Trajectory> {
    config.validate()?;
    stepper.validate()?;
    let diag = Diagnostician::new(DyadicBank::build(*initial.grid())?, config.norms);
    run_with(initial, stepper, config, &diag)
}

/// As [`run`], reusing a prepared diagnostician.
pub fn run_with(initial: &SimState, stepper: &StepperConfig, config: &RunConfig, diag: &Diagnostician) -> Result<Trajectory> {
    let mut st = Stepper::new(*stepper);
    let mut state = initial.clone();
    let mut at = diag.integrands(&state)?;
    let first = diag.record(&state, &at)?;
    let z0 = first.z;
    let mut records = vec![first];
    let mut snapshots = Vec::new();
    if config.keep_snapshots {
        snapshots.push(state.clone());
    }
    let (mut mp, mut mm, mut b) = (0.0, 0.0, 0.0);
    let mut b_curve = vec![(state.t, 0.0)];
    let mut outcome = Outcome::Completed;
    let mut steps = 0usize;
    let mut next_sample = initial.t + config.sample_interval;
    let t_end = initial.t + config.t_final;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());

    while state.t < t_end && !close(state.t, t_end) {
        let target = next_sample.min(t_end);
        let mut dt = st.config.propose_dt(&state)?;
        let snap = target - state.t <= dt * (1.0 + 1e-9);
        if snap {
            dt = target - state.t;
        }
        let mut next = match st.step(&state, dt) {
            Ok(s) => s,
            Err(Error::BlowupSuspected { t, reason }) => {
                outcome = Outcome::Blowup { t, reason };
                break;
            }
            Err(e) => return Err(e),
        };
        if snap {
            next.t = target;
        }
        steps += 1;
        let at_next = diag.integrands(&next)?;
        let trap = |a: f64, c: f64| 0.5 * dt * (a + c);
        mp += trap(at.v_plus, at_next.v_plus);
        mm += trap(at.v_minus, at_next.v_minus);
        let b_prev = b;
        b += trap(at.grad_u_inf + at.grad_rho_inf, at_next.grad_u_inf + at_next.grad_rho_inf);
        b_curve.push((next.t, b));
        let t_prev = state.t;
        state = next;
        at = at_next;

        let hit_theta = config.stop_at_b.filter(|&th| b >= th);
        let on_sample = close(state.t, next_sample) || close(state.t, t_end);
        if on_sample || hit_theta.is_some() {
            let mut r = diag.record(&state, &at)?;
            r.m_plus = mp;
            r.m_minus = mm;
            r.b = b;
            let bad = !r.z.is_finite() || (z0 > 0.0 && r.z > config.guard * z0);
            records.push(r);
            if config.keep_snapshots {
                snapshots.push(state.clone());
            }
            if bad {
                outcome = Outcome::Blowup {
                    t: state.t,
                    reason: format!("z grew past {} times its initial value", config.guard),
                };
                break;
            }
            if let Some(th) = hit_theta {
                let frac = if b > b_prev { (th - b_prev) / (b - b_prev) } else { 1.0 };
                outcome = Outcome::ThresholdReached {
                    t: t_prev + frac * (state.t - t_prev),
                };
                break;
            }
            if on_sample {
                next_sample += config.sample_interval;
            }
        }
    }
    Ok(Trajectory {
        records,
        snapshots,
        b_curve,
        outcome,
        steps,
        final_state: state,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanReport {
    pub kappa: f64,
    pub theta: f64,
    /// First time with `b(t) >= theta` (linear interpolation), the guard time, or `t_max`.
    pub t_life: f64,
    pub reached: bool,
    pub b_curve: Vec<(f64, f64)>,
}

/// Time at which the running integral `b` first reaches `theta`.
pub fn lifespan(initial: &SimState, stepper: &StepperConfig, t_max: f64, theta: f64, norms: NormPair) -> Result<LifespanReport> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!("threshold must be positive, got {theta}")));
    }
    let config = RunConfig {
        stop_at_b: Some(theta),
        norms,
        ..RunConfig::new(t_max, t_max)
    };
    let tr = run(initial, stepper, &config)?;
    let (t_life, reached) = match tr.outcome {
        Outcome::Completed => (initial.t + t_max, false),
        Outcome::ThresholdReached { t } => (t, true),
        Outcome::Blowup { t, .. } => (t, true),
    };
    Ok(LifespanReport {
        kappa: initial.kappa,
        theta,
        t_life: t_life - initial.t,
        reached,
        b_curve: tr.b_curve,
    })
}

/// Smallest `C` with `z(t) <= z(0) exp(C b(t))` at every recorded time.
pub fn gronwall_fit(records: &[DiagnosticsRecord]) -> Result<f64> {
    let first = records.first().ok_or(Error::EmptySeries)?;
    if first.z == 0.0 {
        return Ok(0.0);
    }
    Ok(records
        .iter()
        .skip(1)
        .filter(|r| r.b > 0.0)
        .map(|r| (r.z / first.z).ln() / r.b)
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::PowerLaw;
    use crate::field::SpectralField;
    use crate::grid::GridSpec;
    use crate::solver::Scheme;

    fn state(n: usize, kappa: f64, amp: f64) -> SimState {
        let g = GridSpec::new(n, 1.0).unwrap();
        let w = PowerLaw::default().with_seed(5, 1).sample(g).scaled(amp);
        let r = PowerLaw::default().with_seed(5, 2).sample(g).scaled(amp);
        SimState::new(w, r, kappa).unwrap()
    }

    #[test]
    fn zero_data() {
        let g = GridSpec::new(32, 1.0).unwrap();
        let z = SpectralField::zeros(g);
        let st = SimState::new(z.clone(), z, 10.0).unwrap();
        let tr = run(&st, &StepperConfig::fixed(Scheme::Rk4, 0.05), &RunConfig::new(0.5, 0.1)).unwrap();
        assert_eq!(tr.outcome, Outcome::Completed);
        assert_eq!(tr.records.len(), 6);
        for r in &tr.records {
            assert_eq!((r.energy, r.z, r.b, r.m_plus), (0.0, 0.0, 0.0, 0.0));
        }
        assert_eq!(gronwall_fit(&tr.records).unwrap(), 0.0);
        let life = lifespan(&st, &StepperConfig::fixed(Scheme::Rk4, 0.05), 0.5, 1.0, NormPair::default()).unwrap();
        assert!(!life.reached && (life.t_life - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sample_times_and_monotone_integrals() {
        let st = state(32, 3.0, 0.5);
        let cfg = StepperConfig {
            dt: super::super::DtPolicy::Cfl {
                c0: 0.5,
                c1: 0.5,
                dt_max: 0.03,
            },
            ..Default::default()
        };
        let tr = run(&st, &cfg, &RunConfig::new(0.25, 0.1)).unwrap();
        let ts: Vec<f64> = tr.records.iter().map(|r| r.t).collect();
        assert_eq!(ts.len(), 4);
        for (t, e) in ts.iter().zip([0.0, 0.1, 0.2, 0.25]) {
            assert!((t - e).abs() < 1e-12, "{ts:?}");
        }
        for w in tr.records.windows(2) {
            assert!(w[1].b >= w[0].b && w[1].m_plus >= w[0].m_plus && w[1].m_minus >= w[0].m_minus);
        }
        assert!(tr.b_curve.windows(2).all(|w| w[1].1 >= w[0].1 && w[1].0 > w[0].0));
    }

    #[test]
    fn energy_is_conserved() {
        let st = state(32, 20.0, 1.0);
        let tr = run(&st, &StepperConfig::fixed(Scheme::IntegratingFactor, 2e-3), &RunConfig::new(0.2, 0.05)).unwrap();
        assert!(tr.max_energy_drift() < 1e-8, "{}", tr.max_energy_drift());
    }

    #[test]
    fn threshold_stop_interpolates() {
        let st = state(32, 0.0, 1.0);
        let cfg = StepperConfig::fixed(Scheme::Rk4, 0.01);
        let full = run(&st, &cfg, &RunConfig::new(0.3, 0.3)).unwrap();
        let theta = full.b_curve.last().unwrap().1 * 0.5;
        let life = lifespan(&st, &cfg, 0.3, theta, NormPair::default()).unwrap();
        assert!(life.reached);
        let k = full.b_curve.iter().position(|p| p.1 >= theta).unwrap();
        let (t0, b0) = full.b_curve[k - 1];
        let (t1, b1) = full.b_curve[k];
        let expect = t0 + (theta - b0) / (b1 - b0) * (t1 - t0);
        assert!((life.t_life - expect).abs() < 1e-12);
    }

    #[test]
    fn gronwall_empty_and_simple() {
        assert!(matches!(gronwall_fit(&[]), Err(Error::EmptySeries)));
        let mk = |t: f64, z: f64, b: f64| DiagnosticsRecord {
            t,
            energy: 0.0,
            z,
            grad_u_inf: 0.0,
            grad_rho_inf: 0.0,
            v_plus: 0.0,
            v_minus: 0.0,
            m_plus: 0.0,
            m_minus: 0.0,
            b,
        };
        let recs = [mk(0.0, 1.0, 0.0), mk(1.0, 2f64.exp(), 1.0), mk(2.0, 3f64.exp(), 2.0)];
        assert!((gronwall_fit(&recs).unwrap() - 2.0).abs() < 1e-12);
        let decay = [mk(0.0, 1.0, 0.0), mk(1.0, 0.5, 1.0)];
        assert_eq!(gronwall_fit(&decay).unwrap(), 0.0);
    }
}
