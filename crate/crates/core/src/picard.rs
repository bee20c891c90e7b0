//! Approximate linear iteration: each iterate solves the linear stratified system with
//! transport frozen to the previous iterate's velocity and initial data mollified by `S_{n+2}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{advect_physical, biot_savart, SpectralField, VectorField};
use crate::grid::GridSpec;
use crate::littlewood_paley::DyadicBank;
use crate::solver::{
    classic_rk4, lawson_rk4, linear_terms, run, Diagnostician, LinearPropagator, NormPair, Pair, RunConfig, Scheme,
    SimState, StepperConfig,
};

/// Velocity samples on a uniform time grid, interpolated in time by 4-point Lagrange stencils.
#[derive(Debug, Clone)]
pub struct FrozenVelocity {
    grid: GridSpec,
    t0: f64,
    t_end: f64,
    spacing: f64,
    snapshots: Vec<VectorField>,
    physical: Vec<(Vec<f64>, Vec<f64>)>,
}

impl FrozenVelocity {
    /// A velocity held constant on `[t0, t_end]`.
    pub fn constant(u: VectorField, t0: f64, t_end: f64) -> Self {
        let phys = (u.u1.to_physical(), u.u2.to_physical());
        FrozenVelocity {
            grid: *u.grid(),
            t0,
            t_end,
            spacing: 0.0,
            snapshots: vec![u],
            physical: vec![phys],
        }
    }

    /// Samples `u(t0 + i * spacing)` for `i = 0..len`.
    pub fn from_samples(t0: f64, spacing: f64, snapshots: Vec<VectorField>) -> Result<Self> {
        let first = snapshots.first().ok_or(Error::EmptySeries)?;
        if !(spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("snapshot spacing must be positive, got {spacing}")));
        }
        let grid = *first.grid();
        if snapshots.iter().any(|u| *u.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        let physical = snapshots.iter().map(|u| (u.u1.to_physical(), u.u2.to_physical())).collect();
        Ok(FrozenVelocity {
            grid,
            t0,
            t_end: t0 + spacing * (snapshots.len() - 1) as f64,
            spacing,
            snapshots,
            physical,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn range(&self) -> (f64, f64) {
        (self.t0, self.t_end)
    }

    pub fn snapshots(&self) -> &[VectorField] {
        &self.snapshots
    }

    pub fn covers(&self, a: f64, b: f64) -> Result<()> {
        let eps = 1e-9 * (1.0 + self.t_end.abs());
        for t in [a, b] {
            if t < self.t0 - eps || t > self.t_end + eps {
                return Err(Error::InterpolationOutOfRange {
                    t,
                    start: self.t0,
                    end: self.t_end,
                });
            }
        }
        Ok(())
    }

    /// Physical samples `(u1, u2)` at time `t`.
    pub fn at(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        self.covers(t, t)?;
        let m = self.physical.len();
        if m == 1 {
            return Ok(self.physical[0].clone());
        }
        let x = ((t - self.t0) / self.spacing).clamp(0.0, (m - 1) as f64);
        let near = x.round();
        if (x - near).abs() < 1e-9 {
            return Ok(self.physical[near as usize].clone());
        }
        let width = m.min(4);
        let lo = (x.floor() as isize - 1).clamp(0, (m - width) as isize) as usize;
        let nodes: Vec<usize> = (lo..lo + width).collect();
        let weights: Vec<f64> = nodes
            .iter()
            .map(|&i| {
                nodes
                    .iter()
                    .filter(|&&k| k != i)
                    .map(|&k| (x - k as f64) / (i as f64 - k as f64))
                    .product()
            })
            .collect();
        let len = self.grid.len();
        let (mut u1, mut u2) = (vec![0.0; len], vec![0.0; len]);
        for (&i, &w) in nodes.iter().zip(&weights) {
            let (a, b) = &self.physical[i];
            for p in 0..len {
                u1[p] += w * a[p];
                u2[p] += w * b[p];
            }
        }
        Ok((u1, u2))
    }
}

/// Nonhomogeneous low-pass `S_k` of both fields.
fn mollify_level(bank: &DyadicBank, omega: &SpectralField, rho: &SpectralField, k: i32) -> Result<(SpectralField, SpectralField)> {
    Ok((bank.lowpass_nonhom(omega, k)?, bank.lowpass_nonhom(rho, k)?))
}

/// `(S_{n+2} omega_0, S_{n+2} rho_0)`, the data of iterate `n + 1`.
pub fn mollify_initial(omega0: &SpectralField, rho0: &SpectralField, n: u32) -> Result<(SpectralField, SpectralField)> {
    omega0.same_grid(rho0)?;
    let bank = DyadicBank::build(*omega0.grid())?;
    mollify_level(&bank, omega0, rho0, n as i32 + 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardConfig {
    pub scheme: Scheme,
    /// Nominal step; the actual step divides `t_final` into a whole number of sample intervals.
    pub dt: f64,
    /// Steps between stored samples (frozen-velocity snapshots and trace entries).
    pub sample_stride: usize,
    pub norms: NormPair,
    pub dealias: bool,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            scheme: Scheme::IntegratingFactor,
            dt: 2e-3,
            sample_stride: 1,
            norms: NormPair::default(),
            dealias: true,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.sample_stride == 0 || self.sample_stride > 10 {
            return Err(Error::InvalidParameter(format!(
                "sample stride must lie in 1..=10, got {}",
                self.sample_stride
            )));
        }
        Ok(())
    }

    /// `(steps, h)` covering `[0, t_final]` with `steps` a multiple of the stride.
    fn schedule(&self, t_final: f64) -> (usize, f64) {
        let chunk = self.dt * self.sample_stride as f64;
        let blocks = ((t_final / chunk) - 1e-9).ceil().max(1.0) as usize;
        let steps = blocks * self.sample_stride;
        (steps, t_final / steps as f64)
    }
}

/// Output of one linear solve, sampled every `sample_stride` steps.
#[derive(Debug, Clone)]
pub struct LinearTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<(SpectralField, SpectralField)>,
}

impl LinearTrajectory {
    /// The solution's own Biot-Savart velocity at the sample times.
    pub fn velocity(&self) -> Result<FrozenVelocity> {
        let us = self.states.iter().map(|(w, _)| biot_savart(w)).collect::<Result<Vec<_>>>()?;
        let spacing = if self.times.len() > 1 { self.times[1] - self.times[0] } else { 1.0 };
        FrozenVelocity::from_samples(self.times[0], spacing, us)
    }

    pub fn last(&self) -> &(SpectralField, SpectralField) {
        self.states.last().expect("trajectory holds the initial sample")
    }
}

fn frozen_transport(frozen: &FrozenVelocity, t: f64, p: &Pair, dealias: bool) -> Result<Pair> {
    let (u1, u2) = frozen.at(t)?;
    let mut a = -&advect_physical(&u1, &u2, &p.0, dealias);
    let mut b = -&advect_physical(&u1, &u2, &p.1, dealias);
    a.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    b.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    Ok((a, b))
}

/// Solves `d_t omega + (u . grad) omega = kappa d_1 rho`, `d_t rho + (u . grad) rho = kappa u_2[omega]`
/// on `[0, t_final]` with `u` the frozen field.
pub fn linear_solve(
    frozen: &FrozenVelocity,
    omega: &SpectralField,
    rho: &SpectralField,
    kappa: f64,
    t_final: f64,
    config: &PicardConfig,
) -> Result<LinearTrajectory> {
    config.validate()?;
    omega.same_grid(rho)?;
    if frozen.grid() != omega.grid() {
        return Err(Error::GridMismatch);
    }
    frozen.covers(0.0, t_final)?;
    let (steps, h) = config.schedule(t_final);
    let full = LinearPropagator::new(*omega.grid(), kappa, h);
    let half = LinearPropagator::new(*omega.grid(), kappa, h / 2.0);
    let nl = |t: f64, p: &Pair| frozen_transport(frozen, t.min(t_final), p, config.dealias);
    let mut v: Pair = (omega.clone(), rho.clone());
    let mut times = vec![0.0];
    let mut states = vec![v.clone()];
    for k in 0..steps {
        let t = k as f64 * h;
        v = match config.scheme {
            Scheme::IntegratingFactor => lawson_rk4(&v, t, h, &full, &half, nl)?,
            Scheme::Rk4 => classic_rk4(&v, t, h, |s, p| {
                let (mut a, mut b) = linear_terms(&p.0, &p.1, kappa)?;
                let (na, nb) = nl(s, p)?;
                a += &na;
                b += &nb;
                Ok((a, b))
            })?,
        };
        if !(v.0.is_finite() && v.1.is_finite()) {
            return Err(Error::BlowupSuspected {
                t: t + h,
                reason: "non-finite coefficients in linear solve".into(),
            });
        }
        if (k + 1) % config.sample_stride == 0 {
            times.push((k + 1) as f64 * h);
            states.push(v.clone());
        }
    }
    Ok(LinearTrajectory { times, states })
}

/// `(rate, transport, scale)`: `rate = <d omega, omega>_{H^-1} + <d rho, rho>_{L^2}` for the linear system
/// advected by `u`, `transport` the same pairing with the coupling terms dropped, and a Cauchy-Schwarz scale.
pub fn linear_energy_balance(
    u: &VectorField,
    omega: &SpectralField,
    rho: &SpectralField,
    kappa: f64,
    dealias: bool,
) -> Result<(f64, f64, f64)> {
    let u1 = u.u1.to_physical();
    let u2 = u.u2.to_physical();
    let ta = -&advect_physical(&u1, &u2, omega, dealias);
    let tb = -&advect_physical(&u1, &u2, rho, dealias);
    let (la, lb) = linear_terms(omega, rho, kappa)?;
    let a = &ta + &la;
    let b = &tb + &lb;
    let rate = a.inner_hminus1(omega)? + b.inner_l2(rho)?;
    let transport = ta.inner_hminus1(omega)? + tb.inner_l2(rho)?;
    let scale = a.hminus1_norm()? * omega.hminus1_norm()? + b.l2_norm() * rho.l2_norm();
    Ok((rate, transport, scale))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub n: usize,
    pub kappa: f64,
    pub s: f64,
    pub q: f64,
    pub a0: f64,
    pub times: Vec<f64>,
    pub a: Vec<f64>,
    /// Distance to the previous iterate; empty for `n = 0`.
    pub a_bar: Vec<f64>,
}

impl IterationTrace {
    pub fn sup_a(&self) -> f64 {
        self.a.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_a_bar(&self) -> f64 {
        self.a_bar.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct PicardRun {
    pub kappa: f64,
    pub t_final: f64,
    pub norms: NormPair,
    pub a0: f64,
    pub traces: Vec<IterationTrace>,
    /// Last iterate at `t_final`.
    pub final_state: (SpectralField, SpectralField),
}

/// Fitted `(C0, C1, P)` with `A_{n+1}(t) <= C0 A0 exp(C1 int_0^t A_n)` and `A_n <= P A0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedConstants {
    pub c0: f64,
    pub c1: f64,
    pub p: f64,
}

impl PicardRun {
    /// `sup_{n, t} A_n(t) / A_0`; zero for zero data.
    pub fn sup_ratio(&self) -> f64 {
        if self.a0 == 0.0 {
            return 0.0;
        }
        self.traces.iter().map(IterationTrace::sup_a).fold(0.0, f64::max) / self.a0
    }

    /// `(n, sup_t A_bar_{n+1} / sup_t A_bar_n)` for `n >= 1`.
    pub fn cauchy_ratios(&self) -> Vec<(usize, f64)> {
        self.traces
            .windows(2)
            .skip(1)
            .map(|w| (w[0].n, w[1].sup_a_bar() / w[0].sup_a_bar()))
            .collect()
    }

    /// Least-squares rate `r` in `sup_t A_bar_n ~ c r^n` over `n >= n_from`.
    pub fn geometric_rate(&self, n_from: usize) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .traces
            .iter()
            .filter(|t| t.n >= n_from.max(1) && t.sup_a_bar() > 0.0)
            .map(|t| (t.n as f64, t.sup_a_bar().ln()))
            .collect();
        if pts.len() < 2 {
            return Err(Error::EmptySeries);
        }
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Ok((sxy / sxx).exp())
    }

    pub fn fitted(&self) -> FittedConstants {
        if self.a0 == 0.0 {
            return FittedConstants { c0: 0.0, c1: 0.0, p: 0.0 };
        }
        let c0 = self.traces.iter().map(|t| t.a[0] / self.a0).fold(0.0, f64::max);
        let mut c1 = 0.0f64;
        for w in self.traces.windows(2) {
            let (prev, next) = (&w[0], &w[1]);
            let mut integral = 0.0;
            for i in 1..next.times.len() {
                integral += 0.5 * (prev.a[i] + prev.a[i - 1]) * (prev.times[i] - prev.times[i - 1]);
                if integral > 0.0 && c0 > 0.0 {
                    c1 = c1.max((next.a[i] / (c0 * self.a0)).ln() / integral);
                }
            }
        }
        FittedConstants {
            c0,
            c1,
            p: self.sup_ratio(),
        }
    }

    /// Relative distance of the final iterate to `(omega, rho)` in `B^{s-2} cap H^-1 x B^{s-1}`.
    pub fn distance_to(&self, omega: &SpectralField, rho: &SpectralField) -> Result<f64> {
        let diag = Diagnostician::new(DyadicBank::build(*omega.grid())?, self.norms);
        let (s, (w, r)) = (self.norms.s, &self.final_state);
        let num = diag.pair_norm(&(w - omega), &(r - rho), s - 2.0, s - 1.0)?;
        let den = diag.pair_norm(omega, rho, s - 2.0, s - 1.0)?;
        Ok(if den == 0.0 { num } else { num / den })
    }
}

/// Iterates `0..=n_max`; iterate `m` starts from `S_{m+1}` data and is transported by iterate `m-1`,
/// the seed by the constant field `u = BS(S_2 omega_0)`.
pub fn picard_run(
    omega0: &SpectralField,
    rho0: &SpectralField,
    kappa: f64,
    t_final: f64,
    n_max: usize,
    config: &PicardConfig,
) -> Result<PicardRun> {
    config.validate()?;
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_final must be positive, got {t_final}")));
    }
    omega0.same_grid(rho0)?;
    let bank = DyadicBank::build(*omega0.grid())?;
    let diag = Diagnostician::new(bank, config.norms);
    let s = config.norms.s;
    let a0 = diag.z(omega0, rho0)?;
    let seed_u = biot_savart(&diag.bank.lowpass_nonhom(omega0, 2)?)?;
    let mut frozen = FrozenVelocity::constant(seed_u, 0.0, t_final);
    let mut traces = Vec::with_capacity(n_max + 1);
    let mut prev: Option<LinearTrajectory> = None;
    for m in 0..=n_max {
        let (w, r) = mollify_level(&diag.bank, omega0, rho0, m as i32 + 1)?;
        let traj = linear_solve(&frozen, &w, &r, kappa, t_final, config)?;
        let a = traj.states.iter().map(|(w, r)| diag.z(w, r)).collect::<Result<Vec<_>>>()?;
        let a_bar = match &prev {
            None => Vec::new(),
            Some(p) => traj
                .states
                .iter()
                .zip(&p.states)
                .map(|((w, r), (pw, pr))| diag.pair_norm(&(w - pw), &(r - pr), s - 2.0, s - 1.0))
                .collect::<Result<Vec<_>>>()?,
        };
        traces.push(IterationTrace {
            n: m,
            kappa,
            s,
            q: config.norms.q,
            a0,
            times: traj.times.clone(),
            a,
            a_bar,
        });
        frozen = traj.velocity()?;
        prev = Some(traj);
    }
    let final_state = prev.expect("at least one iterate").last().clone();
    Ok(PicardRun {
        kappa,
        t_final,
        norms: config.norms,
        a0,
        traces,
        final_state,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityRow {
    pub kappa: f64,
    pub sup_ratio: f64,
    pub fitted: FittedConstants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub factor: f64,
    pub rows: Vec<UniformityRow>,
    /// `max / min` of the per-kappa ratios (1 when all are zero).
    pub spread: f64,
    pub pass: bool,
}

/// Compares `sup_{n,t} A_n / A_0` across runs that share data, horizon and norms.
pub fn uniformity_report(runs: &[PicardRun], factor: f64) -> Result<UniformityReport> {
    let first = runs.first().ok_or(Error::EmptySeries)?;
    for r in runs {
        let same = r.t_final == first.t_final
            && r.norms == first.norms
            && r.a0 == first.a0
            && r.traces.len() == first.traces.len();
        if !same {
            return Err(Error::Config("uniformity report needs runs with identical data, horizon and norms".into()));
        }
    }
    let rows: Vec<UniformityRow> = runs
        .iter()
        .map(|r| UniformityRow {
            kappa: r.kappa,
            sup_ratio: r.sup_ratio(),
            fitted: r.fitted(),
        })
        .collect();
    let hi = rows.iter().map(|r| r.sup_ratio).fold(0.0, f64::max);
    let lo = rows.iter().map(|r| r.sup_ratio).fold(f64::INFINITY, f64::min);
    let spread = if hi == 0.0 { 1.0 } else { hi / lo };
    Ok(UniformityReport {
        factor,
        rows,
        spread,
        pass: spread < factor,
    })
}

/// First time the `kappa = 0` solution has `z(t) >= growth * z(0)`, or `t_max`.
pub fn local_time(
    omega0: &SpectralField,
    rho0: &SpectralField,
    stepper: &StepperConfig,
    t_max: f64,
    growth: f64,
    norms: NormPair,
) -> Result<f64> {
    if !(growth > 1.0) {
        return Err(Error::InvalidParameter(format!("growth factor must exceed 1, got {growth}")));
    }
    let init = SimState::new(omega0.clone(), rho0.clone(), 0.0)?;
    let config = RunConfig {
        norms,
        ..RunConfig::new(t_max, t_max / 200.0)
    };
    let tr = run(&init, stepper, &config)?;
    let z0 = tr.records[0].z;
    if z0 == 0.0 {
        return Ok(t_max);
    }
    for w in tr.records.windows(2) {
        let (a, b) = (w[0].z / z0, w[1].z / z0);
        if b >= growth {
            let f = if b > a { (growth - a) / (b - a) } else { 1.0 };
            return Ok(w[0].t + f * (w[1].t - w[0].t));
        }
    }
    Ok(t_max)
}
