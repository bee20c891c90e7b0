//! The dispersive part of the stratified system: the exact propagator on `V+- = omega +- Lambda rho`,
//! the localized operator `G+-`, time-integrated Strichartz quantities, Duhamel consistency
//! and the large-`kappa` threshold formula.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::gaussian_bump;
use crate::error::{Error, Result};
use crate::field::{lp_of_samples, SpectralField};
use crate::grid::GridSpec;
use crate::littlewood_paley::{lq_sum, psi0, DyadicBank};
use crate::solver::{nonlinear_terms, StepperConfig, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `exp(+- i kappa t xi_1 / |xi|)` applied to a mean-zero field.
pub fn semigroup_apply(f: &SpectralField, t: f64, kappa: f64, sign: Sign) -> Result<SpectralField> {
    if !f.is_mean_zero() {
        return Err(Error::NonzeroMean { mean: f.mean() });
    }
    let w = sign.value() * kappa * t;
    Ok(f.phase_multiplier(|a, b| w * a / a.hypot(b)))
}

/// `(omega + Lambda rho, omega - Lambda rho)`; the mean of `rho` is annihilated by `Lambda`.
pub fn diagonalize(omega: &SpectralField, rho: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    omega.same_grid(rho)?;
    if !omega.is_mean_zero() {
        return Err(Error::NonzeroMean { mean: omega.mean() });
    }
    let lr = rho.without_mean().lambda_power(1.0)?;
    Ok((omega + &lr, omega - &lr))
}

/// Inverse of [`diagonalize`]; the returned density has zero mean.
pub fn undiagonalize(vp: &SpectralField, vm: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    vp.same_grid(vm)?;
    let omega = (vp + vm).scaled(0.5);
    let rho = (vp - vm).scaled(0.5).without_mean().lambda_power(-1.0)?;
    Ok((omega, rho))
}

/// `G+-(t) f`: multiplier `phi(|xi|) exp(+- i t xi_1 / |xi|)`.
pub fn g_operator(f: &SpectralField, t: f64, sign: Sign, cutoff: impl Fn(f64) -> f64) -> SpectralField {
    let w = sign.value() * t;
    f.radial_multiplier(cutoff)
        .without_mean()
        .phase_multiplier(|a, b| w * a / a.hypot(b))
}

/// `G+-` with the default cutoff `psi_0`.
pub fn g_operator_default(f: &SpectralField, t: f64, sign: Sign) -> SpectralField {
    g_operator(f, t, sign, psi0)
}

/// Rejects `(gamma, r)` outside `4 <= gamma`, `2 <= r`, `1/gamma + 1/(2r) <= 1/4`.
pub fn check_admissible(gamma: f64, r: f64) -> Result<()> {
    let ok = gamma >= 4.0 && r >= 2.0 && 1.0 / gamma + 0.5 / r <= 0.25 + 1e-15;
    if ok {
        Ok(())
    } else {
        Err(Error::Inadmissible { gamma, r })
    }
}

/// Largest admissible `kappa * dt` between quadrature nodes.
pub const MAX_PHASE_STEP: f64 = 0.25;

/// Smallest node count with `|kappa| t_max / nodes <= step` (at least 16).
pub fn nodes_for(kappa: f64, t_max: f64, step: f64) -> usize {
    ((kappa.abs() * t_max / step).ceil() as usize).max(16)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzSample {
    pub kappa: f64,
    #[serde(with = "crate::littlewood_paley::exponent")]
    pub gamma: f64,
    #[serde(with = "crate::littlewood_paley::exponent")]
    pub r: f64,
    pub t_max: f64,
    /// Number of quadrature intervals.
    pub nodes: usize,
    pub value: f64,
}

/// Sparse spectrum evaluated under a time-dependent phase.
struct PhaseField {
    grid: GridSpec,
    idx: Vec<usize>,
    amp: Vec<Complex64>,
    theta: Vec<f64>,
}

impl PhaseField {
    fn new(f: &SpectralField) -> Self {
        let g = *f.grid();
        let n = g.n;
        let (mut idx, mut amp, mut theta) = (Vec::new(), Vec::new(), Vec::new());
        for (i, c) in f.coeffs().iter().enumerate() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (xi1, xi2) = (g.xi(i / n), g.xi(i % n));
            let r = xi1.hypot(xi2);
            idx.push(i);
            amp.push(*c);
            theta.push(if r == 0.0 { 0.0 } else { xi1 / r });
        }
        PhaseField {
            grid: g,
            idx,
            amp,
            theta,
        }
    }

    /// `L^p` norm of the field with phases `exp(i tau theta)`.
    fn lp_norm(&self, tau: f64, p: f64, buf: &mut Vec<Complex64>) -> f64 {
        if self.idx.is_empty() {
            return 0.0;
        }
        let n = self.grid.n;
        buf.clear();
        buf.resize(n * n, Complex64::new(0.0, 0.0));
        for ((&i, &a), &th) in self.idx.iter().zip(&self.amp).zip(&self.theta) {
            buf[i] = a * Complex64::from_polar(1.0, tau * th);
        }
        crate::fft::inverse(buf, n);
        let re: Vec<f64> = buf.iter().map(|c| c.re).collect();
        lp_of_samples(&re, p, self.grid.cell_area())
    }
}

/// Trapezoid weights on `nodes` equal intervals of `[0, t_max]`.
fn time_integral(values: &[f64], t_max: f64, gamma: f64) -> f64 {
    if gamma.is_infinite() {
        return values.iter().fold(0.0, |m, &v| m.max(v));
    }
    let m = values.len() - 1;
    let h = t_max / m as f64;
    let s: f64 = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            w * v.powf(gamma)
        })
        .sum();
    (h * s).powf(1.0 / gamma)
}

fn check_nodes(kappa: f64, t_max: f64, nodes: usize) -> Result<()> {
    if !(t_max > 0.0) || nodes == 0 {
        return Err(Error::InvalidParameter(format!(
            "need t_max > 0 and nodes > 0 (t_max = {t_max}, nodes = {nodes})"
        )));
    }
    let step = kappa.abs() * t_max / nodes as f64;
    if step > MAX_PHASE_STEP {
        return Err(Error::InsufficientNodes {
            kappa_dt: step,
            limit: MAX_PHASE_STEP,
        });
    }
    Ok(())
}

/// `(int_0^T ||G+-(kappa t) f||_{L^r}^gamma dt)^{1/gamma}` by the trapezoid rule (max when `gamma = inf`).
pub fn strichartz_measure(
    f: &SpectralField,
    kappa: f64,
    gamma: f64,
    r: f64,
    t_max: f64,
    nodes: usize,
    sign: Sign,
) -> Result<StrichartzSample> {
    check_admissible(gamma, r)?;
    check_nodes(kappa, t_max, nodes)?;
    if !f.is_mean_zero() {
        return Err(Error::NonzeroMean { mean: f.mean() });
    }
    let pf = PhaseField::new(&f.radial_multiplier(psi0).without_mean());
    let times: Vec<usize> = (0..=nodes).collect();
    let w = sign.value() * kappa * t_max / nodes as f64;
    let values = crate::par::map_collect(&times, |&i| {
        let mut buf = Vec::new();
        pf.lp_norm(w * i as f64, r, &mut buf)
    });
    Ok(StrichartzSample {
        kappa,
        gamma,
        r,
        t_max,
        nodes,
        value: time_integral(&values, t_max, gamma),
    })
}

/// `(int_0^T ||exp(+- i t kappa R_1) f||_{B^s_{r,q}}^gamma dt)^{1/gamma}` with homogeneous bands.
#[allow(clippy::too_many_arguments)]
pub fn besov_strichartz_measure(
    f: &SpectralField,
    kappa: f64,
    gamma: f64,
    r: f64,
    q: f64,
    s: f64,
    t_max: f64,
    nodes: usize,
    sign: Sign,
    bank: &DyadicBank,
) -> Result<StrichartzSample> {
    check_admissible(gamma, r)?;
    if gamma > q {
        return Err(Error::GammaExceedsQ { gamma, q });
    }
    check_nodes(kappa, t_max, nodes)?;
    if !f.is_mean_zero() {
        return Err(Error::NonzeroMean { mean: f.mean() });
    }
    let bands: Vec<(i32, PhaseField)> = bank
        .range()
        .map(|j| Ok((j, PhaseField::new(&bank.project_band(f, j)?))))
        .collect::<Result<_>>()?;
    let times: Vec<usize> = (0..=nodes).collect();
    let w = sign.value() * kappa * t_max / nodes as f64;
    let values = crate::par::map_collect(&times, |&i| {
        let mut buf = Vec::new();
        let terms = bands
            .iter()
            .map(|(j, pf)| 2f64.powf(s * *j as f64) * pf.lp_norm(w * i as f64, r, &mut buf));
        lq_sum(terms, q)
    });
    Ok(StrichartzSample {
        kappa,
        gamma,
        r,
        t_max,
        nodes,
        value: time_integral(&values, t_max, gamma),
    })
}

/// Random Gaussian bump restricted to the spectral support of `psi_0`, with zero mean.
///
/// Centers are uniform in the box and widths uniform in `[0.6, 1.2]`.
pub fn localized_field(grid: GridSpec, seed: u64) -> SpectralField {
    let mut rng = crate::rng::stream(seed, 0x10CA_112E);
    let p = grid.period();
    let center = (rng.random::<f64>() * p, rng.random::<f64>() * p);
    let width = 0.6 + 0.6 * rng.random::<f64>();
    gaussian_bump(grid, center, width, 1.0)
        .radial_multiplier(psi0)
        .without_mean()
}

/// As [`localized_field`] but even under `x_1 -> -x_1` (centered on the line `x_1 = 0`).
pub fn localized_field_symmetric(grid: GridSpec, seed: u64) -> SpectralField {
    let mut rng = crate::rng::stream(seed, 0x5E11_0CA1);
    let p = grid.period();
    let c2 = rng.random::<f64>() * p;
    let width = 0.6 + 0.6 * rng.random::<f64>();
    gaussian_bump(grid, (0.0, c2), width, 1.0)
        .radial_multiplier(psi0)
        .without_mean()
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "slope fit needs at least two matched points (got {} and {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("slope fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Which norm a Strichartz sweep measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "kebab-case")]
pub enum StrichartzSpace {
    /// `L^r` norm of `G+-(kappa t) f`.
    Lebesgue,
    /// `B^s_{r,q}` norm of `exp(+- i t kappa R_1) f`.
    Besov {
        s: f64,
        #[serde(with = "crate::littlewood_paley::exponent")]
        q: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub grid: GridSpec,
    #[serde(with = "crate::littlewood_paley::exponent")]
    pub gamma: f64,
    #[serde(with = "crate::littlewood_paley::exponent")]
    pub r: f64,
    pub space: StrichartzSpace,
    pub kappas: Vec<f64>,
    pub t_max: f64,
    /// Number of random localized fields averaged per `kappa`.
    pub fields: usize,
    pub seed: u64,
    /// `kappa * dt` between quadrature nodes.
    pub phase_step: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            grid: GridSpec::new(128, 8.0).expect("valid grid"),
            gamma: 4.0,
            r: f64::INFINITY,
            space: StrichartzSpace::Lebesgue,
            kappas: (4..=10).map(|e| 2f64.powi(e)).collect(),
            t_max: 1.0,
            fields: 10,
            seed: 0,
            phase_step: MAX_PHASE_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kappa: f64,
    pub nodes: usize,
    /// Mean over the random fields.
    pub mean: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub fit: SlopeFit,
    /// Exponent expected from the time-decay estimate, `-1/gamma`.
    pub target_slope: f64,
}

/// Measures the Strichartz quantity over a `kappa` list and fits the decay exponent.
pub fn strichartz_sweep(config: &SweepConfig) -> Result<SweepResult> {
    if config.kappas.is_empty() || config.fields == 0 {
        return Err(Error::InvalidParameter("sweep needs kappas and fields".into()));
    }
    let fields: Vec<SpectralField> = (0..config.fields as u64)
        .map(|i| localized_field(config.grid, config.seed.wrapping_mul(7919).wrapping_add(i)))
        .collect();
    let bank = match config.space {
        StrichartzSpace::Besov { .. } => Some(DyadicBank::build(config.grid)?),
        StrichartzSpace::Lebesgue => None,
    };
    let mut rows = Vec::new();
    for &kappa in &config.kappas {
        let nodes = nodes_for(kappa, config.t_max, config.phase_step);
        let values = fields
            .iter()
            .map(|f| {
                let s = match config.space {
                    StrichartzSpace::Lebesgue => {
                        strichartz_measure(f, kappa, config.gamma, config.r, config.t_max, nodes, Sign::Plus)?
                    }
                    StrichartzSpace::Besov { s, q } => besov_strichartz_measure(
                        f,
                        kappa,
                        config.gamma,
                        config.r,
                        q,
                        s,
                        config.t_max,
                        nodes,
                        Sign::Plus,
                        bank.as_ref().expect("built for besov"),
                    )?,
                };
                Ok(s.value)
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(SweepRow {
            kappa,
            nodes,
            mean: values.iter().sum::<f64>() / values.len() as f64,
            values,
        });
    }
    let ks: Vec<f64> = rows.iter().map(|r| r.kappa.abs()).collect();
    let ms: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let fit = fit_loglog(&ks, &ms)?;
    Ok(SweepResult {
        config: config.clone(),
        rows,
        fit,
        target_slope: -1.0 / config.gamma,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuhamelReport {
    pub sign: Sign,
    pub times: Vec<f64>,
    /// `||V_solver(t) - V_duhamel(t)||_2 / ||V_solver(t)||_2` at each snapshot after the first.
    pub residuals: Vec<f64>,
    pub max: f64,
}

/// Composite quadrature weights on `m` equal intervals: Simpson, with a 3/8 tail for odd `m`.
pub fn quadrature_weights(m: usize) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    match m {
        0 => {}
        1 => {
            w[0] = 0.5;
            w[1] = 0.5;
        }
        _ => {
            let simpson_end = if m % 2 == 0 { m } else { m - 3 };
            for k in (0..simpson_end).step_by(2) {
                w[k] += 1.0 / 3.0;
                w[k + 1] += 4.0 / 3.0;
                w[k + 2] += 1.0 / 3.0;
            }
            if m % 2 == 1 {
                let b = m - 3;
                for (o, c) in [3.0, 9.0, 9.0, 3.0].iter().enumerate() {
                    w[b + o] += c / 8.0;
                }
            }
        }
    }
    w
}

/// Rebuilds `V+-` from the stored snapshots through the Duhamel formula
/// `V(t) = E(t) V(0) + int_0^t E(t - tau) (N_omega +- Lambda N_rho)(tau) dtau`
/// and compares with the stepped solution.
pub fn duhamel_residual(traj: &Trajectory, stepper: &StepperConfig, sign: Sign) -> Result<DuhamelReport> {
    let snaps = &traj.snapshots;
    if snaps.len() < 2 {
        return Err(Error::EmptySeries);
    }
    let kappa = snaps[0].kappa;
    let delta = snaps[1].t - snaps[0].t;
    for w in snaps.windows(2) {
        if ((w[1].t - w[0].t) - delta).abs() > 1e-9 * delta {
            return Err(Error::InvalidParameter("snapshots must be equally spaced".into()));
        }
    }
    if kappa.abs() * delta > 0.5 {
        return Err(Error::SnapshotsTooCoarse {
            kappa_dt: kappa.abs() * delta,
        });
    }
    let t0 = snaps[0].t;
    let pick = |p: (SpectralField, SpectralField)| match sign {
        Sign::Plus => p.0,
        Sign::Minus => p.1,
    };
    // E(-tau) F(tau) at each node
    let pulled = snaps
        .iter()
        .map(|s| {
            let forcing = if stepper.nonlinear {
                let (a, b) = nonlinear_terms(&s.omega, &s.rho, stepper.dealias)?;
                pick(diagonalize(&a, &b)?)
            } else {
                SpectralField::zeros(*s.grid())
            };
            semigroup_apply(&forcing, -(s.t - t0), kappa, sign)
        })
        .collect::<Result<Vec<_>>>()?;
    let v0 = pick(diagonalize(&snaps[0].omega, &snaps[0].rho)?);
    let mut times = Vec::new();
    let mut residuals = Vec::new();
    for m in 1..snaps.len() {
        let mut acc = v0.clone();
        for (k, w) in quadrature_weights(m).into_iter().enumerate() {
            acc.axpy(w * delta, &pulled[k]);
        }
        let duhamel = semigroup_apply(&acc, snaps[m].t - t0, kappa, sign)?;
        let stepped = pick(diagonalize(&snaps[m].omega, &snaps[m].rho)?);
        let norm = stepped.l2_norm();
        let diff = (&stepped - &duhamel).l2_norm();
        times.push(snaps[m].t);
        residuals.push(if norm == 0.0 { diff } else { diff / norm });
    }
    let max = residuals.iter().fold(0.0, |a: f64, &b| a.max(b));
    Ok(DuhamelReport {
        sign,
        times,
        residuals,
        max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa0Inputs {
    /// Target time `T`.
    pub t: f64,
    /// Size of the data, `z_{s+1,q}(0)`.
    pub z: f64,
    pub c6: f64,
    pub c7: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa0 {
    /// `+inf` when `overflow` is set.
    pub value: f64,
    /// Natural log of the threshold, finite even when the value overflows.
    pub log_value: f64,
    pub overflow: bool,
}

/// `kappa_0 = [2 (1 + z T exp(C6 C7 T^{1 - 1/gamma} z))]^gamma`, evaluated in log space.
pub fn kappa0_estimate(inp: &Kappa0Inputs) -> Result<Kappa0> {
    let Kappa0Inputs { t, z, c6, c7, gamma } = *inp;
    let finite = [t, z, c6, c7, gamma].iter().all(|v| v.is_finite());
    if !finite || t <= 0.0 || z < 0.0 || c6 < 0.0 || c7 < 0.0 || gamma < 4.0 {
        return Err(Error::InvalidParameter(format!("bad threshold inputs {inp:?}")));
    }
    let x = c6 * c7 * t.powf(1.0 - 1.0 / gamma) * z;
    let zt = z * t;
    // ln(1 + zT e^x), stable for large x
    let inner = if zt == 0.0 {
        0.0
    } else {
        let l = zt.ln() + x;
        if l > 30.0 {
            l + (-l).exp().ln_1p()
        } else {
            l.exp().ln_1p()
        }
    };
    let log_value = gamma * (2f64.ln() + inner);
    let overflow = log_value > f64::MAX.ln();
    Ok(Kappa0 {
        value: if overflow { f64::INFINITY } else { log_value.exp() },
        log_value,
        overflow,
    })
}

/// `2 pi` periodic phase check used in tests and demos: `cos(x_1)` after time `pi / kappa`.
pub fn half_turn(kappa: f64) -> f64 {
    PI / kappa
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::PowerLaw;
    use crate::solver::{run, RunConfig, Scheme, SimState};

    fn g(n: usize, l0: f64) -> GridSpec {
        GridSpec::new(n, l0).unwrap()
    }

    #[test]
    fn semigroup_examples() {
        let grid = g(32, 1.0);
        let f = SpectralField::from_fn(grid, |x, _| x.cos());
        let out = semigroup_apply(&f, half_turn(3.0), 3.0, Sign::Plus).unwrap();
        assert!(out.max_relative_difference(&f.scaled(-1.0)) < 1e-14);
        let h = SpectralField::from_fn(grid, |_, y| (2.0 * y).sin());
        assert!(semigroup_apply(&h, 1.7, 40.0, Sign::Minus).unwrap().max_relative_difference(&h) < 1e-15);
        let r = PowerLaw::default().sample(grid);
        let moved = semigroup_apply(&r, 0.3, 11.0, Sign::Plus).unwrap();
        assert!((moved.l2_norm() / r.l2_norm() - 1.0).abs() < 1e-13);
        assert!((moved.hminus1_norm().unwrap() / r.hminus1_norm().unwrap() - 1.0).abs() < 1e-13);
        let with_mean = SpectralField::from_fn(grid, |x, _| 1.0 + x.cos());
        assert!(semigroup_apply(&with_mean, 1.0, 1.0, Sign::Plus).is_err());
    }

    #[test]
    fn group_law() {
        let r = PowerLaw::default().sample(g(32, 1.0));
        let a = semigroup_apply(&semigroup_apply(&r, 0.2, 7.0, Sign::Plus).unwrap(), 0.5, 7.0, Sign::Plus).unwrap();
        let b = semigroup_apply(&r, 0.7, 7.0, Sign::Plus).unwrap();
        assert!(a.max_relative_difference(&b) < 1e-13);
        let back = semigroup_apply(&b, 0.7, 7.0, Sign::Minus).unwrap();
        assert!(back.max_relative_difference(&r) < 1e-13);
    }

    #[test]
    fn diagonalize_examples() {
        let grid = g(32, 1.0);
        let w = PowerLaw::default().with_seed(1, 0).sample(grid);
        let (p, m) = diagonalize(&w, &SpectralField::zeros(grid)).unwrap();
        assert_eq!(p, w);
        assert_eq!(m, w);
        let c = SpectralField::from_fn(grid, |x, _| x.cos());
        let (p, m) = diagonalize(&SpectralField::zeros(grid), &c).unwrap();
        assert!(p.max_relative_difference(&c) < 1e-15 && m.max_relative_difference(&c.scaled(-1.0)) < 1e-15);
        let rho = &PowerLaw::default().with_seed(2, 0).sample(grid) + &SpectralField::from_fn(grid, |_, _| 0.7);
        let (p, m) = diagonalize(&w, &rho).unwrap();
        let (w2, r2) = undiagonalize(&p, &m).unwrap();
        assert!(w2.max_relative_difference(&w) < 1e-12);
        assert!(r2.max_relative_difference(&rho.without_mean()) < 1e-12);
    }

    #[test]
    fn g_operator_examples() {
        let grid = g(64, 4.0);
        let f = localized_field(grid, 3);
        let raw = crate::data::gaussian_bump(grid, (3.0, 4.0), 0.8, 1.0).without_mean();
        let g0 = g_operator_default(&raw, 0.0, Sign::Plus);
        assert!(g0.max_relative_difference(&raw.radial_multiplier(psi0)) < 1e-15);
        let high = SpectralField::from_fn(grid, |x, _| (16.0 * x / 4.0).cos());
        assert!(g_operator_default(&high, 1.0, Sign::Plus).coeff_norm() < 1e-14 * high.coeff_norm());
        for t in [0.0, 1.0, 10.0, 100.0] {
            let v = g_operator_default(&f, t, Sign::Minus).l2_norm();
            assert!(v <= f.l2_norm() * (1.0 + 1e-13));
            assert!((v - g_operator_default(&f, 0.0, Sign::Minus).l2_norm()).abs() < 1e-12 * v);
        }
    }

    #[test]
    fn l2_strichartz_is_time_independent() {
        // r = 2 is admissible only with gamma = inf; the integrand is constant in time
        let grid = g(64, 4.0);
        let f = localized_field(grid, 5);
        let s = strichartz_measure(&f, 300.0, f64::INFINITY, 2.0, 2.0, 2400, Sign::Plus).unwrap();
        assert!((s.value - f.radial_multiplier(psi0).l2_norm()).abs() < 1e-12 * s.value);
        assert!(strichartz_measure(&f, 300.0, 8.0, 2.0, 2.0, 2400, Sign::Plus).is_err());
    }

    #[test]
    fn admissibility_and_nodes() {
        assert!(check_admissible(4.0, f64::INFINITY).is_ok());
        assert!(check_admissible(8.0, 4.0).is_ok());
        assert!(check_admissible(4.0, 4.0).is_err());
        assert!(check_admissible(2.0, f64::INFINITY).is_err());
        let f = localized_field(g(32, 2.0), 1);
        assert!(matches!(
            strichartz_measure(&f, 100.0, 4.0, f64::INFINITY, 1.0, 100, Sign::Plus),
            Err(Error::InsufficientNodes { .. })
        ));
        let bank = DyadicBank::build(g(64, 4.0)).unwrap();
        let f = localized_field(g(64, 4.0), 1);
        assert!(matches!(
            besov_strichartz_measure(&f, 1.0, 8.0, f64::INFINITY, 4.0, 0.0, 1.0, 16, Sign::Plus, &bank),
            Err(Error::GammaExceedsQ { .. })
        ));
    }

    #[test]
    fn quadrature_refinement() {
        let grid = g(64, 4.0);
        let f = localized_field(grid, 8);
        let a = strichartz_measure(&f, 32.0, 4.0, f64::INFINITY, 1.0, 128, Sign::Plus).unwrap();
        let b = strichartz_measure(&f, 32.0, 4.0, f64::INFINITY, 1.0, 256, Sign::Plus).unwrap();
        assert!((a.value / b.value - 1.0).abs() < 5e-3, "{} {}", a.value, b.value);
    }

    #[test]
    fn kappa_reflection_for_symmetric_data() {
        let grid = g(64, 4.0);
        let bank = DyadicBank::build(grid).unwrap();
        let f = localized_field_symmetric(grid, 2);
        let a = besov_strichartz_measure(&f, 50.0, 4.0, f64::INFINITY, f64::INFINITY, 0.0, 1.0, 200, Sign::Plus, &bank).unwrap();
        let b = besov_strichartz_measure(&f, -50.0, 4.0, f64::INFINITY, f64::INFINITY, 0.0, 1.0, 200, Sign::Plus, &bank).unwrap();
        assert!((a.value - b.value).abs() < 1e-10 * a.value);
    }

    #[test]
    fn besov_single_band_reduces_to_lebesgue() {
        // band-0 content only: the Besov sum has one term equal to the L^r norm of that band
        let grid = g(64, 4.0);
        let bank = DyadicBank::build(grid).unwrap();
        let f = SpectralField::from_fn(grid, |x, _| (x / 4.0).cos());
        let bf = besov_strichartz_measure(&f, 10.0, 4.0, f64::INFINITY, f64::INFINITY, 0.5, 1.0, 64, Sign::Plus, &bank).unwrap();
        // |xi| = 1/4 sits on the plateau of band -2
        let lf = strichartz_measure(&f, 10.0, 4.0, f64::INFINITY, 1.0, 64, Sign::Plus).unwrap();
        let band = bank.project_band(&f, -2).unwrap();
        assert!(band.max_relative_difference(&f) < 1e-15);
        assert!(lf.value < 1e-14);
        assert!((bf.value - 2f64.powf(-1.0) * strichartz_plain(&f, 10.0, 1.0, 64)).abs() < 1e-12);
    }

    /// `L^inf` Strichartz quantity with no cutoff, by direct evaluation.
    fn strichartz_plain(f: &SpectralField, kappa: f64, t_max: f64, nodes: usize) -> f64 {
        let vals: Vec<f64> = (0..=nodes)
            .map(|i| {
                semigroup_apply(f, t_max * i as f64 / nodes as f64, kappa, Sign::Plus)
                    .unwrap()
                    .linf_norm()
            })
            .collect();
        time_integral(&vals, t_max, 4.0)
    }

    #[test]
    fn loglog_fit_recovers_power() {
        let xs: Vec<f64> = (0..6).map(|e| 2f64.powi(e)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-0.25)).collect();
        let f = fit_loglog(&xs, &ys).unwrap();
        assert!((f.slope + 0.25).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit_loglog(&xs[..1], &ys[..1]).is_err());
    }

    #[test]
    fn quadrature_weights_integrate_cubics() {
        for m in 1..9 {
            let w = quadrature_weights(m);
            let h = 1.0 / m as f64;
            let integral: f64 = w.iter().enumerate().map(|(k, w)| w * h * (k as f64 * h).powi(3)).sum();
            if m >= 2 {
                assert!((integral - 0.25).abs() < 1e-14, "m = {m}");
            }
            assert!((w.iter().sum::<f64>() * h - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn duhamel_on_linear_run() {
        let grid = g(32, 1.0);
        let w = PowerLaw::default().with_seed(3, 1).sample(grid);
        let r = PowerLaw::default().with_seed(3, 2).sample(grid);
        let st = SimState::new(w, r, 20.0).unwrap();
        let cfg = StepperConfig {
            nonlinear: false,
            ..StepperConfig::fixed(Scheme::IntegratingFactor, 0.005)
        };
        let rc = RunConfig {
            keep_snapshots: true,
            ..RunConfig::new(0.5, 0.02)
        };
        let tr = run(&st, &cfg, &rc).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            assert!(duhamel_residual(&tr, &cfg, sign).unwrap().max < 1e-10);
        }
        let coarse = RunConfig {
            keep_snapshots: true,
            ..RunConfig::new(0.5, 0.05)
        };
        let tr = run(&st, &cfg, &coarse).unwrap();
        assert!(matches!(
            duhamel_residual(&tr, &cfg, Sign::Plus),
            Err(Error::SnapshotsTooCoarse { .. })
        ));
    }

    #[test]
    fn kappa0_examples() {
        let base = Kappa0Inputs {
            t: 1.0,
            z: 1.0,
            c6: 1.0,
            c7: 1.0,
            gamma: 4.0,
        };
        let k = kappa0_estimate(&base).unwrap();
        let direct = (2.0 * (1.0 + 1f64.exp())).powi(4);
        assert!((k.value / direct - 1.0).abs() < 1e-13);
        let tiny = kappa0_estimate(&Kappa0Inputs { z: 1e-300, ..base }).unwrap();
        assert!((tiny.value - 16.0).abs() < 1e-12);
        let prev = k.value;
        for inp in [
            Kappa0Inputs { z: 1.1, ..base },
            Kappa0Inputs { t: 1.1, ..base },
            Kappa0Inputs { c6: 1.1, ..base },
            Kappa0Inputs { c7: 1.1, ..base },
        ] {
            assert!(kappa0_estimate(&inp).unwrap().value > prev);
        }
        let huge = kappa0_estimate(&Kappa0Inputs { z: 1e3, ..base }).unwrap();
        assert!(huge.overflow && huge.value.is_infinite() && huge.log_value.is_finite());
        assert!(kappa0_estimate(&Kappa0Inputs { t: -1.0, ..base }).is_err());
    }
}
