//! Pseudo-spectral time integration of the stratified vorticity/density system
//!
//! ```text
//! d_t omega + u . grad omega = kappa d_1 rho
//! d_t rho   + u . grad rho   = kappa u_2,        u = grad_perp (-Delta)^-1 omega
//! ```

mod diagnostics;
mod run;

pub use diagnostics::{DiagnosticsRecord, Diagnostician, Integrands, NormPair};
pub use run::{gronwall_fit, lifespan, run, run_with, LifespanReport, Outcome, RunConfig, Trajectory};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{advect_physical, biot_savart, Axis, SpectralField};
use crate::grid::GridSpec;

/// Unknowns of the system at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub omega: SpectralField,
    pub rho: SpectralField,
    pub t: f64,
    pub kappa: f64,
}

impl SimState {
    pub fn new(omega: SpectralField, rho: SpectralField, kappa: f64) -> Result<Self> {
        omega.same_grid(&rho)?;
        if !omega.is_mean_zero() {
            return Err(Error::NonzeroMean { mean: omega.mean() });
        }
        for f in [&omega, &rho] {
            let r = f.hermitian_residual();
            if r > crate::field::SYMMETRY_TOLERANCE * (1.0 + f.coeff_norm()) {
                return Err(Error::SymmetryViolation { residual: r });
            }
        }
        Ok(SimState {
            omega,
            rho,
            t: 0.0,
            kappa,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.omega.grid()
    }

    /// `||omega||_{H^-1}^2 + ||rho||_{L^2}^2`.
    pub fn energy(&self) -> f64 {
        self.omega.hminus1_norm().unwrap_or(f64::NAN).powi(2) + self.rho.l2_norm().powi(2)
    }

    pub fn is_finite(&self) -> bool {
        self.omega.is_finite() && self.rho.is_finite()
    }

    /// `V+- = omega +- Lambda rho` (the mean of `rho` drops out).
    pub fn dispersive_pair(&self) -> (SpectralField, SpectralField) {
        let lr = self.rho.without_mean().lambda_power(1.0).expect("mean removed");
        (&self.omega + &lr, &self.omega - &lr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Classical four-stage Runge-Kutta on the full right-hand side.
    Rk4,
    /// Four-stage Lawson scheme: the linear coupling is integrated exactly.
    IntegratingFactor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DtPolicy {
    Fixed {
        dt: f64,
    },
    /// `dt = min(c0 dx / ||u||_inf, c1 / (1 + |kappa|), dt_max)`; the integrating-factor
    /// scheme ignores the `kappa` cap.
    Cfl {
        #[serde(default = "half")]
        c0: f64,
        #[serde(default = "half")]
        c1: f64,
        #[serde(default = "default_dt_max")]
        dt_max: f64,
    },
}

fn half() -> f64 {
    0.5
}

fn default_dt_max() -> f64 {
    1e-2
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub dt: DtPolicy,
    #[serde(default = "yes")]
    pub dealias: bool,
    /// Switches the transport terms off, leaving the linear dispersive system.
    #[serde(default = "yes")]
    pub nonlinear: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            scheme: Scheme::IntegratingFactor,
            dt: DtPolicy::Fixed { dt: 1e-3 },
            dealias: true,
            nonlinear: true,
        }
    }
}

impl StepperConfig {
    pub fn fixed(scheme: Scheme, dt: f64) -> Self {
        StepperConfig {
            scheme,
            dt: DtPolicy::Fixed { dt },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.dt {
            DtPolicy::Fixed { dt } => dt > 0.0 && dt.is_finite(),
            DtPolicy::Cfl { c0, c1, dt_max } => c0 > 0.0 && c1 > 0.0 && dt_max > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad time step policy {:?}", self.dt)))
        }
    }

    /// Step size proposed for `state` (before clipping to output times).
    pub fn propose_dt(&self, state: &SimState) -> Result<f64> {
        match self.dt {
            DtPolicy::Fixed { dt } => Ok(dt),
            DtPolicy::Cfl { c0, c1, dt_max } => {
                let u = biot_savart(&state.omega)?.linf_norm();
                let mut dt = dt_max;
                if u > 0.0 {
                    dt = dt.min(c0 * state.grid().dx() / u);
                }
                if self.scheme == Scheme::Rk4 {
                    dt = dt.min(c1 / (1.0 + state.kappa.abs()));
                }
                Ok(dt)
            }
        }
    }
}

/// Transport terms `(-u . grad omega, -u . grad rho)`.
///
/// Their zero modes vanish identically in the continuum and are set to zero exactly.
pub fn nonlinear_terms(omega: &SpectralField, rho: &SpectralField, dealias: bool) -> Result<(SpectralField, SpectralField)> {
    let u = biot_savart(omega)?;
    let u1 = u.u1.to_physical();
    let u2 = u.u2.to_physical();
    let mut a = -&advect_physical(&u1, &u2, omega, dealias);
    let mut b = -&advect_physical(&u1, &u2, rho, dealias);
    a.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    b.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    Ok((a, b))
}

/// Linear coupling `(kappa d_1 rho, kappa u_2)`.
pub fn linear_terms(omega: &SpectralField, rho: &SpectralField, kappa: f64) -> Result<(SpectralField, SpectralField)> {
    let u = biot_savart(omega)?;
    Ok((rho.derivative(Axis::X1).scaled(kappa), u.u2.scaled(kappa)))
}

/// Full right-hand side `(d_t omega, d_t rho)`.
pub fn rhs(state: &SimState, config: &StepperConfig) -> Result<(SpectralField, SpectralField)> {
    let (mut a, mut b) = linear_terms(&state.omega, &state.rho, state.kappa)?;
    if config.nonlinear {
        let (na, nb) = nonlinear_terms(&state.omega, &state.rho, config.dealias)?;
        a += &na;
        b += &nb;
    }
    Ok((a, b))
}

/// `<d omega, omega>_{H^-1} + <d rho, rho>_{L^2}` and the Cauchy-Schwarz scale it is measured against.
pub fn energy_residual(state: &SimState, config: &StepperConfig) -> Result<(f64, f64)> {
    let (a, b) = rhs(state, config)?;
    let v = a.inner_hminus1(&state.omega)? + b.inner_l2(&state.rho)?;
    let scale = a.hminus1_norm()? * state.omega.hminus1_norm()? + b.l2_norm() * state.rho.l2_norm();
    Ok((v, scale))
}

/// Exact flow of the linear coupling over a fixed time `h`.
///
/// Per mode, with `a = kappa xi_1 / |xi|`,
/// `omega <- cos(ah) omega + i sin(ah) |xi| rho` and `rho <- cos(ah) rho + i sin(ah) omega / |xi|`.
#[derive(Debug, Clone)]
pub struct LinearPropagator {
    pub h: f64,
    pub kappa: f64,
    grid: GridSpec,
    cos: Vec<f64>,
    up: Vec<f64>,
    down: Vec<f64>,
}

impl LinearPropagator {
    pub fn new(grid: GridSpec, kappa: f64, h: f64) -> Self {
        let n = grid.n;
        let mut cos = vec![1.0; n * n];
        let mut up = vec![0.0; n * n];
        let mut down = vec![0.0; n * n];
        for i1 in 0..n {
            let xi1 = grid.xi(i1);
            for i2 in 0..n {
                let r = xi1.hypot(grid.xi(i2));
                if r == 0.0 {
                    continue;
                }
                let (s, c) = (kappa * xi1 / r * h).sin_cos();
                let idx = i1 * n + i2;
                cos[idx] = c;
                up[idx] = s * r;
                down[idx] = s / r;
            }
        }
        LinearPropagator {
            h,
            kappa,
            grid,
            cos,
            up,
            down,
        }
    }

    pub fn apply(&self, omega: &SpectralField, rho: &SpectralField) -> (SpectralField, SpectralField) {
        debug_assert!(omega.grid() == &self.grid && rho.grid() == &self.grid);
        let (w, r) = (omega.coeffs(), rho.coeffs());
        let mut wo = Vec::with_capacity(w.len());
        let mut ro = Vec::with_capacity(w.len());
        for i in 0..w.len() {
            let c = self.cos[i];
            wo.push(w[i] * c + Complex64::new(0.0, self.up[i]) * r[i]);
            ro.push(r[i] * c + Complex64::new(0.0, self.down[i]) * w[i]);
        }
        (
            SpectralField::from_coeffs(self.grid, wo).expect("grid length"),
            SpectralField::from_coeffs(self.grid, ro).expect("grid length"),
        )
    }
}

/// Advances states; caches the exact propagators for the last step size used.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub config: StepperConfig,
    cache: Option<(LinearPropagator, LinearPropagator)>,
}

pub(crate) type Pair = (SpectralField, SpectralField);

/// Classical RK4 for `v' = f(t, v)`.
pub(crate) fn classic_rk4(v: &Pair, t: f64, dt: f64, f: impl Fn(f64, &Pair) -> Result<Pair>) -> Result<Pair> {
    let k1 = f(t, v)?;
    let k2 = f(t + dt / 2.0, &combo(v, &[(dt / 2.0, &k1)]))?;
    let k3 = f(t + dt / 2.0, &combo(v, &[(dt / 2.0, &k2)]))?;
    let k4 = f(t + dt, &combo(v, &[(dt, &k3)]))?;
    Ok(combo(v, &[(dt / 6.0, &k1), (dt / 3.0, &k2), (dt / 3.0, &k3), (dt / 6.0, &k4)]))
}

/// Lawson RK4 for `v' = L v + nl(t, v)` with `full = exp(dt L)` and `half = exp(dt L / 2)`.
pub(crate) fn lawson_rk4(
    v: &Pair,
    t: f64,
    dt: f64,
    full: &LinearPropagator,
    half: &LinearPropagator,
    nl: impl Fn(f64, &Pair) -> Result<Pair>,
) -> Result<Pair> {
    let ap = |p: &LinearPropagator, x: &Pair| p.apply(&x.0, &x.1);
    let k1 = nl(t, v)?;
    let k2 = nl(t + dt / 2.0, &ap(half, &combo(v, &[(dt / 2.0, &k1)])))?;
    let k3 = nl(t + dt / 2.0, &combo(&ap(half, v), &[(dt / 2.0, &k2)]))?;
    let ev = ap(full, v);
    let k4 = nl(t + dt, &combo(&ev, &[(dt, &ap(half, &k3))]))?;
    let k23 = ap(half, &combo(&k2, &[(1.0, &k3)]));
    Ok(combo(&ev, &[(dt / 6.0, &ap(full, &k1)), (dt / 3.0, &k23), (dt / 6.0, &k4)]))
}

fn combo(base: &Pair, terms: &[(f64, &Pair)]) -> Pair {
    let mut a = base.0.clone();
    let mut b = base.1.clone();
    for (c, p) in terms {
        a.axpy(*c, &p.0);
        b.axpy(*c, &p.1);
    }
    (a, b)
}

impl Stepper {
    pub fn new(config: StepperConfig) -> Self {
        Stepper { config, cache: None }
    }

    pub(crate) fn propagators(&mut self, grid: GridSpec, kappa: f64, h: f64) -> &(LinearPropagator, LinearPropagator) {
        let stale = match &self.cache {
            Some((full, _)) => full.h != h || full.kappa != kappa || full.grid != grid,
            None => true,
        };
        if stale {
            self.cache = Some((
                LinearPropagator::new(grid, kappa, h),
                LinearPropagator::new(grid, kappa, h / 2.0),
            ));
        }
        self.cache.as_ref().expect("filled above")
    }

    fn nonlinear(&self, p: &Pair) -> Result<Pair> {
        if self.config.nonlinear {
            nonlinear_terms(&p.0, &p.1, self.config.dealias)
        } else {
            let g = *p.0.grid();
            Ok((SpectralField::zeros(g), SpectralField::zeros(g)))
        }
    }

    fn full(&self, p: &Pair, kappa: f64) -> Result<Pair> {
        let (mut a, mut b) = linear_terms(&p.0, &p.1, kappa)?;
        let (na, nb) = self.nonlinear(p)?;
        a += &na;
        b += &nb;
        Ok((a, b))
    }

    /// One step of size `dt`.
    pub fn step(&mut self, state: &SimState, dt: f64) -> Result<SimState> {
        let v: Pair = (state.omega.clone(), state.rho.clone());
        let kappa = state.kappa;
        let next = match self.config.scheme {
            Scheme::Rk4 => classic_rk4(&v, state.t, dt, |_, p| self.full(p, kappa))?,
            Scheme::IntegratingFactor => {
                let (full, halfp) = self.propagators(*state.grid(), kappa, dt).clone();
                lawson_rk4(&v, state.t, dt, &full, &halfp, |_, p| self.nonlinear(p))?
            }
        };
        let out = SimState {
            omega: next.0,
            rho: next.1,
            t: state.t + dt,
            kappa,
        };
        if !out.is_finite() {
            return Err(Error::BlowupSuspected {
                t: out.t,
                reason: "non-finite coefficients".into(),
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::PowerLaw;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n, 1.0).unwrap()
    }

    fn random_state(n: usize, kappa: f64, amp: f64, seed: u64) -> SimState {
        let g = grid(n);
        let w = PowerLaw::default().with_seed(seed, 1).sample(g).scaled(amp);
        let r = PowerLaw::default().with_seed(seed, 2).sample(g).scaled(amp);
        SimState::new(w, r, kappa).unwrap()
    }

    #[test]
    fn x1_independent_density_is_stationary() {
        let g = grid(32);
        let st = SimState::new(SpectralField::zeros(g), SpectralField::from_fn(g, |_, y| y.cos()), 3.0).unwrap();
        let (a, b) = rhs(&st, &StepperConfig::default()).unwrap();
        assert!(a.coeff_norm() < 1e-14 && b.coeff_norm() < 1e-14);
        for scheme in [Scheme::Rk4, Scheme::IntegratingFactor] {
            let mut s = Stepper::new(StepperConfig::fixed(scheme, 0.01));
            let next = s.step(&st, 0.01).unwrap();
            assert!(next.rho.max_relative_difference(&st.rho) < 1e-14);
            assert!((next.t - 0.01).abs() < 1e-15);
        }
    }

    #[test]
    fn taylor_green_is_a_steady_euler_flow() {
        // cos x1 cos x2 is an eigenfunction of the Laplacian, so u . grad omega = 0
        let g = grid(32);
        let w = SpectralField::from_fn(g, |x, y| x.cos() * y.cos());
        let st = SimState::new(w, SpectralField::zeros(g), 0.0).unwrap();
        let (a, b) = rhs(&st, &StepperConfig::default()).unwrap();
        assert!(a.coeff_norm() < 1e-14 && b.coeff_norm() < 1e-14);
    }

    #[test]
    fn semi_discrete_energy_identity() {
        for (seed, kappa) in [(1, 0.0), (2, 5.0), (3, 64.0), (4, -17.0)] {
            let st = random_state(64, kappa, 1.0, seed);
            let (v, scale) = energy_residual(&st, &StepperConfig::default()).unwrap();
            assert!(v.abs() < 1e-10 * scale, "{v} {scale}");
        }
    }

    #[test]
    fn propagator_preserves_dispersive_moduli() {
        let st = random_state(32, 40.0, 1.0, 7);
        let p = LinearPropagator::new(*st.grid(), 40.0, 0.37);
        let (w, r) = p.apply(&st.omega, &st.rho);
        let moved = SimState { omega: w, rho: r, ..st.clone() };
        let (a0, b0) = st.dispersive_pair();
        let (a1, b1) = moved.dispersive_pair();
        for (x, y) in [(a0, a1), (b0, b1)] {
            for (c0, c1) in x.coeffs().iter().zip(y.coeffs()) {
                assert!((c0.norm() - c1.norm()).abs() < 1e-13 * (1.0 + c0.norm()));
            }
        }
        // composition law
        let q = LinearPropagator::new(*st.grid(), 40.0, 0.37 / 2.0);
        let (w2, r2) = q.apply(&st.omega, &st.rho);
        let (w2, r2) = q.apply(&w2, &r2);
        assert!(w2.max_relative_difference(&moved.omega) < 1e-13);
        assert!(r2.max_relative_difference(&moved.rho) < 1e-13);
    }

    #[test]
    fn propagator_solves_the_linear_system() {
        // d/dh of the propagator at h = 0 equals the linear terms
        let st = random_state(32, 9.0, 1.0, 8);
        let h = 1e-6;
        let p = LinearPropagator::new(*st.grid(), 9.0, h);
        let m = LinearPropagator::new(*st.grid(), 9.0, -h);
        let (wp, rp) = p.apply(&st.omega, &st.rho);
        let (wm, rm) = m.apply(&st.omega, &st.rho);
        let dw = (&wp - &wm).scaled(0.5 / h);
        let dr = (&rp - &rm).scaled(0.5 / h);
        let (a, b) = linear_terms(&st.omega, &st.rho, 9.0).unwrap();
        assert!(dw.max_relative_difference(&a) < 1e-7);
        assert!(dr.max_relative_difference(&b) < 1e-7);
    }

    #[test]
    fn schemes_agree_and_converge() {
        let st = random_state(32, 4.0, 1.0, 9);
        let t_end = 0.2;
        let run = |scheme, n: usize| {
            let mut s = Stepper::new(StepperConfig::fixed(scheme, t_end / n as f64));
            let mut x = st.clone();
            for _ in 0..n {
                x = s.step(&x, t_end / n as f64).unwrap();
            }
            x
        };
        for scheme in [Scheme::Rk4, Scheme::IntegratingFactor] {
            let reference = run(scheme, 400);
            let e1 = run(scheme, 20).omega.max_relative_difference(&reference.omega);
            let e2 = run(scheme, 40).omega.max_relative_difference(&reference.omega);
            let order = (e1 / e2).log2();
            assert!(order >= 3.7, "{scheme:?} order {order}");
        }
        let a = run(Scheme::Rk4, 400);
        let b = run(Scheme::IntegratingFactor, 400);
        assert!(a.omega.max_relative_difference(&b.omega) < 1e-9);
    }

    #[test]
    fn rejects_mean_vorticity() {
        let g = grid(16);
        let w = SpectralField::from_fn(g, |x, _| 1.0 + x.cos());
        assert!(SimState::new(w, SpectralField::zeros(g), 0.0).is_err());
    }

    #[test]
    fn cfl_policy() {
        let st = random_state(32, 100.0, 1.0, 3);
        let mut cfg = StepperConfig {
            scheme: Scheme::Rk4,
            dt: DtPolicy::Cfl {
                c0: 0.5,
                c1: 0.5,
                dt_max: 1.0,
            },
            ..Default::default()
        };
        let dt = cfg.propose_dt(&st).unwrap();
        assert!((dt - 0.5 / 101.0).abs() < 1e-15);
        cfg.scheme = Scheme::IntegratingFactor;
        assert!(cfg.propose_dt(&st).unwrap() > dt);
    }
}
