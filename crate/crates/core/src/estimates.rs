//! Measured versions of the commutator, product and Bernstein inequalities, and the
//! energy cancellation between the buoyancy and the vortex-stretching pairing.

use serde::{Deserialize, Serialize};

use crate::data::{band_field, PowerLaw};
use crate::error::{Error, Result};
use crate::field::{biot_savart, grad_linf, Axis, SpectralField, VectorField};
use crate::grid::GridSpec;
use crate::littlewood_paley::{lq_sum, BesovSpec, DyadicBank};

/// Which inequality a battery run measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    /// `[f . grad, Delta_j] g` against `|grad f|_inf |g|_{B^s} + |grad g|_inf |f|_{B^s}`.
    Bracket,
    /// `[f . grad, Lambda^-1 Delta_j] g` against `|grad f|_inf |g|_{B^{s-1}} + |g|_inf |f|_{B^s}`.
    Lambda,
    /// `(S_{j-2} f . grad) Delta_j g - Delta_j (f . grad g)` against `|grad f|_inf |g|_{B^s} + |g|_inf |f|_{B^{s+1}}`.
    Smoothed,
    /// `|fg|_{B^s}` against `|g|_inf |f|_{B^s} + |f|_inf |g|_{B^s}`.
    Product,
    /// `|grad Delta_j f|_2 / |Delta_j f|_2` against `2^j`.
    Bernstein,
}

impl Lemma {
    pub fn name(self) -> &'static str {
        match self {
            Lemma::Bracket => "bracket",
            Lemma::Lambda => "lambda",
            Lemma::Smoothed => "smoothed",
            Lemma::Product => "product",
            Lemma::Bernstein => "bernstein",
        }
    }

    /// Rejects smoothness indices outside the range where the inequality is claimed.
    pub fn check_smoothness(self, s: f64) -> Result<()> {
        let ok = match self {
            Lemma::Bracket | Lemma::Lambda | Lemma::Product => s > 0.0,
            Lemma::Smoothed => s > -1.0,
            Lemma::Bernstein => true,
        };
        if ok && s.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidSmoothness {
                s,
                lemma: self.name(),
            })
        }
    }
}

impl std::str::FromStr for Lemma {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bracket" => Lemma::Bracket,
            "lambda" => Lemma::Lambda,
            "smoothed" => Lemma::Smoothed,
            "product" => Lemma::Product,
            "bernstein" => Lemma::Bernstein,
            other => return Err(Error::InvalidParameter(format!("unknown lemma {other:?}"))),
        })
    }
}

/// Distribution of the random test fields.
///
/// The default annulus `1 <= |xi| <= 5` keeps every quadratic interaction inside the
/// region where the band partition is exact at `N = 64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSetup {
    pub grid: GridSpec,
    pub law: PowerLaw,
}

impl Default for TrialSetup {
    fn default() -> Self {
        TrialSetup {
            grid: GridSpec::new(64, 1.0).expect("valid grid"),
            law: PowerLaw::default(),
        }
    }
}

impl TrialSetup {
    pub fn with_n(mut self, n: usize) -> Self {
        self.grid.n = n;
        self
    }

    /// Divergence-free vector field and scalar for trial `t`.
    pub fn sample(&self, seed: u64, t: u64) -> Result<(VectorField, SpectralField)> {
        let base = seed.wrapping_mul(0x9E37_79B9).wrapping_add(t);
        let omega = self.law.with_seed(base, 0xF1).sample(self.grid);
        let f = biot_savart(&omega)?;
        let g = self.law.with_seed(base, 0x62).sample(self.grid);
        Ok((f, g))
    }
}

/// Per-trial left/right hand sides and the worst ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub lemma: Lemma,
    pub s: f64,
    #[serde(with = "crate::littlewood_paley::exponent")]
    pub q: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub max_ratio: f64,
    /// Worst ratio for the same seeds on the doubled grid, when measured.
    pub max_ratio_doubled: Option<f64>,
    /// Ratios outside the admissible window (Bernstein only).
    pub violations: usize,
}

impl RatioReport {
    fn from_pairs(lemma: Lemma, s: f64, q: f64, n: usize, seed: u64, pairs: Vec<(f64, f64)>) -> Self {
        let (lhs, rhs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let max_ratio = lhs.iter().zip(&rhs).map(|(&l, &r)| ratio(l, r)).fold(0.0, f64::max);
        RatioReport {
            lemma,
            s,
            q,
            n,
            trials: lhs.len(),
            seed,
            lhs,
            rhs,
            max_ratio,
            max_ratio_doubled: None,
            violations: 0,
        }
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.lhs.iter().zip(&self.rhs).map(|(&l, &r)| ratio(l, r)).collect()
    }

    /// `|doubled / baseline - 1|`, if the doubled run exists.
    pub fn resolution_change(&self) -> Option<f64> {
        let d = self.max_ratio_doubled?;
        if self.max_ratio == 0.0 {
            return Some(if d == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Some((d / self.max_ratio - 1.0).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.max_ratio.is_finite()
            && self.lhs.iter().chain(&self.rhs).all(|v| v.is_finite() && *v >= 0.0)
            && self.max_ratio_doubled.is_none_or(f64::is_finite)
    }
}

fn ratio(l: f64, r: f64) -> f64 {
    if l == 0.0 {
        0.0
    } else {
        l / r
    }
}

/// `[f . grad, Delta_j] g = f . grad(Delta_j g) - Delta_j(f . grad g)`.
pub fn commutator_bracket(f: &VectorField, g: &SpectralField, j: i32, bank: &DyadicBank) -> Result<SpectralField> {
    let inner = bank.project_band(g, j)?;
    let a = f.advect(&inner, true)?;
    let b = bank.project_band(&f.advect(g, true)?, j)?;
    Ok(&a - &b)
}

/// `[f . grad, Lambda^-1 Delta_j] g`.
pub fn commutator_lambda(f: &VectorField, g: &SpectralField, j: i32, bank: &DyadicBank) -> Result<SpectralField> {
    let inner = bank.project_band(g, j)?.lambda_power(-1.0)?;
    let a = f.advect(&inner, true)?;
    let b = bank.project_band(&f.advect(g, true)?, j)?.lambda_power(-1.0)?;
    Ok(&a - &b)
}

/// `(S_{j-2} f . grad) Delta_j g - Delta_j (f . grad g)` with the homogeneous low-pass.
pub fn commutator_smoothed(f: &VectorField, g: &SpectralField, j: i32, bank: &DyadicBank) -> Result<SpectralField> {
    let low = VectorField::new(bank.lowpass_hom(&f.u1, j - 2)?, bank.lowpass_hom(&f.u2, j - 2)?)?;
    let a = low.advect(&bank.project_band(g, j)?, true)?;
    let b = bank.project_band(&f.advect(g, true)?, j)?;
    Ok(&a - &b)
}

/// `(sum_j 2^{sjq} ||C_j||_2^q)^{1/q}` for a commutator family `C_j`.
fn family_norm(
    bank: &DyadicBank,
    s: f64,
    q: f64,
    term: impl Fn(i32) -> Result<SpectralField> + Sync,
) -> Result<f64> {
    let js: Vec<i32> = bank.range().collect();
    let norms = crate::par::map_collect(&js, |&j| term(j).map(|c| 2f64.powf(s * j as f64) * c.l2_norm()));
    Ok(lq_sum(norms.into_iter().collect::<Result<Vec<_>>>()?, q))
}

fn vector_besov(bank: &DyadicBank, f: &VectorField, s: f64, q: f64) -> Result<f64> {
    bank.besov_norm_parts(&[&f.u1, &f.u2], &BesovSpec::homogeneous(s, 2.0, q))
}

/// Left and right hand sides of a commutator inequality for one pair `(f, g)`.
pub fn measure_commutator(
    lemma: Lemma,
    f: &VectorField,
    g: &SpectralField,
    s: f64,
    q: f64,
    bank: &DyadicBank,
) -> Result<(f64, f64)> {
    lemma.check_smoothness(s)?;
    let hom = |s| BesovSpec::homogeneous(s, 2.0, q);
    match lemma {
        Lemma::Bracket => {
            let lhs = family_norm(bank, s, q, |j| commutator_bracket(f, g, j, bank))?;
            let rhs = f.grad_linf() * bank.besov_norm(g, &hom(s))? + grad_linf(g) * vector_besov(bank, f, s, q)?;
            Ok((lhs, rhs))
        }
        Lemma::Lambda => {
            let lhs = family_norm(bank, s, q, |j| commutator_lambda(f, g, j, bank))?;
            let rhs = f.grad_linf() * bank.besov_norm(g, &hom(s - 1.0))? + g.linf_norm() * vector_besov(bank, f, s, q)?;
            Ok((lhs, rhs))
        }
        Lemma::Smoothed => {
            let lhs = family_norm(bank, s, q, |j| commutator_smoothed(f, g, j, bank))?;
            let rhs =
                f.grad_linf() * bank.besov_norm(g, &hom(s))? + g.linf_norm() * vector_besov(bank, f, s + 1.0, q)?;
            Ok((lhs, rhs))
        }
        Lemma::Product | Lemma::Bernstein => Err(Error::InvalidParameter(format!(
            "{} is not a commutator estimate",
            lemma.name()
        ))),
    }
}

/// Left and right hand sides of the product rule with Hölder split `(2, inf)`.
pub fn measure_product(f: &SpectralField, g: &SpectralField, s: f64, q: f64, bank: &DyadicBank) -> Result<(f64, f64)> {
    Lemma::Product.check_smoothness(s)?;
    let spec = BesovSpec::homogeneous(s, 2.0, q);
    let fg = f.product(g)?.dealias();
    let lhs = bank.besov_norm(&fg, &spec)?;
    let rhs = g.linf_norm() * bank.besov_norm(f, &spec)? + f.linf_norm() * bank.besov_norm(g, &spec)?;
    Ok((lhs, rhs))
}

fn run_trials(
    lemma: Lemma,
    s: f64,
    q: f64,
    trials: usize,
    seed: u64,
    setup: &TrialSetup,
) -> Result<RatioReport> {
    lemma.check_smoothness(s)?;
    let bank = DyadicBank::build(setup.grid)?;
    let idx: Vec<u64> = (0..trials as u64).collect();
    let pairs = crate::par::map_collect(&idx, |&t| -> Result<(f64, f64)> {
        let (f, g) = setup.sample(seed, t)?;
        match lemma {
            Lemma::Product => measure_product(&f.u1, &g, s, q, &bank),
            _ => measure_commutator(lemma, &f, &g, s, q, &bank),
        }
    });
    let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(RatioReport::from_pairs(lemma, s, q, setup.grid.n, seed, pairs))
}

/// Worst commutator ratio over seeded random trials, repeated on the doubled grid.
pub fn verify_commutator_lemma(
    lemma: Lemma,
    s: f64,
    q: f64,
    trials: usize,
    seed: u64,
    setup: &TrialSetup,
) -> Result<RatioReport> {
    if matches!(lemma, Lemma::Product | Lemma::Bernstein) {
        return Err(Error::InvalidParameter(format!(
            "{} is not a commutator estimate",
            lemma.name()
        )));
    }
    with_doubling(run_trials(lemma, s, q, trials, seed, setup)?, setup, |st| {
        run_trials(lemma, s, q, trials, seed, st)
    })
}

/// Worst product-rule ratio over seeded random trials, repeated on the doubled grid.
pub fn verify_product_rule(s: f64, q: f64, trials: usize, seed: u64, setup: &TrialSetup) -> Result<RatioReport> {
    with_doubling(run_trials(Lemma::Product, s, q, trials, seed, setup)?, setup, |st| {
        run_trials(Lemma::Product, s, q, trials, seed, st)
    })
}

fn with_doubling(
    mut report: RatioReport,
    setup: &TrialSetup,
    run: impl Fn(&TrialSetup) -> Result<RatioReport>,
) -> Result<RatioReport> {
    let fine = TrialSetup {
        grid: setup.grid.refined(),
        law: setup.law,
    };
    report.max_ratio_doubled = Some(run(&fine)?.max_ratio);
    Ok(report)
}

/// `||grad f||_2 / (2^j ||f||_2)` for random fields filling band `j`; ratios must
/// lie in `[5/8, 7/4]`.
pub fn verify_bernstein(j: i32, trials: usize, seed: u64, grid: GridSpec) -> Result<RatioReport> {
    let bank = DyadicBank::build(grid)?;
    if !bank.range().contains(&j) {
        return Err(Error::BandOutOfRange {
            j,
            min: bank.j_min(),
            max: bank.j_max(),
        });
    }
    let idx: Vec<u64> = (0..trials as u64).collect();
    let scale = 2f64.powi(j);
    let pairs = crate::par::map_collect(&idx, |&t| {
        let f = band_field(grid, j, seed.wrapping_mul(1_000_003).wrapping_add(t));
        let grad = (f.derivative(Axis::X1).l2_norm().powi(2) + f.derivative(Axis::X2).l2_norm().powi(2)).sqrt();
        (grad, scale * f.l2_norm())
    });
    let mut report = RatioReport::from_pairs(Lemma::Bernstein, 0.0, 2.0, grid.n, seed, pairs);
    report.violations = report
        .ratios()
        .iter()
        .filter(|r| !(5.0 / 8.0..=7.0 / 4.0).contains(*r))
        .count();
    Ok(report)
}

/// Result of the buoyancy/vortex-stretching pairing check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    /// `|<d1 rho, omega>_{H^-1} + <u2, rho>_{L^2}|`.
    pub residual: f64,
    /// `||omega||_{H^-1} ||rho||_{L^2}`.
    pub scale: f64,
    /// Same pairing after applying `Delta_j` to every factor.
    pub per_band: Vec<(i32, f64)>,
}

impl CancellationReport {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual
        } else {
            self.residual / self.scale
        }
    }
}

fn pairing(omega: &SpectralField, rho: &SpectralField, u2: &SpectralField) -> Result<f64> {
    Ok(rho.derivative(Axis::X1).inner_hminus1(omega)? + u2.inner_l2(rho)?)
}

/// Measures `<d1 rho, omega>_{H^-1} + <u2, rho>_{L^2}`, globally and band by band.
pub fn cancellation_check(omega: &SpectralField, rho: &SpectralField, bank: &DyadicBank) -> Result<CancellationReport> {
    omega.same_grid(rho)?;
    if !omega.is_mean_zero() {
        return Err(Error::NonzeroMean { mean: omega.mean() });
    }
    let u = biot_savart(omega)?;
    let residual = pairing(omega, rho, &u.u2)?.abs();
    let scale = omega.hminus1_norm()? * rho.l2_norm();
    let mut per_band = Vec::new();
    for j in bank.range() {
        let w = bank.project_band(omega, j)?;
        let r = bank.project_band(rho, j)?;
        let v = bank.project_band(&u.u2, j)?;
        per_band.push((j, pairing(&w, &r, &v)?.abs()));
    }
    Ok(CancellationReport {
        residual,
        scale,
        per_band,
    })
}

/// `|<u . grad g, g>_{L^2}| / (||u||_inf ||g||_2^2)` with the dealiased transport term.
pub fn transport_check(u: &VectorField, g: &SpectralField) -> Result<f64> {
    let adv = u.advect(g, true)?;
    let v = adv.inner_l2(g)?.abs();
    let scale = u.linf_norm() * g.l2_norm().powi(2);
    Ok(if scale == 0.0 { v } else { v / scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (TrialSetup, DyadicBank) {
        let s = TrialSetup::default();
        let b = DyadicBank::build(s.grid).unwrap();
        (s, b)
    }

    #[test]
    fn zero_velocity_gives_zero_commutators() {
        let (st, bank) = setup();
        let (_, g) = st.sample(1, 0).unwrap();
        let f = VectorField::zeros(st.grid);
        for j in bank.range() {
            assert_eq!(commutator_bracket(&f, &g, j, &bank).unwrap().coeff_norm(), 0.0);
            assert_eq!(commutator_lambda(&f, &g, j, &bank).unwrap().coeff_norm(), 0.0);
            assert_eq!(commutator_smoothed(&f, &g, j, &bank).unwrap().coeff_norm(), 0.0);
        }
        for lemma in [Lemma::Bracket, Lemma::Lambda, Lemma::Smoothed] {
            let (l, r) = measure_commutator(lemma, &f, &g, 1.0, 1.0, &bank).unwrap();
            assert_eq!(ratio(l, r), 0.0);
        }
    }

    #[test]
    fn lambda_commutator_ignores_mean() {
        let (st, bank) = setup();
        let (f, _) = st.sample(2, 0).unwrap();
        let g = SpectralField::from_fn(st.grid, |_, _| 3.0);
        for j in bank.range() {
            assert!(commutator_lambda(&f, &g, j, &bank).unwrap().coeff_norm() < 1e-14);
        }
    }

    #[test]
    fn bracket_commutators_telescope() {
        let (st, bank) = setup();
        let (f, g) = st.sample(3, 0).unwrap();
        let mut sum = SpectralField::zeros(st.grid);
        for j in bank.range() {
            sum += &commutator_bracket(&f, &g, j, &bank).unwrap();
        }
        let scale = f.advect(&g, true).unwrap().coeff_norm();
        assert!(sum.coeff_norm() < 1e-8 * scale, "{}", sum.coeff_norm() / scale);
    }

    #[test]
    fn plateau_mode_with_slow_velocity_commutes_nearly() {
        // g at |xi| = 4 sits on the plateau of band 2; f at |xi| = 1 shifts it only to 3..5
        let grid = GridSpec::new(64, 1.0).unwrap();
        let bank = DyadicBank::build(grid).unwrap();
        let omega = SpectralField::from_fn(grid, |_, y| y.cos());
        let f = biot_savart(&omega).unwrap();
        let g = SpectralField::from_fn(grid, |x, _| (4.0 * x).cos());
        let c = commutator_bracket(&f, &g, 2, &bank).unwrap();
        let scale = f.linf_norm() * 4.0 * g.l2_norm();
        assert!(c.l2_norm() < 0.5 * scale);
    }

    #[test]
    fn smoothed_commutator_off_band() {
        // g at |xi| = 16 lies outside bands 0..2, f is slow
        let grid = GridSpec::new(128, 1.0).unwrap();
        let bank = DyadicBank::build(grid).unwrap();
        let f = biot_savart(&SpectralField::from_fn(grid, |x, _| x.sin())).unwrap();
        let g = SpectralField::from_fn(grid, |_, y| (16.0 * y).cos());
        let c = commutator_smoothed(&f, &g, 1, &bank).unwrap();
        assert!(c.coeff_norm() < 1e-14);
    }

    #[test]
    fn product_rule_with_constant_factor() {
        let (st, bank) = setup();
        let (_, f) = st.sample(4, 0).unwrap();
        let g = SpectralField::from_fn(st.grid, |_, _| -2.5);
        let (l, r) = measure_product(&f, &g, 1.0, 1.0, &bank).unwrap();
        assert!((l / r - 1.0).abs() < 1e-10);
        let z = SpectralField::zeros(st.grid);
        let (l, r) = measure_product(&f, &z, 1.0, 1.0, &bank).unwrap();
        assert_eq!(ratio(l, r), 0.0);
    }

    #[test]
    fn smoothness_ranges() {
        let st = TrialSetup::default();
        assert!(verify_commutator_lemma(Lemma::Bracket, 0.0, 1.0, 1, 0, &st).is_err());
        assert!(verify_product_rule(-0.5, 1.0, 1, 0, &st).is_err());
        assert!(Lemma::Smoothed.check_smoothness(-0.5).is_ok());
        assert!(Lemma::Smoothed.check_smoothness(-1.0).is_err());
    }

    #[test]
    fn battery_ratios_are_finite_and_stable() {
        let st = TrialSetup::default();
        for lemma in [Lemma::Bracket, Lemma::Lambda, Lemma::Smoothed] {
            let r = verify_commutator_lemma(lemma, 1.0, 1.0, 6, 11, &st).unwrap();
            assert!(r.is_finite());
            assert!(r.max_ratio > 0.0);
            assert!(r.resolution_change().unwrap() < 0.25, "{lemma:?} {r:?}");
        }
        let r = verify_product_rule(1.0, 1.0, 6, 11, &st).unwrap();
        assert!(r.is_finite() && r.resolution_change().unwrap() < 0.25);
    }

    #[test]
    fn bernstein_window() {
        let grid = GridSpec::new(128, 1.0).unwrap();
        for j in 0..=4 {
            let r = verify_bernstein(j, 20, 5, grid).unwrap();
            assert_eq!(r.violations, 0);
        }
        assert!(verify_bernstein(9, 1, 0, grid).is_err());
    }

    /// Independent mode sums for the two pairings: `A = sum Re(i xi1 rho w*) / |xi|^2`
    /// and `B = sum Re(i xi1 w rho*) / |xi|^2`, times the box area.
    fn mode_sums(omega: &SpectralField, rho: &SpectralField) -> (f64, f64) {
        let g = *omega.grid();
        let half = (g.n / 2) as i64;
        let (mut a, mut b) = (0.0, 0.0);
        for k1 in -half + 1..half {
            for k2 in -half + 1..half {
                if (k1, k2) == (0, 0) {
                    continue;
                }
                let xi1 = k1 as f64 / g.box_scale;
                let r2 = ((k1 * k1 + k2 * k2) as f64) / (g.box_scale * g.box_scale);
                let i = num_complex::Complex64::new(0.0, xi1 / r2);
                let w = omega.coeff(k1, k2);
                let r = rho.coeff(k1, k2);
                a += (i * r * w.conj()).re;
                b += (i * w * r.conj()).re;
            }
        }
        (a * g.area(), b * g.area())
    }

    #[test]
    fn cancellation_examples() {
        let grid = GridSpec::new(64, 1.0).unwrap();
        let bank = DyadicBank::build(grid).unwrap();
        let omega = SpectralField::from_fn(grid, |x, _| x.cos());
        let rho = SpectralField::from_fn(grid, |x, _| x.sin());
        let rep = cancellation_check(&omega, &rho, &bank).unwrap();
        // each term alone is nonzero
        let term = rho.derivative(Axis::X1).inner_hminus1(&omega).unwrap();
        assert!(term.abs() > 1.0);
        assert!(rep.residual < 1e-12 * (omega.l2_norm() * rho.l2_norm() + 1.0));
        let (a, b) = mode_sums(&omega, &rho);
        assert!((a - term).abs() < 1e-12 * a.abs());
        assert!((a + b).abs() < 1e-12 * a.abs());
        let zero = cancellation_check(&omega, &SpectralField::zeros(grid), &bank).unwrap();
        assert_eq!(zero.residual, 0.0);
        let meanful = SpectralField::from_fn(grid, |x, _| 1.0 + x.cos());
        assert!(cancellation_check(&meanful, &rho, &bank).is_err());
    }

    #[test]
    fn cancellation_random_pairs() {
        let (st, bank) = setup();
        for t in 0..20 {
            let (_, omega) = st.sample(21, t).unwrap();
            let (_, rho) = st.sample(22, t).unwrap();
            let rep = cancellation_check(&omega, &rho, &bank).unwrap();
            assert!(rep.relative() < 1e-10);
            let (a, b) = mode_sums(&omega, &rho);
            let u = biot_savart(&omega).unwrap();
            assert!((b - u.u2.inner_l2(&rho).unwrap()).abs() < 1e-10 * b.abs().max(1.0));
            assert!((a + b).abs() < 1e-10 * rep.scale);
            assert!(rep.per_band.iter().all(|&(_, r)| r < 1e-10 * rep.scale));
        }
    }

    #[test]
    fn transport_orthogonality() {
        let (st, _) = setup();
        for t in 0..5 {
            let (u, g) = st.sample(9, t).unwrap();
            assert!(transport_check(&u, &g).unwrap() < 1e-10);
        }
    }
}
