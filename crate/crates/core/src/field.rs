//! Spectral representation of real periodic fields and exact Fourier-multiplier operators.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::GridSpec;

/// Relative tolerance for the mean-zero precondition of homogeneous operators.
pub const MEAN_TOLERANCE: f64 = 1e-12;
/// Relative tolerance on the imaginary part produced by an inverse transform.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

/// How a multiplier treats the unpaired `k = -n/2` lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Nyquist {
    /// Real, even multiplier: apply as is.
    Apply,
    /// Odd multiplier: the lines are annihilated.
    Zero,
    /// Unimodular multiplier: the lines are left untouched.
    Keep,
}

/// Fourier coefficients of a real field on a periodic grid.
///
/// Normalization: `f(x) = sum_k c_k exp(i k.x / L0)`, so `cos(x1)` on `L0 = 1`
/// has `c_(+-1,0) = 1/2` and the zero mode is the spatial mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: vec![ZERO; grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// Forward transform of real samples (row-major, `x2` fastest).
    pub fn forward_transform(grid: GridSpec, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::forward(&mut buf, grid.n);
        Ok(SpectralField { grid, coeffs: buf })
    }

    /// Samples `f(x1, x2)` on the grid and transforms.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n;
        let mut samples = Vec::with_capacity(grid.len());
        for i1 in 0..n {
            let x1 = grid.coordinate(i1);
            for i2 in 0..n {
                samples.push(f(x1, grid.coordinate(i2)));
            }
        }
        Self::forward_transform(grid, &samples).expect("sample count matches grid")
    }

    /// Inverse transform to real samples; fails if the spectrum is not Hermitian.
    pub fn inverse_transform(&self) -> Result<Vec<f64>> {
        let mut buf = self.coeffs.clone();
        fft::inverse(&mut buf, self.grid.n);
        let mut max_re = 0.0f64;
        let mut max_im = 0.0f64;
        for c in &buf {
            max_re = max_re.max(c.re.abs());
            max_im = max_im.max(c.im.abs());
        }
        if max_im > SYMMETRY_TOLERANCE * max_re.max(f64::MIN_POSITIVE) && max_im > 1e-300 {
            return Err(Error::SymmetryViolation {
                residual: max_im / max_re.max(f64::MIN_POSITIVE),
            });
        }
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    /// Inverse transform without the symmetry check (hot paths on fields known to be real).
    pub fn to_physical(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        fft::inverse(&mut buf, self.grid.n);
        buf.into_iter().map(|c| c.re).collect()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at integer wave vector `(k1, k2)`; zero outside the stored range.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        match (self.grid.index_of(k1), self.grid.index_of(k2)) {
            (Some(i1), Some(i2)) => self.coeffs[i1 * self.grid.n + i2],
            _ => ZERO,
        }
    }

    /// Sets `c` at `k` and `conj(c)` at `-k`, keeping the field real.
    pub fn set_mode(&mut self, k1: i64, k2: i64, c: Complex64) {
        let n = self.grid.n;
        if let (Some(i1), Some(i2)) = (self.grid.index_of(k1), self.grid.index_of(k2)) {
            self.coeffs[i1 * n + i2] = c;
        }
        if let (Some(i1), Some(i2)) = (self.grid.index_of(-k1), self.grid.index_of(-k2)) {
            self.coeffs[i1 * n + i2] = c.conj();
        }
    }

    /// Spatial mean (the real part of the zero mode).
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max_k |c(-k) - conj(c(k))|` relative to the largest coefficient, over paired modes.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.grid.n;
        let mut worst = 0.0f64;
        for i1 in 0..n {
            for i2 in 0..n {
                let j1 = (n - i1) % n;
                let j2 = (n - i2) % n;
                let d = self.coeffs[i1 * n + i2] - self.coeffs[j1 * n + j2].conj();
                worst = worst.max(d.norm());
            }
        }
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn is_mean_zero(&self) -> bool {
        self.coeffs[0].norm() <= MEAN_TOLERANCE * self.coeff_norm()
    }

    fn require_mean_zero(&self) -> Result<()> {
        if self.is_mean_zero() {
            Ok(())
        } else {
            Err(Error::NonzeroMean {
                mean: self.coeffs[0].re,
            })
        }
    }

    /// Copy with the zero mode removed.
    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = ZERO;
        out
    }

    fn apply(&self, nyquist: Nyquist, m: impl Fn(f64, f64) -> Complex64) -> Self {
        let g = self.grid;
        let n = g.n;
        let mut out = Vec::with_capacity(g.len());
        for i1 in 0..n {
            let xi1 = g.xi(i1);
            let ny1 = g.is_nyquist(i1);
            for i2 in 0..n {
                let c = self.coeffs[i1 * n + i2];
                let on_line = ny1 || g.is_nyquist(i2);
                let v = match (on_line, nyquist) {
                    (true, Nyquist::Zero) => ZERO,
                    (true, Nyquist::Keep) => c,
                    _ => c * m(xi1, g.xi(i2)),
                };
                out.push(v);
            }
        }
        SpectralField {
            grid: g,
            coeffs: out,
        }
    }

    /// Applies a real, radially symmetric multiplier `m(|xi|)`.
    pub fn radial_multiplier(&self, m: impl Fn(f64) -> f64) -> Self {
        self.apply(Nyquist::Apply, |a, b| {
            Complex64::new(m((a * a + b * b).sqrt()), 0.0)
        })
    }

    /// Applies a unimodular phase `exp(i * phase(xi1, xi2))`, with `phase` odd in `xi`.
    ///
    /// The zero mode and the Nyquist lines are left unchanged.
    pub fn phase_multiplier(&self, phase: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = self.apply(Nyquist::Keep, |a, b| {
            if a == 0.0 && b == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, phase(a, b))
            }
        });
        out.coeffs[0] = self.coeffs[0];
        out
    }

    /// `d/dx_axis`: multiplier `i xi_axis`.
    pub fn derivative(&self, axis: Axis) -> Self {
        match axis {
            Axis::X1 => self.apply(Nyquist::Zero, |a, _| Complex64::new(0.0, a)),
            Axis::X2 => self.apply(Nyquist::Zero, |_, b| Complex64::new(0.0, b)),
        }
    }

    /// `Lambda^s = (-Delta)^(s/2)`: multiplier `|xi|^s`.
    pub fn lambda_power(&self, s: f64) -> Result<Self> {
        if s == 0.0 {
            return Ok(self.clone());
        }
        if s < 0.0 && !self.is_mean_zero() {
            return Err(Error::NegativePowerOnNonzeroMean {
                mean: self.coeffs[0].re,
            });
        }
        let mut out = self.radial_multiplier(|r| if r == 0.0 { 0.0 } else { r.powf(s) });
        out.coeffs[0] = ZERO;
        Ok(out)
    }

    /// `-Delta`: multiplier `|xi|^2`.
    pub fn neg_laplacian(&self) -> Self {
        self.radial_multiplier(|r| r * r)
    }

    /// `(-Delta)^-1` on mean-zero fields.
    pub fn inverse_laplacian(&self) -> Result<Self> {
        self.require_mean_zero()?;
        Ok(self.radial_multiplier(|r| if r == 0.0 { 0.0 } else { 1.0 / (r * r) }))
    }

    /// Riesz transform `R_axis = d_axis Lambda^-1`, multiplier `i xi_axis / |xi|`.
    pub fn riesz(&self, axis: Axis) -> Result<Self> {
        self.require_mean_zero()?;
        Ok(self.apply(Nyquist::Zero, |a, b| {
            let r = (a * a + b * b).sqrt();
            if r == 0.0 {
                return ZERO;
            }
            let num = match axis {
                Axis::X1 => a,
                Axis::X2 => b,
            };
            Complex64::new(0.0, num / r)
        }))
    }

    pub fn riesz1(&self) -> Result<Self> {
        self.riesz(Axis::X1)
    }

    /// Zeroes modes with `max(|k1|, |k2|) > dealias_fraction * n / 2`.
    pub fn dealias(&self) -> Self {
        let g = self.grid;
        let n = g.n;
        let kmax = g.dealias_kmax();
        let mut out = self.clone();
        for i1 in 0..n {
            let k1 = g.wavenumber(i1).abs() as f64;
            for i2 in 0..n {
                let k2 = g.wavenumber(i2).abs() as f64;
                if k1.max(k2) > kmax || g.is_nyquist(i1) || g.is_nyquist(i2) {
                    out.coeffs[i1 * n + i2] = ZERO;
                }
            }
        }
        out
    }

    /// True when every mode outside the dealiasing square is zero.
    pub fn is_dealiased(&self) -> bool {
        self.dealias() == *self
    }

    /// Pointwise product formed in physical space (not dealiased).
    pub fn product(&self, other: &SpectralField) -> Result<Self> {
        self.same_grid(other)?;
        let a = self.to_physical();
        let b = other.to_physical();
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Self::forward_transform(self.grid, &prod)
    }

    /// `L^p` norm. `p = 2` by Plancherel, `p = inf` as the grid maximum,
    /// otherwise uniform-grid quadrature.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if p == 2.0 {
            return Ok(self.l2_norm());
        }
        let samples = self.to_physical();
        Ok(lp_of_samples(&samples, p, self.grid.cell_area()))
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.area() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.to_physical().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Real `L^2` inner product.
    pub fn inner_l2(&self, other: &SpectralField) -> Result<f64> {
        self.same_grid(other)?;
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        Ok(self.grid.area() * s)
    }

    /// `<f, g>_{H^-1} = <Lambda^-1 f, Lambda^-1 g>_{L^2}` on mean-zero fields.
    pub fn inner_hminus1(&self, other: &SpectralField) -> Result<f64> {
        self.same_grid(other)?;
        self.require_mean_zero()?;
        other.require_mean_zero()?;
        let g = self.grid;
        let n = g.n;
        let mut s = 0.0;
        for i1 in 0..n {
            let xi1 = g.xi(i1);
            for i2 in 0..n {
                let xi2 = g.xi(i2);
                let r2 = xi1 * xi1 + xi2 * xi2;
                if r2 == 0.0 {
                    continue;
                }
                let idx = i1 * n + i2;
                s += (self.coeffs[idx] * other.coeffs[idx].conj()).re / r2;
            }
        }
        Ok(g.area() * s)
    }

    /// `||f||_{H^-1} = ||Lambda^-1 f||_{L^2}`.
    pub fn hminus1_norm(&self) -> Result<f64> {
        Ok(self.inner_hminus1(self)?.max(0.0).sqrt())
    }

    pub fn scaled(&self, a: f64) -> Self {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        assert_eq!(self.grid, x.grid, "grid mismatch in axpy");
        for (s, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += v * a;
        }
    }

    /// Largest relative coefficient difference, normalized by `max(|self|, |other|)`.
    pub fn max_relative_difference(&self, other: &SpectralField) -> f64 {
        let scale = self.max_abs_coeff().max(other.max_abs_coeff());
        if scale == 0.0 {
            return 0.0;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale
    }
}

pub(crate) fn lp_of_samples(samples: &[f64], p: f64, cell_area: f64) -> f64 {
    if p.is_infinite() {
        return samples.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let sum: f64 = samples.iter().map(|v| v.abs().powf(p)).sum();
    (sum * cell_area).powf(1.0 / p)
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        self.axpy(-1.0, rhs);
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scaled(a)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

/// Two-component field on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub u1: SpectralField,
    pub u2: SpectralField,
}

impl VectorField {
    pub fn new(u1: SpectralField, u2: SpectralField) -> Result<Self> {
        u1.same_grid(&u2)?;
        Ok(VectorField { u1, u2 })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        VectorField {
            u1: SpectralField::zeros(grid),
            u2: SpectralField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.u1.grid()
    }

    pub fn divergence(&self) -> SpectralField {
        &self.u1.derivative(Axis::X1) + &self.u2.derivative(Axis::X2)
    }

    /// `||xi . u_hat|| / ||u_hat||` in coefficient space.
    pub fn divergence_ratio(&self) -> f64 {
        let norm = (self.u1.coeff_norm().powi(2) + self.u2.coeff_norm().powi(2)).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        self.divergence().coeff_norm() / norm
    }

    pub fn l2_norm(&self) -> f64 {
        (self.u1.l2_norm().powi(2) + self.u2.l2_norm().powi(2)).sqrt()
    }

    /// Grid maximum of the Euclidean length `|u(x)|`.
    pub fn linf_norm(&self) -> f64 {
        let a = self.u1.to_physical();
        let b = self.u2.to_physical();
        a.iter()
            .zip(&b)
            .fold(0.0, |m, (x, y)| m.max((x * x + y * y).sqrt()))
    }

    /// Grid maximum of the Frobenius norm of the velocity gradient.
    pub fn grad_linf(&self) -> f64 {
        let parts = [
            self.u1.derivative(Axis::X1).to_physical(),
            self.u1.derivative(Axis::X2).to_physical(),
            self.u2.derivative(Axis::X1).to_physical(),
            self.u2.derivative(Axis::X2).to_physical(),
        ];
        (0..parts[0].len())
            .map(|i| parts.iter().map(|p| p[i] * p[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        VectorField {
            u1: f(&self.u1),
            u2: f(&self.u2),
        }
    }

    /// Transport term `u . grad g`, formed in physical space and optionally dealiased.
    pub fn advect(&self, g: &SpectralField, dealias: bool) -> Result<SpectralField> {
        self.u1.same_grid(g)?;
        let u1 = self.u1.to_physical();
        let u2 = self.u2.to_physical();
        Ok(advect_physical(&u1, &u2, g, dealias))
    }
}

/// `u . grad g` from physical velocity samples.
pub(crate) fn advect_physical(u1: &[f64], u2: &[f64], g: &SpectralField, dealias: bool) -> SpectralField {
    let g1 = g.derivative(Axis::X1).to_physical();
    let g2 = g.derivative(Axis::X2).to_physical();
    let prod: Vec<f64> = (0..u1.len()).map(|i| u1[i] * g1[i] + u2[i] * g2[i]).collect();
    let out = SpectralField::forward_transform(*g.grid(), &prod).expect("sample count matches grid");
    if dealias {
        out.dealias()
    } else {
        out
    }
}

/// Gradient magnitude `max_x |grad g(x)|` on the grid.
pub fn grad_linf(g: &SpectralField) -> f64 {
    let a = g.derivative(Axis::X1).to_physical();
    let b = g.derivative(Axis::X2).to_physical();
    a.iter()
        .zip(&b)
        .fold(0.0, |m, (x, y)| m.max((x * x + y * y).sqrt()))
}

/// Velocity `u = grad_perp (-Delta)^-1 omega` with `grad_perp = (-d2, d1)`.
///
/// Multiplier form `u_hat = i xi_perp omega_hat / |xi|^2`, `xi_perp = (-xi2, xi1)`.
pub fn biot_savart(omega: &SpectralField) -> Result<VectorField> {
    let psi = omega.inverse_laplacian()?;
    Ok(VectorField {
        u1: -&psi.derivative(Axis::X2),
        u2: psi.derivative(Axis::X1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n, 1.0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    fn cos_x1(g: GridSpec) -> SpectralField {
        SpectralField::from_fn(g, |x, _| x.cos())
    }

    #[test]
    fn constant_and_single_mode_coefficients() {
        let g = grid(16);
        let one = SpectralField::from_fn(g, |_, _| 1.0);
        assert!(close(one.coeff(0, 0).re, 1.0, 1e-14));
        assert!(one.coeffs()[1..].iter().all(|c| c.norm() < 1e-15));

        let f = cos_x1(g);
        assert!(close(f.coeff(1, 0).re, 0.5, 1e-14));
        assert!(close(f.coeff(-1, 0).re, 0.5, 1e-14));
        assert!(f.coeff(0, 1).norm() < 1e-15);
    }

    #[test]
    fn inverse_of_simple_spectra() {
        let g = grid(16);
        let mut f = SpectralField::zeros(g);
        f.set_mode(0, 0, Complex64::new(3.0, 0.0));
        assert!(f.inverse_transform().unwrap().iter().all(|&v| close(v, 3.0, 1e-14)));

        let mut f = SpectralField::zeros(g);
        f.set_mode(0, 2, Complex64::new(0.5, 0.0));
        let s = f.inverse_transform().unwrap();
        for i1 in 0..16 {
            for i2 in 0..16 {
                let x2 = g.coordinate(i2);
                assert!(close(s[i1 * 16 + i2], (2.0 * x2).cos(), 1e-13));
            }
        }
    }

    #[test]
    fn non_hermitian_spectrum_is_rejected() {
        let g = grid(16);
        let mut f = SpectralField::zeros(g);
        f.coeffs_mut()[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(f.inverse_transform(), Err(Error::SymmetryViolation { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let g = grid(8);
        assert!(matches!(
            SpectralField::forward_transform(g, &[0.0; 10]),
            Err(Error::DimensionMismatch { expected: 64, got: 10 })
        ));
    }

    #[test]
    fn derivatives_of_cosine() {
        let g = grid(32);
        let f = cos_x1(g);
        let d1 = f.derivative(Axis::X1);
        let expect = SpectralField::from_fn(g, |x, _| -x.sin());
        assert!(d1.max_relative_difference(&expect) < 1e-13);
        assert!(f.derivative(Axis::X2).coeff_norm() < 1e-15);
    }

    #[test]
    fn lambda_and_inverse_laplacian() {
        let g = grid(32);
        let f = SpectralField::from_fn(g, |x, _| (2.0 * x).cos());
        let lf = f.lambda_power(1.0).unwrap();
        assert!(lf.max_relative_difference(&f.scaled(2.0)) < 1e-13);
        let back = lf.lambda_power(-1.0).unwrap();
        assert!(back.max_relative_difference(&f) < 1e-13);

        let c1 = cos_x1(g);
        assert!(c1.inverse_laplacian().unwrap().max_relative_difference(&c1) < 1e-13);
        let c2 = SpectralField::from_fn(g, |_, y| (2.0 * y).cos());
        assert!(c2
            .inverse_laplacian()
            .unwrap()
            .max_relative_difference(&c2.scaled(0.25))
            < 1e-13);

        let shifted = SpectralField::from_fn(g, |x, _| 1.0 + x.cos());
        assert!(matches!(
            shifted.lambda_power(-1.0),
            Err(Error::NegativePowerOnNonzeroMean { .. })
        ));
        assert!(matches!(shifted.inverse_laplacian(), Err(Error::NonzeroMean { .. })));
        // positive powers discard the mean
        assert_eq!(shifted.lambda_power(1.0).unwrap().coeff(0, 0), ZERO);
    }

    #[test]
    fn half_power_scales_mode_four_by_two() {
        let g = grid(32);
        let f = SpectralField::from_fn(g, |x, _| (4.0 * x).cos());
        let h = f.lambda_power(0.5).unwrap();
        assert!(close(h.l2_norm() / f.l2_norm(), 2.0, 1e-13));
    }

    #[test]
    fn biot_savart_examples() {
        let g = grid(32);
        let u = biot_savart(&cos_x1(g)).unwrap();
        assert!(u.u1.coeff_norm() < 1e-15);
        let expect = SpectralField::from_fn(g, |x, _| -x.sin());
        assert!(u.u2.max_relative_difference(&expect) < 1e-13);

        let u = biot_savart(&SpectralField::from_fn(g, |_, y| y.cos())).unwrap();
        let expect = SpectralField::from_fn(g, |_, y| y.sin());
        assert!(u.u1.max_relative_difference(&expect) < 1e-13);
        assert!(u.u2.coeff_norm() < 1e-15);
    }

    #[test]
    fn riesz_examples() {
        let g = grid(32);
        let r = cos_x1(g).riesz1().unwrap();
        let expect = SpectralField::from_fn(g, |x, _| -x.sin());
        assert!(r.max_relative_difference(&expect) < 1e-13);
        assert!(SpectralField::from_fn(g, |_, y| y.cos()).riesz1().unwrap().coeff_norm() < 1e-15);
    }

    #[test]
    fn dealias_examples() {
        let g = grid(16);
        let low = SpectralField::from_fn(g, |x, y| (2.0 * x).cos() + (3.0 * y).sin());
        assert!(low.dealias().max_relative_difference(&low) < 1e-15);
        let high = SpectralField::from_fn(g, |x, _| (7.0 * x).cos());
        let r = high.dealias().coeff_norm(); assert!(r < 1e-13, "{r}");
    }

    #[test]
    fn lp_norms_of_cosine() {
        let g = grid(32);
        let f = cos_x1(g);
        assert!(close(f.lp_norm(2.0).unwrap(), 2f64.sqrt() * PI, 1e-13));
        assert!(close(f.lp_norm(f64::INFINITY).unwrap(), 1.0, 1e-14));
        // int cos^4 over the torus = 3/8 * (2 pi)^2, exact for a trig polynomial
        let expect = (0.375 * 4.0 * PI * PI).powf(0.25);
        assert!(close(f.lp_norm(4.0).unwrap(), expect, 1e-13));
        assert!(matches!(f.lp_norm(0.5), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn inner_products() {
        let g = grid(16);
        let c = cos_x1(g);
        let s = SpectralField::from_fn(g, |x, _| x.sin());
        assert!(c.inner_l2(&s).unwrap().abs() < 1e-13);
        let h = c.inner_hminus1(&c).unwrap();
        assert!(close(h, c.l2_norm().powi(2), 1e-13));
        let m = SpectralField::from_fn(g, |_, _| 1.0);
        assert!(matches!(m.inner_hminus1(&c), Err(Error::NonzeroMean { .. })));
    }

    #[test]
    fn grid_mismatch_detected() {
        let a = SpectralField::zeros(grid(8));
        let b = SpectralField::zeros(grid(16));
        assert!(matches!(a.inner_l2(&b), Err(Error::GridMismatch)));
        assert!(VectorField::new(a, b).is_err());
    }
}
