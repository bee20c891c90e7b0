//! Seeded random fields and named initial-data presets.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::rng;

/// Isotropic power-law spectrum `|xi|^-alpha` with random phases on an annulus.
///
/// Each wave vector draws from its own stream keyed by `(seed, salt, k)`, so the
/// same continuum field is produced on any grid that resolves the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub alpha: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    /// Target root-mean-square value `||f||_{L^2} / sqrt(area)`; non-positive keeps raw scale.
    pub rms: f64,
    pub seed: u64,
    pub salt: u64,
}

impl Default for PowerLaw {
    fn default() -> Self {
        PowerLaw {
            alpha: 2.5,
            xi_min: 1.0,
            xi_max: 5.0,
            rms: 1.0,
            seed: 0,
            salt: 0,
        }
    }
}

impl PowerLaw {
    pub fn with_seed(mut self, seed: u64, salt: u64) -> Self {
        self.seed = seed;
        self.salt = salt;
        self
    }

    pub fn sample(&self, grid: GridSpec) -> SpectralField {
        let l0 = grid.box_scale;
        let kmax = (self.xi_max * l0).ceil() as i64;
        let half = (grid.n / 2) as i64;
        let mut f = SpectralField::zeros(grid);
        for k1 in 0..=kmax.min(half - 1) {
            for k2 in -kmax.min(half - 1)..=kmax.min(half - 1) {
                if k1 == 0 && k2 <= 0 {
                    continue;
                }
                let r = ((k1 * k1 + k2 * k2) as f64).sqrt() / l0;
                if r < self.xi_min || r > self.xi_max {
                    continue;
                }
                let mut g = rng::stream(self.seed, rng::mode_stream(self.salt, k1, k2));
                let phase = g.random::<f64>() * 2.0 * PI;
                f.set_mode(k1, k2, Complex64::from_polar(r.powf(-self.alpha), phase));
            }
        }
        if self.rms > 0.0 {
            let rms = f.l2_norm() / grid.area().sqrt();
            if rms > 0.0 {
                f = f.scaled(self.rms / rms);
            }
        }
        f
    }
}

/// Random field whose spectrum fills the support of band `j`, `5/8 2^j <= |xi| <= 7/4 2^j`.
pub fn band_field(grid: GridSpec, j: i32, seed: u64) -> SpectralField {
    let scale = 2f64.powi(j);
    PowerLaw {
        alpha: 0.0,
        xi_min: 0.625 * scale,
        xi_max: 1.75 * scale,
        rms: 1.0,
        seed,
        salt: 0xBA4D ^ (j as u64),
    }
    .sample(grid)
}

/// Periodized-free Gaussian `amp * exp(-|x - c|^2 / (2 w^2))`; callers keep `w` well below the box.
pub fn gaussian_bump(grid: GridSpec, center: (f64, f64), width: f64, amplitude: f64) -> SpectralField {
    let period = grid.period();
    let wrap = |d: f64| {
        let mut d = d % period;
        if d > period / 2.0 {
            d -= period;
        } else if d < -period / 2.0 {
            d += period;
        }
        d
    };
    SpectralField::from_fn(grid, |x1, x2| {
        let d1 = wrap(x1 - center.0);
        let d2 = wrap(x2 - center.1);
        amplitude * (-(d1 * d1 + d2 * d2) / (2.0 * width * width)).exp()
    })
}

/// Named vorticity presets used by the solver harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum Preset {
    TaylorGreen {
        #[serde(default = "one")]
        amplitude: f64,
    },
    RandomSpectrum {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        xi_min: f64,
        #[serde(default = "default_xi_max")]
        xi_max: f64,
    },
    GaussianBump {
        #[serde(default = "default_width")]
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn default_alpha() -> f64 {
    2.5
}
fn default_xi_max() -> f64 {
    4.0
}
fn default_width() -> f64 {
    0.6
}

impl Preset {
    pub fn with_seed(&self, seed: u64) -> Preset {
        match self.clone() {
            Preset::RandomSpectrum {
                alpha,
                amplitude,
                xi_min,
                xi_max,
                ..
            } => Preset::RandomSpectrum {
                alpha,
                seed,
                amplitude,
                xi_min,
                xi_max,
            },
            other => other,
        }
    }

    /// Raw field for this preset (before mean removal and dealiasing).
    pub fn sample(&self, grid: GridSpec, salt: u64) -> SpectralField {
        match *self {
            Preset::TaylorGreen { amplitude } => {
                let l0 = grid.box_scale;
                SpectralField::from_fn(grid, |x1, x2| amplitude * (x1 / l0).cos() * (x2 / l0).cos())
            }
            Preset::RandomSpectrum {
                alpha,
                seed,
                amplitude,
                xi_min,
                xi_max,
            } => PowerLaw {
                alpha,
                xi_min,
                xi_max,
                rms: amplitude,
                seed,
                salt,
            }
            .sample(grid),
            Preset::GaussianBump { width, amplitude } => {
                let c = grid.period() / 2.0;
                gaussian_bump(grid, (c, c), width, amplitude)
            }
        }
    }
}

/// How the initial density is derived from the vorticity preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DensityMode {
    /// `rho_0 = 0`.
    #[default]
    Zero,
    /// `rho_0 = Lambda^-1 omega_0`, so that `omega_0 - Lambda rho_0 = 0`.
    Balanced,
    /// An independent draw of the same preset (shifted salt / seed).
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    #[serde(flatten)]
    pub vorticity: Preset,
    #[serde(default)]
    pub density: DensityMode,
}

impl InitialData {
    /// Mean-zero, dealiased `(omega_0, rho_0)` on `grid`.
    pub fn build(&self, grid: GridSpec) -> (SpectralField, SpectralField) {
        let omega = self.vorticity.sample(grid, 1).without_mean().dealias();
        let rho = match self.density {
            DensityMode::Zero => SpectralField::zeros(grid),
            DensityMode::Balanced => omega.lambda_power(-1.0).expect("omega is mean-zero"),
            DensityMode::Independent => {
                let shifted = match &self.vorticity {
                    Preset::GaussianBump { width, amplitude } => {
                        let c = grid.period() / 2.0;
                        gaussian_bump(grid, (c + 0.5 * width, c - 0.3 * width), *width, *amplitude)
                    }
                    Preset::TaylorGreen { amplitude } => {
                        let l0 = grid.box_scale;
                        SpectralField::from_fn(grid, |x1, x2| {
                            amplitude * (x1 / l0).sin() * (2.0 * x2 / l0).cos()
                        })
                    }
                    p => p.sample(grid, 2),
                };
                shifted.dealias()
            }
        };
        (omega, rho)
    }
}
