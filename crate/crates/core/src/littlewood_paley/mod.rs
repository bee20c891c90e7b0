//! Littlewood-Paley machinery: the dyadic multiplier bank, low-pass operators,
//! Besov norms and the Bony paraproduct.

mod besov;
mod paraproduct;

pub use besov::{exponent, lq_sum, BesovSpec};
pub use paraproduct::Paraproduct;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;

/// Inner edge of the band-0 support.
pub const BAND_INNER: f64 = 5.0 / 8.0;
/// Outer edge of the band-0 support.
pub const BAND_OUTER: f64 = 7.0 / 4.0;
/// `chi` equals 1 up to this radius.
pub const PLATEAU: f64 = 5.0 / 4.0;

fn zeta(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// C-infinity step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = zeta(t);
        a / (a + zeta(1.0 - t))
    }
}

/// Radial low-pass profile: `chi(r) = 1` for `r <= 5/4`, `0` for `r >= 7/4`.
pub fn chi(r: f64) -> f64 {
    smooth_step((BAND_OUTER - r) / 0.5)
}

/// `psi_0(r) = chi(r) - chi(2r)`, supported in `[5/8, 7/4]`.
pub fn psi0(r: f64) -> f64 {
    chi(r) - chi(2.0 * r)
}

/// `psi_j(r) = psi_0(2^-j r)`.
pub fn psi(j: i32, r: f64) -> f64 {
    let s = 2f64.powi(-j);
    chi(s * r) - chi(2.0 * s * r)
}

/// Dyadic multipliers `psi_j` for the bands resolved by a grid.
///
/// `j_max` is the largest band whose support ends below the dealiasing radius;
/// `j_min` is the largest band with `7/8 2^j_min <= 1/L0`, so every nonzero grid
/// frequency lies above the reach of `chi(2^(1 - j_min) .)` and the bank sums
/// exactly to the homogeneous low-pass `chi(2^-k .)`.
#[derive(Debug, Clone)]
pub struct DyadicBank {
    grid: GridSpec,
    j_min: i32,
    j_max: i32,
    tables: Vec<Vec<f64>>,
}

/// One entry of a band decomposition.
#[derive(Debug, Clone)]
pub struct Band {
    pub j: i32,
    pub field: SpectralField,
    /// First or last resolved band; its neighbour is missing from the bank.
    pub boundary: bool,
}

#[derive(Debug, Clone)]
pub struct BandDecomposition {
    pub bands: Vec<Band>,
    /// `f - sum_j Delta_j f`: the mean plus frequencies outside the interior annulus.
    pub remainder: SpectralField,
}

impl BandDecomposition {
    pub fn reconstruct(&self) -> SpectralField {
        let mut out = self.remainder.clone();
        for b in &self.bands {
            out += &b.field;
        }
        out
    }
}

impl DyadicBank {
    pub fn build(grid: GridSpec) -> Result<Self> {
        grid.validate()?;
        let j_max = (grid.dealias_cutoff() / BAND_OUTER).log2().floor() as i32;
        let j_min = (grid.min_frequency() / (BAND_OUTER / 2.0)).log2().floor() as i32;
        let count = if j_max >= j_min {
            (j_max - j_min + 1) as usize
        } else {
            0
        };
        if count < 3 {
            return Err(Error::GridTooSmall { bands: count });
        }
        let n = grid.n;
        let tables = (j_min..=j_max)
            .map(|j| {
                let mut t = Vec::with_capacity(grid.len());
                for i1 in 0..n {
                    let a = grid.xi(i1);
                    for i2 in 0..n {
                        t.push(psi(j, a.hypot(grid.xi(i2))));
                    }
                }
                t
            })
            .collect();
        Ok(DyadicBank {
            grid,
            j_min,
            j_max,
            tables,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn range(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn band_count(&self) -> usize {
        self.tables.len()
    }

    /// Frequencies where the bank is an exact partition of unity: `[7/8 2^j_min, 5/4 2^j_max]`.
    pub fn exact_annulus(&self) -> (f64, f64) {
        (
            0.875 * 2f64.powi(self.j_min),
            PLATEAU * 2f64.powi(self.j_max),
        )
    }

    /// Multiplier table of band `j` in coefficient order.
    pub fn table(&self, j: i32) -> Result<&[f64]> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::BandOutOfRange {
                j,
                min: self.j_min,
                max: self.j_max,
            });
        }
        Ok(&self.tables[(j - self.j_min) as usize])
    }

    fn check_grid(&self, f: &SpectralField) -> Result<()> {
        if *f.grid() == self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `Delta_j f`.
    pub fn project_band(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check_grid(f)?;
        let t = self.table(j)?;
        let coeffs = f.coeffs().iter().zip(t).map(|(c, m)| c * m).collect();
        SpectralField::from_coeffs(self.grid, coeffs)
    }

    /// `S_k` with the zero mode removed (`chi(2^-k xi)` on `xi != 0`).
    pub fn lowpass_hom(&self, f: &SpectralField, k: i32) -> Result<SpectralField> {
        self.check_grid(f)?;
        let s = 2f64.powi(-k);
        let mut out = f.radial_multiplier(|r| chi(s * r));
        out.coeffs_mut()[0] = Default::default();
        Ok(out)
    }

    /// Nonhomogeneous `S_k`: same multiplier with the zero mode retained.
    pub fn lowpass_nonhom(&self, f: &SpectralField, k: i32) -> Result<SpectralField> {
        self.check_grid(f)?;
        let s = 2f64.powi(-k);
        Ok(f.radial_multiplier(|r| chi(s * r)))
    }

    pub fn decompose(&self, f: &SpectralField) -> Result<BandDecomposition> {
        self.check_grid(f)?;
        let js: Vec<i32> = self.range().collect();
        let fields = crate::par::map_collect(&js, |&j| self.project_band(f, j));
        let mut remainder = f.clone();
        let mut bands = Vec::with_capacity(js.len());
        for (j, field) in js.into_iter().zip(fields) {
            let field = field?;
            remainder -= &field;
            bands.push(Band {
                j,
                field,
                boundary: j == self.j_min || j == self.j_max,
            });
        }
        Ok(BandDecomposition { bands, remainder })
    }

    /// Largest `|sum_j psi_j(xi) - 1|` over grid frequencies inside the interior annulus
    /// `5/8 2^(j_min+1) <= |xi| <= 5/8 2^j_max`.
    pub fn partition_residual(&self) -> f64 {
        let lo = BAND_INNER * 2f64.powi(self.j_min + 1);
        let hi = BAND_INNER * 2f64.powi(self.j_max);
        let n = self.grid.n;
        let mut worst = 0.0f64;
        for i1 in 0..n {
            let a = self.grid.xi(i1);
            for i2 in 0..n {
                let r = a.hypot(self.grid.xi(i2));
                if r < lo || r > hi {
                    continue;
                }
                let idx = i1 * n + i2;
                let s: f64 = self.tables.iter().map(|t| t[idx]).sum();
                worst = worst.max((s - 1.0).abs());
            }
        }
        worst
    }
}

/// `||f||_{H^-1}`.
pub fn hminus1_norm(f: &SpectralField) -> Result<f64> {
    f.hminus1_norm()
}
