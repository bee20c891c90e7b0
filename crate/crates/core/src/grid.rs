use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic grid on `[0, 2*pi*L0)^2` with `n` points per axis.
///
/// Wave vectors are integer pairs `k` with physical frequency `xi = k / L0`.
/// Coefficient storage follows FFT order along each axis: index `i` maps to
/// `k = i` for `i < n/2` and `k = i - n` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub box_scale: f64,
    #[serde(default = "default_dealias")]
    pub dealias_fraction: f64,
}

fn default_dealias() -> f64 {
    2.0 / 3.0
}

impl GridSpec {
    pub fn new(n: usize, box_scale: f64) -> Result<Self> {
        Self::with_dealias(n, box_scale, default_dealias())
    }

    pub fn with_dealias(n: usize, box_scale: f64, dealias_fraction: f64) -> Result<Self> {
        let grid = GridSpec {
            n,
            box_scale,
            dealias_fraction,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || self.n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_per_axis must be even and >= 8, got {}",
                self.n
            )));
        }
        if !(self.box_scale > 0.0 && self.box_scale.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "box_scale must be positive, got {}",
                self.box_scale
            )));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias_fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Integer wavenumber stored at FFT index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT index holding integer wavenumber `k` (must satisfy `-n/2 <= k < n/2`).
    #[inline]
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k < -half || k >= half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.n as i64) as usize)
        }
    }

    #[inline]
    pub fn xi(&self, i: usize) -> f64 {
        self.wavenumber(i) as f64 / self.box_scale
    }

    /// True when index `i` sits on the unpaired `k = -n/2` line.
    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    pub fn max_resolved_frequency(&self) -> f64 {
        (self.n / 2) as f64 / self.box_scale
    }

    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_fraction * self.max_resolved_frequency()
    }

    /// Integer cutoff for the square dealiasing mask: keep `max(|k1|,|k2|) <= kmax`.
    pub fn dealias_kmax(&self) -> f64 {
        self.dealias_fraction * (self.n / 2) as f64
    }

    pub fn min_frequency(&self) -> f64 {
        1.0 / self.box_scale
    }

    pub fn period(&self) -> f64 {
        2.0 * PI * self.box_scale
    }

    pub fn dx(&self) -> f64 {
        self.period() / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dx()
    }

    pub fn area(&self) -> f64 {
        self.period() * self.period()
    }

    /// Physical coordinate of sample index `i` along either axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        self.dx() * i as f64
    }

    /// Same grid with `n` doubled; box and dealias fraction kept.
    pub fn refined(&self) -> Self {
        GridSpec {
            n: self.n * 2,
            ..*self
        }
    }
}
