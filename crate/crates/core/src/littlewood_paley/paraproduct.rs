use super::DyadicBank;
use crate::error::{Error, Result};
use crate::field::SpectralField;

/// Bony decomposition `fg = T_f g + T_g f + R(f, g)`, each piece dealiased.
#[derive(Debug, Clone)]
pub struct Paraproduct {
    pub t_fg: SpectralField,
    pub t_gf: SpectralField,
    pub remainder: SpectralField,
}

impl Paraproduct {
    pub fn sum(&self) -> SpectralField {
        &(&self.t_fg + &self.t_gf) + &self.remainder
    }
}

fn accumulate(acc: &mut [f64], a: &[f64], b: &[f64]) {
    for ((s, x), y) in acc.iter_mut().zip(a).zip(b) {
        *s += x * y;
    }
}

impl DyadicBank {
    /// Splits the product of two mean-zero fields into paraproducts and remainder.
    ///
    /// Low-frequency cutoffs are homogeneous, so the identity is exact when both
    /// factors are spectrally supported inside the exact annulus of the bank.
    pub fn paraproduct(&self, f: &SpectralField, g: &SpectralField) -> Result<Paraproduct> {
        f.same_grid(g)?;
        if f.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        let js: Vec<i32> = self.range().collect();
        let bands = |h: &SpectralField| -> Result<Vec<Vec<f64>>> {
            js.iter()
                .map(|&j| self.project_band(h, j).map(|b| b.to_physical()))
                .collect()
        };
        let fb = bands(f)?;
        let gb = bands(g)?;
        let len = self.grid().len();
        let mut t_fg = vec![0.0; len];
        let mut t_gf = vec![0.0; len];
        let mut rem = vec![0.0; len];
        let m = js.len();
        // homogeneous S_{j-2} h is the sum of bands j' <= j - 2
        let mut low_f = vec![0.0; len];
        let mut low_g = vec![0.0; len];
        for a in 0..m {
            if a >= 2 {
                for (s, v) in low_f.iter_mut().zip(&fb[a - 2]) {
                    *s += v;
                }
                for (s, v) in low_g.iter_mut().zip(&gb[a - 2]) {
                    *s += v;
                }
                accumulate(&mut t_fg, &low_f, &gb[a]);
                accumulate(&mut t_gf, &low_g, &fb[a]);
            }
            for b in a.saturating_sub(1)..(a + 2).min(m) {
                accumulate(&mut rem, &fb[a], &gb[b]);
            }
        }
        let grid = *self.grid();
        let to = |v: Vec<f64>| SpectralField::forward_transform(grid, &v).map(|f| f.dealias());
        Ok(Paraproduct {
            t_fg: to(t_fg)?,
            t_gf: to(t_gf)?,
            remainder: to(rem)?,
        })
    }
}
