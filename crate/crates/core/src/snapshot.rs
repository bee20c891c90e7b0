//! Self-describing JSON container for field snapshots.
//!
//! Real layout stores samples row-major with `x2` fastest. Spectral layout stores
//! `[re, im]` pairs in FFT order along each axis (`k = i` for `i < n/2`, else
//! `i - n`), `k1` outer and `k2` inner. Floats are written in shortest
//! round-trip form, so save/load is bit-exact.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;

pub const FORMAT_TAG: &str = "strat2d-field";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    Real,
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub time: f64,
    pub grid: GridSpec,
    pub layout: Layout,
    pub data: Vec<f64>,
}

impl Snapshot {
    pub fn real(name: &str, time: f64, grid: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        Ok(Snapshot {
            format: FORMAT_TAG.into(),
            version: FORMAT_VERSION,
            name: name.into(),
            time,
            grid,
            layout: Layout::Real,
            data: samples,
        })
    }

    pub fn spectral(name: &str, time: f64, field: &SpectralField) -> Self {
        let data = field.coeffs().iter().flat_map(|c| [c.re, c.im]).collect();
        Snapshot {
            format: FORMAT_TAG.into(),
            version: FORMAT_VERSION,
            name: name.into(),
            time,
            grid: *field.grid(),
            layout: Layout::Spectral,
            data,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != FORMAT_TAG || self.version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported snapshot format {} v{}",
                self.format, self.version
            )));
        }
        self.grid.validate()?;
        let expected = match self.layout {
            Layout::Real => self.grid.len(),
            Layout::Spectral => 2 * self.grid.len(),
        };
        if self.data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.data.len(),
            });
        }
        Ok(())
    }

    /// Field represented by this snapshot (forward-transforming real samples).
    pub fn to_field(&self) -> Result<SpectralField> {
        self.validate()?;
        match self.layout {
            Layout::Real => SpectralField::forward_transform(self.grid, &self.data),
            Layout::Spectral => {
                let coeffs = self
                    .data
                    .chunks_exact(2)
                    .map(|p| Complex64::new(p[0], p[1]))
                    .collect();
                SpectralField::from_coeffs(self.grid, coeffs)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let snap: Snapshot = serde_json::from_str(s)?;
        snap.validate()?;
        Ok(snap)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn spectral_round_trip_is_bit_exact(values in proptest::collection::vec(-1e6f64..1e6, 128)) {
            let g = GridSpec::new(8, 1.7).unwrap();
            let coeffs = values.chunks_exact(2).map(|p| Complex64::new(p[0], p[1] * 1e-7)).collect();
            let f = SpectralField::from_coeffs(g, coeffs).unwrap();
            let snap = Snapshot::spectral("omega", 0.125, &f);
            let back = Snapshot::from_json(&snap.to_json().unwrap()).unwrap();
            prop_assert_eq!(&back, &snap);
            let g2 = back.to_field().unwrap();
            for (a, b) in g2.coeffs().iter().zip(f.coeffs()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }

        #[test]
        fn real_round_trip_is_bit_exact(values in proptest::collection::vec(proptest::num::f64::NORMAL, 64)) {
            let g = GridSpec::new(8, 1.0).unwrap();
            let snap = Snapshot::real("rho", 1.0 / 3.0, g, values.clone()).unwrap();
            let back = Snapshot::from_json(&snap.to_json().unwrap()).unwrap();
            for (a, b) in back.data.iter().zip(&values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back.time.to_bits(), (1.0f64 / 3.0).to_bits());
        }
    }

    #[test]
    fn rejects_bad_length() {
        let g = GridSpec::new(8, 1.0).unwrap();
        let mut snap = Snapshot::real("x", 0.0, g, vec![0.0; 64]).unwrap();
        snap.data.pop();
        assert!(Snapshot::from_json(&snap.to_json().unwrap()).is_err());
    }
}
