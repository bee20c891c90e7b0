use serde::{Deserialize, Serialize};

use super::DyadicBank;
use crate::error::{Error, Result};
use crate::field::{lp_of_samples, SpectralField};

/// Norm descriptor for `B^s_{p,q}` (nonhomogeneous) or its homogeneous version.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    pub homogeneous: bool,
}

impl BesovSpec {
    pub fn homogeneous(s: f64, p: f64, q: f64) -> Self {
        BesovSpec {
            s,
            p,
            q,
            homogeneous: true,
        }
    }

    pub fn nonhomogeneous(s: f64, p: f64, q: f64) -> Self {
        BesovSpec {
            s,
            p,
            q,
            homogeneous: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) || !(self.q >= 1.0) || !self.s.is_finite() {
            return Err(Error::InvalidBesov(format!(
                "need p, q >= 1 and finite s (s = {}, p = {}, q = {})",
                self.s, self.p, self.q
            )));
        }
        Ok(())
    }
}

/// `l^q` norm of a finite sequence; `q = inf` is the maximum.
pub fn lq_sum(terms: impl IntoIterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        terms.into_iter().fold(0.0, f64::max)
    } else if q == 1.0 {
        terms.into_iter().sum()
    } else {
        terms.into_iter().map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `L^p` norm of the pointwise Euclidean length of a tuple of scalar fields.
pub(crate) fn joint_lp(parts: &[SpectralField], p: f64) -> f64 {
    if p == 2.0 {
        return parts.iter().map(|f| f.l2_norm().powi(2)).sum::<f64>().sqrt();
    }
    let grid = *parts[0].grid();
    if parts.len() == 1 {
        return lp_of_samples(&parts[0].to_physical(), p, grid.cell_area());
    }
    let phys: Vec<Vec<f64>> = parts.iter().map(|f| f.to_physical()).collect();
    let mag: Vec<f64> = (0..grid.len())
        .map(|i| phys.iter().map(|v| v[i] * v[i]).sum::<f64>().sqrt())
        .collect();
    lp_of_samples(&mag, p, grid.cell_area())
}

impl DyadicBank {
    /// `(j, ||Delta_j f||_{L^p})` for every resolved band, in increasing `j`.
    pub fn band_lp_norms(&self, parts: &[&SpectralField], p: f64) -> Result<Vec<(i32, f64)>> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        let js: Vec<i32> = self.range().collect();
        let norms = crate::par::map_collect(&js, |&j| -> Result<f64> {
            let bands = parts
                .iter()
                .map(|f| self.project_band(f, j))
                .collect::<Result<Vec<_>>>()?;
            Ok(joint_lp(&bands, p))
        });
        js.into_iter()
            .zip(norms)
            .map(|(j, n)| n.map(|n| (j, n)))
            .collect()
    }

    /// Besov norm of a scalar field.
    pub fn besov_norm(&self, f: &SpectralField, spec: &BesovSpec) -> Result<f64> {
        self.besov_norm_parts(&[f], spec)
    }

    /// Besov norm of a vector-valued field (per-band `L^p` of the Euclidean length).
    pub fn besov_norm_parts(&self, parts: &[&SpectralField], spec: &BesovSpec) -> Result<f64> {
        spec.validate()?;
        if spec.homogeneous && spec.s <= 0.0 {
            for f in parts {
                if !f.is_mean_zero() {
                    return Err(Error::NonzeroMean { mean: f.mean() });
                }
            }
        }
        let bands = self.band_lp_norms(parts, spec.p)?;
        if spec.homogeneous {
            let terms = bands.iter().map(|&(j, n)| 2f64.powf(spec.s * j as f64) * n);
            return Ok(lq_sum(terms, spec.q));
        }
        let low = parts
            .iter()
            .map(|f| self.lowpass_nonhom(f, 0))
            .collect::<Result<Vec<_>>>()?;
        let mut terms = vec![joint_lp(&low, spec.p)];
        terms.extend(
            bands
                .iter()
                .filter(|&&(j, _)| j >= 1)
                .map(|&(j, n)| 2f64.powf(spec.s * j as f64) * n),
        );
        Ok(lq_sum(terms, spec.q))
    }
}

/// Serde helper accepting numbers or `"inf"` for Lebesgue / summability exponents.
pub mod exponent {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => parse(&t).map_err(serde::de::Error::custom),
        }
    }

    pub fn parse(t: &str) -> Result<f64, String> {
        match t.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
            other => other.parse::<f64>().map_err(|e| format!("bad exponent {t:?}: {e}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::PowerLaw;
    use crate::grid::GridSpec;

    fn bank() -> DyadicBank {
        DyadicBank::build(GridSpec::new(128, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn one_band_field_norm() {
        let b = bank();
        let f = SpectralField::from_fn(*b.grid(), |x, _| (4.0 * x).cos());
        for q in [1.0, 2.0, f64::INFINITY] {
            let n = b.besov_norm(&f, &BesovSpec::homogeneous(1.5, 2.0, q)).unwrap();
            let expect = 2f64.powf(2.0 * 1.5) * f.l2_norm();
            assert!((n - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn zero_smoothness_l2_equivalence() {
        let b = bank();
        for seed in 0..10 {
            let f = PowerLaw {
                xi_max: 20.0,
                ..PowerLaw::default()
            }
            .with_seed(seed, 0)
            .sample(*b.grid());
            let n = b.besov_norm(&f, &BesovSpec::homogeneous(0.0, 2.0, 2.0)).unwrap();
            let r = n / f.l2_norm();
            assert!((0.97..=1.0 + 1e-12).contains(&r), "ratio {r}");
        }
    }

    #[test]
    fn monotone_in_q() {
        let b = bank();
        let f = PowerLaw {
            xi_max: 20.0,
            alpha: 1.0,
            ..PowerLaw::default()
        }
        .with_seed(2, 0)
        .sample(*b.grid());
        let n1 = b.besov_norm(&f, &BesovSpec::homogeneous(1.0, 2.0, 1.0)).unwrap();
        let n2 = b.besov_norm(&f, &BesovSpec::homogeneous(1.0, 2.0, 2.0)).unwrap();
        let ni = b.besov_norm(&f, &BesovSpec::homogeneous(1.0, 2.0, f64::INFINITY)).unwrap();
        assert!(n1 >= n2 && n2 >= ni);
    }

    #[test]
    fn homogeneous_nonpositive_s_needs_mean_zero() {
        let b = bank();
        let f = SpectralField::from_fn(*b.grid(), |x, _| 1.0 + x.cos());
        assert!(matches!(
            b.besov_norm(&f, &BesovSpec::homogeneous(0.0, 2.0, 1.0)),
            Err(Error::NonzeroMean { .. })
        ));
        assert!(b.besov_norm(&f, &BesovSpec::homogeneous(1.0, 2.0, 1.0)).is_ok());
        // nonhomogeneous norm keeps the mean in the low block
        let nh = b.besov_norm(&f, &BesovSpec::nonhomogeneous(0.0, 2.0, 1.0)).unwrap();
        assert!((nh - f.l2_norm()).abs() < 1e-12 * nh);
    }

    #[test]
    fn lambda_shifts_smoothness() {
        let b = bank();
        for seed in 0..100 {
            let f = PowerLaw {
                xi_max: 20.0,
                alpha: 1.5,
                ..PowerLaw::default()
            }
            .with_seed(seed, 3)
            .sample(*b.grid());
            for q in [1.0, 2.0, f64::INFINITY] {
                let lhs = b
                    .besov_norm(&f.lambda_power(1.0).unwrap(), &BesovSpec::homogeneous(0.5, 2.0, q))
                    .unwrap();
                let rhs = b.besov_norm(&f, &BesovSpec::homogeneous(1.5, 2.0, q)).unwrap();
                let r = lhs / rhs;
                assert!((0.55..=1.8).contains(&r), "ratio {r}");
            }
        }
    }

    #[test]
    fn invalid_spec() {
        let b = bank();
        let f = SpectralField::zeros(*b.grid());
        assert!(b.besov_norm(&f, &BesovSpec::homogeneous(0.0, 0.5, 1.0)).is_err());
    }

    #[test]
    fn exponent_serde() {
        let s: BesovSpec = serde_json::from_str(r#"{"s":1,"p":"inf","q":2,"homogeneous":true}"#).unwrap();
        assert!(s.p.is_infinite());
        let back = serde_json::to_string(&s).unwrap();
        assert!(back.contains("\"inf\""));
    }
}
