use serde::{Deserialize, Serialize};

use super::SimState;
use crate::error::Result;
use crate::field::{biot_savart, grad_linf, SpectralField};
use crate::littlewood_paley::{BesovSpec, DyadicBank};

/// Regularity pair `(s, q)` of the controlling quantity `z_{s,q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormPair {
    pub s: f64,
    #[serde(with = "crate::littlewood_paley::exponent")]
    pub q: f64,
}

impl Default for NormPair {
    fn default() -> Self {
        NormPair { s: 2.0, q: 1.0 }
    }
}

/// One row of the diagnostics series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `||omega||_{H^-1}^2 + ||rho||_2^2`.
    pub energy: f64,
    /// `||omega||_{B^{s-1}_{2,q}} + ||omega||_{H^-1} + ||rho||_{B^s_{2,q}}` (nonhomogeneous in `rho`).
    pub z: f64,
    pub grad_u_inf: f64,
    pub grad_rho_inf: f64,
    /// `||omega + Lambda rho||_{B^0_{inf,1}}`.
    pub v_plus: f64,
    /// `||omega - Lambda rho||_{B^0_{inf,1}}`.
    pub v_minus: f64,
    /// Running time integrals of `v_plus` and `v_minus`.
    pub m_plus: f64,
    pub m_minus: f64,
    /// Running time integral of `grad_u_inf + grad_rho_inf`.
    pub b: f64,
}

/// Pointwise-in-time quantities that enter the running integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrands {
    pub grad_u_inf: f64,
    pub grad_rho_inf: f64,
    pub v_plus: f64,
    pub v_minus: f64,
}

/// Computes norms of solver states against a fixed dyadic bank.
#[derive(Debug, Clone)]
pub struct Diagnostician {
    pub bank: DyadicBank,
    pub norms: NormPair,
}

impl Diagnostician {
    pub fn new(bank: DyadicBank, norms: NormPair) -> Self {
        Diagnostician { bank, norms }
    }

    /// `||omega||_{B^{sw}_{2,q} cap H^-1} + ||rho||_{B^{sr}_{2,q}}` as a sum of norms.
    pub fn pair_norm(&self, omega: &SpectralField, rho: &SpectralField, sw: f64, sr: f64) -> Result<f64> {
        let q = self.norms.q;
        let w = self.bank.besov_norm(omega, &BesovSpec::homogeneous(sw, 2.0, q))? + omega.hminus1_norm()?;
        let r = self.bank.besov_norm(rho, &BesovSpec::nonhomogeneous(sr, 2.0, q))?;
        Ok(w + r)
    }

    pub fn z(&self, omega: &SpectralField, rho: &SpectralField) -> Result<f64> {
        let s = self.norms.s;
        self.pair_norm(omega, rho, s - 1.0, s)
    }

    pub fn integrands(&self, state: &SimState) -> Result<Integrands> {
        let u = biot_savart(&state.omega)?;
        let (vp, vm) = state.dispersive_pair();
        let spec = BesovSpec::homogeneous(0.0, 2.0, 1.0);
        let linf = BesovSpec { p: f64::INFINITY, ..spec };
        Ok(Integrands {
            grad_u_inf: u.grad_linf(),
            grad_rho_inf: grad_linf(&state.rho),
            v_plus: self.bank.besov_norm(&vp, &linf)?,
            v_minus: self.bank.besov_norm(&vm, &linf)?,
        })
    }

    /// Record with zero running integrals; the caller accumulates them.
    pub fn record(&self, state: &SimState, at: &Integrands) -> Result<DiagnosticsRecord> {
        Ok(DiagnosticsRecord {
            t: state.t,
            energy: state.energy(),
            z: self.z(&state.omega, &state.rho)?,
            grad_u_inf: at.grad_u_inf,
            grad_rho_inf: at.grad_rho_inf,
            v_plus: at.v_plus,
            v_minus: at.v_minus,
            m_plus: 0.0,
            m_minus: 0.0,
            b: 0.0,
        })
    }
}
