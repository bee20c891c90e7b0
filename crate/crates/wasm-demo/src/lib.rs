//! wasm-bindgen bindings for the browser page in `www/`.
//!
//! Each export takes plain numbers and returns either a flat `Float64Array` or a JSON string,
//! so the page needs no generated glue beyond what `wasm-bindgen --target web` emits.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use strat2d::dispersive::{localized_field, semigroup_apply, strichartz_sweep, Sign, SweepConfig};
use strat2d::littlewood_paley::{psi, DyadicBank};
use strat2d::GridSpec;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Physical values of `exp(sign i kappa t xi_1/|xi|)` applied to a localized bump, row-major `n x n`.
///
/// The bump lives on a box of side `2 pi box_scale`. `sign` is `+1` or `-1`.
#[wasm_bindgen]
pub fn dispersive_field(n: usize, box_scale: f64, kappa: f64, t: f64, sign: i32, seed: u64) -> Result<Vec<f64>, JsError> {
    let g = GridSpec::new(n, box_scale).map_err(js)?;
    let f = localized_field(g, seed);
    let sign = if sign < 0 { Sign::Minus } else { Sign::Plus };
    Ok(semigroup_apply(&f, t, kappa, sign).map_err(js)?.to_physical())
}

#[derive(Serialize)]
struct Profiles {
    xi: Vec<f64>,
    bands: Vec<(i32, Vec<f64>)>,
    residual: f64,
}

/// Radial band profiles on a log-spaced frequency axis plus the partition residual, as JSON.
#[wasm_bindgen]
pub fn band_profiles(n: usize, box_scale: f64, samples: usize) -> Result<String, JsError> {
    let g = GridSpec::new(n, box_scale).map_err(js)?;
    let bank = DyadicBank::build(g).map_err(js)?;
    let (lo, hi) = (g.min_frequency() / 2.0, g.max_resolved_frequency());
    let m = samples.max(2);
    let xi: Vec<f64> = (0..m).map(|i| lo * (hi / lo).powf(i as f64 / (m - 1) as f64)).collect();
    let bands = bank.range().map(|j| (j, xi.iter().map(|&x| psi(j, x)).collect())).collect();
    let p = Profiles {
        xi,
        bands,
        residual: bank.partition_residual(),
    };
    serde_json::to_string(&p).map_err(js)
}

/// Strichartz sweep on `kappa = 2^lo ..= 2^hi` with the `L^inf` target, as JSON (rows, fit, target slope).
#[wasm_bindgen]
pub fn strichartz_curve(gamma: f64, lo: i32, hi: i32, fields: usize, n: usize) -> Result<String, JsError> {
    if lo > hi {
        return Err(JsError::new("empty kappa range"));
    }
    let cfg = SweepConfig {
        grid: GridSpec::new(n, 8.0).map_err(js)?,
        gamma,
        kappas: (lo..=hi).map(|e| 2f64.powi(e)).collect(),
        fields,
        ..SweepConfig::default()
    };
    let res = strichartz_sweep(&cfg).map_err(js)?;
    serde_json::to_string(&res).map_err(js)
}
