//! Cached 2D FFT plans on square grids.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

fn transpose_in_place(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Unnormalized 2D transform of a row-major `n x n` buffer.
fn transform(buf: &mut [Complex64], n: usize, inverse: bool) {
    debug_assert_eq!(buf.len(), n * n);
    let plans = plans(n);
    let fft = if inverse { &plans.inverse } else { &plans.forward };
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(buf, &mut scratch);
    transpose_in_place(buf, n);
    fft.process_with_scratch(buf, &mut scratch);
    transpose_in_place(buf, n);
}

/// Forward transform normalized so that `cos(k.x)` has coefficient 1/2 at `+-k`.
pub fn forward(buf: &mut [Complex64], n: usize) {
    transform(buf, n, false);
    let scale = 1.0 / (n * n) as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
}

/// Inverse of [`forward`]: plain synthesis `sum_k c_k exp(i k.x)`.
pub fn inverse(buf: &mut [Complex64], n: usize) {
    transform(buf, n, true);
}
