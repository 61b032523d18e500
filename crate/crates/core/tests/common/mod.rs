#![allow(dead_code)]

use hoch_core::spectral::{Grid, RealField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real trigonometric polynomial with modes `|k| <= kmax` and
/// coefficients decaying like `1 / (1 + k^2)`.
pub fn band_limited(grid: &Grid, kmax: usize, rng: &mut ChaCha8Rng) -> RealField {
    let l = grid.half_length();
    let terms: Vec<(f64, f64, f64)> = (0..=kmax)
        .map(|k| {
            let w = 1.0 / (1.0 + (k * k) as f64);
            (k as f64, w * rng.random_range(-1.0..1.0), w * rng.random_range(-1.0..1.0))
        })
        .collect();
    RealField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|&(k, a, b)| {
                let th = std::f64::consts::PI * k * x / l;
                a * th.cos() + b * th.sin()
            })
            .sum()
    })
}

/// `exp(-1 / (1 - ((x - c) / w)^2))` on `|x - c| < w`, zero elsewhere.
pub fn bump(x: f64, c: f64, w: f64) -> f64 {
    let z = (x - c) / w;
    if z.abs() < 1.0 {
        (-1.0 / (1.0 - z * z)).exp()
    } else {
        0.0
    }
}

pub fn gauss(x: f64, amp: f64, center: f64, width: f64) -> f64 {
    let z = (x - center) / width;
    amp * (-z * z).exp()
}
