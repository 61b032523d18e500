//! Discrete Littlewood–Paley decomposition and the Besov / Sobolev norms
//! built on it.
//!
//! Block `k = -1` is the low-pass `S_0`; block `k >= 0` lives on the annulus
//! `|xi| ~ 2^k`. Two partitions are available:
//!
//! * [`Cutoff::Sharp`]: indicator functions of `|xi| < 1` and
//!   `2^k <= |xi| < 2^(k+1)` (so `c1 = 1`, `c2 = 2` for the annuli).
//! * [`Cutoff::Smooth`]: a raised-cosine profile `theta` equal to one on
//!   `|xi| <= 1` and zero on `|xi| >= 2`, with `Delta_k = theta(xi/2^(k+1)) -
//!   theta(xi/2^k)`, supported on `2^k <= |xi| <= 2^(k+2)`.
//!
//! Both partitions sum to one on every resolved wavenumber.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods are not always available without std
use num_traits::Float;

use crate::spectral::{lp_norm_of, RealField, SpectralField};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Cutoff {
    #[default]
    Sharp,
    Smooth,
}

/// `(s, p, q)` of `B^s_{p,q}`; `p` and `q` may be `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
#[error("invalid Besov index (s={s}, p={p}, q={q}): need finite s and p, q in [1, inf]")]
pub struct BesovIndexError {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self, BesovIndexError> {
        let ok = s.is_finite() && !p.is_nan() && !q.is_nan() && p >= 1.0 && q >= 1.0;
        if !ok {
            return Err(BesovIndexError { s, p, q });
        }
        Ok(BesovIndex { s, p, q })
    }

    /// `B^s_{2,2}`, equivalent to `H^s`.
    pub fn hilbert(s: f64) -> Self {
        BesovIndex { s, p: 2.0, q: 2.0 }
    }
}

/// Dyadic blocks of a field, `blocks[0]` being block `k = -1`.
#[derive(Clone, Debug)]
pub struct DyadicDecomposition {
    blocks: Vec<RealField>,
    cutoff: Cutoff,
}

impl DyadicDecomposition {
    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn k_max(&self) -> i32 {
        self.blocks.len() as i32 - 2
    }

    /// Block `Delta_k`, `k >= -1`.
    pub fn block(&self, k: i32) -> Option<&RealField> {
        usize::try_from(k + 1).ok().and_then(|i| self.blocks.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &RealField)> {
        self.blocks.iter().enumerate().map(|(i, b)| (i as i32 - 1, b))
    }

    /// Sum of all blocks.
    pub fn reconstruct(&self) -> RealField {
        let mut acc = self.blocks[0].clone();
        for b in &self.blocks[1..] {
            acc = acc.zip_unchecked(b, |x, y| x + y);
        }
        acc
    }
}

fn theta(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        0.5 * (1.0 + (PI * (t - 1.0)).cos())
    }
}

/// Fourier multiplier of block `k` at wavenumber `xi`.
pub fn block_symbol(k: i32, xi: f64, cutoff: Cutoff) -> f64 {
    let a = xi.abs();
    match (cutoff, k) {
        (Cutoff::Sharp, -1) => (a < 1.0) as u8 as f64,
        (Cutoff::Sharp, _) => {
            let lo = 2f64.powi(k);
            (a >= lo && a < 2.0 * lo) as u8 as f64
        }
        (Cutoff::Smooth, -1) => theta(a),
        (Cutoff::Smooth, _) => {
            let lo = 2f64.powi(k);
            theta(a / (2.0 * lo)) - theta(a / lo)
        }
    }
}

/// Multiplier of the low-pass `S_k = sum_{j <= k-1} Delta_j` (`k >= 0`).
pub fn low_pass_symbol(k: u32, xi: f64, cutoff: Cutoff) -> f64 {
    let top = 2f64.powi(k as i32);
    match cutoff {
        Cutoff::Sharp => (xi.abs() < top) as u8 as f64,
        Cutoff::Smooth => theta(xi.abs() / top),
    }
}

/// `S_k f`.
pub fn low_pass(f: &RealField, k: u32, cutoff: Cutoff) -> RealField {
    f.transform().apply_real_symbol(|xi| low_pass_symbol(k, xi, cutoff)).inverse_transform()
}

/// `ceil(log2(xi_max))`, at least zero.
pub fn top_block(f: &RealField) -> i32 {
    f.grid().xi_max().log2().ceil().max(0.0) as i32
}

pub fn lp_decompose(f: &RealField, cutoff: Cutoff) -> DyadicDecomposition {
    let spec = f.transform();
    let blocks = (-1..=top_block(f)).map(|k| spec_block(&spec, k, cutoff).inverse_transform()).collect();
    DyadicDecomposition { blocks, cutoff }
}

fn spec_block(spec: &SpectralField, k: i32, cutoff: Cutoff) -> SpectralField {
    spec.apply_real_symbol(|xi| block_symbol(k, xi, cutoff))
}

/// One row of a Besov norm table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockTerm {
    pub k: i32,
    /// `||Delta_k f||_{L^p}`.
    pub block_norm: f64,
    /// `2^(k s) ||Delta_k f||_{L^p}`.
    pub weighted: f64,
}

pub fn besov_terms(f: &RealField, idx: BesovIndex, cutoff: Cutoff) -> Vec<BlockTerm> {
    let dx = f.grid().dx();
    let spec = f.transform();
    (-1..=top_block(f))
        .map(|k| {
            let block = spec_block(&spec, k, cutoff).inverse_transform();
            let block_norm = lp_norm_of(block.samples().iter().copied(), idx.p, dx);
            BlockTerm { k, block_norm, weighted: 2f64.powf(k as f64 * idx.s) * block_norm }
        })
        .collect()
}

/// `(sum_k (2^(ks) ||Delta_k f||_p)^q)^(1/q)`, or the sup over `k` for `q = inf`.
pub fn besov_norm(f: &RealField, idx: BesovIndex, cutoff: Cutoff) -> f64 {
    let terms = besov_terms(f, idx, cutoff);
    let weighted = terms.iter().map(|t| t.weighted);
    if idx.q.is_infinite() {
        weighted.fold(0.0, f64::max)
    } else if idx.q == 2.0 {
        weighted.map(|w| w * w).sum::<f64>().sqrt()
    } else if idx.q == 1.0 {
        weighted.sum()
    } else {
        weighted.map(|w| w.powf(idx.q)).sum::<f64>().powf(1.0 / idx.q)
    }
}

/// `H^s` norm from the Fourier side, Parseval-normalized so that `s = 0`
/// gives the grid `L^2` norm.
pub fn sobolev_norm(f: &RealField, s: f64) -> f64 {
    let spec = f.transform();
    let n = f.grid().n() as f64;
    let sum: f64 = spec
        .coeffs()
        .iter()
        .zip(f.grid().wavenumbers())
        .map(|(c, &xi)| (s * (xi * xi).ln_1p()).exp() * c.norm_sqr())
        .sum();
    (sum * f.grid().dx() / n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    fn grid() -> Grid {
        Grid::new(PI, 64).unwrap()
    }

    #[test]
    fn index_validation() {
        assert!(BesovIndex::new(1.0, 0.5, 2.0).is_err());
        assert!(BesovIndex::new(f64::NAN, 2.0, 2.0).is_err());
        assert!(BesovIndex::new(-3.0, f64::INFINITY, 1.0).is_ok());
    }

    #[test]
    fn zero_function_has_zero_blocks() {
        let f = RealField::zeros(&grid());
        let d = lp_decompose(&f, Cutoff::Sharp);
        assert!(d.iter().all(|(_, b)| b.sup_norm() == 0.0));
        assert_eq!(besov_norm(&f, BesovIndex::hilbert(2.0), Cutoff::Smooth), 0.0);
    }

    #[test]
    fn single_mode_sits_in_one_block() {
        let f = RealField::from_fn(&grid(), |x| (4.0 * x).sin());
        let d = lp_decompose(&f, Cutoff::Sharp);
        assert_eq!(d.k_max(), 5);
        for (k, b) in d.iter() {
            if k == 2 {
                assert!(b.max_abs_diff(&f).unwrap() < 1e-14);
            } else {
                assert!(b.sup_norm() < 1e-14, "block {k}");
            }
        }
        assert!(d.block(-2).is_none());
    }

    #[test]
    fn partitions_of_unity() {
        for cutoff in [Cutoff::Sharp, Cutoff::Smooth] {
            for &xi in &[0.0, 0.5, 1.0, 1.7, 3.0, 31.9, 64.0] {
                let total: f64 = (-1..=7).map(|k| block_symbol(k, xi, cutoff)).sum();
                assert!((total - 1.0).abs() < 1e-15, "{cutoff:?} {xi}");
                let low: f64 = (-1..=2).map(|k| block_symbol(k, xi, cutoff)).sum();
                assert!((low - low_pass_symbol(3, xi, cutoff)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sobolev_single_mode() {
        let f = RealField::from_fn(&grid(), |x| (2.0 * x).sin());
        for s in [0.0, 1.0, 2.0] {
            let expected = PI.sqrt() * 5f64.powf(s / 2.0);
            assert!((sobolev_norm(&f, s) - expected).abs() < 1e-12 * expected);
        }
        assert!((sobolev_norm(&f, 0.0) - f.lp_norm(2.0)).abs() < 1e-12);
    }
}
