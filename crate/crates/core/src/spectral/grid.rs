use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use super::fft::Radix2;
use super::SpectralError;

/// Uniform periodic sampling of `[-L, L)` with `n` points.
///
/// Cloning is cheap: the FFT plan and wavenumber table are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    half_length: f64,
    n: usize,
    plan: Radix2,
    /// Wavenumbers in FFT storage order: 0, 1, .., n/2-1, -n/2, .., -1 (times pi/L).
    wavenumbers: Vec<f64>,
}

pub const MIN_POINTS: usize = 16;

impl Grid {
    pub fn new(half_length: f64, n: usize) -> Result<Self, SpectralError> {
        if !(half_length.is_finite() && half_length > 0.0) || n < MIN_POINTS || !n.is_power_of_two() {
            return Err(SpectralError::InvalidGrid { half_length, n });
        }
        let wavenumbers = (0..n).map(|idx| PI * signed_index(idx, n) as f64 / half_length).collect();
        Ok(Grid { inner: Arc::new(GridInner { half_length, n, plan: Radix2::new(n), wavenumbers }) })
    }

    pub fn half_length(&self) -> f64 {
        self.inner.half_length
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.inner.half_length / self.inner.n as f64
    }

    /// Left edge `x_0 = -L`.
    pub fn origin(&self) -> f64 {
        -self.inner.half_length
    }

    pub fn point(&self, j: usize) -> f64 {
        -self.inner.half_length + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n()).map(|j| self.point(j)).collect()
    }

    /// Wavenumbers `xi_k = pi k / L` in FFT storage order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    /// Signed mode number `k` stored at FFT slot `idx`.
    pub fn mode(&self, idx: usize) -> i64 {
        signed_index(idx, self.n())
    }

    /// FFT slot holding signed mode `k`, if it is representable.
    pub fn slot(&self, k: i64) -> Option<usize> {
        let n = self.n() as i64;
        if k < -n / 2 || k >= n / 2 {
            return None;
        }
        Some(k.rem_euclid(n) as usize)
    }

    /// Nyquist wavenumber `pi n / (2L)`.
    pub fn xi_max(&self) -> f64 {
        PI * self.n() as f64 / (2.0 * self.half_length())
    }

    pub(crate) fn plan(&self) -> &Radix2 {
        &self.inner.plan
    }

    pub(crate) fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self == other
    }
}

fn signed_index(idx: usize, n: usize) -> i64 {
    if idx < n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n() == other.n() && self.half_length() == other.half_length()
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("half_length", &self.half_length()).field("n", &self.n()).finish()
    }
}
