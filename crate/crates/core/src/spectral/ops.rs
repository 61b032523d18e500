use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods are not always available without std
use num_traits::Float;

use super::{RealField, SpectralError, SpectralField};

/// The inertia operator `A = (1 - d^2/dx^2)^r`, Fourier symbol `(1 + xi^2)^r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inertia {
    r: f64,
}

impl Inertia {
    /// Exponents below one are rejected; see [`Inertia::exploratory`].
    pub fn new(r: f64) -> Result<Self, SpectralError> {
        if !r.is_finite() || r < 1.0 {
            return Err(SpectralError::InertiaExponent(r));
        }
        Ok(Inertia { r })
    }

    /// Any finite exponent, including `r < 1`.
    pub fn exploratory(r: f64) -> Result<Self, SpectralError> {
        if !r.is_finite() {
            return Err(SpectralError::InertiaExponent(r));
        }
        Ok(Inertia { r })
    }

    pub fn exponent(&self) -> f64 {
        self.r
    }

    pub fn symbol(&self, xi: f64) -> f64 {
        if self.r == 1.0 {
            1.0 + xi * xi
        } else {
            (self.r * (xi * xi).ln_1p()).exp()
        }
    }

    pub fn apply_spectral(&self, f: &SpectralField) -> SpectralField {
        f.apply_real_symbol(|xi| self.symbol(xi))
    }

    pub fn invert_spectral(&self, f: &SpectralField) -> SpectralField {
        f.apply_real_symbol(|xi| 1.0 / self.symbol(xi))
    }

    pub fn apply(&self, f: &RealField) -> RealField {
        self.apply_spectral(&f.transform()).inverse_transform()
    }

    pub fn invert(&self, f: &RealField) -> RealField {
        self.invert_spectral(&f.transform()).inverse_transform()
    }
}

/// `m = A u` with `A = (1 - d^2/dx^2)^r`, `r >= 1`.
pub fn apply_inertia(f: &RealField, r: f64) -> Result<RealField, SpectralError> {
    Ok(Inertia::new(r)?.apply(f))
}

/// `u = A^{-1} m`.
pub fn invert_inertia(m: &RealField, r: f64) -> Result<RealField, SpectralError> {
    Ok(Inertia::new(r)?.invert(m))
}

/// Convolution with `G(x) = exp(-|x|)/2`, i.e. `(1 - d^2/dx^2)^{-1} f`.
pub fn helmholtz_convolve(f: &RealField) -> RealField {
    helmholtz_spectral(&f.transform()).inverse_transform()
}

pub fn helmholtz_spectral(f: &SpectralField) -> SpectralField {
    f.apply_real_symbol(|xi| 1.0 / (1.0 + xi * xi))
}

/// Symbol `(i xi)^order`; the Nyquist mode is dropped for odd orders.
pub fn derivative_spectral(f: &SpectralField, order: u32) -> SpectralField {
    if order == 0 {
        return f.clone();
    }
    let mut out = f.apply_symbol(|xi| Complex64::new(0.0, xi).powu(order));
    if order % 2 == 1 {
        let nyq = f.grid().n() / 2;
        out.coeffs_mut()[nyq] = Complex64::new(0.0, 0.0);
    }
    out
}

pub fn derivative(f: &RealField, order: u32) -> RealField {
    derivative_spectral(&f.transform(), order).inverse_transform()
}

/// Two-thirds rule: zero every mode with `|xi| > (2/3) xi_max`, i.e. `3|k| > n`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub(crate) fn dealias_in_place(f: &mut SpectralField) {
    let n = f.grid().n();
    let grid = f.grid().clone();
    for (idx, c) in f.coeffs_mut().iter_mut().enumerate() {
        if 3 * grid.mode(idx).unsigned_abs() as usize > n {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Largest retained mode number under the two-thirds rule.
pub fn dealias_cutoff(n: usize) -> usize {
    n / 3
}
