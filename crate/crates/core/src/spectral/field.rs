use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods are not always available without std
use num_traits::Float;

use num_complex::Complex64;

use super::{Grid, SpectralError};

/// Samples of a real function at the grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid,
    samples: Vec<f64>,
}

/// Discrete Fourier coefficients of a field, in FFT storage order.
///
/// The coefficients are the unnormalized DFT of the sample vector, so a mode
/// `exp(i xi_k (x - x_0))` with unit amplitude carries coefficient `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl RealField {
    pub fn new(grid: &Grid, samples: Vec<f64>) -> Result<Self, SpectralError> {
        if samples.len() != grid.n() {
            return Err(SpectralError::LengthMismatch { expected: grid.n(), found: samples.len() });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite);
        }
        Ok(RealField { grid: grid.clone(), samples })
    }

    /// Samples `f` at every grid point. No finiteness check is made.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        RealField { samples: (0..grid.n()).map(|j| f(grid.point(j))).collect(), grid: grid.clone() }
    }

    pub(crate) fn from_raw(grid: &Grid, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.n());
        RealField { grid: grid.clone(), samples }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        RealField { grid: grid.clone(), samples: alloc::vec![value; grid.n()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    pub fn transform(&self) -> SpectralField {
        let mut coeffs: Vec<Complex64> = self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.plan().forward(&mut coeffs);
        SpectralField { grid: self.grid.clone(), coeffs }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField::from_raw(&self.grid, self.samples.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> Result<RealField, SpectralError> {
        self.check_grid(other.grid())?;
        Ok(self.zip_unchecked(other, f))
    }

    pub(crate) fn zip_unchecked(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> RealField {
        debug_assert!(self.grid.same_as(&other.grid));
        RealField::from_raw(&self.grid, self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn scale(&self, factor: f64) -> RealField {
        self.map(|v| factor * v)
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &RealField) -> Result<RealField, SpectralError> {
        self.zip_with(other, |a, b| a + factor * b)
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid quadrature of `(int |f|^p dx)^(1/p)`; `p = inf` gives the max norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm_of(self.samples.iter().copied(), p, self.grid.dx())
    }

    /// Periodic rectangle rule for `int f dx`.
    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.grid.dx()
    }

    /// Sup of `|self - other|`.
    pub fn max_abs_diff(&self, other: &RealField) -> Result<f64, SpectralError> {
        self.check_grid(other.grid())?;
        Ok(self.samples.iter().zip(&other.samples).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub(crate) fn check_grid(&self, grid: &Grid) -> Result<(), SpectralError> {
        if self.grid.same_as(grid) {
            Ok(())
        } else {
            Err(SpectralError::GridMismatch)
        }
    }
}

pub(crate) fn lp_norm_of(values: impl Iterator<Item = f64>, p: f64, dx: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        values.map(|v| v.abs()).sum::<f64>() * dx
    } else if p == 2.0 {
        (values.map(|v| v * v).sum::<f64>() * dx).sqrt()
    } else {
        (values.map(|v| v.abs().powf(p)).sum::<f64>() * dx).powf(1.0 / p)
    }
}

impl SpectralField {
    pub fn new(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.n() {
            return Err(SpectralError::LengthMismatch { expected: grid.n(), found: coeffs.len() });
        }
        Ok(SpectralField { grid: grid.clone(), coeffs })
    }

    pub(crate) fn from_raw(grid: &Grid, coeffs: Vec<Complex64>) -> Self {
        SpectralField { grid: grid.clone(), coeffs }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_raw(grid, alloc::vec![Complex64::new(0.0, 0.0); grid.n()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of signed mode `k`, zero if the mode is not on the grid.
    pub fn mode(&self, k: i64) -> Complex64 {
        self.grid.slot(k).map(|s| self.coeffs[s]).unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Back to samples. Imaginary residue (from non-Hermitian input) is dropped.
    pub fn inverse_transform(&self) -> RealField {
        let mut data = self.coeffs.clone();
        self.grid.plan().inverse(&mut data);
        RealField::from_raw(&self.grid, data.into_iter().map(|z| z.re).collect())
    }

    /// Multiplies every coefficient by `symbol(xi)`.
    pub fn apply_symbol(&self, symbol: impl Fn(f64) -> Complex64) -> SpectralField {
        let coeffs = self.coeffs.iter().zip(self.grid.wavenumbers()).map(|(&c, &xi)| c * symbol(xi)).collect();
        SpectralField::from_raw(&self.grid, coeffs)
    }

    /// Multiplies every coefficient by a real symbol.
    pub fn apply_real_symbol(&self, symbol: impl Fn(f64) -> f64) -> SpectralField {
        let coeffs = self.coeffs.iter().zip(self.grid.wavenumbers()).map(|(&c, &xi)| c * symbol(xi)).collect();
        SpectralField::from_raw(&self.grid, coeffs)
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField, SpectralError> {
        if !self.grid.same_as(&other.grid) {
            return Err(SpectralError::GridMismatch);
        }
        Ok(self.lin_comb(1.0, other, 1.0))
    }

    /// `a * self + b * other`, grids assumed equal.
    pub(crate) fn lin_comb(&self, a: f64, other: &SpectralField, b: f64) -> SpectralField {
        debug_assert!(self.grid.same_as(&other.grid));
        SpectralField::from_raw(
            &self.grid,
            self.coeffs.iter().zip(&other.coeffs).map(|(&x, &y)| x * a + y * b).collect(),
        )
    }

    /// Maximum deviation from Hermitian symmetry `c(-xi) = conj(c(xi))`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        (0..n)
            .map(|i| {
                let j = (n - i) % n;
                (self.coeffs[i] - self.coeffs[j].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `sum |c_k|^2 * dx / n`, equal to the squared L2 norm of the samples.
    pub fn parseval_l2(&self) -> f64 {
        let n = self.grid.n() as f64;
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dx() / n).sqrt()
    }

    /// Trigonometric interpolant at an arbitrary point (periodic in `2L`).
    pub fn eval_at(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).0
    }

    /// Trigonometric interpolant and its exact derivative at `x`.
    ///
    /// The Nyquist coefficient enters as a cosine so the interpolant stays real.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let n = self.grid.n();
        let half = n / 2;
        let base_rate = PI / self.grid.half_length();
        let theta = base_rate * (x - self.grid.origin());
        let step = Complex64::new(theta.cos(), theta.sin());
        let mut phase = Complex64::new(1.0, 0.0);
        let mut value = 0.0;
        let mut slope = 0.0;
        for k in 1..half {
            // resync against accumulated rounding in the phase recurrence
            if k % 64 == 0 {
                let t = theta * k as f64;
                phase = Complex64::new(t.cos(), t.sin());
            } else {
                phase *= step;
            }
            let c = self.coeffs[k];
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let term = c * phase;
            value += term.re;
            slope -= base_rate * k as f64 * term.im;
        }
        let nyq = self.coeffs[half].re;
        let t_nyq = theta * half as f64;
        let scale = 1.0 / n as f64;
        (
            (self.coeffs[0].re + 2.0 * value + nyq * t_nyq.cos()) * scale,
            (2.0 * slope - nyq * base_rate * half as f64 * t_nyq.sin()) * scale,
        )
    }

    /// Largest index `k` (in `0..n/2`) carrying a non-zero coefficient.
    pub(crate) fn band_limit(&self) -> usize {
        let n = self.grid.n();
        (0..=n / 2).rev().find(|&k| self.coeffs[k].norm() != 0.0 || self.coeffs[(n - k) % n].norm() != 0.0).unwrap_or(0)
    }
}

/// Evaluates a field and its derivative at many points, reusing one phase
/// recurrence per point and skipping modes above the field's band limit.
pub fn eval_many(field: &SpectralField, points: &[f64]) -> Vec<(f64, f64)> {
    let n = field.grid().n();
    let top = field.band_limit();
    if top >= n / 2 {
        return points.iter().map(|&x| field.eval_with_derivative(x)).collect();
    }
    let base_rate = PI / field.grid().half_length();
    let origin = field.grid().origin();
    let coeffs = field.coeffs();
    let scale = 1.0 / n as f64;
    points
        .iter()
        .map(|&x| {
            let theta = base_rate * (x - origin);
            let step = Complex64::new(theta.cos(), theta.sin());
            let mut phase = Complex64::new(1.0, 0.0);
            let mut value = 0.0;
            let mut slope = 0.0;
            for (k, c) in coeffs.iter().enumerate().take(top + 1).skip(1) {
                if k % 64 == 0 {
                    let t = theta * k as f64;
                    phase = Complex64::new(t.cos(), t.sin());
                } else {
                    phase *= step;
                }
                let term = c * phase;
                value += term.re;
                slope -= k as f64 * term.im;
            }
            ((coeffs[0].re + 2.0 * value) * scale, 2.0 * slope * base_rate * scale)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(PI, 32).unwrap()
    }

    #[test]
    fn length_and_finiteness_checked() {
        let g = grid();
        assert!(matches!(
            RealField::new(&g, alloc::vec![0.0; 31]),
            Err(SpectralError::LengthMismatch { expected: 32, found: 31 })
        ));
        let mut s = alloc::vec![0.0; 32];
        s[3] = f64::NAN;
        assert_eq!(RealField::new(&g, s), Err(SpectralError::NonFinite));
    }

    #[test]
    fn zero_field_has_zero_spectrum() {
        let f = RealField::zeros(&grid()).transform();
        assert!(f.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn single_cosine_occupies_two_modes() {
        let g = grid();
        let f = RealField::from_fn(&g, |x| (x * PI / g.half_length()).cos()).transform();
        for idx in 0..g.n() {
            let k = g.mode(idx);
            let c = f.coeffs()[idx].norm();
            if k.abs() == 1 {
                assert!((c - 16.0).abs() < 1e-12);
            } else {
                assert!(c < 1e-12, "mode {k} = {c}");
            }
        }
    }

    #[test]
    fn interpolation_reproduces_band_limited_function() {
        let g = grid();
        let f = |x: f64| (3.0 * x).sin() + 0.5 * (x - 0.2).cos() + 0.25;
        let spec = RealField::from_fn(&g, f).transform();
        for &x in &[-3.0, -1.234, 0.0, 0.77, 2.9, 7.5] {
            let (v, d) = spec.eval_with_derivative(x);
            assert!((v - f(x)).abs() < 1e-13);
            let exact = 3.0 * (3.0 * x).cos() - 0.5 * (x - 0.2).sin();
            assert!((d - exact).abs() < 1e-12);
        }
        let many = eval_many(&spec, &[0.3, -2.0]);
        assert!((many[0].0 - f(0.3)).abs() < 1e-13);
        assert!((many[1].1 - (3.0 * (-6.0f64).cos() - 0.5 * (-2.2f64).sin())).abs() < 1e-12);
    }

    #[test]
    fn lp_norms_by_quadrature() {
        let g = grid();
        let f = RealField::from_fn(&g, |x| (2.0 * x).sin());
        assert!((f.lp_norm(2.0) - PI.sqrt()).abs() < 1e-13);
        let shifted = f.map(|v| v + 2.0);
        assert!((shifted.lp_norm(1.0) - 4.0 * PI).abs() < 1e-12);
        assert!((f.lp_norm(f64::INFINITY) - 1.0).abs() < 1e-12);
        assert!((f.lp_norm(3.0) - f.lp_norm(3.0000000001)).abs() < 1e-8);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = RealField::zeros(&grid());
        let b = RealField::zeros(&Grid::new(1.0, 32).unwrap());
        assert_eq!(a.zip_with(&b, |x, y| x + y), Err(SpectralError::GridMismatch));
    }
}
