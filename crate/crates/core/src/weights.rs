//! The standard weight family `phi_{a,b,c,d}(x) = e^{a|x|^b} (1+|x|)^c
//! log(e+|x|)^d`, weighted `L^p` norms, persistence monitoring and tail
//! decay fits.

use alloc::vec::Vec;
use core::f64::consts::E;
#[allow(unused_imports)] // inherent float methods are not always available without std
use num_traits::Float;

use crate::dynamics::Trajectory;
use crate::spectral::{derivative, lp_norm_of, RealField};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Side {
    #[default]
    Both,
    /// `phi(x) = 1` for `x <= 0`.
    RightOnly,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandardWeight {
    pub a: f64,
    pub b_w: f64,
    pub c: f64,
    pub d: f64,
    pub side: Side,
}

impl StandardWeight {
    pub fn new(a: f64, b_w: f64, c: f64, d: f64, side: Side) -> Self {
        StandardWeight { a, b_w, c, d, side }
    }

    /// `phi = 1`.
    pub fn unit() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0, Side::Both)
    }

    /// `(1 + |x|)^c`.
    pub fn algebraic(c: f64) -> Self {
        Self::new(0.0, 0.0, c, 0.0, Side::Both)
    }

    /// `e^{a max(x, 0)}`.
    pub fn right_exponential(a: f64) -> Self {
        Self::new(a, 1.0, 0.0, 0.0, Side::RightOnly)
    }

    /// `a >= 0`, `0 <= b <= 1` and `a b < 1`.
    pub fn in_admissible_range(&self) -> bool {
        self.a >= 0.0 && (0.0..=1.0).contains(&self.b_w) && self.a * self.b_w < 1.0
    }

    /// The two-sided `phi_{|a|,|b|,|c|,|d|}` against which the weight is moderate.
    pub fn companion(&self) -> StandardWeight {
        Self::new(self.a.abs(), self.b_w.abs(), self.c.abs(), self.d.abs(), Side::Both)
    }

    fn ln_eval(&self, x: f64) -> f64 {
        if self.side == Side::RightOnly && x <= 0.0 {
            return 0.0;
        }
        let ax = x.abs();
        let mut acc = 0.0;
        if self.a != 0.0 {
            acc += self.a * if self.b_w == 0.0 { 1.0 } else { ax.powf(self.b_w) };
        }
        if self.c != 0.0 {
            acc += self.c * ax.ln_1p();
        }
        if self.d != 0.0 {
            acc += self.d * (E + ax).ln().ln();
        }
        acc
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.ln_eval(x).exp()
    }

    /// `phi'(x) / phi(x)` (one-sided at `x = 0`, from the right).
    pub fn log_derivative(&self, x: f64) -> f64 {
        if self.side == Side::RightOnly && x < 0.0 {
            return 0.0;
        }
        let ax = x.abs();
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let mut acc = 0.0;
        if self.a != 0.0 && self.b_w != 0.0 {
            acc += self.a * self.b_w * ax.powf(self.b_w - 1.0);
        }
        acc += self.c / (1.0 + ax);
        acc += self.d / ((E + ax) * (E + ax).ln());
        sign * acc
    }
}

pub fn weight_eval(w: &StandardWeight, x: f64) -> f64 {
    w.eval(x)
}

/// Half-lengths of the quadrature convergence tests, doubled from the first
/// until two consecutive values agree or the last is reached.
pub const FIRST_QUADRATURE_LENGTH: f64 = 20.0;
pub const MAX_QUADRATURE_LENGTH: f64 = 5120.0;

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    /// Smallest `A` with `|phi'| <= A phi` at the sample points.
    pub a_min: f64,
    pub in_range: bool,
    /// `(L, int_{-L}^{L} v e^{-|x|} dx)` for the companion `v`.
    pub moderate_integrals: Vec<(f64, f64)>,
    pub moderate_converges: bool,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.in_range && self.moderate_converges && self.a_min.is_finite()
    }
}

/// Checks `|phi'| <= A phi` on `points` and the moderate-weight integral by
/// Simpson quadrature on doubling lengths.
pub fn admissibility_check(w: &StandardWeight, points: &[f64]) -> AdmissibilityReport {
    let a_min = points.iter().map(|&x| w.log_derivative(x).abs()).fold(0.0, f64::max);
    let v = w.companion();
    let moderate_integrals = doubling(|l| 2.0 * simpson(|x| (v.ln_eval(x) - x).exp(), l));
    AdmissibilityReport {
        a_min,
        in_range: w.in_admissible_range(),
        moderate_converges: settled(&moderate_integrals),
        moderate_integrals,
    }
}

/// `v e^{-|x|} in L^p` for the companion `v`, by doubling the domain.
pub fn lp_condition(w: &StandardWeight, p: f64) -> bool {
    let v = w.companion();
    let g = |x: f64| (v.ln_eval(x) - x).exp();
    let values = if p.is_infinite() {
        doubling(|l| {
            let n = (64.0 * l) as usize;
            (0..=n).map(|i| g(l * i as f64 / n as f64)).fold(0.0, f64::max)
        })
    } else {
        doubling(|l| simpson(|x| g(x).powf(p), l))
    };
    settled(&values)
}

fn doubling(value: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut l = FIRST_QUADRATURE_LENGTH;
    while l <= MAX_QUADRATURE_LENGTH {
        out.push((l, value(l)));
        if out.len() >= 2 && settled(&out) {
            break;
        }
        l *= 2.0;
    }
    out
}

fn settled(values: &[(f64, f64)]) -> bool {
    let k = values.len();
    let (last, prev) = (values[k - 1].1, values[k - 2].1);
    last.is_finite() && (last - prev).abs() <= 1e-6 * last.abs().max(1e-300)
}

/// Composite Simpson rule on `[0, l]`.
fn simpson(f: impl Fn(f64) -> f64, l: f64) -> f64 {
    let n = 2 * (64.0 * l).ceil() as usize;
    let h = l / n as f64;
    let mut acc = f(0.0) + f(l);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    acc * h / 3.0
}

/// `||f phi||_{L^p}` by grid quadrature (max for `p = inf`).
pub fn weighted_norm(f: &RealField, w: &StandardWeight, p: f64) -> f64 {
    let g = f.grid();
    lp_norm_of(f.samples().iter().enumerate().map(|(j, v)| v * w.eval(g.point(j))), p, g.dx())
}

/// Relative level below which samples are treated as rounding noise by the
/// monitors.
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-13;

fn masked(f: &RealField, floor: f64) -> RealField {
    let cut = floor * f.sup_norm();
    f.map(|v| if v.abs() <= cut { 0.0 } else { v })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceReport {
    pub p: f64,
    pub times: Vec<f64>,
    /// `W_p(t) = ||u phi||_p + ||u_x phi||_p + ||rho phi||_p`.
    pub w: Vec<f64>,
    /// Running max of `||u||_inf + ||u_x||_inf + ||rho||_inf`.
    pub m_running: Vec<f64>,
    /// `M` over the whole run.
    pub m: f64,
    /// Least-squares slope of `ln W` against `(1 + M) t`.
    pub c_hat: f64,
    pub intercept: f64,
    /// Max distance of `ln W` from the fitted line.
    pub residual: f64,
}

impl PersistenceReport {
    pub fn is_zero(&self) -> bool {
        self.w.iter().all(|&v| v == 0.0)
    }

    /// Largest `ln W(t) - ln W(0) - c_hat (1 + M) t`.
    pub fn bound_excess(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let l0 = self.w[0].ln();
        self.times
            .iter()
            .zip(&self.w)
            .map(|(&t, &w)| w.ln() - l0 - self.c_hat * (1.0 + self.m) * (t - self.times[0]))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn bound_holds(&self, tol: f64) -> bool {
        self.bound_excess() <= tol
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum WeightError {
    #[error("weighted norm not finite at t={t}")]
    PersistenceViolation { t: f64 },
    #[error("fit window holds no nonzero samples")]
    UndefinedFit,
    #[error("every window sample lies below the noise floor")]
    BelowResolution,
    #[error("invalid window [{lo}, {hi}]")]
    InvalidWindow { lo: f64, hi: f64 },
}

/// `W_p(t)`, `M` and the fitted growth constant over a trajectory. Samples
/// below `noise_floor * max|f|` are zeroed before weighting.
pub fn persistence_monitor(
    traj: &Trajectory,
    w: &StandardWeight,
    p: f64,
    noise_floor: f64,
) -> Result<PersistenceReport, WeightError> {
    let mut times = Vec::with_capacity(traj.len());
    let mut values = Vec::with_capacity(traj.len());
    let mut m_running = Vec::with_capacity(traj.len());
    let mut m = 0.0f64;
    for s in traj.states() {
        let ux = derivative(&s.u, 1);
        let total = [&s.u, &ux, &s.rho].iter().map(|f| weighted_norm(&masked(f, noise_floor), w, p)).sum::<f64>();
        if !total.is_finite() {
            return Err(WeightError::PersistenceViolation { t: s.t });
        }
        m = m.max(s.u.sup_norm() + ux.sup_norm() + s.rho.sup_norm());
        times.push(s.t);
        values.push(total);
        m_running.push(m);
    }
    let mut report = PersistenceReport { p, times, w: values, m_running, m, c_hat: 0.0, intercept: 0.0, residual: 0.0 };
    if report.is_zero() {
        return Ok(report);
    }
    let xs: Vec<f64> = report.times.iter().map(|t| (1.0 + m) * (t - report.times[0])).collect();
    let ys: Vec<f64> = report.w.iter().map(|v| v.ln()).collect();
    let (slope, intercept, residual) = line_fit(&xs, &ys);
    report.c_hat = slope;
    report.intercept = intercept;
    report.residual = residual;
    Ok(report)
}

/// Least squares `y = k + s x`; returns `(s, k, max |residual|)`. A single
/// point gives slope zero.
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let k = my - slope * mx;
    let residual = xs.iter().zip(ys).map(|(x, y)| (y - k - slope * x).abs()).fold(0.0, f64::max);
    (slope, k, residual)
}

/// Tail window `lo <= |x| <= hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    /// `[0.45 L, 0.7 L]`.
    pub fn default_for(half_length: f64) -> Self {
        Window { lo: 0.45 * half_length, hi: 0.7 * half_length }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    /// Rate in `|f| ~ e^{-a |x|}`.
    pub a_hat: f64,
    pub a_residual: f64,
    /// Rate in `|f| ~ (1 + |x|)^{-c}`.
    pub c_hat: f64,
    pub c_residual: f64,
    pub samples: usize,
}

/// Least-squares fits of `ln|f|` against `|x|` and `ln(1 + |x|)` over the
/// window samples above `noise_floor * max|f|`.
pub fn decay_profile(f: &RealField, window: Window, noise_floor: f64) -> Result<DecayFit, WeightError> {
    if !(window.lo >= 0.0 && window.hi > window.lo) {
        return Err(WeightError::InvalidWindow { lo: window.lo, hi: window.hi });
    }
    let g = f.grid();
    let inside: Vec<(f64, f64)> = f
        .samples()
        .iter()
        .enumerate()
        .map(|(j, &v)| (g.point(j).abs(), v.abs()))
        .filter(|&(ax, _)| ax >= window.lo && ax <= window.hi)
        .collect();
    if inside.iter().all(|&(_, v)| v == 0.0) {
        return Err(WeightError::UndefinedFit);
    }
    let cut = noise_floor * f.sup_norm();
    let kept: Vec<(f64, f64)> = inside.into_iter().filter(|&(_, v)| v > cut).collect();
    if kept.len() < 2 {
        return Err(WeightError::BelowResolution);
    }
    let ys: Vec<f64> = kept.iter().map(|&(_, v)| v.ln()).collect();
    let xs: Vec<f64> = kept.iter().map(|&(ax, _)| ax).collect();
    let (s_exp, _, r_exp) = line_fit(&xs, &ys);
    let logs: Vec<f64> = xs.iter().map(|x| x.ln_1p()).collect();
    let (s_alg, _, r_alg) = line_fit(&logs, &ys);
    Ok(DecayFit { a_hat: -s_exp, a_residual: r_exp, c_hat: -s_alg, c_residual: r_alg, samples: kept.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    #[test]
    fn unit_weight() {
        let w = StandardWeight::unit();
        assert_eq!(w.eval(3.7), 1.0);
        let r = admissibility_check(&w, &Grid::new(20.0, 256).unwrap().points());
        assert_eq!(r.a_min, 0.0);
        assert!(r.admissible());
        assert!((r.moderate_integrals.last().unwrap().1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn algebraic_weight_constant() {
        let w = StandardWeight::algebraic(2.0);
        assert!((w.eval(-3.0) - 16.0).abs() < 1e-12);
        let r = admissibility_check(&w, &Grid::new(20.0, 256).unwrap().points());
        assert!((r.a_min - 2.0).abs() < 1e-12);
        assert!(r.admissible());
    }

    #[test]
    fn right_only_is_flat_on_the_left() {
        let w = StandardWeight::right_exponential(0.5);
        assert_eq!(w.eval(-10.0), 1.0);
        assert!((w.eval(2.0) - 1f64.exp()).abs() < 1e-12);
        assert_eq!(w.log_derivative(-1.0), 0.0);
        assert!((w.log_derivative(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn critical_exponential_weight() {
        let w = StandardWeight::new(1.0, 1.0, 0.0, 0.0, Side::Both);
        let r = admissibility_check(&w, &[0.0, 1.0]);
        assert!(!r.in_range);
        assert!(!r.moderate_converges);
        // grows like 2L
        assert!((r.moderate_integrals[3].1 / r.moderate_integrals[2].1 - 2.0).abs() < 1e-6);
        assert!(lp_condition(&w, f64::INFINITY));
        assert!(!lp_condition(&w, 2.0));
    }

    #[test]
    fn line_fit_exact() {
        let (s, k, r) = line_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((s - 2.0).abs() < 1e-15 && (k - 1.0).abs() < 1e-15 && r < 1e-15);
    }

    #[test]
    fn decay_window_errors() {
        let g = Grid::new(40.0, 512).unwrap();
        let z = RealField::zeros(&g);
        assert_eq!(decay_profile(&z, Window::default_for(40.0), 1e-13), Err(WeightError::UndefinedFit));
        let bad = Window { lo: 5.0, hi: 1.0 };
        assert!(matches!(decay_profile(&z, bad, 1e-13), Err(WeightError::InvalidWindow { .. })));
        let gauss = RealField::from_fn(&g, |x| (-x * x).exp());
        assert_eq!(decay_profile(&gauss, Window::default_for(40.0), 1e-13), Err(WeightError::BelowResolution));
    }
}
