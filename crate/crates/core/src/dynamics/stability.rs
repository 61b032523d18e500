use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods are not always available without std
use num_traits::Float;

use super::{integrate, DynamicsError, Formulation, Params, State, StepControl, Trajectory};
use crate::besov::{besov_norm, BesovIndex, Cutoff};
use crate::spectral::RealField;

/// Regularity index `s` and the dyadic partition used for every norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilitySpec {
    pub s: f64,
    pub cutoff: Cutoff,
}

/// Time series of one paired run with data `(u0, rho0)` and
/// `(u0 + eps * pert, rho0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRun {
    pub eps: f64,
    pub times: Vec<f64>,
    /// `||u1 - u2||_{B^{s-1}_{2,2}}`.
    pub u_diff: Vec<f64>,
    /// `||rho1 - rho2||_{B^{s-2r}_{2,2}}`.
    pub rho_diff: Vec<f64>,
    /// `Gamma_s(t)`.
    pub gamma: Vec<f64>,
    /// Trapezoid integral of `Gamma_s` from 0 to `t`.
    pub gamma_integral: Vec<f64>,
}

impl StabilityRun {
    pub fn difference(&self, i: usize) -> f64 {
        self.u_diff[i] + self.rho_diff[i]
    }

    pub fn sup_u_diff(&self) -> f64 {
        self.u_diff.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_rho_diff(&self) -> f64 {
        self.rho_diff.iter().copied().fold(0.0, f64::max)
    }

    /// Difference at snapshot `i` relative to the initial difference.
    pub fn ratio(&self, i: usize) -> f64 {
        self.difference(i) / self.difference(0)
    }
}

/// Paired runs for each `eps`, on a uniform time grid shared with the
/// unperturbed run. The perturbation is rescaled to unit `L^2` norm.
///
/// `Gamma_s = ||u1||_{B^s} + ||u2||_{B^s} + ||rho1||_{B^{s-2r+1}} +
/// ||rho2||_{B^{s-2r+1}} + ||alpha||`, all with `p = q = 2`.
pub fn stability_pair(
    u0: &RealField,
    rho0: &RealField,
    perturbation: &RealField,
    eps_list: &[f64],
    params: &Params,
    ctrl: &StepControl,
    spec: StabilitySpec,
) -> Result<Vec<StabilityRun>, DynamicsError> {
    ctrl.validate()?;
    u0.check_grid(perturbation.grid())?;
    let size = perturbation.lp_norm(2.0);
    if !(size > 0.0 && size.is_finite()) {
        return Err(DynamicsError::InvalidState("perturbation must be nonzero and finite"));
    }
    let pert = perturbation.scale(1.0 / size);
    let eps_max = eps_list.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let dt = if ctrl.adaptive {
        let speed = u0.sup_norm() + eps_max * pert.sup_norm();
        ctrl.dt_max.min(ctrl.cfl * u0.grid().dx() / (2.0 * speed).max(1.0))
    } else {
        ctrl.dt_max
    };
    let fixed = StepControl { dt_max: dt, adaptive: false, output_interval: None, ..*ctrl };
    let base = integrate(&State::new(0.0, u0.clone(), rho0.clone())?, params, &fixed, Formulation::MForm)?;

    eps_list
        .iter()
        .map(|&eps| {
            let u = u0.zip_unchecked(&pert, |a, b| a + eps * b);
            let other = integrate(&State::new(0.0, u, rho0.clone())?, params, &fixed, Formulation::MForm)?;
            Ok(compare(&base, &other, eps, params, spec))
        })
        .collect()
}

fn compare(base: &Trajectory, other: &Trajectory, eps: f64, params: &Params, spec: StabilitySpec) -> StabilityRun {
    let r = params.r();
    let s = spec.s;
    let norm = |f: &RealField, s: f64| besov_norm(f, BesovIndex::hilbert(s), spec.cutoff);
    let alpha = params.alpha().norm(s - 2.0 * r, spec.cutoff);
    let mut run = StabilityRun {
        eps,
        times: Vec::new(),
        u_diff: Vec::new(),
        rho_diff: Vec::new(),
        gamma: Vec::new(),
        gamma_integral: Vec::new(),
    };
    for (a, b) in base.states().iter().zip(other.states()) {
        let du = a.u.zip_unchecked(&b.u, |x, y| x - y);
        let drho = a.rho.zip_unchecked(&b.rho, |x, y| x - y);
        run.times.push(a.t);
        run.u_diff.push(norm(&du, s - 1.0));
        run.rho_diff.push(norm(&drho, s - 2.0 * r));
        let gamma =
            norm(&a.u, s) + norm(&b.u, s) + norm(&a.rho, s - 2.0 * r + 1.0) + norm(&b.rho, s - 2.0 * r + 1.0) + alpha;
        let integral = match (run.gamma.last(), run.gamma_integral.last(), run.times.len()) {
            (Some(&g0), Some(&i0), len) if len >= 2 => {
                i0 + 0.5 * (g0 + gamma) * (run.times[len - 1] - run.times[len - 2])
            }
            _ => 0.0,
        };
        run.gamma.push(gamma);
        run.gamma_integral.push(integral);
    }
    run
}

/// Smallest `C >= 0` with `ln R(t) <= C int_0^t Gamma_s` over all runs with a
/// nonzero initial difference.
pub fn fit_growth_constant(runs: &[StabilityRun]) -> f64 {
    runs.iter()
        .filter(|r| r.difference(0) > 0.0)
        .flat_map(|r| {
            (1..r.times.len())
                .filter(|&i| r.gamma_integral[i] > 0.0)
                .map(move |i| r.ratio(i).ln() / r.gamma_integral[i])
        })
        .fold(0.0, f64::max)
}

/// `max_t (ln R(t) - C int_0^t Gamma_s)`; non-positive when the bound holds.
pub fn growth_excess(run: &StabilityRun, c: f64) -> f64 {
    if run.difference(0) == 0.0 {
        return if run.difference(run.times.len() - 1) == 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    (0..run.times.len()).map(|i| run.ratio(i).ln() - c * run.gamma_integral[i]).fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Alpha;
    use crate::spectral::Grid;
    use core::f64::consts::PI;

    #[test]
    fn zero_eps_zero_difference() {
        let g = Grid::new(PI, 64).unwrap();
        let p = Params::new(2.0, 1.0, Alpha::Constant(0.0), 1.0).unwrap();
        let u0 = RealField::from_fn(&g, |x| 0.2 * x.sin());
        let rho0 = RealField::from_fn(&g, |x| 0.5 + 0.1 * x.cos());
        let pert = RealField::from_fn(&g, |x| (2.0 * x).cos());
        let spec = StabilitySpec { s: 3.0, cutoff: Cutoff::Sharp };
        let runs = stability_pair(&u0, &rho0, &pert, &[0.0, 1e-3], &p, &StepControl::fixed(0.02, 0.1), spec).unwrap();
        assert_eq!(runs[0].sup_u_diff(), 0.0);
        assert_eq!(runs[0].sup_rho_diff(), 0.0);
        assert!(runs[1].difference(0) > 0.0);
        assert_eq!(runs[1].gamma_integral[0], 0.0);
        assert!(runs[1].gamma_integral.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(growth_excess(&runs[0], 0.0), f64::NEG_INFINITY);
        let c = fit_growth_constant(&runs[1..]);
        assert!(growth_excess(&runs[1], c) <= 1e-12);
    }
}
