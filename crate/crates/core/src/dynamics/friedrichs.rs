use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods are not always available without std
use num_traits::Float;

use super::{hermite, rk4_from, to_spectral, DynamicsError, Params, Rates, State, StepControl, Trajectory};
use crate::besov::{low_pass, Cutoff};
use crate::spectral::{derivative_spectral, RealField};

/// Iterates `1..=K` of the frozen-coefficient scheme on a shared uniform
/// time grid.
#[derive(Clone, Debug)]
pub struct FriedrichsRun {
    /// Uniform step used by every iterate.
    pub step: f64,
    /// `iterates[k - 1]` holds iterate `k`.
    pub iterates: Vec<Trajectory>,
}

impl FriedrichsRun {
    /// Fixed-step control reproducing the iterates' time grid, for the direct
    /// nonlinear comparison run.
    pub fn direct_control(&self, template: &StepControl) -> StepControl {
        StepControl { dt_max: self.step * (1.0 + 1e-9), adaptive: false, output_interval: None, ..*template }
    }
}

/// Right-hand side of the linear system with coefficients `c` frozen:
///
/// ```text
/// m'_t = -c_u d_x m' + alpha d_x c_u - b d_x c_u A c_u - kappa c_rho d_x c_rho
/// rho'_t = -c_u d_x rho' - (b - 1) d_x c_u c_rho
/// ```
fn linear_rhs(v: &State, c: &State, params: &Params, dealias: bool) -> Result<Rates, DynamicsError> {
    let inertia = params.inertia();
    let cu_hat = c.u.transform();
    let cux = derivative_spectral(&cu_hat, 1).inverse_transform();
    let cm = inertia.apply_spectral(&cu_hat).inverse_transform();
    let crhox = derivative_spectral(&c.rho.transform(), 1).inverse_transform();
    let vmx = derivative_spectral(&inertia.apply_spectral(&v.u.transform()), 1).inverse_transform();
    let vrhox = derivative_spectral(&v.rho.transform(), 1).inverse_transform();
    let alpha_cux = params.alpha().times(&cux);
    let (b, kappa) = (params.b(), params.kappa());
    let n = v.u.samples().len();
    let s = |f: &RealField, j: usize| f.samples()[j];

    let mt = RealField::from_raw(
        v.grid(),
        (0..n)
            .map(|j| {
                -s(&c.u, j) * s(&vmx, j) + s(&alpha_cux, j)
                    - b * s(&cux, j) * s(&cm, j)
                    - kappa * s(&c.rho, j) * s(&crhox, j)
            })
            .collect(),
    );
    let rt = RealField::from_raw(
        v.grid(),
        (0..n).map(|j| -s(&c.u, j) * s(&vrhox, j) - (b - 1.0) * s(&cux, j) * s(&c.rho, j)).collect(),
    );
    let du = inertia.invert_spectral(&to_spectral(&mt, dealias)).inverse_transform();
    let drho = to_spectral(&rt, dealias).inverse_transform();
    if !du.is_finite() || !drho.is_finite() {
        return Err(DynamicsError::blow_up(v.t, cux.sup_norm()));
    }
    Ok(Rates { du, drho })
}

fn midpoint(a: &State, da: &Rates, b: &State, db: &Rates, h: f64) -> State {
    let mix = |y0: &RealField, d0: &RealField, y1: &RealField, d1: &RealField| {
        RealField::from_raw(
            y0.grid(),
            (0..y0.samples().len())
                .map(|j| hermite(y0.samples()[j], d0.samples()[j], y1.samples()[j], d1.samples()[j], h, 0.5))
                .collect(),
        )
    };
    State { t: 0.5 * (a.t + b.t), u: mix(&a.u, &da.du, &b.u, &db.du), rho: mix(&a.rho, &da.drho, &b.rho, &db.drho) }
}

/// Runs `k_count` iterates. Iterate 0 is the zero function; iterate `k + 1`
/// starts from the low-pass data `S_{k+1} u0`, `S_{k+1} rho0` and solves the
/// linear transport system with coefficients from iterate `k`, interpolated
/// in time by cubic Hermite polynomials at RK4 half steps.
///
/// All iterates share the uniform step `t_final / ceil(t_final / dt)` with
/// `dt = dt_max`, or `min(dt_max, cfl dx / max(1, 2 max|u0|))` for an adaptive
/// control.
pub fn friedrichs_iterate(
    u0: &RealField,
    rho0: &RealField,
    params: &Params,
    k_count: usize,
    ctrl: &StepControl,
    cutoff: Cutoff,
) -> Result<FriedrichsRun, DynamicsError> {
    ctrl.validate()?;
    if k_count == 0 {
        return Err(DynamicsError::InvalidControl("need at least one iterate"));
    }
    u0.check_grid(rho0.grid())?;
    params.check_grid(u0.grid())?;
    let grid = u0.grid().clone();
    let dt = if ctrl.adaptive {
        ctrl.dt_max.min(ctrl.cfl * grid.dx() / (2.0 * u0.sup_norm()).max(1.0))
    } else {
        ctrl.dt_max
    };
    let count = (ctrl.t_final / dt).ceil().max(1.0) as usize;
    let h = ctrl.t_final / count as f64;
    let times: Vec<f64> = (0..=count).map(|j| j as f64 * h).collect();

    let mut coeff: Vec<State> = times.iter().map(|&t| State { t, ..State::zeros(&grid) }).collect();
    let mut coeff_rates: Vec<Rates> = times.iter().map(|_| Rates::zeros(&grid)).collect();
    let opts = ctrl.rhs_options(super::Formulation::MForm);
    let mut iterates = Vec::with_capacity(k_count);

    for k in 1..=k_count {
        let level = k as u32;
        let mut v = State { t: 0.0, u: low_pass(u0, level, cutoff), rho: low_pass(rho0, level, cutoff) };
        if ctrl.dealias {
            v = v.dealiased();
        }
        let mut states = Vec::with_capacity(count + 1);
        let mut rates = Vec::with_capacity(count + 1);
        for j in 0..count {
            let k1 = linear_rhs(&v, &coeff[j], params, ctrl.dealias)?;
            let mid = midpoint(&coeff[j], &coeff_rates[j], &coeff[j + 1], &coeff_rates[j + 1], h);
            let next = rk4_from(&v, &k1, h, |stage, s| {
                let c = if stage == 4 { &coeff[j + 1] } else { &mid };
                linear_rhs(s, c, params, ctrl.dealias)
            })?;
            states.push(v);
            rates.push(k1);
            v = State { t: times[j + 1], ..next };
        }
        rates.push(linear_rhs(&v, &coeff[count], params, ctrl.dealias)?);
        states.push(v);
        iterates.push(Trajectory::from_parts(params.clone(), opts, states.clone(), count));
        coeff = states;
        coeff_rates = rates;
    }
    Ok(FriedrichsRun { step: h, iterates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Alpha;
    use crate::spectral::{Grid, Inertia};
    use core::f64::consts::PI;

    #[test]
    fn zero_data_zero_iterates() {
        let g = Grid::new(PI, 32).unwrap();
        let p = Params::new(2.0, 1.0, Alpha::Constant(0.5), 1.0).unwrap();
        let z = RealField::zeros(&g);
        let run = friedrichs_iterate(&z, &z, &p, 3, &StepControl::fixed(0.05, 0.2), Cutoff::Sharp).unwrap();
        assert_eq!(run.iterates.len(), 3);
        for it in &run.iterates {
            assert!(it.states().iter().all(|s| s.u.sup_norm() == 0.0 && s.rho.sup_norm() == 0.0));
        }
    }

    #[test]
    fn first_iterate_momentum_is_frozen() {
        // iterate 0 vanishes, so every source term of iterate 1 vanishes
        let g = Grid::new(PI, 64).unwrap();
        let p = Params::new(3.0, 1.0, Alpha::Constant(0.7), 1.5).unwrap();
        let u0 = RealField::from_fn(&g, |x| 0.3 + 0.2 * x.cos());
        let rho0 = RealField::from_fn(&g, |x| 1.0 + 0.1 * x.sin());
        let run = friedrichs_iterate(&u0, &rho0, &p, 1, &StepControl::fixed(0.05, 0.2), Cutoff::Sharp).unwrap();
        let a = Inertia::new(1.5).unwrap();
        let first = &run.iterates[0];
        let m0 = a.apply(&first.first().u);
        for s in first.states() {
            assert!(a.apply(&s.u).max_abs_diff(&m0).unwrap() < 1e-14);
            assert!(s.rho.max_abs_diff(&first.first().rho).unwrap() < 1e-14);
        }
    }
}
