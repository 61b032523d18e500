//! Right-hand sides of the system in the momentum and nonlocal
//! formulations, RK4 stepping, adaptive integration, the frozen-coefficient
//! iteration and paired-run stability experiments.

mod friedrichs;
mod integrate;
mod stability;

use alloc::boxed::Box;

use crate::besov::{besov_norm, BesovIndex, Cutoff};
use crate::spectral::{
    dealias_in_place, derivative, derivative_spectral, helmholtz_spectral, Grid, Inertia, RealField, SpectralError,
    SpectralField,
};

pub use friedrichs::{friedrichs_iterate, FriedrichsRun};
pub use integrate::{integrate, BlowUp, StepControl, Trajectory, DEFAULT_UX_CEILING};
pub use stability::{fit_growth_constant, growth_excess, stability_pair, StabilityRun, StabilitySpec};

/// The lower-order coefficient `alpha`: a constant or a time-independent
/// field on the simulation grid.
#[derive(Clone, Debug, PartialEq)]
pub enum Alpha {
    Constant(f64),
    Field(RealField),
}

impl Alpha {
    pub fn is_zero(&self) -> bool {
        match self {
            Alpha::Constant(c) => *c == 0.0,
            Alpha::Field(f) => f.sup_norm() == 0.0,
        }
    }

    /// `|c|` for a constant, `||alpha||_{B^s_{2,2}}` for a field.
    pub fn norm(&self, s: f64, cutoff: Cutoff) -> f64 {
        match self {
            Alpha::Constant(c) => c.abs(),
            Alpha::Field(f) => besov_norm(f, BesovIndex::hilbert(s), cutoff),
        }
    }

    fn times(&self, f: &RealField) -> RealField {
        match self {
            Alpha::Constant(c) => f.scale(*c),
            Alpha::Field(a) => a.zip_unchecked(f, |x, y| x * y),
        }
    }
}

/// Model constants `(b, kappa, alpha, r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    b: f64,
    kappa: f64,
    alpha: Alpha,
    inertia: Inertia,
}

impl Params {
    pub fn new(b: f64, kappa: f64, alpha: Alpha, r: f64) -> Result<Self, DynamicsError> {
        Self::build(b, kappa, alpha, Inertia::new(r)?)
    }

    /// As [`Params::new`] but accepting inertia exponents below one.
    pub fn exploratory(b: f64, kappa: f64, alpha: Alpha, r: f64) -> Result<Self, DynamicsError> {
        Self::build(b, kappa, alpha, Inertia::exploratory(r)?)
    }

    fn build(b: f64, kappa: f64, alpha: Alpha, inertia: Inertia) -> Result<Self, DynamicsError> {
        if !b.is_finite() || !kappa.is_finite() {
            return Err(DynamicsError::InvalidParams("b and kappa must be finite"));
        }
        match &alpha {
            Alpha::Constant(c) if !c.is_finite() => return Err(DynamicsError::InvalidParams("alpha must be finite")),
            _ => {}
        }
        Ok(Params { b, kappa, alpha, inertia })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    pub fn r(&self) -> f64 {
        self.inertia.exponent()
    }

    pub fn inertia(&self) -> Inertia {
        self.inertia
    }

    pub fn pressure(&self) -> PressureCoefficients {
        PressureCoefficients { u2: 0.5 * self.b, ux2: 0.5 * (3.0 - self.b), rho2: 0.5 * self.kappa }
    }

    fn check_grid(&self, grid: &Grid) -> Result<(), DynamicsError> {
        if let Alpha::Field(a) = &self.alpha {
            a.check_grid(grid)?;
        }
        Ok(())
    }
}

/// Solution pair `(u, rho)` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: RealField,
    pub rho: RealField,
}

impl State {
    pub fn new(t: f64, u: RealField, rho: RealField) -> Result<Self, DynamicsError> {
        u.check_grid(rho.grid())?;
        if !t.is_finite() {
            return Err(DynamicsError::InvalidState("time must be finite"));
        }
        Ok(State { t, u, rho })
    }

    pub fn zeros(grid: &Grid) -> Self {
        State { t: 0.0, u: RealField::zeros(grid), rho: RealField::zeros(grid) }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.u.is_finite() && self.rho.is_finite()
    }

    /// `m = A u`.
    pub fn momentum(&self, params: &Params) -> RealField {
        params.inertia.apply(&self.u)
    }

    pub fn max_abs_ux(&self) -> f64 {
        derivative(&self.u, 1).sup_norm()
    }

    /// Two-thirds projection of both components.
    pub fn dealiased(&self) -> State {
        let project = |f: &RealField| {
            let mut spec = f.transform();
            dealias_in_place(&mut spec);
            spec.inverse_transform()
        };
        State { t: self.t, u: project(&self.u), rho: project(&self.rho) }
    }

    /// `self + h * rates`, time advanced by `h`.
    pub(crate) fn advanced(&self, rates: &Rates, h: f64) -> State {
        State {
            t: self.t + h,
            u: self.u.zip_unchecked(&rates.du, |a, b| a + h * b),
            rho: self.rho.zip_unchecked(&rates.drho, |a, b| a + h * b),
        }
    }
}

/// Time derivatives `(u_t, rho_t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rates {
    pub du: RealField,
    pub drho: RealField,
}

impl Rates {
    pub fn zeros(grid: &Grid) -> Self {
        Rates { du: RealField::zeros(grid), drho: RealField::zeros(grid) }
    }

    pub fn max_abs_diff(&self, other: &Rates) -> Result<f64, SpectralError> {
        Ok(self.du.max_abs_diff(&other.du)?.max(self.drho.max_abs_diff(&other.drho)?))
    }

    pub fn sup_norm(&self) -> f64 {
        self.du.sup_norm().max(self.drho.sup_norm())
    }
}

/// Coefficients of `u^2`, `u_x^2` and `rho^2` in the pressure
/// `P = b/2 u^2 + (3 - b)/2 u_x^2 + kappa/2 rho^2 - alpha u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressureCoefficients {
    pub u2: f64,
    pub ux2: f64,
    pub rho2: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Formulation {
    /// Evolve through `m_t` and invert the inertia operator.
    #[default]
    MForm,
    /// Transport plus the Green's-function pressure term; `r = 1` only.
    Nonlocal,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("invalid state: {0}")]
    InvalidState(&'static str),
    #[error("invalid step control: {0}")]
    InvalidControl(&'static str),
    #[error("the nonlocal formulation needs r = 1 (got r = {r})")]
    UnsupportedFormulation { r: f64 },
    #[error("blow-up at t={t}: max |u_x| = {max_ux}")]
    BlowUp { t: f64, max_ux: f64, detail: Option<Box<BlowUp>> },
}

impl DynamicsError {
    fn blow_up(t: f64, max_ux: f64) -> Self {
        DynamicsError::BlowUp { t, max_ux, detail: None }
    }
}

/// Evaluation switches shared by every right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RhsOptions {
    pub formulation: Formulation,
    pub dealias: bool,
}

impl Default for RhsOptions {
    fn default() -> Self {
        RhsOptions { formulation: Formulation::MForm, dealias: true }
    }
}

fn to_spectral(f: &RealField, dealias: bool) -> SpectralField {
    let mut spec = f.transform();
    if dealias {
        dealias_in_place(&mut spec);
    }
    spec
}

/// `(A^{-1} m_t, rho_t)` with all products dealiased.
pub fn rhs_m_form(state: &State, params: &Params) -> Result<Rates, DynamicsError> {
    rhs(state, params, RhsOptions::default())
}

/// `u_t = -u u_x - d_x G * P(u, rho)`, `r = 1` only.
pub fn rhs_nonlocal(state: &State, params: &Params) -> Result<Rates, DynamicsError> {
    rhs(state, params, RhsOptions { formulation: Formulation::Nonlocal, dealias: true })
}

pub fn rhs(state: &State, params: &Params, opts: RhsOptions) -> Result<Rates, DynamicsError> {
    state.u.check_grid(state.rho.grid())?;
    params.check_grid(state.grid())?;
    if opts.formulation == Formulation::Nonlocal && params.r() != 1.0 {
        return Err(DynamicsError::UnsupportedFormulation { r: params.r() });
    }
    let (u, rho) = (&state.u, &state.rho);
    let u_hat = u.transform();
    let rho_hat = rho.transform();
    let ux = derivative_spectral(&u_hat, 1).inverse_transform();
    let rhox = derivative_spectral(&rho_hat, 1).inverse_transform();
    let b = params.b;
    let kappa = params.kappa;

    let drho_real = RealField::from_raw(
        u.grid(),
        (0..u.samples().len())
            .map(|j| -u.samples()[j] * rhox.samples()[j] - (b - 1.0) * ux.samples()[j] * rho.samples()[j])
            .collect(),
    );
    let drho = to_spectral(&drho_real, opts.dealias).inverse_transform();

    let du = match opts.formulation {
        Formulation::MForm => {
            let m_hat = params.inertia.apply_spectral(&u_hat);
            let m = m_hat.inverse_transform();
            let mx = derivative_spectral(&m_hat, 1).inverse_transform();
            let alpha_ux = params.alpha.times(&ux);
            let mt = RealField::from_raw(
                u.grid(),
                (0..u.samples().len())
                    .map(|j| {
                        alpha_ux.samples()[j]
                            - b * ux.samples()[j] * m.samples()[j]
                            - u.samples()[j] * mx.samples()[j]
                            - kappa * rho.samples()[j] * rhox.samples()[j]
                    })
                    .collect(),
            );
            params.inertia.invert_spectral(&to_spectral(&mt, opts.dealias)).inverse_transform()
        }
        Formulation::Nonlocal => {
            let alpha_u = params.alpha.times(u);
            let n = u.samples().len();
            let transport = RealField::from_raw(u.grid(), (0..n).map(|j| u.samples()[j] * ux.samples()[j]).collect());
            let c = params.pressure();
            let pressure = RealField::from_raw(
                u.grid(),
                (0..n)
                    .map(|j| {
                        let (uj, uxj, rj) = (u.samples()[j], ux.samples()[j], rho.samples()[j]);
                        c.u2 * uj * uj + c.ux2 * uxj * uxj + c.rho2 * rj * rj - alpha_u.samples()[j]
                    })
                    .collect(),
            );
            let p_hat = to_spectral(&pressure, opts.dealias);
            let mut total = to_spectral(&transport, opts.dealias).lin_comb(
                -1.0,
                &derivative_spectral(&helmholtz_spectral(&p_hat), 1),
                -1.0,
            );
            if let Alpha::Field(a) = &params.alpha {
                // d_x(alpha u) - alpha u_x leaves alpha_x u behind
                let ax = derivative(a, 1);
                let correction = to_spectral(&ax.zip_unchecked(u, |p, q| p * q), opts.dealias);
                total = total.lin_comb(1.0, &helmholtz_spectral(&correction), -1.0);
            }
            total.inverse_transform()
        }
    };

    if !du.is_finite() || !drho.is_finite() {
        return Err(DynamicsError::blow_up(state.t, ux.sup_norm()));
    }
    Ok(Rates { du, drho })
}

/// One classical RK4 step of size `dt`.
pub fn step_rk4(state: &State, params: &Params, dt: f64, opts: RhsOptions) -> Result<State, DynamicsError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::InvalidControl("dt must be positive"));
    }
    let k1 = rhs(state, params, opts)?;
    rk4_from(state, &k1, dt, |_, s| rhs(s, params, opts))
}

/// RK4 with a precomputed first stage; `eval` receives the stage number
/// (2, 3 or 4) and the stage state.
pub(crate) fn rk4_from(
    state: &State,
    k1: &Rates,
    dt: f64,
    mut eval: impl FnMut(u8, &State) -> Result<Rates, DynamicsError>,
) -> Result<State, DynamicsError> {
    let k2 = eval(2, &state.advanced(k1, 0.5 * dt))?;
    let k3 = eval(3, &state.advanced(&k2, 0.5 * dt))?;
    let k4 = eval(4, &state.advanced(&k3, dt))?;
    let combine = |f: &RealField, a: &RealField, b: &RealField, c: &RealField, d: &RealField| {
        let s = [f.samples(), a.samples(), b.samples(), c.samples(), d.samples()];
        RealField::from_raw(
            f.grid(),
            (0..s[0].len()).map(|j| s[0][j] + dt / 6.0 * (s[1][j] + 2.0 * s[2][j] + 2.0 * s[3][j] + s[4][j])).collect(),
        )
    };
    let next = State {
        t: state.t + dt,
        u: combine(&state.u, &k1.du, &k2.du, &k3.du, &k4.du),
        rho: combine(&state.rho, &k1.drho, &k2.drho, &k3.drho, &k4.drho),
    };
    if !next.is_finite() {
        return Err(DynamicsError::blow_up(next.t, f64::NAN));
    }
    Ok(next)
}

/// Cubic Hermite value at fraction `theta` of a step of length `h`.
pub(crate) fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, theta: f64) -> f64 {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + theta) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(PI, 64).unwrap()
    }

    fn ch() -> Params {
        Params::new(2.0, 1.0, Alpha::Constant(0.0), 1.0).unwrap()
    }

    #[test]
    fn zero_state_is_fixed() {
        let s = State::zeros(&grid());
        let r = rhs_m_form(&s, &ch()).unwrap();
        assert_eq!(r.sup_norm(), 0.0);
        let next = step_rk4(&s, &ch(), 0.1, RhsOptions::default()).unwrap();
        assert_eq!(next.u.sup_norm(), 0.0);
        assert!((next.t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn constant_density_is_steady() {
        let g = grid();
        let s = State::new(0.0, RealField::zeros(&g), RealField::constant(&g, 0.7)).unwrap();
        let p = Params::new(3.0, 2.5, Alpha::Constant(1.3), 2.0).unwrap();
        assert!(rhs_m_form(&s, &p).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn nonlocal_needs_unit_exponent() {
        let s = State::zeros(&grid());
        let p = Params::new(2.0, 1.0, Alpha::Constant(0.0), 2.0).unwrap();
        assert_eq!(rhs_nonlocal(&s, &p), Err(DynamicsError::UnsupportedFormulation { r: 2.0 }));
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(2.0, 1.0, Alpha::Constant(0.0), 0.5).is_err());
        assert!(Params::exploratory(2.0, 1.0, Alpha::Constant(0.0), 0.5).is_ok());
        assert!(Params::new(f64::NAN, 1.0, Alpha::Constant(0.0), 1.0).is_err());
        let other = Grid::new(PI, 32).unwrap();
        let p = Params::new(2.0, 1.0, Alpha::Field(RealField::zeros(&other)), 1.0).unwrap();
        assert!(rhs_m_form(&State::zeros(&grid()), &p).is_err());
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t * t;
        let df = |t: f64| -2.0 + 1.5 * t * t;
        let (t0, h) = (0.3, 0.7);
        for theta in [0.0, 0.25, 0.5, 1.0] {
            let v = hermite(f(t0), df(t0), f(t0 + h), df(t0 + h), h, theta);
            assert!((v - f(t0 + theta * h)).abs() < 1e-14);
        }
    }
}
