use alloc::boxed::Box;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods are not always available without std
use num_traits::Float;

use super::{rhs, step_rk4, DynamicsError, Formulation, Params, Rates, RhsOptions, State};

/// Gradient level treated as wavebreaking.
pub const DEFAULT_UX_CEILING: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    /// Courant factor in `(0, 1]`.
    pub cfl: f64,
    pub dt_max: f64,
    /// Absolute end time.
    pub t_final: f64,
    pub dealias: bool,
    /// Snapshot spacing; `None` records every step.
    pub output_interval: Option<f64>,
    pub ux_ceiling: f64,
    /// When false every step has the same length `t_final / ceil(t_final / dt_max)`.
    pub adaptive: bool,
}

impl StepControl {
    pub fn new(dt_max: f64, t_final: f64) -> Self {
        StepControl {
            cfl: 0.3,
            dt_max,
            t_final,
            dealias: true,
            output_interval: None,
            ux_ceiling: DEFAULT_UX_CEILING,
            adaptive: true,
        }
    }

    /// Uniform steps of length at most `dt`.
    pub fn fixed(dt: f64, t_final: f64) -> Self {
        StepControl { adaptive: false, ..Self::new(dt, t_final) }
    }

    pub fn with_output_interval(mut self, interval: f64) -> Self {
        self.output_interval = Some(interval);
        self
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(DynamicsError::InvalidControl("cfl must lie in (0, 1]"));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(DynamicsError::InvalidControl("dt_max must be positive"));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(DynamicsError::InvalidControl("t_final must be finite and non-negative"));
        }
        if let Some(d) = self.output_interval {
            if !(d > 0.0 && d.is_finite()) {
                return Err(DynamicsError::InvalidControl("output interval must be positive"));
            }
        }
        if self.ux_ceiling.is_nan() || self.ux_ceiling <= 0.0 {
            return Err(DynamicsError::InvalidControl("ux ceiling must be positive"));
        }
        Ok(())
    }

    pub(crate) fn rhs_options(&self, formulation: Formulation) -> RhsOptions {
        RhsOptions { formulation, dealias: self.dealias }
    }
}

/// Snapshots of one run in increasing time order.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    params: Params,
    opts: RhsOptions,
    states: Vec<State>,
    steps: usize,
}

impl Trajectory {
    pub(crate) fn from_parts(params: Params, opts: RhsOptions, states: Vec<State>, steps: usize) -> Self {
        Trajectory { params, opts, states, steps }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn options(&self) -> RhsOptions {
        self.opts
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn first(&self) -> &State {
        &self.states[0]
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of solver steps taken.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Right-hand side at snapshot `i`, with the options of the run.
    pub fn rates_at(&self, i: usize) -> Result<Rates, DynamicsError> {
        rhs(&self.states[i], &self.params, self.opts)
    }
}

/// What was known when a run stopped on the gradient ceiling or a NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowUp {
    pub t: f64,
    pub max_ux: f64,
    pub last_valid: State,
    pub partial: Trajectory,
}

/// Adaptive RK4 run from `state0` to `ctrl.t_final`.
///
/// The step is `min(dt_max, cfl dx / max(1, max|u|))`, shortened to land on
/// snapshot times. With dealiasing enabled the initial data are projected
/// first and the projected state is the first snapshot.
pub fn integrate(
    state0: &State,
    params: &Params,
    ctrl: &StepControl,
    formulation: Formulation,
) -> Result<Trajectory, DynamicsError> {
    ctrl.validate()?;
    if ctrl.t_final < state0.t {
        return Err(DynamicsError::InvalidControl("t_final precedes the initial time"));
    }
    if !state0.is_finite() {
        return Err(DynamicsError::InvalidState("initial data must be finite"));
    }
    let opts = ctrl.rhs_options(formulation);
    let mut state = if ctrl.dealias { state0.dealiased() } else { state0.clone() };
    let t0 = state.t;
    let dx = state.grid().dx();
    let uniform = {
        let span = ctrl.t_final - t0;
        let count = (span / ctrl.dt_max).ceil().max(1.0);
        span / count
    };
    let mut states = Vec::new();
    states.push(state.clone());
    let mut steps = 0usize;
    let mut k_out = 1u64;
    let fail = |t: f64, max_ux: f64, last: &State, states: &Vec<State>, steps: usize| DynamicsError::BlowUp {
        t,
        max_ux,
        detail: Some(Box::new(BlowUp {
            t,
            max_ux,
            last_valid: last.clone(),
            partial: Trajectory::from_parts(params.clone(), opts, states.clone(), steps),
        })),
    };
    let ux0 = state.max_abs_ux();
    if ux0 > ctrl.ux_ceiling {
        return Err(fail(t0, ux0, &state, &states, 0));
    }

    while ctrl.t_final - state.t > 1e-12 * (1.0 + ctrl.t_final.abs()) {
        let next_out = ctrl.output_interval.map_or(f64::INFINITY, |d| t0 + k_out as f64 * d);
        let target = next_out.min(ctrl.t_final);
        let mut dt = if ctrl.adaptive { ctrl.dt_max.min(ctrl.cfl * dx / state.u.sup_norm().max(1.0)) } else { uniform };
        let hit = state.t + dt >= target - 1e-9 * dt;
        if hit {
            dt = target - state.t;
        }
        let mut next = match step_rk4(&state, params, dt, opts) {
            Ok(s) => s,
            Err(DynamicsError::BlowUp { t, .. }) => {
                return Err(fail(t, f64::NAN, &state, &states, steps));
            }
            Err(e) => return Err(e),
        };
        if hit {
            next.t = target;
        }
        steps += 1;
        let max_ux = next.max_abs_ux();
        if !max_ux.is_finite() || max_ux > ctrl.ux_ceiling {
            return Err(fail(next.t, max_ux, &state, &states, steps));
        }
        state = next;
        let at_output = hit && target == next_out;
        if at_output {
            k_out += 1;
        }
        let at_end = hit && target == ctrl.t_final;
        if ctrl.output_interval.is_none() || at_output || at_end {
            states.push(state.clone());
        }
    }
    Ok(Trajectory::from_parts(params.clone(), opts, states, steps))
}
