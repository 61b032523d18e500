//! Fully resolved run description.

use hoch_core::dynamics::{Alpha, Formulation, Params, State, StepControl};
use hoch_core::spectral::{Grid, RealField};
use hoch_core::weights::{Side, StandardWeight};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub params: ParamsSpec,
    pub grid: GridSpec,
    pub control: ControlSpec,
    pub initial: InitialSpec,
    pub diagnostics: DiagnosticsSpec,
    pub weight: WeightSpec,
    pub output: OutputSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub b: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Half-length of the periodic box `[-L, L)`.
    #[serde(rename = "L")]
    pub half_length: f64,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulationSpec {
    #[serde(rename = "m")]
    MForm,
    #[serde(rename = "nonlocal")]
    Nonlocal,
}

impl FormulationSpec {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "m" => Some(FormulationSpec::MForm),
            "nonlocal" => Some(FormulationSpec::Nonlocal),
            _ => None,
        }
    }

    pub fn to_core(self) -> Formulation {
        match self {
            FormulationSpec::MForm => Formulation::MForm,
            FormulationSpec::Nonlocal => Formulation::Nonlocal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSpec {
    pub t_final: f64,
    pub dt_max: f64,
    pub cfl: f64,
    pub output_interval: f64,
    pub adaptive: bool,
    pub dealias: bool,
    pub ux_ceiling: f64,
    pub formulation: FormulationSpec,
}

/// Named initial profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "lowercase", deny_unknown_fields)]
pub enum Profile {
    /// `offset + amp exp(-((x - center) / width)^2)`.
    Gaussian {
        amp: f64,
        width: f64,
        center: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `amp exp(-1 / (1 - z^2))` for `|z| < 1`, `z = (x - center) / width`.
    Bump {
        amp: f64,
        width: f64,
        center: f64,
    },
    /// `amp cos(k pi x / L)`.
    Mode {
        k: u32,
        amp: f64,
    },
    Zero,
}

impl Profile {
    pub fn sample(&self, grid: &Grid) -> RealField {
        let l = grid.half_length();
        match *self {
            Profile::Gaussian { amp, width, center, offset } => RealField::from_fn(grid, |x| {
                let z = (x - center) / width;
                offset + amp * (-z * z).exp()
            }),
            Profile::Bump { amp, width, center } => RealField::from_fn(grid, |x| {
                let z = (x - center) / width;
                if z.abs() < 1.0 {
                    amp * (-1.0 / (1.0 - z * z)).exp()
                } else {
                    0.0
                }
            }),
            Profile::Mode { k, amp } => {
                RealField::from_fn(grid, |x| amp * (std::f64::consts::PI * k as f64 * x / l).cos())
            }
            Profile::Zero => RealField::zeros(grid),
        }
    }

    fn check(&self, field: &str, issues: &mut Vec<String>) {
        let finite = |v: f64| v.is_finite();
        match *self {
            Profile::Gaussian { amp, width, center, offset } => {
                if !(width > 0.0 && finite(width)) {
                    issues.push(format!("{field}.width must be positive"));
                }
                if ![amp, center, offset].into_iter().all(finite) {
                    issues.push(format!("{field}: amp, center and offset must be finite"));
                }
            }
            Profile::Bump { amp, width, center } => {
                if !(width > 0.0 && finite(width)) {
                    issues.push(format!("{field}.width must be positive"));
                }
                if !(finite(amp) && finite(center)) {
                    issues.push(format!("{field}: amp and center must be finite"));
                }
            }
            Profile::Mode { amp, .. } => {
                if !finite(amp) {
                    issues.push(format!("{field}.amp must be finite"));
                }
            }
            Profile::Zero => {}
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// When true the `u` profile gives the momentum `m0` and `u0 = A^{-1} m0`.
    pub u_from_momentum: bool,
    pub u: Profile,
    pub rho: Profile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    Formulation,
    Casimir,
    Transport,
    Representation,
    MFlow,
    Support,
    SupBound,
    Persistence,
    Decay,
    Besov,
}

impl Diagnostic {
    pub const ALL: [Diagnostic; 10] = [
        Diagnostic::Formulation,
        Diagnostic::Casimir,
        Diagnostic::Transport,
        Diagnostic::Representation,
        Diagnostic::MFlow,
        Diagnostic::Support,
        Diagnostic::SupBound,
        Diagnostic::Persistence,
        Diagnostic::Decay,
        Diagnostic::Besov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Diagnostic::Formulation => "formulation",
            Diagnostic::Casimir => "casimir",
            Diagnostic::Transport => "transport",
            Diagnostic::Representation => "representation",
            Diagnostic::MFlow => "m_flow",
            Diagnostic::Support => "support",
            Diagnostic::SupBound => "sup_bound",
            Diagnostic::Persistence => "persistence",
            Diagnostic::Decay => "decay",
            Diagnostic::Besov => "besov",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSpec {
    pub enabled: Vec<Diagnostic>,
    /// Relative level defining numerical support.
    pub support_threshold: f64,
    /// Regularity index of the final-time `B^s_{2,2}` table.
    pub besov_s: f64,
    /// Tail window as fractions of `L`.
    pub decay_window: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideSpec {
    Both,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub a: f64,
    pub b_w: f64,
    pub c: f64,
    pub d: f64,
    pub side: SideSpec,
}

impl WeightSpec {
    pub fn to_core(self) -> StandardWeight {
        let side = match self.side {
            SideSpec::Both => Side::Both,
            SideSpec::Right => Side::RightOnly,
        };
        StandardWeight::new(self.a, self.b_w, self.c, self.d, side)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub trajectory: bool,
    /// Every `stride`-th snapshot goes to the trajectory file.
    pub stride: usize,
}

impl Scenario {
    /// Every offending field, or nothing.
    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        let p = &self.params;
        if ![p.b, p.kappa, p.alpha].into_iter().all(f64::is_finite) {
            out.push("params: b, kappa and alpha must be finite".into());
        }
        if !(p.r >= 1.0 && p.r.is_finite()) {
            out.push(format!("params.r = {} must be finite and >= 1", p.r));
        }
        if !(self.grid.half_length > 0.0 && self.grid.half_length.is_finite()) {
            out.push(format!("grid.L = {} must be positive", self.grid.half_length));
        }
        if self.grid.n < 16 || !self.grid.n.is_power_of_two() {
            out.push(format!("grid.n = {} must be a power of two >= 16", self.grid.n));
        }
        let c = &self.control;
        if !(c.t_final >= 0.0 && c.t_final.is_finite()) {
            out.push(format!("control.t_final = {} must be finite and >= 0", c.t_final));
        }
        if !(c.dt_max > 0.0 && c.dt_max.is_finite()) {
            out.push(format!("control.dt_max = {} must be positive", c.dt_max));
        }
        if !(c.cfl > 0.0 && c.cfl <= 1.0) {
            out.push(format!("control.cfl = {} must lie in (0, 1]", c.cfl));
        }
        if !(c.output_interval > 0.0 && c.output_interval.is_finite()) {
            out.push(format!("control.output_interval = {} must be positive", c.output_interval));
        }
        if c.ux_ceiling.is_nan() || c.ux_ceiling <= 0.0 {
            out.push(format!("control.ux_ceiling = {} must be positive", c.ux_ceiling));
        }
        if c.formulation == FormulationSpec::Nonlocal && p.r != 1.0 {
            out.push(format!("control.formulation = nonlocal requires params.r = 1, got {}", p.r));
        }
        self.initial.u.check("initial.u", &mut out);
        self.initial.rho.check("initial.rho", &mut out);
        let d = &self.diagnostics;
        if !(d.support_threshold >= 0.0 && d.support_threshold < 1.0) {
            out.push(format!("diagnostics.support_threshold = {} must lie in [0, 1)", d.support_threshold));
        }
        if !d.besov_s.is_finite() {
            out.push("diagnostics.besov_s must be finite".into());
        }
        let [lo, hi] = d.decay_window;
        if !(lo >= 0.0 && hi > lo && hi <= 1.0) {
            out.push(format!("diagnostics.decay_window = [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1"));
        }
        let mut seen = d.enabled.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            out.push("diagnostics.enabled lists a diagnostic twice".into());
        }
        let w = &self.weight;
        if ![w.a, w.b_w, w.c, w.d].into_iter().all(f64::is_finite) {
            out.push("weight: a, b_w, c and d must be finite".into());
        }
        if self.output.stride == 0 {
            out.push("output.stride must be >= 1".into());
        }
        out
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Config(issues))
        }
    }

    pub fn grid(&self) -> Result<Grid, HarnessError> {
        Ok(Grid::new(self.grid.half_length, self.grid.n)?)
    }

    pub fn core_params(&self) -> Result<Params, HarnessError> {
        let p = &self.params;
        Ok(Params::new(p.b, p.kappa, Alpha::Constant(p.alpha), p.r)?)
    }

    pub fn step_control(&self) -> StepControl {
        let c = &self.control;
        StepControl {
            cfl: c.cfl,
            dt_max: c.dt_max,
            t_final: c.t_final,
            dealias: c.dealias,
            output_interval: Some(c.output_interval),
            ux_ceiling: c.ux_ceiling,
            adaptive: c.adaptive,
        }
    }

    pub fn initial_state(&self) -> Result<State, HarnessError> {
        let g = self.grid()?;
        let profile = self.initial.u.sample(&g);
        let u = if self.initial.u_from_momentum { self.core_params()?.inertia().invert(&profile) } else { profile };
        Ok(State::new(0.0, u, self.initial.rho.sample(&g))?)
    }

    pub fn is_enabled(&self, d: Diagnostic) -> bool {
        self.diagnostics.enabled.contains(&d)
    }
}
