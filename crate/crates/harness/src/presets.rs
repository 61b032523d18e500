//! Named scenarios covering the special cases of the system.

use crate::scenario::*;

pub const PRESET_NAMES: [&str; 6] = ["zero", "chb", "2cch", "2cdp", "hkmetric", "highorder"];

/// Preset used when neither the file nor the command line names one.
pub const DEFAULT_PRESET: &str = "2cch";

fn gaussian(amp: f64, width: f64, center: f64) -> Profile {
    Profile::Gaussian { amp, width, center, offset: 0.0 }
}

fn smooth_diagnostics() -> Vec<Diagnostic> {
    Diagnostic::ALL.into_iter().filter(|&d| d != Diagnostic::Support).collect()
}

fn base(name: &str) -> Scenario {
    Scenario {
        name: name.into(),
        params: ParamsSpec { b: 2.0, kappa: 1.0, alpha: 0.0, r: 1.0 },
        grid: GridSpec { half_length: 20.0, n: 1024 },
        control: ControlSpec {
            t_final: 1.0,
            dt_max: 0.01,
            cfl: 0.3,
            output_interval: 0.01,
            adaptive: false,
            dealias: true,
            ux_ceiling: 1e6,
            formulation: FormulationSpec::MForm,
        },
        initial: InitialSpec { u_from_momentum: true, u: gaussian(0.8, 1.0, 0.0), rho: gaussian(0.5, 1.0, -1.0) },
        diagnostics: DiagnosticsSpec {
            enabled: smooth_diagnostics(),
            support_threshold: 1e-10,
            besov_s: 3.0,
            decay_window: [0.45, 0.7],
        },
        weight: WeightSpec { a: 0.0, b_w: 0.0, c: 3.0, d: 0.0, side: SideSpec::Both },
        output: OutputSpec { trajectory: true, stride: 10 },
    }
}

pub fn preset(name: &str) -> Option<Scenario> {
    let mut s = base(name);
    match name {
        "zero" => {
            s.grid = GridSpec { half_length: 10.0, n: 128 };
            s.control.output_interval = 0.1;
            s.initial.u_from_momentum = false;
            s.initial.u = Profile::Zero;
            s.initial.rho = Profile::Zero;
            s.diagnostics.enabled = Diagnostic::ALL.to_vec();
            s.output.stride = 1;
        }
        "chb" => {
            s.params = ParamsSpec { b: 2.5, kappa: 0.0, alpha: 0.0, r: 1.0 };
            s.initial.rho = Profile::Zero;
        }
        "2cch" => {}
        "2cdp" => {
            s.params.b = 3.0;
            s.initial.rho = Profile::Gaussian { amp: 0.5, width: 1.0, center: -1.0, offset: 1.0 };
            // a constant background has neither decay nor finite weighted norms
            s.diagnostics.enabled.retain(|d| !matches!(d, Diagnostic::Persistence | Diagnostic::Decay));
        }
        "hkmetric" => {
            s.params = ParamsSpec { b: 2.0, kappa: 0.0, alpha: 0.0, r: 2.0 };
            s.initial.rho = Profile::Zero;
        }
        "highorder" => {
            s.params = ParamsSpec { b: 2.0, kappa: 1.0, alpha: 0.0, r: 2.0 };
        }
        _ => return None,
    }
    Some(s)
}
