//! Single-scenario execution and emission.

use std::path::{Path, PathBuf};
use std::time::Instant;

use hoch_core::besov::{besov_terms, BesovIndex, BlockTerm, Cutoff};
use hoch_core::characteristics::*;
use hoch_core::dynamics::{integrate, rhs_m_form, rhs_nonlocal, DynamicsError, Trajectory};
use hoch_core::spectral::{derivative, RealField};
use hoch_core::weights::{
    decay_profile, persistence_monitor, PersistenceReport, WeightError, Window, DEFAULT_NOISE_FLOOR,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::HarnessError;
use crate::manifest::*;
use crate::output::{finite, write_csv, write_json};
use crate::scenario::{Diagnostic, Scenario};

pub const FORMULATION_TOL: f64 = 1e-10;
pub const CASIMIR_TOL: f64 = 1e-6;
pub const TRANSPORT_TOL: f64 = 1e-4;
pub const REPRESENTATION_TOL: f64 = 1e-4;
pub const M_FLOW_TOL: f64 = 1e-4;
pub const SUP_BOUND_TOL: f64 = 1e-10;
pub const PERSISTENCE_RESIDUAL_TOL: f64 = 0.05;
pub const DECAY_RATE_MIN: f64 = 0.9;

/// Exponents monitored by the persistence diagnostic.
pub const PERSISTENCE_EXPONENTS: [f64; 3] = [1.0, 2.0, f64::INFINITY];

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    pub rho: f64,
    pub m: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct IdentityRow {
    pub t: f64,
    pub max_dev_transport: Option<f64>,
    pub max_dev_momentum: Option<f64>,
    pub casimir: Option<f64>,
    pub supp_left: Option<f64>,
    pub supp_right: Option<f64>,
    pub phi_beta: Option<f64>,
    pub phi_gamma: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PersistenceRow {
    pub t: f64,
    #[serde(rename = "W_1")]
    pub w1: Option<f64>,
    #[serde(rename = "W_2")]
    pub w2: Option<f64>,
    #[serde(rename = "W_inf")]
    pub w_inf: Option<f64>,
    #[serde(rename = "M_running")]
    pub m_running: f64,
    /// Largest distance of `ln W_p(t)` from its fitted line over `p`.
    pub fit_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub t: f64,
    pub a_hat: Option<f64>,
    pub c_hat: Option<f64>,
    pub window_lo: f64,
    pub window_hi: f64,
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BesovRow {
    pub k: i32,
    pub block_norm: f64,
    pub weighted: f64,
}

impl From<BlockTerm> for BesovRow {
    fn from(t: BlockTerm) -> Self {
        BesovRow { k: t.k, block_norm: t.block_norm, weighted: t.weighted }
    }
}

/// Everything a run produced, before emission.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub scenario: Scenario,
    pub trajectory: Trajectory,
    pub blow_up: Option<BlowUpInfo>,
    pub diagnostics: Vec<Check>,
    pub identity: Vec<IdentityRow>,
    pub persistence: Vec<PersistenceRow>,
    pub decay: Vec<DecayRow>,
    pub besov: Vec<BesovRow>,
    pub wall_time_s: f64,
}

/// Integrates and evaluates every enabled diagnostic. A blow-up is recorded
/// and the diagnostics run on the snapshots reached.
pub fn execute(sc: &Scenario) -> Result<RunResult, HarnessError> {
    sc.validate()?;
    let start = Instant::now();
    let params = sc.core_params()?;
    let state0 = sc.initial_state()?;
    let ctrl = sc.step_control();
    let (trajectory, blow_up) = match integrate(&state0, &params, &ctrl, sc.control.formulation.to_core()) {
        Ok(t) => (t, None),
        Err(DynamicsError::BlowUp { t, max_ux, detail: Some(d) }) => {
            let info = BlowUpInfo { t, max_ux: finite(max_ux), last_valid_t: d.last_valid.t };
            (d.partial, Some(info))
        }
        Err(e) => return Err(e.into()),
    };
    let ctx = Context::new(sc, &trajectory);
    let diagnostics: Vec<Check> = sc.diagnostics.enabled.par_iter().map(|&d| ctx.evaluate(d)).collect();
    let identity = ctx.identity_rows();
    let persistence = if sc.is_enabled(Diagnostic::Persistence) { ctx.persistence_rows() } else { Vec::new() };
    let decay = if sc.is_enabled(Diagnostic::Decay) { ctx.decay_rows() } else { Vec::new() };
    let besov = if sc.is_enabled(Diagnostic::Besov) { ctx.besov_rows() } else { Vec::new() };
    Ok(RunResult {
        scenario: sc.clone(),
        trajectory,
        blow_up,
        diagnostics,
        identity,
        persistence,
        decay,
        besov,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Shared intermediate results of the diagnostics.
struct Context<'a> {
    sc: &'a Scenario,
    traj: &'a Trajectory,
    flow: Result<FlowMap, String>,
    transport: Option<Result<Vec<f64>, String>>,
    m_flow: Option<Result<Vec<f64>, CharacteristicsError>>,
    casimir: Option<Result<Vec<f64>, CharacteristicsError>>,
    support: Result<SupportReport, String>,
    persistence: Vec<Result<PersistenceReport, WeightError>>,
}

impl<'a> Context<'a> {
    fn new(sc: &'a Scenario, traj: &'a Trajectory) -> Self {
        let b = sc.params.b;
        let flow = evolve_flow(traj, &traj.first().grid().points()).map_err(|e| e.to_string());
        let transport = flow.as_ref().ok().map(|f| check_transport_identity(f, traj, b).map_err(|e| e.to_string()));
        let m_flow = flow.as_ref().ok().map(|f| check_m_flow_identity(f, traj, traj.params()));
        let casimir = (b != 1.0).then(|| traj.states().iter().map(|s| casimir(&s.rho, b)).collect());
        let support = check_support_containment(traj, sc.diagnostics.support_threshold).map_err(|e| e.to_string());
        let w = sc.weight.to_core();
        let persistence = if sc.is_enabled(Diagnostic::Persistence) {
            PERSISTENCE_EXPONENTS.par_iter().map(|&p| persistence_monitor(traj, &w, p, DEFAULT_NOISE_FLOOR)).collect()
        } else {
            Vec::new()
        };
        Context { sc, traj, flow, transport, m_flow, casimir, support, persistence }
    }

    fn evaluate(&self, d: Diagnostic) -> Check {
        let name = d.name();
        match d {
            Diagnostic::Formulation => self.formulation(name),
            Diagnostic::Casimir => match &self.casimir {
                None => Check::skipped(name, "b = 1 has no Casimir of this form"),
                Some(Err(e)) => Check::failed(name, e.to_string()),
                Some(Ok(values)) => {
                    let drift = relative_drift(values);
                    Check::below(name, drift, CASIMIR_TOL, "max relative drift of int |rho|^(1/(b-1))")
                }
            },
            Diagnostic::Transport => match &self.transport {
                None => Check::failed(name, self.flow_error()),
                Some(Err(e)) => Check::failed(name, e.clone()),
                Some(Ok(dev)) => Check::below(name, max_of(dev), TRANSPORT_TOL, "max deviation over snapshots"),
            },
            Diagnostic::Representation => self.representation(name),
            Diagnostic::MFlow => match &self.m_flow {
                None => Check::failed(name, self.flow_error()),
                Some(Err(CharacteristicsError::HypothesisViolation(why))) => Check::skipped(name, *why),
                Some(Err(e)) => Check::failed(name, e.to_string()),
                Some(Ok(dev)) => Check::below(name, max_of(dev), M_FLOW_TOL, "max deviation over snapshots"),
            },
            Diagnostic::Support => match &self.support {
                Err(e) => Check::failed(name, e.clone()),
                Ok(rep) => {
                    let outside = rep.rows.iter().filter(|r| !(r.rho_inside && r.m_inside.unwrap_or(true))).count();
                    Check::verdict(
                        name,
                        outside == 0,
                        Some(outside as f64),
                        Some(0.0),
                        format!("snapshots with support outside the transported interval (slack {:.3e})", rep.slack),
                    )
                }
            },
            Diagnostic::SupBound => {
                let bound = check_sup_bound(self.traj);
                let excess = bound
                    .rows
                    .iter()
                    .map(|&(_, v, b)| {
                        if b > 0.0 {
                            v / b - 1.0
                        } else if v > 0.0 {
                            f64::INFINITY
                        } else {
                            -1.0
                        }
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                Check::verdict(
                    name,
                    bound.holds(SUP_BOUND_TOL),
                    Some(excess),
                    Some(SUP_BOUND_TOL),
                    format!("max |rho| / bound - 1 with M1 = {:.6e}", bound.m1),
                )
            }
            Diagnostic::Persistence | Diagnostic::Decay if self.traj.params().r() != 1.0 => {
                Check::skipped(name, "weighted persistence is established only for r = 1")
            }
            Diagnostic::Persistence => self.persistence(name),
            Diagnostic::Decay => self.decay(name),
            Diagnostic::Besov => {
                let terms = self.besov_rows();
                let norm = terms.iter().map(|t| t.weighted * t.weighted).sum::<f64>().sqrt();
                Check::verdict(
                    name,
                    norm.is_finite(),
                    Some(norm),
                    None,
                    format!("B^{}_(2,2) norm of u at the last snapshot", self.sc.diagnostics.besov_s),
                )
            }
        }
    }

    fn flow_error(&self) -> String {
        self.flow.as_ref().err().cloned().unwrap_or_default()
    }

    fn formulation(&self, name: &str) -> Check {
        let params = self.traj.params();
        if params.r() != 1.0 {
            return Check::skipped(name, "nonlocal form exists only for r = 1");
        }
        let mut worst = 0.0f64;
        for s in self.traj.states() {
            match (rhs_m_form(s, params), rhs_nonlocal(s, params)) {
                (Ok(a), Ok(b)) => {
                    let scale = a.sup_norm();
                    let gap = a.max_abs_diff(&b).unwrap_or(f64::INFINITY);
                    worst = worst.max(if scale > 0.0 { gap / scale } else { gap });
                }
                (Err(e), _) | (_, Err(e)) => return Check::failed(name, e.to_string()),
            }
        }
        Check::below(name, worst, FORMULATION_TOL, "max relative right-hand-side gap over snapshots")
    }

    fn representation(&self, name: &str) -> Check {
        let flow = match &self.flow {
            Ok(f) => f,
            Err(e) => return Check::failed(name, e.clone()),
        };
        match reconstruct_rho(flow, self.traj, self.sc.params.b, Representation::AlongFlow) {
            Err(e) => Check::failed(name, e.to_string()),
            Ok(rebuilt) => {
                let err = rebuilt
                    .iter()
                    .zip(self.traj.states())
                    .map(|(r, s)| r.max_abs_diff(&s.rho).unwrap_or(f64::INFINITY))
                    .fold(0.0, f64::max);
                Check::below(name, err, REPRESENTATION_TOL, "sup error of the reconstructed density")
            }
        }
    }

    fn persistence(&self, name: &str) -> Check {
        let mut worst = 0.0f64;
        for rep in &self.persistence {
            match rep {
                Err(e) => return Check::failed(name, e.to_string()),
                Ok(r) => {
                    worst = worst.max(r.residual);
                }
            }
        }
        Check::verdict(
            name,
            worst < PERSISTENCE_RESIDUAL_TOL,
            Some(worst),
            Some(PERSISTENCE_RESIDUAL_TOL),
            "max fit residual of ln W_p over p in {1, 2, inf}",
        )
    }

    fn window(&self) -> Window {
        let [lo, hi] = self.sc.diagnostics.decay_window;
        let l = self.sc.grid.half_length;
        Window { lo: lo * l, hi: hi * l }
    }

    fn decay(&self, name: &str) -> Check {
        let rows = self.decay_rows();
        let resolved: Vec<f64> = rows.iter().filter_map(|r| r.a_hat).collect();
        if resolved.is_empty() {
            return Check::verdict(name, true, None, Some(DECAY_RATE_MIN), "no snapshot has a resolved tail");
        }
        let min = resolved.iter().copied().fold(f64::INFINITY, f64::min);
        Check::verdict(
            name,
            min >= DECAY_RATE_MIN,
            Some(min),
            Some(DECAY_RATE_MIN),
            format!("min fitted tail rate of |u| + |u_x| + |rho| over {} of {} snapshots", resolved.len(), rows.len()),
        )
    }

    fn identity_rows(&self) -> Vec<IdentityRow> {
        let transport = self.transport.as_ref().and_then(|r| r.as_ref().ok());
        let m_flow = self.m_flow.as_ref().and_then(|r| r.as_ref().ok());
        let casimir = self.casimir.as_ref().and_then(|r| r.as_ref().ok());
        let support = self.support.as_ref().ok();
        self.traj
            .states()
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let row = support.map(|rep| rep.rows[i]);
                IdentityRow {
                    t: s.t,
                    max_dev_transport: transport.map(|v| v[i]),
                    max_dev_momentum: m_flow.map(|v| v[i]),
                    casimir: casimir.map(|v| v[i]),
                    supp_left: row.and_then(|r| r.rho).map(|s| s.beta),
                    supp_right: row.and_then(|r| r.rho).map(|s| s.gamma),
                    phi_beta: row.and_then(|r| finite(r.phi_beta)),
                    phi_gamma: row.and_then(|r| finite(r.phi_gamma)),
                }
            })
            .collect()
    }

    fn persistence_rows(&self) -> Vec<PersistenceRow> {
        let reports: Vec<Option<&PersistenceReport>> = self.persistence.iter().map(|r| r.as_ref().ok()).collect();
        persistence_table(&reports)
    }

    fn decay_rows(&self) -> Vec<DecayRow> {
        let win = self.window();
        self.traj.states().iter().map(|s| decay_row(s.t, &tail_profile(&s.u, &s.rho), win)).collect()
    }

    fn besov_rows(&self) -> Vec<BesovRow> {
        let idx = BesovIndex::hilbert(self.sc.diagnostics.besov_s);
        besov_terms(&self.traj.last().u, idx, Cutoff::Sharp).into_iter().map(BesovRow::from).collect()
    }
}

/// `|u| + |u_x| + |rho|`.
pub fn tail_profile(u: &RealField, rho: &RealField) -> RealField {
    let ux = derivative(u, 1);
    let rest = ux.zip_with(rho, |b, c| b.abs() + c.abs()).expect("fields of one state share a grid");
    u.zip_with(&rest, |a, r| a.abs() + r).expect("fields of one state share a grid")
}

pub fn decay_row(t: f64, f: &RealField, win: Window) -> DecayRow {
    let fit = decay_profile(f, win, DEFAULT_NOISE_FLOOR).ok();
    DecayRow {
        t,
        a_hat: fit.map(|f| f.a_hat),
        c_hat: fit.map(|f| f.c_hat),
        window_lo: win.lo,
        window_hi: win.hi,
        residual: fit.map(|f| f.a_residual),
    }
}

/// Rows for the exponents `1, 2, inf` in that order; missing reports leave
/// their column empty.
pub fn persistence_table(reports: &[Option<&PersistenceReport>]) -> Vec<PersistenceRow> {
    let Some(first) = reports.iter().flatten().next() else {
        return Vec::new();
    };
    let column = |p: f64| reports.iter().flatten().find(|r| r.p == p).copied();
    let (r1, r2, ri) = (column(1.0), column(2.0), column(f64::INFINITY));
    (0..first.times.len())
        .map(|i| {
            let t = first.times[i];
            let distance = |r: &PersistenceReport| {
                if r.is_zero() {
                    return 0.0;
                }
                let x = (1.0 + r.m) * (t - r.times[0]);
                (r.w[i].ln() - r.intercept - r.c_hat * x).abs()
            };
            let residual = [r1, r2, ri].into_iter().flatten().map(distance).fold(0.0, f64::max);
            PersistenceRow {
                t,
                w1: r1.and_then(|r| finite(r.w[i])),
                w2: r2.and_then(|r| finite(r.w[i])),
                w_inf: ri.and_then(|r| finite(r.w[i])),
                m_running: first.m_running[i],
                fit_residual: finite(residual),
            }
        })
        .collect()
}

pub fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

/// `max_t |C(t) - C(0)| / |C(0)|`, absolute when `C(0) = 0`.
pub fn relative_drift(values: &[f64]) -> f64 {
    let c0 = values[0];
    let scale = if c0 != 0.0 { c0.abs() } else { 1.0 };
    values.iter().map(|c| (c - c0).abs() / scale).fold(0.0, f64::max)
}

pub fn trajectory_rows(res: &RunResult) -> Vec<TrajectoryRow> {
    let params = res.trajectory.params();
    res.trajectory
        .states()
        .iter()
        .step_by(res.scenario.output.stride)
        .flat_map(|s| {
            let m = s.momentum(params);
            let g = s.grid().clone();
            (0..g.n())
                .map(|j| TrajectoryRow {
                    t: s.t,
                    x: g.point(j),
                    u: s.u.samples()[j],
                    rho: s.rho.samples()[j],
                    m: m.samples()[j],
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Writes the data files and the manifest into `dir`.
pub fn write_run(res: &RunResult, dir: &Path) -> Result<RunManifest, HarnessError> {
    let mut files = Vec::new();
    let mut emit = |name: &str| -> PathBuf {
        files.push(name.to_owned());
        dir.join(name)
    };
    if res.scenario.output.trajectory {
        write_csv(&emit("trajectory.csv"), &trajectory_rows(res))?;
    }
    write_csv(&emit("identity.csv"), &res.identity)?;
    if res.scenario.is_enabled(Diagnostic::Persistence) {
        write_csv(&emit("persistence.csv"), &res.persistence)?;
    }
    if res.scenario.is_enabled(Diagnostic::Decay) {
        write_csv(&emit("decay.csv"), &res.decay)?;
    }
    if res.scenario.is_enabled(Diagnostic::Besov) {
        write_csv(&emit("besov.csv"), &res.besov)?;
    }
    files.push("manifest.json".into());
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        code_version: CODE_VERSION.into(),
        scenario: res.scenario.clone(),
        wall_time_s: res.wall_time_s,
        outcome: if res.blow_up.is_some() { Outcome::BlowUp } else { Outcome::Completed },
        blow_up: res.blow_up,
        steps: res.trajectory.steps(),
        snapshots: res.trajectory.len(),
        diagnostics: res.diagnostics.clone(),
        files,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

pub fn run_scenario(sc: &Scenario, dir: &Path) -> Result<RunManifest, HarnessError> {
    write_run(&execute(sc)?, dir)
}
