//! Multi-run experiments: refinement, paired stability runs, the weight
//! battery, the iteration scheme and compact-support transport.

use std::path::Path;
use std::time::Instant;

use hoch_core::besov::{besov_norm, BesovIndex, Cutoff};
use hoch_core::dynamics::*;
use hoch_core::spectral::{Grid, RealField};
use hoch_core::weights::{
    admissibility_check, lp_condition, persistence_monitor, PersistenceReport, Side, StandardWeight, Window,
    DEFAULT_NOISE_FLOOR,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::HarnessError;
use crate::manifest::{Check, RunManifest, SuiteReport, CODE_VERSION, SCHEMA_VERSION};
use crate::output::{finite, write_csv, write_json};
use crate::presets::preset;
use crate::run::{self, decay_row, persistence_table, tail_profile, DecayRow, DECAY_RATE_MIN};
use crate::scenario::{Diagnostic, Profile, Scenario};

pub const SUITE_NAMES: [&str; 5] = ["convergence", "stability", "persistence", "friedrichs", "support"];

pub const SPATIAL_DROP_MIN: f64 = 10.0;
pub const SPATIAL_FLOOR: f64 = 1e-11;
pub const TEMPORAL_ORDER: f64 = 4.0;
pub const TEMPORAL_ORDER_TOL: f64 = 0.3;
pub const LINEARITY_TOL: f64 = 0.2;
pub const GROWTH_VALIDATION_TOL: f64 = 1e-12;
pub const FRIEDRICHS_RATIO_MAX: f64 = 0.8;
pub const L_STABILITY_TOL: f64 = 0.01;

fn gauss(x: f64, amp: f64, center: f64, width: f64) -> f64 {
    let z = (x - center) / width;
    amp * (-z * z).exp()
}

fn params(b: f64, kappa: f64, alpha: f64, r: f64) -> Result<Params, HarnessError> {
    Ok(Params::new(b, kappa, Alpha::Constant(alpha), r)?)
}

fn ratios(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[0] / w[1]).collect()
}

// ---------------------------------------------------------------- convergence

#[derive(Clone, Debug, Serialize)]
pub struct RefinementRow {
    pub kind: &'static str,
    pub n: usize,
    pub dt: f64,
    pub error: f64,
    /// Error of the previous row over this one.
    pub ratio: Option<f64>,
    /// `log2(ratio)` for time refinement.
    pub order: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub spatial: Vec<RefinementRow>,
    pub temporal: Vec<RefinementRow>,
}

pub const SPATIAL_NS: [usize; 3] = [256, 512, 1024];
pub const SPATIAL_ORACLE_N: usize = 2048;
pub const TEMPORAL_DTS: [f64; 3] = [0.02, 0.01, 0.005];
pub const TEMPORAL_ORACLE_DT: f64 = 0.00125;

/// Smooth two-component data on `L = 20`, run to `T = 0.5`.
fn smooth_run(n: usize, dt: f64) -> Result<State, HarnessError> {
    let g = Grid::new(20.0, n)?;
    let s = State::new(
        0.0,
        RealField::from_fn(&g, |x| gauss(x, 0.4, 0.0, 0.5)),
        RealField::from_fn(&g, |x| gauss(x, 0.3, 0.5, 0.5)),
    )?;
    let traj = integrate(&s, &params(2.0, 1.0, 0.0, 1.0)?, &StepControl::fixed(dt, 0.5), Formulation::MForm)?;
    Ok(traj.last().clone())
}

fn refinement_rows(kind: &'static str, cases: &[(usize, f64)], errors: &[f64]) -> Vec<RefinementRow> {
    cases
        .iter()
        .zip(errors)
        .enumerate()
        .map(|(i, (&(n, dt), &error))| {
            let ratio = (i > 0).then(|| errors[i - 1] / error);
            RefinementRow { kind, n, dt, error, ratio, order: if kind == "time" { ratio.map(f64::log2) } else { None } }
        })
        .collect()
}

pub fn convergence() -> Result<ConvergenceReport, HarnessError> {
    let space: Vec<(usize, f64)> = SPATIAL_NS.iter().chain([SPATIAL_ORACLE_N].iter()).map(|&n| (n, 0.002)).collect();
    let time: Vec<(usize, f64)> = TEMPORAL_DTS.iter().chain([TEMPORAL_ORACLE_DT].iter()).map(|&dt| (256, dt)).collect();
    let all: Vec<(usize, f64)> = space.iter().chain(&time).copied().collect();
    let finals = all.par_iter().map(|&(n, dt)| smooth_run(n, dt)).collect::<Result<Vec<_>, _>>()?;
    let (space_finals, time_finals) = finals.split_at(space.len());

    let oracle = space_finals.last().expect("oracle run").u.transform();
    let spatial_errors: Vec<f64> = space_finals[..SPATIAL_NS.len()]
        .iter()
        .map(|s| {
            let u = &s.u;
            u.grid().points().iter().zip(u.samples()).map(|(&x, v)| (v - oracle.eval_at(x)).abs()).fold(0.0, f64::max)
        })
        .collect();
    let reference = &time_finals.last().expect("reference run").u;
    let temporal_errors: Vec<f64> =
        time_finals[..TEMPORAL_DTS.len()].iter().map(|s| s.u.max_abs_diff(reference)).collect::<Result<_, _>>()?;
    Ok(ConvergenceReport {
        spatial: refinement_rows("space", &space[..SPATIAL_NS.len()], &spatial_errors),
        temporal: refinement_rows("time", &time[..TEMPORAL_DTS.len()], &temporal_errors),
    })
}

impl ConvergenceReport {
    pub fn checks(&self) -> Vec<Check> {
        let errors: Vec<f64> = self.spatial.iter().map(|r| r.error).collect();
        let spectral = errors.windows(2).all(|w| w[0] / w[1] >= SPATIAL_DROP_MIN || w[1] < SPATIAL_FLOOR);
        let worst_drop = ratios(&errors).into_iter().fold(f64::INFINITY, f64::min);
        let orders: Vec<f64> = self.temporal.iter().filter_map(|r| r.order).collect();
        let worst_order =
            orders.iter().copied().max_by(|a, b| (a - TEMPORAL_ORDER).abs().total_cmp(&(b - TEMPORAL_ORDER).abs()));
        vec![
            Check::verdict(
                "spatial_convergence",
                spectral,
                Some(worst_drop),
                Some(SPATIAL_DROP_MIN),
                format!(
                    "smallest error drop per n-doubling over n = {SPATIAL_NS:?}, errors {}",
                    errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" ")
                ),
            ),
            Check::verdict(
                "temporal_order",
                !orders.is_empty() && orders.iter().all(|o| (o - TEMPORAL_ORDER).abs() <= TEMPORAL_ORDER_TOL),
                worst_order,
                Some(TEMPORAL_ORDER_TOL),
                format!("observed orders {orders:.3?} against {TEMPORAL_ORDER} +- {TEMPORAL_ORDER_TOL}"),
            ),
        ]
    }

    pub fn rows(&self) -> Vec<RefinementRow> {
        self.spatial.iter().chain(&self.temporal).cloned().collect()
    }
}

// ------------------------------------------------------------------ stability

pub const STABILITY_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];
pub const STABILITY_S: f64 = 3.0;

/// One member of the stability battery.
pub struct StabilitySet {
    pub name: &'static str,
    pub u0: fn(f64) -> f64,
    pub rho0: fn(f64) -> f64,
    pub perturbation: fn(f64) -> f64,
}

/// The battery; `FIT_SET` carries the strongest density coupling and fixes
/// the growth constant validated on the others.
pub const STABILITY_SETS: [StabilitySet; 3] = [
    StabilitySet {
        name: "gaussian",
        u0: |x| gauss(x, 0.5, 0.0, 1.0),
        rho0: |x| gauss(x, 0.4, 1.0, 1.0),
        perturbation: |x| (-x * x / 2.0).exp() * (2.0 * x).cos(),
    },
    StabilitySet {
        name: "density_heavy",
        u0: |x| 0.3 / (x * x / 4.0 + 1.0).cosh(),
        rho0: |x| gauss(x, 0.6, -1.0, 2f64.sqrt()),
        perturbation: |x| x * (-x * x).exp(),
    },
    StabilitySet {
        name: "two_humps",
        u0: |x| gauss(x, -0.4, 2.0, 1.0) + gauss(x, 0.2, -2.0, 1.0),
        rho0: |x| gauss(x, 0.3, 0.0, 3f64.sqrt()),
        perturbation: |x| gauss(x, 1.0, 1.0, 1.0),
    },
];
pub const FIT_SET: usize = 1;

#[derive(Clone, Debug, Serialize)]
pub struct StabilityRow {
    pub set: &'static str,
    pub eps: f64,
    pub sup_u_diff: f64,
    pub sup_rho_diff: f64,
    /// Growth constant fitted on this set alone.
    pub c_set: f64,
    /// `max_t (ln R - C int Gamma)` with the battery constant.
    pub excess: f64,
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub runs: Vec<Vec<StabilityRun>>,
    pub c_fit: f64,
    pub rows: Vec<StabilityRow>,
}

pub fn stability() -> Result<StabilityReport, HarnessError> {
    let g = Grid::new(20.0, 256)?;
    let p = params(2.0, 1.0, 0.0, 1.0)?;
    let ctrl = StepControl::fixed(0.01, 1.0);
    let spec = StabilitySpec { s: STABILITY_S, cutoff: Cutoff::Sharp };
    let runs = STABILITY_SETS
        .par_iter()
        .map(|set| {
            let f = |h: fn(f64) -> f64| RealField::from_fn(&g, h);
            stability_pair(&f(set.u0), &f(set.rho0), &f(set.perturbation), &STABILITY_EPS, &p, &ctrl, spec)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let c_fit = fit_growth_constant(&runs[FIT_SET]);
    let rows = STABILITY_SETS
        .iter()
        .zip(&runs)
        .flat_map(|(set, rs)| {
            let c_set = fit_growth_constant(rs);
            rs.iter().map(move |r| StabilityRow {
                set: set.name,
                eps: r.eps,
                sup_u_diff: r.sup_u_diff(),
                sup_rho_diff: r.sup_rho_diff(),
                c_set,
                excess: growth_excess(r, c_fit),
            })
        })
        .collect();
    Ok(StabilityReport { runs, c_fit, rows })
}

impl StabilityReport {
    /// Largest `|ratio / 10 - 1|` between consecutive `eps` over the battery.
    pub fn linearity_gap(&self) -> f64 {
        self.runs
            .iter()
            .flat_map(|rs| {
                let sups: Vec<f64> = rs.iter().map(StabilityRun::sup_u_diff).collect();
                let eps: Vec<f64> = rs.iter().map(|r| r.eps).collect();
                ratios(&sups).into_iter().zip(ratios(&eps)).map(|(r, e)| (r / e - 1.0).abs()).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }

    pub fn validation_excess(&self) -> f64 {
        self.runs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != FIT_SET)
            .flat_map(|(_, rs)| rs.iter().map(|r| growth_excess(r, self.c_fit)))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn checks(&self) -> Vec<Check> {
        let gap = self.linearity_gap();
        let excess = self.validation_excess();
        vec![
            Check::verdict(
                "stability_linearity",
                gap <= LINEARITY_TOL,
                Some(gap),
                Some(LINEARITY_TOL),
                format!(
                    "largest relative deviation of B^{}_(2,2) difference ratios from eps ratios",
                    STABILITY_S - 1.0
                ),
            ),
            Check::verdict(
                "stability_growth_constant",
                excess <= GROWTH_VALIDATION_TOL,
                Some(excess),
                Some(GROWTH_VALIDATION_TOL),
                format!(
                    "constant {:.4} fitted on `{}` validated on the other sets",
                    self.c_fit, STABILITY_SETS[FIT_SET].name
                ),
            ),
        ]
    }
}

// ----------------------------------------------------------------- friedrichs

pub const FRIEDRICHS_K: usize = 6;

#[derive(Clone, Debug, Serialize)]
pub struct FriedrichsRow {
    pub k: usize,
    pub error: f64,
    pub ratio: Option<f64>,
}

pub fn friedrichs() -> Result<Vec<FriedrichsRow>, HarnessError> {
    let g = Grid::new(20.0, 256)?;
    let p = params(2.0, 1.0, 0.3, 1.0)?;
    let u0 = RealField::from_fn(&g, |x| gauss(x, 0.5, 0.0, 1.0));
    let rho0 = RealField::from_fn(&g, |x| gauss(x, 0.4, 0.5, 1.0));
    let ctrl = StepControl::fixed(0.002, 0.1);
    let run = friedrichs_iterate(&u0, &rho0, &p, FRIEDRICHS_K, &ctrl, Cutoff::Sharp)?;
    let direct = integrate(&State::new(0.0, u0, rho0)?, &p, &run.direct_control(&ctrl), Formulation::MForm)?;
    let idx = BesovIndex::hilbert(STABILITY_S - 1.0);
    let errors = run
        .iterates
        .par_iter()
        .map(|it| {
            it.states().iter().zip(direct.states()).try_fold(0.0f64, |acc, (a, b)| {
                Ok::<_, HarnessError>(acc.max(besov_norm(&a.u.axpy(-1.0, &b.u)?, idx, Cutoff::Sharp)))
            })
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(errors
        .iter()
        .enumerate()
        .map(|(i, &error)| FriedrichsRow { k: i + 1, error, ratio: (i > 0).then(|| error / errors[i - 1]) })
        .collect())
}

pub fn friedrichs_checks(rows: &[FriedrichsRow]) -> Vec<Check> {
    let worst = rows.iter().filter(|r| r.k >= 2).filter_map(|r| r.ratio).fold(0.0, f64::max);
    vec![Check::verdict(
        "friedrichs_contraction",
        worst < FRIEDRICHS_RATIO_MAX,
        Some(worst),
        Some(FRIEDRICHS_RATIO_MAX),
        format!("largest ratio of consecutive B^{}_(2,2) errors for k = 2..{FRIEDRICHS_K}", STABILITY_S - 1.0),
    )]
}

// ---------------------------------------------------------------- persistence

/// Two-sided algebraic weights and right-only exponential weights.
pub fn weight_battery() -> Vec<(String, StandardWeight)> {
    let mut out: Vec<(String, StandardWeight)> =
        [1.0, 2.0, 3.0].iter().map(|&c| (format!("algebraic_c{c}"), StandardWeight::algebraic(c))).collect();
    out.extend([0.25, 0.5, 0.9].iter().map(|&a| (format!("right_exp_a{a}"), StandardWeight::right_exponential(a))));
    out
}

pub const PERSISTENCE_L: f64 = 40.0;
pub const PERSISTENCE_N: usize = 2048;

/// Gaussian momentum with `u0 = A^{-1} m0` and a Gaussian density on
/// `[-L, L)` with `dx = 40 / 2048`.
pub fn persistence_run(half_length: f64) -> Result<Trajectory, HarnessError> {
    let n = (PERSISTENCE_N as f64 * half_length / PERSISTENCE_L) as usize;
    let g = Grid::new(half_length, n)?;
    let p = params(2.0, 1.0, 0.0, 1.0)?;
    let m0 = RealField::from_fn(&g, |x| gauss(x, 0.8, 0.0, 1.0));
    let s = State::new(0.0, p.inertia().invert(&m0), RealField::from_fn(&g, |x| gauss(x, 0.4, 0.5, 1.0)))?;
    Ok(integrate(&s, &p, &StepControl::new(0.01, 1.0).with_output_interval(0.05), Formulation::MForm)?)
}

#[derive(Clone, Debug)]
pub struct WeightOutcome {
    pub name: String,
    pub weight: StandardWeight,
    pub admissible: bool,
    /// `(p, report on L, report on 2L)`.
    pub reports: Vec<(f64, PersistenceReport, PersistenceReport)>,
}

impl WeightOutcome {
    pub fn worst_residual(&self) -> f64 {
        self.reports.iter().map(|(_, r, _)| r.residual).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.reports.iter().all(|(_, r, _)| r.w.iter().all(|v| v.is_finite()))
    }

    /// Largest relative change of `W_p` and `M` under L-doubling.
    pub fn l_spread(&self) -> f64 {
        let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { ((a - b) / b).abs() };
        self.reports
            .iter()
            .flat_map(|(_, a, b)| {
                a.w.iter().zip(&b.w).chain(a.m_running.iter().zip(&b.m_running)).map(|(&x, &y)| rel(x, y))
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct PersistenceSuite {
    pub weights: Vec<WeightOutcome>,
    pub decay: Vec<DecayRow>,
}

pub fn persistence() -> Result<PersistenceSuite, HarnessError> {
    let (base, wide) = rayon::join(|| persistence_run(PERSISTENCE_L), || persistence_run(2.0 * PERSISTENCE_L));
    let (base, wide) = (base?, wide?);
    let weights = weight_battery()
        .into_par_iter()
        .map(|(name, w)| {
            let points = base.first().grid().points();
            let admissible = admissibility_check(&w, &points).admissible();
            let reports = run::PERSISTENCE_EXPONENTS
                .iter()
                .map(|&p| {
                    Ok((
                        p,
                        persistence_monitor(&base, &w, p, DEFAULT_NOISE_FLOOR)?,
                        persistence_monitor(&wide, &w, p, DEFAULT_NOISE_FLOOR)?,
                    ))
                })
                .collect::<Result<Vec<_>, HarnessError>>()?;
            Ok(WeightOutcome { name, weight: w, admissible, reports })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let win = Window::default_for(PERSISTENCE_L);
    let decay = base.states().iter().map(|s| decay_row(s.t, &tail_profile(&s.u, &s.rho), win)).collect();
    Ok(PersistenceSuite { weights, decay })
}

impl PersistenceSuite {
    pub fn worst_residual(&self) -> f64 {
        self.weights.iter().map(WeightOutcome::worst_residual).fold(0.0, f64::max)
    }

    pub fn worst_spread(&self) -> f64 {
        self.weights.iter().map(WeightOutcome::l_spread).fold(0.0, f64::max)
    }

    /// Smallest fitted rate, `None` when some snapshot has no resolved tail.
    pub fn min_decay_rate(&self) -> Option<f64> {
        self.decay.iter().map(|r| r.a_hat).try_fold(f64::INFINITY, |m, a| a.map(|a| m.min(a)))
    }

    pub fn checks(&self) -> Vec<Check> {
        let residual = self.worst_residual();
        let spread = self.worst_spread();
        let finite = self.weights.iter().all(WeightOutcome::all_finite);
        let admissible = self.weights.iter().all(|w| w.admissible || lp_condition(&w.weight, f64::INFINITY));
        let rate = self.min_decay_rate();
        vec![
            Check::verdict(
                "persistence_growth",
                finite && admissible && residual < run::PERSISTENCE_RESIDUAL_TOL,
                Some(residual),
                Some(run::PERSISTENCE_RESIDUAL_TOL),
                format!("max ln W_p fit residual over {} weights and p in {{1, 2, inf}}", self.weights.len()),
            ),
            Check::verdict(
                "persistence_l_doubling",
                spread < L_STABILITY_TOL,
                Some(spread),
                Some(L_STABILITY_TOL),
                format!("max relative change of W_p and M from L = {PERSISTENCE_L} to {}", 2.0 * PERSISTENCE_L),
            ),
            Check::verdict(
                "decay_rate",
                rate.is_some_and(|a| a >= DECAY_RATE_MIN),
                rate,
                Some(DECAY_RATE_MIN),
                format!("min fitted tail rate of |u| + |u_x| + |rho| over {} snapshots", self.decay.len()),
            ),
        ]
    }
}

fn weight_file(name: &str) -> String {
    format!("persistence_{}.csv", name.replace('.', "p"))
}

// -------------------------------------------------------------------- support

/// Bump data with `alpha = 0` on a fine grid.
pub fn support_scenario() -> Scenario {
    let mut s = preset("2cch").expect("built-in preset");
    s.name = "support".into();
    s.grid.half_length = 10.0;
    s.grid.n = 4096;
    s.control.output_interval = 0.05;
    s.control.adaptive = true;
    s.initial.u_from_momentum = false;
    s.initial.u = Profile::Bump { amp: 0.5, width: 3.0, center: 0.0 };
    s.initial.rho = Profile::Bump { amp: 0.5, width: 3.0, center: 0.5 };
    s.diagnostics.enabled = vec![Diagnostic::Support, Diagnostic::Casimir, Diagnostic::SupBound];
    s.output.stride = 4;
    s
}

// ------------------------------------------------------------------- dispatch

fn side_name(w: &StandardWeight) -> &'static str {
    match w.side {
        Side::Both => "both",
        Side::RightOnly => "right",
    }
}

#[derive(Serialize)]
struct WeightSummaryRow {
    weight: String,
    a: f64,
    c: f64,
    side: &'static str,
    admissible: bool,
    max_residual: f64,
    l_spread: Option<f64>,
}

/// Runs suite `name` on `workers` threads and writes its files into `dir`.
pub fn run_suite(name: &str, dir: &Path, workers: usize) -> Result<SuiteReport, HarnessError> {
    if !SUITE_NAMES.contains(&name) {
        return Err(HarnessError::config(format!("unknown suite `{name}` (known: {})", SUITE_NAMES.join(", "))));
    }
    let start = Instant::now();
    let mut files = Vec::new();
    let checks = crate::with_workers(workers, || -> Result<Vec<Check>, HarnessError> {
        match name {
            "convergence" => {
                let rep = convergence()?;
                write_csv(&dir.join("convergence.csv"), &rep.rows())?;
                files.push("convergence.csv".into());
                Ok(rep.checks())
            }
            "stability" => {
                let rep = stability()?;
                write_csv(&dir.join("stability.csv"), &rep.rows)?;
                files.push("stability.csv".into());
                Ok(rep.checks())
            }
            "friedrichs" => {
                let rows = friedrichs()?;
                write_csv(&dir.join("friedrichs.csv"), &rows)?;
                files.push("friedrichs.csv".into());
                Ok(friedrichs_checks(&rows))
            }
            "persistence" => {
                let rep = persistence()?;
                let mut summary = Vec::new();
                for w in &rep.weights {
                    let refs: Vec<Option<&PersistenceReport>> = w.reports.iter().map(|(_, r, _)| Some(r)).collect();
                    let file = weight_file(&w.name);
                    write_csv(&dir.join(&file), &persistence_table(&refs))?;
                    files.push(file);
                    summary.push(WeightSummaryRow {
                        weight: w.name.clone(),
                        a: w.weight.a,
                        c: w.weight.c,
                        side: side_name(&w.weight),
                        admissible: w.admissible,
                        max_residual: w.worst_residual(),
                        l_spread: finite(w.l_spread()),
                    });
                }
                write_csv(&dir.join("weights.csv"), &summary)?;
                write_csv(&dir.join("decay.csv"), &rep.decay)?;
                files.extend(["weights.csv".into(), "decay.csv".into()]);
                Ok(rep.checks())
            }
            "support" => {
                let sub = dir.join("run");
                let manifest: RunManifest = run::run_scenario(&support_scenario(), &sub)?;
                files.extend(manifest.files.iter().map(|f| format!("run/{f}")));
                Ok(manifest.diagnostics)
            }
            _ => unreachable!("suite names are checked above"),
        }
    })??;
    let report = SuiteReport {
        schema_version: SCHEMA_VERSION,
        code_version: CODE_VERSION.into(),
        suite: name.into(),
        wall_time_s: start.elapsed().as_secs_f64(),
        workers,
        checks,
        files: {
            files.push("suite.json".into());
            files
        },
    };
    write_json(&dir.join("suite.json"), &report)?;
    Ok(report)
}
