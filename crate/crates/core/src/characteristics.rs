//! Lagrangian flow map `phi_t = u(t, phi)`, the transport identities it
//! carries, the density Casimir and compact-support tracking.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods are not always available without std
use num_traits::Float;

use crate::dynamics::{hermite, DynamicsError, Params, Rates, State, Trajectory};
use crate::spectral::{eval_many, RealField, SpectralError, SpectralField};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CharacteristicsError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("flow map degenerate at t={t} near marker {index}")]
    FlowDegeneracy { t: f64, index: usize },
    #[error("the Casimir needs b != 1")]
    DegenerateExponent,
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(&'static str),
    #[error("markers must be finite and strictly increasing")]
    InvalidMarkers,
    #[error("flow map and trajectory do not match")]
    Mismatch,
}

/// Marker positions `phi(t, x_i)` and derivatives `phi_x(t, x_i)` at every
/// snapshot of the trajectory they were evolved on.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowMap {
    markers: Vec<f64>,
    times: Vec<f64>,
    phi: Vec<Vec<f64>>,
    phi_x: Vec<Vec<f64>>,
    /// Set when the markers are the full periodic grid.
    period: Option<f64>,
}

impl FlowMap {
    pub fn markers(&self) -> &[f64] {
        &self.markers
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn phi(&self, i: usize) -> &[f64] {
        &self.phi[i]
    }

    pub fn phi_x(&self, i: usize) -> &[f64] {
        &self.phi_x[i]
    }

    /// Periodic extension of marker `k`, any integer `k`.
    fn node(&self, i: usize, k: isize) -> (f64, f64, f64) {
        let n = self.markers.len() as isize;
        let (wrap, idx) = (k.div_euclid(n), k.rem_euclid(n) as usize);
        let shift = wrap as f64 * self.period.unwrap_or(0.0);
        (self.markers[idx] + shift, self.phi[i][idx] + shift, self.phi_x[i][idx])
    }

    /// `phi^{-1}(t_i, x)` by monotone cubic Hermite interpolation of the
    /// pairs `(phi_k, x_k)` with slopes `1 / phi_x`; `None` outside the
    /// marker range of a non-periodic map.
    pub fn inverse_at(&self, i: usize, x: f64) -> Option<f64> {
        let n = self.markers.len();
        let phi = &self.phi[i];
        let (mut x, mut shift) = (x, 0.0);
        if let Some(p) = self.period {
            let k = ((x - phi[0]) / p).floor();
            x -= k * p;
            shift = k * p;
        } else if n < 2 || x < phi[0] || x > phi[n - 1] {
            return None;
        }
        let mut lo = phi.partition_point(|&v| v <= x) as isize - 1;
        if self.period.is_none() {
            lo = lo.clamp(0, n as isize - 2);
        }
        let (y0, p0, d0) = self.node(i, lo);
        let (y1, p1, d1) = self.node(i, lo + 1);
        let h = p1 - p0;
        let secant = (y1 - y0) / h;
        let limit = |s: f64| s.min(3.0 * secant);
        let theta = ((x - p0) / h).clamp(0.0, 1.0);
        Some(hermite(y0, limit(1.0 / d0), y1, limit(1.0 / d1), h, theta) + shift)
    }

    /// `phi(t_i, y)` by cubic Hermite interpolation with slopes `phi_x`.
    pub fn position_at(&self, i: usize, y: f64) -> Option<f64> {
        let n = self.markers.len();
        let (mut y, mut shift) = (y, 0.0);
        if let Some(p) = self.period {
            let k = ((y - self.markers[0]) / p).floor();
            y -= k * p;
            shift = k * p;
        } else if n < 2 || y < self.markers[0] || y > self.markers[n - 1] {
            return if n == 1 && y == self.markers[0] { Some(self.phi[i][0]) } else { None };
        }
        let mut lo = self.markers.partition_point(|&v| v <= y) as isize - 1;
        if self.period.is_none() {
            lo = lo.clamp(0, n as isize - 2);
        }
        let (y0, p0, d0) = self.node(i, lo);
        let (y1, p1, d1) = self.node(i, lo + 1);
        let h = y1 - y0;
        Some(hermite(p0, d0, p1, d1, h, ((y - y0) / h).clamp(0.0, 1.0)) + shift)
    }

    /// `phi_x(t_i, y)` by four-point Lagrange interpolation of `ln phi_x`.
    pub fn derivative_at(&self, i: usize, y: f64) -> Option<f64> {
        let n = self.markers.len();
        if n < 4 {
            return None;
        }
        let mut y = y;
        if let Some(p) = self.period {
            y -= ((y - self.markers[0]) / p).floor() * p;
        } else if y < self.markers[0] || y > self.markers[n - 1] {
            return None;
        }
        let hi = self.markers.partition_point(|&v| v <= y) as isize;
        let mut start = hi - 2;
        if self.period.is_none() {
            start = start.clamp(0, n as isize - 4);
        }
        let nodes: Vec<(f64, f64)> = (start..start + 4)
            .map(|k| {
                let (yk, _, dk) = self.node(i, k);
                (yk, dk.ln())
            })
            .collect();
        let mut acc = 0.0;
        for (a, &(ya, va)) in nodes.iter().enumerate() {
            let mut w = 1.0;
            for (b, &(yb, _)) in nodes.iter().enumerate() {
                if a != b {
                    w *= (y - yb) / (ya - yb);
                }
            }
            acc += w * va;
        }
        Some(acc.exp())
    }
}

fn spectral_u(state: &State) -> SpectralField {
    state.u.transform()
}

fn mix(a: &RealField, da: &RealField, b: &RealField, db: &RealField, h: f64, theta: f64) -> RealField {
    let samples = (0..a.samples().len())
        .map(|j| hermite(a.samples()[j], da.samples()[j], b.samples()[j], db.samples()[j], h, theta))
        .collect();
    RealField::from_raw(a.grid(), samples)
}

/// Integrates the markers through every snapshot interval with one RK4
/// step, evaluating `u` off-grid by trigonometric interpolation and in time
/// by cubic Hermite interpolation between snapshots (using the run's
/// right-hand side for `u_t`). `phi_x` obeys `(phi_x)_t = u_x(t, phi) phi_x`.
pub fn evolve_flow(traj: &Trajectory, markers: &[f64]) -> Result<FlowMap, CharacteristicsError> {
    if markers.is_empty() || markers.iter().any(|m| !m.is_finite()) || markers.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CharacteristicsError::InvalidMarkers);
    }
    let grid = traj.first().grid().clone();
    let period = (markers == grid.points().as_slice()).then(|| 2.0 * grid.half_length());
    let states = traj.states();
    let mut phi = markers.to_vec();
    let mut phi_x = vec![1.0; markers.len()];
    let mut out = FlowMap {
        markers: markers.to_vec(),
        times: vec![states[0].t],
        phi: vec![phi.clone()],
        phi_x: vec![phi_x.clone()],
        period,
    };
    if states.len() < 2 {
        return Ok(out);
    }
    let mut rates: Rates = traj.rates_at(0)?;
    let mut u_lo = spectral_u(&states[0]);
    for i in 0..states.len() - 1 {
        let (a, b) = (&states[i], &states[i + 1]);
        let h = b.t - a.t;
        let rates_hi = traj.rates_at(i + 1)?;
        let u_mid = mix(&a.u, &rates.du, &b.u, &rates_hi.du, h, 0.5).transform();
        let u_hi = spectral_u(b);

        let slope = |field: &SpectralField, pos: &[f64], px: &[f64]| -> (Vec<f64>, Vec<f64>) {
            eval_many(field, pos).into_iter().zip(px).map(|((v, d), &q)| (v, d * q)).unzip()
        };
        let shifted =
            |base: &[f64], k: &[f64], c: f64| -> Vec<f64> { base.iter().zip(k).map(|(x, y)| x + c * y).collect() };
        let (k1p, k1d) = slope(&u_lo, &phi, &phi_x);
        let (k2p, k2d) = slope(&u_mid, &shifted(&phi, &k1p, 0.5 * h), &shifted(&phi_x, &k1d, 0.5 * h));
        let (k3p, k3d) = slope(&u_mid, &shifted(&phi, &k2p, 0.5 * h), &shifted(&phi_x, &k2d, 0.5 * h));
        let (k4p, k4d) = slope(&u_hi, &shifted(&phi, &k3p, h), &shifted(&phi_x, &k3d, h));
        for j in 0..phi.len() {
            phi[j] += h / 6.0 * (k1p[j] + 2.0 * k2p[j] + 2.0 * k3p[j] + k4p[j]);
            phi_x[j] += h / 6.0 * (k1d[j] + 2.0 * k2d[j] + 2.0 * k3d[j] + k4d[j]);
        }
        if let Some(index) = (0..phi.len())
            .find(|&j| !(phi_x[j] > 0.0 && phi[j].is_finite()) || (j + 1 < phi.len() && phi[j + 1] <= phi[j]))
        {
            return Err(CharacteristicsError::FlowDegeneracy { t: b.t, index });
        }
        out.times.push(b.t);
        out.phi.push(phi.clone());
        out.phi_x.push(phi_x.clone());
        rates = rates_hi;
        u_lo = u_hi;
    }
    Ok(out)
}

fn check_pair(flow: &FlowMap, traj: &Trajectory) -> Result<(), CharacteristicsError> {
    let same = flow.len() == traj.len() && flow.times.iter().zip(traj.states()).all(|(t, s)| *t == s.t);
    if same {
        Ok(())
    } else {
        Err(CharacteristicsError::Mismatch)
    }
}

/// `max_i |rho(t, phi(t, x_i)) phi_x(t, x_i)^(b-1) - rho0(x_i)|` per snapshot.
pub fn check_transport_identity(flow: &FlowMap, traj: &Trajectory, b: f64) -> Result<Vec<f64>, CharacteristicsError> {
    check_pair(flow, traj)?;
    let rho0: Vec<f64> = eval_many(&traj.first().rho.transform(), &flow.markers).into_iter().map(|(v, _)| v).collect();
    Ok(traj
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            eval_many(&s.rho.transform(), &flow.phi[i])
                .into_iter()
                .zip(&flow.phi_x[i])
                .zip(&rho0)
                .map(|(((v, _), &px), &r0)| (v * px.powf(b - 1.0) - r0).abs())
                .fold(0.0, f64::max)
        })
        .collect())
}

/// `int |rho|^(1/(b-1)) dx` by the periodic rectangle rule.
pub fn casimir(rho: &RealField, b: f64) -> Result<f64, CharacteristicsError> {
    if b == 1.0 || !b.is_finite() {
        return Err(CharacteristicsError::DegenerateExponent);
    }
    let e = 1.0 / (b - 1.0);
    let dx = rho.grid().dx();
    Ok(rho.samples().iter().map(|v| if e == 1.0 { v.abs() } else { v.abs().powf(e) }).sum::<f64>() * dx)
}

/// How the density is rebuilt from the flow.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Representation {
    /// `rho(t, x) = rho0(y) phi_x(t, y)^(1-b)` with `y = phi^{-1}(t, x)`.
    #[default]
    AlongFlow,
    /// `rho0(phi^{-1}(t, x)) exp((1-b) int_0^t u_x(s, x) ds)` with the time
    /// integral at fixed `x` (trapezoid over snapshots). Not an identity of
    /// the system; kept for comparison.
    FixedPoint,
}

/// Density rebuilt at every snapshot. Needs markers covering the grid.
pub fn reconstruct_rho(
    flow: &FlowMap,
    traj: &Trajectory,
    b: f64,
    method: Representation,
) -> Result<Vec<RealField>, CharacteristicsError> {
    check_pair(flow, traj)?;
    let grid = traj.first().grid().clone();
    let xs = grid.points();
    let rho0_hat = traj.first().rho.transform();
    let mut ux_integral = vec![0.0; xs.len()];
    let mut prev_ux: Option<RealField> = None;
    let mut out = Vec::with_capacity(traj.len());
    for (i, s) in traj.states().iter().enumerate() {
        if i == 0 {
            out.push(traj.first().rho.clone());
            if method == Representation::FixedPoint {
                prev_ux = Some(crate::spectral::derivative(&s.u, 1));
            }
            continue;
        }
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(j, &x)| flow.inverse_at(i, x).ok_or(CharacteristicsError::FlowDegeneracy { t: s.t, index: j }))
            .collect::<Result<_, _>>()?;
        let rho0_y = eval_many(&rho0_hat, &ys);
        let samples: Vec<f64> = match method {
            Representation::AlongFlow => ys
                .iter()
                .zip(&rho0_y)
                .enumerate()
                .map(|(j, (&y, &(r0, _)))| {
                    let px =
                        flow.derivative_at(i, y).ok_or(CharacteristicsError::FlowDegeneracy { t: s.t, index: j })?;
                    Ok(r0 * px.powf(1.0 - b))
                })
                .collect::<Result<_, CharacteristicsError>>()?,
            Representation::FixedPoint => {
                let ux = crate::spectral::derivative(&s.u, 1);
                let dt = s.t - traj.states()[i - 1].t;
                let prev = prev_ux.as_ref().ok_or(CharacteristicsError::Mismatch)?;
                for (acc, (a, c)) in ux_integral.iter_mut().zip(prev.samples().iter().zip(ux.samples())) {
                    *acc += 0.5 * dt * (a + c);
                }
                prev_ux = Some(ux);
                rho0_y.iter().zip(&ux_integral).map(|(&(r0, _), &w)| r0 * ((1.0 - b) * w).exp()).collect()
            }
        };
        out.push(RealField::new(&grid, samples)?);
    }
    Ok(out)
}

/// With `alpha = 0`: deviation of `m(t, phi) phi_x^b` from
/// `m0 - kappa int_0^t rho rho_x (s, phi(s, x)) phi_x(s, x)^b ds` per
/// snapshot, the time integral by the trapezoid rule over snapshots.
pub fn check_m_flow_identity(
    flow: &FlowMap,
    traj: &Trajectory,
    params: &Params,
) -> Result<Vec<f64>, CharacteristicsError> {
    if !params.alpha().is_zero() {
        return Err(CharacteristicsError::HypothesisViolation("the momentum identity along the flow needs alpha = 0"));
    }
    check_pair(flow, traj)?;
    let b = params.b();
    let kappa = params.kappa();
    let inertia = params.inertia();
    let nm = flow.markers.len();
    let mut integral = vec![0.0; nm];
    let mut prev_source: Option<Vec<f64>> = None;
    let mut m0: Vec<f64> = Vec::new();
    let mut out = Vec::with_capacity(traj.len());
    for (i, s) in traj.states().iter().enumerate() {
        let m_at: Vec<f64> =
            eval_many(&inertia.apply_spectral(&s.u.transform()), &flow.phi[i]).into_iter().map(|(v, _)| v).collect();
        let pxb: Vec<f64> = flow.phi_x[i].iter().map(|p| p.powf(b)).collect();
        let source: Vec<f64> =
            eval_many(&s.rho.transform(), &flow.phi[i]).into_iter().zip(&pxb).map(|((r, rx), w)| r * rx * w).collect();
        if let Some(prev) = &prev_source {
            let dt = s.t - traj.states()[i - 1].t;
            for j in 0..nm {
                integral[j] += 0.5 * dt * (prev[j] + source[j]);
            }
        }
        if i == 0 {
            m0 = m_at.clone();
        }
        out.push((0..nm).map(|j| (m_at[j] * pxb[j] - (m0[j] - kappa * integral[j])).abs()).fold(0.0, f64::max));
        prev_source = Some(source);
    }
    Ok(out)
}

/// `[beta, gamma]`: outermost grid points where `|f|` exceeds `threshold`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportInterval {
    pub beta: f64,
    pub gamma: f64,
    pub threshold: f64,
}

/// Relative threshold used when none is given.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-10;

/// Numerical support above `relative * max|f|`; `None` for the zero field.
pub fn track_support(field: &RealField, relative: f64) -> Option<SupportInterval> {
    let threshold = relative * field.sup_norm();
    let s = field.samples();
    let first = s.iter().position(|v| v.abs() > threshold)?;
    let last = s.iter().rposition(|v| v.abs() > threshold)?;
    let g = field.grid();
    Some(SupportInterval { beta: g.point(first), gamma: g.point(last), threshold })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportRow {
    pub t: f64,
    pub rho: Option<SupportInterval>,
    pub m: Option<SupportInterval>,
    /// Image of the left edge of the initial support hull.
    pub phi_beta: f64,
    pub phi_gamma: f64,
    pub rho_inside: bool,
    /// `None` when `alpha != 0` (no compactness claim for `m`).
    pub m_inside: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportReport {
    pub rows: Vec<SupportRow>,
    pub slack: f64,
}

impl SupportReport {
    pub fn all_inside(&self) -> bool {
        self.rows.iter().all(|r| r.rho_inside && r.m_inside.unwrap_or(true))
    }
}

/// Follows the edges of the initial supports of `rho` and (for `alpha = 0`)
/// `m` along the flow and checks that the current supports stay within the
/// transported intervals widened by two cells. `rho` is compared with its
/// own transported support; `m` with the hull of both.
pub fn check_support_containment(traj: &Trajectory, relative: f64) -> Result<SupportReport, CharacteristicsError> {
    let params = traj.params();
    let with_m = params.alpha().is_zero();
    let first = traj.first();
    let dx = first.grid().dx();
    let slack = 2.0 * dx;
    let rho0 = track_support(&first.rho, relative);
    let m0 = if with_m { track_support(&first.momentum(params), relative) } else { None };
    let hull = match (rho0, m0) {
        (Some(a), Some(b)) => Some((a.beta.min(b.beta), a.gamma.max(b.gamma))),
        (Some(a), None) => Some((a.beta, a.gamma)),
        (None, Some(b)) => Some((b.beta, b.gamma)),
        (None, None) => None,
    };
    let mut markers: Vec<f64> = [rho0.map(|s| s.beta), rho0.map(|s| s.gamma), hull.map(|h| h.0), hull.map(|h| h.1)]
        .into_iter()
        .flatten()
        .collect();
    markers.sort_by(f64::total_cmp);
    markers.dedup();
    let flow = if markers.is_empty() { None } else { Some(evolve_flow(traj, &markers)?) };
    let image = |i: usize, y: f64| -> f64 {
        let flow = flow.as_ref().expect("markers exist whenever a support exists");
        let k = flow.markers.iter().position(|&m| m == y).expect("edge is a marker");
        flow.phi[i][k]
    };
    let inside =
        |s: Option<SupportInterval>, lo: f64, hi: f64| s.is_none_or(|s| s.beta >= lo - slack && s.gamma <= hi + slack);
    let rows = traj
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let rho = track_support(&s.rho, relative);
            let m = if with_m { track_support(&s.momentum(params), relative) } else { None };
            let (pb, pg) = hull.map_or((f64::NAN, f64::NAN), |h| (image(i, h.0), image(i, h.1)));
            let rho_inside = match rho0 {
                Some(r0) => inside(rho, image(i, r0.beta), image(i, r0.gamma)),
                None => rho.is_none(),
            };
            let m_inside = with_m.then(|| match hull {
                Some(_) => inside(m, pb, pg),
                None => m.is_none(),
            });
            SupportRow { t: s.t, rho, m, phi_beta: pb, phi_gamma: pg, rho_inside, m_inside }
        })
        .collect();
    Ok(SupportReport { rows, slack })
}

/// Sup bound `max|rho(t)| <= exp(M1 t) max|rho0|` with `M1` the measured
/// `max(0, -(b-1) min u_x)` over the run.
#[derive(Clone, Debug, PartialEq)]
pub struct SupBound {
    pub m1: f64,
    /// `(t, max|rho(t)|, exp(M1 t) max|rho0|)`.
    pub rows: Vec<(f64, f64, f64)>,
}

impl SupBound {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.rows.iter().all(|&(_, v, bound)| v <= bound * (1.0 + rel_tol))
    }
}

pub fn check_sup_bound(traj: &Trajectory) -> SupBound {
    let b = traj.params().b();
    let m1 = traj
        .states()
        .iter()
        .flat_map(|s| {
            crate::spectral::derivative(&s.u, 1).samples().iter().map(|&ux| -(b - 1.0) * ux).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);
    let r0 = traj.first().rho.sup_norm();
    let t0 = traj.first().t;
    let rows = traj.states().iter().map(|s| (s.t, s.rho.sup_norm(), (m1 * (s.t - t0)).exp() * r0)).collect();
    SupBound { m1, rows }
}
