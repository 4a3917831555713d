//! Convergence diagnostics: the minimal-norm target, post-run reports, and
//! the limit-dependence probe.
//!
//! Slow schedules steer the flow toward the *minimal-norm* minimizer of `f`,
//! so the diagnostics need that point as ground truth. Two independent
//! routes are provided: an analytic pattern match over the function algebra,
//! and a brute two-stage grid search usable up to dimension 3. Their
//! agreement is itself a test surface.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::convex::{ConvexFunction, ExtReal, Kind};
use crate::dynamics::{self, DynamicSpec, Flow, IntegratorSettings, Trajectory};
use crate::error::{Error, Result};
use crate::schedule::{h1_model_check, H1Grid, Schedule};

/// How [`min_norm_oracle`] finds the minimal-norm minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Closed-form pattern match; errs with [`Error::NoClosedForm`] on
    /// shapes without a registered rule.
    Analytic,
    /// Two-stage grid search on `[-10, 10]^n`, 401 points per axis, one
    /// refinement pass; `n <= 3`.
    Brute,
}

const BRUTE_HALF_WIDTH: f64 = 10.0;
const BRUTE_POINTS: usize = 401;

/// Minimal-norm element of `argmin f`.
pub fn min_norm_oracle(f: &ConvexFunction, mode: OracleMode) -> Result<DVector<f64>> {
    match mode {
        OracleMode::Analytic => analytic_min_norm(f),
        OracleMode::Brute => brute_min_norm(f),
    }
}

/// Analytic route with brute fallback (dimension permitting).
pub fn min_norm_target(f: &ConvexFunction) -> Result<DVector<f64>> {
    match analytic_min_norm(f) {
        Err(Error::NoClosedForm(_)) if f.dim() <= 3 => brute_min_norm(f),
        other => other,
    }
}

fn analytic_min_norm(f: &ConvexFunction) -> Result<DVector<f64>> {
    match f.kind() {
        Kind::Quadratic(q) => q
            .solve_min_norm(&(-&q.b))
            .ok_or(Error::UnboundedBelow),
        Kind::AbsValue => Ok(DVector::zeros(1)),
        Kind::NormOne { dim } => Ok(DVector::zeros(*dim)),
        Kind::IndicatorBox { lo, hi } | Kind::HalfSqDistToBox { lo, hi } => {
            Ok(DVector::from_fn(lo.len(), |i, _| 0.0f64.clamp(lo[i], hi[i])))
        }
        Kind::IndicatorHalfspace { a, beta, a_norm2 } => {
            if 0.0 <= *beta {
                Ok(DVector::zeros(a.len()))
            } else {
                Ok((*beta / a_norm2) * a)
            }
        }
        Kind::IndicatorAffine(d) => Ok(d.xbar.clone()),
        Kind::SumAbs { anchors, weights, w_total } => {
            let (lo, hi) = sum_abs_argmin_interval(anchors, weights, *w_total);
            Ok(DVector::from_element(1, 0.0f64.clamp(lo, hi)))
        }
        Kind::ShiftValue { inner, .. } | Kind::Scale { inner, .. } => analytic_min_norm(inner),
        Kind::SeparableSum { blocks, dim } => {
            // the argmin set is a product, so the minimal-norm element is
            // blockwise minimal-norm
            let mut out = DVector::zeros(*dim);
            let mut off = 0;
            for b in blocks {
                let piece = analytic_min_norm(b)?;
                out.rows_mut(off, b.dim()).copy_from(&piece);
                off += b.dim();
            }
            Ok(out)
        }
        Kind::Translate { inner, shift } => {
            // only sound when the inner argmin is a single point; projecting
            // 0 onto a shifted *set* is a different problem
            match singleton_argmin(inner) {
                Some(m) => Ok(shift + m),
                None => Err(Error::NoClosedForm(
                    "min-norm point of a translated non-singleton argmin set".into(),
                )),
            }
        }
        Kind::AddLinear { inner, slope } => match inner.kind() {
            // fold the tilt into the quadratic: argmin of 1/2 <Ax,x> + <b + slope, x>
            Kind::Quadratic(q) => q
                .solve_min_norm(&(-(&q.b + slope)))
                .ok_or(Error::UnboundedBelow),
            _ => Err(Error::NoClosedForm(
                "min-norm point of a linearly tilted nonsmooth function".into(),
            )),
        },
    }
}

/// Weighted-median argmin interval of `sum_k w_k |x - a_k|`.
fn sum_abs_argmin_interval(anchors: &[f64], weights: &[f64], w_total: f64) -> (f64, f64) {
    let mut s = -w_total;
    for k in 0..anchors.len() {
        let s_next = s + 2.0 * weights[k];
        if s_next.abs() <= 1e-12 * w_total {
            // slope vanishes on a whole gap between anchors
            return (anchors[k], anchors[k + 1]);
        }
        if s_next > 0.0 {
            return (anchors[k], anchors[k]);
        }
        s = s_next;
    }
    let last = *anchors.last().expect("sum_abs has anchors");
    (last, last)
}

/// The unique minimizer when the argmin set is structurally a single point.
fn singleton_argmin(f: &ConvexFunction) -> Option<DVector<f64>> {
    match f.kind() {
        Kind::Quadratic(q) => {
            if q.is_positive_definite() {
                q.solve_min_norm(&(-&q.b))
            } else {
                None
            }
        }
        Kind::AbsValue => Some(DVector::zeros(1)),
        Kind::NormOne { dim } => Some(DVector::zeros(*dim)),
        Kind::IndicatorBox { lo, hi } | Kind::HalfSqDistToBox { lo, hi } => {
            if lo == hi {
                Some(lo.clone())
            } else {
                None
            }
        }
        Kind::IndicatorHalfspace { .. } => None,
        Kind::IndicatorAffine(d) => {
            if d.row_basis.ncols() == d.a.ncols() {
                Some(d.xbar.clone())
            } else {
                None
            }
        }
        Kind::SumAbs { anchors, weights, w_total } => {
            let (lo, hi) = sum_abs_argmin_interval(anchors, weights, *w_total);
            if lo == hi {
                Some(DVector::from_element(1, lo))
            } else {
                None
            }
        }
        Kind::ShiftValue { inner, .. } | Kind::Scale { inner, .. } => singleton_argmin(inner),
        Kind::Translate { inner, shift } => singleton_argmin(inner).map(|m| shift + m),
        Kind::AddLinear { inner, .. } => match inner.kind() {
            Kind::Quadratic(q) if q.is_positive_definite() => {
                analytic_min_norm(f).ok()
            }
            _ => None,
        },
        Kind::SeparableSum { blocks, dim } => {
            let mut out = DVector::zeros(*dim);
            let mut off = 0;
            for b in blocks {
                let piece = singleton_argmin(b)?;
                out.rows_mut(off, b.dim()).copy_from(&piece);
                off += b.dim();
            }
            Some(out)
        }
    }
}

struct GridStage {
    best_min_norm: DVector<f64>,
    spacing: f64,
}

/// One pass of grid minimization: among grid points within a relative `1e-6`
/// band of the grid minimum, keep the one of smallest norm.
fn grid_stage(
    f: &ConvexFunction,
    center: &DVector<f64>,
    half_width: f64,
    ppa: usize,
) -> Result<GridStage> {
    let n = f.dim();
    let spacing = 2.0 * half_width / (ppa - 1) as f64;
    let mut idx = vec![0usize; n];
    let mut x = DVector::zeros(n);
    let mut entries: Vec<(f64, f64, DVector<f64>)> = Vec::new();
    let mut min_val = f64::INFINITY;
    loop {
        for d in 0..n {
            x[d] = center[d] - half_width + spacing * idx[d] as f64;
        }
        if let ExtReal::Finite(v) = f.evaluate(&x)? {
            min_val = min_val.min(v);
            // keep a bounded candidate pool: drop entries already far above
            // the running minimum
            if v <= min_val + 1e-5 * (1.0 + min_val.abs()) {
                entries.push((v, x.norm(), x.clone()));
                if entries.len() > 200_000 {
                    let keep = min_val + 1e-5 * (1.0 + min_val.abs());
                    entries.retain(|(val, _, _)| *val <= keep);
                }
            }
        }
        let mut d = 0;
        loop {
            if d == n {
                break;
            }
            idx[d] += 1;
            if idx[d] < ppa {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == n {
            break;
        }
    }
    if !min_val.is_finite() {
        return Err(Error::InvalidParameter(
            "brute oracle: f is infinite on the whole grid".into(),
        ));
    }
    let delta = 1e-6 * (1.0 + min_val.abs());
    let mut best: Option<&(f64, f64, DVector<f64>)> = None;
    for e in &entries {
        if e.0 <= min_val + delta {
            let better = match best {
                None => true,
                Some(b) => e.1 < b.1,
            };
            if better {
                best = Some(e);
            }
        }
    }
    let best = best.expect("at least the minimizing grid point qualifies");
    Ok(GridStage { best_min_norm: best.2.clone(), spacing })
}

fn brute_min_norm(f: &ConvexFunction) -> Result<DVector<f64>> {
    let n = f.dim();
    if n > 3 {
        return Err(Error::InvalidParameter(format!(
            "brute oracle supports dim <= 3, got {n}"
        )));
    }
    let origin = DVector::zeros(n);
    let coarse = grid_stage(f, &origin, BRUTE_HALF_WIDTH, BRUTE_POINTS)?;
    // refine once around the coarse winner with a grid the size of one cell
    let fine = grid_stage(f, &coarse.best_min_norm, coarse.spacing, BRUTE_POINTS)?;
    Ok(fine.best_min_norm)
}

/// Grid samples of the solution set: points within a relative `1e-6` value
/// band of the grid minimum, thinned to at most `cap` points. Feeds the
/// growth-model estimate.
pub fn argmin_samples(
    f: &ConvexFunction,
    half_width: f64,
    ppa: usize,
    cap: usize,
) -> Result<Vec<DVector<f64>>> {
    let n = f.dim();
    if n > 3 {
        return Err(Error::InvalidParameter(format!(
            "argmin_samples supports dim <= 3, got {n}"
        )));
    }
    if cap == 0 || ppa < 2 {
        return Err(Error::InvalidParameter("argmin_samples: degenerate request".into()));
    }
    let spacing = 2.0 * half_width / (ppa - 1) as f64;
    let mut idx = vec![0usize; n];
    let mut x = DVector::zeros(n);
    let mut min_val = f64::INFINITY;
    let mut pool: Vec<(f64, DVector<f64>)> = Vec::new();
    loop {
        for d in 0..n {
            x[d] = -half_width + spacing * idx[d] as f64;
        }
        if let ExtReal::Finite(v) = f.evaluate(&x)? {
            min_val = min_val.min(v);
            if v <= min_val + 1e-5 * (1.0 + min_val.abs()) {
                pool.push((v, x.clone()));
                if pool.len() > 500_000 {
                    let keep = min_val + 1e-5 * (1.0 + min_val.abs());
                    pool.retain(|(val, _)| *val <= keep);
                }
            }
        }
        let mut d = 0;
        loop {
            if d == n {
                break;
            }
            idx[d] += 1;
            if idx[d] < ppa {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == n {
            break;
        }
    }
    if !min_val.is_finite() {
        return Err(Error::InvalidParameter(
            "argmin_samples: f is infinite on the whole grid".into(),
        ));
    }
    let delta = 1e-6 * (1.0 + min_val.abs());
    let members: Vec<DVector<f64>> =
        pool.into_iter().filter(|(v, _)| *v <= min_val + delta).map(|(_, p)| p).collect();
    if members.len() <= cap {
        return Ok(members);
    }
    let stride = members.len().div_ceil(cap);
    Ok(members.into_iter().step_by(stride).collect())
}

/// Hypothesis summary attached to a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisFlags {
    pub slow: bool,
    #[serde(rename = "in_L2")]
    pub in_l2: bool,
    pub h2_k: Option<f64>,
    pub h1_model_r: Option<f64>,
}

/// Post-run convergence report; serializes to the flat `report.json` layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// Minimal-norm minimizer the slow regime selects.
    pub target: Vec<f64>,
    pub dist_to_target: f64,
    pub phi_gap: f64,
    pub v_norm_final: f64,
    /// `||x(T) - y(T)||`; equals `mu * v_norm_final`, so it vanishes
    /// together with the final subgradient.
    pub xy_gap_final: f64,
    /// `theta(y(T)) / eps(T)`; `None` when `eps(T) = 0`.
    pub theta_over_eps_final: Option<f64>,
    pub theta_integral: f64,
    /// Trapezoid estimate of `int ||y'||^2`.
    pub energy_sum: f64,
    /// Certified upper bound on the energy integral; `None` when `f(0)` is
    /// infinite (the certificate needs a finite anchor value at the origin).
    pub energy_bound: Option<f64>,
    pub hypothesis_flags: HypothesisFlags,
}

fn trapezoid(samples: &[(f64, f64)]) -> f64 {
    samples
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

/// Builds the full convergence report for a finished trajectory.
///
/// `f`, `mu`, `s` must be the data the trajectory was integrated with. The
/// minimal-norm target uses the analytic oracle with brute fallback; the
/// growth-model estimate is attempted for `dim <= 3` on the zero-min
/// normalization of `f` and reported as `None` above that.
pub fn convergence_report(
    traj: &Trajectory,
    f: &ConvexFunction,
    mu: f64,
    s: &Schedule,
) -> Result<Report> {
    if traj.samples.is_empty() {
        return Err(Error::InvalidParameter("convergence_report: empty trajectory".into()));
    }
    let target = min_norm_target(f)?;
    let inf = f.infimum()?;
    let last = traj.last();
    let first = &traj.samples[0];
    let t_end = last.t;

    // theta and energy series from stored sample fields: one envelope value
    // needs only phi_x and ||y - x||
    let theta_series: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .map(|smp| {
            let env = smp.phi_x + (&smp.y - &smp.x).norm_squared() / (2.0 * mu);
            (smp.t, mu * env)
        })
        .collect();
    let energy_series: Vec<(f64, f64)> =
        traj.samples.iter().map(|smp| (smp.t, smp.ydot_norm * smp.ydot_norm)).collect();

    let eps_end = s.eval(t_end);
    let theta_end = theta_series.last().expect("non-empty").1;
    let theta0 = theta_series[0].1;

    let energy_bound = match f.evaluate(&DVector::zeros(f.dim()))? {
        ExtReal::Finite(phi0) => {
            let m = -mu * mu * phi0;
            let psi0 = 0.5 * first.y.norm_squared() - theta0;
            let cap_psi0 = mu * psi0;
            Some(theta0 + s.eval(0.0) * cap_psi0 + m.abs() * eps_end + m * (eps_end - s.eval(0.0)))
        }
        ExtReal::PosInf => None,
    };

    let cls = s.classify();
    let h1_model_r = if f.dim() <= 3 {
        let g = f.shift_to_zero_min()?;
        let ppa = if f.dim() == 3 { 101 } else { 401 };
        let c_points = argmin_samples(&g, BRUTE_HALF_WIDTH, ppa, 512)?;
        if c_points.is_empty() {
            None
        } else {
            h1_model_check(&g, s, &c_points, &H1Grid::default())?.r
        }
    } else {
        None
    };

    Ok(Report {
        target: target.iter().cloned().collect(),
        dist_to_target: (&last.x - &target).norm(),
        phi_gap: last.phi_x - inf,
        v_norm_final: last.v.norm(),
        xy_gap_final: (&last.y - &last.x).norm(),
        theta_over_eps_final: if eps_end > 0.0 { Some(theta_end / eps_end) } else { None },
        theta_integral: trapezoid(&theta_series),
        energy_sum: trapezoid(&energy_series),
        energy_bound,
        hypothesis_flags: HypothesisFlags {
            slow: cls.slow,
            in_l2: cls.in_l2,
            h2_k: s.h2_constant(),
            h1_model_r,
        },
    })
}

/// Integrates the Newton-type flow from several initial pairs under one
/// schedule and returns the final `x` of each run.
///
/// Intended for contrasting regimes: under a fast schedule the limits keep a
/// memory of where they started, under a slow one they collapse onto the
/// minimal-norm minimizer. Nothing is enforced about the schedule class or
/// the number of initializations; a control call with a slow schedule or a
/// single start is legitimate.
pub fn limit_dependence_probe(
    f: &ConvexFunction,
    mu: f64,
    s: &Schedule,
    inits: &[(DVector<f64>, DVector<f64>)],
    horizon: f64,
    integrator: IntegratorSettings,
) -> Result<Vec<DVector<f64>>> {
    let mut finals = Vec::with_capacity(inits.len());
    for (x0, v0) in inits {
        let spec = DynamicSpec {
            flow: Flow::RnTikhonov,
            f: f.clone(),
            mu,
            schedule: *s,
            x0: x0.clone(),
            v0: v0.clone(),
            horizon,
            integrator,
        };
        let traj = dynamics::integrate(&spec)?;
        finals.push(traj.last().x.clone());
    }
    Ok(finals)
}
