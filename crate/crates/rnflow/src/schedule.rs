//! Tikhonov decay schedules `epsilon(t)` and the hypothesis checks that
//! decide which convergence regime a run sits in.
//!
//! A schedule is *slow* when `int_0^inf epsilon = +inf` (the flow inherits
//! the minimal-norm solution) and *fast* otherwise (the limit depends on the
//! initial condition). Square integrability and the differential inequality
//! `d/dt epsilon >= -k epsilon^2` are the other two hypotheses consumed by
//! the diagnostics.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::convex::{ConvexFunction, ExtReal};
use crate::error::{Error, Result};

/// Decay schedule `epsilon: [0, inf) -> [0, inf)`.
///
/// Deserialization does not validate; call [`Schedule::validate`] on any
/// externally sourced value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum Schedule {
    /// `epsilon(t) = c (1 + t)^(-p)`, `c > 0`, `p >= 0`.
    Power { c: f64, p: f64 },
    /// `epsilon(t) = c`, `c > 0`.
    Constant { c: f64 },
    /// `epsilon(t) = 0`: the uncontrolled flow.
    Zero,
}

/// Integrability classification of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleClass {
    /// `int_0^inf epsilon = +inf`.
    pub slow: bool,
    /// `int_0^inf epsilon^2 < +inf`.
    pub in_l2: bool,
}

impl Schedule {
    pub fn power(c: f64, p: f64) -> Result<Self> {
        let s = Schedule::Power { c, p };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(c: f64) -> Result<Self> {
        let s = Schedule::Constant { c };
        s.validate()?;
        Ok(s)
    }

    pub fn zero() -> Self {
        Schedule::Zero
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Power { c, p } => {
                if !c.is_finite() || c <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "schedule: c must be finite and positive, got {c}"
                    )));
                }
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "schedule: p must be finite and nonnegative, got {p}"
                    )));
                }
            }
            Schedule::Constant { c } => {
                if !c.is_finite() || c <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "schedule: c must be finite and positive, got {c}"
                    )));
                }
            }
            Schedule::Zero => {}
        }
        Ok(())
    }

    /// `epsilon(t)` for `t >= 0`.
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Schedule::Power { c, p } => c * (1.0 + t).powf(-p),
            Schedule::Constant { c } => c,
            Schedule::Zero => 0.0,
        }
    }

    /// `d/dt epsilon(t)`.
    pub fn deriv(&self, t: f64) -> f64 {
        match *self {
            Schedule::Power { c, p } => -c * p * (1.0 + t).powf(-p - 1.0),
            Schedule::Constant { .. } | Schedule::Zero => 0.0,
        }
    }

    /// `int_0^T epsilon(t) dt`, exact in closed form.
    pub fn integral(&self, t_end: f64) -> f64 {
        match *self {
            Schedule::Power { c, p } => {
                let q = 1.0 - p;
                if q == 0.0 {
                    c * t_end.ln_1p()
                } else {
                    // exp_m1 keeps precision for p near 1
                    c * (q * t_end.ln_1p()).exp_m1() / q
                }
            }
            Schedule::Constant { c } => c * t_end,
            Schedule::Zero => 0.0,
        }
    }

    /// Slow/fast and square-integrability flags, from the closed-form
    /// integrals rather than any numeric quadrature.
    pub fn classify(&self) -> ScheduleClass {
        match *self {
            Schedule::Power { p, .. } => ScheduleClass { slow: p <= 1.0, in_l2: p > 0.5 },
            Schedule::Constant { .. } => ScheduleClass { slow: true, in_l2: false },
            Schedule::Zero => ScheduleClass { slow: false, in_l2: true },
        }
    }

    /// Smallest `k >= 0` with `d/dt epsilon >= -k epsilon^2` for all `t >= 0`,
    /// or `None` when no such constant exists.
    ///
    /// For the power family the infimum of `-deriv / epsilon^2` over `t` is
    /// `p / c` exactly when `p <= 1` and unbounded when `p > 1`.
    pub fn h2_constant(&self) -> Option<f64> {
        match *self {
            Schedule::Power { c, p } => {
                if p <= 1.0 {
                    Some(p / c)
                } else {
                    None
                }
            }
            Schedule::Constant { .. } | Schedule::Zero => Some(0.0),
        }
    }
}

/// Candidate grid for [`h1_model_check`].
#[derive(Debug, Clone, Copy)]
pub struct H1Grid {
    /// Half-width of the sampling box around the solution-set centroid.
    pub half_width: f64,
    /// Points per axis; candidates number `points_per_axis^dim`.
    pub points_per_axis: usize,
}

impl Default for H1Grid {
    fn default() -> Self {
        H1Grid { half_width: 3.0, points_per_axis: 41 }
    }
}

/// Outcome of the growth-model estimate.
#[derive(Debug, Clone)]
pub struct H1Report {
    /// Grid estimate `r = min 2 f(x) / dist(x, C)^2` over off-minimum
    /// candidates, when any exist.
    pub r: Option<f64>,
    /// Whether the quadratic-growth route to the summability hypothesis is
    /// certified: a positive `r` together with a square-integrable schedule.
    pub holds: bool,
    /// Present exactly when `holds` is false.
    pub diagnostic: Option<String>,
}

/// Estimates the quadratic-growth constant in `f >= (r/2) dist(., C)^2` on a
/// grid and combines it with square-integrability of the schedule.
///
/// `f` must be normalized to `min f = 0` (membership in `C` is decided by
/// `f(x) <= 1e-7`); `c_points` are samples of the solution set. Candidates
/// closer to `C` than twice the grid spacing are skipped, since the distance
/// estimate is only as sharp as the sampling of `C`. Supports `dim <= 3`.
pub fn h1_model_check(
    f: &ConvexFunction,
    s: &Schedule,
    c_points: &[DVector<f64>],
    grid: &H1Grid,
) -> Result<H1Report> {
    let n = f.dim();
    if n > 3 {
        return Err(Error::InvalidParameter(format!(
            "h1_model_check: grids are supported up to dim 3, got {n}"
        )));
    }
    if c_points.is_empty() {
        return Err(Error::InvalidParameter("h1_model_check: no solution-set samples".into()));
    }
    for c in c_points {
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: c.len() });
        }
    }
    if grid.points_per_axis < 2 || !grid.half_width.is_finite() || grid.half_width <= 0.0 {
        return Err(Error::InvalidParameter("h1_model_check: degenerate grid".into()));
    }

    let mut center = DVector::zeros(n);
    for c in c_points {
        center += c;
    }
    center /= c_points.len() as f64;

    let ppa = grid.points_per_axis;
    let spacing = 2.0 * grid.half_width / (ppa - 1) as f64;
    let in_l2 = s.classify().in_l2;

    let mut r_hat = f64::INFINITY;
    let mut idx = vec![0usize; n];
    let mut x = DVector::zeros(n);
    loop {
        for d in 0..n {
            x[d] = center[d] - grid.half_width + spacing * idx[d] as f64;
        }
        if let ExtReal::Finite(fx) = f.evaluate(&x)? {
            if fx > 1e-7 {
                let dist = c_points.iter().map(|c| (&x - c).norm()).fold(f64::INFINITY, f64::min);
                if dist >= 2.0 * spacing {
                    r_hat = r_hat.min(2.0 * fx / (dist * dist));
                }
            }
        }
        // odometer increment over the n-dim index
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

    if !r_hat.is_finite() {
        return Ok(H1Report {
            r: None,
            holds: in_l2,
            diagnostic: if in_l2 {
                None
            } else {
                Some("schedule is not square-integrable".into())
            },
        });
    }
    let holds = r_hat > 0.0 && in_l2;
    let diagnostic = if holds {
        None
    } else if !in_l2 {
        Some("schedule is not square-integrable".into())
    } else {
        Some(format!("growth estimate r = {r_hat:.3e} is not positive"))
    };
    Ok(H1Report { r: Some(r_hat), holds, diagnostic })
}
