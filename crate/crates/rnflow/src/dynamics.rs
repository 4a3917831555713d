//! First-order flows in the lifted variable `y = x + mu v` and a
//! deterministic fixed-step integrator.
//!
//! With `x = prox_{mu f}(y)` and `v = yosida(y) = (y - x) / mu`, the pair
//! `(x, v)` traces a solution of the regularized Newton-type inclusion
//!
//! ```text
//! lambda x'(t) + v'(t) + v(t) + eps(t) x(t) = 0,   v(t) in df(x(t)),
//! ```
//!
//! with `lambda = 1 / mu`, while `y` obeys the Lipschitz ODE
//!
//! ```text
//! y' = -mu yosida(y) - mu eps(t) prox(y)        (rn_tikhonov)
//! ```
//!
//! The steepest-descent control variant replaces the prox term by the state
//! itself:
//!
//! ```text
//! y' = -mu yosida(y) - eps(t) y                 (sdc)
//! ```
//!
//! Both right-hand sides cost exactly one prox evaluation. Integration is
//! classical fixed-step RK4: bit-for-bit deterministic, `4 T / h + O(1)`
//! right-hand-side evaluations, no adaptivity.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::convex::{ConvexFunction, ExtReal};
use crate::error::{Error, Result};
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flow {
    /// Regularized Newton flow with Tikhonov term `mu eps(t) prox(y)`.
    RnTikhonov,
    /// Steepest-descent control: Tikhonov term `eps(t) y` on the lifted state.
    Sdc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    /// Fixed RK4 step.
    pub step: f64,
    /// Record every `sample_stride`-th step (plus the endpoints).
    pub sample_stride: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings { step: 1e-3, sample_stride: 10 }
    }
}

/// A fully specified initial value problem for one of the two flows.
///
/// `v0` must be a subgradient of `f` at `x0`; [`DynamicSpec::validate`]
/// enforces this through the Fenchel equality, so the lifted initial state
/// `y0 = x0 + mu v0` recovers `(x0, v0)` exactly.
///
/// `f` is conventionally pre-shifted so that `min f = 0` (see
/// [`ConvexFunction::shift_to_zero_min`]); integration works either way, but
/// the envelope-based diagnostics read `theta` as a distance from optimality,
/// which only holds under that normalization.
#[derive(Debug, Clone)]
pub struct DynamicSpec {
    pub flow: Flow,
    pub f: ConvexFunction,
    pub mu: f64,
    pub schedule: Schedule,
    pub x0: DVector<f64>,
    pub v0: DVector<f64>,
    pub horizon: f64,
    pub integrator: IntegratorSettings,
}

impl DynamicSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || self.mu <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "mu must be finite and positive, got {}",
                self.mu
            )));
        }
        self.schedule.validate()?;
        let n = self.f.dim();
        if self.x0.len() != n {
            return Err(Error::InvalidConfig(format!(
                "x0 has length {}, problem dimension is {n}",
                self.x0.len()
            )));
        }
        if self.v0.len() != n {
            return Err(Error::InvalidConfig(format!(
                "v0 has length {}, problem dimension is {n}",
                self.v0.len()
            )));
        }
        if !self.horizon.is_finite() || self.horizon < 0.0 {
            return Err(Error::InvalidConfig(format!("T must be finite and >= 0, got {}", self.horizon)));
        }
        let h = self.integrator.step;
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::InvalidConfig(format!("h must be finite and positive, got {h}")));
        }
        if self.integrator.sample_stride == 0 {
            return Err(Error::InvalidConfig("sample_stride must be >= 1".into()));
        }

        let fx = self.f.evaluate(&self.x0)?;
        let fv = self.f.conjugate(&self.v0)?;
        match (fx, fv) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                let gap = (a + b - self.x0.dot(&self.v0)).abs();
                if gap > 1e-7 {
                    return Err(Error::InvalidConfig(format!(
                        "v0 not a subgradient at x0 (Fenchel gap {gap:.3e} exceeds 1e-7)"
                    )));
                }
            }
            (ExtReal::PosInf, _) => {
                return Err(Error::InvalidConfig(
                    "v0 not a subgradient at x0 (f(x0) is infinite: x0 is infeasible)".into(),
                ));
            }
            (_, ExtReal::PosInf) => {
                return Err(Error::InvalidConfig(
                    "v0 not a subgradient at x0 (f*(v0) is infinite)".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn y0(&self) -> DVector<f64> {
        &self.x0 + self.mu * &self.v0
    }
}

/// Right-hand side of the regularized Newton flow with Tikhonov decay.
pub fn rhs_rn(
    f: &ConvexFunction,
    mu: f64,
    s: &Schedule,
    t: f64,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    let x = f.prox(mu, y)?;
    let eps = s.eval(t);
    // -mu v - mu eps x  with  v = (y - x) / mu
    Ok(&x - y - (mu * eps) * &x)
}

/// Right-hand side of the steepest-descent control flow.
pub fn rhs_sdc(
    f: &ConvexFunction,
    mu: f64,
    s: &Schedule,
    t: f64,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    let x = f.prox(mu, y)?;
    Ok(&x - y - s.eval(t) * y)
}

fn rhs(spec: &DynamicSpec, t: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
    match spec.flow {
        Flow::RnTikhonov => rhs_rn(&spec.f, spec.mu, &spec.schedule, t, y),
        Flow::Sdc => rhs_sdc(&spec.f, spec.mu, &spec.schedule, t, y),
    }
}

/// One recorded state: the lifted `y`, the recovered pair `(x, v)`, and the
/// scalars consumed by the diagnostics.
#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub y: DVector<f64>,
    pub x: DVector<f64>,
    pub v: DVector<f64>,
    pub phi_x: f64,
    pub norm_x: f64,
    pub ydot_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dim: usize,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    /// Final recorded sample; a trajectory is never empty.
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    /// Recorded sample closest in time to `t`.
    pub fn nearest(&self, t: f64) -> &Sample {
        self.samples
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("trajectory has at least one sample")
    }

    /// Writes the `t, y_*, x_*, v_*, phi_x, norm_x, ydot_norm` table with 17
    /// significant digits per value.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = String::from("t");
        for tag in ["y", "x", "v"] {
            for i in 0..self.dim {
                header.push_str(&format!(",{tag}_{i}"));
            }
        }
        header.push_str(",phi_x,norm_x,ydot_norm");
        writeln!(w, "{header}")?;
        for s in &self.samples {
            let mut row = format!("{:.16e}", s.t);
            for vecs in [&s.y, &s.x, &s.v] {
                for i in 0..self.dim {
                    row.push_str(&format!(",{:.16e}", vecs[i]));
                }
            }
            row.push_str(&format!(
                ",{:.16e},{:.16e},{:.16e}",
                s.phi_x, s.norm_x, s.ydot_norm
            ));
            writeln!(w, "{row}")?;
        }
        Ok(())
    }
}

/// Integrates the flow from `t = 0` to the horizon with fixed-step RK4.
///
/// The horizon is realized as `n h` with `n = round(T / h)`. Each recorded
/// sample reuses the step's first stage for `ydot_norm`, so the total
/// right-hand-side evaluation count stays at `4 n + 1`. Aborts with
/// [`Error::NonFiniteState`] if the state leaves the finite range.
pub fn integrate(spec: &DynamicSpec) -> Result<Trajectory> {
    spec.validate()?;
    let h = spec.integrator.step;
    let stride = spec.integrator.sample_stride as u64;
    let n_steps = (spec.horizon / h).round() as u64;
    let dim = spec.f.dim();

    let mut y = spec.y0();
    let mut samples =
        Vec::with_capacity((n_steps / stride.max(1)) as usize + 2);

    for step in 0..=n_steps {
        let t = step as f64 * h;
        let k1 = rhs(spec, t, &y)?;
        if step % stride == 0 || step == n_steps {
            let x = spec.f.prox(spec.mu, &y)?;
            let v = (&y - &x) / spec.mu;
            let phi_x = match spec.f.evaluate(&x)? {
                ExtReal::Finite(val) => val,
                ExtReal::PosInf => {
                    return Err(Error::NonFiniteValue(format!(
                        "trajectory sample at t = {t}: f(x) is infinite"
                    )))
                }
            };
            samples.push(Sample {
                t,
                norm_x: x.norm(),
                ydot_norm: k1.norm(),
                y: y.clone(),
                x,
                v,
                phi_x,
            });
        }
        if step == n_steps {
            break;
        }
        let k2 = rhs(spec, t + 0.5 * h, &(&y + (0.5 * h) * &k1))?;
        let k3 = rhs(spec, t + 0.5 * h, &(&y + (0.5 * h) * &k2))?;
        let k4 = rhs(spec, t + h, &(&y + h * &k3))?;
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if y.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteState { t: t + h });
        }
    }

    Ok(Trajectory { dim, samples })
}

/// Max-norm residual of the original inclusion
/// `lambda x' + v' + v + eps x = 0` over interior samples, with `x'` and `v'`
/// from centered differences on the recorded grid.
///
/// `lambda` must be the reciprocal of the `mu` the trajectory was built with;
/// then `lambda x + v = y / mu` holds exactly and the finite-difference
/// errors of the two nonsmooth derivatives cancel, so the residual stays
/// small even when the path crosses prox kinks. Only uniformly spaced sample
/// triples enter (the final stride can be shorter).
pub fn residual_original(traj: &Trajectory, lambda: f64, s: &Schedule) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite and positive, got {lambda}"
        )));
    }
    if traj.samples.len() < 3 {
        return Err(Error::InvalidParameter(
            "residual_original: need at least 3 samples".into(),
        ));
    }
    let mut worst: Option<f64> = None;
    for i in 1..traj.samples.len() - 1 {
        let (prev, cur, next) = (&traj.samples[i - 1], &traj.samples[i], &traj.samples[i + 1]);
        let dl = cur.t - prev.t;
        let dr = next.t - cur.t;
        if (dl - dr).abs() > 1e-9 * dl.max(dr) {
            continue;
        }
        let span = next.t - prev.t;
        let xdot = (&next.x - &prev.x) / span;
        let vdot = (&next.v - &prev.v) / span;
        let r = (lambda * xdot + vdot + &cur.v + s.eval(cur.t) * &cur.x).norm();
        worst = Some(worst.map_or(r, |w: f64| w.max(r)));
    }
    worst.ok_or_else(|| {
        Error::InvalidParameter("residual_original: no uniformly spaced sample triple".into())
    })
}
