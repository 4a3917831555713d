//! Moreau envelope, Yosida approximation, and the potential `psi` whose
//! gradient is the proximal map.
//!
//! For `mu > 0`:
//!
//! - `envelope(y)  = f(prox_{mu f}(y)) + ||y - prox(y)||^2 / (2 mu)`
//! - `yosida(y)    = (y - prox(y)) / mu`, a `(1/mu)`-Lipschitz selection of
//!   the subdifferential at `prox(y)`
//! - `psi(y)       = ||y||^2 / 2 - mu * envelope(y)`, convex with
//!   `grad psi = prox_{mu f}`
//! - `theta(y)     = mu * envelope(y)`, the Lyapunov weight used by the flows
//!
//! All quantities come from one prox evaluation; no finite differencing or
//! inner solve is involved.

use nalgebra::DVector;

use crate::convex::{ConvexFunction, ExtReal};
use crate::error::{Error, Result};

/// Moreau envelope `f_mu(y)`; finite for every `y` on this algebra.
pub fn envelope(f: &ConvexFunction, mu: f64, y: &DVector<f64>) -> Result<f64> {
    let x = f.prox(mu, y)?;
    match f.evaluate(&x)? {
        ExtReal::Finite(fx) => Ok(fx + (y - x).norm_squared() / (2.0 * mu)),
        ExtReal::PosInf => Err(Error::NonFiniteValue(
            "moreau envelope: f(prox(y)) is not finite".into(),
        )),
    }
}

/// Yosida approximation `(y - prox_{mu f}(y)) / mu`.
pub fn yosida(f: &ConvexFunction, mu: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
    let x = f.prox(mu, y)?;
    Ok((y - x) / mu)
}

/// `theta(y) = mu * f_mu(y)`.
pub fn theta(f: &ConvexFunction, mu: f64, y: &DVector<f64>) -> Result<f64> {
    Ok(mu * envelope(f, mu, y)?)
}

/// `psi(y) = ||y||^2 / 2 - mu * f_mu(y)`.
pub fn psi(f: &ConvexFunction, mu: f64, y: &DVector<f64>) -> Result<f64> {
    Ok(0.5 * y.norm_squared() - mu * envelope(f, mu, y)?)
}

/// `psi` through the conjugate instead of the envelope:
/// `psi(y) = mu f*(v) + ||x||^2 / 2` with `x = prox(y)`, `v = yosida(y)`.
///
/// Independent of [`psi`] up to the Fenchel equality at `(x, v)`; kept public
/// as a cross-check route.
pub fn psi_via_conjugate(f: &ConvexFunction, mu: f64, y: &DVector<f64>) -> Result<f64> {
    let x = f.prox(mu, y)?;
    let v = (y - &x) / mu;
    match f.conjugate(&v)? {
        ExtReal::Finite(fv) => Ok(mu * fv + 0.5 * x.norm_squared()),
        ExtReal::PosInf => Err(Error::NonFiniteValue(
            "psi_via_conjugate: f*(yosida(y)) is not finite".into(),
        )),
    }
}

/// Max-norm gap between a central finite difference of `psi` and the prox at
/// `y`. Small values certify `grad psi = prox` numerically; `h` should keep
/// `y` at least `10 h` away from prox breakpoints for the quadratic-order
/// bound to apply.
pub fn grad_psi_discrepancy(f: &ConvexFunction, mu: f64, y: &DVector<f64>, h: f64) -> Result<f64> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidParameter(format!("h must be finite and positive, got {h}")));
    }
    let x = f.prox(mu, y)?;
    let mut worst = 0.0f64;
    let mut yp = y.clone();
    for i in 0..y.len() {
        yp[i] = y[i] + h;
        let up = psi(f, mu, &yp)?;
        yp[i] = y[i] - h;
        let dn = psi(f, mu, &yp)?;
        yp[i] = y[i];
        worst = worst.max(((up - dn) / (2.0 * h) - x[i]).abs());
    }
    Ok(worst)
}
