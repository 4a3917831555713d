//! Extended-real-valued convex functions with exact prox and conjugate rules.
//!
//! The algebra is a closed set of atoms (quadratics, l1-type penalties,
//! indicators of boxes / halfspaces / affine sets, the half squared distance
//! to a box, weighted 1D sums of absolute deviations) and combinators
//! (translation, linear tilt, positive scaling, value shift, separable sum).
//! Every member has a closed-form proximal map and conjugate, so downstream
//! flows never touch an inner iterative solver.
//!
//! Values live in `(-inf, +inf]` via [`ExtReal`]; `+inf` encodes constraint
//! violation, never a numerical failure.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance for membership tests in indicator functions and
/// conjugate domain checks. Projections land on faces up to rounding; without
/// a tolerance, `f(prox(y))` of an indicator would be spuriously `+inf`.
const FEAS_REL: f64 = 1e-9;

/// Relative eigenvalue / singular value threshold below which a direction is
/// treated as belonging to the kernel.
const RANK_REL: f64 = 1e-10;

/// A value in `(-inf, +inf]`.
///
/// `Finite` always holds a finite `f64`; construct through [`ExtReal::from_f64`]
/// when the source might overflow. The derived ordering puts every finite
/// value below `PosInf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    /// Maps `+inf` to `PosInf`. `v` must not be NaN or `-inf`.
    pub fn from_f64(v: f64) -> Self {
        debug_assert!(!v.is_nan(), "ExtReal from NaN");
        debug_assert!(v != f64::NEG_INFINITY, "ExtReal from -inf");
        if v.is_finite() {
            ExtReal::Finite(v)
        } else {
            ExtReal::PosInf
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn value(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// Collapses to `f64`, with `PosInf -> f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }
}

impl std::ops::Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::from_f64(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl std::fmt::Display for ExtReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "+inf"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct QuadraticData {
    pub(crate) a: DMatrix<f64>,
    pub(crate) b: DVector<f64>,
    pub(crate) c: f64,
    /// Eigendecomposition of `a` (symmetrized); eigenvalues clamped to `>= 0`.
    pub(crate) eigvals: DVector<f64>,
    pub(crate) eigvecs: DMatrix<f64>,
}

impl QuadraticData {
    pub(crate) fn lambda_max(&self) -> f64 {
        self.eigvals.iter().cloned().fold(0.0, f64::max)
    }

    pub(crate) fn is_positive_definite(&self) -> bool {
        let tol = self.rank_tol();
        self.eigvals.iter().all(|&l| l > tol)
    }

    fn rank_tol(&self) -> f64 {
        RANK_REL * self.lambda_max().max(1.0)
    }

    /// Minimal-norm solution of `a x = w`, or `None` if `w` has a component
    /// outside the range of `a`.
    pub(crate) fn solve_min_norm(&self, w: &DVector<f64>) -> Option<DVector<f64>> {
        let tol = self.rank_tol();
        let z = self.eigvecs.transpose() * w;
        let mut out = DVector::zeros(z.len());
        let mut off_range2 = 0.0;
        for i in 0..z.len() {
            if self.eigvals[i] > tol {
                out[i] = z[i] / self.eigvals[i];
            } else {
                off_range2 += z[i] * z[i];
            }
        }
        if off_range2.sqrt() <= 1e-8 * (1.0 + w.norm()) {
            Some(&self.eigvecs * out)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct AffineData {
    pub(crate) a: DMatrix<f64>,
    pub(crate) b: DVector<f64>,
    /// Minimal-norm solution of `a x = b`.
    pub(crate) xbar: DVector<f64>,
    /// Moore-Penrose pseudoinverse of `a`.
    pub(crate) pinv: DMatrix<f64>,
    /// Orthonormal columns spanning the row space of `a`.
    pub(crate) row_basis: DMatrix<f64>,
    pub(crate) a_scale: f64,
}

#[derive(Debug, Clone)]
pub(crate) enum Kind {
    Quadratic(QuadraticData),
    AbsValue,
    NormOne {
        dim: usize,
    },
    IndicatorBox {
        lo: DVector<f64>,
        hi: DVector<f64>,
    },
    IndicatorHalfspace {
        a: DVector<f64>,
        beta: f64,
        a_norm2: f64,
    },
    IndicatorAffine(AffineData),
    HalfSqDistToBox {
        lo: DVector<f64>,
        hi: DVector<f64>,
    },
    /// `x -> sum_k w_k |x - a_k|` on the line; anchors strictly increasing.
    SumAbs {
        anchors: Vec<f64>,
        weights: Vec<f64>,
        w_total: f64,
    },
    Translate {
        inner: Box<ConvexFunction>,
        shift: DVector<f64>,
    },
    AddLinear {
        inner: Box<ConvexFunction>,
        slope: DVector<f64>,
    },
    Scale {
        inner: Box<ConvexFunction>,
        alpha: f64,
    },
    ShiftValue {
        inner: Box<ConvexFunction>,
        offset: f64,
    },
    SeparableSum {
        blocks: Vec<ConvexFunction>,
        dim: usize,
    },
}

/// A proper closed convex function `f: R^n -> (-inf, +inf]` from the
/// registered algebra.
///
/// Construct through the associated functions ([`ConvexFunction::quadratic`],
/// [`ConvexFunction::indicator_box`], ...) and compose with the combinator
/// methods ([`ConvexFunction::translate`], [`ConvexFunction::scale`], ...).
/// Constructors validate their data; there is no way to build an invalid
/// instance.
#[derive(Debug, Clone)]
pub struct ConvexFunction {
    kind: Kind,
}

fn require_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

fn require_finite_vec(name: &str, v: &DVector<f64>) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidFunction(format!("{name} has a non-finite entry")))
    }
}

fn require_positive_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("mu must be finite and positive, got {mu}")))
    }
}

fn soft_threshold(y: f64, t: f64) -> f64 {
    if y > t {
        y - t
    } else if y < -t {
        y + t
    } else {
        0.0
    }
}

fn clamp_to(lo: &DVector<f64>, hi: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(x.len(), |i, _| x[i].clamp(lo[i], hi[i]))
}

/// Support function of the box `[lo, hi]`: `sum_i max(z_i lo_i, z_i hi_i)`.
fn box_support(lo: &DVector<f64>, hi: &DVector<f64>, z: &DVector<f64>) -> f64 {
    (0..z.len()).map(|i| (z[i] * lo[i]).max(z[i] * hi[i])).sum()
}

impl ConvexFunction {
    // ----- atoms -----------------------------------------------------------

    /// `x -> 1/2 <A x, x> + <b, x> + c` with `A` symmetric positive
    /// semidefinite. `A` is symmetrized; genuine asymmetry or a negative
    /// eigenvalue is rejected.
    pub fn quadratic(a: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        let n = b.len();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::InvalidFunction(format!(
                "quadratic: A is {}x{} but b has length {n}",
                a.nrows(),
                a.ncols()
            )));
        }
        if !c.is_finite() || a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidFunction("quadratic: non-finite entry".into()));
        }
        require_finite_vec("quadratic: b", &b)?;
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let asym = (&a - a.transpose()).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if asym > 1e-9 * (1.0 + scale) {
            return Err(Error::InvalidFunction(format!(
                "quadratic: A is not symmetric (max |A - A^T| = {asym:.3e})"
            )));
        }
        let sym = (&a + a.transpose()) * 0.5;
        let eig = sym.clone().symmetric_eigen();
        let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if lambda_min < -1e-10 * lambda_max.max(1.0) {
            return Err(Error::InvalidFunction(format!(
                "quadratic: A is not positive semidefinite (min eigenvalue {lambda_min:.3e})"
            )));
        }
        let eigvals = eig.eigenvalues.map(|l| l.max(0.0));
        Ok(Self {
            kind: Kind::Quadratic(QuadraticData {
                a: sym,
                b,
                c,
                eigvals,
                eigvecs: eig.eigenvectors,
            }),
        })
    }

    /// `x -> |x|` on the line.
    pub fn abs_value() -> Self {
        Self { kind: Kind::AbsValue }
    }

    /// `x -> sum_i |x_i|`.
    pub fn norm_one(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFunction("norm_one: dim must be >= 1".into()));
        }
        Ok(Self { kind: Kind::NormOne { dim } })
    }

    /// Indicator of the box `{x : lo <= x <= hi}`.
    pub fn indicator_box(lo: DVector<f64>, hi: DVector<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidFunction(format!(
                "indicator_box: lo has length {}, hi has length {}",
                lo.len(),
                hi.len()
            )));
        }
        require_finite_vec("indicator_box: lo", &lo)?;
        require_finite_vec("indicator_box: hi", &hi)?;
        for i in 0..lo.len() {
            if lo[i] > hi[i] {
                return Err(Error::InvalidFunction(format!(
                    "indicator_box: lo[{i}] = {} exceeds hi[{i}] = {}",
                    lo[i], hi[i]
                )));
            }
        }
        Ok(Self { kind: Kind::IndicatorBox { lo, hi } })
    }

    /// Indicator of `{x : <a, x> <= beta}` with `a != 0`.
    pub fn indicator_halfspace(a: DVector<f64>, beta: f64) -> Result<Self> {
        require_finite_vec("indicator_halfspace: a", &a)?;
        if !beta.is_finite() {
            return Err(Error::InvalidFunction("indicator_halfspace: beta is not finite".into()));
        }
        let a_norm2 = a.norm_squared();
        if a.is_empty() || a_norm2 == 0.0 {
            return Err(Error::InvalidFunction("indicator_halfspace: a must be nonzero".into()));
        }
        Ok(Self { kind: Kind::IndicatorHalfspace { a, beta, a_norm2 } })
    }

    /// Indicator of `{x : A x = b}`. Rejects an infeasible system.
    pub fn indicator_affine(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let (m, n) = (a.nrows(), a.ncols());
        if m == 0 || n == 0 || b.len() != m {
            return Err(Error::InvalidFunction(format!(
                "indicator_affine: A is {m}x{n} but b has length {}",
                b.len()
            )));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidFunction("indicator_affine: A has a non-finite entry".into()));
        }
        require_finite_vec("indicator_affine: b", &b)?;
        let svd = a.clone().svd(true, true);
        let u = svd.u.expect("svd with u");
        let v_t = svd.v_t.expect("svd with v_t");
        let sigma = &svd.singular_values;
        let s_max = sigma.iter().cloned().fold(0.0f64, f64::max);
        let tol = RANK_REL * s_max.max(1.0);
        let kept: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > tol).collect();
        let mut pinv = DMatrix::zeros(n, m);
        let mut row_basis = DMatrix::zeros(n, kept.len());
        for (j, &i) in kept.iter().enumerate() {
            let vi = v_t.row(i).transpose();
            pinv += (1.0 / sigma[i]) * &vi * u.column(i).transpose();
            row_basis.set_column(j, &vi);
        }
        let xbar = &pinv * &b;
        let resid = (&a * &xbar - &b).norm();
        if resid > 1e-8 * (1.0 + b.norm() + s_max * xbar.norm()) {
            return Err(Error::InvalidFunction(format!(
                "indicator_affine: A x = b is infeasible (residual {resid:.3e})"
            )));
        }
        Ok(Self {
            kind: Kind::IndicatorAffine(AffineData { a, b, xbar, pinv, row_basis, a_scale: s_max }),
        })
    }

    /// `x -> 1/2 dist(x, [lo, hi])^2`: smooth with 1-Lipschitz gradient, zero
    /// exactly on the box.
    pub fn half_sq_dist_to_box(lo: DVector<f64>, hi: DVector<f64>) -> Result<Self> {
        let probe = Self::indicator_box(lo, hi)?;
        match probe.kind {
            Kind::IndicatorBox { lo, hi } => Ok(Self { kind: Kind::HalfSqDistToBox { lo, hi } }),
            _ => unreachable!(),
        }
    }

    /// `x -> sum_k w_k |x - a_k|` on the line, `w_k > 0`. Anchors are sorted;
    /// exact duplicates merge their weights.
    pub fn sum_abs(anchors: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if anchors.is_empty() || anchors.len() != weights.len() {
            return Err(Error::InvalidFunction(format!(
                "sum_abs: {} anchors vs {} weights",
                anchors.len(),
                weights.len()
            )));
        }
        if anchors.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidFunction("sum_abs: non-finite anchor".into()));
        }
        for (k, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::InvalidFunction(format!(
                    "sum_abs: weights[{k}] = {w} must be positive"
                )));
            }
        }
        let mut order: Vec<usize> = (0..anchors.len()).collect();
        order.sort_by(|&i, &j| anchors[i].total_cmp(&anchors[j]));
        let mut sorted_a: Vec<f64> = Vec::with_capacity(anchors.len());
        let mut sorted_w: Vec<f64> = Vec::with_capacity(anchors.len());
        for i in order {
            if sorted_a.last() == Some(&anchors[i]) {
                *sorted_w.last_mut().unwrap() += weights[i];
            } else {
                sorted_a.push(anchors[i]);
                sorted_w.push(weights[i]);
            }
        }
        let w_total = sorted_w.iter().sum();
        Ok(Self { kind: Kind::SumAbs { anchors: sorted_a, weights: sorted_w, w_total } })
    }

    // ----- combinators -----------------------------------------------------

    /// `x -> f(x - shift)`.
    pub fn translate(self, shift: DVector<f64>) -> Result<Self> {
        require_finite_vec("translate: shift", &shift)?;
        require_dim(self.dim(), shift.len())?;
        Ok(Self { kind: Kind::Translate { inner: Box::new(self), shift } })
    }

    /// `x -> f(x) + <slope, x>`.
    pub fn add_linear(self, slope: DVector<f64>) -> Result<Self> {
        require_finite_vec("add_linear: slope", &slope)?;
        require_dim(self.dim(), slope.len())?;
        Ok(Self { kind: Kind::AddLinear { inner: Box::new(self), slope } })
    }

    /// `x -> alpha f(x)` with `alpha > 0`.
    pub fn scale(self, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidFunction(format!(
                "scale: alpha must be finite and positive, got {alpha}"
            )));
        }
        Ok(Self { kind: Kind::Scale { inner: Box::new(self), alpha } })
    }

    /// `x -> f(x) + offset`.
    pub fn shift_value(self, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::InvalidFunction("shift_value: offset is not finite".into()));
        }
        Ok(Self { kind: Kind::ShiftValue { inner: Box::new(self), offset } })
    }

    /// Block-separable sum: `f(x) = sum_j f_j(x_j)` on consecutive slices.
    pub fn separable_sum(blocks: Vec<ConvexFunction>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidFunction("separable_sum: no blocks".into()));
        }
        let dim = blocks.iter().map(|b| b.dim()).sum();
        Ok(Self { kind: Kind::SeparableSum { blocks, dim } })
    }

    // ----- core ops --------------------------------------------------------

    pub(crate) fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            Kind::Quadratic(q) => q.b.len(),
            Kind::AbsValue => 1,
            Kind::NormOne { dim } => *dim,
            Kind::IndicatorBox { lo, .. } | Kind::HalfSqDistToBox { lo, .. } => lo.len(),
            Kind::IndicatorHalfspace { a, .. } => a.len(),
            Kind::IndicatorAffine(d) => d.a.ncols(),
            Kind::SumAbs { .. } => 1,
            Kind::Translate { inner, .. }
            | Kind::AddLinear { inner, .. }
            | Kind::Scale { inner, .. }
            | Kind::ShiftValue { inner, .. } => inner.dim(),
            Kind::SeparableSum { dim, .. } => *dim,
        }
    }

    /// Evaluates `f(x)` in `(-inf, +inf]`. Indicator membership is decided
    /// with a relative tolerance of about `1e-9`.
    pub fn evaluate(&self, x: &DVector<f64>) -> Result<ExtReal> {
        require_dim(self.dim(), x.len())?;
        Ok(self.eval_inner(x))
    }

    fn eval_inner(&self, x: &DVector<f64>) -> ExtReal {
        match &self.kind {
            Kind::Quadratic(q) => {
                let ax = &q.a * x;
                ExtReal::from_f64(0.5 * ax.dot(x) + q.b.dot(x) + q.c)
            }
            Kind::AbsValue => ExtReal::Finite(x[0].abs()),
            Kind::NormOne { .. } => ExtReal::from_f64(x.iter().map(|v| v.abs()).sum()),
            Kind::IndicatorBox { lo, hi } => {
                let inside = (0..x.len()).all(|i| {
                    let tol = FEAS_REL * (1.0 + lo[i].abs() + hi[i].abs() + x[i].abs());
                    x[i] >= lo[i] - tol && x[i] <= hi[i] + tol
                });
                if inside {
                    ExtReal::Finite(0.0)
                } else {
                    ExtReal::PosInf
                }
            }
            Kind::IndicatorHalfspace { a, beta, .. } => {
                let tol = FEAS_REL * (1.0 + beta.abs() + a.norm() * x.norm());
                if a.dot(x) <= beta + tol {
                    ExtReal::Finite(0.0)
                } else {
                    ExtReal::PosInf
                }
            }
            Kind::IndicatorAffine(d) => {
                let resid = (&d.a * x - &d.b).norm();
                let tol = FEAS_REL * (1.0 + d.b.norm() + d.a_scale * x.norm());
                if resid <= tol {
                    ExtReal::Finite(0.0)
                } else {
                    ExtReal::PosInf
                }
            }
            Kind::HalfSqDistToBox { lo, hi } => {
                let d2: f64 = (0..x.len())
                    .map(|i| {
                        let d = (lo[i] - x[i]).max(0.0).max(x[i] - hi[i]);
                        d * d
                    })
                    .sum();
                ExtReal::from_f64(0.5 * d2)
            }
            Kind::SumAbs { anchors, weights, .. } => ExtReal::from_f64(
                anchors.iter().zip(weights).map(|(a, w)| w * (x[0] - a).abs()).sum(),
            ),
            Kind::Translate { inner, shift } => inner.eval_inner(&(x - shift)),
            Kind::AddLinear { inner, slope } => {
                inner.eval_inner(x) + ExtReal::from_f64(slope.dot(x))
            }
            Kind::Scale { inner, alpha } => match inner.eval_inner(x) {
                ExtReal::Finite(v) => ExtReal::from_f64(alpha * v),
                ExtReal::PosInf => ExtReal::PosInf,
            },
            Kind::ShiftValue { inner, offset } => inner.eval_inner(x) + ExtReal::Finite(*offset),
            Kind::SeparableSum { blocks, .. } => {
                let mut total = 0.0;
                let mut off = 0;
                for b in blocks {
                    let n = b.dim();
                    let piece = b.eval_inner(&x.rows(off, n).into_owned());
                    match piece {
                        ExtReal::Finite(v) => total += v,
                        ExtReal::PosInf => return ExtReal::PosInf,
                    }
                    off += n;
                }
                ExtReal::from_f64(total)
            }
        }
    }

    /// Proximal map `prox_{mu f}(y) = argmin_x f(x) + ||x - y||^2 / (2 mu)`,
    /// exact for every member of the algebra.
    pub fn prox(&self, mu: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
        require_positive_mu(mu)?;
        require_dim(self.dim(), y.len())?;
        Ok(self.prox_inner(mu, y))
    }

    fn prox_inner(&self, mu: f64, y: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            Kind::Quadratic(q) => {
                // (I + mu A)^-1 (y - mu b) through the stored eigenbasis.
                let w = y - mu * &q.b;
                let mut z = q.eigvecs.transpose() * w;
                for i in 0..z.len() {
                    z[i] /= 1.0 + mu * q.eigvals[i];
                }
                &q.eigvecs * z
            }
            Kind::AbsValue => DVector::from_element(1, soft_threshold(y[0], mu)),
            Kind::NormOne { .. } => y.map(|v| soft_threshold(v, mu)),
            Kind::IndicatorBox { lo, hi } => clamp_to(lo, hi, y),
            Kind::IndicatorHalfspace { a, beta, a_norm2 } => {
                let s = a.dot(y) - beta;
                if s > 0.0 {
                    y - (s / a_norm2) * a
                } else {
                    y.clone()
                }
            }
            Kind::IndicatorAffine(d) => y - &d.pinv * (&d.a * y - &d.b),
            Kind::HalfSqDistToBox { lo, hi } => {
                let c = clamp_to(lo, hi, y);
                y + (mu / (1.0 + mu)) * (c - y)
            }
            Kind::SumAbs { anchors, weights, w_total } => {
                // Invert t -> t + mu f'(t), piecewise linear with jumps at the
                // anchors; scan image intervals left to right.
                let v = y[0];
                let mut s = -w_total;
                if v <= anchors[0] + mu * s {
                    return DVector::from_element(1, v - mu * s);
                }
                for k in 0..anchors.len() {
                    let s_next = s + 2.0 * weights[k];
                    if v <= anchors[k] + mu * s_next {
                        return DVector::from_element(1, anchors[k]);
                    }
                    if k + 1 < anchors.len() && v <= anchors[k + 1] + mu * s_next {
                        return DVector::from_element(1, v - mu * s_next);
                    }
                    s = s_next;
                }
                DVector::from_element(1, v - mu * w_total)
            }
            Kind::Translate { inner, shift } => shift + inner.prox_inner(mu, &(y - shift)),
            Kind::AddLinear { inner, slope } => inner.prox_inner(mu, &(y - mu * slope)),
            Kind::Scale { inner, alpha } => inner.prox_inner(alpha * mu, y),
            Kind::ShiftValue { inner, .. } => inner.prox_inner(mu, y),
            Kind::SeparableSum { blocks, dim } => {
                let mut out = DVector::zeros(*dim);
                let mut off = 0;
                for b in blocks {
                    let n = b.dim();
                    let piece = b.prox_inner(mu, &y.rows(off, n).into_owned());
                    out.rows_mut(off, n).copy_from(&piece);
                    off += n;
                }
                out
            }
        }
    }

    /// Fenchel conjugate `f*(z) = sup_x <z, x> - f(x)` in `(-inf, +inf]`.
    /// Domain membership (e.g. `z` in the range of `A`, `|z| <= 1`) is decided
    /// with a relative tolerance of about `1e-9`.
    pub fn conjugate(&self, z: &DVector<f64>) -> Result<ExtReal> {
        require_dim(self.dim(), z.len())?;
        Ok(self.conj_inner(z))
    }

    fn conj_inner(&self, z: &DVector<f64>) -> ExtReal {
        match &self.kind {
            Kind::Quadratic(q) => {
                // f*(z) = 1/2 <A^+ (z - b), z - b> - c on b + range(A).
                let w = z - &q.b;
                match q.solve_min_norm(&w) {
                    Some(x) => ExtReal::from_f64(0.5 * x.dot(&w) - q.c),
                    None => ExtReal::PosInf,
                }
            }
            Kind::AbsValue => {
                if z[0].abs() <= 1.0 + FEAS_REL * (1.0 + z[0].abs()) {
                    ExtReal::Finite(0.0)
                } else {
                    ExtReal::PosInf
                }
            }
            Kind::NormOne { .. } => {
                let ok = z.iter().all(|v| v.abs() <= 1.0 + FEAS_REL * (1.0 + v.abs()));
                if ok {
                    ExtReal::Finite(0.0)
                } else {
                    ExtReal::PosInf
                }
            }
            Kind::IndicatorBox { lo, hi } => ExtReal::from_f64(box_support(lo, hi, z)),
            Kind::IndicatorHalfspace { a, beta, a_norm2 } => {
                // Support of the halfspace: t beta on the ray z = t a, t >= 0.
                let t = a.dot(z) / a_norm2;
                let resid = (z - t * a).norm();
                let tol = FEAS_REL * (1.0 + z.norm());
                if resid <= tol && t >= -tol {
                    ExtReal::from_f64(t.max(0.0) * beta)
                } else {
                    ExtReal::PosInf
                }
            }
            Kind::IndicatorAffine(d) => {
                let proj = &d.row_basis * (d.row_basis.transpose() * z);
                if (z - proj).norm() <= FEAS_REL * (1.0 + z.norm()) {
                    ExtReal::from_f64(z.dot(&d.xbar))
                } else {
                    ExtReal::PosInf
                }
            }
            Kind::HalfSqDistToBox { lo, hi } => {
                ExtReal::from_f64(box_support(lo, hi, z) + 0.5 * z.norm_squared())
            }
            Kind::SumAbs { anchors, weights, w_total } => {
                let v = z[0];
                if v.abs() > w_total + FEAS_REL * (1.0 + w_total + v.abs()) {
                    return ExtReal::PosInf;
                }
                // Piecewise-linear f: the sup is attained at an anchor.
                let best = anchors
                    .iter()
                    .map(|&ak| {
                        let fk: f64 =
                            anchors.iter().zip(weights).map(|(a, w)| w * (ak - a).abs()).sum();
                        v * ak - fk
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                ExtReal::from_f64(best)
            }
            Kind::Translate { inner, shift } => {
                inner.conj_inner(z) + ExtReal::from_f64(z.dot(shift))
            }
            Kind::AddLinear { inner, slope } => inner.conj_inner(&(z - slope)),
            Kind::Scale { inner, alpha } => match inner.conj_inner(&(z / *alpha)) {
                ExtReal::Finite(v) => ExtReal::from_f64(alpha * v),
                ExtReal::PosInf => ExtReal::PosInf,
            },
            Kind::ShiftValue { inner, offset } => inner.conj_inner(z) + ExtReal::Finite(-offset),
            Kind::SeparableSum { blocks, .. } => {
                let mut total = 0.0;
                let mut off = 0;
                for b in blocks {
                    let n = b.dim();
                    match b.conj_inner(&z.rows(off, n).into_owned()) {
                        ExtReal::Finite(v) => total += v,
                        ExtReal::PosInf => return ExtReal::PosInf,
                    }
                    off += n;
                }
                ExtReal::from_f64(total)
            }
        }
    }

    /// Gradient where `f` is differentiable; `Err(NotDifferentiable)` for
    /// nonsmooth members.
    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        require_dim(self.dim(), x.len())?;
        self.grad_inner(x)
    }

    fn grad_inner(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.kind {
            Kind::Quadratic(q) => Ok(&q.a * x + &q.b),
            Kind::HalfSqDistToBox { lo, hi } => Ok(x - clamp_to(lo, hi, x)),
            Kind::Translate { inner, shift } => inner.grad_inner(&(x - shift)),
            Kind::AddLinear { inner, slope } => Ok(inner.grad_inner(x)? + slope),
            Kind::Scale { inner, alpha } => Ok(*alpha * inner.grad_inner(x)?),
            Kind::ShiftValue { inner, .. } => inner.grad_inner(x),
            Kind::SeparableSum { blocks, dim } => {
                let mut out = DVector::zeros(*dim);
                let mut off = 0;
                for b in blocks {
                    let n = b.dim();
                    let piece = b.grad_inner(&x.rows(off, n).into_owned())?;
                    out.rows_mut(off, n).copy_from(&piece);
                    off += n;
                }
                Ok(out)
            }
            _ => Err(Error::NotDifferentiable),
        }
    }

    /// `Some(L)` when `f` is differentiable with `L`-Lipschitz gradient,
    /// `None` for nonsmooth members.
    pub fn smoothness(&self) -> Option<f64> {
        match &self.kind {
            Kind::Quadratic(q) => Some(q.lambda_max()),
            Kind::HalfSqDistToBox { .. } => Some(1.0),
            Kind::Translate { inner, .. } | Kind::ShiftValue { inner, .. } => inner.smoothness(),
            Kind::AddLinear { inner, .. } => inner.smoothness(),
            Kind::Scale { inner, alpha } => inner.smoothness().map(|l| alpha * l),
            Kind::SeparableSum { blocks, .. } => {
                let mut l_max = 0.0f64;
                for b in blocks {
                    l_max = l_max.max(b.smoothness()?);
                }
                Some(l_max)
            }
            _ => None,
        }
    }

    /// Tests `v in subdifferential of f at x` through the Fenchel equality
    /// `f(x) + f*(v) = <x, v>`, within `tol`. `false` whenever either side is
    /// infinite.
    pub fn subgradient_check(&self, x: &DVector<f64>, v: &DVector<f64>, tol: f64) -> Result<bool> {
        let fx = self.evaluate(x)?;
        let fv = self.conjugate(v)?;
        Ok(match (fx, fv) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a + b - x.dot(v)).abs() <= tol,
            _ => false,
        })
    }

    /// `inf f` via `-f*(0)`; `Err(UnboundedBelow)` when the infimum is `-inf`.
    pub fn infimum(&self) -> Result<f64> {
        let zero = DVector::zeros(self.dim());
        match self.conjugate(&zero)? {
            ExtReal::Finite(v) => Ok(-v),
            ExtReal::PosInf => Err(Error::UnboundedBelow),
        }
    }

    /// Returns `f - inf f`, the same function normalized to minimum value 0.
    /// A `shift_value` wrapper is collapsed rather than nested.
    pub fn shift_to_zero_min(&self) -> Result<ConvexFunction> {
        let m = self.infimum()?;
        if m == 0.0 {
            return Ok(self.clone());
        }
        if let Kind::ShiftValue { inner, offset } = &self.kind {
            return Ok(Self {
                kind: Kind::ShiftValue { inner: inner.clone(), offset: offset - m },
            });
        }
        Ok(Self {
            kind: Kind::ShiftValue { inner: Box::new(self.clone()), offset: -m },
        })
    }
}
