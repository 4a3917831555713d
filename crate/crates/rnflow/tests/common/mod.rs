#![allow(dead_code)]

//! Shared test fixtures: a zoo of function instances with closed-form
//! argmin points and prox-kink locations, plus brute-force grid oracles.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rnflow::ConvexFunction;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dvec(vals: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(vals)
}

pub fn random_vec(r: &mut ChaCha8Rng, dim: usize, half_width: f64) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| r.random_range(-half_width..half_width))
}

/// One function under test. `kink_margin(y, mu)` is the distance from `y` to
/// the nearest point where `prox(mu, .)` is not differentiable, `inf` when
/// the prox is globally smooth; `flat_interior_mu1` are points (for `mu = 1`)
/// strictly inside a flat piece of the prox, where finite differences of
/// `psi` are exact up to roundoff.
pub struct Case {
    pub name: &'static str,
    pub f: ConvexFunction,
    pub argmin: Vec<DVector<f64>>,
    pub kink_margin: Box<dyn Fn(&DVector<f64>, f64) -> f64>,
    pub flat_interior_mu1: Vec<DVector<f64>>,
}

fn no_kinks() -> Box<dyn Fn(&DVector<f64>, f64) -> f64> {
    Box::new(|_, _| f64::INFINITY)
}

fn box_face_margin(lo: Vec<f64>, hi: Vec<f64>) -> Box<dyn Fn(&DVector<f64>, f64) -> f64> {
    Box::new(move |y, _| {
        y.iter()
            .enumerate()
            .map(|(i, &yi)| (yi - lo[i]).abs().min((yi - hi[i]).abs()))
            .fold(f64::INFINITY, f64::min)
    })
}

fn soft_threshold_margin(scale: f64) -> Box<dyn Fn(&DVector<f64>, f64) -> f64> {
    // kinks of the l1 prox sit at +-(scale * mu) in every coordinate
    Box::new(move |y, mu| {
        let k = scale * mu;
        y.iter().map(|&yi| (yi - k).abs().min((yi + k).abs())).fold(f64::INFINITY, f64::min)
    })
}

/// Prox breakpoints of `sum w_i |x - a_i|` in the lifted variable: each
/// anchor `a_k` owns the flat interval `[a_k + mu s_{k-1}, a_k + mu s_k]`
/// where `s_k` are the cumulative slopes.
pub fn sum_abs_breakpoints(anchors: &[f64], weights: &[f64], mu: f64) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut out = Vec::new();
    let mut s_left = -total;
    for (a, w) in anchors.iter().zip(weights) {
        out.push(a + mu * s_left);
        s_left += 2.0 * w;
        out.push(a + mu * s_left);
    }
    out
}

fn sum_abs_margin(anchors: Vec<f64>, weights: Vec<f64>) -> Box<dyn Fn(&DVector<f64>, f64) -> f64> {
    Box::new(move |y, mu| {
        sum_abs_breakpoints(&anchors, &weights, mu)
            .iter()
            .map(|b| (y[0] - b).abs())
            .fold(f64::INFINITY, f64::min)
    })
}

pub fn quadratic_pd() -> ConvexFunction {
    ConvexFunction::quadratic(
        DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
        dvec(&[1.0, -1.0]),
        0.3,
    )
    .unwrap()
}

/// `1/2 (x1 + x2 - 2)^2`: a rank-one quadratic whose argmin is a line.
pub fn hyperplane_quadratic() -> ConvexFunction {
    ConvexFunction::quadratic(
        DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
        dvec(&[-2.0, -2.0]),
        2.0,
    )
    .unwrap()
}

/// `|x - 1| + |x + 1| - 2`, the two-kink selection problem with min 0.
pub fn two_kinks() -> ConvexFunction {
    ConvexFunction::sum_abs(vec![-1.0, 1.0], vec![1.0, 1.0])
        .unwrap()
        .shift_value(-2.0)
        .unwrap()
}

/// The atoms, one concrete instance each.
pub fn atom_zoo() -> Vec<Case> {
    let pd_argmin = {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let b = dvec(&[1.0, -1.0]);
        a.lu().solve(&(-b)).unwrap()
    };
    vec![
        Case {
            name: "quadratic_pd",
            f: quadratic_pd(),
            argmin: vec![pd_argmin],
            kink_margin: no_kinks(),
            flat_interior_mu1: vec![],
        },
        Case {
            name: "quadratic_rank1",
            f: hyperplane_quadratic(),
            argmin: vec![dvec(&[1.0, 1.0]), dvec(&[3.0, -1.0]), dvec(&[-1.0, 3.0])],
            kink_margin: no_kinks(),
            flat_interior_mu1: vec![],
        },
        Case {
            name: "abs_value",
            f: ConvexFunction::abs_value(),
            argmin: vec![dvec(&[0.0])],
            kink_margin: soft_threshold_margin(1.0),
            flat_interior_mu1: vec![dvec(&[0.0]), dvec(&[0.5]), dvec(&[-0.5])],
        },
        Case {
            name: "norm_one_3d",
            f: ConvexFunction::norm_one(3).unwrap(),
            argmin: vec![dvec(&[0.0, 0.0, 0.0])],
            kink_margin: soft_threshold_margin(1.0),
            flat_interior_mu1: vec![dvec(&[0.0, 0.5, -0.5]), dvec(&[0.25, -0.25, 0.0])],
        },
        Case {
            name: "indicator_box",
            f: ConvexFunction::indicator_box(dvec(&[-1.0, 0.5]), dvec(&[2.0, 3.0])).unwrap(),
            argmin: vec![dvec(&[0.0, 1.0]), dvec(&[-1.0, 0.5]), dvec(&[2.0, 3.0])],
            kink_margin: box_face_margin(vec![-1.0, 0.5], vec![2.0, 3.0]),
            flat_interior_mu1: vec![],
        },
        Case {
            name: "indicator_halfspace",
            f: ConvexFunction::indicator_halfspace(dvec(&[1.0, 2.0]), 1.0).unwrap(),
            argmin: vec![dvec(&[1.0, 0.0]), dvec(&[-1.0, 1.0]), dvec(&[-3.0, -2.0])],
            kink_margin: Box::new(|y, _| (y[0] + 2.0 * y[1] - 1.0).abs() / 5.0_f64.sqrt()),
            flat_interior_mu1: vec![],
        },
        Case {
            name: "indicator_affine",
            f: ConvexFunction::indicator_affine(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), dvec(&[2.0]))
                .unwrap(),
            argmin: vec![dvec(&[1.0, 1.0]), dvec(&[0.0, 2.0]), dvec(&[2.0, 0.0])],
            kink_margin: no_kinks(),
            flat_interior_mu1: vec![],
        },
        Case {
            name: "half_sq_dist_to_box",
            f: ConvexFunction::half_sq_dist_to_box(dvec(&[-1.0, 0.5]), dvec(&[2.0, 3.0])).unwrap(),
            argmin: vec![dvec(&[0.0, 1.0]), dvec(&[2.0, 3.0])],
            kink_margin: box_face_margin(vec![-1.0, 0.5], vec![2.0, 3.0]),
            flat_interior_mu1: vec![],
        },
        Case {
            name: "sum_abs",
            f: ConvexFunction::sum_abs(vec![-1.0, 0.5, 2.0], vec![1.0, 0.5, 2.0]).unwrap(),
            argmin: vec![dvec(&[2.0])],
            kink_margin: sum_abs_margin(vec![-1.0, 0.5, 2.0], vec![1.0, 0.5, 2.0]),
            // flat centers for mu = 1: a_k + (s_{k-1} + s_k) / 2
            flat_interior_mu1: vec![dvec(&[-3.5]), dvec(&[-0.5]), dvec(&[3.5])],
        },
    ]
}

/// Combinator nodes wrapped around the atoms.
pub fn combinator_zoo() -> Vec<Case> {
    let pd = quadratic_pd();
    let linear_argmin = {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        // argmin of f + <slope, .> solves A x = -(b + slope)
        let b = dvec(&[1.0 + 0.3, -1.0 - 0.7]);
        a.lu().solve(&(-b)).unwrap()
    };
    let pd_argmin = {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let b = dvec(&[1.0, -1.0]);
        a.lu().solve(&(-b)).unwrap()
    };
    vec![
        Case {
            name: "translate_abs",
            f: ConvexFunction::abs_value().translate(dvec(&[1.5])).unwrap(),
            argmin: vec![dvec(&[1.5])],
            kink_margin: Box::new(|y, mu| {
                (y[0] - 1.5 - mu).abs().min((y[0] - 1.5 + mu).abs())
            }),
            flat_interior_mu1: vec![dvec(&[1.5]), dvec(&[1.0]), dvec(&[2.0])],
        },
        Case {
            name: "add_linear_quadratic",
            f: quadratic_pd().add_linear(dvec(&[0.3, -0.7])).unwrap(),
            argmin: vec![linear_argmin],
            kink_margin: no_kinks(),
            flat_interior_mu1: vec![],
        },
        Case {
            name: "scale_norm_one",
            f: ConvexFunction::norm_one(2).unwrap().scale(2.0).unwrap(),
            argmin: vec![dvec(&[0.0, 0.0])],
            kink_margin: soft_threshold_margin(2.0),
            flat_interior_mu1: vec![dvec(&[0.0, 1.0]), dvec(&[-1.0, 0.5])],
        },
        Case {
            name: "shift_value_quadratic",
            f: pd.shift_value(-3.0).unwrap(),
            argmin: vec![pd_argmin],
            kink_margin: no_kinks(),
            flat_interior_mu1: vec![],
        },
        Case {
            name: "separable_abs_box",
            f: ConvexFunction::separable_sum(vec![
                ConvexFunction::abs_value(),
                ConvexFunction::indicator_box(dvec(&[0.0]), dvec(&[1.0])).unwrap(),
            ])
            .unwrap(),
            argmin: vec![dvec(&[0.0, 0.3]), dvec(&[0.0, 0.0]), dvec(&[0.0, 1.0])],
            kink_margin: Box::new(|y, mu| {
                let a = (y[0] - mu).abs().min((y[0] + mu).abs());
                let b = y[1].abs().min((y[1] - 1.0).abs());
                a.min(b)
            }),
            flat_interior_mu1: vec![dvec(&[0.0, 0.5]), dvec(&[0.5, 0.5])],
        },
    ]
}

pub fn full_zoo() -> Vec<Case> {
    let mut all = atom_zoo();
    all.extend(combinator_zoo());
    all
}

/// Draws `y` uniformly from `[-hw, hw]^dim`, resampling until it clears the
/// kink margin. Panics when the margin is unreachable (misconfigured case).
pub fn sample_clear_of_kinks(
    r: &mut ChaCha8Rng,
    case: &Case,
    mu: f64,
    hw: f64,
    margin: f64,
) -> DVector<f64> {
    for _ in 0..10_000 {
        let y = random_vec(r, case.f.dim(), hw);
        if (case.kink_margin)(&y, mu) > margin {
            return y;
        }
    }
    panic!("{}: no point clears margin {margin}", case.name);
}

/// Multi-stage grid maximization of `<z, x> - f(x)`, a brute-force conjugate
/// value. Each stage re-grids around the incumbent with the previous spacing
/// as half-width. `-inf` if `f` is infinite on the whole initial grid.
pub fn grid_conjugate(
    f: &ConvexFunction,
    z: &DVector<f64>,
    half_width: f64,
    ppa: usize,
    stages: usize,
) -> f64 {
    let n = f.dim();
    assert!(n <= 2, "grid oracle supports dim <= 2");
    let mut center = DVector::zeros(n);
    let mut hw = half_width;
    let mut best_val = f64::NEG_INFINITY;
    for _ in 0..stages {
        let spacing = 2.0 * hw / (ppa - 1) as f64;
        let mut best_pt = center.clone();
        let mut stage_best = f64::NEG_INFINITY;
        let mut idx = vec![0usize; n];
        let mut x = DVector::zeros(n);
        'grid: loop {
            for d in 0..n {
                x[d] = center[d] - hw + spacing * idx[d] as f64;
            }
            if let rnflow::ExtReal::Finite(fx) = f.evaluate(&x).unwrap() {
                let val = z.dot(&x) - fx;
                if val > stage_best {
                    stage_best = val;
                    best_pt.copy_from(&x);
                }
            }
            let mut d = 0;
            while d < n {
                idx[d] += 1;
                if idx[d] < ppa {
                    continue 'grid;
                }
                idx[d] = 0;
                d += 1;
            }
            break;
        }
        if !stage_best.is_finite() {
            return f64::NEG_INFINITY;
        }
        best_val = stage_best;
        center = best_pt;
        hw = spacing;
    }
    best_val
}
