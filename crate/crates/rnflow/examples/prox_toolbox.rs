//! Tour of the function atoms and their proximal maps.
//!
//! Everything downstream (flows, envelopes, diagnostics) is built on
//! `ConvexFunction::prox`, so this is the part worth poking at first.
//!
//! ```text
//! cargo run --example prox_toolbox
//! ```

use nalgebra::{DMatrix, DVector};
use rnflow::ConvexFunction;

fn dv(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

fn main() -> rnflow::Result<()> {
    // prox of |.| is soft thresholding: shrink by mu, flat spot through zero.
    let abs = ConvexFunction::abs_value();
    println!("soft thresholding, prox_mu|.|(y) at mu = 1:");
    for y in [-3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 3.0] {
        let p = abs.prox(1.0, &dv(&[y]))?;
        println!("  y = {y:>4}  ->  {:>4}", p[0]);
    }

    // An indicator's prox is the projection; mu does not matter.
    let boxf = ConvexFunction::indicator_box(dv(&[-1.0, 0.0]), dv(&[1.0, 2.0]))?;
    let y = dv(&[3.0, -0.7]);
    println!("\nprojection onto [-1,1] x [0,2]: {:?} -> {:?}", (y[0], y[1]), {
        let p = boxf.prox(0.1, &y)?;
        (p[0], p[1])
    });

    // Quadratics solve a linear system: prox(y) = (I + mu A)^{-1} (y - mu b).
    let quad = ConvexFunction::quadratic(
        DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
        dv(&[1.0, -1.0]),
        0.0,
    )?;
    let p = quad.prox(0.5, &dv(&[2.0, 2.0]))?;
    println!("\nquadratic prox at (2, 2), mu = 0.5: ({:.6}, {:.6})", p[0], p[1]);

    // Combinators compose at the prox level too. Shifting the argument,
    // tilting by a linear term, and scaling all have exact prox formulas.
    let shifted = ConvexFunction::abs_value().translate(dv(&[2.0]))?;
    println!("\n|. - 2| shrinks toward 2: prox(4) = {}", shifted.prox(1.0, &dv(&[4.0]))?[0]);

    let tilted = ConvexFunction::abs_value().add_linear(dv(&[0.5]))?;
    println!("|.| + 0.5 x biases the flat spot: prox(0.7) = {}", tilted.prox(1.0, &dv(&[0.7]))?[0]);

    // A separable sum acts blockwise.
    let sep = ConvexFunction::separable_sum(vec![
        ConvexFunction::abs_value(),
        ConvexFunction::indicator_box(dv(&[0.0]), dv(&[1.0]))?,
    ])?;
    let p = sep.prox(1.0, &dv(&[2.5, 7.0]))?;
    println!("blockwise prox of |x0| + indicator(x1 in [0,1]) at (2.5, 7): ({}, {})", p[0], p[1]);

    // The polyhedral workhorse: a weighted sum of kinks. Its prox is computed
    // by walking the breakpoints, and every flow example below leans on it.
    let kinks = ConvexFunction::sum_abs(vec![-1.0, 1.0], vec![1.0, 1.0])?;
    println!("\n|x+1| + |x-1| has a flat argmin, so prox parks anywhere in [-1, 1]:");
    for y in [-4.0, -1.5, 0.3, 1.5, 4.0] {
        println!("  prox(mu=1) at {y:>4} -> {:>4}", kinks.prox(1.0, &dv(&[y]))?[0]);
    }

    // Firm nonexpansiveness, sampled: |prox y - prox y'| never exceeds |y - y'|.
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let a = dv(&[-6.0 + 0.06 * i as f64]);
        let b = dv(&[6.0 - 0.05 * i as f64]);
        let num = (kinks.prox(1.0, &a)? - kinks.prox(1.0, &b)?).norm();
        let den = (&a - &b).norm();
        if den > 0.0 {
            worst = worst.max(num / den);
        }
    }
    println!("\nsampled Lipschitz constant of prox: {worst:.3} (never exceeds 1)");
    Ok(())
}
