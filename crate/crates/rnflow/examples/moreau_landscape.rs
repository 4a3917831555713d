//! The smoothed landscape behind the flows.
//!
//! The Moreau envelope of `f` at scale `mu` replaces `f` with its tightest
//! quadratic relaxation; `psi(y) = |y|^2/2 - mu * envelope(y)` is the convex
//! potential whose gradient is exactly the prox map. This example prints both
//! surfaces for the absolute value so the smoothing is visible, then verifies
//! the gradient identity by finite differences.
//!
//! ```text
//! cargo run --example moreau_landscape
//! ```

use nalgebra::DVector;
use rnflow::{moreau, ConvexFunction};

fn main() -> rnflow::Result<()> {
    let f = ConvexFunction::abs_value();

    println!("Moreau envelope of |x| (Huber): quadratic near 0, linear outside");
    println!("{:>6} {:>10} {:>12} {:>12} {:>12}", "y", "|y|", "mu=0.5", "mu=1", "mu=2");
    for i in -6..=6 {
        let yv = 0.5 * i as f64;
        let y = DVector::from_element(1, yv);
        let e: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&mu| moreau::envelope(&f, mu, &y))
            .collect::<rnflow::Result<_>>()?;
        println!("{yv:>6.1} {:>10.4} {:>12.4} {:>12.4} {:>12.4}", yv.abs(), e[0], e[1], e[2]);
        // More smoothing means a lower envelope, pointwise.
        assert!(e[2] <= e[1] + 1e-12 && e[1] <= e[0] + 1e-12);
    }

    println!("\npsi(y) = y^2/2 - mu * envelope(y) for mu = 1:");
    println!("flat (psi = 0) on [-1, 1], quadratic outside, kink gone");
    println!("{:>6} {:>10} {:>10}", "y", "psi(y)", "prox(y)");
    for i in -4..=4 {
        let yv = 0.75 * i as f64;
        let y = DVector::from_element(1, yv);
        println!(
            "{yv:>6.2} {:>10.4} {:>10.4}",
            moreau::psi(&f, 1.0, &y)?,
            f.prox(1.0, &y)?[0]
        );
    }

    // grad psi = prox, checked with central differences on a 2D atom.
    let g = ConvexFunction::sum_abs(vec![-1.0, 0.5], vec![1.0, 2.0])?;
    let g2 = ConvexFunction::separable_sum(vec![g, ConvexFunction::abs_value()])?;
    let y = DVector::from_column_slice(&[2.3, -1.7]);
    let d = moreau::grad_psi_discrepancy(&g2, 1.0, &y, 1e-5)?;
    println!("\n|finite-difference grad psi - prox| at (2.3, -1.7): {d:.2e}");

    // theta(y) = mu * envelope(y) is the optimality gap the diagnostics
    // integrate along trajectories; at a minimizer of f it hits zero.
    let at_min = moreau::theta(&f, 1.0, &DVector::zeros(1))?;
    let off_min = moreau::theta(&f, 1.0, &DVector::from_element(1, 3.0))?;
    println!("theta at the minimizer: {at_min}, three units away: {off_min}");
    Ok(())
}
