//! The dividing line: slow control forgets the start, fast control remembers.
//!
//! Run the same flow from mirrored initial conditions under two decay laws.
//! With `eps(t) = (1+t)^(-3/4)` (divergent integral) both trajectories meet
//! at the minimal-norm minimizer. With `eps(t) = (1+t)^(-2)` (convergent
//! integral) each still reaches a minimizer, but a different one per start:
//! the control budget runs out before the selection finishes.
//!
//! ```text
//! cargo run --example slow_vs_fast
//! ```

use nalgebra::DVector;
use rnflow::diagnostics::limit_dependence_probe;
use rnflow::{ConvexFunction, IntegratorSettings, Schedule};

fn main() -> rnflow::Result<()> {
    let f = ConvexFunction::sum_abs(vec![-1.0, 1.0], vec![1.0, 1.0])?.shift_value(-2.0)?;
    let inits = [
        (DVector::from_element(1, 5.0), DVector::from_element(1, 2.0)),
        (DVector::from_element(1, -5.0), DVector::from_element(1, -2.0)),
    ];
    let integrator = IntegratorSettings { step: 1e-3, sample_stride: 1000 };

    for (label, s) in [
        ("slow  eps = (1+t)^-0.75", Schedule::power(1.0, 0.75)?),
        ("fast  eps = (1+t)^-2", Schedule::power(1.0, 2.0)?),
    ] {
        let finals = limit_dependence_probe(&f, 1.0, &s, &inits, 200.0, integrator)?;
        let spread = (&finals[0] - &finals[1]).norm();
        println!("{label}");
        for (init, end) in inits.iter().zip(&finals) {
            let gap = f.evaluate(end)?.value().unwrap();
            println!("  from x0 = {:>4}: x(200) = {:>8.4}   f(x) = {gap:.1e}", init.0[0], end[0]);
        }
        println!("  spread between the two endpoints: {spread:.4}\n");
    }

    println!("both schedules minimize f (the slab [-1,1] is reached either way);");
    println!("only the slow one erases the initial condition.");
    Ok(())
}
