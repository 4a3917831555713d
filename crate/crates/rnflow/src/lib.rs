//! Continuous-time selection dynamics for convex minimization.
//!
//! The flows integrated here do two jobs at once: they drive a convex `f`
//! to its minimum, and through a slowly vanishing Tikhonov control they
//! single out the minimal-norm minimizer when there are many. The state
//! lives in a lifted variable `y = x + mu v`; one prox evaluation per
//! right-hand side recovers both the primal point `x` and a certified
//! subgradient `v`, which is what lets a single fixed-step integrator run
//! unchanged on smooth, kinked, and constrained problems.
//!
//! The examples are the intended entry point:
//!
//! * `prox_toolbox` builds the function atoms and their proximal maps
//! * `moreau_landscape` shows the smoothed surfaces behind the flows
//! * `schedule_zoo` classifies decay laws and estimates the model constants
//! * `minimal_norm_selection` runs the flow on a degenerate quadratic
//! * `nonsmooth_selection` does the same through kinks
//! * `slow_vs_fast` demonstrates where the slow-decay condition bites
//! * `sdc_box` runs the second damping variant on a constraint set
//!
//! The `rnflow` binary drives the same machinery from JSON experiment
//! configs (`rnflow run | sweep | check`); see the crate README.

pub mod config;
pub mod convex;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod moreau;
pub mod schedule;

pub use convex::{ConvexFunction, ExtReal};
pub use dynamics::{DynamicSpec, Flow, IntegratorSettings, Trajectory};
pub use error::{Error, Result};
pub use schedule::{Schedule, ScheduleClass};
