//! JSON experiment configs and the run / sweep / check entry points that the
//! `rnflow` binary is a thin wrapper around.
//!
//! A config names a problem from the function algebra, a flow, a schedule,
//! an initial pair, and integrator settings:
//!
//! ```json
//! {
//!   "problem": {"type": "sum_abs", "anchors": [-1.0, 1.0], "weights": [1.0, 1.0]},
//!   "flow": "rn_tikhonov",
//!   "mu": 1.0,
//!   "schedule": {"family": "power", "c": 1.0, "p": 0.75},
//!   "x0": [5.0],
//!   "v0": [2.0],
//!   "T": 2000.0,
//!   "output_dir": "out/two-kinks"
//! }
//! ```
//!
//! Unknown keys are rejected. `v0` may be omitted for smooth problems, where
//! it is filled with the gradient at `x0`. The `RNFLOW_OUT` environment
//! variable overrides `output_dir` for [`run_experiment`] and
//! [`sweep_experiment`]. Outputs are byte-identical across reruns of the
//! same config.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::ConvexFunction;
use crate::diagnostics::{argmin_samples, convergence_report, Report};
use crate::dynamics::{integrate, DynamicSpec, Flow, IntegratorSettings};
use crate::error::{Error, Result};
use crate::schedule::{h1_model_check, H1Grid, Schedule};

/// Serializable mirror of the function algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Quadratic {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        #[serde(default)]
        c: f64,
    },
    // empty braces keep serde's unknown-key rejection active for this variant
    AbsValue {},
    NormOne {
        dim: usize,
    },
    IndicatorBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    IndicatorHalfspace {
        a: Vec<f64>,
        beta: f64,
    },
    IndicatorAffine {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    HalfSqDistToBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    SumAbs {
        anchors: Vec<f64>,
        weights: Vec<f64>,
    },
    Translate {
        inner: Box<FunctionSpec>,
        shift: Vec<f64>,
    },
    AddLinear {
        inner: Box<FunctionSpec>,
        slope: Vec<f64>,
    },
    Scale {
        inner: Box<FunctionSpec>,
        alpha: f64,
    },
    ShiftValue {
        inner: Box<FunctionSpec>,
        offset: f64,
    },
    SeparableSum {
        blocks: Vec<FunctionSpec>,
    },
}

fn matrix_from_rows(ctx: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::InvalidConfig(format!("{ctx}: matrix has no rows")));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidConfig(format!("{ctx}: matrix rows have uneven lengths")));
    }
    let flat: Vec<f64> = rows.iter().flatten().cloned().collect();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

impl FunctionSpec {
    /// Builds the validated function; constructor errors surface unchanged.
    pub fn build(&self) -> Result<ConvexFunction> {
        match self {
            FunctionSpec::Quadratic { a, b, c } => ConvexFunction::quadratic(
                matrix_from_rows("quadratic", a)?,
                DVector::from_vec(b.clone()),
                *c,
            ),
            FunctionSpec::AbsValue {} => Ok(ConvexFunction::abs_value()),
            FunctionSpec::NormOne { dim } => ConvexFunction::norm_one(*dim),
            FunctionSpec::IndicatorBox { lo, hi } => ConvexFunction::indicator_box(
                DVector::from_vec(lo.clone()),
                DVector::from_vec(hi.clone()),
            ),
            FunctionSpec::IndicatorHalfspace { a, beta } => {
                ConvexFunction::indicator_halfspace(DVector::from_vec(a.clone()), *beta)
            }
            FunctionSpec::IndicatorAffine { a, b } => ConvexFunction::indicator_affine(
                matrix_from_rows("indicator_affine", a)?,
                DVector::from_vec(b.clone()),
            ),
            FunctionSpec::HalfSqDistToBox { lo, hi } => ConvexFunction::half_sq_dist_to_box(
                DVector::from_vec(lo.clone()),
                DVector::from_vec(hi.clone()),
            ),
            FunctionSpec::SumAbs { anchors, weights } => {
                ConvexFunction::sum_abs(anchors.clone(), weights.clone())
            }
            FunctionSpec::Translate { inner, shift } => {
                inner.build()?.translate(DVector::from_vec(shift.clone()))
            }
            FunctionSpec::AddLinear { inner, slope } => {
                inner.build()?.add_linear(DVector::from_vec(slope.clone()))
            }
            FunctionSpec::Scale { inner, alpha } => inner.build()?.scale(*alpha),
            FunctionSpec::ShiftValue { inner, offset } => inner.build()?.shift_value(*offset),
            FunctionSpec::SeparableSum { blocks } => {
                let built: Result<Vec<_>> = blocks.iter().map(|b| b.build()).collect();
                ConvexFunction::separable_sum(built?)
            }
        }
    }
}

fn default_step() -> f64 {
    1e-3
}

fn default_stride() -> usize {
    10
}

/// One experiment as read from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: FunctionSpec,
    pub flow: Flow,
    pub mu: f64,
    pub schedule: Schedule,
    pub x0: Vec<f64>,
    /// Subgradient of the problem at `x0`; omitted means "fill with the
    /// gradient", which requires a smooth problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<Vec<f64>>,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "default_step")]
    pub h: f64,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    pub output_dir: PathBuf,
    /// Reserved for randomized subcommands; run, sweep, and check are
    /// deterministic and ignore it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| {
            Error::InvalidConfig(format!("{}: {e}", path.display()))
        })
    }

    /// Canonical pretty-printed form; re-parsing yields an equal config.
    pub fn dump(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Resolves the function, schedule, and initial pair into a validated
    /// integration spec.
    pub fn to_dynamic_spec(&self) -> Result<DynamicSpec> {
        let f = self.problem.build()?;
        self.schedule.validate()?;
        if self.x0.len() != f.dim() {
            return Err(Error::InvalidConfig(format!(
                "x0 has length {}, problem dimension is {}",
                self.x0.len(),
                f.dim()
            )));
        }
        let x0 = DVector::from_vec(self.x0.clone());
        let v0 = match &self.v0 {
            Some(v) => DVector::from_vec(v.clone()),
            None => {
                if f.smoothness().is_some() {
                    f.gradient(&x0)?
                } else {
                    return Err(Error::InvalidConfig(
                        "v0 is required: the problem is nonsmooth, so it cannot be filled with a gradient"
                            .into(),
                    ));
                }
            }
        };
        let spec = DynamicSpec {
            flow: self.flow,
            f,
            mu: self.mu,
            schedule: self.schedule,
            x0,
            v0,
            horizon: self.horizon,
            integrator: IntegratorSettings { step: self.h, sample_stride: self.sample_stride },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `output_dir`, unless `RNFLOW_OUT` is set and nonempty.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var("RNFLOW_OUT") {
            Ok(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output_dir.clone(),
        }
    }
}

/// Where a run landed and what it concluded.
#[derive(Debug)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub report: Report,
}

fn run_to_dir(config: &ExperimentConfig, dir: &Path) -> Result<RunOutput> {
    let spec = config.to_dynamic_spec()?;
    let traj = integrate(&spec)?;
    let report = convergence_report(&traj, &spec.f, spec.mu, &spec.schedule)?;
    fs::create_dir_all(dir)?;
    let mut csv = std::io::BufWriter::new(fs::File::create(dir.join("trajectory.csv"))?);
    traj.write_csv(&mut csv)?;
    csv.flush()?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    fs::write(dir.join("report.json"), json)?;
    Ok(RunOutput { dir: dir.to_path_buf(), report })
}

/// Integrates one config and writes `trajectory.csv` and `report.json` into
/// its (possibly `RNFLOW_OUT`-overridden) output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    let dir = config.resolved_output_dir();
    run_to_dir(config, &dir)
}

/// One sweep cell: either a report or the error that stopped it.
#[derive(Debug)]
pub struct SweepRow {
    pub value: f64,
    pub report: Option<Report>,
    pub error: Option<String>,
}

#[derive(Debug)]
pub struct SweepOutput {
    pub dir: PathBuf,
    pub rows: Vec<SweepRow>,
}

fn apply_axis(config: &mut ExperimentConfig, axis: &str, value: f64) -> Result<()> {
    match axis {
        "mu" => config.mu = value,
        "T" => config.horizon = value,
        "h" => config.h = value,
        "p" => match &mut config.schedule {
            Schedule::Power { p, .. } => *p = value,
            _ => {
                return Err(Error::InvalidConfig(
                    "sweep axis 'p' requires a power-family schedule".into(),
                ))
            }
        },
        "c" => match &mut config.schedule {
            Schedule::Power { c, .. } | Schedule::Constant { c } => *c = value,
            Schedule::Zero => {
                return Err(Error::InvalidConfig(
                    "sweep axis 'c' requires a power- or constant-family schedule".into(),
                ))
            }
        },
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown sweep axis '{other}' (expected one of: mu, T, h, p, c)"
            )))
        }
    }
    Ok(())
}

/// Repeats the base experiment with `axis` set to each value, one output
/// subdirectory per value, and writes `sweep_summary.csv` at the top.
///
/// Cells run in parallel and fail independently: a failed cell keeps its row
/// (value plus empty metric columns) and the sweep continues. Row order
/// follows the given values.
pub fn sweep_experiment(
    config: &ExperimentConfig,
    axis: &str,
    values: &[f64],
) -> Result<SweepOutput> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("sweep: no values given".into()));
    }
    // surface an incompatible axis as a config error before spawning cells
    {
        let mut probe = config.clone();
        apply_axis(&mut probe, axis, values[0])?;
    }
    let base = config.resolved_output_dir();
    fs::create_dir_all(&base)?;

    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|&value| {
            let mut cell = config.clone();
            if let Err(e) = apply_axis(&mut cell, axis, value) {
                return SweepRow { value, report: None, error: Some(e.to_string()) };
            }
            let dir = base.join(format!("{axis}={value}"));
            match run_to_dir(&cell, &dir) {
                Ok(out) => SweepRow { value, report: Some(out.report), error: None },
                Err(e) => SweepRow { value, report: None, error: Some(e.to_string()) },
            }
        })
        .collect();

    let mut summary = String::from("value,dist_to_target,phi_gap,v_norm_final,slow,in_L2\n");
    for row in &rows {
        match &row.report {
            Some(rep) => summary.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{},{}\n",
                row.value,
                rep.dist_to_target,
                rep.phi_gap,
                rep.v_norm_final,
                rep.hypothesis_flags.slow,
                rep.hypothesis_flags.in_l2
            )),
            None => summary.push_str(&format!("{},,,,,\n", row.value)),
        }
    }
    fs::write(base.join("sweep_summary.csv"), summary)?;
    Ok(SweepOutput { dir: base, rows })
}

/// What `rnflow check` prints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub slow: bool,
    #[serde(rename = "in_L2")]
    pub in_l2: bool,
    pub h2_k: Option<f64>,
    pub h1_model_r: Option<f64>,
    pub phi0_finite: bool,
}

#[derive(Debug)]
pub struct CheckOutput {
    pub summary: CheckSummary,
    /// Whether the slow-regime convergence hypotheses are certified.
    pub pass: bool,
}

/// Classifies the schedule and tests the convergence hypotheses without
/// integrating anything.
///
/// Passes when the schedule is slow, a decay constant for the differential
/// inequality exists, and `f(0)` is finite; when a growth estimate is
/// computable (`dim <= 3`) it must additionally be positive with a
/// square-integrable schedule.
pub fn check_hypotheses(config: &ExperimentConfig) -> Result<CheckOutput> {
    let f = config.problem.build()?;
    config.schedule.validate()?;
    let cls = config.schedule.classify();
    let h2_k = config.schedule.h2_constant();
    let phi0_finite = f
        .evaluate(&DVector::zeros(f.dim()))?
        .is_finite();
    let h1_model_r = if f.dim() <= 3 {
        let g = f.shift_to_zero_min()?;
        let ppa = if f.dim() == 3 { 101 } else { 401 };
        let c_points = argmin_samples(&g, 10.0, ppa, 512)?;
        if c_points.is_empty() {
            None
        } else {
            h1_model_check(&g, &config.schedule, &c_points, &H1Grid::default())?.r
        }
    } else {
        None
    };
    let h1_ok = match h1_model_r {
        None => true,
        Some(r) => r > 0.0 && cls.in_l2,
    };
    let pass = cls.slow && h2_k.is_some() && phi0_finite && h1_ok;
    Ok(CheckOutput {
        summary: CheckSummary {
            slow: cls.slow,
            in_l2: cls.in_l2,
            h2_k,
            h1_model_r,
            phi0_finite,
        },
        pass,
    })
}
