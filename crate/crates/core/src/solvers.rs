//! Empirical risk minimization: exact ERM and the two projected
//! (sub)gradient descent schemes.
//!
//! Both descent variants are full-batch: the step direction at `w_t` is
//! the weighted mean of per-observation subgradients, and the starting
//! point is the projection of the origin.

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::domain::ConvexDomain;
use crate::error::{Error, Result};
use crate::loss::{LossKind, LossModel};
use crate::point::Point;
use crate::problem::{Dataset, Objective, ProblemInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub w_final: Point,
    /// Iterates `w_1, w_2, ...`, kept only on request.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<Point>>,
    pub t_steps: usize,
    /// Measured optimization error, when a reference minimum was computed.
    pub delta_opt: Option<f64>,
    /// A-priori bound on the optimization error.
    pub delta_bar: Option<f64>,
}

impl SolverResult {
    /// Fills `delta_opt` against an `erm_reference` solve at accuracy `tol`.
    pub fn evaluate_delta_opt(&mut self, inst: &ProblemInstance, data: &Dataset, tol: f64) -> Result<f64> {
        let d = optimization_error(inst, data, &self.w_final, tol)?;
        self.delta_opt = Some(d);
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DescentOptions {
    pub keep_trajectory: bool,
}

/// Number of decaying-step iterations after which `4L²/(λT) ≤ tol`.
pub fn steps_for_accuracy(loss: &LossModel, tol: f64) -> usize {
    let t = 4.0 * loss.lipschitz * loss.lipschitz / (loss.lambda * tol);
    (t.ceil() as usize).max(1)
}

/// Decaying-step projected subgradient descent on `objective`:
/// `w_{t+1} = Π(w_t − 2/(λ(t+1)) g_t)`, returning the weighted average
/// `(2/(T(T+1))) Σ t·w_t`.
pub(crate) fn descend_decaying(
    objective: &Objective<'_>,
    domain: &ConvexDomain,
    steps: usize,
    keep_trajectory: bool,
) -> SolverResult {
    let lambda = objective.loss().lambda;
    let mut w = domain.project(&Point::zeros(domain.dim()));
    let mut avg = w.clone();
    let mut trajectory = keep_trajectory.then(|| vec![w.clone()]);
    for t in 1..=steps {
        if t > 1 {
            avg = avg.lerp(2.0 / (t + 1) as f64, &w);
        }
        if t == steps {
            break;
        }
        let g = objective.subgradient(&w);
        let mut y = w.clone();
        y.axpy(-2.0 / (lambda * (t + 1) as f64), &g);
        let next = domain.project(&y);
        if trajectory.is_none() && g.is_zero() && next == w {
            // A zero subgradient at a feasible point is a fixed point of every
            // later step, so the rest of the average has a closed form.
            let (t, total) = (t as f64, steps as f64);
            let alpha = t * (t + 1.0) / (total * (total + 1.0));
            avg = avg.lerp(1.0 - alpha, &w);
            break;
        }
        w = next;
        if let Some(traj) = trajectory.as_mut() {
            traj.push(w.clone());
        }
    }
    SolverResult {
        w_final: avg,
        trajectory,
        t_steps: steps,
        delta_opt: None,
        delta_bar: Some(bounds::pgd_opt_error_bound(objective.loss().lipschitz, lambda, steps as f64)),
    }
}

/// Decaying-step PGD on the empirical risk of `data`.
pub fn pgd_decaying(inst: &ProblemInstance, data: &Dataset, steps: usize) -> Result<SolverResult> {
    pgd_decaying_with(inst, data, steps, DescentOptions::default())
}

pub fn pgd_decaying_with(
    inst: &ProblemInstance,
    data: &Dataset,
    steps: usize,
    opts: DescentOptions,
) -> Result<SolverResult> {
    if steps == 0 {
        return Err(Error::param("T", "must be at least 1"));
    }
    let objective = inst.empirical_objective(data)?;
    Ok(descend_decaying(&objective, &inst.domain, steps, opts.keep_trajectory))
}

/// Constant-step PGD with `ν = 1/β`, returning the last iterate `w_{T+1}`.
pub fn pgd_constant(inst: &ProblemInstance, data: &Dataset, steps: usize, c_opt: f64) -> Result<SolverResult> {
    pgd_constant_with(inst, data, steps, c_opt, DescentOptions::default())
}

pub fn pgd_constant_with(
    inst: &ProblemInstance,
    data: &Dataset,
    steps: usize,
    c_opt: f64,
    opts: DescentOptions,
) -> Result<SolverResult> {
    let beta = inst.loss.smoothness.ok_or(Error::NonSmoothLoss)?;
    if steps == 0 {
        return Err(Error::param("T", "must be at least 1"));
    }
    let objective = inst.empirical_objective(data)?;
    let mut w = inst.domain.project(&Point::zeros(inst.dimension));
    let mut trajectory = opts.keep_trajectory.then(|| vec![w.clone()]);
    for _ in 0..steps {
        let g = objective.subgradient(&w);
        let mut y = w.clone();
        y.axpy(-1.0 / beta, &g);
        let next = inst.domain.project(&y);
        if trajectory.is_none() && g.is_zero() && next == w {
            break;
        }
        w = next;
        if let Some(traj) = trajectory.as_mut() {
            traj.push(w.clone());
        }
    }
    let delta_bar = bounds::smooth_pgd_opt_error_bound(
        inst.loss.lipschitz,
        inst.loss.lambda,
        beta,
        steps as f64,
        c_opt,
    )?;
    Ok(SolverResult {
        w_final: w,
        trajectory,
        t_steps: steps,
        delta_opt: None,
        delta_bar: Some(delta_bar),
    })
}

/// Reference empirical minimizer: the projected sample mean for the
/// quadratic loss, otherwise decaying-step PGD run long enough that its
/// optimization error is at most `tol`.
pub fn erm_reference(inst: &ProblemInstance, data: &Dataset, tol: f64) -> Result<SolverResult> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::param("tol", "must be finite and > 0"));
    }
    let objective = inst.empirical_objective(data)?;
    match objective.mean() {
        Some(m) => Ok(SolverResult {
            w_final: inst.domain.project(m),
            trajectory: None,
            t_steps: 0,
            delta_opt: Some(0.0),
            delta_bar: Some(0.0),
        }),
        None => {
            let steps = steps_for_accuracy(&inst.loss, tol);
            Ok(descend_decaying(&objective, &inst.domain, steps, false))
        }
    }
}

/// `R_n(w) − min R_n`, with the minimum taken from [`erm_reference`].
pub fn optimization_error(inst: &ProblemInstance, data: &Dataset, w: &Point, tol: f64) -> Result<f64> {
    let reference = erm_reference(inst, data, tol)?;
    optimization_error_against(inst, data, w, &reference.w_final)
}

/// `R_n(w) − R_n(reference)`, clipped at zero.
pub fn optimization_error_against(
    inst: &ProblemInstance,
    data: &Dataset,
    w: &Point,
    reference: &Point,
) -> Result<f64> {
    let gap = inst.empirical_risk(data, w)? - inst.empirical_risk(data, reference)?;
    Ok(gap.max(0.0))
}

/// Iteration-count prescriptions for the descent solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `T = ⌈4L²n²/λ⌉`, so the decaying-step error bound is at most `1/n²`.
    NSquared,
    /// `T = ⌈(β/λ) ln(c_opt βL²n²/λ²)⌉`, so the smooth error bound is at most `1/n²`.
    LogN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Steps {
    Fixed(usize),
    Rule(StepRule),
}

/// A learning algorithm and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Algorithm {
    /// Exact ERM (closed form) or [`erm_reference`] at accuracy `tol`.
    Erm {
        #[serde(default = "default_erm_tol")]
        tol: f64,
    },
    PgdDecaying { steps: Steps },
    PgdConstant {
        steps: Steps,
        #[serde(default = "default_c_opt")]
        c_opt: f64,
    },
    /// Ignores the data and returns `w0`.
    Constant { w0: Point },
}

fn default_erm_tol() -> f64 {
    1e-6
}

fn default_c_opt() -> f64 {
    1.0
}

impl Algorithm {
    pub fn erm() -> Self {
        Algorithm::Erm { tol: default_erm_tol() }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Erm { .. } => "erm",
            Algorithm::PgdDecaying { .. } => "pgd_decaying",
            Algorithm::PgdConstant { .. } => "pgd_constant",
            Algorithm::Constant { .. } => "constant",
        }
    }

    pub fn validate(&self, inst: &ProblemInstance) -> Result<()> {
        match self {
            Algorithm::Erm { tol } => {
                if !(tol.is_finite() && *tol > 0.0) {
                    return Err(Error::param("algorithm.tol", "must be finite and > 0"));
                }
            }
            Algorithm::PgdDecaying { steps } => match steps {
                Steps::Fixed(0) => return Err(Error::param("algorithm.steps", "must be at least 1")),
                Steps::Rule(StepRule::LogN) => {
                    return Err(Error::param("algorithm.steps", "log_n applies to pgd_constant only"))
                }
                _ => {}
            },
            Algorithm::PgdConstant { steps, c_opt } => {
                if inst.loss.smoothness.is_none() {
                    return Err(Error::NonSmoothLoss);
                }
                if !(c_opt.is_finite() && *c_opt > 0.0) {
                    return Err(Error::param("algorithm.c_opt", "must be finite and > 0"));
                }
                match steps {
                    Steps::Fixed(0) => return Err(Error::param("algorithm.steps", "must be at least 1")),
                    Steps::Rule(StepRule::NSquared) => {
                        return Err(Error::param("algorithm.steps", "n_squared applies to pgd_decaying only"))
                    }
                    _ => {}
                }
            }
            Algorithm::Constant { w0 } => {
                w0.check_dim(inst.dimension)?;
                if !inst.domain.contains(w0, 1e-12) {
                    return Err(Error::param("algorithm.w0", "must lie in the domain"));
                }
            }
        }
        Ok(())
    }

    /// Iteration count used at sample size `n`.
    pub fn resolve_steps(&self, inst: &ProblemInstance, n: usize) -> Result<usize> {
        let (l, lam) = (inst.loss.lipschitz, inst.loss.lambda);
        let n = n as f64;
        match self {
            Algorithm::Erm { tol } => match inst.loss.kind {
                LossKind::RegQuadratic => Ok(0),
                _ => Ok(steps_for_accuracy(&inst.loss, *tol)),
            },
            Algorithm::PgdDecaying { steps } => match steps {
                Steps::Fixed(t) => Ok(*t),
                Steps::Rule(StepRule::NSquared) => Ok(((4.0 * l * l * n * n / lam).ceil() as usize).max(1)),
                Steps::Rule(StepRule::LogN) => Err(Error::param("algorithm.steps", "log_n applies to pgd_constant only")),
            },
            Algorithm::PgdConstant { steps, c_opt } => match steps {
                Steps::Fixed(t) => Ok(*t),
                Steps::Rule(StepRule::LogN) => {
                    let beta = inst.loss.smoothness.ok_or(Error::NonSmoothLoss)?;
                    let t = (beta / lam) * (c_opt * beta * l * l * n * n / (lam * lam)).ln();
                    Ok((t.ceil().max(1.0)) as usize)
                }
                Steps::Rule(StepRule::NSquared) => {
                    Err(Error::param("algorithm.steps", "n_squared applies to pgd_decaying only"))
                }
            },
            Algorithm::Constant { .. } => Ok(0),
        }
    }

    /// A-priori optimization-error bound at sample size `n` (0 for exact ERM).
    pub fn delta_bar(&self, inst: &ProblemInstance, n: usize) -> Result<f64> {
        let (l, lam) = (inst.loss.lipschitz, inst.loss.lambda);
        let steps = self.resolve_steps(inst, n)? as f64;
        match self {
            Algorithm::Erm { .. } if steps == 0.0 => Ok(0.0),
            Algorithm::Erm { .. } | Algorithm::PgdDecaying { .. } => Ok(bounds::pgd_opt_error_bound(l, lam, steps)),
            Algorithm::PgdConstant { c_opt, .. } => {
                let beta = inst.loss.smoothness.ok_or(Error::NonSmoothLoss)?;
                bounds::smooth_pgd_opt_error_bound(l, lam, beta, steps, *c_opt)
            }
            // Not a minimizer; no bound applies.
            Algorithm::Constant { .. } => Ok(f64::INFINITY),
        }
    }

    /// Uniform-stability constant the theory guarantees at sample size `n`.
    pub fn stability_bound(&self, inst: &ProblemInstance, n: usize) -> Result<f64> {
        let (l, lam) = (inst.loss.lipschitz, inst.loss.lambda);
        let nf = n as f64;
        match self {
            Algorithm::Constant { .. } => Ok(0.0),
            Algorithm::PgdConstant { .. } => bounds::smooth_pgd_gamma(l, lam, nf),
            Algorithm::Erm { .. } | Algorithm::PgdDecaying { .. } => {
                let delta_bar = self.delta_bar(inst, n)?;
                bounds::erm_stability_gamma(l, lam, nf, delta_bar)
            }
        }
    }

    pub fn fit(&self, inst: &ProblemInstance, data: &Dataset) -> Result<SolverResult> {
        match self {
            Algorithm::Erm { tol } => erm_reference(inst, data, *tol),
            Algorithm::PgdDecaying { .. } => {
                let steps = self.resolve_steps(inst, data.len())?;
                pgd_decaying(inst, data, steps)
            }
            Algorithm::PgdConstant { c_opt, .. } => {
                let steps = self.resolve_steps(inst, data.len())?;
                pgd_constant(inst, data, steps, *c_opt)
            }
            Algorithm::Constant { w0 } => Ok(SolverResult {
                w_final: w0.clone(),
                trajectory: None,
                t_steps: 0,
                delta_opt: None,
                delta_bar: None,
            }),
        }
    }
}
