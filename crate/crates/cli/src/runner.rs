//! Runs a validated configuration and persists its results.

use std::path::{Path, PathBuf};

use serde::Serialize;

use scolab::empirics::{
    estimate_stability, excess_risk_experiment, generalization_gap_experiment, selfbounding_mc_validation,
    verify_bernstein, AdditiveUniformCase, ErmSecondMomentCase, ExperimentPlan, SelfBoundedCase,
};

use crate::artifacts::{Artifacts, GapSummaryRow, ScalingSummaryRow, StabilityRow};
use crate::bound::evaluate;
use crate::config::{CaseKind, ExperimentKind, ValidatedConfig};
use crate::error::CliError;
use crate::plot::render_svg;

/// Files written and one-line highlights for the terminal.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub highlights: Vec<String>,
}

#[derive(Serialize)]
struct BoundOutput<'a> {
    name: crate::bound::BoundName,
    params: &'a crate::bound::BoundParams,
    value: f64,
}

/// Executes the experiment and writes its artifacts under `out_dir`.
///
/// Invariant violations are reported after the artifacts are written, so
/// the offending run can be inspected.
pub fn run(v: &ValidatedConfig, out_dir: &Path) -> Result<RunSummary, CliError> {
    let cfg = &v.config;
    let inst = &v.instance;
    let algo = &v.algorithm;
    let par = cfg.parallelism.to_lab();
    let mut art = Artifacts::new();
    let mut highlights = Vec::new();
    let mut violation: Option<CliError> = None;

    art.json("config.json", &serde_json::from_str::<serde_json::Value>(&cfg.canonical_json()).map_err(|e| CliError::Output(e.to_string()))?)?;

    match cfg.experiment {
        ExperimentKind::Stability => {
            let mut estimates = Vec::with_capacity(cfg.n_grid.len());
            for (k, &n) in cfg.n_grid.iter().enumerate() {
                let seed = scolab::rng::derive_seed(cfg.base_seed, k as u64);
                let est = estimate_stability(inst, algo, n, cfg.reps, cfg.probes, seed, par)?;
                highlights.push(format!(
                    "n = {n}: gamma_hat = {} (guaranteed {})",
                    est.gamma_hat, est.theoretical_gamma
                ));
                if let (None, Err(e)) = (&violation, est.check()) {
                    violation = Some(e.into());
                }
                estimates.push(est);
            }
            art.csv(
                "stability.csv",
                estimates.iter().map(|e| StabilityRow {
                    n: e.n,
                    gamma_hat: e.gamma_hat,
                    theoretical_gamma: e.theoretical_gamma,
                    replications: e.replications,
                    probes: e.probes,
                    exact_probe_sup: e.exact_probe_sup,
                    worst_seed: e.worst_seed,
                }),
            )?;
            art.json("stability.json", &estimates)?;
        }
        ExperimentKind::Bernstein => {
            let rep = verify_bernstein(inst, cfg.n_w_samples, cfg.base_seed, cfg.minimizer_tol)?;
            highlights.push(format!(
                "max ratio {} against B = {} over {} points ({} excluded)",
                rep.max_ratio, rep.bernstein_constant, rep.samples, rep.excluded
            ));
            if let Err(e) = rep.check() {
                violation = Some(e.into());
            }
            art.json("bernstein.json", &rep)?;
        }
        ExperimentKind::Scaling => {
            let exp = excess_risk_experiment(inst, algo, &plan(v))?;
            let r = &exp.report;
            highlights.push(match (r.slope, r.slope_ci) {
                (Some(s), Some((lo, hi))) => format!("slope {s} (95% CI [{lo}, {hi}])"),
                _ => "slope undefined (fewer than 4 grid points or a zero quantile)".into(),
            });
            art.csv("replications.csv", exp.records.iter().flatten())?;
            art.csv(
                "scaling_summary.csv",
                (0..r.n_grid.len()).map(|k| ScalingSummaryRow {
                    n: r.n_grid[k],
                    mean: r.means[k],
                    quantile: r.quantiles[k],
                    quantile_delta_0_1: r.extra_quantiles[0].quantiles[k],
                    quantile_delta_0_01: r.extra_quantiles[1].quantiles[k],
                    prop1_bound: r.prop1_bound.as_ref().map(|b| b[k]),
                }),
            )?;
            art.json("scaling_report.json", r)?;
            if let Ok(svg) = render_svg(r) {
                art.text("scaling.svg", svg);
            }
        }
        ExperimentKind::Gap => {
            let exp = generalization_gap_experiment(inst, algo, &plan(v), cfg.eta, cfg.constants.c)?;
            let r = &exp.report;
            highlights.push(format!(
                "minimal c: {} (variance-type bound), {} (classical bound)",
                r.min_c_thm2, r.min_c_gen_bound
            ));
            art.csv("replications.csv", exp.records.iter().flatten())?;
            art.csv(
                "gap_summary.csv",
                (0..r.n_grid.len()).map(|k| GapSummaryRow {
                    n: r.n_grid[k],
                    gap_mean: r.gap_means[k],
                    gap_quantile: r.gap_quantiles[k],
                    eta_gap_quantile: r.eta_gap_quantiles[k],
                    emp_risk_mean: r.emp_risk_means[k],
                    gamma: r.gamma[k],
                    thm2_term: r.thm2_terms[k],
                    thm2_holds: r.thm2_holds[k],
                    gen_bound_term: r.gen_bound_terms[k],
                }),
            )?;
            art.json("gap_report.json", r)?;
        }
        ExperimentKind::Concentration => {
            let settings = &cfg.concentration;
            let case: Box<dyn SelfBoundedCase> = match settings.case {
                CaseKind::AdditiveUniform => Box::new(AdditiveUniformCase { n: settings.n }),
                CaseKind::ErmSecondMoment => Box::new(ErmSecondMomentCase::new(inst.clone(), settings.n)?),
            };
            let rep = selfbounding_mc_validation(case.as_ref(), cfg.reps, settings.t_grid.as_deref(), cfg.base_seed, par)?;
            highlights.push(format!(
                "{}: E f ≈ {}, tail bound {} at all {} grid points",
                rep.description,
                rep.e_f,
                if rep.all_hold() { "holds" } else { "fails" },
                rep.rows.len()
            ));
            if let Err(e) = rep.check() {
                violation = Some(e.into());
            }
            art.csv("concentration.csv", rep.rows.iter())?;
            art.json("concentration.json", &rep)?;
        }
        ExperimentKind::BoundEval => {
            let b = cfg.bound.as_ref().ok_or_else(|| CliError::config("bound", "required for bound-eval"))?;
            let mut params = b.params.clone();
            params.delta = params.delta.or(Some(cfg.delta));
            params.eta = params.eta.or(Some(cfg.eta));
            params.c = params.c.or(Some(cfg.constants.c));
            params.c_abs = params.c_abs.or(Some(cfg.constants.c_abs));
            params.c_opt = params.c_opt.or(Some(cfg.constants.c_opt));
            let value = evaluate(b.name, &params)?;
            highlights.push(format!("{value}"));
            art.json(
                "bound.json",
                &BoundOutput {
                    name: b.name,
                    params: &params,
                    value,
                },
            )?;
        }
    }

    let files = art.write(out_dir, cfg)?;
    match violation {
        Some(e) => Err(e),
        None => Ok(RunSummary { files, highlights }),
    }
}

fn plan(v: &ValidatedConfig) -> ExperimentPlan {
    let cfg = &v.config;
    ExperimentPlan {
        n_grid: cfg.n_grid.clone(),
        reps: cfg.reps,
        delta: cfg.delta,
        seed: cfg.base_seed,
        parallelism: cfg.parallelism.to_lab(),
        minimizer_tol: cfg.minimizer_tol,
        bootstrap_resamples: cfg.bootstrap_resamples,
    }
}
