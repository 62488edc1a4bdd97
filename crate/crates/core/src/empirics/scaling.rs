use serde::{Deserialize, Serialize};

use super::harness::{run_tasks, Parallelism};
use super::stats::{mean, ols, percentile_interval, upper_quantile, upper_quantile_in_place};
use crate::bounds::{gen_bound_rhs, prop1_rhs, thm2_stat_term, BoundQuery};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::problem::ProblemInstance;
use crate::rng::{derive_seed, derive_seed_path, rng_from_seed};
use crate::solvers::Algorithm;

/// Extra failure probabilities reported next to the configured one.
pub const EXTRA_DELTAS: [f64; 2] = [0.1, 0.01];

const BOOTSTRAP_TAG: u64 = 0xB007;

/// One replication of an experiment at sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    /// `R(w_n) − R(w*)`, clipped at 0.
    pub excess_risk: f64,
    pub emp_risk: f64,
    pub pop_risk: f64,
    /// `R(w_n) − R_n(w_n)`.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn new(seed: u64) -> Self {
        BootstrapConfig {
            resamples: 1000,
            level: 0.95,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileCurve {
    pub delta: f64,
    pub quantiles: Vec<f64>,
}

/// Per-`n` tail quantiles of the excess risk and their log-log slope.
///
/// `slope`, `intercept` and `slope_ci` are absent when the fit is undefined:
/// fewer than four grid points or a zero quantile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub algorithm: String,
    pub n_grid: Vec<usize>,
    pub delta: f64,
    pub replications: usize,
    pub quantiles: Vec<f64>,
    pub means: Vec<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub slope_ci: Option<(f64, f64)>,
    pub extra_quantiles: Vec<QuantileCurve>,
    pub w_star: Point,
    pub r_star: f64,
    /// Excess-risk bound at `c = 1`, when the algorithm carries one.
    pub prop1_bound: Option<Vec<f64>>,
    /// Smallest `c` for which the bound covers every quantile.
    pub min_constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingExperiment {
    pub report: ScalingReport,
    /// One entry per grid point, each holding `reps` records in order.
    pub records: Vec<Vec<ReplicationRecord>>,
}

/// Shared settings of the replication experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub delta: f64,
    pub seed: u64,
    pub parallelism: Parallelism,
    /// Accuracy of `w*` when it has no closed form.
    pub minimizer_tol: f64,
    pub bootstrap_resamples: usize,
}

impl ExperimentPlan {
    pub fn new(n_grid: Vec<usize>, reps: usize, delta: f64, seed: u64) -> Self {
        ExperimentPlan {
            n_grid,
            reps,
            delta,
            seed,
            parallelism: Parallelism::Auto,
            minimizer_tol: 1e-6,
            bootstrap_resamples: 1000,
        }
    }

    pub fn with_parallelism(mut self, parallelism: Parallelism) -> Self {
        self.parallelism = parallelism;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::param("n_grid", "must not be empty"));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("n_grid", "must be positive and strictly increasing"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param("delta", "must lie in (0, 1)"));
        }
        if (self.reps as f64) < 10.0 / self.delta {
            return Err(Error::param(
                "reps",
                format!("must be at least 10/delta = {}", (10.0 / self.delta).ceil()),
            ));
        }
        if !(self.minimizer_tol.is_finite() && self.minimizer_tol > 0.0) {
            return Err(Error::param("minimizer_tol", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// Runs `algo` on `plan.reps` fresh datasets at every grid size and records
/// exact population and empirical risks. Replication `r` at size `n` draws
/// its data from seed `derive_seed_path(plan.seed, [n, r])`.
pub fn run_replications(
    inst: &ProblemInstance,
    algo: &Algorithm,
    plan: &ExperimentPlan,
) -> Result<(Vec<Vec<ReplicationRecord>>, Point, f64)> {
    plan.validate()?;
    if !inst.distribution.is_finite_support() {
        return Err(Error::RequiresFiniteSupport);
    }
    algo.validate(inst)?;
    let (w_star, r_star) = inst.population_minimizer(plan.minimizer_tol)?;
    let reps = plan.reps;
    let flat = run_tasks(plan.n_grid.len() * reps, plan.parallelism, |task| {
        let (k, rep) = (task / reps, task % reps);
        let n = plan.n_grid[k];
        let seed = derive_seed_path(plan.seed, &[n as u64, rep as u64]);
        let data = inst.sample_dataset(n, seed)?;
        let w = algo.fit(inst, &data)?.w_final;
        let pop_risk = inst.population_risk(&w)?;
        let emp_risk = inst.empirical_risk(&data, &w)?;
        Ok(ReplicationRecord {
            n,
            rep,
            seed,
            excess_risk: (pop_risk - r_star).max(0.0),
            emp_risk,
            pop_risk,
            gap: pop_risk - emp_risk,
        })
    });
    let flat: Vec<ReplicationRecord> = flat.into_iter().collect::<Result<_>>()?;
    let records = flat.chunks(reps).map(<[_]>::to_vec).collect();
    Ok((records, w_star, r_star))
}

/// Excess-risk quantiles across the grid, with the fitted log-log slope.
pub fn excess_risk_experiment(
    inst: &ProblemInstance,
    algo: &Algorithm,
    plan: &ExperimentPlan,
) -> Result<ScalingExperiment> {
    let (records, w_star, r_star) = run_replications(inst, algo, plan)?;
    let samples = column(&records, |r| r.excess_risk);
    let quantiles = quantiles_at(&samples, plan.delta)?;
    let extra_quantiles = EXTRA_DELTAS
        .iter()
        .map(|&d| {
            Ok(QuantileCurve {
                delta: d,
                quantiles: quantiles_at(&samples, d)?,
            })
        })
        .collect::<Result<_>>()?;
    let fit = fit_quantile_slope(
        &plan.n_grid,
        &samples,
        plan.delta,
        &bootstrap_for(plan),
        plan.parallelism,
    )
    .ok();

    let prop1_bound = match algo {
        Algorithm::Constant { .. } => None,
        _ => Some(
            plan.n_grid
                .iter()
                .map(|&n| {
                    prop1_rhs(
                        inst.lipschitz(),
                        inst.lambda(),
                        n as f64,
                        plan.delta,
                        algo.delta_bar(inst, n)?,
                        1.0,
                    )
                })
                .collect::<Result<Vec<f64>>>()?,
        ),
    };
    let min_constant = prop1_bound.as_ref().map(|b| {
        quantiles
            .iter()
            .zip(b)
            .map(|(q, b)| q / b)
            .fold(0.0f64, f64::max)
    });

    Ok(ScalingExperiment {
        report: ScalingReport {
            algorithm: algo.name().to_string(),
            n_grid: plan.n_grid.clone(),
            delta: plan.delta,
            replications: plan.reps,
            means: samples.iter().map(|s| mean(s)).collect(),
            quantiles,
            slope: fit.map(|f| f.slope),
            intercept: fit.map(|f| f.intercept),
            slope_ci: fit.map(|f| f.ci),
            extra_quantiles,
            w_star,
            r_star,
            prop1_bound,
            min_constant,
        },
        records,
    })
}

/// Refits the slope of an experiment's quantiles with a fresh bootstrap.
pub fn fit_scaling_slope(exp: &ScalingExperiment, boot: &BootstrapConfig) -> Result<SlopeFit> {
    let samples = column(&exp.records, |r| r.excess_risk);
    fit_quantile_slope(&exp.report.n_grid, &samples, exp.report.delta, boot, Parallelism::Threads(1))
}

/// Least-squares fit of `ln q` against `ln n`.
pub fn fit_log_log(n_grid: &[usize], quantiles: &[f64]) -> Result<(f64, f64)> {
    if n_grid.len() < 4 || n_grid.len() != quantiles.len() {
        return Err(Error::param("n_grid", "a slope fit needs at least 4 grid points"));
    }
    if quantiles.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
        return Err(Error::param(
            "quantiles",
            "a zero quantile has no logarithm; use more replications or fit the means",
        ));
    }
    let x: Vec<f64> = n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = quantiles.iter().map(|q| q.ln()).collect();
    ols(&x, &y)
}

/// Fits the slope of per-`n` `(1 − δ)`-quantiles of `samples` and a
/// percentile bootstrap interval from resampling replications within each `n`.
pub fn fit_quantile_slope(
    n_grid: &[usize],
    samples: &[Vec<f64>],
    delta: f64,
    boot: &BootstrapConfig,
    parallelism: Parallelism,
) -> Result<SlopeFit> {
    let (slope, intercept) = fit_log_log(n_grid, &quantiles_at(samples, delta)?)?;
    if boot.resamples == 0 || !(boot.level > 0.0 && boot.level < 1.0) {
        return Err(Error::param("bootstrap", "needs resamples > 0 and level in (0, 1)"));
    }
    let slopes = run_tasks(boot.resamples, parallelism, |b| {
        let mut rng = rng_from_seed(derive_seed(boot.seed, b as u64));
        let q: Vec<f64> = samples
            .iter()
            .map(|s| {
                let mut draw: Vec<f64> = (0..s.len()).map(|_| s[rand::Rng::random_range(&mut rng, 0..s.len())]).collect();
                upper_quantile_in_place(&mut draw, delta)
            })
            .collect::<Result<_>>()?;
        Ok::<_, Error>(fit_log_log(n_grid, &q).ok().map(|(s, _)| s))
    });
    let mut ok: Vec<f64> = Vec::with_capacity(boot.resamples);
    for s in slopes {
        if let Some(s) = s? {
            ok.push(s);
        }
    }
    if ok.len() * 2 < boot.resamples {
        return Err(Error::param("quantiles", "most bootstrap resamples have a zero quantile"));
    }
    let ci = percentile_interval(&mut ok, 1.0 - boot.level);
    Ok(SlopeFit { slope, intercept, ci })
}

fn bootstrap_for(plan: &ExperimentPlan) -> BootstrapConfig {
    BootstrapConfig {
        resamples: plan.bootstrap_resamples,
        level: 0.95,
        seed: derive_seed(plan.seed, BOOTSTRAP_TAG),
    }
}

fn column(records: &[Vec<ReplicationRecord>], f: impl Fn(&ReplicationRecord) -> f64) -> Vec<Vec<f64>> {
    records.iter().map(|rs| rs.iter().map(&f).collect()).collect()
}

fn quantiles_at(samples: &[Vec<f64>], delta: f64) -> Result<Vec<f64>> {
    samples.iter().map(|s| upper_quantile(s, delta)).collect()
}

/// Generalization-gap quantiles against the variance-type and the classical
/// stability bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub algorithm: String,
    pub n_grid: Vec<usize>,
    pub delta: f64,
    pub eta: f64,
    pub c: f64,
    pub replications: usize,
    /// Quantiles of `R(w_n) − R_n(w_n)`.
    pub gap_quantiles: Vec<f64>,
    pub gap_means: Vec<f64>,
    /// Quantiles of `R(w_n) − (1 + η) R_n(w_n)`.
    pub eta_gap_quantiles: Vec<f64>,
    pub emp_risk_means: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Bound on the loss used as `M`.
    pub loss_bound: f64,
    /// `(1 + 1/η)(γ log n + M/n) log(1/δ)` per `n`.
    pub thm2_terms: Vec<f64>,
    /// Whether `c` times the term covers the quantile.
    pub thm2_holds: Vec<bool>,
    pub min_c_thm2: f64,
    /// `γ log n log(1/δ) + M √(log(1/δ)/n)` per `n`.
    pub gen_bound_terms: Vec<f64>,
    pub min_c_gen_bound: f64,
    pub gap_slope: Option<SlopeFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapExperiment {
    pub report: GapReport,
    pub records: Vec<Vec<ReplicationRecord>>,
}

/// Runs the replications of [`run_replications`] and compares gap quantiles
/// with the stability bounds at the configured `η` and `c`.
pub fn generalization_gap_experiment(
    inst: &ProblemInstance,
    algo: &Algorithm,
    plan: &ExperimentPlan,
    eta: f64,
    c: f64,
) -> Result<GapExperiment> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::param("eta", "must be finite and > 0"));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::param("c", "must be finite and > 0"));
    }
    let (records, _, _) = run_replications(inst, algo, plan)?;
    let gaps = column(&records, |r| r.gap);
    let eta_gaps = column(&records, |r| r.pop_risk - (1.0 + eta) * r.emp_risk);
    let gap_quantiles = quantiles_at(&gaps, plan.delta)?;
    let eta_gap_quantiles = quantiles_at(&eta_gaps, plan.delta)?;
    let loss_bound = inst.loss_upper_bound();

    let mut gamma = Vec::new();
    let mut thm2_terms = Vec::new();
    let mut gen_bound_terms = Vec::new();
    for &n in &plan.n_grid {
        let g = algo.stability_bound(inst, n)?;
        let q = BoundQuery {
            gamma: g,
            m: loss_bound,
            n: n as f64,
            delta: plan.delta,
            eta,
            c: 1.0,
            ..BoundQuery::default()
        };
        gamma.push(g);
        thm2_terms.push(thm2_stat_term(&q)?);
        gen_bound_terms.push(gen_bound_rhs(&q)?);
    }
    let ratio_max = |qs: &[f64], terms: &[f64]| {
        qs.iter()
            .zip(terms)
            .map(|(q, t)| if *t > 0.0 { q.max(0.0) / t } else { 0.0 })
            .fold(0.0f64, f64::max)
    };
    let min_c_thm2 = ratio_max(&eta_gap_quantiles, &thm2_terms);
    let min_c_gen_bound = ratio_max(&gap_quantiles, &gen_bound_terms);
    let thm2_holds = eta_gap_quantiles
        .iter()
        .zip(&thm2_terms)
        .map(|(q, t)| *q <= c * t)
        .collect();
    let gap_slope = fit_quantile_slope(&plan.n_grid, &gaps, plan.delta, &bootstrap_for(plan), plan.parallelism).ok();

    Ok(GapExperiment {
        report: GapReport {
            algorithm: algo.name().to_string(),
            n_grid: plan.n_grid.clone(),
            delta: plan.delta,
            eta,
            c,
            replications: plan.reps,
            gap_means: gaps.iter().map(|s| mean(s)).collect(),
            gap_quantiles,
            eta_gap_quantiles,
            emp_risk_means: column(&records, |r| r.emp_risk).iter().map(|s| mean(s)).collect(),
            gamma,
            loss_bound,
            thm2_terms,
            thm2_holds,
            min_c_thm2,
            gen_bound_terms,
            min_c_gen_bound,
            gap_slope,
        },
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{Atom, DataDistribution};
    use crate::domain::ConvexDomain;
    use crate::loss::LossKind;

    fn quad(atoms: Vec<Atom>) -> ProblemInstance {
        ProblemInstance::new(
            LossKind::RegQuadratic,
            1.0,
            ConvexDomain::l2_ball(Point::zeros(1), 10.0).unwrap(),
            DataDistribution::finite(atoms).unwrap(),
        )
        .unwrap()
    }

    fn plan(grid: Vec<usize>, reps: usize) -> ExperimentPlan {
        ExperimentPlan::new(grid, reps, 0.05, 11).with_parallelism(Parallelism::Threads(1))
    }

    #[test]
    fn log_log_fit_of_power_laws() {
        let grid = [100usize, 1000, 10_000, 100_000];
        let inv: Vec<f64> = grid.iter().map(|&n| 1.0 / n as f64).collect();
        let (s, _) = fit_log_log(&grid, &inv).unwrap();
        assert!((s + 1.0).abs() < 1e-12);
        let inv_sqrt: Vec<f64> = grid.iter().map(|&n| 1.0 / (n as f64).sqrt()).collect();
        let (s, _) = fit_log_log(&grid, &inv_sqrt).unwrap();
        assert!((s + 0.5).abs() < 1e-12);
    }

    #[test]
    fn log_over_n_fit_lies_in_window() {
        let grid = [100usize, 1000, 10_000, 100_000];
        let q: Vec<f64> = grid.iter().map(|&n| (n as f64).ln() / n as f64).collect();
        let (s, _) = fit_log_log(&grid, &q).unwrap();
        assert!(s > -1.0 && s < -0.85, "slope {s}");
    }

    #[test]
    fn fit_rejects_zero_quantile_and_short_grid() {
        assert!(fit_log_log(&[1, 2, 3, 4], &[1.0, 0.5, 0.0, 0.1]).is_err());
        assert!(fit_log_log(&[1, 2, 3], &[1.0, 0.5, 0.2]).is_err());
    }

    #[test]
    fn too_few_replications_is_an_error() {
        let inst = quad(vec![Atom::new(Point::from([1.0]), 1.0)]);
        assert!(excess_risk_experiment(&inst, &Algorithm::erm(), &plan(vec![10], 199)).is_err());
        assert!(excess_risk_experiment(&inst, &Algorithm::erm(), &plan(vec![10], 200)).is_ok());
    }

    #[test]
    fn degenerate_distribution_has_zero_excess() {
        let inst = quad(vec![Atom::new(Point::from([1.5]), 1.0)]);
        let exp = excess_risk_experiment(&inst, &Algorithm::erm(), &plan(vec![5, 10, 20, 40], 200)).unwrap();
        assert!(exp.report.quantiles.iter().all(|&q| q == 0.0));
        assert!(exp.report.slope.is_none());
    }

    #[test]
    fn constant_algorithm_quantile_equals_mean() {
        let inst = quad(vec![Atom::new(Point::from([-1.0]), 0.5), Atom::new(Point::from([1.0]), 0.5)]);
        let algo = Algorithm::Constant { w0: Point::from([0.5]) };
        let exp = excess_risk_experiment(&inst, &algo, &plan(vec![5, 10], 200)).unwrap();
        for (q, m) in exp.report.quantiles.iter().zip(&exp.report.means) {
            assert_eq!(*q, 0.125);
            assert!((q - m).abs() < 1e-15);
        }
        assert!(exp.report.prop1_bound.is_none());
    }

    #[test]
    fn records_are_grouped_by_n() {
        let inst = quad(vec![Atom::new(Point::from([-1.0]), 0.5), Atom::new(Point::from([1.0]), 0.5)]);
        let (records, w_star, _) = run_replications(&inst, &Algorithm::erm(), &plan(vec![3, 7], 200)).unwrap();
        assert_eq!(w_star, Point::from([0.0]));
        assert_eq!(records.len(), 2);
        assert!(records[1].iter().enumerate().all(|(i, r)| r.n == 7 && r.rep == i));
    }

    #[test]
    fn separable_hinge_has_zero_gap() {
        let inst = ProblemInstance::new(
            LossKind::RegHinge,
            1.0,
            ConvexDomain::l2_ball(Point::zeros(1), 1.0).unwrap(),
            DataDistribution::finite(vec![Atom::new(
                crate::loss::Datum::Labeled { a: Point::from([4.0]), y: 1.0 },
                1.0,
            )])
            .unwrap(),
        )
        .unwrap();
        let algo = Algorithm::Erm { tol: 1e-3 };
        let exp = generalization_gap_experiment(&inst, &algo, &plan(vec![4, 8], 200), 1.0, 1.0).unwrap();
        assert!(exp.report.gap_quantiles.iter().all(|&g| g.abs() < 1e-12));
        assert!(exp.report.thm2_holds.iter().all(|&h| h));
    }
}
