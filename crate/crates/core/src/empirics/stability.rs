use rand::Rng;
use serde::{Deserialize, Serialize};

use super::harness::{run_tasks, Parallelism};
use crate::error::{Error, Result};
use crate::loss::Datum;
use crate::problem::ProblemInstance;
use crate::rng::{derive_seed, rng_from_seed};
use crate::solvers::Algorithm;

/// Empirical uniform-stability constant.
///
/// `gamma_hat` is a maximum over sampled datasets, swap positions and
/// replacements, so it never exceeds the true worst case. The sup over the
/// evaluation point is exact on finite supports (`exact_probe_sup`) and a
/// maximum over sampled probes otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub gamma_hat: f64,
    pub replications: usize,
    pub probes: usize,
    pub theoretical_gamma: f64,
    pub n: usize,
    pub exact_probe_sup: bool,
    /// Seed of the replication attaining `gamma_hat`.
    pub worst_seed: u64,
}

impl StabilityEstimate {
    /// Errors when the estimate exceeds the guaranteed constant by more than 1e-9.
    pub fn check(&self) -> Result<()> {
        if self.gamma_hat > self.theoretical_gamma + 1e-9 {
            return Err(Error::InvariantViolation {
                what: format!(
                    "stability estimate {} exceeds the guaranteed {} at n = {}",
                    self.gamma_hat, self.theoretical_gamma, self.n
                ),
                seed: self.worst_seed,
            });
        }
        Ok(())
    }
}

/// Estimates the uniform stability of `algo` at sample size `n`.
///
/// Replication `r` uses seed `derive_seed(seed, r)`: it draws a dataset, a
/// position `i` and a replacement `x′`, fits both datasets and takes the
/// largest loss difference over the probe points.
pub fn estimate_stability(
    inst: &ProblemInstance,
    algo: &Algorithm,
    n: usize,
    reps: usize,
    probes: usize,
    seed: u64,
    parallelism: Parallelism,
) -> Result<StabilityEstimate> {
    if reps == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    if n < 2 {
        return Err(Error::param("n", "must be at least 2"));
    }
    algo.validate(inst)?;
    let atoms: Option<Vec<Datum>> = inst
        .distribution
        .atoms()
        .map(|a| a.iter().filter(|a| a.p > 0.0).map(|a| a.datum.clone()).collect());
    if atoms.is_none() && probes == 0 {
        return Err(Error::param("probes", "must be at least 1 for continuous distributions"));
    }
    let theoretical_gamma = algo.stability_bound(inst, n)?;

    let results = run_tasks(reps, parallelism, |r| -> Result<(f64, u64)> {
        let rep_seed = derive_seed(seed, r as u64);
        let mut rng = rng_from_seed(rep_seed);
        let data = crate::problem::Dataset {
            samples: inst.sample_data(n, &mut rng),
            seed: rep_seed,
        };
        let i = rng.random_range(0..n);
        let swapped = data.with_replacement(i, inst.sample_datum(&mut rng));
        let probe_set = match &atoms {
            Some(a) => a.clone(),
            None => inst.sample_data(probes, &mut rng),
        };
        let w = algo.fit(inst, &data)?.w_final;
        let w_swap = algo.fit(inst, &swapped)?.w_final;
        let gamma = probe_set
            .iter()
            .map(|x| Ok((inst.loss_value(x, &w)? - inst.loss_value(x, &w_swap)?).abs()))
            .try_fold(0.0f64, |acc, d: Result<f64>| Ok::<f64, Error>(acc.max(d?)))?;
        Ok((gamma, rep_seed))
    });

    let mut gamma_hat = 0.0;
    let mut worst_seed = derive_seed(seed, 0);
    for res in results {
        let (g, s) = res?;
        if g > gamma_hat {
            gamma_hat = g;
            worst_seed = s;
        }
    }
    Ok(StabilityEstimate {
        gamma_hat,
        replications: reps,
        probes: atoms.as_ref().map_or(probes, Vec::len),
        theoretical_gamma,
        n,
        exact_probe_sup: atoms.is_some(),
        worst_seed,
    })
}
