//! Problem instances, datasets and exact risk computation.

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::{DataDistribution, Sampler};
use crate::domain::ConvexDomain;
use crate::error::{Error, Result};
use crate::loss::{Datum, LossKind, LossModel};
use crate::point::Point;
use crate::rng::rng_from_seed;

/// Serialized form of a [`ProblemInstance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub loss: LossSpec,
    pub domain: ConvexDomain,
    pub distribution: DataDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    pub kind: LossKind,
    pub lambda: f64,
    /// Overrides the analytic Lipschitz constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    /// Overrides the default range bound `2L²/λ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_bound: Option<f64>,
}

/// A loss, a feasible set and a data distribution, with validated constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ProblemSpec", into = "ProblemSpec")]
pub struct ProblemInstance {
    pub loss: LossModel,
    pub domain: ConvexDomain,
    pub distribution: DataDistribution,
    pub dimension: usize,
    spec: ProblemSpec,
    sampler: Sampler,
}

impl TryFrom<ProblemSpec> for ProblemInstance {
    type Error = Error;

    fn try_from(spec: ProblemSpec) -> Result<Self> {
        ProblemInstance::from_spec(spec)
    }
}

impl From<ProblemInstance> for ProblemSpec {
    fn from(inst: ProblemInstance) -> Self {
        inst.spec
    }
}

impl ProblemInstance {
    /// Builds an instance with analytic constants.
    pub fn new(
        kind: LossKind,
        lambda: f64,
        domain: ConvexDomain,
        distribution: DataDistribution,
    ) -> Result<Self> {
        Self::from_spec(ProblemSpec {
            loss: LossSpec {
                kind,
                lambda,
                lipschitz: None,
                range_bound: None,
            },
            domain,
            distribution,
        })
    }

    pub fn from_spec(spec: ProblemSpec) -> Result<Self> {
        spec.domain.validate()?;
        let sampler = spec.distribution.sampler()?;
        let dimension = spec.domain.dim();
        if spec.distribution.dim() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: spec.distribution.dim(),
            });
        }
        if spec.loss.kind.wants_labels() != spec.distribution.is_labeled() {
            return Err(Error::param(
                "distribution",
                if spec.loss.kind.wants_labels() {
                    "hinge loss needs a finite support of labeled atoms"
                } else {
                    "labeled atoms only fit the hinge loss"
                },
            ));
        }
        let mut loss = LossModel::analytic(
            spec.loss.kind,
            spec.loss.lambda,
            spec.domain.max_norm(),
            spec.distribution.support_norm(),
        )?;
        if let Some(l) = spec.loss.lipschitz {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::param("loss.lipschitz", "must be finite and > 0"));
            }
            loss.lipschitz = l;
            loss.range_bound = 2.0 * l * l / loss.lambda;
        }
        if let Some(m) = spec.loss.range_bound {
            let cap = 2.0 * loss.lipschitz * loss.lipschitz / loss.lambda;
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::param("loss.range_bound", "must be finite and >= 0"));
            }
            if m > cap * (1.0 + 1e-12) {
                return Err(Error::param(
                    "loss.range_bound",
                    format!("exceeds 2L²/λ = {cap} implied by the Lipschitz constant"),
                ));
            }
            loss.range_bound = m;
        }
        let inst = ProblemInstance {
            loss,
            domain: spec.domain.clone(),
            distribution: spec.distribution.clone(),
            dimension,
            spec,
            sampler,
        };
        if inst.spec.loss.lipschitz.is_some() {
            inst.spot_check_lipschitz(256, 0x5EED)?;
        }
        Ok(inst)
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn lambda(&self) -> f64 {
        self.loss.lambda
    }

    pub fn lipschitz(&self) -> f64 {
        self.loss.lipschitz
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    /// Analytic upper bound on `ℓ(x, w)` itself over domain × support.
    pub fn loss_upper_bound(&self) -> f64 {
        let r = self.domain.max_norm();
        let s = self.distribution.support_norm();
        let lam = self.loss.lambda;
        match self.loss.kind {
            LossKind::RegQuadratic => 0.5 * lam * (r + s).powi(2),
            LossKind::RegGeometricMedian => (r + s) + 0.5 * lam * r * r,
            LossKind::RegHinge => 1.0 + s * r + 0.5 * lam * r * r,
        }
    }

    /// Checks `|ℓ(x,w₁) − ℓ(x,w₂)| ≤ L‖w₁ − w₂‖` on random feasible pairs.
    pub fn spot_check_lipschitz(&self, triples: usize, seed: u64) -> Result<()> {
        let mut rng = rng_from_seed(seed);
        for _ in 0..triples {
            let x = self.sampler.sample(&mut rng);
            let w1 = self.domain.sample_uniform(&mut rng);
            let w2 = self.domain.sample_uniform(&mut rng);
            let diff = (self.loss.value_unchecked(&x, &w1) - self.loss.value_unchecked(&x, &w2)).abs();
            if diff > self.loss.lipschitz * w1.distance(&w2) + 1e-9 {
                return Err(Error::InvariantViolation {
                    what: format!(
                        "declared Lipschitz constant {} is violated on a sampled pair",
                        self.loss.lipschitz
                    ),
                    seed,
                });
            }
        }
        Ok(())
    }

    fn check_datum(&self, x: &Datum) -> Result<()> {
        if x.dim() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.dim(),
            });
        }
        Ok(())
    }

    pub fn loss_value(&self, x: &Datum, w: &Point) -> Result<f64> {
        self.check_datum(x)?;
        self.loss.value(x, w)
    }

    pub fn subgradient(&self, x: &Datum, w: &Point) -> Result<Point> {
        self.check_datum(x)?;
        self.loss.subgradient(x, w)
    }

    pub fn project(&self, y: &Point) -> Point {
        self.domain.project(y)
    }

    /// Arithmetic mean of the loss over the dataset.
    pub fn empirical_risk(&self, data: &Dataset, w: &Point) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        w.check_dim(self.dimension)?;
        let total: f64 = data
            .samples
            .iter()
            .map(|x| self.loss_value(x, w))
            .sum::<Result<f64>>()?;
        Ok(total / data.len() as f64)
    }

    /// Exact risk `E ℓ(X, w)`; finite supports only.
    pub fn population_risk(&self, w: &Point) -> Result<f64> {
        let atoms = self.distribution.atoms().ok_or(Error::ZeroMonteCarloBudget)?;
        w.check_dim(self.dimension)?;
        Ok(atoms
            .iter()
            .map(|a| a.p * self.loss.value_unchecked(&a.datum, w))
            .sum())
    }

    /// Exact for finite supports; a Monte Carlo mean over `budget` draws otherwise.
    pub fn population_risk_estimate(&self, w: &Point, budget: usize, seed: u64) -> Result<RiskEstimate> {
        if self.distribution.is_finite_support() {
            return Ok(RiskEstimate {
                value: self.population_risk(w)?,
                std_error: 0.0,
                samples: 0,
            });
        }
        if budget == 0 {
            return Err(Error::ZeroMonteCarloBudget);
        }
        w.check_dim(self.dimension)?;
        let mut rng = rng_from_seed(seed);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..budget {
            let v = self.loss.value_unchecked(&self.sampler.sample(&mut rng), w);
            sum += v;
            sum_sq += v * v;
        }
        let n = budget as f64;
        let mean = sum / n;
        let var = if budget > 1 {
            ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Ok(RiskEstimate {
            value: mean,
            std_error: (var / n).sqrt(),
            samples: budget,
        })
    }

    /// The exact population objective over the atoms of a finite support.
    pub fn population_objective(&self) -> Result<Objective<'_>> {
        let atoms = self.distribution.atoms().ok_or(Error::RequiresFiniteSupport)?;
        Ok(Objective::new(
            &self.loss,
            atoms
                .iter()
                .filter(|a| a.p > 0.0)
                .map(|a| (a.datum.clone(), a.p))
                .collect(),
        ))
    }

    pub fn empirical_objective(&self, data: &Dataset) -> Result<Objective<'_>> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for x in &data.samples {
            self.check_datum(x)?;
        }
        Ok(Objective::new(&self.loss, data.weighted()))
    }

    /// Risk minimizer `w*` over the domain and its risk, to accuracy `tol`.
    ///
    /// The quadratic loss has risk `(λ/2)‖w − μ‖² + const`, so `w*` is the
    /// projection of the mean `μ`. The other losses run decaying-step
    /// descent on the exact population risk for `⌈4L²/(λ tol)⌉` steps.
    pub fn population_minimizer(&self, tol: f64) -> Result<(Point, f64)> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::param("tol", "must be finite and > 0"));
        }
        let objective = self.population_objective()?;
        let w = match objective.mean() {
            Some(mu) => self.domain.project(mu),
            None => {
                let steps = crate::solvers::steps_for_accuracy(&self.loss, tol);
                crate::solvers::descend_decaying(&objective, &self.domain, steps, false).w_final
            }
        };
        let r = self.population_risk(&w)?;
        Ok((w, r))
    }

    /// Draws `n` i.i.d. observations; deterministic in `seed`.
    pub fn sample_dataset(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        let mut rng = rng_from_seed(seed);
        Ok(Dataset {
            samples: self.sample_data(n, &mut rng),
            seed,
        })
    }

    pub fn sample_data<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Datum> {
        (0..n).map(|_| self.sampler.sample(rng)).collect()
    }

    pub fn sample_datum<R: Rng + ?Sized>(&self, rng: &mut R) -> Datum {
        self.sampler.sample(rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Monte Carlo draws used; 0 when exact.
    pub samples: usize,
}

/// `n` observations and the seed they were drawn with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<Datum>,
    pub seed: u64,
}

impl Dataset {
    pub fn new(samples: Vec<Datum>) -> Self {
        Dataset { samples, seed: 0 }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Copy with observation `i` replaced by `x`.
    pub fn with_replacement(&self, i: usize, x: Datum) -> Dataset {
        let mut samples = self.samples.clone();
        samples[i] = x;
        Dataset { samples, seed: self.seed }
    }

    /// Distinct observations with their empirical frequencies, in first-seen order.
    pub fn weighted(&self) -> Vec<(Datum, f64)> {
        let mut groups: IndexMap<Vec<u64>, (Datum, usize)> = IndexMap::new();
        for x in &self.samples {
            groups
                .entry(x.bits())
                .or_insert_with(|| (x.clone(), 0))
                .1 += 1;
        }
        let n = self.samples.len() as f64;
        groups
            .into_values()
            .map(|(x, c)| (x, c as f64 / n))
            .collect()
    }
}

/// A weighted sum of losses `Σ_k ω_k ℓ(x_k, w)` with `Σ ω_k = 1`: the
/// empirical risk (weights = frequencies) or the exact population risk of a
/// finite support (weights = probabilities).
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    loss: &'a LossModel,
    terms: Vec<(Datum, f64)>,
    mean: Option<Point>,
}

impl<'a> Objective<'a> {
    pub fn new(loss: &'a LossModel, terms: Vec<(Datum, f64)>) -> Self {
        // The quadratic risk only sees the data through its weighted mean.
        let mean = match loss.kind {
            LossKind::RegQuadratic => {
                let dim = terms.first().map_or(0, |(x, _)| x.dim());
                let mut m = Point::zeros(dim);
                for (x, wt) in &terms {
                    if let Datum::Point(x) = x {
                        m.axpy(*wt, x);
                    }
                }
                Some(m)
            }
            _ => None,
        };
        Objective { loss, terms, mean }
    }

    pub fn loss(&self) -> &LossModel {
        self.loss
    }

    /// Weighted data mean, available for the quadratic loss.
    pub fn mean(&self) -> Option<&Point> {
        self.mean.as_ref()
    }

    pub fn value(&self, w: &Point) -> f64 {
        self.terms
            .iter()
            .map(|(x, wt)| wt * self.loss.value_unchecked(x, w))
            .sum()
    }

    /// A subgradient: the weighted mean of per-term subgradients.
    pub fn subgradient(&self, w: &Point) -> Point {
        match &self.mean {
            Some(m) => w.sub(m).scale(self.loss.lambda),
            None => {
                let mut g = Point::zeros(w.dim());
                for (x, wt) in &self.terms {
                    self.loss.add_subgradient(x, w, *wt, &mut g);
                }
                g
            }
        }
    }
}
