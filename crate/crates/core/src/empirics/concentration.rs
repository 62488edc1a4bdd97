use rand::Rng;
use serde::{Deserialize, Serialize};

use super::harness::{run_tasks, Parallelism};
use super::stats::{mean, std_dev};
use crate::bounds::selfbounding_tail_bound;
use crate::error::{Error, Result};
use crate::loss::{Datum, LossKind};
use crate::problem::{Dataset, ProblemInstance};
use crate::rng::{derive_seed, rng_from_seed, LabRng};

/// One draw of `X`: `f(X)` and the `f_i(X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfBoundingDraw {
    pub f: f64,
    pub f_i: Vec<f64>,
}

/// A function of `n` independent variables claimed `(a, b)`-weakly
/// self-bounded: `f ≥ 0`, `f_i ≥ f` and `Σ (f − f_i)² ≤ a f + b`.
pub trait SelfBoundedCase: Sync {
    fn description(&self) -> String;
    /// `(a, b)`.
    fn constants(&self) -> (f64, f64);
    fn draw(&self, rng: &mut LabRng) -> Result<SelfBoundingDraw>;
}

/// `f(X) = Σ X_j` with `X_j ~ U[0, 1]`; `f_i` sets `X_i = 1`. `(a, b) = (0, n)`.
#[derive(Debug, Clone, Copy)]
pub struct AdditiveUniformCase {
    pub n: usize,
}

impl SelfBoundedCase for AdditiveUniformCase {
    fn description(&self) -> String {
        format!("sum of {} uniform [0, 1] variables", self.n)
    }

    fn constants(&self) -> (f64, f64) {
        (0.0, self.n as f64)
    }

    fn draw(&self, rng: &mut LabRng) -> Result<SelfBoundingDraw> {
        let x: Vec<f64> = (0..self.n).map(|_| rng.random::<f64>()).collect();
        // Summed afresh so that rounding keeps f_i ≥ f.
        let sum_with = |i: Option<usize>| -> f64 {
            x.iter()
                .enumerate()
                .map(|(j, v)| if Some(j) == i { 1.0 } else { *v })
                .sum()
        };
        Ok(SelfBoundingDraw {
            f: sum_with(None),
            f_i: (0..self.n).map(|i| sum_with(Some(i))).collect(),
        })
    }
}

/// `f(X) = E′ ℓ(X′, w_n(X))²` for exact ERM on the quadratic loss over a
/// finite support, with `f_i` the maximum over the atoms as the `i`-th
/// observation. With `γ = 4L²/(λn)`, `(a, b) = (8nγ², 2nγ⁴)`.
#[derive(Debug, Clone)]
pub struct ErmSecondMomentCase {
    inst: ProblemInstance,
    n: usize,
    gamma: f64,
}

impl ErmSecondMomentCase {
    pub fn new(inst: ProblemInstance, n: usize) -> Result<Self> {
        if inst.loss.kind != LossKind::RegQuadratic {
            return Err(Error::param("loss", "the ERM case needs the quadratic loss"));
        }
        if !inst.distribution.is_finite_support() {
            return Err(Error::RequiresFiniteSupport);
        }
        if n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        let (l, lam) = (inst.lipschitz(), inst.lambda());
        let gamma = 4.0 * l * l / (lam * n as f64);
        Ok(ErmSecondMomentCase { inst, n, gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn second_moment(&self, w: &crate::point::Point) -> Result<f64> {
        let atoms = self.inst.distribution.atoms().ok_or(Error::RequiresFiniteSupport)?;
        let mut total = 0.0;
        for a in atoms {
            let v = self.inst.loss_value(&a.datum, w)?;
            total += a.p * v * v;
        }
        Ok(total)
    }
}

impl SelfBoundedCase for ErmSecondMomentCase {
    fn description(&self) -> String {
        format!("second moment of the loss of exact quadratic ERM at n = {}", self.n)
    }

    fn constants(&self) -> (f64, f64) {
        let (n, g) = (self.n as f64, self.gamma);
        (8.0 * n * g * g, 2.0 * n * g.powi(4))
    }

    fn draw(&self, rng: &mut LabRng) -> Result<SelfBoundingDraw> {
        let data = Dataset::new(self.inst.sample_data(self.n, rng));
        let objective = self.inst.empirical_objective(&data)?;
        let mean = objective.mean().cloned().ok_or(Error::NonSmoothLoss)?;
        let f = self.second_moment(&self.inst.project(&mean))?;
        let atoms: Vec<Datum> = self
            .inst
            .distribution
            .atoms()
            .ok_or(Error::RequiresFiniteSupport)?
            .iter()
            .map(|a| a.datum.clone())
            .collect();
        let inv_n = 1.0 / self.n as f64;
        // f_i depends on x_i only through its value; the empirical mean of
        // the modified sample is m + (a − x_i)/n.
        let mut cache: Vec<(Datum, f64)> = Vec::new();
        let mut f_i = Vec::with_capacity(self.n);
        for x in &data.samples {
            if let Some((_, v)) = cache.iter().find(|(d, _)| d == x) {
                f_i.push(*v);
                continue;
            }
            let Datum::Point(xp) = x else {
                return Err(Error::DatumKind("the quadratic loss takes unlabeled points".into()));
            };
            let mut best = f;
            for a in &atoms {
                if let Datum::Point(ap) = a {
                    let shifted = mean.add(&ap.sub(xp).scale(inv_n));
                    best = best.max(self.second_moment(&self.inst.project(&shifted))?);
                }
            }
            cache.push((x.clone(), best));
            f_i.push(best);
        }
        Ok(SelfBoundingDraw { f, f_i })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    /// Fraction of draws with `Ê f − f ≥ t`.
    pub empirical: f64,
    pub std_error: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub description: String,
    pub a: f64,
    pub b: f64,
    pub replications: usize,
    pub e_f: f64,
    pub f_std: f64,
    /// Draws satisfying the self-bounding inequality; all of them on success.
    pub draws_satisfying: usize,
    /// Largest `Σ (f − f_i)² − (a f + b)` over the draws.
    pub max_selfbound_slack: f64,
    pub rows: Vec<TailRow>,
    pub seed: u64,
}

impl ConcentrationReport {
    pub fn all_hold(&self) -> bool {
        self.draws_satisfying == self.replications && self.rows.iter().all(|r| r.holds)
    }

    pub fn check(&self) -> Result<()> {
        match self.rows.iter().find(|r| !r.holds) {
            Some(r) => Err(Error::InvariantViolation {
                what: format!(
                    "lower-tail frequency {} at t = {} exceeds bound {} + 3·{}",
                    r.empirical, r.t, r.bound, r.std_error
                ),
                seed: self.seed,
            }),
            None => Ok(()),
        }
    }
}

/// Default grid: ten equally spaced points up to the largest observed
/// lower deviation (or up to 1 when `f` never falls below its mean).
fn default_t_grid(e_f: f64, values: &[f64]) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = if e_f - min > 0.0 { e_f - min } else { 1.0 };
    (1..=10).map(|k| t_max * k as f64 / 10.0).collect()
}

/// Monte Carlo check of the lower-tail bound `exp(−t²/(2a E f + 2b))`.
///
/// Draw `r` uses seed `derive_seed(seed, r)`; the self-bounding inequality
/// is verified on every draw and a failing draw aborts with its seed.
pub fn selfbounding_mc_validation(
    case: &dyn SelfBoundedCase,
    reps: usize,
    t_grid: Option<&[f64]>,
    seed: u64,
    parallelism: Parallelism,
) -> Result<ConcentrationReport> {
    if reps == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    if let Some(ts) = t_grid {
        if ts.is_empty() || ts.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::param("t_grid", "must hold finite values > 0"));
        }
    }
    let (a, b) = case.constants();
    let draws = run_tasks(reps, parallelism, |r| -> Result<(f64, f64)> {
        let draw_seed = derive_seed(seed, r as u64);
        let d = case.draw(&mut rng_from_seed(draw_seed))?;
        let violation = |what: String| Error::InvariantViolation { what, seed: draw_seed };
        if !(d.f.is_finite() && d.f >= 0.0) {
            return Err(violation(format!("f = {} is not a finite nonnegative value", d.f)));
        }
        if let Some(fi) = d.f_i.iter().find(|&&fi| fi < d.f) {
            return Err(violation(format!("f_i = {fi} is below f = {}", d.f)));
        }
        let lhs: f64 = d.f_i.iter().map(|fi| (d.f - fi).powi(2)).sum();
        let slack = lhs - (a * d.f + b);
        if slack > 1e-9 {
            return Err(violation(format!(
                "Σ(f − f_i)² = {lhs} exceeds a·f + b = {}",
                a * d.f + b
            )));
        }
        Ok((d.f, slack))
    });
    let mut values = Vec::with_capacity(reps);
    let mut max_slack = f64::NEG_INFINITY;
    for d in draws {
        let (f, slack) = d?;
        values.push(f);
        max_slack = max_slack.max(slack);
    }
    let e_f = mean(&values);
    let ts = match t_grid {
        Some(ts) => ts.to_vec(),
        None => default_t_grid(e_f, &values),
    };
    let rf = reps as f64;
    let rows = ts
        .iter()
        .map(|&t| {
            let hits = values.iter().filter(|&&f| e_f - f >= t).count() as f64;
            let p = hits / rf;
            let std_error = (p * (1.0 - p) / rf).sqrt();
            let bound = selfbounding_tail_bound(a, b, e_f.max(0.0), t)?;
            Ok(TailRow {
                t,
                empirical: p,
                std_error,
                bound,
                holds: p <= bound + 3.0 * std_error,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ConcentrationReport {
        description: case.description(),
        a,
        b,
        replications: reps,
        e_f,
        f_std: std_dev(&values),
        draws_satisfying: reps,
        max_selfbound_slack: max_slack,
        rows,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant;

    impl SelfBoundedCase for Constant {
        fn description(&self) -> String {
            "constant".into()
        }
        fn constants(&self) -> (f64, f64) {
            (1.0, 1.0)
        }
        fn draw(&self, _: &mut LabRng) -> Result<SelfBoundingDraw> {
            Ok(SelfBoundingDraw { f: 2.0, f_i: vec![2.0; 3] })
        }
    }

    struct Broken;

    impl SelfBoundedCase for Broken {
        fn description(&self) -> String {
            "broken".into()
        }
        fn constants(&self) -> (f64, f64) {
            (0.0, 0.5)
        }
        fn draw(&self, _: &mut LabRng) -> Result<SelfBoundingDraw> {
            Ok(SelfBoundingDraw { f: 0.0, f_i: vec![1.0] })
        }
    }

    #[test]
    fn constant_function_has_empty_lower_tail() {
        let rep = selfbounding_mc_validation(&Constant, 50, None, 1, Parallelism::Threads(1)).unwrap();
        assert_eq!(rep.e_f, 2.0);
        assert!(rep.rows.iter().all(|r| r.empirical == 0.0 && r.bound > 0.0));
        assert!(rep.all_hold());
    }

    #[test]
    fn tiny_t_has_bound_near_one() {
        let case = AdditiveUniformCase { n: 5 };
        let rep = selfbounding_mc_validation(&case, 200, Some(&[1e-9]), 3, Parallelism::Threads(1)).unwrap();
        assert!(rep.rows[0].bound > 1.0 - 1e-12);
        assert!(rep.rows[0].holds);
    }

    #[test]
    fn violation_reports_the_draw_seed() {
        let err = selfbounding_mc_validation(&Broken, 10, None, 5, Parallelism::Threads(1)).unwrap_err();
        match err {
            Error::InvariantViolation { seed, .. } => assert_eq!(seed, derive_seed(5, 0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn additive_increments_are_one_minus_x() {
        let mut rng = rng_from_seed(8);
        let d = AdditiveUniformCase { n: 4 }.draw(&mut rng).unwrap();
        assert!(d.f_i.iter().all(|&fi| fi >= d.f && fi - d.f <= 1.0 + 1e-12));
    }
}
