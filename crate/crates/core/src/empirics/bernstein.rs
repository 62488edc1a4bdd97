use serde::{Deserialize, Serialize};

use crate::bounds::bernstein_constant;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::problem::ProblemInstance;
use crate::rng::rng_from_seed;

/// Excess risks below this are excluded from the ratio.
const EXCESS_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinReport {
    /// Largest `V(w) / (R(w) − R(w*))` over the sampled `w`.
    pub max_ratio: f64,
    pub bernstein_constant: f64,
    pub w_star: Point,
    pub r_star: f64,
    pub samples: usize,
    /// Samples dropped by the excess-risk guard.
    pub excluded: usize,
    /// Largest `V(w) − L²‖w − w*‖²`; nonpositive when the variance link holds.
    pub max_variance_slack: f64,
    /// Smallest `R(w) − R(w*) − (λ/2)‖w − w*‖²`.
    pub min_growth_slack: f64,
    /// Tolerance on the growth slack implied by the accuracy of `w*`.
    pub growth_tolerance: f64,
    pub seed: u64,
}

impl BernsteinReport {
    pub fn check(&self) -> Result<()> {
        let fail = |what: String| Err(Error::InvariantViolation { what, seed: self.seed });
        if self.max_ratio > self.bernstein_constant * (1.0 + 1e-6) {
            return fail(format!(
                "variance-to-excess ratio {} exceeds B = {}",
                self.max_ratio, self.bernstein_constant
            ));
        }
        if self.max_variance_slack > 1e-9 {
            return fail(format!("V(w) exceeds L²‖w − w*‖² by {}", self.max_variance_slack));
        }
        if self.min_growth_slack < -self.growth_tolerance {
            return fail(format!(
                "quadratic growth fails by {} (tolerance {})",
                -self.min_growth_slack, self.growth_tolerance
            ));
        }
        Ok(())
    }
}

/// `(V(w), R(w) − R(w*))` computed exactly over the atoms.
pub fn bernstein_terms(inst: &ProblemInstance, w: &Point, w_star: &Point) -> Result<(f64, f64)> {
    let atoms = inst.distribution.atoms().ok_or(Error::RequiresFiniteSupport)?;
    let (mut v, mut excess) = (0.0, 0.0);
    for a in atoms {
        let d = inst.loss_value(&a.datum, w)? - inst.loss_value(&a.datum, w_star)?;
        v += a.p * d * d;
        excess += a.p * d;
    }
    Ok((v, excess))
}

/// Checks the Bernstein condition with `B = 2L²/λ` on `n_w_samples` points
/// drawn uniformly from the domain, with `w*` computed to accuracy
/// `minimizer_tol`.
pub fn verify_bernstein(
    inst: &ProblemInstance,
    n_w_samples: usize,
    seed: u64,
    minimizer_tol: f64,
) -> Result<BernsteinReport> {
    if n_w_samples == 0 {
        return Err(Error::param("n_w_samples", "must be at least 1"));
    }
    let (l, lam) = (inst.lipschitz(), inst.lambda());
    let b = bernstein_constant(l, lam)?;
    let (w_star, r_star) = inst.population_minimizer(minimizer_tol)?;
    // An approximate w* with suboptimality τ lies within √(2τ/λ) of the true one.
    let growth_tolerance = if inst.loss.smoothness.is_some() {
        1e-12
    } else {
        2.0 * minimizer_tol + lam * (2.0 * minimizer_tol / lam).sqrt() * inst.domain.diameter()
    };

    let mut rng = rng_from_seed(seed);
    let mut max_ratio = 0.0f64;
    let mut excluded = 0;
    let mut max_variance_slack = f64::NEG_INFINITY;
    let mut min_growth_slack = f64::INFINITY;
    for _ in 0..n_w_samples {
        let w = inst.domain.sample_uniform(&mut rng);
        let (v, excess) = bernstein_terms(inst, &w, &w_star)?;
        let dist_sq = w.sub(&w_star).norm_sq();
        max_variance_slack = max_variance_slack.max(v - l * l * dist_sq);
        min_growth_slack = min_growth_slack.min(excess - 0.5 * lam * dist_sq);
        if excess < EXCESS_GUARD {
            excluded += 1;
            continue;
        }
        max_ratio = max_ratio.max(v / excess);
    }
    Ok(BernsteinReport {
        max_ratio,
        bernstein_constant: b,
        w_star,
        r_star,
        samples: n_w_samples,
        excluded,
        max_variance_slack,
        min_growth_slack,
        growth_tolerance,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{Atom, DataDistribution};
    use crate::domain::ConvexDomain;
    use crate::loss::LossKind;

    fn quad2() -> ProblemInstance {
        ProblemInstance::new(
            LossKind::RegQuadratic,
            2.0,
            ConvexDomain::l2_ball(Point::zeros(1), 5.0).unwrap(),
            DataDistribution::finite(vec![Atom::new(Point::from([0.0]), 0.5), Atom::new(Point::from([2.0]), 0.5)])
                .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn two_atom_terms_match_direct_sum() {
        let inst = quad2();
        let (w, ws) = (Point::from([2.0]), Point::from([1.0]));
        let (v, excess) = bernstein_terms(&inst, &w, &ws).unwrap();
        // ℓ(0,·): 4 vs 1; ℓ(2,·): 0 vs 1.
        assert_eq!(excess, 0.5 * 3.0 - 0.5 * 1.0);
        assert_eq!(v, 0.5 * 9.0 + 0.5 * 1.0);
        let l = inst.lipschitz();
        assert!(v / excess <= 2.0 * l * l / 2.0);
    }

    #[test]
    fn minimizer_is_excluded() {
        let inst = quad2();
        let ws = Point::from([1.0]);
        let (v, excess) = bernstein_terms(&inst, &ws, &ws).unwrap();
        assert_eq!((v, excess), (0.0, 0.0));
    }

    #[test]
    fn report_on_quadratic_passes() {
        let rep = verify_bernstein(&quad2(), 500, 9, 1e-9).unwrap();
        rep.check().unwrap();
        assert!(rep.max_ratio > 0.0);
    }
}
