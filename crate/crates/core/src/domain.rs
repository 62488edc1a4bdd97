//! Closed convex feasible sets and their Euclidean projections.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

/// A closed convex subset of ℝ^d with an exact Euclidean projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvexDomain {
    /// `{w : ‖w − center‖ ≤ radius}`
    L2Ball { center: Point, radius: f64 },
    /// `{w : lower ≤ w ≤ upper}` coordinatewise.
    Box { lower: Point, upper: Point },
    /// Probability simplex `{w ≥ 0 : Σ w = 1}` in ℝ^dim.
    Simplex { dim: usize },
}

impl ConvexDomain {
    pub fn l2_ball(center: Point, radius: f64) -> Result<Self> {
        let dom = ConvexDomain::L2Ball { center, radius };
        dom.validate()?;
        Ok(dom)
    }

    pub fn unit_box(lower: Point, upper: Point) -> Result<Self> {
        let dom = ConvexDomain::Box { lower, upper };
        dom.validate()?;
        Ok(dom)
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        let dom = ConvexDomain::Simplex { dim };
        dom.validate()?;
        Ok(dom)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexDomain::L2Ball { center, radius } => {
                Point::new(center.to_vec())?;
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::param("domain.radius", "must be finite and >= 0"));
                }
            }
            ConvexDomain::Box { lower, upper } => {
                Point::new(lower.to_vec())?;
                Point::new(upper.to_vec())?;
                lower_upper_dims(lower, upper)?;
                if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
                    return Err(Error::param("domain.lower", "must not exceed upper"));
                }
            }
            ConvexDomain::Simplex { dim } => {
                if *dim == 0 {
                    return Err(Error::param("domain.dim", "must be at least 1"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexDomain::L2Ball { center, .. } => center.dim(),
            ConvexDomain::Box { lower, .. } => lower.dim(),
            ConvexDomain::Simplex { dim } => *dim,
        }
    }

    /// Largest distance between two points of the set.
    pub fn diameter(&self) -> f64 {
        match self {
            ConvexDomain::L2Ball { radius, .. } => 2.0 * radius,
            ConvexDomain::Box { lower, upper } => upper.distance(lower),
            ConvexDomain::Simplex { dim } => {
                if *dim >= 2 {
                    std::f64::consts::SQRT_2
                } else {
                    0.0
                }
            }
        }
    }

    /// `max ‖w‖` over the set, i.e. its radius about the origin.
    pub fn max_norm(&self) -> f64 {
        match self {
            ConvexDomain::L2Ball { center, radius } => center.norm() + radius,
            ConvexDomain::Box { lower, upper } => lower
                .iter()
                .zip(upper.iter())
                .map(|(l, u)| {
                    let m = l.abs().max(u.abs());
                    m * m
                })
                .sum::<f64>()
                .sqrt(),
            ConvexDomain::Simplex { .. } => 1.0,
        }
    }

    /// Euclidean projection of `y` onto the set.
    pub fn project(&self, y: &Point) -> Point {
        match self {
            ConvexDomain::L2Ball { center, radius } => {
                let diff = y.sub(center);
                let dist = diff.norm();
                if dist <= *radius {
                    y.clone()
                } else {
                    let mut out = center.clone();
                    out.axpy(radius / dist, &diff);
                    out
                }
            }
            ConvexDomain::Box { lower, upper } => Point::from_vec(
                y.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(v, (l, u))| v.clamp(*l, *u))
                    .collect(),
            ),
            ConvexDomain::Simplex { .. } => project_simplex(y),
        }
    }

    pub fn contains(&self, w: &Point, tol: f64) -> bool {
        if w.dim() != self.dim() {
            return false;
        }
        match self {
            ConvexDomain::L2Ball { center, radius } => w.distance(center) <= radius + tol,
            ConvexDomain::Box { lower, upper } => w
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
            ConvexDomain::Simplex { .. } => {
                w.iter().all(|&v| v >= -tol) && (w.iter().sum::<f64>() - 1.0).abs() <= tol
            }
        }
    }

    /// Draws a point uniformly from the set.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            ConvexDomain::L2Ball { center, radius } => {
                let d = center.dim();
                let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
                let dir = Point::from_vec(dir);
                let norm = dir.norm();
                let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
                let mut out = center.clone();
                if norm > 0.0 {
                    out.axpy(r / norm, &dir);
                }
                out
            }
            ConvexDomain::Box { lower, upper } => Point::from_vec(
                lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(l, u)| l + (u - l) * rng.random::<f64>())
                    .collect(),
            ),
            ConvexDomain::Simplex { dim } => {
                // Dirichlet(1, ..., 1) via normalized exponentials.
                let e: Vec<f64> = (0..*dim).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = e.iter().sum();
                Point::from_vec(e.into_iter().map(|v| v / total).collect())
            }
        }
    }
}

fn lower_upper_dims(lower: &Point, upper: &Point) -> Result<()> {
    if lower.dim() != upper.dim() {
        return Err(Error::DimensionMismatch {
            expected: lower.dim(),
            got: upper.dim(),
        });
    }
    Ok(())
}

/// Sort-and-threshold projection onto the probability simplex.
fn project_simplex(y: &Point) -> Point {
    let mut sorted = y.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    Point::from_vec(y.iter().map(|v| (v - theta).max(0.0)).collect())
}
