//! The three regularized loss families and their subgradients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

/// One observation. Quadratic and geometric-median losses consume plain
/// points; the hinge loss consumes labeled pairs `(a, y)` with `y = ±1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Datum {
    Point(Point),
    Labeled { a: Point, y: f64 },
}

impl Datum {
    pub fn dim(&self) -> usize {
        match self {
            Datum::Point(x) => x.dim(),
            Datum::Labeled { a, .. } => a.dim(),
        }
    }

    /// Norm of the feature part.
    pub fn feature_norm(&self) -> f64 {
        match self {
            Datum::Point(x) => x.norm(),
            Datum::Labeled { a, .. } => a.norm(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Datum::Point(x) => x.is_finite(),
            Datum::Labeled { a, y } => a.is_finite() && y.is_finite(),
        }
    }

    /// Bit-level key for grouping repeated observations.
    pub(crate) fn bits(&self) -> Vec<u64> {
        match self {
            Datum::Point(x) => x.iter().map(|v| v.to_bits()).collect(),
            Datum::Labeled { a, y } => a
                .iter()
                .map(|v| v.to_bits())
                .chain(std::iter::once(y.to_bits()))
                .collect(),
        }
    }
}

impl From<Point> for Datum {
    fn from(p: Point) -> Self {
        Datum::Point(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `(λ/2)‖w − x‖²`
    RegQuadratic,
    /// `‖w − x‖ + (λ/2)‖w‖²`
    RegGeometricMedian,
    /// `max(0, 1 − y⟨a, w⟩) + (λ/2)‖w‖²`
    RegHinge,
}

impl LossKind {
    pub fn wants_labels(self) -> bool {
        matches!(self, LossKind::RegHinge)
    }
}

/// A loss family together with its constants on a given domain/support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    pub kind: LossKind,
    /// Strong-convexity modulus.
    pub lambda: f64,
    /// Lipschitz constant over domain × support.
    pub lipschitz: f64,
    /// Gradient Lipschitz constant; `None` for the non-smooth families.
    pub smoothness: Option<f64>,
    /// Bound on `|ℓ(x, w) − ℓ(x, w*)|` over the domain.
    pub range_bound: f64,
}

impl LossModel {
    /// Analytic constants for `kind` when `w` ranges over a set of max norm
    /// `domain_norm` and data features have norm at most `support_norm`.
    pub fn analytic(kind: LossKind, lambda: f64, domain_norm: f64, support_norm: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::param("loss.lambda", "must be finite and > 0"));
        }
        let lipschitz = match kind {
            LossKind::RegQuadratic => lambda * (domain_norm + support_norm),
            LossKind::RegGeometricMedian => 1.0 + lambda * domain_norm,
            LossKind::RegHinge => support_norm + lambda * domain_norm,
        };
        let smoothness = match kind {
            LossKind::RegQuadratic => Some(lambda),
            _ => None,
        };
        Ok(LossModel {
            kind,
            lambda,
            lipschitz,
            smoothness,
            range_bound: 2.0 * lipschitz * lipschitz / lambda,
        })
    }

    pub fn value(&self, x: &Datum, w: &Point) -> Result<f64> {
        self.check(x, w)?;
        Ok(self.value_unchecked(x, w))
    }

    pub fn subgradient(&self, x: &Datum, w: &Point) -> Result<Point> {
        self.check(x, w)?;
        let mut g = Point::zeros(w.dim());
        self.add_subgradient(x, w, 1.0, &mut g);
        Ok(g)
    }

    fn check(&self, x: &Datum, w: &Point) -> Result<()> {
        w.check_dim(x.dim())?;
        match (self.kind.wants_labels(), x) {
            (true, Datum::Point(_)) => Err(Error::DatumKind("hinge loss needs labeled data".into())),
            (false, Datum::Labeled { .. }) => {
                Err(Error::DatumKind("this loss takes unlabeled points".into()))
            }
            _ => Ok(()),
        }
    }

    /// Loss value; the datum kind and dimension are assumed to match.
    pub(crate) fn value_unchecked(&self, x: &Datum, w: &Point) -> f64 {
        let lam = self.lambda;
        match (self.kind, x) {
            (LossKind::RegQuadratic, Datum::Point(x)) => 0.5 * lam * w.distance(x).powi(2),
            (LossKind::RegGeometricMedian, Datum::Point(x)) => {
                w.distance(x) + 0.5 * lam * w.norm_sq()
            }
            (LossKind::RegHinge, Datum::Labeled { a, y }) => {
                (1.0 - y * a.dot(w)).max(0.0) + 0.5 * lam * w.norm_sq()
            }
            _ => unreachable!("datum kind checked at construction"),
        }
    }

    /// `g += weight * ∂ℓ(x, w)` using the minimal-norm selection at kinks.
    pub(crate) fn add_subgradient(&self, x: &Datum, w: &Point, weight: f64, g: &mut Point) {
        let lam = self.lambda;
        match (self.kind, x) {
            (LossKind::RegQuadratic, Datum::Point(x)) => {
                g.axpy(weight * lam, w);
                g.axpy(-weight * lam, x);
            }
            (LossKind::RegGeometricMedian, Datum::Point(x)) => {
                let diff = w.sub(x);
                let dist = diff.norm();
                if dist > 0.0 {
                    g.axpy(weight / dist, &diff);
                }
                g.axpy(weight * lam, w);
            }
            (LossKind::RegHinge, Datum::Labeled { a, y }) => {
                if y * a.dot(w) < 1.0 {
                    g.axpy(-weight * y, a);
                }
                g.axpy(weight * lam, w);
            }
            _ => unreachable!("datum kind checked at construction"),
        }
    }
}
