//! Data distributions with bounded support.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::Datum;
use crate::point::Point;

/// A support point of a finite distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    #[serde(rename = "x")]
    pub datum: Datum,
    pub p: f64,
}

impl Atom {
    pub fn new(datum: impl Into<Datum>, p: f64) -> Self {
        Atom {
            datum: datum.into(),
            p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataDistribution {
    FiniteSupport { atoms: Vec<Atom> },
    UniformBall { center: Point, radius: f64 },
    /// Gaussian conditioned on `‖x − mean‖ ≤ radius`.
    TruncatedGaussian {
        mean: Point,
        cov: Vec<Vec<f64>>,
        radius: f64,
    },
}

impl DataDistribution {
    pub fn finite(atoms: Vec<Atom>) -> Result<Self> {
        let dist = DataDistribution::FiniteSupport { atoms };
        dist.sampler()?;
        Ok(dist)
    }

    pub fn is_finite_support(&self) -> bool {
        matches!(self, DataDistribution::FiniteSupport { .. })
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match self {
            DataDistribution::FiniteSupport { atoms } => Some(atoms),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DataDistribution::FiniteSupport { atoms } => atoms.first().map_or(0, |a| a.datum.dim()),
            DataDistribution::UniformBall { center, .. } => center.dim(),
            DataDistribution::TruncatedGaussian { mean, .. } => mean.dim(),
        }
    }

    pub fn is_labeled(&self) -> bool {
        match self {
            DataDistribution::FiniteSupport { atoms } => {
                matches!(atoms.first(), Some(Atom { datum: Datum::Labeled { .. }, .. }))
            }
            _ => false,
        }
    }

    /// Largest feature norm over the support.
    pub fn support_norm(&self) -> f64 {
        match self {
            DataDistribution::FiniteSupport { atoms } => atoms
                .iter()
                .filter(|a| a.p > 0.0)
                .map(|a| a.datum.feature_norm())
                .fold(0.0, f64::max),
            DataDistribution::UniformBall { center, radius } => center.norm() + radius,
            DataDistribution::TruncatedGaussian { mean, radius, .. } => mean.norm() + radius,
        }
    }

    /// Validates the distribution and precomputes what sampling needs.
    pub fn sampler(&self) -> Result<Sampler> {
        match self {
            DataDistribution::FiniteSupport { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::param("distribution.atoms", "at least one atom is required"));
                }
                let dim = atoms[0].datum.dim();
                let labeled = matches!(atoms[0].datum, Datum::Labeled { .. });
                let mut cdf = Vec::with_capacity(atoms.len());
                let mut total = 0.0;
                for (i, atom) in atoms.iter().enumerate() {
                    let field = format!("distribution.atoms[{i}]");
                    if atom.datum.dim() != dim || dim == 0 {
                        return Err(Error::param(field, "all atoms must share a nonzero dimension"));
                    }
                    if matches!(atom.datum, Datum::Labeled { .. }) != labeled {
                        return Err(Error::param(field, "cannot mix labeled and unlabeled atoms"));
                    }
                    if !atom.datum.is_finite() {
                        return Err(Error::param(field, "non-finite coordinates"));
                    }
                    if let Datum::Labeled { y, .. } = atom.datum {
                        if y != 1.0 && y != -1.0 {
                            return Err(Error::param(field, "labels must be +1 or -1"));
                        }
                    }
                    if !(atom.p.is_finite() && atom.p >= 0.0) {
                        return Err(Error::param(format!("{field}.p"), "probability must be >= 0"));
                    }
                    total += atom.p;
                    cdf.push(total);
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::param(
                        "distribution.atoms",
                        format!("probabilities sum to {total}, not 1"),
                    ));
                }
                let last_positive = atoms.iter().rposition(|a| a.p > 0.0).unwrap_or(0);
                Ok(Sampler::Finite {
                    atoms: atoms.iter().map(|a| a.datum.clone()).collect(),
                    cdf,
                    last_positive,
                })
            }
            DataDistribution::UniformBall { center, radius } => {
                Point::new(center.to_vec())?;
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::param("distribution.radius", "must be finite and >= 0"));
                }
                Ok(Sampler::Ball {
                    center: center.clone(),
                    radius: *radius,
                })
            }
            DataDistribution::TruncatedGaussian { mean, cov, radius } => {
                Point::new(mean.to_vec())?;
                let d = mean.dim();
                if cov.len() != d || cov.iter().any(|row| row.len() != d) {
                    return Err(Error::param("distribution.cov", format!("must be {d}x{d}")));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::param("distribution.radius", "must be finite and > 0"));
                }
                let m = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
                if (&m - m.transpose()).abs().max() > 1e-12 {
                    return Err(Error::param("distribution.cov", "must be symmetric"));
                }
                let chol = m
                    .cholesky()
                    .ok_or_else(|| Error::param("distribution.cov", "must be positive definite"))?;
                Ok(Sampler::Gaussian {
                    mean: mean.clone(),
                    factor: chol.l(),
                    radius: *radius,
                })
            }
        }
    }
}

/// Precomputed sampling state for a [`DataDistribution`].
#[derive(Debug, Clone)]
pub enum Sampler {
    Finite {
        atoms: Vec<Datum>,
        cdf: Vec<f64>,
        last_positive: usize,
    },
    Ball {
        center: Point,
        radius: f64,
    },
    Gaussian {
        mean: Point,
        factor: DMatrix<f64>,
        radius: f64,
    },
}

impl Sampler {
    /// Inverse-CDF draw of an atom index; only for finite supports.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        match self {
            Sampler::Finite { cdf, last_positive, .. } => {
                let u: f64 = rng.random();
                let k = cdf.partition_point(|&c| c <= u);
                Some(k.min(*last_positive))
            }
            _ => None,
        }
    }

    /// Draws one datum. Truncated Gaussians use rejection sampling, so a
    /// radius far inside the bulk of the Gaussian makes this slow.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Datum {
        match self {
            Sampler::Finite { atoms, .. } => atoms[self.sample_index(rng).expect("finite")].clone(),
            Sampler::Ball { center, radius } => {
                let d = center.dim();
                let dir = Point::from_vec((0..d).map(|_| StandardNormal.sample(rng)).collect());
                let norm = dir.norm();
                let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
                let mut out = center.clone();
                if norm > 0.0 {
                    out.axpy(r / norm, &dir);
                }
                Datum::Point(out)
            }
            Sampler::Gaussian { mean, factor, radius } => loop {
                let d = mean.dim();
                let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
                let offset: Vec<f64> = (0..d)
                    .map(|i| (0..=i).map(|j| factor[(i, j)] * z[j]).sum())
                    .collect();
                let offset = Point::from_vec(offset);
                if offset.norm() <= *radius {
                    break Datum::Point(mean.add(&offset));
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn probabilities_must_sum_to_one() {
        let bad = DataDistribution::finite(vec![Atom::new(Point::from([0.0]), 0.5)]);
        assert!(bad.is_err());
        let neg = DataDistribution::finite(vec![
            Atom::new(Point::from([0.0]), 1.5),
            Atom::new(Point::from([1.0]), -0.5),
        ]);
        assert!(neg.is_err());
    }

    #[test]
    fn mixed_atoms_rejected() {
        let mixed = DataDistribution::finite(vec![
            Atom::new(Point::from([0.0]), 0.5),
            Atom::new(Datum::Labeled { a: Point::from([1.0]), y: 1.0 }, 0.5),
        ]);
        assert!(mixed.is_err());
        let bad_label = DataDistribution::finite(vec![Atom::new(
            Datum::Labeled { a: Point::from([1.0]), y: 0.5 },
            1.0,
        )]);
        assert!(bad_label.is_err());
    }

    #[test]
    fn zero_probability_atoms_never_drawn() {
        let dist = DataDistribution::finite(vec![
            Atom::new(Point::from([0.0]), 0.0),
            Atom::new(Point::from([1.0]), 1.0),
            Atom::new(Point::from([2.0]), 0.0),
        ])
        .unwrap();
        let s = dist.sampler().unwrap();
        let mut rng = rng_from_seed(1);
        for _ in 0..1000 {
            assert_eq!(s.sample_index(&mut rng), Some(1));
        }
    }

    #[test]
    fn finite_frequencies_track_probabilities() {
        let dist = DataDistribution::finite(vec![
            Atom::new(Point::from([0.0]), 0.2),
            Atom::new(Point::from([1.0]), 0.8),
        ])
        .unwrap();
        let s = dist.sampler().unwrap();
        let mut rng = rng_from_seed(2);
        let hits = (0..100_000).filter(|_| s.sample_index(&mut rng) == Some(0)).count();
        assert!((hits as f64 / 1e5 - 0.2).abs() < 0.005);
    }

    #[test]
    fn continuous_samples_respect_support() {
        let ball = DataDistribution::UniformBall { center: Point::from([1.0, 1.0]), radius: 0.5 };
        let gauss = DataDistribution::TruncatedGaussian {
            mean: Point::from([0.0, 0.0]),
            cov: vec![vec![1.0, 0.3], vec![0.3, 2.0]],
            radius: 1.5,
        };
        let mut rng = rng_from_seed(3);
        for dist in [&ball, &gauss] {
            let s = dist.sampler().unwrap();
            for _ in 0..1000 {
                let Datum::Point(x) = s.sample(&mut rng) else { panic!() };
                assert!(x.norm() <= dist.support_norm() + 1e-12);
            }
        }
    }

    #[test]
    fn non_pd_covariance_rejected() {
        let gauss = DataDistribution::TruncatedGaussian {
            mean: Point::from([0.0, 0.0]),
            cov: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
            radius: 1.0,
        };
        assert!(gauss.sampler().is_err());
    }
}
