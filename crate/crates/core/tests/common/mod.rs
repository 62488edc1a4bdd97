#![allow(dead_code)]

use scolab::{Atom, ConvexDomain, DataDistribution, Datum, LossKind, Point, ProblemInstance};

pub fn pt(v: &[f64]) -> Point {
    Point::from(v.to_vec())
}

pub fn ball(dim: usize, radius: f64) -> ConvexDomain {
    ConvexDomain::l2_ball(Point::zeros(dim), radius).unwrap()
}

/// Quadratic loss, λ = 1, atoms ±1 with probability 1/2, ball of radius 10.
pub fn symmetric_quadratic() -> ProblemInstance {
    two_atom_quadratic(-1.0, 1.0, 1.0, 10.0)
}

pub fn two_atom_quadratic(a: f64, b: f64, lambda: f64, radius: f64) -> ProblemInstance {
    ProblemInstance::new(
        LossKind::RegQuadratic,
        lambda,
        ball(1, radius),
        DataDistribution::finite(vec![Atom::new(pt(&[a]), 0.5), Atom::new(pt(&[b]), 0.5)]).unwrap(),
    )
    .unwrap()
}

pub fn median_instance() -> ProblemInstance {
    ProblemInstance::new(
        LossKind::RegGeometricMedian,
        1.0,
        ball(2, 1.0),
        DataDistribution::finite(vec![
            Atom::new(pt(&[1.0, 0.0]), 0.3),
            Atom::new(pt(&[0.0, 1.0]), 0.3),
            Atom::new(pt(&[-1.0, -0.5]), 0.4),
        ])
        .unwrap(),
    )
    .unwrap()
}

pub fn hinge_instance() -> ProblemInstance {
    let lab = |a: &[f64], y: f64| Datum::Labeled { a: pt(a), y };
    ProblemInstance::new(
        LossKind::RegHinge,
        0.5,
        ball(2, 1.0),
        DataDistribution::finite(vec![
            Atom::new(lab(&[1.0, 0.5], 1.0), 0.35),
            Atom::new(lab(&[0.2, -1.0], -1.0), 0.35),
            Atom::new(lab(&[-0.5, 0.3], 1.0), 0.3),
        ])
        .unwrap(),
    )
    .unwrap()
}

pub fn quadratic_3d() -> ProblemInstance {
    ProblemInstance::new(
        LossKind::RegQuadratic,
        0.5,
        ConvexDomain::unit_box(pt(&[-1.0, -1.0, -1.0]), pt(&[1.0, 1.0, 1.0])).unwrap(),
        DataDistribution::finite(vec![
            Atom::new(pt(&[2.0, 0.0, 0.0]), 0.25),
            Atom::new(pt(&[0.0, -1.0, 0.5]), 0.5),
            Atom::new(pt(&[0.3, 0.3, -2.0]), 0.25),
        ])
        .unwrap(),
    )
    .unwrap()
}

pub fn all_losses() -> Vec<ProblemInstance> {
    vec![quadratic_3d(), median_instance(), hinge_instance()]
}
