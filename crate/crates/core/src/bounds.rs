//! Closed-form right-hand sides of the stability, excess-risk and
//! concentration inequalities.
//!
//! Logarithms are natural and clipped below at 1: `log x` means
//! `max(ln x, 1)`, for `log n` and `log(1/δ)` alike. Unspecified absolute
//! constants are explicit arguments (`c`, `C`, `c_opt`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `max(ln x, 1)`.
pub fn log1(x: f64) -> f64 {
    x.ln().max(1.0)
}

/// Inputs shared by the generic stability bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundQuery {
    /// Uniform stability.
    pub gamma: f64,
    /// Loss range.
    #[serde(rename = "M")]
    pub m: f64,
    /// Bernstein constant.
    #[serde(rename = "B")]
    pub b: f64,
    pub n: f64,
    pub delta: f64,
    pub eta: f64,
    pub delta_opt: f64,
    pub e_delta_opt: f64,
    pub c: f64,
}

impl Default for BoundQuery {
    fn default() -> Self {
        BoundQuery {
            gamma: 0.0,
            m: 0.0,
            b: 0.0,
            n: 1.0,
            delta: 0.05,
            eta: 1.0,
            delta_opt: 0.0,
            e_delta_opt: 0.0,
            c: 1.0,
        }
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, "must be finite and >= 0"))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, "must be finite and > 0"))
    }
}

fn probability(v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::param("delta", "must lie in (0, 1)"))
    }
}

fn sample_size(n: f64) -> Result<()> {
    if n.is_finite() && n >= 1.0 {
        Ok(())
    } else {
        Err(Error::param("n", "must be >= 1"))
    }
}

impl BoundQuery {
    pub fn validate(&self) -> Result<()> {
        nonneg("gamma", self.gamma)?;
        nonneg("M", self.m)?;
        nonneg("B", self.b)?;
        sample_size(self.n)?;
        probability(self.delta)?;
        positive("eta", self.eta)?;
        nonneg("delta_opt", self.delta_opt)?;
        nonneg("e_delta_opt", self.e_delta_opt)?;
        positive("c", self.c)
    }

    fn log_n(&self) -> f64 {
        log1(self.n)
    }

    fn log_inv_delta(&self) -> f64 {
        log1(1.0 / self.delta)
    }
}

/// Generalization bound for γ-stable algorithms:
/// `c(γ log n log(1/δ) + M √(log(1/δ)/n))`.
pub fn gen_bound_rhs(q: &BoundQuery) -> Result<f64> {
    q.validate()?;
    let ld = q.log_inv_delta();
    Ok(q.c * (q.gamma * q.log_n() * ld + q.m * (ld / q.n).sqrt()))
}

/// Excess-risk bound under the Bernstein condition:
/// `Δ_opt + η EΔ_opt + c(1 + 1/η)(γ log n + (M + B)/n) log(1/δ)`.
pub fn thm1_rhs(q: &BoundQuery) -> Result<f64> {
    q.validate()?;
    let stat = (1.0 + 1.0 / q.eta) * (q.gamma * q.log_n() + (q.m + q.b) / q.n) * q.log_inv_delta();
    Ok(q.delta_opt + q.eta * q.e_delta_opt + q.c * stat)
}

/// Variance-type risk bound: `(1 + η) R_n + c(1 + 1/η)(γ log n + M/n) log(1/δ)`.
pub fn thm2_rhs(q: &BoundQuery, r_n: f64) -> Result<f64> {
    q.validate()?;
    nonneg("r_n", r_n)?;
    let stat = (1.0 + 1.0 / q.eta) * (q.gamma * q.log_n() + q.m / q.n) * q.log_inv_delta();
    Ok((1.0 + q.eta) * r_n + q.c * stat)
}

/// The part of [`thm2_rhs`] multiplied by `c`.
pub fn thm2_stat_term(q: &BoundQuery) -> Result<f64> {
    q.validate()?;
    Ok((1.0 + 1.0 / q.eta) * (q.gamma * q.log_n() + q.m / q.n) * q.log_inv_delta())
}

/// Excess-risk bound for approximate minimizers of strongly convex,
/// Lipschitz losses: `c[Δ̄ + (L²/(λn) + √(L²Δ̄/λ)) log n log(1/δ)]`.
pub fn prop1_rhs(l: f64, lambda: f64, n: f64, delta: f64, delta_bar: f64, c: f64) -> Result<f64> {
    positive("L", l)?;
    positive("lambda", lambda)?;
    sample_size(n)?;
    probability(delta)?;
    nonneg("delta_bar", delta_bar)?;
    positive("c", c)?;
    let rate = l * l / (lambda * n) + (l * l * delta_bar / lambda).sqrt();
    Ok(c * (delta_bar + rate * log1(n) * log1(1.0 / delta)))
}

/// Stability of an approximate ERM with optimization error at most Δ̄:
/// `4L²/(λn) + √(8L²Δ̄/λ)`.
pub fn erm_stability_gamma(l: f64, lambda: f64, n: f64, delta_bar: f64) -> Result<f64> {
    positive("L", l)?;
    positive("lambda", lambda)?;
    sample_size(n)?;
    nonneg("delta_bar", delta_bar)?;
    Ok(4.0 * l * l / (lambda * n) + (8.0 * l * l * delta_bar / lambda).sqrt())
}

/// Stability of constant-step PGD on smooth losses: `2L²/(λn)`.
pub fn smooth_pgd_gamma(l: f64, lambda: f64, n: f64) -> Result<f64> {
    positive("L", l)?;
    positive("lambda", lambda)?;
    sample_size(n)?;
    Ok(2.0 * l * l / (lambda * n))
}

/// Bernstein constant of a λ-strongly convex, L-Lipschitz loss: `2L²/λ`.
pub fn bernstein_constant(l: f64, lambda: f64) -> Result<f64> {
    positive("L", l)?;
    positive("lambda", lambda)?;
    Ok(2.0 * l * l / lambda)
}

/// Optimization error of the weighted average after `T` decaying steps: `4L²/(λT)`.
pub fn pgd_opt_error_bound(l: f64, lambda: f64, steps: f64) -> f64 {
    4.0 * l * l / (lambda * steps)
}

/// Final-iterate error of constant-step PGD on smooth losses:
/// `c_opt (βL²/λ²) exp(−λT/β)`.
pub fn smooth_pgd_opt_error_bound(l: f64, lambda: f64, beta: f64, steps: f64, c_opt: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    positive("c_opt", c_opt)?;
    nonneg("T", steps)?;
    if !(beta.is_finite() && beta >= lambda) {
        return Err(Error::param("beta", "must be finite and >= lambda"));
    }
    Ok(c_opt * (beta * l * l / (lambda * lambda)) * (-lambda * steps / beta).exp())
}

/// Moment-to-tail conversion: `C(a √log(1/δ) + b log(1/δ))`.
pub fn moment_to_whp(a: f64, b: f64, delta: f64, c_abs: f64) -> Result<f64> {
    nonneg("a", a)?;
    nonneg("b", b)?;
    probability(delta)?;
    positive("C", c_abs)?;
    let ld = log1(1.0 / delta);
    Ok(c_abs * (a * ld.sqrt() + b * ld))
}

/// Moment form of Bernstein's inequality: `6 √(Σ E X_i² · p) + 4pM`.
pub fn bernstein_moment_rhs(var_sum: f64, p: f64, m: f64) -> Result<f64> {
    nonneg("var_sum", var_sum)?;
    nonneg("M", m)?;
    if !(p.is_finite() && p >= 2.0) {
        return Err(Error::param("p", "must be >= 2"));
    }
    Ok(6.0 * (var_sum * p).sqrt() + 4.0 * p * m)
}

/// Lower-tail bound for (a, b)-weakly self-bounded functions:
/// `exp(−t²/(2a E f + 2b))`.
pub fn selfbounding_tail_bound(a: f64, b: f64, e_f: f64, t: f64) -> Result<f64> {
    nonneg("a", a)?;
    nonneg("b", b)?;
    nonneg("e_f", e_f)?;
    nonneg("t", t)?;
    let scale = a * e_f + b;
    if scale <= 0.0 {
        return Err(Error::param("a", "a·E f + b must be > 0"));
    }
    Ok((-t * t / (2.0 * scale)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn q() -> BoundQuery {
        BoundQuery { delta: 1.0 / E, ..BoundQuery::default() }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn gen_bound_examples() {
        assert!(close(gen_bound_rhs(&BoundQuery { m: 1.0, n: 100.0, ..q() }).unwrap(), 0.1));
        assert!(close(gen_bound_rhs(&BoundQuery { gamma: 1.0, n: 8.0, ..q() }).unwrap(), 8f64.ln()));
        assert_eq!(gen_bound_rhs(&BoundQuery { n: 50.0, ..q() }).unwrap(), 0.0);
        assert!(gen_bound_rhs(&BoundQuery { delta: 1.5, ..q() }).is_err());
        assert!(gen_bound_rhs(&BoundQuery { delta: 0.0, ..q() }).is_err());
    }

    #[test]
    fn thm1_examples() {
        let base = BoundQuery { m: 1.0, b: 1.0, n: 100.0, ..q() };
        assert!(close(thm1_rhs(&base).unwrap(), 0.04));
        let opt = BoundQuery { delta_opt: 0.3, e_delta_opt: 0.2, eta: 2.0, n: 10.0, ..q() };
        assert!(close(thm1_rhs(&opt).unwrap(), 0.3 + 2.0 * 0.2));
        // ERM specialization: c(1 + 1/η)(γ log n + (M+B)/n) log(1/δ).
        let erm = BoundQuery { gamma: 0.01, m: 2.0, b: 3.0, n: 1000.0, eta: 0.5, delta: 0.01, c: 1.7, ..q() };
        let expected = 1.7 * 3.0 * (0.01 * 1000f64.ln() + 5.0 / 1000.0) * 100f64.ln();
        assert!(close(thm1_rhs(&erm).unwrap(), expected));
        assert!(thm1_rhs(&BoundQuery { eta: 0.0, ..q() }).is_err());
    }

    #[test]
    fn thm2_examples() {
        let base = BoundQuery { m: 1.0, n: 10.0, ..q() };
        assert!(close(thm2_rhs(&base, 0.0).unwrap(), 0.2));
        let zero = BoundQuery { eta: 3.0, n: 10.0, ..q() };
        assert!(close(thm2_rhs(&zero, 0.7).unwrap(), 4.0 * 0.7));
        assert!(thm2_rhs(&BoundQuery { eta: -1.0, ..q() }, 0.0).is_err());
    }

    #[test]
    fn thm2_is_convex_in_eta() {
        // (1+η) r + k(1 + 1/η) has a single interior minimum at η = √(k/r).
        let base = BoundQuery { m: 1.0, n: 10.0, ..q() };
        let etas: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
        let vals: Vec<f64> = etas.iter().map(|&eta| thm2_rhs(&BoundQuery { eta, ..base }, 1.0).unwrap()).collect();
        let argmin = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(vals[..=argmin].windows(2).all(|w| w[1] <= w[0]));
        assert!(vals[argmin..].windows(2).all(|w| w[1] >= w[0]));
        // k = M/n = 0.1 and r = 1 put the minimum at η = √0.1 ≈ 0.316.
        assert!((etas[argmin] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn prop1_examples() {
        assert!(close(prop1_rhs(1.0, 1.0, E, 1.0 / E, 0.0, 1.0).unwrap(), 1.0 / E));
        let erm = prop1_rhs(2.0, 0.5, 1000.0, 0.05, 0.0, 1.0).unwrap();
        assert!(close(erm, 4.0 / 500.0 * 1000f64.ln() * 20f64.ln()));
        let huge_n = prop1_rhs(1.0, 1.0, 1e12, 1.0 / E, 1.0, 1.0).unwrap();
        assert!(close(huge_n, 1.0 + (1e-12 + 1.0) * 1e12f64.ln()));
        assert!(prop1_rhs(1.0, 0.0, 10.0, 0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn stability_constants() {
        assert_eq!(erm_stability_gamma(1.0, 1.0, 4.0, 0.0).unwrap(), 1.0);
        assert!(close(erm_stability_gamma(1.0, 2.0, 1e300, 1.0).unwrap(), 2.0));
        assert_eq!(erm_stability_gamma(3.0, 2.0, 7.0, 0.0).unwrap(), 4.0 * 9.0 / 14.0);
        assert_eq!(smooth_pgd_gamma(1.0, 1.0, 2.0).unwrap(), 1.0);
        assert_eq!(smooth_pgd_gamma(2.0, 1.0, 8.0).unwrap(), 1.0);
        assert_eq!(smooth_pgd_gamma(1.5, 0.7, 20.0).unwrap(), 2.0 * smooth_pgd_gamma(1.5, 0.7, 40.0).unwrap());
    }

    #[test]
    fn bernstein_and_opt_error() {
        assert_eq!(bernstein_constant(2.0, 0.5).unwrap(), 16.0);
        assert_eq!(bernstein_constant(1.0, 2.0).unwrap(), 1.0);
        assert_eq!(bernstein_constant(2.6, 1.3).unwrap(), 4.0 * bernstein_constant(1.3, 1.3).unwrap());
        assert_eq!(pgd_opt_error_bound(1.0, 1.0, 4.0), 1.0);
        let (l, lam, n) = (3.0, 0.5, 20.0);
        assert!(close(pgd_opt_error_bound(l, lam, 4.0 * l * l * n * n / lam), 1.0 / (n * n)));
        assert_eq!(pgd_opt_error_bound(l, lam, 10.0), 2.0 * pgd_opt_error_bound(l, lam, 20.0));
    }

    #[test]
    fn smooth_opt_error() {
        assert_eq!(smooth_pgd_opt_error_bound(1.0, 1.0, 1.0, 0.0, 1.0).unwrap(), 1.0);
        let (l, lam, beta, c, n): (f64, f64, f64, f64, f64) = (2.0, 0.5, 1.5, 3.0, 100.0);
        let t = (beta / lam) * (c * beta * l * l * n * n / (lam * lam)).ln();
        assert!(close(smooth_pgd_opt_error_bound(l, lam, beta, t, c).unwrap(), 1.0 / (n * n)));
        let vals: Vec<f64> = (0..20).map(|t| smooth_pgd_opt_error_bound(l, lam, beta, t as f64, c).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(smooth_pgd_opt_error_bound(1.0, 1.0, 0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn moment_tools() {
        assert!(close(moment_to_whp(1.0, 0.0, (-4f64).exp(), 1.0).unwrap(), 2.0));
        assert!(close(moment_to_whp(0.0, 1.0, 1.0 / E, 1.0).unwrap(), 1.0));
        assert_eq!(moment_to_whp(0.0, 0.0, 0.3, 1.0).unwrap(), 0.0);
        assert_eq!(bernstein_moment_rhs(1.0, 4.0, 1.0).unwrap(), 28.0);
        assert_eq!(bernstein_moment_rhs(0.0, 7.0, 0.0).unwrap(), 0.0);
        assert_eq!(bernstein_moment_rhs(2.0, 2.0, 0.0).unwrap(), 12.0);
        assert!(bernstein_moment_rhs(1.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn selfbounding_tail() {
        assert!(close(selfbounding_tail_bound(2.0, 0.0, 1.0, 2.0).unwrap(), 1.0 / E));
        assert!(close(selfbounding_tail_bound(0.0, 1.0, 5.0, 2.0).unwrap(), (-2f64).exp()));
        assert_eq!(selfbounding_tail_bound(1.0, 1.0, 1.0, 0.0).unwrap(), 1.0);
        assert!(selfbounding_tail_bound(0.0, 0.0, 1.0, 1.0).is_err());
        for t in [0.0, 0.1, 1.0, 10.0] {
            assert!(selfbounding_tail_bound(0.5, 0.2, 3.0, t).unwrap() <= 1.0);
        }
    }

    #[test]
    fn log_convention() {
        assert_eq!(log1(1.0), 1.0);
        assert_eq!(log1(2.0), 1.0);
        assert_eq!(log1(E * E), 2.0);
    }
}
