//! Named bound evaluators shared by the `bound` subcommand and `bound-eval`
//! configurations.

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use scolab::bounds::{self, BoundQuery};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum BoundName {
    /// c(γ log n log(1/δ) + M √(log(1/δ)/n))
    Gen,
    /// Excess risk under the Bernstein condition.
    Thm1,
    /// (1 + η) R_n plus the stability term; needs --r-n.
    Thm2,
    /// Excess risk of approximate ERM; needs --L --lambda --n.
    Prop1,
    /// 4L²/(λn) + √(8L²Δ̄/λ)
    ErmGamma,
    /// 2L²/(λn)
    SmoothPgdGamma,
    /// 2L²/λ
    Bernstein,
    /// 4L²/(λT)
    PgdOptError,
    /// c_opt (βL²/λ²) exp(−λT/β)
    SmoothPgdOptError,
    /// C(a √log(1/δ) + b log(1/δ))
    MomentToWhp,
    /// 6 √(var_sum · p) + 4pM
    BernsteinMoment,
    /// exp(−t²/(2a E f + 2b))
    SelfboundingTail,
}

/// Bound parameters; each evaluator reads the ones it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct BoundParams {
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[arg(long = "M")]
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[arg(long = "B")]
    #[serde(default, rename = "B", skip_serializing_if = "Option::is_none")]
    pub b_bern: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_opt: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_delta_opt: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_n: Option<f64>,
    #[arg(long = "L")]
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long = "T")]
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub steps: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_opt: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_bar: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[arg(long = "C")]
    #[serde(default, rename = "C", skip_serializing_if = "Option::is_none")]
    pub c_abs: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_f: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var_sum: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

fn need(v: Option<f64>, name: &str, bound: BoundName) -> Result<f64, CliError> {
    v.ok_or_else(|| {
        let which = serde_json::to_value(bound).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        CliError::config(name, format!("required by the `{which}` bound"))
    })
}

impl BoundParams {
    fn query(&self, name: BoundName) -> Result<BoundQuery, CliError> {
        let d = BoundQuery::default();
        Ok(BoundQuery {
            gamma: self.gamma.unwrap_or(d.gamma),
            m: self.m.unwrap_or(d.m),
            b: self.b_bern.unwrap_or(d.b),
            n: need(self.n, "n", name)?,
            delta: self.delta.unwrap_or(d.delta),
            eta: self.eta.unwrap_or(d.eta),
            delta_opt: self.delta_opt.unwrap_or(d.delta_opt),
            e_delta_opt: self.e_delta_opt.unwrap_or(d.e_delta_opt),
            c: self.c.unwrap_or(d.c),
        })
    }
}

/// Evaluates the named bound.
pub fn evaluate(name: BoundName, p: &BoundParams) -> Result<f64, CliError> {
    let v = match name {
        BoundName::Gen => bounds::gen_bound_rhs(&p.query(name)?)?,
        BoundName::Thm1 => bounds::thm1_rhs(&p.query(name)?)?,
        BoundName::Thm2 => bounds::thm2_rhs(&p.query(name)?, need(p.r_n, "r_n", name)?)?,
        BoundName::Prop1 => bounds::prop1_rhs(
            need(p.l, "L", name)?,
            need(p.lambda, "lambda", name)?,
            need(p.n, "n", name)?,
            p.delta.unwrap_or(0.05),
            p.delta_bar.unwrap_or(0.0),
            p.c.unwrap_or(1.0),
        )?,
        BoundName::ErmGamma => bounds::erm_stability_gamma(
            need(p.l, "L", name)?,
            need(p.lambda, "lambda", name)?,
            need(p.n, "n", name)?,
            p.delta_bar.unwrap_or(0.0),
        )?,
        BoundName::SmoothPgdGamma => {
            bounds::smooth_pgd_gamma(need(p.l, "L", name)?, need(p.lambda, "lambda", name)?, need(p.n, "n", name)?)?
        }
        BoundName::Bernstein => bounds::bernstein_constant(need(p.l, "L", name)?, need(p.lambda, "lambda", name)?)?,
        BoundName::PgdOptError => {
            let (l, lam, t) = (need(p.l, "L", name)?, need(p.lambda, "lambda", name)?, need(p.steps, "T", name)?);
            if !(lam > 0.0 && t > 0.0) {
                return Err(CliError::config("T", "lambda and T must be > 0"));
            }
            bounds::pgd_opt_error_bound(l, lam, t)
        }
        BoundName::SmoothPgdOptError => bounds::smooth_pgd_opt_error_bound(
            need(p.l, "L", name)?,
            need(p.lambda, "lambda", name)?,
            need(p.beta, "beta", name)?,
            need(p.steps, "T", name)?,
            p.c_opt.unwrap_or(1.0),
        )?,
        BoundName::MomentToWhp => bounds::moment_to_whp(
            need(p.a, "a", name)?,
            need(p.b, "b", name)?,
            need(p.delta, "delta", name)?,
            p.c_abs.unwrap_or(1.0),
        )?,
        BoundName::BernsteinMoment => {
            bounds::bernstein_moment_rhs(need(p.var_sum, "var_sum", name)?, need(p.p, "p", name)?, need(p.m, "M", name)?)?
        }
        BoundName::SelfboundingTail => bounds::selfbounding_tail_bound(
            need(p.a, "a", name)?,
            need(p.b, "b", name)?,
            need(p.e_f, "e_f", name)?,
            need(p.t, "t", name)?,
        )?,
    };
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thm1_example_prints_four_hundredths() {
        let p = BoundParams {
            gamma: Some(0.0),
            m: Some(1.0),
            b_bern: Some(1.0),
            n: Some(100.0),
            delta: Some(0.3679),
            eta: Some(1.0),
            c: Some(1.0),
            ..BoundParams::default()
        };
        assert_eq!(format!("{}", evaluate(BoundName::Thm1, &p).unwrap()), "0.04");
    }

    #[test]
    fn missing_parameter_is_a_config_error() {
        let err = evaluate(BoundName::Prop1, &BoundParams::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains('L'));
    }

    #[test]
    fn out_of_range_parameter_is_a_config_error() {
        let p = BoundParams {
            n: Some(10.0),
            delta: Some(1.5),
            ..BoundParams::default()
        };
        let err = evaluate(BoundName::Gen, &p).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("delta"));
    }
}
