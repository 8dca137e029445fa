//! Success probability of horse-race selection.
//!
//! `n` candidates carry observed percentiles `Uᵢ` and true percentiles `Vᵢ`,
//! each pair drawn from a copula. The `m` candidates with the smallest
//! observed values are kept, and the selection succeeds when at least one of
//! them lies in the true top `100α` percent (`Vᵢ ≤ α`).
//!
//! Three independent evaluators are provided:
//!
//! * [`success_quadrature`]: a one-dimensional integral against the density
//!   of the `m`-th order statistic, with the inner `(m-1)`-fold integral
//!   collapsed into a power of an antiderivative. Cheap for any `m`.
//! * [`success_bruteforce`]: direct nested midpoint quadrature over the
//!   ordered simplex, for `m ≤ 3`.
//! * [`success_montecarlo`]: simulation of the selection rule as stated,
//!   and [`success_montecarlo_order_stats`], which samples only the `m`
//!   smallest observed values and is exact in law at `O(m)` cost per draw.
//!
//! ```
//! use ordsel::copula::CopulaModel;
//! use ordsel::selection::{general_bounds, success_quadrature, SelectionProblem};
//!
//! let model = CopulaModel::frank(4.0).unwrap();
//! let problem = SelectionProblem::new(20, 2, 0.1).unwrap();
//! let p = success_quadrature(&model, &problem, 1e-10).unwrap().value;
//! let (lo, hi) = general_bounds(&problem);
//! assert!(lo <= p && p <= hi);
//! ```

mod integral;
mod montecarlo;

use serde::{Deserialize, Serialize};

use crate::copula::CopulaModel;
use crate::{Error, Result};

pub use integral::{success_bruteforce, success_quadrature};
pub use montecarlo::{
    ranked_subset_montecarlo, success_montecarlo, success_montecarlo_order_stats,
    threshold_rule_montecarlo,
};

/// The triple `(n, m, α)`: sample size, selection size and goal-softening
/// percentile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SelectionProblem {
    n: u64,
    m: u64,
    alpha: f64,
}

impl SelectionProblem {
    pub fn new(n: u64, m: u64, alpha: f64) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::Problem(format!("need 1 ≤ m ≤ n, got n = {n}, m = {m}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain("alpha", alpha, "(0, 1]"));
        }
        Ok(SelectionProblem { n, m, alpha })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    BruteForce,
    MonteCarlo,
    ClosedForm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::BruteForce => "brute_force",
            Method::MonteCarlo => "monte_carlo",
            Method::ClosedForm => "closed_form",
        }
    }
}

/// A probability together with how it was obtained. Monte Carlo estimates
/// also carry their standard error and replication count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub value: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub replications: Option<u64>,
}

impl ProbabilityEstimate {
    pub(crate) fn deterministic(value: f64, method: Method) -> Self {
        debug_assert!(method != Method::MonteCarlo);
        ProbabilityEstimate {
            value: value.clamp(0.0, 1.0),
            method,
            stderr: None,
            replications: None,
        }
    }

    pub(crate) fn from_counts(successes: u64, reps: u64) -> Self {
        let p = successes as f64 / reps as f64;
        ProbabilityEstimate {
            value: p,
            method: Method::MonteCarlo,
            stderr: Some((p * (1.0 - p) / reps as f64).sqrt()),
            replications: Some(reps),
        }
    }
}

/// `1 - (1 - x)^k` without cancellation for small `x`.
fn one_minus_pow_complement(x: f64, k: f64) -> f64 {
    if x >= 1.0 {
        return 1.0;
    }
    -(k * (-x).ln_1p()).exp_m1()
}

/// Exact values where the problem collapses to a closed form: `α = 1`,
/// `m = n`, the independence copula and the comonotonic copula.
/// Returns `None` otherwise.
pub fn success_closed_form(model: &CopulaModel, prob: &SelectionProblem) -> Option<ProbabilityEstimate> {
    let (n, m, alpha) = (prob.n as f64, prob.m as f64, prob.alpha);
    let value = if alpha == 1.0 {
        1.0
    } else if prob.m == prob.n {
        one_minus_pow_complement(alpha, n)
    } else {
        match *model {
            CopulaModel::Independence => one_minus_pow_complement(alpha, m),
            CopulaModel::Gaussian { rho } if rho == 0.0 => one_minus_pow_complement(alpha, m),
            CopulaModel::Comonotonic => one_minus_pow_complement(alpha, n),
            CopulaModel::Gaussian { rho } if rho == 1.0 => one_minus_pow_complement(alpha, n),
            _ => return None,
        }
    };
    Some(ProbabilityEstimate::deterministic(value, Method::ClosedForm))
}

/// Success probability when every candidate with `u ≤ m/n` is selected
/// (a random number of selections with mean `m`):
/// `1 - (1 - C(m/n, α))ⁿ`.
pub fn success_randomized_threshold(model: &CopulaModel, prob: &SelectionProblem) -> ProbabilityEstimate {
    let c = model.joint_cdf_unchecked(prob.m as f64 / prob.n as f64, prob.alpha);
    ProbabilityEstimate::deterministic(one_minus_pow_complement(c, prob.n as f64), Method::ClosedForm)
}

fn check_limit_args(m: u64, alpha: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::Problem("m must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain("alpha", alpha, "(0, 1]"));
    }
    Ok(())
}

/// `n → ∞` limit of the randomized-threshold rule: `1 - exp(-m C(α|0⁺))`.
pub fn randomized_limit(model: &CopulaModel, m: u64, alpha: f64) -> Result<f64> {
    check_limit_args(m, alpha)?;
    let b = model.boundary_unchecked(alpha);
    Ok(-(-(m as f64) * b).exp_m1())
}

/// `n → ∞` limit of fixed-size selection: `1 - (1 - C(α|0⁺))^m`.
pub fn fixed_limit(model: &CopulaModel, m: u64, alpha: f64) -> Result<f64> {
    check_limit_args(m, alpha)?;
    let b = model.boundary_unchecked(alpha);
    Ok(one_minus_pow_complement(b, m as f64))
}

/// Copula-free bounds `(1 - (1-α)^m, 1 - (1-α)^n)`, valid for SIPD copulas.
pub fn general_bounds(prob: &SelectionProblem) -> (f64, f64) {
    (
        one_minus_pow_complement(prob.alpha, prob.m as f64),
        one_minus_pow_complement(prob.alpha, prob.n as f64),
    )
}
