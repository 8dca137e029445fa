use crate::copula::{ConditionalSlice, CopulaModel};
use crate::quad::{integrate_with_breaks, Antiderivative, QuadOptions};
use crate::{Error, Result};

use super::{Method, ProbabilityEstimate, SelectionProblem};

/// From this `n` on, integrate in `s = n t` over a truncated range.
const RESCALE_FROM: u64 = 10_000;
/// Above this `n` the order-statistic density is too close to a point mass
/// at zero for the quadrature to be trusted blindly.
const WARN_ABOVE: u64 = 1_000_000;

fn reject_degenerate(model: &CopulaModel, method: &'static str) -> Result<()> {
    if model.has_conditional_density() {
        return Ok(());
    }
    Err(Error::UnsupportedFamily {
        method,
        family: model.family().as_str(),
        reason: "the conditional CDF is a step function; use the closed form",
    })
}

/// `ln(n! / ((n-m)! nᵐ (m-1)!))`, accurate for very large `n`.
fn ln_scaled_coefficient(n: u64, m: u64) -> f64 {
    let nf = n as f64;
    let falling = if m <= 10_000 {
        (0..m).map(|k| (-(k as f64) / nf).ln_1p()).sum::<f64>()
    } else {
        libm::lgamma(nf + 1.0) - libm::lgamma((n - m) as f64 + 1.0) - m as f64 * nf.ln()
    };
    falling - libm::lgamma(m as f64)
}

/// Success probability by one-dimensional quadrature.
///
/// Writing `h(t) = 1 - C(α | t)` and `G(t) = ∫₀ᵗ h`, the failure probability
/// is
///
/// `1 - p = n!/((n-m)!(m-1)!) ∫₀¹ h(t) G(t)^{m-1} (1-t)^{n-m} dt`,
///
/// because the integrand over the ordered simplex is symmetric in the first
/// `m - 1` coordinates. `G` is tabulated once as an adaptive antiderivative.
/// For `n ≥ 10⁴` the integral is taken in `s = n t` over
/// `[0, min(n, 50 + 10m)]`; beyond that the Beta density is negligible.
///
/// `tol` is the absolute error target. The comonotonic copula (and the
/// Gaussian with `|ρ| = 1`) is rejected; see
/// [`success_closed_form`](super::success_closed_form).
pub fn success_quadrature(
    model: &CopulaModel,
    prob: &SelectionProblem,
    tol: f64,
) -> Result<ProbabilityEstimate> {
    reject_degenerate(model, "quadrature")?;
    if !(tol > 0.0) {
        return Err(Error::domain("tol", tol, "(0, ∞)"));
    }
    let (n, m) = (prob.n(), prob.m());
    if n > WARN_ABOVE {
        log::warn!("n = {n}: the order-statistic density is nearly degenerate at 0; quadrature may lose accuracy");
    }

    let slice = model.conditional_at(prob.alpha());
    let failure = failure_integral(&slice, n, m, tol);
    Ok(ProbabilityEstimate::deterministic(1.0 - failure, Method::Quadrature))
}

fn failure_integral(slice: &ConditionalSlice, n: u64, m: u64, tol: f64) -> f64 {
    let nf = n as f64;
    let mf = m as f64;
    // integration variable x with t = x / k
    let (k, upper) = if n >= RESCALE_FROM {
        (nf, nf.min(50.0 + 10.0 * mf))
    } else {
        (1.0, 1.0)
    };
    let h = move |x: f64| slice.sf(x / k);

    // geometric breaks around the bulk of the order-statistic density
    let centre = mf / nf * k;
    let mut breaks = vec![0.0];
    let mut b = centre * 2f64.powi(-40);
    while b < upper {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(upper);

    let c0 = ln_scaled_coefficient(n, m) + nf.ln() - k.ln();
    let ratio = nf / k;
    let outer = |x: f64, hx: f64, big_h: f64| -> f64 {
        if hx == 0.0 {
            return 0.0;
        }
        let mut e = c0 + (nf - mf) * (-x / k).ln_1p();
        if m > 1 {
            e += (mf - 1.0) * (ratio * big_h).ln();
        }
        e.exp() * hx
    };

    if m == 1 {
        let opts = QuadOptions::with_abs_tol(tol);
        return integrate_with_breaks(|x| outer(x, h(x), 0.0), &breaks, &opts).value;
    }
    let g = Antiderivative::new(h, &breaks, &QuadOptions::with_abs_tol(tol * 1e-3));
    if !g.converged() {
        log::warn!("inner antiderivative did not reach tolerance");
    }
    let q = integrate_with_breaks(|x| outer(x, h(x), g.eval(x)), &breaks, &QuadOptions::with_abs_tol(tol));
    if !q.converged {
        log::warn!("quadrature stopped at {} panels with error estimate {:e}", q.panels, q.abs_error);
    }
    q.value
}

/// Success probability by direct nested quadrature of the ordered
/// `m`-dimensional integral
///
/// `1 - p = n!/(n-m)! ∫_{0≤z₁≤…≤z_m≤1} ∏ h(zᵢ) (1 - z_m)^{n-m} dz`,
///
/// using a `grid`-point midpoint rule at every level. Cost is `grid^m`
/// evaluations of `h`, so `m` is limited to 3.
pub fn success_bruteforce(
    model: &CopulaModel,
    prob: &SelectionProblem,
    grid: usize,
) -> Result<ProbabilityEstimate> {
    reject_degenerate(model, "brute-force quadrature")?;
    if prob.m() > 3 {
        return Err(Error::Precondition(format!(
            "brute-force quadrature supports m ≤ 3, got m = {}",
            prob.m()
        )));
    }
    if grid < 50 {
        return Err(Error::Precondition(format!("grid must be at least 50, got {grid}")));
    }
    let slice = model.conditional_at(prob.alpha());
    let (n, m) = (prob.n(), prob.m());
    let falling: f64 = (0..m).map(|k| (n - k) as f64).product();

    let w = 1.0 / grid as f64;
    let mut sum = 0.0;
    for j in 0..grid {
        let z = (j as f64 + 0.5) * w;
        let tail = ((n - m) as f64 * (-z).ln_1p()).exp();
        sum += slice.sf(z) * tail * nested(&slice, m - 1, z, grid);
    }
    let failure = falling * sum * w;
    Ok(ProbabilityEstimate::deterministic(1.0 - failure, Method::BruteForce))
}

/// `∫_{0≤z₁≤…≤z_depth≤upper} ∏ h(zᵢ) dz` by nested midpoint rules.
fn nested(slice: &ConditionalSlice, depth: u64, upper: f64, grid: usize) -> f64 {
    if depth == 0 {
        return 1.0;
    }
    let w = upper / grid as f64;
    let mut sum = 0.0;
    for j in 0..grid {
        let z = (j as f64 + 0.5) * w;
        sum += slice.sf(z) * nested(slice, depth - 1, z, grid);
    }
    sum * w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clayton1_closed() -> f64 {
        9.0 - 12.0 * 2f64.ln()
    }

    fn clayton2_closed() -> f64 {
        3f64.sqrt().asinh() / 3f64.sqrt()
    }

    #[test]
    fn clayton_closed_forms() {
        let p = SelectionProblem::new(3, 1, 0.5).unwrap();
        let v1 = success_quadrature(&CopulaModel::clayton(1.0).unwrap(), &p, 1e-12).unwrap();
        assert!((v1.value - clayton1_closed()).abs() < 1e-10);
        assert_eq!(v1.method, Method::Quadrature);
        assert!(v1.stderr.is_none());
        let v2 = success_quadrature(&CopulaModel::clayton(2.0).unwrap(), &p, 1e-12).unwrap();
        assert!((v2.value - clayton2_closed()).abs() < 1e-10);
    }

    #[test]
    fn independence_closed_form() {
        let p = SelectionProblem::new(10, 3, 0.2).unwrap();
        let v = success_quadrature(&CopulaModel::Independence, &p, 1e-12).unwrap().value;
        assert!((v - 0.488).abs() < 1e-10);
    }

    #[test]
    fn comonotonic_rejected() {
        let p = SelectionProblem::new(10, 3, 0.2).unwrap();
        assert!(matches!(
            success_quadrature(&CopulaModel::Comonotonic, &p, 1e-10),
            Err(Error::UnsupportedFamily { .. })
        ));
        assert!(success_quadrature(&CopulaModel::gaussian(1.0).unwrap(), &p, 1e-10).is_err());
        assert!(success_bruteforce(&CopulaModel::Comonotonic, &p, 100).is_err());
        assert!(success_quadrature(&CopulaModel::Independence, &p, 0.0).is_err());
    }

    #[test]
    fn all_selected_matches_closed_form() {
        for model in [CopulaModel::gaussian(0.5).unwrap(), CopulaModel::frank(3.0).unwrap()] {
            let p = SelectionProblem::new(6, 6, 0.3).unwrap();
            let v = success_quadrature(&model, &p, 1e-12).unwrap().value;
            assert!((v - (1.0 - 0.7f64.powi(6))).abs() < 1e-9, "{model}");
        }
    }

    #[test]
    fn alpha_one_is_certain() {
        let p = SelectionProblem::new(50, 3, 1.0).unwrap();
        let v = success_quadrature(&CopulaModel::gaussian(0.2).unwrap(), &p, 1e-10).unwrap();
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn bruteforce_examples() {
        let p = SelectionProblem::new(3, 1, 0.5).unwrap();
        let v = success_bruteforce(&CopulaModel::clayton(1.0).unwrap(), &p, 2000).unwrap().value;
        assert!((v - clayton1_closed()).abs() < 1e-4);
        let p = SelectionProblem::new(5, 2, 0.3).unwrap();
        let v = success_bruteforce(&CopulaModel::Independence, &p, 500).unwrap().value;
        assert!((v - 0.51).abs() < 1e-3);
        let p = SelectionProblem::new(8, 2, 0.1).unwrap();
        let g = CopulaModel::gaussian(0.7).unwrap();
        let b = success_bruteforce(&g, &p, 500).unwrap().value;
        let q = success_quadrature(&g, &p, 1e-10).unwrap().value;
        assert!((b - q).abs() < 1e-3, "{b} vs {q}");
    }

    #[test]
    fn bruteforce_preconditions() {
        let p = SelectionProblem::new(8, 4, 0.1).unwrap();
        assert!(success_bruteforce(&CopulaModel::Independence, &p, 100).is_err());
        let p = SelectionProblem::new(8, 2, 0.1).unwrap();
        assert!(success_bruteforce(&CopulaModel::Independence, &p, 49).is_err());
    }

    #[test]
    fn rescaled_branch_is_continuous() {
        // the s = n t substitution switches on at n = 10⁴
        let g = CopulaModel::gaussian(0.6).unwrap();
        for m in [1, 5] {
            let lo = success_quadrature(&g, &SelectionProblem::new(9_999, m, 0.05).unwrap(), 1e-11).unwrap().value;
            let hi = success_quadrature(&g, &SelectionProblem::new(10_000, m, 0.05).unwrap(), 1e-11).unwrap().value;
            assert!(hi >= lo && hi - lo < 1e-5, "m={m}: {lo} {hi}");
        }
    }

    #[test]
    fn large_m_independence() {
        let p = SelectionProblem::new(400, 100, 0.02).unwrap();
        let v = success_quadrature(&CopulaModel::Independence, &p, 1e-12).unwrap().value;
        assert!((v - (1.0 - 0.98f64.powi(100))).abs() < 1e-9);
        let p = SelectionProblem::new(100_000, 100, 0.02).unwrap();
        let v = success_quadrature(&CopulaModel::Independence, &p, 1e-12).unwrap().value;
        assert!((v - (1.0 - 0.98f64.powi(100))).abs() < 1e-9);
    }

    #[test]
    fn scaled_coefficient_small_cases() {
        // n!/((n-m)! nᵐ (m-1)!) for n = 5, m = 3: 60 / (125 · 2)
        assert!((ln_scaled_coefficient(5, 3) - (60.0f64 / 250.0).ln()).abs() < 1e-14);
        assert!(ln_scaled_coefficient(7, 1).abs() < 1e-15);
    }
}
