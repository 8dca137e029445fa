//! Analytic lower bound for the Gaussian copula and its inversion to a
//! sufficient sample size.
//!
//! For any `ω ∈ (0, π/2)` the Q-function satisfies `Q(x) ≥ 𝔠₁ exp(-𝔠₂ x²)`
//! on `x ≥ 0` with
//!
//! `𝔠₁ = 1/2 - ω/π`, `𝔠₂ = cot ω / (π - 2ω)`.
//!
//! From these, the minimum of `n` standard normals is stochastically
//! dominated by `N(μₙ, σₙ²)` with
//!
//! `μₙ = -√(ln(n𝔠₁)/𝔠₂)`, `σₙ² = -ln ln 2 / (2𝔠₂ (ln(n𝔠₁) - ln ln 2))`,
//!
//! once `n` is large enough. Whether `n` is large enough for a given `ω` is
//! decided numerically by [`certify`]. A certified pair yields
//!
//! `p(n, m, α) ≥ Φ((Φ⁻¹(α) - ρμₙ) / √(1 - ρ² + ρ²σₙ²))`
//!
//! for every `m ≥ 1`. Setting the right-hand side to `1 - δ` and writing
//! `x = √ln(n𝔠₁)` gives a quartic in `x`; its greatest real root is the
//! sample size [`n_star`] reports.
//!
//! Sample sizes can be astronomically large (beyond `10^47000` for weak
//! correlation), so every quantity that depends on `n` is carried as `ln n`.
//!
//! ```
//! use ordsel::gbound::{n_star_optimized, InversionSpec};
//!
//! let spec = InversionSpec::new(0.01, 0.99, 0.1).unwrap();
//! let n = n_star_optimized(&spec).unwrap().expect("finite");
//! assert_eq!(n.size.exact_n, Some(372));
//! ```

use std::f64::consts::{FRAC_PI_2, LN_10, LN_2};

use nalgebra::{DMatrix, Schur};
use rayon::prelude::*;
use serde::Serialize;

use crate::specfun::{exponential_constants, ln_q, norm_cdf, quantile_unchecked};
use crate::{Error, Result};

/// Grid used for check (ii) of the certificate everywhere in this module.
pub const CERT_GRID: usize = 1000;
/// Points of the uniform ω scan before golden-section refinement.
pub const OMEGA_GRID: usize = 512;
const OMEGA_EDGE: f64 = 1e-6;
const GOLDEN_ITERS: usize = 40;
/// Largest `log10 n` for which `n` is also reported as an integer.
const EXACT_LOG10_LIMIT: f64 = 15.0;

/// `ln ln 2`, negative.
fn ln_ln2() -> f64 {
    LN_2.ln()
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::domain("omega", omega, "(0, π/2)"))
    }
}

/// `(𝔠₁, 𝔠₂) = (1/2 - ω/π, cot ω / (π - 2ω))`.
pub fn omega_constants(omega: f64) -> Result<(f64, f64)> {
    check_omega(omega)?;
    Ok(exponential_constants(omega))
}

/// `(μ, σ²)` from `L = ln(n𝔠₁) > 0`.
fn params_from_log(l: f64, c2: f64) -> (f64, f64) {
    let ll2 = ln_ln2();
    let mu = -(l / c2).sqrt();
    let sigma2 = -ll2 / (2.0 * c2 * (l - ll2));
    (mu, sigma2)
}

/// Mean and variance `(μₙ, σₙ²)` of the Gaussian that dominates the minimum
/// of `n` standard normals. Requires `n𝔠₁ > 1`.
pub fn dominating_params(n: u64, omega: f64) -> Result<(f64, f64)> {
    let (c1, c2) = omega_constants(omega)?;
    let nc1 = n as f64 * c1;
    if !(nc1 > 1.0) {
        return Err(Error::Precondition(format!(
            "n·c1 = {nc1} must exceed 1 (n = {n}, omega = {omega})"
        )));
    }
    Ok(params_from_log(nc1.ln(), c2))
}

/// Which step of the certificate rejected the pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateCheck {
    /// `n𝔠₁ ≤ 1`
    Positivity,
    /// `Q(z)ⁿ ≤ Q((z - μₙ)/σₙ)` failed somewhere on `[μₙ, 0]`
    LeftInterval,
    /// the closed-form inequality for `z > 0` failed
    RightInterval,
}

/// Outcome of [`certify`] together with the constants it used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OmegaCertificate {
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
    /// `None` when `n𝔠₁ ≤ 1`.
    pub mu_n: Option<f64>,
    pub sigma_n2: Option<f64>,
    /// `None` when `n` was only given through its logarithm.
    pub n: Option<u64>,
    pub log10_n: f64,
    pub certified: bool,
    pub failed_check: Option<CertificateCheck>,
}

/// Runs the three-step stochastic-dominance certificate for `(n, ω)`.
///
/// 1. `n𝔠₁ > 1`.
/// 2. `Q(z)ⁿ ≤ Q((z - μₙ)/σₙ)` at `grid` equispaced points of `[μₙ, 0]`.
/// 3. `(n/2 - 𝔠₂/σₙ²)(n ln 2 + μₙ²/σₙ² - ln 𝔠₁) ≥ 𝔠₂² μₙ² / σₙ⁴`.
///
/// ```
/// use ordsel::gbound::certify;
/// use std::f64::consts::FRAC_PI_4;
/// assert!(!certify(4, FRAC_PI_4, 1000).unwrap().certified);
/// assert!(certify(5, FRAC_PI_4, 1000).unwrap().certified);
/// ```
pub fn certify(n: u64, omega: f64, grid: usize) -> Result<OmegaCertificate> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    certify_inner((n as f64).ln(), Some(n), omega, grid)
}

/// [`certify`] for `n = exp(ln_n)`, which need not be representable.
pub fn certify_ln(ln_n: f64, omega: f64, grid: usize) -> Result<OmegaCertificate> {
    if !(ln_n >= 0.0 && ln_n.is_finite()) {
        return Err(Error::domain("ln n", ln_n, "[0, ∞)"));
    }
    certify_inner(ln_n, None, omega, grid)
}

fn certify_inner(ln_n: f64, n: Option<u64>, omega: f64, grid: usize) -> Result<OmegaCertificate> {
    check_omega(omega)?;
    if grid < 100 {
        return Err(Error::Precondition(format!("certificate grid must be at least 100, got {grid}")));
    }
    let (c1, c2) = exponential_constants(omega);
    let mut cert = OmegaCertificate {
        omega,
        c1,
        c2,
        mu_n: None,
        sigma_n2: None,
        n,
        log10_n: ln_n / LN_10,
        certified: false,
        failed_check: None,
    };

    // (i), exactly when n is an integer so that n = 1/𝔠₁ is caught
    let l = match n {
        Some(k) => (k as f64 * c1).ln(),
        None => ln_n + c1.ln(),
    };
    if !(l > 0.0) {
        cert.failed_check = Some(CertificateCheck::Positivity);
        return Ok(cert);
    }
    let (mu, sigma2) = params_from_log(l, c2);
    cert.mu_n = Some(mu);
    cert.sigma_n2 = Some(sigma2);
    let sigma = sigma2.sqrt();

    // (ii), with ln(Q(z)ⁿ) = -exp(ln n + ln(-ln Q(z)))
    for i in 0..grid {
        let z = mu - mu * i as f64 / (grid - 1) as f64;
        let lhs = -(ln_n + ln_neg_ln_q(z)).exp();
        let rhs = ln_q((z - mu) / sigma);
        if lhs > rhs + 1e-12 * rhs.abs() {
            cert.failed_check = Some(CertificateCheck::LeftInterval);
            return Ok(cert);
        }
    }

    // (iii) in logs: A = n/2 - 𝔠₂/σ², B = n ln 2 + K, R = 𝔠₂²μ²/σ⁴
    let shift = (2.0 * c2 / sigma2).ln() - ln_n;
    let k_term = mu * mu / sigma2 - c1.ln();
    let right_ok = if shift >= 0.0 {
        false
    } else {
        let ln_a = ln_n - LN_2 + (-shift.exp()).ln_1p();
        let ln_b = ln_n + (LN_2 + k_term * (-ln_n).exp()).ln();
        let ln_r = 2.0 * c2.ln() + 2.0 * mu.abs().ln() - 2.0 * sigma2.ln();
        ln_a + ln_b >= ln_r
    };
    if !right_ok {
        cert.failed_check = Some(CertificateCheck::RightInterval);
        return Ok(cert);
    }
    cert.certified = true;
    Ok(cert)
}

/// `ln(-ln Q(z))`, accurate when `Q(z)` is within rounding of 1.
fn ln_neg_ln_q(z: f64) -> f64 {
    if z >= 0.0 {
        return (-ln_q(z)).ln();
    }
    // -ln Q(z) = -ln(1 - Q(|z|)) = Q(|z|)(1 + Q(|z|)/2 + ...)
    let lt = ln_q(-z);
    if lt < -40.0 {
        lt
    } else {
        (-(-lt.exp()).ln_1p()).ln()
    }
}

fn check_alpha_rho(alpha: f64, rho: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain("alpha", alpha, "(0, 1]"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::domain("rho", rho, "(0, 1]"));
    }
    Ok(())
}

/// `Φ((Φ⁻¹(α) - ρμ) / √(1 - ρ² + ρ²σ²))`
fn bound_formula(alpha: f64, rho: f64, mu: f64, sigma2: f64) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let a = quantile_unchecked(alpha);
    let scale = ((1.0 - rho) * (1.0 + rho) + rho * rho * sigma2).sqrt();
    norm_cdf((a - rho * mu) / scale)
}

fn bound_from_certificate(cert: &OmegaCertificate, alpha: f64, rho: f64) -> f64 {
    match (cert.certified, cert.mu_n, cert.sigma_n2) {
        (true, Some(mu), Some(s2)) => bound_formula(alpha, rho, mu, s2),
        _ => 0.0,
    }
}

/// Lower bound on `p(n, m, α)` for the Gaussian copula with correlation `ρ`
/// at a fixed `ω`, together with the certificate behind it. The bound is 0
/// when `(n, ω)` does not certify.
pub fn bound_with_certificate(
    n: u64,
    alpha: f64,
    rho: f64,
    omega: f64,
) -> Result<(f64, OmegaCertificate)> {
    check_alpha_rho(alpha, rho)?;
    let cert = certify(n, omega, CERT_GRID)?;
    Ok((bound_from_certificate(&cert, alpha, rho), cert))
}

/// Lower bound on `p(n, m, α)` at a fixed `ω`; see [`bound_with_certificate`].
///
/// ```
/// use ordsel::gbound::lower_bound;
/// let b = lower_bound(100, 0.05, 0.4, std::f64::consts::FRAC_PI_4).unwrap();
/// assert!((b - 0.2098).abs() < 1e-4);
/// ```
pub fn lower_bound(n: u64, alpha: f64, rho: f64, omega: f64) -> Result<f64> {
    bound_with_certificate(n, alpha, rho, omega).map(|(b, _)| b)
}

/// Result of maximising the bound over `ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizedBound {
    pub bound: f64,
    /// `None` when no `ω` certifies.
    pub omega: Option<f64>,
}

/// Uniform grid over `[ε, π/2 - ε]`.
fn omega_grid() -> Vec<f64> {
    let (lo, hi) = (OMEGA_EDGE, FRAC_PI_2 - OMEGA_EDGE);
    let step = (hi - lo) / (OMEGA_GRID - 1) as f64;
    (0..OMEGA_GRID).map(|i| lo + step * i as f64).collect()
}

/// Index of the best value under `better`, first occurrence on ties (so
/// the smallest ω wins).
fn best_index(values: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if better(v, values[best]) {
            best = i;
        }
    }
    best
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Bracket of one grid step either side of `grid[i]`, kept inside the scan range.
fn bracket(grid: &[f64], i: usize) -> (f64, f64) {
    (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)])
}

/// Maximises [`lower_bound`] over `ω` by a 512-point scan of
/// `[10⁻⁶, π/2 - 10⁻⁶]` followed by golden-section refinement within one
/// grid step of the best point.
pub fn optimized_lower_bound(n: u64, alpha: f64, rho: f64) -> Result<OptimizedBound> {
    check_alpha_rho(alpha, rho)?;
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let eval = |omega: f64| -> f64 {
        certify(n, omega, CERT_GRID)
            .map(|c| bound_from_certificate(&c, alpha, rho))
            .unwrap_or(0.0)
    };
    let grid = omega_grid();
    let values: Vec<f64> = grid.par_iter().map(|&w| eval(w)).collect();
    let i = best_index(&values, |v, best| v > best);
    if values[i] <= 0.0 {
        return Ok(OptimizedBound { bound: 0.0, omega: None });
    }
    let (a, b) = bracket(&grid, i);
    let (w, v) = golden_max(eval, a, b);
    Ok(if v > values[i] {
        OptimizedBound { bound: v, omega: Some(w) }
    } else {
        OptimizedBound { bound: values[i], omega: Some(grid[i]) }
    })
}

/// Target of the sample-size inversion: success probability at least
/// `1 - δ` at goal-softening level `α` under correlation `ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InversionSpec {
    pub alpha: f64,
    pub rho: f64,
    pub delta: f64,
}

impl InversionSpec {
    pub fn new(alpha: f64, rho: f64, delta: f64) -> Result<Self> {
        check_alpha_rho(alpha, rho)?;
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::domain("delta", delta, "(0, 1]"));
        }
        Ok(InversionSpec { alpha, rho, delta })
    }
}

/// Coefficients `[𝔞₄, 𝔞₃, 𝔞₂, 𝔞₁, 𝔞₀]` of the quartic in `x = √ln(n𝔠₁)`
/// whose greatest real root puts the bound exactly at `1 - δ`.
///
/// With `A = Φ⁻¹(α)`, `B = Φ⁻¹(1 - δ)`, `K = A² - B² + ρ²B²` and
/// `λ = ln ln 2`:
///
/// `𝔞₄ = -2ρ²/λ`, `𝔞₃ = -4Aρ√𝔠₂/λ`, `𝔞₂ = 2ρ² - 2𝔠₂K/λ`,
/// `𝔞₁ = 4Aρ√𝔠₂`, `𝔞₀ = 2𝔠₂K - ρ²B²`.
pub fn quartic_coefficients(spec: &InversionSpec, omega: f64) -> Result<[f64; 5]> {
    let (_, c2) = omega_constants(omega)?;
    let lam = ln_ln2();
    let rho = spec.rho;
    let a = quantile_unchecked(spec.alpha);
    let b = -quantile_unchecked(spec.delta);
    let k = a * a - b * b + rho * rho * b * b;
    let sc2 = c2.sqrt();
    Ok([
        -2.0 * rho * rho / lam,
        -4.0 * a * rho * sc2 / lam,
        2.0 * rho * rho - 2.0 * c2 * k / lam,
        4.0 * a * rho * sc2,
        2.0 * c2 * k - rho * rho * b * b,
    ])
}

fn horner_with_derivative(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &ci in c {
        dp = dp * x + p;
        p = p * x + ci;
    }
    (p, dp)
}

/// Greatest real root of `a₄x⁴ + a₃x³ + a₂x² + a₁x + a₀`, coefficients given
/// highest degree first.
///
/// Leading zero coefficients drop the degree (cubic, quadratic, linear). The
/// roots are the eigenvalues of the companion matrix; those with imaginary
/// part below `1e-9·(1 + |re|)` count as real, and the largest is polished by
/// two Newton steps. Returns `Ok(None)` when there is no real root and an
/// error when every coefficient is zero.
///
/// ```
/// use ordsel::gbound::solve_quartic_greatest_real_root;
/// assert_eq!(solve_quartic_greatest_real_root([1.0, 0.0, -5.0, 0.0, 4.0]).unwrap(), Some(2.0));
/// assert_eq!(solve_quartic_greatest_real_root([1.0, 0.0, 0.0, 0.0, 1.0]).unwrap(), None);
/// ```
pub fn solve_quartic_greatest_real_root(coeffs: [f64; 5]) -> Result<Option<f64>> {
    let Some(lead) = coeffs.iter().position(|&c| c != 0.0) else {
        return Err(Error::DegeneratePolynomial);
    };
    let poly = &coeffs[lead..];
    let degree = poly.len() - 1;
    if degree == 0 {
        return Ok(None);
    }
    let companion = DMatrix::from_fn(degree, degree, |i, j| {
        if i == 0 {
            -poly[j + 1] / poly[0]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let best = eigenvalues(companion)?
        .iter()
        .filter(|z| z.im.abs() < 1e-9 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .max_by(f64::total_cmp);
    let Some(mut x) = best else {
        return Ok(None);
    };
    for _ in 0..2 {
        let (p, dp) = horner_with_derivative(poly, x);
        if dp == 0.0 {
            break;
        }
        let next = x - p / dp;
        if horner_with_derivative(poly, next).0.abs() <= p.abs() {
            x = next;
        }
    }
    Ok(Some(x))
}

/// Eigenvalues by the real Schur form. The unshifted companion matrix of a
/// polynomial like `x⁴ + 1` makes the Francis iteration cycle, so on failure
/// the matrix is conjugated by a plane rotation and tried again.
fn eigenvalues(m: DMatrix<f64>) -> Result<nalgebra::DVector<nalgebra::Complex<f64>>> {
    const MAX_ITER: usize = 5000;
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, MAX_ITER) {
        return Ok(s.complex_eigenvalues());
    }
    let d = m.nrows();
    for (c, s) in [(0.6, 0.8), (0.28, 0.96)] {
        let mut g = DMatrix::<f64>::identity(d, d);
        g[(0, 0)] = c;
        g[(0, d - 1)] = -s;
        g[(d - 1, 0)] = s;
        g[(d - 1, d - 1)] = c;
        let rotated = &g * &m * g.transpose();
        if let Some(schur) = Schur::try_new(rotated, f64::EPSILON, MAX_ITER) {
            return Ok(schur.complex_eigenvalues());
        }
    }
    Err(Error::Precondition("eigenvalue iteration did not converge".into()))
}

/// A sample size carried as its base-10 logarithm, with the integer value
/// alongside when it is at most `10¹⁵`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogSampleSize {
    pub log10_n: f64,
    pub exact_n: Option<u64>,
}

impl LogSampleSize {
    pub fn exact(n: u64) -> Self {
        LogSampleSize {
            log10_n: (n as f64).log10(),
            exact_n: Some(n),
        }
    }

    /// `n = exp(ln_n)`, rounded up to an integer when small enough.
    pub fn from_ln(ln_n: f64) -> Self {
        let log10_n = ln_n / LN_10;
        if log10_n <= EXACT_LOG10_LIMIT {
            let x = ln_n.exp();
            // exp(ln k) carries a relative error of order ln(k)·ε, which can
            // lift it just above the integer k
            let noise = 4.0 * (1.0 + ln_n.abs()) * f64::EPSILON * x;
            let snapped = if x - x.floor() <= noise { x.floor() } else { x.ceil() };
            Self::exact((snapped as u64).max(1))
        } else {
            LogSampleSize { log10_n, exact_n: None }
        }
    }
}

/// A certified sufficient sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleSizeResult {
    pub size: LogSampleSize,
    /// The `ω` behind the certificate; `None` for closed-form answers.
    pub omega: Option<f64>,
    /// The lower bound on the success probability at the reported size.
    pub bound: f64,
}

/// Answers that need no inversion: `α = 1` (every selection succeeds) or
/// `δ = 1` (nothing is demanded).
fn trivial_inversion(spec: &InversionSpec) -> Option<SampleSizeResult> {
    (spec.alpha == 1.0 || spec.delta == 1.0).then(|| SampleSizeResult {
        size: LogSampleSize::exact(1),
        omega: None,
        bound: if spec.alpha == 1.0 { 1.0 } else { 0.0 },
    })
}

/// `ln n` from the quartic at `ω` before rounding, if the root is usable.
fn continuous_ln_n(spec: &InversionSpec, omega: f64) -> Result<Option<f64>> {
    let coeffs = quartic_coefficients(spec, omega)?;
    let root = match solve_quartic_greatest_real_root(coeffs) {
        Ok(r) => r,
        Err(Error::DegeneratePolynomial) => None,
        Err(e) => return Err(e),
    };
    let (c1, _) = exponential_constants(omega);
    Ok(root.filter(|&x| x > 0.0).map(|x| x * x - c1.ln()))
}

/// Sufficient sample size for the fixed `ω`, or `None` when the quartic has
/// no usable root or the resulting size fails the certificate.
///
/// The root `x` gives `n = exp(x² - ln 𝔠₁)`, rounded up to an integer when
/// `n ≤ 10¹⁵` and otherwise kept as a logarithm; certification then runs in
/// `ln n` arithmetic.
pub fn n_star(spec: &InversionSpec, omega: f64) -> Result<Option<SampleSizeResult>> {
    check_omega(omega)?;
    if let Some(t) = trivial_inversion(spec) {
        return Ok(Some(t));
    }
    let Some(ln_n) = continuous_ln_n(spec, omega)? else {
        return Ok(None);
    };
    let mut size = LogSampleSize::from_ln(ln_n);
    let (cert, slack) = match size.exact_n {
        Some(n) => (certify(n, omega, CERT_GRID)?, 0.0),
        // n itself sits on the equality; allow for rounding in the logs
        None => (certify_ln(ln_n, omega, CERT_GRID)?, 1e-9),
    };
    if !cert.certified {
        return Ok(None);
    }
    let mut bound = bound_from_certificate(&cert, spec.alpha, spec.rho);
    if let Some(n) = size.exact_n {
        // the rounded root can sit a hair short of the target
        if bound < 1.0 - spec.delta {
            let next = certify(n + 1, omega, CERT_GRID)?;
            let b = bound_from_certificate(&next, spec.alpha, spec.rho);
            if next.certified && b >= 1.0 - spec.delta {
                (size, bound) = (LogSampleSize::exact(n + 1), b);
            }
        }
    }
    if bound < 1.0 - spec.delta - slack {
        // a spurious root introduced by squaring
        return Ok(None);
    }
    Ok(Some(SampleSizeResult {
        size,
        omega: Some(omega),
        bound,
    }))
}

/// Minimises [`n_star`] over `ω`: a 512-point scan of `[10⁻⁶, π/2 - 10⁻⁶]`,
/// then golden-section refinement of the unrounded `ln n` within one grid
/// step of the best point. Ties go to the smaller `ω`.
pub fn n_star_optimized(spec: &InversionSpec) -> Result<Option<SampleSizeResult>> {
    if let Some(t) = trivial_inversion(spec) {
        return Ok(Some(t));
    }
    let grid = omega_grid();
    let results: Vec<Option<SampleSizeResult>> = grid
        .par_iter()
        .map(|&w| n_star(spec, w))
        .collect::<Result<_>>()?;
    let logs: Vec<f64> = results
        .iter()
        .map(|r| r.map_or(f64::INFINITY, |r| r.size.log10_n))
        .collect();
    let i = best_index(&logs, |v, best| v < best);
    let Some(incumbent) = results[i] else {
        return Ok(None);
    };

    let objective = |w: f64| -> f64 {
        match n_star(spec, w) {
            Ok(Some(_)) => continuous_ln_n(spec, w).ok().flatten().map_or(f64::NEG_INFINITY, |l| -l),
            _ => f64::NEG_INFINITY,
        }
    };
    let (a, b) = bracket(&grid, i);
    let (w, _) = golden_max(objective, a, b);
    Ok(match n_star(spec, w)? {
        Some(r) if r.size.log10_n < incumbent.size.log10_n => Some(r),
        _ => Some(incumbent),
    })
}

/// Smallest `n` with `1 - (1 - α)ⁿ ≥ 1 - δ`: the exact answer when the
/// observation is noiseless (`ρ = 1`), where selection by rank is selection
/// by true quality.
pub fn n_star_noiseless(alpha: f64, delta: f64) -> Result<LogSampleSize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain("alpha", alpha, "(0, 1]"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain("delta", delta, "(0, 1]"));
    }
    if alpha == 1.0 || delta == 1.0 {
        return Ok(LogSampleSize::exact(1));
    }
    let ratio = delta.ln() / (-alpha).ln_1p();
    let log10_n = ratio.log10();
    if log10_n > EXACT_LOG10_LIMIT {
        return Ok(LogSampleSize { log10_n, exact_n: None });
    }
    let mut n = (ratio.ceil() as u64).max(1);
    // guard the ceiling against rounding in the ratio
    let fails = |k: u64| (k as f64 * (-alpha).ln_1p()) > delta.ln();
    while fails(n) {
        n += 1;
    }
    while n > 1 && !fails(n - 1) {
        n -= 1;
    }
    Ok(LogSampleSize::exact(n))
}

/// Correlation of the Gaussian copula induced by additive Gaussian noise
/// with noise-to-signal variance ratio `ξ²`: `ρ = (1 + ξ²)^{-1/2}`.
pub fn rho_from_noise(xi2: f64) -> Result<f64> {
    if !(xi2 >= 0.0) {
        return Err(Error::domain("xi2", xi2, "[0, ∞)"));
    }
    Ok(1.0 / (1.0 + xi2).sqrt())
}
