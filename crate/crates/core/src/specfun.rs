//! Standard normal special functions.
//!
//! Everything here is scalar, pure and `f64`. The CDF and Q-function are built
//! on the complementary error function from `libm`, so the upper tail keeps
//! full relative precision instead of being formed as `1 - cdf(x)`.
//! [`ln_q`] goes further and stays finite where `q_func` itself underflows,
//! which the certificate in [`crate::gbound`] needs for astronomically large
//! sample sizes.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use crate::{Error, Result};

/// 1/sqrt(2*pi)
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_868_5;
/// ln(sqrt(2*pi))
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_405_617_639_9;

/// Above this argument `ln_q` switches from `ln(q_func(x))` to the Laplace
/// continued fraction for the Mills ratio.
const LN_Q_CF_SWITCH: f64 = 25.0;
const MILLS_CF_TERMS: u32 = 80;

/// Standard normal density.
#[inline]
pub fn phi(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, `Φ(x)`. Accepts `±∞`.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Gaussian Q-function, `Q(x) = 1 - Φ(x)`, evaluated on the complementary
/// branch.
#[inline]
pub fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Natural log of the Q-function.
///
/// Finite for every finite `x`; for large positive `x` it uses
/// `ln Q(x) = -x²/2 - ln √(2π) + ln R(x)` with the Mills ratio `R` from its
/// continued fraction.
pub fn ln_q(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        // Q(x) = 1 - Q(-x), and Q(-x) < 1/2 here.
        return (-q_func(-x)).ln_1p();
    }
    if x < LN_Q_CF_SWITCH {
        return q_func(x).ln();
    }
    if x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    -0.5 * x * x - LN_SQRT_2PI + mills_ratio_cf(x).ln()
}

/// Natural log of the CDF, `ln Φ(x) = ln Q(-x)`.
#[inline]
pub fn ln_norm_cdf(x: f64) -> f64 {
    ln_q(-x)
}

/// `Q(x)/φ(x)` via `1/(x + 1/(x + 2/(x + 3/(x + ...))))`, evaluated backwards.
/// Only used for `x ≥ 25`, where 80 terms are far beyond convergence.
fn mills_ratio_cf(x: f64) -> f64 {
    let mut t = x;
    for k in (1..=MILLS_CF_TERMS).rev() {
        t = x + f64::from(k) / t;
    }
    1.0 / t
}

/// Standard normal quantile `Φ⁻¹(p)` for `p ∈ (0, 1)`.
///
/// Wichura's AS241 rational approximation followed by a single Halley step on
/// the appropriate tail, so the result is accurate to a few ulp.
pub fn norm_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", p, "(0, 1)"));
    }
    Ok(quantile_unchecked(p))
}

/// `Φ⁻¹(1 - q)` computed as `-Φ⁻¹(q)`, without rounding `1 - q`.
pub fn norm_quantile_upper(q: f64) -> Result<f64> {
    norm_quantile(q).map(|x| -x)
}

pub(crate) fn quantile_unchecked(p: f64) -> f64 {
    if p > 0.5 {
        // 1 - p is exact for p in [0.5, 1).
        -lower_quantile(1.0 - p)
    } else {
        lower_quantile(p)
    }
}

/// Quantile for `p ∈ (0, 1/2]`, refined against `Φ`.
fn lower_quantile(p: f64) -> f64 {
    let x = as241(p);
    let density = phi(x);
    if density == 0.0 || !x.is_finite() {
        return x;
    }
    let u = (norm_cdf(x) - p) / density;
    x - u / (1.0 + 0.5 * x * u)
}

#[allow(clippy::excessive_precision)]
fn as241(p: f64) -> f64 {
    const SPLIT1: f64 = 0.425;
    const SPLIT2: f64 = 5.0;
    const CONST1: f64 = 0.180625;
    const CONST2: f64 = 1.6;

    const A: [f64; 8] = [
        3.387_132_872_796_366_608_0E0,
        1.331_416_678_917_843_774_5E2,
        1.971_590_950_306_551_442_7E3,
        1.373_169_376_550_946_112_5E4,
        4.592_195_393_154_987_145_7E4,
        6.726_577_092_700_870_085_3E4,
        3.343_057_558_358_812_810_5E4,
        2.509_080_928_730_122_672_7E3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_125_2E1,
        6.871_870_074_920_579_083_0E2,
        5.394_196_021_424_751_107_7E3,
        2.121_379_430_158_659_586_7E4,
        3.930_789_580_009_271_061_0E4,
        2.872_908_573_572_194_267_4E4,
        5.226_495_278_852_854_561_0E3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34E0,
        4.630_337_846_156_545_295_90E0,
        5.769_497_221_460_691_405_50E0,
        3.647_848_324_763_204_605_04E0,
        1.270_458_252_452_368_382_58E0,
        2.417_807_251_774_506_117_70E-1,
        2.272_384_498_926_918_458_33E-2,
        7.745_450_142_783_414_076_40E-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87E0,
        1.676_384_830_183_803_849_40E0,
        6.897_673_349_851_000_045_50E-1,
        1.481_039_764_274_800_745_90E-1,
        1.519_866_656_361_645_719_66E-2,
        5.475_938_084_995_344_946_00E-4,
        1.050_750_071_644_416_843_24E-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_20E0,
        5.463_784_911_164_114_369_90E0,
        1.784_826_539_917_291_335_80E0,
        2.965_605_718_285_048_912_30E-1,
        2.653_218_952_657_612_309_30E-2,
        1.242_660_947_388_078_438_60E-3,
        2.711_555_568_743_487_578_15E-5,
        2.010_334_399_292_288_132_65E-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_879_376_90E-1,
        1.369_298_809_227_358_053_10E-1,
        1.487_536_129_085_061_485_25E-2,
        7.868_691_311_456_132_591_00E-4,
        1.846_318_317_510_054_681_80E-5,
        1.421_511_758_316_445_888_70E-7,
        2.044_263_103_389_939_785_64E-15,
    ];

    let q = p - 0.5;
    if q.abs() <= SPLIT1 {
        let r = CONST1 - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let x = if r <= SPLIT2 {
        let r = r - CONST2;
        horner(&C, r) / horner(&D, r)
    } else {
        let r = r - SPLIT2;
        horner(&E, r) / horner(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Evaluates `c[0] + c[1] r + ... + c[7] r^7`.
#[inline]
fn horner(c: &[f64; 8], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * r + ci)
}

/// Constants `(𝔠₁, 𝔠₂) = (1/2 - ω/π, cot ω / (π - 2ω))` of the exponential
/// Q-function lower bound. No domain check.
#[inline]
pub(crate) fn exponential_constants(omega: f64) -> (f64, f64) {
    let c1 = 0.5 - omega / PI;
    let c2 = 1.0 / (omega.tan() * (PI - 2.0 * omega));
    (c1, c2)
}

/// Exponential sandwich of the Q-function on `x ≥ 0`:
///
/// `𝔠₁ exp(-𝔠₂ x²) ≤ Q(x) ≤ ½ exp(-x²/2)`
///
/// where `𝔠₁ = 1/2 - ω/π` and `𝔠₂ = cot ω / (π - 2ω)`, for any
/// `ω ∈ (0, π/2)`. Returns `(lower, upper)`.
///
/// ```
/// use ordsel::specfun::{q_bounds, q_func};
/// let (lo, hi) = q_bounds(1.0, std::f64::consts::FRAC_PI_4).unwrap();
/// assert!(lo <= q_func(1.0) && q_func(1.0) <= hi);
/// ```
pub fn q_bounds(x: f64, omega: f64) -> Result<(f64, f64)> {
    if !(x >= 0.0) || x.is_infinite() {
        return Err(Error::domain("x", x, "[0, ∞)"));
    }
    if !(omega > 0.0 && omega < FRAC_PI_2) {
        return Err(Error::domain("omega", omega, "(0, π/2)"));
    }
    let (c1, c2) = exponential_constants(omega);
    let x2 = x * x;
    Ok((c1 * (-c2 * x2).exp(), 0.5 * (-0.5 * x2).exp()))
}
