//! Bivariate copulas coupling the observed quality `Z` (first coordinate, `u`)
//! with the true quality `X` (second coordinate, `v`).
//!
//! Five families are supported: Gaussian, Clayton, Frank, independence and
//! the comonotonic (upper Fréchet) copula. For each one the module provides
//! the joint CDF `C(u, v)`, the conditional CDF `C(v | u) = ∂C/∂u`, its limit
//! as `u → 0⁺`, exact conditional-inversion sampling, and a grid check of
//! stochastically increasing positive dependence.
//!
//! Clayton and Frank are evaluated in forms that never build `u^{-θ}` or
//! `e^{θ}` explicitly, so any finite positive parameter works.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::RandomStream;
use crate::specfun::{norm_cdf, q_func, quantile_unchecked};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopulaFamily {
    Gaussian,
    Clayton,
    Frank,
    Independence,
    Comonotonic,
}

impl CopulaFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Clayton => "clayton",
            Self::Frank => "frank",
            Self::Independence => "independence",
            Self::Comonotonic => "comonotonic",
        }
    }

    pub fn has_parameter(self) -> bool {
        matches!(self, Self::Gaussian | Self::Clayton | Self::Frank)
    }
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CopulaFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Self::Gaussian),
            "clayton" => Ok(Self::Clayton),
            "frank" => Ok(Self::Frank),
            "independence" => Ok(Self::Independence),
            "comonotonic" => Ok(Self::Comonotonic),
            other => Err(format!("unknown copula family '{other}'")),
        }
    }
}

/// A validated copula. Construct through [`CopulaModel::new`] or the
/// per-family constructors; the variants are public for matching only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CopulaModel {
    /// Correlation `ρ ∈ [-1, 1]`.
    Gaussian { rho: f64 },
    /// `ϑ > 0`.
    Clayton { theta: f64 },
    /// `ϑ > 0` (positive dependence only).
    Frank { theta: f64 },
    Independence,
    Comonotonic,
}

impl CopulaModel {
    pub fn gaussian(rho: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::domain("rho", rho, "[-1, 1]"));
        }
        Ok(Self::Gaussian { rho })
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::domain("clayton parameter", theta, "(0, ∞)"));
        }
        Ok(Self::Clayton { theta })
    }

    pub fn frank(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::domain("frank parameter", theta, "(0, ∞)"));
        }
        Ok(Self::Frank { theta })
    }

    /// Builds a model from a family tag and optional parameter. Parameterless
    /// families reject a parameter and vice versa.
    pub fn new(family: CopulaFamily, param: Option<f64>) -> Result<Self> {
        match (family, param) {
            (CopulaFamily::Gaussian, Some(p)) => Self::gaussian(p),
            (CopulaFamily::Clayton, Some(p)) => Self::clayton(p),
            (CopulaFamily::Frank, Some(p)) => Self::frank(p),
            (CopulaFamily::Independence, None) => Ok(Self::Independence),
            (CopulaFamily::Comonotonic, None) => Ok(Self::Comonotonic),
            (f, Some(_)) => Err(Error::Precondition(format!("the {f} copula takes no parameter"))),
            (f, None) => Err(Error::Precondition(format!("the {f} copula needs a parameter"))),
        }
    }

    pub fn family(&self) -> CopulaFamily {
        match self {
            Self::Gaussian { .. } => CopulaFamily::Gaussian,
            Self::Clayton { .. } => CopulaFamily::Clayton,
            Self::Frank { .. } => CopulaFamily::Frank,
            Self::Independence => CopulaFamily::Independence,
            Self::Comonotonic => CopulaFamily::Comonotonic,
        }
    }

    pub fn param(&self) -> Option<f64> {
        match *self {
            Self::Gaussian { rho } => Some(rho),
            Self::Clayton { theta } | Self::Frank { theta } => Some(theta),
            Self::Independence | Self::Comonotonic => None,
        }
    }

    /// True when `C(v | u)` is a genuine continuous function of `u` (every
    /// family except the comonotonic copula and the degenerate `|ρ| = 1`
    /// Gaussian).
    pub fn has_conditional_density(&self) -> bool {
        match *self {
            Self::Gaussian { rho } => rho.abs() < 1.0,
            Self::Comonotonic => false,
            _ => true,
        }
    }

    /// Joint CDF `C(u, v)` on the unit square.
    pub fn joint_cdf(&self, u: f64, v: f64) -> Result<f64> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.joint_cdf_unchecked(u, v))
    }

    pub(crate) fn joint_cdf_unchecked(&self, u: f64, v: f64) -> f64 {
        if u == 0.0 || v == 0.0 {
            return 0.0;
        }
        if u == 1.0 {
            return v;
        }
        if v == 1.0 {
            return u;
        }
        let c = match *self {
            Self::Gaussian { rho } => {
                if rho == 1.0 {
                    u.min(v)
                } else if rho == -1.0 {
                    (u + v - 1.0).max(0.0)
                } else {
                    bivariate_normal_cdf(quantile_unchecked(u), quantile_unchecked(v), rho)
                }
            }
            Self::Clayton { theta } => {
                // (e^a + e^b - 1)^{-1/θ} with a = -θ ln u, b = -θ ln v, both > 0
                let a = -theta * u.ln();
                let b = -theta * v.ln();
                let (hi, lo) = if a > b { (a, b) } else { (b, a) };
                let ln_sum = hi + ((lo - hi).exp() - (-hi).exp()).ln_1p();
                (-ln_sum / theta).exp()
            }
            Self::Frank { theta } => {
                let (m, big) = if u < v { (u, v) } else { (v, u) };
                let inner = -(-theta * big).exp_m1()
                    + (-theta * (big - m)).exp() * -(-theta * (1.0 - big)).exp_m1();
                m - (inner.ln() - (-(-theta).exp_m1()).ln()) / theta
            }
            Self::Independence => u * v,
            Self::Comonotonic => u.min(v),
        };
        c.clamp((u + v - 1.0).max(0.0), u.min(v))
    }

    /// Conditional CDF `C(v | u) = Pr(V ≤ v | U = u)`.
    ///
    /// For the comonotonic copula (and the Gaussian with `|ρ| = 1`) this is a
    /// step function in `u`, not a density-backed quantity.
    pub fn conditional_cdf(&self, v: f64, u: f64) -> Result<f64> {
        check_unit("v", v)?;
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain("u", u, "(0, 1)"));
        }
        Ok(self.conditional_at(v).cdf(u))
    }

    /// `C(v | ·)` with everything that depends only on `v` precomputed.
    pub fn conditional_at(&self, v: f64) -> ConditionalSlice {
        let kind = if v <= 0.0 {
            SliceKind::Zero
        } else if v >= 1.0 {
            SliceKind::One
        } else {
            match *self {
                Self::Gaussian { rho } if rho == 1.0 => SliceKind::StepUp { v },
                Self::Gaussian { rho } if rho == -1.0 => SliceKind::StepDown { v },
                Self::Gaussian { rho } => SliceKind::Gaussian {
                    qv: quantile_unchecked(v),
                    rho,
                    scale: ((1.0 - rho) * (1.0 + rho)).sqrt(),
                },
                Self::Clayton { theta } => SliceKind::Clayton {
                    theta,
                    ln_c: (-theta * v.ln()).exp_m1().ln(),
                },
                Self::Frank { theta } => SliceKind::Frank {
                    theta,
                    v,
                    ln_ratio: (-(-theta * (1.0 - v)).exp_m1()).ln()
                        - (-(-theta * v).exp_m1()).ln(),
                },
                Self::Independence => SliceKind::Constant { v },
                Self::Comonotonic => SliceKind::StepUp { v },
            }
        };
        ConditionalSlice { kind }
    }

    /// `lim_{u→0⁺} C(v | u)` for `v ∈ (0, 1]`.
    pub fn boundary_conditional_cdf(&self, v: f64) -> Result<f64> {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::domain("v", v, "(0, 1]"));
        }
        Ok(self.boundary_unchecked(v))
    }

    pub(crate) fn boundary_unchecked(&self, v: f64) -> f64 {
        if v >= 1.0 {
            return 1.0;
        }
        match *self {
            Self::Gaussian { rho } if rho > 0.0 => 1.0,
            Self::Gaussian { rho } if rho == 0.0 => v,
            Self::Gaussian { .. } => 0.0,
            Self::Clayton { .. } | Self::Comonotonic => 1.0,
            Self::Frank { theta } => (-theta * v).exp_m1() / (-theta).exp_m1(),
            Self::Independence => v,
        }
    }

    /// Draws one `(u, v)` pair.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match *self {
            Self::Gaussian { rho } => {
                let z: f64 = StandardNormal.sample(rng);
                let e: f64 = StandardNormal.sample(rng);
                let x = rho * z + ((1.0 - rho) * (1.0 + rho)).sqrt() * e;
                (norm_cdf(z), norm_cdf(x))
            }
            Self::Independence => (open_unit(rng), open_unit(rng)),
            Self::Comonotonic => {
                let u = open_unit(rng);
                (u, u)
            }
            Self::Clayton { .. } | Self::Frank { .. } => {
                let u = open_unit(rng);
                let w = open_unit(rng);
                (u, self.conditional_quantile(w, u))
            }
        }
    }

    /// `count` pairs from a fresh generator on `stream`.
    pub fn sample_pairs(&self, stream: RandomStream, count: usize) -> Vec<(f64, f64)> {
        let mut rng = stream.rng();
        (0..count).map(|_| self.sample_pair(&mut rng)).collect()
    }

    /// Inverse of `v ↦ C(v | u)`: the `v` with `C(v | u) = w`.
    pub fn conditional_quantile(&self, w: f64, u: f64) -> f64 {
        let v = match *self {
            Self::Gaussian { rho } => {
                if rho.abs() == 1.0 {
                    if rho > 0.0 {
                        u
                    } else {
                        1.0 - u
                    }
                } else {
                    norm_cdf(
                        rho * quantile_unchecked(u)
                            + ((1.0 - rho) * (1.0 + rho)).sqrt() * quantile_unchecked(w),
                    )
                }
            }
            Self::Clayton { theta } => {
                // v = (1 + (w^{-θ/(1+θ)} - 1) u^{-θ})^{-1/θ}
                let s = (-theta / (1.0 + theta) * w.ln()).exp_m1().ln() - theta * u.ln();
                (-softplus(s) / theta).exp()
            }
            Self::Frank { theta } => {
                let num = (1.0 - w) + w * (-theta * (1.0 - u)).exp();
                let den = w + (1.0 - w) * (-theta * u).exp();
                u - (num.ln() - den.ln()) / theta
            }
            Self::Independence => w,
            Self::Comonotonic => u,
        };
        v.clamp(0.0, 1.0)
    }

    /// Checks that `C(v | u)` is non-increasing in `u` on a `grid_size × grid_size`
    /// interior grid, to within `1e-12`.
    pub fn sipd_check(&self, grid_size: usize) -> Result<bool> {
        if grid_size < 3 {
            return Err(Error::Precondition(format!(
                "SIPD grid needs at least 3 points, got {grid_size}"
            )));
        }
        let step = 1.0 / (grid_size as f64 + 1.0);
        let points: Vec<f64> = (1..=grid_size).map(|i| i as f64 * step).collect();
        for &v in &points {
            let slice = self.conditional_at(v);
            let mut prev = slice.cdf(points[0]);
            for &u in &points[1..] {
                let c = slice.cdf(u);
                if c > prev + 1e-12 {
                    return Ok(false);
                }
                prev = c;
            }
        }
        Ok(true)
    }
}

impl fmt::Display for CopulaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.param() {
            Some(p) => write!(f, "{}({})", self.family(), p),
            None => write!(f, "{}", self.family()),
        }
    }
}

/// `u ↦ C(v | u)` for one fixed `v`.
#[derive(Clone, Copy, Debug)]
pub struct ConditionalSlice {
    kind: SliceKind,
}

#[derive(Clone, Copy, Debug)]
enum SliceKind {
    Zero,
    One,
    Constant { v: f64 },
    /// `1{u ≤ v}`
    StepUp { v: f64 },
    /// `1{u ≥ 1 - v}`
    StepDown { v: f64 },
    Gaussian { qv: f64, rho: f64, scale: f64 },
    /// `C = (1 + e^{θ ln u + ln_c})^{-(1+θ)/θ}`, `ln_c = ln(v^{-θ} - 1)`
    Clayton { theta: f64, ln_c: f64 },
    /// `C = 1 / (1 + exp(θ(u - v) + ln_ratio))`
    Frank { theta: f64, v: f64, ln_ratio: f64 },
}

impl ConditionalSlice {
    /// `C(v | u)`
    #[inline]
    pub fn cdf(&self, u: f64) -> f64 {
        match self.kind {
            SliceKind::Zero => 0.0,
            SliceKind::One => 1.0,
            SliceKind::Constant { v } => v,
            SliceKind::StepUp { v } => f64::from(u8::from(u <= v)),
            SliceKind::StepDown { v } => f64::from(u8::from(u >= 1.0 - v)),
            SliceKind::Gaussian { qv, rho, scale } => {
                norm_cdf((qv - rho * quantile_unchecked(u)) / scale)
            }
            SliceKind::Clayton { theta, ln_c } => {
                let t = theta * u.ln() + ln_c;
                (-(1.0 + theta) / theta * softplus(t)).exp()
            }
            SliceKind::Frank { theta, v, ln_ratio } => {
                logistic(-(theta * (u - v) + ln_ratio))
            }
        }
    }

    /// `1 - C(v | u)`, without cancellation when `C` is close to one.
    #[inline]
    pub fn sf(&self, u: f64) -> f64 {
        match self.kind {
            SliceKind::Gaussian { qv, rho, scale } => {
                q_func((qv - rho * quantile_unchecked(u)) / scale)
            }
            SliceKind::Clayton { theta, ln_c } => {
                let t = theta * u.ln() + ln_c;
                -(-(1.0 + theta) / theta * softplus(t)).exp_m1()
            }
            SliceKind::Frank { theta, v, ln_ratio } => logistic(theta * (u - v) + ln_ratio),
            _ => 1.0 - self.cdf(u),
        }
    }
}

/// `ln(1 + e^t)`
#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `1 / (1 + e^{-t})`
#[inline]
fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Uniform on the open interval (0, 1).
#[inline]
pub(crate) fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // 53 random bits, offset by half an ulp so neither endpoint occurs
    ((rng.random::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn check_unit(what: &'static str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(what, x, "[0, 1]"))
    }
}

/// `Pr(X ≤ h, Y ≤ k)` for a standard bivariate normal with correlation `r`,
/// `|r| < 1`.
///
/// Genz's algorithm: Gauss–Legendre quadrature of Plackett's identity for
/// `|r| < 0.925`, and of the Drezner–Wesolowsky asymptotic correction above.
/// Absolute accuracy is close to `1e-15`.
pub fn bivariate_normal_cdf(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::INFINITY {
        return norm_cdf(k);
    }
    if k == f64::INFINITY {
        return norm_cdf(h);
    }
    upper_orthant(-h, -k, r).clamp(0.0, 1.0)
}

#[allow(clippy::excessive_precision)]
const GL6: ([f64; 3], [f64; 3]) = (
    [-0.932469514203152, -0.6612093864662645, -0.23861918608319693],
    [0.17132449237916975, 0.36076157304813894, 0.46791393457269137],
);
#[allow(clippy::excessive_precision)]
const GL12: ([f64; 6], [f64; 6]) = (
    [
        -0.9815606342467192,
        -0.9041172563704748,
        -0.7699026741943047,
        -0.5873179542866175,
        -0.3678314989981802,
        -0.1252334085114689,
    ],
    [
        0.04717533638651202,
        0.10693932599531888,
        0.1600783285433461,
        0.20316742672306565,
        0.23349253653835464,
        0.2491470458134027,
    ],
);
#[allow(clippy::excessive_precision)]
const GL20: ([f64; 10], [f64; 10]) = (
    [
        -0.9931285991850949,
        -0.9639719272779138,
        -0.9122344282513258,
        -0.8391169718222188,
        -0.7463319064601508,
        -0.636053680726515,
        -0.5108670019508271,
        -0.37370608871541955,
        -0.2277858511416451,
        -0.07652652113349734,
    ],
    [
        0.017614007139153273,
        0.04060142980038622,
        0.06267204833410944,
        0.08327674157670467,
        0.10193011981724026,
        0.11819453196151825,
        0.13168863844917653,
        0.14209610931838187,
        0.14917298647260366,
        0.15275338713072578,
    ],
);

/// `Pr(X > h, Y > k)`.
fn upper_orthant(h: f64, k: f64, r: f64) -> f64 {
    use std::f64::consts::{PI, TAU};

    let (x, w): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&GL6.0, &GL6.1)
    } else if r.abs() < 0.75 {
        (&GL12.0, &GL12.1)
    } else {
        (&GL20.0, &GL20.1)
    };

    let mut hk = h * k;
    if r.abs() < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = r.asin();
        let mut sum = 0.0;
        for (&xi, &wi) in x.iter().zip(w) {
            for s in [xi, -xi] {
                let sn = (0.5 * asr * (s + 1.0)).sin();
                sum += wi * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return sum * asr / (2.0 * TAU) + norm_cdf(-h) * norm_cdf(-k);
    }

    let mut k = k;
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    let mut bvn = 0.0;
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a
            * (-(bs / a_s + hk) / 2.0).exp()
            * (1.0 - c * (bs - a_s) * (1.0 - d * bs / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        if hk > -160.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp()
                * TAU.sqrt()
                * norm_cdf(-b / a)
                * b
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (&xi, &wi) in x.iter().zip(w) {
            for s in [xi, -xi] {
                let xs = (a * (s + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                bvn += a
                    * wi
                    * ((-bs / (2.0 * xs) - hk / (1.0 + rs)).exp() / rs
                        - (-(bs / xs + hk) / 2.0).exp() * (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
        bvn = -bvn / (2.0 * PI);
    }
    if r > 0.0 {
        bvn + norm_cdf(-h.max(k))
    } else if h >= k {
        -bvn
    } else {
        let l = if h < 0.0 {
            norm_cdf(k) - norm_cdf(h)
        } else {
            norm_cdf(-h) - norm_cdf(-k)
        };
        l - bvn
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use crate::specfun::norm_quantile;

    fn models() -> Vec<CopulaModel> {
        vec![
            CopulaModel::gaussian(0.3).unwrap(),
            CopulaModel::gaussian(0.9).unwrap(),
            CopulaModel::gaussian(-0.4).unwrap(),
            CopulaModel::clayton(1.0).unwrap(),
            CopulaModel::clayton(2.0).unwrap(),
            CopulaModel::clayton(35.0).unwrap(),
            CopulaModel::frank(1.0).unwrap(),
            CopulaModel::frank(5.0).unwrap(),
            CopulaModel::frank(60.0).unwrap(),
            CopulaModel::Independence,
            CopulaModel::Comonotonic,
        ]
    }

    fn grid(n: usize) -> Vec<f64> {
        (1..n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn parameter_validation() {
        assert!(CopulaModel::gaussian(1.0001).is_err());
        assert!(CopulaModel::gaussian(-1.0).is_ok());
        assert!(CopulaModel::clayton(0.0).is_err());
        assert!(CopulaModel::clayton(f64::INFINITY).is_err());
        assert!(CopulaModel::frank(-2.0).is_err());
        assert!(CopulaModel::frank(f64::NAN).is_err());
        assert!(CopulaModel::new(CopulaFamily::Independence, Some(1.0)).is_err());
        assert!(CopulaModel::new(CopulaFamily::Clayton, None).is_err());
        assert_eq!(
            CopulaModel::new(CopulaFamily::Frank, Some(2.0)).unwrap(),
            CopulaModel::Frank { theta: 2.0 }
        );
    }

    #[test]
    fn joint_cdf_examples() {
        assert!((CopulaModel::Independence.joint_cdf(0.3, 0.5).unwrap() - 0.15).abs() < 1e-15);
        assert_eq!(CopulaModel::Comonotonic.joint_cdf(0.3, 0.5).unwrap(), 0.3);
        let c = CopulaModel::clayton(1.0).unwrap().joint_cdf(0.5, 0.5).unwrap();
        assert!((c - 1.0 / 3.0).abs() < 1e-15);
        assert!(CopulaModel::Independence.joint_cdf(1.1, 0.5).is_err());
        assert!(CopulaModel::Independence.joint_cdf(0.5, -0.1).is_err());
    }

    #[test]
    fn bivariate_normal_reference_values() {
        // reference values by adaptive quadrature at 30 digits
        let cases = [
            (0.3, 0.5, 0.5, 0.221_616_339_658_789_48),
            (0.1, 0.9, 0.3, 0.097_000_717_928_700_785),
            (0.05, 0.05, 0.9, 0.031_867_762_903_736_154),
            (0.7, 0.2, -0.6, 0.071_401_169_277_448_236),
            (0.01, 0.02, 0.99, 0.009_947_640_416_698_385),
            (0.99, 0.98, 0.95, 0.978_801_634_325_546_15),
            (0.2, 0.8, -0.95, 0.035_361_545_555_549_061),
            (0.5, 0.5, 0.8, 0.397_583_617_650_433_29),
        ];
        for (u, v, r, want) in cases {
            let got = CopulaModel::gaussian(r).unwrap().joint_cdf(u, v).unwrap();
            assert!((got - want).abs() < 1e-14, "({u}, {v}, {r}): {got} vs {want}");
        }
    }

    #[test]
    fn margins_are_uniform() {
        for m in models() {
            for &t in &grid(50) {
                assert!((m.joint_cdf(t, 1.0).unwrap() - t).abs() < 1e-12, "{m}");
                assert!((m.joint_cdf(1.0, t).unwrap() - t).abs() < 1e-12, "{m}");
            }
        }
    }

    #[test]
    fn frechet_bounds() {
        for m in models() {
            for &u in &grid(40) {
                for &v in &grid(40) {
                    let c = m.joint_cdf(u, v).unwrap();
                    assert!(c >= (u + v - 1.0).max(0.0) - 1e-15 && c <= u.min(v) + 1e-15, "{m}");
                }
            }
        }
    }

    #[test]
    fn conditional_examples() {
        let ind = CopulaModel::Independence;
        for u in [0.1, 0.5, 0.9] {
            assert_eq!(ind.conditional_cdf(0.7, u).unwrap(), 0.7);
        }
        let clay = CopulaModel::clayton(1.0).unwrap();
        for z in [0.05, 0.3, 0.77] {
            let got = clay.conditional_cdf(0.5, z).unwrap();
            assert!((got - 1.0 / (1.0 + z).powi(2)).abs() < 1e-14);
        }
        let g = CopulaModel::gaussian(0.4).unwrap();
        let got = g.conditional_cdf(0.05, 0.5).unwrap();
        let composed = norm_cdf(norm_quantile(0.05).unwrap() / 0.84f64.sqrt());
        assert!((got - composed).abs() < 1e-15);
        assert!((got - 0.036_352_154_848_644_775).abs() < 1e-14);
        assert!(g.conditional_cdf(0.5, 0.0).is_err());
        assert!(g.conditional_cdf(0.5, 1.0).is_err());
    }

    #[test]
    fn conditional_matches_finite_difference() {
        let models = [
            CopulaModel::gaussian(0.3).unwrap(),
            CopulaModel::gaussian(0.9).unwrap(),
            CopulaModel::clayton(1.0).unwrap(),
            CopulaModel::clayton(2.0).unwrap(),
            CopulaModel::frank(1.0).unwrap(),
            CopulaModel::frank(5.0).unwrap(),
        ];
        let h = 1e-5;
        for m in models {
            for &u in &grid(20) {
                for &v in &grid(20) {
                    let fd = (m.joint_cdf(u + h, v).unwrap() - m.joint_cdf(u - h, v).unwrap())
                        / (2.0 * h);
                    let c = m.conditional_cdf(v, u).unwrap();
                    assert!((fd - c).abs() < 1e-6, "{m} u={u} v={v}: fd={fd} c={c}");
                }
            }
        }
    }

    #[test]
    fn survival_complements_cdf() {
        for m in models() {
            for &v in &grid(10) {
                let s = m.conditional_at(v);
                for &u in &grid(30) {
                    assert!((s.cdf(u) + s.sf(u) - 1.0).abs() < 1e-14, "{m}");
                }
            }
        }
    }

    #[test]
    fn large_parameters_stay_finite() {
        for m in [CopulaModel::clayton(500.0).unwrap(), CopulaModel::frank(2000.0).unwrap()] {
            for &u in &[1e-12, 1e-3, 0.4, 0.6, 0.999] {
                for &v in &[1e-9, 0.01, 0.5, 0.99] {
                    let c = m.conditional_cdf(v, u).unwrap();
                    let j = m.joint_cdf(u, v).unwrap();
                    assert!(c.is_finite() && (0.0..=1.0).contains(&c), "{m} {u} {v}");
                    assert!(j.is_finite() && (0.0..=1.0).contains(&j), "{m} {u} {v}");
                }
            }
        }
    }

    #[test]
    fn boundary_examples() {
        let frank = CopulaModel::frank(2.0).unwrap();
        let alpha = 0.1;
        let want = (1.0 - (-2.0f64 * alpha).exp()) / (1.0 - (-2.0f64).exp());
        assert!((frank.boundary_conditional_cdf(alpha).unwrap() - want).abs() < 1e-15);
        let g = CopulaModel::gaussian(0.4).unwrap();
        for v in [0.01, 0.5, 0.99] {
            assert_eq!(g.boundary_conditional_cdf(v).unwrap(), 1.0);
        }
        assert_eq!(CopulaModel::Independence.boundary_conditional_cdf(0.25).unwrap(), 0.25);
        assert_eq!(CopulaModel::clayton(3.0).unwrap().boundary_conditional_cdf(0.2).unwrap(), 1.0);
        assert!(g.boundary_conditional_cdf(0.0).is_err());
    }

    #[test]
    fn boundary_is_the_small_u_limit() {
        for m in [CopulaModel::frank(2.0).unwrap(), CopulaModel::frank(7.0).unwrap(), CopulaModel::Independence] {
            for v in [0.05, 0.3, 0.8] {
                let c = m.conditional_cdf(v, 1e-6).unwrap();
                assert!((c - m.boundary_conditional_cdf(v).unwrap()).abs() < 1e-3, "{m}");
            }
        }
        // Gaussian and Clayton creep up to 1; check the approach is monotone.
        for m in [CopulaModel::gaussian(0.6).unwrap(), CopulaModel::clayton(1.5).unwrap()] {
            for v in [0.05, 0.3] {
                let mut prev = 0.0;
                for e in 1..=12 {
                    let c = m.conditional_cdf(v, 10f64.powi(-e)).unwrap();
                    assert!(c >= prev && c <= 1.0, "{m} v={v}");
                    prev = c;
                }
                assert!(prev > m.conditional_cdf(v, 0.1).unwrap());
            }
        }
    }

    #[test]
    fn conditional_quantile_inverts_cdf() {
        for m in models().into_iter().filter(|m| m.has_conditional_density()) {
            for &u in &grid(15) {
                for &w in &grid(15) {
                    let v = m.conditional_quantile(w, u);
                    let back = m.conditional_cdf(v, u).unwrap();
                    assert!((back - w).abs() < 1e-9, "{m} u={u} w={w}");
                }
            }
        }
    }

    #[test]
    fn sipd_examples() {
        assert!(CopulaModel::gaussian(0.5).unwrap().sipd_check(101).unwrap());
        assert!(CopulaModel::clayton(2.0).unwrap().sipd_check(101).unwrap());
        assert!(CopulaModel::frank(3.0).unwrap().sipd_check(101).unwrap());
        assert!(CopulaModel::Comonotonic.sipd_check(101).unwrap());
        assert!(CopulaModel::Independence.sipd_check(101).unwrap());
        assert!(!CopulaModel::gaussian(-0.5).unwrap().sipd_check(101).unwrap());
        assert!(CopulaModel::Independence.sipd_check(2).is_err());
    }

    #[test]
    fn comonotonic_samples_lie_on_diagonal() {
        let pairs = CopulaModel::Comonotonic.sample_pairs(RandomStream::new(1, 0), 1000);
        assert!(pairs.iter().all(|(u, v)| u == v));
    }

    fn pearson(xs: &[(f64, f64)]) -> f64 {
        let n = xs.len() as f64;
        let (mx, my) = xs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (x, y) in xs {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
        }
        sxy / (sxx * syy).sqrt()
    }

    #[test]
    fn independence_samples_uncorrelated() {
        let n = 100_000;
        let pairs = CopulaModel::Independence.sample_pairs(RandomStream::new(7, 0), n);
        assert!(pearson(&pairs).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn gaussian_samples_have_latent_correlation() {
        let pairs: Vec<(f64, f64)> = CopulaModel::gaussian(0.6)
            .unwrap()
            .sample_pairs(RandomStream::new(11, 0), 1_000_000)
            .into_iter()
            .map(|(u, v)| (quantile_unchecked(u), quantile_unchecked(v)))
            .collect();
        assert!((pearson(&pairs) - 0.6).abs() < 0.003);
    }

    #[test]
    fn empirical_joint_cdf_matches() {
        let n = 1_000_000;
        for m in [
            CopulaModel::gaussian(0.7).unwrap(),
            CopulaModel::clayton(2.0).unwrap(),
            CopulaModel::frank(5.0).unwrap(),
        ] {
            let pairs = m.sample_pairs(RandomStream::new(2024, 1), n);
            for &u in &[0.1, 0.3, 0.5, 0.7, 0.9] {
                for &v in &[0.1, 0.3, 0.5, 0.7, 0.9] {
                    let hits = pairs.iter().filter(|(a, b)| *a <= u && *b <= v).count();
                    let emp = hits as f64 / n as f64;
                    assert!((emp - m.joint_cdf(u, v).unwrap()).abs() < 0.005, "{m} ({u},{v})");
                }
            }
        }
    }
}
