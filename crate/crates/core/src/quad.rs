//! Adaptive Gauss–Kronrod quadrature on finite intervals.
//!
//! [`integrate`] is a globally adaptive 10/21-point Gauss–Kronrod scheme in
//! the QUADPACK `qag` mould: keep a list of panels, repeatedly bisect the one
//! with the largest error estimate until the summed estimate is under
//! tolerance. [`Antiderivative`] keeps the final panel list around so that
//! `∫ₐᵗ f` can be evaluated at arbitrary `t` for the cost of one extra 21-point
//! rule, instead of a fresh adaptive integration per point.

/// Abscissae of the 21-point Kronrod rule (odd indices are the 10-point Gauss nodes).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_panels: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Summed Kronrod-minus-Gauss error estimate.
    pub abs_error: f64,
    pub panels: usize,
    /// False when the panel budget ran out before the tolerance was met.
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// One 21-point Kronrod rule on `[a, b]` with the QUADPACK error rescaling.
pub fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs_half = half.abs();
    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;

    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let (value, error) = kronrod21(f, a, b);
    Panel { a, b, value, error }
}

/// Returns the final panels sorted left to right, plus the convergence flag.
fn adapt<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], opts: &QuadOptions) -> (Vec<Panel>, bool) {
    let mut panels: Vec<Panel> = breaks.windows(2).map(|w| panel(f, w[0], w[1])).collect();
    let mut converged = false;
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            converged = true;
            break;
        }
        if panels.len() >= opts.max_panels {
            break;
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let mid = 0.5 * (p.a + p.b);
                mid > p.a && mid < p.b
            })
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .unwrap_or((usize::MAX, &panels[0]));
        if worst == usize::MAX {
            // every panel is at floating-point resolution
            break;
        }
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        panels[worst] = panel(f, p.a, mid);
        panels.insert(worst + 1, panel(f, mid, p.b));
    }
    (panels, converged)
}

/// Integrates `f` over `[a, b]`.
///
/// ```
/// use ordsel::quad::{integrate, QuadOptions};
/// let q = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, &QuadOptions::default());
/// assert!((q.value - 2.0).abs() < 1e-12);
/// ```
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Quadrature {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Like [`integrate`], starting from the given initial subdivision
/// (strictly increasing, endpoints included).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Quadrature {
    assert!(breaks.len() >= 2, "need at least one panel");
    if breaks[0] == breaks[breaks.len() - 1] {
        return Quadrature {
            value: 0.0,
            abs_error: 0.0,
            panels: 0,
            converged: true,
        };
    }
    let (panels, converged) = adapt(&f, breaks, opts);
    Quadrature {
        value: panels.iter().map(|p| p.value).sum(),
        abs_error: panels.iter().map(|p| p.error).sum(),
        panels: panels.len(),
        converged,
    }
}

/// Cumulative integral `t ↦ ∫ₐᵗ f` on `[a, b]`.
///
/// Built once by adaptive subdivision of `[a, b]`; each evaluation is a prefix
/// sum over the panels left of `t` plus one Kronrod rule on the partial panel
/// containing `t`.
pub struct Antiderivative<F> {
    f: F,
    starts: Vec<f64>,
    ends: Vec<f64>,
    /// `prefix[k]` = integral over panels `0..k`.
    prefix: Vec<f64>,
    converged: bool,
}

impl<F: Fn(f64) -> f64> Antiderivative<F> {
    pub fn new(f: F, breaks: &[f64], opts: &QuadOptions) -> Self {
        assert!(breaks.len() >= 2, "need at least one panel");
        let (panels, converged) = adapt(&f, breaks, opts);
        let mut prefix = Vec::with_capacity(panels.len() + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for p in &panels {
            acc += p.value;
            prefix.push(acc);
        }
        Antiderivative {
            starts: panels.iter().map(|p| p.a).collect(),
            ends: panels.iter().map(|p| p.b).collect(),
            prefix,
            f,
            converged,
        }
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    /// `∫ₐᵗ f`, with `t` clamped into `[a, b]`.
    pub fn eval(&self, t: f64) -> f64 {
        let lo = self.starts[0];
        let hi = *self.ends.last().unwrap();
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return self.total();
        }
        // last panel whose start is <= t
        let k = self.starts.partition_point(|&s| s <= t) - 1;
        if t == self.starts[k] {
            return self.prefix[k];
        }
        if t == self.ends[k] {
            return self.prefix[k + 1];
        }
        self.prefix[k] + kronrod21(&self.f, self.starts[k], t).0
    }
}
