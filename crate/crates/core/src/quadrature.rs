//! Adaptive Gauss-Kronrod quadrature.
//!
//! Globally adaptive 21-point Gauss-Kronrod integration over finite
//! intervals, with helpers for the two kinds of infinite tails that show up
//! in this crate: algebraically decaying tails (mapped onto a finite
//! interval) and oscillatory tails (summed cycle by cycle and accelerated
//! with the epsilon algorithm).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrapolation::wynn_epsilon;

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 200_000,
        }
    }
}

impl QuadSettings {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

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
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
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

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    resabs: f64,
}

fn gk21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Segment<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = T::zero();
    let mut res_k = fc * WGK[10];
    let mut resabs = fc.magnitude() * WGK[10];
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g = res_g + (f1 + f2) * WG[j];
        res_k = res_k + (f1 + f2) * WGK[jtw];
        resabs += WGK[jtw] * (f1.magnitude() + f2.magnitude());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k = res_k + (f1 + f2) * WGK[jtwm1];
        resabs += WGK[jtwm1] * (f1.magnitude() + f2.magnitude());
    }

    let mean = res_k * 0.5;
    let mut resasc = WGK[10] * (fc - mean).magnitude();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }

    let scale = half.abs();
    let value = res_k * half;
    let resabs = resabs * scale;
    let resasc = resasc * scale;
    let mut error = ((res_k - res_g) * half).magnitude();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Segment {
        a,
        b,
        value,
        error,
        resabs,
    }
}

struct ByError<T>(Segment<T>);

impl<T> PartialEq for ByError<T> {
    fn eq(&self, other: &Self) -> bool {
        self.0.error == other.0.error
    }
}
impl<T> Eq for ByError<T> {}
impl<T> PartialOrd for ByError<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for ByError<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.error.total_cmp(&other.0.error)
    }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, settings: &QuadSettings) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_partitioned(f, &[a, b], settings)
}

/// Integrate `f` over `[points[0], points[last]]`, starting from the given
/// partition. Breakpoints should sit on peaks, kinks and period boundaries.
pub fn integrate_partitioned<T, F>(f: F, points: &[f64], settings: &QuadSettings) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "quadrature needs at least two partition points".into(),
        ));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument("non-finite integration limit".into()));
    }

    let mut heap = BinaryHeap::new();
    let mut settled: Vec<Segment<T>> = Vec::new();
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        heap.push(ByError(gk21(&f, w[0], w[1])));
        evaluations += 21;
    }

    let totals = |heap: &BinaryHeap<ByError<T>>, settled: &[Segment<T>]| {
        let mut value = T::zero();
        let mut error = 0.0;
        let mut resabs = 0.0;
        for s in heap.iter().map(|s| &s.0).chain(settled.iter()) {
            value = value + s.value;
            error += s.error;
            resabs += s.resabs;
        }
        (value, error, resabs)
    };

    let (mut value, mut error, mut resabs) = totals(&heap, &settled);
    let mut since_resum = 0usize;
    loop {
        let tol = settings.abs_tol.max(settings.rel_tol * value.magnitude());
        let roundoff_floor = 100.0 * f64::EPSILON * resabs;
        if error <= tol || error <= roundoff_floor {
            // confirm against freshly summed totals before returning
            let (v, e, r) = totals(&heap, &settled);
            let tol = settings.abs_tol.max(settings.rel_tol * v.magnitude());
            if e <= tol || e <= 100.0 * f64::EPSILON * r {
                return Ok(Estimate {
                    value: v,
                    error: e,
                    evaluations,
                });
            }
            value = v;
            error = e;
            resabs = r;
        }
        if heap.len() + settled.len() >= settings.max_intervals {
            let (v, e, _) = totals(&heap, &settled);
            return Err(Error::QuadratureFailure {
                estimate: v.magnitude(),
                error: e,
                reason: "subdivision limit reached",
            });
        }
        let Some(ByError(worst)) = heap.pop() else {
            let (v, e, _) = totals(&heap, &settled);
            return Err(Error::QuadratureFailure {
                estimate: v.magnitude(),
                error: e,
                reason: "roundoff prevents further refinement",
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        let width = worst.b - worst.a;
        if width.abs() <= 1e3 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            settled.push(worst);
            continue;
        }
        let left = gk21(&f, worst.a, mid);
        let right = gk21(&f, mid, worst.b);
        evaluations += 42;
        value = value + (left.value + right.value - worst.value);
        error += left.error + right.error - worst.error;
        resabs += left.resabs + right.resabs - worst.resabs;
        heap.push(ByError(left));
        heap.push(ByError(right));

        since_resum += 1;
        if since_resum >= 256 {
            since_resum = 0;
            let t = totals(&heap, &settled);
            value = t.0;
            error = t.1;
            resabs = t.2;
        }
    }
}

/// Evenly spaced partition of `[a, b]` into panels no wider than `width`.
pub fn panels(a: f64, b: f64, width: f64) -> Vec<f64> {
    let n = (((b - a) / width).ceil() as usize).max(1);
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|k| if k == n { b } else { a + h * k as f64 })
        .collect()
}

/// `∫_start^∞ f(x) dx` for integrands decaying at least like `1/x²`,
/// computed through the substitution `x = start / u`.
pub fn integrate_algebraic_tail<F>(f: F, start: f64, settings: &QuadSettings) -> Result<Estimate<f64>>
where
    F: Fn(f64) -> f64,
{
    if start <= 0.0 {
        return Err(Error::InvalidArgument(
            "algebraic tail must start at a positive abscissa".into(),
        ));
    }
    integrate_partitioned(
        |u: f64| {
            let x = start / u;
            f(x) * start / (u * u)
        },
        &[0.0, 0.25, 0.5, 1.0],
        settings,
    )
}

/// `∫_start^∞ f(x) dx` for an oscillatory integrand whose sign changes
/// roughly every `half_period`. Cycle integrals are summed and the partial
/// sums accelerated with the epsilon algorithm.
pub fn integrate_oscillatory_tail<F>(
    f: F,
    start: f64,
    half_period: f64,
    settings: &QuadSettings,
) -> Result<Estimate<f64>>
where
    F: Fn(f64) -> f64,
{
    const MAX_CYCLES: usize = 400;
    if half_period <= 0.0 || !half_period.is_finite() {
        return Err(Error::InvalidArgument("half period must be positive".into()));
    }
    let cycle = QuadSettings {
        rel_tol: settings.rel_tol * 0.1,
        abs_tol: settings.abs_tol * 0.01,
        ..*settings
    };
    let mut partial = Vec::with_capacity(64);
    let mut sum = 0.0;
    let mut evaluations = 0;
    let mut previous: Option<f64> = None;
    let mut agreeing = 0;
    for k in 0..MAX_CYCLES {
        let a = start + half_period * k as f64;
        let piece = integrate(&f, a, a + half_period, &cycle)?;
        evaluations += piece.evaluations;
        sum += piece.value;
        partial.push(sum);
        if partial.len() < 6 {
            continue;
        }
        // keep the table small; the tail of the sequence carries the information
        let window = &partial[partial.len().saturating_sub(40)..];
        let (estimate, _) = wynn_epsilon(window);
        if let Some(prev) = previous {
            let delta = (estimate - prev).abs();
            let tol = settings.abs_tol.max(settings.rel_tol * estimate.abs());
            if delta <= tol {
                agreeing += 1;
                if agreeing >= 2 {
                    return Ok(Estimate {
                        value: estimate,
                        error: delta,
                        evaluations,
                    });
                }
            } else {
                agreeing = 0;
            }
        }
        previous = Some(estimate);
    }
    Err(Error::QuadratureFailure {
        estimate: previous.unwrap_or(sum),
        error: f64::NAN,
        reason: "oscillatory tail did not converge",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x, 0.0, 2.0, &QuadSettings::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_lorentzian() {
        let eps = 1e-4;
        let r = integrate(
            |x: f64| eps / (x * x + eps * eps),
            -1.0,
            1.0,
            &QuadSettings::default(),
        )
        .unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((r.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn complex_integrand() {
        // ∫_0^π e^{ix} dx = 2i
        let r: Estimate<Complex64> = integrate(
            |x: f64| Complex64::new(0.0, x).exp(),
            0.0,
            PI,
            &QuadSettings::default(),
        )
        .unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn algebraic_tail() {
        let r = integrate_algebraic_tail(|x| 1.0 / (x * x), 2.0, &QuadSettings::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_tail_dirichlet() {
        // ∫_0^∞ sin x / x dx = π/2
        let head = integrate(|x: f64| if x == 0.0 { 1.0 } else { x.sin() / x }, 0.0, PI, &QuadSettings::default())
            .unwrap();
        let tail = integrate_oscillatory_tail(|x| x.sin() / x, PI, PI, &QuadSettings::default().with_abs_tol(1e-13))
            .unwrap();
        assert!((head.value + tail.value - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn zero_integrand_converges() {
        let r = integrate(|_x: f64| 0.0, 0.0, 1.0, &QuadSettings::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn panels_cover_interval() {
        let p = panels(0.0, 10.0, 3.0);
        assert_eq!(p.len(), 5);
        assert_eq!(p[0], 0.0);
        assert_eq!(*p.last().unwrap(), 10.0);
    }

    #[test]
    fn subdivision_limit_reports_failure() {
        let s = QuadSettings {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_intervals: 4,
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &s).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }
}
