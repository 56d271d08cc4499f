//! Error functions of real argument and the Faddeeva function.
//!
//! `w(z) = exp(-z²) erfc(-iz)` is evaluated with the Poppe–Wijers scheme:
//! a power series near the origin, Laplace's continued fraction far from
//! it, and a truncated Taylor expansion driven by the continued fraction in
//! between. The other quadrants follow from `w(-conj z) = conj w(z)` and
//! `w(-z) = 2 exp(-z²) - w(z)`.
//!
//! `exp_sq_erfc(B) = exp(B²) erfc(B) = w(iB)` is the factor that appears in
//! every Gaussian-probe displacement; it is formed without ever building
//! `exp(B²)` on its own in the upper half plane.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex argument of the error-function family.
pub type ComplexArg = Complex64;

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Largest exponent for which `exp` stays finite.
const MAX_EXP: f64 = 709.0;

/// Below this |x| the Maclaurin series is used for erf.
const SERIES_CUTOFF: f64 = 0.5;

/// Error function for real arguments.
pub fn erf_real(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.abs() < SERIES_CUTOFF {
        erf_series(x)
    } else if x < 0.0 {
        -erf_real(-x)
    } else {
        1.0 - erfc_real(x)
    }
}

/// Complementary error function for real arguments, free of cancellation
/// for large positive `x`.
pub fn erfc_real(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.abs() < SERIES_CUTOFF {
        return 1.0 - erf_series(x);
    }
    if x < 0.0 {
        return 2.0 - erfc_real(-x);
    }
    if x > 27.3 {
        return 0.0;
    }
    exp_neg_sq(x) * erfcx_real(x)
}

/// `exp(-x²)` with `x²` split so that the leading part is exact.
fn exp_neg_sq(x: f64) -> f64 {
    let hi = (x * 16.0).trunc() / 16.0;
    let lo = x - hi;
    (-hi * hi).exp() * (-lo * (x + hi)).exp()
}

/// Scaled complementary error function `exp(x²) erfc(x)`.
pub fn erfcx_real(x: f64) -> f64 {
    if x >= 0.0 {
        faddeeva_w(Complex64::new(0.0, x)).re
    } else if x * x > MAX_EXP {
        f64::INFINITY
    } else {
        2.0 * (x * x).exp() - faddeeva_w(Complex64::new(0.0, -x)).re
    }
}

fn erf_series(x: f64) -> f64 {
    // 2/√π Σ (-1)^n x^{2n+1} / (n! (2n+1))
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= -x2 / n;
        let contrib = term / (2.0 * n + 1.0);
        sum += contrib;
        if contrib.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    TWO_OVER_SQRT_PI * sum
}

/// Faddeeva function `w(z) = exp(-z²) erfc(-iz)`.
///
/// In the lower half plane `w` grows like `exp(y² - x²)`; once that
/// exceeds the floating range the result is infinite.
pub fn faddeeva_w(z: ComplexArg) -> Complex64 {
    let (xi, yi) = (z.re, z.im);
    if !xi.is_finite() || !yi.is_finite() {
        return Complex64::new(f64::NAN, f64::NAN);
    }
    let xabs = xi.abs();
    let yabs = yi.abs();
    let x = xabs / 6.3;
    let y = yabs / 4.4;
    let qrho_sq = x * x + y * y;
    let xquad = xabs * xabs - yabs * yabs;
    let yquad = 2.0 * xabs * yabs;

    // w in the first quadrant, plus exp(-z1²) when the series branch ran
    let mut u;
    let mut v;
    let mut exp_part = None;

    if qrho_sq < 0.085264 {
        // power series: w = exp(-z²) (1 + 2i/√π z Σ z^{2n} / (n!(2n+1)))
        let q = (1.0 - 0.85 * y) * qrho_sq.sqrt();
        let n = (6.0 + 72.0 * q).round() as i32;
        let mut j = 2 * n + 1;
        let mut xsum = 1.0 / j as f64;
        let mut ysum = 0.0;
        for i in (1..=n).rev() {
            j -= 2;
            let fi = i as f64;
            let xaux = (xsum * xquad - ysum * yquad) / fi;
            ysum = (xsum * yquad + ysum * xquad) / fi;
            xsum = xaux + 1.0 / j as f64;
        }
        let u1 = 1.0 - TWO_OVER_SQRT_PI * (xsum * yabs + ysum * xabs);
        let v1 = TWO_OVER_SQRT_PI * (xsum * xabs - ysum * yabs);
        let daux = (-xquad).exp();
        let u2 = daux * yquad.cos();
        let v2 = -daux * yquad.sin();
        u = u1 * u2 - v1 * v2;
        v = u1 * v2 + v1 * u2;
        exp_part = Some((u2, v2));
    } else {
        let (h, kapn, nu) = if qrho_sq > 1.0 {
            let q = qrho_sq.sqrt();
            (0.0, 0, (3.0 + 1442.0 / (26.0 * q + 77.0)) as i32)
        } else {
            let q = (1.0 - y) * (1.0 - qrho_sq).sqrt();
            (
                1.88 * q,
                (7.0 + 34.0 * q).round() as i32,
                (16.0 + 26.0 * q).round() as i32,
            )
        };
        let h2 = 2.0 * h;
        let taylor = h > 0.0;
        let mut lambda = if taylor { h2.powi(kapn) } else { 0.0 };
        let (mut rx, mut ry, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0);
        for n in (0..=nu).rev() {
            let np1 = (n + 1) as f64;
            let tx = yabs + h + np1 * rx;
            let ty = xabs - np1 * ry;
            let c = 0.5 / (tx * tx + ty * ty);
            rx = c * tx;
            ry = c * ty;
            if taylor && n <= kapn {
                let t = lambda + sx;
                sx = rx * t - ry * sy;
                sy = ry * t + rx * sy;
                lambda /= h2;
            }
        }
        if taylor {
            u = TWO_OVER_SQRT_PI * sx;
            v = TWO_OVER_SQRT_PI * sy;
        } else {
            u = TWO_OVER_SQRT_PI * rx;
            v = TWO_OVER_SQRT_PI * ry;
        }
        if yabs == 0.0 {
            u = (-xabs * xabs).exp();
        }
    }

    if yi < 0.0 {
        let (u2, v2) = match exp_part {
            Some((u2, v2)) => (2.0 * u2, 2.0 * v2),
            None => {
                if -xquad > MAX_EXP {
                    return Complex64::new(f64::INFINITY, f64::INFINITY);
                }
                let mag = 2.0 * (-xquad).exp();
                (mag * yquad.cos(), -mag * yquad.sin())
            }
        };
        u = u2 - u;
        v = v2 - v;
        if xi > 0.0 {
            v = -v;
        }
    } else if xi < 0.0 {
        v = -v;
    }
    Complex64::new(u, v)
}

/// `exp(B²) erfc(B)` for complex `B`.
///
/// For `Re B >= 0` this is `w(iB)`, bounded by 1 in magnitude. For
/// `Re B < 0` the reflection `2 exp(B²) - w(-iB)` is used and an
/// [`Error::Overflow`] is returned once `exp(B²)` leaves the floating range.
pub fn exp_sq_erfc(b: ComplexArg) -> Result<Complex64> {
    let ib = Complex64::new(-b.im, b.re);
    if b.re >= 0.0 {
        return Ok(faddeeva_w(ib));
    }
    let b2 = b * b;
    if b2.re > MAX_EXP {
        return Err(Error::Overflow(b));
    }
    Ok(2.0 * b2.exp() - faddeeva_w(-ib))
}

/// `exp(c) · exp(B²) erfc(B)` with the exponents combined before
/// exponentiation, so that a huge `exp(B²)` can be tamed by a very negative
/// `c`. Never overflows when the true result is representable.
pub fn scaled_exp_sq_erfc(log_scale: Complex64, b: ComplexArg) -> Complex64 {
    let ib = Complex64::new(-b.im, b.re);
    if b.re >= 0.0 {
        return exp_clamped(log_scale) * faddeeva_w(ib);
    }
    2.0 * exp_clamped(log_scale + b * b) - exp_clamped(log_scale) * faddeeva_w(-ib)
}

fn exp_clamped(z: Complex64) -> Complex64 {
    if z.re < -745.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z.exp()
    }
}

/// Independent reference evaluations used by the self-test tables.
/// They share no code path with the production routines above.
pub mod reference {
    use super::*;

    /// erf by its Maclaurin series with compensated summation; accurate for
    /// |x| up to about 3.
    pub fn erf_maclaurin(x: f64, terms: usize) -> f64 {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut comp = 0.0;
        for n in 1..terms {
            let n = n as f64;
            term *= -x2 / n;
            let y = term / (2.0 * n + 1.0) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        TWO_OVER_SQRT_PI * sum
    }

    /// erfc from its asymptotic series, valid for large positive x.
    pub fn erfc_asymptotic(x: f64) -> f64 {
        let x2 = x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..40 {
            let next = term * -(2.0 * n as f64 - 1.0) / (2.0 * x2);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
        }
        (-x2).exp() / (x * PI.sqrt()) * sum
    }

    /// `w(z) = exp(-z²) (1 + 2i/√π ∫_0^z exp(t²) dt)` with the path integral
    /// taken along the straight segment from 0 to z by composite
    /// Gauss-Legendre quadrature.
    pub fn faddeeva_by_quadrature(z: Complex64) -> Complex64 {
        let (nodes, weights) = gauss_legendre(24);
        let panels = 32;
        let mut integral = Complex64::new(0.0, 0.0);
        let h = 1.0 / panels as f64;
        let z2 = z * z;
        for p in 0..panels {
            let a = p as f64 * h;
            for (x, w) in nodes.iter().zip(&weights) {
                let r = a + 0.5 * h * (x + 1.0);
                integral += (z2 * r * r).exp() * (0.5 * h * w);
            }
        }
        let i = Complex64::new(0.0, 1.0);
        (-z2).exp() * (1.0 + i * TWO_OVER_SQRT_PI * z * integral)
    }

    /// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
    pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    }

    fn legendre(n: usize, x: f64) -> (f64, f64) {
        let mut p0 = 1.0;
        let mut p1 = x;
        for k in 2..=n {
            let k = k as f64;
            let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, d)
    }
}
