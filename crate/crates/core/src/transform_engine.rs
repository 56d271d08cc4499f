//! Fourier machinery under one fixed convention:
//!
//! ```text
//! E(ω) = (1/2π) ∫ E(t) e^{iωt} dt        E(t) = ∫ E(ω) e^{−iωt} dω
//! ```
//!
//! Also here: half-line cosine/sine transforms of kernels with Abel damping
//! `e^{−ητ}`, numerical inversion of `ε(ω) − 1` under the two
//! regularizations of the `+i0` rule (θ-modified model and `ω → ω + iη`),
//! and the closed-form contour evaluation used as their oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrapolation::{check_contracting, richardson, Extrapolated};
use crate::quadrature::{
    integrate_algebraic_tail, integrate_oscillatory_tail, integrate_partitioned, panels,
    QuadSettings,
};
use crate::spectral_models::DielectricModel;
use crate::temporal_kernels::{kernel_for, TemporalKernel};

/// Tag carried by every [`SampledSpectrum`].
pub const CONVENTION: &str = "forward-plus-i-over-2pi";

/// Relative level below which a sampled function counts as decayed.
pub const DECAY_THRESHOLD: f64 = 1e-12;

/// Relative imaginary residue above which [`signal_of`] attaches a warning.
pub const REALITY_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SampledSignal {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(Error::InvalidArgument(format!("bad time grid t0={t0}, dt={dt}")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidArgument("a signal needs at least two samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("signal contains non-finite samples".into()));
        }
        Ok(Self {
            t0,
            dt,
            values,
            warnings: Vec::new(),
        })
    }

    /// Sample `f` on `len` points starting at `t0`.
    pub fn sample(t0: f64, dt: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(t0, dt, (0..len).map(|k| f(t0 + dt * k as f64)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + self.dt * k as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSpectrum {
    pub omega0: f64,
    pub domega: f64,
    pub values: Vec<Complex64>,
    pub convention: String,
    /// Start of the time grid the spectrum was computed from, so that the
    /// inverse lands on the same samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_origin: Option<f64>,
}

impl SampledSpectrum {
    pub fn new(omega0: f64, domega: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(domega > 0.0 && domega.is_finite()) || !omega0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad frequency grid omega0={omega0}, domega={domega}"
            )));
        }
        if values.len() < 2 {
            return Err(Error::InvalidArgument("a spectrum needs at least two samples".into()));
        }
        Ok(Self {
            omega0,
            domega,
            values,
            convention: CONVENTION.to_string(),
            time_origin: None,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.omega0 + self.domega * k as f64
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Largest `|E(−ω) − conj E(ω)|` over mirrored grid points. Zero when
    /// the grid is not symmetric about the origin.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let n = self.len();
        let mirrored = (self.omega0 + self.frequency(n - 1)).abs() <= 1e-9 * self.domega;
        if !mirrored {
            return 0.0;
        }
        (0..n)
            .map(|k| (self.values[n - 1 - k] - self.values[k].conj()).norm())
            .fold(0.0, f64::max)
    }
}

fn check_decayed(first: f64, last: f64, peak: f64) -> Result<()> {
    let end = first.max(last);
    if end > DECAY_THRESHOLD * peak {
        return Err(Error::NotDecayed { end, peak });
    }
    Ok(())
}

/// `out[k] = Σ_j v_j exp(±2πi (k + p)(j + m) / N)` for a square grid pair
/// with `dω dt = 2π/N`. Integer parts of the offsets are reduced modulo `N`
/// exactly, so large grid origins cost no phase accuracy.
fn conjugate_grid_sum(values: &[Complex64], p: f64, m: f64, sign: f64) -> Vec<Complex64> {
    let n = values.len();
    let nn = n as i64;
    let turn = |x: f64| Complex64::from_polar(1.0, sign * 2.0 * PI * x / n as f64);
    let roots: Vec<Complex64> = (0..n).map(|r| turn(r as f64)).collect();
    let (pi, pf) = (p.round(), p - p.round());
    let (mi, mf) = (m.round(), m - m.round());
    let (pi, mi) = (pi as i64, mi as i64);
    let weighted: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(j, v)| v * turn(pf * (j as i64 + mi) as f64))
        .collect();
    (0..n)
        .map(|k| {
            let q = k as i64 + pi;
            let step = q.rem_euclid(nn) as usize;
            let mut idx = (q * mi).rem_euclid(nn) as usize;
            let mut acc = Complex64::new(0.0, 0.0);
            for w in &weighted {
                acc += w * roots[idx];
                idx += step;
                if idx >= n {
                    idx -= n;
                }
            }
            acc * turn(q as f64 * mf + pf * mf)
        })
        .collect()
}

/// Forward transform onto the conjugate grid `dω = 2π/(N dt)`, centred so
/// that `ω = 0` is a grid point.
pub fn spectrum_of(signal: &SampledSignal) -> Result<SampledSpectrum> {
    let n = signal.len();
    check_decayed(
        signal.values[0].abs(),
        signal.values[n - 1].abs(),
        signal.peak(),
    )?;
    let domega = 2.0 * PI / (n as f64 * signal.dt);
    let p = -((n / 2) as f64);
    let input: Vec<Complex64> = signal.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let scale = signal.dt / (2.0 * PI);
    let values = conjugate_grid_sum(&input, p, signal.t0 / signal.dt, 1.0)
        .into_iter()
        .map(|v| v * scale)
        .collect();
    let mut spectrum = SampledSpectrum::new(p * domega, domega, values)?;
    spectrum.time_origin = Some(signal.t0);
    Ok(spectrum)
}

/// Inverse transform onto the conjugate grid `dt = 2π/(N dω)`. Starts at
/// the spectrum's recorded time origin, or is centred on `t = 0`.
pub fn signal_of(spectrum: &SampledSpectrum) -> Result<SampledSignal> {
    let n = spectrum.len();
    check_decayed(
        spectrum.values[0].norm(),
        spectrum.values[n - 1].norm(),
        spectrum.peak(),
    )?;
    let dt = 2.0 * PI / (n as f64 * spectrum.domega);
    let t0 = spectrum.time_origin.unwrap_or(-((n / 2) as f64) * dt);
    let raw = conjugate_grid_sum(
        &spectrum.values,
        t0 / dt,
        spectrum.omega0 / spectrum.domega,
        -1.0,
    );
    let max_im = raw.iter().fold(0.0f64, |m, z| m.max(z.im.abs())) * spectrum.domega;
    let values = raw.iter().map(|z| z.re * spectrum.domega).collect();
    let mut signal = SampledSignal::new(t0, dt, values)?;
    let peak = signal.peak();
    if max_im > REALITY_THRESHOLD * peak.max(f64::MIN_POSITIVE) {
        signal.warnings.push(format!(
            "imaginary residue {max_im:e} (peak {peak:e}); spectrum is not conjugate symmetric"
        ));
    }
    Ok(signal)
}

/// Forward transform of a signal evaluated at arbitrary frequencies.
pub fn spectrum_at(signal: &SampledSignal, omegas: &[f64]) -> Result<Vec<Complex64>> {
    let n = signal.len();
    check_decayed(
        signal.values[0].abs(),
        signal.values[n - 1].abs(),
        signal.peak(),
    )?;
    let scale = signal.dt / (2.0 * PI);
    Ok(omegas
        .iter()
        .map(|&w| {
            signal
                .values
                .iter()
                .enumerate()
                .map(|(j, &v)| v * Complex64::from_polar(1.0, w * signal.time(j)))
                .sum::<Complex64>()
                * scale
        })
        .collect())
}

/// Cosine or sine weight of a half-line transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfLine {
    Cosine,
    Sine,
}

const MAX_PANELS: usize = 50_000;
const HORIZON_THRESHOLD: f64 = 1e-16;

fn abel_halfline(
    kernel: &TemporalKernel,
    omega: f64,
    eta: f64,
    weight: HalfLine,
    settings: &QuadSettings,
) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {omega}")));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("damping must be non-negative, got {eta}")));
    }
    let horizon = kernel.truncation_horizon(eta, HORIZON_THRESHOLD)?;
    let width = (PI / omega).max(horizon / MAX_PANELS as f64);
    let mut points = panels(0.0, horizon, width);
    points.extend(kernel.time_scales().into_iter().filter(|&s| s > 0.0 && s < horizon));
    points.sort_by(f64::total_cmp);
    points.dedup();

    let integrand = |tau: f64| {
        let trig = match weight {
            HalfLine::Cosine => (omega * tau).cos(),
            HalfLine::Sine => (omega * tau).sin(),
        };
        kernel.eval(tau) * (-eta * tau).exp() * trig
    };
    Ok(integrate_partitioned(integrand, &points, settings)?.value)
}

/// `∫₀^∞ f(τ) e^{−ητ} cos(ωτ) dτ`. `η = 0` is accepted for kernels that
/// decay on their own and rejected with `NonIntegrable` otherwise.
pub fn abel_halfline_cosine(
    kernel: &TemporalKernel,
    omega: f64,
    eta: f64,
    settings: &QuadSettings,
) -> Result<f64> {
    abel_halfline(kernel, omega, eta, HalfLine::Cosine, settings)
}

/// `∫₀^∞ f(τ) e^{−ητ} sin(ωτ) dτ`, same contract as the cosine form.
pub fn abel_halfline_sine(
    kernel: &TemporalKernel,
    omega: f64,
    eta: f64,
    settings: &QuadSettings,
) -> Result<f64> {
    abel_halfline(kernel, omega, eta, HalfLine::Sine, settings)
}

/// Descending ladder of regularization parameters and the Richardson order
/// used to extrapolate them to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizationLadder {
    pub values: Vec<f64>,
    pub order: usize,
}

impl RegularizationLadder {
    pub fn new(values: Vec<f64>, order: usize) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::ExtrapolationDiverged(format!(
                "a ladder of {} rungs cannot be extrapolated",
                values.len()
            )));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite()))
            || values.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidArgument(
                "ladder must be strictly decreasing and positive".into(),
            ));
        }
        if order == 0 || order + 1 > values.len() {
            return Err(Error::InvalidArgument(format!(
                "order {order} does not fit a ladder of {} rungs",
                values.len()
            )));
        }
        Ok(Self { values, order })
    }

    /// Ladder for the θ-modified model: `{0.002, 0.001, 0.0005}`, order 2.
    pub fn theta_default() -> Self {
        Self {
            values: vec![0.002, 0.001, 0.0005],
            order: 2,
        }
    }

    /// Ladder for Abel damping of half-line transforms:
    /// `{0.02, 0.01, 0.005, 0.0025}`, order 3.
    pub fn abel_default() -> Self {
        Self {
            values: vec![0.02, 0.01, 0.005, 0.0025],
            order: 3,
        }
    }

    fn extrapolate(&self, samples: &[f64], floor: f64) -> Result<Extrapolated> {
        check_contracting(samples, floor)?;
        richardson(&self.values, samples, self.order)
    }
}

/// A half-line transform extrapolated to vanishing damping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbelLimit {
    pub omega: f64,
    pub weight: HalfLine,
    pub etas: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: Extrapolated,
}

pub fn abel_limit(
    kernel: &TemporalKernel,
    omega: f64,
    weight: HalfLine,
    ladder: &RegularizationLadder,
    settings: &QuadSettings,
) -> Result<AbelLimit> {
    let values = ladder
        .values
        .iter()
        .map(|&eta| abel_halfline(kernel, omega, eta, weight, settings))
        .collect::<Result<Vec<_>>>()?;
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let limit = ladder.extrapolate(&values, 1e-10 * scale)?;
    Ok(AbelLimit {
        omega,
        weight,
        etas: ladder.values.clone(),
        values,
        limit,
    })
}

/// Cosine transform evaluated at `ω = η` for each damping. For kernels with
/// a constant tail this grows like `1/η`, the footprint of a `δ(ω)` term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaPeak {
    pub etas: Vec<f64>,
    pub peaks: Vec<f64>,
    /// `peaks[k+1] / peaks[k]` for consecutive dampings.
    pub ratios: Vec<f64>,
}

pub fn eta_peak(kernel: &TemporalKernel, etas: &[f64], settings: &QuadSettings) -> Result<EtaPeak> {
    let peaks = etas
        .iter()
        .map(|&eta| abel_halfline_cosine(kernel, eta, eta, settings))
        .collect::<Result<Vec<_>>>()?;
    let ratios = peaks.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(EtaPeak {
        etas: etas.to_vec(),
        peaks,
        ratios,
    })
}

/// Uniform time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(start: f64, stop: f64, len: usize) -> Result<Self> {
        if len < 2 || !(stop > start) || !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid [{start}, {stop}] with {len} points"
            )));
        }
        Ok(Self {
            start,
            step: (stop - start) / (len - 1) as f64,
            len,
        })
    }

    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.len {
            self.start + self.step * (self.len - 1) as f64
        } else {
            self.start + self.step * k as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.point(k)).collect()
    }
}

/// `(1/π) ∫₀^∞ Re[χ(ω) e^{−iωτ}] dω` for a susceptibility that is regular on
/// the real axis and decays like `1/ω²`. `scales` are frequencies at which
/// `χ` has structure.
fn inverse_halfline(
    chi: impl Fn(f64) -> Complex64,
    scales: &[f64],
    tau: f64,
    settings: &QuadSettings,
) -> Result<f64> {
    let integrand = |w: f64| {
        let z = chi(w) * Complex64::from_polar(1.0, -w * tau);
        z.re
    };
    let top = scales.iter().fold(1e-3f64, |m, &s| m.max(s));
    let head_end = 64.0 * top;
    let mut points = vec![0.0, head_end];
    for &s in scales {
        let mut x = 0.25 * s;
        while x < head_end {
            points.push(x);
            x *= 4.0;
        }
    }
    if tau != 0.0 {
        let period = PI / tau.abs();
        points.extend(panels(0.0, head_end, period.max(head_end / 2000.0)));
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let head = integrate_partitioned(integrand, &points, settings)?;
    let tail = if tau == 0.0 {
        integrate_algebraic_tail(integrand, head_end, settings)?
    } else {
        integrate_oscillatory_tail(integrand, head_end, PI / tau.abs(), settings)?
    };
    Ok((head.value + tail.value) / PI)
}

fn drude_parameters(model: &DielectricModel, operation: &'static str) -> Result<(f64, f64)> {
    match model {
        DielectricModel::Drude { omega_p, gamma } => {
            model.check()?;
            Ok((*omega_p, *gamma))
        }
        other => Err(Error::UnsupportedModel {
            operation,
            model: other.name(),
        }),
    }
}

/// Per-point outcome of a regularized kernel recovery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryPoint {
    pub tau: f64,
    pub numeric: f64,
    pub oracle: f64,
    pub abs_err: f64,
    pub rungs: Vec<RungValue>,
    pub richardson_estimate: f64,
    pub richardson_error: f64,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RungValue {
    pub theta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRecovery {
    pub method: String,
    pub ladder: RegularizationLadder,
    pub signal: SampledSignal,
    pub points: Vec<RecoveryPoint>,
}

impl KernelRecovery {
    pub fn max_relative_error(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.abs_err / p.oracle.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

fn recover(
    method: &str,
    model: &DielectricModel,
    grid: &TimeGrid,
    ladder: &RegularizationLadder,
    rung: impl Fn(f64, f64) -> Result<f64>,
) -> Result<KernelRecovery> {
    let oracle = kernel_for(model)?;
    let mut points = Vec::with_capacity(grid.len);
    for tau in grid.points() {
        let values = ladder
            .values
            .iter()
            .map(|&h| rung(h, tau))
            .collect::<Result<Vec<_>>>()?;
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let ex = ladder.extrapolate(&values, 1e-9 * scale)?;
        let exact = oracle.eval(tau);
        points.push(RecoveryPoint {
            tau,
            numeric: ex.estimate,
            oracle: exact,
            abs_err: (ex.estimate - exact).abs(),
            rungs: ladder
                .values
                .iter()
                .zip(&values)
                .map(|(&theta, &value)| RungValue { theta, value })
                .collect(),
            richardson_estimate: ex.estimate,
            richardson_error: ex.error,
            rate: ex.observed_rate,
        });
    }
    let signal = SampledSignal::new(
        grid.start,
        grid.step,
        points.iter().map(|p| p.numeric).collect(),
    )?;
    Ok(KernelRecovery {
        method: method.to_string(),
        ladder: ladder.clone(),
        signal,
        points,
    })
}

/// Recover the Drude kernel by inverting the θ-modified model
/// `ε^(θ)(ω) − 1 = −ωp² / ((ω + iθ)(ω + iγ))` for each rung of the ladder
/// and extrapolating `θ → 0`.
pub fn theta_regularized_kernel_recovery(
    model: &DielectricModel,
    grid: &TimeGrid,
    ladder: &RegularizationLadder,
    settings: &QuadSettings,
) -> Result<KernelRecovery> {
    let (omega_p, gamma) = drude_parameters(model, "theta_regularized_kernel_recovery")?;
    RegularizationLadder::new(ladder.values.clone(), ladder.order)?;
    let wp2 = omega_p * omega_p;
    recover("theta", model, grid, ladder, |theta, tau| {
        let chi = |w: f64| -wp2 / (Complex64::new(w, theta) * Complex64::new(w, gamma));
        inverse_halfline(chi, &[theta, gamma], tau, settings)
    })
}

/// Recover the Drude kernel by inverting `ε_D(ω + iη) − 1`, which is the
/// transform of `f(τ) e^{−ητ}`, and extrapolating `η → 0`.
pub fn abel_kernel_recovery(
    model: &DielectricModel,
    grid: &TimeGrid,
    ladder: &RegularizationLadder,
    settings: &QuadSettings,
) -> Result<KernelRecovery> {
    let (omega_p, gamma) = drude_parameters(model, "abel_kernel_recovery")?;
    RegularizationLadder::new(ladder.values.clone(), ladder.order)?;
    let wp2 = omega_p * omega_p;
    recover("abel", model, grid, ladder, |eta, tau| {
        let chi = |w: f64| -wp2 / (Complex64::new(w, eta) * Complex64::new(w, eta + gamma));
        inverse_halfline(chi, &[eta, gamma + eta], tau, settings)
    })
}

/// Closed-form contour evaluation of the Drude kernel: the regular part
/// `I1` and the two pole contributions `I2`, with `f = I1 + I2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourTerms {
    pub i1: f64,
    pub i2: f64,
    pub f: f64,
}

pub fn drude_contour_oracle(model: &DielectricModel, tau: f64) -> Result<ContourTerms> {
    let (omega_p, gamma) = drude_parameters(model, "drude_contour_oracle")?;
    let half = omega_p * omega_p / (2.0 * gamma);
    let i1 = -half * (-gamma * tau.abs()).exp();
    let i2 = if tau >= 0.0 {
        2.0 * half - half * (-gamma * tau).exp()
    } else {
        half * (gamma * tau).exp()
    };
    let f = if tau >= 0.0 {
        -2.0 * half * (-gamma * tau).exp_m1()
    } else {
        0.0
    };
    Ok(ContourTerms { i1, i2, f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal_kernels::{pathological_kernel, InversionBranch};

    fn gaussian(beta: f64) -> SampledSignal {
        SampledSignal::sample(-40.0, 0.01, 8001, |t| (-beta * t * t).exp()).unwrap()
    }

    #[test]
    fn gaussian_spectrum() {
        let s = spectrum_of(&gaussian(0.2)).unwrap();
        assert_eq!(s.convention, CONVENTION);
        let zero = s.len() / 2;
        assert_eq!(s.frequency(zero), 0.0);
        assert!((s.values[zero].re - 0.630_783_130_505_040_0).abs() < 1e-8);
        for k in (0..s.len()).step_by(37) {
            let w = s.frequency(k);
            if w.abs() > 6.0 * 0.2f64.sqrt() {
                continue;
            }
            let exact = (-w * w / 0.8).exp() / (2.0 * (PI * 0.2).sqrt());
            assert!((s.values[k].re - exact).abs() <= 1e-8 * exact);
        }
        assert!(s.conjugate_symmetry_defect() <= 1e-12);
    }

    #[test]
    fn round_trip() {
        let g = gaussian(0.2);
        let back = signal_of(&spectrum_of(&g).unwrap()).unwrap();
        assert!(back.warnings.is_empty());
        assert!((back.t0 - g.t0).abs() < 1e-12 && (back.dt - g.dt).abs() < 1e-15);
        for (a, b) in back.values.iter().zip(&g.values) {
            assert!((a - b).abs() <= 1e-7 * g.peak());
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let z = SampledSignal::new(-1.0, 0.1, vec![0.0; 21]).unwrap();
        let s = spectrum_of(&z).unwrap();
        assert!(s.values.iter().all(|v| v.norm() == 0.0));
        let back = signal_of(&s).unwrap();
        assert!(back.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn undecayed_signal_is_rejected() {
        let step = SampledSignal::sample(-10.0, 0.1, 201, |t| if t > 0.0 { 1.0 } else { 0.0 }).unwrap();
        assert!(matches!(spectrum_of(&step), Err(Error::NotDecayed { .. })));
    }

    #[test]
    fn asymmetric_spectrum_warns() {
        let mut s = spectrum_of(&gaussian(0.2)).unwrap();
        let k = s.len() / 2 + 10;
        s.values[k] += Complex64::new(0.0, 1e-3);
        let back = signal_of(&s).unwrap();
        assert_eq!(back.warnings.len(), 1);
    }

    #[test]
    fn abel_transforms_of_pathological_cosine_kernel() {
        let s = QuadSettings::with_rel_tol(1e-10);
        let m = DielectricModel::drude(1.0, 0.5);
        let cos = pathological_kernel(&m, InversionBranch::Cos).unwrap();
        let c = abel_halfline_cosine(&cos, 1.0, 0.0, &s).unwrap();
        assert!((c + 0.8).abs() < 1e-10);
        let sn = abel_halfline_sine(&cos, 1.0, 0.0, &s).unwrap();
        assert!((sn + 1.6).abs() < 1e-10);
    }

    #[test]
    fn normal_skin_damped_cosine() {
        let s = QuadSettings::with_rel_tol(1e-10);
        let k = TemporalKernel::NormalSkinConstant {
            sigma0: 1.0 / (4.0 * PI),
        };
        let v = abel_halfline_cosine(&k, 1.0, 0.01, &s).unwrap();
        assert!((v - 0.01 / 1.0001).abs() < 1e-10);
        assert!(matches!(
            abel_halfline_cosine(&k, 1.0, 0.0, &s),
            Err(Error::NonIntegrable)
        ));
    }

    #[test]
    fn lorentz_sine_at_resonance() {
        let s = QuadSettings::with_rel_tol(1e-10);
        let k = kernel_for(&DielectricModel::single_oscillator(1.0, 1.0, 0.1)).unwrap();
        let v = abel_halfline_sine(&k, 1.0, 0.0, &s).unwrap();
        assert!((v - 10.0).abs() < 1e-8);
    }

    #[test]
    fn abel_limits_of_drude_kernel() {
        let s = QuadSettings::with_rel_tol(1e-11);
        let k = kernel_for(&DielectricModel::drude(1.0, 0.5)).unwrap();
        let ladder = RegularizationLadder::abel_default();
        let c = abel_limit(&k, 1.0, HalfLine::Cosine, &ladder, &s).unwrap();
        assert!((c.limit.estimate + 0.8).abs() < 1e-6, "{c:?}");
        let sn = abel_limit(&k, 1.0, HalfLine::Sine, &ladder, &s).unwrap();
        assert!((sn.limit.estimate - 0.4).abs() < 1e-6, "{sn:?}");
    }

    #[test]
    fn contour_oracle() {
        let m = DielectricModel::drude(1.0, 0.5);
        let c = drude_contour_oracle(&m, 2.0).unwrap();
        let e1 = (-1.0f64).exp();
        assert!((c.i1 + e1).abs() < 1e-15);
        assert!((c.i2 - (2.0 - e1)).abs() < 1e-15);
        assert!((c.f - 1.264_241_117_657_115_4).abs() < 1e-15);
        assert!((c.i1 + c.i2 - c.f).abs() < 1e-15);
        let neg = drude_contour_oracle(&m, -1.0).unwrap();
        assert_eq!(neg.f, 0.0);
        assert!((neg.i1 + neg.i2).abs() < 1e-16);
        let far = drude_contour_oracle(&m, 200.0).unwrap();
        assert!((far.f - 2.0).abs() < 1e-15);
        assert!(drude_contour_oracle(&DielectricModel::plasma(1.0), 1.0).is_err());
    }

    #[test]
    fn ladder_validation() {
        assert!(matches!(
            RegularizationLadder::new(vec![0.1], 1),
            Err(Error::ExtrapolationDiverged(_))
        ));
        assert!(RegularizationLadder::new(vec![0.1, 0.2, 0.05], 2).is_err());
        assert!(RegularizationLadder::new(vec![0.1, 0.05, 0.025], 3).is_err());
        assert!(RegularizationLadder::new(vec![0.1, 0.05, 0.025], 2).is_ok());
    }

    #[test]
    fn theta_recovery_at_a_few_points() {
        let m = DielectricModel::drude(1.0, 0.5);
        let grid = TimeGrid::new(0.0, 2.0, 3).unwrap();
        let r = theta_regularized_kernel_recovery(
            &m,
            &grid,
            &RegularizationLadder::theta_default(),
            &QuadSettings::with_rel_tol(1e-12),
        )
        .unwrap();
        assert!(r.points[0].numeric.abs() < 1e-8, "{:?}", r.points[0]);
        let p = &r.points[2];
        assert!((p.numeric - 1.264_241_117_657_115_4).abs() < 1e-6 * 1.2642, "{p:?}");
    }
}
