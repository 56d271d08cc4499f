//! Electric displacement `D(t)` produced by a Gaussian probe field, computed
//! along three independent paths:
//!
//! * convolution of the time-domain kernel with the field,
//! * multiplication of `ε(ω)` with the field spectrum and inversion,
//! * closed forms built on `exp(B²) erfc(B)`.
//!
//! For the bare Drude model the spectral path yields `D̃ = D − const`, not
//! `D`; its output is labelled accordingly.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_partitioned, panels, QuadSettings};
use crate::spectral_models::{eval_epsilon, DielectricModel};
use crate::special_functions::scaled_exp_sq_erfc;
use crate::temporal_kernels::{kernel_for, TemporalKernel};
use crate::transform_engine::{SampledSignal, TimeGrid};

/// `E(t) = E0 e^{−βt²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPulse {
    pub amplitude: f64,
    pub beta: f64,
}

impl GaussianPulse {
    pub fn new(amplitude: f64, beta: f64) -> Result<Self> {
        let p = Self { amplitude, beta };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "pulse amplitude must be finite, got {}",
                self.amplitude
            )));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "pulse beta must be positive, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// Half-width beyond which `e^{−βs²} < 1e−16`.
    pub fn support(&self) -> f64 {
        (16.0 * 10f64.ln()).sqrt() / self.beta.sqrt()
    }

    /// `E0 √(π/β)`, the time integral of the pulse.
    pub fn area(&self) -> f64 {
        self.amplitude * (PI / self.beta).sqrt()
    }
}

pub fn pulse_value(p: &GaussianPulse, t: f64) -> f64 {
    p.amplitude * (-p.beta * t * t).exp()
}

pub fn pulse_spectrum(p: &GaussianPulse, omega: f64) -> f64 {
    p.amplitude * (-omega * omega / (4.0 * p.beta)).exp() / (2.0 * (PI * p.beta).sqrt())
}

/// `∫₀^∞ e^{−aτ} E(t − τ) dτ` for `Re a ≥ 0`.
pub fn damped_pulse_integral(p: &GaussianPulse, a: Complex64, t: f64) -> Complex64 {
    let sb = p.beta.sqrt();
    let b = a / (2.0 * sb) - sb * t;
    let log_scale = Complex64::new(-p.beta * t * t, 0.0);
    0.5 * p.area() * scaled_exp_sq_erfc(log_scale, b)
}

/// `∫₀^∞ τ e^{−aτ} E(t − τ) dτ` for real `a ≥ 0`.
fn damped_pulse_moment(p: &GaussianPulse, a: f64, t: f64) -> f64 {
    let integral = damped_pulse_integral(p, Complex64::new(a, 0.0), t).re;
    (t - a / (2.0 * p.beta)) * integral + pulse_value(p, t) / (2.0 * p.beta)
}

/// `D(t) = E(t) + ∫₀^∞ f(τ) E(t − τ) dτ` by adaptive quadrature.
pub fn displacement_convolution(
    kernel: &TemporalKernel,
    p: &GaussianPulse,
    t: f64,
    settings: &QuadSettings,
) -> Result<f64> {
    p.check()?;
    let field = pulse_value(p, t);
    let half = p.support();
    let lo = (t - half).max(0.0);
    let hi = t + half;
    if hi <= 0.0 {
        return Ok(field);
    }
    let mut points = vec![lo, hi];
    if t > lo && t < hi {
        points.push(t);
    }
    for s in kernel.time_scales() {
        if s > lo && s < hi {
            points.push(s);
        }
    }
    for m in kernel.damped_modes() {
        points.extend(panels(lo, hi, PI / m.frequency));
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let integral = integrate_partitioned(
        |tau: f64| kernel.eval(tau) * pulse_value(p, t - tau),
        &points,
        settings,
    )?;
    Ok(field + integral.value)
}

/// Closed-form `D(t)` for the Drude, θ-modified Drude and Lorentz models.
pub fn displacement_closed_form(model: &DielectricModel, p: &GaussianPulse, t: f64) -> Result<f64> {
    model.check()?;
    p.check()?;
    let field = pulse_value(p, t);
    let real = |a: f64| damped_pulse_integral(p, Complex64::new(a, 0.0), t).re;
    match model {
        DielectricModel::Drude { omega_p, gamma } => {
            Ok(field + omega_p * omega_p / gamma * (real(0.0) - real(*gamma)))
        }
        DielectricModel::RegularizedDrude {
            omega_p,
            gamma,
            theta,
        } => {
            let gap = gamma - theta;
            let wp2 = omega_p * omega_p;
            // below this gap the divided difference loses more than the
            // midpoint derivative does
            if gap.abs() <= 1e-5 * gamma.max(*theta) {
                let mid = 0.5 * (gamma + theta);
                return Ok(field + wp2 * damped_pulse_moment(p, mid, t));
            }
            Ok(field + wp2 / gap * (real(*theta) - real(*gamma)))
        }
        DielectricModel::LorentzSum { oscillators } => Ok(field
            + oscillators
                .iter()
                .map(|o| {
                    let freq = o.damped_frequency();
                    let a = Complex64::new(0.5 * o.damping, -freq);
                    o.strength / freq * damped_pulse_integral(p, a, t).im
                })
                .sum::<f64>()),
        DielectricModel::Plasma { .. } | DielectricModel::NormalSkin { .. } => {
            Err(Error::UnsupportedModel {
                operation: "displacement_closed_form",
                model: model.name(),
            })
        }
    }
}

/// Frequency grid for the spectral path: midpoints `±(k + ½) dω` up to
/// `omega_max`, so `ω = 0` is never sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSettings {
    pub domega: f64,
    /// `None` picks the point where the field spectrum drops below 1e−17.
    pub omega_max: Option<f64>,
    /// Pair `±ω` before summing so that odd `1/ω` singularities cancel.
    pub symmetric_cancellation: bool,
}

impl Default for SpectralSettings {
    fn default() -> Self {
        Self {
            domega: 0.005,
            omega_max: None,
            symmetric_cancellation: true,
        }
    }
}

/// Which displacement a curve represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// The physical displacement `D`.
    D,
    /// `D̃ = D − E0 (ωp²/2γ) √(π/β)`, what a symmetric principal-value
    /// inversion yields for a `1/ω` pole at the origin.
    DTilde,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDisplacement {
    pub quantity: Quantity,
    pub signal: SampledSignal,
    /// `D̃ − D` implied by the model, when the output is `D̃`.
    pub offset: Option<f64>,
}

/// Strength `c` of an odd `i c / ω` pole of `ε` at the origin, if any.
fn odd_pole_strength(model: &DielectricModel) -> Option<f64> {
    match model {
        DielectricModel::Drude { omega_p, gamma } => Some(omega_p * omega_p / gamma),
        DielectricModel::NormalSkin { sigma0 } => Some(4.0 * PI * sigma0),
        _ => None,
    }
}

/// `D(t) = ∫ ε(ω) E(ω) e^{−iωt} dω` on a symmetric midpoint grid.
pub fn displacement_spectral(
    model: &DielectricModel,
    p: &GaussianPulse,
    times: &TimeGrid,
    settings: &SpectralSettings,
) -> Result<SpectralDisplacement> {
    model.check()?;
    p.check()?;
    let dw = settings.domega;
    if !(dw > 0.0 && dw.is_finite()) {
        return Err(Error::InvalidArgument(format!("domega must be positive, got {dw}")));
    }
    let omega_max = settings
        .omega_max
        .unwrap_or_else(|| 2.0 * p.beta.sqrt() * (17.0 * 10f64.ln()).sqrt());
    let count = (omega_max / dw).ceil() as usize;
    let limit = 1.0 / dw;

    let mut weights = Vec::with_capacity(count);
    for k in 0..count {
        let w = (k as f64 + 0.5) * dw;
        let product = eval_epsilon(model, Complex64::new(w, 0.0))? * pulse_spectrum(p, w);
        weights.push((w, product));
    }

    let first = weights.first().map(|(_, v)| v.norm()).unwrap_or(0.0);
    if matches!(model, DielectricModel::Plasma { .. }) {
        // even pole: the paired sum does not cancel it
        return Err(Error::UnboundedSpectrum {
            magnitude: first,
            limit,
        });
    }
    if !settings.symmetric_cancellation {
        let magnitude = weights.iter().fold(0.0f64, |m, (_, v)| m.max(v.norm()));
        if magnitude > limit {
            return Err(Error::UnboundedSpectrum { magnitude, limit });
        }
    }

    let values = times
        .points()
        .iter()
        .map(|&t| {
            // ε(−ω)E(−ω) = conj(ε(ω)E(ω)), so each ±ω pair gives 2 Re[·]
            2.0 * dw
                * weights
                    .iter()
                    .map(|(w, v)| (v * Complex64::from_polar(1.0, -w * t)).re)
                    .sum::<f64>()
        })
        .collect();
    let signal = SampledSignal::new(times.start, times.step, values)?;
    let (quantity, offset) = match odd_pole_strength(model) {
        Some(c) => (Quantity::DTilde, Some(-0.5 * c * p.area())),
        None => (Quantity::D, None),
    };
    Ok(SpectralDisplacement {
        quantity,
        signal,
        offset,
    })
}

/// Exact limits of `D` (and of `D̃` where the spectral path produces it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticLimits {
    pub d_plus: f64,
    pub d_minus: f64,
    pub d_tilde: Option<(f64, f64)>,
}

pub fn asymptotic_limits(model: &DielectricModel, p: &GaussianPulse) -> Result<AsymptoticLimits> {
    model.check()?;
    p.check()?;
    match model {
        DielectricModel::Plasma { .. } => Err(Error::UnsupportedModel {
            operation: "asymptotic_limits",
            model: model.name(),
        }),
        DielectricModel::Drude { .. } | DielectricModel::NormalSkin { .. } => {
            let c = odd_pole_strength(model).unwrap_or(0.0);
            let residual = c * p.area();
            Ok(AsymptoticLimits {
                d_plus: residual,
                d_minus: 0.0,
                d_tilde: Some((0.5 * residual, -0.5 * residual)),
            })
        }
        DielectricModel::RegularizedDrude { .. } | DielectricModel::LorentzSum { .. } => {
            Ok(AsymptoticLimits {
                d_plus: 0.0,
                d_minus: 0.0,
                d_tilde: None,
            })
        }
    }
}

/// Finite stand-in for `t = ±∞`: `max(30/√β, 20/κ)` with `κ` the slowest
/// decay rate of the kernel's transient (`γ` for Drude, `min(γ, θ)` for the
/// θ-modified model, `γ_j/2` for oscillators).
pub fn horizon_time(model: &DielectricModel, p: &GaussianPulse) -> f64 {
    let pulse_scale = 30.0 / p.beta.sqrt();
    let slowest = match model {
        DielectricModel::Drude { gamma, .. } => Some(*gamma),
        _ => kernel_for(model).ok().and_then(|k| k.decay_rate()),
    };
    match slowest {
        Some(rate) if rate > 0.0 => pulse_scale.max(20.0 / rate),
        _ => pulse_scale,
    }
}

/// `D^(θ)(±T)` over a grid of regularization strengths and horizons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitOrderProbe {
    pub thetas: Vec<f64>,
    pub horizons: Vec<f64>,
    /// `plus[i][j] = D^(θ_i)(+T_j)`.
    pub plus: Vec<Vec<f64>>,
    pub minus: Vec<Vec<f64>>,
    /// Bare Drude values `D(+T_j)`, the `θ = 0` column.
    pub theta_zero: Vec<f64>,
    /// `E0 (ωp²/γ) √(π/β)`.
    pub residual: f64,
    /// `lim_{T→∞} lim_{θ→0}`: bare Drude at the largest horizon.
    pub theta_first: f64,
    /// `lim_{θ→0} lim_{T→∞}`: smallest θ at the largest horizon.
    pub horizon_first: f64,
    /// Every row decays in `T` once the probe has passed.
    pub rows_decay: bool,
    /// At every horizon, values approach the `θ = 0` column as θ shrinks.
    pub columns_converge: bool,
}

pub fn limit_order_probe(
    model: &DielectricModel,
    p: &GaussianPulse,
    thetas: &[f64],
    horizons: &[f64],
) -> Result<LimitOrderProbe> {
    let (omega_p, gamma) = match model {
        DielectricModel::Drude { omega_p, gamma }
        | DielectricModel::RegularizedDrude { omega_p, gamma, .. } => (*omega_p, *gamma),
        other => {
            return Err(Error::UnsupportedModel {
                operation: "limit_order_probe",
                model: other.name(),
            })
        }
    };
    if thetas.is_empty() || horizons.is_empty() {
        return Err(Error::InvalidArgument("empty ladder".into()));
    }
    let bare = DielectricModel::drude(omega_p, gamma);
    let theta_zero = horizons
        .iter()
        .map(|&t| displacement_closed_form(&bare, p, t))
        .collect::<Result<Vec<_>>>()?;
    let mut plus = Vec::with_capacity(thetas.len());
    let mut minus = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let m = DielectricModel::regularized_drude(omega_p, gamma, theta);
        plus.push(
            horizons
                .iter()
                .map(|&t| displacement_closed_form(&m, p, t))
                .collect::<Result<Vec<_>>>()?,
        );
        minus.push(
            horizons
                .iter()
                .map(|&t| displacement_closed_form(&m, p, -t))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let residual = omega_p * omega_p / gamma * p.area();
    let past_pulse = 5.0 / p.beta.sqrt();
    let rows_decay = plus.iter().all(|row| {
        row.windows(2)
            .zip(horizons.windows(2))
            .filter(|(_, h)| h[0] >= past_pulse)
            .all(|(v, _)| v[1] <= v[0])
    });
    let mut order: Vec<usize> = (0..thetas.len()).collect();
    order.sort_by(|&a, &b| thetas[b].total_cmp(&thetas[a]));
    let columns_converge = (0..horizons.len()).all(|j| {
        order.windows(2).all(|w| {
            (plus[w[1]][j] - theta_zero[j]).abs() <= (plus[w[0]][j] - theta_zero[j]).abs()
        })
    });
    let last = horizons.len() - 1;
    let finest = *order.last().unwrap_or(&0);
    Ok(LimitOrderProbe {
        thetas: thetas.to_vec(),
        horizons: horizons.to_vec(),
        theta_first: theta_zero[last],
        horizon_first: plus[finest][last],
        plus,
        minus,
        theta_zero,
        residual,
        rows_decay,
        columns_converge,
    })
}

/// Tolerances and grids shared by the report's paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub quadrature: QuadSettings,
    pub spectral: SpectralSettings,
}

impl Default for ReportSettings {
    fn default() -> Self {
        Self {
            quadrature: QuadSettings::with_rel_tol(1e-9),
            spectral: SpectralSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Convolution,
    Spectral,
    ClosedForm,
}

impl PathKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Convolution => "D_conv",
            Self::Spectral => "D_spec",
            Self::ClosedForm => "D_closed",
        }
    }
}

/// One path's curve, or the reason it could not be produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCurve {
    pub path: PathKind,
    pub quantity: Option<Quantity>,
    pub values: Option<Vec<f64>>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDeviation {
    pub first: PathKind,
    pub second: PathKind,
    pub max_abs: f64,
}

/// Measured `D̃ − D` along the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetCheck {
    pub expected: f64,
    pub mean: f64,
    pub std_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Asymptotics {
    Finite(AsymptoticLimits),
    Divergent { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonValues {
    pub t_star: f64,
    pub d_plus: Option<f64>,
    pub d_minus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub scenario: String,
    pub model: DielectricModel,
    pub pulse: GaussianPulse,
    pub times: Vec<f64>,
    pub field: Vec<f64>,
    pub paths: Vec<PathCurve>,
    pub deviations: Vec<PairDeviation>,
    /// Largest `|D|` over the grid among the `D` curves.
    pub scale: f64,
    pub offset: Option<OffsetCheck>,
    pub asymptotics: Asymptotics,
    pub horizon: HorizonValues,
}

impl ConsistencyReport {
    pub fn curve(&self, path: PathKind) -> Option<&PathCurve> {
        self.paths.iter().find(|c| c.path == path)
    }

    pub fn deviation(&self, first: PathKind, second: PathKind) -> Option<f64> {
        self.deviations
            .iter()
            .find(|d| (d.first, d.second) == (first, second) || (d.first, d.second) == (second, first))
            .map(|d| d.max_abs)
    }
}

fn curve_from(path: PathKind, outcome: Result<(Quantity, Vec<f64>)>) -> PathCurve {
    match outcome {
        Ok((quantity, values)) => PathCurve {
            path,
            quantity: Some(quantity),
            values: Some(values),
            failure: None,
        },
        Err(e) => PathCurve {
            path,
            quantity: None,
            values: None,
            failure: Some(e.to_string()),
        },
    }
}

/// Run every applicable path on a shared grid and compare them. Path
/// errors are recorded in the report, never propagated.
pub fn consistency_report(
    scenario: &str,
    model: &DielectricModel,
    p: &GaussianPulse,
    grid: &TimeGrid,
    settings: &ReportSettings,
) -> Result<ConsistencyReport> {
    model.check()?;
    p.check()?;
    let times = grid.points();
    let kernel = kernel_for(model)?;

    let (conv, spec, closed) = std::thread::scope(|s| {
        let conv = s.spawn(|| {
            times
                .iter()
                .map(|&t| displacement_convolution(&kernel, p, t, &settings.quadrature))
                .collect::<Result<Vec<_>>>()
                .map(|v| (Quantity::D, v))
        });
        let spec = s.spawn(|| {
            displacement_spectral(model, p, grid, &settings.spectral)
                .map(|d| (d.quantity, d.signal.values))
        });
        let closed = s.spawn(|| {
            times
                .iter()
                .map(|&t| displacement_closed_form(model, p, t))
                .collect::<Result<Vec<_>>>()
                .map(|v| (Quantity::D, v))
        });
        (
            conv.join().expect("convolution path panicked"),
            spec.join().expect("spectral path panicked"),
            closed.join().expect("closed-form path panicked"),
        )
    });
    let paths = vec![
        curve_from(PathKind::Convolution, conv),
        curve_from(PathKind::Spectral, spec),
        curve_from(PathKind::ClosedForm, closed),
    ];

    let physical: Vec<&PathCurve> = paths
        .iter()
        .filter(|c| c.quantity == Some(Quantity::D))
        .collect();
    let mut deviations = Vec::new();
    for (i, a) in physical.iter().enumerate() {
        for b in &physical[i + 1..] {
            let (Some(va), Some(vb)) = (&a.values, &b.values) else {
                continue;
            };
            let max_abs = va.iter().zip(vb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            deviations.push(PairDeviation {
                first: a.path,
                second: b.path,
                max_abs,
            });
        }
    }
    let scale = physical
        .iter()
        .filter_map(|c| c.values.as_ref())
        .flat_map(|v| v.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));

    let reference = physical.iter().find_map(|c| c.values.as_ref());
    let offset = paths
        .iter()
        .find(|c| c.quantity == Some(Quantity::DTilde))
        .and_then(|tilde| {
            let values = tilde.values.as_ref()?;
            let reference = reference?;
            let expected = -0.5 * odd_pole_strength(model)? * p.area();
            let diffs: Vec<f64> = values.iter().zip(reference).map(|(a, b)| a - b).collect();
            let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
            let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / diffs.len() as f64;
            Some(OffsetCheck {
                expected,
                mean,
                std_dev: var.sqrt(),
            })
        });

    let asymptotics = match asymptotic_limits(model, p) {
        Ok(l) => Asymptotics::Finite(l),
        Err(e) => Asymptotics::Divergent {
            reason: e.to_string(),
        },
    };
    let t_star = horizon_time(model, p);
    let at = |t: f64| displacement_convolution(&kernel, p, t, &settings.quadrature).ok();
    let horizon = HorizonValues {
        t_star,
        d_plus: at(t_star),
        d_minus: at(-t_star),
    };

    Ok(ConsistencyReport {
        scenario: scenario.to_string(),
        model: model.clone(),
        pulse: *p,
        field: times.iter().map(|&t| pulse_value(p, t)).collect(),
        times,
        paths,
        deviations,
        scale,
        offset,
        asymptotics,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> GaussianPulse {
        GaussianPulse::new(1.0, 0.2).unwrap()
    }

    #[test]
    fn pulse_values() {
        let p = fixture();
        assert_eq!(pulse_value(&p, 0.0), 1.0);
        assert_eq!(pulse_value(&p, 1e3), 0.0);
        let q = GaussianPulse::new(2.0, 0.5).unwrap();
        assert!((pulse_value(&q, 1.0) - 1.213_061_319_425_267).abs() < 1e-15);
        assert!((pulse_spectrum(&p, 0.0) - 0.630_783_130_505_040_0).abs() < 1e-15);
        assert_eq!(pulse_spectrum(&p, 1.7), pulse_spectrum(&p, -1.7));
        assert!(GaussianPulse::new(1.0, 0.0).is_err());
        assert!(GaussianPulse::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn spectrum_integrates_to_peak_field() {
        let p = fixture();
        let r = crate::quadrature::integrate(
            |w: f64| pulse_spectrum(&p, w),
            -20.0,
            20.0,
            &QuadSettings::with_rel_tol(1e-12),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn drude_closed_form_at_origin() {
        // 1 + 3.9633273 (1 − e^{0.3125} erfc(0.559017)), evaluated in mpmath
        let d = displacement_closed_form(&DielectricModel::drude(1.0, 0.5), &fixture(), 0.0).unwrap();
        assert!((d - 2.638_279_303_909_433_5).abs() < 1e-13);
    }

    #[test]
    fn closed_form_survives_large_times() {
        let p = fixture();
        for m in [
            DielectricModel::drude(1.0, 0.5),
            DielectricModel::regularized_drude(1.0, 0.5, 0.1),
            DielectricModel::single_oscillator(1.0, 1.0, 0.1),
        ] {
            for t in [-1e4, -300.0, 300.0, 1e4] {
                assert!(displacement_closed_form(&m, &p, t).unwrap().is_finite());
            }
        }
    }

    #[test]
    fn coincident_rates_use_the_limit() {
        let p = fixture();
        let eq = DielectricModel::regularized_drude(1.0, 0.5, 0.5);
        let k = kernel_for(&eq).unwrap();
        for t in [-2.0, 0.0, 3.0, 12.0] {
            let conv = displacement_convolution(&k, &p, t, &QuadSettings::with_rel_tol(1e-12)).unwrap();
            assert!((displacement_closed_form(&eq, &p, t).unwrap() - conv).abs() < 1e-12);
        }
    }

    #[test]
    fn unsupported_closed_forms() {
        let p = fixture();
        for m in [DielectricModel::plasma(1.0), DielectricModel::normal_skin(0.1)] {
            assert!(matches!(
                displacement_closed_form(&m, &p, 0.0),
                Err(Error::UnsupportedModel { .. })
            ));
        }
    }

    #[test]
    fn normal_skin_convolution() {
        let k = TemporalKernel::NormalSkinConstant {
            sigma0: 1.0 / (4.0 * PI),
        };
        let d = displacement_convolution(&k, &fixture(), 30.0, &QuadSettings::with_rel_tol(1e-9)).unwrap();
        assert!((d - 3.963_327_297_606_011).abs() < 1e-5);
    }

    #[test]
    fn spectral_guard_without_cancellation() {
        let p = fixture();
        let grid = TimeGrid::new(-1.0, 1.0, 3).unwrap();
        let raw = SpectralSettings {
            symmetric_cancellation: false,
            ..SpectralSettings::default()
        };
        assert!(matches!(
            displacement_spectral(&DielectricModel::drude(1.0, 0.5), &p, &grid, &raw),
            Err(Error::UnboundedSpectrum { .. })
        ));
        assert!(displacement_spectral(&DielectricModel::single_oscillator(1.0, 1.0, 0.1), &p, &grid, &raw).is_ok());
        assert!(matches!(
            displacement_spectral(&DielectricModel::plasma(1.0), &p, &grid, &SpectralSettings::default()),
            Err(Error::UnboundedSpectrum { .. })
        ));
    }

    #[test]
    fn asymptotics() {
        let p = fixture();
        let d = asymptotic_limits(&DielectricModel::drude(1.0, 0.5), &p).unwrap();
        assert!((d.d_plus - 7.926_654_595_212_022).abs() < 1e-12);
        assert_eq!(d.d_minus, 0.0);
        let (up, down) = d.d_tilde.unwrap();
        assert!((up - 3.963_327_297_606_011).abs() < 1e-12);
        assert!((down + 3.963_327_297_606_011).abs() < 1e-12);
        let r = asymptotic_limits(&DielectricModel::regularized_drude(1.0, 0.5, 0.1), &p).unwrap();
        assert_eq!((r.d_plus, r.d_minus), (0.0, 0.0));
        assert!(matches!(
            asymptotic_limits(&DielectricModel::plasma(1.0), &p),
            Err(Error::UnsupportedModel { .. })
        ));
    }

    #[test]
    fn horizons() {
        let p = fixture();
        let t = horizon_time(&DielectricModel::drude(1.0, 0.5), &p);
        assert!((t - 67.082_039_324_993_69).abs() < 1e-10);
        assert_eq!(horizon_time(&DielectricModel::single_oscillator(1.0, 1.0, 0.1), &p), 400.0);
        assert!((horizon_time(&DielectricModel::plasma(1.0), &p) - t).abs() < 1e-12);
    }

    #[test]
    fn limit_order_probe_values() {
        let p = fixture();
        let m = DielectricModel::drude(1.0, 0.5);
        let probe = limit_order_probe(&m, &p, &[0.1, 0.001], &[30.0, 3000.0]).unwrap();
        // mpmath: D^(θ=0.001)(30) = 7.70780846604246
        assert!((probe.plus[1][0] - 7.707_808_466_042_46).abs() < 1e-10);
        assert!(probe.plus[0][1].abs() <= 1e-6);
        for (j, &t) in probe.horizons.iter().enumerate() {
            assert_eq!(probe.theta_zero[j], displacement_closed_form(&m, &p, t).unwrap());
        }
        assert!(probe.columns_converge);
        assert!(probe.rows_decay);
    }

    #[test]
    fn plasma_report_keeps_convolution() {
        let p = fixture();
        let grid = TimeGrid::new(-5.0, 5.0, 11).unwrap();
        let r = consistency_report("plasma", &DielectricModel::plasma(1.0), &p, &grid, &ReportSettings::default()).unwrap();
        assert!(r.curve(PathKind::Convolution).unwrap().values.is_some());
        let closed = r.curve(PathKind::ClosedForm).unwrap();
        assert!(closed.failure.as_deref().unwrap().contains("unsupported model"));
        assert!(matches!(r.asymptotics, Asymptotics::Divergent { .. }));
    }
}
