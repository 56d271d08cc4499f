//! Closed-form time-domain kernels `f(τ)`.
//!
//! The full response kernel is `ε(τ) = 2δ(τ) + f(τ)`. The delta part is
//! never sampled: integrated over `(-∞, t]` with the half-weight endpoint
//! convention it contributes exactly `E(t)`, which the displacement paths
//! add analytically. Only the regular part `f` lives here.
//!
//! Besides the physically selected kernel of each model, the two
//! mutually inconsistent Drude inversions (cosine branch and sine branch)
//! are available through [`pathological_kernel`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_models::{DielectricModel, Oscillator};

/// Weight of the delta part of the response kernel.
pub const DELTA_WEIGHT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TemporalKernel {
    /// `(ωp²/γ)(1 − e^{−γτ})`, the +i0 generalized inverse of the Drude model.
    DrudeRegularizedZero { omega_p: f64, gamma: f64 },
    /// `−(ωp²/γ) e^{−γτ}`, inverse cosine transform of `Re ε_D`.
    DrudeCosPathological { omega_p: f64, gamma: f64 },
    /// `(ωp²/γ)(1 − e^{−γτ})`, inverse sine transform of `Im ε_D`.
    DrudeSinForm { omega_p: f64, gamma: f64 },
    /// `ωp²/(γ − θ) (e^{−θτ} − e^{−γτ})`.
    DrudeTheta { omega_p: f64, gamma: f64, theta: f64 },
    /// `ωp² τ`.
    PlasmaLinear { omega_p: f64 },
    /// `4πσ0`.
    NormalSkinConstant { sigma0: f64 },
    /// `Σ g_j e^{−γ_j τ/2} sin(Ω_j τ) / Ω_j`, `Ω_j = sqrt(ω_j² − γ_j²/4)`.
    LorentzDamped { oscillators: Vec<Oscillator> },
}

/// Which half-line inversion of the Drude model to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionBranch {
    Cos,
    Sin,
}

/// One damped mode `amplitude · e^{−decay τ} sin(frequency τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampedMode {
    pub amplitude: f64,
    pub decay: f64,
    pub frequency: f64,
}

impl TemporalKernel {
    pub fn family(&self) -> &'static str {
        match self {
            Self::DrudeRegularizedZero { .. } => "drude_regularized_zero",
            Self::DrudeCosPathological { .. } => "drude_cos_pathological",
            Self::DrudeSinForm { .. } => "drude_sin_form",
            Self::DrudeTheta { .. } => "drude_theta",
            Self::PlasmaLinear { .. } => "plasma_linear",
            Self::NormalSkinConstant { .. } => "normal_skin_constant",
            Self::LorentzDamped { .. } => "lorentz_damped",
        }
    }

    pub fn delta_weight(&self) -> f64 {
        DELTA_WEIGHT
    }

    /// `f(τ)`; identically zero for `τ < 0`.
    pub fn eval(&self, tau: f64) -> f64 {
        if tau < 0.0 {
            return 0.0;
        }
        match self {
            Self::DrudeRegularizedZero { omega_p, gamma } | Self::DrudeSinForm { omega_p, gamma } => {
                -omega_p * omega_p / gamma * (-gamma * tau).exp_m1()
            }
            Self::DrudeCosPathological { omega_p, gamma } => {
                -omega_p * omega_p / gamma * (-gamma * tau).exp()
            }
            Self::DrudeTheta {
                omega_p,
                gamma,
                theta,
            } => omega_p * omega_p * exp_difference_quotient(*theta, *gamma, tau),
            Self::PlasmaLinear { omega_p } => omega_p * omega_p * tau,
            Self::NormalSkinConstant { sigma0 } => 4.0 * PI * sigma0,
            Self::LorentzDamped { .. } => self
                .damped_modes()
                .iter()
                .map(|m| m.amplitude * (-m.decay * tau).exp() * (m.frequency * tau).sin())
                .sum(),
        }
    }

    /// Modes of a [`TemporalKernel::LorentzDamped`] kernel; empty otherwise.
    pub fn damped_modes(&self) -> Vec<DampedMode> {
        match self {
            Self::LorentzDamped { oscillators } => oscillators
                .iter()
                .map(|o| {
                    let frequency = o.damped_frequency();
                    DampedMode {
                        amplitude: o.strength / frequency,
                        decay: 0.5 * o.damping,
                        frequency,
                    }
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Exponential decay rate of `|f|`, or `None` for kernels that do not
    /// decay (and are therefore not integrable on the half line).
    pub fn decay_rate(&self) -> Option<f64> {
        match self {
            Self::DrudeCosPathological { gamma, .. } => Some(*gamma),
            Self::DrudeTheta { gamma, theta, .. } => Some(gamma.min(*theta)),
            Self::LorentzDamped { oscillators } => oscillators
                .iter()
                .map(|o| 0.5 * o.damping)
                .reduce(f64::min),
            _ => None,
        }
    }

    /// Upper bound on `|f(τ)|` for `τ >= 0`.
    pub fn envelope(&self, tau: f64) -> f64 {
        let tau = tau.max(0.0);
        match self {
            Self::DrudeRegularizedZero { omega_p, gamma } | Self::DrudeSinForm { omega_p, gamma } => {
                omega_p * omega_p / gamma * (gamma * tau).min(1.0)
            }
            Self::DrudeCosPathological { omega_p, gamma } => {
                omega_p * omega_p / gamma * (-gamma * tau).exp()
            }
            Self::DrudeTheta {
                omega_p,
                gamma,
                theta,
            } => {
                let lo = gamma.min(*theta);
                let gap = (gamma - theta).abs();
                let linear = if gap > 0.0 { tau.min(1.0 / gap) } else { tau };
                omega_p * omega_p * linear * (-lo * tau).exp()
            }
            Self::PlasmaLinear { omega_p } => omega_p * omega_p * tau,
            Self::NormalSkinConstant { sigma0 } => 4.0 * PI * sigma0,
            Self::LorentzDamped { .. } => self
                .damped_modes()
                .iter()
                .map(|m| m.amplitude.abs() * (-m.decay * tau).exp())
                .sum(),
        }
    }

    /// Point beyond which `|f(τ)| e^{−ητ}` stays below `threshold` times its
    /// maximum. Non-decaying kernels need `damping > 0`.
    pub fn truncation_horizon(&self, damping: f64, threshold: f64) -> Result<f64> {
        let rate = damping.max(0.0) + self.decay_rate().unwrap_or(0.0);
        if rate <= 0.0 {
            return Err(Error::NonIntegrable);
        }
        let damped = |t: f64| self.envelope(t) * (-damping.max(0.0) * t).exp();
        let mut t = 1.0 / rate;
        let mut peak = damped(t).max(damped(0.0));
        loop {
            t *= 1.25;
            let v = damped(t);
            peak = peak.max(v);
            if v <= threshold * peak {
                return Ok(t);
            }
            if t > 1e12 {
                return Err(Error::NonIntegrable);
            }
        }
    }

    /// Characteristic time scales at which the kernel changes shape.
    pub fn time_scales(&self) -> Vec<f64> {
        match self {
            Self::DrudeRegularizedZero { gamma, .. }
            | Self::DrudeSinForm { gamma, .. }
            | Self::DrudeCosPathological { gamma, .. } => vec![1.0 / gamma],
            Self::DrudeTheta { gamma, theta, .. } => vec![1.0 / gamma, 1.0 / theta],
            Self::LorentzDamped { .. } => self
                .damped_modes()
                .iter()
                .flat_map(|m| [1.0 / m.decay, 2.0 * PI / m.frequency])
                .collect(),
            Self::PlasmaLinear { .. } | Self::NormalSkinConstant { .. } => Vec::new(),
        }
    }
}

/// `(e^{−aτ} − e^{−bτ}) / (b − a)`, symmetric in `a` and `b`, with the
/// removable singularity at `a = b` filled in by `τ e^{−aτ}`.
fn exp_difference_quotient(a: f64, b: f64, tau: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let gap = hi - lo;
    if gap == 0.0 {
        return tau * (-lo * tau).exp();
    }
    -(-lo * tau).exp() * (-gap * tau).exp_m1() / gap
}

/// `∫_{−∞}^{upper} g(t′) δ(at − t′) dt′` with the half-weight endpoint
/// convention: zero past the upper limit, half the left value at it, the
/// mean of the one-sided values inside.
pub fn delta_integral(upper: f64, at: f64, g_left: f64, g_right: f64) -> f64 {
    if at > upper {
        0.0
    } else if at == upper {
        0.5 * g_left
    } else {
        0.5 * (g_left + g_right)
    }
}

/// The physically selected kernel of a model.
pub fn kernel_for(model: &DielectricModel) -> Result<TemporalKernel> {
    model.check()?;
    Ok(match model {
        DielectricModel::Drude { omega_p, gamma } => TemporalKernel::DrudeRegularizedZero {
            omega_p: *omega_p,
            gamma: *gamma,
        },
        DielectricModel::RegularizedDrude {
            omega_p,
            gamma,
            theta,
        } => TemporalKernel::DrudeTheta {
            omega_p: *omega_p,
            gamma: *gamma,
            theta: *theta,
        },
        DielectricModel::Plasma { omega_p } => TemporalKernel::PlasmaLinear { omega_p: *omega_p },
        DielectricModel::NormalSkin { sigma0 } => {
            TemporalKernel::NormalSkinConstant { sigma0: *sigma0 }
        }
        DielectricModel::LorentzSum { oscillators } => TemporalKernel::LorentzDamped {
            oscillators: oscillators.clone(),
        },
    })
}

/// The naive half-line inversions of the Drude model.
pub fn pathological_kernel(model: &DielectricModel, which: InversionBranch) -> Result<TemporalKernel> {
    let DielectricModel::Drude { omega_p, gamma } = model else {
        return Err(Error::UnsupportedModel {
            operation: "pathological_kernel",
            model: model.name(),
        });
    };
    model.check()?;
    let (omega_p, gamma) = (*omega_p, *gamma);
    Ok(match which {
        InversionBranch::Cos => TemporalKernel::DrudeCosPathological { omega_p, gamma },
        InversionBranch::Sin => TemporalKernel::DrudeSinForm { omega_p, gamma },
    })
}

/// The collisionless limit of a Drude kernel, with the observed deviation
/// on a check grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaLimit {
    pub plasma: TemporalKernel,
    /// Largest `|f_D(τ) − ωp² τ|` on the check grid.
    pub max_deviation: f64,
    /// Taylor bound `ωp² γ τ_max² / 2` on that deviation.
    pub bound: f64,
    pub grid_max: f64,
}

/// Map a Drude kernel onto its `γ → 0` limit `ωp² τ`, checking pointwise
/// convergence on `τ ∈ [0, grid_max]`.
pub fn gamma_limit_kernel(drude: &TemporalKernel, grid_max: f64) -> Result<GammaLimit> {
    let (omega_p, gamma) = match drude {
        TemporalKernel::DrudeRegularizedZero { omega_p, gamma }
        | TemporalKernel::DrudeSinForm { omega_p, gamma } => (*omega_p, *gamma),
        other => {
            return Err(Error::InvalidArgument(format!(
                "gamma limit needs a Drude kernel, got {}",
                other.family()
            )))
        }
    };
    let plasma = TemporalKernel::PlasmaLinear { omega_p };
    let n = 200;
    let max_deviation = (0..=n)
        .map(|k| grid_max * k as f64 / n as f64)
        .map(|tau| (drude.eval(tau) - plasma.eval(tau)).abs())
        .fold(0.0, f64::max);
    let bound = 0.5 * omega_p * omega_p * gamma * grid_max * grid_max;
    let roundoff = 8.0 * f64::EPSILON * omega_p * omega_p * grid_max;
    if max_deviation > bound + roundoff {
        return Err(Error::InvalidArgument(format!(
            "deviation {max_deviation:e} exceeds Taylor bound {bound:e}"
        )));
    }
    Ok(GammaLimit {
        plasma,
        max_deviation,
        bound,
        grid_max,
    })
}
