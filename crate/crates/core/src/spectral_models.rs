//! Frequency-domain permittivity models.
//!
//! Five models: the Drude model of free carriers, its θ-shifted variant
//! that is regular at zero frequency, the collisionless plasma model, the
//! normal-skin-effect model, and a sum of damped Lorentz oscillators for
//! insulators. All frequencies share one arbitrary unit; the normal-skin
//! model keeps the Gaussian-unit `4π` factor.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_partitioned, QuadSettings};

/// Default exclusion radius around a pole, in model frequency units.
pub const DEFAULT_GUARD_RADIUS: f64 = 1e-12;

/// One damped oscillator of a [`DielectricModel::LorentzSum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator {
    /// Oscillator strength `g_j` (frequency²).
    pub strength: f64,
    /// Resonance frequency `ω_j`.
    pub resonance: f64,
    /// Damping `γ_j`.
    pub damping: f64,
}

impl Oscillator {
    pub fn new(strength: f64, resonance: f64, damping: f64) -> Self {
        Self {
            strength,
            resonance,
            damping,
        }
    }

    /// Frequency of the damped oscillation, `sqrt(ω_j² − γ_j²/4)`.
    pub fn damped_frequency(&self) -> f64 {
        (self.resonance * self.resonance - 0.25 * self.damping * self.damping).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DielectricModel {
    /// `1 − ωp² / (ω (ω + iγ))`
    Drude { omega_p: f64, gamma: f64 },
    /// `1 − ωp² / ((ω + iθ)(ω + iγ))`
    RegularizedDrude { omega_p: f64, gamma: f64, theta: f64 },
    /// `1 − ωp² / ω²`
    Plasma { omega_p: f64 },
    /// `1 + 4πiσ0 / ω`
    NormalSkin { sigma0: f64 },
    /// `1 + Σ g_j / (ω_j² − ω² − iγ_j ω)`
    LorentzSum { oscillators: Vec<Oscillator> },
}

impl DielectricModel {
    pub fn drude(omega_p: f64, gamma: f64) -> Self {
        Self::Drude { omega_p, gamma }
    }

    pub fn regularized_drude(omega_p: f64, gamma: f64, theta: f64) -> Self {
        Self::RegularizedDrude {
            omega_p,
            gamma,
            theta,
        }
    }

    pub fn plasma(omega_p: f64) -> Self {
        Self::Plasma { omega_p }
    }

    pub fn normal_skin(sigma0: f64) -> Self {
        Self::NormalSkin { sigma0 }
    }

    pub fn lorentz(oscillators: Vec<Oscillator>) -> Self {
        Self::LorentzSum { oscillators }
    }

    pub fn single_oscillator(strength: f64, resonance: f64, damping: f64) -> Self {
        Self::lorentz(vec![Oscillator::new(strength, resonance, damping)])
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Drude { .. } => "drude",
            Self::RegularizedDrude { .. } => "regularized_drude",
            Self::Plasma { .. } => "plasma",
            Self::NormalSkin { .. } => "normal_skin",
            Self::LorentzSum { .. } => "lorentz_sum",
        }
    }

    /// Largest characteristic frequency of the model.
    pub fn max_frequency(&self) -> f64 {
        match self {
            Self::Drude { omega_p, gamma } => omega_p.max(*gamma),
            Self::RegularizedDrude {
                omega_p,
                gamma,
                theta,
            } => omega_p.max(*gamma).max(*theta),
            Self::Plasma { omega_p } => *omega_p,
            Self::NormalSkin { sigma0 } => 4.0 * PI * sigma0,
            Self::LorentzSum { oscillators } => oscillators
                .iter()
                .map(|o| o.resonance.max(o.damping).max(o.strength.sqrt()))
                .fold(0.0, f64::max),
        }
    }

    /// Whether `ε(ω) − 1` is singular at `ω = 0`.
    pub fn singular_at_zero(&self) -> bool {
        matches!(
            self,
            Self::Drude { .. } | Self::Plasma { .. } | Self::NormalSkin { .. }
        )
    }

    /// Fail with [`Error::InvalidModel`] on the first violated invariant.
    pub fn check(&self) -> Result<()> {
        let report = validate(self);
        match report.checks.into_iter().find(|c| !c.passed) {
            None => Ok(()),
            Some(c) => Err(Error::InvalidModel(format!("{}: {}", c.invariant, c.detail))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub model: String,
    pub checks: Vec<InvariantCheck>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InvariantCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn positive(name: &str, value: f64) -> InvariantCheck {
    let passed = value.is_finite() && value > 0.0;
    InvariantCheck {
        invariant: format!("{name} > 0"),
        passed,
        detail: if passed {
            format!("{name} = {value}")
        } else {
            format!("{name} = {value} violates {name} > 0")
        },
    }
}

/// Check every model invariant and report each one.
pub fn validate(model: &DielectricModel) -> ValidationReport {
    let mut checks = Vec::new();
    match model {
        DielectricModel::Drude { omega_p, gamma } => {
            checks.push(positive("omega_p", *omega_p));
            checks.push(positive("gamma", *gamma));
        }
        DielectricModel::RegularizedDrude {
            omega_p,
            gamma,
            theta,
        } => {
            checks.push(positive("omega_p", *omega_p));
            checks.push(positive("gamma", *gamma));
            checks.push(positive("theta", *theta));
        }
        DielectricModel::Plasma { omega_p } => checks.push(positive("omega_p", *omega_p)),
        DielectricModel::NormalSkin { sigma0 } => checks.push(positive("sigma0", *sigma0)),
        DielectricModel::LorentzSum { oscillators } => {
            checks.push(InvariantCheck {
                invariant: "at least one oscillator".into(),
                passed: !oscillators.is_empty(),
                detail: format!("{} oscillators", oscillators.len()),
            });
            for (j, o) in oscillators.iter().enumerate() {
                checks.push(positive(&format!("oscillators[{j}].strength"), o.strength));
                checks.push(positive(&format!("oscillators[{j}].resonance"), o.resonance));
                checks.push(positive(&format!("oscillators[{j}].damping"), o.damping));
                let under = o.damping < 2.0 * o.resonance;
                checks.push(InvariantCheck {
                    invariant: format!("oscillators[{j}] underdamped (damping < 2 resonance)"),
                    passed: under,
                    detail: if under {
                        format!("damping {} < {}", o.damping, 2.0 * o.resonance)
                    } else {
                        format!(
                            "overdamped oscillator: damping {} >= 2 * resonance {}",
                            o.damping,
                            2.0 * o.resonance
                        )
                    },
                });
            }
        }
    }
    ValidationReport {
        model: model.name().into(),
        checks,
    }
}

/// A pole of `ε(ω) − 1` with its order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub location: Complex64,
    pub multiplicity: u32,
}

/// Poles of `ε(ω) − 1` as a rational function of ω.
pub fn poles(model: &DielectricModel) -> Result<Vec<Pole>> {
    model.check()?;
    let simple = |location| Pole {
        location,
        multiplicity: 1,
    };
    let mut out: Vec<Pole> = match model {
        DielectricModel::Drude { gamma, .. } => vec![
            simple(Complex64::new(0.0, 0.0)),
            simple(Complex64::new(0.0, -gamma)),
        ],
        DielectricModel::RegularizedDrude { gamma, theta, .. } => {
            if theta == gamma {
                vec![Pole {
                    location: Complex64::new(0.0, -gamma),
                    multiplicity: 2,
                }]
            } else {
                vec![
                    simple(Complex64::new(0.0, -theta)),
                    simple(Complex64::new(0.0, -gamma)),
                ]
            }
        }
        DielectricModel::Plasma { .. } => vec![Pole {
            location: Complex64::new(0.0, 0.0),
            multiplicity: 2,
        }],
        DielectricModel::NormalSkin { .. } => vec![simple(Complex64::new(0.0, 0.0))],
        DielectricModel::LorentzSum { oscillators } => oscillators
            .iter()
            .flat_map(|o| {
                let re = o.damped_frequency();
                let im = -0.5 * o.damping;
                [simple(Complex64::new(re, im)), simple(Complex64::new(-re, im))]
            })
            .collect(),
    };
    // coincident oscillator poles add their orders
    let mut merged: Vec<Pole> = Vec::with_capacity(out.len());
    for p in out.drain(..) {
        match merged.iter_mut().find(|q| q.location == p.location) {
            Some(q) => q.multiplicity += p.multiplicity,
            None => merged.push(p),
        }
    }
    Ok(merged)
}

/// `ε(ω)` with the default pole guard radius.
pub fn eval_epsilon(model: &DielectricModel, omega: Complex64) -> Result<Complex64> {
    eval_epsilon_guarded(model, omega, DEFAULT_GUARD_RADIUS)
}

/// `ε(ω)`, refusing to evaluate within `guard_radius` of a pole.
pub fn eval_epsilon_guarded(
    model: &DielectricModel,
    omega: Complex64,
    guard_radius: f64,
) -> Result<Complex64> {
    for p in poles(model)? {
        if (omega - p.location).norm() < guard_radius {
            return Err(Error::PoleEvaluation {
                omega,
                pole: p.location,
            });
        }
    }
    Ok(1.0 + susceptibility(model, omega))
}

/// `ε(ω) − 1` without validation or pole guard. Callers must have checked
/// the model and stay away from the poles.
pub(crate) fn susceptibility(model: &DielectricModel, omega: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    match model {
        DielectricModel::Drude { omega_p, gamma } => {
            -omega_p * omega_p / (omega * (omega + i * gamma))
        }
        DielectricModel::RegularizedDrude {
            omega_p,
            gamma,
            theta,
        } => -omega_p * omega_p / ((omega + i * theta) * (omega + i * gamma)),
        DielectricModel::Plasma { omega_p } => -omega_p * omega_p / (omega * omega),
        DielectricModel::NormalSkin { sigma0 } => i * (4.0 * PI * sigma0) / omega,
        DielectricModel::LorentzSum { oscillators } => oscillators
            .iter()
            .map(|o| {
                o.strength / (o.resonance * o.resonance - omega * omega - i * o.damping * omega)
            })
            .sum(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KramersKronigSettings {
    /// Upper integration limit; `None` means 200 × the model's largest frequency.
    pub cutoff: Option<f64>,
    pub rel_tol: f64,
}

impl Default for KramersKronigSettings {
    fn default() -> Self {
        Self {
            cutoff: None,
            rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub omega: f64,
    /// `Re ε(ω) − 1` from the closed form.
    pub re_susceptibility: f64,
    /// `(2/π) PV ∫_0^X x Im ε(x) / (x² − ω²) dx`.
    pub dispersion_integral: f64,
    /// `|difference| / |ε(ω) − 1|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KramersKronigReport {
    pub cutoff: f64,
    pub max_residual: f64,
    pub points: Vec<DispersionPoint>,
}

/// Compare `Re ε − 1` with the principal-value dispersion integral of
/// `Im ε` at every grid frequency.
///
/// Only models regular at `ω = 0` qualify; for the others the relation in
/// this form does not hold and [`Error::SingularAtZero`] is returned.
pub fn kramers_kronig_residual(
    model: &DielectricModel,
    grid: &[f64],
    settings: &KramersKronigSettings,
) -> Result<KramersKronigReport> {
    model.check()?;
    if model.singular_at_zero() {
        return Err(Error::SingularAtZero(model.name()));
    }
    let cutoff = settings
        .cutoff
        .unwrap_or(200.0 * model.max_frequency());
    let im_eps = |x: f64| susceptibility(model, Complex64::new(x, 0.0)).im;
    let features = feature_frequencies(model);
    let quad = QuadSettings::with_rel_tol(settings.rel_tol);

    let mut points = Vec::with_capacity(grid.len());
    let mut max_residual: f64 = 0.0;
    for &omega in grid {
        if !(omega > 0.0) || 2.0 * omega >= cutoff {
            return Err(Error::InvalidArgument(format!(
                "grid frequency {omega} must lie in (0, cutoff/2)"
            )));
        }
        // g(x) = x Im ε(x) / (x + ω); PV ∫ g(x)/(x − ω) dx
        let g = |x: f64| x * im_eps(x) / (x + omega);

        // symmetric part around the singular point: ∫_0^ω [g(ω+u) − g(ω−u)]/u du
        let mut near = vec![0.0, omega];
        for &f in &features {
            let u = (f - omega).abs();
            if u > 0.0 && u < omega {
                near.push(u);
            }
        }
        near.sort_by(f64::total_cmp);
        near.dedup();
        let scale = g(omega).abs().max(1e-300);
        let inner = integrate_partitioned(
            |u: f64| (g(omega + u) - g(omega - u)) / u,
            &near,
            &quad.with_abs_tol(settings.rel_tol * 1e-2 * scale),
        )?;

        let mut far = vec![2.0 * omega, cutoff];
        for &f in &features {
            for m in [1.0, 2.0, 10.0] {
                let x = f * m;
                if x > 2.0 * omega && x < cutoff {
                    far.push(x);
                }
            }
        }
        far.sort_by(f64::total_cmp);
        far.dedup();
        let outer = integrate_partitioned(
            |x: f64| g(x) / (x - omega),
            &far,
            &quad.with_abs_tol(settings.rel_tol * 1e-2 * scale),
        )?;

        let dispersion_integral = 2.0 / PI * (inner.value + outer.value);
        let chi = susceptibility(model, Complex64::new(omega, 0.0));
        let residual = (chi.re - dispersion_integral).abs() / chi.norm();
        max_residual = max_residual.max(residual);
        points.push(DispersionPoint {
            omega,
            re_susceptibility: chi.re,
            dispersion_integral,
            residual,
        });
    }
    Ok(KramersKronigReport {
        cutoff,
        max_residual,
        points,
    })
}

fn feature_frequencies(model: &DielectricModel) -> Vec<f64> {
    match model {
        DielectricModel::Drude { omega_p, gamma } => vec![*omega_p, *gamma],
        DielectricModel::RegularizedDrude {
            omega_p,
            gamma,
            theta,
        } => vec![*omega_p, *gamma, *theta],
        DielectricModel::Plasma { omega_p } => vec![*omega_p],
        DielectricModel::NormalSkin { sigma0 } => vec![4.0 * PI * sigma0],
        DielectricModel::LorentzSum { oscillators } => oscillators
            .iter()
            .flat_map(|o| {
                [
                    o.resonance - o.damping,
                    o.resonance,
                    o.resonance + o.damping,
                ]
            })
            .filter(|f| *f > 0.0)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn drude_at_unit_frequency() {
        let e = eval_epsilon(&DielectricModel::drude(1.0, 0.5), c(1.0, 0.0)).unwrap();
        assert!((e - c(0.2, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn plasma_zero_at_plasma_frequency() {
        let e = eval_epsilon(&DielectricModel::plasma(1.0), c(1.0, 0.0)).unwrap();
        assert_eq!(e, c(0.0, 0.0));
    }

    #[test]
    fn lorentz_static_limit() {
        let e = eval_epsilon(&DielectricModel::single_oscillator(1.0, 1.0, 0.1), c(0.0, 0.0)).unwrap();
        assert!((e - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pole_guard() {
        let m = DielectricModel::drude(1.0, 0.5);
        assert!(matches!(
            eval_epsilon(&m, c(0.0, 0.0)),
            Err(Error::PoleEvaluation { .. })
        ));
        assert!(matches!(
            eval_epsilon(&m, c(1e-13, 0.0)),
            Err(Error::PoleEvaluation { .. })
        ));
        assert!(eval_epsilon_guarded(&m, c(1e-13, 0.0), 1e-14).is_ok());
    }

    #[test]
    fn invalid_model_is_rejected() {
        assert!(matches!(
            eval_epsilon(&DielectricModel::drude(1.0, -0.5), c(1.0, 0.0)),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn drude_poles() {
        let p = poles(&DielectricModel::drude(1.0, 0.5)).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].location, c(0.0, 0.0));
        assert_eq!(p[1].location, c(0.0, -0.5));
    }

    #[test]
    fn regularized_drude_poles() {
        let p = poles(&DielectricModel::regularized_drude(1.0, 0.5, 0.1)).unwrap();
        let locs: Vec<_> = p.iter().map(|p| p.location).collect();
        assert_eq!(locs, vec![c(0.0, -0.1), c(0.0, -0.5)]);
        let p = poles(&DielectricModel::regularized_drude(1.0, 0.5, 0.5)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].multiplicity, 2);
    }

    #[test]
    fn plasma_double_pole() {
        let p = poles(&DielectricModel::plasma(1.0)).unwrap();
        assert_eq!(p, vec![Pole { location: c(0.0, 0.0), multiplicity: 2 }]);
    }

    #[test]
    fn lorentz_poles() {
        let p = poles(&DielectricModel::single_oscillator(1.0, 1.0, 0.1)).unwrap();
        assert_eq!(p.len(), 2);
        let re = (1.0_f64 - 0.0025).sqrt();
        assert!((re - 0.998_749_217_771_908_9).abs() < 1e-15);
        assert!((p[0].location - c(re, -0.05)).norm() < 1e-15);
        assert!((p[1].location - c(-re, -0.05)).norm() < 1e-15);
        // both are zeros of the denominator
        for pole in p {
            let w = pole.location;
            let d = 1.0 - w * w - c(0.0, 0.1) * w;
            assert!(d.norm() < 1e-15);
        }
    }

    #[test]
    fn validation_reports() {
        assert!(validate(&DielectricModel::drude(1.0, 0.5)).is_valid());
        let r = validate(&DielectricModel::single_oscillator(1.0, 1.0, 2.5));
        assert!(!r.is_valid());
        assert!(r.failures().any(|f| f.detail.contains("overdamped")));
        let r = validate(&DielectricModel::drude(1.0, -0.5));
        let failed: Vec<_> = r.failures().collect();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].invariant, "gamma > 0");
    }

    #[test]
    fn kk_rejects_conductors() {
        for m in [
            DielectricModel::drude(1.0, 0.5),
            DielectricModel::plasma(1.0),
            DielectricModel::normal_skin(0.1),
        ] {
            assert!(matches!(
                kramers_kronig_residual(&m, &[1.0], &KramersKronigSettings::default()),
                Err(Error::SingularAtZero(_))
            ));
        }
    }

    #[test]
    fn kk_lorentz_and_regularized_drude() {
        let grid: Vec<f64> = (0..30).map(|k| 0.1 + 2.9 * k as f64 / 29.0).collect();
        for m in [
            DielectricModel::single_oscillator(1.0, 1.0, 0.1),
            DielectricModel::regularized_drude(1.0, 0.5, 0.1),
        ] {
            let r = kramers_kronig_residual(&m, &grid, &KramersKronigSettings::default()).unwrap();
            assert_eq!(r.cutoff, 200.0);
            assert!(r.max_residual <= 1e-4, "{}: {}", m.name(), r.max_residual);
        }
    }

    #[test]
    fn json_form() {
        let m: DielectricModel =
            serde_json::from_str(r#"{"type": "drude", "omega_p": 1.0, "gamma": 0.5}"#).unwrap();
        assert_eq!(m, DielectricModel::drude(1.0, 0.5));
        let m = DielectricModel::single_oscillator(1.0, 1.0, 0.1);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"type":"lorentz_sum","oscillators":[{"strength":1.0,"resonance":1.0,"damping":0.1}]}"#
        );
        let m: DielectricModel =
            serde_json::from_str(r#"{"type": "normal_skin", "sigma0": 0.25}"#).unwrap();
        assert_eq!(m, DielectricModel::normal_skin(0.25));
    }
}
