//! Experiment runners. Each turns a validated scenario into a CSV body, a
//! list of tolerance gates and an experiment-specific JSON result.

use std::f64::consts::PI;
use std::fmt::Write as _;

use disperse_core::quadrature::QuadSettings;
use disperse_core::response_lab::{
    asymptotic_limits, consistency_report, limit_order_probe, ConsistencyReport, PathKind,
    Quantity, ReportSettings,
};
use disperse_core::special_functions::reference::faddeeva_by_quadrature;
use disperse_core::special_functions::{erf_real, erfc_real, erfcx_real, exp_sq_erfc, faddeeva_w};
use disperse_core::spectral_models::{
    eval_epsilon, kramers_kronig_residual, KramersKronigSettings,
};
use disperse_core::temporal_kernels::kernel_for;
use disperse_core::transform_engine::{
    abel_halfline_cosine, abel_halfline_sine, abel_kernel_recovery, abel_limit,
    theta_regularized_kernel_recovery, HalfLine, RegularizationLadder, TimeGrid,
};
use disperse_core::Result;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::scenario::{Experiment, Scenario, Span};

/// One pass/fail check of a computed quantity against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    /// `None` for qualitative checks or when the quantity could not be computed.
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Gate {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value: Some(value),
            tolerance: Some(tolerance),
            passed: value.is_finite() && value <= tolerance,
        }
    }

    fn holds(name: &str, passed: bool) -> Self {
        Self {
            name: name.into(),
            value: None,
            tolerance: None,
            passed,
        }
    }

    fn missing(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value: None,
            tolerance: Some(tolerance),
            passed: false,
        }
    }
}

pub struct Artifacts {
    pub csv: String,
    pub gates: Vec<Gate>,
    pub result: Value,
}

pub fn run(s: &Scenario) -> Result<Artifacts> {
    match s.experiment {
        Experiment::Kernel => kernel(s),
        Experiment::Recovery => recovery(s),
        Experiment::Displacement => displacement(s),
        Experiment::Consistency => consistency(s),
        Experiment::LimitProbe => limit_probe(s),
        Experiment::KramersKronig => kk(s),
        Experiment::SpecialFnSelftest => Ok(specialfn_selftest()),
    }
}

/// Seventeen significant digits, `.` decimal separator.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn grid(span: Span) -> Result<TimeGrid> {
    TimeGrid::new(span.min, span.max, span.n)
}

fn quad(s: &Scenario) -> QuadSettings {
    QuadSettings::with_rel_tol(s.tolerances.quad_rel)
}

/// Build a ladder of the order its length allows.
fn ladder(values: &[f64]) -> Result<RegularizationLadder> {
    RegularizationLadder::new(values.to_vec(), values.len().saturating_sub(1).max(1))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn kernel(s: &Scenario) -> Result<Artifacts> {
    let model = s.model();
    let k = kernel_for(model)?;
    let taus = grid(s.grids.tau.expect("validated"))?.points();
    let mut csv = String::from("tau,f\n");
    for &tau in &taus {
        writeln!(csv, "{},{}", num(tau), num(k.eval(tau))).unwrap();
    }

    let mut gates = Vec::new();
    let mut transforms = Vec::new();
    if let Some(span) = s.grids.omega {
        let settings = quad(s);
        let abel = match &s.ladders.eta {
            Some(l) => ladder(l)?,
            None => RegularizationLadder::abel_default(),
        };
        let mut worst: f64 = 0.0;
        for omega in grid(span)?.points() {
            let chi = eval_epsilon(model, Complex64::new(omega, 0.0))? - 1.0;
            let got = if k.decay_rate().is_some() {
                Complex64::new(
                    abel_halfline_cosine(&k, omega, 0.0, &settings)?,
                    abel_halfline_sine(&k, omega, 0.0, &settings)?,
                )
            } else {
                Complex64::new(
                    abel_limit(&k, omega, HalfLine::Cosine, &abel, &settings)?.limit.estimate,
                    abel_limit(&k, omega, HalfLine::Sine, &abel, &settings)?.limit.estimate,
                )
            };
            let rel = (got - chi).norm() / chi.norm();
            worst = worst.max(rel);
            transforms.push(json!({
                "omega": omega,
                "transform": [got.re, got.im],
                "susceptibility": [chi.re, chi.im],
                "rel_err": rel,
            }));
        }
        gates.push(Gate::at_most("transform_rel_err", worst, s.tolerances.transform));
    }

    Ok(Artifacts {
        csv,
        gates,
        result: json!({
            "kernel": to_value(&k),
            "delta_weight": k.delta_weight(),
            "decay_rate": k.decay_rate(),
            "transforms": transforms,
        }),
    })
}

fn recovery(s: &Scenario) -> Result<Artifacts> {
    let model = s.model();
    let taus = s.grids.tau.expect("validated");
    let times = TimeGrid::new(taus.min, taus.max, taus.n)?;
    let settings = quad(s);
    let r = match (&s.ladders.theta, &s.ladders.eta) {
        (Some(l), _) => theta_regularized_kernel_recovery(model, &times, &ladder(l)?, &settings)?,
        (None, Some(l)) => abel_kernel_recovery(model, &times, &ladder(l)?, &settings)?,
        (None, None) => theta_regularized_kernel_recovery(
            model,
            &times,
            &RegularizationLadder::theta_default(),
            &settings,
        )?,
    };
    let mut csv = String::from("tau,f_numeric,f_oracle,abs_err\n");
    for p in &r.points {
        writeln!(
            csv,
            "{},{},{},{}",
            num(p.tau),
            num(p.numeric),
            num(p.oracle),
            num(p.abs_err)
        )
        .unwrap();
    }
    let gates = vec![Gate::at_most(
        "recovery_rel_err",
        r.max_relative_error(),
        s.tolerances.recovery,
    )];
    Ok(Artifacts {
        csv,
        gates,
        result: to_value(&r),
    })
}

fn curves_csv(r: &ConsistencyReport) -> String {
    let column = |kind: PathKind| r.curve(kind).and_then(|c| c.values.as_ref());
    let conv = column(PathKind::Convolution);
    let spec = column(PathKind::Spectral);
    let closed = column(PathKind::ClosedForm);

    let mut flags = Vec::new();
    if r.curve(PathKind::Spectral).and_then(|c| c.quantity) == Some(Quantity::DTilde) {
        flags.push("spec_is_d_tilde");
    }
    for (kind, name) in [
        (PathKind::Convolution, "conv_failed"),
        (PathKind::Spectral, "spec_failed"),
        (PathKind::ClosedForm, "closed_failed"),
    ] {
        if r.curve(kind).is_some_and(|c| c.failure.is_some()) {
            flags.push(name);
        }
    }
    let flags = flags.join(";");

    let mut csv = String::from("t,E,D_conv,D_spec,D_closed,flags\n");
    for (k, (&t, &e)) in r.times.iter().zip(&r.field).enumerate() {
        let at = |c: Option<&Vec<f64>>| opt(c.map(|v| v[k]));
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            num(t),
            num(e),
            at(conv),
            at(spec),
            at(closed),
            flags
        )
        .unwrap();
    }
    csv
}

fn report_for(s: &Scenario) -> Result<ConsistencyReport> {
    let settings = ReportSettings {
        quadrature: quad(s),
        ..ReportSettings::default()
    };
    consistency_report(
        &s.id,
        s.model(),
        s.pulse(),
        &grid(s.grids.t.expect("validated"))?,
        &settings,
    )
}

fn displacement(s: &Scenario) -> Result<Artifacts> {
    let r = report_for(s)?;
    let tol = s.tolerances.asymptote;
    // D(-T*) vanishes for every model; D(+T*) only has a finite target
    // when the model has finite limits.
    let limits = asymptotic_limits(s.model(), s.pulse()).ok();
    let targets = [
        ("d_plus_at_horizon", r.horizon.d_plus, limits.map(|l| l.d_plus)),
        ("d_minus_at_horizon", r.horizon.d_minus, Some(limits.map_or(0.0, |l| l.d_minus))),
    ];
    let gates = targets
        .into_iter()
        .filter_map(|(name, got, want)| {
            let want = want?;
            Some(match got {
                Some(v) => Gate::at_most(name, (v - want).abs(), tol),
                None => Gate::missing(name, tol),
            })
        })
        .collect();
    Ok(Artifacts {
        csv: curves_csv(&r),
        gates,
        result: to_value(&r),
    })
}

fn consistency(s: &Scenario) -> Result<Artifacts> {
    let r = report_for(s)?;
    let tol = s.tolerances.path_agreement;
    let mut gates = Vec::new();
    for d in &r.deviations {
        let name = format!("{}_vs_{}", d.first.label(), d.second.label());
        gates.push(Gate::at_most(&name, d.max_abs / r.scale.max(f64::MIN_POSITIVE), tol));
    }
    for kind in [PathKind::Convolution, PathKind::Spectral, PathKind::ClosedForm] {
        if let Some(reason) = r.curve(kind).and_then(|c| c.failure.as_ref()) {
            gates.push(Gate::holds(&format!("{}: {reason}", kind.label()), false));
        }
    }
    if let Some(o) = &r.offset {
        let scale = o.expected.abs().max(f64::MIN_POSITIVE);
        gates.push(Gate::at_most(
            "offset_mean",
            (o.mean - o.expected).abs() / scale,
            s.tolerances.offset,
        ));
        gates.push(Gate::at_most("offset_spread", o.std_dev / scale, s.tolerances.offset));
    }
    if gates.is_empty() {
        gates.push(Gate::holds("at_least_two_paths", false));
    }
    Ok(Artifacts {
        csv: curves_csv(&r),
        gates,
        result: to_value(&r),
    })
}

fn limit_probe(s: &Scenario) -> Result<Artifacts> {
    let thetas = s.ladders.theta.as_deref().expect("validated");
    let horizons = s.ladders.horizons.as_deref().expect("validated");
    let probe = limit_order_probe(s.model(), s.pulse(), thetas, horizons)?;

    let mut csv = String::from("theta,T,D_plus,D_minus\n");
    for (j, &t) in probe.horizons.iter().enumerate() {
        writeln!(csv, "{},{},{},{}", num(0.0), num(t), num(probe.theta_zero[j]), num(0.0)).unwrap();
    }
    for (i, &theta) in probe.thetas.iter().enumerate() {
        for (j, &t) in probe.horizons.iter().enumerate() {
            writeln!(
                csv,
                "{},{},{},{}",
                num(theta),
                num(t),
                num(probe.plus[i][j]),
                num(probe.minus[i][j])
            )
            .unwrap();
        }
    }
    let gap = probe.theta_first - probe.horizon_first;
    let gates = vec![
        Gate::holds("rows_decay", probe.rows_decay),
        Gate::holds("columns_converge", probe.columns_converge),
        Gate::at_most(
            "iterated_limit_gap",
            (gap - probe.residual).abs(),
            s.tolerances.asymptote,
        ),
    ];
    Ok(Artifacts {
        csv,
        gates,
        result: to_value(&probe),
    })
}

fn kk(s: &Scenario) -> Result<Artifacts> {
    let omegas = grid(s.grids.omega.expect("validated"))?.points();
    let report = kramers_kronig_residual(s.model(), &omegas, &KramersKronigSettings::default())?;
    let mut csv = String::from("omega,re_susceptibility,dispersion_integral,residual\n");
    for p in &report.points {
        writeln!(
            csv,
            "{},{},{},{}",
            num(p.omega),
            num(p.re_susceptibility),
            num(p.dispersion_integral),
            num(p.residual)
        )
        .unwrap();
    }
    let gates = vec![Gate::at_most("kk_residual", report.max_residual, s.tolerances.kk)];
    Ok(Artifacts {
        csv,
        gates,
        result: to_value(&report),
    })
}

/// Fifty points of the two-dimensional golden-ratio sequence on `[-3, 3]²`.
fn probe_points() -> Vec<Complex64> {
    let (a1, a2) = (0.754_877_666_246_692_7, 0.569_840_290_998_053_2);
    (1..=50)
        .map(|k| {
            let k = k as f64;
            Complex64::new(6.0 * (0.5 + a1 * k).fract() - 3.0, 6.0 * (0.5 + a2 * k).fract() - 3.0)
        })
        .collect()
}

/// `e^{x²} erfc(x)` from its asymptotic series, for large real x.
fn scaled_erfc_asymptotic(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..30 {
        let next = -term * (2 * n - 1) as f64 / (2.0 * x * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
    }
    sum / (x * PI.sqrt())
}

fn specialfn_selftest() -> Artifacts {
    let mut identity: f64 = 0.0;
    let mut odd: f64 = 0.0;
    for j in 0..10_001 {
        let x = -30.0 + 60.0 * j as f64 / 10_000.0;
        identity = identity.max((erf_real(x) + erfc_real(x) - 1.0).abs());
        odd = odd.max((erf_real(-x) + erf_real(x)).abs());
    }

    let h = 1e-5;
    let mut derivative: f64 = 0.0;
    for j in 0..=600 {
        let x = -3.0 + 0.01 * j as f64;
        let fd = (erf_real(x + h) - erf_real(x - h)) / (2.0 * h);
        derivative = derivative.max((fd - 2.0 * (-x * x).exp() / PI.sqrt()).abs());
    }

    let faddeeva = probe_points()
        .into_iter()
        .map(|z| {
            let r = faddeeva_by_quadrature(z);
            (faddeeva_w(z) - r).norm() / r.norm()
        })
        .fold(0.0, f64::max);

    let mut exp_sq: f64 = 0.0;
    let mut finite = true;
    for j in 0..=400 {
        let b = 1e4 * (j as f64 / 400.0).powi(3);
        let reference = if b < 15.0 {
            (b * b).exp() * erfc_real(b)
        } else {
            scaled_erfc_asymptotic(b)
        };
        match exp_sq_erfc(Complex64::new(b, 0.0)) {
            Ok(v) => exp_sq = exp_sq.max((v.re - reference).abs() / reference),
            Err(_) => finite = false,
        }
        for im in [-50.0, -1.0, 1.0, 50.0] {
            finite &= exp_sq_erfc(Complex64::new(b, im)).is_ok_and(|v| v.is_finite());
        }
    }

    let gates = vec![
        Gate::at_most("erf_plus_erfc", identity, f64::EPSILON),
        Gate::at_most("erf_odd", odd, 0.0),
        Gate::at_most("erf_derivative", derivative, 1e-6),
        Gate::at_most("faddeeva_vs_quadrature", faddeeva, 1e-10),
        Gate::at_most("exp_sq_erfc_real_axis", exp_sq, 1e-12),
        Gate::holds("exp_sq_erfc_finite", finite),
    ];

    let mut csv = String::from("x,erf,erfc,erfcx\n");
    for j in 0..=200 {
        let x = -5.0 + 0.05 * j as f64;
        writeln!(
            csv,
            "{},{},{},{}",
            num(x),
            num(erf_real(x)),
            num(erfc_real(x)),
            num(erfcx_real(x))
        )
        .unwrap();
    }
    Artifacts {
        csv,
        gates,
        result: json!({ "faddeeva_points": probe_points().len() }),
    }
}
