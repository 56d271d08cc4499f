//! Scenario files: parsing and validation.
//!
//! Parsing walks the raw JSON by hand so that every error names the
//! offending field, e.g. `pulse.beta: required`.

use std::fmt;

use disperse_core::response_lab::GaussianPulse;
use disperse_core::spectral_models::DielectricModel;
use serde::Serialize;
use serde_json::{Map, Value};

pub const DEFAULT_QUAD_REL: f64 = 1e-9;
pub const QUAD_RELTOL_ENV: &str = "DISPERSE_QUAD_RELTOL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Experiment {
    #[serde(rename = "kernel")]
    Kernel,
    #[serde(rename = "recovery")]
    Recovery,
    #[serde(rename = "displacement")]
    Displacement,
    #[serde(rename = "consistency")]
    Consistency,
    #[serde(rename = "limit-probe")]
    LimitProbe,
    #[serde(rename = "kk")]
    KramersKronig,
    #[serde(rename = "specialfn-selftest")]
    SpecialFnSelftest,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Kernel,
        Experiment::Recovery,
        Experiment::Displacement,
        Experiment::Consistency,
        Experiment::LimitProbe,
        Experiment::KramersKronig,
        Experiment::SpecialFnSelftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Kernel => "kernel",
            Experiment::Recovery => "recovery",
            Experiment::Displacement => "displacement",
            Experiment::Consistency => "consistency",
            Experiment::LimitProbe => "limit-probe",
            Experiment::KramersKronig => "kk",
            Experiment::SpecialFnSelftest => "specialfn-selftest",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn names() -> String {
        Self::ALL.map(|e| e.name()).join(", ")
    }

    /// Help text for `disperse describe`.
    pub fn describe(self) -> &'static str {
        match self {
            Experiment::Kernel => {
                "kernel: sample the time-domain kernel of a model and check its half-line transform\n\
                 against eps(w) - 1.\n\
                 required: model, grids.tau {max, n} (optional min, default max/n)\n\
                 optional: grids.omega {min, max, n}  frequencies for the transform check\n\
                 optional: ladders.eta [..]           damping ladder for kernels that do not decay\n\
                 optional: tolerances.transform       (default 1e-6, relative)\n\
                 csv: tau,f"
            }
            Experiment::Recovery => {
                "recovery: recover the Drude kernel by inverting a regularized permittivity and\n\
                 extrapolating the regularization to zero; compared with the contour oracle.\n\
                 required: model (drude), grids.tau {max, n} (optional min, default max/n)\n\
                 optional: ladders.theta [..]   decreasing theta ladder, at least 3 rungs\n\
                 optional: ladders.eta [..]     use the Abel damping ladder instead (when theta is absent)\n\
                 optional: tolerances.recovery  (default 1e-6, relative)\n\
                 csv: tau,f_numeric,f_oracle,abs_err"
            }
            Experiment::Displacement => {
                "displacement: displacement response to a Gaussian pulse on a time grid, plus the\n\
                 values at the finite horizon +-T* against the exact limits.\n\
                 required: model, pulse {E0, beta}, grids.t {min, max, n}\n\
                 optional: tolerances.asymptote  (default 1e-5, absolute)\n\
                 csv: t,E,D_conv,D_spec,D_closed,flags"
            }
            Experiment::Consistency => {
                "consistency: run the convolution, spectral and closed-form paths on one grid and\n\
                 compare them; for models with a 1/w pole the spectral path is checked for its\n\
                 constant offset instead.\n\
                 required: model, pulse {E0, beta}, grids.t {min, max, n}\n\
                 optional: tolerances.path_agreement  (default 1e-6, relative to max |D|)\n\
                 optional: tolerances.offset          (default 1e-4, relative to the offset)\n\
                 csv: t,E,D_conv,D_spec,D_closed,flags"
            }
            Experiment::LimitProbe => {
                "limit-probe: D(+-T) of the theta-regularized Drude model over a grid of theta and\n\
                 horizons T, showing that the limits theta -> 0 and T -> infinity do not commute.\n\
                 required: model (drude or regularized_drude), pulse {E0, beta}\n\
                 required: ladders.theta [..]  regularization strengths, positive\n\
                 required: ladders.T [..]      horizons, positive and increasing\n\
                 optional: tolerances.asymptote  (default 1e-5, absolute)\n\
                 csv: theta,T,D_plus,D_minus  (theta = 0 rows hold the bare Drude values)"
            }
            Experiment::KramersKronig => {
                "kk: compare Re eps - 1 with the dispersion integral of Im eps.\n\
                 required: model (regular at zero frequency), grids.omega {min, max, n}\n\
                 optional: tolerances.kk  (default 1e-4, relative)\n\
                 csv: omega,re_susceptibility,dispersion_integral,residual"
            }
            Experiment::SpecialFnSelftest => {
                "specialfn-selftest: erf/erfc identities, finite-difference derivative, Faddeeva\n\
                 function against quadrature, exp(B^2) erfc(B) on [0, 1e4].\n\
                 required: nothing beyond id and experiment\n\
                 csv: x,erf,erfc,erfcx"
            }
        }
    }
}

/// Validation failure pointing at one field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }

    fn required(field: &str) -> Self {
        Self::new(field, "required")
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

type Parsed<T> = Result<T, FieldError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Span {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Grids {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Span>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<Span>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<Span>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Ladders {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizons: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub quad_rel: f64,
    pub path_agreement: f64,
    pub asymptote: f64,
    pub recovery: f64,
    pub transform: f64,
    pub kk: f64,
    pub offset: f64,
}

impl Tolerances {
    fn defaults(quad_rel: f64) -> Self {
        Self {
            quad_rel,
            path_agreement: 1e-6,
            asymptote: 1e-5,
            recovery: 1e-6,
            transform: 1e-6,
            kk: 1e-4,
            offset: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub experiment: Experiment,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<DielectricModel>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "pulse_as_written")]
    pub pulse: Option<GaussianPulse>,
    pub grids: Grids,
    pub ladders: Ladders,
    pub tolerances: Tolerances,
}

impl Scenario {
    /// Bare scenario for the special-function self-test.
    pub fn selftest(quad_rel: f64) -> Self {
        Self {
            id: "specialfn-selftest".into(),
            description: None,
            experiment: Experiment::SpecialFnSelftest,
            model: None,
            pulse: None,
            grids: Grids::default(),
            ladders: Ladders::default(),
            tolerances: Tolerances::defaults(quad_rel),
        }
    }

    pub fn model(&self) -> &DielectricModel {
        self.model.as_ref().expect("validated scenario has a model")
    }

    pub fn pulse(&self) -> &GaussianPulse {
        self.pulse.as_ref().expect("validated scenario has a pulse")
    }

    /// `quad_rel_default` applies when the file gives no `tolerances.quad_rel`.
    pub fn from_json(text: &str, quad_rel_default: f64) -> Parsed<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| FieldError::new("<document>", format!("invalid JSON: {e}")))?;
        Self::from_value(&value, quad_rel_default)
    }

    pub fn from_value(value: &Value, quad_rel_default: f64) -> Parsed<Self> {
        let root = object(value, "<document>")?;
        reject_unknown(
            root,
            "",
            &["id", "description", "experiment", "model", "pulse", "grids", "ladders", "tolerances"],
        )?;

        let id = string(root.get("id"), "id")?;
        if id.is_empty()
            || !id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
            || id.starts_with('.')
        {
            return Err(FieldError::new(
                "id",
                "must be non-empty and use only letters, digits, '_', '-' or '.'",
            ));
        }
        let description = match root.get("description") {
            None => None,
            v => Some(string(v, "description")?),
        };
        let name = string(root.get("experiment"), "experiment")?;
        let experiment = Experiment::from_name(&name).ok_or_else(|| {
            FieldError::new(
                "experiment",
                format!("unknown '{name}' (expected one of: {})", Experiment::names()),
            )
        })?;

        let model = root.get("model").map(parse_model).transpose()?;
        let pulse = root.get("pulse").map(parse_pulse).transpose()?;
        let grids = root.get("grids").map(parse_grids).transpose()?.unwrap_or_default();
        let ladders = root
            .get("ladders")
            .map(parse_ladders)
            .transpose()?
            .unwrap_or_default();
        let tolerances = parse_tolerances(root.get("tolerances"), quad_rel_default)?;

        let scenario = Self {
            id,
            description,
            experiment,
            model,
            pulse,
            grids,
            ladders,
            tolerances,
        };
        scenario.check_requirements()?;
        Ok(scenario)
    }

    fn check_requirements(&self) -> Parsed<()> {
        use Experiment::*;
        let needs_model = !matches!(self.experiment, SpecialFnSelftest);
        let needs_pulse = matches!(self.experiment, Displacement | Consistency | LimitProbe);
        if needs_model && self.model.is_none() {
            return Err(FieldError::required("model"));
        }
        if needs_pulse && self.pulse.is_none() {
            return Err(FieldError::required("pulse"));
        }
        match self.experiment {
            Kernel | Recovery => {
                if self.grids.tau.is_none() {
                    return Err(FieldError::required("grids.tau"));
                }
            }
            Displacement | Consistency => {
                if self.grids.t.is_none() {
                    return Err(FieldError::required("grids.t"));
                }
            }
            KramersKronig => {
                if self.grids.omega.is_none() {
                    return Err(FieldError::required("grids.omega"));
                }
                if self.model().singular_at_zero() {
                    return Err(FieldError::new(
                        "model",
                        format!("kk needs a model regular at zero frequency, got {}", self.model().name()),
                    ));
                }
            }
            LimitProbe => {
                if self.ladders.theta.is_none() {
                    return Err(FieldError::required("ladders.theta"));
                }
                let Some(horizons) = &self.ladders.horizons else {
                    return Err(FieldError::required("ladders.T"));
                };
                if horizons.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(FieldError::new("ladders.T", "must be increasing"));
                }
            }
            SpecialFnSelftest => {}
        }
        match self.experiment {
            Recovery => {
                if !matches!(self.model(), DielectricModel::Drude { .. }) {
                    return Err(FieldError::new(
                        "model",
                        format!("recovery needs a drude model, got {}", self.model().name()),
                    ));
                }
                let ladder = match (&self.ladders.theta, &self.ladders.eta) {
                    (Some(l), _) => Some(("ladders.theta", l)),
                    (None, Some(l)) => Some(("ladders.eta", l)),
                    (None, None) => None,
                };
                if let Some((field, l)) = ladder {
                    if l.len() < 3 {
                        return Err(FieldError::new(field, "needs at least 3 rungs"));
                    }
                    if l.windows(2).any(|w| w[1] >= w[0]) {
                        return Err(FieldError::new(field, "must be strictly decreasing"));
                    }
                }
            }
            LimitProbe => {
                if !matches!(
                    self.model(),
                    DielectricModel::Drude { .. } | DielectricModel::RegularizedDrude { .. }
                ) {
                    return Err(FieldError::new(
                        "model",
                        format!("limit-probe needs a drude model, got {}", self.model().name()),
                    ));
                }
            }
            Kernel => {
                if let Some(l) = &self.ladders.eta {
                    if l.len() < 3 || l.windows(2).any(|w| w[1] >= w[0]) {
                        return Err(FieldError::new(
                            "ladders.eta",
                            "needs at least 3 strictly decreasing rungs",
                        ));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Echo the pulse with the field names of the scenario format.
fn pulse_as_written<S: serde::Serializer>(
    pulse: &Option<GaussianPulse>,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Written {
        #[serde(rename = "E0")]
        amplitude: f64,
        beta: f64,
    }
    pulse
        .map(|p| Written {
            amplitude: p.amplitude,
            beta: p.beta,
        })
        .serialize(serializer)
}

/// Quadrature tolerance used when a scenario does not set one: the
/// environment override if present, else the built-in default.
pub fn quad_rel_default() -> Result<f64, FieldError> {
    match std::env::var(QUAD_RELTOL_ENV) {
        Err(_) => Ok(DEFAULT_QUAD_REL),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
            _ => Err(FieldError::new(
                QUAD_RELTOL_ENV,
                format!("must be a number in (0, 1), got '{s}'"),
            )),
        },
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn object<'a>(v: &'a Value, field: &str) -> Parsed<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| FieldError::new(field, "must be an object"))
}

fn reject_unknown(map: &Map<String, Value>, prefix: &str, allowed: &[&str]) -> Parsed<()> {
    match map.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(FieldError::new(
            join(prefix, k),
            format!("unknown field (expected one of: {})", allowed.join(", ")),
        )),
        None => Ok(()),
    }
}

fn string(v: Option<&Value>, field: &str) -> Parsed<String> {
    match v {
        None => Err(FieldError::required(field)),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(FieldError::new(field, "must be a string")),
    }
}

fn number(v: Option<&Value>, field: &str) -> Parsed<f64> {
    match v {
        None => Err(FieldError::required(field)),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| FieldError::new(field, "must be a finite number")),
    }
}

fn positive(v: Option<&Value>, field: &str) -> Parsed<f64> {
    let x = number(v, field)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(FieldError::new(field, format!("must be positive, got {x}")))
    }
}

fn parse_model(v: &Value) -> Parsed<DielectricModel> {
    let map = object(v, "model")?;
    string(map.get("type"), "model.type")?;
    let model: DielectricModel = serde_json::from_value(v.clone())
        .map_err(|e| FieldError::new("model", e.to_string()))?;
    model
        .check()
        .map_err(|e| FieldError::new("model", e.to_string()))?;
    Ok(model)
}

fn parse_pulse(v: &Value) -> Parsed<GaussianPulse> {
    let map = object(v, "pulse")?;
    reject_unknown(map, "pulse", &["E0", "beta"])?;
    let amplitude = number(map.get("E0"), "pulse.E0")?;
    let beta = positive(map.get("beta"), "pulse.beta")?;
    GaussianPulse::new(amplitude, beta).map_err(|e| FieldError::new("pulse", e.to_string()))
}

fn parse_count(v: Option<&Value>, field: &str) -> Parsed<usize> {
    let n = v.ok_or_else(|| FieldError::required(field))?;
    match n.as_u64() {
        Some(n) if n >= 2 => Ok(n as usize),
        _ => Err(FieldError::new(field, "must be an integer >= 2")),
    }
}

fn parse_span(v: &Value, field: &str) -> Parsed<Span> {
    let map = object(v, field)?;
    reject_unknown(map, field, &["min", "max", "n"])?;
    let min = number(map.get("min"), &join(field, "min"))?;
    let max = number(map.get("max"), &join(field, "max"))?;
    let n = parse_count(map.get("n"), &join(field, "n"))?;
    if min >= max {
        return Err(FieldError::new(field, format!("min ({min}) must be < max ({max})")));
    }
    Ok(Span { min, max, n })
}

/// `tau` grids may omit `min`; it then defaults to `max / n`.
fn parse_tau(v: &Value) -> Parsed<Span> {
    let map = object(v, "grids.tau")?;
    reject_unknown(map, "grids.tau", &["min", "max", "n"])?;
    let max = positive(map.get("max"), "grids.tau.max")?;
    let n = parse_count(map.get("n"), "grids.tau.n")?;
    let min = match map.get("min") {
        None => max / n as f64,
        v => number(v, "grids.tau.min")?,
    };
    if min < 0.0 {
        return Err(FieldError::new("grids.tau.min", "must be >= 0"));
    }
    if min >= max {
        return Err(FieldError::new("grids.tau", format!("min ({min}) must be < max ({max})")));
    }
    Ok(Span { min, max, n })
}

fn parse_grids(v: &Value) -> Parsed<Grids> {
    let map = object(v, "grids")?;
    reject_unknown(map, "grids", &["t", "tau", "omega"])?;
    let omega = map
        .get("omega")
        .map(|v| parse_span(v, "grids.omega"))
        .transpose()?;
    if let Some(s) = omega {
        if s.min <= 0.0 {
            return Err(FieldError::new("grids.omega.min", "must be positive"));
        }
    }
    Ok(Grids {
        t: map.get("t").map(|v| parse_span(v, "grids.t")).transpose()?,
        tau: map.get("tau").map(parse_tau).transpose()?,
        omega,
    })
}

fn parse_ladder(v: &Value, field: &str) -> Parsed<Vec<f64>> {
    let items = v
        .as_array()
        .ok_or_else(|| FieldError::new(field, "must be a list of numbers"))?;
    if items.is_empty() {
        return Err(FieldError::new(field, "must not be empty"));
    }
    items
        .iter()
        .enumerate()
        .map(|(k, x)| positive(Some(x), &format!("{field}[{k}]")))
        .collect()
}

fn parse_ladders(v: &Value) -> Parsed<Ladders> {
    let map = object(v, "ladders")?;
    reject_unknown(map, "ladders", &["theta", "eta", "T"])?;
    let get = |key: &str| {
        map.get(key)
            .map(|v| parse_ladder(v, &join("ladders", key)))
            .transpose()
    };
    Ok(Ladders {
        theta: get("theta")?,
        eta: get("eta")?,
        horizons: get("T")?,
    })
}

fn parse_tolerances(v: Option<&Value>, quad_rel_default: f64) -> Parsed<Tolerances> {
    let mut tol = Tolerances::defaults(quad_rel_default);
    let Some(v) = v else {
        return Ok(tol);
    };
    let map = object(v, "tolerances")?;
    let keys = [
        "quad_rel",
        "path_agreement",
        "asymptote",
        "recovery",
        "transform",
        "kk",
        "offset",
    ];
    reject_unknown(map, "tolerances", &keys)?;
    for (key, value) in map {
        let x = positive(Some(value), &join("tolerances", key))?;
        match key.as_str() {
            "quad_rel" => tol.quad_rel = x,
            "path_agreement" => tol.path_agreement = x,
            "asymptote" => tol.asymptote = x,
            "recovery" => tol.recovery = x,
            "transform" => tol.transform = x,
            "kk" => tol.kk = x,
            _ => tol.offset = x,
        }
    }
    Ok(tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        json!({
            "id": "s1",
            "experiment": "displacement",
            "model": {"type": "drude", "omega_p": 1.0, "gamma": 0.5},
            "pulse": {"E0": 1.0, "beta": 0.2},
            "grids": {"t": {"min": -10.0, "max": 10.0, "n": 21}}
        })
    }

    fn error(v: Value) -> String {
        Scenario::from_value(&v, DEFAULT_QUAD_REL).unwrap_err().to_string()
    }

    #[test]
    fn parses_minimal_displacement() {
        let s = Scenario::from_value(&base(), DEFAULT_QUAD_REL).unwrap();
        assert_eq!(s.experiment, Experiment::Displacement);
        assert_eq!(s.pulse().beta, 0.2);
        assert_eq!(s.grids.t.unwrap().n, 21);
        assert_eq!(s.tolerances.quad_rel, DEFAULT_QUAD_REL);
    }

    #[test]
    fn missing_fields_are_named() {
        let mut v = base();
        v["pulse"].as_object_mut().unwrap().remove("beta");
        assert_eq!(error(v), "pulse.beta: required");

        let mut v = base();
        v.as_object_mut().unwrap().remove("pulse");
        assert_eq!(error(v), "pulse: required");

        let mut v = base();
        v["grids"]["t"]["n"] = json!(1);
        assert_eq!(error(v), "grids.t.n: must be an integer >= 2");

        let mut v = base();
        v["grids"]["t"]["min"] = json!(20.0);
        assert!(error(v).starts_with("grids.t: min"));

        let mut v = base();
        v["experiment"] = json!("fourier");
        assert!(error(v).starts_with("experiment: unknown 'fourier'"));

        let mut v = base();
        v["pulse"]["beta"] = json!(-1.0);
        assert!(error(v).starts_with("pulse.beta: must be positive"));

        let mut v = base();
        v["grids"]["x"] = json!({});
        assert!(error(v).starts_with("grids.x: unknown field"));
    }

    #[test]
    fn model_errors_point_at_model() {
        let mut v = base();
        v["model"] = json!({"type": "drude", "omega_p": 1.0});
        assert!(error(v).starts_with("model: "));

        let mut v = base();
        v["model"] = json!({"type": "drude", "omega_p": 1.0, "gamma": -0.5});
        assert!(error(v).starts_with("model: "));
    }

    #[test]
    fn experiment_requirements() {
        let mut v = base();
        v["experiment"] = json!("kk");
        v["grids"]["omega"] = json!({"min": 0.1, "max": 3.0, "n": 10});
        assert!(error(v).starts_with("model: kk needs a model regular"));

        let mut v = base();
        v["experiment"] = json!("limit-probe");
        v["ladders"] = json!({"theta": [0.1]});
        assert_eq!(error(v), "ladders.T: required");

        let mut v = base();
        v["experiment"] = json!("recovery");
        v["grids"]["tau"] = json!({"max": 10.0, "n": 10});
        v["ladders"] = json!({"theta": [0.1, 0.05]});
        assert_eq!(error(v), "ladders.theta: needs at least 3 rungs");
    }

    #[test]
    fn tau_grid_defaults_min() {
        let mut v = base();
        v["experiment"] = json!("kernel");
        v["grids"]["tau"] = json!({"max": 10.0, "n": 100});
        let s = Scenario::from_value(&v, DEFAULT_QUAD_REL).unwrap();
        let tau = s.grids.tau.unwrap();
        assert_eq!((tau.min, tau.max, tau.n), (0.1, 10.0, 100));
    }

    #[test]
    fn echo_parses_back() {
        let s = Scenario::from_value(&base(), DEFAULT_QUAD_REL).unwrap();
        let echoed = serde_json::to_value(&s).unwrap();
        assert_eq!(echoed["pulse"], json!({"E0": 1.0, "beta": 0.2}));
        assert_eq!(Scenario::from_value(&echoed, 1e-3).unwrap(), s);
    }

    #[test]
    fn tolerance_overrides() {
        let mut v = base();
        v["tolerances"] = json!({"quad_rel": 1e-11, "path_agreement": 1e-8});
        let s = Scenario::from_value(&v, 1e-6).unwrap();
        assert_eq!(s.tolerances.quad_rel, 1e-11);
        assert_eq!(s.tolerances.path_agreement, 1e-8);
        let s = Scenario::from_value(&base(), 1e-6).unwrap();
        assert_eq!(s.tolerances.quad_rel, 1e-6);
    }
}
