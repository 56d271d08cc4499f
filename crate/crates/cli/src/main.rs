//! `disperse`: batch runner for displacement-response scenarios.

mod experiments;
mod scenario;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use serde::Serialize;

use experiments::Gate;
use scenario::{quad_rel_default, Experiment, Scenario};

/// Scenario files shipped with the tool, as (file name, contents).
const BUNDLED: &[(&str, &str)] = &[
    ("drude_kernel.json", include_str!("../scenarios/drude_kernel.json")),
    ("lorentz_kernel.json", include_str!("../scenarios/lorentz_kernel.json")),
    ("drude_recovery.json", include_str!("../scenarios/drude_recovery.json")),
    ("drude_residual.json", include_str!("../scenarios/drude_residual.json")),
    ("drude_spectral_offset.json", include_str!("../scenarios/drude_spectral_offset.json")),
    ("theta_consistency.json", include_str!("../scenarios/theta_consistency.json")),
    ("lorentz_consistency.json", include_str!("../scenarios/lorentz_consistency.json")),
    ("drude_limit_probe.json", include_str!("../scenarios/drude_limit_probe.json")),
    ("lorentz_kk.json", include_str!("../scenarios/lorentz_kk.json")),
    ("specialfn_selftest.json", include_str!("../scenarios/specialfn_selftest.json")),
];

#[derive(Parser)]
#[command(name = "disperse", version, about = "Run displacement-response scenarios and write CSV/JSON artifacts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files.
    Run {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        /// Output directory, created if missing.
        #[arg(short, long)]
        out: PathBuf,
        /// Number of scenarios run in parallel.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: u32,
    },
    /// List the bundled scenarios.
    List,
    /// Describe the fields an experiment type needs.
    Describe { experiment: String },
    /// Run the special-function self-test.
    SelftestSpecialfn {
        #[arg(short, long)]
        out: PathBuf,
    },
}

/// Outcome of one scenario, ordered by exit-code priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Pass,
    GateFailure,
    NumericalFailure,
    Malformed,
}

impl Status {
    fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::GateFailure => 1,
            Status::Malformed => 2,
            Status::NumericalFailure => 3,
        }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    id: &'a str,
    experiment: Experiment,
    status: Status,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    gates: &'a [Gate],
    scenario: &'a Scenario,
    result: serde_json::Value,
}

fn write_artifacts(dir: &Path, id: &str, csv: Option<&str>, report: &Report) -> io::Result<()> {
    if let Some(csv) = csv {
        fs::write(dir.join(format!("{id}.csv")), csv)?;
    }
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    fs::write(dir.join(format!("{id}.report.json")), json)
}

/// Execute a validated scenario, write its artifacts and return a status
/// plus the line printed for it.
fn execute(s: &Scenario, dir: &Path) -> (Status, String) {
    let (status, line, written) = match experiments::run(s) {
        Ok(a) => {
            let failed: Vec<String> = a
                .gates
                .iter()
                .filter(|g| !g.passed)
                .map(|g| match (g.value, g.tolerance) {
                    (Some(v), Some(t)) => format!("{} = {v:.3e} > {t:.1e}", g.name),
                    _ => g.name.clone(),
                })
                .collect();
            let status = if failed.is_empty() {
                Status::Pass
            } else {
                Status::GateFailure
            };
            let line = if failed.is_empty() {
                format!("PASS {} ({} gates)", s.id, a.gates.len())
            } else {
                format!("FAIL {}: {}", s.id, failed.join("; "))
            };
            let report = Report {
                id: &s.id,
                experiment: s.experiment,
                status,
                passed: failed.is_empty(),
                error: None,
                gates: &a.gates,
                scenario: s,
                result: a.result,
            };
            (status, line, write_artifacts(dir, &s.id, Some(&a.csv), &report))
        }
        Err(e) => {
            let report = Report {
                id: &s.id,
                experiment: s.experiment,
                status: Status::NumericalFailure,
                passed: false,
                error: Some(e.to_string()),
                gates: &[],
                scenario: s,
                result: serde_json::Value::Null,
            };
            (
                Status::NumericalFailure,
                format!("ERROR {}: {e}", s.id),
                write_artifacts(dir, &s.id, None, &report),
            )
        }
    };
    match written {
        Ok(()) => (status, line),
        Err(e) => (
            Status::NumericalFailure,
            format!("ERROR {}: cannot write artifacts to {}: {e}", s.id, dir.display()),
        ),
    }
}

fn load(path: &Path, quad_rel: f64) -> Result<Scenario, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: cannot read: {e}", path.display()))?;
    Scenario::from_json(&text, quad_rel).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(paths: &[PathBuf], out: &Path, jobs: usize) -> Status {
    let quad_rel = match quad_rel_default() {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{e}");
            return Status::Malformed;
        }
    };
    let mut scenarios = Vec::new();
    let mut worst = Status::Pass;
    for path in paths {
        match load(path, quad_rel) {
            Ok(s) => scenarios.push(s),
            Err(msg) => {
                eprintln!("{msg}");
                worst = Status::Malformed;
            }
        }
    }
    if worst == Status::Malformed {
        return worst;
    }
    for (k, s) in scenarios.iter().enumerate() {
        if scenarios[..k].iter().any(|o| o.id == s.id) {
            eprintln!("{}: id: '{}' is used by another scenario", paths[k].display(), s.id);
            return Status::Malformed;
        }
    }
    if let Err(e) = fs::create_dir_all(out) {
        eprintln!("{}: cannot create output directory: {e}", out.display());
        return Status::NumericalFailure;
    }

    let results: Mutex<Vec<Option<(Status, String)>>> = Mutex::new(vec![None; scenarios.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(scenarios.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(s) = scenarios.get(k) else { break };
                let r = execute(s, out);
                results.lock().unwrap()[k] = Some(r);
            });
        }
    });
    for (status, line) in results.into_inner().unwrap().into_iter().flatten() {
        println!("{line}");
        worst = worst.max(status);
    }
    worst
}

fn list() {
    for (file, text) in BUNDLED {
        match Scenario::from_json(text, scenario::DEFAULT_QUAD_REL) {
            Ok(s) => println!(
                "{:<24} {:<19} {}",
                s.id,
                s.experiment.name(),
                s.description.as_deref().unwrap_or("")
            ),
            Err(e) => println!("{file}: invalid bundled scenario: {e}"),
        }
    }
}

fn describe(name: &str) -> Status {
    match Experiment::from_name(name) {
        Some(e) => {
            println!("{}", e.describe());
            Status::Pass
        }
        None => {
            eprintln!("unknown experiment '{name}'; expected one of: {}", Experiment::names());
            Status::Malformed
        }
    }
}

fn selftest(out: &Path) -> Status {
    let s = Scenario::selftest(scenario::DEFAULT_QUAD_REL);
    if let Err(e) = fs::create_dir_all(out) {
        eprintln!("{}: cannot create output directory: {e}", out.display());
        return Status::NumericalFailure;
    }
    let (status, line) = execute(&s, out);
    println!("{line}");
    status
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match cli.command {
        Command::Run { scenarios, out, jobs } => run(&scenarios, &out, jobs as usize),
        Command::List => {
            list();
            Status::Pass
        }
        Command::Describe { experiment } => describe(&experiment),
        Command::SelftestSpecialfn { out } => selftest(&out),
    };
    ExitCode::from(status.exit_code())
}
