//! Running an MPS-reading solver through a shim executable.
//!
//! The shim is invoked as `<command...> <mps-path> <time-limit-s> <out-path>`
//! and exits with 0 (optimal), 1 (feasible) or 2 (anything else). The
//! solution file holds optional header lines `@status S`, `@objective X`
//! and `@bound X`, then one `name value` line per variable.

use super::model::MilpModel;
use super::write::write_mps;
use crate::report::{relative_gap, SolveReport, Status};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

/// Extra wall time granted to the shim beyond its own limit before it is
/// killed.
pub const KILL_GRACE: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSolution {
    pub report: SolveReport,
    pub values: HashMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub status: Option<Status>,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub values: HashMap<String, f64>,
}

pub fn parse_solution_file(text: &str) -> Result<SolutionFile, String> {
    let mut file = SolutionFile {
        status: None,
        objective: None,
        bound: None,
        values: HashMap::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| format!("line {}: expected `name value`", i + 1))?;
        let value = value.trim();
        let number = || {
            value
                .parse::<f64>()
                .map_err(|e| format!("line {}: {key}: {e}", i + 1))
        };
        match key {
            "@status" => file.status = Some(value.parse().map_err(|e| format!("line {}: {e}", i + 1))?),
            "@objective" => file.objective = Some(number()?),
            "@bound" => file.bound = Some(number()?),
            _ if key.starts_with('@') => {}
            _ => {
                file.values.insert(key.to_string(), number()?);
            }
        }
    }
    Ok(file)
}

fn scratch_dir() -> std::io::Result<PathBuf> {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.subsec_nanos());
    let dir = std::env::temp_dir().join(format!(
        "batchflow-{}-{}-{}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed),
        nanos
    ));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Writes `model` to a scratch MPS file and solves it with `command`, a
/// whitespace-separated program and leading arguments. Failures become
/// report statuses, never errors.
pub fn solve_external(model: &MilpModel, command: &str, time_limit_s: f64) -> ExternalSolution {
    let start = Instant::now();
    let backend = format!("external:{}", model.name);
    let fail = |status: Status, message: String| ExternalSolution {
        report: {
            let mut r = SolveReport::empty(backend.clone(), status).with_message(message);
            r.wall_time_s = start.elapsed().as_secs_f64();
            r
        },
        values: HashMap::new(),
    };

    let dir = match scratch_dir() {
        Ok(d) => d,
        Err(e) => return fail(Status::Error, format!("scratch directory: {e}")),
    };
    let result = run(model, command, time_limit_s, KILL_GRACE, &dir, start, &backend);
    let _ = std::fs::remove_dir_all(&dir);
    match result {
        Ok(solution) => solution,
        Err((status, message)) => fail(status, message),
    }
}

fn run(
    model: &MilpModel,
    command: &str,
    time_limit_s: f64,
    grace: Duration,
    dir: &Path,
    start: Instant,
    backend: &str,
) -> Result<ExternalSolution, (Status, String)> {
    let mps = dir.join("model.mps");
    let out = dir.join("solution.txt");
    let err_path = dir.join("stderr.txt");
    let err_file = std::fs::File::create(&err_path).map_err(|e| (Status::Error, format!("scratch file: {e}")))?;
    write_mps(model, &mps).map_err(|e| (Status::Error, format!("writing model: {e}")))?;
    let mut words = command.split_whitespace();
    let program = words.next().ok_or((Status::Error, "empty solver command".to_string()))?;
    let mut child = Command::new(program)
        .args(words)
        .arg(&mps)
        .arg(format!("{time_limit_s}"))
        .arg(&out)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(err_file)
        .spawn()
        .map_err(|e| (Status::Error, format!("starting {program}: {e}")))?;

    let kill_at = start + Duration::from_secs_f64(time_limit_s.max(0.0)) + grace;
    let exit = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if Instant::now() >= kill_at => {
                let _ = child.kill();
                let _ = child.wait();
                return Err((Status::TimeLimit, "solver killed after the time limit".to_string()));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err((Status::Error, format!("waiting for solver: {e}"))),
        }
    };
    let stderr = std::fs::read_to_string(&err_path).unwrap_or_default();
    let text = match std::fs::read_to_string(&out) {
        Ok(t) => t,
        Err(_) => {
            let message = format!("no solution file (exit {:?}): {}", exit.code(), stderr.trim());
            return Err((Status::Error, message));
        }
    };
    let file = parse_solution_file(&text).map_err(|e| (Status::Error, format!("solution file: {e}")))?;
    let status = file.status.unwrap_or(match exit.code() {
        Some(0) => Status::Optimal,
        Some(1) => Status::Feasible,
        _ => Status::Error,
    });
    let has_incumbent = matches!(status, Status::Optimal | Status::Feasible | Status::TimeLimit) && !file.values.is_empty();
    let objective = if has_incumbent {
        Some(file.objective.unwrap_or_else(|| {
            let values: Vec<f64> = model.assignment(&file.values);
            model.objective_value(&values)
        }))
    } else {
        None
    };
    let bound = match (status, file.bound, objective) {
        (_, Some(b), _) => Some(b),
        (Status::Optimal, None, obj) => obj,
        _ => None,
    };
    let (objective, bound) = snap(model, objective, bound);
    let mut report = SolveReport::empty(backend, status);
    report.objective = objective;
    report.bound = bound;
    report.gap = relative_gap(objective, bound);
    if status == Status::Optimal {
        report.gap = Some(0.0);
        report.bound = objective;
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(ExternalSolution {
        report,
        values: if has_incumbent { file.values } else { HashMap::new() },
    })
}

const SNAP_TOL: f64 = 1e-6;

/// Removes solver round-off: objectives within tolerance of an integer are
/// rounded, and for models whose objective is always integral the bound is
/// rounded up.
fn snap(model: &MilpModel, objective: Option<f64>, bound: Option<f64>) -> (Option<f64>, Option<f64>) {
    let near = |x: f64| (x - x.round()).abs() <= SNAP_TOL * x.abs().max(1.0);
    let objective = objective.map(|x| if near(x) { x.round() } else { x });
    let bound = bound.map(|b| {
        if near(b) {
            b.round()
        } else if model.has_integral_objective() {
            b.ceil()
        } else {
            b
        }
    });
    (objective, bound)
}
