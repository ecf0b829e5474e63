//! Benchmark harness: suite files, parallel runs, result CSVs and the
//! aggregate table.
//!
//! A suite file is a list of blocks separated by blank lines. Each block
//! holds `key = value` lines; `#` starts a comment.
//!
//! ```text
//! # small Chen instances
//! name = tiny
//! family = chen
//! n = 10
//! p = 1-10
//! s = 1-10
//! B = 10
//! instances = 5
//! seed = 1
//! ```
//!
//! Keys: `family` (`chen`, `muter` or `new`), `n`, `p`, `s`, `B` (alias
//! `capacity`), optional `name`, `instances` (default 1), `seed` (first
//! seed, default 1, then consecutive) and `time_limit` (seconds, overrides
//! the run-wide limit). For `chen` and `muter`, `p` and `s` are integer
//! ranges and `B` defaults to 10. For `new`, `p` is `p1` or `p2` and `s`
//! is `s1`, `s2` or `s3`.

use crate::graph::{build_graph, reduce, GraphError};
use crate::instance::{
    generate_chen, generate_muter, generate_new, profile, Instance, InstanceError, IntRange, SizeMode, TimeMode,
};
use crate::milp::{build_model, solve_external, Formulation};
use crate::report::{SolveReport, Status};
use crate::solver::{solve_exact, SolveLimits, BUILTIN_BACKEND};
use rayon::prelude::*;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

pub const RESULTS_HEADER: [&str; 9] = ["config", "seed", "backend", "status", "time_s", "cmax", "bound", "gap", "nodes"];
pub const SUMMARY_HEADER: [&str; 8] = [
    "config",
    "backend",
    "runs",
    "optima",
    "mean_time_s",
    "mean_cmax",
    "mean_gap",
    "skipped",
];

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("suite line {line}: {message}")]
    Suite { line: usize, message: String },
    #[error("unknown backend {0:?} (expected builtin, external:milp1, external:milp1plus or external:flow)")]
    Backend(String),
    #[error("n = {n} exceeds the memory guard of {max}")]
    TooLarge { n: usize, max: usize },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Chen { p: IntRange, s: IntRange },
    Muter { p: IntRange, s: IntRange },
    New { p: TimeMode, s: SizeMode },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub name: Option<String>,
    pub generator: Generator,
    pub n: usize,
    pub capacity: u64,
    pub instances: usize,
    pub seed: u64,
    pub time_limit_s: Option<f64>,
}

impl SuiteConfig {
    /// Generator parameters in the same form as generated instance names,
    /// without the seed. Together with a seed it regenerates the instance.
    pub fn label(&self) -> String {
        let (n, b) = (self.n, self.capacity);
        match self.generator {
            Generator::Chen { p, s } => format!("chen_n{n}_p{p}_s{s}_B{b}"),
            Generator::Muter { p, s } => format!("muter_n{n}_p{p}_s{s}_B{b}"),
            Generator::New { p, s } => format!("new_n{n}_{p}{s}_B{b}"),
        }
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("")
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.instances as u64).map(|i| self.seed + i)
    }

    pub fn instance(&self, seed: u64) -> Result<Instance, InstanceError> {
        match self.generator {
            Generator::Chen { p, s } => generate_chen(self.n, p, s, self.capacity, seed),
            Generator::Muter { p, s } => generate_muter(self.n, p, s, self.capacity, seed),
            Generator::New { p, s } => generate_new(self.n, p, s, self.capacity, seed),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Suite {
    pub configs: Vec<SuiteConfig>,
}

pub fn parse_suite(text: &str) -> Result<Suite, BenchError> {
    let mut blocks: Vec<Vec<(usize, String, String)>> = vec![Vec::new()];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            if raw.trim().is_empty() && !blocks.last().unwrap().is_empty() {
                blocks.push(Vec::new());
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| BenchError::Suite {
            line: i + 1,
            message: format!("expected key = value, found {line:?}"),
        })?;
        blocks
            .last_mut()
            .unwrap()
            .push((i + 1, key.trim().to_ascii_lowercase(), value.trim().to_string()));
    }
    let configs = blocks
        .into_iter()
        .filter(|b| !b.is_empty())
        .map(|b| parse_block(&b))
        .collect::<Result<_, _>>()?;
    Ok(Suite { configs })
}

pub fn read_suite(path: impl AsRef<Path>) -> Result<Suite, BenchError> {
    parse_suite(&std::fs::read_to_string(path)?)
}

fn parse_block(entries: &[(usize, String, String)]) -> Result<SuiteConfig, BenchError> {
    let first_line = entries[0].0;
    let find = |key: &str| entries.iter().find(|(_, k, _)| k == key);
    for (line, key, _) in entries {
        let known = ["name", "family", "n", "p", "s", "b", "capacity", "instances", "seed", "time_limit"];
        if !known.contains(&key.as_str()) {
            return Err(BenchError::Suite {
                line: *line,
                message: format!("unknown key {key:?}"),
            });
        }
    }
    fn value<T: FromStr>(entry: Option<&(usize, String, String)>, key: &str) -> Result<Option<T>, BenchError>
    where
        T::Err: fmt::Display,
    {
        entry
            .map(|(line, _, v)| {
                v.parse::<T>().map_err(|e| BenchError::Suite {
                    line: *line,
                    message: format!("{key}: {e}"),
                })
            })
            .transpose()
    }
    let required = |key: &str| BenchError::Suite {
        line: first_line,
        message: format!("missing key {key:?}"),
    };
    let family: String = value(find("family"), "family")?.ok_or_else(|| required("family"))?;
    let n: usize = value(find("n"), "n")?.ok_or_else(|| required("n"))?;
    let capacity: Option<u64> = value(find("b").or_else(|| find("capacity")), "B")?;
    let generator = match family.to_ascii_lowercase().as_str() {
        "chen" | "muter" => {
            let p: IntRange = value(find("p"), "p")?.ok_or_else(|| required("p"))?;
            let s: IntRange = value(find("s"), "s")?.ok_or_else(|| required("s"))?;
            if family.eq_ignore_ascii_case("chen") {
                Generator::Chen { p, s }
            } else {
                Generator::Muter { p, s }
            }
        }
        "new" => Generator::New {
            p: value(find("p"), "p")?.ok_or_else(|| required("p"))?,
            s: value(find("s"), "s")?.ok_or_else(|| required("s"))?,
        },
        other => {
            return Err(BenchError::Suite {
                line: find("family").map_or(first_line, |e| e.0),
                message: format!("unknown family {other:?}"),
            })
        }
    };
    let capacity = match (generator, capacity) {
        (_, Some(b)) => b,
        (Generator::New { .. }, None) => return Err(required("B")),
        (_, None) => 10,
    };
    Ok(SuiteConfig {
        name: value(find("name"), "name")?,
        generator,
        n,
        capacity,
        instances: value(find("instances"), "instances")?.unwrap_or(1),
        seed: value(find("seed"), "seed")?.unwrap_or(1),
        time_limit_s: value(find("time_limit"), "time_limit")?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Builtin,
    External(Formulation),
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Builtin => f.write_str(BUILTIN_BACKEND),
            Backend::External(form) => write!(f, "external:{form}"),
        }
    }
}

impl FromStr for Backend {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        if t == BUILTIN_BACKEND {
            return Ok(Backend::Builtin);
        }
        let form = t.strip_prefix("external:").unwrap_or(&t);
        form.parse::<Formulation>()
            .map(Backend::External)
            .map_err(|_| BenchError::Backend(s.to_string()))
    }
}

pub fn parse_backends(list: &str) -> Result<Vec<Backend>, BenchError> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub time_limit_s: f64,
    pub node_limit: Option<u64>,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    /// Shim command for external backends.
    pub shim: Option<String>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            time_limit_s: 60.0,
            node_limit: None,
            jobs: 1,
            shim: None,
        }
    }
}

/// One `(configuration, seed, backend)` run. Measured values are rounded
/// to six decimals, the precision of the results file.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub config: String,
    pub seed: u64,
    pub backend: String,
    pub status: Status,
    /// Measured wall time of the solve.
    pub time_s: f64,
    /// Limit the run was given, used for timeout-inclusive means.
    pub time_limit_s: f64,
    pub cmax: Option<f64>,
    pub bound: Option<f64>,
    /// `None` means an infinite gap.
    pub gap: Option<f64>,
    pub nodes: u64,
}

impl BenchRow {
    /// Wall time with timeouts counted at the limit.
    pub fn charged_time(&self) -> f64 {
        if self.status == Status::TimeLimit {
            self.time_limit_s
        } else {
            self.time_s
        }
    }
}

/// Whether the first word of `command` names an executable.
pub fn shim_available(command: &str) -> bool {
    let Some(program) = command.split_whitespace().next() else {
        return false;
    };
    let path = Path::new(program);
    if program.contains('/') {
        return path.is_file();
    }
    std::env::var_os("PATH")
        .is_some_and(|paths| std::env::split_paths(&paths).any(|dir| dir.join(program).is_file()))
}

fn six_places(x: f64) -> f64 {
    if x.is_finite() {
        (x * 1e6).round() / 1e6
    } else {
        x
    }
}

fn run_one(config: &SuiteConfig, seed: u64, backend: Backend, options: &BenchOptions, available: bool) -> BenchRow {
    let limit = config.time_limit_s.unwrap_or(options.time_limit_s);
    let mut row = BenchRow {
        config: config.label(),
        seed,
        backend: backend.to_string(),
        status: Status::Skipped,
        time_s: 0.0,
        time_limit_s: limit,
        cmax: None,
        bound: None,
        gap: None,
        nodes: 0,
    };
    if !available {
        return row;
    }
    let instance = match config.instance(seed) {
        Ok(i) => i,
        Err(e) => {
            log::error!("{} seed {seed}: {e}", row.config);
            row.status = Status::Error;
            return row;
        }
    };
    let report: SolveReport = match backend {
        Backend::Builtin => {
            let mut limits = SolveLimits::default().with_time_limit_s(limit);
            limits.node_limit = options.node_limit;
            solve_exact(&instance, &limits).0
        }
        Backend::External(form) => {
            let start = Instant::now();
            match build_model(&instance, form) {
                Ok(built) => {
                    let shim = options.shim.as_deref().unwrap_or_default();
                    let mut r = solve_external(&built.model, shim, limit).report;
                    r.wall_time_s = start.elapsed().as_secs_f64();
                    r
                }
                Err(e) => SolveReport::empty(row.backend.clone(), Status::Error).with_message(e.to_string()),
            }
        }
    };
    row.status = report.status;
    row.time_s = six_places(report.wall_time_s);
    row.cmax = report.objective.map(six_places);
    row.bound = report.bound.map(six_places);
    row.gap = report.gap.map(six_places);
    row.nodes = report.nodes;
    row
}

/// Runs every configuration, seed and backend. Rows come back in suite
/// order, then seed, then backend order, whatever the parallelism.
/// External backends without a usable shim produce `Skipped` rows.
pub fn run_suite(suite: &Suite, backends: &[Backend], options: &BenchOptions) -> Vec<BenchRow> {
    let shim_ok = options.shim.as_deref().is_some_and(shim_available);
    let tasks: Vec<(&SuiteConfig, u64, Backend)> = suite
        .configs
        .iter()
        .flat_map(|c| c.seeds().flat_map(move |seed| backends.iter().map(move |&b| (c, seed, b))))
        .collect();
    let run = || {
        tasks
            .par_iter()
            .map(|&(c, seed, b)| {
                let available = matches!(b, Backend::Builtin) || shim_ok;
                run_one(c, seed, b, options, available)
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(options.jobs).build() {
        Ok(pool) => pool.install(run),
        Err(e) => {
            log::warn!("thread pool: {e}; running on the global pool");
            run()
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_num)
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.6}")
    }
}

fn fmt_gap(g: Option<f64>) -> String {
    g.map_or_else(|| "inf".to_string(), |g| format!("{g:.6}"))
}

pub fn write_results<W: Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        let skipped = r.status == Status::Skipped;
        w.write_record([
            r.config.clone(),
            r.seed.to_string(),
            r.backend.clone(),
            r.status.to_string(),
            format!("{:.6}", r.time_s),
            fmt_opt(r.cmax),
            fmt_opt(r.bound),
            if skipped { String::new() } else { fmt_gap(r.gap) },
            r.nodes.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a results CSV back. The time limit is not stored in the file and
/// is set from `time_limit_s`.
pub fn read_results(text: &str, time_limit_s: f64) -> Result<Vec<BenchRow>, BenchError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let bad = |line: usize, message: String| BenchError::Suite { line, message };
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let num = |k: usize| -> Result<Option<f64>, BenchError> {
            match field(k) {
                "" => Ok(None),
                "inf" => Ok(None),
                s => s.parse().map(Some).map_err(|e| bad(line, format!("{s:?}: {e}"))),
            }
        };
        rows.push(BenchRow {
            config: field(0).to_string(),
            seed: field(1).parse().map_err(|e| bad(line, format!("seed: {e}")))?,
            backend: field(2).to_string(),
            status: field(3).parse().map_err(|e: String| bad(line, e))?,
            time_s: num(4)?.unwrap_or(0.0),
            time_limit_s,
            cmax: num(5)?,
            bound: num(6)?,
            gap: num(7)?,
            nodes: field(8).parse().map_err(|e| bad(line, format!("nodes: {e}")))?,
        });
    }
    Ok(rows)
}

/// Per-configuration, per-backend summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub config: String,
    pub backend: String,
    /// Runs that were not skipped.
    pub runs: usize,
    pub optima: usize,
    /// Mean with timeouts counted at the limit; `None` if every run was
    /// skipped.
    pub mean_time_s: Option<f64>,
    /// Mean over the runs that found a schedule; `None` if none did.
    pub mean_cmax: Option<f64>,
    /// Mean gap; `None` when any run ended without a schedule (infinite)
    /// or every run was skipped.
    pub mean_gap: Option<f64>,
    pub skipped: usize,
}

pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in rows {
        let key = (r.config.clone(), r.backend.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(config, backend)| {
            let all: Vec<&BenchRow> = rows.iter().filter(|r| r.config == config && r.backend == backend).collect();
            let ran: Vec<&BenchRow> = all.iter().copied().filter(|r| r.status != Status::Skipped).collect();
            let mean = |xs: &[f64]| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
            let times: Vec<f64> = ran.iter().map(|r| r.charged_time()).collect();
            let cmaxes: Vec<f64> = ran.iter().filter_map(|r| r.cmax).collect();
            let gaps: Option<Vec<f64>> = ran.iter().map(|r| r.gap).collect();
            SummaryRow {
                runs: ran.len(),
                optima: ran.iter().filter(|r| r.status == Status::Optimal).count(),
                mean_time_s: mean(&times),
                mean_cmax: mean(&cmaxes),
                mean_gap: gaps.and_then(|g| mean(&g)),
                skipped: all.len() - ran.len(),
                config,
                backend,
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(summary: &[SummaryRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for s in summary {
        let (time, cmax, gap) = if s.runs == 0 {
            ("Skipped".to_string(), "Skipped".to_string(), "Skipped".to_string())
        } else {
            (
                s.mean_time_s.map_or_else(String::new, |t| format!("{t:.6}")),
                s.mean_cmax.map_or_else(|| "No solution".to_string(), fmt_num),
                fmt_gap(s.mean_gap),
            )
        };
        w.write_record([
            s.config.clone(),
            s.backend.clone(),
            s.runs.to_string(),
            s.optima.to_string(),
            time,
            cmax,
            gap,
            s.skipped.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Settings for [`scaling_demo`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingOptions {
    pub time_range: IntRange,
    pub size_range: IntRange,
    pub capacity: u64,
    pub seed: u64,
    /// Largest accepted `n`.
    pub max_n: usize,
    /// Solve with the built-in solver after construction; `None` skips it.
    pub solve_time_limit_s: Option<f64>,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self {
            time_range: IntRange::new(1, 20),
            size_range: IntRange::new(2, 4),
            capacity: 10,
            seed: 1,
            max_n: 10_000_000,
            solve_time_limit_s: Some(60.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub generate_s: f64,
    /// Class profile, reduced graph and FLOW model.
    pub construct_s: f64,
    pub arcs: usize,
    pub variables: usize,
    pub constraints: usize,
    pub nonzeros: usize,
    pub solve_s: Option<f64>,
    pub status: Option<Status>,
    pub cmax: Option<f64>,
    pub gap: Option<f64>,
}

pub const SCALING_HEADER: [&str; 11] = [
    "n",
    "generate_s",
    "construct_s",
    "arcs",
    "variables",
    "constraints",
    "nonzeros",
    "solve_s",
    "status",
    "cmax",
    "gap",
];

/// Builds (and optionally solves) one Chen-style instance per `n`,
/// timing construction and solve separately.
pub fn scaling_demo(n_list: &[usize], options: &ScalingOptions) -> Result<Vec<ScalingRow>, BenchError> {
    if let Some(&n) = n_list.iter().find(|&&n| n > options.max_n) {
        return Err(BenchError::TooLarge { n, max: options.max_n });
    }
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let t0 = Instant::now();
        let instance = generate_chen(n, options.time_range, options.size_range, options.capacity, options.seed)?;
        let generate_s = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let p = profile(&instance)?;
        let graph = reduce(&build_graph(&p)?);
        let built = build_model(&instance, Formulation::Flow)?;
        let construct_s = t1.elapsed().as_secs_f64();
        let stats = built.model.stats();

        let mut row = ScalingRow {
            n,
            generate_s,
            construct_s,
            arcs: graph.arcs().len(),
            variables: stats.variables,
            constraints: stats.constraints,
            nonzeros: stats.nonzeros,
            solve_s: None,
            status: None,
            cmax: None,
            gap: None,
        };
        if let Some(limit) = options.solve_time_limit_s {
            let (report, _) = solve_exact(&instance, &SolveLimits::default().with_time_limit_s(limit));
            row.solve_s = Some(report.wall_time_s);
            row.status = Some(report.status);
            row.cmax = report.objective;
            row.gap = report.gap;
        }
        out.push(row);
    }
    Ok(out)
}

pub fn write_scaling<W: Write>(rows: &[ScalingRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCALING_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            format!("{:.6}", r.generate_s),
            format!("{:.6}", r.construct_s),
            r.arcs.to_string(),
            r.variables.to_string(),
            r.constraints.to_string(),
            r.nonzeros.to_string(),
            r.solve_s.map_or_else(String::new, |t| format!("{t:.6}")),
            r.status.map_or_else(String::new, |s| s.to_string()),
            fmt_opt(r.cmax),
            if r.status.is_some() { fmt_gap(r.gap) } else { String::new() },
        ])?;
    }
    w.flush()?;
    Ok(())
}
