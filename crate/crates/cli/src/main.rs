use anyhow::{anyhow, Context, Result};
use batchflow::bench::{self, BenchOptions, ScalingOptions};
use batchflow::decode::{decode, read_schedule, validate_schedule, write_schedule, Schedule};
use batchflow::graph::{build_graph, reduce, size_report, ArcFlowGraph};
use batchflow::instance::{
    generate_chen, generate_muter, generate_new, profile, read_instance, write_instance, Instance, IntRange, SizeMode,
    TimeMode,
};
use batchflow::milp::{build_model, read_mps, schedule_from_values, solve_external, write_lp, write_mps, Formulation};
use batchflow::oracle::{brute_force, DEFAULT_HARD_CAP};
use batchflow::report::{SolveReport, Status};
use batchflow::solver::{solve_exact, SolveLimits};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Exact makespan scheduling on a single batch-processing machine.
#[derive(Debug, Parser)]
#[command(name = "batchflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Chen,
    Muter,
    New,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random instance.
    Generate {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// Time range `lo-hi` (chen, muter) or mode `p1|p2` (new).
        #[arg(long)]
        p: String,
        /// Size range `lo-hi` (chen, muter) or mode `s1|s2|s3` (new).
        #[arg(long)]
        s: String,
        #[arg(long = "B", default_value_t = 10)]
        capacity: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print arc-flow graph sizes and optionally dump the graph.
    Graph {
        #[arg(long)]
        instance: PathBuf,
        /// Dump the reduced graph instead of the full one.
        #[arg(long)]
        reduced: bool,
        /// Write the arc list (`kind tail head` per line).
        #[arg(long)]
        arcs: Option<PathBuf>,
        /// Write a Graphviz rendering.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Export an integer program as MPS or LP, chosen by the file extension.
    Model {
        #[arg(long)]
        formulation: Formulation,
        #[arg(long)]
        instance: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Solve with the built-in exact solver.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        node_limit: Option<u64>,
        /// Write the decoded schedule here.
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// Solve an MPS file with an external solver shim.
    SolveExternal {
        #[arg(long)]
        model: PathBuf,
        /// Solver command, called as `<shim...> <mps> <time-limit> <out>`.
        #[arg(long)]
        shim: String,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        /// Instance the model was built from, for decoding a schedule.
        #[arg(long, requires = "formulation")]
        instance: Option<PathBuf>,
        #[arg(long, requires = "instance")]
        formulation: Option<Formulation>,
        #[arg(long, requires = "instance")]
        schedule: Option<PathBuf>,
    },
    /// Check a schedule file against an instance.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Run a benchmark suite and write per-run results as CSV.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        /// Comma-separated list of `builtin`, `milp1`, `milp1plus`, `flow`.
        #[arg(long, default_value = "builtin")]
        backends: String,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[arg(long)]
        node_limit: Option<u64>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        shim: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write per-configuration aggregates.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Model size and solve time as the number of jobs grows.
    Scale {
        /// Comma-separated job counts.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value = "1-20")]
        p: IntRange,
        #[arg(long, default_value = "2-4")]
        s: IntRange,
        #[arg(long = "B", default_value_t = 10)]
        capacity: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Skip solving when absent.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Optimal makespan by exhaustive enumeration.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_HARD_CAP)]
        cap: usize,
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
}

/// Failures that exit with code 1; every other error exits with 3.
#[derive(Debug)]
struct Rejected(String);

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

/// Bad flag values that clap cannot check; exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Rejected>() => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e) if e.is::<Usage>() => {
            eprintln!("usage: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn load(path: &Path) -> Result<Instance> {
    read_instance(path).with_context(|| format!("reading instance {}", path.display()))
}

fn print_report(report: &SolveReport) {
    println!("{}", report.to_json());
}

fn report_outcome(report: &SolveReport) -> Result<()> {
    match report.status {
        Status::Infeasible => Err(Rejected("infeasible".into()).into()),
        Status::Error => Err(anyhow!(report.message.clone().unwrap_or_else(|| "solver error".into()))),
        _ => Ok(()),
    }
}

fn save_schedule(schedule: &Schedule, path: &Path) -> Result<()> {
    write_schedule(schedule, path).with_context(|| format!("writing schedule {}", path.display()))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate {
            family,
            n,
            p,
            s,
            capacity,
            seed,
            output,
        } => {
            let range = |text: &str| text.parse::<IntRange>().map_err(Usage);
            let instance = match family {
                Family::Chen => generate_chen(n, range(&p)?, range(&s)?, capacity, seed)?,
                Family::Muter => generate_muter(n, range(&p)?, range(&s)?, capacity, seed)?,
                Family::New => {
                    let p: TimeMode = p.parse().map_err(Usage)?;
                    let s: SizeMode = s.parse().map_err(Usage)?;
                    generate_new(n, p, s, capacity, seed)?
                }
            };
            write_instance(&instance, &output)?;
            println!("{} ({} jobs) -> {}", instance.name, instance.n_jobs(), output.display());
        }
        Command::Graph {
            instance,
            reduced,
            arcs,
            dot,
        } => {
            let prof = profile(&load(&instance)?)?;
            println!("{}", serde_json::to_string_pretty(&size_report(&prof)?)?);
            if arcs.is_some() || dot.is_some() {
                let full = build_graph(&prof)?;
                let graph: ArcFlowGraph = if reduced { reduce(&full) } else { full };
                if let Some(path) = arcs {
                    std::fs::write(&path, graph.dump())?;
                }
                if let Some(path) = dot {
                    std::fs::write(&path, graph.to_dot()?)?;
                }
            }
        }
        Command::Model {
            formulation,
            instance,
            output,
        } => {
            let built = build_model(&load(&instance)?, formulation)?;
            match output.extension().and_then(|e| e.to_str()) {
                Some("lp") => write_lp(&built.model, &output)?,
                Some("mps") => write_mps(&built.model, &output)?,
                _ => return Err(Usage("output must end in .mps or .lp".into()).into()),
            }
            let stats = built.model.stats();
            let summary = json!({
                "formulation": formulation.as_str(),
                "variables": stats.variables,
                "integer_variables": stats.integer_variables,
                "constraints": stats.constraints,
                "nonzeros": stats.nonzeros,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Solve {
            instance,
            time_limit,
            node_limit,
            schedule,
        } => {
            let inst = load(&instance)?;
            let mut limits = SolveLimits::unlimited();
            if let Some(t) = time_limit {
                limits = limits.with_time_limit_s(t);
            }
            if let Some(k) = node_limit {
                limits = limits.with_node_limit(k);
            }
            let (report, flow) = solve_exact(&inst, &limits);
            print_report(&report);
            if let (Some(path), Some(flow)) = (schedule, flow) {
                save_schedule(&decode(&flow, &inst)?, &path)?;
            }
            report_outcome(&report)?;
        }
        Command::SolveExternal {
            model,
            shim,
            time_limit,
            instance,
            formulation,
            schedule,
        } => {
            let milp = read_mps(&model).with_context(|| format!("reading model {}", model.display()))?;
            let solution = solve_external(&milp, &shim, time_limit);
            print_report(&solution.report);
            if let (Some(instance), Some(formulation), Some(path)) = (instance, formulation, schedule) {
                if !solution.values.is_empty() {
                    let inst = load(&instance)?;
                    let built = build_model(&inst, formulation)?;
                    save_schedule(&schedule_from_values(&built, &inst, &solution.values)?, &path)?;
                }
            }
            report_outcome(&solution.report)?;
        }
        Command::Validate { instance, schedule } => {
            let inst = load(&instance)?;
            let sched = read_schedule(&schedule, &inst)?;
            let violations = validate_schedule(&sched, &inst);
            if violations.is_empty() {
                println!("OK makespan {} batches {}", sched.makespan, sched.num_batches());
            } else {
                let lines: Vec<String> = violations.iter().map(|v| format!("violation: {v}")).collect();
                return Err(Rejected(lines.join("\n")).into());
            }
        }
        Command::Bench {
            suite,
            backends,
            time_limit,
            node_limit,
            jobs,
            shim,
            output,
            summary,
        } => {
            let suite = bench::read_suite(&suite)?;
            let backends = bench::parse_backends(&backends)?;
            let options = BenchOptions {
                time_limit_s: time_limit,
                node_limit,
                jobs,
                shim,
            };
            let rows = bench::run_suite(&suite, &backends, &options);
            bench::write_results(&rows, std::fs::File::create(&output)?)?;
            if let Some(path) = summary {
                bench::write_summary(&bench::summarize(&rows), std::fs::File::create(&path)?)?;
            }
            println!("{} runs -> {}", rows.len(), output.display());
        }
        Command::Scale {
            n,
            p,
            s,
            capacity,
            seed,
            time_limit,
            output,
        } => {
            let options = ScalingOptions {
                time_range: p,
                size_range: s,
                capacity,
                seed,
                solve_time_limit_s: time_limit,
                ..ScalingOptions::default()
            };
            let rows = bench::scaling_demo(&n, &options)?;
            match output {
                Some(path) => bench::write_scaling(&rows, std::fs::File::create(&path)?)?,
                None => {
                    let mut stdout = std::io::stdout().lock();
                    bench::write_scaling(&rows, &mut stdout)?;
                    stdout.flush()?;
                }
            }
        }
        Command::Oracle {
            instance,
            cap,
            schedule,
        } => {
            let inst = load(&instance)?;
            let (makespan, best) = brute_force(&inst, cap)?;
            println!("{}", serde_json::to_string_pretty(&json!({ "makespan": makespan, "batches": best.num_batches() }))?);
            if let Some(path) = schedule {
                save_schedule(&best, &path)?;
            }
        }
    }
    Ok(())
}
