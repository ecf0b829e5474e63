//! Acceptance checks C1 to C9. Prints one line per criterion and exits
//! with status 1 if any criterion fails. C6 is skipped when no external
//! MILP solver is reachable through the bundled scipy shim.

use batchflow::bench::{parse_suite, run_suite, summarize, write_results, write_summary, Backend, BenchOptions};
use batchflow::decode::{decode, validate_schedule};
use batchflow::graph::{build_graph, build_graph_for_sizes, reduce, Arc, ArcKind};
use batchflow::instance::{generate_chen, profile, Instance, IntRange};
use batchflow::milp::{build_model, schedule_from_values, solve_external, Formulation};
use batchflow::oracle::{brute_force, subset_dp, DEFAULT_HARD_CAP};
use batchflow::report::{SolveReport, Status};
use batchflow::solver::{lower_bound, solve_exact, verify_flow, waste_bound, FlowSolution, SolveLimits, WASTE_DEPTH};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::Mutex;
use std::time::Instant;

const SHIM: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scripts/scipy_milp_shim.py");

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;

/// Solves seen by C1, C2 and C5, checked again for C7.
#[derive(Default)]
struct SolveAudit {
    solves: usize,
    failures: Vec<String>,
}

impl SolveAudit {
    fn record(&mut self, label: &str, instance: &Instance, report: &SolveReport, flow: Option<&FlowSolution>) {
        self.solves += 1;
        if let Err(e) = audit(instance, report, flow) {
            self.failures.push(format!("{label}: {e}"));
        }
    }
}

fn audit(instance: &Instance, report: &SolveReport, flow: Option<&FlowSolution>) -> Result<(), String> {
    let flow = flow.ok_or("no flow returned")?;
    if !verify_flow(flow, instance) {
        return Err("verify_flow failed".into());
    }
    let schedule = decode(flow, instance).map_err(|e| format!("decode: {e}"))?;
    let violations = validate_schedule(&schedule, instance);
    if !violations.is_empty() {
        return Err(format!("{} schedule violations", violations.len()));
    }
    let weighted: u64 = flow.times.iter().zip(flow.feedback_flows()).map(|(p, v)| p * v).sum();
    if schedule.makespan != weighted {
        return Err(format!("makespan {} but weighted feedback {weighted}", schedule.makespan));
    }
    if report.objective != Some(weighted as f64) {
        return Err(format!("report objective {:?} but flow cost {weighted}", report.objective));
    }
    Ok(())
}

fn oracle_instance(i: u64) -> Instance {
    let n = 2 + (i % 7) as usize;
    let capacity = if (i / 7) % 2 == 0 { 5 } else { 10 };
    generate_chen(n, IntRange::new(1, 20), IntRange::new(1, capacity), capacity, 1000 + i).expect("valid parameters")
}

fn c1(audit: &Mutex<SolveAudit>) -> Check {
    const COUNT: u64 = 500;
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for i in 0..COUNT {
        let inst = oracle_instance(i);
        let (report, flow) = solve_exact(&inst, &SolveLimits::unlimited());
        audit.lock().unwrap().record(&inst.name, &inst, &report, flow.as_ref());
        let brute = brute_force(&inst, DEFAULT_HARD_CAP).map_err(|e| e.to_string())?.0;
        let dp = subset_dp(&inst, DEFAULT_HARD_CAP).map_err(|e| e.to_string())?;
        if report.status != Status::Optimal || report.objective != Some(brute as f64) || brute != dp {
            mismatches.push(format!("{}: solver {:?} brute {brute} dp {dp}", inst.name, report.objective));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if !mismatches.is_empty() {
        return Err(format!("{} mismatches, first {}", mismatches.len(), mismatches[0]));
    }
    if elapsed >= 60.0 {
        return Err(format!("took {elapsed:.1} s"));
    }
    Ok(format!("{COUNT} instances, n 2..8, B 5 and 10, all equal to both oracles in {elapsed:.2} s"))
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, want {want:?}"))
    }
}

fn c2(audit: &Mutex<SolveAudit>) -> Check {
    let four_jobs = Instance::from_pairs(8, &[(2, 7), (6, 1), (4, 8), (4, 3)]).unwrap();
    let (report, flow) = solve_exact(&four_jobs, &SolveLimits::unlimited());
    audit.lock().unwrap().record("four-job example", &four_jobs, &report, flow.as_ref());
    expect("four-job optimum", report.objective, Some(12.0))?;

    let fifteen_jobs = Instance::from_pairs(
        5,
        &[
            (2, 3),
            (1, 3),
            (2, 3),
            (1, 3),
            (2, 3),
            (3, 4),
            (2, 4),
            (1, 4),
            (1, 4),
            (2, 4),
            (3, 4),
            (3, 5),
            (1, 5),
            (2, 5),
            (2, 5),
        ],
    )
    .unwrap();
    let (report, flow) = solve_exact(&fifteen_jobs, &SolveLimits::unlimited());
    audit.lock().unwrap().record("fifteen-job example", &fifteen_jobs, &report, flow.as_ref());
    expect("fifteen-job optimum", report.objective, Some(24.0))?;
    expect("fifteen-job feedback flows", report.feedback_flows.clone(), vec![2, 2, 2])?;

    let split = Instance::from_pairs(5, &[(3, 1), (2, 1), (2, 1), (1, 1), (1, 1)]).unwrap();
    let p = profile(&split).unwrap();
    let mut sol = FlowSolution::zero(reduce(&build_graph(&p).unwrap()), p.times.clone());
    sol.add_path(0, &[2, 2], 1);
    sol.add_path(0, &[3, 1, 1], 1);
    let schedule = decode(&sol, &split).map_err(|e| e.to_string())?;
    let mut batches: Vec<Vec<u64>> = schedule
        .batches
        .iter()
        .map(|b| {
            let mut sizes: Vec<u64> = b.jobs.iter().map(|&id| split.job(id).unwrap().size).collect();
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            sizes
        })
        .collect();
    batches.sort();
    expect("flow decomposition", batches, vec![vec![2, 2], vec![3, 1, 1]])?;

    let full = build_graph_for_sizes(&[2, 3], 5).unwrap();
    let reduced = reduce(&full);
    let kept: BTreeSet<Arc> = reduced.arcs().iter().copied().collect();
    let removed: Vec<(ArcKind, usize, usize)> = full
        .arcs()
        .iter()
        .filter(|a| !kept.contains(a))
        .map(|a| (a.kind, a.tail, a.head))
        .collect();
    expect(
        "arcs removed by reduction",
        removed,
        vec![(ArcKind::Job, 1, 3), (ArcKind::Job, 1, 4), (ArcKind::Loss, 1, 5)],
    )?;
    Ok("optima 12 and 24, feedback (2,2,2), batches {3,1,1} and {2,2}, reduction removes (1,3) (1,4) loss (1,5)".into())
}

fn c3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let capacity = 1 + rng.next_u64() % 100;
        let theta = 1 + rng.next_u64() % capacity.min(12);
        let mut sizes = BTreeSet::new();
        while (sizes.len() as u64) < theta {
            sizes.insert(1 + rng.next_u64() % capacity);
        }
        let sizes: Vec<u64> = sizes.into_iter().collect();
        let graph = build_graph_for_sizes(&sizes, capacity).map_err(|e| e.to_string())?;
        let expected_arcs = theta + (theta + 1) * capacity - sizes.iter().sum::<u64>();
        if graph.num_nodes() as u64 != capacity + 1 || graph.num_arcs() as u64 != expected_arcs {
            return Err(format!(
                "sizes {sizes:?} B {capacity}: {} nodes {} arcs, formula {expected_arcs}",
                graph.num_nodes(),
                graph.num_arcs()
            ));
        }
    }
    Ok("200 random size sets with B <= 100 match |V| = B+1 and the arc-count formula".into())
}

fn c4() -> Check {
    let (p, s) = (IntRange::new(1, 20), IntRange::new(2, 4));
    let small = generate_chen(1_000, p, s, 10, 1).map_err(|e| e.to_string())?;
    let large = generate_chen(1_000_000, p, s, 10, 1).map_err(|e| e.to_string())?;
    let stats_small = build_model(&small, Formulation::Flow).map_err(|e| e.to_string())?.model.stats();
    let start = Instant::now();
    let stats_large = build_model(&large, Formulation::Flow).map_err(|e| e.to_string())?.model.stats();
    let construct = start.elapsed().as_secs_f64();
    let classes = |i: &Instance| profile(i).map(|p| (p.sizes.clone(), p.times.clone())).map_err(|e| e.to_string());
    expect("class sets", classes(&small)?, classes(&large)?)?;
    expect("model statistics", stats_small, stats_large)?;
    if construct > 60.0 {
        return Err(format!("construction took {construct:.1} s"));
    }
    Ok(format!(
        "{} variables, {} constraints for n = 1000 and n = 1000000; construction {construct:.2} s",
        stats_large.variables, stats_large.constraints
    ))
}

fn c5(audit: &Mutex<SolveAudit>) -> Check {
    let inst = generate_chen(1_000_000, IntRange::new(1, 20), IntRange::new(2, 4), 10, 1).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (report, flow) = solve_exact(&inst, &SolveLimits::default().with_time_limit_s(600.0));
    let elapsed = start.elapsed().as_secs_f64();
    audit.lock().unwrap().record(&inst.name, &inst, &report, flow.as_ref());
    expect("gap", report.gap, Some(0.0))?;
    let flow = flow.ok_or("no flow")?;
    let schedule = decode(&flow, &inst).map_err(|e| e.to_string())?;
    expect("violations", validate_schedule(&schedule, &inst).len(), 0)?;
    expect("decoded makespan", Some(schedule.makespan as f64), report.objective)?;
    Ok(format!(
        "n = 1000000 solved to gap 0, makespan {} with {} batches in {elapsed:.2} s",
        schedule.makespan,
        schedule.num_batches()
    ))
}

fn scipy_available() -> bool {
    Command::new("python3")
        .args(["-c", "import scipy.optimize"])
        .output()
        .is_ok_and(|o| o.status.success())
}

fn c6() -> Verdict {
    if !scipy_available() {
        return Verdict::Skip("python3 with scipy not found".into());
    }
    let shim = format!("python3 {SHIM}");
    let failures: Vec<String> = (0..50u64)
        .into_par_iter()
        .flat_map_iter(|i| {
            let n = 2 + (i % 6) as usize;
            let capacity = if i % 2 == 0 { 5 } else { 10 };
            let inst = generate_chen(n, IntRange::new(1, 20), IntRange::new(1, capacity), capacity, 5000 + i).unwrap();
            let opt = subset_dp(&inst, DEFAULT_HARD_CAP).unwrap() as f64;
            Formulation::ALL
                .iter()
                .filter_map(|&f| {
                    let built = build_model(&inst, f).unwrap();
                    let solution = solve_external(&built.model, &shim, 60.0);
                    let report = &solution.report;
                    if report.status != Status::Optimal || report.objective != Some(opt) {
                        return Some(format!("{} {f}: {:?} {:?}, oracle {opt}", inst.name, report.status, report.objective));
                    }
                    match schedule_from_values(&built, &inst, &solution.values) {
                        Ok(s) if validate_schedule(&s, &inst).is_empty() && s.makespan as f64 == opt => None,
                        Ok(s) => Some(format!("{} {f}: read-back schedule has makespan {}", inst.name, s.makespan)),
                        Err(e) => Some(format!("{} {f}: {e}", inst.name)),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    if failures.is_empty() {
        Verdict::Pass("50 instances, milp1 milp1plus flow all at the oracle optimum via scipy/HiGHS".into())
    } else {
        Verdict::Fail(format!("{} disagreements, first {}", failures.len(), failures[0]))
    }
}

fn c7(audit: &SolveAudit) -> Check {
    if let Some(first) = audit.failures.first() {
        return Err(format!("{} of {} solves failed, first {first}", audit.failures.len(), audit.solves));
    }
    if audit.solves == 0 {
        return Err("no solves recorded".into());
    }
    Ok(format!("{} solves from C1, C2, C5: flow verified, schedule valid, makespan = sum P_t v_t", audit.solves))
}

/// Every multiset of at most `max_n` jobs over the given job types.
fn multisets(types: &[(u64, u64)], max_n: usize, prefix: &mut Vec<(u64, u64)>, from: usize, out: &mut Vec<Vec<(u64, u64)>>) {
    if !prefix.is_empty() {
        out.push(prefix.clone());
    }
    if prefix.len() == max_n {
        return;
    }
    for t in from..types.len() {
        prefix.push(types[t]);
        multisets(types, max_n, prefix, t, out);
        prefix.pop();
    }
}

fn c8() -> Check {
    let mut checked = 0usize;
    for (capacity, times) in [(4u64, [1u64, 2, 5]), (5, [1, 3, 7])] {
        let types: Vec<(u64, u64)> = (1..=capacity).flat_map(|s| times.iter().map(move |&p| (s, p))).collect();
        let mut all = Vec::new();
        multisets(&types, 6, &mut Vec::new(), 0, &mut all);
        let violations: Vec<String> = all
            .par_iter()
            .filter_map(|pairs| {
                let inst = Instance::from_pairs(capacity, pairs).unwrap();
                let p = profile(&inst).unwrap();
                let opt = subset_dp(&inst, DEFAULT_HARD_CAP).unwrap();
                let stair = lower_bound(&p.nt, &p);
                let waste = waste_bound(&p.nt, &p.sizes, &p.times, p.capacity, WASTE_DEPTH);
                (stair > opt || waste > opt).then(|| format!("{pairs:?}: staircase {stair} waste {waste} optimum {opt}"))
            })
            .collect();
        if let Some(first) = violations.first() {
            return Err(format!("{} violations, first {first}", violations.len()));
        }
        checked += all.len();
    }
    Ok(format!("{checked} job multisets with n <= 6 (every residual of such instances), zero violations"))
}

const MINI_SUITE: &str = "\
name = small
family = chen
n = 20
p = 1-10
s = 1-10
instances = 5
seed = 1

name = medium
family = muter
n = 50
p = 1-100
s = 2-4
instances = 5
seed = 11

name = tight
family = chen
n = 50
p = 1-20
s = 1-10
instances = 5
seed = 21
time_limit = 0.001

name = immediate
family = new
n = 40
p = p2
s = s1
B = 20
instances = 5
seed = 31
time_limit = 0
";

fn six(x: f64) -> String {
    format!("{x:.6}")
}

fn num(x: f64) -> String {
    if x == x.trunc() {
        format!("{}", x as i64)
    } else {
        six(x)
    }
}

fn c9() -> Check {
    let suite = parse_suite(MINI_SUITE).map_err(|e| e.to_string())?;
    let options = BenchOptions {
        time_limit_s: 30.0,
        jobs: 0,
        ..BenchOptions::default()
    };
    let rows = run_suite(&suite, &[Backend::Builtin], &options);
    let mut results = Vec::new();
    write_results(&rows, &mut results).map_err(|e| e.to_string())?;
    let mut summary = Vec::new();
    write_summary(&summarize(&rows), &mut summary).map_err(|e| e.to_string())?;

    let limits: HashMap<String, f64> = suite
        .configs
        .iter()
        .map(|c| (c.label(), c.time_limit_s.unwrap_or(options.time_limit_s)))
        .collect();
    let raw = String::from_utf8(results).unwrap();
    let mut groups: Vec<(String, Vec<Vec<String>>)> = Vec::new();
    for line in raw.lines().skip(1) {
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        let key = format!("{},{}", fields[0], fields[2]);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(fields),
            None => groups.push((key, vec![fields])),
        }
    }
    let mut expected = vec!["config,backend,runs,optima,mean_time_s,mean_cmax,mean_gap,skipped".to_string()];
    let mut timeouts = 0;
    for (key, group) in &groups {
        let limit = limits[key.split(',').next().unwrap()];
        let runs = group.len();
        let optima = group.iter().filter(|f| f[3] == "Optimal").count();
        let mut time_sum = 0.0;
        for f in group {
            if f[3] == "TimeLimit" {
                timeouts += 1;
                time_sum += limit;
            } else {
                time_sum += f[4].parse::<f64>().unwrap();
            }
        }
        let cmaxes: Vec<f64> = group.iter().filter(|f| !f[5].is_empty()).map(|f| f[5].parse().unwrap()).collect();
        let mean_cmax = if cmaxes.is_empty() {
            "No solution".to_string()
        } else {
            num(cmaxes.iter().sum::<f64>() / cmaxes.len() as f64)
        };
        let mean_gap = if group.iter().any(|f| f[7] == "inf") {
            "inf".to_string()
        } else {
            six(group.iter().map(|f| f[7].parse::<f64>().unwrap()).sum::<f64>() / runs as f64)
        };
        expected.push(format!(
            "{key},{runs},{optima},{},{mean_cmax},{mean_gap},0",
            six(time_sum / runs as f64)
        ));
    }
    let produced = String::from_utf8(summary).unwrap();
    let produced: Vec<&str> = produced.lines().collect();
    for (i, (got, want)) in produced.iter().zip(&expected).enumerate() {
        if got != want {
            return Err(format!("summary line {i}: got {got:?}, hand-computed {want:?}"));
        }
    }
    expect("summary lines", produced.len(), expected.len())?;
    expect("raw rows", rows.len(), 20)?;
    if timeouts == 0 {
        return Err("the suite produced no timeout rows to exercise the charged mean".into());
    }
    Ok(format!(
        "4 configurations x 5 seeds, {timeouts} timeouts; #O, mean time, mean gap match hand aggregation"
    ))
}

fn run(id: &str, title: &str, check: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
        let message = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into());
        Verdict::Fail(format!("panic: {message}"))
    });
    let secs = start.elapsed().as_secs_f64();
    let (tag, detail, ok) = match verdict {
        Verdict::Pass(d) => ("PASS", d, true),
        Verdict::Skip(d) => ("SKIP", d, true),
        Verdict::Fail(d) => ("FAIL", d, false),
    };
    println!("{tag} {id} {title} ({secs:.2} s): {detail}");
    ok
}

fn verdict(check: Check) -> Verdict {
    match check {
        Ok(d) => Verdict::Pass(d),
        Err(d) => Verdict::Fail(d),
    }
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let audit = Mutex::new(SolveAudit::default());
    let results = [
        run("C1", "oracle equivalence", || verdict(c1(&audit))),
        run("C2", "worked examples", || verdict(c2(&audit))),
        run("C3", "graph size formula", || verdict(c3())),
        run("C4", "model size independent of n", || verdict(c4())),
        run("C5", "exact solve at n = 10^6", || verdict(c5(&audit))),
        run("C6", "cross-formulation agreement", c6),
        run("C7", "flow verification and decode", || verdict(c7(&audit.lock().unwrap()))),
        run("C8", "lower bound admissibility", || verdict(c8())),
        run("C9", "benchmark aggregation", || verdict(c9())),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    if failed == 0 {
        println!("acceptance: all criteria met");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
