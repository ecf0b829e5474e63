//! Built-in exact solver over batch patterns of the reduced arc-flow
//! structures.

mod bound;
mod flow;
mod levels;
mod patterns;
mod search;

pub use bound::{lower_bound, staircase_bound, waste_bound, WASTE_DEPTH};
pub use flow::{check_flow, verify_flow, FlowSolution, FlowViolation};
pub use patterns::{enumerate_patterns, BatchPattern};

use crate::graph::{build_graph, reduce};
use crate::instance::{profile, ClassProfile, Instance};
use crate::report::{relative_gap, SolveReport, Status};
use search::{branch_and_bound, Deadline, Seed, Stop};
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

pub const BUILTIN_BACKEND: &str = "builtin";

const LEVEL_MAX_SIZES: usize = 6;
const LEVEL_CAP_BATCHES: u64 = 4;
const LEVEL_MAX_STATES: usize = 20_000;

/// Wall-clock and node budgets. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveLimits {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
}

impl SolveLimits {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn with_time_limit_s(mut self, seconds: f64) -> Self {
        self.time_limit = Some(Duration::from_secs_f64(seconds.max(0.0)));
        self
    }

    pub fn with_node_limit(mut self, nodes: u64) -> Self {
        self.node_limit = Some(nodes);
        self
    }
}

/// Solves `instance` to optimality unless a limit is hit first.
///
/// The flow solution encodes the best schedule found; it is `None` only if
/// no complete schedule was reached before the limit.
pub fn solve_exact(instance: &Instance, limits: &SolveLimits) -> (SolveReport, Option<FlowSolution>) {
    let start = Instant::now();
    match profile(instance) {
        Ok(p) => solve_profile_from(&p, limits, start),
        Err(e) => {
            let mut report = SolveReport::empty(BUILTIN_BACKEND, Status::Error).with_message(e.to_string());
            report.wall_time_s = start.elapsed().as_secs_f64();
            (report, None)
        }
    }
}

/// Same as [`solve_exact`] for an already computed class profile.
pub fn solve_profile(profile: &ClassProfile, limits: &SolveLimits) -> (SolveReport, Option<FlowSolution>) {
    solve_profile_from(profile, limits, Instant::now())
}

fn solve_profile_from(
    profile: &ClassProfile,
    limits: &SolveLimits,
    start: Instant,
) -> (SolveReport, Option<FlowSolution>) {
    let mut deadline = Deadline::new(limits.time_limit.map(|d| start + d));
    let mut seed = Seed {
        incumbent: None,
        bound: waste_bound(&profile.nt, &profile.sizes, &profile.times, profile.capacity, WASTE_DEPTH),
    };
    if profile.theta() <= LEVEL_MAX_SIZES && !deadline.check_now() {
        let cap = profile.capacity * LEVEL_CAP_BATCHES;
        if let Some(levels) = levels::level_search(profile, &mut deadline, cap, LEVEL_MAX_STATES) {
            seed.bound = seed.bound.max(levels.bound);
            seed.incumbent = levels.plan;
        }
    }
    let outcome = branch_and_bound(profile, &mut deadline, limits.node_limit, seed);

    let flows = outcome.best.as_ref().map(|(_, batches)| to_flows(profile, batches));
    let objective = outcome.best.as_ref().map(|(obj, _)| *obj as f64);
    let bound = Some(outcome.bound as f64);
    let gap = relative_gap(objective, bound);
    let proven = gap == Some(0.0);
    let status = match outcome.stop {
        Stop::Completed => Status::Optimal,
        _ if proven => Status::Optimal,
        Stop::TimeLimit => Status::TimeLimit,
        Stop::NodeLimit => Status::NodeLimit,
    };

    let mut report = SolveReport::empty(BUILTIN_BACKEND, status);
    report.objective = objective;
    report.bound = bound;
    report.gap = gap;
    report.nodes = outcome.nodes;
    report.feedback_flows = flows.as_ref().map(FlowSolution::feedback_flows).unwrap_or_default();
    report.improvements = outcome
        .improvements
        .iter()
        .map(|&(node, obj)| (node, obj as f64))
        .collect();
    report.wall_time_s = start.elapsed().as_secs_f64();
    (report, flows)
}

/// Routes each batch through its structure, sizes largest first.
fn to_flows(profile: &ClassProfile, batches: &[(usize, Vec<u64>)]) -> FlowSolution {
    let graph = reduce(&build_graph(profile).expect("profile sizes fit the capacity"));
    let mut solution = FlowSolution::zero(graph, profile.times.clone());
    let mut grouped: BTreeMap<(usize, &[u64]), u64> = BTreeMap::new();
    for (t, counts) in batches {
        *grouped.entry((*t, counts.as_slice())).or_default() += 1;
    }
    for ((t, counts), multiplicity) in grouped {
        let path = patterns::path_sizes(counts, &profile.sizes);
        solution.add_path(t, &path, multiplicity);
    }
    solution
}
