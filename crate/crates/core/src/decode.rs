//! Turning structure flows into explicit batches, checking schedules
//! against an instance, and the schedule text format.

use crate::graph::{build_graph, reduce, ArcKind};
use crate::instance::{profile, Instance, InstanceError, JobId};
use crate::solver::{check_flow, FlowSolution, FlowViolation};
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    /// Member job ids, ascending.
    pub jobs: Vec<JobId>,
    /// Largest member processing time.
    pub processing_time: u64,
    pub used_capacity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub batches: Vec<Batch>,
    pub makespan: u64,
}

impl Schedule {
    /// Builds batches from groups of job ids, deriving processing times and
    /// loads from `instance`. Unknown ids contribute nothing.
    pub fn from_groups(groups: Vec<Vec<JobId>>, instance: &Instance) -> Self {
        let by_id: HashMap<JobId, _> = instance.jobs.iter().map(|j| (j.id, j)).collect();
        let batches: Vec<Batch> = groups
            .into_iter()
            .map(|mut jobs| {
                jobs.sort_unstable();
                let members = jobs.iter().filter_map(|id| by_id.get(id));
                let processing_time = members.clone().map(|j| j.processing_time).max().unwrap_or(0);
                let used_capacity = members.map(|j| j.size).sum();
                Batch {
                    jobs,
                    processing_time,
                    used_capacity,
                }
            })
            .collect();
        let mut schedule = Schedule {
            batches,
            makespan: 0,
        };
        schedule.makespan = makespan(&schedule);
        schedule
    }

    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleViolation {
    EmptyBatch { batch: usize },
    UnknownJob { batch: usize, job: JobId },
    DuplicateJob { job: JobId, first: usize, second: usize },
    MissingJob { job: JobId },
    OverCapacity { batch: usize, used: u64, capacity: u64 },
    WrongProcessingTime { batch: usize, stated: u64, actual: u64 },
    WrongUsedCapacity { batch: usize, stated: u64, actual: u64 },
    WrongMakespan { stated: u64, actual: u64 },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScheduleViolation::*;
        match self {
            EmptyBatch { batch } => write!(f, "batch {batch} is empty"),
            UnknownJob { batch, job } => write!(f, "batch {batch} holds unknown job {job}"),
            DuplicateJob { job, first, second } => {
                write!(f, "job {job} appears in batches {first} and {second}")
            }
            MissingJob { job } => write!(f, "job {job} is not in any batch"),
            OverCapacity {
                batch,
                used,
                capacity,
            } => write!(f, "batch {batch} uses {used} > capacity {capacity}"),
            WrongProcessingTime {
                batch,
                stated,
                actual,
            } => write!(f, "batch {batch} states time {stated}, longest member takes {actual}"),
            WrongUsedCapacity {
                batch,
                stated,
                actual,
            } => write!(f, "batch {batch} states load {stated}, members sum to {actual}"),
            WrongMakespan { stated, actual } => {
                write!(f, "makespan stated as {stated}, batches sum to {actual}")
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DecodeError {
    #[error("flow is infeasible: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidFlow(Vec<FlowViolation>),
    #[error("no eligible job of size {size} left for structure with time {time}")]
    Exhausted { size: u64, time: u64 },
    #[error("schedule is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidSchedule(Vec<ScheduleViolation>),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Decodes a feasible flow into batches.
///
/// Structures are handled in ascending processing time. Each structure's
/// flow is split into unit paths, always taking the smallest next node
/// (a loss arc before a job arc into `B`). Each job arc of size `c` takes
/// the unassigned size-`c` job with the largest processing time not above
/// the structure's, lowest id first.
pub fn decode(solution: &FlowSolution, instance: &Instance) -> Result<Schedule, DecodeError> {
    let prof = profile(instance)?;
    let violations = check_flow(solution, &prof);
    if !violations.is_empty() {
        return Err(DecodeError::InvalidFlow(violations));
    }

    // queues[l][tc]: ids of unassigned jobs, ascending
    let mut queues: Vec<Vec<VecDeque<JobId>>> = vec![vec![VecDeque::new(); prof.delta()]; prof.theta()];
    let mut jobs: Vec<_> = instance.jobs.iter().collect();
    jobs.sort_by_key(|j| j.id);
    for job in jobs {
        let l = prof.size_index(job.size).expect("size in profile");
        let tc = prof.time_index(job.processing_time).expect("time in profile");
        queues[l][tc].push_back(job.id);
    }

    let graph = &solution.graph;
    let capacity = graph.capacity();
    let feedback = graph.feedback_index();
    let mut groups = Vec::new();
    for t in 0..prof.delta() {
        let mut residual = solution.flows[t].clone();
        while residual[feedback] > 0 {
            residual[feedback] -= 1;
            let mut group = Vec::new();
            let mut node = 0usize;
            while node != capacity {
                let a = next_arc(solution, &residual, node).expect("conservation leaves a path");
                residual[a] -= 1;
                let arc = graph.arcs()[a];
                if arc.kind == ArcKind::Job {
                    let size = arc.length() as u64;
                    let l = prof.size_index(size).expect("arc sizes come from the profile");
                    let tc = (0..=t).rev().find(|&tc| !queues[l][tc].is_empty()).ok_or(
                        DecodeError::Exhausted {
                            size,
                            time: prof.times[t],
                        },
                    )?;
                    group.push(queues[l][tc].pop_front().expect("nonempty queue"));
                }
                node = arc.head;
            }
            groups.push(group);
        }
    }
    Ok(Schedule::from_groups(groups, instance))
}

fn next_arc(solution: &FlowSolution, residual: &[u64], node: usize) -> Option<usize> {
    let graph = &solution.graph;
    let mut best: Option<usize> = None;
    for &a in graph.out_arcs(node) {
        let arc = graph.arcs()[a];
        if arc.kind == ArcKind::Feedback || residual[a] == 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                let cur = graph.arcs()[b];
                (arc.head, arc.kind != ArcKind::Loss) < (cur.head, cur.kind != ArcKind::Loss)
            }
        };
        if better {
            best = Some(a);
        }
    }
    best
}

/// Every way `schedule` breaks the rules of `instance`; empty iff valid.
pub fn validate_schedule(schedule: &Schedule, instance: &Instance) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    let by_id: HashMap<JobId, _> = instance.jobs.iter().map(|j| (j.id, j)).collect();
    let mut seen: HashMap<JobId, usize> = HashMap::new();
    for (k, batch) in schedule.batches.iter().enumerate() {
        if batch.jobs.is_empty() {
            out.push(ScheduleViolation::EmptyBatch { batch: k });
        }
        let mut used = 0;
        let mut longest = 0;
        for &id in &batch.jobs {
            match by_id.get(&id) {
                Some(job) => {
                    used += job.size;
                    longest = longest.max(job.processing_time);
                }
                None => out.push(ScheduleViolation::UnknownJob { batch: k, job: id }),
            }
            if let Some(&first) = seen.get(&id) {
                out.push(ScheduleViolation::DuplicateJob {
                    job: id,
                    first,
                    second: k,
                });
            } else {
                seen.insert(id, k);
            }
        }
        if used > instance.capacity {
            out.push(ScheduleViolation::OverCapacity {
                batch: k,
                used,
                capacity: instance.capacity,
            });
        }
        if batch.processing_time != longest {
            out.push(ScheduleViolation::WrongProcessingTime {
                batch: k,
                stated: batch.processing_time,
                actual: longest,
            });
        }
        if batch.used_capacity != used {
            out.push(ScheduleViolation::WrongUsedCapacity {
                batch: k,
                stated: batch.used_capacity,
                actual: used,
            });
        }
    }
    let mut missing: Vec<JobId> = instance
        .jobs
        .iter()
        .map(|j| j.id)
        .filter(|id| !seen.contains_key(id))
        .collect();
    missing.sort_unstable();
    out.extend(missing.into_iter().map(|job| ScheduleViolation::MissingJob { job }));
    let actual = makespan(schedule);
    if schedule.makespan != actual {
        out.push(ScheduleViolation::WrongMakespan {
            stated: schedule.makespan,
            actual,
        });
    }
    out
}

/// Sum of the batch processing times.
pub fn makespan(schedule: &Schedule) -> u64 {
    schedule.batches.iter().map(|b| b.processing_time).sum()
}

/// Flows that reproduce a valid schedule: each batch becomes one unit path
/// in the structure of its processing time, sizes largest first.
pub fn encode_schedule(schedule: &Schedule, instance: &Instance) -> Result<FlowSolution, DecodeError> {
    let violations = validate_schedule(schedule, instance);
    if !violations.is_empty() {
        return Err(DecodeError::InvalidSchedule(violations));
    }
    let prof = profile(instance)?;
    let graph = reduce(&build_graph(&prof).expect("valid instance sizes fit"));
    let mut solution = FlowSolution::zero(graph, prof.times.clone());
    let sizes: HashMap<JobId, u64> = instance.jobs.iter().map(|j| (j.id, j.size)).collect();
    let mut grouped: BTreeMap<(usize, Vec<u64>), u64> = BTreeMap::new();
    for batch in &schedule.batches {
        let t = prof
            .time_index(batch.processing_time)
            .expect("validated processing time is a job time");
        let mut path: Vec<u64> = batch.jobs.iter().map(|id| sizes[id]).collect();
        path.sort_unstable_by(|a, b| b.cmp(a));
        *grouped.entry((t, path)).or_default() += 1;
    }
    for ((t, path), count) in grouped {
        solution.add_path(t, &path, count);
    }
    Ok(solution)
}

/// One `P: id,id,...` line per batch, then `makespan X`.
pub fn render_schedule(schedule: &Schedule) -> String {
    let mut out = String::new();
    for batch in &schedule.batches {
        let ids: Vec<String> = batch.jobs.iter().map(ToString::to_string).collect();
        out.push_str(&format!("{}: {}\n", batch.processing_time, ids.join(",")));
    }
    out.push_str(&format!("makespan {}\n", schedule.makespan));
    out
}

/// Parses the schedule format. Loads are recomputed from `instance`; the
/// stated times and makespan are kept as written so that
/// [`validate_schedule`] can flag tampering.
pub fn parse_schedule(text: &str, instance: &Instance) -> Result<Schedule, DecodeError> {
    let sizes: HashMap<JobId, u64> = instance.jobs.iter().map(|j| (j.id, j.size)).collect();
    let mut batches = Vec::new();
    let mut stated_makespan = None;
    let err = |line: usize, message: String| DecodeError::Parse { line, message };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if stated_makespan.is_some() {
            return Err(err(line_no, "content after the makespan line".into()));
        }
        if let Some(rest) = line.strip_prefix("makespan") {
            let value = rest
                .trim()
                .parse::<u64>()
                .map_err(|e| err(line_no, format!("makespan: {e}")))?;
            stated_makespan = Some(value);
            continue;
        }
        let (time, ids) = line
            .split_once(':')
            .ok_or_else(|| err(line_no, "expected `P: id,id,...`".into()))?;
        let processing_time = time
            .trim()
            .parse::<u64>()
            .map_err(|e| err(line_no, format!("processing time: {e}")))?;
        let jobs = ids
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<JobId>().map_err(|e| err(line_no, format!("job id {s:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let used_capacity = jobs.iter().filter_map(|id| sizes.get(id)).sum();
        batches.push(Batch {
            jobs,
            processing_time,
            used_capacity,
        });
    }
    let makespan = stated_makespan.ok_or_else(|| err(text.lines().count() + 1, "missing makespan line".into()))?;
    Ok(Schedule { batches, makespan })
}

pub fn write_schedule(schedule: &Schedule, path: impl AsRef<Path>) -> Result<(), DecodeError> {
    std::fs::write(path, render_schedule(schedule))?;
    Ok(())
}

pub fn read_schedule(path: impl AsRef<Path>, instance: &Instance) -> Result<Schedule, DecodeError> {
    parse_schedule(&std::fs::read_to_string(path)?, instance)
}
