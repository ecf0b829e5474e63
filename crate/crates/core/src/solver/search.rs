//! Depth-first branch-and-bound over batch patterns.
//!
//! Batches are opened one at a time. Each new batch must contain a job of
//! the largest remaining processing time, so its cost is known when it is
//! opened and the structures are visited in descending time order. For a
//! chosen pattern, jobs of each size are taken from the largest remaining
//! time class first. Only maximal patterns are branched on, and consecutive
//! batches of the same structure appear in nonincreasing lexicographic
//! order, which removes batch relabelings from the tree.
//!
//! Frames store only the rank of the chosen child; children are regenerated
//! on backtrack, so memory stays linear in the number of batches.

use super::bound::staircase_bound;
use super::patterns::{available, for_each_pattern, is_maximal, load};
use crate::instance::ClassProfile;
use std::ops::ControlFlow;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stop {
    Completed,
    TimeLimit,
    NodeLimit,
}

/// Objective and `(structure, counts)` per batch.
pub(crate) type Plan = (u64, Vec<(usize, Vec<u64>)>);

/// Starting point supplied by an earlier phase: an incumbent schedule and
/// a proven lower bound.
#[derive(Default)]
pub(crate) struct Seed {
    pub incumbent: Option<Plan>,
    pub bound: u64,
}

pub(crate) struct SearchOutcome {
    pub stop: Stop,
    /// Best schedule found as `(structure, counts)` per batch.
    pub best: Option<Plan>,
    pub bound: u64,
    pub nodes: u64,
    pub improvements: Vec<(u64, u64)>,
}

#[derive(Clone)]
struct Child {
    counts: Vec<u64>,
    bound: u64,
    /// Sum of area times processing time left unscheduled.
    weighted: u64,
    area: u64,
}

struct Frame {
    structure: usize,
    rank: usize,
    undo_from: usize,
    cost: u64,
}

struct State<'a> {
    profile: &'a ClassProfile,
    remaining: Vec<Vec<u64>>,
    area: Vec<u64>,
    /// `(size class, time class, amount)` taken by applied patterns.
    undo: Vec<(usize, usize, u64)>,
    /// Counts of every applied pattern, `theta` entries per frame.
    arena: Vec<u64>,
    frames: Vec<Frame>,
    cost: u64,
}

impl<'a> State<'a> {
    fn new(profile: &'a ClassProfile) -> Self {
        let area = (0..profile.delta()).map(|t| profile.class_area(t)).collect();
        Self {
            profile,
            remaining: profile.nt.clone(),
            area,
            undo: Vec::new(),
            arena: Vec::new(),
            frames: Vec::new(),
            cost: 0,
        }
    }

    fn theta(&self) -> usize {
        self.profile.theta()
    }

    /// Largest time class with unscheduled jobs.
    fn top_class(&self) -> Option<usize> {
        (0..self.area.len()).rev().find(|&t| self.area[t] > 0)
    }

    fn lower_bound(&self) -> u64 {
        staircase_bound(&self.area, &self.profile.times, self.profile.capacity)
    }

    /// Pattern of the previous batch if it belongs to structure `t`.
    fn run_cap(&self, t: usize) -> Option<&[u64]> {
        let last = self.frames.last()?;
        if last.structure != t {
            return None;
        }
        let theta = self.theta();
        let start = (self.frames.len() - 1) * theta;
        Some(&self.arena[start..start + theta])
    }

    /// Bound and weighted remaining area after applying `counts` at class
    /// `t`, without mutating state.
    fn child_bound(&self, t: usize, counts: &[u64], scratch: &mut Vec<u64>) -> (u64, u64) {
        scratch.clear();
        scratch.extend_from_slice(&self.area);
        for (l, &q) in counts.iter().enumerate() {
            let mut need = q;
            let size = self.profile.sizes[l];
            for tc in (0..=t).rev() {
                if need == 0 {
                    break;
                }
                let take = need.min(self.remaining[l][tc]);
                scratch[tc] -= take * size;
                need -= take;
            }
        }
        let weighted = scratch.iter().zip(&self.profile.times).map(|(a, p)| a * p).sum();
        (staircase_bound(scratch, &self.profile.times, self.profile.capacity), weighted)
    }

    /// Sorted children of the current node: maximal patterns of the top
    /// class, ordered by bound, then by how much long-job area they leave,
    /// then larger area, then lexicographically.
    fn children(&self, t: usize, deadline: &mut Deadline) -> Option<Vec<Child>> {
        let sizes = &self.profile.sizes;
        let capacity = self.profile.capacity;
        let avail = available(&self.remaining, t);
        let mut scratch = Vec::with_capacity(self.area.len());
        let mut out = Vec::new();
        let base = self.cost + self.profile.times[t];
        let flow = for_each_pattern(t, &self.remaining, sizes, capacity, self.run_cap(t), |counts| {
            if deadline.expired() {
                return ControlFlow::Break(());
            }
            if is_maximal(counts, &avail, sizes, capacity) {
                let (bound, weighted) = self.child_bound(t, counts, &mut scratch);
                out.push(Child {
                    counts: counts.to_vec(),
                    bound: base + bound,
                    weighted,
                    area: load(counts, sizes),
                });
            }
            ControlFlow::Continue(())
        });
        if flow.is_break() {
            return None;
        }
        // stable: ties keep enumeration (lexicographic) order
        out.sort_by(|a, b| {
            a.bound
                .cmp(&b.bound)
                .then(a.weighted.cmp(&b.weighted))
                .then(b.area.cmp(&a.area))
        });
        Some(out)
    }

    fn apply(&mut self, t: usize, counts: &[u64], rank: usize) {
        let undo_from = self.undo.len();
        for (l, &q) in counts.iter().enumerate() {
            let mut need = q;
            let size = self.profile.sizes[l];
            for tc in (0..=t).rev() {
                if need == 0 {
                    break;
                }
                let take = need.min(self.remaining[l][tc]);
                if take > 0 {
                    self.remaining[l][tc] -= take;
                    self.area[tc] -= take * size;
                    self.undo.push((l, tc, take));
                    need -= take;
                }
            }
            debug_assert_eq!(need, 0);
        }
        let cost = self.profile.times[t];
        self.cost += cost;
        self.arena.extend_from_slice(counts);
        self.frames.push(Frame {
            structure: t,
            rank,
            undo_from,
            cost,
        });
    }

    fn pop(&mut self) -> Option<Frame> {
        let frame = self.frames.pop()?;
        for (l, tc, take) in self.undo.drain(frame.undo_from..) {
            self.remaining[l][tc] += take;
            self.area[tc] += take * self.profile.sizes[l];
        }
        let theta = self.theta();
        self.arena.truncate(self.arena.len() - theta);
        self.cost -= frame.cost;
        Some(frame)
    }

    fn snapshot(&self) -> Vec<(usize, Vec<u64>)> {
        let theta = self.theta();
        self.frames
            .iter()
            .enumerate()
            .map(|(i, f)| (f.structure, self.arena[i * theta..(i + 1) * theta].to_vec()))
            .collect()
    }
}

pub(crate) struct Deadline {
    at: Option<Instant>,
    ticks: u32,
    hit: bool,
}

impl Deadline {
    pub fn new(at: Option<Instant>) -> Self {
        Self {
            at,
            ticks: 0,
            hit: false,
        }
    }

    pub fn expired(&mut self) -> bool {
        if self.hit {
            return true;
        }
        let Some(at) = self.at else {
            return false;
        };
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks % 64 == 0 || self.ticks == 1 {
            self.hit = Instant::now() >= at;
        }
        self.hit
    }

    pub fn check_now(&mut self) -> bool {
        if let Some(at) = self.at {
            self.hit = self.hit || Instant::now() >= at;
        }
        self.hit
    }
}

pub(crate) fn branch_and_bound(
    profile: &ClassProfile,
    deadline: &mut Deadline,
    node_limit: Option<u64>,
    seed: Seed,
) -> SearchOutcome {
    let mut state = State::new(profile);
    let root_bound = state.lower_bound().max(seed.bound);
    let mut best = seed.incumbent;
    let mut improvements: Vec<(u64, u64)> = best.iter().map(|(obj, _)| (0, *obj)).collect();
    let mut nodes = 0u64;
    let mut start_rank = 0usize;
    let mut stop = Stop::Completed;

    // the root holds no jobs only for empty profiles
    if state.top_class().is_none() {
        return SearchOutcome {
            stop,
            best: Some((0, Vec::new())),
            bound: 0,
            nodes: 0,
            improvements,
        };
    }

    'search: loop {
        if best.as_ref().is_some_and(|(obj, _)| *obj <= root_bound) {
            break;
        }
        let Some(t) = state.top_class() else {
            // leaf: every job is scheduled
            if best.as_ref().is_none_or(|(obj, _)| state.cost < *obj) {
                improvements.push((nodes, state.cost));
                best = Some((state.cost, state.snapshot()));
            }
            match backtrack(&mut state) {
                Some(rank) => {
                    start_rank = rank;
                    continue;
                }
                None => break,
            }
        };

        nodes += 1;
        if node_limit.is_some_and(|limit| nodes > limit) {
            stop = Stop::NodeLimit;
            nodes -= 1;
            break;
        }
        if nodes % 256 == 1 && deadline.check_now() {
            stop = Stop::TimeLimit;
            break;
        }
        let incumbent = best.as_ref().map_or(u64::MAX, |(obj, _)| *obj);
        let Some(children) = state.children(t, deadline) else {
            stop = Stop::TimeLimit;
            break;
        };
        let next = children
            .iter()
            .enumerate()
            .skip(start_rank)
            .find(|(_, c)| c.bound < incumbent);
        match next {
            Some((rank, child)) => {
                let counts = child.counts.clone();
                state.apply(t, &counts, rank);
                start_rank = 0;
            }
            None => match backtrack(&mut state) {
                Some(rank) => start_rank = rank,
                None => break 'search,
            },
        }
    }

    let incumbent = best.as_ref().map(|(obj, _)| *obj);
    let bound = match stop {
        Stop::Completed => incumbent.unwrap_or(root_bound),
        _ => {
            let frontier = frontier_bound(&mut state, start_rank, incumbent);
            let b = root_bound.max(frontier.unwrap_or(u64::MAX));
            incumbent.map_or(b, |obj| b.min(obj))
        }
    };
    SearchOutcome {
        stop,
        best,
        bound,
        nodes,
        improvements,
    }
}

/// Pops one frame and returns the rank to resume from at the parent.
fn backtrack(state: &mut State<'_>) -> Option<usize> {
    state.pop().map(|f| f.rank + 1)
}

/// Smallest bound among unexplored subtrees, unwinding the stack. `None`
/// when nothing open remains below the incumbent.
fn frontier_bound(state: &mut State<'_>, start_rank: usize, incumbent: Option<u64>) -> Option<u64> {
    let limit = incumbent.unwrap_or(u64::MAX);
    let mut unlimited = Deadline::new(None);
    let mut best: Option<u64> = None;
    let mut note = |b: u64| {
        if b < limit {
            best = Some(best.map_or(b, |x: u64| x.min(b)));
        }
    };
    let mut from_rank = start_rank;
    loop {
        if let Some(t) = state.top_class() {
            if from_rank == 0 {
                note(state.cost + state.lower_bound());
            } else if let Some(children) = state.children(t, &mut unlimited) {
                for child in children.iter().skip(from_rank) {
                    note(child.bound);
                }
            }
        }
        match state.pop() {
            Some(frame) => from_rank = frame.rank + 1,
            None => break,
        }
    }
    best
}
