//! Dynamic program over time classes for instances with few sizes.
//!
//! Group the batches of a schedule by the time class of their longest job.
//! Swapping two jobs of equal size so that the longer one sits in the
//! costlier batch never raises a batch time, so some optimal schedule fills
//! batches with the jobs of each size in order of processing time. Between
//! two levels the only thing that matters is then, per size, how many jobs
//! of shorter classes were already pulled up into costlier batches.
//!
//! Level `k` must hold its own jobs that were not pulled up plus any new
//! filler jobs from below, in at least `ceil(area / B)` batches. Charging
//! exactly that count gives a lower bound. States whose pulled-up area
//! exceeds a cap are not expanded. Each of them is closed with a
//! staircase bound instead. The cheapest path is also turned into a
//! schedule by packing every level explicitly.

use super::bound::staircase_bound;
use super::search::{branch_and_bound, Deadline, Plan, Seed, Stop};
use crate::instance::ClassProfile;
use std::collections::HashMap;

pub(crate) struct LevelOutcome {
    pub bound: u64,
    /// Packed cheapest path as `(structure, counts)` batches with its cost.
    pub plan: Option<Plan>,
}

struct Node {
    pulled: Vec<u64>,
    cost: u64,
    parent: usize,
    fill: Vec<u64>,
}

fn area(counts: &[u64], sizes: &[u64]) -> u64 {
    counts.iter().zip(sizes).map(|(q, s)| q * s).sum()
}

/// Visits every vector `f <= limit` with `area(f) <= budget`.
fn for_each_fill(limit: &[u64], sizes: &[u64], budget: u64, visit: &mut impl FnMut(&[u64])) {
    fn go(pos: usize, limit: &[u64], sizes: &[u64], budget: u64, f: &mut Vec<u64>, visit: &mut impl FnMut(&[u64])) {
        if pos == limit.len() {
            visit(f);
            return;
        }
        let most = limit[pos].min(budget / sizes[pos]);
        for q in 0..=most {
            f[pos] = q;
            go(pos + 1, limit, sizes, budget - q * sizes[pos], f, visit);
        }
        f[pos] = 0;
    }
    let mut f = vec![0; limit.len()];
    go(0, limit, sizes, budget, &mut f, visit);
}

/// Areas per time class below `k` after removing `taken[l]` jobs of each
/// size, longest first.
fn residual_below(profile: &ClassProfile, k: usize, taken: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; k];
    for (l, row) in profile.nt.iter().enumerate() {
        let mut skip = taken[l];
        for t in (0..k).rev() {
            let gone = skip.min(row[t]);
            skip -= gone;
            out[t] += (row[t] - gone) * profile.sizes[l];
        }
    }
    out
}

/// Lower bound for every completion in which level `k` pulls up at least
/// `extra` more area than `carry` already holds.
fn escape_bound(profile: &ClassProfile, k: usize, carry: &[u64], own_area: u64, extra: u64) -> u64 {
    let mut areas = residual_below(profile, k, carry);
    let mut moved = 0u64;
    for t in (0..k).rev() {
        let take = (extra - moved).min(areas[t]);
        areas[t] -= take;
        moved += take;
    }
    areas.push(own_area + moved);
    staircase_bound(&areas, &profile.times[..=k], profile.capacity)
}

/// Runs the level program. `None` when the state space would exceed
/// `state_limit` or the deadline passes.
pub(crate) fn level_search(
    profile: &ClassProfile,
    deadline: &mut Deadline,
    cap_area: u64,
    state_limit: usize,
) -> Option<LevelOutcome> {
    let sizes = &profile.sizes;
    let theta = profile.theta();
    let delta = profile.delta();
    let capacity = profile.capacity;
    let mut levels: Vec<Vec<Node>> = Vec::with_capacity(delta);
    let mut frontier = vec![Node {
        pulled: vec![0; theta],
        cost: 0,
        parent: usize::MAX,
        fill: vec![0; theta],
    }];
    let mut escape = u64::MAX;

    for k in (0..delta).rev() {
        let below: Vec<u64> = profile.nt_plus.iter().map(|row| if k == 0 { 0 } else { row[k - 1] }).collect();
        let mut next: Vec<Node> = Vec::new();
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        for (i, node) in frontier.iter().enumerate() {
            if deadline.expired() {
                return None;
            }
            let own: Vec<u64> = (0..theta).map(|l| profile.nt[l][k].saturating_sub(node.pulled[l])).collect();
            let carry: Vec<u64> = (0..theta)
                .map(|l| node.pulled[l].saturating_sub(profile.nt[l][k]))
                .collect();
            let own_area = area(&own, sizes);
            let own_jobs: u64 = own.iter().sum();
            let carry_area = area(&carry, sizes);
            let limit: Vec<u64> = (0..theta).map(|l| below[l] - carry[l]).collect();
            let mut visit = |fill: &[u64]| {
                let batches = (own_area + area(fill, sizes)).div_ceil(capacity);
                if batches > own_jobs {
                    return;
                }
                let cost = node.cost + batches * profile.times[k];
                let pulled: Vec<u64> = carry.iter().zip(fill).map(|(c, f)| c + f).collect();
                match index.get(&pulled) {
                    Some(&j) if next[j].cost <= cost => {}
                    Some(&j) => {
                        next[j].cost = cost;
                        next[j].parent = i;
                        next[j].fill = fill.to_vec();
                    }
                    None => {
                        index.insert(pulled.clone(), next.len());
                        next.push(Node {
                            pulled,
                            cost,
                            parent: i,
                            fill: fill.to_vec(),
                        });
                    }
                }
            };
            if own_jobs == 0 {
                visit(&vec![0; theta]);
            } else {
                for_each_fill(&limit, sizes, cap_area - carry_area, &mut visit);
                if area(&limit, sizes) > cap_area - carry_area {
                    let extra = cap_area - carry_area + 1;
                    let tail = escape_bound(profile, k, &carry, own_area, extra);
                    escape = escape.min(node.cost + tail);
                }
            }
            if next.len() > state_limit {
                return None;
            }
        }
        levels.push(std::mem::replace(&mut frontier, next));
    }

    let (best, best_cost) = frontier
        .iter()
        .enumerate()
        .min_by_key(|(_, n)| n.cost)
        .map(|(i, n)| (i, n.cost))?;
    let bound = best_cost.min(escape);

    // walk back: levels[d] holds the states entering level delta-1-d
    let mut contents: Vec<Vec<u64>> = vec![Vec::new(); delta];
    let mut own_jobs = vec![0u64; delta];
    let mut at = best;
    let mut here = &frontier;
    for d in (0..delta).rev() {
        let k = delta - 1 - d;
        let node = &here[at];
        let parent = &levels[d][node.parent];
        let own: Vec<u64> = (0..theta).map(|l| profile.nt[l][k].saturating_sub(parent.pulled[l])).collect();
        own_jobs[k] = own.iter().sum();
        contents[k] = own.iter().zip(&node.fill).map(|(o, f)| o + f).collect();
        at = node.parent;
        here = &levels[d];
    }

    let mut batches = Vec::new();
    let mut cost = 0u64;
    for (k, content) in contents.iter().enumerate().rev() {
        // every batch of a level needs one of the level's own jobs
        let packed = match pack(content, sizes, capacity, deadline) {
            Some(p) if p.len() as u64 <= own_jobs[k] => p,
            _ => return Some(LevelOutcome { bound, plan: None }),
        };
        cost += packed.len() as u64 * profile.times[k];
        batches.extend(packed.into_iter().map(|counts| (k, counts)));
    }
    Some(LevelOutcome {
        bound,
        plan: Some((cost, batches)),
    })
}

/// Remaining area below which packing switches to exact search.
const EXACT_AREA: u64 = 12;
const EXACT_NODES: u64 = 200_000;

/// Packs `counts[l]` jobs of size `sizes[l]` into few batches: full
/// batches chosen to follow the remaining mix while much area is left,
/// then an exact search on the rest.
pub(crate) fn pack(counts: &[u64], sizes: &[u64], capacity: u64, deadline: &mut Deadline) -> Option<Vec<Vec<u64>>> {
    let mut left = counts.to_vec();
    let mut out = Vec::new();
    let full = full_patterns(sizes, capacity);
    while area(&left, sizes) > EXACT_AREA * capacity {
        if deadline.expired() {
            return None;
        }
        let score = |p: &Vec<u64>| -> u128 {
            p.iter()
                .zip(sizes)
                .zip(&left)
                .map(|((&q, &s), &n)| q as u128 * s as u128 * n as u128 * s as u128)
                .sum()
        };
        let Some(p) = full
            .iter()
            .filter(|p| p.iter().zip(&left).all(|(q, n)| q <= n))
            .max_by(|a, b| score(a).cmp(&score(b)).then(b.cmp(a)))
        else {
            break;
        };
        let room = p
            .iter()
            .zip(&left)
            .filter(|(&q, _)| q > 0)
            .map(|(q, n)| n / q)
            .min()
            .unwrap_or(1);
        let copies = (room / 16).max(1);
        for (n, q) in left.iter_mut().zip(p) {
            *n -= q * copies;
        }
        out.extend(std::iter::repeat_n(p.clone(), copies as usize));
    }
    out.extend(pack_exact(&left, sizes, capacity, deadline)?);
    Some(out)
}

/// Count vectors that fill a batch exactly, largest sizes first.
fn full_patterns(sizes: &[u64], capacity: u64) -> Vec<Vec<u64>> {
    fn go(pos: usize, sizes: &[u64], slack: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if slack == 0 {
            out.push(cur.clone());
            return;
        }
        if pos == 0 || out.len() >= 10_000 {
            return;
        }
        let l = pos - 1;
        for q in (0..=slack / sizes[l]).rev() {
            cur[l] = q;
            go(l, sizes, slack - q * sizes[l], cur, out);
        }
        cur[l] = 0;
    }
    let mut out = Vec::new();
    go(sizes.len(), sizes, capacity, &mut vec![0; sizes.len()], &mut out);
    out
}

/// Fewest batches for a small multiset, by the pattern search on a single
/// time class.
fn pack_exact(counts: &[u64], sizes: &[u64], capacity: u64, deadline: &mut Deadline) -> Option<Vec<Vec<u64>>> {
    let used: Vec<usize> = (0..sizes.len()).filter(|&l| counts[l] > 0).collect();
    if used.is_empty() {
        return Some(Vec::new());
    }
    let sub = ClassProfile::from_counts(
        capacity,
        used.iter().map(|&l| sizes[l]).collect(),
        vec![1],
        used.iter().map(|&l| vec![counts[l]]).collect(),
    );
    let outcome = branch_and_bound(&sub, deadline, Some(EXACT_NODES), Seed::default());
    if outcome.stop == Stop::TimeLimit && outcome.best.is_none() {
        return None;
    }
    let (_, batches) = outcome.best?;
    Some(
        batches
            .into_iter()
            .map(|(_, c)| {
                let mut full = vec![0; sizes.len()];
                for (&l, q) in used.iter().zip(c) {
                    full[l] = q;
                }
                full
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{profile, Instance};

    #[test]
    fn full_patterns_fill_exactly() {
        let p = full_patterns(&[2, 3, 4], 10);
        assert!(p.iter().all(|c| area(c, &[2, 3, 4]) == 10));
        assert!(p.contains(&vec![1, 0, 2]));
        assert!(p.contains(&vec![0, 2, 1]));
        assert!(p.contains(&vec![5, 0, 0]));
        assert_eq!(p.len(), 5);
    }

    #[test]
    fn packing_keeps_every_job() {
        let mut d = Deadline::new(None);
        let counts = [1234, 987, 1111];
        let bins = pack(&counts, &[2, 3, 4], 10, &mut d).unwrap();
        for l in 0..3 {
            assert_eq!(bins.iter().map(|b| b[l]).sum::<u64>(), counts[l]);
        }
        assert!(bins.iter().all(|b| area(b, &[2, 3, 4]) <= 10));
        let lower = area(&counts, &[2, 3, 4]).div_ceil(10);
        assert!(bins.len() as u64 <= lower + 1);
    }

    #[test]
    fn small_instance_bound_and_plan() {
        let inst = Instance::from_pairs(
            10,
            &[(3, 5), (3, 5), (3, 5), (2, 1), (2, 1), (2, 1), (2, 1), (3, 1)],
        )
        .unwrap();
        let p = profile(&inst).unwrap();
        let out = level_search(&p, &mut Deadline::new(None), 40, 10_000).unwrap();
        assert_eq!(out.bound, 7);
        assert_eq!(out.plan.unwrap().0, 7);
    }
}
