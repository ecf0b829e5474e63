//! Exhaustive reference solvers for tiny instances.
//!
//! [`brute_force`] walks every set partition of the jobs; [`subset_dp`]
//! solves the same problem with a dynamic program over job subsets. They
//! share no code beyond the instance type.

use crate::decode::Schedule;
use crate::instance::{Instance, JobId};

pub const DEFAULT_HARD_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{n} jobs exceed the oracle cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("invalid instance")]
    Invalid,
}

/// Optimal makespan and one optimal schedule, by restricted-growth-string
/// enumeration of all capacity-feasible partitions. Refuses instances with
/// more than `hard_cap_n` jobs.
pub fn brute_force(instance: &Instance, hard_cap_n: usize) -> Result<(u64, Schedule), OracleError> {
    let n = instance.n_jobs();
    if n > hard_cap_n {
        return Err(OracleError::TooLarge { n, cap: hard_cap_n });
    }
    if !instance.is_valid() {
        return Err(OracleError::Invalid);
    }
    let mut search = Partition {
        sizes: instance.jobs.iter().map(|j| j.size).collect(),
        times: instance.jobs.iter().map(|j| j.processing_time).collect(),
        capacity: instance.capacity,
        label: vec![0; n],
        loads: Vec::new(),
        longest: Vec::new(),
        best: u64::MAX,
        best_label: Vec::new(),
    };
    search.assign(0, 0);
    let mut groups: Vec<Vec<JobId>> = vec![Vec::new(); search.best_label.iter().max().map_or(0, |m| m + 1)];
    for (j, &b) in search.best_label.iter().enumerate() {
        groups[b].push(instance.jobs[j].id);
    }
    let schedule = Schedule::from_groups(groups, instance);
    Ok((search.best, schedule))
}

struct Partition {
    sizes: Vec<u64>,
    times: Vec<u64>,
    capacity: u64,
    label: Vec<usize>,
    loads: Vec<u64>,
    longest: Vec<u64>,
    best: u64,
    best_label: Vec<usize>,
}

impl Partition {
    fn assign(&mut self, j: usize, cost: u64) {
        if cost >= self.best {
            return;
        }
        if j == self.sizes.len() {
            self.best = cost;
            self.best_label = self.label.clone();
            return;
        }
        let (s, p) = (self.sizes[j], self.times[j]);
        for b in 0..self.loads.len() {
            if self.loads[b] + s > self.capacity {
                continue;
            }
            let before = self.longest[b];
            self.loads[b] += s;
            self.longest[b] = before.max(p);
            self.label[j] = b;
            self.assign(j + 1, cost - before + self.longest[b]);
            self.loads[b] -= s;
            self.longest[b] = before;
        }
        self.loads.push(s);
        self.longest.push(p);
        self.label[j] = self.loads.len() - 1;
        self.assign(j + 1, cost + p);
        self.loads.pop();
        self.longest.pop();
    }
}

/// Optimal makespan by DP over subsets: `f(S)` is the cheapest way to batch
/// `S`, and the batch holding the lowest-indexed job of `S` is enumerated
/// among the feasible subsets of `S`. Limited to the same cap as
/// [`brute_force`].
pub fn subset_dp(instance: &Instance, hard_cap_n: usize) -> Result<u64, OracleError> {
    let n = instance.n_jobs();
    if n > hard_cap_n || n >= 24 {
        return Err(OracleError::TooLarge { n, cap: hard_cap_n.min(23) });
    }
    if !instance.is_valid() {
        return Err(OracleError::Invalid);
    }
    let full = (1usize << n) - 1;
    let mut load = vec![0u64; full + 1];
    let mut cost = vec![0u64; full + 1];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        load[mask] = load[rest] + instance.jobs[low].size;
        cost[mask] = cost[rest].max(instance.jobs[low].processing_time);
    }
    let mut f = vec![u64::MAX; full + 1];
    f[0] = 0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let others = mask ^ low;
        // every subset `sub` of `others` gives a batch `sub | low`
        let mut sub = others;
        loop {
            let batch = sub | low;
            if load[batch] <= instance.capacity {
                let candidate = f[mask ^ batch].saturating_add(cost[batch]);
                if candidate < f[mask] {
                    f[mask] = candidate;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & others;
        }
    }
    Ok(f[full])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::validate_schedule;
    use proptest::prelude::*;

    #[test]
    fn four_job_example() {
        let inst = Instance::from_pairs(8, &[(2, 7), (6, 1), (4, 8), (4, 3)]).unwrap();
        let (opt, schedule) = brute_force(&inst, DEFAULT_HARD_CAP).unwrap();
        assert_eq!(opt, 12);
        assert_eq!(schedule.makespan, 12);
        assert!(validate_schedule(&schedule, &inst).is_empty());
        assert_eq!(subset_dp(&inst, DEFAULT_HARD_CAP).unwrap(), 12);
    }

    #[test]
    fn trivial_cases() {
        let one = Instance::from_pairs(4, &[(3, 9)]).unwrap();
        assert_eq!(brute_force(&one, DEFAULT_HARD_CAP).unwrap().0, 9);
        let forced = Instance::from_pairs(5, &[(5, 2), (5, 9)]).unwrap();
        assert_eq!(brute_force(&forced, DEFAULT_HARD_CAP).unwrap().0, 11);
        assert_eq!(subset_dp(&forced, DEFAULT_HARD_CAP).unwrap(), 11);
    }

    #[test]
    fn cap_is_enforced_and_overridable() {
        let pairs: Vec<(u64, u64)> = (0..11).map(|i| (1, 1 + i % 3)).collect();
        let inst = Instance::from_pairs(20, &pairs).unwrap();
        assert_eq!(
            brute_force(&inst, DEFAULT_HARD_CAP).unwrap_err(),
            OracleError::TooLarge { n: 11, cap: 10 }
        );
        assert!(subset_dp(&inst, DEFAULT_HARD_CAP).is_err());
        // all jobs fit one batch
        assert_eq!(brute_force(&inst, 11).unwrap().0, 3);
        assert_eq!(subset_dp(&inst, 11).unwrap(), 3);
    }

    fn small_instance() -> impl Strategy<Value = Instance> {
        (1u64..=10).prop_flat_map(|cap| {
            prop::collection::vec((1..=cap, 1u64..=20), 1..=7)
                .prop_map(move |pairs| Instance::from_pairs(cap, &pairs).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn oracles_agree(inst in small_instance()) {
            let (opt, schedule) = brute_force(&inst, DEFAULT_HARD_CAP).unwrap();
            prop_assert_eq!(opt, subset_dp(&inst, DEFAULT_HARD_CAP).unwrap());
            prop_assert!(validate_schedule(&schedule, &inst).is_empty());
            prop_assert_eq!(schedule.makespan, opt);
        }

        #[test]
        fn adding_a_job_never_helps(inst in small_instance(), s in 1u64..=10, p in 1u64..=20) {
            let base = subset_dp(&inst, DEFAULT_HARD_CAP).unwrap();
            let mut pairs: Vec<(u64, u64)> = inst.jobs.iter().map(|j| (j.size, j.processing_time)).collect();
            pairs.push((1 + (s - 1) % inst.capacity, p));
            let bigger = Instance::from_pairs(inst.capacity, &pairs).unwrap();
            prop_assert!(subset_dp(&bigger, DEFAULT_HARD_CAP).unwrap() >= base);
        }
    }
}
