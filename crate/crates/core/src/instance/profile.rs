use super::{validate, Instance, InstanceError};
use serde::{Deserialize, Serialize};

/// Jobs collapsed into (size, processing time) classes.
///
/// Rows are indexed by size class (ascending `sizes`), columns by time class
/// (ascending `times`). `nt_plus[l][t]` counts jobs of size `sizes[l]` whose
/// processing time is at most `times[t]`; `nj[t]` counts jobs with time
/// exactly `times[t]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassProfile {
    pub capacity: u64,
    pub times: Vec<u64>,
    pub sizes: Vec<u64>,
    pub nt: Vec<Vec<u64>>,
    pub nt_plus: Vec<Vec<u64>>,
    pub nj: Vec<u64>,
}

impl ClassProfile {
    /// Builds a profile from an explicit count table `nt[size][time]`.
    /// Sizes and times must be strictly ascending.
    pub fn from_counts(capacity: u64, sizes: Vec<u64>, times: Vec<u64>, nt: Vec<Vec<u64>>) -> Self {
        debug_assert!(sizes.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(times.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(nt.len(), sizes.len());
        let delta = times.len();
        let nt_plus = nt
            .iter()
            .map(|row| {
                row.iter()
                    .scan(0u64, |acc, &c| {
                        *acc += c;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        let nj = (0..delta).map(|t| nt.iter().map(|row| row[t]).sum()).collect();
        Self {
            capacity,
            times,
            sizes,
            nt,
            nt_plus,
            nj,
        }
    }

    /// Number of distinct processing times.
    pub fn delta(&self) -> usize {
        self.times.len()
    }

    /// Number of distinct sizes.
    pub fn theta(&self) -> usize {
        self.sizes.len()
    }

    pub fn n_jobs(&self) -> u64 {
        self.nj.iter().sum()
    }

    pub fn size_index(&self, size: u64) -> Option<usize> {
        self.sizes.binary_search(&size).ok()
    }

    pub fn time_index(&self, time: u64) -> Option<usize> {
        self.times.binary_search(&time).ok()
    }

    /// Total area `size * count` of the jobs in time class `t`.
    pub fn class_area(&self, t: usize) -> u64 {
        self.sizes
            .iter()
            .zip(&self.nt)
            .map(|(s, row)| s * row[t])
            .sum()
    }
}

/// Collapses an instance into its class profile.
pub fn profile(instance: &Instance) -> Result<ClassProfile, InstanceError> {
    let violations = validate(instance);
    if !violations.is_empty() {
        return Err(InstanceError::Invalid(violations));
    }
    let mut times: Vec<u64> = instance.jobs.iter().map(|j| j.processing_time).collect();
    times.sort_unstable();
    times.dedup();
    let mut sizes: Vec<u64> = instance.jobs.iter().map(|j| j.size).collect();
    sizes.sort_unstable();
    sizes.dedup();

    let mut nt = vec![vec![0u64; times.len()]; sizes.len()];
    for job in &instance.jobs {
        // both lookups succeed: the vectors were built from these jobs
        let l = sizes.binary_search(&job.size).unwrap();
        let t = times.binary_search(&job.processing_time).unwrap();
        nt[l][t] += 1;
    }
    Ok(ClassProfile::from_counts(instance.capacity, sizes, times, nt))
}
