//! Problem input: jobs with a size and a processing time, and a machine
//! capacity. Submodules handle the class profile, random generators and the
//! plain-text file format.

mod generate;
mod io;
mod profile;

pub use generate::{
    generate_chen, generate_muter, generate_new, IntRange, SizeMode, TimeMode, CHEN_SIZE_RANGES,
    CHEN_TIME_RANGES, MUTER_SIZE_RANGES, MUTER_TIME_RANGES, NEW_CAPACITIES,
};
pub use io::{parse_instance, read_instance, render_instance, write_instance};
pub use profile::{profile, ClassProfile};

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;

pub type JobId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub size: u64,
    pub processing_time: u64,
}

impl Job {
    pub fn new(id: JobId, size: u64, processing_time: u64) -> Self {
        Self {
            id,
            size,
            processing_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub capacity: u64,
    pub jobs: Vec<Job>,
    pub seed: Option<u64>,
}

/// A single broken input rule. Violations are plain data so callers can
/// report all of them at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoJobs,
    ZeroCapacity,
    ZeroJobId,
    DuplicateId { job: JobId },
    SizeBelowOne { job: JobId },
    TimeBelowOne { job: JobId },
    SizeExceedsCapacity { job: JobId, size: u64, capacity: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoJobs => write!(f, "instance has no jobs"),
            Violation::ZeroCapacity => write!(f, "capacity must be at least 1"),
            Violation::ZeroJobId => write!(f, "job ids must be at least 1"),
            Violation::DuplicateId { job } => write!(f, "job {job} appears more than once"),
            Violation::SizeBelowOne { job } => write!(f, "job {job} size below 1"),
            Violation::TimeBelowOne { job } => write!(f, "job {job} processing time below 1"),
            Violation::SizeExceedsCapacity {
                job,
                size,
                capacity,
            } => write!(f, "job {job} size {size} exceeds capacity {capacity}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("invalid instance: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("generator: {0}")]
    Generator(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Instance {
    /// Builds an instance and rejects it if any invariant is broken.
    pub fn new(
        name: impl Into<String>,
        capacity: u64,
        jobs: Vec<Job>,
    ) -> Result<Self, InstanceError> {
        let instance = Self {
            name: name.into(),
            capacity,
            jobs,
            seed: None,
        };
        let violations = validate(&instance);
        if violations.is_empty() {
            Ok(instance)
        } else {
            Err(InstanceError::Invalid(violations))
        }
    }

    /// Jobs given as `(size, processing_time)` pairs, numbered from 1.
    pub fn from_pairs(capacity: u64, pairs: &[(u64, u64)]) -> Result<Self, InstanceError> {
        let jobs = pairs
            .iter()
            .enumerate()
            .map(|(i, &(s, p))| Job::new(i as JobId + 1, s, p))
            .collect();
        Self::new("unnamed", capacity, jobs)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn n_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    pub fn max_processing_time(&self) -> u64 {
        self.jobs
            .iter()
            .map(|j| j.processing_time)
            .max()
            .unwrap_or(0)
    }

    pub fn is_valid(&self) -> bool {
        validate(self).is_empty()
    }
}

/// Lists every broken invariant of `instance`; an empty list means valid.
pub fn validate(instance: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    if instance.jobs.is_empty() {
        out.push(Violation::NoJobs);
    }
    if instance.capacity == 0 {
        out.push(Violation::ZeroCapacity);
    }
    let mut seen = HashSet::with_capacity(instance.jobs.len());
    for job in &instance.jobs {
        if job.id == 0 {
            out.push(Violation::ZeroJobId);
        }
        if !seen.insert(job.id) {
            out.push(Violation::DuplicateId { job: job.id });
        }
        if job.size == 0 {
            out.push(Violation::SizeBelowOne { job: job.id });
        }
        if job.processing_time == 0 {
            out.push(Violation::TimeBelowOne { job: job.id });
        }
        if job.size > instance.capacity {
            out.push(Violation::SizeExceedsCapacity {
                job: job.id,
                size: job.size,
                capacity: instance.capacity,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(capacity: u64, jobs: &[(u64, u64)]) -> Instance {
        Instance {
            name: "t".into(),
            capacity,
            jobs: jobs
                .iter()
                .enumerate()
                .map(|(i, &(s, p))| Job::new(i as u64 + 1, s, p))
                .collect(),
            seed: None,
        }
    }

    #[test]
    fn valid_instance_has_no_violations() {
        assert!(validate(&raw(5, &[(3, 2)])).is_empty());
    }

    #[test]
    fn oversized_job_is_reported() {
        let v = validate(&raw(5, &[(6, 2)]));
        assert_eq!(
            v,
            vec![Violation::SizeExceedsCapacity {
                job: 1,
                size: 6,
                capacity: 5
            }]
        );
        assert_eq!(v[0].to_string(), "job 1 size 6 exceeds capacity 5");
    }

    #[test]
    fn zero_size_is_reported() {
        assert_eq!(
            validate(&raw(5, &[(0, 2)])),
            vec![Violation::SizeBelowOne { job: 1 }]
        );
    }

    #[test]
    fn duplicate_ids_and_empty_instances() {
        let mut inst = raw(5, &[(1, 1), (2, 2)]);
        inst.jobs[1].id = 1;
        assert_eq!(validate(&inst), vec![Violation::DuplicateId { job: 1 }]);
        assert_eq!(validate(&raw(0, &[])), vec![Violation::NoJobs, Violation::ZeroCapacity]);
    }

    #[test]
    fn constructor_rejects_invalid_input() {
        assert!(matches!(
            Instance::from_pairs(5, &[(6, 1)]),
            Err(InstanceError::Invalid(_))
        ));
        assert!(Instance::from_pairs(5, &[(5, 1)]).is_ok());
    }
}
