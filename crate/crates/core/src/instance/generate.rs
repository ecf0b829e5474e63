//! Seeded instance generators for the three benchmark families.
//!
//! All generators draw from ChaCha8 seeded with `seed_from_u64(seed)`. For
//! job `i = 1..=n` the size is drawn first, then the processing time, each
//! uniformly from a closed integer interval by rejection sampling on raw
//! 64-bit outputs. The stream is therefore fixed by `(parameters, seed)` on
//! every platform.

use super::{Instance, InstanceError, Job};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Closed integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntRange {
    pub lo: u64,
    pub hi: u64,
}

impl IntRange {
    pub const fn new(lo: u64, hi: u64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: u64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn width(&self) -> u64 {
        self.hi - self.lo + 1
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

impl FromStr for IntRange {
    type Err = String;

    /// Accepts `lo-hi`, `lo..hi`, `[lo,hi]` or a single value.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts: Vec<&str> = if t.contains("..") {
            t.split("..").collect()
        } else if t.contains(',') {
            t.split(',').collect()
        } else {
            t.split('-').collect()
        };
        let parse = |x: &str| {
            x.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad range {s:?}: {e}"))
        };
        let (lo, hi) = match parts.as_slice() {
            [v] => (parse(v)?, parse(v)?),
            [a, b] => (parse(a)?, parse(b)?),
            _ => return Err(format!("bad range {s:?}")),
        };
        if lo > hi {
            return Err(format!("empty range {s:?}"));
        }
        Ok(IntRange { lo, hi })
    }
}

/// Processing-time intervals `p1`, `p2` of the Chen et al. family.
pub const CHEN_TIME_RANGES: [IntRange; 2] = [IntRange::new(1, 10), IntRange::new(1, 20)];
/// Size intervals `s1`, `s2`, `s3` shared by the Chen and Muter families.
pub const CHEN_SIZE_RANGES: [IntRange; 3] = [
    IntRange::new(1, 10),
    IntRange::new(2, 4),
    IntRange::new(4, 8),
];
pub const MUTER_TIME_RANGES: [IntRange; 3] = [
    IntRange::new(1, 10),
    IntRange::new(1, 20),
    IntRange::new(1, 100),
];
pub const MUTER_SIZE_RANGES: [IntRange; 3] = CHEN_SIZE_RANGES;
/// Capacities used by the new family.
pub const NEW_CAPACITIES: [u64; 3] = [20, 50, 100];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeMode {
    /// `[1, 20]`
    P1,
    /// `[1, n]`
    P2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SizeMode {
    /// `[1, B]`
    S1,
    /// `[0.2B, 0.4B]`
    S2,
    /// `[0.4B, 0.8B]`
    S3,
}

impl TimeMode {
    pub fn range(self, n_jobs: usize) -> IntRange {
        match self {
            TimeMode::P1 => IntRange::new(1, 20),
            TimeMode::P2 => IntRange::new(1, (n_jobs as u64).max(1)),
        }
    }
}

/// `round(capacity * tenths / 10)` with halves rounded up.
fn scaled(capacity: u64, tenths: u64) -> u64 {
    (capacity * tenths + 5) / 10
}

impl SizeMode {
    pub fn range(self, capacity: u64) -> IntRange {
        let (lo, hi) = match self {
            SizeMode::S1 => (1, capacity),
            SizeMode::S2 => (scaled(capacity, 2), scaled(capacity, 4)),
            SizeMode::S3 => (scaled(capacity, 4), scaled(capacity, 8)),
        };
        IntRange::new(lo.max(1), hi.max(1))
    }
}

impl FromStr for TimeMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(TimeMode::P1),
            "p2" => Ok(TimeMode::P2),
            _ => Err(format!("unknown time mode {s:?} (expected p1|p2)")),
        }
    }
}

impl FromStr for SizeMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(SizeMode::S1),
            "s2" => Ok(SizeMode::S2),
            "s3" => Ok(SizeMode::S3),
            _ => Err(format!("unknown size mode {s:?} (expected s1|s2|s3)")),
        }
    }
}

impl fmt::Display for TimeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeMode::P1 => "p1",
            TimeMode::P2 => "p2",
        })
    }
}

impl fmt::Display for SizeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SizeMode::S1 => "s1",
            SizeMode::S2 => "s2",
            SizeMode::S3 => "s3",
        })
    }
}

/// Uniform draw from `range` without modulo bias.
fn sample(rng: &mut ChaCha8Rng, range: IntRange) -> u64 {
    let span = range.width();
    // 2^64 mod span; draws at or above 2^64 - rem would be biased
    let rem = (u64::MAX % span + 1) % span;
    let limit = u64::MAX - rem;
    loop {
        let x = rng.next_u64();
        if x <= limit {
            return range.lo + x % span;
        }
    }
}

fn generate_uniform(
    family: &str,
    n_jobs: usize,
    times: IntRange,
    sizes: IntRange,
    capacity: u64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    if n_jobs == 0 {
        return Err(InstanceError::Generator("n_jobs must be at least 1".into()));
    }
    if times.lo == 0 || sizes.lo == 0 || times.lo > times.hi || sizes.lo > sizes.hi {
        return Err(InstanceError::Generator(format!(
            "ranges must be nonempty and positive (p={times}, s={sizes})"
        )));
    }
    if sizes.hi > capacity {
        return Err(InstanceError::Generator(format!(
            "size upper bound {} exceeds capacity {capacity}",
            sizes.hi
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs = (1..=n_jobs as u64)
        .map(|id| {
            let size = sample(&mut rng, sizes);
            let time = sample(&mut rng, times);
            Job::new(id, size, time)
        })
        .collect();
    let name = format!("{family}_n{n_jobs}_p{times}_s{sizes}_B{capacity}_seed{seed}");
    Ok(Instance::new(name, capacity, jobs)?.with_seed(Some(seed)))
}

/// Chen et al. family: uniform sizes and times, typically `B = 10`.
pub fn generate_chen(
    n_jobs: usize,
    time_range: IntRange,
    size_range: IntRange,
    capacity: u64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    generate_uniform("chen", n_jobs, time_range, size_range, capacity, seed)
}

/// Muter family: same sampling as [`generate_chen`], wider time ranges.
pub fn generate_muter(
    n_jobs: usize,
    time_range: IntRange,
    size_range: IntRange,
    capacity: u64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    generate_uniform("muter", n_jobs, time_range, size_range, capacity, seed)
}

/// New family with capacity-proportional size intervals.
pub fn generate_new(
    n_jobs: usize,
    time_mode: TimeMode,
    size_mode: SizeMode,
    capacity: u64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    if !NEW_CAPACITIES.contains(&capacity) {
        log::warn!("capacity {capacity} is outside the usual set {NEW_CAPACITIES:?}");
    }
    let times = time_mode.range(n_jobs);
    let sizes = size_mode.range(capacity);
    let inst = generate_uniform("new", n_jobs, times, sizes, capacity, seed)?;
    let name = format!("new_n{n_jobs}_{time_mode}{size_mode}_B{capacity}_seed{seed}");
    Ok(inst.with_name(name))
}
