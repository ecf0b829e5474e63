//! Plain-text instance files.
//!
//! ```text
//! # name: four_jobs
//! 4 8
//! 1 2 7
//! 2 6 1
//! 3 4 8
//! 4 4 3
//! seed 17
//! ```
//!
//! Line 1 (after comments) is `n B`, followed by exactly `n` lines
//! `id size processing_time`. Lines starting with `#` are comments; the
//! comment `# name: <label>` carries the instance name. An optional final
//! line `seed <u64>` records the generator seed.

use super::{validate, Instance, InstanceError, Job};
use std::fmt::Write as _;
use std::path::Path;

pub fn render_instance(instance: &Instance) -> String {
    let mut out = String::with_capacity(16 * instance.jobs.len() + 64);
    if !instance.name.is_empty() {
        let _ = writeln!(out, "# name: {}", instance.name);
    }
    let _ = writeln!(out, "{} {}", instance.jobs.len(), instance.capacity);
    for job in &instance.jobs {
        let _ = writeln!(out, "{} {} {}", job.id, job.size, job.processing_time);
    }
    if let Some(seed) = instance.seed {
        let _ = writeln!(out, "seed {seed}");
    }
    out
}

pub fn write_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    std::fs::write(path, render_instance(instance))?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text)
}

fn parse_err(line: usize, message: impl Into<String>) -> InstanceError {
    InstanceError::Parse {
        line,
        message: message.into(),
    }
}

fn numbers<const N: usize>(line_no: usize, line: &str) -> Result<[u64; N], InstanceError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != N {
        return Err(parse_err(
            line_no,
            format!("expected {N} fields, found {}", fields.len()),
        ));
    }
    let mut out = [0u64; N];
    for (slot, field) in out.iter_mut().zip(&fields) {
        *slot = field
            .parse()
            .map_err(|e| parse_err(line_no, format!("{field:?}: {e}")))?;
    }
    Ok(out)
}

pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut name = String::new();
    let mut header: Option<(usize, u64)> = None;
    let mut jobs = Vec::new();
    let mut seed = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(label) = comment.trim_start().strip_prefix("name:") {
                name = label.trim().to_string();
            }
            continue;
        }
        if seed.is_some() {
            return Err(parse_err(line_no, "content after seed line"));
        }
        match header {
            None => {
                let [n, b] = numbers::<2>(line_no, line)?;
                header = Some((n as usize, b));
                jobs.reserve(n as usize);
            }
            Some((n, _)) => {
                if let Some(rest) = line.strip_prefix("seed") {
                    let value = rest
                        .trim()
                        .parse::<u64>()
                        .map_err(|e| parse_err(line_no, format!("seed: {e}")))?;
                    seed = Some(value);
                    continue;
                }
                if jobs.len() == n {
                    return Err(parse_err(
                        line_no,
                        format!("header declares {n} jobs but more job lines follow"),
                    ));
                }
                let [id, size, time] = numbers::<3>(line_no, line)?;
                jobs.push(Job::new(id, size, time));
            }
        }
    }

    let (n, capacity) = header.ok_or_else(|| parse_err(0, "missing header line `n B`"))?;
    if jobs.len() != n {
        return Err(parse_err(
            0,
            format!("header declares {n} jobs, found {}", jobs.len()),
        ));
    }
    let instance = Instance {
        name,
        capacity,
        jobs,
        seed,
    };
    let violations = validate(&instance);
    if !violations.is_empty() {
        return Err(InstanceError::Invalid(violations));
    }
    Ok(instance)
}
