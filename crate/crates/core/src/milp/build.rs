use super::model::{MilpModel, Relation};
use crate::decode::{decode, DecodeError, Schedule};
use crate::graph::{bounds, build_graph, reduce, ArcKind};
use crate::instance::{profile, Instance, InstanceError, JobId};
use crate::solver::FlowSolution;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    /// Assignment model with explicit batch times.
    Milp1,
    /// Assignment model over jobs sorted by processing time, where batch
    /// `k` exists only if job `k` leads it.
    Milp1Plus,
    /// Arc-flow model with one graph copy per distinct processing time.
    Flow,
}

impl Formulation {
    pub const ALL: [Formulation; 3] = [Formulation::Milp1, Formulation::Milp1Plus, Formulation::Flow];

    pub fn as_str(self) -> &'static str {
        match self {
            Formulation::Milp1 => "milp1",
            Formulation::Milp1Plus => "milp1plus",
            Formulation::Flow => "flow",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Formulation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_', '+'], "").as_str() {
            "milp1" => Ok(Formulation::Milp1),
            "milp1plus" => Ok(Formulation::Milp1Plus),
            "flow" => Ok(Formulation::Flow),
            _ => Err(format!("unknown formulation {s:?} (milp1, milp1plus, flow)")),
        }
    }
}

/// A built model plus what is needed to read its solutions back.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltModel {
    pub formulation: Formulation,
    pub model: MilpModel,
    /// Job id at each position of the assignment models (1-based position
    /// `j` in variable names maps to `job_order[j - 1]`); empty for FLOW.
    pub job_order: Vec<JobId>,
}

pub fn build_model(instance: &Instance, formulation: Formulation) -> Result<BuiltModel, InstanceError> {
    match formulation {
        Formulation::Milp1 => build_milp1(instance),
        Formulation::Milp1Plus => build_milp1_plus(instance),
        Formulation::Flow => build_flow(instance),
    }
}

fn check(instance: &Instance) -> Result<(), InstanceError> {
    let violations = crate::instance::validate(instance);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(InstanceError::Invalid(violations))
    }
}

/// One batch slot per job: `x_j_k`, `y_k` binary, `C_k` in `[0, max p]`.
pub fn build_milp1(instance: &Instance) -> Result<BuiltModel, InstanceError> {
    check(instance)?;
    let n = instance.n_jobs();
    let jobs = &instance.jobs;
    let max_p = instance.max_processing_time() as f64;
    let mut m = MilpModel::new(format!("milp1_{}", instance.name));
    let mut x = vec![vec![0usize; n]; n];
    for (j, row) in x.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = m.add_binary(&format!("x_{}_{}", j + 1, k + 1), 0.0);
        }
    }
    let y: Vec<usize> = (0..n).map(|k| m.add_binary(&format!("y_{}", k + 1), 0.0)).collect();
    let c: Vec<usize> = (0..n)
        .map(|k| m.add_variable(&format!("C_{}", k + 1), 0.0, max_p, false, 1.0))
        .collect();

    for j in 0..n {
        let terms = (0..n).map(|k| (x[j][k], 1.0)).collect();
        m.add_constraint(&format!("assign_{}", j + 1), terms, Relation::Eq, 1.0);
    }
    for k in 0..n {
        let mut terms: Vec<(usize, f64)> = (0..n).map(|j| (x[j][k], jobs[j].size as f64)).collect();
        terms.push((y[k], -(instance.capacity as f64)));
        m.add_constraint(&format!("cap_{}", k + 1), terms, Relation::Le, 0.0);
    }
    for j in 0..n {
        for k in 0..n {
            m.add_constraint(
                &format!("proc_{}_{}", j + 1, k + 1),
                vec![(c[k], 1.0), (x[j][k], -(jobs[j].processing_time as f64))],
                Relation::Ge,
                0.0,
            );
        }
    }
    for j in 0..n {
        for k in 0..n {
            m.add_constraint(
                &format!("link_{}_{}", j + 1, k + 1),
                vec![(x[j][k], 1.0), (y[k], -1.0)],
                Relation::Le,
                0.0,
            );
        }
    }
    Ok(BuiltModel {
        formulation: Formulation::Milp1,
        model: m,
        job_order: jobs.iter().map(|j| j.id).collect(),
    })
}

/// Jobs sorted by processing time (ties by id); `x_j_k` exists for `j <= k`
/// and `x_k_k` says that job `k` opens batch `k`.
pub fn build_milp1_plus(instance: &Instance) -> Result<BuiltModel, InstanceError> {
    check(instance)?;
    let mut order: Vec<_> = instance.jobs.iter().collect();
    order.sort_by_key(|j| (j.processing_time, j.id));
    let n = order.len();
    let b = instance.capacity as f64;
    let mut m = MilpModel::new(format!("milp1plus_{}", instance.name));
    let mut x = vec![vec![usize::MAX; n]; n];
    for j in 0..n {
        for k in j..n {
            let obj = if j == k { order[k].processing_time as f64 } else { 0.0 };
            x[j][k] = m.add_binary(&format!("x_{}_{}", j + 1, k + 1), obj);
        }
    }
    for j in 0..n {
        let terms = (j..n).map(|k| (x[j][k], 1.0)).collect();
        m.add_constraint(&format!("assign_{}", j + 1), terms, Relation::Eq, 1.0);
    }
    for k in 0..n {
        let mut terms: Vec<(usize, f64)> = (0..k).map(|j| (x[j][k], order[j].size as f64)).collect();
        terms.push((x[k][k], order[k].size as f64 - b));
        m.add_constraint(&format!("cap_{}", k + 1), terms, Relation::Le, 0.0);
    }
    for k in 0..n {
        for j in 0..k {
            m.add_constraint(
                &format!("link_{}_{}", j + 1, k + 1),
                vec![(x[j][k], 1.0), (x[k][k], -1.0)],
                Relation::Le,
                0.0,
            );
        }
    }
    Ok(BuiltModel {
        formulation: Formulation::Milp1Plus,
        model: m,
        job_order: order.iter().map(|j| j.id).collect(),
    })
}

/// Arc-flow model on the reduced graph. Structures are numbered from 1 in
/// ascending processing time. Variables: `f_i_j_t` per job arc, `y_i_B_t`
/// per loss arc, `v_t` per feedback arc and `z_c_t` for carried-over jobs
/// of size `c`.
pub fn build_flow(instance: &Instance) -> Result<BuiltModel, InstanceError> {
    check(instance)?;
    let prof = profile(instance)?;
    let graph = reduce(&build_graph(&prof).expect("validated sizes fit"));
    let ub = bounds(&graph, &prof);
    let delta = prof.delta();
    let mut m = MilpModel::new(format!("flow_{}", instance.name));

    // var[t][arc]
    let mut var = vec![vec![0usize; graph.num_arcs()]; delta];
    for t in 0..delta {
        for (a, arc) in graph.arcs().iter().enumerate() {
            let upper = ub.get(a, t) as f64;
            var[t][a] = match arc.kind {
                ArcKind::Job => m.add_variable(&format!("f_{}_{}_{}", arc.tail, arc.head, t + 1), 0.0, upper, true, 0.0),
                ArcKind::Loss => m.add_variable(&format!("y_{}_{}_{}", arc.tail, arc.head, t + 1), 0.0, upper, true, 0.0),
                ArcKind::Feedback => {
                    m.add_variable(&format!("v_{}", t + 1), 0.0, upper, true, prof.times[t] as f64)
                }
            };
        }
    }
    // z[l][t] for t < delta - 1 with jobs available
    let mut z = vec![vec![None; delta]; prof.theta()];
    for (l, &size) in prof.sizes.iter().enumerate() {
        for t in 0..delta.saturating_sub(1) {
            let upper = prof.nt_plus[l][t];
            if upper > 0 {
                z[l][t] = Some(m.add_variable(&format!("z_{}_{}", size, t + 1), 0.0, upper as f64, true, 0.0));
            }
        }
    }

    for t in 0..delta {
        for node in 0..graph.num_nodes() {
            let mut terms: Vec<(usize, f64)> = Vec::new();
            terms.extend(graph.in_arcs(node).iter().map(|&a| (var[t][a], 1.0)));
            terms.extend(graph.out_arcs(node).iter().map(|&a| (var[t][a], -1.0)));
            if !terms.is_empty() {
                m.add_constraint(&format!("cons_{}_{}", t + 1, node), terms, Relation::Eq, 0.0);
            }
        }
    }
    for (l, &size) in prof.sizes.iter().enumerate() {
        for t in 0..delta {
            let mut terms: Vec<(usize, f64)> = graph
                .job_arcs()
                .filter(|(_, arc)| arc.length() as u64 == size)
                .map(|(a, _)| (var[t][a], 1.0))
                .collect();
            if let Some(zi) = z[l][t] {
                terms.push((zi, 1.0));
            }
            if let Some(zp) = t.checked_sub(1).and_then(|p| z[l][p]) {
                terms.push((zp, -1.0));
            }
            m.add_constraint(
                &format!("alloc_{}_{}", size, t + 1),
                terms,
                Relation::Eq,
                prof.nt[l][t] as f64,
            );
        }
    }
    Ok(BuiltModel {
        formulation: Formulation::Flow,
        model: m,
        job_order: Vec::new(),
    })
}

/// Reads a solution of `built` back into a schedule. Values are rounded to
/// the nearest integer; missing variables count as 0.
pub fn schedule_from_values(
    built: &BuiltModel,
    instance: &Instance,
    values: &HashMap<String, f64>,
) -> Result<Schedule, DecodeError> {
    match built.formulation {
        Formulation::Milp1 | Formulation::Milp1Plus => {
            let n = built.job_order.len();
            let mut groups: Vec<Vec<JobId>> = vec![Vec::new(); n];
            for (name, &value) in values {
                if value.round() < 1.0 {
                    continue;
                }
                let Some(rest) = name.strip_prefix("x_") else { continue };
                let Some((j, k)) = rest.split_once('_') else { continue };
                let (Ok(j), Ok(k)) = (j.parse::<usize>(), k.parse::<usize>()) else { continue };
                if (1..=n).contains(&j) && (1..=n).contains(&k) {
                    groups[k - 1].push(built.job_order[j - 1]);
                }
            }
            groups.retain(|g| !g.is_empty());
            Ok(Schedule::from_groups(groups, instance))
        }
        Formulation::Flow => decode(&flow_from_values(instance, values)?, instance),
    }
}

/// Flow solution named by the FLOW variables in `values`.
pub fn flow_from_values(instance: &Instance, values: &HashMap<String, f64>) -> Result<FlowSolution, DecodeError> {
    let prof = profile(instance)?;
    let graph = reduce(&build_graph(&prof).expect("validated sizes fit"));
    let mut sol = FlowSolution::zero(graph, prof.times.clone());
    for t in 0..prof.delta() {
        for (a, arc) in sol.graph.arcs().iter().enumerate() {
            let name = match arc.kind {
                ArcKind::Job => format!("f_{}_{}_{}", arc.tail, arc.head, t + 1),
                ArcKind::Loss => format!("y_{}_{}_{}", arc.tail, arc.head, t + 1),
                ArcKind::Feedback => format!("v_{}", t + 1),
            };
            let value = values.get(&name).copied().unwrap_or(0.0).round().max(0.0);
            sol.flows[t][a] = value as u64;
        }
    }
    Ok(sol)
}
