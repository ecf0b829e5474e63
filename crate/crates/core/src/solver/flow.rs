//! Integer flows on the processing-time structures and their verification.

use crate::graph::{bounds, build_graph, ArcFlowGraph, ArcKind};
use crate::instance::{profile, ClassProfile, Instance};
use std::collections::HashSet;
use std::fmt;

/// Arc flows for every structure, indexed `flows[t][arc]` against `graph`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSolution {
    pub graph: ArcFlowGraph,
    /// Processing time of each structure, ascending.
    pub times: Vec<u64>,
    pub flows: Vec<Vec<u64>>,
}

impl FlowSolution {
    pub fn zero(graph: ArcFlowGraph, times: Vec<u64>) -> Self {
        let flows = vec![vec![0; graph.num_arcs()]; times.len()];
        Self {
            graph,
            times,
            flows,
        }
    }

    /// Number of batches in structure `t`.
    pub fn feedback(&self, t: usize) -> u64 {
        self.flows[t][self.graph.feedback_index()]
    }

    pub fn feedback_flows(&self) -> Vec<u64> {
        (0..self.times.len()).map(|t| self.feedback(t)).collect()
    }

    /// `sum_t P_t * v_t`.
    pub fn objective(&self) -> u64 {
        self.times
            .iter()
            .enumerate()
            .map(|(t, p)| p * self.feedback(t))
            .sum()
    }

    /// Adds `count` batches to structure `t`, routed through job arcs of the
    /// given sizes in the given order, closed by a loss arc if needed.
    ///
    /// Panics if an arc on the route is missing from the graph.
    pub fn add_path(&mut self, t: usize, sizes: &[u64], count: u64) {
        let b = self.graph.capacity();
        let mut node = 0usize;
        for &s in sizes {
            let head = node + s as usize;
            let a = self
                .graph
                .arc_index(node, head, ArcKind::Job)
                .unwrap_or_else(|| panic!("no job arc ({node},{head})"));
            self.flows[t][a] += count;
            node = head;
        }
        if node < b {
            let a = self
                .graph
                .arc_index(node, b, ArcKind::Loss)
                .unwrap_or_else(|| panic!("no loss arc ({node},{b})"));
            self.flows[t][a] += count;
        }
        let fb = self.graph.feedback_index();
        self.flows[t][fb] += count;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowViolation {
    StructureMismatch,
    ForeignArc { tail: usize, head: usize },
    Conservation { structure: usize, node: usize, imbalance: i128 },
    UpperBound { structure: usize, tail: usize, head: usize, flow: u64, bound: u64 },
    /// More jobs of this size routed through structures up to `structure`
    /// than exist with a small enough processing time.
    Overassigned { size: u64, structure: usize },
    /// Jobs of this size left without a batch.
    Unassigned { size: u64, missing: u64 },
}

impl fmt::Display for FlowViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowViolation::StructureMismatch => {
                write!(f, "structures do not match the instance's processing times")
            }
            FlowViolation::ForeignArc { tail, head } => {
                write!(f, "arc ({tail},{head}) does not belong to the instance graph")
            }
            FlowViolation::Conservation {
                structure,
                node,
                imbalance,
            } => write!(f, "structure {structure}: node {node} unbalanced by {imbalance}"),
            FlowViolation::UpperBound {
                structure,
                tail,
                head,
                flow,
                bound,
            } => write!(
                f,
                "structure {structure}: arc ({tail},{head}) carries {flow} > bound {bound}"
            ),
            FlowViolation::Overassigned { size, structure } => {
                write!(f, "size {size}: too many jobs routed up to structure {structure}")
            }
            FlowViolation::Unassigned { size, missing } => {
                write!(f, "size {size}: {missing} jobs unassigned")
            }
        }
    }
}

/// Lists every conservation, bound and assignment violation of `solution`.
pub fn check_flow(solution: &FlowSolution, profile: &ClassProfile) -> Vec<FlowViolation> {
    let mut out = Vec::new();
    let graph = &solution.graph;
    let delta = profile.delta();
    if solution.times != profile.times
        || solution.flows.len() != delta
        || solution.flows.iter().any(|f| f.len() != graph.num_arcs())
        || graph.capacity() as u64 != profile.capacity
    {
        return vec![FlowViolation::StructureMismatch];
    }

    let full = match build_graph(profile) {
        Ok(g) => g,
        Err(_) => return vec![FlowViolation::StructureMismatch],
    };
    let allowed: HashSet<_> = full.arcs().iter().copied().collect();
    for arc in graph.arcs() {
        if !allowed.contains(arc) {
            out.push(FlowViolation::ForeignArc {
                tail: arc.tail,
                head: arc.head,
            });
        }
    }
    if !out.is_empty() {
        return out;
    }

    for t in 0..delta {
        let flow = &solution.flows[t];
        for node in 0..graph.num_nodes() {
            let inflow: i128 = graph.in_arcs(node).iter().map(|&a| flow[a] as i128).sum();
            let outflow: i128 = graph.out_arcs(node).iter().map(|&a| flow[a] as i128).sum();
            if inflow != outflow {
                out.push(FlowViolation::Conservation {
                    structure: t,
                    node,
                    imbalance: inflow - outflow,
                });
            }
        }
    }

    let ub = bounds(graph, profile);
    for (a, arc) in graph.arcs().iter().enumerate() {
        for t in 0..delta {
            let f = solution.flows[t][a];
            if f > ub.get(a, t) {
                out.push(FlowViolation::UpperBound {
                    structure: t,
                    tail: arc.tail,
                    head: arc.head,
                    flow: f,
                    bound: ub.get(a, t),
                });
            }
        }
    }

    // z[c,t] = sum_{t' <= t} (NT[c,t'] - F[c,t']) must stay >= 0 and end at 0
    for (l, &size) in profile.sizes.iter().enumerate() {
        let mut carry: i128 = 0;
        for t in 0..delta {
            let routed: u64 = graph
                .job_arcs()
                .filter(|(_, arc)| arc.length() as u64 == size)
                .map(|(a, _)| solution.flows[t][a])
                .sum();
            carry += profile.nt[l][t] as i128 - routed as i128;
            if carry < 0 {
                out.push(FlowViolation::Overassigned { size, structure: t });
                break;
            }
        }
        if carry > 0 {
            out.push(FlowViolation::Unassigned {
                size,
                missing: carry as u64,
            });
        }
    }
    out
}

/// True iff `solution` is a feasible flow for `instance`.
pub fn verify_flow(solution: &FlowSolution, instance: &Instance) -> bool {
    match profile(instance) {
        Ok(p) => check_flow(solution, &p).is_empty(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::reduce;
    use crate::instance::Instance;

    fn fifteen_jobs() -> Instance {
        // (size, time) for jobs 1..=15
        Instance::from_pairs(
            5,
            &[
                (2, 3),
                (1, 3),
                (2, 3),
                (1, 3),
                (2, 3),
                (3, 4),
                (2, 4),
                (1, 4),
                (1, 4),
                (2, 4),
                (3, 4),
                (3, 5),
                (1, 5),
                (2, 5),
                (2, 5),
            ],
        )
        .unwrap()
    }

    /// The three structures drawn for the 24-unit solution.
    fn drawn_flows(inst: &Instance) -> FlowSolution {
        let p = profile(inst).unwrap();
        let g = reduce(&build_graph(&p).unwrap());
        let mut sol = FlowSolution::zero(g, p.times.clone());
        // P = 3: (0,2)x2 (2,3) (2,4) (3,4) loss(4,5)x2
        sol.add_path(0, &[2, 2], 1);
        sol.add_path(0, &[2, 1, 1], 1);
        // P = 4: (0,1) (0,3) (1,4) (3,5) (4,5)
        sol.add_path(1, &[1, 3, 1], 1);
        sol.add_path(1, &[3, 2], 1);
        // P = 5: (0,2)x2 (2,4) (2,5) (4,5)
        sol.add_path(2, &[2, 3], 1);
        sol.add_path(2, &[2, 2, 1], 1);
        sol
    }

    #[test]
    fn drawn_solution_is_valid() {
        let inst = fifteen_jobs();
        let sol = drawn_flows(&inst);
        assert_eq!(check_flow(&sol, &profile(&inst).unwrap()), vec![]);
        assert!(verify_flow(&sol, &inst));
        assert_eq!(sol.feedback_flows(), vec![2, 2, 2]);
        assert_eq!(sol.objective(), 24);
        // structure (a) flows as drawn
        let g = &sol.graph;
        let arc = |t, h, k| g.arc_index(t, h, k).unwrap();
        assert_eq!(sol.flows[0][arc(0, 2, ArcKind::Job)], 2);
        assert_eq!(sol.flows[0][arc(2, 3, ArcKind::Job)], 1);
        assert_eq!(sol.flows[0][arc(2, 4, ArcKind::Job)], 1);
        assert_eq!(sol.flows[0][arc(3, 4, ArcKind::Job)], 1);
        assert_eq!(sol.flows[0][arc(4, 5, ArcKind::Loss)], 2);
        // feedback bound NJ[0] = 5 holds with flow 2
        assert!(bounds(g, &profile(&inst).unwrap()).get(g.feedback_index(), 0) == 5);
    }

    #[test]
    fn removing_feedback_unit_breaks_conservation() {
        let inst = fifteen_jobs();
        let mut sol = drawn_flows(&inst);
        let fb = sol.graph.feedback_index();
        sol.flows[0][fb] -= 1;
        assert!(!verify_flow(&sol, &inst));
        let v = check_flow(&sol, &profile(&inst).unwrap());
        assert!(v.contains(&FlowViolation::Conservation {
            structure: 0,
            node: 0,
            imbalance: -1
        }));
    }

    #[test]
    fn zero_flow_leaves_jobs_unassigned() {
        let inst = fifteen_jobs();
        let p = profile(&inst).unwrap();
        let sol = FlowSolution::zero(reduce(&build_graph(&p).unwrap()), p.times.clone());
        let v = check_flow(&sol, &p);
        assert!(v
            .iter()
            .any(|x| matches!(x, FlowViolation::Unassigned { .. })));
        assert!(!verify_flow(&sol, &inst));
    }

    #[test]
    fn routing_long_jobs_early_is_rejected() {
        // one job of size 1 with time 5 cannot sit in the P = 3 structure
        let inst = Instance::from_pairs(5, &[(1, 3), (1, 5)]).unwrap();
        let p = profile(&inst).unwrap();
        let mut sol = FlowSolution::zero(reduce(&build_graph(&p).unwrap()), p.times.clone());
        sol.add_path(0, &[1, 1], 1);
        let v = check_flow(&sol, &p);
        assert!(v.contains(&FlowViolation::Overassigned { size: 1, structure: 0 }));
    }
}
