//! The arc-flow graph over batch positions `0..=B`.
//!
//! A unit of flow from node 0 to node `B` describes one batch: every job arc
//! `(i, i + s)` places a job of size `s` at position `i`, a loss arc `(i, B)`
//! closes the batch with `B - i` unused units, and the feedback arc `(B, 0)`
//! counts batches. The same graph is shared by every processing-time
//! structure; structures only differ in their [`ArcBounds`].

use crate::instance::ClassProfile;
use serde::{Deserialize, Serialize};
use std::fmt::{self, Write as _};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArcKind {
    Job,
    Loss,
    Feedback,
}

impl fmt::Display for ArcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArcKind::Job => "job",
            ArcKind::Loss => "loss",
            ArcKind::Feedback => "feedback",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub kind: ArcKind,
}

impl Arc {
    /// Job size for job arcs, unused capacity for loss arcs.
    pub fn length(&self) -> usize {
        self.head.saturating_sub(self.tail)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("size {size} exceeds capacity {capacity}")]
    SizeExceedsCapacity { size: u64, capacity: u64 },
    #[error("sizes must be at least 1")]
    ZeroSize,
    #[error("capacity must be at least 1")]
    ZeroCapacity,
    #[error("graph too large to render (B = {0}, limit {1})")]
    TooLargeToRender(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcFlowGraph {
    capacity: usize,
    arcs: Vec<Arc>,
    reduced: bool,
    /// Nodes reachable from 0 through job arcs. Before reduction every node
    /// is marked.
    reachable: Vec<bool>,
    out_arcs: Vec<Vec<usize>>,
    in_arcs: Vec<Vec<usize>>,
}

impl ArcFlowGraph {
    fn from_arcs(capacity: usize, mut arcs: Vec<Arc>, reduced: bool, reachable: Vec<bool>) -> Self {
        arcs.sort_unstable();
        arcs.dedup();
        let mut out_arcs = vec![Vec::new(); capacity + 1];
        let mut in_arcs = vec![Vec::new(); capacity + 1];
        for (idx, arc) in arcs.iter().enumerate() {
            out_arcs[arc.tail].push(idx);
            in_arcs[arc.head].push(idx);
        }
        Self {
            capacity,
            arcs,
            reduced,
            reachable,
            out_arcs,
            in_arcs,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn num_nodes(&self) -> usize {
        self.capacity + 1
    }

    /// Arcs sorted by `(tail, head, kind)`.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn is_reachable(&self, node: usize) -> bool {
        self.reachable.get(node).copied().unwrap_or(false)
    }

    pub fn reachable_nodes(&self) -> Vec<usize> {
        (0..=self.capacity).filter(|&v| self.reachable[v]).collect()
    }

    pub fn out_arcs(&self, node: usize) -> &[usize] {
        &self.out_arcs[node]
    }

    pub fn in_arcs(&self, node: usize) -> &[usize] {
        &self.in_arcs[node]
    }

    pub fn arc_index(&self, tail: usize, head: usize, kind: ArcKind) -> Option<usize> {
        self.arcs.binary_search(&Arc { tail, head, kind }).ok()
    }

    pub fn feedback_index(&self) -> usize {
        // the feedback arc sorts last: it is the only arc leaving node B
        self.arcs.len() - 1
    }

    pub fn count_kind(&self, kind: ArcKind) -> usize {
        self.arcs.iter().filter(|a| a.kind == kind).count()
    }

    pub fn job_arcs(&self) -> impl Iterator<Item = (usize, &Arc)> {
        self.arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.kind == ArcKind::Job)
    }

    /// One arc per line: `kind tail head`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for arc in &self.arcs {
            let _ = writeln!(out, "{} {} {}", arc.kind, arc.tail, arc.head);
        }
        out
    }

    /// Graphviz rendering; refused for `B > 50`.
    pub fn to_dot(&self) -> Result<String, GraphError> {
        const LIMIT: usize = 50;
        if self.capacity > LIMIT {
            return Err(GraphError::TooLargeToRender(self.capacity, LIMIT));
        }
        let mut out = String::from("digraph arcflow {\n  rankdir=LR;\n");
        for v in 0..=self.capacity {
            let style = if self.reachable[v] { "solid" } else { "dashed" };
            let _ = writeln!(out, "  n{v} [label=\"{v}\", shape=circle, style={style}];");
        }
        for arc in &self.arcs {
            let attrs = match arc.kind {
                ArcKind::Job => format!("label=\"s={}\"", arc.length()),
                ArcKind::Loss => "label=\"loss\", style=dotted".to_string(),
                ArcKind::Feedback => "label=\"feedback\", style=dashed, constraint=false".to_string(),
            };
            let _ = writeln!(out, "  n{} -> n{} [{attrs}];", arc.tail, arc.head);
        }
        out.push_str("}\n");
        Ok(out)
    }
}

/// Builds the unreduced graph for the distinct sizes of `profile`.
pub fn build_graph(profile: &ClassProfile) -> Result<ArcFlowGraph, GraphError> {
    build_graph_for_sizes(&profile.sizes, profile.capacity)
}

/// Builds the unreduced graph from a set of distinct sizes.
pub fn build_graph_for_sizes(sizes: &[u64], capacity: u64) -> Result<ArcFlowGraph, GraphError> {
    if capacity == 0 {
        return Err(GraphError::ZeroCapacity);
    }
    let b = capacity as usize;
    let mut arcs = Vec::new();
    for &s in sizes {
        if s == 0 {
            return Err(GraphError::ZeroSize);
        }
        if s > capacity {
            return Err(GraphError::SizeExceedsCapacity { size: s, capacity });
        }
        let s = s as usize;
        arcs.extend((0..=b - s).map(|i| Arc {
            tail: i,
            head: i + s,
            kind: ArcKind::Job,
        }));
    }
    arcs.extend((1..b).map(|i| Arc {
        tail: i,
        head: b,
        kind: ArcKind::Loss,
    }));
    arcs.push(Arc {
        tail: b,
        head: 0,
        kind: ArcKind::Feedback,
    });
    Ok(ArcFlowGraph::from_arcs(b, arcs, false, vec![true; b + 1]))
}

/// Removes job arcs that no job-arc path from node 0 reaches, then loss arcs
/// whose tail is not the head of a surviving job arc. The feedback arc always
/// survives. Reducing a reduced graph is a no-op.
pub fn reduce(graph: &ArcFlowGraph) -> ArcFlowGraph {
    let b = graph.capacity;
    let mut reachable = vec![false; b + 1];
    reachable[0] = true;
    let mut job_head = vec![false; b + 1];
    let mut kept = Vec::with_capacity(graph.arcs.len());
    // arcs are sorted by tail, so every arc into `tail` was decided before
    // any arc leaving it
    for arc in graph.arcs.iter().filter(|a| a.kind == ArcKind::Job) {
        if reachable[arc.tail] {
            reachable[arc.head] = true;
            job_head[arc.head] = true;
            kept.push(*arc);
        }
    }
    for arc in &graph.arcs {
        match arc.kind {
            ArcKind::Loss if job_head[arc.tail] => kept.push(*arc),
            ArcKind::Feedback => kept.push(*arc),
            _ => {}
        }
    }
    ArcFlowGraph::from_arcs(b, kept, true, reachable)
}

/// Closed-form arc count of the unreduced graph:
/// `theta + (theta + 1) * B - sum(S)`.
pub fn closed_form_arc_count(sizes: &[u64], capacity: u64) -> u64 {
    let theta = sizes.len() as u64;
    theta + (theta + 1) * capacity - sizes.iter().sum::<u64>()
}

/// Per-structure flow upper bounds, indexed `upper[arc][t]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcBounds {
    pub upper: Vec<Vec<u64>>,
}

impl ArcBounds {
    pub fn get(&self, arc: usize, t: usize) -> u64 {
        self.upper[arc][t]
    }
}

/// Every arc of structure `t` carries at most `NJ[t]` units; a job arc of
/// size `c` additionally carries at most `NT+[c, t]` units.
pub fn bounds(graph: &ArcFlowGraph, profile: &ClassProfile) -> ArcBounds {
    let upper = graph
        .arcs
        .iter()
        .map(|arc| match arc.kind {
            ArcKind::Job => {
                let row = profile.size_index(arc.length() as u64);
                (0..profile.delta())
                    .map(|t| {
                        let avail = row.map_or(0, |l| profile.nt_plus[l][t]);
                        profile.nj[t].min(avail)
                    })
                    .collect()
            }
            ArcKind::Loss | ArcKind::Feedback => profile.nj.clone(),
        })
        .collect();
    ArcBounds { upper }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeReport {
    pub num_nodes: usize,
    pub num_arcs_pre: usize,
    pub num_arcs_post: usize,
    pub num_job_arcs_post: usize,
    pub num_loss_arcs_post: usize,
    pub num_structures: usize,
}

pub fn size_report(profile: &ClassProfile) -> Result<SizeReport, GraphError> {
    let full = build_graph(profile)?;
    let reduced = reduce(&full);
    Ok(SizeReport {
        num_nodes: full.num_nodes(),
        num_arcs_pre: full.num_arcs(),
        num_arcs_post: reduced.num_arcs(),
        num_job_arcs_post: reduced.count_kind(ArcKind::Job),
        num_loss_arcs_post: reduced.count_kind(ArcKind::Loss),
        num_structures: profile.delta(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{profile, Instance};
    use proptest::prelude::*;

    fn job(tail: usize, head: usize) -> Arc {
        Arc {
            tail,
            head,
            kind: ArcKind::Job,
        }
    }

    fn loss(tail: usize, head: usize) -> Arc {
        Arc {
            tail,
            head,
            kind: ArcKind::Loss,
        }
    }

    fn of_kind(g: &ArcFlowGraph, kind: ArcKind) -> Vec<(usize, usize)> {
        g.arcs()
            .iter()
            .filter(|a| a.kind == kind)
            .map(|a| (a.tail, a.head))
            .collect()
    }

    #[test]
    fn three_sizes_capacity_five() {
        let g = build_graph_for_sizes(&[1, 2, 3], 5).unwrap();
        assert_eq!(g.num_nodes(), 6);
        assert_eq!(g.num_arcs(), 17);
        assert_eq!(g.count_kind(ArcKind::Job), 12);
        assert_eq!(g.count_kind(ArcKind::Loss), 4);
        assert_eq!(g.count_kind(ArcKind::Feedback), 1);
        assert_eq!(closed_form_arc_count(&[1, 2, 3], 5), 17);
    }

    #[test]
    fn full_batch_size_only() {
        let g = build_graph_for_sizes(&[7], 7).unwrap();
        assert_eq!(of_kind(&g, ArcKind::Job), vec![(0, 7)]);
        assert_eq!(g.count_kind(ArcKind::Loss), 6);
        assert_eq!(g.num_arcs(), 8);
        assert_eq!(closed_form_arc_count(&[7], 7), 8);
        let r = reduce(&g);
        assert_eq!(r.count_kind(ArcKind::Loss), 0);
        assert_eq!(r.num_arcs(), 2);
    }

    #[test]
    fn two_sizes_layout_and_reduction() {
        let g = build_graph_for_sizes(&[2, 3], 5).unwrap();
        assert_eq!(
            of_kind(&g, ArcKind::Job),
            vec![(0, 2), (0, 3), (1, 3), (1, 4), (2, 4), (2, 5), (3, 5)]
        );
        let r = reduce(&g);
        assert_eq!(
            of_kind(&r, ArcKind::Job),
            vec![(0, 2), (0, 3), (2, 4), (2, 5), (3, 5)]
        );
        assert_eq!(of_kind(&r, ArcKind::Loss), vec![(2, 5), (3, 5), (4, 5)]);
        assert!(r.arc_index(1, 3, ArcKind::Job).is_none());
        assert!(r.arc_index(1, 5, ArcKind::Loss).is_none());
        assert_eq!(g.num_arcs() - r.num_arcs(), 3);
    }

    #[test]
    fn unit_size_keeps_everything() {
        for b in 1..8 {
            let g = build_graph_for_sizes(&[1], b).unwrap();
            assert_eq!(reduce(&g).arcs(), g.arcs());
        }
    }

    #[test]
    fn size_four_capacity_ten() {
        let r = reduce(&build_graph_for_sizes(&[4], 10).unwrap());
        assert_eq!(r.reachable_nodes(), vec![0, 4, 8]);
        assert_eq!(of_kind(&r, ArcKind::Job), vec![(0, 4), (4, 8)]);
        assert_eq!(of_kind(&r, ArcKind::Loss), vec![(4, 10), (8, 10)]);
        assert_eq!(r.arcs()[r.feedback_index()].kind, ArcKind::Feedback);
    }

    #[test]
    fn rejects_oversized() {
        assert_eq!(
            build_graph_for_sizes(&[6], 5).unwrap_err(),
            GraphError::SizeExceedsCapacity {
                size: 6,
                capacity: 5
            }
        );
    }

    #[test]
    fn bounds_take_the_minimum() {
        // time class 0: two jobs of size 2; time class 1: one job of size 2, one of size 3
        let inst = Instance::from_pairs(5, &[(2, 1), (2, 1), (2, 4), (3, 4)]).unwrap();
        let p = profile(&inst).unwrap();
        let g = reduce(&build_graph(&p).unwrap());
        let ub = bounds(&g, &p);
        let a = g.arc_index(0, 2, ArcKind::Job).unwrap();
        // NJ = [2, 2], NT+ for size 2 = [2, 3]
        assert_eq!(ub.upper[a], vec![2, 2]);
        let a3 = g.arc_index(0, 3, ArcKind::Job).unwrap();
        // NT+ for size 3 = [0, 1]: unusable in structure 0
        assert_eq!(ub.upper[a3], vec![0, 1]);
        assert_eq!(ub.upper[g.feedback_index()], vec![2, 2]);
    }

    #[test]
    fn report_counts() {
        let inst = Instance::from_pairs(5, &[(1, 3), (2, 4), (3, 5)]).unwrap();
        let r = size_report(&profile(&inst).unwrap()).unwrap();
        assert_eq!(r.num_nodes, 6);
        assert_eq!(r.num_arcs_pre, 17);
        assert_eq!(r.num_structures, 3);

        let one = size_report(&profile(&Instance::from_pairs(1, &[(1, 1)]).unwrap()).unwrap()).unwrap();
        assert_eq!((one.num_nodes, one.num_arcs_pre), (2, 2));
    }

    #[test]
    fn dump_and_dot() {
        let g = reduce(&build_graph_for_sizes(&[2, 3], 5).unwrap());
        let dump = g.dump();
        assert!(dump.starts_with("job 0 2\njob 0 3\n"));
        assert!(dump.ends_with("feedback 5 0\n"));
        assert!(g.to_dot().unwrap().contains("n5 -> n0"));
        assert!(build_graph_for_sizes(&[1], 51).unwrap().to_dot().is_err());
    }

    fn sizes_and_capacity() -> impl Strategy<Value = (Vec<u64>, u64)> {
        (1u64..40).prop_flat_map(|b| {
            (
                prop::collection::btree_set(1..=b, 1..=(b as usize).min(6))
                    .prop_map(|s| s.into_iter().collect::<Vec<_>>()),
                Just(b),
            )
        })
    }

    proptest! {
        #[test]
        fn closed_form_matches(( sizes, b) in sizes_and_capacity()) {
            let g = build_graph_for_sizes(&sizes, b).unwrap();
            prop_assert_eq!(g.num_nodes() as u64, b + 1);
            prop_assert_eq!(g.num_arcs() as u64, closed_form_arc_count(&sizes, b));
        }

        #[test]
        fn reduction_is_idempotent_and_closed((sizes, b) in sizes_and_capacity()) {
            let r = reduce(&build_graph_for_sizes(&sizes, b).unwrap());
            let rr = reduce(&r);
            prop_assert_eq!(r.arcs(), rr.arcs());
            let heads: Vec<usize> = r.job_arcs().map(|(_, a)| a.head).collect();
            for (_, a) in r.job_arcs() {
                prop_assert!(a.tail == 0 || heads.contains(&a.tail));
            }
            for a in r.arcs().iter().filter(|a| a.kind == ArcKind::Loss) {
                prop_assert!(heads.contains(&a.tail));
            }
        }
    }

    #[test]
    fn arc_ordering_is_by_tail_head_kind() {
        let g = build_graph_for_sizes(&[1, 5], 5).unwrap();
        assert!(g.arcs().windows(2).all(|w| w[0] < w[1]));
        // job (0,5) sorts before loss arcs leaving node 1
        assert_eq!(g.arcs()[0], job(0, 1));
        assert!(g.arcs().contains(&loss(4, 5)));
    }
}
