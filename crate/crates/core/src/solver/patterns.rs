//! Batch patterns: how many jobs of each size class one batch holds.

use crate::instance::ClassProfile;
use serde::{Deserialize, Serialize};
use std::ops::ControlFlow;

/// One batch of structure `structure`: `counts[l]` jobs of size
/// `sizes[l]`. Corresponds to a single 0 -> B path in the graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BatchPattern {
    pub structure: usize,
    pub counts: Vec<u64>,
}

impl BatchPattern {
    pub fn load(&self, sizes: &[u64]) -> u64 {
        load(&self.counts, sizes)
    }

    /// Job sizes in path order (largest first).
    pub fn path_sizes(&self, sizes: &[u64]) -> Vec<u64> {
        path_sizes(&self.counts, sizes)
    }
}

pub(crate) fn load(counts: &[u64], sizes: &[u64]) -> u64 {
    counts.iter().zip(sizes).map(|(q, s)| q * s).sum()
}

pub(crate) fn path_sizes(counts: &[u64], sizes: &[u64]) -> Vec<u64> {
    let mut out = Vec::new();
    for l in (0..sizes.len()).rev() {
        out.extend(std::iter::repeat_n(sizes[l], counts[l] as usize));
    }
    out
}

/// Jobs of each size available to structure `t`: remaining jobs with time
/// class at most `t`.
pub(crate) fn available(remaining: &[Vec<u64>], t: usize) -> Vec<u64> {
    remaining.iter().map(|row| row[..=t].iter().sum()).collect()
}

/// Visits every feasible pattern of structure `t` once, in nonincreasing
/// lexicographic order of the count vector read from the largest size
/// down. A pattern is feasible when it fits the capacity, uses no more jobs
/// of a size than are available up to class `t`, and includes a job of time
/// class exactly `t`. When `cap` is given only patterns lexicographically at
/// most `cap` are visited.
pub(crate) fn for_each_pattern<F>(
    t: usize,
    remaining: &[Vec<u64>],
    sizes: &[u64],
    capacity: u64,
    cap: Option<&[u64]>,
    mut visit: F,
) -> ControlFlow<()>
where
    F: FnMut(&[u64]) -> ControlFlow<()>,
{
    let avail = available(remaining, t);
    let has_class_t: Vec<bool> = remaining.iter().map(|row| row[t] > 0).collect();
    let mut counts = vec![0u64; sizes.len()];
    let ctx = Ctx {
        sizes,
        avail: &avail,
        has_class_t: &has_class_t,
        cap,
    };
    recurse(&ctx, sizes.len(), capacity, cap.is_some(), &mut counts, &mut visit)
}

struct Ctx<'a> {
    sizes: &'a [u64],
    avail: &'a [u64],
    has_class_t: &'a [bool],
    cap: Option<&'a [u64]>,
}

fn recurse<F>(
    ctx: &Ctx<'_>,
    pos: usize,
    slack: u64,
    tight: bool,
    counts: &mut [u64],
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[u64]) -> ControlFlow<()>,
{
    if pos == 0 {
        let nonempty = counts.iter().any(|&q| q > 0);
        let touches_t = counts
            .iter()
            .zip(ctx.has_class_t)
            .any(|(&q, &h)| q > 0 && h);
        if nonempty && touches_t {
            return visit(counts);
        }
        return ControlFlow::Continue(());
    }
    let l = pos - 1;
    let mut most = ctx.avail[l].min(slack / ctx.sizes[l]);
    if tight {
        // cap is Some whenever tight is set
        most = most.min(ctx.cap.unwrap()[l]);
    }
    for q in (0..=most).rev() {
        counts[l] = q;
        let still_tight = tight && q == ctx.cap.unwrap()[l];
        recurse(ctx, l, slack - q * ctx.sizes[l], still_tight, counts, visit)?;
    }
    counts[l] = 0;
    ControlFlow::Continue(())
}

/// All feasible patterns of structure `t` for the remaining multiplicities
/// `remaining[l][t]`, in nonincreasing lexicographic order.
pub fn enumerate_patterns(
    t: usize,
    remaining: &[Vec<u64>],
    profile: &ClassProfile,
) -> Vec<BatchPattern> {
    let mut out = Vec::new();
    if t >= profile.delta() || remaining.iter().all(|row| row[t] == 0) {
        return out;
    }
    let _ = for_each_pattern(
        t,
        remaining,
        &profile.sizes,
        profile.capacity,
        None,
        |counts| {
            out.push(BatchPattern {
                structure: t,
                counts: counts.to_vec(),
            });
            ControlFlow::Continue(())
        },
    );
    out
}

/// A pattern is maximal when no further available job fits into it.
pub(crate) fn is_maximal(counts: &[u64], avail: &[u64], sizes: &[u64], capacity: u64) -> bool {
    let slack = capacity - load(counts, sizes);
    counts
        .iter()
        .zip(avail)
        .zip(sizes)
        .all(|((&q, &a), &s)| q == a || s > slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, reduce, ArcFlowGraph, ArcKind};
    use crate::instance::{profile, Instance};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn lex_key(counts: &[u64]) -> Vec<u64> {
        counts.iter().rev().copied().collect()
    }

    #[test]
    fn two_jobs_capacity_five() {
        // size 3 and size 2, both in the only time class
        let p = profile(&Instance::from_pairs(5, &[(3, 4), (2, 4)]).unwrap()).unwrap();
        let pats = enumerate_patterns(0, &p.nt, &p);
        let got: Vec<Vec<u64>> = pats.iter().map(|b| b.counts.clone()).collect();
        // sizes ascending [2, 3]: {3+2}, {3}, {2}
        assert_eq!(got, vec![vec![1, 1], vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn lone_pattern_requires_class_t_job() {
        // size-2 job belongs to a lower time class: {2} alone is not a
        // pattern of the top structure
        let p = profile(&Instance::from_pairs(5, &[(3, 4), (2, 1)]).unwrap()).unwrap();
        let got: Vec<Vec<u64>> = enumerate_patterns(1, &p.nt, &p)
            .into_iter()
            .map(|b| b.counts)
            .collect();
        assert_eq!(got, vec![vec![1, 1], vec![0, 1]]);
    }

    #[test]
    fn empty_remainder_gives_nothing() {
        let p = profile(&Instance::from_pairs(5, &[(3, 4)]).unwrap()).unwrap();
        let empty = vec![vec![0]];
        assert!(enumerate_patterns(0, &empty, &p).is_empty());
    }

    #[test]
    fn full_size_job_single_pattern() {
        let p = profile(&Instance::from_pairs(5, &[(5, 2)]).unwrap()).unwrap();
        let pats = enumerate_patterns(0, &p.nt, &p);
        assert_eq!(pats.len(), 1);
        assert_eq!(pats[0].path_sizes(&p.sizes), vec![5]);
    }

    #[test]
    fn maximality() {
        let sizes = [2, 3];
        assert!(is_maximal(&[1, 1], &[3, 3], &sizes, 5));
        assert!(!is_maximal(&[1, 0], &[3, 3], &sizes, 5));
        assert!(is_maximal(&[1, 0], &[1, 0], &sizes, 5));
    }

    #[test]
    fn cap_limits_order() {
        let p = profile(&Instance::from_pairs(6, &[(2, 1), (2, 1), (3, 1), (3, 1)]).unwrap()).unwrap();
        let mut seen = Vec::new();
        let _ = for_each_pattern(0, &p.nt, &p.sizes, 6, Some(&[1, 1]), |c| {
            seen.push(c.to_vec());
            ControlFlow::Continue(())
        });
        assert!(seen.iter().all(|c| lex_key(c) <= vec![1, 1]));
        assert_eq!(seen[0], vec![1, 1]);
        assert!(seen.contains(&vec![2, 0]));
        assert!(!seen.contains(&vec![0, 2]));
    }

    /// Distinct size multisets of 0 -> B paths, found by walking the graph.
    fn graph_paths(g: &ArcFlowGraph, sizes: &[u64]) -> BTreeSet<Vec<u64>> {
        fn walk(
            g: &ArcFlowGraph,
            node: usize,
            counts: &mut Vec<u64>,
            sizes: &[u64],
            out: &mut BTreeSet<Vec<u64>>,
        ) {
            for &a in g.out_arcs(node) {
                let arc = g.arcs()[a];
                match arc.kind {
                    ArcKind::Job => {
                        let l = sizes.iter().position(|&s| s == arc.length() as u64).unwrap();
                        counts[l] += 1;
                        if arc.head == g.capacity() {
                            out.insert(counts.clone());
                        } else {
                            walk(g, arc.head, counts, sizes, out);
                        }
                        counts[l] -= 1;
                    }
                    ArcKind::Loss => {
                        out.insert(counts.clone());
                    }
                    ArcKind::Feedback => {}
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(g, 0, &mut vec![0; sizes.len()], sizes, &mut out);
        out
    }

    proptest! {
        #[test]
        fn patterns_match_graph_paths(
            cap in 1u64..=10,
            raw in prop::collection::vec((1u64..=10, 1u64..=4), 1..9),
        ) {
            let pairs: Vec<(u64, u64)> = raw.iter().map(|&(s, p)| (1 + (s - 1) % cap, p)).collect();
            let p = profile(&Instance::from_pairs(cap, &pairs).unwrap()).unwrap();
            let g = reduce(&build_graph(&p).unwrap());
            let all_paths = graph_paths(&g, &p.sizes);
            for t in 0..p.delta() {
                let avail = available(&p.nt, t);
                let expected: BTreeSet<Vec<u64>> = all_paths
                    .iter()
                    .filter(|c| c.iter().zip(&avail).all(|(q, a)| q <= a))
                    .filter(|c| c.iter().zip(&p.nt).any(|(&q, row)| q > 0 && row[t] > 0))
                    .cloned()
                    .collect();
                let pats = enumerate_patterns(t, &p.nt, &p);
                let got: BTreeSet<Vec<u64>> = pats.iter().map(|b| b.counts.clone()).collect();
                prop_assert_eq!(got.len(), pats.len(), "duplicate pattern");
                prop_assert_eq!(&got, &expected);
                let keys: Vec<Vec<u64>> = pats.iter().map(|b| lex_key(&b.counts)).collect();
                prop_assert!(keys.windows(2).all(|w| w[0] > w[1]));
            }
        }
    }
}
