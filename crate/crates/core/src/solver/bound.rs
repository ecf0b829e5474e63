use crate::instance::ClassProfile;

/// Staircase lower bound from the remaining area per time class.
///
/// `area[t]` is the total size of unscheduled jobs with processing time
/// `times[t]`. Every job of time at least `times[k]` sits in a batch that
/// costs at least `times[k]`, so at least `m_k = ceil(A_k / B)` such batches
/// exist, where `A_k` sums the areas of classes `k..`. Charging each level
/// `k` for the `m_k - m_{k+1}` batches it adds gives an admissible bound.
pub fn staircase_bound(area: &[u64], times: &[u64], capacity: u64) -> u64 {
    debug_assert_eq!(area.len(), times.len());
    let mut cumulative = 0u64;
    let mut batches_above = 0u64;
    let mut bound = 0u64;
    for k in (0..area.len()).rev() {
        cumulative += area[k];
        let m = cumulative.div_ceil(capacity).max(batches_above);
        bound += (m - batches_above) * times[k];
        batches_above = m;
    }
    bound
}

/// Lower bound on the cost of scheduling `remaining[l][t]` jobs of size
/// `profile.sizes[l]` and time `profile.times[t]`.
pub fn lower_bound(remaining: &[Vec<u64>], profile: &ClassProfile) -> u64 {
    let area: Vec<u64> = (0..profile.delta())
        .map(|t| {
            profile
                .sizes
                .iter()
                .zip(remaining)
                .map(|(s, row)| s * row[t])
                .sum()
        })
        .collect();
    staircase_bound(&area, &profile.times, profile.capacity)
}

/// How many batches above the staircase count the waste-aware bound tracks
/// exactly per level.
pub const WASTE_DEPTH: u64 = 2;

/// Staircase bound strengthened by the gaps lower jobs cannot fill.
///
/// For every level `k` let `M_k` be the number of batches costing at least
/// `times[k]` and `E_k` their empty space in the final schedule. Then
/// `B * M_k = A_k + G_k + E_k` where `G_k` is the size of the jobs of
/// shorter classes placed in those batches, so `G_k` must be a subset sum of
/// their sizes. Both `M_k` and `E_k` grow towards shorter classes. A small
/// dynamic program over `(M_k - m_k, E_k)` minimizes the level costs under
/// these rules; states more than `depth` batches above the staircase count
/// are merged into one unconstrained state, which keeps the result a valid
/// lower bound. With `depth = 0` it equals [`staircase_bound`].
pub fn waste_bound(remaining: &[Vec<u64>], sizes: &[u64], times: &[u64], capacity: u64, depth: u64) -> u64 {
    let delta = times.len();
    if delta == 0 {
        return 0;
    }
    let area: Vec<u64> = (0..delta)
        .map(|t| sizes.iter().zip(remaining).map(|(s, row)| s * row[t]).sum())
        .collect();
    if depth == 0 {
        return staircase_bound(&area, times, capacity);
    }
    let d_states = depth as usize + 1;
    let cap = (capacity * (depth + 1)) as usize;
    let reach = lower_subset_sums(remaining, sizes, cap);

    const INF: u64 = u64::MAX;
    let width = cap + 1;
    let mut prev = vec![INF; d_states * width];
    let mut cur = vec![INF; d_states * width];
    // above the top class: no batches, no empty space
    let mut prev_m = 0u64;
    prev[0] = 0;
    let mut cumulative = 0u64;
    for k in (0..delta).rev() {
        cumulative += area[k];
        let m = cumulative.div_ceil(capacity).max(prev_m);
        let step = times[k] - if k == 0 { 0 } else { times[k - 1] };
        cur.fill(INF);
        // best[e] = cheapest previous state with batch count <= current and
        // empty space <= e, accumulated as d grows
        let mut best = vec![INF; width];
        let mut next_prev_d = 0usize;
        for d in 0..d_states {
            let batches = m + d as u64;
            while next_prev_d < d_states && prev_m + next_prev_d as u64 <= batches {
                let row = &prev[next_prev_d * width..(next_prev_d + 1) * width];
                let mut running = INF;
                for e in 0..width {
                    running = running.min(row[e]);
                    best[e] = best[e].min(running);
                }
                next_prev_d += 1;
            }
            let charge = batches * step;
            if d + 1 == d_states {
                let cheapest = best[width - 1];
                if cheapest != INF {
                    cur[d * width] = cheapest + charge;
                }
                continue;
            }
            let room = capacity * batches - cumulative;
            for e in 0..width.min(room as usize + 1) {
                if best[e] == INF {
                    continue;
                }
                let fill = room - e as u64;
                if fill as usize <= cap && reach[k][fill as usize] {
                    cur[d * width + e] = best[e] + charge;
                }
            }
        }
        std::mem::swap(&mut prev, &mut cur);
        prev_m = m;
    }
    let result = prev.iter().copied().min().unwrap_or(INF);
    debug_assert!(result != INF);
    result
}

/// `out[k][v]`: some multiset of jobs with time class below `k` has total
/// size `v`, for `v <= cap`.
fn lower_subset_sums(remaining: &[Vec<u64>], sizes: &[u64], cap: usize) -> Vec<Vec<bool>> {
    let delta = remaining.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(delta);
    let mut reach = vec![false; cap + 1];
    reach[0] = true;
    let mut used = vec![0u64; cap + 1];
    for k in 0..delta {
        out.push(reach.clone());
        for (l, &s) in sizes.iter().enumerate() {
            let count = remaining[l][k];
            let s = s as usize;
            if count == 0 || s > cap {
                continue;
            }
            for v in 0..=cap {
                if reach[v] {
                    used[v] = 0;
                } else if v >= s && reach[v - s] && used[v - s] < count {
                    reach[v] = true;
                    used[v] = used[v - s] + 1;
                }
            }
        }
    }
    out
}
