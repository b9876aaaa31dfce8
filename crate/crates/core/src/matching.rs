//! Bottleneck assignment: minimize the largest cost used by a perfect matching.

use std::collections::VecDeque;

const NIL: usize = usize::MAX;

/// Maximum bipartite matching by Hopcroft–Karp. `adj[u]` lists the right
/// vertices adjacent to left vertex `u`. Returns `mate[u]` for every left vertex.
pub fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> (usize, Vec<usize>) {
    let n_left = adj.len();
    let mut mate_l = vec![NIL; n_left];
    let mut mate_r = vec![NIL; n_right];
    let mut dist = vec![0u32; n_left];
    let mut size = 0;
    loop {
        // layer the free left vertices
        let mut queue = VecDeque::new();
        let mut found = false;
        for u in 0..n_left {
            if mate_l[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = u32::MAX;
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = mate_r[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut it = vec![0usize; n_left];
        for u in 0..n_left {
            if mate_l[u] == NIL && augment(u, adj, &mut mate_l, &mut mate_r, &mut dist, &mut it) {
                size += 1;
            }
        }
    }
    (size, mate_l)
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    mate_l: &mut [usize],
    mate_r: &mut [usize],
    dist: &mut [u32],
    it: &mut [usize],
) -> bool {
    // iterative DFS along the layered graph
    let mut stack = vec![u];
    while let Some(&x) = stack.last() {
        if it[x] == adj[x].len() {
            dist[x] = u32::MAX;
            stack.pop();
            continue;
        }
        let v = adj[x][it[x]];
        it[x] += 1;
        let w = mate_r[v];
        if w == NIL {
            // flip the path recorded on the stack
            let mut v = v;
            while let Some(x) = stack.pop() {
                let prev = mate_l[x];
                mate_l[x] = v;
                mate_r[v] = x;
                v = prev;
            }
            return true;
        }
        if dist[w] == dist[x].wrapping_add(1) {
            stack.push(w);
        }
    }
    false
}

/// Square bottleneck assignment on a row-major `n x n` cost matrix.
///
/// Returns the optimal value and an assignment `row -> column`. Binary search
/// over the sorted distinct costs, testing each threshold for a perfect
/// matching.
pub fn bottleneck_assignment(n: usize, cost: &[f64]) -> (f64, Vec<usize>) {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut values: Vec<f64> = cost.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();

    let feasible = |t: f64| {
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| cost[i * n + j] <= t).collect())
            .collect();
        let (size, mate) = hopcroft_karp(&adj, n);
        (size == n, mate)
    };

    // the smallest threshold must reach every row's and column's minimum
    let row_floor = (0..n)
        .map(|i| cost[i * n..(i + 1) * n].iter().copied().fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let col_floor = (0..n)
        .map(|j| (0..n).map(|i| cost[i * n + j]).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let floor = row_floor.max(col_floor);
    let mut lo = values.partition_point(|&v| v < floor);
    let mut hi = values.len() - 1;
    let mut best = feasible(values[hi]).1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        let (ok, mate) = feasible(values[mid]);
        if ok {
            hi = mid;
            best = mate;
        } else {
            lo = mid + 1;
        }
    }
    if lo == values.len() - 1 || best.contains(&NIL) {
        best = feasible(values[lo]).1;
    }
    (values[lo], best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(n: usize, cost: &[f64]) -> f64 {
        fn rec(i: usize, n: usize, cost: &[f64], used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if i == n {
                *best = best.min(acc);
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    rec(i + 1, n, cost, used, acc.max(cost[i * n + j]), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(0, n, cost, &mut vec![false; n], 0.0, &mut best);
        best
    }

    #[test]
    fn matching_on_a_path() {
        let adj = vec![vec![0, 1], vec![0], vec![1, 2]];
        let (size, mate) = hopcroft_karp(&adj, 3);
        assert_eq!(size, 3);
        assert_eq!(mate, vec![1, 0, 2]);
    }

    #[test]
    fn identity_is_optimal_for_diagonal() {
        let cost = [0.1, 5.0, 5.0, 0.2];
        let (v, a) = bottleneck_assignment(2, &cost);
        assert_eq!(v, 0.2);
        assert_eq!(a, vec![0, 1]);
    }

    proptest! {
        #[test]
        fn agrees_with_exhaustive_search(n in 1usize..6, seed in proptest::collection::vec(0u8..20, 36)) {
            let cost: Vec<f64> = seed[..n * n].iter().map(|&c| c as f64).collect();
            let (v, a) = bottleneck_assignment(n, &cost);
            prop_assert_eq!(v, brute(n, &cost));
            let mut seen = vec![false; n];
            for (i, &j) in a.iter().enumerate() {
                prop_assert!(!seen[j]);
                seen[j] = true;
                prop_assert!(cost[i * n + j] <= v);
            }
        }
    }
}
