//! Strong connectivity, Menger vertex connectivity and exhaustive removal
//! checks for small sensor digraphs. Graphs are out-neighbour lists; self-loops
//! are ignored.

use std::collections::{BTreeMap, VecDeque};

use crate::structure::tarjan;

/// Whether the subgraph induced by `alive` nodes is strongly connected.
/// Zero or one live node counts as connected.
pub fn strongly_connected_without(adj: &[Vec<usize>], removed: &[bool]) -> bool {
    let keep: Vec<usize> = (0..adj.len()).filter(|&v| !removed[v]).collect();
    if keep.len() <= 1 {
        return true;
    }
    let mut index = vec![usize::MAX; adj.len()];
    for (i, &v) in keep.iter().enumerate() {
        index[v] = i;
    }
    let sub: Vec<Vec<usize>> = keep
        .iter()
        .map(|&v| adj[v].iter().filter(|&&w| !removed[w]).map(|&w| index[w]).collect())
        .collect();
    tarjan(&sub).len() == 1
}

pub fn strongly_connected(adj: &[Vec<usize>]) -> bool {
    strongly_connected_without(adj, &vec![false; adj.len()])
}

/// Vertex connectivity by Menger's theorem: the minimum over ordered
/// non-adjacent pairs `(s, t)` of the number of internally disjoint `s -> t`
/// paths. A complete digraph on `n` nodes returns `n - 1`.
pub fn vertex_connectivity(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    if n < 2 {
        return 0;
    }
    let mut best = n - 1;
    for s in 0..n {
        for t in 0..n {
            if s == t || adj[s].contains(&t) {
                continue;
            }
            best = best.min(disjoint_paths(adj, s, t, best));
            if best == 0 {
                return 0;
            }
        }
    }
    best
}

// Unit node capacities via node splitting: v_in = 2v, v_out = 2v + 1.
// Stops early once `cap` paths are found.
fn disjoint_paths(adj: &[Vec<usize>], s: usize, t: usize, cap: usize) -> usize {
    let n = adj.len();
    let big = n as i64;
    let nodes = 2 * n;
    let mut graph: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut to = Vec::new();
    let mut capacity: Vec<i64> = Vec::new();
    let mut add = |u: usize, v: usize, c: i64, graph: &mut Vec<Vec<usize>>| {
        graph[u].push(to.len());
        to.push(v);
        capacity.push(c);
        graph[v].push(to.len());
        to.push(u);
        capacity.push(0);
    };
    for (v, out) in adj.iter().enumerate() {
        let c = if v == s || v == t { big } else { 1 };
        add(2 * v, 2 * v + 1, c, &mut graph);
        for &w in out {
            if w != v {
                add(2 * v + 1, 2 * w, big, &mut graph);
            }
        }
    }
    let (source, sink) = (2 * s + 1, 2 * t);
    let mut flow = 0;
    while flow < cap {
        let mut prev_edge = vec![usize::MAX; nodes];
        let mut seen = vec![false; nodes];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            if u == sink {
                break;
            }
            for &e in &graph[u] {
                let v = to[e];
                if !seen[v] && capacity[e] > 0 {
                    seen[v] = true;
                    prev_edge[v] = e;
                    queue.push_back(v);
                }
            }
        }
        if !seen[sink] {
            break;
        }
        let mut v = sink;
        while v != source {
            let e = prev_edge[v];
            capacity[e] -= 1;
            capacity[e ^ 1] += 1;
            v = to[e ^ 1];
        }
        flow += 1;
    }
    flow
}

/// Calls `f` on every `k`-subset of `0..n` (as a removal mask) until it
/// returns `false`. Returns whether all subsets passed.
pub fn all_subsets(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    if k > n {
        return true;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return false;
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return true;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `true` iff removing any `q` nodes leaves the rest strongly connected.
pub fn survives_removals(adj: &[Vec<usize>], q: usize) -> bool {
    let n = adj.len();
    all_subsets(n, q, |set| {
        let mut removed = vec![false; n];
        for &v in set {
            removed[v] = true;
        }
        strongly_connected_without(adj, &removed)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityReport {
    pub vertex_connectivity: usize,
    /// removal-set size -> survives every such removal
    pub survives_removals: BTreeMap<usize, bool>,
}

pub fn connectivity_report(adj: &[Vec<usize>], max_q: usize) -> ConnectivityReport {
    ConnectivityReport {
        vertex_connectivity: vertex_connectivity(adj),
        survives_removals: (0..=max_q.min(adj.len().saturating_sub(1)))
            .map(|q| (q, survives_removals(adj, q)))
            .collect(),
    }
}
