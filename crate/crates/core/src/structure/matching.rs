//! Hopcroft–Karp maximum bipartite matching between columns (edge sources)
//! and rows (edge targets) of the state pattern.

use std::collections::VecDeque;

use super::SystemStructure;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteMatching {
    pub col_to_row: Vec<Option<usize>>,
    pub row_to_col: Vec<Option<usize>>,
}

impl BipartiteMatching {
    pub fn size(&self) -> usize {
        self.col_to_row.iter().filter(|m| m.is_some()).count()
    }
}

const INF: usize = usize::MAX;

/// Maximum matching of `adj` (column -> rows) into `rows` right-hand nodes.
/// O(E sqrt(V)).
pub fn maximum_matching(adj: &[Vec<usize>], rows: usize) -> BipartiteMatching {
    let cols = adj.len();
    let mut col_to_row = vec![None; cols];
    let mut row_to_col = vec![None; rows];
    let mut dist = vec![INF; cols];

    loop {
        // BFS layering from free columns.
        let mut queue = VecDeque::new();
        for c in 0..cols {
            if col_to_row[c].is_none() {
                dist[c] = 0;
                queue.push_back(c);
            } else {
                dist[c] = INF;
            }
        }
        let mut found = false;
        while let Some(c) = queue.pop_front() {
            for &r in &adj[c] {
                match row_to_col[r] {
                    None => found = true,
                    Some(c2) if dist[c2] == INF => {
                        dist[c2] = dist[c] + 1;
                        queue.push_back(c2);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }
        let mut next = vec![0usize; cols];
        for c in 0..cols {
            if col_to_row[c].is_none() {
                augment(c, adj, &mut dist, &mut next, &mut col_to_row, &mut row_to_col);
            }
        }
    }
    BipartiteMatching { col_to_row, row_to_col }
}

// Iterative layered DFS along the BFS levels.
fn augment(
    root: usize,
    adj: &[Vec<usize>],
    dist: &mut [usize],
    next: &mut [usize],
    col_to_row: &mut [Option<usize>],
    row_to_col: &mut [Option<usize>],
) -> bool {
    let mut path: Vec<(usize, usize)> = Vec::new(); // (column, row taken)
    let mut c = root;
    loop {
        if next[c] < adj[c].len() {
            let r = adj[c][next[c]];
            next[c] += 1;
            match row_to_col[r] {
                None => {
                    path.push((c, r));
                    for &(pc, pr) in &path {
                        col_to_row[pc] = Some(pr);
                        row_to_col[pr] = Some(pc);
                    }
                    return true;
                }
                Some(c2) if dist[c2] == dist[c].wrapping_add(1) => {
                    path.push((c, r));
                    c = c2;
                }
                Some(_) => {}
            }
        } else {
            dist[c] = INF;
            match path.pop() {
                Some((pc, _)) => c = pc,
                None => return false,
            }
        }
    }
}

/// Size of a maximum matching of the state pattern; equals the generic rank
/// of any numeric instantiation.
pub fn structural_rank(structure: &SystemStructure) -> usize {
    maximum_matching(&structure.successors(), structure.n()).size()
}
