//! Graph-theoretic analysis of the system digraph.
//!
//! A [`SystemStructure`] records which entries of the state matrix are
//! structurally nonzero (an edge `j -> i` means `A[i][j] != 0`) and which
//! states each output row measures. From it we derive strongly connected
//! components, the Hall-violating node sets ("contractions") that certify
//! structural rank deficiency, observational-equivalence classes and
//! Q-redundant output placements.
//!
//! Indices are 0-based throughout the library; text formats are 1-based.

mod edgelist;
mod matching;
mod placement;
mod scc;

use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub use edgelist::{parse_edge_list, EdgeList, WeightedEdge};
pub use matching::{maximum_matching, structural_rank, BipartiteMatching};
pub use placement::{
    place_outputs_q_redundant, Assignment, ComponentId, ComponentKind, OutputPlacement, SensorOutput, TieBreak,
};
pub(crate) use scc::tarjan;
pub use scc::{scc_decompose, SccDecomposition};

/// Sparsity pattern of `(A, C)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemStructure {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    outputs: Vec<BTreeSet<usize>>,
}

impl SystemStructure {
    /// Builds a structure from `(src, dst)` edges. Self-loops are allowed.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        outputs: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::dims("a system needs at least one state"));
        }
        let edges: BTreeSet<_> = edges.into_iter().collect();
        if let Some(&(s, d)) = edges.iter().find(|&&(s, d)| s >= n || d >= n) {
            return Err(Error::dims(format!("edge {}->{} outside 1..={n}", s + 1, d + 1)));
        }
        let mut rows = Vec::new();
        for (r, row) in outputs.into_iter().enumerate() {
            let row: BTreeSet<usize> = row.into_iter().collect();
            if row.is_empty() {
                return Err(Error::dims(format!("output row {} is empty", r + 1)));
            }
            if let Some(&s) = row.iter().find(|&&s| s >= n) {
                return Err(Error::dims(format!("output row {} measures state {}", r + 1, s + 1)));
            }
            rows.push(row);
        }
        Ok(Self {
            n,
            edges,
            outputs: rows,
        })
    }

    /// Structure with one single-state output row per entry of `measured`.
    pub fn with_state_outputs(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        measured: &[usize],
    ) -> Result<Self> {
        Self::new(n, edges, measured.iter().map(|&s| vec![s]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.edges.contains(&(src, dst))
    }

    pub fn outputs(&self) -> &[BTreeSet<usize>] {
        &self.outputs
    }

    /// Same state pattern with the output rows replaced.
    pub fn with_outputs(&self, outputs: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        Self::new(self.n, self.edges.iter().copied(), outputs)
    }

    /// Union of all states measured by some output row.
    pub fn measured_states(&self) -> BTreeSet<usize> {
        self.outputs.iter().flatten().copied().collect()
    }

    /// Out-neighbour lists, sorted.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(s, d) in &self.edges {
            adj[s].push(d);
        }
        adj
    }

    /// Out-neighbourhood `N(S) = { j | (i, j) in E, i in S }`.
    pub fn out_neighbourhood(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter(|(s, _)| set.contains(s))
            .map(|&(_, d)| d)
            .collect()
    }

    /// Shortest path length (in edges) from each state to any parent SCC.
    /// States that cannot reach one get `usize::MAX`; parent SCC members get 0.
    pub fn distance_to_parents(&self, scc: &SccDecomposition) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        for (c, comp) in scc.components.iter().enumerate() {
            if scc.parent_flags[c] {
                for &v in comp {
                    dist[v] = 0;
                    queue.push_back(v);
                }
            }
        }
        let mut pred = vec![Vec::new(); self.n];
        for &(s, d) in &self.edges {
            pred[d].push(s);
        }
        while let Some(v) = queue.pop_front() {
            for &u in &pred[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }
}

/// Hall-violating state sets, one per unit of structural rank deficiency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionFamily {
    pub contractions: Vec<BTreeSet<usize>>,
    pub deficiency: usize,
}

/// Extracts contractions from a maximum matching.
///
/// For each unmatched column (a state with no matched successor row), the
/// columns reachable by alternating paths form a set `S` whose out-neighbourhood
/// is exactly the set of rows visited, all of which are matched back into `S`.
/// Hence `|N(S)| = |S| - 1`.
pub fn find_contractions(structure: &SystemStructure) -> ContractionFamily {
    let adj = structure.successors();
    let m = maximum_matching(&adj, structure.n());
    let mut contractions = Vec::new();
    for root in 0..structure.n() {
        if m.col_to_row[root].is_some() {
            continue;
        }
        let mut seen_cols = BTreeSet::from([root]);
        let mut seen_rows = vec![false; structure.n()];
        let mut stack = vec![root];
        while let Some(c) = stack.pop() {
            for &r in &adj[c] {
                if seen_rows[r] {
                    continue;
                }
                seen_rows[r] = true;
                if let Some(c2) = m.row_to_col[r] {
                    if seen_cols.insert(c2) {
                        stack.push(c2);
                    }
                }
            }
        }
        contractions.push(seen_cols);
    }
    ContractionFamily {
        deficiency: structure.n() - m.size(),
        contractions,
    }
}

/// Observational-equivalence classes: every parent SCC, then every contraction.
/// Classes may overlap.
pub fn equivalence_classes(structure: &SystemStructure) -> Vec<BTreeSet<usize>> {
    let scc = scc_decompose(structure);
    let mut classes: Vec<BTreeSet<usize>> = scc.parents().map(|c| c.iter().copied().collect()).collect();
    classes.extend(find_contractions(structure).contractions);
    classes
}

/// Coverage test: every parent SCC and every contraction holds at
/// least one measured state.
///
/// This is a *sufficient* condition for structural observability, not an exact
/// test; a `false` result does not prove the pair unobservable.
pub fn check_structural_observability(structure: &SystemStructure) -> bool {
    let measured = structure.measured_states();
    if measured.is_empty() {
        return false;
    }
    equivalence_classes(structure)
        .iter()
        .all(|class| class.iter().any(|s| measured.contains(s)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> SystemStructure {
        SystemStructure::new(3, [(0, 1), (0, 2)], Vec::<Vec<usize>>::new()).unwrap()
    }

    #[test]
    fn rejects_out_of_range_edges_and_empty_rows() {
        assert!(SystemStructure::new(2, [(0, 2)], Vec::<Vec<usize>>::new()).is_err());
        assert!(SystemStructure::new(2, [(0, 1)], vec![vec![]]).is_err());
        assert!(SystemStructure::new(0, [], Vec::<Vec<usize>>::new()).is_err());
    }

    #[test]
    fn identity_pattern_has_no_contraction() {
        let s = SystemStructure::new(4, (0..4).map(|i| (i, i)), Vec::<Vec<usize>>::new()).unwrap();
        let fam = find_contractions(&s);
        assert_eq!(fam.deficiency, 0);
        assert!(fam.contractions.is_empty());
    }

    #[test]
    fn star_contraction_checked_against_subset_enumeration() {
        let s = star();
        let fam = find_contractions(&s);
        // Every nonempty subset, Hall violation by brute force.
        let violating: Vec<BTreeSet<usize>> = (1u32..8)
            .map(|mask| (0..3).filter(|i| mask >> i & 1 == 1).collect::<BTreeSet<_>>())
            .filter(|set| s.out_neighbourhood(set).len() < set.len())
            .collect();
        assert_eq!(fam.deficiency, 2);
        for c in &fam.contractions {
            assert!(violating.contains(c), "{c:?} is not Hall-violating");
        }
        // {2,3} (0-based {1,2}) has no successors at all, so it is covered.
        let sinks = BTreeSet::from([1, 2]);
        assert!(violating.contains(&sinks));
        assert!(fam.contractions.iter().any(|c| c.contains(&1) || c.contains(&2)));
    }

    #[test]
    fn observability_check_identity() {
        let edges: Vec<_> = (0..2).map(|i| (i, i)).collect();
        let s = SystemStructure::with_state_outputs(2, edges.clone(), &[0, 1]).unwrap();
        assert!(check_structural_observability(&s));
        let s = SystemStructure::with_state_outputs(2, edges, &[0]).unwrap();
        assert!(!check_structural_observability(&s));
        assert_eq!(equivalence_classes(&s), vec![BTreeSet::from([0]), BTreeSet::from([1])]);
    }

    #[test]
    fn all_states_measured_is_observable() {
        let s = star();
        let all = s.with_outputs((0..3).map(|i| vec![i])).unwrap();
        assert!(check_structural_observability(&all));
        assert!(!check_structural_observability(&s));
    }
}
