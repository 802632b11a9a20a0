//! Built-in example system: ten states, three parent SCCs and one
//! contraction, with fixed link weights.

use crate::structure::{parse_edge_list, EdgeList, SystemStructure};

/// `src dst weight`, 1-based. An edge `j -> i` sets `A[i][j]`.
pub const FIG2_EDGES: &str = "\
# parent SCC {1, 2, 3}
1 2 0.6
2 3 0.7
3 1 0.8
1 3 0.1
# upstream states
4 5 0.5
5 5 0.5
5 3 0.4
5 8 0.3
5 10 0.2
# parent SCC {6, 7, 8}
6 6 0.3
6 7 0.5
7 8 0.9
8 6 0.7
# parent SCC {9, 10}
9 10 0.8
10 9 0.6
10 10 0.2
";

pub fn fig2_edge_list() -> EdgeList {
    parse_edge_list(FIG2_EDGES).expect("built-in edge list parses")
}

pub fn fig2_structure() -> SystemStructure {
    fig2_edge_list().to_structure()
}
