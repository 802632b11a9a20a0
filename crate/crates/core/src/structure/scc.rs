use super::SystemStructure;

/// Strongly connected components of the system digraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    /// Sorted member lists, ordered by smallest member.
    pub components: Vec<Vec<usize>>,
    /// `true` when the component has no edge leaving it.
    pub parent_flags: Vec<bool>,
}

impl SccDecomposition {
    pub fn parents(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.components
            .iter()
            .zip(&self.parent_flags)
            .filter(|(_, &p)| p)
            .map(|(c, _)| c)
    }

    /// Component index of every node.
    pub fn membership(&self, n: usize) -> Vec<usize> {
        let mut of = vec![usize::MAX; n];
        for (c, comp) in self.components.iter().enumerate() {
            for &v in comp {
                of[v] = c;
            }
        }
        of
    }
}

/// Tarjan's algorithm on an adjacency list, iterative so deep chains cannot
/// overflow the stack. Components come out in reverse topological order.
pub(crate) fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    // (node, next edge position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        call.push((start, 0));
        index[start] = counter;
        low[start] = counter;
        counter += 1;
        stack.push(start);
        on_stack[start] = true;

        while let Some(top) = call.last_mut() {
            let v = top.0;
            if let Some(&w) = adj[v].get(top.1) {
                top.1 += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

/// Partitions the states into SCCs and flags the parent (sink) components.
/// Self-loops never count as outgoing edges.
pub fn scc_decompose(structure: &SystemStructure) -> SccDecomposition {
    let adj = structure.successors();
    let mut components = tarjan(&adj);
    components.sort_by_key(|c| c[0]);
    let mut of = vec![0; structure.n()];
    for (c, comp) in components.iter().enumerate() {
        for &v in comp {
            of[v] = c;
        }
    }
    let mut parent_flags = vec![true; components.len()];
    for (s, d) in structure.edges() {
        if of[s] != of[d] {
            parent_flags[of[s]] = false;
        }
    }
    SccDecomposition {
        components,
        parent_flags,
    }
}
