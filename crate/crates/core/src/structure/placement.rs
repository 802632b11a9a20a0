//! Q-redundant output placement.
//!
//! Every parent SCC and every contraction receives `Q + 1` dedicated sensors,
//! each measuring a distinct state of that component. Losing any `Q` sensors
//! then leaves at least one output in every component.

use std::collections::BTreeSet;
use std::fmt;

use super::{find_contractions, scc_decompose, SystemStructure};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentKind {
    ParentScc,
    Contraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComponentId {
    pub kind: ComponentKind,
    pub index: usize,
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ComponentKind::ParentScc => write!(f, "S{}", self.index + 1),
            ComponentKind::Contraction => write!(f, "C{}", self.index + 1),
        }
    }
}

/// How candidate states inside a component are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Unused states first, then lowest index.
    LowestIndex,
    /// As `LowestIndex` for parent SCCs. Contractions additionally prefer
    /// states outside every parent SCC, then states closest to a parent SCC,
    /// before falling back to lowest index.
    #[default]
    ContractionExclusive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub component: ComponentId,
    /// `Q + 1` distinct states in pick order.
    pub states: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPlacement {
    pub q: usize,
    pub assignments: Vec<Assignment>,
}

/// One sensor of a placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SensorOutput {
    pub state: usize,
    pub component: ComponentId,
}

impl SensorOutput {
    pub fn is_alpha(&self) -> bool {
        self.component.kind == ComponentKind::Contraction
    }
}

impl OutputPlacement {
    /// Sensors ordered by replica round: round 0 takes the first pick of every
    /// component (parent SCCs, then contractions), round 1 the second, etc.
    pub fn sensors(&self) -> Vec<SensorOutput> {
        (0..=self.q)
            .flat_map(|round| {
                self.assignments.iter().map(move |a| SensorOutput {
                    state: a.states[round],
                    component: a.component,
                })
            })
            .collect()
    }

    pub fn measured_states(&self) -> Vec<usize> {
        self.sensors().iter().map(|s| s.state).collect()
    }

    /// Output pattern of the placement applied to `structure`.
    pub fn apply(&self, structure: &SystemStructure) -> Result<SystemStructure> {
        structure.with_outputs(self.sensors().iter().map(|s| vec![s.state]))
    }
}

/// Places `Q + 1` outputs in every parent SCC and contraction.
pub fn place_outputs_q_redundant(
    structure: &SystemStructure,
    q: usize,
    tie_break: TieBreak,
) -> Result<OutputPlacement> {
    let scc = scc_decompose(structure);
    let contractions = find_contractions(structure).contractions;
    let need = q + 1;

    let parents: Vec<BTreeSet<usize>> = scc.parents().map(|c| c.iter().copied().collect()).collect();
    for (i, p) in parents.iter().enumerate() {
        check_size(ComponentKind::ParentScc, i, p, need)?;
    }
    for (i, c) in contractions.iter().enumerate() {
        check_size(ComponentKind::Contraction, i, c, need)?;
    }

    let in_parent: BTreeSet<usize> = parents.iter().flatten().copied().collect();
    let dist = structure.distance_to_parents(&scc);
    let mut used = BTreeSet::new();
    let mut assignments = Vec::new();

    let mut take = |kind: ComponentKind, index: usize, members: &BTreeSet<usize>| {
        let mut ranked: Vec<usize> = members.iter().copied().collect();
        ranked.sort_by_key(|&s| {
            let exclusive = matches!(tie_break, TieBreak::ContractionExclusive) && kind == ComponentKind::Contraction;
            (
                used.contains(&s),
                exclusive && in_parent.contains(&s),
                if exclusive { dist[s] } else { 0 },
                s,
            )
        });
        ranked.truncate(need);
        used.extend(ranked.iter().copied());
        assignments.push(Assignment {
            component: ComponentId { kind, index },
            states: ranked,
        });
    };
    for (i, p) in parents.iter().enumerate() {
        take(ComponentKind::ParentScc, i, p);
    }
    for (i, c) in contractions.iter().enumerate() {
        take(ComponentKind::Contraction, i, c);
    }
    Ok(OutputPlacement { q, assignments })
}

fn check_size(kind: ComponentKind, index: usize, set: &BTreeSet<usize>, need: usize) -> Result<()> {
    if set.len() < need {
        return Err(Error::InsufficientComponentSize {
            component: ComponentId { kind, index }.to_string(),
            available: set.len(),
            required: need,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::check_structural_observability;

    // Two 2-cycles feeding nothing, one chain into the first: 0<->1, 2<->3, 4->0.
    fn small() -> SystemStructure {
        SystemStructure::new(5, [(0, 1), (1, 0), (2, 3), (3, 2), (4, 0)], Vec::<Vec<usize>>::new()).unwrap()
    }

    #[test]
    fn q0_one_output_per_component() {
        let s = small();
        let p = place_outputs_q_redundant(&s, 0, TieBreak::default()).unwrap();
        let classes = crate::structure::equivalence_classes(&s);
        assert_eq!(p.assignments.len(), classes.len());
        assert!(p.assignments.iter().all(|a| a.states.len() == 1));
        assert!(check_structural_observability(&p.apply(&s).unwrap()));
    }

    #[test]
    fn insufficient_component() {
        let s = SystemStructure::new(2, [(0, 0), (1, 1)], Vec::<Vec<usize>>::new()).unwrap();
        let err = place_outputs_q_redundant(&s, 1, TieBreak::LowestIndex).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientComponentSize {
                required: 2,
                available: 1,
                ..
            }
        ));
    }

    #[test]
    fn deterministic() {
        let s = small();
        let a = place_outputs_q_redundant(&s, 1, TieBreak::LowestIndex).unwrap();
        let b = place_outputs_q_redundant(&s, 1, TieBreak::LowestIndex).unwrap();
        assert_eq!(a, b);
    }
}
