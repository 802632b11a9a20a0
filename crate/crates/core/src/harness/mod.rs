//! Scenario-driven experiments: the design pipeline, the `analyze`,
//! `design`, `simulate`, `sweep` and `verify` commands and the run manifest.

mod commands;
mod fixtures;
mod manifest;
mod scenario;

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::gain::{closed_loop, error_bound, synthesize_gain, ErrorBound, GainMatrix};
use crate::linalg::spectral_radius;
use crate::network::{build_beta_network, hub_matrix, parse_network, SensorNetwork};
use crate::sim::{instantiate_fixed, instantiate_lsi, Fault, FaultProfile, LtiSystem};
use crate::structure::{
    find_contractions, parse_edge_list, place_outputs_q_redundant, scc_decompose, ComponentId, ComponentKind, EdgeList,
    OutputPlacement, SystemStructure, TieBreak,
};

pub use commands::{
    cmd_analyze, cmd_design, cmd_simulate, cmd_sweep, cmd_verify, removal_checks, scenario_base, sweep_grid, Analysis,
    DesignSummary, RemovalCheck, SimulationSummary, SweepPoint, CALIBRATION_SEED_OFFSET, EXHAUSTIVE_REMOVAL_MAX_Q,
};
pub use fixtures::{fig2_edge_list, fig2_structure, FIG2_EDGES};
pub use manifest::{parse_manifest, sha256_hex, Manifest, MANIFEST_HEADER};
pub use scenario::{
    parse_scenario, FaultSpec, NetworkSpec, PlacementSpec, Scenario, StructureSource, SweepSpec, WeightSource,
    REFERENCE_SCENARIO,
};

/// Everything the design stage produces.
#[derive(Debug, Clone)]
pub struct Design {
    pub edges: EdgeList,
    /// State pattern with one output row per sensor.
    pub structure: SystemStructure,
    pub q: usize,
    pub placement: Option<OutputPlacement>,
    /// Component each sensor covers.
    pub components: Vec<ComponentId>,
    pub system: LtiSystem,
    pub network: SensorNetwork,
    pub gain: GainMatrix,
    pub epsilon: f64,
    /// `ρ(Â)`
    pub rho: f64,
    pub bound: ErrorBound,
}

impl Design {
    pub fn measured_states(&self) -> Vec<usize> {
        self.structure
            .outputs()
            .iter()
            .map(|o| *o.iter().next().expect("nonempty"))
            .collect()
    }
}

pub fn load_edges(source: &StructureSource, base: &Path) -> Result<EdgeList> {
    match source {
        StructureSource::Fig2 => Ok(fig2_edge_list()),
        StructureSource::File(p) => parse_edge_list(&std::fs::read_to_string(base.join(p))?),
    }
}

/// Labels hand-picked sensors: a state in a parent SCC covers that SCC,
/// otherwise the first contraction containing it.
fn label_explicit(structure: &SystemStructure, states: &[usize]) -> Result<Vec<ComponentId>> {
    let scc = scc_decompose(structure);
    let parents: Vec<&Vec<usize>> = scc.parents().collect();
    let contractions = find_contractions(structure).contractions;
    states
        .iter()
        .map(|&s| {
            if s >= structure.n() {
                return Err(Error::dims(format!(
                    "output on state {} outside 1..={}",
                    s + 1,
                    structure.n()
                )));
            }
            if let Some(i) = parents.iter().position(|p| p.contains(&s)) {
                return Ok(ComponentId {
                    kind: ComponentKind::ParentScc,
                    index: i,
                });
            }
            contractions
                .iter()
                .position(|c| c.contains(&s))
                .map(|i| ComponentId {
                    kind: ComponentKind::Contraction,
                    index: i,
                })
                .ok_or_else(|| Error::DomainError(format!("x{} lies in no parent SCC and no contraction", s + 1)))
        })
        .collect()
}

/// Redundancy level of a labelled sensor set: one less than the smallest
/// number of sensors on any component.
fn implied_q(components: &[ComponentId]) -> usize {
    let kinds: BTreeSet<ComponentId> = components.iter().copied().collect();
    kinds
        .iter()
        .map(|k| components.iter().filter(|c| *c == k).count())
        .min()
        .map_or(0, |m| m - 1)
}

/// Placement, numeric system, network and gain for a scenario. Relative
/// file paths resolve against `base`.
pub fn design(sc: &Scenario, base: &Path) -> Result<Design> {
    let edges = load_edges(&sc.structure, base)?;
    let pattern = edges.to_structure();
    let (q, placement, states, components) = match &sc.placement {
        PlacementSpec::Auto { q } => {
            let p = place_outputs_q_redundant(&pattern, *q, TieBreak::default())?;
            let sensors = p.sensors();
            let states = sensors.iter().map(|s| s.state).collect();
            let comps = sensors.iter().map(|s| s.component).collect();
            (*q, Some(p), states, comps)
        }
        PlacementSpec::Explicit(states) => {
            let comps = label_explicit(&pattern, states)?;
            (implied_q(&comps), None, states.clone(), comps)
        }
    };
    let structure = pattern.with_outputs(states.iter().map(|&s| vec![s]))?;
    let system = match sc.weights {
        WeightSource::Fixed => instantiate_fixed(&edges, &states)?,
        WeightSource::Random { seed, low, high } => instantiate_lsi(&structure, seed, (low, high))?,
    }
    .with_noise(sc.nu, sc.zeta)?;

    let alpha: Vec<usize> = (0..components.len())
        .filter(|&j| components[j].kind == ComponentKind::Contraction)
        .collect();
    let network = match &sc.network {
        NetworkSpec::Synthesized { seed } => {
            let w = build_beta_network(states.len(), q, *seed)?;
            SensorNetwork::new(w, hub_matrix(&components, &alpha), alpha)?
        }
        NetworkSpec::File(p) => {
            let net = parse_network(&std::fs::read_to_string(base.join(p))?)?;
            if net.len() != states.len() {
                return Err(Error::dims(format!(
                    "network file has {} sensors, the placement {}",
                    net.len(),
                    states.len()
                )));
            }
            net
        }
    };
    let gain = synthesize_gain(&system.a, network.w(), network.u(), &system.c, &sc.gain)?;
    let rho = spectral_radius(&closed_loop(&gain, &system.a, network.w(), network.u(), &system.c)?)?;
    let bound = error_bound(
        &gain,
        &system.a,
        network.w(),
        network.u(),
        &system.c,
        &system.sigma_nu,
        &system.sigma_zeta,
    )?;
    Ok(Design {
        edges,
        structure,
        q,
        placement,
        components,
        system,
        network,
        gain,
        epsilon: sc.gain.epsilon,
        rho,
        bound,
    })
}

pub fn fault_profile(sc: &Scenario) -> FaultProfile {
    sc.faults.iter().fold(FaultProfile::none(), |p, f| {
        p.with(Fault {
            sensor: f.sensor,
            onset: f.onset,
            kind: f.kind,
        })
    })
}

pub fn initial_state(sc: &Scenario, n: usize) -> Result<DVector<f64>> {
    match &sc.x0 {
        None => Ok(DVector::zeros(n)),
        Some(v) if v.len() == n => Ok(DVector::from_column_slice(v)),
        Some(v) => Err(Error::dims(format!(
            "x0 has {} entries, the system {n} states",
            v.len()
        ))),
    }
}
