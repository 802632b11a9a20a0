mod common;

use common::{brute_separator, random_digraph, reference};
use nalgebra::DMatrix;
use netobs::harness::{cmd_design, parse_scenario, removal_checks};
use netobs::network::{
    check_distributed_observability, design_network, parse_network, survives_removals, vertex_connectivity,
    ObservabilityConditions, SensorNetwork,
};
use netobs::sim::instantiate_lsi;
use netobs::structure::{place_outputs_q_redundant, TieBreak};

#[test]
fn vertex_connectivity_matches_separator_search() {
    let mut checked = 0;
    for seed in 0..300 {
        let n = 2 + (seed as usize % 6);
        let p = [0.3, 0.5, 0.7, 0.9][seed as usize % 4];
        let adj = random_digraph(n, p, seed);
        assert_eq!(vertex_connectivity(&adj), brute_separator(&adj), "seed {seed}: {adj:?}");
        checked += 1;
    }
    assert_eq!(checked, 300);
}

#[test]
fn reference_networks() {
    let (_, d) = reference();
    let w = d.network.w();
    // 1 -> 4 -> 3 -> 2 -> 1 plus self-loops
    for (from, to) in [(0, 3), (3, 2), (2, 1), (1, 0)] {
        assert!(w[(to, from)] > 0.0);
    }
    assert_eq!(w.iter().filter(|&&x| x != 0.0).count(), 8);
    for i in 0..4 {
        assert!((w.row(i).sum() - 1.0).abs() < 1e-12);
    }
    let u = DMatrix::from_row_slice(4, 4, &[1., 0., 0., 1., 0., 1., 0., 1., 0., 0., 1., 1., 0., 0., 0., 1.]);
    assert_eq!(d.network.u(), &u);
    assert_eq!(d.network.alpha(), &[3]);
    assert!(check_distributed_observability(&d.system.a, &d.system.c, w, &u).unwrap());
    assert!(!check_distributed_observability(&d.system.a, &d.system.c, &DMatrix::identity(4, 4), &u).unwrap());
    assert!(ObservabilityConditions::evaluate(&d.network, &d.components)
        .unwrap()
        .holds());
}

#[test]
fn one_redundant_design_survives_every_single_removal() {
    let sc = parse_scenario("[placement]\nq = 1\n").unwrap();
    let s = cmd_design(&sc, std::path::Path::new(".")).unwrap();
    let d = &s.design;
    assert_eq!(d.network.len(), 8);
    assert_eq!(s.connectivity.vertex_connectivity, 2);
    assert!(survives_removals(&d.network.beta_adjacency(), 1));
    let removals = s.removals.as_ref().unwrap();
    assert_eq!(removals.len(), 8);
    assert!(removals.iter().all(|r| r.holds()), "{removals:?}");
    // α-twins do not feed each other; each feeds every other sensor.
    assert_eq!(d.network.alpha(), &[3, 7]);
    for &j in d.network.alpha() {
        for i in 0..8 {
            let twin = d.network.alpha().contains(&i) && i != j;
            assert_eq!(d.network.u()[(i, j)] == 1.0, !twin, "U[{i}][{j}]");
        }
    }
    // β'3 is the third sensor of the second round.
    let beta3 = 6;
    let net = d.network.without(&[beta3]).unwrap();
    let sys = d.system.without_sensors(&[beta3]).unwrap();
    assert!(check_distributed_observability(&sys.a, &sys.c, net.w(), net.u()).unwrap());
}

#[test]
fn random_instantiations_keep_one_redundancy() {
    let pattern = netobs::harness::fig2_structure();
    let placement = place_outputs_q_redundant(&pattern, 1, TieBreak::default()).unwrap();
    let structure = placement.apply(&pattern).unwrap();
    let good = (0..20u64)
        .filter(|&seed| {
            let network = design_network(&placement, seed + 100).unwrap();
            let system = instantiate_lsi(&structure, seed, (0.1, 1.0)).unwrap();
            let checks = removal_checks(&structure, &network, &system, 1).unwrap();
            checks.len() == 8 && checks.iter().all(|c| c.holds())
        })
        .count();
    assert!(good >= 19, "{good}/20");
}

#[test]
fn network_file_round_trip() {
    let (_, d) = reference();
    let text = d.network.to_text();
    let back: SensorNetwork = parse_network(&text).unwrap();
    assert_eq!(back, d.network);
}
