use super::*;
use crate::circuit::build_round_schedule;
use crate::lattice::build_lattice;
use crate::pauli::Pauli;
use crate::sim::Defect;
use proptest::prelude::*;

fn graph(d: usize, model: NoiseModel, rounds: usize, basis: Basis) -> (RscLattice, MatchingGraph) {
    let l = build_lattice(d).unwrap();
    let s = build_round_schedule(&l);
    let g = build_matching_graph(&l, &s, &model, rounds, basis, EdgeWeighting::default()).unwrap();
    (l, g)
}

fn events(memory: MemoryBasis, rounds: usize, defects: &[(usize, usize)]) -> DetectionEventSet {
    DetectionEventSet {
        memory,
        rounds,
        defects: defects
            .iter()
            .map(|&(stabilizer, round)| Defect { stabilizer, round })
            .collect(),
    }
}

#[test]
fn log_likelihood_weights() {
    assert_eq!(EdgeWeighting::LogLikelihood.weight(0.01), 4595);
    assert_eq!(EdgeWeighting::LogLikelihood.weight(0.5), 0);
    assert_eq!(EdgeWeighting::LogLikelihood.weight(0.7), 0);
    assert_eq!(EdgeWeighting::Unit.weight(0.3), 1);
}

#[test]
fn xor_probability_merges() {
    assert!((xor_probability(0.1, 0.2) - 0.26).abs() < 1e-12);
    assert_eq!(xor_probability(0.0, 0.3), 0.3);
}

#[test]
fn adjacent_bulk_defects_match_with_unit_weight() {
    // d=3 Z-checks have ids 1, 3, 4, 6; X on qubit 4 lights faces (1,1), (2,2).
    let l = build_lattice(3).unwrap();
    let s = build_round_schedule(&l);
    let model = NoiseModel::CodeCapacity { p: 0.05 };
    let g = build_matching_graph(&l, &s, &model, 1, Basis::Z, EdgeWeighting::Unit).unwrap();
    assert_eq!(g.layers(), 1);
    let e = events(MemoryBasis::Z, 1, &[(1, 0), (6, 0)]);
    let nodes = g.defect_nodes(&l, &e).unwrap();
    let m = mwpm(&g, &nodes).unwrap();
    assert_eq!(m.weight, 1);
    assert_eq!(m.pairs, vec![(nodes[0], Partner::Defect(nodes[1]))]);
    assert!(!m.logical_parity);
}

#[test]
fn code_capacity_graph_shape_d3() {
    let (_, g) = graph(3, NoiseModel::CodeCapacity { p: 0.05 }, 1, Basis::Z);
    // Z-faces (1,1) {0,1,3,4}, (1,3) {2,5}, (2,0) {3,6}, (2,2) {4,5,7,8}.
    // Edges: (1,1)-B [q0,q1], (1,3)-B [q2], (1,1)-(2,0) [q3],
    // (1,1)-(2,2) [q4], (1,3)-(2,2) [q5], (2,0)-B [q6], (2,2)-B [q7,q8].
    assert_eq!(g.edges().len(), 7);
    let b = g.boundary_node();
    let flipping: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .filter(|e| e.flips_logical)
        .map(|e| (e.a, e.b))
        .collect();
    assert_eq!(flipping, vec![(g.node(1, 0).unwrap(), b), (g.node(3, 0).unwrap(), b)]);
    let merged = g
        .edges()
        .iter()
        .find(|e| (e.a, e.b) == (g.node(6, 0).unwrap(), b))
        .unwrap();
    let single = 2.0 * 0.05 / 3.0;
    assert!((merged.probability - 2.0 * single * (1.0 - single)).abs() < 1e-12);
    let mut by_key: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.a, e.b)).collect();
    by_key.sort();
    by_key.dedup();
    assert_eq!(by_key.len(), g.edges().len());
    assert!(g.is_connected());
    assert_eq!(g.unexplained_faults(), 0);
}

#[test]
fn every_single_code_capacity_error_is_corrected() {
    for d in [3, 5, 7] {
        let l = build_lattice(d).unwrap();
        let s = build_round_schedule(&l);
        let model = NoiseModel::CodeCapacity { p: 0.01 };
        for memory in [MemoryBasis::Z, MemoryBasis::X] {
            let g = build_matching_graph(&l, &s, &model, 1, memory.check_basis(), EdgeWeighting::Unit).unwrap();
            let exp = MemoryExperiment::new(&l, &s, RoundStructure::Ideal, memory, 1).unwrap();
            for q in 0..l.n_data() {
                for p in Pauli::NONTRIVIAL {
                    let mut inj = InjectedFaults {
                        data: vec![(0, q, p)],
                        ..Default::default()
                    };
                    let h = exp.run(&mut inj);
                    let ev = extract_detection_events(&l, &h);
                    let c = decode(&g, &l, &ev).unwrap();
                    assert!(!score_shot(&l, &h, c.flip), "d={d} {memory:?} q={q} {p}");
                }
            }
        }
    }
}

#[test]
fn every_single_circuit_fault_is_corrected_at_d3() {
    let l = build_lattice(3).unwrap();
    let s = build_round_schedule(&l);
    let model = NoiseModel::CircuitLevel { p: 1e-3 };
    let rounds = 3;
    let locations = fault_locations(&s);
    for memory in [MemoryBasis::Z, MemoryBasis::X] {
        let g = build_matching_graph(
            &l,
            &s,
            &model,
            rounds,
            memory.check_basis(),
            EdgeWeighting::LogLikelihood,
        )
        .unwrap();
        let exp = MemoryExperiment::new(&l, &s, RoundStructure::Circuit, memory, rounds).unwrap();
        for round in 0..rounds {
            for (i, loc) in locations.iter().enumerate() {
                for fault in loc.fault_domain() {
                    let mut inj = InjectedFaults {
                        circuit: vec![(round, i, fault)],
                        ..Default::default()
                    };
                    let h = exp.run(&mut inj);
                    let c = decode(&g, &l, &extract_detection_events(&l, &h)).unwrap();
                    assert!(
                        !score_shot(&l, &h, c.flip),
                        "{memory:?} round {round} {loc:?} {fault:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn circuit_graphs_explain_every_single_fault() {
    for d in [3, 5] {
        for basis in [Basis::Z, Basis::X] {
            let (_, g) = graph(d, NoiseModel::CircuitLevel { p: 1e-3 }, d, basis);
            assert_eq!(g.unexplained_faults(), 0, "d={d} {basis}");
            assert!(g.is_connected());
            assert_eq!(g.layers(), d + 1);
        }
    }
}

#[test]
fn phenomenological_graph_has_time_edges() {
    let (_, g) = graph(3, NoiseModel::Phenomenological { p: 0.01, q: 0.02 }, 3, Basis::Z);
    assert_eq!(g.layers(), 4);
    let a = g.node(1, 0).unwrap();
    let b = g.node(1, 1).unwrap();
    let e = g.edges().iter().find(|e| (e.a, e.b) == (a, b)).unwrap();
    assert!((e.probability - 0.02).abs() < 1e-12);
    assert!(!e.flips_logical);
    // Readout layer never gets measurement edges to a further layer.
    assert!(g.node(1, 4).is_none());
}

#[test]
fn zero_probability_edges_are_omitted() {
    let (_, g) = graph(3, NoiseModel::Phenomenological { p: 0.01, q: 0.0 }, 2, Basis::Z);
    let a = g.node(1, 0).unwrap();
    let b = g.node(1, 1).unwrap();
    assert!(!g.edges().iter().any(|e| (e.a, e.b) == (a, b)));
}

#[test]
fn graph_serde_round_trip_restores_paths() {
    let (_, g) = graph(3, NoiseModel::CircuitLevel { p: 2e-3 }, 3, Basis::Z);
    let json = serde_json::to_string(&g).unwrap();
    let back: MatchingGraph = serde_json::from_str(&json).unwrap();
    assert_eq!(back, g);
    assert_eq!(back.distance(0, back.boundary_node()), g.distance(0, g.boundary_node()));
}

#[test]
fn unknown_detectors_are_rejected() {
    let (l, g) = graph(3, NoiseModel::CodeCapacity { p: 0.05 }, 1, Basis::Z);
    let e = events(MemoryBasis::Z, 1, &[(1, 3)]);
    assert!(matches!(g.defect_nodes(&l, &e), Err(Error::UnknownDetector((1, 3)))));
}

#[test]
fn six_defects_hand_checked() {
    // d=5 code capacity, unit weights. Z-faces (1,1), (2,2) share qubit 6;
    // (3,3), (4,4) share qubit 18; (1,3) and (2,4) share qubit 8.
    // Each pair is one edge apart and every defect is at least one edge from
    // the boundary, so the optimum pairs them up at total weight 3.
    let l = build_lattice(5).unwrap();
    let id = |face: (usize, usize)| l.stabilizers.iter().find(|s| s.face == face).unwrap().id;
    let s = build_round_schedule(&l);
    let model = NoiseModel::CodeCapacity { p: 0.01 };
    let g = build_matching_graph(&l, &s, &model, 1, Basis::Z, EdgeWeighting::Unit).unwrap();
    let faces = [(1, 1), (2, 2), (3, 3), (4, 4), (1, 3), (2, 4)];
    let nodes: Vec<usize> = faces.iter().map(|&f| g.node(id(f), 0).unwrap()).collect();
    let m = mwpm(&g, &nodes).unwrap();
    assert_eq!(m.weight, 3);
    let b = brute_force_mwpm(&g, &nodes).unwrap();
    assert_eq!(b.weight, 3);
}

#[test]
fn brute_force_refuses_large_inputs() {
    let (_, g) = graph(5, NoiseModel::CodeCapacity { p: 0.01 }, 1, Basis::Z);
    let nodes: Vec<usize> = (0..11).collect();
    assert!(matches!(
        brute_force_mwpm(&g, &nodes),
        Err(Error::TooManyDefects { got: 11, max: 10 })
    ));
}

#[test]
fn empty_events_decode_to_identity() {
    let (l, g) = graph(3, NoiseModel::CircuitLevel { p: 1e-3 }, 3, Basis::Z);
    let c = decode(&g, &l, &events(MemoryBasis::Z, 3, &[])).unwrap();
    assert!(!c.flip);
    assert_eq!(c.weight, 0);
}

fn fixture_graphs() -> Vec<MatchingGraph> {
    vec![
        graph(5, NoiseModel::CodeCapacity { p: 0.03 }, 1, Basis::Z).1,
        graph(3, NoiseModel::Phenomenological { p: 0.02, q: 0.05 }, 3, Basis::X).1,
        graph(3, NoiseModel::CircuitLevel { p: 4e-3 }, 3, Basis::Z).1,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn blossom_matches_brute_force_weight(which in 0usize..3, raw in proptest::collection::vec(any::<u16>(), 0..=8)) {
        thread_local!(static GRAPHS: Vec<MatchingGraph> = fixture_graphs());
        GRAPHS.with(|graphs| {
            let g = &graphs[which];
            let mut nodes: Vec<usize> = raw.iter().map(|&r| r as usize % g.boundary_node()).collect();
            nodes.sort();
            nodes.dedup();
            let fast = mwpm(g, &nodes).unwrap();
            let slow = brute_force_mwpm(g, &nodes).unwrap();
            prop_assert_eq!(fast.weight, slow.weight);
            prop_assert_eq!(fast.pairs.len(), nodes.len() - fast.pairs.iter().filter(|p| matches!(p.1, Partner::Defect(_))).count());
            let again = mwpm(g, &nodes).unwrap();
            prop_assert_eq!(again, fast);
            Ok(())
        })?;
    }

    #[test]
    fn distances_form_a_metric(which in 0usize..3, a in any::<u16>(), b in any::<u16>(), c in any::<u16>()) {
        thread_local!(static GRAPHS: Vec<MatchingGraph> = fixture_graphs());
        GRAPHS.with(|graphs| {
            let g = &graphs[which];
            let n = g.n_nodes();
            let (a, b, c) = (a as usize % n, b as usize % n, c as usize % n);
            prop_assert_eq!(g.distance(a, a), 0);
            prop_assert_eq!(g.distance(a, b), g.distance(b, a));
            prop_assert!(g.distance(a, c) <= g.distance(a, b) + g.distance(b, c));
            Ok(())
        })?;
    }
}
