//! Shared fixtures for the criterion benchmarks.

use rscsim::circuit::build_round_schedule;
use rscsim::decoder::{build_matching_graph, EdgeWeighting};
use rscsim::sim::{extract_detection_events, run_memory};
use rscsim::{DetectionEventSet, MatchingGraph, MemoryBasis, NoiseModel, RoundSchedule, RscLattice};

pub struct Fixture {
    pub lattice: RscLattice,
    pub schedule: RoundSchedule,
    pub model: NoiseModel,
    pub rounds: usize,
    pub graph: MatchingGraph,
}

impl Fixture {
    pub fn circuit(d: usize, p: f64) -> Self {
        let lattice = rscsim::lattice::build_lattice(d).expect("odd distance");
        let schedule = build_round_schedule(&lattice);
        let model = NoiseModel::CircuitLevel { p };
        let graph = build_matching_graph(
            &lattice,
            &schedule,
            &model,
            d,
            MemoryBasis::Z.check_basis(),
            EdgeWeighting::LogLikelihood,
        )
        .expect("valid graph");
        Fixture {
            lattice,
            schedule,
            model,
            rounds: d,
            graph,
        }
    }

    /// Detection events of shots `0..n` with seed 0.
    pub fn events(&self, n: u64) -> Vec<DetectionEventSet> {
        (0..n)
            .map(|shot| {
                let h = run_memory(
                    &self.lattice,
                    &self.schedule,
                    &self.model,
                    MemoryBasis::Z,
                    self.rounds,
                    0,
                    shot,
                )
                .expect("valid model");
                extract_detection_events(&self.lattice, &h)
            })
            .collect()
    }
}
