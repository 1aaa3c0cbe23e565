//! Space-time matching graphs and minimum-weight perfect matching decoding.
//!
//! Graph edges come from single-fault analysis: every fault mechanism that
//! lights up at most two detectors of one check basis contributes an edge
//! between them (or to the basis's boundary node when it lights one).
//! Mechanisms sharing an edge are merged, and the edge weight is the
//! discretised log-likelihood ratio `ln((1 - p_e) / p_e)`.
//!
//! Decoding runs the blossom matcher on the complete graph of defects plus
//! one boundary clone per defect, with pairwise weights taken from the
//! graph's shortest paths. The correction is only the parity of logical
//! crossings along the matched paths, applied to the classical record.

pub mod blossom;
mod brute;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::circuit::{fault_locations, GateKind, RoundSchedule};
use crate::error::{Error, Result};
use crate::lattice::{Basis, RscLattice};
use crate::noise::NoiseModel;
use crate::sim::{
    extract_detection_events, score_shot, DetectionEventSet, InjectedFaults, MemoryBasis, MemoryExperiment,
    RoundStructure,
};

pub use brute::{brute_force_mwpm, MAX_BRUTE_FORCE_DEFECTS};

/// Path weight standing in for "unreachable".
pub const INFINITE: i64 = i64::MAX / 4;

/// Integer units per nat of log-likelihood weight.
pub const WEIGHT_SCALE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeWeighting {
    Unit,
    #[default]
    LogLikelihood,
}

impl EdgeWeighting {
    pub fn weight(self, probability: f64) -> i64 {
        match self {
            EdgeWeighting::Unit => 1,
            EdgeWeighting::LogLikelihood => {
                if probability >= 0.5 {
                    log::warn!("edge probability {probability} >= 0.5 clamped to weight 0");
                    0
                } else {
                    (((1.0 - probability) / probability).ln() * WEIGHT_SCALE).round() as i64
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub probability: f64,
    pub weight: i64,
    /// The underlying error chain crosses the scored logical operator.
    pub flips_logical: bool,
}

/// Serialized form of a matching graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphData {
    pub distance: usize,
    pub basis: Basis,
    pub layers: usize,
    /// Stabilizer id of each detector column.
    pub detectors: Vec<usize>,
    pub edges: Vec<GraphEdge>,
    /// Fault mechanisms that lit more than two detectors of this basis.
    pub unexplained_faults: usize,
}

/// Detector graph for one check basis. Node `layer * columns + column` is
/// detector `(detectors[column], layer)`; the last node is the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "GraphData", into = "GraphData")]
pub struct MatchingGraph {
    data: GraphData,
    dist: Vec<i64>,
    parity: Vec<bool>,
}

impl From<GraphData> for MatchingGraph {
    fn from(data: GraphData) -> Self {
        let mut graph = MatchingGraph {
            data,
            dist: Vec::new(),
            parity: Vec::new(),
        };
        graph.compute_paths();
        graph
    }
}

impl From<MatchingGraph> for GraphData {
    fn from(graph: MatchingGraph) -> Self {
        graph.data
    }
}

impl MatchingGraph {
    pub fn data(&self) -> &GraphData {
        &self.data
    }

    pub fn code_distance(&self) -> usize {
        self.data.distance
    }

    pub fn basis(&self) -> Basis {
        self.data.basis
    }

    pub fn layers(&self) -> usize {
        self.data.layers
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.data.edges
    }

    pub fn unexplained_faults(&self) -> usize {
        self.data.unexplained_faults
    }

    pub fn n_nodes(&self) -> usize {
        self.data.layers * self.data.detectors.len() + 1
    }

    pub fn boundary_node(&self) -> usize {
        self.n_nodes() - 1
    }

    pub fn node(&self, stabilizer: usize, round: usize) -> Option<usize> {
        if round >= self.data.layers {
            return None;
        }
        let column = self.data.detectors.binary_search(&stabilizer).ok()?;
        Some(round * self.data.detectors.len() + column)
    }

    /// `(stabilizer, round)` of a detector node.
    pub fn detector(&self, node: usize) -> Option<(usize, usize)> {
        let columns = self.data.detectors.len();
        (node < self.boundary_node()).then(|| (self.data.detectors[node % columns], node / columns))
    }

    /// Shortest-path weight between two nodes.
    pub fn distance(&self, a: usize, b: usize) -> i64 {
        self.dist[a * self.n_nodes() + b]
    }

    /// Logical-crossing parity of the chosen shortest path.
    pub fn path_parity(&self, a: usize, b: usize) -> bool {
        self.parity[a * self.n_nodes() + b]
    }

    fn compute_paths(&mut self) {
        let n = self.n_nodes();
        let mut adjacency: Vec<Vec<(usize, i64, bool)>> = vec![Vec::new(); n];
        for e in &self.data.edges {
            adjacency[e.a].push((e.b, e.weight, e.flips_logical));
            adjacency[e.b].push((e.a, e.weight, e.flips_logical));
        }
        self.dist = vec![INFINITE; n * n];
        self.parity = vec![false; n * n];
        let mut heap = BinaryHeap::new();
        for source in 0..n {
            let row = source * n;
            self.dist[row + source] = 0;
            heap.push(Reverse((0i64, source)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > self.dist[row + u] {
                    continue;
                }
                for &(v, w, flip) in &adjacency[u] {
                    let nd = d + w;
                    if nd < self.dist[row + v] {
                        self.dist[row + v] = nd;
                        self.parity[row + v] = self.parity[row + u] ^ flip;
                        heap.push(Reverse((nd, v)));
                    }
                }
            }
        }
    }

    /// Every detector can reach the boundary.
    pub fn is_connected(&self) -> bool {
        let b = self.boundary_node();
        (0..b).all(|v| self.distance(v, b) < INFINITE)
    }

    /// Graph node ids of this basis's defects, in event order.
    pub fn defect_nodes(&self, lattice: &RscLattice, events: &DetectionEventSet) -> Result<Vec<usize>> {
        events
            .of_basis(lattice, self.data.basis)
            .map(|d| {
                self.node(d.stabilizer, d.round)
                    .ok_or(Error::UnknownDetector((d.stabilizer, d.round)))
            })
            .collect()
    }
}

/// One fault mechanism of a generic round: detectors as `(stabilizer,
/// layer offset)`.
#[derive(Debug, Clone, PartialEq)]
struct Mechanism {
    probability: f64,
    detectors: Vec<(usize, usize)>,
    flips: bool,
}

fn xor_probability(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

fn memory_for(basis: Basis) -> MemoryBasis {
    match basis {
        Basis::Z => MemoryBasis::Z,
        Basis::X => MemoryBasis::X,
    }
}

/// Probability of the part of a data-qubit depolarizing fault that this
/// basis's checks see (X or Y for Z-checks, Z or Y for X-checks).
fn data_fault_mechanisms(lattice: &RscLattice, basis: Basis, p: f64) -> Vec<Mechanism> {
    (0..lattice.n_data())
        .map(|q| Mechanism {
            probability: 2.0 * p / 3.0,
            detectors: lattice
                .stabilizers_of(basis)
                .filter(|s| s.support.contains(&q))
                .map(|s| (s.id, 0))
                .collect(),
            flips: lattice.logical_chain(basis).contains(&q),
        })
        .collect()
}

/// Run every single circuit fault through one faulty round followed by a
/// clean round and record what it lights up.
fn circuit_mechanisms(lattice: &RscLattice, schedule: &RoundSchedule, basis: Basis, p: f64) -> Vec<Mechanism> {
    let memory = memory_for(basis);
    let experiment = MemoryExperiment::new(lattice, schedule, RoundStructure::Circuit, memory, 2).expect("two rounds");
    let mut out = Vec::new();
    for (location, loc) in fault_locations(schedule).iter().enumerate() {
        let probability = match loc.kind {
            GateKind::Cnot => p / 15.0,
            GateKind::Measure => p,
            GateKind::Prep | GateKind::Idle => p / 3.0,
        };
        for fault in loc.fault_domain() {
            let mut injected = InjectedFaults {
                circuit: vec![(0, location, fault)],
                ..Default::default()
            };
            let history = experiment.run(&mut injected);
            let events = extract_detection_events(lattice, &history);
            out.push(Mechanism {
                probability,
                detectors: events
                    .of_basis(lattice, basis)
                    .map(|d| (d.stabilizer, d.round))
                    .collect(),
                flips: score_shot(lattice, &history, false),
            });
        }
    }
    out
}

/// Build the detector graph of `basis`'s checks for a `rounds`-round memory
/// experiment under `model`. Code capacity has a single detector layer;
/// the other models have `rounds + 1` (the last from the data readout).
pub fn build_matching_graph(
    lattice: &RscLattice,
    schedule: &RoundSchedule,
    model: &NoiseModel,
    rounds: usize,
    basis: Basis,
    weighting: EdgeWeighting,
) -> Result<MatchingGraph> {
    model.validate()?;
    if rounds == 0 {
        return Err(Error::NoRounds);
    }
    let p = model.p();
    let (layers, fault_rounds, mechanisms) = match *model {
        NoiseModel::CodeCapacity { .. } => (1, 1, data_fault_mechanisms(lattice, basis, p)),
        NoiseModel::Phenomenological { q, .. } => {
            let mut m = data_fault_mechanisms(lattice, basis, p);
            m.extend(lattice.stabilizers_of(basis).map(|s| Mechanism {
                probability: q,
                detectors: vec![(s.id, 0), (s.id, 1)],
                flips: false,
            }));
            (rounds + 1, rounds, m)
        }
        NoiseModel::CircuitLevel { .. } => (rounds + 1, rounds, circuit_mechanisms(lattice, schedule, basis, p)),
    };

    let detectors: Vec<usize> = lattice.stabilizers_of(basis).map(|s| s.id).collect();
    let column = |stabilizer: usize| detectors.binary_search(&stabilizer).expect("basis detector");
    let columns = detectors.len();
    let boundary = layers * columns;

    // (a, b) -> (probability without logical flip, with logical flip)
    let mut merged: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    let mut unexplained = 0;
    for t in 0..fault_rounds {
        for m in &mechanisms {
            let nodes: Vec<usize> = m
                .detectors
                .iter()
                .map(|&(s, dt)| (t + dt) * columns + column(s))
                .collect();
            let key = match nodes.as_slice() {
                [] => continue,
                [a] => (*a, boundary),
                [a, b] => (*a.min(b), *a.max(b)),
                _ => {
                    unexplained += 1;
                    continue;
                }
            };
            let entry = merged.entry(key).or_insert((0.0, 0.0));
            if m.flips {
                entry.1 = xor_probability(entry.1, m.probability);
            } else {
                entry.0 = xor_probability(entry.0, m.probability);
            }
        }
    }
    if unexplained > 0 {
        log::warn!("{unexplained} fault mechanisms lit more than two {basis}-detectors");
    }

    let edges = merged
        .into_iter()
        .filter_map(|((a, b), (p0, p1))| {
            let probability = xor_probability(p0, p1);
            (probability > 0.0).then(|| GraphEdge {
                a,
                b,
                probability,
                weight: weighting.weight(probability),
                flips_logical: p1 > p0,
            })
        })
        .collect();

    Ok(MatchingGraph::from(GraphData {
        distance: lattice.distance,
        basis,
        layers,
        detectors,
        edges,
        unexplained_faults: unexplained,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Partner {
    Defect(usize),
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    /// `(defect node, partner)`, sorted, each defect covered exactly once.
    pub pairs: Vec<(usize, Partner)>,
    pub weight: i64,
    pub logical_parity: bool,
}

impl Matching {
    pub fn empty() -> Self {
        Matching {
            pairs: Vec::new(),
            weight: 0,
            logical_parity: false,
        }
    }

    pub(crate) fn from_pairs(graph: &MatchingGraph, mut pairs: Vec<(usize, Partner)>) -> Self {
        for pair in &mut pairs {
            if let (a, Partner::Defect(b)) = *pair {
                if b < a {
                    *pair = (b, Partner::Defect(a));
                }
            }
        }
        pairs.sort();
        let boundary = graph.boundary_node();
        let (mut weight, mut logical_parity) = (0, false);
        for &(a, partner) in &pairs {
            let b = match partner {
                Partner::Defect(b) => b,
                Partner::Boundary => boundary,
            };
            weight += graph.distance(a, b);
            logical_parity ^= graph.path_parity(a, b);
        }
        Matching {
            pairs,
            weight,
            logical_parity,
        }
    }
}

/// Minimum-weight perfect matching of `defects` (graph node ids), with the
/// boundary available to any number of defects.
pub fn mwpm(graph: &MatchingGraph, defects: &[usize]) -> Result<Matching> {
    let k = defects.len();
    if k == 0 {
        return Ok(Matching::empty());
    }
    let boundary = graph.boundary_node();
    // Vertices 0..k are defects, k..2k their boundary clones.
    let mut raw: Vec<(usize, usize, i64)> = Vec::with_capacity(k * k + k);
    for i in 0..k {
        for j in i + 1..k {
            let w = graph.distance(defects[i], defects[j]);
            if w < INFINITE {
                raw.push((i, j, w));
            }
        }
        let w = graph.distance(defects[i], boundary);
        if w < INFINITE {
            raw.push((i, k + i, w));
        }
    }
    for (i, &defect) in defects.iter().enumerate() {
        if !raw.iter().any(|&(a, b, _)| a == i || b == i) {
            return Err(Error::Disconnected(defect));
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            raw.push((k + i, k + j, 0));
        }
    }
    // Maximum weight over maximum-cardinality matchings of `top - w` is the
    // minimum weight perfect matching.
    let top = raw.iter().map(|e| e.2).max().unwrap_or(0) + 1;
    let edges: Vec<_> = raw.iter().map(|&(a, b, w)| (a, b, top - w)).collect();
    let mate = blossom::max_weight_matching(2 * k, &edges, true);

    let mut pairs = Vec::with_capacity(k);
    for i in 0..k {
        match mate[i] {
            Some(j) if j < k => {
                if i < j {
                    pairs.push((defects[i], Partner::Defect(defects[j])));
                }
            }
            Some(_) => pairs.push((defects[i], Partner::Boundary)),
            None => return Err(Error::Disconnected(defects[i])),
        }
    }
    Ok(Matching::from_pairs(graph, pairs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correction {
    /// Check basis decoded; the corrected logical is the one these checks
    /// protect (Z̄ for Z-checks).
    pub basis: Basis,
    /// Whether the classical record of the logical must be flipped.
    pub flip: bool,
    pub weight: i64,
}

/// Decode the defects of `graph`'s basis. Pure function of its inputs.
pub fn decode(graph: &MatchingGraph, lattice: &RscLattice, events: &DetectionEventSet) -> Result<Correction> {
    let defects = graph.defect_nodes(lattice, events)?;
    let matching = mwpm(graph, &defects)?;
    Ok(Correction {
        basis: graph.basis(),
        flip: matching.logical_parity,
        weight: matching.weight,
    })
}

#[cfg(test)]
mod tests;
