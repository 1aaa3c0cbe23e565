//! Frequency classes for fixed-frequency transmons and collision yield
//! under junction disorder.
//!
//! Qubits sit on a square grid in rotated coordinates: data qubit `(r, c)` at
//! `(u, v) = (r + c, r - c)` and the ancilla of face `(fr, fc)` at
//! `(fr + fc - 1, fr - fc)`, so every coupled pair is one grid step apart.
//! The class `((u + 2v) mod 5) + 1` gives every qubit and its four grid
//! neighbours distinct classes.

use std::collections::BTreeSet;
use std::io::Write;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{wilson_interval, Z_95};
use crate::lattice::{Basis, BusLayout, RscLattice};
use crate::stream::{shot_rng, Domain};

pub const N_CLASSES: usize = 5;
pub const DEFAULT_BASES_GHZ: [f64; N_CLASSES] = [5.0, 5.1, 5.2, 5.3, 5.4];
pub const DEFAULT_ANHARMONICITY_GHZ: f64 = -0.346;
pub const DEFAULT_DISORDER_MHZ: f64 = 280.0;

/// Cross-resonance style gate pair: `control` is driven at `target`'s frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoupledPair {
    pub control: usize,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPlan {
    pub distance: usize,
    /// Class in `1..=5` per qubit (data, then ancillas by stabilizer id).
    pub classes: Vec<u8>,
    pub base_ghz: Vec<f64>,
    pub anharmonicity_ghz: f64,
    /// Z-checks use the data qubit as control, X-checks the ancilla.
    pub couplings: Vec<CoupledPair>,
    /// Uncoupled pairs sharing a coupled neighbour.
    pub next_nearest: Vec<(usize, usize)>,
}

fn rotated_coords(lattice: &RscLattice, qubit: usize) -> (i64, i64) {
    let d = lattice.distance;
    if qubit < d * d {
        let (r, c) = lattice.data_qubits[qubit];
        ((r + c) as i64, r as i64 - c as i64)
    } else {
        let (fr, fc) = lattice.stabilizers[qubit - d * d].face;
        ((fr + fc) as i64 - 1, fr as i64 - fc as i64)
    }
}

fn couplings(lattice: &RscLattice) -> Vec<CoupledPair> {
    let mut out: Vec<CoupledPair> = lattice
        .stabilizers
        .iter()
        .flat_map(|s| {
            s.support.iter().map(move |&q| match s.basis {
                Basis::Z => CoupledPair {
                    control: q,
                    target: s.ancilla,
                },
                Basis::X => CoupledPair {
                    control: s.ancilla,
                    target: q,
                },
            })
        })
        .collect();
    out.sort();
    out
}

fn adjacency(n: usize, pairs: &[CoupledPair]) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); n];
    for p in pairs {
        adj[p.control].insert(p.target);
        adj[p.target].insert(p.control);
    }
    adj
}

/// Build the periodic 5-class plan with default bases and anharmonicity.
/// The bus layout is only consulted by [`bus_conflicts`]; the pattern itself
/// is fixed by geometry.
pub fn assign_classes(lattice: &RscLattice, _buses: &BusLayout) -> FrequencyPlan {
    let n = lattice.n_qubits();
    let classes = (0..n)
        .map(|q| {
            let (u, v) = rotated_coords(lattice, q);
            ((u + 2 * v).rem_euclid(N_CLASSES as i64) + 1) as u8
        })
        .collect();
    let couplings = couplings(lattice);
    let adj = adjacency(n, &couplings);
    let mut next_nearest = BTreeSet::new();
    for neighbours in &adj {
        for &a in neighbours {
            for &b in neighbours {
                if a < b && !adj[a].contains(&b) {
                    next_nearest.insert((a, b));
                }
            }
        }
    }
    FrequencyPlan {
        distance: lattice.distance,
        classes,
        base_ghz: DEFAULT_BASES_GHZ.to_vec(),
        anharmonicity_ghz: DEFAULT_ANHARMONICITY_GHZ,
        couplings,
        next_nearest: next_nearest.into_iter().collect(),
    }
}

impl FrequencyPlan {
    pub fn n_qubits(&self) -> usize {
        self.classes.len()
    }

    pub fn classes_used(&self) -> usize {
        self.classes.iter().collect::<BTreeSet<_>>().len()
    }

    pub fn base_frequency(&self, qubit: usize) -> f64 {
        self.base_ghz[usize::from(self.classes[qubit]) - 1]
    }

    /// Sets of qubits that must carry pairwise distinct classes: each control
    /// together with everything it couples to, so its drive at any target's
    /// frequency addresses only that target.
    pub fn selectivity_sets(&self) -> Vec<Vec<usize>> {
        let adj = adjacency(self.n_qubits(), &self.couplings);
        let controls: BTreeSet<usize> = self.couplings.iter().map(|p| p.control).collect();
        controls
            .into_iter()
            .map(|c| std::iter::once(c).chain(adj[c].iter().copied()).collect())
            .collect()
    }
}

/// Two qubits with equal class inside one selectivity set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassConflict {
    pub control: usize,
    pub a: usize,
    pub b: usize,
}

pub fn selectivity_conflicts(plan: &FrequencyPlan) -> Vec<ClassConflict> {
    let mut out = Vec::new();
    for set in plan.selectivity_sets() {
        for (i, &a) in set.iter().enumerate() {
            for &b in &set[i + 1..] {
                if plan.classes[a] == plan.classes[b] {
                    out.push(ClassConflict { control: set[0], a, b });
                }
            }
        }
    }
    out
}

/// Pairs of qubits on a common bus, within two couplings of each other.
pub fn bus_neighbours(plan: &FrequencyPlan, buses: &BusLayout) -> Vec<(usize, usize)> {
    let close: BTreeSet<(usize, usize)> = plan
        .couplings
        .iter()
        .map(|p| (p.control.min(p.target), p.control.max(p.target)))
        .chain(plan.next_nearest.iter().copied())
        .collect();
    let mut out = BTreeSet::new();
    for bus in &buses.buses {
        let members: Vec<usize> = bus.data_qubits.iter().chain(&bus.ancillas).copied().collect();
        for &a in &members {
            for &b in &members {
                if a < b && close.contains(&(a, b)) {
                    out.insert((a, b));
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Bus neighbours sharing a class.
pub fn bus_conflicts(plan: &FrequencyPlan, buses: &BusLayout) -> Vec<(usize, usize)> {
    bus_neighbours(plan, buses)
        .into_iter()
        .filter(|&(a, b)| plan.classes[a] == plan.classes[b])
        .collect()
}

/// Backtracking search for a `k`-class assignment of `n` qubits making every
/// set in `sets` rainbow. `None` proves infeasibility.
pub fn find_class_assignment(n: usize, sets: &[Vec<usize>], k: u8) -> Option<Vec<u8>> {
    let mut adj = vec![BTreeSet::new(); n];
    for set in sets {
        for &a in set {
            for &b in set {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    // Most constrained first, then breadth-first from it.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (std::cmp::Reverse(adj[v].len()), v));
    for &start in &by_degree {
        if seen[start] {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut colour = vec![0u8; n];
    fn extend(i: usize, order: &[usize], adj: &[BTreeSet<usize>], colour: &mut [u8], k: u8) -> bool {
        let Some(&v) = order.get(i) else {
            return true;
        };
        for c in 1..=k {
            if adj[v].iter().all(|&w| colour[w] != c) {
                colour[v] = c;
                if extend(i + 1, order, adj, colour, k) {
                    return true;
                }
            }
        }
        colour[v] = 0;
        false
    }
    extend(0, &order, &adj, &mut colour, k).then_some(colour)
}

/// Smallest class count satisfying the selectivity constraints of `plan`.
pub fn minimum_classes(plan: &FrequencyPlan) -> usize {
    let sets = plan.selectivity_sets();
    (1..=N_CLASSES as u8)
        .find(|&k| find_class_assignment(plan.n_qubits(), &sets, k).is_some())
        .map_or(N_CLASSES, usize::from)
}

/// How a quoted disorder figure maps to a Gaussian standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaInterpretation {
    #[default]
    StdDev,
    /// The figure is a full ±2σ spread.
    Spread,
}

impl SigmaInterpretation {
    pub fn sigma_mhz(self, figure_mhz: f64) -> f64 {
        match self {
            SigmaInterpretation::StdDev => figure_mhz,
            SigmaInterpretation::Spread => figure_mhz / 4.0,
        }
    }
}

/// Frequencies (GHz) of sample `index`: class base plus Gaussian disorder.
pub fn sample_frequencies(plan: &FrequencyPlan, sigma_mhz: f64, seed: u64, index: u64) -> Result<Vec<f64>> {
    if sigma_mhz.is_nan() || sigma_mhz < 0.0 {
        return Err(Error::NegativeSigma(sigma_mhz));
    }
    let bases = (0..plan.n_qubits()).map(|q| plan.base_frequency(q));
    if sigma_mhz == 0.0 {
        return Ok(bases.collect());
    }
    let normal = Normal::new(0.0, sigma_mhz / 1000.0).expect("finite positive sigma");
    let mut rng = shot_rng(seed, Domain::Frequencies, index);
    Ok(bases.map(|f| f + normal.sample(&mut rng)).collect())
}

/// Detuning windows in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionWindows {
    pub degenerate_mhz: f64,
    pub one_two_mhz: f64,
    pub two_photon_mhz: f64,
}

impl Default for CollisionWindows {
    fn default() -> Self {
        CollisionWindows {
            degenerate_mhz: 17.0,
            one_two_mhz: 4.0,
            two_photon_mhz: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionCondition {
    /// Degenerate 0-1 transitions.
    Degenerate,
    /// 0-1 of one qubit against the 1-2 of the other.
    OneTwo,
    /// Two-photon 0-2 of one qubit against twice the other's 0-1.
    TwoPhoton,
}

impl CollisionCondition {
    pub fn id(self) -> &'static str {
        match self {
            CollisionCondition::Degenerate => "C1",
            CollisionCondition::OneTwo => "C2",
            CollisionCondition::TwoPhoton => "C3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Collision {
    pub sample: u64,
    pub pair: (usize, usize),
    pub condition: CollisionCondition,
    pub detuning_mhz: f64,
}

/// Collisions of one sample. Degeneracy is checked on coupled and
/// next-nearest pairs; the transmon-level conditions on coupled pairs, in
/// both orders.
pub fn detect_collisions(
    plan: &FrequencyPlan,
    freqs_ghz: &[f64],
    windows: &CollisionWindows,
    sample: u64,
) -> Vec<Collision> {
    let alpha = plan.anharmonicity_ghz * 1000.0;
    let f = |q: usize| freqs_ghz[q] * 1000.0;
    let mut out = Vec::new();
    let mut push = |pair, condition, detuning_mhz: f64, window: f64| {
        if detuning_mhz.abs() < window {
            out.push(Collision {
                sample,
                pair,
                condition,
                detuning_mhz,
            });
        }
    };
    let coupled = plan.couplings.iter().map(|p| (p.control, p.target));
    for (a, b) in coupled.clone().chain(plan.next_nearest.iter().copied()) {
        push(
            (a, b),
            CollisionCondition::Degenerate,
            f(a) - f(b),
            windows.degenerate_mhz,
        );
    }
    for (a, b) in coupled {
        for (i, j) in [(a, b), (b, a)] {
            push(
                (i, j),
                CollisionCondition::OneTwo,
                f(i) - f(j) - alpha.abs(),
                windows.one_two_mhz,
            );
            push(
                (i, j),
                CollisionCondition::TwoPhoton,
                2.0 * f(i) + alpha - 2.0 * f(j),
                windows.two_photon_mhz,
            );
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub samples: u64,
    pub sigma_mhz: f64,
    pub collisions: Vec<Collision>,
    /// Samples with at least one collision.
    pub colliding_samples: u64,
    pub probability: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Sample `samples` disorder realisations in parallel and aggregate.
pub fn collision_yield(
    plan: &FrequencyPlan,
    sigma_mhz: f64,
    samples: u64,
    seed: u64,
    windows: &CollisionWindows,
) -> Result<CollisionReport> {
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be at least 1".into()));
    }
    let per_sample = (0..samples)
        .into_par_iter()
        .map(|i| {
            Ok(detect_collisions(
                plan,
                &sample_frequencies(plan, sigma_mhz, seed, i)?,
                windows,
                i,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let colliding_samples = per_sample.iter().filter(|c| !c.is_empty()).count() as u64;
    let (ci_low, ci_high) = wilson_interval(colliding_samples, samples, Z_95);
    Ok(CollisionReport {
        samples,
        sigma_mhz,
        collisions: per_sample.into_iter().flatten().collect(),
        colliding_samples,
        probability: colliding_samples as f64 / samples as f64,
        ci_low,
        ci_high,
    })
}

/// CSV with one row per collision and a closing summary row.
pub fn write_collision_csv(report: &CollisionReport, out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["sample", "pair", "condition", "detuning_mhz"])?;
    for c in &report.collisions {
        writer.write_record([
            c.sample.to_string(),
            format!("{}-{}", c.pair.0, c.pair.1),
            c.condition.id().to_string(),
            c.detuning_mhz.to_string(),
        ])?;
    }
    writer.write_record([
        "summary".to_string(),
        format!("{}/{}", report.colliding_samples, report.samples),
        "collision_probability".to_string(),
        report.probability.to_string(),
    ])?;
    writer.flush()?;
    Ok(())
}
