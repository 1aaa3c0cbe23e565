//! Memory experiments on a Pauli frame.
//!
//! The frame starts as the identity (ideal encoded state), accumulates
//! faults round by round, and is only ever read: measured syndrome bits are
//! the frame's anticommutation with each check, and the final data readout is
//! the frame component that flips memory-basis measurements.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{FaultPauli, Gate, GateKind, RoundSchedule, CYCLE_STEPS};
use crate::error::{Error, Result};
use crate::lattice::{Basis, RscLattice};
use crate::noise::{depolarize, sample_location, NoiseModel};
use crate::pauli::{BitVec, Pauli, PauliFrame};
use crate::stream::{shot_rng, Domain};

/// Basis of the stored logical state: `Z` stores |0̄⟩ and scores Z̄,
/// `X` stores |+̄⟩ and scores X̄.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum MemoryBasis {
    #[default]
    Z,
    X,
}

impl MemoryBasis {
    /// Checks whose outcomes are deterministic, and which detect the errors
    /// that flip the stored logical.
    pub fn check_basis(self) -> Basis {
        match self {
            MemoryBasis::Z => Basis::Z,
            MemoryBasis::X => Basis::X,
        }
    }

    /// Whether `frame` flips a memory-basis measurement of `qubit`.
    #[inline]
    pub fn flips(self, frame: &PauliFrame, qubit: usize) -> bool {
        match self {
            MemoryBasis::Z => frame.has_x(qubit),
            MemoryBasis::X => frame.has_z(qubit),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyndromeHistory {
    pub memory: MemoryBasis,
    /// `rounds[t]` holds one measured bit per stabilizer (id order).
    pub rounds: Vec<BitVec>,
    pub final_data_readout: BitVec,
    /// Accumulated physical errors; hidden from the decoder.
    pub true_frame: PauliFrame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Defect {
    pub stabilizer: usize,
    pub round: usize,
}

/// Syndrome changes between consecutive rounds. Layer `T` compares the last
/// measured round against the syndrome implied by the data readout and only
/// exists for memory-basis checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionEventSet {
    pub memory: MemoryBasis,
    pub rounds: usize,
    pub defects: Vec<Defect>,
}

impl DetectionEventSet {
    pub fn is_empty(&self) -> bool {
        self.defects.is_empty()
    }

    pub fn of_basis<'a>(&'a self, lattice: &'a RscLattice, basis: Basis) -> impl Iterator<Item = Defect> + 'a {
        self.defects
            .iter()
            .copied()
            .filter(move |d| lattice.stabilizers[d.stabilizer].basis == basis)
    }
}

/// Where faults come from during a run.
pub trait FaultSource {
    /// Data-qubit noise applied at the start of `round` (ideal-measurement
    /// models and the bare qubit).
    fn data_noise(&mut self, round: usize, frame: &mut PauliFrame, n_data: usize);
    /// Syndrome flip of `stabilizer` in `round` (ideal-measurement models).
    fn syndrome_flip(&mut self, round: usize, stabilizer: usize) -> bool;
    /// Fault at circuit location `location` of `round`.
    fn circuit_fault(&mut self, round: usize, location: usize, kind: GateKind) -> Option<FaultPauli>;
}

/// Random faults drawn from a noise model.
pub struct RandomFaults<'r, R: Rng> {
    pub model: NoiseModel,
    pub rng: &'r mut R,
}

impl<R: Rng> FaultSource for RandomFaults<'_, R> {
    fn data_noise(&mut self, round: usize, frame: &mut PauliFrame, n_data: usize) {
        let (p, steps) = match self.model {
            NoiseModel::CodeCapacity { p } if round == 0 => (p, 1),
            NoiseModel::CodeCapacity { .. } => return,
            NoiseModel::Phenomenological { p, .. } => (p, 1),
            // Only reached for the bare qubit, which idles through a cycle.
            NoiseModel::CircuitLevel { p } => (p, CYCLE_STEPS),
        };
        for q in 0..n_data {
            for _ in 0..steps {
                depolarize(frame, q, p, self.rng);
            }
        }
    }

    fn syndrome_flip(&mut self, _round: usize, _stabilizer: usize) -> bool {
        match self.model {
            NoiseModel::Phenomenological { q, .. } => q > 0.0 && self.rng.random::<f64>() < q,
            _ => false,
        }
    }

    fn circuit_fault(&mut self, _round: usize, _location: usize, kind: GateKind) -> Option<FaultPauli> {
        sample_location(kind, self.model.p(), self.rng)
    }
}

/// Explicitly placed faults, for deterministic experiments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InjectedFaults {
    /// `(round, qubit, pauli)` applied before the round's measurements.
    pub data: Vec<(usize, usize, Pauli)>,
    /// `(round, stabilizer)` flips of recorded syndrome bits.
    pub syndrome: Vec<(usize, usize)>,
    /// `(round, location, fault)` at circuit fault locations.
    pub circuit: Vec<(usize, usize, FaultPauli)>,
}

impl FaultSource for InjectedFaults {
    fn data_noise(&mut self, round: usize, frame: &mut PauliFrame, _n_data: usize) {
        for &(r, q, p) in &self.data {
            if r == round {
                frame.apply_unchecked(q, p);
            }
        }
    }

    fn syndrome_flip(&mut self, round: usize, stabilizer: usize) -> bool {
        self.syndrome.iter().filter(|&&f| f == (round, stabilizer)).count() % 2 == 1
    }

    fn circuit_fault(&mut self, round: usize, location: usize, _kind: GateKind) -> Option<FaultPauli> {
        self.circuit
            .iter()
            .find(|&&(r, l, _)| r == round && l == location)
            .map(|&(_, _, f)| f)
    }
}

/// How each round's syndrome is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundStructure {
    /// Perfect (or independently flipped) readout of the frame's syndrome.
    Ideal,
    /// Run the extraction circuit gate by gate.
    Circuit,
}

impl RoundStructure {
    pub fn for_model(model: &NoiseModel, lattice: &RscLattice) -> Self {
        match model {
            NoiseModel::CircuitLevel { .. } if !lattice.stabilizers.is_empty() => RoundStructure::Circuit,
            _ => RoundStructure::Ideal,
        }
    }
}

/// Syndrome bit of `stabilizer` for the data part of `frame`.
pub fn ideal_syndrome_bit(lattice: &RscLattice, frame: &PauliFrame, stabilizer: usize) -> bool {
    let s = &lattice.stabilizers[stabilizer];
    s.support.iter().fold(false, |acc, &q| {
        acc ^ match s.basis {
            Basis::Z => frame.has_x(q),
            Basis::X => frame.has_z(q),
        }
    })
}

/// Reusable per-configuration state for running shots.
pub struct MemoryExperiment<'a> {
    pub lattice: &'a RscLattice,
    pub schedule: &'a RoundSchedule,
    pub memory: MemoryBasis,
    pub rounds: usize,
    pub structure: RoundStructure,
}

impl<'a> MemoryExperiment<'a> {
    pub fn new(
        lattice: &'a RscLattice,
        schedule: &'a RoundSchedule,
        structure: RoundStructure,
        memory: MemoryBasis,
        rounds: usize,
    ) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::NoRounds);
        }
        Ok(Self {
            lattice,
            schedule,
            memory,
            rounds,
            structure,
        })
    }

    pub fn run(&self, source: &mut impl FaultSource) -> SyndromeHistory {
        let lattice = self.lattice;
        let n_data = lattice.n_data();
        let n_stab = lattice.stabilizers.len();
        let mut frame = PauliFrame::identity(lattice.n_qubits());
        let mut rounds = Vec::with_capacity(self.rounds);

        for round in 0..self.rounds {
            let mut measured = BitVec::zeros(n_stab);
            match self.structure {
                RoundStructure::Ideal => {
                    source.data_noise(round, &mut frame, n_data);
                    for s in 0..n_stab {
                        let bit = ideal_syndrome_bit(lattice, &frame, s) ^ source.syndrome_flip(round, s);
                        measured.set(s, bit);
                    }
                }
                RoundStructure::Circuit => {
                    source.data_noise(round, &mut frame, 0);
                    self.run_circuit_round(round, &mut frame, &mut measured, source);
                }
            }
            rounds.push(measured);
        }

        let mut final_data_readout = BitVec::zeros(n_data);
        for q in 0..n_data {
            final_data_readout.set(q, self.memory.flips(&frame, q));
        }
        SyndromeHistory {
            memory: self.memory,
            rounds,
            final_data_readout,
            true_frame: frame,
        }
    }

    fn run_circuit_round(
        &self,
        round: usize,
        frame: &mut PauliFrame,
        measured: &mut BitVec,
        source: &mut impl FaultSource,
    ) {
        for (location, (_, gate)) in self.schedule.gates().enumerate() {
            let fault = source.circuit_fault(round, location, gate.kind());
            match *gate {
                Gate::AncillaPrep { qubit, .. } => {
                    frame.reset_unchecked(qubit);
                    if let Some(FaultPauli::One(p)) = fault {
                        frame.apply_unchecked(qubit, p);
                    }
                }
                Gate::Cnot { control, target } => {
                    frame.cnot_unchecked(control, target);
                    if let Some(FaultPauli::Two(a, b)) = fault {
                        frame.apply_unchecked(control, a);
                        frame.apply_unchecked(target, b);
                    }
                }
                Gate::Idle { qubit } => {
                    if let Some(FaultPauli::One(p)) = fault {
                        frame.apply_unchecked(qubit, p);
                    }
                }
                Gate::Measure {
                    qubit,
                    basis,
                    stabilizer,
                } => {
                    let flipped = match basis {
                        Basis::Z => frame.has_x(qubit),
                        Basis::X => frame.has_z(qubit),
                    };
                    let misread = matches!(fault, Some(FaultPauli::MeasurementFlip));
                    measured.set(stabilizer, flipped ^ misread);
                }
            }
        }
    }
}

/// Run one noisy memory shot; the shot's randomness is the counter-based
/// stream `(seed, shot)`.
pub fn run_memory(
    lattice: &RscLattice,
    schedule: &RoundSchedule,
    model: &NoiseModel,
    memory: MemoryBasis,
    rounds: usize,
    seed: u64,
    shot: u64,
) -> Result<SyndromeHistory> {
    model.validate()?;
    let structure = RoundStructure::for_model(model, lattice);
    let experiment = MemoryExperiment::new(lattice, schedule, structure, memory, rounds)?;
    let mut rng = shot_rng(seed, Domain::Noise, shot);
    Ok(experiment.run(&mut RandomFaults {
        model: *model,
        rng: &mut rng,
    }))
}

pub fn extract_detection_events(lattice: &RscLattice, history: &SyndromeHistory) -> DetectionEventSet {
    let rounds = history.rounds.len();
    let mut defects = Vec::new();
    let check = history.memory.check_basis();
    for s in &lattice.stabilizers {
        let mut previous = false;
        for (t, measured) in history.rounds.iter().enumerate() {
            let bit = measured.get(s.id);
            if bit != previous {
                defects.push(Defect {
                    stabilizer: s.id,
                    round: t,
                });
            }
            previous = bit;
        }
        if s.basis == check {
            let from_readout = s
                .support
                .iter()
                .fold(false, |acc, &q| acc ^ history.final_data_readout.get(q));
            if from_readout != previous {
                defects.push(Defect {
                    stabilizer: s.id,
                    round: rounds,
                });
            }
        }
    }
    defects.sort_by_key(|d| (d.round, d.stabilizer));
    DetectionEventSet {
        memory: history.memory,
        rounds,
        defects,
    }
}

/// Whether the stored logical value is wrong after applying the decoder's
/// correction parity to the classical record.
pub fn score_shot(lattice: &RscLattice, history: &SyndromeHistory, correction_parity: bool) -> bool {
    let memory = history.memory;
    let true_flip = lattice.logical_parity(memory.check_basis(), |q| memory.flips(&history.true_frame, q));
    true_flip ^ correction_parity
}
