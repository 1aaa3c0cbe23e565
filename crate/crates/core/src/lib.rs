//! Rotated surface code quantum-memory simulation.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] builds the distance-`d` rotated surface code, its logical
//!   operators and the bus tiling that realises its connectivity.
//! * [`pauli`] is the phase-free Pauli algebra and the Pauli frame.
//! * [`circuit`] schedules one syndrome-extraction cycle and enumerates its
//!   fault locations.
//! * [`noise`] samples faults under code-capacity, phenomenological and
//!   circuit-level models.
//! * [`sim`] runs memory experiments and extracts detection events.
//! * [`decoder`] builds space-time matching graphs and decodes with a
//!   blossom minimum-weight perfect matching.
//! * [`experiment`] estimates logical error rates and thresholds.
//! * [`freqplan`] assigns transmon frequency classes and estimates collision
//!   yield under junction disorder.

pub mod circuit;
pub mod decoder;
pub mod error;
pub mod experiment;
pub mod freqplan;
pub mod lattice;
pub mod noise;
pub mod pauli;
pub mod sim;
pub mod stream;

pub use circuit::{FaultLocation, GateKind, RoundSchedule};
pub use decoder::{Matching, MatchingGraph};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, LogicalErrorEstimate};
pub use freqplan::{CollisionReport, FrequencyPlan};
pub use lattice::{Basis, BusLayout, RscLattice, Stabilizer};
pub use noise::NoiseModel;
pub use pauli::{Pauli, PauliFrame, PauliOperator};
pub use sim::{DetectionEventSet, MemoryBasis, SyndromeHistory};
