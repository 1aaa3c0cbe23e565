//! One syndrome-extraction cycle: ancilla preparation, four CNOT layers and
//! ancilla measurement, plus the fault locations of that cycle.
//!
//! Z-ancillas are CNOT targets and visit their face in NW, SW, NE, SE order;
//! X-ancillas are CNOT controls and visit NW, NE, SW, SE. A fault on an
//! ancilla after its second CNOT spreads onto the last two data qubits: a
//! vertical Z-pair for Z-checks and a horizontal X-pair for X-checks, both
//! perpendicular to the logical operator of the same type, so neither
//! shortens the code distance.

use serde::{Deserialize, Serialize};

use crate::lattice::{Basis, Corner, RscLattice};
use crate::pauli::Pauli;

/// Steps per cycle: prep, four CNOT layers, measure.
pub const CYCLE_STEPS: usize = 6;

const Z_ORDER: [Corner; 4] = [Corner::NW, Corner::SW, Corner::NE, Corner::SE];
const X_ORDER: [Corner; 4] = [Corner::NW, Corner::NE, Corner::SW, Corner::SE];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    AncillaPrep {
        qubit: usize,
        basis: Basis,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Measure {
        qubit: usize,
        basis: Basis,
        stabilizer: usize,
    },
    Idle {
        qubit: usize,
    },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::AncillaPrep { .. } => GateKind::Prep,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Measure { .. } => GateKind::Measure,
            Gate::Idle { .. } => GateKind::Idle,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::AncillaPrep { qubit, .. } | Gate::Measure { qubit, .. } | Gate::Idle { qubit } => {
                vec![qubit]
            }
            Gate::Cnot { control, target } => vec![control, target],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Prep,
    Cnot,
    Measure,
    Idle,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TimeStep {
    pub gates: Vec<Gate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundSchedule {
    pub n_qubits: usize,
    pub n_data: usize,
    pub time_steps: Vec<TimeStep>,
}

pub fn build_round_schedule(lattice: &RscLattice) -> RoundSchedule {
    let n_data = lattice.n_data();
    let n_qubits = lattice.n_qubits();
    if lattice.stabilizers.is_empty() {
        return RoundSchedule {
            n_qubits,
            n_data,
            time_steps: Vec::new(),
        };
    }

    let with_idles = |mut gates: Vec<Gate>| {
        let mut busy = vec![false; n_qubits];
        for g in &gates {
            for q in g.qubits() {
                busy[q] = true;
            }
        }
        gates.extend((0..n_qubits).filter(|&q| !busy[q]).map(|qubit| Gate::Idle { qubit }));
        TimeStep { gates }
    };

    let mut time_steps = Vec::with_capacity(CYCLE_STEPS);
    time_steps.push(with_idles(
        lattice
            .stabilizers
            .iter()
            .map(|s| Gate::AncillaPrep {
                qubit: s.ancilla,
                basis: s.basis,
            })
            .collect(),
    ));
    for layer in 0..4 {
        let gates = lattice
            .stabilizers
            .iter()
            .filter_map(|s| {
                let order = match s.basis {
                    Basis::Z => Z_ORDER,
                    Basis::X => X_ORDER,
                };
                let data = lattice.corner(s, order[layer])?;
                Some(match s.basis {
                    Basis::Z => Gate::Cnot {
                        control: data,
                        target: s.ancilla,
                    },
                    Basis::X => Gate::Cnot {
                        control: s.ancilla,
                        target: data,
                    },
                })
            })
            .collect();
        time_steps.push(with_idles(gates));
    }
    time_steps.push(with_idles(
        lattice
            .stabilizers
            .iter()
            .map(|s| Gate::Measure {
                qubit: s.ancilla,
                basis: s.basis,
                stabilizer: s.id,
            })
            .collect(),
    ));

    RoundSchedule {
        n_qubits,
        n_data,
        time_steps,
    }
}

impl RoundSchedule {
    pub fn gates(&self) -> impl Iterator<Item = (usize, &Gate)> {
        self.time_steps
            .iter()
            .enumerate()
            .flat_map(|(t, step)| step.gates.iter().map(move |g| (t, g)))
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates().filter(|(_, g)| g.kind() == kind).count()
    }

    /// Time step at which `ancilla` touches `data`, if it does.
    pub fn contact_step(&self, ancilla: usize, data: usize) -> Option<usize> {
        self.gates().find_map(|(t, g)| match *g {
            Gate::Cnot { control, target }
                if (control == ancilla && target == data) || (control == data && target == ancilla) =>
            {
                Some(t)
            }
            _ => None,
        })
    }
}

/// Problems found by [`check_schedule`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleViolation {
    QubitReused {
        step: usize,
        qubit: usize,
    },
    MissingContact {
        stabilizer: usize,
        data: usize,
    },
    RepeatedContact {
        stabilizer: usize,
        data: usize,
    },
    NotMeasured {
        stabilizer: usize,
    },
    /// An X- and a Z-check overlap on qubits whose CNOT order disagrees, so
    /// the interleaved circuit would not measure both stabilizers.
    OrderConflict {
        z_check: usize,
        x_check: usize,
    },
}

pub fn check_schedule(lattice: &RscLattice, schedule: &RoundSchedule) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    for (t, step) in schedule.time_steps.iter().enumerate() {
        let mut seen = vec![false; schedule.n_qubits];
        for g in &step.gates {
            for q in g.qubits() {
                if std::mem::replace(&mut seen[q], true) {
                    out.push(ScheduleViolation::QubitReused { step: t, qubit: q });
                }
            }
        }
    }

    for s in &lattice.stabilizers {
        for &q in &s.support {
            let contacts = schedule
                .gates()
                .filter(|(_, g)| {
                    matches!(**g, Gate::Cnot { control, target }
                        if (control, target) == (q, s.ancilla) || (control, target) == (s.ancilla, q))
                })
                .count();
            match contacts {
                0 => out.push(ScheduleViolation::MissingContact {
                    stabilizer: s.id,
                    data: q,
                }),
                1 => {}
                _ => out.push(ScheduleViolation::RepeatedContact {
                    stabilizer: s.id,
                    data: q,
                }),
            }
        }
        let measured = schedule
            .gates()
            .filter(|(_, g)| matches!(**g, Gate::Measure { stabilizer, .. } if stabilizer == s.id))
            .count();
        if measured != 1 {
            out.push(ScheduleViolation::NotMeasured { stabilizer: s.id });
        }
    }

    for z in lattice.stabilizers_of(Basis::Z) {
        for x in lattice.stabilizers_of(Basis::X) {
            let z_first = z
                .support
                .iter()
                .filter(|q| x.support.contains(q))
                .filter(
                    |&&q| match (schedule.contact_step(z.ancilla, q), schedule.contact_step(x.ancilla, q)) {
                        (Some(a), Some(b)) => a < b,
                        _ => false,
                    },
                )
                .count();
            if z_first % 2 == 1 {
                out.push(ScheduleViolation::OrderConflict {
                    z_check: z.id,
                    x_check: x.id,
                });
            }
        }
    }
    out
}

/// A Pauli fault that can occur at a location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultPauli {
    One(Pauli),
    /// Paulis on (control, target).
    Two(Pauli, Pauli),
    MeasurementFlip,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultLocation {
    pub time_step: usize,
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl FaultLocation {
    /// Every nontrivial fault this location can suffer.
    pub fn fault_domain(&self) -> Vec<FaultPauli> {
        match self.kind {
            GateKind::Prep | GateKind::Idle => Pauli::NONTRIVIAL.into_iter().map(FaultPauli::One).collect(),
            GateKind::Cnot => Pauli::two_qubit_nontrivial()
                .map(|(a, b)| FaultPauli::Two(a, b))
                .collect(),
            GateKind::Measure => vec![FaultPauli::MeasurementFlip],
        }
    }
}

/// All fault locations of one cycle, in schedule order.
pub fn fault_locations(schedule: &RoundSchedule) -> Vec<FaultLocation> {
    schedule
        .gates()
        .map(|(time_step, g)| FaultLocation {
            time_step,
            kind: g.kind(),
            qubits: g.qubits(),
        })
        .collect()
}
