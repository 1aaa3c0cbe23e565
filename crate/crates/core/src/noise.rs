//! Pauli fault sampling.
//!
//! * Code capacity: each data qubit suffers X, Y or Z with probability `p/3`
//!   each, once; syndrome measurement is perfect.
//! * Phenomenological: the same data noise every round, plus each syndrome
//!   bit flipped with probability `q`.
//! * Circuit level: every fault location of the extraction cycle fails with
//!   probability `p`: one of X, Y, Z after preparations and idles, one of the
//!   15 two-qubit Paulis after CNOTs, and a flipped outcome at measurements.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{fault_locations, FaultPauli, RoundSchedule};
use crate::error::{Error, Result};
use crate::lattice::RscLattice;
use crate::pauli::{BitVec, Pauli, PauliFrame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum NoiseModel {
    CodeCapacity {
        p: f64,
    },
    #[serde(rename = "phenom")]
    Phenomenological {
        p: f64,
        q: f64,
    },
    #[serde(rename = "circuit")]
    CircuitLevel {
        p: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    CodeCapacity,
    #[serde(rename = "phenom")]
    Phenomenological,
    #[serde(rename = "circuit")]
    CircuitLevel,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::CodeCapacity => "code-capacity",
            ModelKind::Phenomenological => "phenom",
            ModelKind::CircuitLevel => "circuit",
        }
    }

    /// Build the model at rate `p`; phenomenological `q` defaults to `p`.
    pub fn with_rates(self, p: f64, q: Option<f64>) -> NoiseModel {
        match self {
            ModelKind::CodeCapacity => NoiseModel::CodeCapacity { p },
            ModelKind::Phenomenological => NoiseModel::Phenomenological { p, q: q.unwrap_or(p) },
            ModelKind::CircuitLevel => NoiseModel::CircuitLevel { p },
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "code-capacity" => Ok(ModelKind::CodeCapacity),
            "phenom" => Ok(ModelKind::Phenomenological),
            "circuit" => Ok(ModelKind::CircuitLevel),
            other => Err(format!("unknown noise model `{other}`")),
        }
    }
}

impl NoiseModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            NoiseModel::CodeCapacity { .. } => ModelKind::CodeCapacity,
            NoiseModel::Phenomenological { .. } => ModelKind::Phenomenological,
            NoiseModel::CircuitLevel { .. } => ModelKind::CircuitLevel,
        }
    }

    pub fn p(&self) -> f64 {
        match *self {
            NoiseModel::CodeCapacity { p }
            | NoiseModel::Phenomenological { p, .. }
            | NoiseModel::CircuitLevel { p } => p,
        }
    }

    /// Measurement-flip rate; equals `p` outside the phenomenological model.
    pub fn q(&self) -> f64 {
        match *self {
            NoiseModel::Phenomenological { q, .. } => q,
            _ => self.p(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("p", self.p())?;
        if let NoiseModel::Phenomenological { q, .. } = *self {
            check_probability("q", q)?;
        }
        Ok(())
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) || value.is_nan() {
        return Err(Error::ProbabilityOutOfRange { name, value });
    }
    Ok(())
}

/// Named error rates quoted for present-day transmon hardware.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub p: f64,
    pub description: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "drag-1q",
        p: 5e-4,
        description: "single-qubit gate error with DRAG pulse shaping",
    },
    Preset {
        name: "dp-gate",
        p: 6e-3,
        description: "two-qubit gate error of the DP gate",
    },
    Preset {
        name: "cr-gate",
        p: 1.4e-2,
        description: "two-qubit gate error of the cross-resonance gate",
    },
    Preset {
        name: "rip-gate",
        p: 2.3e-2,
        description: "two-qubit gate error of the resonator-induced phase gate",
    },
    Preset {
        name: "target",
        p: 1e-4,
        description: "gate error goal for low-overhead fault tolerance",
    },
];

pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    pub fn model(&self) -> NoiseModel {
        NoiseModel::CircuitLevel { p: self.p }
    }
}

/// With probability `p`, multiply a uniformly chosen X, Y or Z into `qubit`.
#[inline]
pub(crate) fn depolarize(frame: &mut PauliFrame, qubit: usize, p: f64, rng: &mut impl Rng) {
    if p > 0.0 && rng.random::<f64>() < p {
        let pauli = Pauli::NONTRIVIAL[rng.random_range(0..3)];
        frame.apply_unchecked(qubit, pauli);
    }
}

pub fn sample_code_capacity(lattice: &RscLattice, p: f64, rng: &mut impl Rng) -> Result<PauliFrame> {
    check_probability("p", p)?;
    let mut frame = PauliFrame::identity(lattice.n_data());
    for q in 0..lattice.n_data() {
        depolarize(&mut frame, q, p, rng);
    }
    Ok(frame)
}

/// One sampled circuit fault; `location` indexes [`fault_locations`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledFault {
    pub location: usize,
    pub fault: FaultPauli,
}

pub fn sample_circuit_level(schedule: &RoundSchedule, p: f64, rng: &mut impl Rng) -> Result<Vec<SampledFault>> {
    check_probability("p", p)?;
    let locations = fault_locations(schedule);
    let mut out = Vec::new();
    for (i, loc) in locations.iter().enumerate() {
        if let Some(fault) = sample_location(loc.kind, p, rng) {
            out.push(SampledFault { location: i, fault });
        }
    }
    Ok(out)
}

#[inline]
pub(crate) fn sample_location(kind: crate::circuit::GateKind, p: f64, rng: &mut impl Rng) -> Option<FaultPauli> {
    use crate::circuit::GateKind;
    if p == 0.0 || rng.random::<f64>() >= p {
        return None;
    }
    Some(match kind {
        GateKind::Prep | GateKind::Idle => FaultPauli::One(Pauli::NONTRIVIAL[rng.random_range(0..3)]),
        GateKind::Cnot => {
            let k = rng.random_range(1..16usize);
            const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
            FaultPauli::Two(ALL[k / 4], ALL[k % 4])
        }
        GateKind::Measure => FaultPauli::MeasurementFlip,
    })
}

/// Data noise for one round plus the syndrome-bit flip mask (one bit per
/// stabilizer, in stabilizer id order).
pub fn sample_phenomenological_round(
    lattice: &RscLattice,
    p: f64,
    q: f64,
    rng: &mut impl Rng,
) -> Result<(PauliFrame, BitVec)> {
    check_probability("p", p)?;
    check_probability("q", q)?;
    let frame = sample_code_capacity(lattice, p, rng)?;
    let mut flips = BitVec::zeros(lattice.stabilizers.len());
    for s in 0..lattice.stabilizers.len() {
        if q > 0.0 && rng.random::<f64>() < q {
            flips.set(s, true);
        }
    }
    Ok((frame, flips))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_round_schedule, GateKind};
    use crate::lattice::build_lattice;
    use crate::stream::{shot_rng, Domain};

    fn within_3_sigma(count: f64, trials: f64, p: f64) -> bool {
        let mean = trials * p;
        let sd = (trials * p * (1.0 - p)).sqrt();
        (count - mean).abs() <= 3.0 * sd
    }

    #[test]
    fn code_capacity_extremes() {
        let l = build_lattice(3).unwrap();
        let mut rng = shot_rng(1, Domain::Noise, 0);
        for _ in 0..20 {
            assert!(sample_code_capacity(&l, 0.0, &mut rng).unwrap().is_identity());
            assert_eq!(sample_code_capacity(&l, 1.0, &mut rng).unwrap().weight(), 9);
        }
        assert!(matches!(
            sample_code_capacity(&l, 1.5, &mut rng),
            Err(Error::ProbabilityOutOfRange { name: "p", .. })
        ));
    }

    #[test]
    fn code_capacity_mean_fault_count() {
        let l = build_lattice(3).unwrap();
        let mut rng = shot_rng(2, Domain::Noise, 0);
        let samples = 100_000;
        let total: usize = (0..samples)
            .map(|_| sample_code_capacity(&l, 0.1, &mut rng).unwrap().weight())
            .sum();
        // Sum of 9 * samples Bernoulli(0.1) trials.
        assert!(within_3_sigma(total as f64, 9.0 * samples as f64, 0.1));
    }

    #[test]
    fn y_faults_set_both_bits() {
        let l = build_lattice(3).unwrap();
        let mut rng = shot_rng(3, Domain::Noise, 0);
        let mut saw_y = false;
        for _ in 0..200 {
            let f = sample_code_capacity(&l, 1.0, &mut rng).unwrap();
            for q in 0..9 {
                if f.get(q) == Pauli::Y {
                    assert!(f.has_x(q) && f.has_z(q));
                    saw_y = true;
                }
            }
        }
        assert!(saw_y);
    }

    #[test]
    fn circuit_level_extremes() {
        let l = build_lattice(3).unwrap();
        let s = build_round_schedule(&l);
        let n = fault_locations(&s).len();
        let mut rng = shot_rng(4, Domain::Noise, 0);
        assert!(sample_circuit_level(&s, 0.0, &mut rng).unwrap().is_empty());
        let all = sample_circuit_level(&s, 1.0, &mut rng).unwrap();
        assert_eq!(all.len(), n);
        assert!(sample_circuit_level(&s, -0.1, &mut rng).is_err());
    }

    #[test]
    fn circuit_level_rates_per_location_class() {
        let l = build_lattice(3).unwrap();
        let s = build_round_schedule(&l);
        let locations = fault_locations(&s);
        let p = 1e-2;
        let cycles = 100_000;
        let mut hits = std::collections::BTreeMap::<GateKind, usize>::new();
        let mut rng = shot_rng(5, Domain::Noise, 0);
        for _ in 0..cycles {
            for f in sample_circuit_level(&s, p, &mut rng).unwrap() {
                *hits.entry(locations[f.location].kind).or_default() += 1;
            }
        }
        for kind in [GateKind::Prep, GateKind::Cnot, GateKind::Measure, GateKind::Idle] {
            let per_cycle = locations.iter().filter(|l| l.kind == kind).count();
            let trials = (per_cycle * cycles) as f64;
            let count = hits.get(&kind).copied().unwrap_or(0) as f64;
            assert!(within_3_sigma(count, trials, p), "{kind:?}: {count} of {trials}");
        }
    }

    #[test]
    fn phenomenological_extremes() {
        let l = build_lattice(3).unwrap();
        let mut rng = shot_rng(6, Domain::Noise, 0);
        let (f, flips) = sample_phenomenological_round(&l, 0.0, 0.0, &mut rng).unwrap();
        assert!(f.is_identity() && flips.not_any());
        let (f, flips) = sample_phenomenological_round(&l, 0.0, 1.0, &mut rng).unwrap();
        assert!(f.is_identity());
        assert_eq!(flips.count_ones(), 8);
        assert!(sample_phenomenological_round(&l, 0.0, 2.0, &mut rng).is_err());
    }

    #[test]
    fn sampling_is_deterministic_per_shot() {
        let l = build_lattice(5).unwrap();
        let s = build_round_schedule(&l);
        let a = sample_circuit_level(&s, 0.05, &mut shot_rng(9, Domain::Noise, 17)).unwrap();
        let b = sample_circuit_level(&s, 0.05, &mut shot_rng(9, Domain::Noise, 17)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn presets_match_quoted_rates() {
        assert_eq!(preset("cr-gate").unwrap().p, 1.4e-2);
        assert_eq!(preset("rip-gate").unwrap().p, 2.3e-2);
        assert_eq!(preset("dp-gate").unwrap().p, 6e-3);
        assert_eq!(preset("drag-1q").unwrap().p, 5e-4);
        assert!(preset("nope").is_none());
    }

    #[test]
    fn phenomenological_q_defaults_to_p() {
        let m = ModelKind::Phenomenological.with_rates(0.02, None);
        assert_eq!(m.q(), 0.02);
    }
}
