//! Rotated surface code geometry.
//!
//! Data qubits sit on the integer grid `(row, col)`, `0 <= row, col < d`, and
//! are indexed `row * d + col`. Faces are addressed by their lower-right grid
//! corner `(fr, fc)` with `0 <= fr, fc <= d`; face `(fr, fc)` touches the data
//! qubits `(fr-1, fc-1)`, `(fr-1, fc)`, `(fr, fc-1)` and `(fr, fc)` that exist.
//! A face is Z-type iff `fr + fc` is even, so the top-left bulk face `(1, 1)`
//! is a Z-face. Weight-2 Z-faces line the left and right sides, weight-2
//! X-faces the top and bottom.
//!
//! Logical Z̄ is a row of Z operators running left to right between the two
//! Z-boundaries (left and right sides); logical X̄ is a column of X operators
//! between the two X-boundaries (top and bottom sides).

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn pauli(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Z => Pauli::Z,
        }
    }

    pub fn other(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::X => write!(f, "X"),
            Basis::Z => write!(f, "Z"),
        }
    }
}

/// Corner of a face, in grid orientation (north = smaller row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Corner {
    NW,
    NE,
    SW,
    SE,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::NW, Corner::NE, Corner::SW, Corner::SE];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilizer {
    pub id: usize,
    pub basis: Basis,
    /// Face address `(fr, fc)`.
    pub face: (usize, usize),
    /// Data-qubit indices in NW, NE, SW, SE order (absent corners skipped).
    pub support: Vec<usize>,
    /// Index of the measuring ancilla among all qubits (data qubits first).
    pub ancilla: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Top,
    Bottom,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundary {
    pub side: Side,
    /// Basis of the logical operator that terminates on this boundary.
    pub basis: Basis,
    pub qubits: Vec<usize>,
    /// Grid edges along the boundary, as pairs of data-qubit indices.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RscLattice {
    pub distance: usize,
    pub data_qubits: Vec<(usize, usize)>,
    pub stabilizers: Vec<Stabilizer>,
    pub boundaries: Vec<Boundary>,
    pub logical_x: Vec<usize>,
    pub logical_z: Vec<usize>,
}

fn check_distance(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::ZeroDistance);
    }
    if d.is_multiple_of(2) {
        return Err(Error::EvenDistance(d));
    }
    Ok(())
}

/// Basis of face `(fr, fc)` if it exists in a distance-`d` code.
fn face_basis(d: usize, fr: usize, fc: usize) -> Option<Basis> {
    let basis = if (fr + fc).is_multiple_of(2) {
        Basis::Z
    } else {
        Basis::X
    };
    let bulk_row = (1..d).contains(&fr);
    let bulk_col = (1..d).contains(&fc);
    match (bulk_row, bulk_col) {
        (true, true) => Some(basis),
        // Left/right sides carry weight-2 Z-faces only.
        (true, false) if basis == Basis::Z => Some(basis),
        // Top/bottom sides carry weight-2 X-faces only.
        (false, true) if basis == Basis::X => Some(basis),
        _ => None,
    }
}

pub fn build_lattice(d: usize) -> Result<RscLattice> {
    check_distance(d)?;
    let n_data = d * d;
    let data_qubits = (0..d).flat_map(|r| (0..d).map(move |c| (r, c))).collect::<Vec<_>>();

    let mut stabilizers = Vec::new();
    for fr in 0..=d {
        for fc in 0..=d {
            if let Some(basis) = face_basis(d, fr, fc) {
                let id = stabilizers.len();
                let support = Corner::ALL
                    .iter()
                    .filter_map(|&corner| face_corner(d, (fr, fc), corner))
                    .collect();
                stabilizers.push(Stabilizer {
                    id,
                    basis,
                    face: (fr, fc),
                    support,
                    ancilla: n_data + id,
                });
            }
        }
    }

    let row = |r: usize| (0..d).map(|c| r * d + c).collect::<Vec<_>>();
    let col = |c: usize| (0..d).map(|r| r * d + c).collect::<Vec<_>>();
    let chain_edges = |q: &[usize]| q.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>();
    let boundaries = [
        (Side::Top, Basis::X, row(0)),
        (Side::Bottom, Basis::X, row(d - 1)),
        (Side::Left, Basis::Z, col(0)),
        (Side::Right, Basis::Z, col(d - 1)),
    ]
    .into_iter()
    .map(|(side, basis, qubits)| Boundary {
        side,
        basis,
        edges: chain_edges(&qubits),
        qubits,
    })
    .collect();

    Ok(RscLattice {
        distance: d,
        data_qubits,
        stabilizers,
        boundaries,
        logical_x: col(0),
        logical_z: row(0),
    })
}

fn face_corner(d: usize, (fr, fc): (usize, usize), corner: Corner) -> Option<usize> {
    let (r, c) = match corner {
        Corner::NW => (fr.checked_sub(1)?, fc.checked_sub(1)?),
        Corner::NE => (fr.checked_sub(1)?, fc),
        Corner::SW => (fr, fc.checked_sub(1)?),
        Corner::SE => (fr, fc),
    };
    (r < d && c < d).then_some(r * d + c)
}

impl RscLattice {
    pub fn n_data(&self) -> usize {
        self.data_qubits.len()
    }

    /// Data qubits followed by one ancilla per stabilizer.
    pub fn n_qubits(&self) -> usize {
        self.n_data() + self.stabilizers.len()
    }

    pub fn stabilizers_of(&self, basis: Basis) -> impl Iterator<Item = &Stabilizer> {
        self.stabilizers.iter().filter(move |s| s.basis == basis)
    }

    pub fn corner(&self, stabilizer: &Stabilizer, corner: Corner) -> Option<usize> {
        face_corner(self.distance, stabilizer.face, corner)
    }

    pub fn stabilizer_operator(&self, stabilizer: &Stabilizer) -> PauliOperator {
        let mut op = PauliOperator::identity(self.n_data());
        for &q in &stabilizer.support {
            op.apply_unchecked(q, stabilizer.basis.pauli());
        }
        op
    }

    pub fn logical_chain(&self, basis: Basis) -> &[usize] {
        match basis {
            Basis::X => &self.logical_x,
            Basis::Z => &self.logical_z,
        }
    }

    pub fn boundary(&self, side: Side) -> Option<&Boundary> {
        self.boundaries.iter().find(|b| b.side == side)
    }

    /// Parity of the bits of `bits` on the chosen logical's support.
    pub fn logical_parity(&self, basis: Basis, bits: impl Fn(usize) -> bool) -> bool {
        self.logical_chain(basis).iter().fold(false, |acc, &q| acc ^ bits(q))
    }
}

/// The logical operator of the given basis as a Pauli chain on data qubits.
pub fn logical_operator(lattice: &RscLattice, basis: Basis) -> PauliOperator {
    let mut op = PauliOperator::identity(lattice.n_data());
    for &q in lattice.logical_chain(basis) {
        op.apply_unchecked(q, basis.pauli());
    }
    op
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    InvalidDistance(usize),
    DataQubitCount { expected: usize, got: usize },
    DataQubitCoordinates,
    StabilizerCount { basis: Basis, expected: usize, got: usize },
    SupportSize { stabilizer: usize, size: usize },
    SupportNotOnFace { stabilizer: usize },
    DuplicateAncilla { ancilla: usize },
    NonCommuting { a: usize, b: usize },
    SameBasisEdge { a: usize, b: usize },
    DependentStabilizers { rank: usize },
    LogicalWeight { basis: Basis, expected: usize, got: usize },
    LogicalNotConnecting { basis: Basis },
    LogicalAnticommutes { basis: Basis, stabilizer: usize },
    LogicalsCommute,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InvalidDistance(d) => write!(f, "distance {d} is not a positive odd integer"),
            Violation::DataQubitCount { expected, got } => {
                write!(f, "expected {expected} data qubits, found {got}")
            }
            Violation::DataQubitCoordinates => write!(f, "data qubit coordinates are not the d x d grid"),
            Violation::StabilizerCount { basis, expected, got } => {
                write!(f, "expected {expected} {basis}-stabilizers, found {got}")
            }
            Violation::SupportSize { stabilizer, size } => {
                write!(f, "stabilizer {stabilizer} has support size {size}")
            }
            Violation::SupportNotOnFace { stabilizer } => {
                write!(f, "stabilizer {stabilizer} support does not lie on one face")
            }
            Violation::DuplicateAncilla { ancilla } => write!(f, "ancilla {ancilla} used twice"),
            Violation::NonCommuting { a, b } => {
                write!(f, "stabilizers {a} and {b} anticommute")
            }
            Violation::SameBasisEdge { a, b } => {
                write!(f, "same-basis stabilizers {a} and {b} share a grid edge")
            }
            Violation::DependentStabilizers { rank } => {
                write!(f, "stabilizer generators have rank {rank}, not d^2-1")
            }
            Violation::LogicalWeight { basis, expected, got } => {
                write!(f, "logical {basis} has weight {got}, expected {expected}")
            }
            Violation::LogicalNotConnecting { basis } => {
                write!(f, "logical {basis} does not connect its two boundaries")
            }
            Violation::LogicalAnticommutes { basis, stabilizer } => {
                write!(f, "logical {basis} anticommutes with stabilizer {stabilizer}")
            }
            Violation::LogicalsCommute => write!(f, "logical X and logical Z commute"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every lattice invariant; an empty report means the lattice is valid.
pub fn validate_lattice(lattice: &RscLattice) -> ValidationReport {
    let mut violations = Vec::new();
    let d = lattice.distance;
    if check_distance(d).is_err() {
        violations.push(Violation::InvalidDistance(d));
        return ValidationReport { violations };
    }
    let n = d * d;

    if lattice.data_qubits.len() != n {
        violations.push(Violation::DataQubitCount {
            expected: n,
            got: lattice.data_qubits.len(),
        });
        return ValidationReport { violations };
    }
    let coords: BTreeSet<_> = lattice.data_qubits.iter().copied().collect();
    if coords.len() != n || coords.iter().any(|&(r, c)| r >= d || c >= d) {
        violations.push(Violation::DataQubitCoordinates);
    }

    for basis in [Basis::Z, Basis::X] {
        let got = lattice.stabilizers_of(basis).count();
        if got != (n - 1) / 2 {
            violations.push(Violation::StabilizerCount {
                basis,
                expected: (n - 1) / 2,
                got,
            });
        }
    }

    let mut ancillas = BTreeSet::new();
    for s in &lattice.stabilizers {
        let size = s.support.len();
        if size != 2 && size != 4 {
            violations.push(Violation::SupportSize { stabilizer: s.id, size });
        } else if s.support.iter().any(|&q| q >= n) || !support_on_one_face(lattice, &s.support) {
            violations.push(Violation::SupportNotOnFace { stabilizer: s.id });
        }
        if !ancillas.insert(s.ancilla) {
            violations.push(Violation::DuplicateAncilla { ancilla: s.ancilla });
        }
    }
    if violations
        .iter()
        .any(|v| matches!(v, Violation::SupportNotOnFace { .. } | Violation::SupportSize { .. }))
    {
        // Operators below would index outside the data register.
        if lattice.stabilizers.iter().any(|s| s.support.iter().any(|&q| q >= n)) {
            return ValidationReport { violations };
        }
    }

    let ops: Vec<_> = lattice
        .stabilizers
        .iter()
        .map(|s| lattice.stabilizer_operator(s))
        .collect();
    for (i, a) in lattice.stabilizers.iter().enumerate() {
        for (j, b) in lattice.stabilizers.iter().enumerate().skip(i + 1) {
            if !ops[i].commutes(&ops[j]).expect("same size") {
                violations.push(Violation::NonCommuting { a: a.id, b: b.id });
            }
            if a.basis == b.basis && shares_edge(lattice, &a.support, &b.support) {
                violations.push(Violation::SameBasisEdge { a: a.id, b: b.id });
            }
        }
    }
    let rank = gf2_rank(&ops);
    if rank != n - 1 {
        violations.push(Violation::DependentStabilizers { rank });
    }

    let (sides_x, sides_z) = ((Side::Top, Side::Bottom), (Side::Left, Side::Right));
    for (basis, (s1, s2)) in [(Basis::X, sides_x), (Basis::Z, sides_z)] {
        let chain = lattice.logical_chain(basis);
        if chain.len() != d {
            violations.push(Violation::LogicalWeight {
                basis,
                expected: d,
                got: chain.len(),
            });
        }
        if chain.iter().any(|&q| q >= n) {
            violations.push(Violation::LogicalNotConnecting { basis });
            continue;
        }
        if !chain_connects(lattice, chain, s1, s2) {
            violations.push(Violation::LogicalNotConnecting { basis });
        }
        let op = logical_operator(lattice, basis);
        for (s, sop) in lattice.stabilizers.iter().zip(&ops) {
            if !op.commutes(sop).expect("same size") {
                violations.push(Violation::LogicalAnticommutes {
                    basis,
                    stabilizer: s.id,
                });
            }
        }
    }
    let lx = logical_operator(lattice, Basis::X);
    let lz = logical_operator(lattice, Basis::Z);
    if lx.commutes(&lz).expect("same size") {
        violations.push(Violation::LogicalsCommute);
    }

    ValidationReport { violations }
}

fn coord(lattice: &RscLattice, q: usize) -> (usize, usize) {
    lattice.data_qubits[q]
}

fn adjacent(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1) == 1
}

fn support_on_one_face(lattice: &RscLattice, support: &[usize]) -> bool {
    let pts: Vec<_> = support.iter().map(|&q| coord(lattice, q)).collect();
    let distinct: BTreeSet<_> = pts.iter().collect();
    if distinct.len() != pts.len() {
        return false;
    }
    match pts.len() {
        2 => adjacent(pts[0], pts[1]),
        4 => {
            let rows: BTreeSet<_> = pts.iter().map(|p| p.0).collect();
            let cols: BTreeSet<_> = pts.iter().map(|p| p.1).collect();
            rows.len() == 2
                && cols.len() == 2
                && rows.iter().max().unwrap() - rows.iter().min().unwrap() == 1
                && cols.iter().max().unwrap() - cols.iter().min().unwrap() == 1
        }
        _ => false,
    }
}

fn shares_edge(lattice: &RscLattice, a: &[usize], b: &[usize]) -> bool {
    let common: Vec<_> = a.iter().filter(|q| b.contains(q)).collect();
    common.iter().enumerate().any(|(i, &&p)| {
        common[i + 1..]
            .iter()
            .any(|&&q| adjacent(coord(lattice, p), coord(lattice, q)))
    })
}

fn chain_connects(lattice: &RscLattice, chain: &[usize], s1: Side, s2: Side) -> bool {
    let (Some(b1), Some(b2)) = (lattice.boundary(s1), lattice.boundary(s2)) else {
        return false;
    };
    if chain.is_empty() {
        return false;
    }
    // Flood fill along grid adjacency inside the chain from its b1 qubits.
    let mut reached: BTreeSet<usize> = chain.iter().copied().filter(|q| b1.qubits.contains(q)).collect();
    let mut frontier: Vec<usize> = reached.iter().copied().collect();
    while let Some(q) = frontier.pop() {
        for &p in chain {
            if !reached.contains(&p) && adjacent(coord(lattice, q), coord(lattice, p)) {
                reached.insert(p);
                frontier.push(p);
            }
        }
    }
    reached.iter().any(|q| b2.qubits.contains(q))
}

/// GF(2) rank of the symplectic vectors of `ops`.
pub(crate) fn gf2_rank(ops: &[PauliOperator]) -> usize {
    let Some(first) = ops.first() else { return 0 };
    let n = first.n_qubits();
    let mut rows: Vec<Vec<bool>> = ops
        .iter()
        .map(|op| (0..n).map(|q| op.has_x(q)).chain((0..n).map(|q| op.has_z(q))).collect())
        .collect();
    let mut rank = 0;
    for col in 0..2 * n {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col]) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] {
                row.iter_mut().zip(&pivot_row).for_each(|(a, &b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    /// Face (of a Z-stabilizer) the bus resonator sits on.
    pub face: (usize, usize),
    pub data_qubits: Vec<usize>,
    pub ancillas: Vec<usize>,
}

/// Bus tiling: one bus per Z-face, coupling that face's data qubits and
/// ancilla. Each X-ancilla joins the Z-buses that together reach its whole
/// support.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusLayout {
    pub buses: Vec<Bus>,
    /// Data qubit -> ids of buses it couples to.
    pub qubit_bus_map: Vec<Vec<usize>>,
}

impl BusLayout {
    /// True iff some bus hosts both `ancilla` and data qubit `data`.
    pub fn colocated(&self, ancilla: usize, data: usize) -> bool {
        self.qubit_bus_map[data]
            .iter()
            .any(|&b| self.buses[b].ancillas.contains(&ancilla))
    }

    pub fn is_interior_bus(&self, lattice: &RscLattice, bus: &Bus) -> bool {
        let d = lattice.distance;
        (1..d).contains(&bus.face.0) && (1..d).contains(&bus.face.1)
    }
}

pub fn build_bus_layout(lattice: &RscLattice) -> BusLayout {
    let mut buses: Vec<Bus> = lattice
        .stabilizers_of(Basis::Z)
        .enumerate()
        .map(|(id, s)| Bus {
            id,
            face: s.face,
            data_qubits: s.support.clone(),
            ancillas: vec![s.ancilla],
        })
        .collect();

    for s in lattice.stabilizers_of(Basis::X) {
        let mut uncovered: Vec<usize> = s.support.clone();
        while !uncovered.is_empty() {
            let best = buses
                .iter()
                .map(|b| {
                    let hits = uncovered.iter().filter(|q| b.data_qubits.contains(q)).count();
                    (hits, std::cmp::Reverse(b.id))
                })
                .max()
                .filter(|&(hits, _)| hits > 0)
                .map(|(_, std::cmp::Reverse(id))| id)
                .expect("every data qubit touches a Z-face");
            let bus = &mut buses[best];
            bus.ancillas.push(s.ancilla);
            uncovered.retain(|q| !bus.data_qubits.contains(q));
        }
    }

    let mut qubit_bus_map = vec![Vec::new(); lattice.n_data()];
    for b in &buses {
        for &q in &b.data_qubits {
            qubit_bus_map[q].push(b.id);
        }
    }
    BusLayout { buses, qubit_bus_map }
}
