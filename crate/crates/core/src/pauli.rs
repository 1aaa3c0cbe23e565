//! Phase-free Pauli algebra on bit-packed symplectic vectors.
//!
//! A qubit carries `X` iff its x-bit is set, `Z` iff its z-bit is set and `Y`
//! iff both are. Global phases are dropped: products are taken modulo
//! `{±1, ±i}`, which is all syndrome and logical-parity statistics need.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

/// Single-qubit Pauli, phase-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    /// The 15 nontrivial two-qubit Paulis in `(first, second)` order.
    pub fn two_qubit_nontrivial() -> impl Iterator<Item = (Pauli, Pauli)> {
        const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        ALL.into_iter()
            .flat_map(|a| ALL.into_iter().map(move |b| (a, b)))
            .filter(|&pair| pair != (Pauli::I, Pauli::I))
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// Fixed-length packed bit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn not_any(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of `popcount(self & other)`.
    pub fn dot(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + bit)
            })
        })
    }
}

/// Phase-free `n`-qubit Pauli operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n_qubits: usize,
    x_bits: BitVec,
    z_bits: BitVec,
}

/// The classical error record of a shot. Decoder corrections compose into it
/// by XOR; it is never applied to simulated hardware.
pub type PauliFrame = PauliOperator;

impl PauliOperator {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            x_bits: BitVec::zeros(n_qubits),
            z_bits: BitVec::zeros(n_qubits),
        }
    }

    /// Product of the same single-qubit Pauli on each listed qubit.
    pub fn from_support(n_qubits: usize, support: &[usize], pauli: Pauli) -> Result<Self> {
        let mut op = Self::identity(n_qubits);
        for &q in support {
            op.apply(q, pauli)?;
        }
        Ok(op)
    }

    pub fn single(n_qubits: usize, qubit: usize, pauli: Pauli) -> Result<Self> {
        Self::from_support(n_qubits, &[qubit], pauli)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_bits(&self) -> &BitVec {
        &self.x_bits
    }

    pub fn z_bits(&self) -> &BitVec {
        &self.z_bits
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x_bits.get(qubit), self.z_bits.get(qubit))
    }

    #[inline]
    pub fn has_x(&self, qubit: usize) -> bool {
        self.x_bits.get(qubit)
    }

    #[inline]
    pub fn has_z(&self, qubit: usize) -> bool {
        self.z_bits.get(qubit)
    }

    fn check_index(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Multiply a single-qubit Pauli into this operator.
    pub fn apply(&mut self, qubit: usize, pauli: Pauli) -> Result<()> {
        self.check_index(qubit)?;
        self.apply_unchecked(qubit, pauli);
        Ok(())
    }

    #[inline]
    pub(crate) fn apply_unchecked(&mut self, qubit: usize, pauli: Pauli) {
        if pauli.has_x() {
            self.x_bits.flip(qubit);
        }
        if pauli.has_z() {
            self.z_bits.flip(qubit);
        }
    }

    /// Drop whatever Pauli sits on `qubit`, as an ideal reset does.
    #[inline]
    pub(crate) fn reset_unchecked(&mut self, qubit: usize) {
        self.x_bits.set(qubit, false);
        self.z_bits.set(qubit, false);
    }

    pub fn weight(&self) -> usize {
        (0..self.n_qubits)
            .filter(|&q| self.x_bits.get(q) || self.z_bits.get(q))
            .count()
    }

    pub fn is_identity(&self) -> bool {
        self.x_bits.not_any() && self.z_bits.not_any()
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(())
    }

    /// Group product, dropping the phase.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.multiply_assign(other)?;
        Ok(out)
    }

    pub fn multiply_assign(&mut self, other: &Self) -> Result<()> {
        self.check_size(other)?;
        self.x_bits.xor_assign(&other.x_bits);
        self.z_bits.xor_assign(&other.z_bits);
        Ok(())
    }

    /// True iff the symplectic product `Σ (x_a·z_b + z_a·x_b)` is even.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_size(other)?;
        Ok(self.x_bits.dot(&other.z_bits) == self.z_bits.dot(&other.x_bits))
    }

    /// Conjugate by CNOT(control → target): X on the control spreads to the
    /// target and Z on the target spreads to the control.
    pub fn propagate_through_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_index(control)?;
        self.check_index(target)?;
        if control == target {
            return Err(Error::SameQubit(control));
        }
        self.cnot_unchecked(control, target);
        Ok(())
    }

    #[inline]
    pub(crate) fn cnot_unchecked(&mut self, control: usize, target: usize) {
        if self.x_bits.get(control) {
            self.x_bits.flip(target);
        }
        if self.z_bits.get(target) {
            self.z_bits.flip(control);
        }
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.get(q))?;
        }
        Ok(())
    }
}
