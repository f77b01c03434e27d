//! Pauli words in symplectic bitmask form.
//!
//! A word on `n` qubits is stored as a pair of masks. Bit `j` of `x` is set
//! when qubit `j` carries X or Y, bit `j` of `z` when it carries Z or Y. The
//! word represented is `i^{|x & z|} X^x Z^z`, so a Y on a qubit is exactly the
//! Hermitian single-qubit Y.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{check_dims, IqccError, Result};

pub const MAX_QUBITS: usize = 64;

/// Power of `i`: the value is `i^k` with `k` in `0..4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Real value of a real phase; `None` for `±i`.
    pub fn real_sign(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+1", "+i", "-1", "-i"][self.0 as usize])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub fn to_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum YParity {
    Even,
    Odd,
}

/// An `n`-qubit Pauli string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliWord {
    n_qubits: u8,
    x: u64,
    z: u64,
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliWord {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(
            (1..=MAX_QUBITS).contains(&n_qubits),
            "qubit count {n_qubits} outside 1..=64"
        );
        PauliWord {
            n_qubits: n_qubits as u8,
            x: 0,
            z: 0,
        }
    }

    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(IqccError::InvalidArgument(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let outside = !full_mask(n_qubits);
        if (x | z) & outside != 0 {
            return Err(IqccError::InvalidArgument(format!(
                "mask bits set beyond qubit {n_qubits}"
            )));
        }
        Ok(PauliWord {
            n_qubits: n_qubits as u8,
            x,
            z,
        })
    }

    /// Word with the given letters placed on the given qubits.
    pub fn from_sparse(n_qubits: usize, letters: &[(usize, PauliLetter)]) -> Result<Self> {
        let mut w = PauliWord::identity(n_qubits);
        for &(q, l) in letters {
            if q >= n_qubits {
                return Err(IqccError::InvalidArgument(format!(
                    "qubit {q} out of range for {n_qubits} qubits"
                )));
            }
            w = w.with_letter(q, l);
        }
        Ok(w)
    }

    pub fn single(n_qubits: usize, qubit: usize, letter: PauliLetter) -> Self {
        PauliWord::identity(n_qubits).with_letter(qubit, letter)
    }

    pub fn with_letter(mut self, qubit: usize, letter: PauliLetter) -> Self {
        let bit = 1u64 << qubit;
        self.x &= !bit;
        self.z &= !bit;
        match letter {
            PauliLetter::I => {}
            PauliLetter::X => self.x |= bit,
            PauliLetter::Z => self.z |= bit,
            PauliLetter::Y => {
                self.x |= bit;
                self.z |= bit;
            }
        }
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn y_mask(&self) -> u64 {
        self.x & self.z
    }

    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support_mask().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn letter(&self, qubit: usize) -> PauliLetter {
        let bit = 1u64 << qubit;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        }
    }

    pub fn y_parity(&self) -> YParity {
        if self.y_mask().count_ones() % 2 == 0 {
            YParity::Even
        } else {
            YParity::Odd
        }
    }

    /// Flip set as a mask: qubits carrying X or Y.
    pub fn flip_mask(&self) -> u64 {
        self.x
    }

    pub fn flip_indices(&self) -> Vec<usize> {
        mask_indices(self.x)
    }

    /// Product `self * other` as a word and the phase it picks up.
    pub fn multiply(&self, other: &PauliWord) -> Result<(PauliWord, Phase)> {
        check_dims(self.n_qubits(), other.n_qubits())?;
        Ok(self.mul_unchecked(other))
    }

    #[inline]
    pub(crate) fn mul_unchecked(&self, other: &PauliWord) -> (PauliWord, Phase) {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // i^{ya} X^xa Z^za i^{yb} X^xb Z^zb = i^{ya+yb} (-1)^{|za & xb|} X^x Z^z
        let ya = (self.x & self.z).count_ones();
        let yb = (other.x & other.z).count_ones();
        let yc = (x & z).count_ones();
        let swaps = (self.z & other.x).count_ones();
        let k = (ya + yb + 2 * swaps + 4 * 64 - yc) % 4;
        (
            PauliWord {
                n_qubits: self.n_qubits,
                x,
                z,
            },
            Phase(k as u8),
        )
    }

    pub fn commutes(&self, other: &PauliWord) -> Result<bool> {
        check_dims(self.n_qubits(), other.n_qubits())?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &PauliWord) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Drop the qubits in `removed` and pack the rest densely, keeping order.
    pub(crate) fn compact(&self, removed: u64) -> PauliWord {
        let keep = full_mask(self.n_qubits()) & !removed;
        let n_new = keep.count_ones() as usize;
        PauliWord {
            n_qubits: n_new as u8,
            x: pext(self.x, keep),
            z: pext(self.z, keep),
        }
    }
}

fn pext(value: u64, mask: u64) -> u64 {
    let mut out = 0u64;
    let mut k = 0;
    let mut m = mask;
    while m != 0 {
        let bit = m.trailing_zeros();
        if value & (1u64 << bit) != 0 {
            out |= 1u64 << k;
        }
        k += 1;
        m &= m - 1;
    }
    out
}

pub(crate) fn mask_indices(mut mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        out.push(mask.trailing_zeros() as usize);
        mask &= mask - 1;
    }
    out
}

impl Ord for PauliWord {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.x, self.z, self.n_qubits).cmp(&(other.x, other.z, other.n_qubits))
    }
}

impl PartialOrd for PauliWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Letters with qubit 0 leftmost, e.g. `XZYI`.
impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits() {
            write!(f, "{}", self.letter(q).to_char())?;
        }
        Ok(())
    }
}

impl serde::Serialize for PauliWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for PauliWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = <std::borrow::Cow<'de, str>>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for PauliWord {
    type Err = IqccError;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        if n == 0 || n > MAX_QUBITS {
            return Err(IqccError::InvalidArgument(format!(
                "Pauli string length {n} outside 1..={MAX_QUBITS}"
            )));
        }
        let mut w = PauliWord::identity(n);
        for (q, c) in s.chars().enumerate() {
            let l = match c.to_ascii_uppercase() {
                'I' => PauliLetter::I,
                'X' => PauliLetter::X,
                'Y' => PauliLetter::Y,
                'Z' => PauliLetter::Z,
                other => {
                    return Err(IqccError::InvalidArgument(format!(
                        "invalid Pauli letter {other:?}"
                    )))
                }
            };
            w = w.with_letter(q, l);
        }
        Ok(w)
    }
}
