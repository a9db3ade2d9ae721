//! Bit-packed Pauli strings.
//!
//! A site carries the letter decoded from its `(x, z)` bit pair:
//! `(0,0) = I`, `(1,0) = X`, `(1,1) = Y`, `(0,1) = Z`. Text form lists qubit 0 first.
//! Products use the per-site convention `X·Z = −i·Y`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;

use crate::error::{Error, Result};

pub(crate) type Words = SmallVec<[u64; 2]>;

fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

/// Single-site Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    /// Index in canonical order I < X < Y < Z.
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Letter {
        Letter::ALL[(code & 3) as usize]
    }

    pub fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        ['I', 'X', 'Y', 'Z'][self as usize]
    }

    pub fn from_char(c: char) -> Result<Letter> {
        match c {
            'I' => Ok(Letter::I),
            'X' => Ok(Letter::X),
            'Y' => Ok(Letter::Y),
            'Z' => Ok(Letter::Z),
            other => Err(Error::InvalidLetter(other)),
        }
    }
}

/// A phase in {+1, +i, −1, −i}, stored as the exponent of i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    /// Exponent k with value i^k.
    pub fn power(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// ±1 for real phases.
    pub fn real_sign(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub fn to_complex(self) -> num_complex::Complex64 {
        use num_complex::Complex64 as C;
        [C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(-1.0, 0.0), C::new(0.0, -1.0)][self.0 as usize]
    }
}

impl std::ops::Mul for Phase {
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

/// A set of qubits stored as a bitmask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QubitMask {
    n: usize,
    words: Words,
}

impl QubitMask {
    pub fn empty(n: usize) -> Self {
        QubitMask { n, words: SmallVec::from_elem(0, word_count(n)) }
    }

    pub fn full(n: usize) -> Self {
        let mut m = Self::empty(n);
        for q in 0..n {
            m.insert(q);
        }
        m
    }

    pub fn from_qubits<I: IntoIterator<Item = usize>>(n: usize, qubits: I) -> Self {
        let mut m = Self::empty(n);
        for q in qubits {
            m.insert(q);
        }
        m
    }

    pub fn insert(&mut self, q: usize) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        self.words[q / 64] |= 1 << (q % 64);
    }

    pub fn contains(&self, q: usize) -> bool {
        q < self.n && (self.words[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&q| self.contains(q))
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

/// An n-qubit Pauli operator without phase.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Words,
    z: Words,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = word_count(n);
        PauliString { n, x: SmallVec::from_elem(0, w), z: SmallVec::from_elem(0, w) }
    }

    /// Pauli with the given letter on one qubit and identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n);
        p.set(qubit, letter);
        p
    }

    pub fn from_sites<I: IntoIterator<Item = (usize, Letter)>>(n: usize, sites: I) -> Self {
        let mut p = Self::identity(n);
        for (q, l) in sites {
            p.set(q, l);
        }
        p
    }

    /// Z-type Pauli with Z on every qubit of `qubits`.
    pub fn z_on<I: IntoIterator<Item = usize>>(n: usize, qubits: I) -> Self {
        Self::from_sites(n, qubits.into_iter().map(|q| (q, Letter::Z)))
    }

    pub fn from_letters(s: &str) -> Result<Self> {
        let letters: Vec<Letter> = s.chars().map(Letter::from_char).collect::<Result<_>>()?;
        let mut p = Self::identity(letters.len());
        for (q, l) in letters.into_iter().enumerate() {
            p.set(q, l);
        }
        Ok(p)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn letter(&self, q: usize) -> Letter {
        assert!(q < self.n);
        let (w, b) = (q / 64, q % 64);
        Letter::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, q: usize, letter: Letter) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q / 64, q % 64);
        let (x, z) = letter.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    /// Number of non-identity sites inside `mask`.
    pub fn weight_on(&self, mask: &QubitMask) -> usize {
        self.x.iter().zip(&self.z).zip(mask.words()).map(|((x, z), m)| ((x | z) & m).count_ones() as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// True when only I and Z letters occur.
    pub fn is_z_type(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.letter(q) != Letter::I).collect()
    }

    pub fn support_mask(&self) -> QubitMask {
        QubitMask { n: self.n, words: self.x.iter().zip(&self.z).map(|(x, z)| x | z).collect() }
    }

    /// Number of Y letters.
    pub fn y_count(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x & z).count_ones() as usize).sum()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    /// Returns `(φ, R)` with `self · other = φ R`.
    pub fn multiply(&self, other: &Self) -> Result<(Phase, PauliString)> {
        self.check_dim(other)?;
        // Writing each factor as i^{#Y} X^x Z^z, moving Z_1 past X_2 costs (−1)^{z1·x2}.
        let mut e: i64 = 0;
        let mut x = Words::with_capacity(self.x.len());
        let mut z = Words::with_capacity(self.x.len());
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let (x3, z3) = (x1 ^ x2, z1 ^ z2);
            e += (x1 & z1).count_ones() as i64 + (x2 & z2).count_ones() as i64 + 2 * (z1 & x2).count_ones() as i64
                - (x3 & z3).count_ones() as i64;
            x.push(x3);
            z.push(z3);
        }
        Ok((Phase::from_power(e.rem_euclid(4) as u32), PauliString { n: self.n, x, z }))
    }

    pub fn anticommutes(&self, other: &Self) -> Result<bool> {
        self.check_dim(other)?;
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]).count_ones() ^ (self.z[i] & other.x[i]).count_ones()) & 1;
        }
        Ok(parity == 1)
    }
}

impl Ord for PauliString {
    /// Canonical order: fewer qubits first, then lexicographic on the text form with I < X < Y < Z.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| {
            for i in 0..self.x.len() {
                let diff = (self.x[i] ^ other.x[i]) | (self.z[i] ^ other.z[i]);
                if diff != 0 {
                    let q = i * 64 + diff.trailing_zeros() as usize;
                    return self.letter(q).cmp(&other.letter(q));
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_letters(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn weights() {
        assert_eq!(p("IXYZ").weight(), 3);
        assert_eq!(p("IIII").weight(), 0);
        assert_eq!(p("Z").weight(), 1);
    }

    #[test]
    fn products() {
        assert_eq!(p("X").multiply(&p("X")).unwrap(), (Phase::ONE, p("I")));
        assert_eq!(p("X").multiply(&p("Z")).unwrap(), (Phase::MINUS_I, p("Y")));
        assert_eq!(p("Z").multiply(&p("X")).unwrap(), (Phase::I, p("Y")));
        assert_eq!(p("XI").multiply(&p("IZ")).unwrap(), (Phase::ONE, p("XZ")));
        assert_eq!(p("Y").multiply(&p("Z")).unwrap(), (Phase::I, p("X")));
        assert!(p("X").multiply(&p("XX")).is_err());
    }

    #[test]
    fn anticommutation() {
        assert!(p("X").anticommutes(&p("Z")).unwrap());
        assert!(!p("XX").anticommutes(&p("ZZ")).unwrap());
        assert!(!p("XYZ").anticommutes(&p("III")).unwrap());
    }

    #[test]
    fn canonical_order() {
        let mut v = [p("ZI"), p("IZ"), p("XY"), p("II"), p("YI")];
        v.sort();
        let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["II", "IZ", "XY", "YI", "ZI"]);
    }

    #[test]
    fn wide_strings() {
        let mut a = PauliString::identity(130);
        a.set(129, Letter::Y);
        a.set(3, Letter::X);
        assert_eq!(a.weight(), 2);
        assert_eq!(a.letter(129), Letter::Y);
        assert_eq!(a.to_string().parse::<PauliString>().unwrap(), a);
    }

    #[test]
    fn bad_letter() {
        assert_eq!("XQ".parse::<PauliString>(), Err(Error::InvalidLetter('Q')));
    }
}
