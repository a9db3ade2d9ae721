//! Sparse real Pauli expansions of Hermitian operators.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Coefficients with magnitude below this are not stored.
pub const ZERO_TOLERANCE: f64 = 1e-15;

/// Imaginary parts above this make a complex coefficient non-real.
pub const IMAG_TOLERANCE: f64 = 1e-10;

/// `Σ_P c_P P` with real coefficients, in canonical order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<PauliString, f64>,
}

impl PauliSum {
    pub fn new(n: usize) -> Self {
        PauliSum { n, terms: BTreeMap::new() }
    }

    /// Builds a sum, adding duplicate entries together.
    pub fn from_terms<I: IntoIterator<Item = (PauliString, f64)>>(n: usize, terms: I) -> Result<Self> {
        let mut s = Self::new(n);
        for (p, c) in terms {
            s.add_term(p, c)?;
        }
        Ok(s)
    }

    /// Builds a sum from complex coefficients that must be real.
    pub fn from_complex_terms<I: IntoIterator<Item = (PauliString, Complex64)>>(n: usize, terms: I) -> Result<Self> {
        let mut s = Self::new(n);
        for (p, c) in terms {
            if c.im.abs() > IMAG_TOLERANCE {
                return Err(Error::NonRealCoefficient { re: c.re, im: c.im });
            }
            s.add_term(p, c.re)?;
        }
        Ok(s)
    }

    /// Builds from a list already sorted and free of duplicates, skipping checks on order.
    pub(crate) fn from_sorted_unchecked(n: usize, terms: Vec<(PauliString, f64)>) -> Self {
        let terms = terms.into_iter().filter(|(_, c)| c.abs() >= ZERO_TOLERANCE).collect();
        PauliSum { n, terms }
    }

    pub fn single(p: PauliString, c: f64) -> Self {
        let n = p.num_qubits();
        Self::from_terms(n, [(p, c)]).expect("dimension fixed by the Pauli")
    }

    pub fn identity(n: usize) -> Self {
        Self::single(PauliString::identity(n), 1.0)
    }

    pub fn add_term(&mut self, p: PauliString, c: f64) -> Result<()> {
        if p.num_qubits() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: p.num_qubits() });
        }
        if !c.is_finite() {
            return Err(Error::NonFiniteCoefficient);
        }
        match self.terms.entry(p) {
            Entry::Vacant(v) => {
                if c.abs() >= ZERO_TOLERANCE {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().abs() < ZERO_TOLERANCE {
                    o.remove();
                }
            }
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        self.terms.get(p).copied().unwrap_or(0.0)
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.coefficient(&PauliString::identity(self.n))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, f64)> + '_ {
        self.terms.iter().map(|(p, &c)| (p, c))
    }

    pub fn terms(&self) -> &BTreeMap<PauliString, f64> {
        &self.terms
    }

    /// Normalized Frobenius norm `sqrt(tr(O†O)/2^n) = sqrt(Σ c_P²)`.
    pub fn frobenius_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum()
    }

    /// Pauli 1-norm `Σ |c_P|`.
    pub fn pauli_l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn max_weight(&self) -> usize {
        self.terms.keys().map(|p| p.weight()).max().unwrap_or(0)
    }

    /// `P(w) = Σ_{weight(P)=w} c_P²` for `w = 0..=n`.
    pub fn weight_distribution(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        for (p, c) in &self.terms {
            out[p.weight()] += c * c;
        }
        out
    }

    /// Terms of weight at most `ell`.
    pub fn truncated(&self, ell: usize) -> PauliSum {
        self.filtered(|p| p.weight() <= ell)
    }

    /// Terms of weight exactly `w`.
    pub fn weight_component(&self, w: usize) -> PauliSum {
        self.filtered(|p| p.weight() == w)
    }

    pub fn without_identity(&self) -> PauliSum {
        self.filtered(|p| !p.is_identity())
    }

    pub fn filtered<F: Fn(&PauliString) -> bool>(&self, keep: F) -> PauliSum {
        PauliSum {
            n: self.n,
            terms: self.terms.iter().filter(|(p, _)| keep(p)).map(|(p, &c)| (p.clone(), c)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> PauliSum {
        PauliSum::from_sorted_unchecked(self.n, self.terms.iter().map(|(p, &c)| (p.clone(), c * s)).collect())
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &PauliSum, s: f64) -> Result<PauliSum> {
        let mut out = self.clone();
        for (p, c) in other.iter() {
            out.add_term(p.clone(), s * c)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PauliSum) -> Result<PauliSum> {
        self.add_scaled(other, -1.0)
    }

    /// `tr(A B)/2^n = Σ a_P b_P`.
    pub fn inner(&self, other: &PauliSum) -> f64 {
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.iter().map(|(p, c)| c * big.coefficient(p)).sum()
    }

    /// Text form: one `<coefficient> <letters>` line per term.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (p, c) in &self.terms {
            let _ = writeln!(s, "{c:?} {p}");
        }
        s
    }

    /// Parses the observable text format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<PauliSum> {
        let mut n = None;
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(cs), Some(ps), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::Parse(format!("line {}: expected `<coefficient> <paulis>`", lineno + 1)));
            };
            let c: f64 =
                cs.parse().map_err(|_| Error::Parse(format!("line {}: bad coefficient {cs:?}", lineno + 1)))?;
            let p: PauliString = ps.parse()?;
            match n {
                None => n = Some(p.num_qubits()),
                Some(m) if m != p.num_qubits() => {
                    return Err(Error::DimensionMismatch { expected: m, found: p.num_qubits() })
                }
                _ => {}
            }
            entries.push((p, c));
        }
        let n = n.ok_or_else(|| Error::Parse("observable has no terms".into()))?;
        PauliSum::from_terms(n, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn norms() {
        let o = PauliSum::from_terms(2, [(p("XI"), 0.5), (p("IZ"), 0.5)]).unwrap();
        assert!((o.frobenius_norm() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(o.pauli_l1_norm(), 1.0);
        assert_eq!(PauliSum::single(p("Z"), -2.0).pauli_l1_norm(), 2.0);
        assert_eq!(PauliSum::single(p("Z"), 1.0).frobenius_norm(), 1.0);
        assert_eq!(PauliSum::new(3).frobenius_norm(), 0.0);
        assert_eq!(PauliSum::new(3).pauli_l1_norm(), 0.0);
    }

    #[test]
    fn zero_terms_are_dropped() {
        let mut o = PauliSum::from_terms(1, [(p("X"), 1.0), (p("Z"), 1.0)]).unwrap();
        o.add_term(p("X"), -1.0).unwrap();
        assert_eq!(o.len(), 1);
        assert_eq!(o.coefficient(&p("Z")), 1.0);
        assert!(PauliSum::from_terms(1, [(p("Y"), 1e-16)]).unwrap().is_empty());
    }

    #[test]
    fn complex_coefficients_rejected() {
        let r = PauliSum::from_complex_terms(1, [(p("X"), Complex64::new(1.0, 0.5))]);
        assert!(matches!(r, Err(Error::NonRealCoefficient { .. })));
    }

    #[test]
    fn text_round_trip() {
        let text = "# test\n0.5 XI\n-0.25 IZ  # trailing\n\n0.1 YY\n";
        let o = PauliSum::parse(text).unwrap();
        assert_eq!(o.len(), 3);
        assert_eq!(PauliSum::parse(&o.to_text()).unwrap(), o);
        assert!(PauliSum::parse("1.0 X\n1.0 XX").is_err());
        assert!(PauliSum::parse("abc X").is_err());
    }
}
