//! Input states with O(n) Pauli coefficients `tr(ρP)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString};
use crate::pauli_sum::PauliSum;

/// Tolerance for density-matrix validity (trace, Hermiticity, positivity).
pub const STATE_TOLERANCE: f64 = 1e-10;

/// Single-qubit density matrix, row-major.
pub type Qubit2x2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    /// Computational basis state; `bits[0]` is qubit 0.
    Basis(Vec<bool>),
    /// Tensor product of single-qubit density matrices.
    Product(Vec<Qubit2x2>),
    /// `(1−p)·I/2^n + p·|0…0⟩⟨0…0|` with `p = (c−1)/(2^n−1)`, so the largest
    /// eigenvalue is `c/2^n`. `c = 1` is maximally mixed.
    Mixed { n: usize, c: f64 },
}

fn check_qubit(m: &Qubit2x2) -> Result<()> {
    let tr = m[0][0] + m[1][1];
    if (tr.re - 1.0).abs() > STATE_TOLERANCE || tr.im.abs() > STATE_TOLERANCE {
        return Err(Error::InvalidState("factor trace is not 1".into()));
    }
    if (m[0][1] - m[1][0].conj()).norm() > STATE_TOLERANCE
        || m[0][0].im.abs() > STATE_TOLERANCE
        || m[1][1].im.abs() > STATE_TOLERANCE
    {
        return Err(Error::InvalidState("factor is not Hermitian".into()));
    }
    // eigenvalues of a unit-trace Hermitian 2x2: 1/2 ± sqrt((a−d)²/4 + |b|²)
    let half_gap = (((m[0][0].re - m[1][1].re) / 2.0).powi(2) + m[0][1].norm_sqr()).sqrt();
    if 0.5 - half_gap < -STATE_TOLERANCE {
        return Err(Error::InvalidState("factor is not positive semidefinite".into()));
    }
    Ok(())
}

impl StateSpec {
    pub fn basis_from_str(bits: &str) -> Result<Self> {
        bits.chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidState(format!("bad bit {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(StateSpec::Basis)
    }

    /// `|0…0⟩`.
    pub fn zeros(n: usize) -> Self {
        StateSpec::Basis(vec![false; n])
    }

    pub fn product(factors: Vec<Qubit2x2>) -> Result<Self> {
        for f in &factors {
            check_qubit(f)?;
        }
        Ok(StateSpec::Product(factors))
    }

    pub fn mixed(n: usize, c: f64) -> Result<Self> {
        let s = StateSpec::Mixed { n, c };
        s.validate()?;
        Ok(s)
    }

    pub fn maximally_mixed(n: usize) -> Self {
        StateSpec::Mixed { n, c: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StateSpec::Basis(_) => Ok(()),
            StateSpec::Product(f) => f.iter().try_for_each(check_qubit),
            StateSpec::Mixed { n, c } => {
                let max = (*n as f64).exp2();
                if !(c.is_finite() && *c >= 1.0 && *c <= max * (1.0 + 1e-12)) {
                    return Err(Error::InvalidState(format!("purity c = {c} outside [1, 2^{n}]")));
                }
                Ok(())
            }
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            StateSpec::Basis(b) => b.len(),
            StateSpec::Product(f) => f.len(),
            StateSpec::Mixed { n, .. } => *n,
        }
    }

    /// Weight `p` on `|0…0⟩` of the mixed family.
    pub(crate) fn mixed_weight(n: usize, c: f64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        (c - 1.0) / ((n as f64).exp2() - 1.0)
    }

    /// `tr(ρP)`.
    pub fn pauli_coefficient(&self, p: &PauliString) -> Result<f64> {
        if p.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch { expected: self.num_qubits(), found: p.num_qubits() });
        }
        Ok(match self {
            StateSpec::Basis(bits) => {
                let mut v = 1.0;
                for q in 0..bits.len() {
                    match p.letter(q) {
                        Letter::I => {}
                        Letter::Z => {
                            if bits[q] {
                                v = -v
                            }
                        }
                        _ => return Ok(0.0),
                    }
                }
                v
            }
            StateSpec::Product(f) => {
                let mut v = 1.0;
                for (q, m) in f.iter().enumerate() {
                    v *= match p.letter(q) {
                        Letter::I => 1.0,
                        Letter::X => 2.0 * m[0][1].re,
                        Letter::Y => -2.0 * m[0][1].im,
                        Letter::Z => m[0][0].re - m[1][1].re,
                    };
                    if v == 0.0 {
                        break;
                    }
                }
                v
            }
            StateSpec::Mixed { n, c } => {
                if p.is_identity() {
                    1.0
                } else if p.is_z_type() {
                    Self::mixed_weight(*n, *c)
                } else {
                    0.0
                }
            }
        })
    }

    /// Pauli table `tr(ρP)/2^n` over all `P` of weight at most `max_weight`
    /// with nonzero coefficient.
    pub fn pauli_table(&self, max_weight: usize) -> PauliSum {
        let n = self.num_qubits();
        let norm = (-(n as f64)).exp2();
        let mut out = Vec::new();
        // per-site candidate letters with their nonzero single-site traces
        let sites: Vec<Vec<(Letter, f64)>> = (0..n)
            .map(|q| match self {
                StateSpec::Basis(b) => vec![(Letter::Z, if b[q] { -1.0 } else { 1.0 })],
                StateSpec::Product(f) => {
                    let m = &f[q];
                    [
                        (Letter::X, 2.0 * m[0][1].re),
                        (Letter::Y, -2.0 * m[0][1].im),
                        (Letter::Z, m[0][0].re - m[1][1].re),
                    ]
                    .into_iter()
                    .filter(|(_, v)| *v != 0.0)
                    .collect()
                }
                StateSpec::Mixed { .. } => vec![(Letter::Z, 1.0)],
            })
            .collect();
        let mixed_p = match self {
            StateSpec::Mixed { n, c } => Some(Self::mixed_weight(*n, *c)),
            _ => None,
        };
        let mut current = PauliString::identity(n);
        fn rec(
            q: usize,
            weight_left: usize,
            value: f64,
            sites: &[Vec<(Letter, f64)>],
            current: &mut PauliString,
            out: &mut Vec<(PauliString, f64)>,
        ) {
            if q == sites.len() {
                out.push((current.clone(), value));
                return;
            }
            rec(q + 1, weight_left, value, sites, current, out);
            if weight_left == 0 {
                return;
            }
            for &(l, v) in &sites[q] {
                current.set(q, l);
                rec(q + 1, weight_left - 1, value * v, sites, current, out);
            }
            current.set(q, Letter::I);
        }
        rec(0, max_weight, 1.0, &sites, &mut current, &mut out);
        if let Some(p) = mixed_p {
            for (pauli, v) in &mut out {
                if !pauli.is_identity() {
                    *v = p;
                }
            }
        }
        let terms = out.into_iter().map(|(p, v)| (p, v * norm));
        PauliSum::from_terms(n, terms).expect("dimensions fixed")
    }

    /// Restriction to `qubits` (in the given order) as a state of that many qubits.
    /// Exact for product and basis states; for the mixed family this is the
    /// reduced density matrix only when it stays in the family, which holds for `c = 1`.
    pub fn restrict(&self, qubits: &[usize]) -> Result<StateSpec> {
        Ok(match self {
            StateSpec::Basis(b) => StateSpec::Basis(qubits.iter().map(|&q| b[q]).collect()),
            StateSpec::Product(f) => StateSpec::Product(qubits.iter().map(|&q| f[q]).collect()),
            StateSpec::Mixed { c, .. } if *c == 1.0 => StateSpec::maximally_mixed(qubits.len()),
            StateSpec::Mixed { .. } => {
                return Err(Error::InvalidState("mixed(c > 1) does not factor onto a subset of qubits".into()))
            }
        })
    }

    /// Parses `basis:0101`, `mixed:c=1`, or `product:<path>`.
    pub fn parse(spec: &str, n: usize) -> Result<StateSpec> {
        let (kind, rest) =
            spec.split_once(':').ok_or_else(|| Error::InvalidState(format!("expected kind:value, got {spec:?}")))?;
        let s = match kind {
            "basis" => StateSpec::basis_from_str(rest)?,
            "mixed" => {
                let v = rest.strip_prefix("c=").unwrap_or(rest);
                let c: f64 = v.parse().map_err(|_| Error::InvalidState(format!("bad purity {v:?}")))?;
                StateSpec::mixed(n, c)?
            }
            "product" => {
                let text = std::fs::read_to_string(rest)
                    .map_err(|e| Error::InvalidState(format!("cannot read {rest}: {e}")))?;
                StateSpec::parse_product(&text)?
            }
            other => return Err(Error::InvalidState(format!("unknown state kind {other:?}"))),
        };
        if s.num_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, found: s.num_qubits() });
        }
        Ok(s)
    }

    /// One factor per line: `re00 im00 re01 im01 re10 im10 re11 im11`.
    pub fn parse_product(text: &str) -> Result<StateSpec> {
        let mut factors = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidState(format!("line {}: bad number", i + 1)))?;
            if v.len() != 8 {
                return Err(Error::InvalidState(format!("line {}: expected 8 numbers", i + 1)));
            }
            let c = |k: usize| Complex64::new(v[2 * k], v[2 * k + 1]);
            factors.push([[c(0), c(1)], [c(2), c(3)]]);
        }
        StateSpec::product(factors)
    }
}
