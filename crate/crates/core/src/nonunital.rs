//! Random-direction spontaneous emission.
//!
//! Each channel `A_±` emits toward `|0⟩` (`+`) or `|1⟩` (`−`). In the Heisenberg picture
//! `A_±†{X, Y} = (1−γ_s/2)·{X, Y}` and `A_±†{Z} = (1−γ_s) Z ± γ_s I`, which splits as
//! `A† = Ã†∘D` with `D` depolarizing at `γ = −ln(1 − γ_s/2)` and `Ã†` acting on `Z` only.
//! Propagation damps with `D`, truncates, and then applies `Ã†`, which never raises weight.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, NoiseModel, GAMMA_S_MAX};
use crate::conjugation::LayerTables;
use crate::error::{Error, Result};
use crate::merge::scatter_merge;
use crate::pauli::{Letter, PauliString};
use crate::pauli_sum::PauliSum;
use crate::state::StateSpec;
use crate::Algorithm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Emission `|1⟩ → |0⟩`.
    Plus,
    /// Emission `|0⟩ → |1⟩`.
    Minus,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }
}

/// Emission direction for every channel `D_t`, `t = 0..=d`, and every qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionAssignment {
    pub gamma_s: f64,
    pub seed: Option<u64>,
    dirs: Vec<Vec<Direction>>,
}

fn check_gamma_s(gamma_s: f64) -> Result<()> {
    if !(0.0..=GAMMA_S_MAX).contains(&gamma_s) {
        return Err(Error::InvalidArgument(format!("gamma_s = {gamma_s} outside [0, 4/7]")));
    }
    Ok(())
}

impl EmissionAssignment {
    /// Directions drawn from ChaCha8 seeded with `seed`, in `(t, qubit)` order.
    pub fn from_seed(n: usize, d: usize, gamma_s: f64, seed: u64) -> Result<Self> {
        check_gamma_s(gamma_s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dirs = (0..=d)
            .map(|_| (0..n).map(|_| if rng.random::<bool>() { Direction::Plus } else { Direction::Minus }).collect())
            .collect();
        Ok(EmissionAssignment { gamma_s, seed: Some(seed), dirs })
    }

    /// `dirs[t][q]`; needs `d + 1` rows of equal length.
    pub fn from_directions(gamma_s: f64, dirs: Vec<Vec<Direction>>) -> Result<Self> {
        check_gamma_s(gamma_s)?;
        if dirs.is_empty() || dirs.iter().any(|r| r.len() != dirs[0].len()) {
            return Err(Error::InvalidArgument("direction table must be rectangular with d+1 rows".into()));
        }
        Ok(EmissionAssignment { gamma_s, seed: None, dirs })
    }

    /// The `index`-th of the `2^{n(d+1)}` assignments; bit `t·n + q` set means `−`.
    pub fn from_index(n: usize, d: usize, gamma_s: f64, index: u64) -> Result<Self> {
        let dirs = (0..=d)
            .map(|t| {
                (0..n)
                    .map(|q| if (index >> (t * n + q)) & 1 == 1 { Direction::Minus } else { Direction::Plus })
                    .collect()
            })
            .collect();
        Self::from_directions(gamma_s, dirs)
    }

    /// Assignment for a `nonunital_random` circuit from its seed (0 if absent).
    pub fn for_circuit(circuit: &Circuit) -> Result<Self> {
        if circuit.noise.model != NoiseModel::NonunitalRandom {
            return Err(Error::WrongNoiseModel {
                model: circuit.noise.model.to_string(),
                expected: NoiseModel::NonunitalRandom.to_string(),
            });
        }
        Self::from_seed(
            circuit.n,
            circuit.depth(),
            circuit.noise.gamma_s.unwrap_or(0.0),
            circuit.noise.seed.unwrap_or(0),
        )
    }

    pub fn directions(&self, t: usize) -> &[Direction] {
        &self.dirs[t]
    }

    pub fn direction(&self, t: usize, q: usize) -> Direction {
        self.dirs[t][q]
    }

    pub fn depth(&self) -> usize {
        self.dirs.len() - 1
    }

    pub fn num_qubits(&self) -> usize {
        self.dirs[0].len()
    }
}

/// One-site `A_±†` on a Pauli letter.
pub fn emission_heisenberg_action(dir: Direction, gamma_s: f64, letter: Letter) -> Vec<(Letter, f64)> {
    match letter {
        Letter::I => vec![(Letter::I, 1.0)],
        Letter::X | Letter::Y => vec![(letter, 1.0 - gamma_s / 2.0)],
        Letter::Z => vec![(Letter::Z, 1.0 - gamma_s), (Letter::I, dir.sign() * gamma_s)],
    }
}

/// The split `A_±† = Ã_±† ∘ D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub gamma_s: f64,
    /// Depolarizing rate of `D`.
    pub gamma: f64,
    /// `Ã†{Z} = z_scale·Z ± identity_shift·I`.
    pub z_scale: f64,
    pub identity_shift: f64,
}

impl Decomposition {
    pub fn atilde_action(&self, dir: Direction, letter: Letter) -> Vec<(Letter, f64)> {
        match letter {
            Letter::Z => vec![(Letter::Z, self.z_scale), (Letter::I, dir.sign() * self.identity_shift)],
            other => vec![(other, 1.0)],
        }
    }

    /// `Ã†` then `D` composed on one letter, for checking against `A†`.
    fn composed(&self, dir: Direction, letter: Letter) -> Vec<(Letter, f64)> {
        let damp = if letter == Letter::I { 1.0 } else { (-self.gamma).exp() };
        self.atilde_action(dir, letter).into_iter().map(|(l, c)| (l, c * damp)).collect()
    }
}

/// Splits the emission channel; fails for `γ_s ∉ [0, 2)`.
pub fn decompose(gamma_s: f64) -> Result<Decomposition> {
    if !(0.0..2.0).contains(&gamma_s) {
        return Err(Error::InvalidArgument(format!("gamma_s = {gamma_s} outside [0, 2)")));
    }
    let h = 1.0 - gamma_s / 2.0;
    let dec = Decomposition { gamma_s, gamma: -h.ln(), z_scale: (1.0 - gamma_s) / h, identity_shift: gamma_s / h };
    for dir in [Direction::Plus, Direction::Minus] {
        for l in Letter::ALL {
            let want = emission_heisenberg_action(dir, gamma_s, l);
            let got = dec.composed(dir, l);
            let ok = want.len() == got.len()
                && want.iter().zip(&got).all(|(a, b)| a.0 == b.0 && (a.1 - b.1).abs() <= 1e-15 * a.1.abs().max(1.0));
            if !ok {
                return Err(Error::InvalidArgument(format!("decomposition check failed for {l:?}")));
            }
        }
    }
    Ok(dec)
}

/// `Ã†` on every site of `p`, with per-qubit directions.
fn atilde_expand(
    dec: &Decomposition,
    dirs: &[Direction],
    p: &PauliString,
    c: f64,
    emit: &mut dyn FnMut(PauliString, f64),
) {
    let zs: Vec<usize> = (0..p.num_qubits()).filter(|&q| p.letter(q) == Letter::Z).collect();
    if zs.is_empty() || dec.gamma_s == 0.0 {
        emit(p.clone(), c * dec.z_scale.powi(zs.len() as i32));
        return;
    }
    for mask in 0u64..(1 << zs.len()) {
        let mut q = p.clone();
        let mut coef = c;
        for (i, &site) in zs.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                q.set(site, Letter::I);
                coef *= dirs[site].sign() * dec.identity_shift;
            } else {
                coef *= dec.z_scale;
            }
        }
        emit(q, coef);
    }
}

/// `E_± ‖Ã_±†{O}‖²_F / ‖O‖²_F` for the channel on one site. Returns 0 for `O = 0`.
pub fn mean_square_contraction(o: &PauliSum, site: usize, gamma_s: f64) -> Result<f64> {
    if site >= o.num_qubits() {
        return Err(Error::InvalidArgument(format!("site {site} out of range")));
    }
    let dec = decompose(gamma_s)?;
    let norm = o.norm_sq();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for dir in [Direction::Plus, Direction::Minus] {
        let mut out = PauliSum::new(o.num_qubits());
        for (p, c) in o.iter() {
            for (l, a) in dec.atilde_action(dir, p.letter(site)) {
                let mut q = p.clone();
                q.set(site, l);
                out.add_term(q, c * a)?;
            }
        }
        total += out.norm_sq();
    }
    Ok(total / 2.0 / norm)
}

fn check_inputs(circuit: &Circuit, o: &PauliSum, assignment: &EmissionAssignment) -> Result<Decomposition> {
    if circuit.noise.model != NoiseModel::NonunitalRandom {
        return Err(Error::WrongNoiseModel {
            model: circuit.noise.model.to_string(),
            expected: NoiseModel::NonunitalRandom.to_string(),
        });
    }
    if o.num_qubits() != circuit.n {
        return Err(Error::DimensionMismatch { expected: circuit.n, found: o.num_qubits() });
    }
    if assignment.depth() != circuit.depth() || assignment.num_qubits() != circuit.n {
        return Err(Error::InvalidArgument("emission assignment does not match the circuit".into()));
    }
    decompose(assignment.gamma_s)
}

/// Layerwise propagation with per-Pauli truncation `w ≤ ℓ`; returns the final
/// Heisenberg table (after the last `Ã†`).
pub fn propagate_nonunital(
    circuit: &Circuit,
    o: &PauliSum,
    ell: usize,
    assignment: &EmissionAssignment,
) -> Result<PauliSum> {
    let dec = check_inputs(circuit, o, assignment)?;
    let tables = LayerTables::new(circuit);
    let mut cur: Vec<(PauliString, f64)> = o.iter().map(|(p, c)| (p.clone(), c)).collect();
    for t in 0..=circuit.depth() {
        if t >= 1 {
            cur = scatter_merge(&cur, |(p, c), emit| {
                for (q, a) in tables.heisenberg(t, p) {
                    emit(q, c * a);
                }
            });
        }
        let damped: Vec<(PauliString, f64)> = cur
            .into_iter()
            .filter(|(p, _)| p.weight() <= ell)
            .map(|(p, c)| {
                let f = (-dec.gamma * p.weight() as f64).exp();
                (p, c * f)
            })
            .collect();
        let dirs = assignment.directions(t);
        cur = scatter_merge(&damped, |(p, c), emit| atilde_expand(&dec, dirs, p, *c, emit));
    }
    Ok(PauliSum::from_sorted_unchecked(circuit.n, cur))
}

/// Path sum with total weight `Σ_t w[P_t] ≤ ℓ`, where `P_t` is the Pauli damped by `D_t`.
/// Paths reaching the identity are carried along.
pub fn approximate_observable_nonunital(
    circuit: &Circuit,
    o: &PauliSum,
    ell: usize,
    assignment: &EmissionAssignment,
) -> Result<PauliSum> {
    let dec = check_inputs(circuit, o, assignment)?;
    let tables = LayerTables::new(circuit);
    let mut cur: Vec<((PauliString, usize), f64)> = o.iter().map(|(p, c)| ((p.clone(), 0), c)).collect();
    for t in 0..=circuit.depth() {
        if t >= 1 {
            cur = scatter_merge(&cur, |((p, w), c), emit| {
                for (q, a) in tables.heisenberg(t, p) {
                    emit((q, *w), c * a);
                }
            });
        }
        let damped: Vec<((PauliString, usize), f64)> = cur
            .into_iter()
            .filter_map(|((p, w), c)| {
                let k = p.weight();
                (w + k <= ell).then(|| ((p, w + k), c * (-dec.gamma * k as f64).exp()))
            })
            .collect();
        let dirs = assignment.directions(t);
        cur = scatter_merge(&damped, |((p, w), c), emit| {
            atilde_expand(&dec, dirs, p, *c, &mut |q, v| emit((q, *w), v));
        });
    }
    let merged = scatter_merge(&cur, |((p, _), c), emit| emit(p.clone(), *c));
    Ok(PauliSum::from_sorted_unchecked(circuit.n, merged))
}

/// `tr(ρ Õ)` with `Õ` from the chosen truncation scheme.
pub fn expectation_nonunital(
    circuit: &Circuit,
    o: &PauliSum,
    rho: &StateSpec,
    ell: usize,
    assignment: &EmissionAssignment,
    algorithm: Algorithm,
) -> Result<f64> {
    if rho.num_qubits() != circuit.n {
        return Err(Error::DimensionMismatch { expected: circuit.n, found: rho.num_qubits() });
    }
    let table = match algorithm {
        Algorithm::PathSum => approximate_observable_nonunital(circuit, o, ell, assignment)?,
        Algorithm::LayerProp => propagate_nonunital(circuit, o, ell, assignment)?,
    };
    let mut acc = 0.0;
    for (p, c) in table.iter() {
        acc += c * rho.pauli_coefficient(p)?;
    }
    Ok(acc)
}

/// RMS over all `2^{n(d+1)}` direction assignments of the non-identity normalized
/// Frobenius norm of the exact `C†{O}`. Limited to `n(d+1) ≤ 16` channels.
pub fn direction_rms_nonidentity_norm(circuit: &Circuit, o: &PauliSum, gamma_s: f64) -> Result<f64> {
    let channels = circuit.n * (circuit.depth() + 1);
    if channels > 16 {
        return Err(Error::InvalidArgument(format!("{channels} channels is too many to enumerate")));
    }
    let oracle = crate::oracle::Oracle::default();
    let dense = crate::oracle::DenseOperator::from_pauli_sum(o);
    let mut acc = 0.0;
    let total = 1u64 << channels;
    for idx in 0..total {
        let a = EmissionAssignment::from_index(circuit.n, circuit.depth(), gamma_s, idx)?;
        let h = oracle.heisenberg_with(circuit, &dense, Some(&a))?;
        let id = h.trace() / h.dim() as f64;
        let f = h.normalized_frobenius();
        acc += f * f - id.norm_sqr();
    }
    Ok((acc / total as f64).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_actions() {
        assert_eq!(
            emission_heisenberg_action(Direction::Plus, 0.4, Letter::Z),
            vec![(Letter::Z, 0.6), (Letter::I, 0.4)]
        );
        assert_eq!(emission_heisenberg_action(Direction::Minus, 0.4, Letter::X), vec![(Letter::X, 0.8)]);
        let z = emission_heisenberg_action(Direction::Minus, 0.4, Letter::Z);
        assert_eq!(z[1], (Letter::I, -0.4));
        assert_eq!(emission_heisenberg_action(Direction::Plus, 0.3, Letter::I), vec![(Letter::I, 1.0)]);
    }

    #[test]
    fn decomposition_values() {
        let d = decompose(0.4).unwrap();
        assert!((d.gamma + 0.8f64.ln()).abs() < 1e-15);
        assert!((d.z_scale - 0.75).abs() < 1e-15);
        assert!((d.identity_shift - 0.5).abs() < 1e-15);
        let z = decompose(0.0).unwrap();
        assert_eq!((z.gamma, z.z_scale, z.identity_shift), (0.0, 1.0, 0.0));
        assert!(decompose(2.0).is_err());
        for k in 0..=40 {
            assert!(decompose(k as f64 * 0.049).is_ok());
        }
    }

    #[test]
    fn contraction_ratios() {
        let z = PauliSum::single("IZ".parse().unwrap(), 1.0);
        let r = mean_square_contraction(&z, 1, 0.4).unwrap();
        assert!((r - 0.8125).abs() < 1e-14);
        let x = PauliSum::single("X".parse().unwrap(), 1.0);
        assert!((mean_square_contraction(&x, 0, 0.4).unwrap() - 1.0).abs() < 1e-15);
        let zb = PauliSum::single("Z".parse().unwrap(), 1.0);
        assert!((mean_square_contraction(&zb, 0, 4.0 / 7.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn seeded_directions_are_reproducible() {
        let a = EmissionAssignment::from_seed(5, 3, 0.2, 42).unwrap();
        let b = EmissionAssignment::from_seed(5, 3, 0.2, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.depth(), 3);
        assert!(EmissionAssignment::from_seed(2, 1, 0.6, 1).is_err());
    }
}
