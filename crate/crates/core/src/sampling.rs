//! Sampling computational-basis outcomes from low-weight `Z`-type expectation values.
//!
//! The output distribution is written as a Fourier sum over `Z_t`,
//! `q(s) = 2^{-n} Σ_{|t| ≤ ℓ_s} (−1)^{s·t} a_t`, with `a_t ≈ tr(Z_t C{ρ})`.
//! Bits are drawn one at a time from the exact marginals of `q`. Since `q` is a
//! quasi-distribution, each conditional is clamped to `[0, 1]` and the pair is
//! renormalized. Once the scaled prefix marginal `2^k q(y)` drops to
//! [`MARGINAL_FLOOR`] the remaining bits are drawn uniformly.
//!
//! Random numbers come from ChaCha8 (a counter-based stream cipher). Sample `i`
//! uses the generator seeded with `seed` on stream `i`, so every bitstring is
//! a pure function of `(seed, i)` regardless of thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, Layer, NoiseModel};
use crate::error::{Error, Result};
use crate::layer_prop::expectation_gate_noise;
use crate::nonunital::{expectation_nonunital, EmissionAssignment};
use crate::oracle::{DenseOperator, Oracle};
use crate::path_sum::expectation_uniform;
use crate::pauli::PauliString;
use crate::pauli_sum::PauliSum;
use crate::state::StateSpec;
use crate::Algorithm;

/// Below this value of `2^k · marginal(y)` the rest of the string is uniform.
pub const MARGINAL_FLOOR: f64 = 1e-12;

/// Largest `n` for which full distributions are enumerated.
pub const ENUMERATION_CAP: usize = 20;

/// How the coefficients `a_t` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Pauli-path sum with total weight at most `ell`.
    PathSum { ell: usize },
    /// Layerwise truncation at weight `ell`.
    LayerProp { ell: usize },
    /// Exact dense evolution on the backward light cone of each `Z_t`,
    /// allowed while the cone spans at most `cap` qubits.
    LightconeExact { cap: usize },
    /// Dense evolution of the whole register, `n ≤ cap`.
    Oracle { cap: usize },
}

/// `a_t` for every `Z`-type mask `t` with `|t| ≤ ℓ_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTable {
    n: usize,
    ell_s: usize,
    /// Masks as sorted qubit lists, ordered by size and then lexicographically.
    entries: Vec<(Vec<usize>, f64)>,
}

impl FourierTable {
    /// Builds a table from explicit coefficients. The empty mask is set to 1.
    pub fn from_entries(n: usize, ell_s: usize, coeffs: impl IntoIterator<Item = (Vec<usize>, f64)>) -> Result<Self> {
        let mut map = std::collections::BTreeMap::new();
        for (mut t, a) in coeffs {
            t.sort_unstable();
            t.dedup();
            if t.len() > ell_s || t.iter().any(|&q| q >= n) {
                return Err(Error::InvalidArgument(format!("mask {t:?} outside n = {n}, ell_s = {ell_s}")));
            }
            map.insert((t.len(), t), a);
        }
        map.insert((0, Vec::new()), 1.0);
        Ok(FourierTable { n, ell_s, entries: map.into_iter().map(|((_, t), a)| (t, a)).collect() })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn ell_s(&self) -> usize {
        self.ell_s
    }

    pub fn entries(&self) -> &[(Vec<usize>, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `a_t`, zero for masks not in the table.
    pub fn coefficient(&self, t: &[usize]) -> f64 {
        self.entries.iter().find(|(m, _)| m == t).map_or(0.0, |(_, a)| *a)
    }

    /// Exact marginal of `q` on the first `prefix.len()` qubits.
    pub fn marginal(&self, prefix: &[bool]) -> f64 {
        let k = prefix.len();
        let s: f64 = self
            .entries
            .iter()
            .filter(|(t, _)| t.last().is_none_or(|&q| q < k))
            .map(|(t, a)| if parity(t, prefix) { -a } else { *a })
            .sum();
        s / (k as f64).exp2()
    }

    /// The quasi-distribution `q(s)` over all `2^n` strings (qubit 0 is the high bit).
    pub fn quasi_distribution(&self) -> Result<Vec<f64>> {
        self.check_enumerable()?;
        let n = self.n;
        let scale = (n as f64).exp2();
        Ok((0..1usize << n)
            .map(|s| {
                let bits = index_bits(s, n);
                self.entries.iter().map(|(t, a)| if parity(t, &bits) { -a } else { *a }).sum::<f64>() / scale
            })
            .collect())
    }

    fn sampler(&self) -> Sampler {
        let mut by_last: Vec<Vec<(Vec<usize>, f64)>> = vec![Vec::new(); self.n];
        for (t, a) in &self.entries {
            if let Some((&last, rest)) = t.split_last() {
                by_last[last].push((rest.to_vec(), *a));
            }
        }
        Sampler { by_last }
    }

    /// Exact output distribution of [`FourierTable::sample`], fix-up included.
    pub fn induced_distribution(&self) -> Result<Vec<f64>> {
        self.check_enumerable()?;
        let sampler = self.sampler();
        let mut out = vec![0.0; 1usize << self.n];
        let mut prefix = Vec::with_capacity(self.n);
        sampler.enumerate(&mut prefix, Some(1.0), 1.0, &mut out);
        Ok(out)
    }

    /// `count` strings, `bits[q]` for qubit `q`.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<Vec<bool>> {
        let sampler = self.sampler();
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                sampler.draw(&mut rng)
            })
            .collect()
    }

    fn check_enumerable(&self) -> Result<()> {
        if self.n > ENUMERATION_CAP {
            return Err(Error::CapExceeded { n: self.n, cap: ENUMERATION_CAP });
        }
        Ok(())
    }
}

/// Parity of `y` on the qubits of `t` (`true` means odd).
fn parity(t: &[usize], y: &[bool]) -> bool {
    t.iter().fold(false, |acc, &q| acc ^ y[q])
}

fn index_bits(s: usize, n: usize) -> Vec<bool> {
    (0..n).map(|q| (s >> (n - 1 - q)) & 1 == 1).collect()
}

/// Masks grouped by their highest qubit, so the scaled marginals update in one
/// pass: `S(y0) = S(y) + R`, `S(y1) = S(y) − R` with `R` over masks ending at `k`.
struct Sampler {
    by_last: Vec<Vec<(Vec<usize>, f64)>>,
}

impl Sampler {
    fn step(&self, prefix: &[bool]) -> f64 {
        self.by_last[prefix.len()].iter().map(|(rest, a)| if parity(rest, prefix) { -a } else { *a }).sum()
    }

    /// Probability of a 0 given scaled marginal `s` and increment `r`, plus the
    /// scaled marginals of both children. `None` for the uniform tail.
    fn conditional(s: f64, r: f64) -> Option<(f64, f64, f64)> {
        if s <= MARGINAL_FLOOR {
            return None;
        }
        let (s0, s1) = (s + r, s - r);
        let c0 = (s0 / (2.0 * s)).clamp(0.0, 1.0);
        let c1 = (s1 / (2.0 * s)).clamp(0.0, 1.0);
        Some((c0 / (c0 + c1), s0, s1))
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<bool> {
        let n = self.by_last.len();
        let mut bits = Vec::with_capacity(n);
        let mut s = 1.0;
        while bits.len() < n {
            match Self::conditional(s, self.step(&bits)) {
                Some((p0, s0, s1)) => {
                    let one = rng.random::<f64>() >= p0;
                    s = if one { s1 } else { s0 };
                    bits.push(one);
                }
                None => {
                    while bits.len() < n {
                        bits.push(rng.random::<bool>());
                    }
                }
            }
        }
        bits
    }

    /// `s = None` marks the uniform tail.
    fn enumerate(&self, prefix: &mut Vec<bool>, s: Option<f64>, prob: f64, out: &mut [f64]) {
        let n = self.by_last.len();
        if prefix.len() == n {
            let idx = prefix.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            out[idx] += prob;
            return;
        }
        let next = s.and_then(|s| Self::conditional(s, self.step(prefix)));
        let branches = match next {
            Some((p0, s0, s1)) => [(false, p0, Some(s0)), (true, 1.0 - p0, Some(s1))],
            None => [(false, 0.5, None), (true, 0.5, None)],
        };
        for (b, p, child) in branches {
            if p > 0.0 {
                prefix.push(b);
                self.enumerate(prefix, child, prob * p, out);
                prefix.pop();
            }
        }
    }
}

/// All masks of size at most `ell_s`, by size then lexicographically.
pub fn masks(n: usize, ell_s: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for q in start..n {
            cur.push(q);
            rec(q + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for k in 0..=ell_s.min(n) {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Estimates `a_t = tr(Z_t C{ρ})` for every `|t| ≤ ℓ_s`. Readout noise is part of
/// the circuit and therefore included; `a_∅` is exactly 1.
pub fn fourier_coefficients(
    circuit: &Circuit,
    rho: &StateSpec,
    ell_s: usize,
    backend: Backend,
) -> Result<FourierTable> {
    if rho.num_qubits() != circuit.n {
        return Err(Error::DimensionMismatch { expected: circuit.n, found: rho.num_qubits() });
    }
    rho.validate()?;
    let n = circuit.n;
    let ts = masks(n, ell_s);
    let values: Vec<f64> = match backend {
        Backend::Oracle { cap } => {
            let diag = Oracle::with_cap(cap).evolve_density_matrix(circuit, rho)?.diagonal();
            ts.par_iter()
                .map(|t| diag.iter().enumerate().map(|(s, p)| if parity(t, &index_bits(s, n)) { -p } else { *p }).sum())
                .collect()
        }
        Backend::LightconeExact { cap } => {
            let assignment = if circuit.noise.model == NoiseModel::NonunitalRandom {
                Some(EmissionAssignment::for_circuit(circuit)?)
            } else {
                None
            };
            ts.par_iter()
                .map(|t| lightcone_expectation(circuit, rho, t, cap, assignment.as_ref()))
                .collect::<Result<_>>()?
        }
        Backend::PathSum { ell } | Backend::LayerProp { ell } => {
            let algorithm =
                if matches!(backend, Backend::PathSum { .. }) { Algorithm::PathSum } else { Algorithm::LayerProp };
            let assignment = if circuit.noise.model == NoiseModel::NonunitalRandom {
                Some(EmissionAssignment::for_circuit(circuit)?)
            } else {
                None
            };
            ts.par_iter()
                .map(|t| {
                    if t.is_empty() {
                        return Ok(1.0);
                    }
                    let o = PauliSum::single(PauliString::z_on(n, t.iter().copied()), 1.0);
                    match (&assignment, algorithm) {
                        (Some(a), alg) => expectation_nonunital(circuit, &o, rho, ell, a, alg),
                        (None, Algorithm::PathSum) => expectation_uniform(circuit, &o, rho, ell),
                        (None, Algorithm::LayerProp) => expectation_gate_noise(circuit, &o, rho, ell),
                    }
                })
                .collect::<Result<_>>()?
        }
    };
    FourierTable::from_entries(n, ell_s, ts.into_iter().zip(values))
}

/// Exact `tr(Z_t C{ρ})` from the backward light cone of `t`.
///
/// Gates that straddle the cone boundary never touch the evolving support at
/// their layer, so dropping them along with everything outside is exact.
fn lightcone_expectation(
    circuit: &Circuit,
    rho: &StateSpec,
    t: &[usize],
    cap: usize,
    assignment: Option<&EmissionAssignment>,
) -> Result<f64> {
    if t.is_empty() {
        return Ok(1.0);
    }
    let cone: Vec<usize> = circuit.light_cone(t).last().map_or_else(|| t.to_vec(), |s| s.iter().copied().collect());
    if cone.len() > cap {
        return Err(Error::LightConeTooLarge { size: cone.len(), cap });
    }
    let mut local = vec![usize::MAX; circuit.n];
    for (i, &q) in cone.iter().enumerate() {
        local[q] = i;
    }
    let layers = circuit
        .layers
        .iter()
        .map(|layer| {
            let gates = layer
                .gates
                .iter()
                .filter(|g| g.qubits.iter().all(|&q| local[q] != usize::MAX))
                .map(|g| {
                    let mut g = g.clone();
                    g.qubits.iter_mut().for_each(|q| *q = local[*q]);
                    g
                })
                .collect();
            Layer::new(gates)
        })
        .collect();
    let sub = Circuit::new(cone.len(), layers, circuit.noise.clone())?;
    let sub_assignment = assignment
        .map(|a| {
            let dirs = (0..=a.depth()).map(|d| cone.iter().map(|&q| a.direction(d, q)).collect()).collect();
            EmissionAssignment::from_directions(a.gamma_s, dirs)
        })
        .transpose()?;
    let z = PauliSum::single(PauliString::z_on(cone.len(), t.iter().map(|&q| local[q])), 1.0);
    let evolved =
        Oracle::with_cap(cap).heisenberg_with(&sub, &DenseOperator::from_pauli_sum(&z), sub_assignment.as_ref())?;
    let mut acc = 0.0;
    for (p, c) in evolved.to_pauli_sum()?.iter() {
        let full = PauliString::from_sites(circuit.n, cone.iter().enumerate().map(|(i, &q)| (q, p.letter(i))));
        acc += c * rho.pauli_coefficient(&full)?;
    }
    Ok(acc)
}

/// Draws `count` outcome strings from the truncated Fourier sum.
pub fn sample(
    circuit: &Circuit,
    rho: &StateSpec,
    ell_s: usize,
    backend: Backend,
    seed: u64,
    count: usize,
) -> Result<Vec<Vec<bool>>> {
    Ok(fourier_coefficients(circuit, rho, ell_s, backend)?.sample(seed, count))
}

/// `±1` outcomes with mean equal to `estimate` clamped to `[−1, 1]`.
pub fn sample_pauli_outcomes(estimate: f64, seed: u64, count: usize) -> Vec<i8> {
    let p_plus = (1.0 + estimate.clamp(-1.0, 1.0)) / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| if rng.random::<f64>() < p_plus { 1 } else { -1 }).collect()
}

/// `6√2 · sqrt(ε′²(n^{ℓ_s} + 1) + ᾱ e^{−2γℓ_s})`.
pub fn lemma4_bound(eps_prime: f64, n: usize, ell_s: usize, alpha_bar: f64, gamma: f64) -> f64 {
    let count = (n as f64).powi(ell_s as i32) + 1.0;
    6.0 * 2f64.sqrt() * (eps_prime * eps_prime * count + alpha_bar * (-2.0 * gamma * ell_s as f64).exp()).sqrt()
}

/// `2^n Σ_s p(s)²` for a distribution over `n`-bit strings.
pub fn collision_alpha(p: &[f64]) -> f64 {
    p.len() as f64 * p.iter().map(|x| x * x).sum::<f64>()
}

/// `Σ_s |p(s) − q(s)|` (the unhalved ℓ1 distance used in the sampling bound).
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum()
}

/// ASCII `0`/`1`, qubit 0 first.
pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}
