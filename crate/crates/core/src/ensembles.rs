//! State ensembles, RMS errors against the dense oracle, and circuit conjugation
//! by Pauli operators (spatial disorder).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, Gate, GateKind, Layer};
use crate::conjugation::local_pauli_matrix;
use crate::diagnostics::algorithm_error_bound;
use crate::error::{Error, Result};
use crate::oracle::{DenseOperator, Oracle};
use crate::pauli::PauliString;
use crate::pauli_sum::PauliSum;
use crate::random::random_pauli;
use crate::state::StateSpec;
use crate::{approximate_observable, expectation_of, Algorithm};

/// Largest register for which the basis ensemble is listed state by state.
pub const BASIS_ENUMERATION_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum StateEnsemble {
    /// All `2^n` computational basis states, mixture `I/2^n`.
    ComputationalBasis {
        n: usize,
    },
    FixedList(Vec<StateSpec>),
    Single(StateSpec),
}

impl StateEnsemble {
    pub fn num_qubits(&self) -> Result<usize> {
        match self {
            StateEnsemble::ComputationalBasis { n } => Ok(*n),
            StateEnsemble::Single(s) => Ok(s.num_qubits()),
            StateEnsemble::FixedList(list) => {
                let n = list.first().ok_or_else(|| Error::InvalidState("empty ensemble".into()))?.num_qubits();
                if let Some(bad) = list.iter().find(|s| s.num_qubits() != n) {
                    return Err(Error::DimensionMismatch { expected: n, found: bad.num_qubits() });
                }
                Ok(n)
            }
        }
    }

    pub fn states(&self) -> Result<Vec<StateSpec>> {
        Ok(match self {
            StateEnsemble::ComputationalBasis { n } => {
                if *n > BASIS_ENUMERATION_CAP {
                    return Err(Error::CapExceeded { n: *n, cap: BASIS_ENUMERATION_CAP });
                }
                (0..1usize << n)
                    .map(|s| StateSpec::Basis((0..*n).map(|q| (s >> (n - 1 - q)) & 1 == 1).collect()))
                    .collect()
            }
            StateEnsemble::FixedList(list) => list.clone(),
            StateEnsemble::Single(s) => vec![s.clone()],
        })
    }

    /// `c = 2^n ‖mixture‖_∞`. Exact for the basis ensemble and single states;
    /// lists are mixed densely, so `n ≤ cap`.
    pub fn purity_constant(&self, cap: usize) -> Result<f64> {
        match self {
            StateEnsemble::ComputationalBasis { .. } => Ok(1.0),
            StateEnsemble::Single(s) => single_purity(s),
            StateEnsemble::FixedList(list) => {
                let n = self.num_qubits()?;
                if n > cap {
                    return Err(Error::CapExceeded { n, cap });
                }
                let mut acc = DenseOperator::zeros(n);
                for s in list {
                    acc = DenseOperator::from_matrix(n, acc.matrix() + DenseOperator::from_state(s).matrix())?;
                }
                let top = acc.eigenvalues().into_iter().fold(f64::NEG_INFINITY, f64::max);
                Ok(top / list.len() as f64 * (n as f64).exp2())
            }
        }
    }
}

fn single_purity(s: &StateSpec) -> Result<f64> {
    s.validate()?;
    Ok(match s {
        StateSpec::Basis(b) => (b.len() as f64).exp2(),
        StateSpec::Mixed { c, .. } => *c,
        StateSpec::Product(f) => f
            .iter()
            .map(|m| {
                // largest eigenvalue of a 2×2 density matrix is (1 + |r|)/2
                let z = m[0][0].re - m[1][1].re;
                let r = (4.0 * m[0][1].norm_sqr() + z * z).sqrt();
                1.0 + r
            })
            .product(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmsReport {
    /// Root-mean-square of `tr(ρÕ) − tr(ρC†{O})` over the ensemble.
    pub rms: f64,
    /// `√c · ‖C†{O} − Õ‖_F`.
    pub bound: f64,
    pub delta_frobenius: f64,
    pub purity: f64,
    pub states: usize,
}

/// RMS error of the truncated observable over `ensemble`, with exact values
/// from the dense oracle.
pub fn rms_error(
    ensemble: &StateEnsemble,
    circuit: &Circuit,
    o: &PauliSum,
    ell: usize,
    algorithm: Algorithm,
    oracle: &Oracle,
) -> Result<RmsReport> {
    let n = ensemble.num_qubits()?;
    if n != circuit.n {
        return Err(Error::DimensionMismatch { expected: circuit.n, found: n });
    }
    let approx = approximate_observable(circuit, o, ell, algorithm)?;
    let exact = oracle.exact_heisenberg(circuit, o)?;
    rms_against(ensemble, &approx, &exact, oracle.cap)
}

/// [`rms_error`] for a precomputed `Õ` and exact `C†{O}`.
pub fn rms_against(
    ensemble: &StateEnsemble,
    approx: &PauliSum,
    exact: &DenseOperator,
    cap: usize,
) -> Result<RmsReport> {
    let n = exact.num_qubits();
    let delta = exact.sub(&DenseOperator::from_pauli_sum(approx)).normalized_frobenius();
    let purity = ensemble.purity_constant(cap)?;
    let states = ensemble.states()?;
    let diag = exact.diagonal();
    let errors: Vec<f64> = states
        .par_iter()
        .map(|s| {
            let truth = match s {
                StateSpec::Basis(b) => diag[b.iter().fold(0usize, |acc, &x| (acc << 1) | x as usize)],
                _ => DenseOperator::from_state(s).trace_product(exact).re,
            };
            Ok((expectation_of(approx, s)? - truth).powi(2))
        })
        .collect::<Result<_>>()?;
    let _ = n;
    let rms = (errors.iter().sum::<f64>() / errors.len() as f64).sqrt();
    Ok(RmsReport { rms, bound: purity.sqrt() * delta, delta_frobenius: delta, purity, states: errors.len() })
}

/// Replaces every gate `U` by `P U P` on its support. Named gates keep their
/// name when the matrix is unchanged; otherwise they become explicit matrices.
pub fn conjugate_circuit(circuit: &Circuit, p: &PauliString) -> Result<Circuit> {
    if p.num_qubits() != circuit.n {
        return Err(Error::DimensionMismatch { expected: circuit.n, found: p.num_qubits() });
    }
    let layers = circuit
        .layers
        .iter()
        .map(|layer| {
            Layer::new(
                layer
                    .gates
                    .iter()
                    .map(|g| {
                        let local = PauliString::from_sites(
                            g.qubits.len(),
                            g.qubits.iter().enumerate().map(|(i, &q)| (i, p.letter(q))),
                        );
                        if local.is_identity() {
                            return g.clone();
                        }
                        let pm = local_pauli_matrix(&local);
                        let u = g.matrix();
                        let conj = pm.matmul(&u).matmul(&pm);
                        if !matches!(g.kind, GateKind::Unitary(_)) && conj.max_abs_diff(&u) <= 1e-15 {
                            g.clone()
                        } else {
                            Gate::unitary(conj, &g.qubits)
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    Circuit::new(circuit.n, layers, circuit.noise.clone())
}

/// Source of random circuits for disorder averages.
pub trait CircuitFamily: Sync {
    fn num_qubits(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Circuit>;
    /// Representative member, used for the error bound.
    fn base(&self) -> &Circuit;
}

/// A fixed circuit conjugated by a uniformly random `n`-qubit Pauli.
#[derive(Debug, Clone)]
pub struct PauliConjugatedFamily {
    pub circuit: Circuit,
}

impl CircuitFamily for PauliConjugatedFamily {
    fn num_qubits(&self) -> usize {
        self.circuit.n
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Circuit> {
        conjugate_circuit(&self.circuit, &random_pauli(self.circuit.n, rng))
    }

    fn base(&self) -> &Circuit {
        &self.circuit
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisorderReport {
    pub rms: f64,
    /// Relative Frobenius bound of the algorithm.
    pub epsilon: f64,
    /// `ε · ‖O‖_{Pauli,1}`.
    pub bound: f64,
    pub samples: usize,
}

/// Monte-Carlo RMS error over circuits drawn from `family`, fixed input `rho`.
/// Circuits are drawn sequentially from one seeded generator and evaluated in parallel.
#[allow(clippy::too_many_arguments)]
pub fn spatial_disorder_estimate(
    family: &dyn CircuitFamily,
    rho: &StateSpec,
    o: &PauliSum,
    ell: usize,
    algorithm: Algorithm,
    samples: usize,
    seed: u64,
    oracle: &Oracle,
) -> Result<DisorderReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let circuits: Vec<Circuit> = (0..samples).map(|_| family.sample(&mut rng)).collect::<Result<_>>()?;
    let errors: Vec<f64> = circuits
        .par_iter()
        .map(|c| {
            let approx = expectation_of(&approximate_observable(c, o, ell, algorithm)?, rho)?;
            Ok((approx - oracle.exact_expectation(c, rho, o)?).powi(2))
        })
        .collect::<Result<_>>()?;
    let epsilon = algorithm_error_bound(family.base(), ell, algorithm);
    Ok(DisorderReport {
        rms: (errors.iter().sum::<f64>() / samples as f64).sqrt(),
        epsilon,
        bound: epsilon * o.pauli_l1_norm(),
        samples,
    })
}

/// `ε = ε̃ √δ`: a root-mean-square error `ε` means at most a fraction `δ` of
/// instances have error above `ε̃` (Markov's inequality on the squared error).
pub fn markov_epsilon(eps_tilde: f64, delta: f64) -> f64 {
    eps_tilde * delta.sqrt()
}

/// A uniformly random sample of `count` elements from the basis ensemble.
pub fn sample_basis_states<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<StateSpec> {
    (0..count).map(|_| StateSpec::Basis((0..n).map(|_| rng.random::<bool>()).collect())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::NoiseSpec;
    use crate::random::random_layered;

    #[test]
    fn engineered_tightness() {
        let c = Circuit::new(2, vec![], NoiseSpec::gate_based(0.0)).unwrap();
        let o = PauliSum::single("ZZ".parse().unwrap(), 0.37);
        let r =
            rms_error(&StateEnsemble::ComputationalBasis { n: 2 }, &c, &o, 1, Algorithm::LayerProp, &Oracle::default())
                .unwrap();
        assert!((r.rms - 0.37).abs() < 1e-12);
        assert!((r.bound - 0.37).abs() < 1e-12);
    }

    #[test]
    fn exact_regime_and_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = random_layered(3, 2, NoiseSpec::uniform(0.1), &mut rng);
        let o = PauliSum::single("ZXI".parse().unwrap(), 1.0);
        let e = StateEnsemble::ComputationalBasis { n: 3 };
        let exact = rms_error(&e, &c, &o, 9, Algorithm::PathSum, &Oracle::default()).unwrap();
        assert!(exact.rms < 1e-9);
        let r = rms_error(&e, &c, &o, 3, Algorithm::PathSum, &Oracle::default()).unwrap();
        assert!(r.rms <= r.bound + 1e-12);
    }

    #[test]
    fn purity_constants() {
        let e = StateEnsemble::FixedList(StateEnsemble::ComputationalBasis { n: 3 }.states().unwrap());
        assert!((e.purity_constant(4).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(StateEnsemble::Single(StateSpec::zeros(3)).purity_constant(4).unwrap(), 8.0);
        let mixed = StateSpec::mixed(2, 2.5).unwrap();
        let dense = StateEnsemble::FixedList(vec![mixed.clone()]).purity_constant(4).unwrap();
        assert!((dense - 2.5).abs() < 1e-12);
    }

    #[test]
    fn conjugation_by_pauli() {
        let c = Circuit::new(1, vec![Layer::new(vec![Gate::new(GateKind::Z, &[0])])], NoiseSpec::uniform(0.1)).unwrap();
        assert_eq!(conjugate_circuit(&c, &"I".parse().unwrap()).unwrap(), c);
        let x = conjugate_circuit(&c, &"X".parse().unwrap()).unwrap();
        let m = x.layers[0].gates[0].matrix();
        assert!(
            m.max_abs_diff(&GateKind::Z.matrix().matmul(&crate::GateMatrix::diagonal(&[(-1.0).into(), (-1.0).into()])))
                < 1e-15
        );
        assert_eq!(markov_epsilon(0.1, 0.25), 0.05);
    }
}
