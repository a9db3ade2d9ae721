//! Classical simulation of noisy quantum circuits by truncated Pauli propagation.
//!
//! Observables are propagated in the Heisenberg picture through a circuit of
//! depolarizing (or random spontaneous-emission) noise interleaved with depth-one
//! unitary layers. Two truncation schemes are provided: the Pauli-path sum with a
//! cap on total path weight ([`path_sum`]) and layer-by-layer propagation with a
//! cap on the weight of each Pauli ([`layer_prop`]). A dense simulator
//! ([`oracle`]) gives exact answers at small qubit counts.

pub mod circuit;
pub mod circuit_io;
pub mod conjugation;
pub mod diagnostics;
pub mod ensembles;
pub mod error;
pub mod layer_prop;
mod merge;
pub mod nonunital;
pub mod oracle;
pub mod path_sum;
pub mod pauli;
pub mod pauli_sum;
pub mod random;
pub mod sampling;
pub mod state;

pub use circuit::{Circuit, Gate, GateKind, GateMatrix, Layer, NoiseModel, NoiseSpec};
pub use error::{Error, Result};
pub use pauli::{Letter, PauliString, Phase, QubitMask};
pub use pauli_sum::PauliSum;
pub use state::StateSpec;

/// Truncation scheme for Heisenberg propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Pauli paths with total weight at most `ℓ`.
    PathSum,
    /// Layerwise propagation keeping Paulis of weight at most `ℓ`.
    LayerProp,
}

/// Truncated Heisenberg observable `Õ` for any noise model.
///
/// Random emission uses the directions derived from the circuit seed.
pub fn approximate_observable(circuit: &Circuit, o: &PauliSum, ell: usize, algorithm: Algorithm) -> Result<PauliSum> {
    if circuit.noise.model == NoiseModel::NonunitalRandom {
        let a = nonunital::EmissionAssignment::for_circuit(circuit)?;
        return match algorithm {
            Algorithm::PathSum => nonunital::approximate_observable_nonunital(circuit, o, ell, &a),
            Algorithm::LayerProp => nonunital::propagate_nonunital(circuit, o, ell, &a),
        };
    }
    match algorithm {
        Algorithm::PathSum => path_sum::approximate_observable(circuit, o, ell),
        Algorithm::LayerProp => Ok(layer_prop::propagate(circuit, o, ell)?.table),
    }
}

/// `tr(ρ Õ)` with [`approximate_observable`].
pub fn approximate_expectation(
    circuit: &Circuit,
    o: &PauliSum,
    rho: &StateSpec,
    ell: usize,
    algorithm: Algorithm,
) -> Result<f64> {
    if rho.num_qubits() != circuit.n {
        return Err(Error::DimensionMismatch { expected: circuit.n, found: rho.num_qubits() });
    }
    expectation_of(&approximate_observable(circuit, o, ell, algorithm)?, rho)
}

/// `Σ_P c_P tr(ρP)`.
pub fn expectation_of(o: &PauliSum, rho: &StateSpec) -> Result<f64> {
    let mut acc = 0.0;
    for (p, c) in o.iter() {
        acc += c * rho.pauli_coefficient(p)?;
    }
    Ok(acc)
}
