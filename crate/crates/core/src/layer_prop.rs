//! Layer-by-layer truncated Heisenberg propagation.
//!
//! At every step the table is expanded through `U_t`, damped by `D_t` and cut to
//! Paulis of weight at most `ℓ`. The squared coefficients cut away at each step
//! are recorded; their sum bounds the squared Frobenius error.

use crate::circuit::{Circuit, Damping, NoiseModel};
use crate::conjugation::LayerTables;
use crate::error::{Error, Result};
use crate::merge::scatter_merge;
use crate::pauli::PauliString;
use crate::pauli_sum::PauliSum;
use crate::state::StateSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationState {
    /// Coefficients after the last processed step, all of weight ≤ ℓ.
    pub table: PauliSum,
    /// Number of unitary layers processed.
    pub layer_index: usize,
    /// Squared Frobenius mass removed at step `t = 0..=layer_index`.
    pub truncated_norms: Vec<f64>,
}

impl PropagationState {
    pub fn total_truncated(&self) -> f64 {
        self.truncated_norms.iter().sum()
    }

    /// `Σ_t sqrt(mass_t)`, a bound on `‖C†{O} − table‖_F` by the triangle inequality.
    pub fn error_bound(&self) -> f64 {
        self.truncated_norms.iter().map(|m| m.sqrt()).sum()
    }
}

fn check_model(circuit: &Circuit) -> Result<()> {
    if circuit.noise.model == NoiseModel::NonunitalRandom {
        return Err(Error::WrongNoiseModel {
            model: circuit.noise.model.to_string(),
            expected: "uniform, gate_based or readout_only".into(),
        });
    }
    Ok(())
}

fn check_ell(ell: usize) -> Result<()> {
    if ell == 0 {
        return Err(Error::InvalidArgument("ell must be at least 1".into()));
    }
    Ok(())
}

/// Damps, then splits into kept (≤ ℓ) and the removed squared mass.
fn damp_and_cut(terms: Vec<(PauliString, f64)>, damp: &Damping, ell: usize) -> (Vec<(PauliString, f64)>, f64) {
    let mut mass = 0.0;
    let kept = terms
        .into_iter()
        .filter_map(|(p, c)| {
            let c = c * damp.factor(&p);
            if p.weight() > ell {
                mass += c * c;
                None
            } else {
                Some((p, c))
            }
        })
        .collect();
    (kept, mass)
}

/// Propagates `o` through all layers.
pub fn propagate(circuit: &Circuit, o: &PauliSum, ell: usize) -> Result<PropagationState> {
    check_model(circuit)?;
    check_ell(ell)?;
    if o.num_qubits() != circuit.n {
        return Err(Error::DimensionMismatch { expected: circuit.n, found: o.num_qubits() });
    }
    let tables = LayerTables::new(circuit);
    let plan = circuit.damping_plan();
    let initial: Vec<(PauliString, f64)> = o.iter().map(|(p, c)| (p.clone(), c)).collect();
    let (mut cur, m0) = damp_and_cut(initial, &plan[0], ell);
    let mut masses = vec![m0];
    for t in 1..=circuit.depth() {
        let tables = &tables;
        let expanded = scatter_merge(&cur, |(p, c), emit| {
            for (q, a) in tables.heisenberg(t, p) {
                emit(q, c * a);
            }
        });
        let (kept, m) = damp_and_cut(expanded, &plan[t], ell);
        cur = kept;
        masses.push(m);
    }
    Ok(PropagationState {
        table: PauliSum::from_sorted_unchecked(circuit.n, cur),
        layer_index: circuit.depth(),
        truncated_norms: masses,
    })
}

/// `Σ_P c_P tr(ρP)` over the propagated table.
pub fn expectation_gate_noise(circuit: &Circuit, o: &PauliSum, rho: &StateSpec, ell: usize) -> Result<f64> {
    if rho.num_qubits() != circuit.n {
        return Err(Error::DimensionMismatch { expected: circuit.n, found: rho.num_qubits() });
    }
    let state = propagate(circuit, o, ell)?;
    let mut acc = 0.0;
    for (p, c) in state.table.iter() {
        acc += c * rho.pauli_coefficient(p)?;
    }
    Ok(acc)
}

/// Schrödinger-picture approximation of `C{ρ}` as a table of `tr(ρ̃P)/2^n`.
///
/// The order is `D_d, U_d, …, D_1, U_1, D_0`, cutting Paulis above weight `ℓ`
/// after every channel. The identity coefficient is never cut.
pub fn approximate_state(circuit: &Circuit, rho: &StateSpec, ell: usize) -> Result<PauliSum> {
    check_model(circuit)?;
    check_ell(ell)?;
    if rho.num_qubits() != circuit.n {
        return Err(Error::DimensionMismatch { expected: circuit.n, found: rho.num_qubits() });
    }
    rho.validate()?;
    let tables = LayerTables::new(circuit);
    let plan = circuit.damping_plan();
    // weight is unchanged by damping, so cutting the initial table at ℓ first is equivalent
    let initial: Vec<(PauliString, f64)> = rho.pauli_table(ell).iter().map(|(p, c)| (p.clone(), c)).collect();
    let mut cur = initial;
    for t in (1..=circuit.depth()).rev() {
        let (kept, _) = damp_and_cut(cur, &plan[t], ell);
        let tables = &tables;
        cur = scatter_merge(&kept, |(p, c), emit| {
            for (q, a) in tables.schrodinger(t, p) {
                emit(q, c * a);
            }
        });
    }
    let (kept, _) = damp_and_cut(cur, &plan[0], ell);
    Ok(PauliSum::from_sorted_unchecked(circuit.n, kept))
}
