//! Random circuits, observables and states for testing and benchmarking.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::circuit::{Circuit, Gate, GateKind, GateMatrix, Layer, NoiseSpec};
use crate::pauli::{Letter, PauliString};
use crate::pauli_sum::PauliSum;
use crate::state::StateSpec;

/// Haar-random unitary: Gram–Schmidt on a complex Gaussian matrix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> GateMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| (0..dim).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect())
        .collect();
    for j in 0..dim {
        for k in 0..j {
            let proj: Complex64 = (0..dim).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..dim {
                let v = cols[k][i];
                cols[j][i] -= proj * v;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    let data = (0..dim).flat_map(|r| (0..dim).map(move |c| (r, c))).map(|(r, c)| cols[c][r]).collect();
    GateMatrix::new(dim, data).expect("square")
}

/// Brickwork of Haar two-qubit gates on a line; layer `t` starts at qubit `(t−1) mod 2`.
pub fn brickwork<R: Rng + ?Sized>(n: usize, d: usize, noise: NoiseSpec, rng: &mut R) -> Circuit {
    let layers = (1..=d)
        .map(|t| {
            let gates = ((t - 1) % 2..n.saturating_sub(1))
                .step_by(2)
                .map(|i| Gate::unitary(haar_unitary(4, rng), &[i, i + 1]))
                .collect();
            Layer::new(gates)
        })
        .collect();
    Circuit::new(n, layers, noise).expect("brickwork circuits are valid")
}

/// Random pairings per layer with Haar gates. Some pairs are left idle and some
/// leftover qubits get single-qubit gates, so gate-based noise sees idle qubits.
pub fn random_layered<R: Rng + ?Sized>(n: usize, d: usize, noise: NoiseSpec, rng: &mut R) -> Circuit {
    let layers = (0..d)
        .map(|_| {
            let mut qs: Vec<usize> = (0..n).collect();
            qs.shuffle(rng);
            let mut gates = Vec::new();
            let mut chunks = qs.chunks_exact(2);
            for pair in &mut chunks {
                if rng.random_bool(0.8) {
                    gates.push(Gate::unitary(haar_unitary(4, rng), pair));
                } else if rng.random_bool(0.5) {
                    gates.push(Gate::unitary(haar_unitary(2, rng), &pair[..1]));
                }
            }
            if let [q] = chunks.remainder() {
                if rng.random_bool(0.5) {
                    gates.push(Gate::unitary(haar_unitary(2, rng), &[*q]));
                }
            }
            Layer::new(gates)
        })
        .collect();
    Circuit::new(n, layers, noise).expect("random layered circuits are valid")
}

/// Random named gates (Clifford and T) on random pairings.
pub fn random_named<R: Rng + ?Sized>(n: usize, d: usize, noise: NoiseSpec, rng: &mut R) -> Circuit {
    let one = [GateKind::I, GateKind::X, GateKind::Y, GateKind::Z, GateKind::H, GateKind::S, GateKind::T];
    let two = [GateKind::Cnot, GateKind::Cz, GateKind::Swap];
    let layers = (0..d)
        .map(|_| {
            let mut qs: Vec<usize> = (0..n).collect();
            qs.shuffle(rng);
            let mut gates = Vec::new();
            let mut i = 0;
            while i < n {
                if i + 1 < n && rng.random_bool(0.5) {
                    gates.push(Gate::new(two[rng.random_range(0..two.len())].clone(), &qs[i..i + 2]));
                    i += 2;
                } else {
                    gates.push(Gate::new(one[rng.random_range(0..one.len())].clone(), &qs[i..i + 1]));
                    i += 1;
                }
            }
            Layer::new(gates)
        })
        .collect();
    Circuit::new(n, layers, noise).expect("random named circuits are valid")
}

pub fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliString {
    PauliString::from_sites(n, (0..n).map(|q| (q, Letter::from_code(rng.random_range(0..4)))))
}

/// Random Pauli with exactly `w` non-identity sites.
pub fn random_pauli_of_weight<R: Rng + ?Sized>(n: usize, w: usize, rng: &mut R) -> PauliString {
    let mut qs: Vec<usize> = (0..n).collect();
    qs.shuffle(rng);
    PauliString::from_sites(n, qs[..w].iter().map(|&q| (q, Letter::from_code(rng.random_range(1..4)))))
}

/// Sum of up to `terms` random Paulis with Gaussian coefficients.
pub fn random_pauli_sum<R: Rng + ?Sized>(n: usize, terms: usize, rng: &mut R) -> PauliSum {
    let entries: Vec<(PauliString, f64)> =
        (0..terms).map(|_| (random_pauli(n, rng), rng.sample(StandardNormal))).collect();
    PauliSum::from_terms(n, entries).expect("dimensions fixed")
}

/// Product of random single-qubit mixed states (Bloch vectors inside the ball).
pub fn random_product_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StateSpec {
    let factors = (0..n)
        .map(|_| {
            let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let r: f64 = rng.random::<f64>().cbrt() / norm;
            let (x, y, z) = (v[0] * r, v[1] * r, v[2] * r);
            [
                [Complex64::new((1.0 + z) / 2.0, 0.0), Complex64::new(x / 2.0, -y / 2.0)],
                [Complex64::new(x / 2.0, y / 2.0), Complex64::new((1.0 - z) / 2.0, 0.0)],
            ]
        })
        .collect();
    StateSpec::product(factors).expect("Bloch vectors inside the unit ball")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [2, 4] {
            assert!(haar_unitary(dim, &mut rng).is_unitary(1e-12));
        }
    }

    #[test]
    fn generators_build_valid_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..6 {
            assert!(brickwork(n, 3, NoiseSpec::uniform(0.1), &mut rng).validate().is_empty());
            assert!(random_layered(n, 3, NoiseSpec::gate_based(0.1), &mut rng).validate().is_empty());
            assert!(random_named(n, 3, NoiseSpec::uniform(0.1), &mut rng).validate().is_empty());
            assert!(random_product_state(n, &mut rng).validate().is_ok());
            assert_eq!(random_pauli_of_weight(n, n / 2, &mut rng).weight(), n / 2);
        }
    }
}
