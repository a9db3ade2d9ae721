//! Pauli-path sums truncated at total path weight `ℓ`.
//!
//! A path `(P_0, …, P_d)` contributes `c_{P_0} · Π_t a^{(t)}_{P_{t−1} P_t} · e^{−γ Σ_t w[P_t]} · tr(ρ P_d)`.
//! [`enumerate_paths`] walks paths one by one in a fixed depth-first order. The
//! expectation routines group paths that share `(P_t, Σ_{s≤t} w[P_s])`, which sums
//! exactly the same set of paths with far less work.

use std::ops::AddAssign;

use rayon::prelude::*;

use crate::circuit::{Circuit, Damping, NoiseModel};
use crate::conjugation::LayerTables;
use crate::error::{Error, Result};
use crate::merge::scatter_merge;
use crate::pauli::PauliString;
use crate::pauli_sum::PauliSum;
use crate::state::StateSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct PauliPath {
    /// `P_0` (next to the observable) through `P_d`.
    pub paulis: Vec<PauliString>,
    /// Coefficient of `P_0` in the observable.
    pub coefficient: f64,
    /// `Π_t a^{(t)}_{P_{t−1} P_t}`.
    pub amplitude: f64,
    pub total_weight: usize,
}

fn check(circuit: &Circuit, o: &PauliSum) -> Result<()> {
    if o.num_qubits() != circuit.n {
        return Err(Error::DimensionMismatch { expected: circuit.n, found: o.num_qubits() });
    }
    Ok(())
}

fn check_model(circuit: &Circuit) -> Result<()> {
    match circuit.noise.model {
        NoiseModel::Uniform | NoiseModel::ReadoutOnly => Ok(()),
        other => Err(Error::WrongNoiseModel { model: other.to_string(), expected: "uniform or readout_only".into() }),
    }
}

/// Every remaining layer adds at least one to the weight of a non-identity path.
fn lower_bound(p: &PauliString, remaining: usize) -> usize {
    if p.is_identity() {
        0
    } else {
        remaining
    }
}

struct Frame {
    targets: Vec<(PauliString, f64)>,
    next: usize,
}

/// Depth-first stream of all paths with total weight at most `ℓ`.
///
/// Branches are visited by descending `|amplitude|`, ties in canonical Pauli order.
pub struct PathIter<'a> {
    depth: usize,
    ell: usize,
    tables: LayerTables,
    starts: Vec<(&'a PauliString, f64)>,
    start_idx: usize,
    paulis: Vec<PauliString>,
    amps: Vec<f64>,
    weights: Vec<usize>,
    coefficient: f64,
    frames: Vec<Frame>,
}

impl PathIter<'_> {
    fn children(&self, t: usize, p: &PauliString, acc: usize) -> Frame {
        let mut targets: Vec<(PauliString, f64)> = self
            .tables
            .heisenberg(t, p)
            .into_iter()
            .filter(|(q, _)| acc + q.weight() + lower_bound(q, self.depth - t) <= self.ell)
            .collect();
        targets.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0)));
        Frame { targets, next: 0 }
    }

    fn emit(&self) -> PauliPath {
        PauliPath {
            paulis: self.paulis.clone(),
            coefficient: self.coefficient,
            amplitude: *self.amps.last().expect("non-empty path"),
            total_weight: *self.weights.last().expect("non-empty path"),
        }
    }
}

impl Iterator for PathIter<'_> {
    type Item = PauliPath;

    fn next(&mut self) -> Option<PauliPath> {
        loop {
            if self.paulis.is_empty() {
                let (p0, c) = *self.starts.get(self.start_idx)?;
                self.start_idx += 1;
                let w0 = p0.weight();
                if w0 + lower_bound(p0, self.depth) > self.ell {
                    continue;
                }
                self.paulis.push(p0.clone());
                self.amps.push(1.0);
                self.weights.push(w0);
                self.coefficient = c;
                if self.depth == 0 {
                    let path = self.emit();
                    self.paulis.clear();
                    self.amps.clear();
                    self.weights.clear();
                    return Some(path);
                }
                let f = self.children(1, p0, w0);
                self.frames.push(f);
                continue;
            }
            let frame = self.frames.last_mut().expect("frame per open node");
            if frame.next >= frame.targets.len() {
                self.frames.pop();
                self.paulis.pop();
                self.amps.pop();
                self.weights.pop();
                continue;
            }
            let (q, a) = frame.targets[frame.next].clone();
            frame.next += 1;
            let t = self.paulis.len();
            let acc = self.weights.last().unwrap() + q.weight();
            let amp = self.amps.last().unwrap() * a;
            if t == self.depth {
                self.paulis.push(q);
                self.amps.push(amp);
                self.weights.push(acc);
                let path = self.emit();
                self.paulis.pop();
                self.amps.pop();
                self.weights.pop();
                return Some(path);
            }
            let f = self.children(t + 1, &q, acc);
            self.paulis.push(q);
            self.amps.push(amp);
            self.weights.push(acc);
            self.frames.push(f);
        }
    }
}

/// All Pauli paths from the terms of `o` with `Σ_t w[P_t] ≤ ℓ`.
pub fn enumerate_paths<'a>(circuit: &Circuit, o: &'a PauliSum, ell: usize) -> Result<PathIter<'a>> {
    check(circuit, o)?;
    Ok(PathIter {
        depth: circuit.depth(),
        ell,
        tables: LayerTables::new(circuit),
        starts: o.iter().collect(),
        start_idx: 0,
        paulis: Vec::new(),
        amps: Vec::new(),
        weights: Vec::new(),
        coefficient: 0.0,
        frames: Vec::new(),
    })
}

/// Noise factor of a path, `Π_t e^{−γ_t w_t[P_t]}`.
pub fn path_damping(circuit: &Circuit, path: &PauliPath) -> f64 {
    path.paulis.iter().enumerate().map(|(t, p)| circuit.damping(t).factor(p)).product()
}

/// Sum over enumerated paths, evaluated one path at a time.
pub fn expectation_uniform_enumerated(circuit: &Circuit, o: &PauliSum, rho: &StateSpec, ell: usize) -> Result<f64> {
    check_model(circuit)?;
    check(circuit, o)?;
    let starts: Vec<PauliSum> = o.iter().map(|(p, c)| PauliSum::single(p.clone(), c)).collect();
    let parts: Vec<Result<f64>> = starts
        .par_iter()
        .map(|single| {
            let mut acc = 0.0;
            for path in enumerate_paths(circuit, single, ell)? {
                let last = path.paulis.last().expect("non-empty");
                acc +=
                    path.coefficient * path.amplitude * path_damping(circuit, &path) * rho.pauli_coefficient(last)?;
            }
            Ok(acc)
        })
        .collect();
    parts.into_iter().sum()
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    coef: f64,
    paths: u128,
}

impl AddAssign for Acc {
    fn add_assign(&mut self, o: Acc) {
        self.coef += o.coef;
        self.paths += o.paths;
    }
}

type State = ((PauliString, usize), Acc);

/// Final `(P_d, total weight)` states of all surviving paths.
fn run_paths(circuit: &Circuit, o: &PauliSum, ell: usize) -> Vec<State> {
    let d = circuit.depth();
    let tables = LayerTables::new(circuit);
    let plan: Vec<Damping> = circuit.damping_plan();
    let mut cur: Vec<State> = o
        .iter()
        .filter(|(p, _)| p.weight() + lower_bound(p, d) <= ell)
        .map(|(p, c)| ((p.clone(), p.weight()), Acc { coef: c * plan[0].factor(p), paths: 1 }))
        .collect();
    for t in 1..=d {
        let damp = &plan[t];
        let tables = &tables;
        cur = scatter_merge(&cur, |((p, w), acc), emit| {
            for (q, a) in tables.heisenberg(t, p) {
                let w2 = w + q.weight();
                if w2 + lower_bound(&q, d - t) <= ell {
                    let f = damp.factor(&q);
                    emit((q, w2), Acc { coef: acc.coef * a * f, paths: acc.paths });
                }
            }
        });
    }
    cur
}

/// `Õ = Σ_{paths} c · amplitude · damping · P_d` (the truncated Heisenberg observable).
pub fn approximate_observable(circuit: &Circuit, o: &PauliSum, ell: usize) -> Result<PauliSum> {
    check_model(circuit)?;
    check(circuit, o)?;
    let states = run_paths(circuit, o, ell);
    let merged = scatter_merge(&states, |((p, _), acc), emit| emit(p.clone(), acc.coef));
    Ok(PauliSum::from_sorted_unchecked(circuit.n, merged))
}

/// `Õ(ℓ)` for every `ℓ = 0..=ell_max` from one pass.
pub fn approximate_observable_by_weight(circuit: &Circuit, o: &PauliSum, ell_max: usize) -> Result<Vec<PauliSum>> {
    check_model(circuit)?;
    check(circuit, o)?;
    let states = run_paths(circuit, o, ell_max);
    (0..=ell_max)
        .map(|ell| {
            let merged = scatter_merge(&states, |((p, w), acc), emit| {
                if *w <= ell {
                    emit(p.clone(), acc.coef)
                }
            });
            Ok(PauliSum::from_sorted_unchecked(circuit.n, merged))
        })
        .collect()
}

/// Σ over paths with total weight ≤ ℓ of the damped contribution times `tr(ρ P_d)`.
pub fn expectation_uniform(circuit: &Circuit, o: &PauliSum, rho: &StateSpec, ell: usize) -> Result<f64> {
    if rho.num_qubits() != circuit.n {
        return Err(Error::DimensionMismatch { expected: circuit.n, found: rho.num_qubits() });
    }
    let approx = approximate_observable(circuit, o, ell)?;
    let mut acc = 0.0;
    for (p, c) in approx.iter() {
        acc += c * rho.pauli_coefficient(p)?;
    }
    Ok(acc)
}

/// Number of paths with total weight ≤ ℓ (nonzero amplitude), counted without enumerating them.
pub fn count_paths(circuit: &Circuit, o: &PauliSum, ell: usize) -> Result<u128> {
    check(circuit, o)?;
    Ok(run_paths(circuit, o, ell).iter().map(|(_, a)| a.paths).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, GateKind, Layer, NoiseSpec};

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_damped_path() {
        let c = Circuit::new(1, vec![], NoiseSpec::uniform(0.1)).unwrap();
        let o = PauliSum::single(p("Z"), 1.0);
        let paths: Vec<_> = enumerate_paths(&c, &o, 1).unwrap().collect();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].amplitude, 1.0);
        let v = expectation_uniform(&c, &o, &StateSpec::zeros(1), 1).unwrap();
        assert!((v - (-0.1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn t_gate_paths() {
        let c = Circuit::new(1, vec![Layer::new(vec![Gate::new(GateKind::T, &[0])])], NoiseSpec::uniform(0.0)).unwrap();
        let o = PauliSum::single(p("X"), 1.0);
        let paths: Vec<_> = enumerate_paths(&c, &o, 2).unwrap().collect();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0].paulis, vec![p("X"), p("X")]);
        assert_eq!(paths[1].paulis, vec![p("X"), p("Y")]);
        for path in &paths {
            assert!((path.amplitude.abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
            assert_eq!(path.total_weight, 2);
        }
        assert_eq!(enumerate_paths(&c, &o, 1).unwrap().count(), 0);
        assert_eq!(count_paths(&c, &o, 2).unwrap(), 2);
    }

    #[test]
    fn identity_is_undamped() {
        let c = Circuit::new(
            2,
            vec![Layer::new(vec![Gate::new(GateKind::Cnot, &[0, 1])]), Layer::new(vec![Gate::new(GateKind::H, &[1])])],
            NoiseSpec::uniform(0.7),
        )
        .unwrap();
        let o = PauliSum::identity(2);
        for ell in 0..4 {
            assert_eq!(expectation_uniform(&c, &o, &StateSpec::zeros(2), ell).unwrap(), 1.0);
        }
    }

    #[test]
    fn gate_noise_rejected() {
        let c = Circuit::new(1, vec![], NoiseSpec::gate_based(0.1)).unwrap();
        let o = PauliSum::single(p("Z"), 1.0);
        assert!(matches!(expectation_uniform(&c, &o, &StateSpec::zeros(1), 2), Err(Error::WrongNoiseModel { .. })));
    }
}
