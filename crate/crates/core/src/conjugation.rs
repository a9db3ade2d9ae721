//! Transition amplitudes `a_PQ = tr(Q U† P U)/2^k` for gates and layers.
//!
//! Local Paulis are `PauliString`s on the gate's qubits, in the gate's qubit order.
//! Named Clifford gates are handled by composing generator images; every other
//! gate goes through dense conjugation.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, GateKind, GateMatrix, Layer};
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, Phase};

/// Amplitudes below this are dropped from rows.
pub const AMPLITUDE_CUTOFF: f64 = 1e-14;

/// Expansion of one local source Pauli.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRow {
    pub source: PauliString,
    pub targets: Vec<(PauliString, f64)>,
}

impl TransitionRow {
    fn new(source: PauliString, mut targets: Vec<(PauliString, f64)>) -> Self {
        targets.retain(|(_, a)| a.abs() >= AMPLITUDE_CUTOFF);
        targets.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0)));
        TransitionRow { source, targets }
    }

    pub fn norm_sq(&self) -> f64 {
        self.targets.iter().map(|(_, a)| a * a).sum()
    }
}

fn local_index(p: &PauliString) -> usize {
    (0..p.num_qubits()).fold(0, |acc, q| acc * 4 + p.letter(q).code() as usize)
}

fn local_from_index(arity: usize, mut idx: usize) -> PauliString {
    let mut p = PauliString::identity(arity);
    for q in (0..arity).rev() {
        p.set(q, Letter::from_code((idx % 4) as u8));
        idx /= 4;
    }
    p
}

fn letter_matrix(l: Letter) -> GateMatrix {
    match l {
        Letter::I => GateKind::I.matrix(),
        Letter::X => GateKind::X.matrix(),
        Letter::Y => GateKind::Y.matrix(),
        Letter::Z => GateKind::Z.matrix(),
    }
}

/// Dense matrix of a local Pauli, first qubit most significant.
pub fn local_pauli_matrix(p: &PauliString) -> GateMatrix {
    (1..p.num_qubits()).fold(letter_matrix(p.letter(0)), |m, q| m.kron(&letter_matrix(p.letter(q))))
}

fn check_local(g: &Gate, p: &PauliString) -> Result<usize> {
    let arity = g.kind.arity().ok_or_else(|| Error::InvalidArgument("gate matrix must be 2x2 or 4x4".into()))?;
    if p.num_qubits() != arity {
        return Err(Error::DimensionMismatch { expected: arity, found: p.num_qubits() });
    }
    Ok(arity)
}

/// Heisenberg row `U† P U` by dense conjugation.
pub fn dense_row(u: &GateMatrix, p: &PauliString) -> TransitionRow {
    let arity = p.num_qubits();
    let dim = u.dim() as f64;
    let m = u.adjoint().matmul(&local_pauli_matrix(p)).matmul(u);
    let targets = (0..4usize.pow(arity as u32))
        .map(|i| {
            let q = local_from_index(arity, i);
            let qm = local_pauli_matrix(&q);
            // tr(Q M) with both Hermitian is real
            let d = u.dim();
            let mut tr = Complex64::new(0.0, 0.0);
            for r in 0..d {
                for k in 0..d {
                    tr += qm.get(r, k) * m.get(k, r);
                }
            }
            (q, tr.re / dim)
        })
        .collect();
    TransitionRow::new(p.clone(), targets)
}

type Image = (Phase, PauliString);

/// Heisenberg images of `X_i` and `Z_i` for each qubit of a named Clifford gate.
fn generator_images(kind: &GateKind) -> Option<Vec<(Image, Image)>> {
    let table: &[(&str, &str)] = match kind {
        GateKind::I => &[("X", "Z")],
        GateKind::X => &[("X", "-Z")],
        GateKind::Y => &[("-X", "-Z")],
        GateKind::Z => &[("-X", "Z")],
        GateKind::H => &[("Z", "X")],
        GateKind::S => &[("-Y", "Z")],
        GateKind::Cnot => &[("XX", "ZI"), ("IX", "ZZ")],
        GateKind::Cz => &[("XZ", "ZI"), ("ZX", "IZ")],
        GateKind::Swap => &[("IX", "IZ"), ("XI", "ZI")],
        _ => return None,
    };
    let image = |s: &str| match s.strip_prefix('-') {
        Some(body) => (Phase::MINUS_ONE, body.parse().expect("literal")),
        None => (Phase::ONE, s.parse().expect("literal")),
    };
    Some(table.iter().map(|(x, z)| (image(x), image(z))).collect())
}

/// Heisenberg row for a named Clifford gate, by composing generator images.
pub fn clifford_row(kind: &GateKind, p: &PauliString) -> Option<TransitionRow> {
    let images = generator_images(kind)?;
    let arity = images.len();
    if p.num_qubits() != arity {
        return None;
    }
    // P = i^{#Y} Π_i X_i^{x_i} Π_i Z_i^{z_i}
    let mut phase = Phase::from_power(p.y_count() as u32);
    let mut acc = PauliString::identity(arity);
    let mut mul = |(s, body): &Image| {
        let (ph, r) = acc.multiply(body).expect("same arity");
        phase = phase * *s * ph;
        acc = r;
    };
    for (i, (xi, _)) in images.iter().enumerate() {
        if matches!(p.letter(i), Letter::X | Letter::Y) {
            mul(xi);
        }
    }
    for (i, (_, zi)) in images.iter().enumerate() {
        if matches!(p.letter(i), Letter::Z | Letter::Y) {
            mul(zi);
        }
    }
    let sign = phase.real_sign().expect("Clifford images of Hermitian Paulis are Hermitian");
    Some(TransitionRow::new(p.clone(), vec![(acc, sign)]))
}

/// Expansion of `U_g† P U_g` in the local Pauli basis.
pub fn conjugate_through_gate(g: &Gate, p_local: &PauliString) -> Result<TransitionRow> {
    check_local(g, p_local)?;
    if p_local.is_identity() {
        return Ok(TransitionRow { source: p_local.clone(), targets: vec![(p_local.clone(), 1.0)] });
    }
    if let Some(row) = clifford_row(&g.kind, p_local) {
        return Ok(row);
    }
    Ok(dense_row(&g.matrix(), p_local))
}

/// All `4^k` rows of one gate, indexed by local Pauli index.
#[derive(Debug, Clone)]
pub struct GateTable {
    arity: usize,
    rows: Vec<Vec<(u8, f64)>>,
}

impl GateTable {
    pub fn heisenberg(g: &Gate) -> Result<Self> {
        let arity = g.kind.arity().ok_or_else(|| Error::InvalidArgument("gate matrix must be 2x2 or 4x4".into()))?;
        let rows = (0..4usize.pow(arity as u32))
            .map(|i| {
                let row = conjugate_through_gate(g, &local_from_index(arity, i))?;
                Ok(row.targets.iter().map(|(q, a)| (local_index(q) as u8, *a)).collect())
            })
            .collect::<Result<_>>()?;
        Ok(GateTable { arity, rows })
    }

    /// Rows of `U P U†`: the transpose of the real orthogonal Heisenberg matrix.
    pub fn transposed(&self) -> Self {
        let mut rows: Vec<Vec<(u8, f64)>> = vec![Vec::new(); self.rows.len()];
        for (src, row) in self.rows.iter().enumerate() {
            for &(dst, a) in row {
                rows[dst as usize].push((src as u8, a));
            }
        }
        for r in &mut rows {
            r.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        }
        GateTable { arity: self.arity, rows }
    }

    pub fn row(&self, p_local: &PauliString) -> TransitionRow {
        let targets = self.rows[local_index(p_local)]
            .iter()
            .map(|&(q, a)| (local_from_index(self.arity, q as usize), a))
            .collect();
        TransitionRow { source: p_local.clone(), targets }
    }
}

/// Expands `P` through every gate of a layer. `row(g, idx)` supplies the local row.
fn expand_layer<'a, F>(gates: &[Gate], p: &PauliString, row: F) -> Vec<(PauliString, f64)>
where
    F: Fn(usize) -> &'a GateTable,
{
    let mut out = vec![(p.clone(), 1.0)];
    for (gi, g) in gates.iter().enumerate() {
        let mut idx = 0usize;
        for &q in &g.qubits {
            idx = idx * 4 + p.letter(q).code() as usize;
        }
        if idx == 0 {
            continue;
        }
        let table = row(gi);
        let targets = &table.rows[idx];
        let write = |dst: &mut PauliString, code: u8| {
            let k = g.qubits.len();
            for (j, &q) in g.qubits.iter().enumerate() {
                dst.set(q, Letter::from_code(code >> (2 * (k - 1 - j)) & 3));
            }
        };
        if targets.len() == 1 {
            let (code, a) = targets[0];
            for (dst, amp) in &mut out {
                write(dst, code);
                *amp *= a;
            }
        } else {
            let mut next = Vec::with_capacity(out.len() * targets.len());
            for (dst, amp) in &out {
                for &(code, a) in targets {
                    let mut q = dst.clone();
                    write(&mut q, code);
                    next.push((q, amp * a));
                }
            }
            out = next;
        }
    }
    out
}

/// `U_t† P U_t` expanded over the Pauli basis, noise not included.
pub fn layer_transition(layer: &Layer, p: &PauliString) -> Result<Vec<(PauliString, f64)>> {
    for g in &layer.gates {
        if let Some(&q) = g.qubits.iter().find(|&&q| q >= p.num_qubits()) {
            return Err(Error::DimensionMismatch { expected: q + 1, found: p.num_qubits() });
        }
    }
    let tables = layer.gates.iter().map(GateTable::heisenberg).collect::<Result<Vec<_>>>()?;
    Ok(expand_layer(&layer.gates, p, |i| &tables[i]))
}

struct CachedLayer {
    gates: Vec<Gate>,
    heisenberg: Vec<OnceLock<GateTable>>,
    schrodinger: Vec<OnceLock<GateTable>>,
}

/// Per-gate transition tables for a circuit, filled on first use.
///
/// Safe to share between threads; every table is built at most once.
pub struct LayerTables {
    layers: Vec<CachedLayer>,
}

impl LayerTables {
    /// The circuit must be valid.
    pub fn new(circuit: &Circuit) -> Self {
        LayerTables {
            layers: circuit
                .layers
                .iter()
                .map(|l| CachedLayer {
                    gates: l.gates.clone(),
                    heisenberg: l.gates.iter().map(|_| OnceLock::new()).collect(),
                    schrodinger: l.gates.iter().map(|_| OnceLock::new()).collect(),
                })
                .collect(),
        }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    fn heis_table(&self, t: usize, g: usize) -> &GateTable {
        let l = &self.layers[t - 1];
        l.heisenberg[g].get_or_init(|| GateTable::heisenberg(&l.gates[g]).expect("validated circuit"))
    }

    /// `U_t† P U_t` for `t = 1..=d`.
    pub fn heisenberg(&self, t: usize, p: &PauliString) -> Vec<(PauliString, f64)> {
        expand_layer(&self.layers[t - 1].gates, p, |g| self.heis_table(t, g))
    }

    /// `U_t P U_t†` for `t = 1..=d`.
    pub fn schrodinger(&self, t: usize, p: &PauliString) -> Vec<(PauliString, f64)> {
        let l = &self.layers[t - 1];
        expand_layer(&l.gates, p, |g| l.schrodinger[g].get_or_init(|| self.heis_table(t, g).transposed()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn g(kind: GateKind, q: &[usize]) -> Gate {
        Gate::new(kind, q)
    }

    #[test]
    fn single_gate_rows() {
        let r = conjugate_through_gate(&g(GateKind::H, &[0]), &p("Z")).unwrap();
        assert_eq!(r.targets, vec![(p("X"), 1.0)]);
        let r = conjugate_through_gate(&g(GateKind::Cnot, &[0, 1]), &p("XI")).unwrap();
        assert_eq!(r.targets, vec![(p("XX"), 1.0)]);
        // Heisenberg picture: T† X T = (X − Y)/√2
        let r = conjugate_through_gate(&g(GateKind::T, &[0]), &p("X")).unwrap();
        assert_eq!(r.targets.len(), 2);
        assert_eq!(r.targets[0].0, p("X"));
        assert!((r.targets[0].1 - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(r.targets[1].0, p("Y"));
        assert!((r.targets[1].1 + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn lookup_matches_dense() {
        for name in ["I", "X", "Y", "Z", "H", "S", "CNOT", "CZ", "SWAP"] {
            let kind = GateKind::from_name(name).unwrap();
            let arity = kind.arity().unwrap();
            for i in 1..4usize.pow(arity as u32) {
                let src = local_from_index(arity, i);
                let fast = clifford_row(&kind, &src).unwrap();
                let slow = dense_row(&kind.matrix(), &src);
                assert_eq!(fast.targets.len(), 1, "{name} {src}");
                assert_eq!(slow.targets.len(), 1, "{name} {src}");
                assert_eq!(fast.targets[0].0, slow.targets[0].0, "{name} {src}");
                assert!((fast.targets[0].1 - slow.targets[0].1).abs() < 1e-12, "{name} {src}");
            }
        }
    }

    #[test]
    fn layer_rows() {
        let layer = Layer::new(vec![g(GateKind::H, &[0])]);
        assert_eq!(layer_transition(&layer, &p("ZZ")).unwrap(), vec![(p("XZ"), 1.0)]);
        let layer = Layer::new(vec![g(GateKind::Cnot, &[0, 1]), g(GateKind::H, &[2])]);
        assert_eq!(layer_transition(&layer, &p("XIZ")).unwrap(), vec![(p("XXX"), 1.0)]);
        let layer = Layer::new(vec![g(GateKind::T, &[0])]);
        let out = layer_transition(&layer, &p("XZ")).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].0, p("XZ"));
        assert_eq!(out[1].0, p("YZ"));
        assert!((out[0].1 - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((out[1].1 + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn reversed_qubit_order() {
        // control is qubit 1: X on the control spreads to qubit 0
        let layer = Layer::new(vec![g(GateKind::Cnot, &[1, 0])]);
        assert_eq!(layer_transition(&layer, &p("IX")).unwrap(), vec![(p("XX"), 1.0)]);
        assert_eq!(layer_transition(&layer, &p("ZI")).unwrap(), vec![(p("ZZ"), 1.0)]);
    }

    #[test]
    fn local_dimension_checked() {
        assert!(conjugate_through_gate(&g(GateKind::H, &[0]), &p("XX")).is_err());
    }
}
