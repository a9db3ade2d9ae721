//! Circuits `C{ρ} = D_0{U_1 D_1{… U_d D_d{ρ} U_d† …} U_1†}`.
//!
//! `layers[0]` is `U_1`, the layer next to the measurement, so the stored order
//! is the reverse of execution order. `D_0` is read-out noise.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, QubitMask};

/// Tolerance for `U†U = 1`, elementwise.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Largest emission rate for which the contraction argument holds.
pub const GAMMA_S_MAX: f64 = 4.0 / 7.0;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl GateMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "matrix of dimension {dim} needs {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(GateMatrix { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        GateMatrix { dim, data }
    }

    pub fn diagonal(d: &[Complex64]) -> Self {
        let mut m = Self::identity(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = self.clone();
        for r in 0..d {
            for c in 0..d {
                out.data[r * d + c] = self.data[c * d + r].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    data[r * d + c] += a * other.data[k * d + c];
                }
            }
        }
        GateMatrix { dim: d, data }
    }

    /// Kronecker product with `self` on the more significant factor.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let d = a * b;
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for r1 in 0..a {
            for c1 in 0..a {
                let x = self.data[r1 * a + c1];
                for r2 in 0..b {
                    for c2 in 0..b {
                        data[(r1 * b + r2) * d + c1 * b + c2] = x * other.data[r2 * b + c2];
                    }
                }
            }
        }
        GateMatrix { dim: d, data }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            && self.adjoint().matmul(self).max_abs_diff(&Self::identity(self.dim)) <= tol
    }
}

/// Gate kinds. Named gates have fixed matrices; `Unitary` carries its own.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    S,
    T,
    Cnot,
    Cz,
    Swap,
    Unitary(GateMatrix),
}

impl GateKind {
    pub fn from_name(name: &str) -> Option<GateKind> {
        Some(match name {
            "I" => GateKind::I,
            "X" => GateKind::X,
            "Y" => GateKind::Y,
            "Z" => GateKind::Z,
            "H" => GateKind::H,
            "S" => GateKind::S,
            "T" => GateKind::T,
            "CNOT" | "CX" => GateKind::Cnot,
            "CZ" => GateKind::Cz,
            "SWAP" => GateKind::Swap,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::I => "I",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::T => "T",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Swap => "SWAP",
            GateKind::Unitary(_) => "unitary",
        }
    }

    /// Number of qubits the gate acts on, or `None` for a matrix of bad size.
    pub fn arity(&self) -> Option<usize> {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Swap => Some(2),
            GateKind::Unitary(m) => match m.dim() {
                2 => Some(1),
                4 => Some(2),
                _ => None,
            },
            _ => Some(1),
        }
    }

    pub fn is_named_clifford(&self) -> bool {
        !matches!(self, GateKind::T | GateKind::Unitary(_))
    }

    pub fn matrix(&self) -> GateMatrix {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let real = |d: usize, v: &[f64]| GateMatrix::from_real(d, v).expect("fixed size");
        match self {
            GateKind::I => GateMatrix::identity(2),
            GateKind::X => real(2, &[0.0, 1.0, 1.0, 0.0]),
            GateKind::Y => GateMatrix::new(2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap(),
            GateKind::Z => real(2, &[1.0, 0.0, 0.0, -1.0]),
            GateKind::H => real(2, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2]),
            GateKind::S => GateMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 1.0)]),
            GateKind::T => GateMatrix::diagonal(&[c(1.0, 0.0), c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)]),
            GateKind::Cnot => real(4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.]),
            GateKind::Cz => real(4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1., 0., 0., 0., 0., -1.]),
            GateKind::Swap => real(4, &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.]),
            GateKind::Unitary(m) => m.clone(),
        }
    }
}

/// A gate on one or two qubits; the first listed qubit is the most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize]) -> Self {
        Gate { kind, qubits: qubits.to_vec() }
    }

    pub fn unitary(matrix: GateMatrix, qubits: &[usize]) -> Self {
        Gate::new(GateKind::Unitary(matrix), qubits)
    }

    pub fn matrix(&self) -> GateMatrix {
        self.kind.matrix()
    }

    /// Identity gates carry no gate-based noise.
    pub fn is_identity(&self) -> bool {
        matches!(self.kind, GateKind::I)
    }
}

/// One depth-1 unitary `U_t`: gates on pairwise disjoint qubits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Layer {
    pub gates: Vec<Gate>,
}

impl Layer {
    pub fn new(gates: Vec<Gate>) -> Self {
        Layer { gates }
    }

    /// Qubits touched by non-identity gates.
    pub fn noisy_mask(&self, n: usize) -> QubitMask {
        QubitMask::from_qubits(n, self.gates.iter().filter(|g| !g.is_identity()).flat_map(|g| g.qubits.iter().copied()))
    }

    /// `w_{U_t}[P]`: support of `P` on qubits acted on by non-identity gates.
    pub fn gate_weight(&self, p: &PauliString) -> usize {
        p.weight_on(&self.noisy_mask(p.num_qubits()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    Uniform,
    GateBased,
    ReadoutOnly,
    NonunitalRandom,
}

impl NoiseModel {
    pub fn name(self) -> &'static str {
        match self {
            NoiseModel::Uniform => "uniform",
            NoiseModel::GateBased => "gate_based",
            NoiseModel::ReadoutOnly => "readout_only",
            NoiseModel::NonunitalRandom => "nonunital_random",
        }
    }

    pub fn is_unital(self) -> bool {
        self != NoiseModel::NonunitalRandom
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    /// Depolarizing rate; each affected qubit damps non-identity letters by `e^{-γ}`.
    pub gamma: f64,
    /// Emission rate for `nonunital_random`.
    pub gamma_s: Option<f64>,
    /// Seed for emission directions.
    pub seed: Option<u64>,
}

impl NoiseSpec {
    fn unital(model: NoiseModel, gamma: f64) -> Self {
        NoiseSpec { model, gamma, gamma_s: None, seed: None }
    }

    pub fn uniform(gamma: f64) -> Self {
        Self::unital(NoiseModel::Uniform, gamma)
    }

    pub fn gate_based(gamma: f64) -> Self {
        Self::unital(NoiseModel::GateBased, gamma)
    }

    pub fn readout_only(gamma: f64) -> Self {
        Self::unital(NoiseModel::ReadoutOnly, gamma)
    }

    pub fn nonunital(gamma_s: f64, seed: u64) -> Self {
        NoiseSpec { model: NoiseModel::NonunitalRandom, gamma: 0.0, gamma_s: Some(gamma_s), seed: Some(seed) }
    }

    /// Depolarizing rate of `D` in the split `A† = Ã†∘D`, `γ = −ln(1 − γ_s/2)`.
    /// For unital models this is `gamma`.
    pub fn effective_gamma(&self) -> f64 {
        match self.model {
            NoiseModel::NonunitalRandom => -(1.0 - self.gamma_s.unwrap_or(0.0) / 2.0).ln(),
            _ => self.gamma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    NegativeNoiseRate,
    NonFiniteNoiseRate,
    GammaSAboveLimit,
    MissingGammaS,
    DuplicateQubit,
    QubitOutOfRange { qubit: usize },
    LayerOverlap { qubit: usize },
    NonUnitary,
    WrongArity { found: usize },
    BadMatrixShape { dim: usize },
}

/// A broken invariant, with 1-based layer index `t` where relevant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub layer: Option<usize>,
    pub gate: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::NegativeNoiseRate => write!(f, "negative noise rate")?,
            ViolationKind::NonFiniteNoiseRate => write!(f, "non-finite noise rate")?,
            ViolationKind::GammaSAboveLimit => write!(f, "gamma_s > 4/7")?,
            ViolationKind::MissingGammaS => write!(f, "nonunital_random needs gamma_s")?,
            ViolationKind::DuplicateQubit => write!(f, "duplicate qubit in gate")?,
            ViolationKind::QubitOutOfRange { qubit } => write!(f, "qubit {qubit} out of range")?,
            ViolationKind::LayerOverlap { qubit } => write!(f, "layer overlap on qubit {qubit}")?,
            ViolationKind::NonUnitary => write!(f, "non-unitary gate")?,
            ViolationKind::WrongArity { found } => write!(f, "wrong number of qubits ({found}) for gate")?,
            ViolationKind::BadMatrixShape { dim } => write!(f, "matrix dimension {dim} is not 2 or 4")?,
        }
        if let Some(t) = self.layer {
            write!(f, " at layer {t}")?;
        }
        if let Some(g) = self.gate {
            write!(f, " gate {g}")?;
        }
        Ok(())
    }
}

/// Depolarizing damping applied at one Heisenberg step: rate and affected qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Damping {
    pub rate: f64,
    /// `None` means every qubit.
    pub mask: Option<QubitMask>,
}

impl Damping {
    pub fn weight(&self, p: &PauliString) -> usize {
        match &self.mask {
            None => p.weight(),
            Some(m) => p.weight_on(m),
        }
    }

    pub fn factor(&self, p: &PauliString) -> f64 {
        if self.rate == 0.0 {
            return 1.0;
        }
        (-self.rate * self.weight(p) as f64).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n: usize,
    /// `layers[t-1]` is `U_t`.
    pub layers: Vec<Layer>,
    pub noise: NoiseSpec,
}

impl Circuit {
    /// Builds and validates a circuit.
    pub fn new(n: usize, layers: Vec<Layer>, noise: NoiseSpec) -> Result<Self> {
        let c = Circuit { n, layers, noise };
        let v = c.validate();
        if v.is_empty() {
            Ok(c)
        } else {
            Err(Error::InvalidCircuit(v))
        }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// `U_t` for `t = 1..=d`.
    pub fn layer(&self, t: usize) -> &Layer {
        &self.layers[t - 1]
    }

    /// Every broken invariant; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let global = |kind| Violation { layer: None, gate: None, kind };
        let ns = &self.noise;
        if !ns.gamma.is_finite() {
            out.push(global(ViolationKind::NonFiniteNoiseRate));
        } else if ns.gamma < 0.0 {
            out.push(global(ViolationKind::NegativeNoiseRate));
        }
        match (ns.model, ns.gamma_s) {
            (NoiseModel::NonunitalRandom, None) => out.push(global(ViolationKind::MissingGammaS)),
            (_, Some(gs)) if !gs.is_finite() => out.push(global(ViolationKind::NonFiniteNoiseRate)),
            (_, Some(gs)) if gs < 0.0 => out.push(global(ViolationKind::NegativeNoiseRate)),
            (NoiseModel::NonunitalRandom, Some(gs)) if gs > GAMMA_S_MAX => {
                out.push(global(ViolationKind::GammaSAboveLimit))
            }
            _ => {}
        }
        for (li, layer) in self.layers.iter().enumerate() {
            let mut used = BTreeSet::new();
            for (gi, gate) in layer.gates.iter().enumerate() {
                let at = |kind| Violation { layer: Some(li + 1), gate: Some(gi), kind };
                match gate.kind.arity() {
                    None => {
                        let dim = if let GateKind::Unitary(m) = &gate.kind { m.dim() } else { 0 };
                        out.push(at(ViolationKind::BadMatrixShape { dim }));
                    }
                    Some(a) if a != gate.qubits.len() => {
                        out.push(at(ViolationKind::WrongArity { found: gate.qubits.len() }))
                    }
                    _ => {}
                }
                if let GateKind::Unitary(m) = &gate.kind {
                    if !m.is_unitary(UNITARITY_TOLERANCE) {
                        out.push(at(ViolationKind::NonUnitary));
                    }
                }
                if gate.qubits.len() == 2 && gate.qubits[0] == gate.qubits[1] {
                    out.push(at(ViolationKind::DuplicateQubit));
                }
                let mut seen_here = BTreeSet::new();
                for &q in &gate.qubits {
                    if q >= self.n {
                        out.push(at(ViolationKind::QubitOutOfRange { qubit: q }));
                    } else if seen_here.insert(q) && !used.insert(q) {
                        out.push(at(ViolationKind::LayerOverlap { qubit: q }));
                    }
                }
            }
        }
        out
    }

    /// Damping at Heisenberg step `t`: `t = 0` is read-out, `t ≥ 1` follows `U_t`.
    pub fn damping(&self, t: usize) -> Damping {
        let gamma = self.noise.effective_gamma();
        match self.noise.model {
            NoiseModel::Uniform | NoiseModel::NonunitalRandom => Damping { rate: gamma, mask: None },
            NoiseModel::ReadoutOnly => Damping { rate: if t == 0 { gamma } else { 0.0 }, mask: None },
            NoiseModel::GateBased => {
                if t == 0 {
                    Damping { rate: gamma, mask: None }
                } else {
                    Damping { rate: gamma, mask: Some(self.layer(t).noisy_mask(self.n)) }
                }
            }
        }
    }

    /// Dampings for `t = 0..=d`.
    pub fn damping_plan(&self) -> Vec<Damping> {
        (0..=self.depth()).map(|t| self.damping(t)).collect()
    }

    /// Reachable qubits after each layer in Heisenberg order, starting from `support`.
    pub fn light_cone(&self, support: &[usize]) -> Vec<BTreeSet<usize>> {
        let mut current: BTreeSet<usize> = support.iter().copied().collect();
        let mut out = Vec::with_capacity(self.depth());
        for layer in &self.layers {
            let touched: Vec<usize> = layer
                .gates
                .iter()
                .filter(|g| g.qubits.iter().any(|q| current.contains(q)))
                .flat_map(|g| g.qubits.iter().copied())
                .collect();
            current.extend(touched);
            out.push(current.clone());
        }
        out
    }
}
