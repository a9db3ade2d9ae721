//! Brute-force dense simulation, the reference for everything else.
//!
//! Channels act directly on matrix entries qubit by qubit; nothing here uses
//! the Pauli-propagation machinery.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{Circuit, GateMatrix, NoiseModel};
use crate::error::{Error, Result};
use crate::nonunital::{Direction, EmissionAssignment};
use crate::pauli::{Letter, PauliString};
use crate::pauli_sum::PauliSum;
use crate::state::StateSpec;

/// Default qubit cap: a 2^10 × 2^10 complex matrix is 16 MiB.
pub const DEFAULT_CAP: usize = 10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n: usize,
    m: DMatrix<Complex64>,
}

/// Global index bit of qubit `q` (qubit 0 is most significant).
fn bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

fn pauli_masks(p: &PauliString) -> (usize, usize) {
    let n = p.num_qubits();
    let (mut x, mut z) = (0, 0);
    for q in 0..n {
        let (xb, zb) = p.letter(q).bits();
        if xb {
            x |= bit(n, q);
        }
        if zb {
            z |= bit(n, q);
        }
    }
    (x, z)
}

fn i_power(k: usize) -> Complex64 {
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)][k % 4]
}

impl DenseOperator {
    pub fn zeros(n: usize) -> Self {
        let d = 1 << n;
        DenseOperator { n, m: DMatrix::from_element(d, d, ZERO) }
    }

    pub fn identity(n: usize) -> Self {
        let d = 1 << n;
        DenseOperator { n, m: DMatrix::identity(d, d) }
    }

    pub fn from_matrix(n: usize, m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != 1 << n || m.ncols() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, found: m.nrows() });
        }
        Ok(DenseOperator { n, m })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// `P|j⟩ = i^{#Y} (−1)^{|z ∧ j|} |j ⊕ x⟩`.
    pub fn pauli(p: &PauliString) -> Self {
        let mut out = Self::zeros(p.num_qubits());
        let (x, z) = pauli_masks(p);
        let y = p.y_count();
        for j in 0..out.dim() {
            let sign = if (z & j).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out.m[(j ^ x, j)] = i_power(y) * sign;
        }
        out
    }

    pub fn from_pauli_sum(o: &PauliSum) -> Self {
        let n = o.num_qubits();
        let mut out = Self::zeros(n);
        for (p, c) in o.iter() {
            let (x, z) = pauli_masks(p);
            let ph = i_power(p.y_count());
            for j in 0..out.dim() {
                let sign = if (z & j).count_ones() % 2 == 1 { -c } else { c };
                out.m[(j ^ x, j)] += ph * sign;
            }
        }
        out
    }

    pub fn from_state(rho: &StateSpec) -> Self {
        let n = rho.num_qubits();
        match rho {
            StateSpec::Basis(bits) => {
                let idx = bits.iter().enumerate().filter(|(_, &b)| b).map(|(q, _)| bit(n, q)).sum();
                let mut out = Self::zeros(n);
                out.m[(idx, idx)] = Complex64::new(1.0, 0.0);
                out
            }
            StateSpec::Product(f) => {
                let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
                for fac in f {
                    let fm = DMatrix::from_fn(2, 2, |r, c| fac[r][c]);
                    m = m.kronecker(&fm);
                }
                DenseOperator { n, m }
            }
            StateSpec::Mixed { c, .. } => {
                let p = StateSpec::mixed_weight(n, *c);
                let d = (1usize << n) as f64;
                let mut out = Self::identity(n);
                out.m *= Complex64::new((1.0 - p) / d, 0.0);
                out.m[(0, 0)] += Complex64::new(p, 0.0);
                out
            }
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    /// `tr(self · other)`.
    pub fn trace_product(&self, other: &DenseOperator) -> Complex64 {
        let d = self.dim();
        let mut acc = ZERO;
        for r in 0..d {
            for k in 0..d {
                acc += self.m[(r, k)] * other.m[(k, r)];
            }
        }
        acc
    }

    /// `tr(P · self)`.
    pub fn pauli_trace(&self, p: &PauliString) -> Complex64 {
        let (x, z) = pauli_masks(p);
        let ph = i_power(p.y_count());
        let mut acc = ZERO;
        for k in 0..self.dim() {
            let sign = if (z & k).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            acc += self.m[(k, k ^ x)] * sign;
        }
        acc * ph
    }

    /// Pauli decomposition `c_P = tr(P M)/2^n`; fails when `M` is not Hermitian.
    pub fn to_pauli_sum(&self) -> Result<PauliSum> {
        let n = self.n;
        let d = self.dim() as f64;
        let terms = (0..(1usize << (2 * n))).map(|idx| {
            let mut p = PauliString::identity(n);
            for q in 0..n {
                p.set(q, Letter::from_code(((idx >> (2 * (n - 1 - q))) & 3) as u8));
            }
            let c = self.pauli_trace(&p) / d;
            (p, c)
        });
        PauliSum::from_complex_terms(n, terms)
    }

    /// Largest `|M_ij − conj(M_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut e: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                e = e.max((self.m[(r, c)] - self.m[(c, r)].conj()).norm());
            }
        }
        e
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.m + self.m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Trace norm of a Hermitian operator.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|v| v.abs()).sum()
    }

    /// `sqrt(tr(M†M)/2^n)`.
    pub fn normalized_frobenius(&self) -> f64 {
        (self.m.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.dim() as f64).sqrt()
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        self.m.iter().zip(other.m.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &DenseOperator) -> DenseOperator {
        DenseOperator { n: self.n, m: &self.m - &other.m }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    fn local_indices(&self, qubits: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let n = self.n;
        let mask: usize = qubits.iter().map(|&q| bit(n, q)).sum();
        let k = qubits.len();
        let offsets = (0..1usize << k)
            .map(|i| (0..k).filter(|&j| (i >> (k - 1 - j)) & 1 == 1).map(|j| bit(n, qubits[j])).sum())
            .collect();
        let bases = (0..self.dim()).filter(|i| i & mask == 0).collect();
        (bases, offsets)
    }

    /// `M ← A_{qubits} · M`.
    pub fn apply_left(&mut self, a: &GateMatrix, qubits: &[usize]) {
        let (bases, off) = self.local_indices(qubits);
        let k = off.len();
        let mut buf = vec![ZERO; k];
        for c in 0..self.dim() {
            for &b in &bases {
                for i in 0..k {
                    buf[i] = self.m[(b | off[i], c)];
                }
                for i in 0..k {
                    let mut s = ZERO;
                    for j in 0..k {
                        s += a.get(i, j) * buf[j];
                    }
                    self.m[(b | off[i], c)] = s;
                }
            }
        }
    }

    /// `M ← M · B_{qubits}`.
    pub fn apply_right(&mut self, b_mat: &GateMatrix, qubits: &[usize]) {
        let (bases, off) = self.local_indices(qubits);
        let k = off.len();
        let mut buf = vec![ZERO; k];
        for r in 0..self.dim() {
            for &b in &bases {
                for i in 0..k {
                    buf[i] = self.m[(r, b | off[i])];
                }
                for j in 0..k {
                    let mut s = ZERO;
                    for i in 0..k {
                        s += buf[i] * b_mat.get(i, j);
                    }
                    self.m[(r, b | off[j])] = s;
                }
            }
        }
    }

    /// Applies `f` to every 2×2 block `[[m00, m01], [m10, m11]]` of qubit `q`.
    fn map_qubit_blocks<F: Fn([Complex64; 4]) -> [Complex64; 4]>(&mut self, q: usize, f: F) {
        let bq = bit(self.n, q);
        let d = self.dim();
        for r in (0..d).filter(|r| r & bq == 0) {
            for c in (0..d).filter(|c| c & bq == 0) {
                let blk = [self.m[(r, c)], self.m[(r, c | bq)], self.m[(r | bq, c)], self.m[(r | bq, c | bq)]];
                let [a, b, cc, dd] = f(blk);
                self.m[(r, c)] = a;
                self.m[(r, c | bq)] = b;
                self.m[(r | bq, c)] = cc;
                self.m[(r | bq, c | bq)] = dd;
            }
        }
    }

    /// `ρ ↦ e^{−γ}ρ + (1−e^{−γ}) tr_q(ρ) ⊗ I/2` on qubit `q`; self-adjoint.
    pub fn depolarize(&mut self, q: usize, gamma: f64) {
        let e = (-gamma).exp();
        self.map_qubit_blocks(q, |[m00, m01, m10, m11]| {
            let avg = (m00 + m11) * 0.5 * (1.0 - e);
            [m00 * e + avg, m01 * e, m10 * e, m11 * e + avg]
        });
    }

    /// Emission channel `A_±` in the Schrödinger picture.
    ///
    /// `A_+{ρ} = ρ + γ_s⟨1|ρ|1⟩|0⟩⟨0| − γ_s/2 (|1⟩⟨1|ρ + ρ|1⟩⟨1|)`; `A_−` swaps 0 and 1.
    pub fn emit_schrodinger(&mut self, q: usize, dir: Direction, gs: f64) {
        let h = 1.0 - gs / 2.0;
        self.map_qubit_blocks(q, |[m00, m01, m10, m11]| match dir {
            Direction::Plus => [m00 + m11 * gs, m01 * h, m10 * h, m11 * (1.0 - gs)],
            Direction::Minus => [m00 * (1.0 - gs), m01 * h, m10 * h, m11 + m00 * gs],
        });
    }

    /// Adjoint of [`emit_schrodinger`](Self::emit_schrodinger):
    /// `X, Y ↦ (1−γ_s/2)·X, Y` and `Z ↦ (1−γ_s) Z ± γ_s I`.
    pub fn emit_heisenberg(&mut self, q: usize, dir: Direction, gs: f64) {
        let h = 1.0 - gs / 2.0;
        let s = match dir {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        };
        self.map_qubit_blocks(q, |[m00, m01, m10, m11]| {
            let ai = (m00 + m11) * 0.5;
            let az = (m00 - m11) * 0.5;
            let ai2 = ai + az * (s * gs);
            let az2 = az * (1.0 - gs);
            [ai2 + az2, m01 * h, m10 * h, ai2 - az2]
        });
    }
}

/// Which noise acts at one Heisenberg step.
enum StepNoise<'a> {
    Depolarize(f64, Vec<usize>),
    Emit(f64, &'a [Direction]),
}

/// Dense reference simulator.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub cap: usize,
    /// Apply the read-out channel `D_0`.
    pub include_readout: bool,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle { cap: DEFAULT_CAP, include_readout: true }
    }
}

impl Oracle {
    pub fn with_cap(cap: usize) -> Self {
        Oracle { cap, ..Default::default() }
    }

    pub fn without_readout(mut self) -> Self {
        self.include_readout = false;
        self
    }

    fn check(&self, circuit: &Circuit) -> Result<()> {
        if circuit.n > self.cap {
            return Err(Error::CapExceeded { n: circuit.n, cap: self.cap });
        }
        Ok(())
    }

    fn step_noise<'a>(&self, circuit: &Circuit, t: usize, emission: Option<&'a EmissionAssignment>) -> StepNoise<'a> {
        if t == 0 && !self.include_readout {
            return StepNoise::Depolarize(0.0, Vec::new());
        }
        let all: Vec<usize> = (0..circuit.n).collect();
        let g = circuit.noise.gamma;
        match circuit.noise.model {
            NoiseModel::Uniform => StepNoise::Depolarize(g, all),
            NoiseModel::ReadoutOnly => StepNoise::Depolarize(if t == 0 { g } else { 0.0 }, all),
            NoiseModel::GateBased => {
                if t == 0 {
                    StepNoise::Depolarize(g, all)
                } else {
                    StepNoise::Depolarize(g, circuit.layer(t).noisy_mask(circuit.n).iter().collect())
                }
            }
            NoiseModel::NonunitalRandom => {
                let a = emission.expect("emission assignment resolved before stepping");
                StepNoise::Emit(a.gamma_s, a.directions(t))
            }
        }
    }

    fn apply_noise(op: &mut DenseOperator, noise: StepNoise<'_>, heisenberg: bool) {
        match noise {
            StepNoise::Depolarize(g, qs) => {
                if g != 0.0 {
                    for q in qs {
                        op.depolarize(q, g);
                    }
                }
            }
            StepNoise::Emit(gs, dirs) => {
                for (q, &d) in dirs.iter().enumerate() {
                    if heisenberg {
                        op.emit_heisenberg(q, d, gs);
                    } else {
                        op.emit_schrodinger(q, d, gs);
                    }
                }
            }
        }
    }

    fn resolve(circuit: &Circuit, emission: Option<&EmissionAssignment>) -> Result<Option<EmissionAssignment>> {
        if circuit.noise.model != NoiseModel::NonunitalRandom {
            return Ok(None);
        }
        let a = match emission {
            Some(a) => a.clone(),
            None => EmissionAssignment::for_circuit(circuit)?,
        };
        if a.depth() != circuit.depth() || a.num_qubits() != circuit.n {
            return Err(Error::InvalidArgument("emission assignment does not match the circuit".into()));
        }
        Ok(Some(a))
    }

    /// `C{ρ}`, with emission directions from `emission` or else from the circuit seed.
    pub fn evolve_with(
        &self,
        circuit: &Circuit,
        rho: &StateSpec,
        emission: Option<&EmissionAssignment>,
    ) -> Result<DenseOperator> {
        self.check(circuit)?;
        if rho.num_qubits() != circuit.n {
            return Err(Error::DimensionMismatch { expected: circuit.n, found: rho.num_qubits() });
        }
        let a = Self::resolve(circuit, emission)?;
        let mut op = DenseOperator::from_state(rho);
        for t in (1..=circuit.depth()).rev() {
            Self::apply_noise(&mut op, self.step_noise(circuit, t, a.as_ref()), false);
            for g in &circuit.layer(t).gates {
                let u = g.matrix();
                op.apply_left(&u, &g.qubits);
                op.apply_right(&u.adjoint(), &g.qubits);
            }
        }
        Self::apply_noise(&mut op, self.step_noise(circuit, 0, a.as_ref()), false);
        Ok(op)
    }

    pub fn evolve_density_matrix(&self, circuit: &Circuit, rho: &StateSpec) -> Result<DenseOperator> {
        self.evolve_with(circuit, rho, None)
    }

    /// `C†{O}`.
    pub fn heisenberg_with(
        &self,
        circuit: &Circuit,
        o: &DenseOperator,
        emission: Option<&EmissionAssignment>,
    ) -> Result<DenseOperator> {
        self.check(circuit)?;
        if o.num_qubits() != circuit.n {
            return Err(Error::DimensionMismatch { expected: circuit.n, found: o.num_qubits() });
        }
        let a = Self::resolve(circuit, emission)?;
        let mut op = o.clone();
        Self::apply_noise(&mut op, self.step_noise(circuit, 0, a.as_ref()), true);
        for t in 1..=circuit.depth() {
            for g in &circuit.layer(t).gates {
                let u = g.matrix();
                op.apply_left(&u.adjoint(), &g.qubits);
                op.apply_right(&u, &g.qubits);
            }
            Self::apply_noise(&mut op, self.step_noise(circuit, t, a.as_ref()), true);
        }
        Ok(op)
    }

    pub fn exact_heisenberg(&self, circuit: &Circuit, o: &PauliSum) -> Result<DenseOperator> {
        self.check(circuit)?;
        self.heisenberg_with(circuit, &DenseOperator::from_pauli_sum(o), None)
    }

    /// `tr(C{ρ} O)`.
    pub fn exact_expectation(&self, circuit: &Circuit, rho: &StateSpec, o: &PauliSum) -> Result<f64> {
        if o.num_qubits() != circuit.n {
            return Err(Error::DimensionMismatch { expected: circuit.n, found: o.num_qubits() });
        }
        let out = self.evolve_density_matrix(circuit, rho)?;
        Ok(o.iter().map(|(p, c)| c * out.pauli_trace(p).re).sum())
    }

    /// Diagonal of `C{ρ}`, negative round-off clamped to 0.
    pub fn output_distribution(&self, circuit: &Circuit, rho: &StateSpec) -> Result<Vec<f64>> {
        let out = self.evolve_density_matrix(circuit, rho)?;
        Ok(out.diagonal().into_iter().map(|p| if (-1e-12..0.0).contains(&p) { 0.0 } else { p }).collect())
    }
}

/// [`Oracle::evolve_density_matrix`] with default settings.
pub fn evolve_density_matrix(circuit: &Circuit, rho: &StateSpec) -> Result<DenseOperator> {
    Oracle::default().evolve_density_matrix(circuit, rho)
}

pub fn exact_expectation(circuit: &Circuit, rho: &StateSpec, o: &PauliSum) -> Result<f64> {
    Oracle::default().exact_expectation(circuit, rho, o)
}

pub fn exact_heisenberg(circuit: &Circuit, o: &PauliSum) -> Result<DenseOperator> {
    Oracle::default().exact_heisenberg(circuit, o)
}

pub fn output_distribution(circuit: &Circuit, rho: &StateSpec) -> Result<Vec<f64>> {
    Oracle::default().output_distribution(circuit, rho)
}
