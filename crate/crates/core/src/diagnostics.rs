//! Truncation parameters, error-bound formulas, counting functions and the
//! gate-by-gate operator weight profile.
//!
//! All logarithms are natural. Rounding up uses [`ceil_slack`], which forgives
//! floating-point noise of `1e-9` so that exact integers are not bumped by one.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::circuit::{Circuit, Layer, NoiseModel};
use crate::conjugation::layer_transition;
use crate::error::{Error, Result};
use crate::pauli::{PauliString, QubitMask};
use crate::pauli_sum::PauliSum;
use crate::Algorithm;

/// Slack subtracted before rounding up.
pub const CEIL_SLACK: f64 = 1e-9;

/// Additive tolerance for the weight-profile checks.
pub const PROFILE_TOLERANCE: f64 = 1e-10;

/// `⌈x − 1e-9⌉`.
pub fn ceil_slack(x: f64) -> f64 {
    (x - CEIL_SLACK).ceil()
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64, max: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= max) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, {max}], got {epsilon}")));
    }
    Ok(())
}

/// Solution of `c = γ^{-1} ln(e c)`, iterating from `max(e, 1/γ)`.
///
/// The iteration climbs to the larger root, the one for which the path-count
/// bound is valid. When it does not settle within 200 steps (γ too large for a
/// root to exist) the second component is `false` and `c = 1` is returned.
pub fn c_gamma(gamma: f64) -> Result<(f64, bool)> {
    check_gamma(gamma)?;
    let mut c = std::f64::consts::E.max(1.0 / gamma);
    for _ in 0..200 {
        let arg = std::f64::consts::E * c;
        if arg <= 0.0 {
            break;
        }
        let next = arg.ln() / gamma;
        if !next.is_finite() || next <= 0.0 {
            break;
        }
        if (next - c).abs() < 1e-10 {
            return Ok((next, true));
        }
        c = next;
    }
    Ok((1.0, false))
}

/// `⌈c_γ d + 2γ^{-1} ln(1/ε)⌉` for uniform noise.
pub fn choose_ell_uniform(gamma: f64, d: usize, epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon, 1.0)?;
    let (c, converged) = c_gamma(gamma)?;
    if !converged {
        log::warn!("c_gamma iteration did not converge for gamma = {gamma}; using c_gamma = 1");
    }
    Ok(ceil_slack(c * d as f64 + 2.0 / gamma * (1.0 / epsilon).ln()).max(0.0) as usize)
}

/// `⌈γ^{-1} ln(√(d+1)/ε) − 1⌉`, at least 1, for gate-based noise.
pub fn choose_ell_gate(gamma: f64, d: usize, epsilon: f64) -> Result<usize> {
    check_gamma(gamma)?;
    check_epsilon(epsilon, f64::INFINITY)?;
    let x = ((d as f64 + 1.0).sqrt() / epsilon).ln() / gamma - 1.0;
    Ok(ceil_slack(x).max(1.0) as usize)
}

/// `ln C(n, k)`, or `−∞` when `k > n`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `sqrt(C(ℓ, d)) e^{−γ(ℓ+1)}`. Below `ℓ = d` the value at `ℓ = d` is returned,
/// since no path then reaches the end of the circuit with nonzero weight.
pub fn error_bound_uniform(gamma: f64, d: usize, ell: usize) -> f64 {
    let ell = ell.max(d);
    (0.5 * ln_binomial(ell, d) - gamma * (ell as f64 + 1.0)).exp()
}

/// `sqrt(d+1) e^{−γ(ℓ+1)}`.
pub fn error_bound_gate(gamma: f64, d: usize, ell: usize) -> f64 {
    (d as f64 + 1.0).sqrt() * (-gamma * (ell as f64 + 1.0)).exp()
}

/// `sqrt(Σ_{t=0}^{d} C(ℓ,t)) e^{−γ(ℓ+1)}`: the path-sum bound when paths may
/// end early on the identity under emission noise.
pub fn error_bound_nonunital(gamma: f64, d: usize, ell: usize) -> f64 {
    (0.5 * log_sum_exp((0..=d).map(|t| ln_binomial(ell, t))) - gamma * (ell as f64 + 1.0)).exp()
}

/// Relative Frobenius error bound of the chosen truncation on `circuit`.
///
/// Read-out-only noise offers no damping inside the circuit, so the path sum has
/// no finite guarantee there and `∞` is returned.
pub fn algorithm_error_bound(circuit: &Circuit, ell: usize, algorithm: Algorithm) -> f64 {
    let gamma = circuit.noise.effective_gamma();
    let d = circuit.depth();
    match (circuit.noise.model, algorithm) {
        (NoiseModel::ReadoutOnly, Algorithm::PathSum) => f64::INFINITY,
        (NoiseModel::ReadoutOnly, Algorithm::LayerProp) => {
            if d == 0 {
                error_bound_gate(gamma, 0, ell)
            } else {
                f64::INFINITY
            }
        }
        (NoiseModel::Uniform, Algorithm::PathSum) => error_bound_uniform(gamma, d, ell),
        (NoiseModel::NonunitalRandom, Algorithm::PathSum) => error_bound_nonunital(gamma, d, ell),
        (_, Algorithm::LayerProp) => error_bound_gate(gamma, d, ell),
        (NoiseModel::GateBased, Algorithm::PathSum) => f64::INFINITY,
    }
}

/// `C(n, k)` exactly.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Number of `n`-qubit Paulis of weight at most `ℓ`: `Σ_{k≤ℓ} C(n,k) 3^k`.
pub fn dl_count(n: usize, ell: usize) -> BigUint {
    // running term C(n, k) 3^k
    let mut term = BigUint::from(1u32);
    let mut total = term.clone();
    for k in 0..ell.min(n) {
        term = term * BigUint::from(3 * (n - k)) / BigUint::from(k + 1);
        total += &term;
    }
    total
}

/// `ln D_ℓ`, for thresholds where the exact count is too large to build.
pub fn ln_dl_count(n: usize, ell: usize) -> f64 {
    let mut term = 0.0;
    let terms = std::iter::once(0.0).chain((0..ell.min(n)).map(move |k| {
        term += (3.0 * (n - k) as f64 / (k + 1) as f64).ln();
        term
    }));
    log_sum_exp(terms)
}

/// Compositions of `ℓ + 1` into `d + 1` positive parts, `C(ℓ, d)`.
pub fn composition_count(ell: usize, d: usize) -> BigUint {
    binomial(ell, d)
}

/// Smallest `d` with `e^{−γ(d+1)} ≤ ε`.
pub fn depth_threshold(gamma: f64, epsilon: f64) -> Result<usize> {
    check_gamma(gamma)?;
    check_epsilon(epsilon, 1.0)?;
    Ok(ceil_slack((1.0 / epsilon).ln() / gamma - 1.0).max(0.0) as usize)
}

/// Largest noise rate for which the gate-noise runtime `n^{γ^{-1} ln(√(d+1)/ε) − 1}`
/// still reaches `χ = e^{log_chi}`: `ln(√(d+1)/ε) ln n / (log_chi + ln n)`.
///
/// This is an explicit instance of the `O(log² n / log χ)` threshold; its
/// constant is this inverse and nothing more.
pub fn sensitivity_gamma_max(n: f64, d: usize, epsilon: f64, log_chi: f64) -> f64 {
    let ln_n = n.ln();
    ((d as f64 + 1.0).sqrt() / epsilon).ln() * ln_n / (log_chi + ln_n)
}

/// One step of the gate-by-gate Heisenberg evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// `D_0` on every qubit.
    Readout,
    /// Gate `g` (0-based) of layer `t` (1-based).
    Unitary { layer: usize, gate: usize },
    /// Noise of layer `t` restricted to the qubits of gate `g`.
    Noise { layer: usize, gate: usize },
    /// Noise of layer `t` on qubits outside every gate.
    IdleNoise { layer: usize },
}

impl Step {
    pub fn is_channel(self) -> bool {
        !matches!(self, Step::Unitary { .. })
    }

    pub fn label(self) -> String {
        match self {
            Step::Readout => "readout".into(),
            Step::Unitary { layer, gate } => format!("unitary:{layer}:{gate}"),
            Step::Noise { layer, gate } => format!("noise:{layer}:{gate}"),
            Step::IdleNoise { layer } => format!("idle_noise:{layer}"),
        }
    }
}

/// Weight distribution `P`, tail `Q` and current `J` after every step.
///
/// `p[g][w]` for `w = 0..=n`; `q[g][w] = Σ_{w' > w} p[g][w']`; `j[g][w]` for
/// `w = 0..=n+1` with `j[g][n+1] = 0`. At unitary steps `J` is computed from the
/// weight-resolved components `O_{w,w'}`; at channel steps it is the tail
/// difference, which makes the continuity identity hold by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    pub n: usize,
    pub norm_sq: f64,
    pub initial: Vec<f64>,
    pub steps: Vec<Step>,
    pub p: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub j: Vec<Vec<f64>>,
}

fn tail(p: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; p.len()];
    for w in (0..p.len().saturating_sub(1)).rev() {
        q[w] = q[w + 1] + p[w + 1];
    }
    q
}

fn distribution(o: &PauliSum, n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    for (s, c) in o.iter() {
        p[s.weight()] += c * c;
    }
    p
}

fn damp_on(o: &PauliSum, rate: f64, mask: &QubitMask) -> PauliSum {
    if rate == 0.0 {
        return o.clone();
    }
    let terms = o.iter().map(|(p, c)| (p.clone(), c * (-rate * p.weight_on(mask) as f64).exp()));
    PauliSum::from_terms(o.num_qubits(), terms).expect("same dimension")
}

/// Default qubit cap for [`weight_profile`] (the table can hold `4^n` terms).
pub const PROFILE_CAP: usize = 10;

/// Exact gate-by-gate evolution of `o`, recording the weight profile after each step.
pub fn weight_profile(circuit: &Circuit, o: &PauliSum) -> Result<WeightProfile> {
    weight_profile_with_cap(circuit, o, PROFILE_CAP)
}

pub fn weight_profile_with_cap(circuit: &Circuit, o: &PauliSum, cap: usize) -> Result<WeightProfile> {
    let n = circuit.n;
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    if o.num_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: o.num_qubits() });
    }
    if circuit.noise.model == NoiseModel::NonunitalRandom {
        return Err(Error::WrongNoiseModel {
            model: circuit.noise.model.to_string(),
            expected: "a unital model".into(),
        });
    }
    let initial = distribution(o, n);
    let mut prof = WeightProfile {
        n,
        norm_sq: o.norm_sq(),
        initial: initial.clone(),
        steps: vec![],
        p: vec![],
        q: vec![],
        j: vec![],
    };
    let mut prev = initial;
    let mut record = |prof: &mut WeightProfile, step: Step, cur: Vec<f64>, j: Option<Vec<f64>>| {
        let j = j.unwrap_or_else(|| {
            let mut j = vec![0.0; n + 2];
            for w in (0..=n).rev() {
                j[w] = j[w + 1] + cur[w] - prev[w];
            }
            j
        });
        prof.steps.push(step);
        prof.q.push(tail(&cur));
        prof.p.push(cur.clone());
        prof.j.push(j);
        prev = cur;
    };

    let readout = circuit.damping(0);
    let mut op = damp_on(o, readout.rate, &QubitMask::full(n));
    record(&mut prof, Step::Readout, distribution(&op, n), None);
    for t in 1..=circuit.depth() {
        let damping = circuit.damping(t);
        let noisy = damping.mask.clone().unwrap_or_else(|| QubitMask::full(n));
        let mut covered = QubitMask::empty(n);
        for (gi, gate) in circuit.layer(t).gates.iter().enumerate() {
            let (next, j) = unitary_step(&op, &Layer::new(vec![gate.clone()]), n)?;
            op = next;
            record(&mut prof, Step::Unitary { layer: t, gate: gi }, distribution(&op, n), Some(j));
            let on = QubitMask::from_qubits(n, gate.qubits.iter().copied().filter(|&q| noisy.contains(q)));
            gate.qubits.iter().for_each(|&q| covered.insert(q));
            if on.count() > 0 {
                op = damp_on(&op, damping.rate, &on);
                record(&mut prof, Step::Noise { layer: t, gate: gi }, distribution(&op, n), None);
            }
        }
        let idle = QubitMask::from_qubits(n, noisy.iter().filter(|&q| !covered.contains(q)));
        if idle.count() > 0 {
            op = damp_on(&op, damping.rate, &idle);
            record(&mut prof, Step::IdleNoise { layer: t }, distribution(&op, n), None);
        }
    }
    Ok(prof)
}

/// Conjugates `o` through a one-gate layer and returns the current
/// `J(w) = ‖O_{w−1,w} + O_{w,w}‖² − ‖O_{w,w}‖² − ‖O_{w,w−1}‖²`.
fn unitary_step(o: &PauliSum, layer: &Layer, n: usize) -> Result<(PauliSum, Vec<f64>)> {
    // coefficient of Q in U†P_w{O}U, keyed by (w, Q)
    let mut parts: BTreeMap<(usize, PauliString), f64> = BTreeMap::new();
    for (p, c) in o.iter() {
        let w = p.weight();
        for (q, a) in layer_transition(layer, p)? {
            *parts.entry((w, q)).or_insert(0.0) += c * a;
        }
    }
    let coef = |w: usize, q: &PauliString| parts.get(&(w, q.clone())).copied().unwrap_or(0.0);
    let mut targets: BTreeMap<&PauliString, ()> = BTreeMap::new();
    for (_, q) in parts.keys() {
        targets.insert(q, ());
    }
    let mut j = vec![0.0; n + 2];
    for w in 1..=n {
        let mut mixed = 0.0;
        let mut stay = 0.0;
        let mut down = 0.0;
        for q in targets.keys() {
            let wq = q.weight();
            if wq == w {
                let a = coef(w - 1, q);
                let b = coef(w, q);
                mixed += (a + b) * (a + b);
                stay += b * b;
            } else if wq == w - 1 {
                let c = coef(w, q);
                down += c * c;
            }
        }
        j[w] = mixed - stay - down;
    }
    let mut out = PauliSum::new(n);
    for ((_, q), c) in parts {
        out.add_term(q, c)?;
    }
    Ok((out, j))
}

impl WeightProfile {
    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    fn before(&self, g: usize) -> &[f64] {
        if g == 0 {
            &self.initial
        } else {
            &self.p[g - 1]
        }
    }

    /// Largest `|P^(g)(w) − P^(g−1)(w) − J^(g)(w) + J^(g)(w+1)|` over all steps.
    pub fn continuity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for g in 0..self.steps.len() {
            let prev = self.before(g);
            for w in 0..=self.n {
                let r = self.p[g][w] - prev[w] - self.j[g][w] + self.j[g][w + 1];
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    /// Largest `Q^(g)(w) − e^{−2γ(w+1)}‖O‖²_F` over channel steps; the weight-tail
    /// bound holds when this is at most [`PROFILE_TOLERANCE`].
    pub fn lemma2_excess(&self, gamma: f64) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (g, step) in self.steps.iter().enumerate() {
            if !step.is_channel() {
                continue;
            }
            for w in 0..=self.n {
                let bound = (-2.0 * gamma * (w as f64 + 1.0)).exp() * self.norm_sq;
                worst = worst.max(self.q[g][w] - bound);
            }
        }
        worst
    }

    /// Largest violation of `P^(g)(w) ≤ P^(g−1)(w) + J^(g)(w) − J^(g)(w+1)` at unitary steps.
    pub fn damped_flow_excess(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (g, step) in self.steps.iter().enumerate() {
            if step.is_channel() {
                continue;
            }
            let prev = self.before(g);
            for w in 0..=self.n {
                worst = worst.max(self.p[g][w] - prev[w] - self.j[g][w] + self.j[g][w + 1]);
            }
        }
        worst
    }

    /// `Σ_w P(w) − ‖O‖²_F` at each step (never positive beyond round-off).
    pub fn norm_growth(&self) -> f64 {
        self.p.iter().map(|p| p.iter().sum::<f64>() - self.norm_sq).fold(f64::NEG_INFINITY, f64::max)
    }
}
