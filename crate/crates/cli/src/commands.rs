//! Subcommand implementations. Each returns a [`Table`].

use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use pauliprop::circuit_io::parse_circuit;
use pauliprop::diagnostics::{
    algorithm_error_bound, c_gamma, choose_ell_gate, choose_ell_uniform, composition_count, depth_threshold, dl_count,
    error_bound_gate, error_bound_nonunital, error_bound_uniform, ln_dl_count, sensitivity_gamma_max,
    weight_profile_with_cap, PROFILE_TOLERANCE,
};
use pauliprop::layer_prop::{approximate_state, propagate};
use pauliprop::oracle::{DenseOperator, Oracle};
use pauliprop::path_sum::count_paths;
use pauliprop::sampling::{format_bits, fourier_coefficients, Backend};
use pauliprop::{
    approximate_expectation, approximate_observable, Algorithm, Circuit, NoiseModel, PauliString, PauliSum, StateSpec,
};

use crate::output::{Table, Value};
use crate::{AlgorithmArg, BackendArg, Truncation};

/// Agreement required by `validate` between exact-regime runs and the oracle.
pub const VALIDATE_TOLERANCE: f64 = 1e-9;

fn load_circuit(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(parse_circuit(&text)?)
}

fn load_observable(path: &Path, n: usize) -> Result<PauliSum> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let o = PauliSum::parse(&text)?;
    if o.num_qubits() != n {
        bail!("observable acts on {} qubits but the circuit has {n}", o.num_qubits());
    }
    Ok(o)
}

fn load_state(spec: Option<&str>, n: usize) -> Result<StateSpec> {
    match spec {
        None => Ok(StateSpec::zeros(n)),
        Some(s) => Ok(StateSpec::parse(s, n)?),
    }
}

fn algorithm_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::PathSum => "path_sum",
        Algorithm::LayerProp => "layer_prop",
    }
}

pub fn resolve_algorithm(circuit: &Circuit, arg: AlgorithmArg) -> Algorithm {
    match arg {
        AlgorithmArg::PathSum => Algorithm::PathSum,
        AlgorithmArg::LayerProp => Algorithm::LayerProp,
        AlgorithmArg::Auto => match circuit.noise.model {
            NoiseModel::Uniform | NoiseModel::NonunitalRandom => Algorithm::PathSum,
            NoiseModel::GateBased | NoiseModel::ReadoutOnly => Algorithm::LayerProp,
        },
    }
}

/// ℓ from the flag, or from ε via the threshold rule of the algorithm.
pub fn resolve_ell(circuit: &Circuit, algorithm: Algorithm, ell: Option<usize>, epsilon: Option<f64>) -> Result<usize> {
    match (ell, epsilon) {
        (Some(l), _) => Ok(l),
        (None, None) => bail!("give either --ell or --epsilon"),
        (None, Some(eps)) => {
            let gamma = circuit.noise.effective_gamma();
            let d = circuit.depth();
            if circuit.noise.model == NoiseModel::ReadoutOnly && d > 0 {
                bail!("--epsilon needs noise inside the circuit; read-out noise alone gives no truncation bound");
            }
            Ok(match algorithm {
                Algorithm::PathSum => {
                    if circuit.noise.model == NoiseModel::GateBased {
                        bail!("--epsilon with path_sum needs uniform or emission noise");
                    }
                    let mut ell = choose_ell_uniform(gamma, d, eps)?;
                    if circuit.noise.model == NoiseModel::NonunitalRandom {
                        // early-ending paths add Σ_{t<d} C(ℓ,t) to the bound
                        while error_bound_nonunital(gamma, d, ell) > eps {
                            ell += 1;
                        }
                    }
                    ell
                }
                Algorithm::LayerProp => choose_ell_gate(gamma, d, eps)?,
            })
        }
    }
}

pub fn expval(
    circuit: &Path,
    observable: &Path,
    state: Option<&str>,
    t: &Truncation,
    check: bool,
    cap: usize,
) -> Result<Table> {
    let c = load_circuit(circuit)?;
    let o = load_observable(observable, c.n)?;
    let rho = load_state(state, c.n)?;
    let algorithm = resolve_algorithm(&c, t.algorithm);
    let ell = resolve_ell(&c, algorithm, t.ell, t.epsilon)?;
    let approx = approximate_observable(&c, &o, ell, algorithm)?;
    let value = pauliprop::expectation_of(&approx, &rho)?;
    let bound = algorithm_error_bound(&c, ell, algorithm) * o.frobenius_norm();
    let mut cols = vec!["value", "algorithm", "ell", "terms", "frobenius_bound"];
    let mut row: Vec<Value> =
        vec![value.into(), algorithm_name(algorithm).into(), ell.into(), approx.len().into(), bound.into()];
    if check {
        let exact = Oracle::with_cap(cap).exact_expectation(&c, &rho, &o)?;
        cols.extend(["oracle", "abs_diff"]);
        row.extend([exact.into(), (value - exact).abs().into()]);
    }
    let mut table = Table::new("expval", &cols);
    table.push(row);
    table.text_columns = Some(if check { vec!["value", "oracle", "abs_diff"] } else { vec!["value"] });
    table.bare_text = !check;
    Ok(table)
}

pub struct SampleOptions {
    pub ell_s: usize,
    pub backend: BackendArg,
    pub ell: Option<usize>,
    pub cap: usize,
    pub seed: u64,
    pub count: usize,
    pub counts: bool,
    pub distribution: bool,
}

pub fn sample(circuit: &Path, state: Option<&str>, opts: &SampleOptions) -> Result<Table> {
    let c = load_circuit(circuit)?;
    let rho = load_state(state, c.n)?;
    let ell = opts.ell.unwrap_or(c.n.max(1));
    let backend = match opts.backend {
        BackendArg::PathSum => Backend::PathSum { ell },
        BackendArg::LayerProp => Backend::LayerProp { ell },
        BackendArg::LightconeExact => Backend::LightconeExact { cap: opts.cap },
        BackendArg::Oracle => Backend::Oracle { cap: opts.cap },
    };
    let fourier = fourier_coefficients(&c, &rho, opts.ell_s, backend)?;
    if opts.distribution {
        let dist = fourier.induced_distribution()?;
        let mut table = Table::new("sample", &["bits", "probability"]);
        for (s, p) in dist.into_iter().enumerate() {
            let bits: Vec<bool> = (0..c.n).map(|q| (s >> (c.n - 1 - q)) & 1 == 1).collect();
            table.push(vec![format_bits(&bits).into(), p.into()]);
        }
        return Ok(table);
    }
    let samples = fourier.sample(opts.seed, opts.count);
    if opts.counts {
        let mut counts = std::collections::BTreeMap::new();
        for s in &samples {
            *counts.entry(format_bits(s)).or_insert(0usize) += 1;
        }
        let mut table = Table::new("sample", &["bits", "count"]);
        for (b, k) in counts {
            table.push(vec![b.into(), k.into()]);
        }
        return Ok(table);
    }
    let mut table = Table::new("sample", &["bits"]);
    for s in &samples {
        table.push(vec![format_bits(s).into()]);
    }
    table.bare_text = true;
    Ok(table)
}

pub fn state(
    circuit: &Path,
    state: Option<&str>,
    ell: Option<usize>,
    epsilon: Option<f64>,
    check: bool,
    cap: usize,
) -> Result<Table> {
    let c = load_circuit(circuit)?;
    let rho = load_state(state, c.n)?;
    let ell = resolve_ell(&c, Algorithm::LayerProp, ell, epsilon)?;
    let approx = approximate_state(&c, &rho, ell)?;
    if !check {
        let mut table = Table::new("state", &["pauli", "coefficient"]);
        for (p, v) in approx.iter() {
            table.push(vec![p.to_string().into(), v.into()]);
        }
        return Ok(table);
    }
    let oracle = Oracle::with_cap(cap);
    let exact = oracle.evolve_density_matrix(&c, &rho)?;
    // the table holds tr(ρ̃P)/2^n, so ρ̃ = Σ_P (table_P) P
    let err = DenseOperator::from_pauli_sum(&approx).sub(&exact).trace_norm();
    let dense_rho = DenseOperator::from_state(&rho);
    let purity = dense_rho.trace_product(&dense_rho).re * (c.n as f64).exp2();
    let eps = algorithm_error_bound(&c, ell, Algorithm::LayerProp);
    let mut table = Table::new("state", &["quantity", "value"]);
    table.push(vec!["ell".into(), ell.into()]);
    table.push(vec!["terms".into(), approx.len().into()]);
    table.push(vec!["trace_norm_error".into(), err.into()]);
    table.push(vec!["purity".into(), purity.into()]);
    table.push(vec!["epsilon".into(), eps.into()]);
    table.push(vec!["bound".into(), (eps * purity.sqrt()).into()]);
    Ok(table)
}

pub fn analyze(
    gamma: f64,
    d: usize,
    epsilon: f64,
    n: Option<usize>,
    ell: Option<usize>,
    log_chi: Option<f64>,
) -> Result<Table> {
    let mut t = Table::new("analyze", &["quantity", "value"]);
    let mut row = |k: &str, v: Value| t.push(vec![k.to_string().into(), v]);
    let gate = choose_ell_gate(gamma, d, epsilon)?;
    row("ell_gate", gate.into());
    row("error_bound_gate", error_bound_gate(gamma, d, gate).into());
    if epsilon <= 1.0 {
        let (c, converged) = c_gamma(gamma)?;
        let uni = choose_ell_uniform(gamma, d, epsilon)?;
        row("c_gamma", c.into());
        row("c_gamma_converged", if converged { "true" } else { "false" }.into());
        row("ell_uniform", uni.into());
        row("error_bound_uniform", error_bound_uniform(gamma, d, uni).into());
        row("composition_count", Value::Big(composition_count(uni, d).to_string()));
        row("depth_threshold", depth_threshold(gamma, epsilon)?.into());
    }
    if let Some(l) = ell {
        row("ell", l.into());
        row("error_bound_gate_at_ell", error_bound_gate(gamma, d, l).into());
        row("error_bound_uniform_at_ell", error_bound_uniform(gamma, d, l).into());
        row("error_bound_nonunital_at_ell", error_bound_nonunital(gamma, d, l).into());
        row("composition_count_at_ell", Value::Big(composition_count(l, d).to_string()));
    }
    if let Some(n) = n {
        counts(&mut row, "gate", n, gate);
        if let Some(l) = ell {
            counts(&mut row, "at_ell", n, l);
        }
        if let Some(lc) = log_chi {
            row("sensitivity_gamma_max", sensitivity_gamma_max(n as f64, d, epsilon, lc).into());
        }
    } else if log_chi.is_some() {
        bail!("--log-chi needs --n");
    }
    Ok(t)
}

/// Exact `D_ℓ` is printed only up to this many binomial terms; `ln D_ℓ` always.
pub const EXACT_COUNT_LIMIT: usize = 4096;

fn counts(row: &mut impl FnMut(&str, Value), suffix: &str, n: usize, ell: usize) {
    if ell.min(n) <= EXACT_COUNT_LIMIT {
        row(&format!("dl_count_{suffix}"), Value::Big(dl_count(n, ell).to_string()));
    }
    row(&format!("ln_dl_count_{suffix}"), ln_dl_count(n, ell).into());
}

pub fn weights(circuit: &Path, observable: &Path, summary: bool, cap: usize) -> Result<Table> {
    let c = load_circuit(circuit)?;
    let o = load_observable(observable, c.n)?;
    let prof = weight_profile_with_cap(&c, &o, cap)?;
    if summary {
        let gamma = c.noise.effective_gamma();
        let excess = prof.lemma2_excess(gamma);
        let mut t = Table::new("weights", &["quantity", "value"]);
        t.push(vec!["steps".into(), prof.num_steps().into()]);
        t.push(vec!["norm_sq".into(), prof.norm_sq.into()]);
        t.push(vec!["continuity_residual".into(), prof.continuity_residual().into()]);
        t.push(vec!["damped_flow_excess".into(), prof.damped_flow_excess().into()]);
        t.push(vec!["tail_bound_excess".into(), excess.into()]);
        t.push(vec!["tail_bound_holds".into(), if excess <= PROFILE_TOLERANCE { "true" } else { "false" }.into()]);
        return Ok(t);
    }
    let mut t = Table::new("weights", &["step", "label", "w", "p", "q", "j"]);
    for (g, step) in prof.steps.iter().enumerate() {
        for w in 0..=c.n {
            t.push(vec![
                g.into(),
                step.label().into(),
                w.into(),
                prof.p[g][w].into(),
                prof.q[g][w].into(),
                prof.j[g][w].into(),
            ]);
        }
    }
    Ok(t)
}

pub fn validate(circuit: &Path, observable: Option<&Path>, state: Option<&str>, cap: usize) -> Result<Table> {
    let c = load_circuit(circuit)?;
    let o = match observable {
        Some(p) => load_observable(p, c.n)?,
        None => PauliSum::from_terms(c.n, (0..c.n).map(|q| (PauliString::z_on(c.n, [q]), 1.0)))?,
    };
    let rho = load_state(state, c.n)?;
    let mut t = Table::new("validate", &["check", "value", "abs_diff", "status"]);
    let dash = || Value::from("-");
    t.push(vec!["qubits".into(), c.n.into(), dash(), "ok".into()]);
    t.push(vec!["depth".into(), c.depth().into(), dash(), "ok".into()]);
    t.push(vec!["noise".into(), c.noise.model.name().into(), dash(), "ok".into()]);
    if c.n > cap {
        t.push(vec!["oracle".into(), "skipped".into(), dash(), "ok".into()]);
        return Ok(t);
    }
    let exact = Oracle::with_cap(cap).exact_expectation(&c, &rho, &o)?;
    t.push(vec!["oracle".into(), exact.into(), dash(), "ok".into()]);
    let mut failed = Vec::new();
    let mut runs = vec![(Algorithm::LayerProp, c.n.max(1))];
    if c.noise.model != NoiseModel::GateBased {
        runs.insert(0, (Algorithm::PathSum, c.n * (c.depth() + 1)));
    }
    for (alg, ell) in runs {
        let v = approximate_expectation(&c, &o, &rho, ell, alg)?;
        let diff = (v - exact).abs();
        let ok = diff <= VALIDATE_TOLERANCE;
        if !ok {
            failed.push(algorithm_name(alg));
        }
        t.push(vec![algorithm_name(alg).into(), v.into(), diff.into(), if ok { "ok" } else { "fail" }.into()]);
    }
    if !failed.is_empty() {
        bail!("oracle cross-check failed for {}", failed.join(" and "));
    }
    Ok(t)
}

pub fn bench(circuit: &Path, observable: &Path, ell_max: usize, timing: bool) -> Result<Table> {
    let c = load_circuit(circuit)?;
    let o = load_observable(observable, c.n)?;
    let cols: &[&str] = if timing {
        &["algorithm", "ell", "measured", "dl_count", "composition_count", "seconds"]
    } else {
        &["algorithm", "ell", "measured", "dl_count", "composition_count"]
    };
    let mut t = Table::new("bench", cols);
    let d = c.depth();
    let path_sum_ok = matches!(c.noise.model, NoiseModel::Uniform | NoiseModel::ReadoutOnly);
    for ell in 1..=ell_max {
        let predicted_table = Value::Big(dl_count(c.n, ell.min(c.n)).to_string());
        let compositions = Value::Big(composition_count(ell, d).to_string());
        if path_sum_ok {
            let start = Instant::now();
            let paths = count_paths(&c, &o, ell)?;
            let mut row =
                vec!["path_sum".into(), ell.into(), paths.into(), predicted_table.clone(), compositions.clone()];
            if timing {
                row.push(start.elapsed().as_secs_f64().into());
            }
            t.push(row);
        }
        if c.noise.model != NoiseModel::NonunitalRandom {
            let start = Instant::now();
            let size = propagate(&c, &o, ell)?.table.len();
            let mut row = vec!["layer_prop".into(), ell.into(), size.into(), predicted_table, compositions];
            if timing {
                row.push(start.elapsed().as_secs_f64().into());
            }
            t.push(row);
        }
    }
    Ok(t)
}
