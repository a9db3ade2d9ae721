//! End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use pauliprop::diagnostics::{
    composition_count, dl_count, error_bound_gate, error_bound_uniform, weight_profile, PROFILE_TOLERANCE,
};
use pauliprop::ensembles::{rms_against, rms_error, StateEnsemble};
use pauliprop::layer_prop::propagate;
use pauliprop::nonunital::{
    decompose, direction_rms_nonidentity_norm, emission_heisenberg_action, expectation_nonunital,
    mean_square_contraction, Direction, EmissionAssignment,
};
use pauliprop::oracle::{DenseOperator, Oracle};
use pauliprop::path_sum::approximate_observable_by_weight;
use pauliprop::random::{random_layered, random_pauli_sum, random_product_state};
use pauliprop::sampling::{collision_alpha, fourier_coefficients, lemma4_bound, masks, total_variation, Backend};
use pauliprop::{approximate_expectation, Algorithm, Circuit, Letter, NoiseSpec, PauliString, PauliSum, StateSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// C1 and C8 exactness.
const EXACT_TOL: f64 = 1e-9;
/// C4 and C6 additive slack.
const LEMMA_TOL: f64 = 1e-10;
/// C5.
const TIGHT_TOL: f64 = 1e-12;
/// Float slack for the inequality checks whose bound carries no stated tolerance (C2, C3, C7).
const ROUNDING: f64 = 1e-12;

const CORPUS_SIZE: usize = 120;
const GAMMAS: [f64; 3] = [0.0, 0.1, 0.5];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

struct Instance {
    circuit: Circuit,
    o: PauliSum,
}

/// Deterministic corpus: n ≤ 5, d ≤ 5, random two-qubit unitaries, γ ∈ {0, 0.1, 0.5}.
fn corpus(uniform: bool, size: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|i| {
            let n = 1 + i % 5;
            let d = (i / 5) % 6;
            let gamma = GAMMAS[(i / 30) % 3];
            let noise = if uniform { NoiseSpec::uniform(gamma) } else { NoiseSpec::gate_based(gamma) };
            let circuit = random_layered(n, d, noise, &mut rng);
            let terms = rng.random_range(1..=4);
            let o = random_pauli_sum(n, terms, &mut rng);
            Instance { circuit, o }
        })
        .collect()
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateSpec {
    if rng.random_bool(0.5) {
        let bits: String = (0..n).map(|_| if rng.random_bool(0.5) { '1' } else { '0' }).collect();
        StateSpec::basis_from_str(&bits).unwrap()
    } else {
        random_product_state(n, rng)
    }
}

fn c1_oracle_equivalence() -> Outcome {
    let oracle = Oracle::default();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut checks = 0;
    for uniform in [true, false] {
        for inst in corpus(uniform, CORPUS_SIZE, if uniform { 1 } else { 2 }) {
            let c = &inst.circuit;
            let rho = random_state(c.n, &mut rng);
            let exact = oracle.exact_expectation(c, &rho, &inst.o).map_err(|e| e.to_string())?;
            let mut runs = vec![(Algorithm::LayerProp, c.n)];
            if uniform {
                runs.push((Algorithm::PathSum, c.n * (c.depth() + 1)));
            }
            for (alg, ell) in runs {
                let v = approximate_expectation(c, &inst.o, &rho, ell, alg).map_err(|e| e.to_string())?;
                let diff = (v - exact).abs();
                worst = worst.max(diff);
                checks += 1;
                if diff > EXACT_TOL {
                    return Err(format!("{alg:?} at n={} d={} differs by {diff:e}", c.n, c.depth()));
                }
            }
        }
    }
    Ok(format!("{} circuits, {checks} runs, max |Δ| = {worst:.3e}", 2 * CORPUS_SIZE))
}

fn c2_uniform_bound() -> Outcome {
    let oracle = Oracle::default();
    let mut checks = 0;
    let mut tightest = 0.0f64;
    for inst in corpus(true, CORPUS_SIZE, 1) {
        let c = &inst.circuit;
        let (n, d) = (c.n, c.depth());
        let gamma = c.noise.gamma;
        let ell_max = n * (d + 1);
        let by_weight = approximate_observable_by_weight(c, &inst.o, ell_max).map_err(|e| e.to_string())?;
        let exact = oracle.exact_heisenberg(c, &inst.o).map_err(|e| e.to_string())?;
        let norm = inst.o.frobenius_norm();
        for ell in (d + 1)..=ell_max {
            let r = rms_against(&StateEnsemble::ComputationalBasis { n }, &by_weight[ell], &exact, oracle.cap)
                .map_err(|e| e.to_string())?;
            let bound = error_bound_uniform(gamma, d, ell) * norm;
            checks += 1;
            if bound > 0.0 {
                tightest = tightest.max(r.rms / bound);
            }
            if r.rms > bound + ROUNDING {
                return Err(format!("n={n} d={d} γ={gamma} ℓ={ell}: rms {} > bound {bound}", r.rms));
            }
        }
    }
    Ok(format!("{checks} (instance, ℓ) pairs, max rms/bound = {tightest:.3}"))
}

fn c3_gate_bound() -> Outcome {
    let oracle = Oracle::default();
    let mut checks = 0;
    let mut tightest = 0.0f64;
    for inst in corpus(false, CORPUS_SIZE, 2) {
        let c = &inst.circuit;
        let (n, d) = (c.n, c.depth());
        let gamma = c.noise.gamma;
        let norm = inst.o.frobenius_norm();
        for ell in 1..=n {
            let r = rms_error(&StateEnsemble::ComputationalBasis { n }, c, &inst.o, ell, Algorithm::LayerProp, &oracle)
                .map_err(|e| e.to_string())?;
            let bound = error_bound_gate(gamma, d, ell) * norm;
            tightest = tightest.max(r.rms / bound);
            if r.rms > bound + ROUNDING {
                return Err(format!("n={n} d={d} γ={gamma} ℓ={ell}: rms {} > bound {bound}", r.rms));
            }
            let mass = propagate(c, &inst.o, ell).map_err(|e| e.to_string())?.total_truncated();
            let mass_bound = (-2.0 * gamma * (ell as f64 + 1.0)).exp() * inst.o.norm_sq();
            if mass > mass_bound + ROUNDING {
                return Err(format!("n={n} d={d} γ={gamma} ℓ={ell}: truncated mass {mass} > {mass_bound}"));
            }
            checks += 1;
        }
    }
    Ok(format!("{checks} (instance, ℓ) pairs, max rms/bound = {tightest:.3}"))
}

fn c4_weight_tail() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for inst in corpus(false, CORPUS_SIZE, 2) {
        let prof = weight_profile(&inst.circuit, &inst.o).map_err(|e| e.to_string())?;
        let excess = prof.lemma2_excess(inst.circuit.noise.gamma);
        worst = worst.max(excess);
        if excess > LEMMA_TOL {
            return Err(format!(
                "n={} d={}: Q exceeds the tail bound by {excess:e}",
                inst.circuit.n,
                inst.circuit.depth()
            ));
        }
    }
    Ok(format!("{CORPUS_SIZE} gate-noise instances, max excess = {worst:.3e} (tolerance {PROFILE_TOLERANCE:e})"))
}

fn c5_tightness() -> Outcome {
    let oracle = Oracle::default();
    let mut cases = 0;
    for n in 2..=4 {
        for (k, &coef) in [0.37, -1.25, 2.0].iter().enumerate() {
            // δO = c·Z_S cut entirely by a threshold below its weight
            let support: Vec<usize> = if k == 0 { (0..n).collect() } else { vec![0, k.min(n - 1)] };
            let z = PauliString::z_on(n, support.iter().copied());
            let o = PauliSum::single(z.clone(), coef);
            let empty = Circuit::new(n, vec![], NoiseSpec::gate_based(0.0)).map_err(|e| e.to_string())?;
            let ell = z.weight() - 1;
            let r = rms_error(&StateEnsemble::ComputationalBasis { n }, &empty, &o, ell, Algorithm::LayerProp, &oracle)
                .map_err(|e| e.to_string())?;
            if (r.rms - coef.abs()).abs() > TIGHT_TOL || (r.bound - coef.abs()).abs() > TIGHT_TOL {
                return Err(format!("n={n} c={coef}: rms {} bound {}", r.rms, r.bound));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} cases with rms = bound = |c|"))
}

fn nonidentity_norm(h: &DenseOperator) -> f64 {
    let id = h.trace() / h.dim() as f64;
    let f = h.normalized_frobenius();
    (f * f - id.norm_sqr()).max(0.0).sqrt()
}

fn c6_depth_threshold() -> Outcome {
    let oracle = Oracle::default();
    let mut tightest = 0.0f64;
    for inst in corpus(true, CORPUS_SIZE, 1) {
        let c = &inst.circuit;
        let h = oracle.exact_heisenberg(c, &inst.o).map_err(|e| e.to_string())?;
        let lhs = nonidentity_norm(&h);
        let bound = (-c.noise.gamma * (c.depth() as f64 + 1.0)).exp() * inst.o.frobenius_norm();
        tightest = tightest.max(lhs / bound);
        if lhs > bound + LEMMA_TOL {
            return Err(format!("n={} d={}: {lhs} > {bound}", c.n, c.depth()));
        }
    }
    Ok(format!("{CORPUS_SIZE} uniform instances, max ratio = {tightest:.3}"))
}

fn c7_sampling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checks = 0;
    let mut tightest = 0.0f64;
    for i in 0..24 {
        let n = 1 + i % 4;
        let d = 1 + (i / 4) % 3;
        let noise = match i % 3 {
            0 => NoiseSpec::readout_only(0.2 + 0.3 * (i % 2) as f64),
            1 => NoiseSpec::uniform(0.25),
            _ => NoiseSpec::gate_based(0.3),
        };
        let c = random_layered(n, d, noise, &mut rng);
        let rho = random_state(n, &mut rng);
        let gamma = c.noise.gamma;
        let exact_p = Oracle::default().output_distribution(&c, &rho).map_err(|e| e.to_string())?;
        let pre = Oracle::default().without_readout().output_distribution(&c, &rho).map_err(|e| e.to_string())?;
        let alpha_bar = collision_alpha(&pre);
        for ell_s in 1..=n {
            let exact =
                fourier_coefficients(&c, &rho, ell_s, Backend::Oracle { cap: 10 }).map_err(|e| e.to_string())?;
            let mut backends = vec![Backend::LayerProp { ell: 1 }, Backend::LayerProp { ell: n }];
            if c.noise.model == pauliprop::NoiseModel::Uniform {
                backends.push(Backend::PathSum { ell: d + 1 });
            }
            for backend in backends {
                let table = fourier_coefficients(&c, &rho, ell_s, backend).map_err(|e| e.to_string())?;
                let eps_prime = masks(n, ell_s)
                    .iter()
                    .map(|t| (table.coefficient(t) - exact.coefficient(t)).abs())
                    .fold(0.0, f64::max);
                let induced = table.induced_distribution().map_err(|e| e.to_string())?;
                let tvd = total_variation(&induced, &exact_p);
                let bound = lemma4_bound(eps_prime, n, ell_s, alpha_bar, gamma);
                tightest = tightest.max(tvd / bound);
                if tvd > bound + ROUNDING {
                    return Err(format!("n={n} d={d} ℓ_s={ell_s} {backend:?}: tvd {tvd} > {bound}"));
                }
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} (instance, ℓ_s, backend) triples, max tvd/bound = {tightest:.3}"))
}

fn c8_nonunital() -> Outcome {
    let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0 * 4.0 / 7.0).collect();
    // composition A† = Ã†∘D, against the dense emission channel
    for &gs in &grid {
        let dec = decompose(gs).map_err(|e| e.to_string())?;
        let damp = 1.0 - gs / 2.0;
        if (dec.gamma - (-damp.ln())).abs() > 1e-15 {
            return Err(format!("γ mismatch at γ_s={gs}"));
        }
        for dir in [Direction::Plus, Direction::Minus] {
            for l in Letter::ALL {
                let p = PauliString::single(1, 0, l);
                let mut dense = DenseOperator::pauli(&p);
                dense.emit_heisenberg(0, dir, gs);
                let from_dense = dense.to_pauli_sum().map_err(|e| e.to_string())?;
                let f = if l == Letter::I { 1.0 } else { damp };
                for (letter, coef) in emission_heisenberg_action(dir, gs, l) {
                    let q = PauliString::single(1, 0, letter);
                    if (from_dense.coefficient(&q) - coef).abs() > 1e-14 {
                        return Err(format!("A† mismatch on {l:?} at γ_s={gs}"));
                    }
                }
                let composed: Vec<(Letter, f64)> =
                    dec.atilde_action(dir, l).into_iter().map(|(m, c)| (m, c * f)).collect();
                for (m, c) in composed {
                    let q = PauliString::single(1, 0, m);
                    if (from_dense.coefficient(&q) - c).abs() > 1e-14 {
                        return Err(format!("Ã†∘D mismatch on {l:?} at γ_s={gs}"));
                    }
                }
            }
        }
    }
    // mean-square contraction
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_ratio = 0.0f64;
    for &gs in &grid {
        for n in 1..=3 {
            let o = random_pauli_sum(n, 4, &mut rng);
            for site in 0..n {
                let r = mean_square_contraction(&o, site, gs).map_err(|e| e.to_string())?;
                worst_ratio = worst_ratio.max(r);
                if r > 1.0 + ROUNDING {
                    return Err(format!("contraction {r} at γ_s={gs}"));
                }
            }
        }
    }
    // RMS over directions, and exactness of both algorithms
    let oracle = Oracle::default();
    let mut depth_checks = 0;
    let mut worst_exact = 0.0f64;
    for i in 0..30 {
        let n = 1 + i % 4;
        let d = (i / 4) % 3;
        let gs = grid[(3 * i + 1) % grid.len()];
        let seed = rng.random::<u64>();
        let c = random_layered(n, d, NoiseSpec::nonunital(gs, seed), &mut rng);
        let o = random_pauli_sum(n, 3, &mut rng);
        let gamma = c.noise.effective_gamma();
        if n * (d + 1) <= 12 {
            let rms = direction_rms_nonidentity_norm(&c, &o, gs).map_err(|e| e.to_string())?;
            let bound = (-gamma * (d as f64 + 1.0)).exp() * o.frobenius_norm();
            if rms > bound + LEMMA_TOL {
                return Err(format!("n={n} d={d} γ_s={gs}: direction rms {rms} > {bound}"));
            }
            depth_checks += 1;
        }
        let rho = random_state(n, &mut rng);
        let assignment = EmissionAssignment::for_circuit(&c).map_err(|e| e.to_string())?;
        let exact = oracle.exact_expectation(&c, &rho, &o).map_err(|e| e.to_string())?;
        for (alg, ell) in [(Algorithm::LayerProp, n), (Algorithm::PathSum, n * (d + 1))] {
            let v = expectation_nonunital(&c, &o, &rho, ell, &assignment, alg).map_err(|e| e.to_string())?;
            worst_exact = worst_exact.max((v - exact).abs());
            if (v - exact).abs() > EXACT_TOL {
                return Err(format!("{alg:?} at n={n} d={d}: {v} vs {exact}"));
            }
        }
    }
    Ok(format!(
        "composition exact on {} rates, max contraction = {worst_ratio:.4}, {depth_checks} depth checks, max |Δ| = {worst_exact:.3e}",
        grid.len()
    ))
}

fn compositions(total: usize, parts: usize) -> u128 {
    // positive compositions of `total` into `parts` parts, by enumeration
    if parts == 0 {
        return u128::from(total == 0);
    }
    (1..=total).map(|first| compositions(total - first, parts - 1)).sum()
}

fn c9_counting() -> Outcome {
    for ell in 0..=12 {
        for d in 0..=12 {
            let want = compositions(ell + 1, d + 1);
            if composition_count(ell, d).to_string() != want.to_string() {
                return Err(format!("composition_count({ell}, {d}) != {want}"));
            }
        }
    }
    for n in 0..=12usize {
        let mut by_weight = vec![0u128; n + 1];
        for x in 0u64..(1u64 << (2 * n)) {
            // two bits per qubit; a qubit is non-identity when either bit is set
            let w = ((x | (x >> 1)) & 0x5555_5555_5555_5555).count_ones() as usize;
            by_weight[w] += 1;
        }
        let mut acc = 0u128;
        for ell in 0..=12 {
            if ell <= n {
                acc += by_weight[ell];
            }
            if dl_count(n, ell).to_string() != acc.to_string() {
                return Err(format!("dl_count({n}, {ell}) != {acc}"));
            }
        }
    }
    Ok("ℓ ≤ 12, n ≤ 12 all match".into())
}

fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel).to_str().unwrap().to_string()
}

fn cli(args: &[String], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pauliprop"))
        .args(args)
        .env("PAULIPROP_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn c10_determinism() -> Outcome {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<String>>();
    let (bell, ghz, rot, emit) = (
        data("circuits/bell.json"),
        data("circuits/ghz4_gate.json"),
        data("circuits/rotations_readout.json"),
        data("circuits/emission.json"),
    );
    let (zz, g4, z3) = (data("observables/zz.txt"), data("observables/ghz4.txt"), data("observables/z3.txt"));
    let commands: Vec<Vec<String>> = vec![
        s(&["expval", "--circuit", &bell, "--observable", &zz, "--ell", "4", "--check"]),
        s(&["--format", "jsonl", "expval", "--circuit", &ghz, "--observable", &g4, "--epsilon", "0.3"]),
        s(&["expval", "--circuit", &emit, "--observable", &z3, "--ell", "3", "--algorithm", "layer-prop"]),
        s(&["sample", "--circuit", &rot, "--ell-s", "2", "--seed", "11", "--count", "500"]),
        s(&[
            "--format",
            "csv",
            "sample",
            "--circuit",
            &rot,
            "--ell-s",
            "3",
            "--backend",
            "path-sum",
            "--ell",
            "6",
            "--counts",
        ]),
        s(&["sample", "--circuit", &ghz, "--ell-s", "2", "--ell", "2", "--count", "300"]),
        s(&["sample", "--circuit", &rot, "--ell-s", "3", "--backend", "lightcone-exact", "--distribution"]),
        s(&["state", "--circuit", &ghz, "--ell", "3"]),
        s(&["state", "--circuit", &bell, "--ell", "2", "--check"]),
        s(&[
            "--format",
            "csv",
            "analyze",
            "--gamma",
            "0.1",
            "--depth",
            "15",
            "--epsilon",
            "0.01",
            "--n",
            "30",
            "--ell",
            "40",
            "--log-chi",
            "20",
        ]),
        s(&["weights", "--circuit", &ghz, "--observable", &g4]),
        s(&["weights", "--circuit", &rot, "--observable", &z3, "--summary"]),
        s(&["validate", "--circuit", &emit]),
        s(&["--format", "jsonl", "bench", "--circuit", &ghz, "--observable", &g4, "--ell-max", "4"]),
    ];
    for args in &commands {
        let first = cli(args, "1")?;
        if first.is_empty() {
            return Err(format!("{args:?}: empty output"));
        }
        for threads in ["4", "1", "4"] {
            if cli(args, threads)? != first {
                return Err(format!("{args:?}: output differs at {threads} threads"));
            }
        }
    }
    Ok(format!("{} invocations identical at 1 and 4 threads over repeated runs", commands.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("C1 oracle equivalence in the exact regime", c1_oracle_equivalence),
        ("C2 uniform-noise path-sum error bound", c2_uniform_bound),
        ("C3 gate-noise error bound and truncated mass", c3_gate_bound),
        ("C4 weight-tail bound at every channel step", c4_weight_tail),
        ("C5 tightness witness", c5_tightness),
        ("C6 depth threshold", c6_depth_threshold),
        ("C7 sampling total variation", c7_sampling),
        ("C8 emission noise", c8_nonunital),
        ("C9 counting functions", c9_counting),
        ("C10 CLI determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
