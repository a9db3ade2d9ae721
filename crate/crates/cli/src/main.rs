//! `pauliprop` command-line tool.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

/// Classical simulation of noisy quantum circuits by truncated Pauli propagation.
///
/// All logarithms are natural. Circuits are JSON documents, observables are text
/// files with one `<coefficient> <paulis>` term per line, and states are given as
/// `basis:0101`, `mixed:c=1` or `product:<file>`.
#[derive(Parser, Debug)]
#[command(name = "pauliprop", version)]
struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, env = "PAULIPROP_THREADS")]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmArg {
    /// Path sum for uniform and emission noise, layerwise otherwise.
    Auto,
    PathSum,
    LayerProp,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendArg {
    PathSum,
    LayerProp,
    LightconeExact,
    Oracle,
}

#[derive(Args, Debug, Clone)]
pub struct Truncation {
    /// Truncation threshold ℓ.
    #[arg(long, conflicts_with = "epsilon")]
    ell: Option<usize>,
    /// Target relative error; ℓ is then chosen from the error bound of the algorithm.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Auto)]
    algorithm: AlgorithmArg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expectation value tr(C{ρ} O).
    Expval {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        observable: PathBuf,
        /// Input state (default: all zeros).
        #[arg(long)]
        state: Option<String>,
        #[command(flatten)]
        truncation: Truncation,
        /// Also evaluate the dense oracle and report the difference.
        #[arg(long)]
        check: bool,
        /// Qubit limit of the dense oracle.
        #[arg(long, default_value_t = pauliprop::oracle::DEFAULT_CAP)]
        cap: usize,
    },
    /// Computational-basis samples from the low-weight Fourier expansion.
    Sample {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        state: Option<String>,
        /// Largest Z-mask weight ℓ_s kept in the expansion.
        #[arg(long)]
        ell_s: usize,
        #[arg(long, value_enum, default_value_t = BackendArg::LayerProp)]
        backend: BackendArg,
        /// Truncation threshold for the path_sum and layer_prop backends (default: n).
        #[arg(long)]
        ell: Option<usize>,
        /// Qubit limit for the lightcone_exact and oracle backends.
        #[arg(long, default_value_t = pauliprop::oracle::DEFAULT_CAP)]
        cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Emit a bitstring,count table instead of one string per line.
        #[arg(long, conflicts_with = "distribution")]
        counts: bool,
        /// Emit the exact distribution the sampler draws from (n ≤ 20).
        #[arg(long)]
        distribution: bool,
    },
    /// Pauli table of the truncated output state C{ρ}.
    State {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        state: Option<String>,
        #[arg(long, conflicts_with = "epsilon")]
        ell: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Report the trace-norm error against the dense oracle instead of the table.
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = pauliprop::oracle::DEFAULT_CAP)]
        cap: usize,
    },
    /// Truncation thresholds, error bounds and counting functions.
    Analyze {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        epsilon: f64,
        /// Qubit count, for Pauli-count predictions.
        #[arg(long)]
        n: Option<usize>,
        /// Evaluate the bounds at this ℓ as well.
        #[arg(long)]
        ell: Option<usize>,
        /// Natural log of a runtime budget χ, for the noise-sensitivity threshold (needs --n).
        #[arg(long)]
        log_chi: Option<f64>,
    },
    /// Weight distribution P, tail Q and current J after every gate and channel.
    Weights {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        observable: PathBuf,
        /// Print the continuity residual and weight-tail bound checks only.
        #[arg(long)]
        summary: bool,
        #[arg(long, default_value_t = pauliprop::diagnostics::PROFILE_CAP)]
        cap: usize,
    },
    /// Checks a circuit file and, when small enough, compares both algorithms with the oracle.
    Validate {
        #[arg(long)]
        circuit: PathBuf,
        /// Observable for the cross-check (default: Σ_q Z_q).
        #[arg(long)]
        observable: Option<PathBuf>,
        #[arg(long)]
        state: Option<String>,
        #[arg(long, default_value_t = pauliprop::oracle::DEFAULT_CAP)]
        cap: usize,
    },
    /// Table sizes and path counts against the counting predictions.
    Bench {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        observable: PathBuf,
        #[arg(long, default_value_t = 6)]
        ell_max: usize,
        /// Add wall-clock seconds (output then varies between runs).
        #[arg(long)]
        timing: bool,
    },
}

fn run(cli: Cli) -> anyhow::Result<String> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let table = match cli.command {
        Command::Expval { circuit, observable, state, truncation, check, cap } => {
            commands::expval(&circuit, &observable, state.as_deref(), &truncation, check, cap)?
        }
        Command::Sample { circuit, state, ell_s, backend, ell, cap, seed, count, counts, distribution } => {
            let opts = commands::SampleOptions { ell_s, backend, ell, cap, seed, count, counts, distribution };
            commands::sample(&circuit, state.as_deref(), &opts)?
        }
        Command::State { circuit, state, ell, epsilon, check, cap } => {
            commands::state(&circuit, state.as_deref(), ell, epsilon, check, cap)?
        }
        Command::Analyze { gamma, depth, epsilon, n, ell, log_chi } => {
            commands::analyze(gamma, depth, epsilon, n, ell, log_chi)?
        }
        Command::Weights { circuit, observable, summary, cap } => {
            commands::weights(&circuit, &observable, summary, cap)?
        }
        Command::Validate { circuit, observable, state, cap } => {
            commands::validate(&circuit, observable.as_deref(), state.as_deref(), cap)?
        }
        Command::Bench { circuit, observable, ell_max, timing } => {
            commands::bench(&circuit, &observable, ell_max, timing)?
        }
    };
    Ok(table.render(cli.format))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // clap spreads one diagnostic over several lines; keep it on one
            let msg = e.to_string();
            let text: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .filter(|l| !l.is_empty())
                .collect();
            let joined = text.join(" ");
            eprintln!("error: {}", joined.strip_prefix("error: ").unwrap_or(&joined));
            return ExitCode::FAILURE;
        }
    };
    let target = cli.output.clone();
    match run(cli) {
        Ok(text) => {
            let written = match target {
                Some(path) => std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())
                }
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Err(e) => {
            let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            eprintln!("error: {}", chain.join(": ").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
