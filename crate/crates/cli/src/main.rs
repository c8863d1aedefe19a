use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chilasso::model::Model;
use chilasso_cli::commands::{
    exit_code, run_coherence, run_experiment, run_gen, run_solve, SolveOverrides, EXIT_MAX_ITER,
};

#[derive(Parser)]
#[command(name = "chilasso", version, about = "Structured sparse coding: Lasso, group Lasso, HiLasso and C-HiLasso solvers with a synthetic experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic dictionary, problem and ground truth
    Gen {
        /// Synthetic spec file (kind "synth_spec")
        #[arg(long)]
        spec: PathBuf,
        /// Output directory for the three JSON artifacts
        #[arg(long)]
        out: PathBuf,
        /// Override the spec's seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve a coding problem under one model and write the report
    Solve {
        /// One of: lasso, glasso, hilasso, chilasso
        #[arg(long)]
        model: String,
        #[arg(long)]
        dict: PathBuf,
        /// Problem file with the signals to encode
        #[arg(long)]
        signals: PathBuf,
        /// Override the problem file's lambda1
        #[arg(long)]
        lambda1: Option<f64>,
        /// Override the problem file's lambda2
        #[arg(long)]
        lambda2: Option<f64>,
        /// Relative-change stopping tolerance
        #[arg(long)]
        tol: Option<f64>,
        /// Outer iteration cap
        #[arg(long = "max-iter")]
        max_iter: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a sweep experiment and write per-row and summary CSVs
    Experiment {
        /// Experiment spec file (kind "experiment")
        #[arg(long)]
        spec: PathBuf,
        /// Output CSV path (the summary lands next to it)
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long = "max-iter")]
        max_iter: Option<usize>,
    },
    /// Report per-group coherences, cross-coherences and uniqueness verdicts
    Coherence {
        #[arg(long)]
        dict: PathBuf,
        /// Within-group sparsity of the first block
        #[arg(long, default_value_t = 1)]
        k1: usize,
        /// Within-group sparsity of the second block
        #[arg(long, default_value_t = 1)]
        k2: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Cmd::Gen { spec, out, seed } => run_gen(&spec, &out, seed).map(|paths| {
            for path in paths {
                println!("{}", path.display());
            }
            0
        }),
        Cmd::Solve {
            model,
            dict,
            signals,
            lambda1,
            lambda2,
            tol,
            max_iter,
            out,
        } => model
            .parse::<Model>()
            .and_then(|model| {
                let overrides = SolveOverrides { lambda1, lambda2, tol, max_iter };
                run_solve(model, &dict, &signals, &overrides, &out)
            })
            .map(|converged| {
                println!("{}", out.display());
                if converged {
                    0
                } else {
                    EXIT_MAX_ITER
                }
            }),
        Cmd::Experiment { spec, out, tol, max_iter } => {
            run_experiment(&spec, &out, tol, max_iter).map(|outcome| {
                println!("{}", outcome.rows_path.display());
                println!("{}", outcome.summary_path.display());
                println!("rows: {}", outcome.rows);
                0
            })
        }
        Cmd::Coherence { dict, k1, k2 } => run_coherence(&dict, k1, k2).map(|_| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
