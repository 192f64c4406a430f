//! `dln` — compute gradient-flow limit points of diagonal linear networks
//! and everything needed to study their approximation error: the ℓ¹
//! minimizer, null-space constants, theorem bounds, α sweeps, and the
//! tight sharpness constructions.
//!
//! Exit codes: 0 success, 2 assumption violation (infeasible system,
//! degenerate support, invalid parameters), 3 solver failure, 4 I/O error.

mod commands;
mod errors;

use clap::{Args, Parser, Subcommand};
use errors::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dln", version, about)]
struct Cli {
    /// Worker threads for parallel solves (default: rayon's choice).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InstanceArg {
    /// Instance JSON produced by `dln gen`.
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Args)]
struct OutArg {
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded Gaussian sparse-recovery instance as JSON.
    Gen {
        /// Rows of A.
        #[arg(long, default_value_t = 30)]
        n: usize,
        /// Columns of A.
        #[arg(long, default_value_t = 100)]
        d: usize,
        /// Ground-truth sparsity.
        #[arg(long, default_value_t = 3)]
        s: usize,
        /// Noise level η in y = y₀ + η‖y₀‖₂·noise.
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the headline experiment size N = 60, d = 300, s = 5.
        #[arg(long)]
        paper_scale: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Basis pursuit with support/sign/uniqueness certificate (JSON).
    L1 {
        #[command(flatten)]
        instance: InstanceArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Null-space property constants ϱ, ϱ⁻, ϱ̃, κ* (JSON).
    Constants {
        #[command(flatten)]
        instance: InstanceArg,
        /// Depth selecting the complement weighting in the non-unique case.
        #[arg(long, default_value_t = 2)]
        depth: u32,
        /// Pattern-enumeration cap; larger supports use the heuristic.
        #[arg(long, default_value_t = 16)]
        cap: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Evaluate the error-bound theorems at each α (JSON).
    Bounds {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        /// Comma-separated, strictly decreasing α values.
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Single mirror-descent solve; writes the trace as JSON.
    Solve {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(long)]
        alpha: f64,
        /// Loss tolerance ‖y − Ax‖₂² at termination.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 500_000)]
        max_iters: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// α sweep: CSV rows of errors (and bounds), optional SVG plot.
    Sweep {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 500_000)]
        max_iters: usize,
        /// Attach theorem bounds to each row.
        #[arg(long)]
        bounds: bool,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Also write a log-log SVG plot here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Build a sharpness instance and tabulate its fixed-point limits (CSV).
    Sharpness {
        /// Geometry of the construction.
        #[arg(long, value_parser = ["shallow", "deep"])]
        geometry: String,
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long)]
        rho: f64,
        /// ϱ⁻ for the shallow family (ϱ̃ = 2ϱ⁻ − ϱ follows).
        #[arg(long)]
        rho_minus: Option<f64>,
        /// Condition number κ* for the shallow family.
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Shallow minimizer layout: tight ℓ¹ upper bound or ℓ∞ lower bound.
        #[arg(long, value_parser = ["upper-a", "lower-b"], default_value = "upper-a")]
        variant: String,
        /// Depth for the deep family (ignored for shallow).
        #[arg(long, default_value_t = 3)]
        depth: u32,
        /// Free parameter γ₁ of the deep family.
        #[arg(long, default_value_t = 0.0)]
        gamma1: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        // Ignore failure: the global pool may already exist.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match cli.command {
        Command::Gen {
            n,
            d,
            s,
            eta,
            seed,
            paper_scale,
            out,
        } => commands::gen(n, d, s, eta, seed, paper_scale, out.out),
        Command::L1 { instance, out } => commands::l1(&instance.instance, out.out),
        Command::Constants {
            instance,
            depth,
            cap,
            out,
        } => commands::constants(&instance.instance, depth, cap, out.out),
        Command::Bounds {
            instance,
            depth,
            alpha,
            out,
        } => commands::bounds(&instance.instance, depth, &alpha, out.out),
        Command::Solve {
            instance,
            depth,
            alpha,
            tol,
            max_iters,
            out,
        } => commands::solve(&instance.instance, depth, alpha, tol, max_iters, out.out),
        Command::Sweep {
            instance,
            depth,
            alpha,
            tol,
            max_iters,
            bounds,
            out,
            svg,
        } => commands::sweep(
            &instance.instance,
            depth,
            &alpha,
            tol,
            max_iters,
            bounds,
            &out,
            svg.as_deref(),
        ),
        Command::Sharpness {
            geometry,
            d,
            rho,
            rho_minus,
            kappa,
            variant,
            depth,
            gamma1,
            alpha,
            out,
        } => commands::sharpness(
            &geometry, d, rho, rho_minus, kappa, &variant, depth, gamma1, &alpha, &out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
