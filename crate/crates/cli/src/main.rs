//! `wtf`: evaluate packets, apply the model operators, measure tree norms,
//! decompose collections, run verification targets and plot tiles.

mod commands;
mod io;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "wtf", version, about = "Exact Walsh time-frequency analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Writes the Walsh function w_l on [0, 1) as a step function.
    EvalWalsh {
        #[arg(long)]
        l: u64,
        #[arg(long = "M", default_value_t = 4)]
        m: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Writes the wave packet of the tile (k, n, l), with |I| = 2^-k.
    Packet {
        #[arg(long, allow_hyphen_values = true)]
        k: i32,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        l: i64,
        #[arg(long = "M", default_value_t = 4)]
        m: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Applies a model operator to step functions.
    Apply {
        op: Operator,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluates a size or energy functional exactly.
    Norm {
        which: Norm,
        #[command(flatten)]
        inputs: Inputs,
        /// Subtile index of size and energy.
        #[arg(long, default_value_t = 1)]
        j: usize,
        #[arg(long, value_enum, default_value_t = WitnessArg::Ambient)]
        witnesses: WitnessArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a tree selection at level n, or the full partition without --n.
    Decompose {
        #[arg(long, value_enum)]
        which: Which,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<i32>,
        #[arg(long, default_value_t = 1)]
        j: usize,
        #[arg(long, default_value_t = wtf_core::decompose::DEFAULT_C0)]
        c0: i64,
        #[arg(long, value_enum, default_value_t = WitnessArg::Collection)]
        witnesses: WitnessArg,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Runs a verification target; exits 2 when an assertion fails.
    Verify(VerifyArgs),
    /// Records baselines on a long run.
    Calibrate {
        #[arg(long)]
        seed: u64,
        /// Trials per inequality target.
        #[arg(long, default_value_t = 4000)]
        trials: usize,
        /// Trials per restricted-type experiment.
        #[arg(long, default_value_t = 40000)]
        restricted_trials: usize,
        /// Baseline directory; WTF_BASELINE_DIR or the shipped store when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Draws a tile collection in the phase plane as SVG.
    Plot {
        #[arg(long)]
        tiles: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Trees to colour: a decompose report or a JSON array of trees.
        #[arg(long)]
        trees: Option<PathBuf>,
    },
}

/// Input files shared by `apply`, `norm` and `decompose`.
#[derive(Args, Debug)]
struct Inputs {
    /// Tile collection (P, or the only collection).
    #[arg(long)]
    tiles: PathBuf,
    /// Second collection Q; defaults to --tiles.
    #[arg(long)]
    tiles_q: Option<PathBuf>,
    #[arg(long)]
    f1: Option<PathBuf>,
    #[arg(long)]
    f2: Option<PathBuf>,
    /// Choice function N.
    #[arg(long = "N")]
    choice: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// An inequality target, an identity, a restricted-type experiment or holder-scaling.
    #[arg(long)]
    target: String,
    /// Grid size; the largest grid for holder-scaling.
    #[arg(long = "M", default_value_t = 4)]
    m: u32,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Target parameter `key=value`; repeatable.
    #[arg(long = "param")]
    params: Vec<String>,
    /// JSON summary.
    #[arg(long)]
    report: Option<PathBuf>,
    /// One CSV row per trial.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Baseline directory; WTF_BASELINE_DIR or the shipped store when omitted.
    #[arg(long)]
    baselines: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Operator {
    Carleson,
    CarlesonAdjoint,
    Bht,
    Tprime,
    Tdoubleprime,
    T,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Norm {
    Size,
    Energy,
    Bsize,
    Benergy,
    SizePrime,
    EnergyPrime,
    SizeDp,
    EnergyDp,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Which {
    Size,
    Bsize,
    Prime,
    Doubleprime,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum WitnessArg {
    Ambient,
    Collection,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Exhaustive,
    MaximalTree,
    Auto,
}

/// Assertion failures.
const EXIT_FAILED: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
