//! `caqc-lab`: CQCA analysis, compilation, measurement-based runs, resource lattices
//! and the learnability experiment from one binary.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "caqc-lab", version, about = "Clifford QCA based quantum computation toolkit", arg_required_else_help = true)]
pub struct Cli {
    /// Seed for every random stage (outcomes, parameters, data).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Also write outputs and a manifest into this directory.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Inspect a CQCA rule.
    #[command(subcommand)]
    Cqca(CqcaCmd),
    /// Compile rotation layers into the generator program.
    Compile(CompileArgs),
    /// Measurement-based runs.
    #[command(subcommand)]
    Mbqc(MbqcCmd),
    /// Resource-state lattices.
    #[command(subcommand)]
    Resource(ResourceCmd),
    /// Parameterized circuits on stilted datasets.
    #[command(subcommand)]
    Pqc(PqcCmd),
}

#[derive(Args, Debug)]
pub struct RuleArg {
    /// Built-in rule name (cluster, periodic-cluster, fractal-cluster, hadamard, identity)
    /// or a path to a rule JSON file.
    #[arg(long)]
    pub rule: String,
}

#[derive(Subcommand, Debug)]
pub enum CqcaCmd {
    /// Simple/entangling flags and glider/periodic/fractal class.
    Classify {
        #[command(flatten)]
        rule: RuleArg,
        /// Also validate the rule on a ring of this size.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        search_radius: Option<usize>,
        #[arg(long, default_value_t = caqc_core::cqca::DEFAULT_PERIOD_CAP)]
        period_cap: usize,
    },
    /// Smallest L with T^L = id on a ring of n qubits.
    Period {
        #[command(flatten)]
        rule: RuleArg,
        #[arg(long)]
        n: usize,
        /// Give up after this many steps (default 4n).
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Coefficients of T^2(Z) in terms of Z and T(Z) translates.
    Lemma2 {
        #[command(flatten)]
        rule: RuleArg,
        /// Ring size, at least 4r+1 (default 4r+1).
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    #[command(flatten)]
    pub rule: RuleArg,
    #[arg(long)]
    pub n: usize,
    /// Number of period-length blocks.
    #[arg(long, default_value_t = 1)]
    pub blocks: usize,
    /// Interleave the X-type layers of the extended construction.
    #[arg(long)]
    pub extended: bool,
}

#[derive(Subcommand, Debug)]
pub enum MbqcCmd {
    /// Run the column-by-column loop on a statevector.
    Run(MbqcRunArgs),
}

#[derive(Args, Debug)]
pub struct MbqcRunArgs {
    #[command(flatten)]
    pub rule: RuleArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub depth: usize,
    /// `random`, `random:<seed>`, a CSV file (one row per iteration) or inline rows
    /// like `0.1,0.2;0.3,0.4`.
    #[arg(long, default_value = "random")]
    pub angles: String,
    /// Record byproducts instead of correcting them.
    #[arg(long)]
    pub uncorrected: bool,
    /// Alternate T' = T_1 T and T_1 iterations (two angle rows per depth).
    #[arg(long)]
    pub extended: bool,
    /// Absorb the rotations into the measurement basis.
    #[arg(long)]
    pub folded: bool,
    /// Write the final state as a binary dump.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ResourceCmd {
    /// Local generators of the n x (D+1) resource lattice.
    Build(ResourceArgs),
}

#[derive(Args, Debug)]
pub struct ResourceArgs {
    #[command(flatten)]
    pub rule: RuleArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub depth: usize,
    /// Decorated lattice from alternating T' and T_1 (2D+1 columns).
    #[arg(long)]
    pub extended: bool,
    /// For rules with T(Z) = Z: build the row-GHZ lattice instead of failing.
    #[arg(long)]
    pub ghz: bool,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    #[command(flatten)]
    pub rule: RuleArg,
    #[arg(long)]
    pub extended: bool,
    /// Rotation layers.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    #[arg(long, default_value_t = caqc_core::pqc::DEFAULT_ENCODER_REPS)]
    pub encoder_reps: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Preset {
    /// Adam, lr 0.05, 200 epochs.
    Default,
    /// The cross-model experiment schedule (restarts, then decay).
    Experiment,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum GradArg {
    ParameterShift,
    FiniteDiff,
    Adjoint,
}

#[derive(Subcommand, Debug)]
pub enum PqcCmd {
    /// Label inputs with a randomly parameterized model.
    Label {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// IDX image file; inputs come from its PCA instead of uniform noise.
        #[arg(long, requires = "labels")]
        images: Option<PathBuf>,
        /// IDX label file matching --images.
        #[arg(long, requires = "images")]
        labels: Option<PathBuf>,
        /// Keep only these classes, e.g. `0,1`.
        #[arg(long, value_delimiter = ',')]
        classes: Option<Vec<u8>>,
    },
    /// Train a model on a dataset written by `pqc label`.
    Train {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = Preset::Default)]
        preset: Preset,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        /// Mini-batch size, 0 for full batch.
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long, value_enum)]
        grad: Option<GradArg>,
    },
    /// Every model labels, every model learns; writes results.csv and summary.json.
    Experiment {
        /// JSON with models, n, depth, samples, seeds, encoder_reps, optimizer.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match commands::run(&cli).and_then(|out| output::emit(&cli, &argv[1..], &out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
