//! `rqcsample` command-line tool.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use io::{Failure, Files};

#[derive(Parser, Debug)]
#[command(
    name = "rqcsample",
    version,
    about = "Sample random quantum circuits by tensor-network contraction"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Run seed; every random draw derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Memory budget for the largest tensor, in bytes.
    #[arg(long, global = true, default_value_t = 1 << 30)]
    pub budget: u64,
    /// Annealing steps per contraction-tree search.
    #[arg(long, global = true, default_value_t = 2000)]
    pub anneal_steps: usize,
    /// Write a JSON run manifest here.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntanglerArg {
    Fsim,
    Cz,
}

/// Which outputs are fixed and which are left open.
#[derive(Args, Debug, Clone)]
pub struct Layout {
    /// One character per qubit: `0`/`1` fixed, `*` open. Defaults to the
    /// cheapest batch of `--batch-size` bitstrings with fixed zeros.
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a seeded random grid circuit.
    Generate {
        #[arg(long)]
        qubits: usize,
        #[arg(long)]
        cycles: usize,
        #[arg(long, value_enum, default_value_t = EntanglerArg::Fsim)]
        entangler: EntanglerArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search a contraction tree and write it as a plan file.
    Plan {
        #[arg(long)]
        circuit: PathBuf,
        #[command(flatten)]
        layout: Layout,
        /// Slice at least this many legs.
        #[arg(long)]
        min_sliced: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Norm table of the slices over a set of vertices.
    Norms {
        #[arg(long)]
        circuit: PathBuf,
        /// Comma-separated vertex ids; by default `--k` early vertices.
        #[arg(long)]
        vertices: Option<String>,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[command(flatten)]
        layout: Layout,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choose partially sliced vertices and the slices reaching a fidelity.
    SelectSlices {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        fidelity: f64,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        layout: Layout,
        /// Also write the contraction tree the plan belongs to.
        #[arg(long)]
        tree_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Amplitudes of one bitstring or a batch.
    Amplitudes {
        #[arg(long)]
        circuit: PathBuf,
        #[command(flatten)]
        layout: Layout,
        /// Contraction tree from `select-slices --tree-out`.
        #[arg(long, requires = "slices")]
        plan: Option<PathBuf>,
        /// Slice plan from `select-slices`.
        #[arg(long, requires = "plan")]
        slices: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        fidelity: f64,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw bitstrings by rejection sampling over batches.
    Sample {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        num: usize,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[command(flatten)]
        layout: Layout,
        #[arg(long, default_value_t = 1.0)]
        fidelity: f64,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, requires = "slices")]
        plan: Option<PathBuf>,
        #[arg(long, requires = "plan")]
        slices: Option<PathBuf>,
        /// Also write `<bits> <batch> <acceptance probability>` per sample.
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linear cross-entropy score of samples against exact probabilities.
    Xeb {
        #[arg(long)]
        samples: PathBuf,
        /// `<bits> <probability>` lines, e.g. from `oracle probs`.
        #[arg(long)]
        probs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pick the largest amplitudes of one batch.
    Spoof {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        num: usize,
        #[arg(long)]
        fidelity: f64,
        /// Keep this fraction of the batch instead of `--num`.
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long)]
        batch_bits: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense statevector reference.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Porter-Thomas and slice-norm statistics.
    Diagnose {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, default_value_t = 64)]
        batch_size: usize,
        /// Also report the norm spread of this many early vertices.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// `<bits> <probability>` for the listed bitstrings, or all of them.
    Probs {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact samples.
    Sample {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        num: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact amplitudes matching a pattern (all by default).
    Amplitudes {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate { .. } => "generate",
            Command::Plan { .. } => "plan",
            Command::Norms { .. } => "norms",
            Command::SelectSlices { .. } => "select-slices",
            Command::Amplitudes { .. } => "amplitudes",
            Command::Sample { .. } => "sample",
            Command::Xeb { .. } => "xeb",
            Command::Spoof { .. } => "spoof",
            Command::Oracle {
                command: OracleCommand::Probs { .. },
            } => "oracle probs",
            Command::Oracle {
                command: OracleCommand::Sample { .. },
            } => "oracle sample",
            Command::Oracle {
                command: OracleCommand::Amplitudes { .. },
            } => "oracle amplitudes",
            Command::Diagnose { .. } => "diagnose",
        }
    }
}

fn run(cli: Cli, args: &[String]) -> Result<(), Failure> {
    if let Some(t) = cli.global.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let start = Instant::now();
    let mut files = Files::default();
    let name = cli.command.name();
    commands::dispatch(&cli.global, cli.command, &mut files)?;
    if let Some(path) = &cli.global.manifest {
        let text = io::manifest(name, args, cli.global.seed, &files, start.elapsed().as_millis());
        std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code() as u8)
        }
    }
}
