use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{cmd_analyze, cmd_simulate};
use crate::config::{self, FileConfig, SweepSpec};
use crate::error::{CliError, Result};
use crate::plot::{cmd_plot, Overlay, PlotOptions};
use crate::verify::{cmd_verify, Level};

#[derive(Debug, Parser)]
#[command(name = "blocksplit", version, about = "Block fullness under batch insertions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo fullness sweep over batch sizes, written as CSV
    Simulate(SimulateArgs),
    /// Predicted fullness and closed-form bounds per batch size, as CSV
    Analyze(AnalyzeArgs),
    /// SVG plot of one or more sweep CSVs
    Plot(PlotArgs),
    /// Run the self-checks
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON file with defaults for any flag
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Batches {
    /// Block capacity B
    #[arg(long = "block-size")]
    block_size: Option<usize>,
    /// Batch sizes, comma separated
    #[arg(long, value_delimiter = ',')]
    batch: Option<Vec<usize>>,
    /// Inclusive batch range lo:hi[:step]
    #[arg(long = "batch-range")]
    batch_range: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    batches: Batches,
    /// even, deferred_even, uneven_regime1, uneven_regime2 or recommended
    #[arg(long)]
    strategy: Option<String>,
    /// Keys inserted per run
    #[arg(long)]
    insertions: Option<u64>,
    /// Independent runs per batch size
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run i uses seed + i
    #[arg(long)]
    seed: Option<u64>,
    /// Initial structure: empty (strategy default), dummy, bare or paper
    #[arg(long)]
    seeding: Option<String>,
    /// exact or relaxed (regime II only)
    #[arg(long = "uneven-mode")]
    uneven_mode: Option<String>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    batches: Batches,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[command(flatten)]
    common: Common,
    /// Sweep CSV files
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Block capacity B used to compute r/B
    #[arg(long = "block-size")]
    block_size: Option<usize>,
    /// none, lemma61 or table1
    #[arg(long)]
    overlay: Option<String>,
    #[arg(long)]
    title: Option<String>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// quick or full
    #[arg(long, default_value = "quick")]
    level: String,
}

fn load_config(path: Option<&PathBuf>) -> Result<FileConfig> {
    path.map_or_else(|| Ok(FileConfig::default()), |p| config::load(p))
}

fn block_size(flag: Option<usize>, file: &FileConfig) -> Result<usize> {
    flag.or(file.block_size)
        .ok_or_else(|| CliError::Param("--block-size is required".into()))
}

fn batch_values(flags: &Batches, file: &FileConfig) -> Result<Vec<usize>> {
    // a flag of either kind overrides both config keys
    if flags.batch.is_some() || flags.batch_range.is_some() {
        config::batch_values(flags.batch.clone(), flags.batch_range.as_deref())
    } else {
        config::batch_values(
            file.batch.clone().map(|b| b.into_vec()),
            file.batch_range.as_deref(),
        )
    }
}

fn simulate_spec(a: &SimulateArgs) -> Result<SweepSpec> {
    let file = load_config(a.common.config.as_ref())?;
    let strategy = a
        .strategy
        .as_deref()
        .or(file.strategy.as_deref())
        .ok_or_else(|| CliError::Param("--strategy is required".into()))?;
    let mut sweep = SweepSpec::new(
        config::parse_strategy(strategy)?,
        block_size(a.batches.block_size, &file)?,
        batch_values(&a.batches, &file)?,
    );
    if let Some(n) = a.insertions.or(file.insertions) {
        sweep.total_insertions = n;
    }
    if let Some(k) = a.runs.or(file.runs) {
        sweep.runs = k;
    }
    if let Some(s) = a.seed.or(file.seed) {
        sweep.base_seed = s;
    }
    if let Some(s) = a.seeding.as_deref().or(file.seeding.as_deref()) {
        sweep.seeding = config::parse_seeding(s)?;
    }
    if let Some(m) = a.uneven_mode.as_deref().or(file.uneven_mode.as_deref()) {
        sweep.uneven_mode = config::parse_uneven_mode(m)?;
    }
    if sweep.runs == 0 {
        return Err(CliError::Param("--runs must be at least 1".into()));
    }
    sweep.out = a.common.out.clone().or(file.out);
    Ok(sweep)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&simulate_spec(&a)?),
        Command::Analyze(a) => {
            let file = load_config(a.common.config.as_ref())?;
            let b = block_size(a.batches.block_size, &file)?;
            let rs = batch_values(&a.batches, &file)?;
            let out = a.common.out.clone().or(file.out);
            cmd_analyze(b, &rs, out.as_deref())
        }
        Command::Plot(a) => {
            let file = load_config(a.common.config.as_ref())?;
            let overlay = match a.overlay.as_deref().or(file.overlay.as_deref()) {
                Some(s) => s.parse()?,
                None => Overlay::None,
            };
            let opts = PlotOptions {
                block_size: block_size(a.block_size, &file)?,
                overlay,
                title: a.title.clone().or(file.title),
            };
            let out = a.common.out.clone().or(file.out);
            cmd_plot(&a.inputs, &opts, out.as_deref())
        }
        Command::Verify(a) => cmd_verify(a.level.parse::<Level>()?),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
