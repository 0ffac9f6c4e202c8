use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use atrophy::harness::{self, Experiment, Preset};
use atrophy_cli::{experiment_in, out_dir, resolve_config, write_outputs, CliError, Overrides};

#[derive(Parser)]
#[command(name = "atrophy", version, about = "Attractor-network lesion and compensation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Overlap against synaptic deletion, with and without compensation.
    DeletionBaseline(RunArgs),
    /// Recall of sets stored at different stages of lesioning.
    SetGradient(RunArgs),
    /// Capacity and retrieval time against clustering.
    Capacity(RunArgs),
    /// Small-world against flat-random decline under deletion.
    Robustness(RunArgs),
    /// Tau lesioning with local compensation.
    Tau(RunArgs),
    /// Transmission profiles under tau lesioning alone.
    LesionSnapshot(RunArgs),
    /// Resolve a config and check every constraint without running.
    ValidateConfig(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Desk,
    Paper,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Desk => Preset::Desk,
            PresetArg::Paper => Preset::Paper,
        }
    }
}

#[derive(Args)]
struct Common {
    /// TOML file with sections overriding the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "desk")]
    preset: PresetArg,
    /// Master seed (overrides run.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Trial count (overrides run.trials).
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Output directory (default: $ATROPHY_OUT_DIR, then run.out_dir, then ./out).
    #[arg(long)]
    out_dir: Option<String>,
    /// Also write SVG line plots.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Experiment whose preset to start from; defaults to the file's
    /// `experiment` key, then deletion_baseline.
    #[arg(long)]
    experiment: Option<String>,
}

fn read_file(path: &Option<PathBuf>) -> Result<Option<String>, CliError> {
    path.as_ref()
        .map(|p| std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("reading {}: {e}", p.display()))))
        .transpose()
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        seed: c.seed,
        trials: c.trials,
        out_dir: None,
    }
}

fn run_experiment(experiment: Experiment, args: RunArgs) -> Result<(), CliError> {
    let text = read_file(&args.common.config)?;
    if let Some(named) = text.as_deref().map(experiment_in).transpose()?.flatten() {
        if named != experiment {
            return Err(CliError::Config(format!(
                "config file is for `{}`, not `{}`",
                named.id(),
                experiment.id()
            )));
        }
    }
    let cfg = resolve_config(
        experiment,
        args.common.preset.into(),
        text.as_deref(),
        &overrides(&args.common),
    )?;
    let dir = out_dir(&cfg, args.out_dir.as_deref());
    let result = harness::run(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    for path in write_outputs(&result, &dir, args.plot)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<(), CliError> {
    let text = read_file(&args.common.config)?;
    let experiment = match &args.experiment {
        Some(name) => Experiment::ALL
            .into_iter()
            .find(|e| e.id() == name.replace('-', "_"))
            .ok_or_else(|| CliError::Config(format!("unknown experiment `{name}`")))?,
        None => text
            .as_deref()
            .map(experiment_in)
            .transpose()?
            .flatten()
            .unwrap_or(Experiment::DeletionBaseline),
    };
    let cfg = resolve_config(
        experiment,
        args.common.preset.into(),
        text.as_deref(),
        &overrides(&args.common),
    )?;
    println!("ok: {} (seed {}, {} trials)", cfg.experiment.id(), cfg.run.seed, cfg.run.trials);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::DeletionBaseline(a) => run_experiment(Experiment::DeletionBaseline, a),
        Command::SetGradient(a) => run_experiment(Experiment::SetGradient, a),
        Command::Capacity(a) => run_experiment(Experiment::Capacity, a),
        Command::Robustness(a) => run_experiment(Experiment::Robustness, a),
        Command::Tau(a) => run_experiment(Experiment::Tau, a),
        Command::LesionSnapshot(a) => run_experiment(Experiment::LesionSnapshot, a),
        Command::ValidateConfig(a) => validate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("atrophy: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
