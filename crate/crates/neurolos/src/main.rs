use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use neurolos::pipeline::Outcome;
use neurolos::{parse_stages, run_stages, ExperimentConfig, RayonExecutor, Run, RunError, Stage};

/// ICU length-of-stay benchmark: synthetic cohorts, data marts, classical and sequence models.
#[derive(Parser)]
#[command(name = "neurolos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort as raw CSV tables.
    Generate(Common),
    /// Validate the raw tables and select neurological admissions.
    Ingest(Common),
    /// Build the static and time-series marts.
    Marts(Common),
    /// Encode, scale, oversample and run feature elimination.
    Features(Common),
    /// Random search over hyperparameters.
    Tune(Common),
    /// Fit classic models and the sequence grid.
    Train(Common),
    /// Score every model on the test stays.
    Evaluate(Common),
    /// Permutation importance on the test stays.
    Importance(Common),
    /// Write the Markdown, CSV and SVG report.
    Report(Common),
    /// Run a selection of stages in pipeline order.
    Run {
        #[command(flatten)]
        common: Common,
        /// `all` or a comma-separated list of stages.
        #[arg(long, default_value = "all")]
        stages: String,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output root; overrides the config.
    #[arg(long, env = "NEUROLOS_OUT")]
    out: Option<PathBuf>,
    /// Overrides the experiment seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Also write CREATE TABLE statements for the tables and marts here.
    #[arg(long)]
    emit_ddl: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (common, selector) = match cli.command {
        Command::Run { common, stages } => (common, stages),
        Command::Generate(c) => (c, "generate".into()),
        Command::Ingest(c) => (c, "ingest".into()),
        Command::Marts(c) => (c, "marts".into()),
        Command::Features(c) => (c, "features".into()),
        Command::Tune(c) => (c, "tune".into()),
        Command::Train(c) => (c, "train".into()),
        Command::Evaluate(c) => (c, "evaluate".into()),
        Command::Importance(c) => (c, "importance".into()),
        Command::Report(c) => (c, "report".into()),
    };
    match execute(common, &selector) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.source);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(common: Common, selector: &str) -> Result<(), RunError> {
    let stages: Vec<Stage> = parse_stages(selector).map_err(RunError::config)?;
    let mut cfg = ExperimentConfig::load(&common.config).map_err(RunError::config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let root = common
        .out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("neurolos-out"));
    let exec = RayonExecutor::new(common.threads).map_err(RunError::config)?;
    log::info!("output {} with {} threads", root.display(), exec.threads());
    let run = Run {
        cfg: &cfg,
        root,
        exec: &exec,
        emit_ddl: common.emit_ddl,
    };
    for (stage, outcome) in run_stages(&run, &stages)? {
        match outcome {
            Outcome::Ran { seconds } => println!("{:<11} ran in {seconds:.1}s", stage.name()),
            Outcome::Skipped => println!("{:<11} up to date", stage.name()),
        }
    }
    Ok(())
}
