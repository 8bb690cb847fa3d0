//! `hourcast` command-line front end.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::{Run, VifStage};
use config::{read_structured, RunConfig};

#[derive(Parser)]
#[command(name = "hourcast", version, about = "Hourly-binned day-ahead electricity load forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

/// Flags shared by every subcommand. Each overrides the config file.
#[derive(Args)]
struct Common {
    /// Run configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    train_csv: Option<PathBuf>,
    #[arg(long, global = true)]
    test_csv: Option<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Lag/lead preset such as Baseline, Lag1, Lag3+Lead2.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Hyperparameter grid file.
    #[arg(long, global = true)]
    grid: Option<PathBuf>,
    /// Fixed regressor config file; disables grid search.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Model family; `evaluate` takes a comma-separated list and also knows
    /// `hourly-mean` and `oracle`.
    #[arg(long, global = true)]
    family: Option<String>,
    /// Comma-separated subset of y1y2, y2y1, cv.
    #[arg(long, global = true, value_delimiter = ',')]
    cases: Option<Vec<String>>,
    #[arg(long, global = true)]
    folds: Option<usize>,
    /// `leap-year:<weekday>`, `frame`, or YYYY-MM-DD.
    #[arg(long, global = true)]
    anchor: Option<String>,
    #[arg(long, global = true)]
    holidays: Option<PathBuf>,
    #[arg(long, global = true)]
    components: Option<usize>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics per series and year.
    Stats,
    /// Explained-variance ratios of the temperature and GHI PCA.
    Pca,
    /// Variance inflation factors before or after PCA.
    Vif {
        #[arg(long, value_enum, default_value = "after")]
        stage: VifStage,
        /// Restrict to one calendar year of the training data (1-based).
        #[arg(long)]
        year: Option<usize>,
        /// Compute VIF over every column of an arbitrary numeric CSV instead.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Fit and save the 24 hourly models.
    Train,
    /// Run the selected test cases and write a report.
    Evaluate,
    /// Every lag/lead preset under all three test cases.
    Ablate,
    /// Train on the training data and predict the test year.
    Forecast,
    /// Write a synthetic training year pair and a load-free test year.
    Synth {
        #[arg(long, default_value_t = 731)]
        days: usize,
        #[arg(long, default_value_t = 365)]
        test_days: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Stats => "stats",
            Command::Pca => "pca",
            Command::Vif { .. } => "vif",
            Command::Train => "train",
            Command::Evaluate => "evaluate",
            Command::Ablate => "ablate",
            Command::Forecast => "forecast",
            Command::Synth { .. } => "synth",
        }
    }
}

fn resolve(common: &Common) -> Result<RunConfig> {
    let mut cfg: RunConfig = match &common.config {
        Some(p) => read_structured(p)?,
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($flag:ident => $field:ident) => {
            if let Some(v) = &common.$flag {
                cfg.$field = v.clone().into();
            }
        };
    }
    set!(train_csv => train_csv);
    set!(test_csv => test_csv);
    set!(out_dir => out_dir);
    set!(seed => seed);
    set!(jobs => jobs);
    set!(grid => grid);
    set!(family => family);
    set!(cases => cases);
    set!(folds => folds);
    set!(anchor => anchor);
    set!(holidays => holidays);
    set!(components => pca_components);
    if let Some(p) = &common.preset {
        cfg.preset = p.clone();
        cfg.lags = None;
        cfg.leads = None;
    }
    if let Some(p) = &common.model {
        let m: hourcast::regressors::RegressorConfig = read_structured(p)?;
        if common.family.is_none() {
            cfg.family = m.family().to_string();
        }
        cfg.model = Some(m);
    }
    if common.components.is_some() {
        cfg.pca_variance = None;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    let cfg = resolve(&cli.common)?;
    if cli.common.print_config {
        print!("{}", toml::to_string(&cfg).context("rendering config")?);
        return Ok(());
    }
    cfg.validate()?;
    if let Some(n) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    let mut run = Run::new(cli.command.name(), cfg);
    match cli.command {
        Command::Stats => commands::stats(&mut run)?,
        Command::Pca => commands::pca(&mut run)?,
        Command::Vif { stage, year, matrix } => commands::vif_cmd(&mut run, stage, year, matrix)?,
        Command::Train => commands::train(&mut run)?,
        Command::Evaluate => commands::evaluate(&mut run)?,
        Command::Ablate => commands::ablate(&mut run)?,
        Command::Forecast => commands::forecast(&mut run)?,
        Command::Synth { days, test_days } => commands::synth(&mut run, days, test_days)?,
    }
    run.finish()
}

/// 2 for a broken internal guarantee, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let invariant = err
        .chain()
        .filter_map(|e| e.downcast_ref::<hourcast::Error>())
        .any(|e| e.is_invariant_violation());
    if invariant {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
