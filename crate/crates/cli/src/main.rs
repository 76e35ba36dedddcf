use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use plumenav_cli::experiment::{segment_rows, write_rows};
use plumenav_cli::{io, Condition, ConditionSummary, ExperimentConfig, Manifest};
use plumenav_core::analysis::fit_report;
use plumenav_core::segmentation::segment_detailed;
use plumenav_core::{LabelConvention, VelocitySeries};

#[derive(Parser)]
#[command(
    name = "plumenav",
    version,
    about = "Simulate, segment and analyse plume-tracking flights"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage into a fresh output directory.
    Run(NewRun),
    /// Fly the agents and write trajectories with their true labels.
    Simulate(NewRun),
    /// Segment simulated flights, or a single trajectory file with `--input`.
    Segment(SegmentArgs),
    /// Exploration-rate profiles of segmented flights.
    Analyze(Existing),
    /// Mean path against held-out flights, or two trajectory files.
    Fit(FitArgs),
    /// Summary tables across conditions.
    Report(Existing),
}

#[derive(Args)]
struct NewRun {
    /// TOML experiment config. Missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// First flight seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Flights per condition.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict to one condition (repeatable).
    #[arg(long, value_enum)]
    condition: Vec<Condition>,
    #[arg(long, value_enum)]
    label_convention: Option<Convention>,
}

#[derive(Args)]
struct Existing {
    /// Output directory of an earlier `simulate` or `run`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SegmentArgs {
    /// Output directory of an earlier `simulate`.
    #[arg(long, required_unless_present = "input", conflicts_with = "input")]
    out: Option<PathBuf>,
    /// A `t,x,y,z` trajectory file; segments are printed as CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    /// With `--input`: also write per-step labels here.
    #[arg(long, requires = "input")]
    labels: Option<PathBuf>,
    #[arg(long, value_enum)]
    label_convention: Option<Convention>,
}

#[derive(Args)]
struct FitArgs {
    /// Output directory of an earlier `simulate`.
    #[arg(long, required_unless_present = "reference", conflicts_with_all = ["reference", "model"])]
    out: Option<PathBuf>,
    #[arg(long, requires = "model")]
    reference: Option<PathBuf>,
    #[arg(long, requires = "reference")]
    model: Option<PathBuf>,
}

/// Which phase collects the positive segment score.
#[derive(Clone, Copy, clap::ValueEnum)]
enum Convention {
    /// Exploitation scores positively.
    RewardExploitation,
    /// Exploration scores positively.
    #[value(alias = "flipped")]
    RewardExploration,
}

impl From<Convention> for LabelConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::RewardExploitation => LabelConvention::RewardExploitation,
            Convention::RewardExploration => LabelConvention::RewardExploration,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = new_config(&args)?;
            let summaries = plumenav_cli::run_experiment(&cfg)?;
            print_summaries(&summaries);
            eprintln!("wrote {}", cfg.out_dir.display());
        }
        Command::Simulate(args) => {
            let cfg = new_config(&args)?;
            plumenav_cli::simulate(&cfg)?;
            eprintln!("wrote {}", cfg.out_dir.display());
        }
        Command::Segment(args) => match (args.input, args.out) {
            (Some(input), _) => segment_file(&input, args.labels, args.label_convention)?,
            (None, Some(out)) => {
                let mut manifest = Manifest::load(&out)?;
                if let Some(lc) = args.label_convention {
                    manifest.config.ga.label_convention = lc.into();
                    manifest.save(&out)?;
                }
                plumenav_cli::segment_all(&manifest.config)?;
            }
            (None, None) => bail!("either --out or --input is required"),
        },
        Command::Analyze(args) => plumenav_cli::analyze(&Manifest::load(&args.out)?.config)?,
        Command::Fit(args) => match (args.reference, args.model, args.out) {
            (Some(reference), Some(model), _) => {
                let r = fit_report(&io::read_trajectory(&reference)?, &io::read_trajectory(&model)?)?;
                println!("mae_m,r_squared\n{},{}", r.mae, r.r_squared);
            }
            (None, None, Some(out)) => plumenav_cli::fit(&Manifest::load(&out)?.config)?,
            _ => bail!("give either --out or both --reference and --model"),
        },
        Command::Report(args) => {
            let summaries = plumenav_cli::report(&Manifest::load(&args.out)?.config)?;
            print_summaries(&summaries);
        }
    }
    Ok(())
}

fn new_config(args: &NewRun) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if !args.condition.is_empty() {
        cfg.conditions = args.condition.clone();
        cfg.conditions.sort();
        cfg.conditions.dedup();
    }
    if let Some(lc) = args.label_convention {
        cfg.ga.label_convention = lc.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn segment_file(
    input: &std::path::Path,
    labels: Option<PathBuf>,
    convention: Option<Convention>,
) -> anyhow::Result<()> {
    let mut ga = plumenav_cli::config::experiment_ga_defaults();
    if let Some(lc) = convention {
        ga.label_convention = lc.into();
    }
    let traj = io::read_trajectory(input)?;
    let report = segment_detailed(&traj, &ga).with_context(|| format!("segmenting {}", input.display()))?;
    let rows = segment_rows(&report.segmentation, &report.velocity)?;
    write_rows(std::io::stdout().lock(), &rows, input)?;
    if let Some(path) = labels {
        io::save_labels(
            &path,
            &report.segmentation.step_labels(),
            traj.dt(),
            VelocitySeries::OFFSET,
        )?;
    }
    Ok(())
}

fn print_summaries(summaries: &[ConditionSummary]) {
    let show = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
    for s in summaries {
        println!(
            "{:<12} success {}/{}  accuracy {}  EER {}  mean-path R2 {}",
            s.condition.name(),
            s.successes,
            s.flights,
            show(s.mean_accuracy),
            show(s.mean_eer),
            show(s.mean_r_squared),
        );
    }
}
