use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crowdelo::elo::{EloConfig, LogisticBase};
use crowdelo::sim::Sweep;

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "crowdelo",
    version,
    about = "Elo aggregation of crowdsourced pairwise comparisons"
)]
struct Cli {
    /// Log progress to stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rate items from a comparison CSV.
    Rate(RateArgs),
    /// Run simulation ensembles, optionally sweeping one parameter.
    Simulate(SimulateArgs),
    /// Subsampling trajectories, collapse scores and budget estimates.
    Scaling(ScalingArgs),
    /// Score raters for spam-like behaviour.
    SpamAudit(SpamAuditArgs),
    /// Align a baseline rating table onto a benchmark scale.
    Anchor(AnchorArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Base {
    Natural,
    Ten,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// k 30, default 1400, one pass in file order.
    Chess,
    /// k 30, default 0, 20 shuffled epochs.
    Sim,
}

#[derive(Args, Debug)]
struct Common {
    /// Master seed; every random choice derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output file (a directory for `scaling`). Defaults to stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct EloArgs {
    /// Starting point for the Elo settings below.
    #[arg(long, value_enum, default_value_t = Preset::Sim)]
    preset: Preset,

    /// K-factor.
    #[arg(long)]
    k: Option<f64>,

    /// Scale denominator of the logistic curve.
    #[arg(long)]
    denom: Option<f64>,

    #[arg(long, value_enum)]
    base: Option<Base>,

    #[arg(long, allow_hyphen_values = true)]
    default_rating: Option<f64>,

    /// Maximum number of replay epochs.
    #[arg(long)]
    epochs: Option<u32>,

    /// Replay matches in file order in every epoch.
    #[arg(long)]
    no_shuffle: bool,
}

impl EloArgs {
    fn config(&self) -> anyhow::Result<EloConfig> {
        let mut cfg = match self.preset {
            Preset::Chess => EloConfig::chess(),
            Preset::Sim => EloConfig::simulation(),
        };
        if let Some(k) = self.k {
            cfg.k_factor = k;
        }
        if let Some(d) = self.denom {
            cfg.scale_denominator = d;
        }
        if let Some(b) = self.base {
            cfg.logistic_base = match b {
                Base::Natural => LogisticBase::Natural,
                Base::Ten => LogisticBase::Ten,
            };
        }
        if let Some(r) = self.default_rating {
            cfg.default_rating = r;
        }
        if let Some(e) = self.epochs {
            cfg.epochs = e;
        }
        if self.no_shuffle {
            cfg.shuffle = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct RateArgs {
    /// Comparison CSV (`item_a,item_b,outcome,rater_id`).
    input: PathBuf,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    elo: EloArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value_t = 512)]
    items: usize,
    #[arg(long, default_value_t = 100)]
    raters: usize,
    #[arg(long, default_value_t = 0.5)]
    perception_ambiguity: f64,
    #[arg(long, default_value_t = 0.5)]
    comparison_ambiguity: f64,
    #[arg(long, default_value_t = 0.5)]
    threshold_diversity: f64,
    #[arg(long, default_value_t = 0.0)]
    spam_fraction: f64,
    /// Give raters weights on a discriminatory item feature.
    #[arg(long)]
    bias: bool,
    #[arg(long, default_value_t = 3)]
    votes_per_item: usize,
    /// Comparison tasks per vote task; one row per ratio.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    ratios: Vec<f64>,
    /// Independent runs per row.
    #[arg(long, default_value_t = 25)]
    runs: usize,
    /// One-parameter sweep, e.g. `threshold_diversity=0,0.5,1`.
    #[arg(long, value_parser = parse_sweep)]
    sweep: Option<Sweep>,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    elo: EloArgs,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    /// Comparison CSV to analyse.
    #[arg(long, required_unless_present = "simulate")]
    input: Option<PathBuf>,
    /// Random item subsets of these sizes (input mode). Defaults to the
    /// whole universe.
    #[arg(long, value_delimiter = ',', requires = "input")]
    sizes: Vec<usize>,
    /// Simulate one all-pairs dataset per listed size instead of reading one.
    #[arg(long, value_delimiter = ',', conflicts_with = "input")]
    simulate: Vec<usize>,
    /// Subsamples per comparison count.
    #[arg(long, default_value_t = 25)]
    replicates: usize,
    /// Grid points along n / (N ln N).
    #[arg(long, default_value_t = 40)]
    points: usize,
    /// Largest n / (N ln N) on the grid.
    #[arg(long, default_value_t = 4.0)]
    x_max: f64,
    /// Also score the whole dataset (always f1 = 1 against its own benchmark).
    #[arg(long)]
    include_full: bool,
    /// f1 to reach for the budget estimate.
    #[arg(long, value_parser = parse_unit, requires = "target_n")]
    target_f1: Option<f64>,
    /// System size to estimate a budget for.
    #[arg(long, requires = "target_f1")]
    target_n: Option<usize>,
    /// Which trajectory serves as the pilot. Defaults to the largest.
    #[arg(long)]
    pilot_n: Option<usize>,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    elo: EloArgs,
}

#[derive(Args, Debug)]
struct SpamAuditArgs {
    /// Comparison CSV with rater ids.
    input: PathBuf,
    #[arg(long, default_value_t = 0.4, allow_hyphen_values = true)]
    correlation_floor: f64,
    #[arg(long, default_value_t = 0.6)]
    probability_floor: f64,
    #[arg(long, default_value_t = 20)]
    min_records: usize,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    elo: EloArgs,
}

#[derive(Args, Debug)]
struct AnchorArgs {
    /// Ratings CSV of the group to align (`item,rating,...`).
    #[arg(long)]
    baseline: PathBuf,
    /// Ratings CSV defining the target scale.
    #[arg(long)]
    benchmark: PathBuf,
    /// Comparison CSV answering probe-versus-benchmark questions.
    #[arg(long)]
    answers: PathBuf,
    #[arg(long, default_value_t = 5)]
    probes: usize,
    /// Also write probe placements here.
    #[arg(long)]
    probes_output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    elo: EloArgs,
}

fn parse_sweep(s: &str) -> Result<Sweep, String> {
    s.parse().map_err(|e: crowdelo::Error| e.to_string())
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    let result = match cli.command {
        Command::Rate(a) => commands::rate(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Scaling(a) => commands::scaling(a),
        Command::SpamAudit(a) => commands::spam_audit(a),
        Command::Anchor(a) => commands::anchor(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
