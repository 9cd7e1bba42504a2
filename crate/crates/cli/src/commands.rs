use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use crowdelo::anchor::{anchor_groups, ProbePlacement};
use crowdelo::dataset::{
    load_comparisons, load_ratings, rating_rows, write_ratings, ComparisonDataset, SimulatedDataset,
};
use crowdelo::elo::{replay_indexed, EloConfig, RatingTable};
use crowdelo::scaling::{
    collapse_score, counts_for, estimate_budget, random_subset, trajectory, write_trajectories,
    ScalingLaw, ScalingTrajectory,
};
use crowdelo::sim::{run_ensemble, Estimate, RaterAssignment, SimParams};
use crowdelo::spam::{flag_spammers, write_audits, AuditPolicy};

use crate::{AnchorArgs, Format, RateArgs, ScalingArgs, SimulateArgs, SpamAuditArgs};

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn read_comparisons(path: &Path) -> Result<ComparisonDataset> {
    load_comparisons(open(path)?).with_context(|| format!("cannot read {}", path.display()))
}

/// Writes the whole buffer to `path`, or to stdout when there is none.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(w.into_inner()?)
}

pub fn rate(args: RateArgs) -> Result<()> {
    let cfg = args.elo.config()?;
    let dataset = read_comparisons(&args.input)?;
    let (index, matches) = dataset.indexed();
    let mut ratings = vec![cfg.default_rating; index.len()];
    let stats = replay_indexed(&mut ratings, &matches, &cfg, args.common.seed);
    log::info!(
        "{} comparisons over {} items, {} epochs, last max change {}",
        matches.len(),
        index.len(),
        stats.epochs_run,
        stats.last_max_change
    );
    let table = index.to_table(&ratings, cfg);
    if table.is_empty() {
        bail!("{} holds no comparisons", args.input.display());
    }
    let rows = rating_rows(&table)?;
    let bytes = match args.common.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_ratings(&rows, &mut buf)?;
            buf
        }
        Format::Json => json(&rows)?,
    };
    emit(args.common.output.as_deref(), &bytes)
}

#[derive(Serialize)]
struct SummaryRow {
    parameter: String,
    value: Option<f64>,
    task_ratio: f64,
    n_comparisons: usize,
    n_runs: usize,
    delta_f1_mean: f64,
    delta_f1_sem: f64,
    delta_f1_lower: f64,
    delta_f1_upper: f64,
    f1_majority_mean: f64,
    f1_majority_sem: f64,
    f1_comparison_mean: f64,
    f1_comparison_sem: f64,
    bias_majority_mean: Option<f64>,
    bias_majority_sem: Option<f64>,
    bias_comparison_mean: Option<f64>,
    bias_comparison_sem: Option<f64>,
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let base = SimParams {
        n_items: args.items,
        n_raters: args.raters,
        perception_ambiguity: args.perception_ambiguity,
        comparison_ambiguity: args.comparison_ambiguity,
        threshold_diversity: args.threshold_diversity,
        spam_fraction: args.spam_fraction,
        bias_enabled: args.bias,
        votes_per_item: args.votes_per_item,
        elo: args.elo.config()?,
        master_seed: args.common.seed,
        ..SimParams::default()
    };
    let settings: Vec<Option<f64>> = match &args.sweep {
        Some(s) => s.values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let parameter = args
        .sweep
        .as_ref()
        .map(|s| s.parameter.to_string())
        .unwrap_or_default();

    let mut rows = Vec::new();
    for value in settings {
        for &ratio in &args.ratios {
            let mut params = base.clone();
            if let (Some(sweep), Some(v)) = (&args.sweep, value) {
                params.set(sweep.parameter, v)?;
            }
            let params = params.with_task_ratio(ratio);
            log::info!("running {parameter}={value:?} at ratio {ratio}");
            let s = run_ensemble(&params, args.runs)?;
            let mean = |e: &Option<Estimate>| e.as_ref().map(|e| e.mean);
            let sem = |e: &Option<Estimate>| e.as_ref().map(|e| e.sem);
            rows.push(SummaryRow {
                parameter: parameter.clone(),
                value,
                task_ratio: ratio,
                n_comparisons: s.n_comparisons,
                n_runs: s.n_runs,
                delta_f1_mean: s.delta_f1.mean,
                delta_f1_sem: s.delta_f1.sem,
                delta_f1_lower: s.delta_f1.lower,
                delta_f1_upper: s.delta_f1.upper,
                f1_majority_mean: s.f1_majority.mean,
                f1_majority_sem: s.f1_majority.sem,
                f1_comparison_mean: s.f1_comparison.mean,
                f1_comparison_sem: s.f1_comparison.sem,
                bias_majority_mean: mean(&s.bias_majority),
                bias_majority_sem: sem(&s.bias_majority),
                bias_comparison_mean: mean(&s.bias_comparison),
                bias_comparison_sem: sem(&s.bias_comparison),
            });
        }
    }
    let bytes = match args.common.format {
        Format::Csv => csv_rows(&rows)?,
        Format::Json => json(&rows)?,
    };
    emit(args.common.output.as_deref(), &bytes)
}

#[derive(Serialize)]
struct CollapseRow {
    law: ScalingLaw,
    gap: f64,
    domain_lo: f64,
    domain_hi: f64,
    band_lo: Option<f64>,
    band_hi: Option<f64>,
    band_gap: Option<f64>,
}

#[derive(Serialize)]
struct BudgetRow {
    pilot_n: usize,
    target_f1: f64,
    target_n: usize,
    comparisons: u64,
}

fn scaling_datasets(args: &ScalingArgs, cfg: &EloConfig) -> Result<Vec<ComparisonDataset>> {
    let seed = args.common.seed;
    if let Some(path) = &args.input {
        let full = read_comparisons(path)?;
        if args.sizes.is_empty() {
            return Ok(vec![full]);
        }
        return args
            .sizes
            .iter()
            .map(|&n| random_subset(&full, n, seed).map_err(Into::into))
            .collect();
    }
    args.simulate
        .iter()
        .map(|&n| {
            let params = SimParams {
                n_items: n,
                elo: *cfg,
                ..SimParams::default()
            };
            let all_pairs = n * n.saturating_sub(1) / 2;
            SimulatedDataset::generate(&params, all_pairs, RaterAssignment::Uniform, seed)
                .map(|s| s.dataset)
                .with_context(|| format!("cannot simulate {n} items"))
        })
        .collect()
}

pub fn scaling(args: ScalingArgs) -> Result<()> {
    let Some(dir) = args.common.output.clone() else {
        bail!("scaling writes several files; pass --output DIR");
    };
    if args.points == 0 || args.x_max.is_nan() || args.x_max <= 0.0 {
        bail!("--points and --x-max must be positive");
    }
    let cfg = args.elo.config()?;
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;

    let xs: Vec<f64> = (1..=args.points)
        .map(|k| k as f64 * args.x_max / args.points as f64)
        .collect();
    let mut trajectories: Vec<ScalingTrajectory> = Vec::new();
    for dataset in scaling_datasets(&args, &cfg)? {
        let n = dataset.items().len();
        let mut counts = counts_for(ScalingLaw::NLogN, n, &xs, dataset.len());
        if args.include_full {
            counts.push(dataset.len());
        }
        log::info!(
            "N = {n}: {} records, {} counts",
            dataset.len(),
            counts.len()
        );
        let t = trajectory(&dataset, &counts, args.replicates, &cfg, args.common.seed)
            .with_context(|| format!("trajectory for N = {n}"))?;
        trajectories.push(t);
    }

    let ext = match args.common.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let write_table = |name: &str, trajs: &[ScalingTrajectory], law: ScalingLaw| -> Result<()> {
        let bytes = match args.common.format {
            Format::Csv => {
                let mut buf = Vec::new();
                write_trajectories(trajs, law, &mut buf)?;
                buf
            }
            Format::Json => json(trajs)?,
        };
        emit(Some(&dir.join(format!("{name}.{ext}"))), &bytes)
    };
    write_table("trajectories", &trajectories, ScalingLaw::NLogN)?;

    if trajectories.len() >= 2 {
        let mut rows = Vec::new();
        for law in ScalingLaw::ALL {
            let report = collapse_score(&trajectories, law)?;
            let band = report.band(0.6, 0.95);
            rows.push(CollapseRow {
                law,
                gap: report.gap,
                domain_lo: report.domain.0,
                domain_hi: report.domain.1,
                band_lo: band.map(|b| b.0),
                band_hi: band.map(|b| b.1),
                band_gap: report.band_gap(0.6, 0.95),
            });
            write_table(&format!("collapse_{law}"), &trajectories, law)?;
        }
        let bytes = match args.common.format {
            Format::Csv => csv_rows(&rows)?,
            Format::Json => json(&rows)?,
        };
        emit(Some(&dir.join(format!("collapse.{ext}"))), &bytes)?;
    }

    if let (Some(target_f1), Some(target_n)) = (args.target_f1, args.target_n) {
        let pilot = match args.pilot_n {
            Some(n) => trajectories
                .iter()
                .find(|t| t.system_size == n)
                .with_context(|| format!("no trajectory with N = {n}"))?,
            None => trajectories
                .iter()
                .max_by_key(|t| t.system_size)
                .context("no trajectories")?,
        };
        let comparisons = estimate_budget(pilot, pilot.system_size, target_f1, target_n)
            .with_context(|| format!("pilot with N = {}", pilot.system_size))?;
        let row = BudgetRow {
            pilot_n: pilot.system_size,
            target_f1,
            target_n,
            comparisons,
        };
        let bytes = match args.common.format {
            Format::Csv => csv_rows(&[row])?,
            Format::Json => json(&row)?,
        };
        emit(Some(&dir.join(format!("budget.{ext}"))), &bytes)?;
    }
    Ok(())
}

pub fn spam_audit(args: SpamAuditArgs) -> Result<()> {
    let cfg = args.elo.config()?;
    let dataset = read_comparisons(&args.input)?;
    let policy = AuditPolicy {
        correlation_floor: args.correlation_floor,
        probability_floor: args.probability_floor,
        min_records: args.min_records,
    };
    let audits = flag_spammers(&dataset, &cfg, &policy)?;
    let suspects = audits.iter().filter(|a| a.is_suspect()).count();
    log::info!("{suspects} of {} raters flagged", audits.len());
    let bytes = match args.common.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_audits(&audits, &mut buf)?;
            buf
        }
        Format::Json => json(&audits)?,
    };
    emit(args.common.output.as_deref(), &bytes)
}

fn read_table(path: &Path, cfg: &EloConfig) -> Result<RatingTable> {
    let ratings =
        load_ratings(open(path)?).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(RatingTable::from_ratings(ratings, *cfg))
}

#[derive(Serialize)]
struct AnchorOutput<'a> {
    offset: f64,
    probes: &'a [ProbePlacement],
    ratings: &'a [crowdelo::dataset::RatingRow],
}

#[derive(Serialize)]
struct ProbeRow<'a> {
    item: &'a str,
    baseline_rating: f64,
    position: usize,
    implied_rating: f64,
    queries: usize,
    offset: f64,
}

pub fn anchor(args: AnchorArgs) -> Result<()> {
    let cfg = args.elo.config()?;
    let baseline = read_table(&args.baseline, &cfg)?;
    let benchmark = read_table(&args.benchmark, &cfg)?;
    let answers = read_comparisons(&args.answers)?;

    // First answer for each ordered pair wins.
    let mut lookup: HashMap<(&str, &str), f64> = HashMap::new();
    for r in answers.records() {
        lookup
            .entry((r.item_a.as_str(), r.item_b.as_str()))
            .or_insert(r.score_a);
    }
    let result = anchor_groups(&baseline, &benchmark, args.probes, |probe, item| {
        if let Some(&s) = lookup.get(&(probe, item)) {
            Ok(s == 1.0)
        } else if let Some(&s) = lookup.get(&(item, probe)) {
            Ok(s == 0.0)
        } else {
            Err(crowdelo::Error::Oracle(format!(
                "no answer comparing {probe:?} with {item:?}"
            )))
        }
    })?;
    log::info!("offset {}", result.offset);

    let rows = rating_rows(&result.aligned)?;
    let bytes = match args.common.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_ratings(&rows, &mut buf)?;
            buf
        }
        Format::Json => json(&AnchorOutput {
            offset: result.offset,
            probes: &result.probes,
            ratings: &rows,
        })?,
    };
    emit(args.common.output.as_deref(), &bytes)?;

    if let Some(path) = &args.probes_output {
        let probe_rows: Vec<ProbeRow> = result
            .probes
            .iter()
            .map(|p| ProbeRow {
                item: &p.item,
                baseline_rating: p.baseline_rating,
                position: p.position,
                implied_rating: p.implied_rating,
                queries: p.queries,
                offset: result.offset,
            })
            .collect();
        let bytes = match args.common.format {
            Format::Csv => csv_rows(&probe_rows)?,
            Format::Json => json(&probe_rows)?,
        };
        emit(Some(path), &bytes)?;
    }
    Ok(())
}
