//! Subsampling trajectories, scaling collapse and comparison budgets.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::ComparisonDataset;
use crate::elo::{median_labels, replay_indexed, EloConfig, IndexedMatch, Label, RatingTable};
use crate::error::{Error, Result};
use crate::seed::{SeedNode, Stream};
use crate::sim::f1_positive;
use crate::stats;

/// Replay seed for benchmark ratings and for every subsample replay.
pub const CANONICAL_SEED: u64 = 0x05EE_DE10;

/// Number of grid points used to compare rescaled curves.
pub const GRID_POINTS: usize = 201;

/// Ratings from replaying every record with [`CANONICAL_SEED`].
pub fn benchmark_ratings(dataset: &ComparisonDataset, config: &EloConfig) -> Result<RatingTable> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(replay_dataset(dataset, config))
}

/// Replays the records in dataset order with [`CANONICAL_SEED`]. Every item
/// of the universe gets a rating; with no records all stay at the default.
pub fn replay_dataset(dataset: &ComparisonDataset, config: &EloConfig) -> RatingTable {
    let (index, matches) = dataset.indexed();
    let ratings = replay_subset(index.len(), &matches, config);
    index.to_table(&ratings, *config)
}

/// Strict-median labels of the benchmark ratings.
pub fn benchmark_labels(
    dataset: &ComparisonDataset,
    config: &EloConfig,
) -> Result<BTreeMap<String, Label>> {
    let table = benchmark_ratings(dataset, config)?;
    let ratings: Vec<f64> = table.iter().map(|(_, r)| r).collect();
    Ok(table
        .items()
        .map(str::to_owned)
        .zip(median_labels(&ratings))
        .collect())
}

fn replay_subset(n_items: usize, matches: &[IndexedMatch], config: &EloConfig) -> Vec<f64> {
    let mut ratings = vec![config.default_rating; n_items];
    replay_indexed(&mut ratings, matches, config, CANONICAL_SEED);
    ratings
}

/// Keeps the records whose endpoints both lie in `subset`; the universe
/// becomes `subset`.
pub fn restrict_to_items<S: AsRef<str>>(
    dataset: &ComparisonDataset,
    subset: &[S],
) -> Result<ComparisonDataset> {
    let keep: BTreeSet<&str> = subset.iter().map(AsRef::as_ref).collect();
    if let Some(unknown) = keep.iter().find(|i| !dataset.items().contains(**i)) {
        return Err(Error::UnknownItem((*unknown).to_owned()));
    }
    let records = dataset
        .records()
        .iter()
        .filter(|r| keep.contains(r.item_a.as_str()) && keep.contains(r.item_b.as_str()))
        .cloned()
        .collect();
    ComparisonDataset::with_universe(
        records,
        keep.into_iter().map(str::to_owned),
        dataset.provenance(),
    )
}

/// Restricts to `size` items drawn uniformly from the universe.
pub fn random_subset(
    dataset: &ComparisonDataset,
    size: usize,
    seed: u64,
) -> Result<ComparisonDataset> {
    let items: Vec<&String> = dataset.items().iter().collect();
    if size > items.len() {
        return Err(Error::InvalidConfig(format!(
            "subset of {size} items requested from a universe of {}",
            items.len()
        )));
    }
    let mut rng = SeedNode::new(seed)
        .child(Stream::Dataset, size as u64)
        .rng();
    let picked: Vec<&String> = sample(&mut rng, items.len(), size)
        .into_iter()
        .map(|i| items[i])
        .collect();
    restrict_to_items(dataset, &picked)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub n_comparisons: usize,
    pub mean_f1: f64,
    pub sem: f64,
    pub n_replicates: usize,
}

/// Mean f1 against comparison count for one system size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingTrajectory {
    pub system_size: usize,
    pub points: Vec<TrajectoryPoint>,
}

/// Subsampling trajectory scored against the dataset's own benchmark labels.
pub fn trajectory(
    dataset: &ComparisonDataset,
    counts: &[usize],
    replicates: usize,
    config: &EloConfig,
    seed: u64,
) -> Result<ScalingTrajectory> {
    let reference = benchmark_labels(dataset, config)?;
    trajectory_against(dataset, &reference, counts, replicates, config, seed)
}

/// Subsampling trajectory scored against caller-supplied labels, which must
/// cover the item universe.
///
/// Each replicate draws records uniformly without replacement, keeps them in
/// dataset order, replays them with [`CANONICAL_SEED`] and splits the
/// resulting ratings at their strict median. Counts are sorted and
/// deduplicated.
pub fn trajectory_against(
    dataset: &ComparisonDataset,
    reference: &BTreeMap<String, Label>,
    counts: &[usize],
    replicates: usize,
    config: &EloConfig,
    seed: u64,
) -> Result<ScalingTrajectory> {
    config.validate()?;
    if replicates == 0 {
        return Err(Error::InvalidConfig("replicates must be at least 1".into()));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (index, matches) = dataset.indexed();
    let truth: Vec<Label> = index
        .names()
        .iter()
        .map(|name| {
            reference
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownItem(name.clone()))
        })
        .collect::<Result<_>>()?;
    let counts: BTreeSet<usize> = counts.iter().copied().collect();
    if let Some(&max) = counts.iter().next_back() {
        if max > matches.len() {
            return Err(Error::CountExceedsDataset {
                count: max,
                available: matches.len(),
            });
        }
    }

    let root = SeedNode::new(seed);
    let mut points = Vec::with_capacity(counts.len());
    for &count in &counts {
        let scores = (0..replicates)
            .into_par_iter()
            .map(|rep| {
                let mut rng = root
                    .child(Stream::Subsample, count as u64)
                    .child(Stream::Subsample, rep as u64)
                    .rng();
                let mut picked = sample(&mut rng, matches.len(), count).into_vec();
                picked.sort_unstable();
                let subset: Vec<IndexedMatch> = picked.iter().map(|&i| matches[i]).collect();
                let ratings = replay_subset(index.len(), &subset, config);
                f1_positive(&median_labels(&ratings), &truth)
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(TrajectoryPoint {
            n_comparisons: count,
            mean_f1: stats::mean(&scores),
            sem: stats::sem(&scores).unwrap_or(0.0),
            n_replicates: replicates,
        });
    }
    Ok(ScalingTrajectory {
        system_size: index.len(),
        points,
    })
}

/// Candidate growth laws for the comparison budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ScalingLaw {
    #[serde(rename = "n")]
    Linear,
    #[serde(rename = "n_log_n")]
    NLogN,
    #[serde(rename = "n_squared")]
    Quadratic,
}

impl ScalingLaw {
    pub const ALL: [ScalingLaw; 3] = [ScalingLaw::Linear, ScalingLaw::NLogN, ScalingLaw::Quadratic];

    /// f(N); the logarithm is natural.
    pub fn scale(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            ScalingLaw::Linear => n,
            ScalingLaw::NLogN => n * n.ln(),
            ScalingLaw::Quadratic => n * n,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalingLaw::Linear => "n",
            ScalingLaw::NLogN => "n_log_n",
            ScalingLaw::Quadratic => "n_squared",
        }
    }
}

impl std::fmt::Display for ScalingLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A trajectory with its x axis divided by f(N).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaledTrajectory {
    pub system_size: usize,
    /// (rescaled x, mean f1)
    pub points: Vec<(f64, f64)>,
}

impl RescaledTrajectory {
    fn new(t: &ScalingTrajectory, law: ScalingLaw) -> Result<Self> {
        let scale = law.scale(t.system_size);
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "system size {} cannot be rescaled by {law}",
                t.system_size
            )));
        }
        Ok(RescaledTrajectory {
            system_size: t.system_size,
            points: t
                .points
                .iter()
                .map(|p| (p.n_comparisons as f64 / scale, p.mean_f1))
                .collect(),
        })
    }

    fn domain(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.0, self.points.last()?.0))
    }

    /// Piecewise-linear interpolation; `None` outside the sampled domain.
    pub fn at(&self, x: f64) -> Option<f64> {
        let pts = &self.points;
        let (lo, hi) = self.domain()?;
        if x < lo || x > hi {
            return None;
        }
        let i = pts.partition_point(|p| p.0 < x);
        if i == 0 {
            return Some(pts[0].1);
        }
        let (x0, y0) = pts[i - 1];
        let (x1, y1) = pts[i];
        if x1 == x0 {
            return Some(y1);
        }
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    /// Smallest x at which the interpolated curve reaches `level`.
    pub fn first_crossing(&self, level: f64) -> Option<f64> {
        let pts = &self.points;
        let i = pts.iter().position(|p| p.1 >= level)?;
        if i == 0 {
            return Some(pts[0].0);
        }
        let (x0, y0) = pts[i - 1];
        let (x1, y1) = pts[i];
        Some(x0 + (x1 - x0) * (level - y0) / (y1 - y0))
    }
}

/// How well a family of trajectories collapses under one law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseReport {
    pub law: ScalingLaw,
    pub rescaled: Vec<RescaledTrajectory>,
    /// Common rescaled domain.
    pub domain: (f64, f64),
    /// Largest vertical spread between curves over the common domain.
    pub gap: f64,
}

impl CollapseReport {
    /// Largest spread restricted to `[lo, hi]` intersected with the common domain.
    pub fn gap_over(&self, lo: f64, hi: f64) -> Option<f64> {
        let lo = lo.max(self.domain.0);
        let hi = hi.min(self.domain.1);
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return None;
        }
        Some(spread(&self.rescaled, lo, hi))
    }

    /// The x range over which the curves move from `f1_low` to `f1_high`:
    /// from the earliest crossing of `f1_low` to the latest crossing of
    /// `f1_high` (or the curve's end when it never gets there).
    pub fn band(&self, f1_low: f64, f1_high: f64) -> Option<(f64, f64)> {
        let lo = self
            .rescaled
            .iter()
            .filter_map(|t| t.first_crossing(f1_low))
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .rescaled
            .iter()
            .filter_map(|t| t.first_crossing(f1_high).or(t.domain().map(|d| d.1)))
            .fold(f64::NEG_INFINITY, f64::max);
        (lo.is_finite() && hi.is_finite() && lo <= hi).then_some((lo, hi))
    }

    /// Gap over [`CollapseReport::band`].
    pub fn band_gap(&self, f1_low: f64, f1_high: f64) -> Option<f64> {
        let (lo, hi) = self.band(f1_low, f1_high)?;
        self.gap_over(lo, hi)
    }
}

fn spread(curves: &[RescaledTrajectory], lo: f64, hi: f64) -> f64 {
    let steps = GRID_POINTS - 1;
    (0..=steps)
        .map(|k| {
            let x = if k == steps {
                hi
            } else {
                lo + (hi - lo) * k as f64 / steps as f64
            };
            let ys = curves.iter().filter_map(|c| c.at(x));
            let (min, max) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
                (a.min(y), b.max(y))
            });
            if min.is_finite() {
                max - min
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// Rescales each trajectory by `law` and measures the vertical spread over
/// the common domain.
pub fn collapse_score(
    trajectories: &[ScalingTrajectory],
    law: ScalingLaw,
) -> Result<CollapseReport> {
    if trajectories.len() < 2 {
        return Err(Error::TooFewTrajectories(trajectories.len()));
    }
    let rescaled = trajectories
        .iter()
        .map(|t| RescaledTrajectory::new(t, law))
        .collect::<Result<Vec<_>>>()?;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for t in &rescaled {
        let (a, b) = t.domain().ok_or(Error::NoDomainOverlap)?;
        lo = lo.max(a);
        hi = hi.min(b);
    }
    if lo > hi {
        return Err(Error::NoDomainOverlap);
    }
    let gap = spread(&rescaled, lo, hi);
    Ok(CollapseReport {
        law,
        rescaled,
        domain: (lo, hi),
        gap,
    })
}

/// Comparisons needed at `target_n` items to reach `target_f1`, read off a
/// pilot trajectory under N log N scaling.
pub fn estimate_budget(
    pilot: &ScalingTrajectory,
    pilot_n: usize,
    target_f1: f64,
    target_n: usize,
) -> Result<u64> {
    if !(0.0..=1.0).contains(&target_f1) {
        return Err(Error::InvalidConfig(format!(
            "target f1 {target_f1} is outside [0, 1]"
        )));
    }
    if pilot_n < 2 || target_n < 2 {
        return Err(Error::InvalidConfig(
            "system sizes must be at least 2".into(),
        ));
    }
    if pilot.points.is_empty() {
        return Err(Error::InvalidConfig(
            "pilot trajectory has no points".into(),
        ));
    }
    let rescaled = RescaledTrajectory::new(
        &ScalingTrajectory {
            system_size: pilot_n,
            points: pilot.points.clone(),
        },
        ScalingLaw::NLogN,
    )?;
    let x = rescaled
        .first_crossing(target_f1)
        .ok_or(Error::TargetNotReached(target_f1))?;
    let n = x * ScalingLaw::NLogN.scale(target_n);
    // Absorb floating-point noise so an exact grid point does not round up.
    Ok((n - 1e-9).ceil().max(0.0) as u64)
}

/// Header of the trajectory CSV.
pub const TRAJECTORY_HEADER: [&str; 6] = [
    "N",
    "n_comparisons",
    "rescaled_x",
    "mean_f1",
    "sem",
    "n_replicates",
];

/// Writes trajectories, x rescaled by `law`.
pub fn write_trajectories<W: Write>(
    trajectories: &[ScalingTrajectory],
    law: ScalingLaw,
    sink: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(TRAJECTORY_HEADER).map_err(io)?;
    for t in trajectories {
        let scale = law.scale(t.system_size);
        for p in &t.points {
            w.write_record([
                t.system_size.to_string(),
                p.n_comparisons.to_string(),
                (p.n_comparisons as f64 / scale).to_string(),
                p.mean_f1.to_string(),
                p.sem.to_string(),
                p.n_replicates.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Comparison counts at the given rescaled positions, `x · f(N)` rounded,
/// clamped to `[1, max]` and deduplicated.
pub fn counts_for(law: ScalingLaw, system_size: usize, xs: &[f64], max: usize) -> Vec<usize> {
    let scale = law.scale(system_size);
    let set: BTreeSet<usize> = xs
        .iter()
        .map(|x| ((x * scale).round().max(1.0) as usize).min(max))
        .collect();
    set.into_iter().collect()
}
