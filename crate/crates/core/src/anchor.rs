//! Aligning a separately rated group onto a benchmark scale.
//!
//! A few baseline items near the baseline mean are placed into the sorted
//! benchmark by binary search. Where each probe lands implies a rating on
//! the benchmark scale; the mean disagreement is the offset applied to the
//! whole baseline.

use serde::Serialize;

use crate::elo::RatingTable;
use crate::error::{Error, Result};
use crate::stats;

pub const DEFAULT_PROBES: usize = 5;

/// Where one probe landed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbePlacement {
    pub item: String,
    pub baseline_rating: f64,
    /// Number of benchmark items the probe was judged above.
    pub position: usize,
    pub implied_rating: f64,
    /// Oracle calls spent on this probe.
    pub queries: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorResult {
    pub offset: f64,
    pub probes: Vec<ProbePlacement>,
    /// Baseline ratings shifted by `offset`.
    pub aligned: RatingTable,
}

/// Baseline items closest to the baseline mean, ties broken by name.
pub fn select_probes(baseline: &RatingTable, count: usize) -> Vec<(String, f64)> {
    let ratings: Vec<f64> = baseline.iter().map(|(_, r)| r).collect();
    let centre = stats::mean(&ratings);
    let mut items: Vec<(String, f64)> = baseline.iter().map(|(i, r)| (i.to_owned(), r)).collect();
    items.sort_by(|a, b| {
        (a.1 - centre)
            .abs()
            .total_cmp(&(b.1 - centre).abs())
            .then_with(|| a.0.cmp(&b.0))
    });
    items.truncate(count);
    items
}

/// Aligns `baseline` onto the scale of `benchmark`.
///
/// `above(probe, benchmark_item)` answers whether the probe ranks above the
/// benchmark item. Answers are assumed consistent with the benchmark order;
/// binary search asks about ⌈log2(len + 1)⌉ questions per probe.
pub fn anchor_groups<F>(
    baseline: &RatingTable,
    benchmark: &RatingTable,
    probes_per_bucket: usize,
    mut above: F,
) -> Result<AnchorResult>
where
    F: FnMut(&str, &str) -> Result<bool>,
{
    if baseline.is_empty() || benchmark.is_empty() {
        return Err(Error::EmptyTable);
    }
    if probes_per_bucket == 0 {
        return Err(Error::InvalidConfig(
            "at least one probe is required".into(),
        ));
    }

    let mut sorted: Vec<(&str, f64)> = benchmark.iter().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let gaps: Vec<f64> = sorted.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let edge_gap = stats::median(&gaps).unwrap_or(0.0);

    let mut probes = Vec::new();
    for (item, baseline_rating) in select_probes(baseline, probes_per_bucket) {
        let (mut lo, mut hi) = (0, sorted.len());
        let mut queries = 0;
        while lo < hi {
            let mid = (lo + hi) / 2;
            queries += 1;
            if above(&item, sorted[mid].0)? {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let implied_rating = if lo == 0 {
            sorted[0].1 - edge_gap
        } else if lo == sorted.len() {
            sorted[lo - 1].1 + edge_gap
        } else {
            (sorted[lo - 1].1 + sorted[lo].1) / 2.0
        };
        probes.push(ProbePlacement {
            item,
            baseline_rating,
            position: lo,
            implied_rating,
            queries,
        });
    }

    let diffs: Vec<f64> = probes
        .iter()
        .map(|p| p.implied_rating - p.baseline_rating)
        .collect();
    let offset = stats::mean(&diffs);
    Ok(AnchorResult {
        offset,
        aligned: baseline.shifted(offset),
        probes,
    })
}
