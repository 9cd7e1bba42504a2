//! Elo rating aggregation over pairwise match outcomes.
//!
//! Ratings start at [`EloConfig::default_rating`] and every match moves
//! `k * (S_A - E_A)` points from one item to the other, so the population
//! mean never changes. Items are labelled either by the sign of their rating
//! (when ratings start at zero) or against the table median.
//!
//! ```
//! use crowdelo::elo::{apply_match_sequence, EloConfig, MatchRecord};
//!
//! let cfg = EloConfig::chess();
//! let records = vec![
//!     MatchRecord::new("p1", "p2", 1.0),
//!     MatchRecord::new("p1", "p2", 1.0),
//!     MatchRecord::new("p2", "p1", 0.5),
//! ];
//! let table = apply_match_sequence(&records, &cfg).unwrap();
//! assert!((table.get("p1").unwrap() - 1428.3358360702414).abs() < 1e-9);
//! ```

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::SeedNode;

/// Base of the logistic curve mapping rating differences to win probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogisticBase {
    /// `e`: `denom` is the inverse logistic growth rate.
    Natural,
    /// `10`: classical chess semantics, a gap of `denom` means 10:1 odds.
    Ten,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EloConfig {
    pub scale_denominator: f64,
    pub logistic_base: LogisticBase,
    /// Maximum number of points moved by one match.
    pub k_factor: f64,
    /// Rating of an item the first time it is seen.
    pub default_rating: f64,
    /// Upper bound on replay passes over the comparisons.
    pub epochs: u32,
    /// Replay stops once no rating moved more than this over a whole epoch.
    pub convergence_epsilon: f64,
    /// Shuffle the comparisons before every epoch. When off, every epoch
    /// replays the records in their given order.
    pub shuffle: bool,
}

impl EloConfig {
    /// Single sequential pass, k = 30, start at 1400, natural base, denominator 400.
    pub fn chess() -> Self {
        EloConfig {
            scale_denominator: 400.0,
            logistic_base: LogisticBase::Natural,
            k_factor: 30.0,
            default_rating: 1400.0,
            epochs: 1,
            convergence_epsilon: 30.0e-3,
            shuffle: false,
        }
    }

    /// Multi-epoch shuffled replay starting at zero, suited to sign labelling.
    pub fn simulation() -> Self {
        EloConfig {
            scale_denominator: 400.0,
            logistic_base: LogisticBase::Natural,
            k_factor: 30.0,
            default_rating: 0.0,
            epochs: 20,
            convergence_epsilon: 30.0e-3,
            shuffle: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale_denominator > 0.0 && self.scale_denominator.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "scale denominator must be positive, got {}",
                self.scale_denominator
            )));
        }
        if !(self.k_factor > 0.0 && self.k_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "k factor must be positive, got {}",
                self.k_factor
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.convergence_epsilon.is_nan() || self.convergence_epsilon < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "convergence epsilon must be non-negative, got {}",
                self.convergence_epsilon
            )));
        }
        if !self.default_rating.is_finite() {
            return Err(Error::InvalidConfig("default rating must be finite".into()));
        }
        Ok(())
    }
}

impl Default for EloConfig {
    fn default() -> Self {
        EloConfig::simulation()
    }
}

/// One comparison outcome, scored from the point of view of `item_a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub item_a: String,
    pub item_b: String,
    pub score_a: f64,
    pub rater_id: Option<String>,
}

impl MatchRecord {
    pub fn new(item_a: impl Into<String>, item_b: impl Into<String>, score_a: f64) -> Self {
        MatchRecord {
            item_a: item_a.into(),
            item_b: item_b.into(),
            score_a,
            rater_id: None,
        }
    }

    pub fn with_rater(mut self, rater: impl Into<String>) -> Self {
        self.rater_id = Some(rater.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_score(self.score_a)?;
        if self.item_a == self.item_b {
            return Err(Error::SelfMatch(self.item_a.clone()));
        }
        Ok(())
    }
}

/// Accepts exactly 0, 0.5 and 1.
pub fn check_score(score: f64) -> Result<()> {
    if score == 0.0 || score == 0.5 || score == 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidScore(score))
    }
}

/// Item ratings together with the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingTable {
    ratings: BTreeMap<String, f64>,
    config: EloConfig,
}

impl RatingTable {
    pub fn new(config: EloConfig) -> Self {
        RatingTable {
            ratings: BTreeMap::new(),
            config,
        }
    }

    pub fn from_ratings(ratings: BTreeMap<String, f64>, config: EloConfig) -> Self {
        RatingTable { ratings, config }
    }

    pub fn config(&self) -> &EloConfig {
        &self.config
    }

    pub fn get(&self, item: &str) -> Option<f64> {
        self.ratings.get(item).copied()
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    /// Items in lexicographic order.
    pub fn items(&self) -> impl Iterator<Item = &str> {
        self.ratings.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.ratings.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn ratings(&self) -> &BTreeMap<String, f64> {
        &self.ratings
    }

    /// Inserts `item` at the default rating if it is not already present.
    pub fn ensure(&mut self, item: &str) {
        if !self.ratings.contains_key(item) {
            self.ratings
                .insert(item.to_owned(), self.config.default_rating);
        }
    }

    /// `Σ ratings − n · default_rating`; zero up to rounding for any table
    /// built by Elo updates.
    pub fn zero_sum_residual(&self) -> f64 {
        let sum: f64 = self.ratings.values().sum();
        sum - self.ratings.len() as f64 * self.config.default_rating
    }

    /// Adds `offset` to every rating.
    pub fn shifted(&self, offset: f64) -> RatingTable {
        RatingTable {
            ratings: self
                .ratings
                .iter()
                .map(|(k, v)| (k.clone(), v + offset))
                .collect(),
            config: self.config,
        }
    }

    /// Plays one match in place, adding unseen items at the default rating.
    pub fn play(&mut self, record: &MatchRecord) -> Result<()> {
        record.validate()?;
        self.ensure(&record.item_a);
        self.ensure(&record.item_b);
        let ra = self.ratings[&record.item_a];
        let rb = self.ratings[&record.item_b];
        let (na, nb) = update_pair(ra, rb, record.score_a, &self.config)?;
        *self.ratings.get_mut(&record.item_a).unwrap() = na;
        *self.ratings.get_mut(&record.item_b).unwrap() = nb;
        Ok(())
    }
}

/// Probability that an item rated `rating_a` beats one rated `rating_b`.
pub fn expected_score(rating_a: f64, rating_b: f64, config: &EloConfig) -> f64 {
    let x = (rating_a - rating_b) / config.scale_denominator;
    let decay = match config.logistic_base {
        LogisticBase::Natural => (-x).exp(),
        LogisticBase::Ten => 10f64.powf(-x),
    };
    1.0 / (1.0 + decay)
}

/// One Elo update. The points gained by `a` are exactly the points lost by `b`.
pub fn update_pair(
    rating_a: f64,
    rating_b: f64,
    score_a: f64,
    config: &EloConfig,
) -> Result<(f64, f64)> {
    check_score(score_a)?;
    let delta = config.k_factor * (score_a - expected_score(rating_a, rating_b, config));
    Ok((rating_a + delta, rating_b - delta))
}

/// Left fold of [`update_pair`] over `records` in the given order.
pub fn apply_match_sequence(records: &[MatchRecord], config: &EloConfig) -> Result<RatingTable> {
    config.validate()?;
    let mut table = RatingTable::new(*config);
    for record in records {
        table.play(record)?;
    }
    Ok(table)
}

/// A match between two items addressed by dense index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexedMatch {
    pub a: usize,
    pub b: usize,
    pub score_a: f64,
}

/// What a replay did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayStats {
    pub epochs_run: u32,
    /// Largest absolute rating change observed over the final epoch.
    pub last_max_change: f64,
}

/// Multi-epoch replay over dense ratings.
///
/// Matches must already be validated. Each epoch visits every match once, in
/// a fresh random order when `config.shuffle` is set. Replay stops early once
/// no rating moved by `convergence_epsilon` or more during an epoch.
pub fn replay_indexed(
    ratings: &mut [f64],
    matches: &[IndexedMatch],
    config: &EloConfig,
    seed: u64,
) -> ReplayStats {
    let mut order: Vec<usize> = (0..matches.len()).collect();
    let mut rng = SeedNode::new(seed).rng();
    let mut start = ratings.to_vec();
    let mut stats = ReplayStats {
        epochs_run: 0,
        last_max_change: 0.0,
    };
    for _ in 0..config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        for &i in &order {
            let m = matches[i];
            let delta =
                config.k_factor * (m.score_a - expected_score(ratings[m.a], ratings[m.b], config));
            ratings[m.a] += delta;
            ratings[m.b] -= delta;
        }
        let max_change = ratings
            .iter()
            .zip(&start)
            .map(|(now, before)| (now - before).abs())
            .fold(0.0, f64::max);
        stats.epochs_run += 1;
        stats.last_max_change = max_change;
        if max_change < config.convergence_epsilon {
            break;
        }
        start.copy_from_slice(ratings);
    }
    stats
}

/// Maps item names to dense indices in order of first appearance.
#[derive(Debug, Default, Clone)]
pub struct ItemIndex {
    names: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl ItemIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.lookup.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_owned());
        self.lookup.insert(name.to_owned(), i);
        i
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Validates and converts named records to indexed matches.
    pub fn index_records(&mut self, records: &[MatchRecord]) -> Result<Vec<IndexedMatch>> {
        records
            .iter()
            .map(|r| {
                r.validate()?;
                Ok(IndexedMatch {
                    a: self.intern(&r.item_a),
                    b: self.intern(&r.item_b),
                    score_a: r.score_a,
                })
            })
            .collect()
    }

    pub fn to_table(&self, ratings: &[f64], config: EloConfig) -> RatingTable {
        RatingTable::from_ratings(
            self.names
                .iter()
                .cloned()
                .zip(ratings.iter().copied())
                .collect(),
            config,
        )
    }
}

/// Replays `records` for up to `config.epochs` passes; see [`replay_indexed`].
pub fn replay_epochs(
    records: &[MatchRecord],
    config: &EloConfig,
    seed: u64,
) -> Result<RatingTable> {
    config.validate()?;
    let mut index = ItemIndex::new();
    let matches = index.index_records(records)?;
    let mut ratings = vec![config.default_rating; index.len()];
    replay_indexed(&mut ratings, &matches, config, seed);
    Ok(index.to_table(&ratings, *config))
}

/// Rank of every item, 0 for the highest rating. Ties go to the
/// lexicographically smaller identifier.
pub fn rankings(table: &RatingTable) -> BTreeMap<String, usize> {
    let mut order: Vec<(&str, f64)> = table.iter().collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(y.0)));
    order
        .into_iter()
        .enumerate()
        .map(|(rank, (item, _))| (item.to_owned(), rank))
        .collect()
}

/// Binary label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    /// Positive = 1, negative = 0.
    pub fn as_f64(self) -> f64 {
        if self.is_positive() {
            1.0
        } else {
            0.0
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinarizeMode {
    /// Positive iff rating > 0.
    Sign,
    /// Positive iff rating > median of the table.
    Median,
}

/// Strict sign labels.
pub fn sign_labels(ratings: &[f64]) -> Vec<Label> {
    ratings.iter().map(|&r| Label::from_bool(r > 0.0)).collect()
}

/// Strict median labels: an item sitting exactly on the median is negative.
pub fn median_labels(ratings: &[f64]) -> Vec<Label> {
    match crate::stats::median(ratings) {
        Some(m) => ratings.iter().map(|&r| Label::from_bool(r > m)).collect(),
        None => Vec::new(),
    }
}

pub fn binarize(table: &RatingTable, mode: BinarizeMode) -> Result<BTreeMap<String, Label>> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    if mode == BinarizeMode::Sign && table.config().default_rating != 0.0 {
        log::warn!(
            "sign labels assume ratings start at 0, but the default rating is {}",
            table.config().default_rating
        );
    }
    let values: Vec<f64> = table.iter().map(|(_, r)| r).collect();
    let labels = match mode {
        BinarizeMode::Sign => sign_labels(&values),
        BinarizeMode::Median => median_labels(&values),
    };
    Ok(table.items().map(str::to_owned).zip(labels).collect())
}
