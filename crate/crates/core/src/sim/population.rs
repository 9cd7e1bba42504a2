use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::elo::Label;
use crate::error::{Error, Result};
use crate::seed::{SeedNode, Stream};

use super::SimParams;

/// Latent item ratings and discriminatory-feature flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemPopulation {
    pub true_ratings: Vec<f64>,
    pub feature_flags: Vec<bool>,
}

impl ItemPopulation {
    /// Draws `n_items` ratings from N(0, 1) and Bernoulli feature flags.
    pub fn sample(params: &SimParams, node: SeedNode) -> Self {
        let mut rng = node.rng();
        let true_ratings = (0..params.n_items)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let feature_flags = (0..params.n_items)
            .map(|_| rng.random_bool(params.feature_probability))
            .collect();
        ItemPopulation {
            true_ratings,
            feature_flags,
        }
    }

    /// Builds a population from explicit ratings, with no feature flags set.
    pub fn from_ratings(true_ratings: Vec<f64>) -> Self {
        let n = true_ratings.len();
        ItemPopulation {
            true_ratings,
            feature_flags: vec![false; n],
        }
    }

    pub fn len(&self) -> usize {
        self.true_ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.true_ratings.is_empty()
    }

    /// Ground truth: positive iff the true rating is above zero.
    pub fn truth(&self) -> Vec<Label> {
        self.true_ratings
            .iter()
            .map(|&r| Label::from_bool(r > 0.0))
            .collect()
    }
}

/// Rater traits.
#[derive(Debug, Clone, PartialEq)]
pub struct RaterPopulation {
    pub thresholds: Vec<f64>,
    /// Weight applied to the discriminatory feature, in [-1, 1].
    pub bias_weights: Vec<f64>,
    pub spam_flags: Vec<bool>,
    /// Root of each rater's private perception draws.
    pub perception_seeds: Vec<SeedNode>,
    /// Root of each rater's random-answer stream.
    pub choice_seeds: Vec<SeedNode>,
}

impl RaterPopulation {
    pub fn sample(params: &SimParams, node: SeedNode) -> Result<Self> {
        let m = params.n_raters;
        let mut rng = node.child(Stream::Raters, 0).rng();
        let thresholds = (0..m)
            .map(|_| params.threshold_diversity * rng.sample::<f64, _>(StandardNormal))
            .collect();

        let bias_weights = if params.bias_enabled {
            let beta = Beta::new(params.bias_beta_alpha, params.bias_beta_beta)
                .map_err(|e| Error::InvalidConfig(format!("beta distribution: {e}")))?;
            let mut rng = node.child(Stream::Raters, 1).rng();
            (0..m).map(|_| 2.0 * beta.sample(&mut rng) - 1.0).collect()
        } else {
            vec![0.0; m]
        };

        let n_spam = (params.spam_fraction * m as f64).floor() as usize;
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut node.child(Stream::SpamAssignment, 0).rng());
        let mut spam_flags = vec![false; m];
        for &r in &order[..n_spam] {
            spam_flags[r] = true;
        }

        Ok(RaterPopulation {
            thresholds,
            bias_weights,
            spam_flags,
            perception_seeds: (0..m as u64)
                .map(|r| node.child(Stream::Perception, r))
                .collect(),
            choice_seeds: (0..m as u64)
                .map(|r| node.child(Stream::RaterChoice, r))
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn spam_count(&self) -> usize {
        self.spam_flags.iter().filter(|&&s| s).count()
    }
}

/// Perceived ratings already drawn, keyed by (rater, item).
#[derive(Debug, Default, Clone)]
pub struct PerceptionCache {
    values: HashMap<(usize, usize), f64>,
}

impl PerceptionCache {
    pub fn get(&self, rater: usize, item: usize) -> Option<f64> {
        self.values.get(&(rater, item)).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Raters judging a fixed set of items. Holds the perception cache and the
/// per-rater random-answer streams, so one panel serves one trial.
pub struct Panel<'a> {
    params: &'a SimParams,
    items: &'a ItemPopulation,
    raters: &'a RaterPopulation,
    cache: PerceptionCache,
    choice_streams: Vec<Option<ChaCha8Rng>>,
}

impl<'a> Panel<'a> {
    pub fn new(
        params: &'a SimParams,
        items: &'a ItemPopulation,
        raters: &'a RaterPopulation,
    ) -> Self {
        Panel {
            params,
            items,
            raters,
            cache: PerceptionCache::default(),
            choice_streams: vec![None; raters.len()],
        }
    }

    pub fn params(&self) -> &SimParams {
        self.params
    }

    pub fn items(&self) -> &ItemPopulation {
        self.items
    }

    pub fn raters(&self) -> &RaterPopulation {
        self.raters
    }

    pub fn cache(&self) -> &PerceptionCache {
        &self.cache
    }

    fn check(&self, rater: usize, item: usize) -> Result<()> {
        if rater >= self.raters.len() {
            return Err(Error::IndexOutOfRange {
                kind: "rater",
                index: rater,
                len: self.raters.len(),
            });
        }
        if item >= self.items.len() {
            return Err(Error::IndexOutOfRange {
                kind: "item",
                index: item,
                len: self.items.len(),
            });
        }
        Ok(())
    }

    /// The rater's perceived rating of the item: true rating plus private
    /// Gaussian noise plus the rater's feature weight when the item carries
    /// the feature. Fixed for the lifetime of the panel.
    pub fn perceive(&mut self, rater: usize, item: usize) -> Result<f64> {
        self.check(rater, item)?;
        if let Some(v) = self.cache.get(rater, item) {
            return Ok(v);
        }
        let noise: f64 = if self.params.perception_ambiguity > 0.0 {
            let mut rng = self.raters.perception_seeds[rater]
                .child(Stream::Perception, item as u64)
                .rng();
            self.params.perception_ambiguity * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        let feature = if self.items.feature_flags[item] {
            self.raters.bias_weights[rater]
        } else {
            0.0
        };
        let value = self.items.true_ratings[item] + noise + feature;
        self.cache.values.insert((rater, item), value);
        Ok(value)
    }

    fn coin(&mut self, rater: usize) -> bool {
        let seed = self.raters.choice_seeds[rater];
        self.choice_streams[rater]
            .get_or_insert_with(|| seed.rng())
            .random_bool(0.5)
    }

    /// Positive iff the perceived rating is strictly above the rater's
    /// threshold. Spammers flip a fair coin.
    pub fn cast_vote(&mut self, rater: usize, item: usize) -> Result<Label> {
        self.check(rater, item)?;
        if self.raters.spam_flags[rater] {
            return Ok(Label::from_bool(self.coin(rater)));
        }
        let perceived = self.perceive(rater, item)?;
        Ok(Label::from_bool(perceived > self.raters.thresholds[rater]))
    }

    /// Score for `item_a`: 0.5 when the perceived ratings differ by less than
    /// the comparison ambiguity, otherwise 1 or 0. Spammers pick a side at
    /// random and never answer "equal".
    pub fn compare(&mut self, rater: usize, item_a: usize, item_b: usize) -> Result<f64> {
        self.check(rater, item_a)?;
        self.check(rater, item_b)?;
        if item_a == item_b {
            return Err(Error::SelfMatch(format!("item #{item_a}")));
        }
        if self.raters.spam_flags[rater] {
            return Ok(if self.coin(rater) { 1.0 } else { 0.0 });
        }
        let a = self.perceive(rater, item_a)?;
        let b = self.perceive(rater, item_b)?;
        Ok(judge(a, b, self.params.comparison_ambiguity))
    }
}

/// Outcome of an attentive comparison between two perceived ratings.
pub(crate) fn judge(perceived_a: f64, perceived_b: f64, ambiguity: f64) -> f64 {
    let diff = perceived_a - perceived_b;
    if diff.abs() < ambiguity || diff == 0.0 {
        0.5
    } else if diff > 0.0 {
        1.0
    } else {
        0.0
    }
}
