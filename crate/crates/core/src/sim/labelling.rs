use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::elo::{replay_indexed, IndexedMatch, Label};
use crate::error::{Error, Result};
use crate::seed::{SeedNode, Stream};

use super::Panel;

/// Labels every item by majority over `votes_per_item` distinct raters drawn
/// independently for each item.
pub fn majority_vote_labels(panel: &mut Panel<'_>, node: SeedNode) -> Result<Vec<Label>> {
    let votes = panel.params().votes_per_item;
    let n_raters = panel.raters().len();
    if votes == 0 || votes.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "votes_per_item must be odd, got {votes}"
        )));
    }
    if n_raters < votes {
        return Err(Error::NotEnoughRaters {
            needed: votes,
            available: n_raters,
        });
    }
    (0..panel.items().len())
        .map(|item| {
            let mut rng = node.child(Stream::Votes, item as u64).rng();
            let mut positive = 0;
            for rater in index::sample(&mut rng, n_raters, votes) {
                if panel.cast_vote(rater, item)?.is_positive() {
                    positive += 1;
                }
            }
            Ok(Label::from_bool(2 * positive > votes))
        })
        .collect()
}

/// The `index`-th unordered pair of `0..n` in row-major order:
/// (0,1), (0,2), ..., (0,n-1), (1,2), ...
pub fn pair_from_index(n: usize, index: usize) -> (usize, usize) {
    debug_assert!(index < n * (n - 1) / 2);
    // Row i holds n - 1 - i pairs and starts at i * (2n - i - 1) / 2.
    let row_start = |i: usize| i * (2 * n - i - 1) / 2;
    let (mut lo, mut hi) = (0, n - 2);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if row_start(mid) <= index {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    (lo, lo + 1 + index - row_start(lo))
}

/// One judged pair from a simulated panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedComparison {
    pub item_a: usize,
    pub item_b: usize,
    pub score_a: f64,
    pub rater: usize,
}

impl SimulatedComparison {
    pub fn as_match(&self) -> IndexedMatch {
        IndexedMatch {
            a: self.item_a,
            b: self.item_b,
            score_a: self.score_a,
        }
    }
}

/// How comparison tasks are handed to raters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RaterAssignment {
    /// Every task goes to a uniformly drawn rater.
    #[default]
    Uniform,
    /// Raters are dealt from repeatedly shuffled decks, so task counts per
    /// rater differ by at most one.
    Balanced,
}

/// Draws `count` pairs uniformly without replacement from all unordered
/// pairs, starting a fresh pass once every pair has been used, and has each
/// judged by a uniformly drawn rater.
pub fn simulate_comparisons(
    panel: &mut Panel<'_>,
    count: usize,
    node: SeedNode,
) -> Result<Vec<SimulatedComparison>> {
    simulate_comparisons_with(panel, count, RaterAssignment::Uniform, node)
}

/// [`simulate_comparisons`] with an explicit rater assignment policy.
pub fn simulate_comparisons_with(
    panel: &mut Panel<'_>,
    count: usize,
    assignment: RaterAssignment,
    node: SeedNode,
) -> Result<Vec<SimulatedComparison>> {
    let n = panel.items().len();
    if n < 2 {
        return Err(Error::TooFewItems(n));
    }
    let n_raters = panel.raters().len();
    let pool = n * (n - 1) / 2;
    let mut pair_rng = node.child(Stream::Pairs, 0).rng();
    let mut rater_rng = node.child(Stream::Pairs, 1).rng();
    let mut deck: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let take = (count - out.len()).min(pool);
        for k in index::sample(&mut pair_rng, pool, take) {
            let (a, b) = pair_from_index(n, k);
            let rater = match assignment {
                RaterAssignment::Uniform => rater_rng.random_range(0..n_raters),
                RaterAssignment::Balanced => {
                    if deck.is_empty() {
                        deck.extend(0..n_raters);
                        deck.shuffle(&mut rater_rng);
                    }
                    deck.pop().expect("deck refilled above")
                }
            };
            let score_a = panel.compare(rater, a, b)?;
            out.push(SimulatedComparison {
                item_a: a,
                item_b: b,
                score_a,
                rater,
            });
        }
    }
    Ok(out)
}

/// Result of the comparison method for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonLabelling {
    pub labels: Vec<Label>,
    pub ratings: Vec<f64>,
    pub comparisons: Vec<SimulatedComparison>,
}

/// Simulates `n_comparisons` judged pairs, aggregates them with Elo replay
/// and labels items by whether their rating ends above the starting rating.
pub fn comparison_labels(panel: &mut Panel<'_>, node: SeedNode) -> Result<ComparisonLabelling> {
    let params = panel.params().clone();
    if params.n_comparisons == 0 {
        return Err(Error::NoComparisons);
    }
    let comparisons = simulate_comparisons(panel, params.n_comparisons, node)?;
    let matches: Vec<IndexedMatch> = comparisons.iter().map(|c| c.as_match()).collect();
    let mut ratings = vec![params.elo.default_rating; panel.items().len()];
    replay_indexed(
        &mut ratings,
        &matches,
        &params.elo,
        node.child(Stream::Replay, 0).0,
    );
    let labels = ratings
        .iter()
        .map(|&r| Label::from_bool(r > params.elo.default_rating))
        .collect();
    Ok(ComparisonLabelling {
        labels,
        ratings,
        comparisons,
    })
}
