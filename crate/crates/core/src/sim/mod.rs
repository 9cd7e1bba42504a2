//! Agent-based model of subjective raters.
//!
//! Items carry a latent rating and an optional discriminatory feature. Raters
//! perceive each item with private noise and an individual feature weight,
//! vote by comparing against a personal threshold, and compare pairs of items
//! with an indifference band. A fraction of raters answer at random.
//!
//! A trial labels the same items twice, once by odd-count majority vote and
//! once by Elo aggregation of random pairwise comparisons, and scores both
//! against the sign of the latent rating.

mod ensemble;
mod labelling;
mod metrics;
mod params;
mod population;

pub use ensemble::{run_ensemble, run_trial, EnsembleSummary, Estimate, TrialResult};
pub use labelling::{
    comparison_labels, majority_vote_labels, pair_from_index, simulate_comparisons,
    simulate_comparisons_with, ComparisonLabelling, RaterAssignment, SimulatedComparison,
};
pub use metrics::{bias_metric, f1_positive};
pub use params::{SimParams, Sweep, SweepParameter};
pub use population::{ItemPopulation, Panel, PerceptionCache, RaterPopulation};
