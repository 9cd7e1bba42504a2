//! Labelling subjective constructs from crowdsourced pairwise comparisons.
//!
//! * [`elo`]: Elo aggregation, multi-epoch replay, rankings and binary labels.
//! * [`sim`]: agent-based model of subjective raters comparing majority vote
//!   with comparison-based labelling.
//! * [`dataset`]: comparison and rating CSV formats.
//! * [`scaling`]: subsampling trajectories, scaling collapse and budget estimates.
//! * [`anchor`]: aligning one rating scale to another with binary-search probes.
//! * [`spam`]: leave-one-out heuristics for spotting random raters.

pub mod anchor;
pub mod dataset;
pub mod elo;
pub mod error;
pub mod scaling;
pub mod seed;
pub mod sim;
pub mod spam;
pub mod stats;

pub use error::{Error, Result};
