use rayon::prelude::*;
use serde::Serialize;

use crate::elo::Label;
use crate::error::{Error, Result};
use crate::seed::{SeedNode, Stream};
use crate::stats;

use super::{
    bias_metric, comparison_labels, f1_positive, majority_vote_labels, ItemPopulation, Panel,
    RaterPopulation, SimParams,
};

/// Both labelling methods applied to one sampled world.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub run_index: usize,
    pub run_seed: u64,
    pub f1_majority: f64,
    pub f1_comparison: f64,
    /// `None` when no item carries the discriminatory feature.
    pub bias_majority: Option<f64>,
    pub bias_comparison: Option<f64>,
    pub truth: Vec<Label>,
    pub majority_labels: Vec<Label>,
    pub comparison_labels: Vec<Label>,
}

impl TrialResult {
    pub fn delta_f1(&self) -> f64 {
        self.f1_comparison - self.f1_majority
    }
}

/// Runs trial `run_index` of an ensemble. Items, raters, votes and
/// comparisons all derive from `params.master_seed` and the run index.
pub fn run_trial(params: &SimParams, run_index: usize) -> Result<TrialResult> {
    params.validate()?;
    let node = SeedNode::new(params.master_seed).child(Stream::Run, run_index as u64);
    let items = ItemPopulation::sample(params, node.child(Stream::Items, 0));
    let raters = RaterPopulation::sample(params, node.child(Stream::Raters, 0))?;
    let mut panel = Panel::new(params, &items, &raters);

    let majority = majority_vote_labels(&mut panel, node.child(Stream::Votes, 0))?;
    let comparison = comparison_labels(&mut panel, node.child(Stream::Pairs, 0))?.labels;
    let truth = items.truth();

    let bias = |labels: &[Label]| match bias_metric(labels, &truth, &items.feature_flags) {
        Ok(b) => Ok(Some(b)),
        Err(Error::NoFeatureItems) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(TrialResult {
        run_index,
        run_seed: node.0,
        f1_majority: f1_positive(&majority, &truth)?,
        f1_comparison: f1_positive(&comparison, &truth)?,
        bias_majority: bias(&majority)?,
        bias_comparison: bias(&comparison)?,
        majority_labels: majority,
        comparison_labels: comparison,
        truth,
    })
}

/// Mean with standard error and a ±5 SEM interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub sem: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Estimate {
    pub const SIGMAS: f64 = 5.0;

    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let sem = stats::sem(xs).ok_or(Error::TooFewRuns(xs.len()))?;
        let mean = stats::mean(xs);
        Ok(Estimate {
            mean,
            sem,
            lower: mean - Self::SIGMAS * sem,
            upper: mean + Self::SIGMAS * sem,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub n_runs: usize,
    pub n_comparisons: usize,
    pub task_ratio: f64,
    /// f1 of the comparison method minus f1 of majority vote.
    pub delta_f1: Estimate,
    pub f1_majority: Estimate,
    pub f1_comparison: Estimate,
    /// Present when every run had at least one feature item.
    pub bias_majority: Option<Estimate>,
    pub bias_comparison: Option<Estimate>,
    pub trials: Vec<TrialResult>,
}

/// Runs `n_runs` independent trials (in parallel) and summarises them.
pub fn run_ensemble(params: &SimParams, n_runs: usize) -> Result<EnsembleSummary> {
    if n_runs < 2 {
        return Err(Error::TooFewRuns(n_runs));
    }
    params.validate()?;
    let trials: Vec<TrialResult> = (0..n_runs)
        .into_par_iter()
        .map(|i| run_trial(params, i))
        .collect::<Result<_>>()?;

    let column = |f: &dyn Fn(&TrialResult) -> f64| trials.iter().map(f).collect::<Vec<_>>();
    let optional = |f: &dyn Fn(&TrialResult) -> Option<f64>| -> Result<Option<Estimate>> {
        let xs: Option<Vec<f64>> = trials.iter().map(f).collect();
        xs.map(|xs| Estimate::from_samples(&xs)).transpose()
    };
    Ok(EnsembleSummary {
        n_runs,
        n_comparisons: params.n_comparisons,
        task_ratio: params.task_ratio(),
        delta_f1: Estimate::from_samples(&column(&|t| t.delta_f1()))?,
        f1_majority: Estimate::from_samples(&column(&|t| t.f1_majority))?,
        f1_comparison: Estimate::from_samples(&column(&|t| t.f1_comparison))?,
        bias_majority: optional(&|t| t.bias_majority)?,
        bias_comparison: optional(&|t| t.bias_comparison)?,
        trials,
    })
}
