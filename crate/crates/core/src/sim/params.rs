use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::elo::EloConfig;
use crate::error::{Error, Result};

/// Full parameter bundle for one simulated labelling scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub n_items: usize,
    pub n_raters: usize,
    /// Standard deviation of a rater's perceived rating around the true rating.
    pub perception_ambiguity: f64,
    /// Perceived difference below which a rater calls a pair equal.
    pub comparison_ambiguity: f64,
    /// Standard deviation of personal voting thresholds.
    pub threshold_diversity: f64,
    pub spam_fraction: f64,
    pub bias_enabled: bool,
    pub bias_beta_alpha: f64,
    pub bias_beta_beta: f64,
    pub feature_probability: f64,
    pub votes_per_item: usize,
    pub n_comparisons: usize,
    pub elo: EloConfig,
    pub master_seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            n_items: 512,
            n_raters: 100,
            perception_ambiguity: 0.5,
            comparison_ambiguity: 0.5,
            threshold_diversity: 0.5,
            spam_fraction: 0.0,
            bias_enabled: false,
            bias_beta_alpha: 2.0,
            bias_beta_beta: 16.0,
            feature_probability: 0.5,
            votes_per_item: 3,
            n_comparisons: 3 * 512,
            elo: EloConfig::simulation(),
            master_seed: 0,
        }
    }
}

impl SimParams {
    /// Number of majority-vote tasks: votes per item times items.
    pub fn vote_tasks(&self) -> usize {
        self.votes_per_item * self.n_items
    }

    /// Sets `n_comparisons` to `ratio` times the number of vote tasks.
    pub fn with_task_ratio(mut self, ratio: f64) -> Self {
        self.n_comparisons = (ratio * self.vote_tasks() as f64).round().max(0.0) as usize;
        self
    }

    /// Comparison tasks divided by vote tasks.
    pub fn task_ratio(&self) -> f64 {
        self.n_comparisons as f64 / self.vote_tasks() as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_items == 0 {
            return bad("n_items must be positive".into());
        }
        if self.n_raters == 0 {
            return bad("n_raters must be positive".into());
        }
        for (name, v) in [
            ("perception_ambiguity", self.perception_ambiguity),
            ("comparison_ambiguity", self.comparison_ambiguity),
            ("threshold_diversity", self.threshold_diversity),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!(
                    "{name} must be a finite non-negative number, got {v}"
                ));
            }
        }
        for (name, v) in [
            ("spam_fraction", self.spam_fraction),
            ("feature_probability", self.feature_probability),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if !(self.bias_beta_alpha > 0.0 && self.bias_beta_beta > 0.0) {
            return bad("beta shape parameters must be positive".into());
        }
        if self.votes_per_item == 0 || self.votes_per_item.is_multiple_of(2) {
            return bad(format!(
                "votes_per_item must be odd, got {}",
                self.votes_per_item
            ));
        }
        self.elo.validate()
    }

    /// Applies one sweep assignment.
    pub fn set(&mut self, parameter: SweepParameter, value: f64) -> Result<()> {
        let as_count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(Error::InvalidConfig(format!(
                    "{parameter} expects a non-negative integer, got {v}"
                )))
            }
        };
        match parameter {
            SweepParameter::PerceptionAmbiguity => self.perception_ambiguity = value,
            SweepParameter::ComparisonAmbiguity => self.comparison_ambiguity = value,
            SweepParameter::ThresholdDiversity => self.threshold_diversity = value,
            SweepParameter::SpamFraction => self.spam_fraction = value,
            SweepParameter::Bias => self.bias_enabled = value != 0.0,
            SweepParameter::VotesPerItem => self.votes_per_item = as_count(value)?,
            SweepParameter::NItems => self.n_items = as_count(value)?,
            SweepParameter::NRaters => self.n_raters = as_count(value)?,
        }
        Ok(())
    }
}

/// A parameter that a one-dimensional sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    PerceptionAmbiguity,
    ComparisonAmbiguity,
    ThresholdDiversity,
    SpamFraction,
    /// 0 disables, anything else enables the discriminatory feature weights.
    Bias,
    VotesPerItem,
    NItems,
    NRaters,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 8] = [
        SweepParameter::PerceptionAmbiguity,
        SweepParameter::ComparisonAmbiguity,
        SweepParameter::ThresholdDiversity,
        SweepParameter::SpamFraction,
        SweepParameter::Bias,
        SweepParameter::VotesPerItem,
        SweepParameter::NItems,
        SweepParameter::NRaters,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::PerceptionAmbiguity => "perception_ambiguity",
            SweepParameter::ComparisonAmbiguity => "comparison_ambiguity",
            SweepParameter::ThresholdDiversity => "threshold_diversity",
            SweepParameter::SpamFraction => "spam_fraction",
            SweepParameter::Bias => "bias",
            SweepParameter::VotesPerItem => "votes_per_item",
            SweepParameter::NItems => "n_items",
            SweepParameter::NRaters => "n_raters",
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParameter::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown sweep parameter {s:?}")))
    }
}

/// A one-parameter sweep, written `name=v1,v2,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, values) = s.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("sweep {s:?} is not of the form name=v1,v2"))
        })?;
        let parameter: SweepParameter = name.trim().parse()?;
        let values = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| {
                        Error::InvalidConfig(format!("sweep value {v:?} is not a finite number"))
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Sweep { parameter, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = SimParams::default();
        p.validate().unwrap();
        assert_eq!(p.task_ratio(), 1.0);
    }

    #[test]
    fn even_votes_rejected() {
        let p = SimParams {
            votes_per_item: 4,
            ..SimParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn ratio_sets_comparisons() {
        let p = SimParams {
            n_items: 128,
            ..SimParams::default()
        }
        .with_task_ratio(3.0);
        assert_eq!(p.n_comparisons, 3 * 3 * 128);
    }

    #[test]
    fn sweep_names_round_trip() {
        for p in SweepParameter::ALL {
            assert_eq!(p.name().parse::<SweepParameter>().unwrap(), p);
        }
        assert!("temperature".parse::<SweepParameter>().is_err());
    }

    #[test]
    fn integer_parameters_reject_fractions() {
        let mut p = SimParams::default();
        assert!(p.set(SweepParameter::VotesPerItem, 2.5).is_err());
        p.set(SweepParameter::VotesPerItem, 5.0).unwrap();
        assert_eq!(p.votes_per_item, 5);
    }

    #[test]
    fn sweep_spec_parses() {
        let sw: Sweep = "threshold_diversity=0, 0.5,1.0".parse().unwrap();
        assert_eq!(sw.parameter, SweepParameter::ThresholdDiversity);
        assert_eq!(sw.values, [0.0, 0.5, 1.0]);
        assert!("colour=1".parse::<Sweep>().is_err());
        assert!("spam_fraction".parse::<Sweep>().is_err());
        assert!("spam_fraction=".parse::<Sweep>().is_err());
        assert!("spam_fraction=0.1,nan".parse::<Sweep>().is_err());
    }
}
