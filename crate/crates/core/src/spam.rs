//! Rater audits: does a rater agree with the consensus of everyone else?
//!
//! For each rater the ratings are recomputed without their records. An
//! attentive rater's outcomes then correlate with the rating difference of
//! the items they compared, and the sides they pick tend to be the likely
//! ones. A uniform-random rater shows neither.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::ComparisonDataset;
use crate::elo::{expected_score, EloConfig, MatchRecord, RatingTable};
use crate::error::{Error, Result};
use crate::scaling::replay_dataset;
use crate::stats;

/// Ratings from every record not attributed to `rater_id`, replayed in
/// dataset order with the canonical seed.
pub fn leave_one_out_ratings(
    dataset: &ComparisonDataset,
    rater_id: &str,
    config: &EloConfig,
) -> RatingTable {
    let rest = dataset.filtered(|r| r.rater_id.as_deref() != Some(rater_id));
    replay_dataset(&rest, config)
}

fn rater_records<'a>(dataset: &'a ComparisonDataset, rater_id: &str) -> Vec<&'a MatchRecord> {
    dataset
        .records()
        .iter()
        .filter(|r| r.rater_id.as_deref() == Some(rater_id))
        .collect()
}

fn rating(table: &RatingTable, item: &str) -> f64 {
    table.get(item).unwrap_or(table.config().default_rating)
}

/// Correlation between rating difference and outcome over `records`, judged
/// against `ratings`. `Ok(None)` when either series is constant.
pub fn correlation_against(records: &[&MatchRecord], ratings: &RatingTable) -> Result<Option<f64>> {
    if records.len() < 2 {
        return Err(Error::InsufficientData {
            rater: records
                .first()
                .and_then(|r| r.rater_id.clone())
                .unwrap_or_default(),
            records: records.len(),
        });
    }
    let d: Vec<f64> = records
        .iter()
        .map(|r| rating(ratings, &r.item_a) - rating(ratings, &r.item_b))
        .collect();
    let s: Vec<f64> = records.iter().map(|r| r.score_a).collect();
    Ok(stats::pearson(&d, &s))
}

/// Probability the rating model assigned to each selected side. Draws are
/// skipped.
pub fn selection_probabilities(
    records: &[&MatchRecord],
    ratings: &RatingTable,
    config: &EloConfig,
) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.score_a != 0.5)
        .map(|r| {
            let e = expected_score(
                rating(ratings, &r.item_a),
                rating(ratings, &r.item_b),
                config,
            );
            if r.score_a == 1.0 {
                e
            } else {
                1.0 - e
            }
        })
        .collect()
}

/// Pearson correlation of `R_a − R_b` (leave-one-out) with the outcome for
/// `item_a`, over the rater's records.
pub fn outcome_correlation(
    dataset: &ComparisonDataset,
    rater_id: &str,
    config: &EloConfig,
) -> Result<Option<f64>> {
    let records = rater_records(dataset, rater_id);
    if records.len() < 2 {
        return Err(Error::InsufficientData {
            rater: rater_id.to_owned(),
            records: records.len(),
        });
    }
    correlation_against(&records, &leave_one_out_ratings(dataset, rater_id, config))
}

/// Median model probability of the sides the rater selected.
pub fn median_selection_probability(
    dataset: &ComparisonDataset,
    rater_id: &str,
    config: &EloConfig,
) -> Result<f64> {
    let records = rater_records(dataset, rater_id);
    let table = leave_one_out_ratings(dataset, rater_id, config);
    stats::median(&selection_probabilities(&records, &table, config)).ok_or_else(|| {
        Error::InsufficientData {
            rater: rater_id.to_owned(),
            records: records.len(),
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditFlag {
    LowCorrelation,
    LowMedianProbability,
    InsufficientData,
}

impl AuditFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            AuditFlag::LowCorrelation => "low_correlation",
            AuditFlag::LowMedianProbability => "low_median_probability",
            AuditFlag::InsufficientData => "insufficient_data",
        }
    }
}

impl fmt::Display for AuditFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Thresholds for [`flag_spammers`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditPolicy {
    /// Correlations strictly below this are flagged.
    pub correlation_floor: f64,
    /// Median selection probabilities strictly below this are flagged.
    pub probability_floor: f64,
    /// Raters with fewer records are only marked as insufficient.
    pub min_records: usize,
}

impl Default for AuditPolicy {
    fn default() -> Self {
        AuditPolicy {
            correlation_floor: 0.4,
            probability_floor: 0.6,
            min_records: 20,
        }
    }
}

impl AuditPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.correlation_floor) {
            return Err(Error::InvalidConfig(format!(
                "correlation floor {} is outside [-1, 1]",
                self.correlation_floor
            )));
        }
        if !(0.0..=1.0).contains(&self.probability_floor) {
            return Err(Error::InvalidConfig(format!(
                "probability floor {} is outside [0, 1]",
                self.probability_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaterAudit {
    pub rater_id: String,
    pub n_comparisons: usize,
    pub outcome_correlation: Option<f64>,
    pub median_selection_probability: Option<f64>,
    pub flags: BTreeSet<AuditFlag>,
}

impl RaterAudit {
    /// Flagged on either score.
    pub fn is_suspect(&self) -> bool {
        self.flags.contains(&AuditFlag::LowCorrelation)
            || self.flags.contains(&AuditFlag::LowMedianProbability)
    }
}

fn audit_one(
    dataset: &ComparisonDataset,
    rater_id: &str,
    config: &EloConfig,
    policy: &AuditPolicy,
) -> RaterAudit {
    let records = rater_records(dataset, rater_id);
    let table = leave_one_out_ratings(dataset, rater_id, config);
    let correlation = correlation_against(&records, &table).ok().flatten();
    let probability = stats::median(&selection_probabilities(&records, &table, config));

    let mut flags = BTreeSet::new();
    if records.len() < policy.min_records.max(1) || probability.is_none() || records.len() < 2 {
        flags.insert(AuditFlag::InsufficientData);
    } else {
        if correlation.is_some_and(|c| c < policy.correlation_floor) {
            flags.insert(AuditFlag::LowCorrelation);
        }
        if probability.is_some_and(|p| p < policy.probability_floor) {
            flags.insert(AuditFlag::LowMedianProbability);
        }
    }
    RaterAudit {
        rater_id: rater_id.to_owned(),
        n_comparisons: records.len(),
        outcome_correlation: correlation,
        median_selection_probability: probability,
        flags,
    }
}

/// Audits every rater in the dataset, in rater-id order.
pub fn flag_spammers(
    dataset: &ComparisonDataset,
    config: &EloConfig,
    policy: &AuditPolicy,
) -> Result<Vec<RaterAudit>> {
    config.validate()?;
    policy.validate()?;
    let raters: Vec<&str> = dataset.raters().into_iter().collect();
    Ok(raters
        .par_iter()
        .map(|r| audit_one(dataset, r, config, policy))
        .collect())
}

pub const AUDIT_HEADER: [&str; 5] = [
    "rater_id",
    "n_comparisons",
    "outcome_correlation",
    "median_selection_probability",
    "flags",
];

/// Writes the audit CSV. Undefined values are empty; flags are joined by `;`.
pub fn write_audits<W: Write>(audits: &[RaterAudit], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(AUDIT_HEADER).map_err(io)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for a in audits {
        let flags: Vec<&str> = a.flags.iter().map(|f| f.as_str()).collect();
        w.write_record([
            a.rater_id.clone(),
            a.n_comparisons.to_string(),
            opt(a.outcome_correlation),
            opt(a.median_selection_probability),
            flags.join(";"),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Provenance;
    use crate::elo::apply_match_sequence;

    fn dataset(rows: &[(&str, &str, f64, &str)]) -> ComparisonDataset {
        ComparisonDataset::new(
            rows.iter()
                .map(|(a, b, s, r)| MatchRecord::new(*a, *b, *s).with_rater(*r))
                .collect(),
            Provenance::Ingested,
        )
        .unwrap()
    }

    #[test]
    fn excluding_the_only_rater_leaves_defaults() {
        let d = dataset(&[("a", "b", 1.0, "r"), ("b", "c", 1.0, "r")]);
        let t = leave_one_out_ratings(&d, "r", &EloConfig::chess());
        assert_eq!(t.len(), 3);
        assert!(t.iter().all(|(_, v)| v == 1400.0));
    }

    #[test]
    fn excluding_an_absent_rater_changes_nothing() {
        let d = dataset(&[("a", "b", 1.0, "r"), ("b", "c", 0.5, "s")]);
        let cfg = EloConfig::simulation();
        assert_eq!(
            leave_one_out_ratings(&d, "nobody", &cfg),
            replay_dataset(&d, &cfg)
        );
    }

    #[test]
    fn two_rater_fixture() {
        let d = dataset(&[
            ("a", "b", 1.0, "r"),
            ("a", "c", 0.0, "s"),
            ("b", "c", 1.0, "r"),
            ("c", "a", 0.5, "s"),
        ]);
        let cfg = EloConfig::chess();
        let t = leave_one_out_ratings(&d, "r", &cfg);
        // s's records by hand, natural base, k = 30, denominator 400:
        // (a, c) from 1400/1400, a loses: a = 1385, c = 1415.
        // (c, a): E_c = 1/(1 + e^(-30/400)), c' = c + 30 (0.5 - E_c).
        let e = 1.0 / (1.0 + (-30.0f64 / 400.0).exp());
        let shift = 30.0 * (0.5 - e);
        assert!((t.get("c").unwrap() - (1415.0 + shift)).abs() < 1e-9);
        assert!((t.get("a").unwrap() - (1385.0 - shift)).abs() < 1e-9);
        assert_eq!(t.get("b"), Some(1400.0));
        let direct =
            apply_match_sequence(&[d.records()[1].clone(), d.records()[3].clone()], &cfg).unwrap();
        assert_eq!(t.get("a"), direct.get("a"));
    }

    // Another rater establishes h above l; the audited rater then answers
    // four times on the same pair.
    fn correlation_fixture(flip: bool) -> ComparisonDataset {
        let (w, l) = if flip { (0.0, 1.0) } else { (1.0, 0.0) };
        dataset(&[
            ("h", "l", 1.0, "ref"),
            ("h", "l", w, "x"),
            ("l", "h", l, "x"),
            ("h", "l", w, "x"),
            ("l", "h", l, "x"),
        ])
    }

    #[test]
    fn correlation_extremes() {
        let cfg = EloConfig::chess();
        let c = outcome_correlation(&correlation_fixture(false), "x", &cfg)
            .unwrap()
            .unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        let c = outcome_correlation(&correlation_fixture(true), "x", &cfg)
            .unwrap()
            .unwrap();
        assert!((c + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_difference_has_no_correlation() {
        let d = dataset(&[("a", "b", 1.0, "x"), ("c", "e", 0.0, "x")]);
        assert_eq!(
            outcome_correlation(&d, "x", &EloConfig::chess()).unwrap(),
            None
        );
    }

    #[test]
    fn one_record_is_insufficient() {
        let d = dataset(&[("a", "b", 1.0, "x"), ("a", "b", 1.0, "y")]);
        assert!(matches!(
            outcome_correlation(&d, "x", &EloConfig::chess()),
            Err(Error::InsufficientData { records: 1, .. })
        ));
        let audits = flag_spammers(&d, &EloConfig::chess(), &AuditPolicy::default()).unwrap();
        for a in audits {
            assert_eq!(a.flags, BTreeSet::from([AuditFlag::InsufficientData]));
            assert!(!a.is_suspect());
        }
    }

    #[test]
    fn equal_ratings_give_even_odds() {
        let d = dataset(&[("a", "b", 1.0, "x"), ("c", "e", 0.0, "x")]);
        assert_eq!(
            median_selection_probability(&d, "x", &EloConfig::chess()).unwrap(),
            0.5
        );
    }

    #[test]
    fn draws_only_is_insufficient() {
        let d = dataset(&[("a", "b", 0.5, "x")]);
        assert!(median_selection_probability(&d, "x", &EloConfig::chess()).is_err());
    }

    #[test]
    fn hand_built_probabilities() {
        let cfg = EloConfig::chess();
        // With E = 1/(1 + e^(-d/400)), a gap d = 400 ln(p / (1 - p)) gives E = p.
        let gap = |p: f64| 400.0 * (p / (1.0 - p)).ln();
        let table = RatingTable::from_ratings(
            [
                ("a".to_owned(), 0.0),
                ("b".to_owned(), -gap(0.7)),
                ("c".to_owned(), 0.0),
                ("d".to_owned(), -gap(0.6)),
                ("e".to_owned(), 0.0),
                ("f".to_owned(), -gap(0.6)),
            ]
            .into(),
            cfg,
        );
        let records = [
            MatchRecord::new("a", "b", 1.0), // favourite picked: 0.7
            MatchRecord::new("c", "d", 0.0), // underdog picked: 0.4
            MatchRecord::new("e", "f", 1.0), // favourite picked: 0.6
            MatchRecord::new("a", "c", 0.5), // draw, skipped
        ];
        let refs: Vec<&MatchRecord> = records.iter().collect();
        let probs = selection_probabilities(&refs, &table, &cfg);
        let expected = [0.7, 0.4, 0.6];
        for (p, e) in probs.iter().zip(expected) {
            assert!((p - e).abs() < 1e-12);
        }
        assert!((stats::median(&probs).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn audit_csv_layout() {
        let audits = vec![RaterAudit {
            rater_id: "w1".into(),
            n_comparisons: 3,
            outcome_correlation: None,
            median_selection_probability: Some(0.5),
            flags: BTreeSet::from([AuditFlag::LowCorrelation, AuditFlag::LowMedianProbability]),
        }];
        let mut out = Vec::new();
        write_audits(&audits, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "rater_id,n_comparisons,outcome_correlation,median_selection_probability,flags\n\
             w1,3,,0.5,low_correlation;low_median_probability\n"
        );
    }
}
