//! Comparison datasets and their CSV formats.
//!
//! Comparison CSV, UTF-8, one comparison per row:
//!
//! ```text
//! item_a,item_b,outcome,rater_id
//! c01,c17,1.0,w3
//! c17,c02,0.5,w9
//! ```
//!
//! `outcome` is `1.0`, `0.5` or `0.0` (win, draw, loss for `item_a`). A fifth
//! `timestamp` column may be present and is ignored.
//!
//! Ratings CSV: `item,rating,rank,label_sign,label_median`. Only the first two
//! columns are read back.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::Serialize;

use crate::elo::{
    binarize, rankings, BinarizeMode, IndexedMatch, ItemIndex, Label, MatchRecord, RatingTable,
};
use crate::error::{Error, Result};
use crate::seed::{SeedNode, Stream};
use crate::sim::{
    simulate_comparisons_with, ItemPopulation, Panel, RaterAssignment, RaterPopulation, SimParams,
};

pub const COMPARISON_HEADER: [&str; 4] = ["item_a", "item_b", "outcome", "rater_id"];
pub const TIMESTAMP_COLUMN: &str = "timestamp";
pub const RATINGS_HEADER: [&str; 5] = ["item", "rating", "rank", "label_sign", "label_median"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Simulated,
    Ingested,
}

/// Rater-attributed comparisons over a fixed item universe.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonDataset {
    records: Vec<MatchRecord>,
    items: BTreeSet<String>,
    provenance: Provenance,
}

impl ComparisonDataset {
    /// Validates the records; the universe is every item they mention.
    pub fn new(records: Vec<MatchRecord>, provenance: Provenance) -> Result<Self> {
        let mut items = BTreeSet::new();
        for r in &records {
            r.validate()?;
            items.insert(r.item_a.clone());
            items.insert(r.item_b.clone());
        }
        Ok(ComparisonDataset {
            records,
            items,
            provenance,
        })
    }

    /// Like [`ComparisonDataset::new`] with extra items that may have no comparisons.
    pub fn with_universe(
        records: Vec<MatchRecord>,
        universe: impl IntoIterator<Item = String>,
        provenance: Provenance,
    ) -> Result<Self> {
        let mut ds = Self::new(records, provenance)?;
        ds.items.extend(universe);
        Ok(ds)
    }

    pub fn records(&self) -> &[MatchRecord] {
        &self.records
    }

    /// Item universe in lexicographic order.
    pub fn items(&self) -> &BTreeSet<String> {
        &self.items
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct rater identifiers, sorted.
    pub fn raters(&self) -> BTreeSet<&str> {
        self.records
            .iter()
            .filter_map(|r| r.rater_id.as_deref())
            .collect()
    }

    /// Dense view: items indexed in lexicographic order, records in file order.
    pub fn indexed(&self) -> (ItemIndex, Vec<IndexedMatch>) {
        let mut index = ItemIndex::new();
        for item in &self.items {
            index.intern(item);
        }
        let matches = self
            .records
            .iter()
            .map(|r| IndexedMatch {
                a: index.get(&r.item_a).expect("universe covers records"),
                b: index.get(&r.item_b).expect("universe covers records"),
                score_a: r.score_a,
            })
            .collect();
        (index, matches)
    }

    /// Keeps only the records matching `keep`, over the same universe.
    pub fn filtered(&self, mut keep: impl FnMut(&MatchRecord) -> bool) -> ComparisonDataset {
        ComparisonDataset {
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
            items: self.items.clone(),
            provenance: self.provenance,
        }
    }
}

fn outcome_from_str(s: &str) -> Option<f64> {
    match s {
        "1.0" => Some(1.0),
        "0.5" => Some(0.5),
        "0.0" => Some(0.0),
        _ => None,
    }
}

fn outcome_str(score: f64) -> &'static str {
    if score == 1.0 {
        "1.0"
    } else if score == 0.5 {
        "0.5"
    } else {
        "0.0"
    }
}

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        csv::ErrorKind::Utf8 { err, .. } => parse_error(line, format!("invalid UTF-8: {err}")),
        other => parse_error(line, format!("{other:?}")),
    }
}

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source)
}

/// Parses the comparison CSV. Rows that fail validation are reported with
/// their 1-based line number.
pub fn load_comparisons<R: Read>(source: R) -> Result<ComparisonDataset> {
    let mut rdr = reader(source);
    let mut rows = rdr.records();
    let header = match rows.next() {
        Some(row) => row.map_err(csv_error)?,
        None => return Err(parse_error(1, "missing header row")),
    };
    let fields: Vec<&str> = header.iter().collect();
    let with_timestamp = match fields.as_slice() {
        [a, b, c, d] if [*a, *b, *c, *d] == COMPARISON_HEADER => false,
        [a, b, c, d, t] if [*a, *b, *c, *d] == COMPARISON_HEADER && *t == TIMESTAMP_COLUMN => true,
        _ => {
            return Err(parse_error(
                1,
                format!(
                "expected header `{}` (optionally followed by `,{TIMESTAMP_COLUMN}`), found `{}`",
                COMPARISON_HEADER.join(","),
                fields.join(",")
            ),
            ))
        }
    };
    let width = if with_timestamp { 5 } else { 4 };

    let mut records = Vec::new();
    for row in rows {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != width {
            return Err(parse_error(
                line,
                format!("expected {width} columns, found {}", row.len()),
            ));
        }
        let (a, b, outcome, rater) = (&row[0], &row[1], &row[2], &row[3]);
        if a.is_empty() || b.is_empty() {
            return Err(parse_error(line, "empty item identifier"));
        }
        if rater.is_empty() {
            return Err(parse_error(line, "empty rater_id"));
        }
        if a == b {
            return Err(parse_error(
                line,
                format!("item {a:?} compared with itself"),
            ));
        }
        let score = outcome_from_str(outcome).ok_or_else(|| {
            parse_error(
                line,
                format!("outcome {outcome:?} is not one of 1.0, 0.5, 0.0"),
            )
        })?;
        records.push(MatchRecord::new(a, b, score).with_rater(rater));
    }
    ComparisonDataset::new(records, Provenance::Ingested)
}

/// Writes the comparison CSV. Records without a rater are written with an
/// empty `rater_id` and will not load back.
pub fn write_comparisons<W: Write>(dataset: &ComparisonDataset, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(COMPARISON_HEADER).map_err(csv_error)?;
    for r in dataset.records() {
        w.write_record([
            r.item_a.as_str(),
            r.item_b.as_str(),
            outcome_str(r.score_a),
            r.rater_id.as_deref().unwrap_or(""),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// One row of the ratings output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingRow {
    pub item: String,
    pub rating: f64,
    pub rank: usize,
    pub label_sign: Label,
    pub label_median: Label,
}

/// Rating, rank and both labels for every item, in rank order.
pub fn rating_rows(table: &RatingTable) -> Result<Vec<RatingRow>> {
    let ranks = rankings(table);
    let sign = binarize(table, BinarizeMode::Sign)?;
    let median = binarize(table, BinarizeMode::Median)?;
    let mut rows: Vec<RatingRow> = table
        .iter()
        .map(|(item, rating)| RatingRow {
            item: item.to_owned(),
            rating,
            rank: ranks[item],
            label_sign: sign[item],
            label_median: median[item],
        })
        .collect();
    rows.sort_by_key(|r| r.rank);
    Ok(rows)
}

pub fn write_ratings<W: Write>(rows: &[RatingRow], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(RATINGS_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.item.clone(),
            r.rating.to_string(),
            r.rank.to_string(),
            r.label_sign.as_str().to_owned(),
            r.label_median.as_str().to_owned(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `item,rating[,...]` rows. Extra columns are ignored.
pub fn load_ratings<R: Read>(source: R) -> Result<BTreeMap<String, f64>> {
    let mut rdr = reader(source);
    let mut rows = rdr.records();
    let header = match rows.next() {
        Some(row) => row.map_err(csv_error)?,
        None => return Err(parse_error(1, "missing header row")),
    };
    if header.len() < 2 || &header[0] != "item" || &header[1] != "rating" {
        return Err(parse_error(1, "header must start with `item,rating`"));
    }
    let mut out = BTreeMap::new();
    for row in rows {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() < 2 {
            return Err(parse_error(line, "expected at least 2 columns"));
        }
        let item = &row[0];
        if item.is_empty() {
            return Err(parse_error(line, "empty item identifier"));
        }
        let rating: f64 = row[1]
            .parse()
            .ok()
            .filter(|r: &f64| r.is_finite())
            .ok_or_else(|| {
                parse_error(line, format!("rating {:?} is not a finite number", &row[1]))
            })?;
        if out.insert(item.to_owned(), rating).is_some() {
            return Err(parse_error(line, format!("duplicate item {item:?}")));
        }
    }
    Ok(out)
}

/// A simulated dataset together with the world that produced it.
#[derive(Debug, Clone)]
pub struct SimulatedDataset {
    pub dataset: ComparisonDataset,
    pub items: ItemPopulation,
    pub raters: RaterPopulation,
}

impl SimulatedDataset {
    /// Name of item `i`; zero-padded so lexicographic order is index order.
    pub fn item_name(i: usize) -> String {
        format!("item{i:06}")
    }

    pub fn rater_name(r: usize) -> String {
        format!("rater{r:05}")
    }

    /// Samples a world from `params` and has its raters judge `count` random
    /// pairs.
    pub fn generate(
        params: &SimParams,
        count: usize,
        assignment: RaterAssignment,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        let node = SeedNode::new(seed).child(Stream::Dataset, 0);
        let items = ItemPopulation::sample(params, node.child(Stream::Items, 0));
        let raters = RaterPopulation::sample(params, node.child(Stream::Raters, 0))?;
        let comparisons = {
            let mut panel = Panel::new(params, &items, &raters);
            simulate_comparisons_with(&mut panel, count, assignment, node.child(Stream::Pairs, 0))?
        };
        let records = comparisons
            .iter()
            .map(|c| {
                MatchRecord::new(
                    Self::item_name(c.item_a),
                    Self::item_name(c.item_b),
                    c.score_a,
                )
                .with_rater(Self::rater_name(c.rater))
            })
            .collect();
        let dataset = ComparisonDataset::with_universe(
            records,
            (0..params.n_items).map(Self::item_name),
            Provenance::Simulated,
        )?;
        Ok(SimulatedDataset {
            dataset,
            items,
            raters,
        })
    }

    /// Items whose true rating lies strictly above the median true rating.
    pub fn median_truth(&self) -> BTreeMap<String, Label> {
        let labels = crate::elo::median_labels(&self.items.true_ratings);
        labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| (Self::item_name(i), l))
            .collect()
    }
}
