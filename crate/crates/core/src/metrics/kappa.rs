//! Weighted agreement: confusion matrices, the weight matrix and weighted
//! kappa.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parse::ParseOutcome;
use crate::schema::{AspectSchema, MasaRecord, SentimentLabel};

/// 4x4 agreement weights; rows gold, columns predicted, both in
/// positive/neutral/negative/unmentioned order. Diagonal entries are 1 and
/// off-diagonal entries grade the severity of each confusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix(pub [[f64; 4]; 4]);

impl Default for WeightMatrix {
    /// Default weights: confusing positive with negative costs everything,
    /// neighbouring confusions cost less.
    fn default() -> WeightMatrix {
        WeightMatrix([
            [1.0, 1.0 / 2.0, 0.0, 1.0 / 2.0],
            [2.0 / 3.0, 1.0, 2.0 / 3.0, 2.0 / 3.0],
            [0.0, 1.0 / 2.0, 1.0, 1.0 / 2.0],
            [1.0 / 2.0, 2.0 / 3.0, 1.0 / 2.0, 1.0],
        ])
    }
}

impl WeightMatrix {
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.0.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::validation(format!(
                        "weight w[{i}][{j}] = {w} outside [0, 1]"
                    )));
                }
            }
            if self.0[i][i] != 1.0 {
                return Err(Error::validation(format!(
                    "diagonal weight w[{i}][{i}] must be 1"
                )));
            }
        }
        Ok(())
    }
}

/// 4x4 label confusion counts; rows gold, columns predicted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 4]; 4],
}

impl ConfusionMatrix {
    pub fn add(&mut self, gold: SentimentLabel, predicted: SentimentLabel) {
        self.counts[gold.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_totals(&self) -> [u64; 4] {
        let mut out = [0u64; 4];
        for (i, row) in self.counts.iter().enumerate() {
            out[i] = row.iter().sum();
        }
        out
    }

    pub fn col_totals(&self) -> [u64; 4] {
        let mut out = [0u64; 4];
        for row in &self.counts {
            for (j, &c) in row.iter().enumerate() {
                out[j] += c;
            }
        }
        out
    }

    pub fn from_counts(counts: [[u64; 4]; 4]) -> ConfusionMatrix {
        ConfusionMatrix { counts }
    }
}

/// Observed and chance-expected weighted agreement, and their kappa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    pub po: f64,
    pub pe: f64,
    pub kappa: f64,
}

/// Weighted kappa: po = sum w_ij p_ij, pe = sum w_ij p_i. p_.j,
/// kappa = (po - pe) / (1 - pe).
///
/// Both sums run over the cells in identical order, so a confusion whose
/// joint distribution factorizes exactly (uniform counts, say) gives
/// bitwise-identical po and pe and therefore kappa of exactly zero.
pub fn weighted_kappa(conf: &ConfusionMatrix, weights: &WeightMatrix) -> Result<KappaResult> {
    weights.validate()?;
    let n = conf.total();
    if n == 0 {
        return Err(Error::validation("empty confusion matrix"));
    }
    let nf = n as f64;
    let rows = conf.row_totals();
    let cols = conf.col_totals();
    let mut po = 0.0;
    let mut pe = 0.0;
    for (i, &row_total) in rows.iter().enumerate() {
        for (j, &col_total) in cols.iter().enumerate() {
            let w = weights.0[i][j];
            po += w * (conf.counts[i][j] as f64 / nf);
            pe += w * ((row_total as f64 / nf) * (col_total as f64 / nf));
        }
    }
    if pe >= 1.0 {
        return Err(Error::validation(
            "degenerate marginals: chance agreement is certain",
        ));
    }
    let kappa = (po - pe) / (1.0 - pe);
    Ok(KappaResult { po, pe, kappa })
}

/// Accumulate confusions from gold records and parse outcomes aligned by id.
/// Returns the pooled matrix over every (record, aspect) slot plus one
/// matrix per aspect.
pub fn build_confusion(
    gold: &[MasaRecord],
    outcomes: &[(String, ParseOutcome)],
    schema: &AspectSchema,
) -> Result<(ConfusionMatrix, indexmap::IndexMap<String, ConfusionMatrix>)> {
    if gold.len() != outcomes.len() {
        return Err(Error::validation(format!(
            "gold has {} records but outcomes has {}",
            gold.len(),
            outcomes.len()
        )));
    }
    let mut pooled = ConfusionMatrix::default();
    let mut per_aspect: indexmap::IndexMap<String, ConfusionMatrix> = schema
        .aspects
        .iter()
        .map(|a| (a.clone(), ConfusionMatrix::default()))
        .collect();
    for (record, (id, outcome)) in gold.iter().zip(outcomes) {
        if record.id != *id {
            return Err(Error::validation(format!(
                "id mismatch: gold '{}' vs outcome '{id}'",
                record.id
            )));
        }
        let Some(labels) = outcome.masa_labels() else {
            return Err(Error::validation(format!(
                "outcome '{id}' carries span predictions, expected sentiment labels"
            )));
        };
        for aspect in &schema.aspects {
            let Some(gold_label) = record.label(aspect) else {
                return Err(Error::validation(format!(
                    "record {} missing aspect '{aspect}'",
                    record.id
                )));
            };
            let predicted = labels
                .get(aspect)
                .copied()
                .unwrap_or(SentimentLabel::Unmentioned);
            pooled.add(gold_label, predicted);
            per_aspect[aspect].add(gold_label, predicted);
        }
    }
    Ok((pooled, per_aspect))
}
