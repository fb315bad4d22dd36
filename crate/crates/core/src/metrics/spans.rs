//! Span-level precision/recall/F1 under hard (exact) and soft (containment)
//! mention matching.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::SpanRecord;

/// Exact vs containment mention matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    Hard,
    Soft,
}

impl std::str::FromStr for MatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<MatchMode> {
        match s.to_ascii_lowercase().as_str() {
            "hard" => Ok(MatchMode::Hard),
            "soft" => Ok(MatchMode::Soft),
            other => Err(Error::validation(format!(
                "unknown match mode '{other}' (hard|soft)"
            ))),
        }
    }
}

/// Micro-averaged match score over a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchScore {
    pub mode: MatchMode,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl MatchScore {
    fn from_counts(mode: MatchMode, tp: u64, fp: u64, fn_: u64) -> MatchScore {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        MatchScore {
            mode,
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Mention comparison: case-fold plus whitespace collapse.
pub fn normalize_mention(mention: &str) -> String {
    mention
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Whether a gold and predicted span match under the mode. Both require
/// type equality; soft additionally accepts one normalized mention
/// containing the other.
pub fn spans_match(
    gold: &(String, String),
    predicted: &(String, String),
    mode: MatchMode,
) -> bool {
    if !gold.0.eq_ignore_ascii_case(&predicted.0) {
        return false;
    }
    let g = normalize_mention(&gold.1);
    let p = normalize_mention(&predicted.1);
    match mode {
        MatchMode::Hard => g == p,
        MatchMode::Soft => g.contains(&p) || p.contains(&g),
    }
}

/// Greedy one-to-one assignment in gold order for one record; returns the
/// number of matched pairs. Each gold span takes the best untaken candidate:
/// exact normalized equality first, then the containment partner with the
/// smallest length gap.
pub fn greedy_match_count(
    gold: &[(String, String)],
    predicted: &[(String, String)],
    mode: MatchMode,
) -> u64 {
    let mut taken = vec![false; predicted.len()];
    let mut matched = 0u64;
    for g in gold {
        let mut best: Option<(usize, u64)> = None;
        for (j, p) in predicted.iter().enumerate() {
            if taken[j] || !spans_match(g, p, mode) {
                continue;
            }
            let gn = normalize_mention(&g.1);
            let pn = normalize_mention(&p.1);
            // Rank: exact match beats containment; closer lengths beat
            // looser containment.
            let cost = if gn == pn {
                0
            } else {
                1 + gn.len().abs_diff(pn.len()) as u64
            };
            if best.is_none_or(|(_, c)| cost < c) {
                best = Some((j, cost));
            }
        }
        if let Some((j, _)) = best {
            taken[j] = true;
            matched += 1;
        }
    }
    matched
}

/// Micro-averaged span F1 over aligned gold records and predictions.
pub fn span_f1(
    gold: &[SpanRecord],
    predictions: &[(String, Vec<(String, String)>)],
    mode: MatchMode,
) -> Result<MatchScore> {
    if gold.len() != predictions.len() {
        return Err(Error::validation(format!(
            "gold has {} records but predictions has {}",
            gold.len(),
            predictions.len()
        )));
    }
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    for (record, (id, predicted)) in gold.iter().zip(predictions) {
        if record.id != *id {
            return Err(Error::validation(format!(
                "id mismatch: gold '{}' vs prediction '{id}'",
                record.id
            )));
        }
        let gold_spans: Vec<(String, String)> = record
            .spans
            .iter()
            .map(|s| (s.type_name.clone(), s.mention.clone()))
            .collect();
        let matched = greedy_match_count(&gold_spans, predicted, mode);
        tp += matched;
        fp += predicted.len() as u64 - matched;
        fn_ += gold_spans.len() as u64 - matched;
    }
    Ok(MatchScore::from_counts(mode, tp, fp, fn_))
}
