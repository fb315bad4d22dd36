//! Evaluation arithmetic: weighted kappa, format-error rate, span F1,
//! slot accuracy and perplexity.

mod kappa;
mod perplexity;
mod spans;

pub use kappa::{build_confusion, weighted_kappa, ConfusionMatrix, KappaResult, WeightMatrix};
pub use perplexity::{load_nll_file, perplexity, NllRecord, PerplexityResult};
pub use spans::{greedy_match_count, normalize_mention, span_f1, spans_match, MatchMode, MatchScore};

use crate::error::{Error, Result};
use crate::parse::ParseOutcome;
use crate::schema::{AspectSchema, MasaRecord, SentimentLabel};

/// Fraction of outcomes whose strict parse failed.
pub fn format_error_rate(outcomes: &[ParseOutcome]) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(Error::validation("no outcomes to rate"));
    }
    let errors = outcomes.iter().filter(|o| o.format_error).count();
    Ok(errors as f64 / outcomes.len() as f64)
}

/// Fraction of (record, aspect) slots predicted exactly right.
pub fn slot_accuracy(
    gold: &[MasaRecord],
    outcomes: &[(String, ParseOutcome)],
    schema: &AspectSchema,
) -> Result<f64> {
    if gold.len() != outcomes.len() {
        return Err(Error::validation(format!(
            "gold has {} records but outcomes has {}",
            gold.len(),
            outcomes.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::validation("no records to score"));
    }
    let mut correct = 0usize;
    let mut total = 0usize;
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
            total += 1;
            if predicted == gold_label {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{ParseOutcome, Predictions};
    use indexmap::IndexMap;

    fn outcome(format_error: bool) -> ParseOutcome {
        ParseOutcome {
            predictions: Predictions::Masa {
                labels: IndexMap::new(),
            },
            format_error,
            repairs: Vec::new(),
            residue: String::new(),
        }
    }

    #[test]
    fn error_rate_is_the_indicator_mean() {
        let clean: Vec<ParseOutcome> = (0..4).map(|_| outcome(false)).collect();
        assert_eq!(format_error_rate(&clean).unwrap(), 0.0);
        let one_of_four = vec![outcome(true), outcome(false), outcome(false), outcome(false)];
        assert_eq!(format_error_rate(&one_of_four).unwrap(), 0.25);
        let broken: Vec<ParseOutcome> = (0..3).map(|_| outcome(true)).collect();
        assert_eq!(format_error_rate(&broken).unwrap(), 1.0);
        assert!(format_error_rate(&[]).is_err());
    }

    #[test]
    fn slot_accuracy_counts_exact_slots() {
        let schema = AspectSchema::new("t", vec!["food".into(), "price".into()]);
        let mut labels = IndexMap::new();
        labels.insert("food".to_string(), SentimentLabel::Positive);
        labels.insert("price".to_string(), SentimentLabel::Negative);
        let gold = vec![MasaRecord {
            id: "r1".into(),
            text: String::new(),
            labels: labels.clone(),
            rationales: None,
        }];
        let mut predicted = labels.clone();
        let all_right = vec![(
            "r1".to_string(),
            ParseOutcome {
                predictions: Predictions::Masa {
                    labels: predicted.clone(),
                },
                format_error: false,
                repairs: Vec::new(),
                residue: String::new(),
            },
        )];
        assert_eq!(slot_accuracy(&gold, &all_right, &schema).unwrap(), 1.0);

        predicted.insert("price".to_string(), SentimentLabel::Positive);
        let half_right = vec![(
            "r1".to_string(),
            ParseOutcome {
                predictions: Predictions::Masa {
                    labels: predicted.clone(),
                },
                format_error: false,
                repairs: Vec::new(),
                residue: String::new(),
            },
        )];
        assert_eq!(slot_accuracy(&gold, &half_right, &schema).unwrap(), 0.5);

        predicted.insert("food".to_string(), SentimentLabel::Unmentioned);
        let all_wrong = vec![(
            "r1".to_string(),
            ParseOutcome {
                predictions: Predictions::Masa { labels: predicted },
                format_error: false,
                repairs: Vec::new(),
                residue: String::new(),
            },
        )];
        assert_eq!(slot_accuracy(&gold, &all_wrong, &schema).unwrap(), 0.0);
    }
}
