//! Seeded synthetic corpus generator.
//!
//! Produces schema-compatible review records whose per-aspect label
//! frequencies follow a target distribution. Review text and rationales are
//! assembled from fixed English sentence banks, so generation is a pure
//! function of (schema, distribution, n, seed) and reasoning designs always
//! have rationale text to work with.

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::schema::{AspectSchema, LabelDistribution, MasaRecord, SentimentLabel};

const POSITIVE_SENTENCES: &[&str] = &[
    "The {aspect} was excellent.",
    "We really enjoyed the {aspect}.",
    "Top marks for the {aspect}.",
    "The {aspect} exceeded our expectations.",
];

const NEUTRAL_SENTENCES: &[&str] = &[
    "The {aspect} was acceptable.",
    "The {aspect} was nothing special.",
    "No strong feelings about the {aspect}.",
];

const NEGATIVE_SENTENCES: &[&str] = &[
    "The {aspect} was disappointing.",
    "We had real problems with the {aspect}.",
    "The {aspect} needs serious improvement.",
];

// Rationale text is embedded into rendered responses by reasoning designs,
// so the bank avoids '.', '|' and newlines.
const POSITIVE_RATIONALES: &[&str] = &[
    "the reviewer praises the {aspect}",
    "the review speaks highly of the {aspect}",
    "approving wording is used about the {aspect}",
];

const NEUTRAL_RATIONALES: &[&str] = &[
    "the reviewer is lukewarm about the {aspect}",
    "the {aspect} is described without enthusiasm",
];

const NEGATIVE_RATIONALES: &[&str] = &[
    "the reviewer complains about the {aspect}",
    "the review criticizes the {aspect}",
];

const NO_MENTION_TEXT: &str = "An ordinary visit with nothing in particular to report.";

/// Generate `n` records whose empirical label frequencies converge to `dist`.
/// Deterministic: the same arguments always produce identical records.
pub fn generate_fixture_corpus(
    schema: &AspectSchema,
    dist: &LabelDistribution,
    n: usize,
    seed: u64,
) -> Result<Vec<MasaRecord>> {
    if n == 0 {
        return Err(Error::validation("fixture corpus size must be at least 1"));
    }
    schema.validate()?;
    dist.validate(schema)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = id_width(n);
    let mut records = Vec::with_capacity(n);
    for i in 1..=n {
        let mut labels = IndexMap::new();
        let mut sentences = Vec::new();
        let mut rationales = IndexMap::new();
        for aspect in &schema.aspects {
            let label = sample_label(&mut rng, dist, aspect);
            labels.insert(aspect.clone(), label);
            if label != SentimentLabel::Unmentioned {
                let sentence = pick(&mut rng, sentence_bank(label));
                sentences.push(fill(sentence, aspect));
                let rationale = pick(&mut rng, rationale_bank(label));
                rationales.insert(aspect.clone(), fill(rationale, aspect));
            }
        }
        let text = if sentences.is_empty() {
            NO_MENTION_TEXT.to_string()
        } else {
            sentences.join(" ")
        };
        records.push(MasaRecord {
            id: format!("{}-{:0width$}", schema.task_id, i),
            text,
            labels,
            rationales: Some(rationales),
        });
    }
    Ok(records)
}

fn id_width(n: usize) -> usize {
    std::cmp::max(5, n.to_string().len())
}

fn sample_label(rng: &mut ChaCha8Rng, dist: &LabelDistribution, aspect: &str) -> SentimentLabel {
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    for label in SentimentLabel::ALL {
        acc += dist.fraction(aspect, label);
        if draw < acc {
            return label;
        }
    }
    // Fractions sum to 1 within tolerance; land rounding residue here.
    SentimentLabel::Unmentioned
}

fn sentence_bank(label: SentimentLabel) -> &'static [&'static str] {
    match label {
        SentimentLabel::Positive => POSITIVE_SENTENCES,
        SentimentLabel::Neutral => NEUTRAL_SENTENCES,
        SentimentLabel::Negative => NEGATIVE_SENTENCES,
        SentimentLabel::Unmentioned => &[],
    }
}

fn rationale_bank(label: SentimentLabel) -> &'static [&'static str] {
    match label {
        SentimentLabel::Positive => POSITIVE_RATIONALES,
        SentimentLabel::Neutral => NEUTRAL_RATIONALES,
        SentimentLabel::Negative => NEGATIVE_RATIONALES,
        SentimentLabel::Unmentioned => &[],
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, bank: &[&'a str]) -> &'a str {
    bank[rng.gen_range(0..bank.len())]
}

fn fill(template: &str, aspect: &str) -> String {
    template.replace("{aspect}", aspect)
}
