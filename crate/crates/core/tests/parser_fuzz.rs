//! Corruption fuzzing: whatever bytes come back from a model, parsing must
//! never panic, must keep sentiment predictions total over the schema, and
//! must keep the format-error flag consistent with the roundtrip guarantee.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sde_core::{
    enumerate_strategies, generate_fixture_corpus, parse_output, render_response, AspectSchema,
    LabelDistribution, SentimentLabel, TaskKind, TaskRecord,
};

fn schema() -> AspectSchema {
    AspectSchema::new(
        "d1",
        vec![
            "food".into(),
            "price".into(),
            "staff attitude".into(),
        ],
    )
}

fn dist() -> LabelDistribution {
    let mut per_aspect = indexmap::IndexMap::new();
    for aspect in &schema().aspects {
        let mut d = indexmap::IndexMap::new();
        d.insert(SentimentLabel::Positive, 0.35);
        d.insert(SentimentLabel::Neutral, 0.15);
        d.insert(SentimentLabel::Negative, 0.2);
        d.insert(SentimentLabel::Unmentioned, 0.3);
        per_aspect.insert(aspect.clone(), d);
    }
    LabelDistribution { per_aspect }
}

/// Characters deliberately including multi-byte punctuation the normalizer
/// maps, plus ordinary noise.
const NOISE: &[char] = &[
    '：', '，', '。', '｜', '“', '”', '　', 'é', 'ß', '中', '🙂', '|', '[', ']', '{', '}', '"',
    '\'', ':', '\n', '\t', ' ', '.', ',', 'x',
];

fn mutate(text: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    for _ in 0..rng.gen_range(1..6) {
        match rng.gen_range(0..3) {
            0 if !chars.is_empty() => {
                let at = rng.gen_range(0..chars.len());
                chars.remove(at);
            }
            1 => {
                let at = rng.gen_range(0..=chars.len());
                chars.insert(at, NOISE[rng.gen_range(0..NOISE.len())]);
            }
            _ if !chars.is_empty() => {
                let at = rng.gen_range(0..chars.len());
                chars[at] = NOISE[rng.gen_range(0..NOISE.len())];
            }
            _ => {}
        }
    }
    chars.into_iter().collect()
}

#[test]
fn mutated_outputs_never_panic_and_stay_total() {
    let schema = schema();
    let records = generate_fixture_corpus(&schema, &dist(), 30, 21).unwrap();
    let strategies = enumerate_strategies();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for round in 0..4000 {
        let record = &records[rng.gen_range(0..records.len())];
        let strategy = &strategies[rng.gen_range(0..strategies.len())];
        let clean =
            render_response(&TaskRecord::Masa(record.clone()), &schema, strategy).unwrap();
        let corrupted = mutate(&clean, &mut rng);
        let outcome = parse_output(&corrupted, strategy, &schema, TaskKind::Masa);
        let labels = outcome.masa_labels().unwrap();
        assert_eq!(
            labels.len(),
            schema.aspects.len(),
            "round {round}: predictions not total for {strategy} on:\n{corrupted}"
        );
        for aspect in &schema.aspects {
            assert!(labels.contains_key(aspect), "round {round}: missing '{aspect}'");
        }
    }
}

#[test]
fn mutated_span_outputs_never_panic() {
    use sde_core::{Reasoning, SpanAnnotation, SpanRecord};
    let schema = AspectSchema::new("g", vec!["Protein".into(), "DNA".into()]);
    let record = TaskRecord::Span(SpanRecord {
        id: "s".into(),
        text: "IL-2 and the IL-2 gene".into(),
        spans: vec![
            SpanAnnotation {
                type_name: "Protein".into(),
                mention: "IL-2".into(),
                start: None,
                end: None,
            },
            SpanAnnotation {
                type_name: "DNA".into(),
                mention: "IL-2 gene".into(),
                start: None,
                end: None,
            },
        ],
    });
    let strategies: Vec<_> = enumerate_strategies()
        .into_iter()
        .filter(|s| s.reasoning == Reasoning::NoCot)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..2000 {
        let strategy = &strategies[rng.gen_range(0..strategies.len())];
        let clean = render_response(&record, &schema, strategy).unwrap();
        let corrupted = mutate(&clean, &mut rng);
        let outcome = parse_output(&corrupted, strategy, &schema, TaskKind::Span);
        assert!(outcome.spans().is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn arbitrary_unicode_never_panics(text in "\\PC*", strategy_idx in 0usize..216) {
        let schema = schema();
        let strategy = enumerate_strategies()[strategy_idx];
        let outcome = parse_output(&text, &strategy, &schema, TaskKind::Masa);
        prop_assert!(outcome.masa_labels().unwrap().len() == schema.aspects.len());
        let span_outcome = parse_output(&text, &strategy, &schema, TaskKind::Span);
        prop_assert!(span_outcome.spans().is_some());
    }
}
