//! Render/parse roundtrip properties over the full strategy space.

use indexmap::IndexMap;
use proptest::prelude::*;

use sde_core::{
    enumerate_strategies, generate_fixture_corpus, parse_output, preset, render_response,
    AspectSchema, LabelDistribution, MasaRecord, Reasoning, SentimentLabel, SpanAnnotation,
    SpanRecord, TaskKind, TaskRecord,
};

fn d1_schema() -> AspectSchema {
    AspectSchema::new(
        "d1",
        vec![
            "food".into(),
            "beverage".into(),
            "price".into(),
            "hygiene".into(),
            "staff attitude".into(),
            "parking convenience".into(),
        ],
    )
}

fn uniformish_dist(schema: &AspectSchema) -> LabelDistribution {
    let mut per_aspect = IndexMap::new();
    for aspect in &schema.aspects {
        let mut d = IndexMap::new();
        d.insert(SentimentLabel::Positive, 0.3);
        d.insert(SentimentLabel::Neutral, 0.2);
        d.insert(SentimentLabel::Negative, 0.2);
        d.insert(SentimentLabel::Unmentioned, 0.3);
        per_aspect.insert(aspect.clone(), d);
    }
    LabelDistribution { per_aspect }
}

fn assert_roundtrip(record: &MasaRecord, schema: &AspectSchema, strategy: &sde_core::DesignStrategy) {
    let response = render_response(&TaskRecord::Masa(record.clone()), schema, strategy)
        .unwrap_or_else(|e| panic!("render failed for {strategy}: {e}"));
    let outcome = parse_output(&response, strategy, schema, TaskKind::Masa);
    assert!(
        !outcome.format_error,
        "strict parse failed for {strategy}\nresponse:\n{response}\nresidue: {}",
        outcome.residue
    );
    assert!(
        outcome.repairs.is_empty(),
        "repairs {:?} for {strategy}\nresponse:\n{response}",
        outcome.repairs
    );
    let labels = outcome.masa_labels().unwrap();
    for (aspect, gold) in &record.labels {
        assert_eq!(
            labels.get(aspect),
            Some(gold),
            "label mismatch on '{aspect}' for {strategy}\nresponse:\n{response}"
        );
    }
}

#[test]
fn every_strategy_roundtrips_on_fixture_records() {
    let schema = d1_schema();
    let dist = uniformish_dist(&schema);
    let records = generate_fixture_corpus(&schema, &dist, 25, 99).unwrap();
    for strategy in enumerate_strategies() {
        for record in &records {
            assert_roundtrip(record, &schema, &strategy);
        }
    }
}

#[test]
fn heuristic_lines_of_list_roundtrips() {
    let schema = d1_schema();
    let dist = uniformish_dist(&schema);
    let records = generate_fixture_corpus(&schema, &dist, 50, 5).unwrap();
    let mut flavors = vec![preset("Heuristic").unwrap()];
    let mut pu = flavors[0];
    pu.unmentioned = sde_core::UnmentionedHandling::Pu;
    flavors.push(pu);
    let mut num = flavors[0];
    num.label_style = sde_core::LabelStyle::Num;
    flavors.push(num);
    for strategy in flavors {
        for record in &records {
            assert_roundtrip(record, &schema, &strategy);
        }
    }
}

#[test]
fn all_unmentioned_record_roundtrips_under_ou() {
    let schema = d1_schema();
    let mut labels = IndexMap::new();
    for aspect in &schema.aspects {
        labels.insert(aspect.clone(), SentimentLabel::Unmentioned);
    }
    let record = MasaRecord {
        id: "empty".into(),
        text: "Nothing specific.".into(),
        labels,
        rationales: Some(IndexMap::new()),
    };
    for strategy in enumerate_strategies() {
        assert_roundtrip(&record, &schema, &strategy);
    }
}

#[test]
fn span_records_roundtrip_under_every_no_cot_strategy() {
    let schema = AspectSchema::new(
        "genia",
        vec![
            "Protein".into(),
            "DNA".into(),
            "RNA".into(),
            "cell_line".into(),
            "cell_type".into(),
        ],
    );
    let records = vec![
        SpanRecord {
            id: "s1".into(),
            text: "IL-2 gene expression and NF-kappa B activation".into(),
            spans: vec![
                SpanAnnotation {
                    type_name: "Protein".into(),
                    mention: "IL-2".into(),
                    start: None,
                    end: None,
                },
                SpanAnnotation {
                    type_name: "Protein".into(),
                    mention: "NF-kappa B".into(),
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
        },
        SpanRecord {
            id: "s2".into(),
            text: "no entities here".into(),
            spans: vec![],
        },
    ];
    for strategy in enumerate_strategies()
        .into_iter()
        .filter(|s| s.reasoning == Reasoning::NoCot)
    {
        for record in &records {
            let response =
                render_response(&TaskRecord::Span(record.clone()), &schema, &strategy).unwrap();
            let outcome = parse_output(&response, &strategy, &schema, TaskKind::Span);
            assert!(
                !outcome.format_error,
                "strict span parse failed for {strategy}\nresponse:\n{response}\nresidue: {}",
                outcome.residue
            );
            assert!(outcome.repairs.is_empty(), "{strategy}: {:?}", outcome.repairs);
            let parsed: Vec<(String, String)> = outcome
                .spans()
                .unwrap()
                .iter()
                .map(|s| (s.type_name.clone(), s.mention.clone()))
                .collect();
            let mut expected: Vec<(String, String)> = Vec::new();
            for type_name in &schema.aspects {
                for m in record.mentions_of(type_name) {
                    expected.push((type_name.clone(), m.to_string()));
                }
            }
            assert_eq!(parsed, expected, "{strategy}\nresponse:\n{response}");
        }
    }
}

#[test]
fn parsed_predictions_rerender_idempotently() {
    let schema = d1_schema();
    let dist = uniformish_dist(&schema);
    let records = generate_fixture_corpus(&schema, &dist, 10, 123).unwrap();
    for strategy in enumerate_strategies() {
        for record in &records {
            let response =
                render_response(&TaskRecord::Masa(record.clone()), &schema, &strategy).unwrap();
            let outcome = parse_output(&response, &strategy, &schema, TaskKind::Masa);
            let labels = outcome.masa_labels().unwrap().clone();
            // Canonical re-rendering of the recovered predictions.
            let mut rationales = IndexMap::new();
            for (aspect, label) in &labels {
                if *label != SentimentLabel::Unmentioned {
                    rationales.insert(aspect.clone(), format!("the review discusses the {aspect}"));
                }
            }
            let echo = MasaRecord {
                id: record.id.clone(),
                text: record.text.clone(),
                labels: labels.clone(),
                rationales: Some(rationales),
            };
            let response2 =
                render_response(&TaskRecord::Masa(echo), &schema, &strategy).unwrap();
            let outcome2 = parse_output(&response2, &strategy, &schema, TaskKind::Masa);
            assert_eq!(outcome2.masa_labels().unwrap(), &labels, "{strategy}");
        }
    }
}

#[test]
fn corrupting_one_line_preserves_the_others() {
    let schema = d1_schema();
    let dist = uniformish_dist(&schema);
    let records = generate_fixture_corpus(&schema, &dist, 10, 7).unwrap();
    let strategy = preset("ES-SDE").unwrap();
    for record in &records {
        let response =
            render_response(&TaskRecord::Masa(record.clone()), &schema, &strategy).unwrap();
        let mut lines: Vec<String> = response.lines().map(str::to_string).collect();
        lines[0] = "completely broken line".to_string();
        let corrupted = lines.join("\n");
        let outcome = parse_output(&corrupted, &strategy, &schema, TaskKind::Masa);
        assert!(outcome.format_error);
        let labels = outcome.masa_labels().unwrap();
        for (aspect, gold) in record.labels.iter().skip(1) {
            assert_eq!(labels.get(aspect), Some(gold), "aspect '{aspect}' lost");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_record_strategy_pairs_roundtrip(
        strategy_idx in 0usize..216,
        seed in 0u64..1000,
    ) {
        let schema = d1_schema();
        let dist = uniformish_dist(&schema);
        let records = generate_fixture_corpus(&schema, &dist, 1, seed).unwrap();
        let strategy = enumerate_strategies()[strategy_idx];
        assert_roundtrip(&records[0], &schema, &strategy);
    }
}
