//! Deterministic rendering of records into prompt/response training samples
//! and zero-shot / in-context evaluation prompts.

use serde::{Deserialize, Serialize};

use crate::designspace::{DesignStrategy, InputModeling, OutputFormat, Placement, Reasoning, UnmentionedHandling};
use crate::error::{Error, Result};
use crate::grammar;
use crate::schema::{AspectSchema, MasaRecord, SentimentLabel, SpanRecord, TaskRecord};
use crate::template::PromptTemplate;

/// One rendered prompt/response pair. `train_on_input` tells the trainer
/// whether prompt tokens contribute to the loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub id: String,
    pub prompt: String,
    pub response: String,
    pub train_on_input: bool,
    pub strategy: DesignStrategy,
    pub instruction_variant: usize,
}

/// Render one record under a strategy. Deterministic and byte-stable.
pub fn render_sample(
    record: &TaskRecord,
    schema: &AspectSchema,
    strategy: &DesignStrategy,
    template: &PromptTemplate,
    variant: usize,
) -> Result<TrainingSample> {
    let prompt = build_prompt(record, schema, strategy, template, variant)?;
    let response = render_response(record, schema, strategy)?;
    Ok(TrainingSample {
        id: record.id().to_string(),
        prompt,
        response,
        train_on_input: strategy.input_modeling == InputModeling::Mi,
        strategy: *strategy,
        instruction_variant: variant,
    })
}

/// Order-preserving map of [`render_sample`]; fails fast naming the record.
pub fn render_corpus(
    records: &[TaskRecord],
    schema: &AspectSchema,
    strategy: &DesignStrategy,
    template: &PromptTemplate,
    variant: usize,
) -> Result<Vec<TrainingSample>> {
    records
        .iter()
        .map(|record| {
            render_sample(record, schema, strategy, template, variant)
                .map_err(|e| with_record_context(record.id(), e))
        })
        .collect()
}

/// Prefix an error with the record id unless the message already names it.
pub(crate) fn with_record_context(id: &str, err: Error) -> Error {
    let message = err.to_string();
    if message.contains(id) {
        err
    } else {
        Error::validation(format!("record {id}: {message}"))
    }
}

/// Build an evaluation prompt: zero-shot when `exemplars` is empty, otherwise
/// each exemplar's prompt and response joined in blocks before the test prompt.
pub fn render_eval_prompt(
    record: &TaskRecord,
    schema: &AspectSchema,
    strategy: &DesignStrategy,
    template: &PromptTemplate,
    exemplars: &[TaskRecord],
    variant: usize,
) -> Result<String> {
    let test_prompt = build_prompt(record, schema, strategy, template, variant)?;
    if exemplars.is_empty() {
        return Ok(test_prompt);
    }
    let mut blocks = Vec::with_capacity(exemplars.len() + 1);
    for exemplar in exemplars {
        let sample = render_sample(exemplar, schema, strategy, template, variant)
            .map_err(|e| Error::validation(format!("exemplar {}: {e}", exemplar.id())))?;
        blocks.push(format!("{}\n\n{}", sample.prompt, sample.response));
    }
    blocks.push(test_prompt);
    Ok(blocks.join("\n\n"))
}

/// Assemble the prompt according to the placement rule.
fn build_prompt(
    record: &TaskRecord,
    schema: &AspectSchema,
    strategy: &DesignStrategy,
    template: &PromptTemplate,
    variant: usize,
) -> Result<String> {
    if variant >= template.instruction_variants.len() {
        return Err(Error::validation(format!(
            "instruction variant {variant} out of range (template has {})",
            template.instruction_variants.len()
        )));
    }
    let body = format!("{} {}", template.text_preamble, record.text());
    Ok(match strategy.placement {
        Placement::InstFirst => {
            let instruction = template.instruction(schema, strategy, variant)?;
            format!("{instruction}\n\n{body}")
        }
        Placement::InstLast => {
            let instruction = template.instruction(schema, strategy, variant)?;
            format!("{body}\n\n{instruction}")
        }
        Placement::NoInst => body,
    })
}

/// Render only the response text for a record.
pub fn render_response(
    record: &TaskRecord,
    schema: &AspectSchema,
    strategy: &DesignStrategy,
) -> Result<String> {
    match record {
        TaskRecord::Masa(r) => render_masa_response(r, schema, strategy),
        TaskRecord::Span(r) => render_span_response(r, schema, strategy),
    }
}

fn render_masa_response(
    record: &MasaRecord,
    schema: &AspectSchema,
    strategy: &DesignStrategy,
) -> Result<String> {
    let as_list = grammar::lines_as_list(strategy);
    let mut rows = Vec::with_capacity(schema.aspects.len());
    for aspect in &schema.aspects {
        let Some(label) = record.label(aspect) else {
            return Err(Error::validation(format!(
                "record {} missing aspect '{aspect}'",
                record.id
            )));
        };
        if strategy.unmentioned == UnmentionedHandling::Ou && label == SentimentLabel::Unmentioned {
            continue;
        }
        let description = description_for(record, aspect, label, strategy)?;
        let token = grammar::label_token(schema, strategy.label_style, label);
        let row = match strategy.output_format {
            OutputFormat::Lines => {
                let slot_token = if as_list && label == SentimentLabel::Unmentioned {
                    String::new()
                } else {
                    token
                };
                let value = grammar::masa_line_value(
                    &slot_token,
                    description.as_deref(),
                    strategy.reasoning,
                    as_list,
                );
                grammar::masa_line(aspect, &value)
            }
            OutputFormat::Natural => {
                if label == SentimentLabel::Unmentioned {
                    grammar::natural_unmentioned(aspect)
                } else {
                    grammar::natural_mentioned(
                        aspect,
                        &token,
                        description.as_deref(),
                        strategy.reasoning,
                    )
                }
            }
            OutputFormat::Json => {
                grammar::json_masa_line(aspect, &token, description.as_deref(), strategy.reasoning)
            }
        };
        rows.push(row);
    }
    if rows.is_empty() {
        return Ok(grammar::EMPTY_OUTPUT.to_string());
    }
    Ok(rows.join(grammar::row_separator(strategy.output_format)))
}

/// Description text to embed for an aspect, or an error when the reasoning
/// design needs a rationale the record does not have.
fn description_for(
    record: &MasaRecord,
    aspect: &str,
    label: SentimentLabel,
    strategy: &DesignStrategy,
) -> Result<Option<String>> {
    if strategy.reasoning == Reasoning::NoCot {
        return Ok(None);
    }
    if label == SentimentLabel::Unmentioned {
        return Ok(Some(grammar::UNMENTIONED_DESCRIPTION.to_string()));
    }
    match record.rationale(aspect) {
        Some(text) => Ok(Some(grammar::sanitize_description(
            text,
            strategy.output_format,
        ))),
        None => Err(Error::validation(format!(
            "record {}: reasoning design requires a rationale for aspect '{aspect}'",
            record.id
        ))),
    }
}

fn render_span_response(
    record: &SpanRecord,
    schema: &AspectSchema,
    strategy: &DesignStrategy,
) -> Result<String> {
    if strategy.reasoning != Reasoning::NoCot {
        return Err(Error::validation(format!(
            "record {}: reasoning designs require rationale-bearing records, \
             span records have none",
            record.id
        )));
    }
    let as_list = grammar::lines_as_list(strategy);
    let mut rows = Vec::with_capacity(schema.aspects.len());
    for type_name in &schema.aspects {
        let mentions: Vec<String> = record
            .mentions_of(type_name)
            .into_iter()
            .map(|m| grammar::sanitize_mention(m, strategy.output_format, as_list))
            .collect();
        if strategy.unmentioned == UnmentionedHandling::Ou && mentions.is_empty() {
            continue;
        }
        let row = match strategy.output_format {
            OutputFormat::Lines => grammar::span_line(type_name, &mentions, as_list),
            OutputFormat::Natural => grammar::span_natural(type_name, &mentions),
            OutputFormat::Json => grammar::json_span_line(type_name, &mentions),
        };
        rows.push(row);
    }
    if rows.is_empty() {
        return Ok(grammar::EMPTY_OUTPUT.to_string());
    }
    Ok(rows.join(grammar::row_separator(strategy.output_format)))
}
