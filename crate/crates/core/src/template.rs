//! Instruction templates with variants and slots.
//!
//! A template carries k instruction formulations (variant 0 is the default),
//! the preamble that introduces the task text, and clause tables that adapt
//! the instruction to the output design. Slots:
//!
//! - `{aspect_list}`, `{format_clause}`, `{unmentioned_clause}` in variants
//! - `{label_legend}`, `{placeholder}` inside clauses

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::designspace::{DesignStrategy, LabelStyle, OutputFormat, UnmentionedHandling};
use crate::error::{Error, Result};
use crate::grammar;
use crate::schema::{AspectSchema, SentimentLabel, TaskKind};

const VARIANT_SLOTS: [&str; 3] = ["aspect_list", "format_clause", "unmentioned_clause"];
const CLAUSE_SLOTS: [&str; 2] = ["label_legend", "placeholder"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    /// Instruction formulations; the variant index selects one.
    pub instruction_variants: Vec<String>,
    /// Label introducing the task text, e.g. "Review:".
    pub text_preamble: String,
    /// (format, label style, unmentioned handling) -> format clause.
    /// Keys use compact segments, e.g. "lines/txt/pu".
    pub format_clauses: IndexMap<String, String>,
    /// (format, unmentioned handling) -> unmentioned clause, e.g. "lines/pu".
    pub unmentioned_clauses: IndexMap<String, String>,
}

impl PromptTemplate {
    /// Check that variants exist and reference only known slots.
    pub fn validate(&self) -> Result<()> {
        if self.instruction_variants.is_empty() {
            return Err(Error::validation("template has no instruction variants"));
        }
        for (i, variant) in self.instruction_variants.iter().enumerate() {
            for slot in referenced_slots(variant) {
                if !VARIANT_SLOTS.contains(&slot.as_str()) {
                    return Err(Error::validation(format!(
                        "instruction variant {i} references unknown slot '{{{slot}}}'"
                    )));
                }
            }
        }
        for (key, clause) in self.format_clauses.iter().chain(&self.unmentioned_clauses) {
            for slot in referenced_slots(clause) {
                if !CLAUSE_SLOTS.contains(&slot.as_str()) {
                    return Err(Error::validation(format!(
                        "clause '{key}' references unknown slot '{{{slot}}}'"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Render the instruction text for one strategy and variant.
    pub fn instruction(
        &self,
        schema: &AspectSchema,
        strategy: &DesignStrategy,
        variant: usize,
    ) -> Result<String> {
        let Some(text) = self.instruction_variants.get(variant) else {
            return Err(Error::validation(format!(
                "instruction variant {variant} out of range (template has {})",
                self.instruction_variants.len()
            )));
        };
        let format_key = clause_key(strategy);
        let Some(format_clause) = self.format_clauses.get(&format_key) else {
            return Err(Error::validation(format!(
                "template has no format clause for '{format_key}'"
            )));
        };
        let unmentioned_key = unmentioned_key(strategy);
        let Some(unmentioned_clause) = self.unmentioned_clauses.get(&unmentioned_key) else {
            return Err(Error::validation(format!(
                "template has no unmentioned clause for '{unmentioned_key}'"
            )));
        };
        let legend = label_legend(schema, strategy.label_style);
        let fill = |clause: &str| {
            clause
                .replace("{label_legend}", &legend)
                .replace("{placeholder}", &schema.placeholder_token)
        };
        Ok(text
            .replace("{aspect_list}", &schema.aspects.join(", "))
            .replace("{format_clause}", &fill(format_clause))
            .replace("{unmentioned_clause}", &fill(unmentioned_clause))
            .trim()
            .to_string())
    }

    pub fn load(path: &std::path::Path) -> Result<PromptTemplate> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let template: PromptTemplate = serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: invalid template: {e}", path.display())))?;
        template.validate()?;
        Ok(template)
    }

    /// Built-in template for the given task family.
    pub fn default_for(kind: TaskKind) -> PromptTemplate {
        match kind {
            TaskKind::Masa => default_masa_template(),
            TaskKind::Span => default_span_template(),
        }
    }
}

/// Key into the format-clause table: format/style/unmentioned.
pub fn clause_key(strategy: &DesignStrategy) -> String {
    format!(
        "{}/{}/{}",
        format_segment(strategy),
        match strategy.label_style {
            LabelStyle::Txt => "txt",
            LabelStyle::Num => "num",
        },
        unmentioned_segment(strategy.unmentioned),
    )
}

fn unmentioned_key(strategy: &DesignStrategy) -> String {
    format!(
        "{}/{}",
        format_segment(strategy),
        unmentioned_segment(strategy.unmentioned)
    )
}

fn format_segment(strategy: &DesignStrategy) -> &'static str {
    if grammar::lines_as_list(strategy) {
        "lines_of_list"
    } else {
        match strategy.output_format {
            OutputFormat::Natural => "natural",
            OutputFormat::Lines => "lines",
            OutputFormat::Json => "json",
        }
    }
}

fn unmentioned_segment(u: UnmentionedHandling) -> &'static str {
    match u {
        UnmentionedHandling::Pu => "pu",
        UnmentionedHandling::Ou => "ou",
    }
}

fn label_legend(schema: &AspectSchema, style: LabelStyle) -> String {
    match style {
        LabelStyle::Txt => "positive, neutral or negative".to_string(),
        LabelStyle::Num => {
            let code = |l: SentimentLabel| {
                schema
                    .numeric_label_map
                    .get(&l)
                    .cloned()
                    .unwrap_or_default()
            };
            format!(
                "{} (positive), {} (neutral), {} (negative)",
                code(SentimentLabel::Positive),
                code(SentimentLabel::Neutral),
                code(SentimentLabel::Negative),
            )
        }
    }
}

/// Slot references are `{identifier}`; literal braces (JSON examples in
/// clause text, say) are left alone.
fn referenced_slots(text: &str) -> Vec<String> {
    let mut slots = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let candidate = &after[..close];
                if !candidate.is_empty()
                    && candidate
                        .chars()
                        .all(|c| c.is_ascii_lowercase() || c == '_')
                {
                    slots.push(candidate.to_string());
                }
                rest = &after[close + 1..];
            }
            None => break,
        }
    }
    slots
}

fn default_masa_template() -> PromptTemplate {
    let instruction_variants = vec![
        "Analyze the following review and decide the sentiment toward each of these aspects: \
         {aspect_list}. {format_clause} {unmentioned_clause}"
            .to_string(),
        "You are given a customer review. For every aspect in the list ({aspect_list}), judge \
         the sentiment expressed by the reviewer. {format_clause} {unmentioned_clause}"
            .to_string(),
        "Read the review below and report the reviewer's attitude toward each aspect: \
         {aspect_list}. {format_clause} {unmentioned_clause}"
            .to_string(),
    ];
    let mut format_clauses = IndexMap::new();
    for style in ["txt", "num"] {
        for unmentioned in ["pu", "ou"] {
            format_clauses.insert(
                format!("natural/{style}/{unmentioned}"),
                "Answer with one sentence per aspect, in the form 'The sentiment toward \
                 <aspect> is <label>.', where <label> is {label_legend}."
                    .to_string(),
            );
            format_clauses.insert(
                format!("lines/{style}/{unmentioned}"),
                "Answer with one line per aspect, in the form '<aspect>: <label>', where \
                 <label> is {label_legend}."
                    .to_string(),
            );
            format_clauses.insert(
                format!("lines_of_list/{style}/{unmentioned}"),
                "Answer with one line per aspect, in the form '<aspect>: [<label>]', where \
                 <label> is {label_legend}."
                    .to_string(),
            );
            format_clauses.insert(
                format!("json/{style}/{unmentioned}"),
                "Answer with one JSON object per line, in the form {\"aspect\": \"...\", \
                 \"sentiment\": \"...\"}, where the sentiment is {label_legend}."
                    .to_string(),
            );
        }
    }
    let mut unmentioned_clauses = IndexMap::new();
    for format in ["natural", "lines", "lines_of_list", "json"] {
        let pu = match format {
            "natural" => {
                "If an aspect is not mentioned in the review, answer '<aspect> is not mentioned.'"
            }
            "lines_of_list" => "If an aspect is not mentioned in the review, answer '<aspect>: []'.",
            _ => "If an aspect is not mentioned in the review, use '{placeholder}' as its label.",
        };
        unmentioned_clauses.insert(format!("{format}/pu"), pu.to_string());
        unmentioned_clauses.insert(
            format!("{format}/ou"),
            "Only include aspects that are actually mentioned in the review; if none are \
             mentioned, answer 'none'."
                .to_string(),
        );
    }
    PromptTemplate {
        instruction_variants,
        text_preamble: "Review:".to_string(),
        format_clauses,
        unmentioned_clauses,
    }
}

fn default_span_template() -> PromptTemplate {
    let instruction_variants = vec![
        "Identify every mention of the following types in the text: {aspect_list}. \
         {format_clause} {unmentioned_clause}"
            .to_string(),
        "You are given a passage. Find all spans belonging to these types: {aspect_list}. \
         {format_clause} {unmentioned_clause}"
            .to_string(),
        "From the text below, extract the mentions of each type ({aspect_list}). \
         {format_clause} {unmentioned_clause}"
            .to_string(),
    ];
    let mut format_clauses = IndexMap::new();
    for style in ["txt", "num"] {
        for unmentioned in ["pu", "ou"] {
            format_clauses.insert(
                format!("natural/{style}/{unmentioned}"),
                "Answer with one sentence per type, in the form 'The <type> mentions are \
                 <m1>; <m2>.'"
                    .to_string(),
            );
            format_clauses.insert(
                format!("lines/{style}/{unmentioned}"),
                "Answer with one line per type, in the form '<type>: <m1>; <m2>'.".to_string(),
            );
            format_clauses.insert(
                format!("lines_of_list/{style}/{unmentioned}"),
                "Answer with one line per type, in the form '<type>: [<m1>, <m2>]'.".to_string(),
            );
            format_clauses.insert(
                format!("json/{style}/{unmentioned}"),
                "Answer with one JSON object per line, in the form {\"type\": \"...\", \
                 \"mentions\": [\"...\"]}."
                    .to_string(),
            );
        }
    }
    let mut unmentioned_clauses = IndexMap::new();
    for format in ["natural", "lines", "lines_of_list", "json"] {
        let pu = match format {
            "natural" => "If a type has no mentions, answer 'There are no <type> mentions.'",
            "json" => "If a type has no mentions, output an empty list for it.",
            _ => "If a type has no mentions, answer '<type>: []'.",
        };
        unmentioned_clauses.insert(format!("{format}/pu"), pu.to_string());
        unmentioned_clauses.insert(
            format!("{format}/ou"),
            "Only include types that occur in the text; if none occur, answer 'none'.".to_string(),
        );
    }
    PromptTemplate {
        instruction_variants,
        text_preamble: "Text:".to_string(),
        format_clauses,
        unmentioned_clauses,
    }
}
