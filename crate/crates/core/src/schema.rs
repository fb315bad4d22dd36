//! Canonical data model for annotated corpora: sentiment labels, aspect
//! schemas, record types and per-aspect label distributions.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four sentiment outcomes. `Unmentioned` is a first-class label: it is
/// both a valid gold annotation and the fallback for unparseable predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Neutral,
    Negative,
    Unmentioned,
}

impl SentimentLabel {
    /// All labels in canonical matrix order (rows/columns of the weight matrix).
    pub const ALL: [SentimentLabel; 4] = [
        SentimentLabel::Positive,
        SentimentLabel::Neutral,
        SentimentLabel::Negative,
        SentimentLabel::Unmentioned,
    ];

    /// Index into the canonical order. Used by confusion/weight matrices.
    pub fn index(self) -> usize {
        match self {
            SentimentLabel::Positive => 0,
            SentimentLabel::Neutral => 1,
            SentimentLabel::Negative => 2,
            SentimentLabel::Unmentioned => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<SentimentLabel> {
        SentimentLabel::ALL.get(i).copied()
    }

    /// Lowercase textual form, identical to the JSON encoding.
    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Neutral => "neutral",
            SentimentLabel::Negative => "negative",
            SentimentLabel::Unmentioned => "unmentioned",
        }
    }

    pub fn from_canonical(s: &str) -> Option<SentimentLabel> {
        match s {
            "positive" => Some(SentimentLabel::Positive),
            "neutral" => Some(SentimentLabel::Neutral),
            "negative" => Some(SentimentLabel::Negative),
            "unmentioned" => Some(SentimentLabel::Unmentioned),
            _ => None,
        }
    }
}

impl std::fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Task description: the aspect (or span-type) vocabulary, its canonical
/// rendering order, the numeric label codes and the placeholder token used
/// for unmentioned targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectSchema {
    pub task_id: String,
    /// Aspect names in canonical rendering order.
    pub aspects: Vec<String>,
    /// Label -> numeric code used under the numeric label style.
    pub numeric_label_map: IndexMap<SentimentLabel, String>,
    /// Token emitted in label slots for unmentioned targets under the
    /// placeholder design.
    pub placeholder_token: String,
}

impl AspectSchema {
    /// Build a schema with the default numeric codes (1/0/-1/99) and the
    /// default placeholder token.
    pub fn new(task_id: impl Into<String>, aspects: Vec<String>) -> AspectSchema {
        AspectSchema {
            task_id: task_id.into(),
            aspects,
            numeric_label_map: default_numeric_label_map(),
            placeholder_token: "unmentioned".to_string(),
        }
    }

    /// Check structural invariants: aspects unique and non-empty, numeric
    /// map total and injective, placeholder non-empty.
    pub fn validate(&self) -> Result<()> {
        if self.aspects.is_empty() {
            return Err(Error::validation(format!(
                "schema '{}' has no aspects",
                self.task_id
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for a in &self.aspects {
            if a.trim().is_empty() {
                return Err(Error::validation(format!(
                    "schema '{}' contains an empty aspect name",
                    self.task_id
                )));
            }
            if !seen.insert(a.to_lowercase()) {
                return Err(Error::validation(format!(
                    "schema '{}' has duplicate aspect '{a}'",
                    self.task_id
                )));
            }
        }
        for label in SentimentLabel::ALL {
            if !self.numeric_label_map.contains_key(&label) {
                return Err(Error::validation(format!(
                    "schema '{}' numeric_label_map missing '{label}'",
                    self.task_id
                )));
            }
        }
        let codes: std::collections::HashSet<_> = self.numeric_label_map.values().collect();
        if codes.len() != self.numeric_label_map.len() {
            return Err(Error::validation(format!(
                "schema '{}' numeric_label_map is not injective",
                self.task_id
            )));
        }
        if self.placeholder_token.trim().is_empty() {
            return Err(Error::validation(format!(
                "schema '{}' has an empty placeholder token",
                self.task_id
            )));
        }
        Ok(())
    }

    /// Position of an aspect in the canonical order (case-insensitive).
    pub fn aspect_index(&self, name: &str) -> Option<usize> {
        self.aspects
            .iter()
            .position(|a| a.eq_ignore_ascii_case(name))
    }

    pub fn load(path: &std::path::Path) -> Result<AspectSchema> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let schema: AspectSchema = serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: invalid schema file: {e}", path.display())))?;
        schema.validate()?;
        Ok(schema)
    }
}

fn default_numeric_label_map() -> IndexMap<SentimentLabel, String> {
    let mut m = IndexMap::new();
    m.insert(SentimentLabel::Positive, "1".to_string());
    m.insert(SentimentLabel::Neutral, "0".to_string());
    m.insert(SentimentLabel::Negative, "-1".to_string());
    m.insert(SentimentLabel::Unmentioned, "99".to_string());
    m
}

/// One multi-aspect sentiment record: a review plus a total aspect->label map
/// and optional per-aspect rationale text used by reasoning designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasaRecord {
    pub id: String,
    pub text: String,
    pub labels: IndexMap<String, SentimentLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationales: Option<IndexMap<String, String>>,
}

impl MasaRecord {
    pub fn label(&self, aspect: &str) -> Option<SentimentLabel> {
        self.labels
            .iter()
            .find(|(a, _)| a.eq_ignore_ascii_case(aspect))
            .map(|(_, l)| *l)
    }

    pub fn rationale(&self, aspect: &str) -> Option<&str> {
        self.rationales.as_ref().and_then(|m| {
            m.iter()
                .find(|(a, _)| a.eq_ignore_ascii_case(aspect))
                .map(|(_, r)| r.as_str())
        })
    }
}

/// One typed span annotation. Offsets are optional character offsets into the
/// record text; prompts exchange mention strings, not offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanAnnotation {
    #[serde(rename = "type")]
    pub type_name: String,
    pub mention: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<usize>,
}

/// One span-extraction record (nested/overlapping spans permitted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanRecord {
    pub id: String,
    pub text: String,
    pub spans: Vec<SpanAnnotation>,
}

impl SpanRecord {
    /// Mentions of one type, in annotation order.
    pub fn mentions_of(&self, type_name: &str) -> Vec<&str> {
        self.spans
            .iter()
            .filter(|s| s.type_name.eq_ignore_ascii_case(type_name))
            .map(|s| s.mention.as_str())
            .collect()
    }
}

/// A record of either task family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaskRecord {
    Masa(MasaRecord),
    Span(SpanRecord),
}

impl TaskRecord {
    pub fn id(&self) -> &str {
        match self {
            TaskRecord::Masa(r) => &r.id,
            TaskRecord::Span(r) => &r.id,
        }
    }

    pub fn text(&self) -> &str {
        match self {
            TaskRecord::Masa(r) => &r.text,
            TaskRecord::Span(r) => &r.text,
        }
    }

    pub fn as_masa(&self) -> Option<&MasaRecord> {
        match self {
            TaskRecord::Masa(r) => Some(r),
            TaskRecord::Span(_) => None,
        }
    }

    pub fn as_span(&self) -> Option<&SpanRecord> {
        match self {
            TaskRecord::Span(r) => Some(r),
            TaskRecord::Masa(_) => None,
        }
    }
}

/// Which record family a corpus holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Masa,
    Span,
}

impl std::str::FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<TaskKind> {
        match s.to_ascii_lowercase().as_str() {
            "masa" => Ok(TaskKind::Masa),
            "span" => Ok(TaskKind::Span),
            other => Err(Error::validation(format!(
                "unknown task kind '{other}' (expected 'masa' or 'span')"
            ))),
        }
    }
}

/// Per-aspect label fractions. Fractions for one aspect must sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelDistribution {
    pub per_aspect: IndexMap<String, IndexMap<SentimentLabel, f64>>,
}

impl LabelDistribution {
    pub fn validate(&self, schema: &AspectSchema) -> Result<()> {
        for aspect in &schema.aspects {
            let Some(dist) = self.per_aspect.get(aspect) else {
                return Err(Error::validation(format!(
                    "distribution missing aspect '{aspect}'"
                )));
            };
            let mut sum = 0.0;
            for label in SentimentLabel::ALL {
                let f = dist.get(&label).copied().unwrap_or(0.0);
                if f < 0.0 {
                    return Err(Error::validation(format!(
                        "distribution for '{aspect}' has negative fraction for '{label}'"
                    )));
                }
                sum += f;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::validation(format!(
                    "distribution for '{aspect}' sums to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<LabelDistribution> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| {
            Error::validation(format!("{}: invalid distribution file: {e}", path.display()))
        })
    }

    pub fn fraction(&self, aspect: &str, label: SentimentLabel) -> f64 {
        self.per_aspect
            .get(aspect)
            .and_then(|d| d.get(&label).copied())
            .unwrap_or(0.0)
    }
}

/// Validate one record against its invariants and (when given) a schema.
/// Returns every violation, not just the first; an empty list means ok.
pub fn validate_record(record: &TaskRecord, schema: Option<&AspectSchema>) -> Vec<String> {
    let mut violations = Vec::new();
    match record {
        TaskRecord::Masa(r) => {
            if r.id.is_empty() {
                violations.push("empty record id".to_string());
            }
            if let Some(schema) = schema {
                for aspect in &schema.aspects {
                    if r.label(aspect).is_none() {
                        violations.push(format!(
                            "record {} missing aspect '{aspect}'",
                            record_name(&r.id)
                        ));
                    }
                }
                for aspect in r.labels.keys() {
                    if schema.aspect_index(aspect).is_none() {
                        violations.push(format!(
                            "record {} has unknown aspect '{aspect}'",
                            record_name(&r.id)
                        ));
                    }
                }
                if let Some(rationales) = &r.rationales {
                    for aspect in rationales.keys() {
                        if schema.aspect_index(aspect).is_none() {
                            violations.push(format!(
                                "record {} unknown rationale aspect '{aspect}'",
                                record_name(&r.id)
                            ));
                        }
                    }
                }
            }
        }
        TaskRecord::Span(r) => {
            if r.id.is_empty() {
                violations.push("empty record id".to_string());
            }
            for (i, span) in r.spans.iter().enumerate() {
                if span.mention.is_empty() {
                    violations.push(format!(
                        "record {} span {i}: empty mention",
                        record_name(&r.id)
                    ));
                }
                if let Some(schema) = schema {
                    if schema.aspect_index(&span.type_name).is_none() {
                        violations.push(format!(
                            "record {} span {i}: unknown type '{}'",
                            record_name(&r.id),
                            span.type_name
                        ));
                    }
                }
                match (span.start, span.end) {
                    (Some(start), Some(end)) => {
                        if start > end {
                            violations.push(format!(
                                "record {} span {i}: start {start} > end {end}",
                                record_name(&r.id)
                            ));
                        } else {
                            let slice: String = r
                                .text
                                .chars()
                                .skip(start)
                                .take(end - start)
                                .collect();
                            if slice != span.mention {
                                violations.push(format!(
                                    "record {} span {i}: text[{start}..{end}] is '{slice}', \
                                     expected mention '{}'",
                                    record_name(&r.id),
                                    span.mention
                                ));
                            }
                        }
                    }
                    (Some(_), None) | (None, Some(_)) => {
                        violations.push(format!(
                            "record {} span {i}: offsets must be given as a pair",
                            record_name(&r.id)
                        ));
                    }
                    (None, None) => {}
                }
            }
        }
    }
    violations
}

fn record_name(id: &str) -> &str {
    if id.is_empty() {
        "<unnamed>"
    } else {
        id
    }
}
