//! Recovery of structured predictions from raw model output.
//!
//! Parsing runs in two tiers. The strict pass accepts exactly the rendered
//! grammar (modulo outer whitespace and the case of aspect names and label
//! tokens) and decides the `format_error` flag. When it fails, the relaxed
//! pass applies an ordered set of repairs and records each kind that fired;
//! predictions always come back total, with unrecoverable aspects defaulting
//! to unmentioned.

mod masa;
mod normalize;
mod span;
mod tables;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::designspace::DesignStrategy;
use crate::error::{Error, Result};
use crate::schema::{AspectSchema, SentimentLabel, TaskKind};

pub use tables::{aspect_aliases, label_synonyms};

/// The repair families of the relaxed pass, in rule order R1..R9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairKind {
    WhitespaceNormalize,
    PunctuationVariant,
    CaseFold,
    LabelSynonym,
    AspectAlias,
    JsonQuoteRepair,
    TrailingTextStripped,
    DuplicateAspectFirstWins,
    MissingAspectDefaulted,
}

/// Structured predictions for either task family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Predictions {
    Masa {
        labels: IndexMap<String, SentimentLabel>,
    },
    Span {
        spans: Vec<PredictedSpan>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedSpan {
    #[serde(rename = "type")]
    pub type_name: String,
    pub mention: String,
}

/// What the parser recovered from one raw output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseOutcome {
    pub predictions: Predictions,
    /// True iff the strict pass failed.
    pub format_error: bool,
    /// Repair kinds that fired during the relaxed pass, in rule order,
    /// each listed once.
    pub repairs: Vec<RepairKind>,
    /// Text the relaxed pass could not attribute to the grammar.
    pub residue: String,
}

impl ParseOutcome {
    pub fn masa_labels(&self) -> Option<&IndexMap<String, SentimentLabel>> {
        match &self.predictions {
            Predictions::Masa { labels } => Some(labels),
            Predictions::Span { .. } => None,
        }
    }

    pub fn spans(&self) -> Option<&[PredictedSpan]> {
        match &self.predictions {
            Predictions::Span { spans } => Some(spans),
            Predictions::Masa { .. } => None,
        }
    }
}

/// Parse one raw output under the grammar the strategy prescribes.
/// Never fails: unparseable content yields `format_error` with defaulted
/// predictions.
pub fn parse_output(
    text: &str,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
    kind: TaskKind,
) -> ParseOutcome {
    match kind {
        TaskKind::Masa => masa::parse(text, strategy, schema),
        TaskKind::Span => span::parse(text, strategy, schema),
    }
}

/// Parse a batch of (id, raw output) pairs, order-preserving.
pub fn batch_parse(
    texts: &[(String, String)],
    strategy: &DesignStrategy,
    schema: &AspectSchema,
    kind: TaskKind,
) -> Result<Vec<(String, ParseOutcome)>> {
    let mut seen = std::collections::HashSet::new();
    for (id, _) in texts {
        if !seen.insert(id.as_str()) {
            return Err(Error::validation(format!("duplicate prediction id '{id}'")));
        }
    }
    Ok(texts
        .iter()
        .map(|(id, text)| (id.clone(), parse_output(text, strategy, schema, kind)))
        .collect())
}

/// Ordered, deduplicated repair collector.
#[derive(Debug, Default)]
pub(crate) struct RepairSet {
    kinds: std::collections::BTreeSet<RepairKind>,
}

impl RepairSet {
    pub(crate) fn record(&mut self, kind: RepairKind) {
        self.kinds.insert(kind);
    }

    pub(crate) fn merge(&mut self, other: RepairSet) {
        self.kinds.extend(other.kinds);
    }

    pub(crate) fn into_vec(self) -> Vec<RepairKind> {
        self.kinds.into_iter().collect()
    }
}

/// Compare consumed text against its canonical reconstruction and attribute
/// pure case / whitespace deviations. Aspect and label case never reaches
/// here; callers embed captured tokens verbatim in `canonical`.
pub(crate) fn attribute_shape(consumed: &str, canonical: &str, repairs: &mut RepairSet) {
    if consumed == canonical {
        return;
    }
    if consumed.eq_ignore_ascii_case(canonical) {
        repairs.record(RepairKind::CaseFold);
        return;
    }
    let a = strip_all_whitespace(consumed);
    let b = strip_all_whitespace(canonical);
    if a == b {
        repairs.record(RepairKind::WhitespaceNormalize);
    } else if a.eq_ignore_ascii_case(&b) {
        repairs.record(RepairKind::CaseFold);
        repairs.record(RepairKind::WhitespaceNormalize);
    }
}

pub(crate) fn strip_all_whitespace(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Valid label tokens plus resolution through the synonym table.
pub(crate) struct LabelResolver {
    style: crate::designspace::LabelStyle,
    /// (lowercased token, label), longest first.
    canonical: Vec<(String, SentimentLabel)>,
    /// Cross-style tokens: textual names under the numeric style and
    /// numeric codes under the textual style resolve as synonyms.
    cross_style: Vec<(String, SentimentLabel)>,
}

impl LabelResolver {
    pub(crate) fn new(schema: &AspectSchema, style: crate::designspace::LabelStyle) -> LabelResolver {
        let canonical = crate::grammar::valid_label_tokens(schema, style)
            .into_iter()
            .map(|(t, l)| (t.to_ascii_lowercase(), l))
            .collect();
        let other = match style {
            crate::designspace::LabelStyle::Txt => crate::designspace::LabelStyle::Num,
            crate::designspace::LabelStyle::Num => crate::designspace::LabelStyle::Txt,
        };
        let cross_style = crate::grammar::valid_label_tokens(schema, other)
            .into_iter()
            .map(|(t, l)| (t.to_ascii_lowercase(), l))
            .collect();
        LabelResolver {
            style,
            canonical,
            cross_style,
        }
    }

    pub(crate) fn is_numeric_style(&self) -> bool {
        self.style == crate::designspace::LabelStyle::Num
    }

    /// Exact match against the canonical token set (case-insensitive).
    pub(crate) fn strict(&self, token: &str) -> Option<SentimentLabel> {
        let t = token.to_ascii_lowercase();
        self.canonical
            .iter()
            .find(|(tok, _)| *tok == t)
            .map(|(_, l)| *l)
    }

    /// Strict match with the numeric-style tolerance for a quoted code.
    pub(crate) fn strict_token(&self, token: &str) -> Option<SentimentLabel> {
        if let Some(label) = self.strict(token) {
            return Some(label);
        }
        if self.is_numeric_style() {
            if let Some(inner) = crate::parse::normalize::strip_quotes(token) {
                return self.strict(inner);
            }
        }
        None
    }

    /// Longest canonical token that `s` starts with (case-insensitive).
    pub(crate) fn strict_prefix(&self, s: &str) -> Option<(usize, SentimentLabel)> {
        let lower = s.to_ascii_lowercase();
        self.canonical
            .iter()
            .find(|(tok, _)| lower.starts_with(tok.as_str()))
            .map(|(tok, l)| (tok.len(), *l))
    }

    /// Relaxed resolution through cross-style tokens and the synonym table.
    /// Records `LabelSynonym` when a non-canonical expression resolved.
    pub(crate) fn relaxed(&self, token: &str, repairs: &mut RepairSet) -> Option<SentimentLabel> {
        if let Some(label) = self.strict(token) {
            return Some(label);
        }
        let key = crate::grammar::collapse_whitespace(token).to_ascii_lowercase();
        if let Some((_, label)) = self.cross_style.iter().find(|(tok, _)| *tok == key) {
            repairs.record(RepairKind::LabelSynonym);
            return Some(*label);
        }
        if let Some(canonical) = tables::label_synonyms().get(key.as_str()) {
            let label = SentimentLabel::from_canonical(canonical)?;
            repairs.record(RepairKind::LabelSynonym);
            return Some(label);
        }
        None
    }
}

/// Resolve an aspect/type name against the schema, falling back to the alias
/// table. Returns the canonical schema name.
pub(crate) fn resolve_aspect<'s>(
    name: &str,
    schema: &'s AspectSchema,
    repairs: &mut RepairSet,
) -> Option<&'s str> {
    if let Some(i) = schema.aspect_index(name) {
        return Some(&schema.aspects[i]);
    }
    let key = crate::grammar::collapse_whitespace(name).to_ascii_lowercase();
    if let Some(canonical) = tables::aspect_aliases().get(key.as_str()) {
        if let Some(i) = schema.aspect_index(canonical) {
            repairs.record(RepairKind::AspectAlias);
            return Some(&schema.aspects[i]);
        }
    }
    None
}

/// Fill a total aspect->label map in schema order from the parsed subset.
/// Under the placeholder design, absent aspects count as a repair; under
/// omit-unmentioned, absence is the grammar.
pub(crate) fn totalize(
    parsed: IndexMap<String, SentimentLabel>,
    schema: &AspectSchema,
    placeholder_mode: bool,
    repairs: Option<&mut RepairSet>,
) -> IndexMap<String, SentimentLabel> {
    let mut missing_any = false;
    let mut out = IndexMap::with_capacity(schema.aspects.len());
    for aspect in &schema.aspects {
        match parsed.get(aspect) {
            Some(label) => {
                out.insert(aspect.clone(), *label);
            }
            None => {
                missing_any = true;
                out.insert(aspect.clone(), SentimentLabel::Unmentioned);
            }
        }
    }
    if missing_any && placeholder_mode {
        if let Some(repairs) = repairs {
            repairs.record(RepairKind::MissingAspectDefaulted);
        }
    }
    out
}
