//! Span-task parsing: strict grammar match and the relaxed pass.
//!
//! Schema aspects double as the span-type vocabulary. Predictions are
//! (type, mention) pairs flattened in schema-type order.

use indexmap::IndexMap;

use super::normalize;
use super::{
    attribute_shape, resolve_aspect, ParseOutcome, PredictedSpan, Predictions, RepairKind,
    RepairSet,
};
use crate::designspace::{DesignStrategy, OutputFormat, UnmentionedHandling};
use crate::grammar;
use crate::schema::AspectSchema;

pub(crate) fn parse(text: &str, strategy: &DesignStrategy, schema: &AspectSchema) -> ParseOutcome {
    if let Some(by_type) = strict(text, strategy, schema) {
        return ParseOutcome {
            predictions: Predictions::Span {
                spans: flatten(by_type, schema),
            },
            format_error: false,
            repairs: Vec::new(),
            residue: String::new(),
        };
    }
    relaxed(text, strategy, schema)
}

fn flatten(by_type: IndexMap<String, Vec<String>>, schema: &AspectSchema) -> Vec<PredictedSpan> {
    let mut spans = Vec::new();
    for type_name in &schema.aspects {
        if let Some(mentions) = by_type.get(type_name) {
            for mention in mentions {
                spans.push(PredictedSpan {
                    type_name: type_name.clone(),
                    mention: mention.clone(),
                });
            }
        }
    }
    spans
}

// ---------------------------------------------------------------- strict --

fn strict(
    text: &str,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
) -> Option<IndexMap<String, Vec<String>>> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return None;
    }
    let pu = strategy.unmentioned == UnmentionedHandling::Pu;
    if !pu && trimmed.eq_ignore_ascii_case(grammar::EMPTY_OUTPUT) {
        return Some(IndexMap::new());
    }
    let parsed = match strategy.output_format {
        OutputFormat::Lines => strict_lines(trimmed, strategy, schema)?,
        OutputFormat::Json => strict_json(trimmed, strategy, schema)?,
        OutputFormat::Natural => strict_natural(trimmed, strategy, schema)?,
    };
    if pu && parsed.len() != schema.aspects.len() {
        return None;
    }
    Some(parsed)
}

fn strict_lines(
    trimmed: &str,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
) -> Option<IndexMap<String, Vec<String>>> {
    let as_list = grammar::lines_as_list(strategy);
    let pu = strategy.unmentioned == UnmentionedHandling::Pu;
    let mut next = 0usize;
    let mut out = IndexMap::new();
    for line in trimmed.split('\n') {
        let (idx, rest) = strict_type_prefix(line, schema, next)?;
        if pu && idx != next {
            return None;
        }
        let mentions = strict_mentions(rest, as_list)?;
        out.insert(schema.aspects[idx].clone(), mentions);
        next = idx + 1;
    }
    Some(out)
}

fn strict_type_prefix<'a>(
    line: &'a str,
    schema: &AspectSchema,
    from: usize,
) -> Option<(usize, &'a str)> {
    let mut best: Option<(usize, &'a str)> = None;
    for (i, type_name) in schema.aspects.iter().enumerate().skip(from) {
        if line.len() > type_name.len()
            && line.is_char_boundary(type_name.len())
            && line[..type_name.len()].eq_ignore_ascii_case(type_name)
        {
            if let Some(rest) = line[type_name.len()..].strip_prefix(": ") {
                let better = match best {
                    Some((j, _)) => type_name.len() > schema.aspects[j].len(),
                    None => true,
                };
                if better {
                    best = Some((i, rest));
                }
            }
        }
    }
    best
}

fn strict_mentions(rest: &str, as_list: bool) -> Option<Vec<String>> {
    if rest == grammar::EMPTY_LIST {
        return Some(Vec::new());
    }
    let (body, separator) = if as_list {
        (
            rest.strip_prefix('[')?.strip_suffix(']')?,
            grammar::LIST_SEPARATOR,
        )
    } else {
        // A bracket-wrapped value under the plain flavor is list-flavor
        // bleed, not a mention that happens to be bracketed.
        if rest.starts_with('[') && rest.ends_with(']') {
            return None;
        }
        (rest, grammar::MENTION_SEPARATOR)
    };
    if body.is_empty() {
        return None;
    }
    let mentions: Vec<String> = body.split(separator).map(str::to_string).collect();
    if mentions.iter().any(|m| m.is_empty() || m.trim() != m) {
        return None;
    }
    Some(mentions)
}

fn strict_natural(
    trimmed: &str,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
) -> Option<IndexMap<String, Vec<String>>> {
    let pu = strategy.unmentioned == UnmentionedHandling::Pu;
    let mut pos = 0usize;
    let mut out = IndexMap::new();
    for type_name in &schema.aspects {
        let start = if out.is_empty() { pos } else { pos + 1 };
        let sep_ok = out.is_empty() || trimmed[pos..].starts_with(' ');
        if sep_ok && start <= trimmed.len() {
            if let Some((mentions, used)) = strict_span_sentence(&trimmed[start..], type_name) {
                out.insert(type_name.clone(), mentions);
                pos = start + used;
                continue;
            }
        }
        if pu {
            return None;
        }
    }
    if pos != trimmed.len() {
        return None;
    }
    Some(out)
}

fn strict_span_sentence(s: &str, type_name: &str) -> Option<(Vec<String>, usize)> {
    // "There are no {type} mentions."
    if let Some(rest) = s.strip_prefix(grammar::SPAN_NATURAL_NONE_PREFIX) {
        if rest.len() >= type_name.len()
            && rest.is_char_boundary(type_name.len())
            && rest[..type_name.len()].eq_ignore_ascii_case(type_name)
            && rest[type_name.len()..].starts_with(grammar::SPAN_NATURAL_NONE_TAIL)
        {
            let used = grammar::SPAN_NATURAL_NONE_PREFIX.len()
                + type_name.len()
                + grammar::SPAN_NATURAL_NONE_TAIL.len();
            return Some((Vec::new(), used));
        }
    }
    // "The {type} mentions are m1; m2."
    let rest = s.strip_prefix(grammar::SPAN_NATURAL_PREFIX)?;
    if rest.len() < type_name.len()
        || !rest.is_char_boundary(type_name.len())
        || !rest[..type_name.len()].eq_ignore_ascii_case(type_name)
    {
        return None;
    }
    let rest = rest[type_name.len()..].strip_prefix(grammar::SPAN_NATURAL_MENTIONS_ARE)?;
    let dot = rest.find('.')?;
    if dot == 0 {
        return None;
    }
    let body = &rest[..dot];
    let mentions: Vec<String> = body
        .split(grammar::MENTION_SEPARATOR)
        .map(str::to_string)
        .collect();
    if mentions.iter().any(|m| m.is_empty() || m.trim() != m) {
        return None;
    }
    let used = grammar::SPAN_NATURAL_PREFIX.len()
        + type_name.len()
        + grammar::SPAN_NATURAL_MENTIONS_ARE.len()
        + dot
        + 1;
    Some((mentions, used))
}

fn strict_json(
    trimmed: &str,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
) -> Option<IndexMap<String, Vec<String>>> {
    let pu = strategy.unmentioned == UnmentionedHandling::Pu;
    let mut next = 0usize;
    let mut out = IndexMap::new();
    for line in trimmed.split('\n') {
        let value: serde_json::Value = serde_json::from_str(line).ok()?;
        let obj = value.as_object()?;
        let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        if keys != ["type", "mentions"] {
            return None;
        }
        let type_name = obj["type"].as_str()?;
        let idx = schema.aspect_index(type_name)?;
        if idx < next || (pu && idx != next) {
            return None;
        }
        let mentions = obj["mentions"]
            .as_array()?
            .iter()
            .map(|v| v.as_str().map(str::to_string))
            .collect::<Option<Vec<String>>>()?;
        if mentions.iter().any(|m| m.is_empty()) {
            return None;
        }
        out.insert(schema.aspects[idx].clone(), mentions);
        next = idx + 1;
    }
    Some(out)
}

// --------------------------------------------------------------- relaxed --

fn relaxed(text: &str, strategy: &DesignStrategy, schema: &AspectSchema) -> ParseOutcome {
    let mut repairs = RepairSet::default();
    let normalized = normalize::whitespace(text, strategy.output_format, &mut repairs);
    let mapped = normalize::punctuation(&normalized, &mut repairs);
    let pu = strategy.unmentioned == UnmentionedHandling::Pu;

    if !pu {
        let bare = mapped.trim_end_matches('.');
        if !bare.is_empty() && bare.eq_ignore_ascii_case(grammar::EMPTY_OUTPUT) {
            if bare.len() != mapped.len() {
                repairs.record(RepairKind::PunctuationVariant);
            }
            if bare != grammar::EMPTY_OUTPUT {
                repairs.record(RepairKind::CaseFold);
            }
            return ParseOutcome {
                predictions: Predictions::Span { spans: Vec::new() },
                format_error: true,
                repairs: repairs.into_vec(),
                residue: String::new(),
            };
        }
    }

    let mut parsed: IndexMap<String, Vec<String>> = IndexMap::new();
    let mut residue: Vec<String> = Vec::new();
    match strategy.output_format {
        OutputFormat::Lines => relaxed_lines(
            &mapped, strategy, schema, &mut parsed, &mut repairs, &mut residue,
        ),
        OutputFormat::Json => relaxed_json(&mapped, schema, &mut parsed, &mut repairs, &mut residue),
        OutputFormat::Natural => {
            relaxed_natural(&mapped, schema, &mut parsed, &mut repairs, &mut residue)
        }
    }
    let residue_text = residue.join("\n");
    if !residue_text.trim().is_empty() {
        repairs.record(RepairKind::TrailingTextStripped);
    }
    if pu {
        let missing = schema
            .aspects
            .iter()
            .any(|t| !parsed.contains_key(t));
        if missing {
            repairs.record(RepairKind::MissingAspectDefaulted);
        }
    }
    ParseOutcome {
        predictions: Predictions::Span {
            spans: flatten(parsed, schema),
        },
        format_error: true,
        repairs: repairs.into_vec(),
        residue: residue_text,
    }
}

fn relaxed_lines(
    mapped: &str,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
    parsed: &mut IndexMap<String, Vec<String>>,
    repairs: &mut RepairSet,
    residue: &mut Vec<String>,
) {
    let as_list = grammar::lines_as_list(strategy);
    for line in mapped.lines() {
        let mut local = RepairSet::default();
        let mut body = line;
        if let Some(rest) = normalize::strip_bullet(body) {
            local.record(RepairKind::PunctuationVariant);
            body = rest;
        }
        let Some((lhs_raw, rhs_raw)) = body.split_once(':') else {
            residue.push(line.to_string());
            continue;
        };
        let mut lhs = lhs_raw.trim();
        if let Some(inner) = normalize::strip_quotes(lhs) {
            local.record(RepairKind::PunctuationVariant);
            lhs = inner.trim();
        }
        let Some(type_name) = resolve_aspect(lhs, schema, &mut local) else {
            residue.push(line.to_string());
            continue;
        };
        let mentions = relaxed_mentions(rhs_raw.trim(), as_list, &mut local);
        if !rhs_raw.starts_with(' ') && !rhs_raw.is_empty() {
            local.record(RepairKind::WhitespaceNormalize);
        }
        if lhs_raw != lhs_raw.trim_end() {
            local.record(RepairKind::WhitespaceNormalize);
        }
        record_spans(type_name, mentions, parsed, &mut local);
        repairs.merge(local);
    }
}

/// Split a mention list value, tolerating list-flavor bleed and decorative
/// brackets/quotes/periods. Commas are legal inside plain-flavor mentions,
/// so comma-splitting only happens where brackets signal a list value.
fn relaxed_mentions(value: &str, as_list: bool, repairs: &mut RepairSet) -> Vec<String> {
    let mut v = value.trim();
    let trimmed = v.trim_end_matches(['.', ';', ',']);
    if trimmed.len() != v.len() {
        if !trimmed.is_empty() {
            repairs.record(RepairKind::PunctuationVariant);
        }
        v = trimmed.trim_end();
    }
    if v == grammar::EMPTY_LIST || v.is_empty() {
        return Vec::new();
    }
    let mut bracketed = false;
    if let Some(inner) = v.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        bracketed = true;
        if !as_list {
            repairs.record(RepairKind::PunctuationVariant);
        }
        v = inner.trim();
        if v.is_empty() {
            return Vec::new();
        }
    } else if as_list {
        // Canonical list flavor without brackets.
        repairs.record(RepairKind::PunctuationVariant);
    }
    let separator = if bracketed {
        // Bracketed values separate with commas unless semicolons are
        // clearly in use.
        if v.contains(';') && !v.contains(',') {
            if as_list {
                repairs.record(RepairKind::PunctuationVariant);
            }
            ';'
        } else {
            ','
        }
    } else if v.contains(';') || !v.contains(',') {
        ';'
    } else {
        // No semicolons at all: an unbracketed comma list under the list
        // flavor splits on commas, a plain-flavor value keeps them.
        if as_list {
            ','
        } else {
            ';'
        }
    };
    let mut none_filtered = false;
    let mentions: Vec<String> = v
        .split(separator)
        .map(str::trim)
        .filter(|m| {
            // Placeholder words inside a list carry no mention.
            let keep = !m.is_empty()
                && !m.eq_ignore_ascii_case(grammar::EMPTY_OUTPUT)
                && !m.eq_ignore_ascii_case("unmentioned");
            if !keep {
                none_filtered = true;
            }
            keep
        })
        .map(|m| {
            let unquoted = normalize::strip_quotes(m).unwrap_or(m);
            if unquoted != m {
                repairs.record(RepairKind::PunctuationVariant);
            }
            unquoted.trim().to_string()
        })
        .collect();
    if none_filtered && !mentions.is_empty() {
        repairs.record(RepairKind::TrailingTextStripped);
    }
    mentions
}

fn record_spans(
    type_name: &str,
    mentions: Vec<String>,
    parsed: &mut IndexMap<String, Vec<String>>,
    repairs: &mut RepairSet,
) {
    if parsed.contains_key(type_name) {
        repairs.record(RepairKind::DuplicateAspectFirstWins);
        return;
    }
    parsed.insert(type_name.to_string(), mentions);
}

fn relaxed_json(
    mapped: &str,
    schema: &AspectSchema,
    parsed: &mut IndexMap<String, Vec<String>>,
    repairs: &mut RepairSet,
    residue: &mut Vec<String>,
) {
    let rows = super::masa::collect_json_rows(mapped, repairs, residue);
    for row in rows {
        let mut local = RepairSet::default();
        let Some(type_value) = super::masa::get_key_ci(&row, "type", &mut local) else {
            residue.push(super::masa::compact_row(&row));
            continue;
        };
        let Some(type_text) = type_value.as_str() else {
            residue.push(super::masa::compact_row(&row));
            continue;
        };
        let Some(type_name) = resolve_aspect(type_text.trim(), schema, &mut local) else {
            residue.push(super::masa::compact_row(&row));
            continue;
        };
        let Some(mentions_value) = super::masa::get_key_ci(&row, "mentions", &mut local) else {
            residue.push(super::masa::compact_row(&row));
            continue;
        };
        let mentions: Vec<String> = match mentions_value {
            serde_json::Value::Array(items) => items
                .iter()
                .filter_map(|v| match v {
                    serde_json::Value::String(s) if !s.trim().is_empty() => {
                        Some(s.trim().to_string())
                    }
                    _ => None,
                })
                .collect(),
            serde_json::Value::String(s) => {
                // A bare string where an array belongs is a structural fix.
                local.record(RepairKind::JsonQuoteRepair);
                s.split(';')
                    .map(str::trim)
                    .filter(|m| !m.is_empty())
                    .map(str::to_string)
                    .collect()
            }
            _ => {
                residue.push(super::masa::compact_row(&row));
                continue;
            }
        };
        record_spans(type_name, mentions, parsed, &mut local);
        repairs.merge(local);
    }
}

fn relaxed_natural(
    mapped: &str,
    schema: &AspectSchema,
    parsed: &mut IndexMap<String, Vec<String>>,
    repairs: &mut RepairSet,
    residue: &mut Vec<String>,
) {
    let lower = mapped.to_ascii_lowercase();
    struct Match {
        start: usize,
        end: usize,
        type_name: String,
        mentions: Vec<String>,
        repairs: RepairSet,
    }
    let mut matches: Vec<Match> = Vec::new();
    for type_name in &schema.aspects {
        let name = type_name.to_ascii_lowercase();
        // "there are no {type} mentions."
        let none_pattern = format!(
            "{}{name}{}",
            grammar::SPAN_NATURAL_NONE_PREFIX.to_ascii_lowercase(),
            grammar::SPAN_NATURAL_NONE_TAIL.trim_end_matches('.')
        );
        let mut from = 0usize;
        while let Some(offset) = lower[from..].find(&none_pattern) {
            let start = from + offset;
            let mut end = start + none_pattern.len();
            let mut local = RepairSet::default();
            if lower[end..].starts_with('.') {
                end += 1;
            } else {
                local.record(RepairKind::PunctuationVariant);
            }
            attribute_shape(
                &mapped[start..end],
                &grammar::span_natural(&mapped[start + grammar::SPAN_NATURAL_NONE_PREFIX.len()
                    ..start + grammar::SPAN_NATURAL_NONE_PREFIX.len() + name.len()], &[]),
                &mut local,
            );
            matches.push(Match {
                start,
                end,
                type_name: type_name.clone(),
                mentions: Vec::new(),
                repairs: local,
            });
            from = start + 1;
        }
        // "the {type} mentions are m1; m2."
        let mention_pattern = format!(
            "{}{name}{}",
            grammar::SPAN_NATURAL_PREFIX.to_ascii_lowercase(),
            grammar::SPAN_NATURAL_MENTIONS_ARE
        );
        let mut from = 0usize;
        while let Some(offset) = lower[from..].find(&mention_pattern) {
            let start = from + offset;
            let list_at = start + mention_pattern.len();
            let mut local = RepairSet::default();
            let rest = &mapped[list_at..];
            let (body, consumed, found_period) = match rest.find('.') {
                Some(dot) => (&rest[..dot], dot + 1, true),
                None => (rest, rest.len(), false),
            };
            if !found_period {
                local.record(RepairKind::PunctuationVariant);
            }
            let mentions: Vec<String> = body
                .split(';')
                .map(str::trim)
                .filter(|m| !m.is_empty())
                .map(str::to_string)
                .collect();
            if mentions.is_empty() {
                from = start + 1;
                continue;
            }
            let head = &mapped[start..list_at];
            let canonical_head = format!(
                "{}{}{}",
                grammar::SPAN_NATURAL_PREFIX,
                &mapped[start + grammar::SPAN_NATURAL_PREFIX.len()
                    ..start + grammar::SPAN_NATURAL_PREFIX.len() + name.len()],
                grammar::SPAN_NATURAL_MENTIONS_ARE
            );
            attribute_shape(head, &canonical_head, &mut local);
            matches.push(Match {
                start,
                end: list_at + consumed,
                type_name: type_name.clone(),
                mentions,
                repairs: local,
            });
            from = start + 1;
        }
    }
    matches.sort_by_key(|m| m.start);
    let mut covered: Vec<(usize, usize)> = Vec::new();
    for m in matches {
        if covered.iter().any(|&(s, e)| m.start < e && s < m.end) {
            continue;
        }
        covered.push((m.start, m.end));
        if parsed.contains_key(&m.type_name) {
            repairs.record(RepairKind::DuplicateAspectFirstWins);
            continue;
        }
        parsed.insert(m.type_name.clone(), m.mentions);
        repairs.merge(m.repairs);
    }
    covered.sort_unstable();
    let mut cursor = 0usize;
    for (s, e) in covered {
        let gap = mapped[cursor..s].trim();
        if !gap.is_empty() {
            residue.push(gap.to_string());
        }
        cursor = e.max(cursor);
    }
    let tail = mapped[cursor..].trim();
    if !tail.is_empty() {
        residue.push(tail.to_string());
    }
}
