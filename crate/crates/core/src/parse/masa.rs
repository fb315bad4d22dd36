//! Sentiment-task parsing: strict grammar match and the relaxed pass.

use indexmap::IndexMap;

use super::normalize;
use super::{
    attribute_shape, resolve_aspect, totalize, LabelResolver, ParseOutcome, Predictions,
    RepairKind, RepairSet,
};
use crate::designspace::{DesignStrategy, LabelStyle, OutputFormat, Reasoning, UnmentionedHandling};
use crate::grammar;
use crate::schema::{AspectSchema, SentimentLabel};

pub(crate) fn parse(text: &str, strategy: &DesignStrategy, schema: &AspectSchema) -> ParseOutcome {
    let resolver = LabelResolver::new(schema, strategy.label_style);
    if let Some(labels) = strict(text, strategy, schema, &resolver) {
        return ParseOutcome {
            predictions: Predictions::Masa { labels },
            format_error: false,
            repairs: Vec::new(),
            residue: String::new(),
        };
    }
    relaxed(text, strategy, schema, &resolver)
}

// ---------------------------------------------------------------- strict --

fn strict(
    text: &str,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
    resolver: &LabelResolver,
) -> Option<IndexMap<String, SentimentLabel>> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return None;
    }
    let pu = strategy.unmentioned == UnmentionedHandling::Pu;
    if !pu && trimmed.eq_ignore_ascii_case(grammar::EMPTY_OUTPUT) {
        return Some(totalize(IndexMap::new(), schema, false, None));
    }
    let parsed = match strategy.output_format {
        OutputFormat::Lines => strict_lines(trimmed, strategy, schema, resolver)?,
        OutputFormat::Json => strict_json(trimmed, strategy, schema, resolver)?,
        OutputFormat::Natural => strict_natural(trimmed, strategy, schema, resolver)?,
    };
    if pu && parsed.len() != schema.aspects.len() {
        return None;
    }
    Some(totalize(parsed, schema, false, None))
}

fn strict_lines(
    trimmed: &str,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
    resolver: &LabelResolver,
) -> Option<IndexMap<String, SentimentLabel>> {
    let as_list = grammar::lines_as_list(strategy);
    let pu = strategy.unmentioned == UnmentionedHandling::Pu;
    let mut next = 0usize;
    let mut out = IndexMap::new();
    for line in trimmed.split('\n') {
        let (idx, rest) = strict_aspect_prefix(line, schema, next)?;
        if pu && idx != next {
            return None;
        }
        let label = strict_value(rest, strategy.reasoning, as_list, resolver)?;
        out.insert(schema.aspects[idx].clone(), label);
        next = idx + 1;
    }
    Some(out)
}

/// Match `"{aspect}: "` at the start of a line against schema aspects at
/// position `from` or later; longest aspect name wins.
fn strict_aspect_prefix<'a>(
    line: &'a str,
    schema: &AspectSchema,
    from: usize,
) -> Option<(usize, &'a str)> {
    let mut best: Option<(usize, &'a str)> = None;
    for (i, aspect) in schema.aspects.iter().enumerate().skip(from) {
        if let Some(rest) = strip_prefix_ignore_case(line, aspect) {
            if let Some(rest) = rest.strip_prefix(": ") {
                let better = match best {
                    Some((j, _)) => aspect.len() > schema.aspects[j].len(),
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

fn strip_prefix_ignore_case<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    if s.len() >= prefix.len()
        && s.is_char_boundary(prefix.len())
        && s[..prefix.len()].eq_ignore_ascii_case(prefix)
    {
        Some(&s[prefix.len()..])
    } else {
        None
    }
}

fn strict_value(
    rest: &str,
    reasoning: Reasoning,
    as_list: bool,
    resolver: &LabelResolver,
) -> Option<SentimentLabel> {
    match reasoning {
        Reasoning::NoCot => strict_slot(rest, as_list, resolver),
        Reasoning::Cot => {
            let (desc, token) = rest.rsplit_once(grammar::COT_SEPARATOR)?;
            if desc.is_empty() {
                return None;
            }
            strict_slot(token, as_list, resolver)
        }
        Reasoning::RCot => {
            let (token, desc) = rest.split_once(grammar::COT_SEPARATOR)?;
            if desc.is_empty() {
                return None;
            }
            strict_slot(token, as_list, resolver)
        }
    }
}

fn strict_slot(token: &str, as_list: bool, resolver: &LabelResolver) -> Option<SentimentLabel> {
    if as_list {
        if token == grammar::EMPTY_LIST {
            return Some(SentimentLabel::Unmentioned);
        }
        let inner = token.strip_prefix('[')?.strip_suffix(']')?;
        return resolver.strict(inner);
    }
    resolver.strict_token(token)
}

fn strict_natural(
    trimmed: &str,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
    resolver: &LabelResolver,
) -> Option<IndexMap<String, SentimentLabel>> {
    let pu = strategy.unmentioned == UnmentionedHandling::Pu;
    let mut pos = 0usize;
    let mut out = IndexMap::new();
    for aspect in &schema.aspects {
        let start = if out.is_empty() { pos } else { pos + 1 };
        let sep_ok = out.is_empty() || trimmed[pos..].starts_with(' ');
        if sep_ok && start <= trimmed.len() {
            if let Some((label, used)) =
                strict_sentence(&trimmed[start..], aspect, strategy.reasoning, resolver)
            {
                out.insert(aspect.clone(), label);
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

/// Match one canonical sentence for `aspect` at the start of `s`, returning
/// the recovered label and the consumed byte count.
fn strict_sentence(
    s: &str,
    aspect: &str,
    reasoning: Reasoning,
    resolver: &LabelResolver,
) -> Option<(SentimentLabel, usize)> {
    // "{aspect} is not mentioned."
    if let Some(rest) = strip_prefix_ignore_case(s, aspect) {
        if rest.starts_with(grammar::NATURAL_UNMENTIONED_TAIL) {
            return Some((
                SentimentLabel::Unmentioned,
                aspect.len() + grammar::NATURAL_UNMENTIONED_TAIL.len(),
            ));
        }
    }
    match reasoning {
        Reasoning::NoCot | Reasoning::RCot => {
            let p = s.strip_prefix(grammar::NATURAL_PREFIX)?;
            let p = strip_prefix_ignore_case(p, aspect)?;
            let p = p.strip_prefix(grammar::NATURAL_IS)?;
            let (token_len, label) = resolver.strict_prefix(p)?;
            let after = &p[token_len..];
            let base = grammar::NATURAL_PREFIX.len()
                + aspect.len()
                + grammar::NATURAL_IS.len()
                + token_len;
            if reasoning == Reasoning::NoCot {
                if !after.starts_with('.') {
                    return None;
                }
                Some((label, base + 1))
            } else {
                let after = after.strip_prefix(grammar::NATURAL_RCOT_INFIX)?;
                let dot = after.find('.')?;
                if dot == 0 {
                    return None;
                }
                Some((label, base + grammar::NATURAL_RCOT_INFIX.len() + dot + 1))
            }
        }
        Reasoning::Cot => {
            let p = s.strip_prefix(grammar::NATURAL_COT_PREFIX)?;
            let p = strip_prefix_ignore_case(p, aspect)?;
            let p = p.strip_prefix(", ")?;
            let mut search = 0usize;
            while let Some(offset) = p[search..].find(grammar::NATURAL_COT_INFIX) {
                let idx = search + offset;
                if idx > 0 {
                    let after = &p[idx + grammar::NATURAL_COT_INFIX.len()..];
                    if let Some((token_len, label)) = resolver.strict_prefix(after) {
                        if after[token_len..].starts_with('.') {
                            let used = grammar::NATURAL_COT_PREFIX.len()
                                + aspect.len()
                                + 2
                                + idx
                                + grammar::NATURAL_COT_INFIX.len()
                                + token_len
                                + 1;
                            return Some((label, used));
                        }
                    }
                }
                search = idx + 1;
            }
            None
        }
    }
}

fn expected_json_keys(reasoning: Reasoning) -> &'static [&'static str] {
    match reasoning {
        Reasoning::NoCot => &["aspect", "sentiment"],
        Reasoning::Cot => &["aspect", "description", "sentiment"],
        Reasoning::RCot => &["aspect", "sentiment", "description"],
    }
}

fn strict_json(
    trimmed: &str,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
    resolver: &LabelResolver,
) -> Option<IndexMap<String, SentimentLabel>> {
    let pu = strategy.unmentioned == UnmentionedHandling::Pu;
    let expected = expected_json_keys(strategy.reasoning);
    let mut next = 0usize;
    let mut out = IndexMap::new();
    for line in trimmed.split('\n') {
        let value: serde_json::Value = serde_json::from_str(line).ok()?;
        let obj = value.as_object()?;
        let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        if keys != expected {
            return None;
        }
        if strategy.reasoning != Reasoning::NoCot && !obj["description"].is_string() {
            return None;
        }
        let aspect = obj["aspect"].as_str()?;
        let idx = schema.aspect_index(aspect)?;
        if idx < next || (pu && idx != next) {
            return None;
        }
        let label = match &obj["sentiment"] {
            serde_json::Value::String(s) => resolver.strict(s)?,
            serde_json::Value::Number(n) if strategy.label_style == LabelStyle::Num => {
                resolver.strict(&n.to_string())?
            }
            _ => return None,
        };
        out.insert(schema.aspects[idx].clone(), label);
        next = idx + 1;
    }
    Some(out)
}

// --------------------------------------------------------------- relaxed --

fn relaxed(
    text: &str,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
    resolver: &LabelResolver,
) -> ParseOutcome {
    let mut repairs = RepairSet::default();
    let normalized = normalize::whitespace(text, strategy.output_format, &mut repairs);
    let mapped = normalize::punctuation(&normalized, &mut repairs);
    let pu = strategy.unmentioned == UnmentionedHandling::Pu;

    // Bare empty-output literal, tolerating case and a stray final period.
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
                predictions: Predictions::Masa {
                    labels: totalize(IndexMap::new(), schema, false, None),
                },
                format_error: true,
                repairs: repairs.into_vec(),
                residue: String::new(),
            };
        }
    }

    let mut parsed: IndexMap<String, SentimentLabel> = IndexMap::new();
    let mut residue: Vec<String> = Vec::new();
    match strategy.output_format {
        OutputFormat::Lines => relaxed_lines(
            &mapped, strategy, schema, resolver, &mut parsed, &mut repairs, &mut residue,
        ),
        OutputFormat::Json => relaxed_json(
            &mapped, strategy, schema, resolver, &mut parsed, &mut repairs, &mut residue,
        ),
        OutputFormat::Natural => relaxed_natural(
            &mapped, schema, resolver, &mut parsed, &mut repairs, &mut residue,
        ),
    }
    let residue_text = residue.join("\n");
    if !residue_text.trim().is_empty() {
        repairs.record(RepairKind::TrailingTextStripped);
    }
    let labels = totalize(parsed, schema, pu, Some(&mut repairs));
    ParseOutcome {
        predictions: Predictions::Masa { labels },
        format_error: true,
        repairs: repairs.into_vec(),
        residue: residue_text,
    }
}

#[allow(clippy::too_many_arguments)]
fn relaxed_lines(
    mapped: &str,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
    resolver: &LabelResolver,
    parsed: &mut IndexMap<String, SentimentLabel>,
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
        if !pu_line(strategy) && body.eq_ignore_ascii_case(grammar::EMPTY_OUTPUT) {
            // An empty-output marker mixed with other lines carries no
            // prediction; treat it as stripped prose.
            residue.push(line.to_string());
            continue;
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
        let Some(aspect) = resolve_aspect(lhs, schema, &mut local) else {
            residue.push(line.to_string());
            continue;
        };
        let value = rhs_raw.trim();
        let (desc_raw, token_raw) = split_reasoning_value(value, strategy.reasoning);
        let label = match resolve_token_relaxed(token_raw, as_list, resolver, &mut local) {
            Some(label) => label,
            None => {
                // Stray reasoning text glued to the value under a plain design.
                let recovered = if strategy.reasoning == Reasoning::NoCot && value.contains('|') {
                    value
                        .split('|')
                        .filter_map(|part| {
                            resolve_token_relaxed(part.trim(), as_list, resolver, &mut local)
                        })
                        .next()
                        .inspect(|_| local.record(RepairKind::TrailingTextStripped))
                } else {
                    None
                };
                match recovered {
                    Some(label) => label,
                    None => {
                        residue.push(line.to_string());
                        continue;
                    }
                }
            }
        };
        // Attribute pure shape deviations (separator spacing, scaffold case)
        // by comparing against a canonical reconstruction of this line.
        let canonical_value = match (strategy.reasoning, desc_raw) {
            (Reasoning::Cot, Some(desc)) => {
                format!("{}{}{}", desc.trim(), grammar::COT_SEPARATOR, token_raw.trim())
            }
            (Reasoning::RCot, Some(desc)) => {
                format!("{}{}{}", token_raw.trim(), grammar::COT_SEPARATOR, desc.trim())
            }
            _ => token_raw.trim().to_string(),
        };
        let canonical_line = grammar::masa_line(lhs_raw.trim(), &canonical_value);
        attribute_shape(body, &canonical_line, &mut local);
        if parsed.contains_key(aspect) {
            local.record(RepairKind::DuplicateAspectFirstWins);
        } else {
            parsed.insert(aspect.to_string(), label);
        }
        repairs.merge(local);
    }
}

fn pu_line(strategy: &DesignStrategy) -> bool {
    strategy.unmentioned == UnmentionedHandling::Pu
}

/// Split a line value into (description, token) according to the reasoning
/// design; tolerant of a missing separator.
fn split_reasoning_value(value: &str, reasoning: Reasoning) -> (Option<&str>, &str) {
    match reasoning {
        Reasoning::NoCot => (None, value),
        Reasoning::Cot => match value.rsplit_once('|') {
            Some((desc, token)) => (Some(desc), token),
            None => (None, value),
        },
        Reasoning::RCot => match value.split_once('|') {
            Some((token, desc)) => (Some(desc), token),
            None => (None, value),
        },
    }
}

/// Resolve a label token under the relaxed rules. Canonical forms resolve
/// without recording anything; every tolerated deviation records its kind.
fn resolve_token_relaxed(
    raw: &str,
    as_list: bool,
    resolver: &LabelResolver,
    repairs: &mut RepairSet,
) -> Option<SentimentLabel> {
    let t0 = raw.trim();
    if t0.is_empty() {
        return None;
    }
    // Canonical forms first, so lines that were fine on their own add no
    // repairs when some other line forced the relaxed pass.
    if as_list {
        if t0 == grammar::EMPTY_LIST {
            return Some(SentimentLabel::Unmentioned);
        }
        if let Some(inner) = bracket_inner(t0) {
            if let Some(label) = resolver.strict(inner) {
                return Some(label);
            }
        }
    } else if let Some(label) = resolver.strict_token(t0) {
        return Some(label);
    }

    let mut pending = RepairSet::default();
    let mut t = t0;
    let trimmed = t.trim_end_matches(['.', ',', ';', '!']);
    if trimmed.len() != t.len() {
        pending.record(RepairKind::PunctuationVariant);
        t = trimmed.trim_end();
    }
    if let Some(inner) = normalize::strip_quotes(t) {
        if !resolver.is_numeric_style() {
            pending.record(RepairKind::PunctuationVariant);
        }
        t = inner.trim();
    }
    if let Some(inner) = bracket_inner(t) {
        if !as_list {
            pending.record(RepairKind::PunctuationVariant);
        } else if inner.len() != inner.trim().len() {
            pending.record(RepairKind::WhitespaceNormalize);
        }
        t = inner.trim();
        if t.is_empty() {
            repairs.merge(pending);
            return Some(SentimentLabel::Unmentioned);
        }
    }
    let mut local = RepairSet::default();
    let label = resolver.relaxed(t, &mut local)?;
    repairs.merge(pending);
    repairs.merge(local);
    Some(label)
}

fn bracket_inner(s: &str) -> Option<&str> {
    s.strip_prefix('[')?.strip_suffix(']')
}

#[allow(clippy::too_many_arguments)]
fn relaxed_json(
    mapped: &str,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
    resolver: &LabelResolver,
    parsed: &mut IndexMap<String, SentimentLabel>,
    repairs: &mut RepairSet,
    residue: &mut Vec<String>,
) {
    let rows = collect_json_rows(mapped, repairs, residue);
    for row in rows {
        relaxed_json_row(&row, strategy, schema, resolver, parsed, repairs, residue);
    }
}

/// Gather JSON objects from the text: per line with quote/comma repairs,
/// falling back to parsing the whole text as one (pretty-printed) document.
pub(crate) fn collect_json_rows(
    mapped: &str,
    repairs: &mut RepairSet,
    residue: &mut Vec<String>,
) -> Vec<serde_json::Map<String, serde_json::Value>> {
    let mut rows = Vec::new();
    let mut failed: Vec<&str> = Vec::new();
    let mut stripped_fence = false;
    for line in mapped.lines() {
        let body = line.trim();
        if body.starts_with("```") {
            stripped_fence = true;
            continue;
        }
        match parse_json_fragment(body) {
            Some((value, fixed)) => {
                if fixed {
                    repairs.record(RepairKind::JsonQuoteRepair);
                }
                push_json_rows(value, &mut rows, repairs);
            }
            None => failed.push(line),
        }
    }
    if !failed.is_empty() {
        let whole: String = mapped
            .lines()
            .filter(|l| !l.trim().starts_with("```"))
            .collect::<Vec<_>>()
            .join("\n");
        if let Some((value, _)) = parse_json_fragment(&whole) {
            rows.clear();
            repairs.record(RepairKind::JsonQuoteRepair);
            push_json_rows(value, &mut rows, repairs);
            failed.clear();
        }
    }
    if stripped_fence {
        repairs.record(RepairKind::TrailingTextStripped);
    }
    residue.extend(failed.iter().map(|l| l.to_string()));
    rows
}

fn push_json_rows(
    value: serde_json::Value,
    rows: &mut Vec<serde_json::Map<String, serde_json::Value>>,
    repairs: &mut RepairSet,
) {
    match value {
        serde_json::Value::Object(obj) => rows.push(obj),
        serde_json::Value::Array(items) => {
            // An array wrapper is a structural deviation from object-per-line.
            repairs.record(RepairKind::JsonQuoteRepair);
            for item in items {
                if let serde_json::Value::Object(obj) = item {
                    rows.push(obj);
                }
            }
        }
        _ => {}
    }
}

/// Parse one JSON fragment, trying the quote/trailing-comma repairs.
/// Returns the value and whether a repair was needed.
fn parse_json_fragment(fragment: &str) -> Option<(serde_json::Value, bool)> {
    let body = fragment.trim();
    if body.is_empty() || !body.starts_with(['{', '[']) {
        return None;
    }
    if let Ok(v) = serde_json::from_str(body) {
        return Some((v, false));
    }
    let mut candidate = body.trim_end_matches(',').to_string();
    candidate = remove_trailing_commas(&candidate);
    if let Ok(v) = serde_json::from_str(&candidate) {
        return Some((v, true));
    }
    if !candidate.contains('"') && candidate.contains('\'') {
        let swapped = candidate.replace('\'', "\"");
        if let Ok(v) = serde_json::from_str(&swapped) {
            return Some((v, true));
        }
    }
    None
}

/// Drop commas that directly precede a closing brace/bracket.
fn remove_trailing_commas(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_string = false;
    let mut escaped = false;
    let chars: Vec<char> = s.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_string = true;
                out.push(c);
            }
            ',' => {
                let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
                if matches!(next, Some('}') | Some(']')) {
                    continue;
                }
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

fn relaxed_json_row(
    obj: &serde_json::Map<String, serde_json::Value>,
    strategy: &DesignStrategy,
    schema: &AspectSchema,
    resolver: &LabelResolver,
    parsed: &mut IndexMap<String, SentimentLabel>,
    repairs: &mut RepairSet,
    residue: &mut Vec<String>,
) {
    let mut local = RepairSet::default();
    let Some(aspect_value) = get_key_ci(obj, "aspect", &mut local) else {
        residue.push(compact_row(obj));
        return;
    };
    let Some(aspect_text) = aspect_value.as_str() else {
        residue.push(compact_row(obj));
        return;
    };
    let Some(aspect) = resolve_aspect(aspect_text.trim(), schema, &mut local) else {
        residue.push(compact_row(obj));
        return;
    };
    let Some(sentiment) = get_key_ci(obj, "sentiment", &mut local) else {
        residue.push(compact_row(obj));
        return;
    };
    let label = match sentiment {
        serde_json::Value::String(s) => resolve_token_relaxed(s, false, resolver, &mut local),
        serde_json::Value::Number(n) => {
            let _ = strategy;
            resolver.relaxed(&n.to_string(), &mut local)
        }
        _ => None,
    };
    let Some(label) = label else {
        residue.push(compact_row(obj));
        return;
    };
    if parsed.contains_key(aspect) {
        local.record(RepairKind::DuplicateAspectFirstWins);
    } else {
        parsed.insert(aspect.to_string(), label);
    }
    repairs.merge(local);
}

/// Case-insensitive key lookup; an inexact key casing is a case repair.
pub(crate) fn get_key_ci<'v>(
    obj: &'v serde_json::Map<String, serde_json::Value>,
    key: &str,
    repairs: &mut RepairSet,
) -> Option<&'v serde_json::Value> {
    if let Some(v) = obj.get(key) {
        return Some(v);
    }
    for (k, v) in obj {
        if k.eq_ignore_ascii_case(key) {
            repairs.record(RepairKind::CaseFold);
            return Some(v);
        }
    }
    None
}

pub(crate) fn compact_row(obj: &serde_json::Map<String, serde_json::Value>) -> String {
    serde_json::to_string(obj).unwrap_or_default()
}

#[allow(clippy::too_many_arguments)]
fn relaxed_natural(
    mapped: &str,
    schema: &AspectSchema,
    resolver: &LabelResolver,
    parsed: &mut IndexMap<String, SentimentLabel>,
    repairs: &mut RepairSet,
    residue: &mut Vec<String>,
) {
    let lower = mapped.to_ascii_lowercase();
    let mut matches: Vec<SentenceMatch> = Vec::new();
    for aspect in &schema.aspects {
        for name in aspect_search_names(aspect) {
            collect_sentence_matches(mapped, &lower, aspect, &name, resolver, &mut matches);
        }
    }
    matches.sort_by_key(|m| m.start);
    let mut covered: Vec<(usize, usize)> = Vec::new();
    for m in matches {
        if covered.iter().any(|&(s, e)| m.start < e && s < m.end) {
            continue;
        }
        covered.push((m.start, m.end));
        if parsed.contains_key(&m.aspect) {
            repairs.record(RepairKind::DuplicateAspectFirstWins);
            continue;
        }
        parsed.insert(m.aspect.clone(), m.label);
        if m.alias {
            repairs.record(RepairKind::AspectAlias);
        }
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

struct SentenceMatch {
    start: usize,
    end: usize,
    aspect: String,
    label: SentimentLabel,
    alias: bool,
    repairs: RepairSet,
}

/// Search names for an aspect: the canonical name plus alias-table entries
/// that map to it.
fn aspect_search_names(aspect: &str) -> Vec<String> {
    let mut names = vec![aspect.to_ascii_lowercase()];
    for (alias, canonical) in super::tables::aspect_aliases() {
        if canonical.eq_ignore_ascii_case(aspect) {
            names.push(alias.to_ascii_lowercase());
        }
    }
    names
}

/// Find every occurrence of any sentence form for (`aspect`, searched as
/// `name`) and extract its label.
#[allow(clippy::too_many_arguments)]
fn collect_sentence_matches(
    mapped: &str,
    lower: &str,
    aspect: &str,
    name: &str,
    resolver: &LabelResolver,
    out: &mut Vec<SentenceMatch>,
) {
    let alias = !name.eq_ignore_ascii_case(aspect);
    // "{name} is not mentioned"
    let unm_pattern = format!("{name} is not mentioned");
    for start in find_all(lower, &unm_pattern) {
        let mut end = start + unm_pattern.len();
        let mut repairs = RepairSet::default();
        if lower[end..].starts_with('.') {
            end += 1;
        } else {
            repairs.record(RepairKind::PunctuationVariant);
        }
        let canonical = grammar::natural_unmentioned(&mapped[start..start + name.len()]);
        let canonical = canonical.trim_end_matches('.');
        let consumed = mapped[start..end].trim_end_matches('.');
        attribute_shape(consumed, canonical, &mut repairs);
        out.push(SentenceMatch {
            start,
            end,
            aspect: aspect.to_string(),
            label: SentimentLabel::Unmentioned,
            alias,
            repairs,
        });
    }
    // "the sentiment toward {name} is {token}[, because {desc}]."
    let mention_pattern = format!(
        "{}{name}{}",
        grammar::NATURAL_PREFIX.to_ascii_lowercase(),
        grammar::NATURAL_IS
    );
    for start in find_all(lower, &mention_pattern) {
        let token_at = start + mention_pattern.len();
        if let Some(m) = extract_mentioned(
            mapped, lower, start, token_at, aspect, alias, resolver, false,
        ) {
            out.push(m);
        }
    }
    // "regarding {name}, {desc}, so the sentiment is {token}."
    let cot_prefix = format!(
        "{}{name}, ",
        grammar::NATURAL_COT_PREFIX.to_ascii_lowercase()
    );
    let cot_infix = grammar::NATURAL_COT_INFIX;
    for start in find_all(lower, &cot_prefix) {
        let Some(offset) = lower[start..].find(cot_infix) else {
            continue;
        };
        let token_at = start + offset + cot_infix.len();
        if let Some(m) = extract_mentioned(
            mapped, lower, start, token_at, aspect, alias, resolver, true,
        ) {
            out.push(m);
        }
    }
}

/// Extract the label starting at `token_at`, then consume the optional
/// reason tail and the closing period.
#[allow(clippy::too_many_arguments)]
fn extract_mentioned(
    mapped: &str,
    lower: &str,
    start: usize,
    token_at: usize,
    aspect: &str,
    alias: bool,
    resolver: &LabelResolver,
    cot_form: bool,
) -> Option<SentenceMatch> {
    let mut repairs = RepairSet::default();
    let rest = &lower[token_at..];
    let (token_len, label) = match resolver.strict_prefix(rest) {
        Some(hit) => hit,
        None => {
            let boundary = rest.find(['.', ',']).unwrap_or(rest.len());
            let candidate = rest[..boundary].trim();
            if candidate.is_empty() {
                return None;
            }
            let label = resolve_token_relaxed(candidate, false, resolver, &mut repairs)?;
            (boundary, label)
        }
    };
    let mut end = token_at + token_len;
    // Optional "(, because ...)" tail up to the closing period.
    if lower[end..].starts_with(grammar::NATURAL_RCOT_INFIX) {
        match lower[end..].find('.') {
            Some(dot) => end += dot,
            None => end = lower.len(),
        }
    }
    let mut found_period = false;
    if lower[end..].starts_with('.') {
        end += 1;
        found_period = true;
    }
    if !found_period {
        repairs.record(RepairKind::PunctuationVariant);
    }
    // Case/whitespace attribution on the scaffold before the token.
    let consumed_head = &mapped[start..token_at];
    let canonical_head = if cot_form {
        consumed_head.to_string()
    } else {
        let name_end = token_at - grammar::NATURAL_IS.len();
        let name_start = start + grammar::NATURAL_PREFIX.len();
        if name_start <= name_end && mapped.is_char_boundary(name_start) {
            format!(
                "{}{}{}",
                grammar::NATURAL_PREFIX,
                &mapped[name_start..name_end],
                grammar::NATURAL_IS
            )
        } else {
            consumed_head.to_string()
        }
    };
    attribute_shape(consumed_head, &canonical_head, &mut repairs);
    Some(SentenceMatch {
        start,
        end,
        aspect: aspect.to_string(),
        label,
        alias,
        repairs,
    })
}

fn find_all(haystack: &str, needle: &str) -> Vec<usize> {
    let mut positions = Vec::new();
    let mut from = 0usize;
    while let Some(offset) = haystack[from..].find(needle) {
        let at = from + offset;
        // Require a word boundary before the match so "food" does not hit
        // inside "seafood".
        let boundary = at == 0
            || !haystack[..at]
                .chars()
                .next_back()
                .is_some_and(|c| c.is_alphanumeric());
        if boundary {
            positions.push(at);
        }
        from = at + 1;
    }
    positions
}
