//! Canonical response grammar shared by the renderer and the parser.
//!
//! Every rendered response is assembled from the pieces here, and the strict
//! parsing pass matches against the same pieces, so rendered output is
//! strict-parseable by construction.

use crate::designspace::{DesignStrategy, LabelStyle, OutputFormat, Reasoning};
use crate::schema::{AspectSchema, SentimentLabel};

/// Separator between a reasoning description and the label on one line.
pub const COT_SEPARATOR: &str = " | ";
/// Separator between span mentions in the lines and natural grammars.
pub const MENTION_SEPARATOR: &str = "; ";
/// Separator between span mentions inside a bracketed list value.
pub const LIST_SEPARATOR: &str = ", ";
/// Rendered when an omit-unmentioned response would otherwise be empty.
pub const EMPTY_OUTPUT: &str = "none";
/// Empty list value for span lines with no mentions.
pub const EMPTY_LIST: &str = "[]";
/// Description text used for unmentioned targets under reasoning designs.
pub const UNMENTIONED_DESCRIPTION: &str = "not mentioned";

pub const NATURAL_PREFIX: &str = "The sentiment toward ";
pub const NATURAL_IS: &str = " is ";
pub const NATURAL_UNMENTIONED_TAIL: &str = " is not mentioned.";
pub const NATURAL_COT_PREFIX: &str = "Regarding ";
pub const NATURAL_COT_INFIX: &str = ", so the sentiment is ";
pub const NATURAL_RCOT_INFIX: &str = ", because ";
pub const SPAN_NATURAL_PREFIX: &str = "The ";
pub const SPAN_NATURAL_MENTIONS_ARE: &str = " mentions are ";
pub const SPAN_NATURAL_NONE_PREFIX: &str = "There are no ";
pub const SPAN_NATURAL_NONE_TAIL: &str = " mentions.";

/// The token rendered in a label slot.
pub fn label_token(schema: &AspectSchema, style: LabelStyle, label: SentimentLabel) -> String {
    match style {
        LabelStyle::Txt => {
            if label == SentimentLabel::Unmentioned {
                schema.placeholder_token.clone()
            } else {
                label.as_str().to_string()
            }
        }
        LabelStyle::Num => schema
            .numeric_label_map
            .get(&label)
            .cloned()
            .unwrap_or_else(|| label.as_str().to_string()),
    }
}

/// Every token the strict pass accepts, with the label it decodes to.
/// Longer tokens first so greedy matching never truncates (`-1` vs `1`).
pub fn valid_label_tokens(schema: &AspectSchema, style: LabelStyle) -> Vec<(String, SentimentLabel)> {
    let mut tokens: Vec<(String, SentimentLabel)> = SentimentLabel::ALL
        .iter()
        .map(|&l| (label_token(schema, style, l), l))
        .collect();
    tokens.sort_by_key(|(token, _)| std::cmp::Reverse(token.len()));
    tokens
}

/// Make description text safe to embed in the line/natural grammars:
/// collapse whitespace and replace characters that collide with the grammar
/// separators. JSON needs no sanitation (values are escaped).
pub fn sanitize_description(desc: &str, format: OutputFormat) -> String {
    let collapsed = collapse_whitespace(desc);
    match format {
        OutputFormat::Json => collapsed,
        OutputFormat::Lines => collapsed.replace('|', "/"),
        OutputFormat::Natural => collapsed.replace('|', "/").replace('.', ";"),
    }
}

/// Make a span mention safe to embed in the separator-based grammars.
pub fn sanitize_mention(mention: &str, format: OutputFormat, as_list: bool) -> String {
    let collapsed = collapse_whitespace(mention);
    match format {
        OutputFormat::Json => collapsed,
        _ if as_list => collapse_whitespace(&collapsed.replace(',', " ")),
        _ => collapsed.replace(';', ","),
    }
}

pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// The value side of one sentiment line ("positive", "desc | positive", ...).
pub fn masa_line_value(
    token: &str,
    description: Option<&str>,
    reasoning: Reasoning,
    as_list: bool,
) -> String {
    let slot = if as_list {
        if token.is_empty() {
            EMPTY_LIST.to_string()
        } else {
            format!("[{token}]")
        }
    } else {
        token.to_string()
    };
    match (reasoning, description) {
        (Reasoning::Cot, Some(desc)) => format!("{desc}{COT_SEPARATOR}{slot}"),
        (Reasoning::RCot, Some(desc)) => format!("{slot}{COT_SEPARATOR}{desc}"),
        _ => slot,
    }
}

/// One canonical sentiment line: `aspect: value`.
pub fn masa_line(aspect: &str, value: &str) -> String {
    format!("{aspect}: {value}")
}

/// One canonical natural-format sentence for a mentioned aspect.
pub fn natural_mentioned(
    aspect: &str,
    token: &str,
    description: Option<&str>,
    reasoning: Reasoning,
) -> String {
    match (reasoning, description) {
        (Reasoning::Cot, Some(desc)) => {
            format!("{NATURAL_COT_PREFIX}{aspect}, {desc}{NATURAL_COT_INFIX}{token}.")
        }
        (Reasoning::RCot, Some(desc)) => {
            format!("{NATURAL_PREFIX}{aspect}{NATURAL_IS}{token}{NATURAL_RCOT_INFIX}{desc}.")
        }
        _ => format!("{NATURAL_PREFIX}{aspect}{NATURAL_IS}{token}."),
    }
}

/// The natural-format sentence for an unmentioned aspect (placeholder mode).
pub fn natural_unmentioned(aspect: &str) -> String {
    format!("{aspect}{NATURAL_UNMENTIONED_TAIL}")
}

/// One canonical JSON object line for the sentiment task.
pub fn json_masa_line(
    aspect: &str,
    token: &str,
    description: Option<&str>,
    reasoning: Reasoning,
) -> String {
    let mut obj = indexmap::IndexMap::new();
    obj.insert("aspect", aspect);
    match reasoning {
        Reasoning::Cot => {
            obj.insert("description", description.unwrap_or(UNMENTIONED_DESCRIPTION));
            obj.insert("sentiment", token);
        }
        Reasoning::RCot => {
            obj.insert("sentiment", token);
            obj.insert("description", description.unwrap_or(UNMENTIONED_DESCRIPTION));
        }
        Reasoning::NoCot => {
            obj.insert("sentiment", token);
        }
    }
    serde_json::to_string(&obj).expect("string map serializes")
}

/// One canonical span line: `type: m1; m2`, `type: [m1, m2]` or `type: []`.
pub fn span_line(type_name: &str, mentions: &[String], as_list: bool) -> String {
    if mentions.is_empty() {
        return format!("{type_name}: {EMPTY_LIST}");
    }
    if as_list {
        format!("{type_name}: [{}]", mentions.join(LIST_SEPARATOR))
    } else {
        format!("{type_name}: {}", mentions.join(MENTION_SEPARATOR))
    }
}

/// One canonical natural-format sentence for a span type.
pub fn span_natural(type_name: &str, mentions: &[String]) -> String {
    if mentions.is_empty() {
        format!("{SPAN_NATURAL_NONE_PREFIX}{type_name}{SPAN_NATURAL_NONE_TAIL}")
    } else {
        format!(
            "{SPAN_NATURAL_PREFIX}{type_name}{SPAN_NATURAL_MENTIONS_ARE}{}.",
            mentions.join(MENTION_SEPARATOR)
        )
    }
}

/// One canonical JSON object line for a span type.
pub fn json_span_line(type_name: &str, mentions: &[String]) -> String {
    let mut obj = indexmap::IndexMap::new();
    obj.insert(
        "type".to_string(),
        serde_json::Value::String(type_name.to_string()),
    );
    obj.insert(
        "mentions".to_string(),
        serde_json::Value::Array(
            mentions
                .iter()
                .map(|m| serde_json::Value::String(m.clone()))
                .collect(),
        ),
    );
    serde_json::to_string(&obj).expect("string map serializes")
}

/// How rows of a response are joined for a given format.
pub fn row_separator(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Natural => " ",
        OutputFormat::Lines | OutputFormat::Json => "\n",
    }
}

/// Whether this strategy renders the bracketed-list flavor of lines.
pub fn lines_as_list(strategy: &DesignStrategy) -> bool {
    strategy.lines_as_list && strategy.output_format == OutputFormat::Lines
}
