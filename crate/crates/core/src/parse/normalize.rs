//! Textual normalization stages of the relaxed pass.

use super::{RepairKind, RepairSet};
use crate::designspace::OutputFormat;

/// Stage R1: canonical whitespace. CRLF to LF, tabs to spaces, trimmed line
/// edges, collapsed space runs, empty lines dropped. The natural format is a
/// single stream, so newlines become spaces there.
pub(crate) fn whitespace(text: &str, format: OutputFormat, repairs: &mut RepairSet) -> String {
    let unified = text.replace("\r\n", "\n").replace('\r', "\n").replace('\t', " ");
    let lines: Vec<String> = unified
        .lines()
        .map(collapse_line)
        .filter(|l| !l.is_empty())
        .collect();
    let joined = match format {
        OutputFormat::Natural => lines.join(" "),
        OutputFormat::Lines | OutputFormat::Json => lines.join("\n"),
    };
    if joined != text.trim() {
        repairs.record(RepairKind::WhitespaceNormalize);
    }
    joined
}

fn collapse_line(line: &str) -> String {
    line.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Stage R2: full-width and typographic punctuation to the ASCII forms the
/// grammar uses. The full-width colon family maps to "<ascii><space>" so a
/// missing space after it does not additionally count as a whitespace repair.
pub(crate) fn punctuation(text: &str, repairs: &mut RepairSet) -> String {
    let mut out = String::with_capacity(text.len());
    let mut changed = false;
    for c in text.chars() {
        let mapped: Option<&str> = match c {
            '：' => Some(": "),
            '；' => Some("; "),
            '，' | '、' => Some(", "),
            '。' => Some("."),
            '｜' => Some(" | "),
            '［' | '【' => Some("["),
            '］' | '】' => Some("]"),
            '｛' => Some("{"),
            '｝' => Some("}"),
            '（' => Some("("),
            '）' => Some(")"),
            '＂' | '“' | '”' | '「' | '」' => Some("\""),
            '‘' | '’' => Some("'"),
            '　' => Some(" "),
            '－' => Some("-"),
            '！' => Some("!"),
            '？' => Some("?"),
            '０'..='９' => {
                changed = true;
                out.push(char::from(b'0' + (c as u32 - '０' as u32) as u8));
                continue;
            }
            _ => None,
        };
        match mapped {
            Some(s) => {
                changed = true;
                out.push_str(s);
            }
            None => out.push(c),
        }
    }
    if !changed {
        return text.to_string();
    }
    repairs.record(RepairKind::PunctuationVariant);
    // Re-collapse any doubled spaces the mapping introduced; attribution
    // stays with the punctuation stage.
    let mut cleaned = String::with_capacity(out.len());
    let mut last_space = false;
    for c in out.chars() {
        if c == ' ' {
            if last_space {
                continue;
            }
            last_space = true;
        } else {
            last_space = false;
        }
        cleaned.push(c);
    }
    cleaned
        .lines()
        .map(|l| l.trim_end().to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Strip one layer of matched surrounding quotes.
pub(crate) fn strip_quotes(s: &str) -> Option<&str> {
    let t = s.trim();
    for (open, close) in [('"', '"'), ('\'', '\''), ('`', '`')] {
        if t.len() >= 2 && t.starts_with(open) && t.ends_with(close) {
            return Some(&t[open.len_utf8()..t.len() - close.len_utf8()]);
        }
    }
    None
}

/// Strip leading list bullets like "- ", "* ", "1. ".
pub(crate) fn strip_bullet(line: &str) -> Option<&str> {
    for prefix in ["- ", "* ", "• "] {
        if let Some(rest) = line.strip_prefix(prefix) {
            return Some(rest);
        }
    }
    let digits: usize = line.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 {
        let rest = &line[digits..];
        for sep in [". ", ") "] {
            if let Some(rest) = rest.strip_prefix(sep) {
                return Some(rest);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fullwidth_colon_gains_a_space() {
        let mut repairs = RepairSet::default();
        let out = punctuation("food：positive", &mut repairs);
        assert_eq!(out, "food: positive");
        assert_eq!(repairs.into_vec(), vec![RepairKind::PunctuationVariant]);
    }

    #[test]
    fn fullwidth_colon_with_space_does_not_double() {
        let mut repairs = RepairSet::default();
        let out = punctuation("food： positive", &mut repairs);
        assert_eq!(out, "food: positive");
        assert_eq!(repairs.into_vec(), vec![RepairKind::PunctuationVariant]);
    }

    #[test]
    fn clean_text_records_nothing() {
        let mut repairs = RepairSet::default();
        let text = "food: positive\nprice: unmentioned";
        assert_eq!(whitespace(text, OutputFormat::Lines, &mut repairs), text);
        assert_eq!(punctuation(text, &mut repairs), text);
        assert!(repairs.into_vec().is_empty());
    }

    #[test]
    fn crlf_and_blank_lines_are_whitespace_repairs() {
        let mut repairs = RepairSet::default();
        let out = whitespace("food: positive\r\n\r\nprice: negative\r\n", OutputFormat::Lines, &mut repairs);
        assert_eq!(out, "food: positive\nprice: negative");
        assert_eq!(repairs.into_vec(), vec![RepairKind::WhitespaceNormalize]);
    }
}
