//! Versioned lookup tables for the relaxed pass.
//!
//! The tables live as JSON fixtures in the crate so changes to the accepted
//! expressions are reviewable data edits, not code edits. Keys are matched
//! after lowercasing and whitespace collapsing.

use std::collections::HashMap;
use std::sync::OnceLock;

const LABEL_SYNONYMS_JSON: &str = include_str!("../../fixtures/label_synonyms.json");
const ASPECT_ALIASES_JSON: &str = include_str!("../../fixtures/aspect_aliases.json");

/// Non-canonical label expressions -> canonical label name.
pub fn label_synonyms() -> &'static HashMap<String, String> {
    static TABLE: OnceLock<HashMap<String, String>> = OnceLock::new();
    TABLE.get_or_init(|| {
        serde_json::from_str(LABEL_SYNONYMS_JSON).expect("label synonym fixture is valid JSON")
    })
}

/// Non-canonical aspect/type expressions -> canonical name.
pub fn aspect_aliases() -> &'static HashMap<String, String> {
    static TABLE: OnceLock<HashMap<String, String>> = OnceLock::new();
    TABLE.get_or_init(|| {
        serde_json::from_str(ASPECT_ALIASES_JSON).expect("aspect alias fixture is valid JSON")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_load_and_map_to_canonical_labels() {
        let synonyms = label_synonyms();
        assert_eq!(synonyms.get("pos").map(String::as_str), Some("positive"));
        for target in synonyms.values() {
            assert!(
                crate::schema::SentimentLabel::from_canonical(target).is_some(),
                "synonym target '{target}' is not a canonical label"
            );
        }
        assert!(!aspect_aliases().is_empty());
    }
}
