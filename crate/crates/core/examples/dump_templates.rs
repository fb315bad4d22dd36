//! Print a built-in prompt template as JSON, for use as a starting point
//! for custom template files.
//!
//! Usage: cargo run --example dump_templates -- [masa|span]

use sde_core::{PromptTemplate, TaskKind};

fn main() {
    let kind = match std::env::args().nth(1).as_deref() {
        Some("span") => TaskKind::Span,
        _ => TaskKind::Masa,
    };
    let template = PromptTemplate::default_for(kind);
    println!("{}", serde_json::to_string_pretty(&template).unwrap());
}
