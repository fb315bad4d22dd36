//! JSON-lines corpus loading and saving.
//!
//! One record per line. Loading validates every record against the schema
//! (when given) and preserves file order; saving is byte-stable so that a
//! save/load cycle is the identity on validated corpora.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::schema::{AspectSchema, MasaRecord, SpanRecord, TaskKind, TaskRecord, validate_record};

/// Load a corpus file. Fails on the first malformed line (with its line
/// number) or the first record violating an invariant.
pub fn load_corpus(
    path: &Path,
    kind: TaskKind,
    schema: Option<&AspectSchema>,
) -> Result<Vec<TaskRecord>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = match kind {
            TaskKind::Masa => serde_json::from_str::<MasaRecord>(line)
                .map(TaskRecord::Masa)
                .map_err(|e| Error::MalformedLine {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: e.to_string(),
                })?,
            TaskKind::Span => serde_json::from_str::<SpanRecord>(line)
                .map(TaskRecord::Span)
                .map_err(|e| Error::MalformedLine {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: e.to_string(),
                })?,
        };
        let violations = validate_record(&record, schema);
        if let Some(first) = violations.first() {
            return Err(Error::validation(format!(
                "{}:{}: {first}",
                path.display(),
                i + 1
            )));
        }
        records.push(record);
    }
    Ok(records)
}

/// Write a corpus as JSON lines. Field order follows each record's own map
/// order, so saving a loaded or generated corpus is deterministic.
pub fn save_corpus(path: &Path, records: &[TaskRecord]) -> Result<()> {
    let mut out = Vec::new();
    for record in records {
        let line = match record {
            TaskRecord::Masa(r) => serde_json::to_string(r),
            TaskRecord::Span(r) => serde_json::to_string(r),
        }
        .map_err(|e| Error::validation(format!("cannot serialize record: {e}")))?;
        out.extend_from_slice(line.as_bytes());
        out.push(b'\n');
    }
    let mut file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    file.write_all(&out).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
