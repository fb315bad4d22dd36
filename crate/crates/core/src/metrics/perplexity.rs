//! Perplexity from externally computed per-token negative log-likelihoods.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Perplexity over a token selection: exp of the mean NLL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerplexityResult {
    pub token_count: usize,
    pub mean_nll: f64,
    pub ppl: f64,
}

/// Compute perplexity. With a context boundary only tokens after it count,
/// i.e. the text before the boundary is treated as conditioning context.
pub fn perplexity(nlls: &[f64], context_boundary: Option<usize>) -> Result<PerplexityResult> {
    if nlls.is_empty() {
        return Err(Error::validation("empty NLL sequence"));
    }
    if let Some(nll) = nlls.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::validation(format!(
            "NLL values must be finite and non-negative, got {nll}"
        )));
    }
    let selected = match context_boundary {
        Some(boundary) => {
            if boundary >= nlls.len() {
                return Err(Error::validation(format!(
                    "context boundary {boundary} leaves no tokens (sequence length {})",
                    nlls.len()
                )));
            }
            &nlls[boundary..]
        }
        None => nlls,
    };
    let mean_nll = selected.iter().sum::<f64>() / selected.len() as f64;
    Ok(PerplexityResult {
        token_count: selected.len(),
        mean_nll,
        ppl: mean_nll.exp(),
    })
}

/// One line of a log-likelihood file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NllRecord {
    pub id: String,
    pub nlls: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_boundary: Option<usize>,
}

/// Load a JSONL file of per-token NLL sequences.
pub fn load_nll_file(path: &std::path::Path) -> Result<Vec<NllRecord>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: NllRecord = serde_json::from_str(line).map_err(|e| Error::MalformedLine {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_nll_gives_exp_of_the_constant() {
        let c = std::f64::consts::LN_2;
        let result = perplexity(&[c, c], None).unwrap();
        assert_eq!(result.mean_nll, c);
        assert_eq!(result.ppl, c.exp());
        assert!((result.ppl - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_nll_gives_ppl_one() {
        let result = perplexity(&[0.0, 0.0, 0.0], None).unwrap();
        assert_eq!(result.ppl, 1.0);
    }

    #[test]
    fn boundary_selects_only_following_tokens() {
        let nlls = [2f64.ln(), 8f64.ln()];
        let result = perplexity(&nlls, Some(1)).unwrap();
        assert_eq!(result.token_count, 1);
        assert!((result.ppl - 8.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_at_end_is_an_error() {
        assert!(perplexity(&[0.5, 0.5], Some(2)).is_err());
        assert!(perplexity(&[], None).is_err());
    }
}
