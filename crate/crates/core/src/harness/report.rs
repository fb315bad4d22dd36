//! Baseline-relative comparison and average rankings over score grids.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::EvalReport;
use crate::error::{Error, Result};

/// Headline-metric deltas of each labelled report against a baseline report.
pub fn compare_to_baseline(
    reports: &IndexMap<String, EvalReport>,
    baseline: &str,
) -> Result<IndexMap<String, f64>> {
    let Some(base) = reports.get(baseline) else {
        return Err(Error::validation(format!(
            "baseline '{baseline}' not among reports ({})",
            reports.keys().cloned().collect::<Vec<_>>().join(", ")
        )));
    };
    let base_metric = base.headline();
    Ok(reports
        .iter()
        .map(|(label, report)| (label.clone(), report.headline() - base_metric))
        .collect())
}

/// Scores of each option across evaluation cells (task, train size, model...).
/// Rows are options, columns are cells; every row scores every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreGrid {
    pub options: Vec<String>,
    pub cells: Vec<String>,
    /// Row-major: `scores[option][cell]`.
    pub scores: Vec<Vec<f64>>,
}

impl ScoreGrid {
    pub fn new(options: Vec<String>, cells: Vec<String>, scores: Vec<Vec<f64>>) -> Result<ScoreGrid> {
        if options.len() != scores.len() {
            return Err(Error::validation(format!(
                "{} options but {} score rows",
                options.len(),
                scores.len()
            )));
        }
        for (option, row) in options.iter().zip(&scores) {
            if row.len() != cells.len() {
                return Err(Error::validation(format!(
                    "ragged grid: option '{option}' scores {} cells, expected {}",
                    row.len(),
                    cells.len()
                )));
            }
        }
        if cells.is_empty() {
            return Err(Error::validation("grid has no cells"));
        }
        Ok(ScoreGrid {
            options,
            cells,
            scores,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<ScoreGrid> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let grid: ScoreGrid = serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: invalid grid: {e}", path.display())))?;
        ScoreGrid::new(grid.options, grid.cells, grid.scores)
    }

    /// Mean score of one option across all cells, uniform over cells.
    pub fn mean(&self, option: &str) -> Result<f64> {
        let idx = self
            .options
            .iter()
            .position(|o| o == option)
            .ok_or_else(|| Error::validation(format!("unknown option '{option}'")))?;
        let row = &self.scores[idx];
        Ok(row.iter().sum::<f64>() / row.len() as f64)
    }

    /// Cell-averaged delta of every option against the baseline option.
    pub fn baseline_deltas(&self, baseline: &str) -> Result<IndexMap<String, f64>> {
        let base = self.mean(baseline)?;
        self.options
            .iter()
            .map(|o| Ok((o.clone(), self.mean(o)? - base)))
            .collect()
    }
}

/// Mean rank of each option across cells; rank 1 is best, ties averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingSummary {
    pub mean_ranks: IndexMap<String, f64>,
}

/// Rank options within each cell by descending score (ties share the average
/// of the ranks they straddle), then average ranks over cells.
pub fn average_rankings(grid: &ScoreGrid) -> Result<RankingSummary> {
    let k = grid.options.len();
    if k == 0 {
        return Err(Error::validation("grid has no options"));
    }
    let mut sums = vec![0.0f64; k];
    for cell in 0..grid.cells.len() {
        let scores: Vec<f64> = (0..k).map(|o| grid.scores[o][cell]).collect();
        let ranks = rank_descending(&scores);
        for (o, r) in ranks.iter().enumerate() {
            sums[o] += r;
        }
    }
    let n_cells = grid.cells.len() as f64;
    let mean_ranks = grid
        .options
        .iter()
        .zip(&sums)
        .map(|(o, s)| (o.clone(), s / n_cells))
        .collect();
    Ok(RankingSummary { mean_ranks })
}

/// Competition ranks with tie-averaging; highest score gets rank 1.
fn rank_descending(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![0.0f64; scores.len()];
    let mut i = 0usize;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Positions i..=j share the average of ranks i+1..=j+1.
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}
