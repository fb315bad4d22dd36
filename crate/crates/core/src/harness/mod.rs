//! Experiment harness: run manifests, dataset emission, prediction scoring,
//! baseline deltas and average rankings.

mod report;

pub use report::{average_rankings, compare_to_baseline, RankingSummary, ScoreGrid};

use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::corpus;
use crate::designspace::DesignStrategy;
use crate::error::{Error, Result};
use crate::metrics::{
    build_confusion, format_error_rate, slot_accuracy, span_f1, weighted_kappa, KappaResult,
    MatchMode, MatchScore, WeightMatrix,
};
use crate::parse::{batch_parse, ParseOutcome};
use crate::render::{render_eval_prompt, render_sample, TrainingSample};
use crate::schema::{AspectSchema, TaskKind, TaskRecord};
use crate::template::PromptTemplate;

/// Everything needed to reproduce one run's dataset and scoring.
/// `trainer_metadata` is opaque pass-through for the external trainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub task_id: String,
    pub strategy: DesignStrategy,
    pub train_size: usize,
    pub instruction_variant: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decode_seed: Option<u64>,
    #[serde(default)]
    pub trainer_metadata: IndexMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(
        run_id: impl Into<String>,
        task_id: impl Into<String>,
        strategy: DesignStrategy,
        train_size: usize,
    ) -> RunManifest {
        RunManifest {
            run_id: run_id.into(),
            task_id: task_id.into(),
            strategy,
            train_size,
            instruction_variant: 0,
            decode_seed: None,
            trainer_metadata: default_trainer_metadata(),
        }
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: invalid manifest: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::validation(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Default fine-tuning hyperparameters recorded into every manifest.
pub fn default_trainer_metadata() -> IndexMap<String, serde_json::Value> {
    let mut m = IndexMap::new();
    m.insert("learning_rate".to_string(), serde_json::json!(1e-4));
    m.insert("batch_size".to_string(), serde_json::json!(4));
    m.insert("lora_rank".to_string(), serde_json::json!(8));
    m.insert("lora_alpha".to_string(), serde_json::json!(32));
    m.insert("lora_dropout".to_string(), serde_json::json!(0.1));
    m
}

/// Files written by [`emit_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmittedRun {
    pub samples: PathBuf,
    pub eval_prompts: PathBuf,
    pub manifest: PathBuf,
}

/// One line of the eval-prompt file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPrompt {
    pub id: String,
    pub prompt: String,
}

/// Write the run's training samples (first `train_size` records), zero-shot
/// eval prompts for the remaining records, and the manifest. Deterministic.
pub fn emit_run(
    manifest: &RunManifest,
    records: &[TaskRecord],
    schema: &AspectSchema,
    template: &PromptTemplate,
    out_dir: &Path,
) -> Result<EmittedRun> {
    if records.len() < manifest.train_size {
        return Err(Error::validation(format!(
            "corpus has {} records, fewer than train_size {}",
            records.len(),
            manifest.train_size
        )));
    }
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let (train, test) = records.split_at(manifest.train_size);

    let samples: Vec<TrainingSample> = train
        .iter()
        .map(|r| {
            render_sample(r, schema, &manifest.strategy, template, manifest.instruction_variant)
                .map_err(|e| crate::render::with_record_context(r.id(), e))
        })
        .collect::<Result<_>>()?;
    let samples_path = out_dir.join(format!("{}.samples.jsonl", manifest.run_id));
    write_jsonl(&samples_path, &samples)?;

    let prompts: Vec<EvalPrompt> = test
        .iter()
        .map(|r| {
            render_eval_prompt(r, schema, &manifest.strategy, template, &[], manifest.instruction_variant)
                .map(|prompt| EvalPrompt {
                    id: r.id().to_string(),
                    prompt,
                })
                .map_err(|e| crate::render::with_record_context(r.id(), e))
        })
        .collect::<Result<_>>()?;
    let prompts_path = out_dir.join(format!("{}.eval_prompts.jsonl", manifest.run_id));
    write_jsonl(&prompts_path, &prompts)?;

    let manifest_path = out_dir.join(format!("{}.manifest.json", manifest.run_id));
    manifest.save(&manifest_path)?;
    Ok(EmittedRun {
        samples: samples_path,
        eval_prompts: prompts_path,
        manifest: manifest_path,
    })
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = String::new();
    for row in rows {
        let line = serde_json::to_string(row)
            .map_err(|e| Error::validation(format!("cannot serialize row: {e}")))?;
        out.push_str(&line);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Per-run metric bundle; fields present match the task kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub run_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<KappaResult>,
    pub error_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1_hard: Option<MatchScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1_soft: Option<MatchScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub per_aspect_kappa: IndexMap<String, Option<f64>>,
}

impl EvalReport {
    /// The headline metric: kappa for sentiment tasks, soft F1 for span
    /// tasks.
    pub fn headline(&self) -> f64 {
        if let Some(kappa) = &self.kappa {
            kappa.kappa
        } else if let Some(f1) = &self.f1_soft {
            f1.f1
        } else {
            f64::NAN
        }
    }

    pub fn load(path: &Path) -> Result<EvalReport> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: invalid report: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::validation(format!("cannot serialize report: {e}")))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Parse raw predictions under the manifest's strategy and compute the
/// metric bundle against the gold records. Prediction ids must cover the
/// gold records exactly.
pub fn score_run(
    manifest: &RunManifest,
    gold: &[TaskRecord],
    schema: &AspectSchema,
    predictions: &[(String, String)],
) -> Result<EvalReport> {
    if gold.is_empty() {
        return Err(Error::validation("no gold records to score against"));
    }
    let kind = match gold[0] {
        TaskRecord::Masa(_) => TaskKind::Masa,
        TaskRecord::Span(_) => TaskKind::Span,
    };
    let by_id: IndexMap<&str, &str> = predictions
        .iter()
        .map(|(id, text)| (id.as_str(), text.as_str()))
        .collect();
    if by_id.len() != predictions.len() {
        return Err(Error::validation("duplicate prediction ids"));
    }
    let missing: Vec<&str> = gold
        .iter()
        .map(TaskRecord::id)
        .filter(|id| !by_id.contains_key(id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::validation(format!(
            "missing predictions for ids: {}",
            missing.join(", ")
        )));
    }
    let gold_ids: std::collections::HashSet<&str> = gold.iter().map(TaskRecord::id).collect();
    let extra: Vec<&str> = predictions
        .iter()
        .map(|(id, _)| id.as_str())
        .filter(|id| !gold_ids.contains(id))
        .collect();
    if !extra.is_empty() {
        return Err(Error::validation(format!(
            "predictions for unknown ids: {}",
            extra.join(", ")
        )));
    }
    // Align predictions to gold order.
    let aligned: Vec<(String, String)> = gold
        .iter()
        .map(|r| (r.id().to_string(), by_id[r.id()].to_string()))
        .collect();
    let outcomes = batch_parse(&aligned, &manifest.strategy, schema, kind)?;
    let bare_outcomes: Vec<ParseOutcome> = outcomes.iter().map(|(_, o)| o.clone()).collect();
    let error_rate = format_error_rate(&bare_outcomes)?;

    match kind {
        TaskKind::Masa => {
            let masa_gold: Vec<_> = gold
                .iter()
                .filter_map(|r| r.as_masa().cloned())
                .collect();
            let (pooled, per_aspect) = build_confusion(&masa_gold, &outcomes, schema)?;
            let kappa = weighted_kappa(&pooled, &WeightMatrix::default())?;
            let accuracy = slot_accuracy(&masa_gold, &outcomes, schema)?;
            let per_aspect_kappa = per_aspect
                .iter()
                .map(|(aspect, conf)| {
                    let k = weighted_kappa(conf, &WeightMatrix::default())
                        .ok()
                        .map(|r| r.kappa);
                    (aspect.clone(), k)
                })
                .collect();
            Ok(EvalReport {
                run_id: manifest.run_id.clone(),
                kappa: Some(kappa),
                error_rate,
                f1_hard: None,
                f1_soft: None,
                accuracy: Some(accuracy),
                per_aspect_kappa,
            })
        }
        TaskKind::Span => {
            let span_gold: Vec<_> = gold
                .iter()
                .filter_map(|r| r.as_span().cloned())
                .collect();
            let span_predictions: Vec<(String, Vec<(String, String)>)> = outcomes
                .iter()
                .map(|(id, outcome)| {
                    let spans = outcome
                        .spans()
                        .unwrap_or_default()
                        .iter()
                        .map(|s| (s.type_name.clone(), s.mention.clone()))
                        .collect();
                    (id.clone(), spans)
                })
                .collect();
            let hard = span_f1(&span_gold, &span_predictions, MatchMode::Hard)?;
            let soft = span_f1(&span_gold, &span_predictions, MatchMode::Soft)?;
            Ok(EvalReport {
                run_id: manifest.run_id.clone(),
                kappa: None,
                error_rate,
                f1_hard: Some(hard),
                f1_soft: Some(soft),
                accuracy: None,
                per_aspect_kappa: IndexMap::new(),
            })
        }
    }
}

/// One line of a prediction file: the raw model output for a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub output: String,
}

/// Load a JSONL prediction file into (id, raw output) pairs.
pub fn load_predictions(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord =
            serde_json::from_str(line).map_err(|e| Error::MalformedLine {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
        out.push((record.id, record.output));
    }
    Ok(out)
}

/// Re-exported corpus loader with the harness-facing signature.
pub fn load_gold(path: &Path, kind: TaskKind, schema: &AspectSchema) -> Result<Vec<TaskRecord>> {
    corpus::load_corpus(path, kind, Some(schema))
}
