//! Toolkit for engineering fine-tuning samples: render records into
//! prompt/response pairs under any combination of input/output/reasoning
//! design options, recover structured predictions from raw model output, and
//! score runs with weighted kappa, format-error rate, span F1 and
//! perplexity.

pub mod corpus;
pub mod designspace;
pub mod error;
pub mod fixtures;
pub mod grammar;
pub mod harness;
pub mod metrics;
pub mod parse;
pub mod render;
pub mod schema;
pub mod template;

pub use corpus::{load_corpus, save_corpus};
pub use designspace::{
    ablation_grid, enumerate_strategies, preset, validate_strategy, AblationGrid, AblationGroup,
    CorpusCapabilities, DesignStrategy, InputModeling, LabelStyle, OutputFormat, Placement,
    Reasoning, UnmentionedHandling,
};
pub use error::{Error, Result};
pub use fixtures::generate_fixture_corpus;
pub use harness::{
    average_rankings, compare_to_baseline, emit_run, load_predictions, score_run, EvalReport,
    RankingSummary, RunManifest, ScoreGrid,
};
pub use metrics::{
    build_confusion, format_error_rate, greedy_match_count, perplexity, slot_accuracy, span_f1,
    weighted_kappa, ConfusionMatrix, KappaResult, MatchMode, MatchScore, PerplexityResult,
    WeightMatrix,
};
pub use parse::{batch_parse, parse_output, ParseOutcome, PredictedSpan, Predictions, RepairKind};
pub use render::{render_corpus, render_eval_prompt, render_response, render_sample, TrainingSample};
pub use schema::{
    validate_record, AspectSchema, LabelDistribution, MasaRecord, SentimentLabel, SpanAnnotation,
    SpanRecord, TaskKind, TaskRecord,
};
pub use template::PromptTemplate;
