//! Subcommand implementations.

use std::path::{Path, PathBuf};

use clap::Args;
use indexmap::IndexMap;
use serde::Serialize;

use sde_core::harness::{load_predictions, EvalReport, RunManifest};
use sde_core::{
    ablation_grid, average_rankings, emit_run, generate_fixture_corpus, load_corpus,
    render_corpus, save_corpus, score_run, AblationGroup, AspectSchema, DesignStrategy, Error,
    LabelDistribution, PromptTemplate, Result, ScoreGrid, TaskKind, TaskRecord,
};

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
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
    write_text(path, &out)
}

fn parse_strategy(spec: &str) -> Result<DesignStrategy> {
    DesignStrategy::parse_spec(spec)
}

fn load_template(path: Option<&PathBuf>, kind: TaskKind) -> Result<PromptTemplate> {
    match path {
        Some(p) => PromptTemplate::load(p),
        None => Ok(PromptTemplate::default_for(kind)),
    }
}

// ------------------------------------------------------------- fixtures --

#[derive(Args)]
pub struct FixturesArgs {
    /// Schema JSON file.
    #[arg(long)]
    schema: PathBuf,
    /// Label distribution JSON file (aspect -> label -> fraction).
    #[arg(long)]
    dist: PathBuf,
    /// Number of records to generate.
    #[arg(long)]
    n: usize,
    /// RNG seed; the same seed regenerates the corpus byte-identically.
    #[arg(long)]
    seed: u64,
    /// Output corpus path (JSON lines).
    #[arg(long)]
    out: PathBuf,
}

pub fn fixtures(args: FixturesArgs) -> Result<()> {
    let schema = AspectSchema::load(&args.schema)?;
    let dist = LabelDistribution::load(&args.dist)?;
    let records = generate_fixture_corpus(&schema, &dist, args.n, args.seed)?;
    let records: Vec<TaskRecord> = records.into_iter().map(TaskRecord::Masa).collect();
    save_corpus(&args.out, &records)?;
    eprintln!("wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}

// --------------------------------------------------------------- render --

#[derive(Args)]
pub struct RenderArgs {
    /// Corpus JSONL file.
    #[arg(long)]
    corpus: PathBuf,
    /// Schema JSON file.
    #[arg(long)]
    schema: PathBuf,
    /// Record kind in the corpus.
    #[arg(long, default_value = "masa")]
    kind: String,
    /// Strategy (compact string like inst_first/no_mi/lines/pu/txt/no_cot,
    /// or a preset name: ES-SDE, EW-SDE, Heuristic).
    #[arg(long, conflicts_with = "manifest")]
    strategy: Option<String>,
    /// Instruction variant index.
    #[arg(long, default_value_t = 0)]
    variant: usize,
    /// Custom template JSON file (defaults to the built-in template).
    #[arg(long)]
    template: Option<PathBuf>,
    /// Output sample JSONL path (plain rendering mode).
    #[arg(long, conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    /// Run manifest: emit samples, eval prompts and the manifest instead.
    #[arg(long, requires = "out_dir")]
    manifest: Option<PathBuf>,
    /// Output directory for manifest-driven emission.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn render(args: RenderArgs) -> Result<()> {
    let kind: TaskKind = args.kind.parse()?;
    let schema = AspectSchema::load(&args.schema)?;
    let records = load_corpus(&args.corpus, kind, Some(&schema))?;
    let template = load_template(args.template.as_ref(), kind)?;
    template.validate()?;

    if let Some(manifest_path) = &args.manifest {
        let manifest = RunManifest::load(manifest_path)?;
        let out_dir = args.out_dir.as_ref().expect("clap enforces out_dir");
        let emitted = emit_run(&manifest, &records, &schema, &template, out_dir)?;
        eprintln!(
            "emitted run '{}': {} / {} / {}",
            manifest.run_id,
            emitted.samples.display(),
            emitted.eval_prompts.display(),
            emitted.manifest.display()
        );
        return Ok(());
    }

    let Some(spec) = &args.strategy else {
        return Err(Error::validation("either --strategy or --manifest is required"));
    };
    let Some(out) = &args.out else {
        return Err(Error::validation("--out is required without --manifest"));
    };
    let strategy = parse_strategy(spec)?;
    let samples = render_corpus(&records, &schema, &strategy, &template, args.variant)?;
    write_jsonl(out, &samples)?;
    eprintln!("wrote {} samples to {}", samples.len(), out.display());
    Ok(())
}

// ----------------------------------------------------------------- grid --

#[derive(Args)]
pub struct GridArgs {
    /// Baseline strategy (compact string or preset name).
    #[arg(long)]
    baseline: String,
    /// Option family: input, output or reasoning.
    #[arg(long)]
    group: String,
    /// Task id recorded into the manifests.
    #[arg(long)]
    task_id: String,
    /// Training split size recorded into the manifests.
    #[arg(long)]
    train_size: usize,
    /// Instruction variant recorded into the manifests.
    #[arg(long, default_value_t = 0)]
    variant: usize,
    /// Output directory for the manifests and grid summary.
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn grid(args: GridArgs) -> Result<()> {
    let baseline = parse_strategy(&args.baseline)?;
    let group: AblationGroup = args.group.parse()?;
    let grid = ablation_grid(&baseline, group);
    std::fs::create_dir_all(&args.out_dir).map_err(|source| Error::Io {
        path: args.out_dir.display().to_string(),
        source,
    })?;
    let mut rows = vec![(grid.baseline_label.clone(), grid.baseline)];
    rows.extend(grid.variants.iter().cloned());
    for (label, strategy) in &rows {
        let run_id = format!("{}-{}", args.group.to_lowercase(), slug(label));
        let mut manifest = RunManifest::new(run_id, &args.task_id, *strategy, args.train_size);
        manifest.instruction_variant = args.variant;
        manifest.save(&args.out_dir.join(format!("{}.manifest.json", manifest.run_id)))?;
    }
    let summary = serde_json::to_string_pretty(&grid)
        .map_err(|e| Error::validation(format!("cannot serialize grid: {e}")))?;
    write_text(&args.out_dir.join(format!("{}.grid.json", args.group.to_lowercase())), &(summary + "\n"))?;
    eprintln!(
        "wrote {} manifests (baseline + {} variants) to {}",
        rows.len(),
        grid.variants.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn slug(label: &str) -> String {
    let mut out = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') && !out.is_empty() {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

// ---------------------------------------------------------------- parse --

#[derive(Args)]
pub struct ParseArgs {
    /// Prediction JSONL file ({"id", "output"}).
    #[arg(long)]
    predictions: PathBuf,
    /// Strategy the outputs were produced under.
    #[arg(long)]
    strategy: String,
    /// Schema JSON file.
    #[arg(long)]
    schema: PathBuf,
    /// Task kind: masa or span.
    #[arg(long, default_value = "masa")]
    kind: String,
    /// Output JSONL path for parse outcomes.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct OutcomeRow<'a> {
    id: &'a str,
    #[serde(flatten)]
    outcome: &'a sde_core::ParseOutcome,
}

pub fn parse(args: ParseArgs) -> Result<()> {
    let kind: TaskKind = args.kind.parse()?;
    let schema = AspectSchema::load(&args.schema)?;
    let strategy = parse_strategy(&args.strategy)?;
    let predictions = load_predictions(&args.predictions)?;
    let outcomes = sde_core::batch_parse(&predictions, &strategy, &schema, kind)?;
    let rows: Vec<OutcomeRow> = outcomes
        .iter()
        .map(|(id, outcome)| OutcomeRow { id, outcome })
        .collect();
    write_jsonl(&args.out, &rows)?;
    let errors = outcomes.iter().filter(|(_, o)| o.format_error).count();
    eprintln!(
        "parsed {} outputs ({} format errors) to {}",
        outcomes.len(),
        errors,
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------- score --

#[derive(Args)]
pub struct ScoreArgs {
    /// Run manifest (carries the strategy); alternative to --strategy.
    #[arg(long, conflicts_with = "strategy")]
    manifest: Option<PathBuf>,
    /// Strategy for ad-hoc scoring without a manifest.
    #[arg(long)]
    strategy: Option<String>,
    /// Run id used with --strategy.
    #[arg(long, default_value = "adhoc")]
    run_id: String,
    /// Gold corpus JSONL file.
    #[arg(long)]
    gold: PathBuf,
    /// Schema JSON file.
    #[arg(long)]
    schema: PathBuf,
    /// Task kind: masa or span.
    #[arg(long, default_value = "masa")]
    kind: String,
    /// Prediction JSONL file ({"id", "output"}).
    #[arg(long)]
    predictions: PathBuf,
    /// Output report JSON path.
    #[arg(long)]
    out: PathBuf,
}

pub fn score(args: ScoreArgs) -> Result<()> {
    let kind: TaskKind = args.kind.parse()?;
    let schema = AspectSchema::load(&args.schema)?;
    let manifest = match (&args.manifest, &args.strategy) {
        (Some(path), _) => RunManifest::load(path)?,
        (None, Some(spec)) => {
            RunManifest::new(args.run_id.clone(), schema.task_id.clone(), parse_strategy(spec)?, 0)
        }
        (None, None) => {
            return Err(Error::validation("either --manifest or --strategy is required"))
        }
    };
    let gold = load_corpus(&args.gold, kind, Some(&schema))?;
    let predictions = load_predictions(&args.predictions)?;
    let report = score_run(&manifest, &gold, &schema, &predictions)?;
    report.save(&args.out)?;
    match &report.kappa {
        Some(kappa) => eprintln!(
            "run '{}': kappa {:.4}, error rate {:.4} -> {}",
            report.run_id,
            kappa.kappa,
            report.error_rate,
            args.out.display()
        ),
        None => eprintln!(
            "run '{}': soft F1 {:.4}, error rate {:.4} -> {}",
            report.run_id,
            report.f1_soft.as_ref().map(|f| f.f1).unwrap_or(f64::NAN),
            report.error_rate,
            args.out.display()
        ),
    }
    Ok(())
}

// --------------------------------------------------------------- report --

#[derive(Args)]
pub struct ReportArgs {
    /// Directory holding {run}.manifest.json / {run}.report.json pairs.
    #[arg(long)]
    reports_dir: PathBuf,
    /// Baseline option: a strategy string or preset name.
    #[arg(long)]
    baseline: String,
    /// Output JSON path (defaults to report.json in the reports dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ReportSummary {
    baseline: String,
    grid: ScoreGrid,
    deltas: IndexMap<String, f64>,
    mean_ranks: IndexMap<String, f64>,
}

pub fn report(args: ReportArgs) -> Result<()> {
    let baseline = parse_strategy(&args.baseline)?.compact();
    let entries = std::fs::read_dir(&args.reports_dir).map_err(|source| Error::Io {
        path: args.reports_dir.display().to_string(),
        source,
    })?;
    // (option = strategy, cell = task/size/variant) -> headline score
    let mut scores: IndexMap<String, IndexMap<String, f64>> = IndexMap::new();
    let mut report_count = 0usize;
    for entry in entries {
        let entry = entry.map_err(|source| Error::Io {
            path: args.reports_dir.display().to_string(),
            source,
        })?;
        let path = entry.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let Some(stem) = name.strip_suffix(".report.json") else {
            continue;
        };
        let manifest_path = args.reports_dir.join(format!("{stem}.manifest.json"));
        if !manifest_path.exists() {
            return Err(Error::validation(format!(
                "report '{name}' has no matching manifest '{stem}.manifest.json'"
            )));
        }
        let manifest = RunManifest::load(&manifest_path)?;
        let report = EvalReport::load(&path)?;
        let option = manifest.strategy.compact();
        let cell = format!(
            "{}/n{}/v{}",
            manifest.task_id, manifest.train_size, manifest.instruction_variant
        );
        let slot = scores.entry(option.clone()).or_default();
        if slot.insert(cell.clone(), report.headline()).is_some() {
            return Err(Error::validation(format!(
                "two runs score option '{option}' in cell '{cell}'"
            )));
        }
        report_count += 1;
    }
    if report_count == 0 {
        return Err(Error::validation(format!(
            "no *.report.json files in {}",
            args.reports_dir.display()
        )));
    }
    // Column set must be identical across options; rely on grid validation.
    let mut cells: Vec<String> = Vec::new();
    for per_cell in scores.values() {
        for cell in per_cell.keys() {
            if !cells.contains(cell) {
                cells.push(cell.clone());
            }
        }
    }
    cells.sort();
    let options: Vec<String> = scores.keys().cloned().collect();
    let mut rows = Vec::new();
    for option in &options {
        let per_cell = &scores[option];
        let mut row = Vec::new();
        for cell in &cells {
            match per_cell.get(cell) {
                Some(score) => row.push(*score),
                None => {
                    return Err(Error::validation(format!(
                        "option '{option}' has no score for cell '{cell}' (ragged grid)"
                    )))
                }
            }
        }
        rows.push(row);
    }
    let grid = ScoreGrid::new(options, cells, rows)?;
    let deltas = grid.baseline_deltas(&baseline)?;
    let ranks = average_rankings(&grid)?;

    println!("{}", text_table(&grid, &deltas, &ranks.mean_ranks));

    let out = args
        .out
        .unwrap_or_else(|| args.reports_dir.join("report.json"));
    let summary = ReportSummary {
        baseline,
        grid,
        deltas,
        mean_ranks: ranks.mean_ranks,
    };
    let mut text = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::validation(format!("cannot serialize summary: {e}")))?;
    text.push('\n');
    write_text(&out, &text)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

/// Aligned plain-text table: one row per option with per-cell scores,
/// the cell-averaged delta against the baseline and the mean rank.
fn text_table(
    grid: &ScoreGrid,
    deltas: &IndexMap<String, f64>,
    ranks: &IndexMap<String, f64>,
) -> String {
    let mut header: Vec<String> = vec!["option".to_string()];
    header.extend(grid.cells.iter().cloned());
    header.push("delta".to_string());
    header.push("mean_rank".to_string());

    let mut table: Vec<Vec<String>> = vec![header];
    for (i, option) in grid.options.iter().enumerate() {
        let mut row = vec![option.clone()];
        for score in &grid.scores[i] {
            row.push(format!("{score:.4}"));
        }
        row.push(format!("{:+.4}", deltas[option]));
        row.push(format!("{:.2}", ranks[option]));
        table.push(row);
    }
    let columns = table[0].len();
    let widths: Vec<usize> = (0..columns)
        .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    table
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(c, cell)| format!("{cell:<width$}", width = widths[c]))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}
