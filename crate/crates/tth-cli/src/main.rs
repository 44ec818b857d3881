//! `tth`: build and query temporal term histograms from the command line.

mod output;
mod recipes;
mod store;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tth_core::algebra::{self, DistanceRegistry, FunctionRegistry};
use tth_core::gen::{self, GenSpec};
use tth_core::plan::{estimate_cost, evaluate, parse_plan, print_plan, EvalContext, RuleSet};
use tth_core::{
    build_indexes, build_tth, load_corpus, snapshot, BuildFilter, DocId, Result, TermId, Tth,
    TthError, TthRow, Vocabulary,
};

use output::{delimiter_for, value_table, write_plot_series, Table};
use recipes::{AnalyzeParams, RecipeContext, RecipeRegistry};

#[derive(Parser)]
#[command(
    name = "tth",
    version,
    about = "Temporal term histograms over time-stamped document corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and index a corpus under a mapping configuration.
    Ingest(IngestArgs),
    /// Build a histogram snapshot from an ingested corpus.
    Build(BuildArgs),
    /// Evaluate a plan over histogram snapshots.
    Query(QueryArgs),
    /// Run an analysis recipe over snapshots.
    Analyze(AnalyzeArgs),
    /// Time merge/coarsen/build over growing synthetic workloads.
    Bench(BenchArgs),
    /// Export per-term (x, y) plot series from a snapshot.
    Export(ExportArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Mapping configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Corpus file: newline-delimited JSON, or CSV with a header row.
    #[arg(long)]
    corpus: PathBuf,
    /// Output directory for the persisted indexes.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    /// Ingest directory written by `tth ingest`.
    #[arg(long)]
    out: PathBuf,
    /// Term-index field to build over (default: first ingested field).
    #[arg(long)]
    field: Option<String>,
    /// Interval width in days (must be a multiple of the corpus grid width).
    #[arg(long, default_value_t = 1)]
    width: i64,
    /// Explicit range boundaries (comma-separated ISO dates) for calendar
    /// bins such as months; applied after the base build.
    #[arg(long)]
    boundaries: Option<String>,
    /// Keep documents dated on or after this ISO date.
    #[arg(long)]
    start: Option<String>,
    /// Keep documents dated strictly before this ISO date.
    #[arg(long)]
    end: Option<String>,
    /// Category equality filter, `name=value` (repeatable).
    #[arg(long = "filter-aux")]
    filter_aux: Vec<String>,
    /// Per-document term threshold, `term:count` (repeatable).
    #[arg(long = "filter-term")]
    filter_term: Vec<String>,
    /// Comma-separated category attributes kept as histogram axes.
    #[arg(long)]
    aux: Option<String>,
    /// Snapshot file to write.
    #[arg(long)]
    snapshot: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    /// Plan file in the textual plan format.
    #[arg(long, conflicts_with = "plan_text")]
    plan: Option<PathBuf>,
    /// Inline plan text.
    #[arg(long = "plan-text")]
    plan_text: Option<String>,
    /// Source binding `name=snapshot.tth` (repeatable).
    #[arg(long = "source")]
    sources: Vec<String>,
    /// Ingest directory whose vocabulary and forward index back the sources.
    #[arg(long)]
    ingest: Option<PathBuf>,
    /// Evaluate the plan as written, skipping the rewriter.
    #[arg(long = "no-rewrite")]
    no_rewrite: bool,
    /// Print the plans, fired rules, and cost estimates instead of executing.
    #[arg(long)]
    explain: bool,
    /// Output format.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write the result table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Recipe name: cooccur, salience, trendy, sync, tfidf, or distance.
    recipe: String,
    /// Histogram snapshot to analyze.
    #[arg(long)]
    snapshot: PathBuf,
    /// Second snapshot (distance recipe).
    #[arg(long)]
    other: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Count threshold for rank views.
    #[arg(long, default_value_t = 0)]
    ct: u64,
    /// Anchor term (cooccur recipe).
    #[arg(long)]
    anchor: Option<String>,
    /// Comma-separated term list (salience recipe).
    #[arg(long)]
    terms: Option<String>,
    /// Interval width in days (cooccur/salience/trendy).
    #[arg(long)]
    width: Option<i64>,
    /// Analysis window `START:END` (ISO dates, end exclusive).
    #[arg(long)]
    window: Option<String>,
    /// Category attribute to partition by (cooccur/sync).
    #[arg(long = "group-by")]
    group_by: Option<String>,
    /// Distance metric name.
    #[arg(long, default_value = "euclidean")]
    metric: String,
    /// Jaccard threshold relaxing exact top-k set equality (sync recipe).
    #[arg(long)]
    jaccard: Option<f64>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-series plot-data files.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated workload sizes (rows for merge/coarsen, documents
    /// for build).
    #[arg(long, default_value = "20000,40000,80000,160000")]
    sizes: String,
    /// Comma-separated operations: merge, coarsen, build.
    #[arg(long, default_value = "merge,coarsen")]
    ops: String,
    /// Seed for the synthetic corpus generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coarsening width ratio.
    #[arg(long = "width-ratio", default_value_t = 4)]
    width_ratio: i64,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write the timing table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Histogram snapshot to export.
    #[arg(long)]
    snapshot: PathBuf,
    /// Comma-separated terms (default: every term in the snapshot).
    #[arg(long)]
    terms: Option<String>,
    /// Report name prefixed to each series file (default: snapshot stem).
    #[arg(long)]
    report: Option<String>,
    /// Output directory for the series files.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Build(args) => cmd_build(args),
        Command::Query(args) => cmd_query(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Export(args) => cmd_export(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

/// Exit codes: 2 schema/argument, 3 alignment/validation, 4 data/dependency.
fn exit_code(err: &TthError) -> i32 {
    match err {
        TthError::Schema(_)
        | TthError::Parse(_)
        | TthError::Argument(_)
        | TthError::Lookup(_)
        | TthError::Registry(_)
        | TthError::PlanType(_)
        | TthError::Estimation(_) => 2,
        TthError::Alignment(_) | TthError::Range(_) | TthError::Contract(_) => 3,
        TthError::Conflict(_)
        | TthError::Dependency(_)
        | TthError::AbsentRows(_)
        | TthError::InsufficientData(_)
        | TthError::UndefinedDistribution(_)
        | TthError::Io(_) => 4,
        TthError::Eval { source, .. } => exit_code(source),
    }
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    config: Option<String>,
    corpus: Option<String>,
    out: String,
    params: BTreeMap<String, String>,
    seed: Option<u64>,
}

fn parse_date(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| TthError::Parse(format!("invalid ISO-8601 date '{s}': {e}")))
}

fn write_table(table: &Table, format: &str, out: Option<&Path>) -> Result<()> {
    let delimiter = delimiter_for(format)?;
    match out {
        Some(path) => fs::write(path, table.to_bytes(delimiter)?)?,
        None => {
            let stdout = std::io::stdout();
            table.write(stdout.lock(), delimiter)?;
        }
    }
    Ok(())
}

// --- ingest ---

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let config = tth_core::MappingConfig::from_toml_file(&args.config)?;
    let records = tth_core::corpus::records_from_path(&args.corpus)?;
    let corpus = load_corpus(&config, records)?;
    let indexes: Vec<tth_core::FieldIndex> = config
        .term_index
        .iter()
        .map(|field| build_indexes(&corpus, field))
        .collect::<Result<_>>()?;

    let manifest = RunManifest {
        command: "ingest".into(),
        config: Some(args.config.display().to_string()),
        corpus: Some(args.corpus.display().to_string()),
        out: args.out.display().to_string(),
        params: BTreeMap::new(),
        seed: None,
    };
    let manifest_bytes = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| TthError::Parse(format!("manifest encoding failed: {e}")))?;
    let meta = store::save_ingest(
        &args.out,
        &corpus,
        &indexes,
        vec![("manifest.json".to_string(), manifest_bytes)],
    )?;

    let terms: usize = meta.terms_per_field.values().sum();
    println!(
        "ingested {} documents, {} terms across {} field(s) into {}",
        meta.num_docs,
        terms,
        meta.fields.len(),
        args.out.display()
    );
    Ok(())
}

// --- build ---

fn parse_filter(args: &BuildArgs) -> Result<BuildFilter> {
    let mut filter = BuildFilter::default();
    if let Some(s) = &args.start {
        filter.date_start = Some(parse_date(s)?);
    }
    if let Some(e) = &args.end {
        filter.date_end = Some(parse_date(e)?);
    }
    for pair in &args.filter_aux {
        let (name, value) = pair.split_once('=').ok_or_else(|| {
            TthError::Argument(format!("--filter-aux expects name=value, got '{pair}'"))
        })?;
        filter.aux_equals.push((name.to_string(), value.to_string()));
    }
    for pair in &args.filter_term {
        let (term, count) = pair.split_once(':').ok_or_else(|| {
            TthError::Argument(format!("--filter-term expects term:count, got '{pair}'"))
        })?;
        let count: u64 = count.parse().map_err(|_| {
            TthError::Argument(format!("--filter-term count '{count}' is not an integer"))
        })?;
        filter.min_term_count.push((term.to_string(), count));
    }
    Ok(filter)
}

fn cmd_build(args: BuildArgs) -> Result<()> {
    let (corpus, index) = store::load_ingest(&args.out, args.field.as_deref())?;
    let filter = parse_filter(&args)?;
    let aux_schema: Vec<String> = args
        .aux
        .as_deref()
        .map(|s| s.split(',').map(str::to_string).collect())
        .unwrap_or_default();

    let mut tth = build_tth(&corpus, &index, args.width, &filter, &aux_schema)?;
    if let Some(bounds) = &args.boundaries {
        let boundaries: Vec<NaiveDate> = bounds
            .split(',')
            .map(|s| parse_date(s.trim()))
            .collect::<Result<_>>()?;
        tth = algebra::coarsen_to_ranges(&tth, &boundaries)?;
    }

    snapshot::save_path(&tth, &args.snapshot)?;
    let intervals = tth
        .rows()
        .map(|r| r.interval)
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    println!(
        "built {} rows over {} interval(s) into {}",
        tth.len(),
        intervals,
        args.snapshot.display()
    );
    Ok(())
}

// --- query ---

fn cmd_query(args: QueryArgs) -> Result<()> {
    let plan_text = match (&args.plan, &args.plan_text) {
        (Some(path), None) => fs::read_to_string(path)?,
        (None, Some(text)) => text.clone(),
        _ => {
            return Err(TthError::Argument(
                "provide exactly one of --plan or --plan-text".into(),
            ))
        }
    };
    let plan = parse_plan(&plan_text)?;

    // Load every source snapshot against one shared vocabulary (seeded from
    // the ingest vocabulary when given, which also attaches the forward
    // index for deduplicating merges).
    let mut names = Vec::new();
    let mut paths = Vec::new();
    for binding in &args.sources {
        let (name, path) = binding.split_once('=').ok_or_else(|| {
            TthError::Argument(format!("--source expects name=path, got '{binding}'"))
        })?;
        names.push(name.to_string());
        paths.push(PathBuf::from(path));
    }
    let path_refs: Vec<&Path> = paths.iter().map(PathBuf::as_path).collect();
    let loaded = match &args.ingest {
        Some(dir) => {
            let (_, index) = store::load_ingest(dir, None)?;
            snapshot::load_all_with_base(&path_refs, &index.vocab, Some(index.forward.clone()))?
        }
        None => snapshot::load_all(&path_refs)?,
    };
    let sources: BTreeMap<String, Tth> = names.into_iter().zip(loaded).collect();

    let rules = RuleSet::standard();
    let (rewritten, fired) = rules.rewrite_traced(&plan)?;
    let executed = if args.no_rewrite { &plan } else { &rewritten };

    if args.explain {
        let stats: BTreeMap<String, u64> = sources
            .iter()
            .map(|(k, v)| (k.clone(), v.len() as u64))
            .collect();
        let mut table = Table::new(vec!["item", "value"]);
        table.push(vec!["plan".into(), print_plan(&plan)]);
        table.push(vec!["rewritten".into(), print_plan(&rewritten)]);
        table.push(vec!["rules_fired".into(), fired.join(";")]);
        table.push(vec![
            "cost_original".into(),
            estimate_cost(&plan, &stats)?.cost.to_string(),
        ]);
        table.push(vec![
            "cost_rewritten".into(),
            estimate_cost(&rewritten, &stats)?.cost.to_string(),
        ]);
        return write_table(&table, &args.format, args.out.as_deref());
    }

    let functions = FunctionRegistry::builtin();
    let distances = DistanceRegistry::builtin();
    let ctx = EvalContext::new(&sources, &functions, &distances);
    let value = evaluate(executed, &ctx)?;
    write_table(&value_table(&value), &args.format, args.out.as_deref())
}

// --- analyze ---

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let mut paths: Vec<&Path> = vec![&args.snapshot];
    if let Some(other) = &args.other {
        paths.push(other);
    }
    let mut loaded = snapshot::load_all(&paths)?;
    let tth = loaded.remove(0);
    let other = loaded.pop();

    let window = match &args.window {
        None => None,
        Some(w) => {
            let (start, end) = w.split_once(':').ok_or_else(|| {
                TthError::Argument(format!("--window expects START:END, got '{w}'"))
            })?;
            Some((parse_date(start)?, parse_date(end)?))
        }
    };
    let params = AnalyzeParams {
        k: args.k,
        theta: args.theta,
        alpha: args.alpha,
        count_threshold: args.ct,
        anchor: args.anchor.clone(),
        terms: args
            .terms
            .as_deref()
            .map(|s| s.split(',').map(str::to_string).collect())
            .unwrap_or_default(),
        width: args.width,
        window,
        group_by: args.group_by.clone(),
        metric: args.metric.clone(),
        jaccard: args.jaccard,
    };

    let registry = RecipeRegistry::builtin();
    let recipe = registry.get(&args.recipe)?;
    let result = recipe.run(&RecipeContext {
        tth: &tth,
        other: other.as_ref(),
        params: &params,
    })?;

    write_table(&result.table, &args.format, args.out.as_deref())?;
    if let Some(plot_dir) = &args.plot {
        let written = write_plot_series(plot_dir, recipe.name(), &result.plots)?;
        for file in written {
            eprintln!("wrote {}", plot_dir.join(file).display());
        }
    }
    Ok(())
}

// --- bench ---

/// Synthetic histogram with exactly `rows` rows spread over up to 80
/// intervals, each row a distinct single-document list.
fn bench_tth(rows: usize, doc_base: u64, vocab: &std::sync::Arc<Vocabulary>) -> Result<Tth> {
    let grid = tth_core::TimeGrid::new(NaiveDate::from_ymd_opt(2017, 1, 1).unwrap(), 1)?;
    let intervals = 80.min(rows.max(1));
    let tth_rows = (0..rows).map(|n| TthRow {
        term: TermId((n / intervals) as u32),
        interval: (n % intervals) as i64,
        count: 1,
        docs: vec![DocId(doc_base + n as u64)],
        aux: Vec::new(),
    });
    Tth::from_rows(
        grid,
        "text",
        Vec::new(),
        std::sync::Arc::clone(vocab),
        None,
        tth_rows,
    )
}

fn bench_vocab(rows: usize) -> std::sync::Arc<Vocabulary> {
    let intervals = 80.min(rows.max(1));
    let terms = rows.div_ceil(intervals).max(1);
    let mut vocab = Vocabulary::new();
    for t in 0..terms {
        vocab.intern(&format!("s{t}"));
    }
    std::sync::Arc::new(vocab)
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let sizes: Vec<usize> = args
        .sizes
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| TthError::Argument(format!("bad size '{s}'")))
        })
        .collect::<Result<_>>()?;
    let ops: Vec<&str> = args.ops.split(',').map(str::trim).collect();
    for op in &ops {
        if !matches!(*op, "merge" | "coarsen" | "build") {
            return Err(TthError::Argument(format!(
                "unknown bench operation '{op}' (expected merge, coarsen, or build)"
            )));
        }
    }

    let mut table = Table::new(vec![
        "op",
        "size",
        "rows_in",
        "rows_out",
        "width_ratio",
        "bound_ok",
        "micros",
    ]);
    for op in &ops {
        for &size in &sizes {
            let (rows_in, rows_out, width_ratio, bound_ok, micros) = match *op {
                "merge" => {
                    let vocab = bench_vocab(size);
                    let a = bench_tth(size, 0, &vocab)?;
                    let b = bench_tth(size, 10_000_000, &vocab)?;
                    let started = Instant::now();
                    let merged = algebra::merge(&a, &b)?;
                    let micros = started.elapsed().as_micros();
                    (2 * size, merged.len(), 1, String::new(), micros)
                }
                "coarsen" => {
                    let vocab = bench_vocab(size);
                    let a = bench_tth(size, 0, &vocab)?;
                    let started = Instant::now();
                    let coarse = algebra::coarsen(&a, args.width_ratio, None, None)?;
                    let micros = started.elapsed().as_micros();
                    let ratio = args.width_ratio;
                    let lower = (size as i64 + ratio - 1) / ratio;
                    let ok =
                        size == 0 || (coarse.len() as i64 >= lower && coarse.len() <= size);
                    (size, coarse.len(), ratio, ok.to_string(), micros)
                }
                "build" => {
                    let spec = GenSpec {
                        num_docs: size,
                        vocab_size: 200,
                        zipf_s: 1.0,
                        intervals: 30,
                        tokens_per_doc: 20,
                        seed: args.seed,
                        ..Default::default()
                    };
                    let records = gen::generate(&spec)?;
                    let config = gen::mapping_config("bench", &spec);
                    let started = Instant::now();
                    let corpus =
                        load_corpus(&config, records.iter().map(|r| Ok(r.to_record())))?;
                    let index = build_indexes(&corpus, "text")?;
                    let tth = build_tth(&corpus, &index, 1, &BuildFilter::default(), &[])?;
                    let micros = started.elapsed().as_micros();
                    (size, tth.len(), 1, String::new(), micros)
                }
                _ => unreachable!(),
            };
            table.push(vec![
                op.to_string(),
                size.to_string(),
                rows_in.to_string(),
                rows_out.to_string(),
                width_ratio.to_string(),
                bound_ok,
                micros.to_string(),
            ]);
        }
    }

    if let Some(out) = &args.out {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let manifest = RunManifest {
            command: "bench".into(),
            config: None,
            corpus: None,
            out: out.display().to_string(),
            params: [
                ("sizes".to_string(), args.sizes.clone()),
                ("ops".to_string(), args.ops.clone()),
                ("width_ratio".to_string(), args.width_ratio.to_string()),
            ]
            .into(),
            seed: Some(args.seed),
        };
        fs::write(
            out.with_extension("manifest.json"),
            serde_json::to_vec_pretty(&manifest)
                .map_err(|e| TthError::Parse(format!("manifest encoding failed: {e}")))?,
        )?;
    }
    write_table(&table, &args.format, args.out.as_deref())
}

// --- export ---

fn cmd_export(args: ExportArgs) -> Result<()> {
    let tth = snapshot::load_path(&args.snapshot)?;
    let report = match &args.report {
        Some(name) => name.clone(),
        None => args
            .snapshot
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "report".into()),
    };
    let terms: Vec<TermId> = match &args.terms {
        Some(list) => list
            .split(',')
            .map(|t| tth.vocab().require(t.trim()))
            .collect::<Result<_>>()?,
        None => tth.vocab().iter().map(|(id, _)| id).collect(),
    };

    let mut series = Vec::new();
    for term in terms {
        let mut per_interval: BTreeMap<i64, u64> = BTreeMap::new();
        for (key, data) in tth.iter() {
            if key.term == term {
                *per_interval.entry(key.interval).or_default() += data.count;
            }
        }
        if per_interval.is_empty() {
            continue;
        }
        series.push(output::PlotSeries {
            name: tth.vocab().term(term).unwrap_or("term").to_string(),
            points: per_interval
                .into_iter()
                .map(|(i, c)| (tth.interval_start(i).to_string(), c.to_string()))
                .collect(),
        });
    }
    let written = write_plot_series(&args.out, &report, &series)?;
    let mut stdout = std::io::stdout().lock();
    for file in &written {
        writeln!(stdout, "{}", args.out.join(file).display())?;
    }
    Ok(())
}
