//! Command-line front end: one subcommand per library operation, composable
//! through files. Every file-producing invocation also writes a run manifest
//! describing all inputs and parameters, and identical manifests reproduce
//! byte-identical outputs.
//!
//! Exit codes: 0 success, 1 internal failure, 2 argument errors, 3 input
//! parse errors.

mod manifest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hvgnet::compaction::compact;
use hvgnet::evaluation::{evaluate, EdgeSet, EvalError, Matching};
use hvgnet::ingest::{parse_publications, IngestError, InputFormat, RatingMode, RatingPolicy};
use hvgnet::interchange::{
    export_graph, import_graph, ExportFormat, GraphData, ImportFormat, InterchangeError,
};
use hvgnet::metrics::{
    density_sweep, fit_log, infer_primary, network_metrics, rank_sources, sweep_csv, MetricsError,
    Sampling, SweepSpec, PRIMARY_HEURISTIC,
};
use hvgnet::model::{
    normalize_series, Config, ConfigError, Method, ModelError, NetworkMetrics, PublicationSeries,
    SourceGraph, TauUnit,
};
use hvgnet::visibility::build;
use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "hvgnet",
    version,
    about = "Builds and measures source-influence networks from rated publication streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a message-level visibility graph from a publication stream
    Build(BuildArgs),
    /// Collapse a message graph into the source-influence network
    Compact(CompactArgs),
    /// Print density, degrees, diameter and component structure
    Metrics(MetricsArgs),
    /// Measure density across growing node counts, optionally fitting a log law
    Sweep(SweepArgs),
    /// Score a predicted edge set against a gold standard
    Eval(EvalArgs),
    /// Rank sources by incoming influence and nominate primary candidates
    Rank(RankArgs),
    /// Convert a graph file between interchange formats
    Export(ExportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Hvg,
    Thvg,
    Eq1,
}

impl From<MethodArg> for Method {
    fn from(value: MethodArg) -> Self {
        match value {
            MethodArg::Hvg => Method::Hvg,
            MethodArg::Thvg => Method::Thvg,
            MethodArg::Eq1 => Method::Eq1Only,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TauUnitArg {
    Index,
    Seconds,
}

impl From<TauUnitArg> for TauUnit {
    fn from(value: TauUnitArg) -> Self {
        match value {
            TauUnitArg::Index => TauUnit::Index,
            TauUnitArg::Seconds => TauUnit::Seconds,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StreamFormatArg {
    Csv,
    Jsonl,
}

impl From<StreamFormatArg> for InputFormat {
    fn from(value: StreamFormatArg) -> Self {
        match value {
            StreamFormatArg::Csv => InputFormat::Csv,
            StreamFormatArg::Jsonl => InputFormat::Jsonl,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormatArg {
    AdjJson,
    EdgeCsv,
    Dot,
    Graphml,
}

impl From<ExportFormatArg> for ExportFormat {
    fn from(value: ExportFormatArg) -> Self {
        match value {
            ExportFormatArg::AdjJson => ExportFormat::AdjJson,
            ExportFormatArg::EdgeCsv => ExportFormat::EdgeCsv,
            ExportFormatArg::Dot => ExportFormat::Dot,
            ExportFormatArg::Graphml => ExportFormat::GraphMl,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormatArg {
    AdjJson,
    EdgeCsv,
}

impl From<GraphFormatArg> for ImportFormat {
    fn from(value: GraphFormatArg) -> Self {
        match value {
            GraphFormatArg::AdjJson => ImportFormat::AdjJson,
            GraphFormatArg::EdgeCsv => ImportFormat::EdgeCsv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplingArg {
    Prefix,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Provided,
    Estimate,
}

#[derive(Args)]
struct StreamOptions {
    /// Publication stream file
    #[arg(long)]
    input: PathBuf,
    /// Stream encoding
    #[arg(long, value_enum)]
    format: StreamFormatArg,
    /// Construction method
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Window of the dominance rule (required for thvg and eq1)
    #[arg(long)]
    tau: Option<usize>,
    /// Interpret the window as node indices or wall-clock seconds
    #[arg(long, value_enum, default_value = "index")]
    tau_unit: TauUnitArg,
    /// Wall-clock window in seconds (required with --tau-unit seconds)
    #[arg(long)]
    window: Option<u64>,
    /// Where ratings come from
    #[arg(long, value_enum, default_value = "provided")]
    rating_policy: PolicyArg,
    /// Volume term weight for rating estimation
    #[arg(long, default_value_t = 1.0)]
    volume_weight: f64,
    /// Rate term weight for rating estimation
    #[arg(long, default_value_t = 1.0)]
    rate_weight: f64,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    stream: StreamOptions,
    /// Output graph file
    #[arg(long)]
    out: PathBuf,
    /// Output encoding
    #[arg(long, value_enum, default_value = "adj-json")]
    export: ExportFormatArg,
    #[arg(long, env = "HVGNET_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CompactArgs {
    /// Message graph in adjacency JSON
    #[arg(long)]
    input: PathBuf,
    /// Output graph file
    #[arg(long)]
    out: PathBuf,
    /// Output encoding
    #[arg(long, value_enum, default_value = "adj-json")]
    export: ExportFormatArg,
    /// Retain same-source self-loops as weighted loops
    #[arg(long)]
    keep_self_loops: bool,
    #[arg(long, env = "HVGNET_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct MetricsArgs {
    /// Graph file (message or source)
    #[arg(long)]
    input: PathBuf,
    /// Input encoding
    #[arg(long, value_enum, default_value = "adj-json")]
    from: GraphFormatArg,
    /// Also write the printed report to a file (with a manifest)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "HVGNET_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    stream: StreamOptions,
    /// Comma-separated node-count targets, strictly increasing
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Sub-series sampling protocol
    #[arg(long, value_enum, default_value = "prefix")]
    sampling: SamplingArg,
    /// Averaging runs per size for random sampling
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Output CSV of (n, D) points
    #[arg(long)]
    out: PathBuf,
    /// Fit D = a*ln(n) + b to the points and print the coefficients
    #[arg(long)]
    fit: bool,
    #[arg(long, env = "HVGNET_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted edge set CSV
    #[arg(long)]
    predicted: PathBuf,
    /// Gold-standard edge set CSV
    #[arg(long)]
    gold: PathBuf,
    /// Match edges regardless of direction
    #[arg(long)]
    undirected: bool,
    /// Accept self-pairs in the inputs
    #[arg(long)]
    allow_self_pairs: bool,
    /// Also write the printed report to a file (with a manifest)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "HVGNET_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RankArgs {
    /// Source graph file
    #[arg(long)]
    input: PathBuf,
    /// Input encoding
    #[arg(long, value_enum, default_value = "adj-json")]
    from: GraphFormatArg,
    /// Number of ranking rows to print
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Nominate primary-source candidates (optionally how many)
    #[arg(long, num_args = 0..=1, default_missing_value = "1")]
    primary: Option<usize>,
    /// Also write the printed report to a file (with a manifest)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "HVGNET_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExportArgs {
    /// Graph file to convert
    #[arg(long)]
    input: PathBuf,
    /// Input encoding
    #[arg(long, value_enum, default_value = "adj-json")]
    from: GraphFormatArg,
    /// Output encoding
    #[arg(long, value_enum)]
    to: ExportFormatArg,
    /// Output file
    #[arg(long)]
    out: PathBuf,
    /// Accept self-loops in the input graph
    #[arg(long)]
    allow_self_loops: bool,
    #[arg(long, env = "HVGNET_SEED", default_value_t = 0)]
    seed: u64,
}

enum CliError {
    Usage(String),
    Parse(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Parse(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<InterchangeError> for CliError {
    fn from(e: InterchangeError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        // Metrics preconditions are violated by flags, not file contents.
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Compact(args) => cmd_compact(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Export(args) => cmd_export(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn fmt6(value: f64) -> String {
    format!("{value:.6}")
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => {
            CliError::Usage(format!("input file `{}` not found", path.display()))
        }
        _ => CliError::Internal(format!("reading `{}`: {e}", path.display())),
    })
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Internal(format!("writing `{}`: {e}", path.display())))
}

fn write_manifest(out: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    write_output(&RunManifest::path_for(out), manifest.render().as_bytes())
}

/// Resolves the stream flags into a Config, enforcing that the windowed
/// methods state their window explicitly.
fn resolve_config(stream: &StreamOptions) -> Result<Config, CliError> {
    let method: Method = stream.method.into();
    let tau = match (method, stream.tau) {
        (Method::Hvg, tau) => tau.unwrap_or(1),
        (_, Some(tau)) => tau,
        (_, None) => {
            return Err(CliError::Usage(
                "--tau is required with --method thvg or eq1".to_string(),
            ))
        }
    };
    let config = Config {
        tau,
        method,
        tau_unit: stream.tau_unit.into(),
        drop_self_loops: true,
        time_window_seconds: stream.window,
    };
    config.validate()?;
    Ok(config)
}

fn rating_policy(stream: &StreamOptions) -> RatingPolicy {
    RatingPolicy {
        mode: match stream.rating_policy {
            PolicyArg::Provided => RatingMode::Provided,
            PolicyArg::Estimate => RatingMode::Estimate,
        },
        volume_weight: stream.volume_weight,
        rate_weight: stream.rate_weight,
    }
}

fn load_series(
    stream: &StreamOptions,
    manifest: &mut RunManifest,
) -> Result<PublicationSeries, CliError> {
    let bytes = read_input(&stream.input)?;
    manifest.record_input(&stream.input, &bytes);
    let policy = rating_policy(stream);
    manifest.rating_policy = Some(policy);
    let publications = parse_publications(&bytes, stream.format.into(), &policy)?;
    Ok(normalize_series(publications)?)
}

fn load_graph(
    path: &Path,
    format: GraphFormatArg,
    allow_self_loops: bool,
    manifest: &mut RunManifest,
) -> Result<GraphData, CliError> {
    let bytes = read_input(path)?;
    manifest.record_input(path, &bytes);
    Ok(import_graph(&bytes, format.into(), allow_self_loops)?)
}

fn note_extensions(config: &Config, manifest: &mut RunManifest) {
    if config.tau_unit == TauUnit::Seconds {
        manifest
            .extensions
            .push("time-window-seconds".to_string());
    }
}

fn cmd_build(args: BuildArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("build", args.seed);
    let config = resolve_config(&args.stream)?;
    manifest.config = Some(config.clone());
    note_extensions(&config, &mut manifest);
    let series = load_series(&args.stream, &mut manifest)?;
    let graph = build(&series, &config)?;

    println!("nodes {}", graph.node_count());
    println!("edges {}", graph.edge_count());

    let data = GraphData::Message(graph);
    manifest.param("export", format_name(args.export));
    write_output(&args.out, &export_graph(&data, args.export.into()))?;
    write_manifest(&args.out, &manifest)
}

fn cmd_compact(args: CompactArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("compact", args.seed);
    let config = Config {
        drop_self_loops: !args.keep_self_loops,
        ..Config::default()
    };
    manifest.config = Some(config.clone());
    manifest.param("keep_self_loops", args.keep_self_loops);
    manifest.param("export", format_name(args.export));

    let graph = load_graph(&args.input, GraphFormatArg::AdjJson, args.keep_self_loops, &mut manifest)?;
    let GraphData::Message(message_graph) = graph else {
        return Err(CliError::Usage(
            "compact expects a message graph; this file holds a source graph".to_string(),
        ));
    };
    let sources = compact(&message_graph, &config);

    println!("sources {}", sources.node_count());
    println!("edges {}", sources.edge_count());

    write_output(
        &args.out,
        &export_graph(&GraphData::Source(sources), args.export.into()),
    )?;
    write_manifest(&args.out, &manifest)
}

fn render_metrics(metrics: &NetworkMetrics) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "n {}", metrics.n);
    let _ = writeln!(text, "v {}", metrics.v);
    let _ = writeln!(text, "directed_edges {}", metrics.directed_edge_count);
    let _ = writeln!(text, "density {}", fmt6(metrics.density));
    let _ = writeln!(text, "average_degree {}", fmt6(metrics.average_degree));
    let _ = writeln!(text, "diameter {}", metrics.diameter);
    let _ = writeln!(text, "components {}", metrics.component_count);
    text
}

fn cmd_metrics(args: MetricsArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("metrics", args.seed);
    let graph = load_graph(&args.input, args.from, true, &mut manifest)?;
    let metrics = match &graph {
        GraphData::Message(g) => network_metrics(g),
        GraphData::Source(g) => network_metrics(g),
    };
    let text = render_metrics(&metrics);
    print!("{text}");
    if let Some(out) = &args.out {
        write_output(out, text.as_bytes())?;
        write_manifest(out, &manifest)?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("sweep", args.seed);
    let config = resolve_config(&args.stream)?;
    manifest.config = Some(config.clone());
    note_extensions(&config, &mut manifest);
    let series = load_series(&args.stream, &mut manifest)?;

    let spec = SweepSpec {
        sizes: args.sizes.clone(),
        sampling: match args.sampling {
            SamplingArg::Prefix => Sampling::Prefix,
            SamplingArg::Random => Sampling::RandomSubset,
        },
        seed: args.seed,
        repeats: args.repeats,
    };
    manifest.sweep = Some(spec.clone());
    let points = density_sweep(&series, &config, &spec)?;

    write_output(&args.out, sweep_csv(&points).as_bytes())?;
    write_manifest(&args.out, &manifest)?;
    println!("points {}", points.len());

    if args.fit {
        let fit = fit_log(&points)?;
        println!(
            "fit a {} b {} r_squared {}",
            fmt6(fit.a),
            fmt6(fit.b),
            fmt6(fit.r_squared)
        );
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("eval", args.seed);
    manifest.param("undirected", args.undirected);
    manifest.param("allow_self_pairs", args.allow_self_pairs);

    let predicted_bytes = read_input(&args.predicted)?;
    manifest.record_input(&args.predicted, &predicted_bytes);
    let gold_bytes = read_input(&args.gold)?;
    manifest.record_input(&args.gold, &gold_bytes);

    let predicted = EdgeSet::from_csv(&predicted_bytes, args.allow_self_pairs)?;
    let gold = EdgeSet::from_csv(&gold_bytes, args.allow_self_pairs)?;
    let matching = if args.undirected {
        Matching::Undirected
    } else {
        Matching::Directed
    };
    let report = evaluate(&predicted, &gold, matching);

    let mut text = String::new();
    let _ = writeln!(
        text,
        "tp {} fp {} fn {}",
        report.true_positives, report.false_positives, report.false_negatives
    );
    let _ = writeln!(
        text,
        "precision {} recall {} f_measure {}",
        fmt6(report.precision),
        fmt6(report.recall),
        fmt6(report.f_measure)
    );
    print!("{text}");
    if let Some(out) = &args.out {
        write_output(out, text.as_bytes())?;
        write_manifest(out, &manifest)?;
    }
    Ok(())
}

fn cmd_rank(args: RankArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("rank", args.seed);
    manifest.param("top", args.top);
    if let Some(k) = args.primary {
        manifest.param("primary", k);
    }
    let graph = load_graph(&args.input, args.from, true, &mut manifest)?;
    let GraphData::Source(sources) = graph else {
        return Err(CliError::Usage(
            "rank expects a source graph; compact the message graph first".to_string(),
        ));
    };
    if args.primary == Some(0) {
        return Err(CliError::Usage("--primary must be >= 1".to_string()));
    }

    let text = render_ranking(&sources, args.top, args.primary);
    print!("{text}");
    if let Some(out) = &args.out {
        write_output(out, text.as_bytes())?;
        write_manifest(out, &manifest)?;
    }
    Ok(())
}

fn render_ranking(sources: &SourceGraph, top: usize, primary: Option<usize>) -> String {
    let ranking = rank_sources(sources);
    let mut text = String::from(
        "rank source_id in_weight in_degree out_degree earliest_timestamp rating score\n",
    );
    for (position, entry) in ranking.entries.iter().take(top).enumerate() {
        let _ = writeln!(
            text,
            "{} {} {} {} {} {} {} {}",
            position + 1,
            entry.source_id,
            entry.in_weight,
            entry.in_degree,
            entry.out_degree,
            entry.earliest_timestamp,
            fmt6(entry.rating),
            fmt6(entry.score)
        );
    }
    if let Some(k) = primary {
        let _ = writeln!(text, "# {PRIMARY_HEURISTIC}");
        for source_id in infer_primary(sources, k) {
            let _ = writeln!(text, "primary {source_id}");
        }
    }
    text
}

fn cmd_export(args: ExportArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("export", args.seed);
    manifest.param("to", format_name(args.to));
    manifest.param("allow_self_loops", args.allow_self_loops);
    let graph = load_graph(&args.input, args.from, args.allow_self_loops, &mut manifest)?;
    write_output(&args.out, &export_graph(&graph, args.to.into()))?;
    write_manifest(&args.out, &manifest)?;
    println!("kind {}", graph.kind());
    Ok(())
}

fn format_name(format: ExportFormatArg) -> &'static str {
    match format {
        ExportFormatArg::AdjJson => "adj-json",
        ExportFormatArg::EdgeCsv => "edge-csv",
        ExportFormatArg::Dot => "dot",
        ExportFormatArg::Graphml => "graphml",
    }
}
