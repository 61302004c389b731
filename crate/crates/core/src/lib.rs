//! Turns timestamped, rated publication streams into message-level
//! visibility graphs, compacts them into directed source-influence networks,
//! and measures the result: density, diameter, degree statistics, log-law
//! fits of the density/size relation, source rankings with primary-source
//! nomination, and precision/recall scoring of predicted edges against a
//! gold standard.
//!
//! The typical pipeline:
//!
//! 1. [`ingest::parse_publications`] reads a CSV or JSONL stream (estimating
//!    ratings when the feed carries none),
//! 2. [`model::normalize_series`] orders it deterministically,
//! 3. [`visibility::build`] constructs the message graph for the configured
//!    method and window,
//! 4. [`compaction::compact`] collapses it into the source network,
//! 5. [`metrics`] and [`evaluation`] measure, rank, and score,
//! 6. [`interchange`] moves graphs in and out as DOT, GraphML, edge CSV, or
//!    adjacency JSON.

pub mod compaction;
pub mod evaluation;
pub mod ingest;
pub mod interchange;
pub mod metrics;
pub mod model;
pub mod visibility;

pub use compaction::compact;
pub use evaluation::{evaluate, f_measure, EdgeSet, EvalError, Matching};
pub use ingest::{
    estimate_ratings, parse_publications, parse_records, IngestError, InputFormat, PublicationRecord,
    RatingMode, RatingPolicy,
};
pub use interchange::{export_graph, import_graph, ExportFormat, GraphData, ImportFormat, InterchangeError};
pub use metrics::{
    density_sweep, fit_log, infer_primary, network_metrics, rank_sources, sweep_csv, GraphTopology,
    MetricsError, RankEntry, Sampling, SourceRanking, SweepSpec, PRIMARY_HEURISTIC,
};
pub use model::{
    normalize_series, Config, ConfigError, EvalReport, LogFit, MessageGraph, Method, ModelError,
    NetworkMetrics, Publication, PublicationSeries, SourceGraph, SourceNode, TauUnit,
    TimestampRange,
};
pub use visibility::{build, build_hvg_directed, build_hvg_undirected, build_thvg};
