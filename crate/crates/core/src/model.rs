//! Core domain types shared by every other module: publications, ordered
//! series, build configuration, and the message- and source-level graphs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Epoch seconds for 1990-01-01T00:00:00Z, the default lower plausibility bound.
pub const DEFAULT_MIN_TIMESTAMP: i64 = 631_152_000;
/// Epoch seconds for 2100-12-31T23:59:59Z, the default upper plausibility bound.
pub const DEFAULT_MAX_TIMESTAMP: i64 = 4_133_980_799;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("duplicate message_id `{0}`")]
    DuplicateMessageId(String),
    #[error("publication `{message_id}` has invalid rating {rating} (must be positive and finite)")]
    InvalidRating { message_id: String, rating: f64 },
    #[error("publication `{message_id}` timestamp {timestamp} outside plausible range [{min}, {max}]")]
    TimestampOutOfRange {
        message_id: String,
        timestamp: i64,
        min: i64,
        max: i64,
    },
    #[error("edge endpoint {index} out of range for graph with {nodes} nodes")]
    EdgeEndpointOutOfRange { index: usize, nodes: usize },
    #[error("self-loop on message node {0}")]
    MessageSelfLoop(usize),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("tau must be >= 1")]
    ZeroTau,
    #[error("tau_unit = seconds requires time_window_seconds")]
    MissingTimeWindow,
    #[error("time_window_seconds must be positive")]
    ZeroTimeWindow,
}

/// Inclusive plausibility bounds for publication timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimestampRange {
    pub min: i64,
    pub max: i64,
}

impl Default for TimestampRange {
    fn default() -> Self {
        Self {
            min: DEFAULT_MIN_TIMESTAMP,
            max: DEFAULT_MAX_TIMESTAMP,
        }
    }
}

impl TimestampRange {
    pub fn contains(&self, timestamp: i64) -> bool {
        timestamp >= self.min && timestamp <= self.max
    }
}

/// One timestamped message from a rated source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Publication {
    pub message_id: String,
    pub source_id: String,
    /// Absolute time in epoch seconds, UTC.
    pub timestamp: i64,
    /// Positive, finite source-rating score.
    pub rating: f64,
}

impl Publication {
    /// Checks the per-record invariants: positive finite rating and a
    /// timestamp inside `range`.
    pub fn validate(&self, range: TimestampRange) -> Result<(), ModelError> {
        if !(self.rating.is_finite() && self.rating > 0.0) {
            return Err(ModelError::InvalidRating {
                message_id: self.message_id.clone(),
                rating: self.rating,
            });
        }
        if !range.contains(self.timestamp) {
            return Err(ModelError::TimestampOutOfRange {
                message_id: self.message_id.clone(),
                timestamp: self.timestamp,
                min: range.min,
                max: range.max,
            });
        }
        Ok(())
    }
}

/// Time-ordered sequence of publications; node index i in the series is the
/// i of the window rule.
///
/// Construction goes through [`normalize_series`], which sorts by timestamp
/// (stable, so equal timestamps keep input order) and enforces uniqueness of
/// message ids and positivity of ratings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PublicationSeries {
    items: Vec<Publication>,
}

impl PublicationSeries {
    pub fn items(&self) -> &[Publication] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Ratings in series order.
    pub fn ratings(&self) -> Vec<f64> {
        self.items.iter().map(|p| p.rating).collect()
    }

    /// Sub-series keeping only publications from `sources`, preserving order.
    pub fn filter_sources(&self, sources: &BTreeSet<String>) -> PublicationSeries {
        PublicationSeries {
            items: self
                .items
                .iter()
                .filter(|p| sources.contains(&p.source_id))
                .cloned()
                .collect(),
        }
    }

    /// Largest prefix that contains exactly `count` distinct sources — the
    /// stream truncated just before the (count+1)-th source first appears.
    /// `None` when the whole series has fewer than `count` sources.
    pub fn prefix_with_sources(&self, count: usize) -> Option<PublicationSeries> {
        let mut seen = BTreeSet::new();
        for (idx, p) in self.items.iter().enumerate() {
            if !seen.contains(p.source_id.as_str()) {
                if seen.len() == count {
                    return Some(PublicationSeries {
                        items: self.items[..idx].to_vec(),
                    });
                }
                seen.insert(p.source_id.as_str());
            }
        }
        if seen.len() == count {
            return Some(self.clone());
        }
        None
    }

    /// Distinct source ids, sorted.
    pub fn distinct_sources(&self) -> BTreeSet<String> {
        self.items.iter().map(|p| p.source_id.clone()).collect()
    }
}

/// Sorts publications into a deterministic series and checks series-level
/// invariants.
///
/// Sorting is stable on timestamp, so records that share a timestamp keep
/// their input order. The result is identical for any input permutation of
/// records with distinct timestamps.
pub fn normalize_series(raw: Vec<Publication>) -> Result<PublicationSeries, ModelError> {
    let mut seen = BTreeSet::new();
    for p in &raw {
        if !(p.rating.is_finite() && p.rating > 0.0) {
            return Err(ModelError::InvalidRating {
                message_id: p.message_id.clone(),
                rating: p.rating,
            });
        }
        if !seen.insert(p.message_id.clone()) {
            return Err(ModelError::DuplicateMessageId(p.message_id.clone()));
        }
    }
    let mut items = raw;
    items.sort_by_key(|p| p.timestamp);
    Ok(PublicationSeries { items })
}

/// Graph construction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Plain horizontal visibility graph, edges oriented backward in time.
    Hvg,
    /// HVG edges plus the backward window-dominance edges (the default).
    Thvg,
    /// Only the window-dominance edges, taken literally.
    Eq1Only,
}

/// How the window parameter is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauUnit {
    /// Node-index distance `j - i` (the standard semantics).
    Index,
    /// Wall-clock distance `timestamp_j - timestamp_i`; an extension for
    /// irregular feeds, flagged in run manifests.
    Seconds,
}

/// Build configuration for the visibility and compaction stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// Window of the dominance rule, in node indices. Must be >= 1.
    pub tau: usize,
    pub method: Method,
    pub tau_unit: TauUnit,
    /// Drop same-source self-loops during compaction.
    pub drop_self_loops: bool,
    /// Wall-clock window, required when `tau_unit` is `Seconds`.
    pub time_window_seconds: Option<u64>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            tau: 1,
            method: Method::Thvg,
            tau_unit: TauUnit::Index,
            drop_self_loops: true,
            time_window_seconds: None,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.tau < 1 {
            return Err(ConfigError::ZeroTau);
        }
        if self.tau_unit == TauUnit::Seconds {
            match self.time_window_seconds {
                None => return Err(ConfigError::MissingTimeWindow),
                Some(0) => return Err(ConfigError::ZeroTimeWindow),
                Some(_) => {}
            }
        }
        Ok(())
    }
}

/// Directed message-level graph over the nodes of a series.
///
/// Edges are stored as `(from, to)` index pairs. Directed builders only emit
/// edges pointing backward in time (`from > to`); the undirected HVG is
/// represented by storing both directions of each link.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MessageGraph {
    nodes: Vec<Publication>,
    edges: BTreeSet<(usize, usize)>,
}

impl MessageGraph {
    /// Builds a graph from node metadata and an edge list, rejecting
    /// self-loops and out-of-range endpoints. Duplicate edges collapse.
    pub fn from_parts(
        nodes: Vec<Publication>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ModelError> {
        let n = nodes.len();
        let mut set = BTreeSet::new();
        for (from, to) in edges {
            if from >= n {
                return Err(ModelError::EdgeEndpointOutOfRange { index: from, nodes: n });
            }
            if to >= n {
                return Err(ModelError::EdgeEndpointOutOfRange { index: to, nodes: n });
            }
            if from == to {
                return Err(ModelError::MessageSelfLoop(from));
            }
            set.insert((from, to));
        }
        Ok(Self { nodes, edges: set })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Publication] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &Publication {
        &self.nodes[index]
    }

    /// Directed edges as `(from, to)` pairs, in deterministic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_set(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    /// Dense adjacency view: `matrix[from][to] = 1` iff the directed edge
    /// exists (row = later node, column = earlier node for backward edges).
    /// Intended for small graphs; it allocates n*n cells.
    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.nodes.len();
        let mut m = vec![vec![0u8; n]; n];
        for &(from, to) in &self.edges {
            m[from][to] = 1;
        }
        m
    }
}

/// Per-source aggregate carried by a [`SourceGraph`] node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceNode {
    pub earliest_timestamp: i64,
    /// Maximum rating observed across the source's messages.
    pub rating: f64,
    pub message_count: u64,
}

/// Compacted directed source-influence network: simple (at most one edge per
/// ordered pair) with integer weights counting the merged message edges.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceGraph {
    nodes: BTreeMap<String, SourceNode>,
    edges: BTreeMap<(String, String), u64>,
}

impl SourceGraph {
    pub fn new(
        nodes: BTreeMap<String, SourceNode>,
        edges: BTreeMap<(String, String), u64>,
    ) -> Self {
        Self { nodes, edges }
    }

    /// Builds a graph from a weighted edge list alone; nodes not mentioned in
    /// any edge do not exist. Node aggregates default to zero/1.0 since an
    /// edge list carries none. Repeated pairs have their weights summed.
    pub fn from_edge_list(edges: impl IntoIterator<Item = (String, String, u64)>) -> Self {
        let mut node_map = BTreeMap::new();
        let mut edge_map: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (from, to, weight) in edges {
            node_map.entry(from.clone()).or_insert(SourceNode {
                earliest_timestamp: 0,
                rating: 1.0,
                message_count: 0,
            });
            node_map.entry(to.clone()).or_insert(SourceNode {
                earliest_timestamp: 0,
                rating: 1.0,
                message_count: 0,
            });
            *edge_map.entry((from, to)).or_insert(0) += weight;
        }
        Self {
            nodes: node_map,
            edges: edge_map,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &BTreeMap<String, SourceNode> {
        &self.nodes
    }

    /// Weighted directed edges in deterministic (lexicographic) order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        self.edges
            .iter()
            .map(|((from, to), w)| (from.as_str(), to.as_str(), *w))
    }

    pub fn weight(&self, from: &str, to: &str) -> Option<u64> {
        self.edges.get(&(from.to_string(), to.to_string())).copied()
    }

    pub fn total_edge_weight(&self) -> u64 {
        self.edges.values().sum()
    }
}

/// Aggregate structural measurements of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetrics {
    pub n: usize,
    /// Undirected link count: a reciprocal directed pair counts once.
    pub v: usize,
    pub directed_edge_count: usize,
    /// 2v / (n(n-1)); defined as 0 when n < 2.
    pub density: f64,
    /// 2v / n; 0 for the empty graph.
    pub average_degree: f64,
    /// Largest finite shortest-path distance on the undirected projection,
    /// maximized over connected components.
    pub diameter: usize,
    pub component_count: usize,
    pub degree_histogram: BTreeMap<usize, usize>,
}

/// Least-squares fit of `D = a * ln(n) + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    /// 1 - SS_res / SS_tot; 1.0 for an exact fit.
    pub r_squared: f64,
    pub points: Vec<(usize, f64)>,
}

/// Precision/recall/F-measure report over directed edge sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn publication(id: &str, source: &str, t: i64, rating: f64) -> Publication {
        Publication {
            message_id: id.to_string(),
            source_id: source.to_string(),
            timestamp: t,
            rating,
        }
    }

    #[test]
    fn normalize_empty_input() {
        let series = normalize_series(Vec::new()).unwrap();
        assert_eq!(series.len(), 0);
        assert!(series.is_empty());
    }

    #[test]
    fn normalize_sorts_by_timestamp() {
        let raw = vec![
            publication("a", "s1", 3, 1.0),
            publication("b", "s2", 1, 1.0),
            publication("c", "s3", 2, 1.0),
        ];
        let series = normalize_series(raw).unwrap();
        let ids: Vec<_> = series.items().iter().map(|p| p.message_id.as_str()).collect();
        assert_eq!(ids, ["b", "c", "a"]);
    }

    #[test]
    fn normalize_keeps_input_order_on_equal_timestamps() {
        let raw = vec![
            publication("first", "zeta", 5, 1.0),
            publication("second", "alpha", 5, 1.0),
        ];
        let series = normalize_series(raw).unwrap();
        let ids: Vec<_> = series.items().iter().map(|p| p.message_id.as_str()).collect();
        assert_eq!(ids, ["first", "second"]);
    }

    #[test]
    fn normalize_rejects_duplicate_message_id() {
        let raw = vec![
            publication("dup", "s1", 1, 1.0),
            publication("dup", "s2", 2, 1.0),
        ];
        let err = normalize_series(raw).unwrap_err();
        assert!(matches!(err, ModelError::DuplicateMessageId(id) if id == "dup"));
    }

    #[test]
    fn normalize_rejects_nonpositive_rating() {
        let raw = vec![publication("bad", "s1", 1, 0.0)];
        let err = normalize_series(raw).unwrap_err();
        assert!(matches!(err, ModelError::InvalidRating { message_id, .. } if message_id == "bad"));
    }

    #[test]
    fn normalize_is_idempotent() {
        let raw = vec![
            publication("a", "s1", 3, 1.0),
            publication("b", "s2", 1, 2.0),
            publication("c", "s3", 1, 3.0),
        ];
        let once = normalize_series(raw).unwrap();
        let twice = normalize_series(once.items().to_vec()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn publication_validate_checks_timestamp_range() {
        let p = publication("m", "s", 100, 1.0);
        assert!(p.validate(TimestampRange::default()).is_err());
        assert!(p
            .validate(TimestampRange { min: 0, max: 1000 })
            .is_ok());
        let ok = publication("m", "s", 1_609_459_200, 1.0);
        assert!(ok.validate(TimestampRange::default()).is_ok());
    }

    #[test]
    fn config_validation() {
        let mut config = Config::default();
        assert!(config.validate().is_ok());
        config.tau = 0;
        assert!(matches!(config.validate(), Err(ConfigError::ZeroTau)));
        config.tau = 2;
        config.tau_unit = TauUnit::Seconds;
        assert!(matches!(
            config.validate(),
            Err(ConfigError::MissingTimeWindow)
        ));
        config.time_window_seconds = Some(0);
        assert!(matches!(config.validate(), Err(ConfigError::ZeroTimeWindow)));
        config.time_window_seconds = Some(3600);
        assert!(config.validate().is_ok());
    }

    #[test]
    fn message_graph_rejects_self_loops_and_bad_indices() {
        let nodes = vec![
            publication("a", "s1", 1, 1.0),
            publication("b", "s2", 2, 2.0),
        ];
        assert!(matches!(
            MessageGraph::from_parts(nodes.clone(), [(1, 1)]),
            Err(ModelError::MessageSelfLoop(1))
        ));
        assert!(matches!(
            MessageGraph::from_parts(nodes.clone(), [(2, 0)]),
            Err(ModelError::EdgeEndpointOutOfRange { index: 2, .. })
        ));
        let g = MessageGraph::from_parts(nodes, [(1, 0), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn adjacency_matrix_matches_edge_set() {
        let nodes = vec![
            publication("a", "s1", 1, 3.0),
            publication("b", "s2", 2, 1.0),
            publication("c", "s3", 3, 2.0),
        ];
        let g = MessageGraph::from_parts(nodes, [(1, 0), (2, 1), (2, 0)]).unwrap();
        let m = g.adjacency_matrix();
        for (from, row) in m.iter().enumerate() {
            for (to, &cell) in row.iter().enumerate() {
                assert_eq!(cell == 1, g.has_edge(from, to));
            }
        }
    }

    #[test]
    fn source_graph_from_edge_list_sums_duplicates() {
        let g = SourceGraph::from_edge_list([
            ("a".to_string(), "b".to_string(), 1),
            ("a".to_string(), "b".to_string(), 2),
            ("b".to_string(), "a".to_string(), 1),
        ]);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.weight("a", "b"), Some(3));
        assert_eq!(g.weight("b", "a"), Some(1));
        assert_eq!(g.total_edge_weight(), 4);
    }
}
