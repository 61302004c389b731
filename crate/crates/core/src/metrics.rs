//! Network measurements: density, degree statistics, diameter, the density
//! sweep over growing node counts, logarithmic fitting, and source ranking.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compaction::compact;
use crate::model::{
    Config, ConfigError, LogFit, MessageGraph, NetworkMetrics, PublicationSeries, SourceGraph,
};
use crate::visibility::build;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("sweep sizes must be nonempty")]
    EmptySizes,
    #[error("sweep sizes must be strictly increasing")]
    SizesNotIncreasing,
    #[error("sweep size {0} is below the minimum of 2")]
    SizeTooSmall(usize),
    #[error("sweep repeats must be >= 1")]
    ZeroRepeats,
    #[error("requested size {requested} exceeds the {available} distinct sources available")]
    SizeUnavailable { requested: usize, available: usize },
    #[error("log fit needs at least 2 points with distinct n")]
    TooFewDistinctPoints,
    #[error("log fit point has n = {0}, below the minimum of 2")]
    PointBelowMinimum(usize),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Minimal topology view shared by both graph kinds so the same measurement
/// code serves message graphs and source graphs.
pub trait GraphTopology {
    fn node_count(&self) -> usize;
    /// Directed edges as index pairs under a fixed deterministic node order.
    fn directed_edges(&self) -> Vec<(usize, usize)>;
}

impl GraphTopology for MessageGraph {
    fn node_count(&self) -> usize {
        self.node_count()
    }

    fn directed_edges(&self) -> Vec<(usize, usize)> {
        self.edges().collect()
    }
}

impl GraphTopology for SourceGraph {
    fn node_count(&self) -> usize {
        self.node_count()
    }

    fn directed_edges(&self) -> Vec<(usize, usize)> {
        let index: std::collections::BTreeMap<&str, usize> = self
            .nodes()
            .keys()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        self.edges()
            .map(|(from, to, _)| (index[from], index[to]))
            .collect()
    }
}

/// Density, degrees, diameter and component structure of a graph.
///
/// The link count v is undirected: a reciprocal directed pair counts once.
/// Density is 2v / (n(n-1)) and defined as 0 when n < 2. The diameter is the
/// largest finite shortest-path distance on the undirected projection, taken
/// per connected component and maximized over components.
pub fn network_metrics<G: GraphTopology>(graph: &G) -> NetworkMetrics {
    let n = graph.node_count();
    let directed = graph.directed_edges();
    let directed_edge_count = directed.len();

    let mut undirected: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(from, to) in &directed {
        if from != to {
            undirected.insert((from.min(to), from.max(to)));
        }
    }
    let v = undirected.len();

    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in &undirected {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }

    let mut degree_histogram = std::collections::BTreeMap::new();
    for neighbors in &adjacency {
        *degree_histogram.entry(neighbors.len()).or_insert(0) += 1;
    }

    let (diameter, component_count) = diameter_and_components(&adjacency);

    let density = if n >= 2 {
        2.0 * v as f64 / (n as f64 * (n as f64 - 1.0))
    } else {
        0.0
    };
    let average_degree = if n >= 1 { 2.0 * v as f64 / n as f64 } else { 0.0 };

    NetworkMetrics {
        n,
        v,
        directed_edge_count,
        density,
        average_degree,
        diameter,
        component_count,
        degree_histogram,
    }
}

/// BFS from every node; eccentricities stay finite because distances are only
/// taken within each node's own component.
fn diameter_and_components(adjacency: &[Vec<usize>]) -> (usize, usize) {
    let n = adjacency.len();
    let mut component = vec![usize::MAX; n];
    let mut component_count = 0;
    let mut diameter = 0;
    let mut distance = vec![usize::MAX; n];

    for start in 0..n {
        if component[start] == usize::MAX {
            component[start] = component_count;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &w in &adjacency[u] {
                    if component[w] == usize::MAX {
                        component[w] = component_count;
                        queue.push_back(w);
                    }
                }
            }
            component_count += 1;
        }

        distance.fill(usize::MAX);
        distance[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &w in &adjacency[u] {
                if distance[w] == usize::MAX {
                    distance[w] = distance[u] + 1;
                    diameter = diameter.max(distance[w]);
                    queue.push_back(w);
                }
            }
        }
    }

    (diameter, component_count)
}

/// How the sub-series for each sweep size is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Shortest series prefix reaching the target source count.
    Prefix,
    /// Random subsets of sources, averaged over repeats.
    RandomSubset,
}

/// Node-count targets and sampling protocol for [`density_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Strictly increasing source-count targets, each >= 2.
    pub sizes: Vec<usize>,
    pub sampling: Sampling,
    pub seed: u64,
    /// Averaging runs per size (used by random-subset sampling).
    pub repeats: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.sizes.is_empty() {
            return Err(MetricsError::EmptySizes);
        }
        for window in self.sizes.windows(2) {
            if window[1] <= window[0] {
                return Err(MetricsError::SizesNotIncreasing);
            }
        }
        if let Some(&small) = self.sizes.iter().find(|&&s| s < 2) {
            return Err(MetricsError::SizeTooSmall(small));
        }
        if self.repeats < 1 {
            return Err(MetricsError::ZeroRepeats);
        }
        Ok(())
    }
}

/// Density of the compacted source network at each requested node count.
///
/// Each size draws a sub-series (prefix or seeded random source subsets),
/// builds the configured message graph, compacts it and measures density.
/// Randomness is seeded per size, so the output is deterministic for a fixed
/// seed and independent of evaluation order.
pub fn density_sweep(
    series: &PublicationSeries,
    config: &Config,
    spec: &SweepSpec,
) -> Result<Vec<(usize, f64)>, MetricsError> {
    spec.validate()?;
    config.validate()?;

    let sources: Vec<String> = series.distinct_sources().into_iter().collect();
    if let Some(&largest) = spec.sizes.last() {
        if largest > sources.len() {
            return Err(MetricsError::SizeUnavailable {
                requested: largest,
                available: sources.len(),
            });
        }
    }

    let mut points = Vec::with_capacity(spec.sizes.len());
    for &size in &spec.sizes {
        let density = match spec.sampling {
            Sampling::Prefix => {
                let prefix = series
                    .prefix_with_sources(size)
                    .expect("size checked against available sources");
                density_of(&prefix, config)?
            }
            Sampling::RandomSubset => {
                // One RNG per size keyed by (seed, size): evaluation order
                // and concurrency cannot change the draw.
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(size as u64);
                let mut total = 0.0;
                for _ in 0..spec.repeats {
                    let mut pool = sources.clone();
                    pool.shuffle(&mut rng);
                    let chosen: BTreeSet<String> = pool.into_iter().take(size).collect();
                    total += density_of(&series.filter_sources(&chosen), config)?;
                }
                total / spec.repeats as f64
            }
        };
        points.push((size, density));
    }
    Ok(points)
}

fn density_of(series: &PublicationSeries, config: &Config) -> Result<f64, MetricsError> {
    let message_graph = build(series, config)?;
    let source_graph = compact(&message_graph, config);
    Ok(network_metrics(&source_graph).density)
}

/// Sweep points rendered as a two-column CSV.
pub fn sweep_csv(points: &[(usize, f64)]) -> String {
    let mut out = String::from("n,D\n");
    for &(n, density) in points {
        out.push_str(&format!("{n},{density:.6}\n"));
    }
    out
}

/// Closed-form least squares for D = a * ln(n) + b.
pub fn fit_log(points: &[(usize, f64)]) -> Result<LogFit, MetricsError> {
    if let Some(&(n, _)) = points.iter().find(|&&(n, _)| n < 2) {
        return Err(MetricsError::PointBelowMinimum(n));
    }
    let distinct: BTreeSet<usize> = points.iter().map(|&(n, _)| n).collect();
    if distinct.len() < 2 {
        return Err(MetricsError::TooFewDistinctPoints);
    }

    let count = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, d)| d).collect();
    let mean_x = xs.iter().sum::<f64>() / count;
    let mean_y = ys.iter().sum::<f64>() / count;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let a = sxy / sxx;
    let b = mean_y - a * mean_x;

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let predicted = a * x + b;
        ss_res += (y - predicted) * (y - predicted);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    // Constant data fits exactly with a = 0.
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };

    Ok(LogFit {
        a,
        b,
        r_squared,
        points: points.to_vec(),
    })
}

/// One row of a source ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub source_id: String,
    /// Sum of incoming edge weights; the ranking score.
    pub in_weight: u64,
    pub in_degree: usize,
    pub out_degree: usize,
    pub earliest_timestamp: i64,
    pub rating: f64,
    pub score: f64,
}

/// Sources ordered by influence score (descending), ties broken by earliest
/// timestamp then source id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SourceRanking {
    pub entries: Vec<RankEntry>,
}

/// Ranks every source by the total weight of its incoming edges.
pub fn rank_sources(graph: &SourceGraph) -> SourceRanking {
    let mut entries: Vec<RankEntry> = graph
        .nodes()
        .iter()
        .map(|(source_id, node)| RankEntry {
            source_id: source_id.clone(),
            in_weight: 0,
            in_degree: 0,
            out_degree: 0,
            earliest_timestamp: node.earliest_timestamp,
            rating: node.rating,
            score: 0.0,
        })
        .collect();
    let index: std::collections::BTreeMap<String, usize> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.source_id.clone(), i))
        .collect();

    for (from, to, weight) in graph.edges() {
        entries[index[to]].in_weight += weight;
        entries[index[to]].in_degree += 1;
        entries[index[from]].out_degree += 1;
    }
    for entry in &mut entries {
        entry.score = entry.in_weight as f64;
    }
    entries.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.earliest_timestamp.cmp(&b.earliest_timestamp))
            .then(a.source_id.cmp(&b.source_id))
    });
    SourceRanking { entries }
}

/// Nominates primary-source candidates: heavily pointed to, pointing to few
/// others, earliest first. This is a declared heuristic; callers should
/// surface it as such.
pub fn infer_primary(graph: &SourceGraph, top_k: usize) -> Vec<String> {
    let mut entries = rank_sources(graph).entries;
    entries.sort_by(|a, b| {
        b.in_weight
            .cmp(&a.in_weight)
            .then(a.out_degree.cmp(&b.out_degree))
            .then(a.earliest_timestamp.cmp(&b.earliest_timestamp))
            .then(a.source_id.cmp(&b.source_id))
    });
    entries
        .into_iter()
        .take(top_k)
        .map(|e| e.source_id)
        .collect()
}

/// Human-readable statement of the [`infer_primary`] ordering, for output
/// metadata.
pub const PRIMARY_HEURISTIC: &str =
    "heuristic: in_weight desc, out_degree asc, earliest_timestamp asc, source_id asc";
