//! Graph interchange: DOT, GraphML, weighted edge-list CSV, and the
//! adjacency-matrix JSON document.
//!
//! The JSON document is the full-fidelity format: it carries the node list
//! with metadata plus the dense matrix, with rows indexing the edge origin
//! (the later node in a message graph) and columns the target. Edge-list CSV
//! carries only `from,to,weight` and therefore imports as a source graph
//! whose node aggregates take defaults.
//!
//! All exports are byte-deterministic for a fixed graph.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{MessageGraph, Publication, SourceGraph, SourceNode};

#[derive(Debug, Error)]
pub enum InterchangeError {
    #[error("input is not valid UTF-8")]
    NotUtf8,
    #[error("invalid JSON document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: {reason}")]
    Schema { field: String, reason: String },
    #[error("matrix is not square: row {row} has {found} columns, expected {expected}")]
    NonSquareMatrix {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("matrix has {rows} rows but the document lists {nodes} nodes")]
    MatrixNodeMismatch { rows: usize, nodes: usize },
    #[error("self-loop on `{0}` (pass the self-loop flag to accept it)")]
    SelfLoop(String),
    #[error("message adjacency entries must be 0 or 1, found {value} at ({row}, {col})")]
    NonBooleanEntry { row: usize, col: usize, value: u64 },
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: edge weight must be >= 1")]
    ZeroWeight { line: u64 },
}

/// Export encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Dot,
    GraphMl,
    EdgeCsv,
    AdjJson,
}

/// Import encodings (DOT and GraphML are write-only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImportFormat {
    AdjJson,
    EdgeCsv,
}

/// A graph of either kind, as read from or written to interchange files.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphData {
    Message(MessageGraph),
    Source(SourceGraph),
}

impl GraphData {
    pub fn kind(&self) -> &'static str {
        match self {
            GraphData::Message(_) => "message",
            GraphData::Source(_) => "source",
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum AdjDoc {
    Message {
        n: usize,
        nodes: Vec<Publication>,
        matrix: Vec<Vec<u64>>,
    },
    Source {
        n: usize,
        nodes: Vec<SourceNodeDoc>,
        matrix: Vec<Vec<u64>>,
    },
}

#[derive(Serialize, Deserialize)]
struct SourceNodeDoc {
    source_id: String,
    earliest_timestamp: i64,
    rating: f64,
    message_count: u64,
}

/// Renders `graph` in the requested format.
pub fn export_graph(graph: &GraphData, format: ExportFormat) -> Vec<u8> {
    let text = match (graph, format) {
        (GraphData::Message(g), ExportFormat::AdjJson) => message_adj_json(g),
        (GraphData::Source(g), ExportFormat::AdjJson) => source_adj_json(g),
        (GraphData::Message(g), ExportFormat::EdgeCsv) => {
            edge_csv(g.edges().map(|(from, to)| {
                (
                    g.node(from).message_id.clone(),
                    g.node(to).message_id.clone(),
                    1u64,
                )
            }))
        }
        (GraphData::Source(g), ExportFormat::EdgeCsv) => {
            edge_csv(g.edges().map(|(f, t, w)| (f.to_string(), t.to_string(), w)))
        }
        (GraphData::Message(g), ExportFormat::Dot) => dot(
            g.nodes().iter().map(|p| (p.message_id.clone(), p.rating)),
            g.edges().map(|(from, to)| {
                (
                    g.node(from).message_id.clone(),
                    g.node(to).message_id.clone(),
                    1u64,
                )
            }),
        ),
        (GraphData::Source(g), ExportFormat::Dot) => dot(
            g.nodes().iter().map(|(id, node)| (id.clone(), node.rating)),
            g.edges().map(|(f, t, w)| (f.to_string(), t.to_string(), w)),
        ),
        (GraphData::Message(g), ExportFormat::GraphMl) => graphml(
            g.nodes().iter().map(|p| p.message_id.clone()),
            g.edges().map(|(from, to)| {
                (
                    g.node(from).message_id.clone(),
                    g.node(to).message_id.clone(),
                    1u64,
                )
            }),
        ),
        (GraphData::Source(g), ExportFormat::GraphMl) => graphml(
            g.nodes().keys().cloned(),
            g.edges().map(|(f, t, w)| (f.to_string(), t.to_string(), w)),
        ),
    };
    text.into_bytes()
}

/// Parses a graph file; the inverse of [`export_graph`] for the two
/// readable formats.
pub fn import_graph(
    input: &[u8],
    format: ImportFormat,
    allow_self_loops: bool,
) -> Result<GraphData, InterchangeError> {
    match format {
        ImportFormat::AdjJson => import_adj_json(input, allow_self_loops),
        ImportFormat::EdgeCsv => Ok(GraphData::Source(import_edge_csv(input, allow_self_loops)?)),
    }
}

fn message_adj_json(graph: &MessageGraph) -> String {
    let matrix: Vec<Vec<u64>> = graph
        .adjacency_matrix()
        .into_iter()
        .map(|row| row.into_iter().map(u64::from).collect())
        .collect();
    let doc = AdjDoc::Message {
        n: graph.node_count(),
        nodes: graph.nodes().to_vec(),
        matrix,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

fn source_adj_json(graph: &SourceGraph) -> String {
    let ids: Vec<&String> = graph.nodes().keys().collect();
    let mut matrix = vec![vec![0u64; ids.len()]; ids.len()];
    let index: std::collections::BTreeMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    for (from, to, weight) in graph.edges() {
        matrix[index[from]][index[to]] = weight;
    }
    let doc = AdjDoc::Source {
        n: ids.len(),
        nodes: graph
            .nodes()
            .iter()
            .map(|(id, node)| SourceNodeDoc {
                source_id: id.clone(),
                earliest_timestamp: node.earliest_timestamp,
                rating: node.rating,
                message_count: node.message_count,
            })
            .collect(),
        matrix,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

fn import_adj_json(input: &[u8], allow_self_loops: bool) -> Result<GraphData, InterchangeError> {
    let doc: AdjDoc = serde_json::from_slice(input)?;
    match doc {
        AdjDoc::Message { n, nodes, matrix } => {
            if nodes.len() != n {
                return Err(InterchangeError::Schema {
                    field: "n".to_string(),
                    reason: format!("declares {n} nodes but {} are listed", nodes.len()),
                });
            }
            validate_matrix(&matrix, n)?;
            let mut seen = std::collections::BTreeSet::new();
            for (i, node) in nodes.iter().enumerate() {
                if !(node.rating.is_finite() && node.rating > 0.0) {
                    return Err(InterchangeError::Schema {
                        field: format!("nodes[{i}].rating"),
                        reason: format!("{} is not positive and finite", node.rating),
                    });
                }
                if !seen.insert(node.message_id.as_str()) {
                    return Err(InterchangeError::Schema {
                        field: format!("nodes[{i}].message_id"),
                        reason: format!("duplicate message_id `{}`", node.message_id),
                    });
                }
            }
            let mut edges = Vec::new();
            for (row, cols) in matrix.iter().enumerate() {
                for (col, &value) in cols.iter().enumerate() {
                    match value {
                        0 => {}
                        1 => {
                            if row == col {
                                return Err(InterchangeError::SelfLoop(
                                    nodes[row].message_id.clone(),
                                ));
                            }
                            edges.push((row, col));
                        }
                        other => {
                            return Err(InterchangeError::NonBooleanEntry {
                                row,
                                col,
                                value: other,
                            })
                        }
                    }
                }
            }
            let graph = MessageGraph::from_parts(nodes, edges).map_err(|e| {
                InterchangeError::Schema {
                    field: "matrix".to_string(),
                    reason: e.to_string(),
                }
            })?;
            Ok(GraphData::Message(graph))
        }
        AdjDoc::Source { n, nodes, matrix } => {
            if nodes.len() != n {
                return Err(InterchangeError::Schema {
                    field: "n".to_string(),
                    reason: format!("declares {n} nodes but {} are listed", nodes.len()),
                });
            }
            validate_matrix(&matrix, n)?;
            let mut node_map = std::collections::BTreeMap::new();
            for (i, node) in nodes.iter().enumerate() {
                if !(node.rating.is_finite() && node.rating > 0.0) {
                    return Err(InterchangeError::Schema {
                        field: format!("nodes[{i}].rating"),
                        reason: format!("{} is not positive and finite", node.rating),
                    });
                }
                let previous = node_map.insert(
                    node.source_id.clone(),
                    SourceNode {
                        earliest_timestamp: node.earliest_timestamp,
                        rating: node.rating,
                        message_count: node.message_count,
                    },
                );
                if previous.is_some() {
                    return Err(InterchangeError::Schema {
                        field: format!("nodes[{i}].source_id"),
                        reason: format!("duplicate source_id `{}`", node.source_id),
                    });
                }
            }
            let mut edge_map = std::collections::BTreeMap::new();
            for (row, cols) in matrix.iter().enumerate() {
                for (col, &weight) in cols.iter().enumerate() {
                    if weight == 0 {
                        continue;
                    }
                    if row == col && !allow_self_loops {
                        return Err(InterchangeError::SelfLoop(nodes[row].source_id.clone()));
                    }
                    edge_map.insert(
                        (nodes[row].source_id.clone(), nodes[col].source_id.clone()),
                        weight,
                    );
                }
            }
            Ok(GraphData::Source(SourceGraph::new(node_map, edge_map)))
        }
    }
}

fn validate_matrix(matrix: &[Vec<u64>], n: usize) -> Result<(), InterchangeError> {
    if matrix.len() != n {
        return Err(InterchangeError::MatrixNodeMismatch {
            rows: matrix.len(),
            nodes: n,
        });
    }
    for (row, cols) in matrix.iter().enumerate() {
        if cols.len() != n {
            return Err(InterchangeError::NonSquareMatrix {
                row,
                found: cols.len(),
                expected: n,
            });
        }
    }
    Ok(())
}

fn edge_csv(edges: impl Iterator<Item = (String, String, u64)>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["from", "to", "weight"])
        .expect("in-memory write");
    for (from, to, weight) in edges {
        writer
            .write_record([from.as_str(), to.as_str(), &weight.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Duplicate `from,to` rows collapse with their weights summed; a missing
/// weight column counts as 1.
fn import_edge_csv(input: &[u8], allow_self_loops: bool) -> Result<SourceGraph, InterchangeError> {
    let text = std::str::from_utf8(input).map_err(|_| InterchangeError::NotUtf8)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut edges = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| InterchangeError::MalformedRow {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        if line == 1 && row.get(0) == Some("from") {
            continue;
        }
        if row.len() < 2 || row.len() > 3 {
            return Err(InterchangeError::MalformedRow {
                line,
                reason: format!("expected 2 or 3 fields, found {}", row.len()),
            });
        }
        let from = row[0].to_string();
        let to = row[1].to_string();
        if from.is_empty() || to.is_empty() {
            return Err(InterchangeError::MalformedRow {
                line,
                reason: "empty endpoint".to_string(),
            });
        }
        if from == to && !allow_self_loops {
            return Err(InterchangeError::SelfLoop(from));
        }
        let weight = match row.get(2) {
            None | Some("") => 1,
            Some(raw) => {
                let weight = raw.parse::<u64>().map_err(|_| InterchangeError::MalformedRow {
                    line,
                    reason: format!("weight `{raw}` is not a nonnegative integer"),
                })?;
                if weight == 0 {
                    return Err(InterchangeError::ZeroWeight { line });
                }
                weight
            }
        };
        edges.push((from, to, weight));
    }
    Ok(SourceGraph::from_edge_list(edges))
}

fn dot(
    nodes: impl Iterator<Item = (String, f64)>,
    edges: impl Iterator<Item = (String, String, u64)>,
) -> String {
    let mut out = String::from("digraph g {\n");
    for (id, rating) in nodes {
        out.push_str(&format!("  {} [rating={rating}];\n", dot_quote(&id)));
    }
    for (from, to, weight) in edges {
        out.push_str(&format!(
            "  {} -> {} [weight={weight}];\n",
            dot_quote(&from),
            dot_quote(&to)
        ));
    }
    out.push_str("}\n");
    out
}

fn dot_quote(id: &str) -> String {
    format!("\"{}\"", id.replace('\\', "\\\\").replace('"', "\\\""))
}

fn graphml(
    nodes: impl Iterator<Item = String>,
    edges: impl Iterator<Item = (String, String, u64)>,
) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n\
         \u{20} <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n\
         \u{20} <graph id=\"G\" edgedefault=\"directed\">\n",
    );
    for id in nodes {
        out.push_str(&format!("    <node id=\"{}\"/>\n", xml_escape(&id)));
    }
    for (from, to, weight) in edges {
        out.push_str(&format!(
            "    <edge source=\"{}\" target=\"{}\"><data key=\"weight\">{weight}</data></edge>\n",
            xml_escape(&from),
            xml_escape(&to)
        ));
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

fn xml_escape(value: &str) -> String {
    value
        .replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
