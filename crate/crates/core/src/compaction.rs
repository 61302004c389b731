//! Collapses a message-level graph into the directed source-influence
//! network: all messages of one source merge into a single node, parallel
//! edges in the same direction merge into one weighted edge, and same-source
//! self-loops are dropped unless configured otherwise.

use std::collections::BTreeMap;

use crate::model::{Config, MessageGraph, SourceGraph, SourceNode};

/// One node per distinct source carrying earliest timestamp, maximum rating
/// and message count; one weighted edge per ordered source pair. Opposite
/// directions stay distinct.
pub fn compact(graph: &MessageGraph, config: &Config) -> SourceGraph {
    let mut nodes: BTreeMap<String, SourceNode> = BTreeMap::new();
    for publication in graph.nodes() {
        nodes
            .entry(publication.source_id.clone())
            .and_modify(|node| {
                node.earliest_timestamp = node.earliest_timestamp.min(publication.timestamp);
                node.rating = node.rating.max(publication.rating);
                node.message_count += 1;
            })
            .or_insert(SourceNode {
                earliest_timestamp: publication.timestamp,
                rating: publication.rating,
                message_count: 1,
            });
    }

    let mut edges: BTreeMap<(String, String), u64> = BTreeMap::new();
    for (from, to) in graph.edges() {
        let from_source = &graph.node(from).source_id;
        let to_source = &graph.node(to).source_id;
        if from_source == to_source && config.drop_self_loops {
            continue;
        }
        *edges
            .entry((from_source.clone(), to_source.clone()))
            .or_insert(0) += 1;
    }

    SourceGraph::new(nodes, edges)
}
