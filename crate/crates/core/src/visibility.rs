//! Message-level graph builders: the horizontal visibility graph and its
//! windowed modification.
//!
//! Two nodes of a series see each other when every value strictly between
//! them is lower than both endpoint values (strict: an equal intermediate
//! blocks the line of sight). Directed variants orient each link from the
//! later node to the earlier one. The windowed modification additionally
//! connects a node to any earlier node within the window whose rating
//! strictly exceeds its own.

use crate::model::{Config, ConfigError, MessageGraph, Method, PublicationSeries, TauUnit};

/// Undirected HVG; each link is stored as both directed pairs.
pub fn build_hvg_undirected(series: &PublicationSeries) -> MessageGraph {
    let links = hvg_links(series);
    let edges = links
        .iter()
        .flat_map(|&(i, j)| [(i, j), (j, i)])
        .collect::<Vec<_>>();
    MessageGraph::from_parts(series.items().to_vec(), edges)
        .expect("hvg links are in range and loop-free")
}

/// Directed HVG: every link {i, j} with i earlier becomes the edge j -> i.
pub fn build_hvg_directed(series: &PublicationSeries) -> MessageGraph {
    let links = hvg_links(series);
    let edges = links.iter().map(|&(i, j)| (j, i)).collect::<Vec<_>>();
    MessageGraph::from_parts(series.items().to_vec(), edges)
        .expect("hvg links are in range and loop-free")
}

/// Windowed builder. `Thvg` unions the directed HVG with the window-dominance
/// edges; `Eq1Only` emits the window-dominance edges alone.
pub fn build_thvg(series: &PublicationSeries, config: &Config) -> Result<MessageGraph, ConfigError> {
    config.validate()?;
    let mut edges = window_dominance_edges(series, config);
    if config.method != Method::Eq1Only {
        edges.extend(hvg_links(series).iter().map(|&(i, j)| (j, i)));
    }
    Ok(MessageGraph::from_parts(series.items().to_vec(), edges)
        .expect("window edges are in range and loop-free"))
}

/// Dispatches on `config.method`; the single entry point used by callers that
/// take the method from configuration.
pub fn build(series: &PublicationSeries, config: &Config) -> Result<MessageGraph, ConfigError> {
    config.validate()?;
    match config.method {
        Method::Hvg => Ok(build_hvg_directed(series)),
        Method::Thvg | Method::Eq1Only => build_thvg(series, config),
    }
}

/// Undirected visibility links as (earlier, later) pairs, via a monotonic
/// stack in O(n) amortized time.
///
/// The stack holds indices with strictly decreasing ratings. Each new node j
/// links to every popped index and to the first surviving one; an index is
/// popped once its rating is <= the new node's, since nothing past j can see
/// it any more.
fn hvg_links(series: &PublicationSeries) -> Vec<(usize, usize)> {
    let ratings = series.ratings();
    let mut links = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for j in 0..ratings.len() {
        while let Some(&i) = stack.last() {
            links.push((i, j));
            if ratings[i] < ratings[j] {
                stack.pop();
            } else {
                if ratings[i] == ratings[j] {
                    // Equal heights still see each other, but i is now
                    // blocked toward the future and j toward the past.
                    stack.pop();
                }
                break;
            }
        }
        stack.push(j);
    }
    links
}

/// Edges j -> i for every pair with i earlier, inside the window, and with
/// the earlier rating strictly higher. O(n * tau) for the index window.
fn window_dominance_edges(series: &PublicationSeries, config: &Config) -> Vec<(usize, usize)> {
    let items = series.items();
    let mut edges = Vec::new();
    for j in 0..items.len() {
        for i in (0..j).rev() {
            let inside = match config.tau_unit {
                TauUnit::Index => j - i < config.tau,
                TauUnit::Seconds => {
                    let window = config
                        .time_window_seconds
                        .expect("validated by Config::validate");
                    items[j].timestamp - items[i].timestamp < window as i64
                }
            };
            if !inside {
                break;
            }
            if items[i].rating > items[j].rating {
                edges.push((j, i));
            }
        }
    }
    edges
}
