//! Scores a predicted source-edge set against a gold-standard set with
//! precision, recall and F-measure.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::EvalReport;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("self-pair `{0} -> {0}` not permitted (enable allow_self_pairs to accept it)")]
    SelfPair(String),
    #[error("input is not valid UTF-8")]
    NotUtf8,
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: source_id `{value}` must match [A-Za-z0-9._-]+")]
    BadSourceId { line: u64, value: String },
}

/// Whether an edge matches only in its stated direction or in either.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matching {
    Directed,
    Undirected,
}

/// Set of directed source pairs, deduplicated.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeSet {
    edges: BTreeSet<(String, String)>,
}

impl EdgeSet {
    pub fn new(
        pairs: impl IntoIterator<Item = (String, String)>,
        allow_self_pairs: bool,
    ) -> Result<Self, EvalError> {
        let mut edges = BTreeSet::new();
        for (from, to) in pairs {
            if from == to && !allow_self_pairs {
                return Err(EvalError::SelfPair(from));
            }
            edges.insert((from, to));
        }
        Ok(Self { edges })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges.iter().map(|(f, t)| (f.as_str(), t.as_str()))
    }

    /// Canonical view for undirected matching: each pair ordered
    /// lexicographically.
    fn undirected(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|(f, t)| {
                if f <= t {
                    (f.clone(), t.clone())
                } else {
                    (t.clone(), f.clone())
                }
            })
            .collect()
    }

    /// Reads a `from_source,to_source` CSV (header optional). A weighted
    /// `from,to,weight` edge list is accepted too; the weight is ignored.
    pub fn from_csv(input: &[u8], allow_self_pairs: bool) -> Result<Self, EvalError> {
        let text = std::str::from_utf8(input).map_err(|_| EvalError::NotUtf8)?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut pairs = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| EvalError::MalformedRow {
                line: e.position().map_or(0, |p| p.line()),
                reason: e.to_string(),
            })?;
            let line = row.position().map_or(0, |p| p.line());
            if row.len() == 1 && row[0].is_empty() {
                continue;
            }
            if line == 1 && matches!(row.get(0), Some("from_source") | Some("from")) {
                continue;
            }
            if row.len() != 2 && row.len() != 3 {
                return Err(EvalError::MalformedRow {
                    line,
                    reason: format!("expected 2 or 3 fields, found {}", row.len()),
                });
            }
            for field in [&row[0], &row[1]] {
                let valid = !field.is_empty()
                    && field
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
                if !valid {
                    return Err(EvalError::BadSourceId {
                        line,
                        value: field.to_string(),
                    });
                }
            }
            pairs.push((row[0].to_string(), row[1].to_string()));
        }
        Self::new(pairs, allow_self_pairs)
    }
}

impl EvalReport {
    /// Precision, recall and F-measure from raw counts, with the
    /// zero-denominator convention of returning 0.
    pub fn from_counts(true_positives: u64, false_positives: u64, false_negatives: u64) -> Self {
        let precision = ratio(true_positives, true_positives + false_positives);
        let recall = ratio(true_positives, true_positives + false_negatives);
        let f_measure = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            true_positives,
            false_positives,
            false_negatives,
            precision,
            recall,
            f_measure,
        }
    }
}

fn ratio(numerator: u64, denominator: u64) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Compares edge sets: tp = |predicted ∩ gold|, fp = |predicted \ gold|,
/// fn = |gold \ predicted|. Undirected matching canonicalizes both sides
/// first.
pub fn evaluate(predicted: &EdgeSet, gold: &EdgeSet, matching: Matching) -> EvalReport {
    let (predicted, gold) = match matching {
        Matching::Directed => (predicted.edges.clone(), gold.edges.clone()),
        Matching::Undirected => (predicted.undirected(), gold.undirected()),
    };
    let true_positives = predicted.intersection(&gold).count() as u64;
    let false_positives = predicted.difference(&gold).count() as u64;
    let false_negatives = gold.difference(&predicted).count() as u64;
    EvalReport::from_counts(true_positives, false_positives, false_negatives)
}
