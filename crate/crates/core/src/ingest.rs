//! Publication-stream parsing (CSV and JSONL) and rating estimation for
//! streams that arrive unrated.
//!
//! CSV rows are `timestamp,source_id,rating[,message_id]`; JSONL objects use
//! the same keys. Timestamps are integer epoch seconds or ISO-8601 strings.
//! A missing message_id is assigned `<source_id>#<line>`; a missing rating is
//! accepted only under the estimate policy.

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Publication, TimestampRange};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: unrecognized timestamp `{value}` (expected epoch seconds or ISO-8601)")]
    BadTimestamp { line: u64, value: String },
    #[error("line {line}: timestamp {timestamp} outside plausible range [{min}, {max}]")]
    TimestampOutOfRange {
        line: u64,
        timestamp: i64,
        min: i64,
        max: i64,
    },
    #[error("line {line}: rating {rating} must be positive and finite")]
    BadRating { line: u64, rating: f64 },
    #[error("line {line}: missing rating under the provided-ratings policy")]
    MissingRating { line: u64 },
    #[error("line {line}: source_id `{value}` must match [A-Za-z0-9._-]+")]
    BadSourceId { line: u64, value: String },
    #[error("input is not valid UTF-8")]
    NotUtf8,
    #[error("rating estimation requires volume_weight + rate_weight > 0")]
    ZeroWeights,
    #[error("rating estimation requires a timestamp span > 0")]
    ZeroSpan,
}

/// Where ratings come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatingMode {
    /// Every record must carry a rating.
    Provided,
    /// Ratings are derived from publication volume and publishing rate.
    Estimate,
}

/// Rating policy: pass ratings through or estimate them from per-source
/// publication volume and rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingPolicy {
    pub mode: RatingMode,
    pub volume_weight: f64,
    pub rate_weight: f64,
}

impl Default for RatingPolicy {
    fn default() -> Self {
        Self {
            mode: RatingMode::Provided,
            volume_weight: 1.0,
            rate_weight: 1.0,
        }
    }
}

impl RatingPolicy {
    pub fn estimate() -> Self {
        Self {
            mode: RatingMode::Estimate,
            ..Self::default()
        }
    }
}

/// Input encoding of a publication stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

/// One parsed row before ratings are resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicationRecord {
    pub message_id: String,
    pub source_id: String,
    pub timestamp: i64,
    pub rating: Option<f64>,
    /// 1-based line in the original input, for error reporting.
    pub line: u64,
}

#[derive(Deserialize)]
struct JsonRow {
    timestamp: serde_json::Value,
    source_id: String,
    #[serde(default)]
    rating: Option<f64>,
    #[serde(default)]
    message_id: Option<String>,
}

/// Parses rows without resolving ratings; every structural and per-field
/// invariant is checked here with the offending line number.
pub fn parse_records(input: &[u8], format: InputFormat) -> Result<Vec<PublicationRecord>, IngestError> {
    let text = std::str::from_utf8(input).map_err(|_| IngestError::NotUtf8)?;
    match format {
        InputFormat::Csv => parse_csv(text),
        InputFormat::Jsonl => parse_jsonl(text),
    }
}

/// Parses and resolves ratings per `policy`: provided ratings are required as
/// given; the estimate policy recomputes every source's rating from the
/// stream itself.
pub fn parse_publications(
    input: &[u8],
    format: InputFormat,
    policy: &RatingPolicy,
) -> Result<Vec<Publication>, IngestError> {
    let records = parse_records(input, format)?;
    match policy.mode {
        RatingMode::Provided => records
            .into_iter()
            .map(|r| {
                let rating = r
                    .rating
                    .ok_or(IngestError::MissingRating { line: r.line })?;
                Ok(Publication {
                    message_id: r.message_id,
                    source_id: r.source_id,
                    timestamp: r.timestamp,
                    rating,
                })
            })
            .collect(),
        RatingMode::Estimate => estimate_ratings(&records, policy),
    }
}

fn parse_csv(text: &str) -> Result<Vec<PublicationRecord>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| IngestError::MalformedRow {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        // Optional header row.
        if line == 1 && row.get(0) == Some("timestamp") {
            continue;
        }
        if row.len() < 3 || row.len() > 4 {
            return Err(IngestError::MalformedRow {
                line,
                reason: format!("expected 3 or 4 fields, found {}", row.len()),
            });
        }
        let timestamp = parse_timestamp(&row[0], line)?;
        let source_id = parse_source_id(&row[1], line)?;
        let rating = if row[2].is_empty() {
            None
        } else {
            Some(parse_rating(&row[2], line)?)
        };
        let message_id = match row.get(3) {
            Some(id) if !id.is_empty() => id.to_string(),
            _ => format!("{source_id}#{line}"),
        };
        records.push(PublicationRecord {
            message_id,
            source_id,
            timestamp,
            rating,
            line,
        });
    }
    Ok(records)
}

fn parse_jsonl(text: &str) -> Result<Vec<PublicationRecord>, IngestError> {
    let mut records = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = (idx + 1) as u64;
        if raw_line.trim().is_empty() {
            continue;
        }
        let row: JsonRow =
            serde_json::from_str(raw_line).map_err(|e| IngestError::MalformedRow {
                line,
                reason: e.to_string(),
            })?;
        let timestamp = match &row.timestamp {
            serde_json::Value::Number(n) => {
                n.as_i64().ok_or_else(|| IngestError::BadTimestamp {
                    line,
                    value: n.to_string(),
                })?
            }
            serde_json::Value::String(s) => parse_timestamp(s, line)?,
            other => {
                return Err(IngestError::BadTimestamp {
                    line,
                    value: other.to_string(),
                })
            }
        };
        check_timestamp(timestamp, line)?;
        let source_id = parse_source_id(&row.source_id, line)?;
        if let Some(rating) = row.rating {
            check_rating(rating, line)?;
        }
        let message_id = match row.message_id {
            Some(id) if !id.is_empty() => id,
            _ => format!("{source_id}#{line}"),
        };
        records.push(PublicationRecord {
            message_id,
            source_id,
            timestamp,
            rating: row.rating,
            line,
        });
    }
    Ok(records)
}

fn parse_timestamp(value: &str, line: u64) -> Result<i64, IngestError> {
    let timestamp = if let Ok(epoch) = value.parse::<i64>() {
        epoch
    } else if let Ok(instant) = DateTime::parse_from_rfc3339(value) {
        instant.timestamp()
    } else if let Ok(naive) = NaiveDateTime::parse_from_str(value, "%Y-%m-%dT%H:%M:%S") {
        naive.and_utc().timestamp()
    } else {
        return Err(IngestError::BadTimestamp {
            line,
            value: value.to_string(),
        });
    };
    check_timestamp(timestamp, line)?;
    Ok(timestamp)
}

fn check_timestamp(timestamp: i64, line: u64) -> Result<(), IngestError> {
    let range = TimestampRange::default();
    if !range.contains(timestamp) {
        return Err(IngestError::TimestampOutOfRange {
            line,
            timestamp,
            min: range.min,
            max: range.max,
        });
    }
    Ok(())
}

fn parse_rating(value: &str, line: u64) -> Result<f64, IngestError> {
    let rating = value.parse::<f64>().map_err(|_| IngestError::MalformedRow {
        line,
        reason: format!("rating `{value}` is not a number"),
    })?;
    check_rating(rating, line)?;
    Ok(rating)
}

fn check_rating(rating: f64, line: u64) -> Result<(), IngestError> {
    if !(rating.is_finite() && rating > 0.0) {
        return Err(IngestError::BadRating { line, rating });
    }
    Ok(())
}

fn parse_source_id(value: &str, line: u64) -> Result<String, IngestError> {
    let valid = !value.is_empty()
        && value
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
    if !valid {
        return Err(IngestError::BadSourceId {
            line,
            value: value.to_string(),
        });
    }
    Ok(value.to_string())
}

/// Assigns every source a rating from its publication volume and rate:
/// `raw = volume_weight * ln(1 + count) + rate_weight * count / span_days`,
/// min-max normalized to [1, 100]. All-equal raw scores map to 50.
pub fn estimate_ratings(
    records: &[PublicationRecord],
    policy: &RatingPolicy,
) -> Result<Vec<Publication>, IngestError> {
    if policy.volume_weight + policy.rate_weight <= 0.0 {
        return Err(IngestError::ZeroWeights);
    }
    if records.is_empty() {
        return Ok(Vec::new());
    }
    let min_t = records.iter().map(|r| r.timestamp).min().unwrap();
    let max_t = records.iter().map(|r| r.timestamp).max().unwrap();
    if max_t <= min_t {
        return Err(IngestError::ZeroSpan);
    }
    let span_days = (max_t - min_t) as f64 / 86_400.0;

    let mut counts: std::collections::BTreeMap<&str, u64> = std::collections::BTreeMap::new();
    for r in records {
        *counts.entry(r.source_id.as_str()).or_insert(0) += 1;
    }
    let raw_scores: std::collections::BTreeMap<&str, f64> = counts
        .iter()
        .map(|(&source, &count)| {
            let volume = policy.volume_weight * (1.0 + count as f64).ln();
            let rate = policy.rate_weight * (count as f64 / span_days);
            (source, volume + rate)
        })
        .collect();

    let lowest = raw_scores.values().cloned().fold(f64::INFINITY, f64::min);
    let highest = raw_scores
        .values()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let normalize = |raw: f64| -> f64 {
        if highest == lowest {
            50.0
        } else {
            // Ratio first so the extremes land exactly on 1 and 100.
            1.0 + 99.0 * ((raw - lowest) / (highest - lowest))
        }
    };

    Ok(records
        .iter()
        .map(|r| Publication {
            message_id: r.message_id.clone(),
            source_id: r.source_id.clone(),
            timestamp: r.timestamp,
            rating: normalize(raw_scores[r.source_id.as_str()]),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_direct_field_mapping() {
        let records = parse_publications(
            b"1609459200,reuters,87.5",
            InputFormat::Csv,
            &RatingPolicy::default(),
        )
        .unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].source_id, "reuters");
        assert_eq!(records[0].timestamp, 1_609_459_200);
        assert_eq!(records[0].rating, 87.5);
        assert_eq!(records[0].message_id, "reuters#1");
    }

    #[test]
    fn iso_timestamp_equals_epoch() {
        let epoch = parse_records(b"1609459200,reuters,87.5", InputFormat::Csv).unwrap();
        let iso = parse_records(
            b"2021-01-01T00:00:00Z,reuters,87.5",
            InputFormat::Csv,
        )
        .unwrap();
        assert_eq!(epoch[0].timestamp, iso[0].timestamp);
    }

    #[test]
    fn negative_rating_reports_line() {
        let err = parse_records(
            b"1609459200,reuters,87.5\n1609459300,tass,-3",
            InputFormat::Csv,
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::BadRating { line: 2, .. }), "{err}");
    }

    #[test]
    fn explicit_message_id_wins_over_autoassignment() {
        let records = parse_records(b"1609459200,reuters,87.5,story-1", InputFormat::Csv).unwrap();
        assert_eq!(records[0].message_id, "story-1");
    }

    #[test]
    fn header_row_is_skipped() {
        let records = parse_records(
            b"timestamp,source_id,rating,message_id\n1609459200,reuters,87.5,story-1",
            InputFormat::Csv,
        )
        .unwrap();
        assert_eq!(records.len(), 1);
    }

    #[test]
    fn unknown_timestamp_format_reports_value() {
        let err = parse_records(b"yesterday,reuters,87.5", InputFormat::Csv).unwrap_err();
        assert!(matches!(err, IngestError::BadTimestamp { value, .. } if value == "yesterday"));
    }

    #[test]
    fn implausible_timestamp_rejected() {
        let err = parse_records(b"42,reuters,87.5", InputFormat::Csv).unwrap_err();
        assert!(matches!(err, IngestError::TimestampOutOfRange { timestamp: 42, .. }));
    }

    #[test]
    fn bad_source_id_rejected() {
        let err = parse_records(b"1609459200,bad source,87.5", InputFormat::Csv).unwrap_err();
        assert!(matches!(err, IngestError::BadSourceId { .. }));
    }

    #[test]
    fn missing_rating_requires_estimate_policy() {
        let input = b"1609459200,reuters,\n1609545600,tass,";
        let err = parse_publications(input, InputFormat::Csv, &RatingPolicy::default()).unwrap_err();
        assert!(matches!(err, IngestError::MissingRating { line: 1 }));
        let ok = parse_publications(input, InputFormat::Csv, &RatingPolicy::estimate()).unwrap();
        assert_eq!(ok.len(), 2);
    }

    #[test]
    fn jsonl_parses_numbers_and_strings() {
        let input = br#"{"timestamp": 1609459200, "source_id": "reuters", "rating": 87.5}
{"timestamp": "2021-01-02T00:00:00Z", "source_id": "tass", "rating": 12.0, "message_id": "t-1"}"#;
        let records = parse_records(input, InputFormat::Jsonl).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].message_id, "reuters#1");
        assert_eq!(records[1].message_id, "t-1");
        assert_eq!(records[1].timestamp, 1_609_545_600);
    }

    #[test]
    fn jsonl_bad_row_reports_line() {
        let input = b"{\"timestamp\": 1609459200, \"source_id\": \"reuters\", \"rating\": 1.0}\nnot json";
        let err = parse_records(input, InputFormat::Jsonl).unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { line: 2, .. }));
    }

    fn record(source: &str, t: i64) -> PublicationRecord {
        PublicationRecord {
            message_id: format!("{source}-{t}"),
            source_id: source.to_string(),
            timestamp: t,
            rating: None,
            line: 0,
        }
    }

    #[test]
    fn single_source_estimates_to_midpoint() {
        let records = vec![record("solo", 0), record("solo", 86_400)];
        let rated = estimate_ratings(&records, &RatingPolicy::estimate()).unwrap();
        assert!(rated.iter().all(|p| p.rating == 50.0));
    }

    #[test]
    fn higher_volume_earns_strictly_higher_rating() {
        let mut records = Vec::new();
        for t in 0..100 {
            records.push(record("busy", t * 1000));
        }
        records.push(record("quiet", 50_000));
        let rated = estimate_ratings(&records, &RatingPolicy::estimate()).unwrap();
        let busy = rated.iter().find(|p| p.source_id == "busy").unwrap().rating;
        let quiet = rated.iter().find(|p| p.source_id == "quiet").unwrap().rating;
        assert!(busy > quiet);
        assert_eq!(busy, 100.0);
        assert_eq!(quiet, 1.0);
    }

    #[test]
    fn weights_select_the_ranking_factor() {
        // Fixed corpus; the oracle sorts sources directly by each factor and
        // the single-weight policies must reproduce that order.
        let mut records = Vec::new();
        let counts = [("s-a", 12u64), ("s-b", 4), ("s-c", 25), ("s-d", 1)];
        for (source, count) in counts {
            for t in 0..count {
                records.push(record(source, (t * 7_200) as i64));
            }
        }
        let span_days = {
            let min = records.iter().map(|r| r.timestamp).min().unwrap();
            let max = records.iter().map(|r| r.timestamp).max().unwrap();
            (max - min) as f64 / 86_400.0
        };
        let factor_order = |factor: &dyn Fn(u64) -> f64| -> Vec<&str> {
            let mut order = counts.to_vec();
            order.sort_by(|a, b| factor(b.1).total_cmp(&factor(a.1)));
            order.iter().map(|(s, _)| *s).collect()
        };
        let rating_order = |policy: &RatingPolicy| -> Vec<String> {
            let rated = estimate_ratings(&records, policy).unwrap();
            let mut per_source: Vec<(String, f64)> = counts
                .iter()
                .map(|(s, _)| {
                    let r = rated.iter().find(|p| p.source_id == *s).unwrap().rating;
                    (s.to_string(), r)
                })
                .collect();
            per_source.sort_by(|a, b| b.1.total_cmp(&a.1));
            per_source.into_iter().map(|(s, _)| s).collect()
        };

        let volume_only = RatingPolicy {
            mode: RatingMode::Estimate,
            volume_weight: 1.0,
            rate_weight: 0.0,
        };
        assert_eq!(
            rating_order(&volume_only),
            factor_order(&|count| (1.0 + count as f64).ln())
        );
        let rate_only = RatingPolicy {
            mode: RatingMode::Estimate,
            volume_weight: 0.0,
            rate_weight: 1.0,
        };
        assert_eq!(
            rating_order(&rate_only),
            factor_order(&|count| count as f64 / span_days)
        );
    }

    #[test]
    fn estimation_requires_positive_span_and_weights() {
        let records = vec![record("a", 5), record("b", 5)];
        assert!(matches!(
            estimate_ratings(&records, &RatingPolicy::estimate()),
            Err(IngestError::ZeroSpan)
        ));
        let zero = RatingPolicy {
            mode: RatingMode::Estimate,
            volume_weight: 0.0,
            rate_weight: 0.0,
        };
        assert!(matches!(
            estimate_ratings(&[record("a", 0)], &zero),
            Err(IngestError::ZeroWeights)
        ));
    }

    #[test]
    fn empty_input_estimates_to_empty() {
        assert!(estimate_ratings(&[], &RatingPolicy::estimate())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn estimated_ratings_stay_in_range() {
        let mut records = Vec::new();
        for source in 0..7 {
            for t in 0..(source + 1) * 3 {
                records.push(record(&format!("s{source}"), (t * 3600 + source) as i64));
            }
        }
        let rated = estimate_ratings(&records, &RatingPolicy::estimate()).unwrap();
        for p in &rated {
            assert!((1.0..=100.0).contains(&p.rating));
        }
    }
}
