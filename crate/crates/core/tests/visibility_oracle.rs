//! Cross-checks the graph builders against a direct brute-force evaluation
//! of the visibility and window-dominance predicates.

use std::collections::BTreeSet;

use hvgnet::model::{normalize_series, Config, Method, Publication, PublicationSeries, TauUnit};
use hvgnet::visibility::{build_hvg_directed, build_hvg_undirected, build_thvg};
use proptest::prelude::*;

fn series_from_ratings(ratings: &[f64]) -> PublicationSeries {
    let raw = ratings
        .iter()
        .enumerate()
        .map(|(i, &r)| Publication {
            message_id: format!("m{i}"),
            source_id: format!("s{}", i % 3),
            timestamp: i as i64,
            rating: r,
        })
        .collect();
    normalize_series(raw).unwrap()
}

/// Visibility predicate checked pair by pair: every strictly intermediate
/// value must lie strictly below both endpoints.
fn oracle_undirected_links(ratings: &[f64]) -> BTreeSet<(usize, usize)> {
    let mut links = BTreeSet::new();
    for i in 0..ratings.len() {
        for j in (i + 1)..ratings.len() {
            let bound = ratings[i].min(ratings[j]);
            if (i + 1..j).all(|k| ratings[k] < bound) {
                links.insert((i, j));
            }
        }
    }
    links
}

fn oracle_directed_hvg(ratings: &[f64]) -> BTreeSet<(usize, usize)> {
    oracle_undirected_links(ratings)
        .into_iter()
        .map(|(i, j)| (j, i))
        .collect()
}

/// Window-dominance predicate checked pair by pair.
fn oracle_window_edges(ratings: &[f64], tau: usize) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for j in 0..ratings.len() {
        for i in 0..j {
            if j - i < tau && ratings[i] > ratings[j] {
                edges.insert((j, i));
            }
        }
    }
    edges
}

fn oracle_build(ratings: &[f64], method: Method, tau: usize) -> BTreeSet<(usize, usize)> {
    match method {
        Method::Hvg => oracle_directed_hvg(ratings),
        Method::Eq1Only => oracle_window_edges(ratings, tau),
        Method::Thvg => {
            let mut edges = oracle_directed_hvg(ratings);
            edges.extend(oracle_window_edges(ratings, tau));
            edges
        }
    }
}

fn config(method: Method, tau: usize) -> Config {
    Config {
        tau,
        method,
        tau_unit: TauUnit::Index,
        drop_self_loops: true,
        time_window_seconds: None,
    }
}

fn check_all_builders(ratings: &[f64]) {
    let series = series_from_ratings(ratings);

    let undirected: BTreeSet<(usize, usize)> = build_hvg_undirected(&series)
        .edges()
        .filter(|&(f, t)| f < t)
        .collect();
    assert_eq!(undirected, oracle_undirected_links(ratings), "undirected hvg on {ratings:?}");

    let directed: BTreeSet<(usize, usize)> = build_hvg_directed(&series).edges().collect();
    assert_eq!(directed, oracle_directed_hvg(ratings), "directed hvg on {ratings:?}");

    for tau in [1usize, 2, 3, 8] {
        for method in [Method::Thvg, Method::Eq1Only] {
            let built: BTreeSet<(usize, usize)> = build_thvg(&series, &config(method, tau))
                .unwrap()
                .edges()
                .collect();
            assert_eq!(
                built,
                oracle_build(ratings, method, tau),
                "{method:?} tau={tau} on {ratings:?}"
            );
        }
    }
}

#[test]
fn exhaustive_short_series_match_oracle() {
    // Every series of length <= 6 over the rating alphabet {1,2,3,4}.
    for len in 0..=6usize {
        let mut digits = vec![0u8; len];
        loop {
            let ratings: Vec<f64> = digits.iter().map(|&d| (d + 1) as f64).collect();
            check_all_builders(&ratings);
            let mut pos = 0;
            loop {
                if pos == len {
                    break;
                }
                digits[pos] += 1;
                if digits[pos] < 4 {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if pos == len {
                break;
            }
        }
        if len == 0 {
            continue;
        }
    }
}

proptest! {
    #[test]
    fn random_series_match_oracle(
        ratings in prop::collection::vec(1u8..=4, 0..40).prop_map(|v| {
            v.into_iter().map(|d| d as f64).collect::<Vec<_>>()
        })
    ) {
        check_all_builders(&ratings);
    }

    #[test]
    fn random_float_series_match_oracle(
        ratings in prop::collection::vec(0.1f64..100.0, 0..32)
    ) {
        check_all_builders(&ratings);
    }

    #[test]
    fn thvg_contains_hvg_and_grows_with_tau(
        ratings in prop::collection::vec(1u8..=6, 0..32).prop_map(|v| {
            v.into_iter().map(|d| d as f64).collect::<Vec<_>>()
        }),
        tau in 1usize..10,
    ) {
        let series = series_from_ratings(&ratings);
        let hvg: BTreeSet<_> = build_hvg_directed(&series).edges().collect();
        let smaller: BTreeSet<_> = build_thvg(&series, &config(Method::Thvg, tau))
            .unwrap()
            .edges()
            .collect();
        let larger: BTreeSet<_> = build_thvg(&series, &config(Method::Thvg, tau + 1))
            .unwrap()
            .edges()
            .collect();
        prop_assert!(smaller.is_superset(&hvg));
        prop_assert!(larger.is_superset(&smaller));
        for &(from, to) in &larger {
            prop_assert!(to < from, "edge {from}->{to} points forward");
        }
    }
}
