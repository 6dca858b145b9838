//! Library results checked against independent reference computations.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use tiescope::diversity::{area_proportions, compute_diversity, contact_proportions, normalized_entropy, DiversityOptions};
use tiescope::geospan::{haversine_km, null_reshuffle, span_bins, DistanceMatrix};
use tiescope::graphs::{graph_summary, percentile_nearest_rank, CommGraph};
use tiescope::ingest::{filter_states_by_penetration, Area, AreaTable, Locations, UserId, UserLocationMap};
use tiescope::pipeline::{self, PipelineConfig};
use tiescope::stats::{durbin_watson, ols_fit, pearson, spearman_matrix};
use tiescope::synth::{generate_corpus, PlantedOutcome, SynthConfig, SynthCorpus, SynthPaths};

use common::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn in_memory(sc: &SynthConfig) -> (SynthCorpus, PipelineConfig, pipeline::Ingested) {
    let s = generate_corpus(sc).unwrap();
    let paths = SynthPaths {
        messages: "messages.csv".into(),
        activity: "activity.csv".into(),
        areas: "areas.csv".into(),
    };
    let cfg = PipelineConfig::for_synth(sc, &paths, Path::new("out"));
    let ing = pipeline::ingest_parsed(&cfg, s.corpus.clone(), &s.activity, s.areas.clone()).unwrap();
    (s, cfg, ing)
}

fn random_graph(r: &mut ChaCha8Rng, n: usize, m: usize) -> (CommGraph, Vec<(u32, u32, u32)>) {
    let edges: Vec<(u32, u32, u32)> = (0..m)
        .map(|_| (r.random_range(0..n as u32), r.random_range(0..n as u32), r.random_range(1..=30)))
        .filter(|(s, d, _)| s != d)
        .collect();
    let g = CommGraph::from_edges("g", n, edges.iter().map(|&(s, d, w)| (UserId(s), UserId(d), w)));
    (g, edges)
}

#[test]
fn percentile_matches_sort_and_index() {
    let mut r = rng(7);
    let mut values: Vec<f64> = (0..10_000).map(|_| r.random::<f64>()).collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    // smallest k with k >= 0.75 n is 7500
    let expected = sorted[7499];
    assert_eq!(percentile_nearest_rank(&mut values, 0.75), expected);
}

#[test]
fn haversine_matches_cosine_law() {
    let (ca, ny) = ((36.7783, -119.4179), (42.9538, -75.5268));
    let h = haversine_km(ca.0, ca.1, ny.0, ny.1);
    let c = cosine_law_km(ca.0, ca.1, ny.0, ny.1);
    assert!((h - c).abs() < 0.1, "{h} vs {c}");
    let antipodal = haversine_km(0.0, 0.0, 0.0, 180.0);
    assert!((antipodal - std::f64::consts::PI * 6371.0088).abs() < 1e-6);
}

#[test]
fn two_user_reshuffle_swaps_half_the_time() {
    let map = UserLocationMap([("a".to_owned(), "CA".to_owned()), ("b".to_owned(), "NY".to_owned())].into());
    let trials = 10_000;
    let swaps = (0..trials)
        .filter(|&s| null_reshuffle(&map, s).get("a") == Some("NY"))
        .count();
    let freq = swaps as f64 / trials as f64;
    assert!((freq - 0.5).abs() <= 0.02, "swap frequency {freq}");
}

#[test]
fn penetration_filter_drops_planted_outlier() {
    let areas: Vec<Area> = (0..10)
        .map(|i| Area {
            code: format!("A{i}"),
            population: 1e6 * (1.0 + i as f64),
            gdp_per_capita: 1.0,
            density: 1.0,
            centroid_lat: 0.0,
            centroid_lon: 0.0,
            included: true,
            user_count: 0,
        })
        .collect();
    let table = AreaTable::new(areas).unwrap();
    // a known line plus alternating unit noise; A6 sits 5 noise units above it
    let counts: BTreeMap<String, u64> = table
        .areas()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let noise = if i % 2 == 0 { 1.0 } else { -1.0 };
            let outlier = if a.code == "A6" { 5.0 } else { 0.0 };
            (a.code.clone(), (500.0 + 1e-5 * a.population + 10.0 * (noise + outlier)) as u64)
        })
        .collect();
    let out = filter_states_by_penetration(&table, &counts, 1.0, 0).unwrap();
    let excluded: Vec<&str> = out.areas().iter().filter(|a| !a.included).map(|a| a.code.as_str()).collect();
    assert_eq!(excluded, ["A6"]);
}

#[test]
fn graph_summary_matches_recount() {
    let mut r = rng(11);
    for _ in 0..20 {
        let (g, edges) = random_graph(&mut r, 40, 120);
        let mut merged: BTreeMap<(u32, u32), u64> = BTreeMap::new();
        for &(s, d, w) in &edges {
            *merged.entry((s, d)).or_insert(0) += w as u64;
        }
        let mut degree: BTreeMap<u32, u64> = BTreeMap::new();
        let mut strength: BTreeMap<u64, u64> = BTreeMap::new();
        for (&(s, d), &w) in &merged {
            *degree.entry(s).or_insert(0) += 1;
            *degree.entry(d).or_insert(0) += 1;
            *strength.entry(w).or_insert(0) += 1;
        }
        let mut degree_counts: BTreeMap<u64, u64> = BTreeMap::new();
        for &k in degree.values() {
            *degree_counts.entry(k).or_insert(0) += 1;
        }
        let s = graph_summary(&g);
        assert_eq!(s.node_count, degree.len());
        assert_eq!(s.edge_count, merged.len());
        assert_eq!(s.total_weight, merged.values().sum::<u64>());
        assert_eq!(s.degree_counts, degree_counts);
        assert_eq!(s.strength_counts, strength);
        let hist_total: u64 = s.strength_hist.iter().map(|b| b.count).sum();
        assert_eq!(hist_total, merged.len() as u64);
        for b in &s.degree_hist {
            let naive: u64 = degree_counts.range(b.lower..b.upper).map(|(_, c)| c).sum();
            assert_eq!(b.count, naive);
        }
    }
}

#[test]
fn proportions_match_group_by_oracle() {
    let mut r = rng(5);
    for _ in 0..50 {
        let n = 25;
        let (g, edges) = random_graph(&mut r, n, 80);
        let area_of: Vec<u32> = (0..n).map(|_| r.random_range(0..4)).collect();
        let loc = Locations::from_indices(area_of.iter().map(|&a| Some(a)).collect());
        for u in 0..n as u32 {
            let mut by_contact: BTreeMap<u32, u64> = BTreeMap::new();
            for &(s, d, w) in &edges {
                if s == u {
                    *by_contact.entry(d).or_insert(0) += w as u64;
                }
            }
            if by_contact.is_empty() {
                assert!(contact_proportions(&g, UserId(u)).is_err());
                continue;
            }
            let total: u64 = by_contact.values().sum();
            let props = contact_proportions(&g, UserId(u)).unwrap();
            let resum: f64 = props.iter().sum();
            assert!((resum - 1.0).abs() < 1e-12);
            let mut by_area: BTreeMap<u32, u64> = BTreeMap::new();
            for (&v, &w) in &by_contact {
                *by_area.entry(area_of[v as usize]).or_insert(0) += w;
            }
            let got = area_proportions(&g, UserId(u), &loc).unwrap();
            let want: Vec<(u32, f64)> = by_area.iter().map(|(&a, &w)| (a, w as f64 / total as f64)).collect();
            assert_eq!(got.len(), want.len());
            for ((ga, gp), (wa, wp)) in got.iter().zip(&want) {
                assert_eq!(ga, wa);
                assert!((gp - wp).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn area_values_are_group_means_of_users() {
    let mut r = rng(9);
    let n = 60;
    let (g, _) = random_graph(&mut r, n, 300);
    let area_of: Vec<u32> = (0..n).map(|_| r.random_range(0..5)).collect();
    let loc = Locations::from_indices(area_of.iter().map(|&a| Some(a)).collect());
    let t = compute_diversity(&g, &loc, &DiversityOptions::new(5)).unwrap();
    let mut groups: BTreeMap<u32, Vec<(f64, f64)>> = BTreeMap::new();
    for u in &t.users {
        groups.entry(area_of[u.user.index()]).or_default().push((u.social, u.spatial));
    }
    assert_eq!(t.areas.len(), groups.len());
    for (a, vals) in groups {
        let row = t.area(a).unwrap();
        let k = vals.len() as f64;
        assert_eq!(row.users, vals.len());
        assert!((row.social - vals.iter().map(|v| v.0).sum::<f64>() / k).abs() < 1e-12);
        assert!((row.spatial - vals.iter().map(|v| v.1).sum::<f64>() / k).abs() < 1e-12);
    }
}

#[test]
fn entropy_hand_values() {
    let e = normalized_entropy(&[0.75, 0.25], 2);
    assert!((e - 0.811_278_124_459_132_9).abs() < 1e-12);
    assert!((normalized_entropy(&[0.5, 0.5], 4) - 0.5).abs() < 1e-12);
    assert_eq!(normalized_entropy(&[1.0], 44), 0.0);
    let flat = vec![1.0 / 44.0; 44];
    assert!((normalized_entropy(&flat, 44) - 1.0).abs() < 1e-12);
}

#[test]
fn durbin_watson_of_white_noise_is_near_two() {
    let mut r = rng(13);
    let e: Vec<f64> = (0..20_000).map(|_| StandardNormal.sample(&mut r)).collect();
    // sd of DW under independence is about 2 / sqrt(n) = 0.014
    let dw = durbin_watson(&e).unwrap();
    assert!((dw - 2.0).abs() < 0.07, "{dw}");
}

#[test]
fn spearman_is_pearson_of_ranks() {
    let mut r = rng(17);
    let cols: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..40).map(|_| (r.random_range(0..10) as f64) / 3.0).collect())
        .collect();
    let m = spearman_matrix(&cols).unwrap();
    let ranks: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            c.iter()
                .map(|&v| {
                    let below = c.iter().filter(|&&x| x < v).count() as f64;
                    let tied = c.iter().filter(|&&x| x == v).count() as f64;
                    below + (tied + 1.0) / 2.0
                })
                .collect()
        })
        .collect();
    for i in 0..3 {
        for j in 0..3 {
            let want = pearson(&ranks[i], &ranks[j]).unwrap();
            assert!((m[i][j].unwrap() - want).abs() < 1e-12);
        }
    }
}

#[test]
fn ols_matches_normal_equations() {
    let mut r = rng(19);
    let n = 30;
    let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| r.random::<f64>()).collect()).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| 0.3 + cols[0][i] - 2.0 * cols[1][i] + 0.5 * cols[2][i] + 0.1 * r.random::<f64>())
        .collect();
    let names: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
    let rep = ols_fit(&cols, &y, &names).unwrap();
    let (beta, se, r2_adj, _) = ols_oracle(&cols, &y);
    assert!((rep.intercept.beta - beta[0]).abs() < 1e-8);
    assert!((rep.intercept.se - se[0]).abs() < 1e-8);
    for (c, (b, s)) in rep.coefficients.iter().zip(beta[1..].iter().zip(&se[1..])) {
        assert!((c.beta - b).abs() < 1e-8);
        assert!((c.se - s).abs() < 1e-8);
    }
    assert!((rep.r2_adj - r2_adj).abs() < 1e-8);
}

#[test]
fn zero_distance_heavy_first_bin_holds_every_local_tie() {
    let sc = SynthConfig::zero_distance_heavy();
    let (_, _, ing) = in_memory(&sc);
    let universe = pipeline::build_universe(&ing);
    let dist = DistanceMatrix::new(&ing.areas);
    let bins = span_bins(&universe, &ing.locations, &dist, 5).unwrap();
    let mut zero = 0u64;
    for (s, d, _) in universe.edges() {
        if ing.locations.area(s) == ing.locations.area(d) {
            zero += 1;
        }
    }
    let share = zero as f64 / universe.edge_count() as f64;
    assert!(share >= 0.4, "zero-distance share {share}");
    assert_eq!(bins.bin_of(0.0), 0);
    assert!(bins.boundaries[0] == 0.0, "first boundary {}", bins.boundaries[0]);
    assert_eq!(bins.tie_counts[0], zero);
}

#[test]
fn planted_labels_become_dimension_edges() {
    let sc = SynthConfig {
        alpha: 0.99,
        messages_per_contact: 1.0,
        ..SynthConfig::default()
    };
    let (s, cfg, ing) = in_memory(&sc);
    let t = pipeline::label(&cfg, &ing).unwrap();
    let g = pipeline::build_graphs(&cfg, &ing, &t).unwrap();
    let c = &ing.corpus;
    for (d, flags) in sc.dimensions.iter().zip(&s.labels) {
        let truth: BTreeSet<(UserId, UserId)> = (0..c.len())
            .filter(|&i| flags[i] && ing.locations.is_located(c.senders[i]) && ing.locations.is_located(c.receivers[i]))
            .map(|i| (c.senders[i], c.receivers[i]))
            .collect();
        let gd = g.by_tag(&d.name).unwrap();
        assert_eq!(gd.edge_count(), truth.len());
        let frac = gd.edge_count() as f64 / g.universe.edge_count() as f64;
        let n = g.universe.edge_count() as f64;
        // a pair carries about one message, so the tie share tracks the 1% label rate
        assert!((frac - 0.01).abs() < 4.0 * (0.01 * 0.99 / n).sqrt() + 0.002, "{} share {frac}", d.name);
    }
}

#[test]
fn noiseless_planted_outcome_is_recovered_exactly() {
    let sc = SynthConfig {
        outcome: Some(PlantedOutcome {
            sigma: 0.0,
            ..planted(1).outcome.unwrap()
        }),
        ..planted(1)
    };
    let (s, cfg, ing) = in_memory(&sc);
    let t = pipeline::label(&cfg, &ing).unwrap();
    let g = pipeline::build_graphs(&cfg, &ing, &t).unwrap();
    let tables = pipeline::diversities(&cfg, &ing, &g).unwrap();
    let reg = pipeline::regress(&cfg, &ing, &tables).unwrap();
    let rep = &reg.models.iter().find(|(n, _)| n == "planted").unwrap().1;
    assert_eq!(s.features.len(), 2);
    assert!((rep.intercept.beta - 0.2).abs() < 1e-6);
    for (name, beta) in &sc.outcome.as_ref().unwrap().betas {
        let got = rep.coefficient(name).unwrap().beta;
        assert!((got - beta).abs() < 1e-6, "{name}: {got} vs {beta}");
    }
}
