mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tiescope::diversity::{compute_diversity, DiversityOptions};
use tiescope::geospan::reshuffle_locations;
use tiescope::graphs::{build_graph, CommGraph};
use tiescope::ingest::{Corpus, Locations, UserId};
use tiescope::pipeline::PipelineConfig;
use tiescope::stats::{ks_two_sample, minmax_normalize, ols_fit, step_aic_backward};

use common::ks_oracle;

fn edges_strategy(n: u32) -> impl Strategy<Value = Vec<(u32, u32, u32)>> {
    prop::collection::vec((0..n, 0..n, 1u32..50), 1..60)
        .prop_map(|v| v.into_iter().filter(|(s, d, _)| s != d).collect())
}

fn design_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (8usize..40, 1usize..4).prop_flat_map(|(n, p)| {
        (
            prop::collection::vec(prop::collection::vec(-10.0f64..10.0, n), p),
            prop::collection::vec(-10.0f64..10.0, n),
        )
    })
}

fn names(p: usize) -> Vec<String> {
    (0..p).map(|i| format!("x{i}")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diversity_ignores_weight_scaling(edges in edges_strategy(12), c in 2u32..9, areas in prop::collection::vec(0u32..4, 12)) {
        let loc = Locations::from_indices(areas.iter().map(|&a| Some(a)).collect());
        let g = CommGraph::from_edges("g", 12, edges.iter().map(|&(s, d, w)| (UserId(s), UserId(d), w)));
        let scaled = CommGraph::from_edges("g", 12, edges.iter().map(|&(s, d, w)| (UserId(s), UserId(d), w * c)));
        let opts = DiversityOptions::new(4);
        let a = compute_diversity(&g, &loc, &opts).unwrap();
        let b = compute_diversity(&scaled, &loc, &opts).unwrap();
        prop_assert_eq!(a.users.len(), b.users.len());
        for (x, y) in a.users.iter().zip(&b.users) {
            prop_assert!((x.social - y.social).abs() < 1e-12);
            prop_assert!((x.spatial - y.spatial).abs() < 1e-12);
        }
    }

    #[test]
    fn ks_is_symmetric_and_rank_based(
        a in prop::collection::vec(-5.0f64..5.0, 1..40),
        b in prop::collection::vec(-5.0f64..5.0, 1..40),
    ) {
        let ab = ks_two_sample(&a, &b);
        let ba = ks_two_sample(&b, &a);
        prop_assert_eq!(ab.statistic, ba.statistic);
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        prop_assert!((ab.statistic - ks_oracle(&a, &b)).abs() < 1e-12);
        let ea: Vec<f64> = a.iter().map(|v| v.exp()).collect();
        let eb: Vec<f64> = b.iter().map(|v| v.exp()).collect();
        prop_assert!((ks_two_sample(&ea, &eb).statistic - ab.statistic).abs() < 1e-12);
    }

    #[test]
    fn graph_does_not_depend_on_message_order(
        msgs in prop::collection::vec((0u8..8, 0u8..8), 1..80),
        min_weight in 1u32..4,
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let mut shuffled = msgs.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let build = |m: &[(u8, u8)]| {
            let mut c = Corpus::new(vec!["d".into()]);
            for (i, (s, r)) in m.iter().enumerate() {
                c.push_named(&i.to_string(), &format!("u{s}"), &format!("u{r}"), 0, &[0.5]);
            }
            let loc = Locations::from_indices(vec![Some(0); c.users.len()]);
            let g = build_graph(&c, &loc, min_weight).unwrap();
            g.edges()
                .map(|(s, d, w)| (c.users.name(s).to_owned(), c.users.name(d).to_owned(), w))
                .collect::<BTreeSet<_>>()
        };
        prop_assert_eq!(build(&msgs), build(&shuffled));
    }

    #[test]
    fn reshuffle_keeps_area_counts(areas in prop::collection::vec(prop::option::of(0u32..6), 1..80), seed in any::<u64>()) {
        let loc = Locations::from_indices(areas);
        let out = reshuffle_locations(&loc, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(loc.area_counts(6), out.area_counts(6));
        for (a, b) in loc.as_slice().iter().zip(out.as_slice()) {
            prop_assert_eq!(a.is_some(), b.is_some());
        }
    }

    #[test]
    fn residuals_are_orthogonal_to_the_design((cols, y) in design_strategy()) {
        let Ok(rep) = ols_fit(&cols, &y, &names(cols.len())) else { return Ok(()) };
        let scale = y.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let sum: f64 = rep.residuals.iter().sum();
        prop_assert!(sum.abs() < 1e-8 * scale * y.len() as f64);
        for c in &cols {
            let dot: f64 = c.iter().zip(&rep.residuals).map(|(x, e)| x * e).sum();
            let cs = c.iter().map(|v| v.abs()).fold(1.0, f64::max);
            prop_assert!(dot.abs() < 1e-8 * scale * cs * y.len() as f64);
        }
        prop_assert!(rep.r2_adj <= rep.r2 + 1e-12);
        if let Some(dw) = rep.durbin_watson {
            prop_assert!((0.0..=4.0).contains(&dw));
        }
    }

    #[test]
    fn fit_is_invariant_to_feature_normalization((cols, y) in design_strategy(), which in 0usize..3) {
        let which = which % cols.len();
        let Ok(a) = ols_fit(&cols, &y, &names(cols.len())) else { return Ok(()) };
        let mut norm = cols.clone();
        norm[which] = minmax_normalize(&cols[which]).unwrap();
        let b = ols_fit(&norm, &y, &names(cols.len())).unwrap();
        let tol = 1e-7 * y.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for (f, g) in a.fitted.iter().zip(&b.fitted) {
            prop_assert!((f - g).abs() < tol);
        }
        prop_assert!((a.r2 - b.r2).abs() < 1e-8);
        prop_assert!((a.r2_adj - b.r2_adj).abs() < 1e-8);
        for (x, z) in a.coefficients.iter().zip(&b.coefficients) {
            prop_assert!((x.t - z.t).abs() < 1e-6 * x.t.abs().max(1.0));
        }
    }

    #[test]
    fn minmax_is_idempotent_and_keeps_argmax(v in prop::collection::vec(-1e3f64..1e3, 2..30)) {
        let Ok(n) = minmax_normalize(&v) else { return Ok(()) };
        let again = minmax_normalize(&n).unwrap();
        for (a, b) in n.iter().zip(&again) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let argmax = |x: &[f64]| x.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        prop_assert_eq!(v[argmax(&v)], v[argmax(&n)]);
    }

    #[test]
    fn stepaic_never_raises_aic((cols, y) in design_strategy()) {
        let nm = names(cols.len());
        let Ok(r) = step_aic_backward(&cols, &y, &nm, &[]) else { return Ok(()) };
        prop_assert!(r.aic <= r.full_aic + 1e-9);
        let again = step_aic_backward(&cols, &y, &nm, &[]).unwrap();
        prop_assert_eq!(r.selected, again.selected);
    }

    #[test]
    fn config_round_trips(
        alpha in 0.5f64..0.999,
        min_weight in 1u32..20,
        null_runs in 2usize..500,
        seed in any::<u64>(),
        window in prop::option::of((0i64..1_000_000, 0i64..1_000_000)),
    ) {
        let mut cfg = PipelineConfig {
            alpha,
            min_weight,
            null_runs,
            seed,
            ..Default::default()
        };
        if let Some((a, b)) = window {
            cfg.window_start = Some(a.min(b));
            cfg.window_end = Some(a.max(b));
        }
        let back = PipelineConfig::from_kv_str(&cfg.to_kv_string()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
