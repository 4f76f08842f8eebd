mod common;

use common::*;
use normroute::matching::{rank_candidates, run_match, select_responders};
use normroute::metrics::{cosine_similarity, haversine_km, MetricParams};
use normroute::profile::{generate_synthetic, GeneratorConfig, Location};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn ranking_and_selection_match_oracle() {
    let params = MetricParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..500 {
        let n = rng.gen_range(2..=8);
        let c = random_community(&mut rng, n);
        let who = format!("m{}", rng.gen_range(0..n));
        let q = random_query(&mut rng, &who, 3);

        let ranked = rank_candidates(&q, &c, &params).unwrap();
        let expect = oracle_rank(&q, &c, params.decay_length_km);
        let got_ids: Vec<&str> = ranked.iter().map(|s| s.candidate.as_str()).collect();
        let want_ids: Vec<&str> = expect.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(got_ids, want_ids, "rank order, case {case}: {q:?}");
        for (g, w) in ranked.iter().zip(&expect) {
            assert_eq!(g.tier, w.tier, "case {case}");
            assert!((g.aggregate - w.aggregate).abs() < 1e-12, "case {case}");
            assert_eq!(
                g.scores.keys().collect::<Vec<_>>(),
                w.scores.keys().collect::<Vec<_>>()
            );
        }

        let selected = select_responders(&q, &c, &params).unwrap();
        assert_eq!(
            selected,
            oracle_select(&q, &c, params.decay_length_km),
            "selection, case {case}"
        );
        assert_eq!(selected.len(), q.k.min(n - 1));
    }
}

#[test]
fn round_robin_oracle_worked_example() {
    // genders by rank F F F M M, k = 4: cycle 1 takes F1, M1; cycle 2 F2, M2
    let ids: Vec<String> = ["a", "b", "c", "d", "e"].map(String::from).to_vec();
    let groups: Vec<String> = ["F", "F", "F", "M", "M"].map(String::from).to_vec();
    assert_eq!(oracle_round_robin(&ids, &groups, 4), ["a", "b", "d", "e"]);
}

#[test]
fn metric_oracles_agree_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..2000 {
        let u: Vec<f64> = (0..6).map(|_| rng.gen()).collect();
        let v: Vec<f64> = (0..6).map(|_| rng.gen()).collect();
        assert!((cosine_similarity(&u, &v).unwrap() - cosine(&u, &v)).abs() < 1e-12);
        let p = Location::new(rng.gen_range(-89.0..89.0), rng.gen_range(-179.0..180.0));
        let q = Location::new(rng.gen_range(-89.0..89.0), rng.gen_range(-179.0..180.0));
        assert!((haversine_km(&p, &q) - haversine(&p, &q)).abs() < 1e-6);
    }
}

#[test]
fn pilot_sized_communities_select_five() {
    let params = MetricParams::default();
    for size in [51, 105, 115] {
        let c = generate_synthetic(&GeneratorConfig::pilot(size), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(size as u64);
        for _ in 0..20 {
            let mut q = random_query(&mut rng, "u010", 1);
            q.k = 5;
            let out = run_match(&q, &c, &params).unwrap();
            assert_eq!(out.selected.len(), 5);
            let (f, m) = gender_split(&out.selected_ids(), &c, "female");
            assert!(f.abs_diff(m) <= 1, "{f} vs {m}");
            assert_eq!(
                out.selected_ids(),
                oracle_select(&q, &c, params.decay_length_km)
            );
        }
    }
}
