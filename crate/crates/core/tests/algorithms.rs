use submr::algorithms::{
    combined_two_round, dense_two_round, multi_round, multi_round_unknown_opt, sparse_two_round,
    two_round_known_opt, GuessGrid,
};
use submr::instance;
use submr::kernels::{brute_force_opt, DEFAULT_ENUMERATION_CAP};
use submr::oracle::{Evaluator, Oracle};
use submr::sim::{draw_partition, ClusterConfig, Enforcement};

fn small(n: usize, k: usize, seed: u64) -> (Oracle, f64) {
    let oracle = instance::random_coverage(n, 2 * n, 6, 1.2, seed)
        .unwrap()
        .oracle()
        .unwrap();
    let ground: Vec<usize> = (0..n).collect();
    let opt = brute_force_opt(&oracle.fresh(), &ground, k, DEFAULT_ENUMERATION_CAP)
        .unwrap()
        .value;
    (oracle, opt)
}

fn small_grid() -> impl Iterator<Item = (usize, usize, u64)> {
    (8..=14).flat_map(|n| (1..=3).flat_map(move |k| (0..8).map(move |s| (n, k, (n * 97 + k * 13 + s) as u64))))
}

#[test]
fn underestimated_opt_keeps_half_of_the_estimate() {
    for (n, k, seed) in small_grid() {
        let (oracle, opt) = small(n, k, seed);
        let low = opt / 4.0;
        let cfg = ClusterConfig::new(n, k, seed).unwrap().with_sample_prob(0.5);
        let out = two_round_known_opt(&cfg, &oracle, low).unwrap();
        assert!(out.value() >= low / 2.0 - 1e-9);
    }
}

#[test]
fn four_rounds_give_five_ninths() {
    for (n, k, seed) in small_grid() {
        let (oracle, opt) = small(n, k, seed);
        let cfg = ClusterConfig::new(n, k, seed)
            .unwrap()
            .with_sample_prob(0.5)
            .with_enforcement(Enforcement::Fail);
        let out = multi_round(&cfg, &oracle, opt, 2).unwrap();
        assert_eq!(out.ledger.rounds(), 4);
        assert!(out.value() >= 5.0 / 9.0 * opt - 1e-9, "n={n} k={k} seed={seed}");
    }
}

#[test]
fn dense_guessing_on_small_instances() {
    for (n, k, seed) in small_grid() {
        let (oracle, opt) = small(n, k, seed);
        let cfg = ClusterConfig::new(n, k, seed).unwrap();
        let out = dense_two_round(&cfg, &oracle, 0.1).unwrap();
        assert!(out.value() >= 0.4 * opt - 1e-9, "n={n} k={k} seed={seed}");
        assert!(out.diagnostics.g0_consistent && out.diagnostics.filter_sound);
    }
}

#[test]
fn sparse_routing_on_small_instances() {
    for (n, k, seed) in small_grid() {
        let (oracle, opt) = small(n, k, seed);
        let cfg = ClusterConfig::new(n, k, seed).unwrap().with_sample_prob(0.5);
        let out = sparse_two_round(&cfg, &oracle, 0.1, 4).unwrap();
        assert!(out.value() >= 0.4 * opt - 1e-9, "n={n} k={k} seed={seed}");
    }
}

#[test]
fn unknown_opt_single_phase_on_small_instances() {
    for (n, k, seed) in small_grid() {
        let (oracle, opt) = small(n, k, seed);
        let cfg = ClusterConfig::new(n, k, seed).unwrap().with_sample_prob(0.5);
        let out = multi_round_unknown_opt(&cfg, &oracle, 0.1, 1).unwrap();
        assert_eq!(out.ledger.rounds(), 4);
        assert!(out.value() >= 0.4 * opt - 1e-9, "n={n} k={k} seed={seed}");
    }
}

#[test]
fn planted_large_elements_all_reach_central() {
    let (n, k) = (2_000, 20);
    for seed in 0..100 {
        let oracle = instance::planted_sparse(n, k, seed).unwrap().oracle().unwrap();
        let planted: Vec<usize> = (0..n).filter(|&e| oracle.singleton(e).unwrap() == 1.0).collect();
        assert_eq!(planted.len(), k);
        let cfg = ClusterConfig::new(n, k, seed).unwrap();
        let out = sparse_two_round(&cfg, &oracle, 0.1, 4).unwrap();
        let mut got = out.solution.elements().to_vec();
        got.sort_unstable();
        assert_eq!(got, planted, "seed {seed}");
    }
}

#[test]
fn finer_grid_costs_central_memory() {
    let (n, k) = (3_000, 10);
    let oracle = instance::random_coverage(n, 4_000, 15, 1.3, 5).unwrap().oracle().unwrap();
    let cfg = ClusterConfig::new(n, k, 5).unwrap();
    let known = two_round_known_opt(&cfg, &oracle, 60.0).unwrap();
    let fine = dense_two_round(&cfg, &oracle, 0.01).unwrap();
    let g = GuessGrid::half_threshold(1.0, 0.01, k).unwrap().len();
    assert_eq!(fine.diagnostics.instances, g);
    assert_eq!(fine.config.memory_budget_central, known.config.memory_budget_central * g);
    let ratio = fine.ledger.central_received(2).unwrap() as f64
        / known.ledger.central_received(2).unwrap() as f64;
    assert!(ratio > 1.0 && ratio <= g as f64, "load ratio {ratio}, grid {g}");
}

#[test]
fn combined_never_worse_than_either_branch() {
    let (n, k) = (1_500, 8);
    for seed in 0..5 {
        let oracle = instance::random_coverage(n, 2_000, 12, 1.3, seed).unwrap().oracle().unwrap();
        let cfg = ClusterConfig::new(n, k, seed).unwrap();
        let both = combined_two_round(&cfg, &oracle, 0.1, 4).unwrap();
        let dense = dense_two_round(&cfg, &oracle, 0.1).unwrap();
        let sparse = sparse_two_round(&cfg, &oracle, 0.1, 4).unwrap();
        assert_eq!(both.ledger.rounds(), 2);
        assert!(both.value() >= dense.value().max(sparse.value()) - 1e-9);
    }
}

#[test]
fn sample_size_matches_binomial_mean() {
    let (n, k) = (10_000, 100);
    let draws = 200;
    let total: usize = (0..draws)
        .map(|seed| draw_partition(&ClusterConfig::new(n, k, seed).unwrap(), 1).sample.len())
        .sum();
    let p = 0.4;
    let mean = total as f64 / draws as f64;
    let se = (n as f64 * p * (1.0 - p)).sqrt() / (draws as f64).sqrt();
    assert!((mean - 4_000.0).abs() <= 3.0 * se, "mean {mean}, se {se}");
}
