//! Variants that do not need OPT: the dense and sparse two-round algorithms,
//! their combination, and the 2t+2 round multi-phase version.

use submr::algorithms::{
    combined_two_round, dense_two_round, multi_round_unknown_opt, sparse_two_round, DEFAULT_C_LARGE,
};
use submr::instance;
use submr::kernels::sequential_greedy;
use submr::sim::ClusterConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, k, eps) = (3_000, 10, 0.1);
    let oracle = instance::random_coverage(n, 5_000, 30, 1.3, 4)?.oracle()?;
    let ground: Vec<usize> = (0..n).collect();
    let greedy = sequential_greedy(&oracle.fresh(), &ground, k)?.value();
    let cfg = ClusterConfig::new(n, k, 17)?;

    let report = |name: &str, out: &submr::algorithms::RunOutput| {
        println!(
            "{name:<10} value {:>7.1} ({:.3} of greedy), rounds {}, guesses {}, max central load {}",
            out.value(),
            out.value() / greedy,
            out.ledger.rounds(),
            out.diagnostics.instances,
            out.ledger.max_central_load()
        );
    };
    report("dense", &dense_two_round(&cfg, &oracle, eps)?);
    report("sparse", &sparse_two_round(&cfg, &oracle, eps, DEFAULT_C_LARGE)?);
    report("combined", &combined_two_round(&cfg, &oracle, eps, DEFAULT_C_LARGE)?);
    for t in [1, 2] {
        report(&format!("unknown t={t}"), &multi_round_unknown_opt(&cfg, &oracle, eps, t)?);
    }
    Ok(())
}
