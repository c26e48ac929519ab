//! More rounds buy a better guarantee: runs t = 1..4 threshold phases on the
//! same instance and prints the bound next to the achieved value.

use submr::algorithms::{guaranteed_ratio, multi_round};
use submr::instance;
use submr::kernels::{brute_force_opt, DEFAULT_ENUMERATION_CAP};
use submr::sim::ClusterConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, k) = (24, 4);
    let oracle = instance::random_coverage(n, 60, 8, 1.2, 3)?.oracle()?;
    let ground: Vec<usize> = (0..n).collect();
    let opt = brute_force_opt(&oracle.fresh(), &ground, k, DEFAULT_ENUMERATION_CAP)?.value;
    println!("OPT = {opt}");

    for t in 1..=4 {
        let cfg = ClusterConfig::new(n, k, 9)?.with_sample_prob(0.5);
        let out = multi_round(&cfg, &oracle, opt, t)?;
        println!(
            "t = {t}: rounds {}, ratio {:.4}, bound {:.4}",
            out.ledger.rounds(),
            out.value() / opt,
            guaranteed_ratio(t)
        );
    }
    Ok(())
}
