//! The sequential building blocks: threshold greedy, threshold filter,
//! classic greedy and exhaustive search on a random coverage instance.

use submr::instance;
use submr::kernels::{
    brute_force_opt, sequential_greedy, threshold_filter, threshold_greedy, PartialSolution,
    DEFAULT_ENUMERATION_CAP,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, k) = (14, 3);
    let oracle = instance::random_coverage(n, 28, 6, 1.2, 11)?.oracle()?;
    let ground: Vec<usize> = (0..n).collect();

    let opt = brute_force_opt(&oracle.fresh(), &ground, k, DEFAULT_ENUMERATION_CAP)?;
    println!("OPT = {} with {:?}", opt.value, opt.witness);

    let tau = opt.value / (2.0 * k as f64);
    let g = threshold_greedy(&oracle, &ground, PartialSolution::empty(&oracle, k)?, tau)?;
    println!("threshold greedy at tau = {tau:.3}: {:?} value {}", g.elements(), g.value());

    let half = PartialSolution::from_elements(&oracle, k, &g.elements()[..1])?;
    let kept = threshold_filter(&oracle, &ground, &half, tau)?;
    println!("elements still above tau given {:?}: {kept:?}", half.elements());

    let greedy = sequential_greedy(&oracle, &ground, k)?;
    println!("classic greedy: {:?} value {}", greedy.elements(), greedy.value());
    println!("total oracle calls: {}", oracle.call_count());
    Ok(())
}
