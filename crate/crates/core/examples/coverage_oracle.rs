//! Build a small weighted coverage function, evaluate it through the counted
//! oracle, and probe it for monotonicity and diminishing returns.

use submr::oracle::{probe_structure, CoverageInstance, Evaluator, Oracle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sets = vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5], vec![0, 5]];
    let weights = vec![1.0, 1.0, 2.0, 0.5, 0.5, 3.0];
    let oracle = Oracle::new(CoverageInstance::new(6, sets, Some(weights))?)?;

    println!("f({{0}})      = {}", oracle.evaluate(&[0])?);
    println!("f({{0, 2}})   = {}", oracle.evaluate(&[0, 2])?);
    println!("f_{{0}}(3)    = {}", oracle.marginal(&[0], 3)?);
    println!("f_{{0,2}}(3)  = {}", oracle.marginal(&[0, 2], 3)?);
    println!("oracle calls so far: {}", oracle.call_count());

    let probe = probe_structure(&oracle.fresh(), 500, 7)?;
    println!("structure probe: {probe:?}");
    Ok(())
}
