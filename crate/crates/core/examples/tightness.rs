//! The adversarial instance on which the threshold schedule achieves exactly
//! its guaranteed ratio, sequentially and through the simulated cluster.

use submr::adversarial::{tightness_distributed, tightness_experiment, AdversarialInstance, DEFAULT_TIE_MARGIN};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // divisible by every t below, so level sizes are exact
    let k = 600;
    for t in [1, 2, 3, 5] {
        let o = tightness_experiment(t, k)?;
        println!(
            "t = {t}: ratio {:.6}, bound {:.6}, decoys per level {:?}, optimal picked {}",
            o.ratio, o.bound, o.selected_per_level, o.optimal_selected
        );
    }
    let inst = AdversarialInstance::geometric_with_margin(2, 200, 1.0, DEFAULT_TIE_MARGIN)?;
    let d = tightness_distributed(&inst, 5)?;
    println!("distributed t = 2, k = 200: ratio {:.6}", d.ratio);
    Ok(())
}
