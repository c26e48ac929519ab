//! A seeded batch driven by a TOML spec, reported as CSV plus a summary.

use submr::harness::{run_experiment, ExperimentSpec, RunOptions};

const SPEC: &str = r#"
algorithm = "combined"
k = 5
eps = 0.1
seeds = 8
base_seed = 100

[instance]
kind = "random-coverage"
n = 800
universe = 1200
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ExperimentSpec::from_toml(SPEC)?;
    let report = run_experiment(&spec, RunOptions::default())?;
    print!("{}", report.to_csv()?);
    let s = &report.summary;
    println!(
        "trials {}, errors {}, budget violation rate {:.2}",
        s.trials, s.errors, s.violation_rate
    );
    Ok(())
}
