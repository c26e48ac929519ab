//! Generate instances, round-trip them through the text format, and read
//! back the adversarial header form.

use submr::instance::{self, Instance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("submr-instance-files");
    std::fs::create_dir_all(&dir)?;

    let generated = [
        ("coverage", instance::random_coverage(6, 10, 3, 1.5, 2)?),
        ("planted", instance::planted_sparse(6, 2, 2)?),
        ("adversarial", instance::adversarial(2, 10, 1.0)?),
    ];
    for (name, inst) in generated {
        let path = dir.join(format!("{name}.txt"));
        inst.write(&path)?;
        let back = Instance::read(&path)?;
        assert_eq!(back, inst);
        println!("== {name}: {} elements, {}", back.len(), path.display());
        print!("{}", back.to_text());
    }
    Ok(())
}
