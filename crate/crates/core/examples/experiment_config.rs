//! Running an experiment from an inline config and reading its summary.

use ngrc::experiment::report::render_report;
use ngrc::experiment::{parse_config, run_experiment};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("ngrc-infer-{}", std::process::id()));
    let text = format!(
        "task = \"infer-lorenz\"\nout_dir = {:?}\nalpha = 0.05\ntrain_points = 400\n",
        dir.display().to_string()
    );
    let config = parse_config(&text)?;
    println!("features: k={} s={} degrees={:?}", config.k, config.s, config.degrees);
    let report = run_experiment(&config).map_err(|e| e.to_string())?;
    println!("wrote {}", report.files.join(", "));
    print!("{}", render_report(&dir).map_err(|e| e.to_string())?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
