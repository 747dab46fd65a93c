//! Training on a noise-driven Lorenz63 trajectory and comparing the forecast
//! against the noise-free flow from the same starting point.

use ngrc::experiment::config::{ExperimentConfig, Task};
use ngrc::experiment::tasks::run_noise;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ExperimentConfig::defaults(Task::NoiseLorenz);
    config.noise_seeds = 3;
    let out = run_noise(&config).map_err(|e| e.to_string())?;
    for r in &out.per_seed {
        println!("seed {:>2}: NRMSE {:.4e}  RMSE {:.4e}", r.seed, r.nrmse, r.rmse);
    }
    println!("median NRMSE {:.4e}", out.median_nrmse);
    println!("component stds under noise: {:.2?}", out.driven_stds);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
