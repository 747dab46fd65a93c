//! Forecast error over one Lyapunov time versus training-set size, on a few
//! segments of coarsely integrated data.

use ngrc::experiment::config::{ExperimentConfig, Task};
use ngrc::experiment::tasks::run_sweep;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ExperimentConfig::defaults(Task::SweepTrainsize);
    config.sweep_sizes = vec![100, 250, 400, 1000];
    config.segments = 4;
    config.rtol = 1e-3;
    config.atol = 1e-6;
    let out = run_sweep(&config).map_err(|e| e.to_string())?;
    println!("{:>8} {:>12} {:>12}", "points", "mean", "median");
    for r in &out.rows {
        println!(
            "{:>8} {:>12.4e} {:>12.4e}",
            r.train_points, r.mean_nrmse, r.median_nrmse
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
