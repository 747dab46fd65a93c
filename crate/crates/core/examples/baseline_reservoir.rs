//! A conventional reservoir computer trained on the same Lorenz63 data.

use ngrc::baseline::{baseline_forecast, build_reservoir, spectral_radius, train_baseline, ReservoirParams};
use ngrc::experiment::pipeline::{generate, reference_scaling, TrajectorySettings};
use ngrc::systems::LORENZ63_LYAPUNOV_TIME;
use ngrc::verify::valid_time;
use ngrc::SystemDef;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let system = SystemDef::lorenz63();
    let settings = TrajectorySettings::new(&system, 0.025);
    let scaling = reference_scaling(&system, &settings, 200.0)?;
    let (washout, train, test) = (100, 1000, 200);
    let data = generate(&system, &settings, washout + train + test)?;

    let params = ReservoirParams::default();
    let reservoir = build_reservoir(&params, 3)?;
    println!(
        "{} nodes, {} links, spectral radius {:.3}",
        reservoir.nodes(),
        reservoir.nonzeros(),
        spectral_radius(&reservoir.adjacency)
    );
    let split = washout + train;
    let fit = train_baseline(&reservoir, &data.slice(0, split), washout, 1e-6)?;
    let predicted = baseline_forecast(&reservoir, &fit, &data.slice(0, split), test)?;
    let truth = data.slice(split, split + test);
    let vt = valid_time(&predicted, &truth, &scaling, 0.5, LORENZ63_LYAPUNOV_TIME)?;
    println!(
        "training NRMSE {:.4e}  valid time {vt:.2} Lyapunov times",
        fit.training_nrmse
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
