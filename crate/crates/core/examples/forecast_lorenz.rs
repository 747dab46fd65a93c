//! Lorenz63 forecasting: train on 400 points, run closed-loop, and report the
//! valid time for two ridge penalties.

use ngrc::experiment::pipeline::{forecast_trial, generate, reference_scaling, TrajectorySettings, TrialSettings};
use ngrc::systems::LORENZ63_LYAPUNOV_TIME;
use ngrc::{FeatureSpec, SystemDef};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let system = SystemDef::lorenz63();
    let data_settings = TrajectorySettings::new(&system, 0.025);
    let scaling = reference_scaling(&system, &data_settings, 200.0)?;

    for alpha in [2.5e-6, 1e-3] {
        let settings = TrialSettings {
            spec: FeatureSpec::quadratic(3, 2, 1),
            alpha,
            train_points: 400,
            test_steps: 440,
            threshold: 0.5,
            lyapunov_time: LORENZ63_LYAPUNOV_TIME,
        };
        let data = generate(&system, &data_settings, settings.footprint())?;
        let trial = forecast_trial(&data, 0, &settings, &scaling)?;
        println!(
            "alpha {alpha:.1e}: training NRMSE {:.3e}, valid time {:.2} Lyapunov times",
            trial.training_nrmse, trial.valid_time
        );
        let mut ranked: Vec<(String, f64)> = trial
            .model
            .featurizer()
            .labels(&["x", "y", "z"])
            .into_iter()
            .zip(trial.model.readout().weights.row(0).iter().copied())
            .collect();
        ranked.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
        let top: Vec<String> = ranked.iter().take(4).map(|(l, w)| format!("{l}={w:.3}")).collect();
        println!("  largest x-increment weights: {}", top.join(", "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
