//! Double-scroll forecasting with odd cubic features. The learned map keeps
//! the origin fixed and its nonzero steady states close to the circuit's.

use ngrc::experiment::pipeline::{forecast_trial, generate, reference_scaling, TrajectorySettings, TrialSettings};
use ngrc::systems::DOUBLE_SCROLL_LYAPUNOV_TIME;
use ngrc::verify::{estimate_model_uss, scaled_distance, solve_double_scroll_uss};
use ngrc::{FeatureSpec, SystemDef};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let system = SystemDef::double_scroll();
    let data_settings = TrajectorySettings::new(&system, 0.25);
    let scaling = reference_scaling(&system, &data_settings, 200.0)?;
    let settings = TrialSettings {
        spec: FeatureSpec::odd_cubic(3, 2, 1),
        alpha: 1e-3,
        train_points: 400,
        test_steps: 320,
        threshold: 0.5,
        lyapunov_time: DOUBLE_SCROLL_LYAPUNOV_TIME,
    };
    let data = generate(&system, &data_settings, settings.footprint())?;
    let trial = forecast_trial(&data, 0, &settings, &scaling)?;
    println!(
        "features {}  valid time {:.2} Lyapunov times",
        trial.model.featurizer().len(),
        trial.valid_time
    );

    let origin = trial.model.increment(&[0.0; 6]);
    println!("increment at the origin: {origin:?}");

    let truths: Vec<Vec<f64>> = solve_double_scroll_uss()?.iter().map(|s| s.to_vec()).collect();
    let estimates = estimate_model_uss(&trial.model, &truths)?;
    for (t, e) in truths.iter().zip(&estimates) {
        match e {
            Some(e) => println!(
                "steady state {t:.4?} -> {e:.4?}, scaled distance {:.2e}",
                scaled_distance(t, e, &scaling)
            ),
            None => println!("steady state {t:.4?} not found"),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
