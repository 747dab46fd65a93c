//! Inferring the unobserved z component of Lorenz63 from x and y.

use ngrc::experiment::pipeline::{generate, inference_trial, reference_scaling, TrajectorySettings};
use ngrc::{FeatureSpec, SystemDef};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let system = SystemDef::lorenz63();
    let settings = TrajectorySettings::new(&system, 0.05);
    let scaling = reference_scaling(&system, &settings, 200.0)?;
    let spec = FeatureSpec::quadratic(2, 4, 5);
    let (train, test) = (400, 1000);
    let data = generate(&system, &settings, spec.warmup() + train + test)?;

    let trial = inference_trial(&data, &[0, 1], 2, &spec, 0.05, train, test, &scaling)?;
    println!(
        "readout {}x{}  training NRMSE {:.4e}  testing NRMSE {:.4e}",
        trial.model.output_dim(),
        trial.model.featurizer().len(),
        trial.training_nrmse,
        trial.test_nrmse
    );
    for m in (0..test).step_by(200) {
        println!(
            "  t={:7.2}  z={:8.4}  inferred={:8.4}",
            trial.test_truth.time(m),
            trial.test_truth.sample(m)[0],
            trial.test_inferred.sample(m)[0]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
