//! Saving a trained model to TOML and loading it back unchanged.

use ngrc::experiment::pipeline::{generate, TrajectorySettings};
use ngrc::{forecast, train_forecaster, FeatureSpec, NgrcModel, SystemDef};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let system = SystemDef::lorenz63();
    let spec = FeatureSpec::quadratic(3, 2, 1);
    let data = generate(&system, &TrajectorySettings::new(&system, 0.025), 402)?;
    let model = train_forecaster(&data, &spec, 1e-3)?;

    let path = std::env::temp_dir().join(format!("ngrc-model-{}.toml", std::process::id()));
    model.save(&path)?;
    let loaded = NgrcModel::load(&path)?;
    std::fs::remove_file(&path)?;

    let warm = data.slice(data.len() - model.history_len(), data.len());
    let a = forecast(&model, &warm, 20)?;
    let b = forecast(&loaded, &warm, 20)?;
    println!("weights identical: {}", model.readout() == loaded.readout());
    let same_bits = a
        .as_flat()
        .iter()
        .zip(b.as_flat())
        .all(|(x, y)| x.to_bits() == y.to_bits());
    println!("forecasts identical: {same_bits}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
