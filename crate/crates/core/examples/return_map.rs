//! Return map of successive z maxima for the true Lorenz63 flow and for a
//! long free-running forecast.

use ngrc::experiment::pipeline::{generate, TrajectorySettings};
use ngrc::verify::{extract_return_map, return_map_deviation};
use ngrc::{forecast, train_forecaster, FeatureSpec, SystemDef};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let system = SystemDef::lorenz63();
    let dt = 0.025;
    let settings = TrajectorySettings::new(&system, dt);
    let spec = FeatureSpec::quadratic(3, 2, 1);
    let steps = (200.0 / dt) as usize;
    let data = generate(&system, &settings, spec.warmup() + 401 + steps)?;
    let split = spec.warmup() + 401;
    let model = train_forecaster(&data.slice(0, split), &spec, 1e-3)?;
    let predicted = forecast(&model, &data.slice(split - model.history_len(), split), steps)?;
    let truth = data.slice(split, split + steps);

    let span = steps as f64 * dt;
    let truth_map = extract_return_map(&truth, 2, span)?;
    let pred_map = extract_return_map(&predicted, 2, span)?;
    let deviation = return_map_deviation(&pred_map, &truth_map);
    println!("truth maxima {}  forecast maxima {}", truth_map.len(), pred_map.len());
    println!(
        "deviation {:.4} ({:.2}% of the map extent {:.2})",
        deviation,
        100.0 * deviation / truth_map.extent(),
        truth_map.extent()
    );
    for (a, b) in pred_map.points().into_iter().take(5) {
        println!("  M_i {a:8.4} -> M_i+1 {b:8.4}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
