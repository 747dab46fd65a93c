//! Feature vectors: sizes for the three standard tasks and the labels of a
//! small quadratic featurizer.

use ngrc::{feature_length, FeatureSpec, Featurizer};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let lorenz = FeatureSpec::quadratic(3, 2, 1);
    let scroll = FeatureSpec::odd_cubic(3, 2, 1);
    let infer = FeatureSpec::quadratic(2, 4, 5);
    for (name, spec) in [
        ("lorenz forecast", &lorenz),
        ("double scroll", &scroll),
        ("lorenz inference", &infer),
    ] {
        println!(
            "{name:<18} total {:>3}  linear {:>2}  nonlinear {:>3}  warm-up {:>2} samples",
            feature_length(spec),
            spec.linear_len(),
            spec.nonlinear_len(),
            spec.warmup()
        );
    }

    let small = Featurizer::new(FeatureSpec::quadratic(2, 2, 1));
    println!("labels: {}", small.labels(&["x", "y"]).join(", "));
    let lin = [1.0, 2.0, 3.0, 4.0];
    println!("features of {lin:?}: {:?}", small.features_from_linear(&lin));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
