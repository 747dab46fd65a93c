//! Ridge regression on a noisy linear map, showing how the penalty shrinks
//! the readout.

use nalgebra::DMatrix;
use ngrc::regression::residual;
use ngrc::{ridge_fit, TrainingBlock};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let truth = DMatrix::from_row_slice(2, 4, &[1.0, -2.0, 0.5, 0.0, 0.0, 3.0, -1.0, 2.0]);
    let o = DMatrix::from_fn(4, 200, |_, _| rng.random_range(-1.0..1.0));
    let noise = DMatrix::from_fn(2, 200, |_, _| 0.01 * rng.random_range(-1.0..1.0));
    let y = &truth * &o + noise;
    let block = TrainingBlock::new(o, y)?;

    for alpha in [0.0, 1e-3, 1.0, 100.0] {
        let w = ridge_fit(&block, alpha)?;
        let r = residual(&w, &block);
        println!(
            "alpha {alpha:>7.0e}  |W| {:.4}  rms residual {:.4e}",
            w.weights.norm(),
            (r.norm_squared() / r.len() as f64).sqrt()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
