//! Next-generation reservoir computing: forecasting and inference of
//! dynamical systems from polynomial functions of time-delayed observations.

// `!(x > 0.0)` is used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod error;
pub mod experiment;
pub mod features;
pub mod model;
pub mod regression;
pub mod series;
pub mod systems;
pub mod verify;

pub use error::{NgrcError, Result};
pub use experiment::{run_experiment, validate_config, ExperimentConfig, Task};
pub use features::{feature_length, FeatureSpec, Featurizer};
pub use model::{forecast, infer, train_forecaster, train_inferrer, Mode, NgrcModel};
pub use regression::{ridge_fit, ReadoutMatrix, TrainingBlock};
pub use series::TimeSeries;
pub use systems::{integrate, integrate_noisy, IntegrationConfig, SystemDef};
