//! Building blocks shared by the experiment runner, the examples and the
//! acceptance tests: trajectory generation, segmenting, and single train/test
//! trials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{NgrcError, Result};
use crate::features::FeatureSpec;
use crate::model::{forecast, infer, train_forecaster, train_inferrer, NgrcModel};
use crate::series::TimeSeries;
use crate::systems::{integrate, integrate_noisy, IntegrationConfig, SystemDef};
use crate::verify::{nrmse, valid_time, ScalingVector};

/// How to produce an on-attractor trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySettings {
    pub dt: f64,
    /// Time discarded before the first recorded sample.
    pub transient: f64,
    pub initial_state: Vec<f64>,
    pub rtol: f64,
    pub atol: f64,
}

impl TrajectorySettings {
    pub fn new(system: &SystemDef, dt: f64) -> Self {
        Self {
            dt,
            transient: 20.0,
            initial_state: system.default_seed_state(),
            rtol: 1e-8,
            atol: 1e-10,
        }
    }

    fn integration(&self, start: Vec<f64>, t_span: f64) -> IntegrationConfig {
        IntegrationConfig::new(start, self.dt, t_span).with_tolerances(self.rtol, self.atol)
    }
}

/// State reached after the transient.
pub fn settle(system: &SystemDef, settings: &TrajectorySettings) -> Result<Vec<f64>> {
    if settings.transient <= 0.0 {
        return Ok(settings.initial_state.clone());
    }
    let run = integrate(
        system,
        &settings.integration(settings.initial_state.clone(), settings.transient),
    )?;
    Ok(run.last().expect("integration returns at least one sample").to_vec())
}

/// `n_samples` noise-free samples starting on the attractor at `t = 0`.
pub fn generate(system: &SystemDef, settings: &TrajectorySettings, n_samples: usize) -> Result<TimeSeries> {
    if n_samples == 0 {
        return Err(NgrcError::InvalidArgument(
            "trajectory needs at least one sample".into(),
        ));
    }
    let start = settle(system, settings)?;
    integrate(
        system,
        &settings.integration(start, (n_samples - 1) as f64 * settings.dt),
    )
}

/// Noise-driven counterpart of [`generate`]; the transient is noise-free.
pub fn generate_noisy(
    system: &SystemDef,
    settings: &TrajectorySettings,
    n_samples: usize,
    noise_rms: f64,
    seed: u64,
) -> Result<TimeSeries> {
    if n_samples == 0 {
        return Err(NgrcError::InvalidArgument(
            "trajectory needs at least one sample".into(),
        ));
    }
    let start = settle(system, settings)?;
    let cfg = settings
        .integration(start, (n_samples - 1) as f64 * settings.dt)
        .with_noise(noise_rms, seed);
    integrate_noisy(system, &cfg)
}

/// Per-component standard deviations of a reference run `lyapunov_times`
/// Lyapunov times long, starting from the settled state.
pub fn reference_scaling(
    system: &SystemDef,
    settings: &TrajectorySettings,
    lyapunov_times: f64,
) -> Result<ScalingVector> {
    let n = (lyapunov_times * system.lyapunov_time / settings.dt).round() as usize + 1;
    ScalingVector::from_series(&generate(system, settings, n)?)
}

/// Copy of `series` with independent Gaussian noise of standard deviation
/// `rms` added to every value.
pub fn add_measurement_noise(series: &TimeSeries, rms: f64, seed: u64) -> Result<TimeSeries> {
    if rms == 0.0 {
        return Ok(series.clone());
    }
    let normal = Normal::new(0.0, rms).map_err(|e| NgrcError::InvalidArgument(format!("noise rms: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = series.as_flat().iter().map(|v| v + normal.sample(&mut rng)).collect();
    TimeSeries::from_flat(series.t0(), series.dt(), series.dim(), data)
}

/// Number of samples in a forecaster training slice holding exactly
/// `train_points` feature/target columns.
pub fn training_len(spec: &FeatureSpec, train_points: usize) -> usize {
    spec.warmup() + train_points + 1
}

/// Outcome of one train-then-forecast trial.
#[derive(Debug, Clone)]
pub struct ForecastTrial {
    pub model: NgrcModel,
    pub training: TimeSeries,
    /// Closed-loop forecast over the test window.
    pub forecast: TimeSeries,
    /// Ground truth over the same window.
    pub truth: TimeSeries,
    pub training_nrmse: f64,
    pub test_nrmse: f64,
    /// In Lyapunov times.
    pub valid_time: f64,
}

/// Settings shared by every forecast trial of an experiment.
#[derive(Debug, Clone)]
pub struct TrialSettings {
    pub spec: FeatureSpec,
    pub alpha: f64,
    pub train_points: usize,
    pub test_steps: usize,
    pub threshold: f64,
    pub lyapunov_time: f64,
}

impl TrialSettings {
    /// Samples consumed from the data by one trial.
    pub fn footprint(&self) -> usize {
        training_len(&self.spec, self.train_points) + self.test_steps
    }
}

/// Trains on `data[start ..]` and forecasts the samples right after the
/// training slice. Errors are scaled by `scaling`.
pub fn forecast_trial(
    data: &TimeSeries,
    start: usize,
    settings: &TrialSettings,
    scaling: &ScalingVector,
) -> Result<ForecastTrial> {
    let n_train = training_len(&settings.spec, settings.train_points);
    let end = start + settings.footprint();
    if end > data.len() {
        return Err(NgrcError::InsufficientData {
            needed: end,
            got: data.len(),
        });
    }
    train_and_forecast(
        data.slice(start, start + n_train),
        data.slice(start + n_train, end),
        settings,
        scaling,
    )
}

/// Trains on `training` and forecasts as many samples as `truth` holds,
/// starting right after the last training sample.
pub fn train_and_forecast(
    training: TimeSeries,
    truth: TimeSeries,
    settings: &TrialSettings,
    scaling: &ScalingVector,
) -> Result<ForecastTrial> {
    let n_train = training.len();
    let model = train_forecaster(&training, &settings.spec, settings.alpha)?;
    let warm = training.slice(n_train - model.history_len(), n_train);
    let predicted = forecast(&model, &warm, truth.len())?;
    let test_nrmse = nrmse(&predicted, &truth, scaling)?;
    let vt = valid_time(&predicted, &truth, scaling, settings.threshold, settings.lyapunov_time)?;
    Ok(ForecastTrial {
        training_nrmse: model.metadata.training_nrmse,
        model,
        training,
        forecast: predicted,
        truth,
        test_nrmse,
        valid_time: vt,
    })
}

/// Start index of each of `count` disjoint trials.
pub fn segment_starts(settings: &TrialSettings, count: usize) -> Vec<usize> {
    (0..count).map(|j| j * settings.footprint()).collect()
}

/// Outcome of training and testing an inferrer.
#[derive(Debug, Clone)]
pub struct InferenceTrial {
    pub model: NgrcModel,
    pub training_truth: TimeSeries,
    pub training_inferred: TimeSeries,
    pub test_truth: TimeSeries,
    pub test_inferred: TimeSeries,
    pub training_nrmse: f64,
    pub test_nrmse: f64,
}

/// Trains on the first `train_points` usable samples of `data` and infers the
/// target over the following `test_points` samples.
#[allow(clippy::too_many_arguments)]
pub fn inference_trial(
    data: &TimeSeries,
    observed: &[usize],
    target: usize,
    spec: &FeatureSpec,
    alpha: f64,
    train_points: usize,
    test_points: usize,
    scaling: &ScalingVector,
) -> Result<InferenceTrial> {
    let w = spec.warmup();
    let n_train = w + train_points;
    let n_total = n_train + test_points;
    if n_total > data.len() {
        return Err(NgrcError::InsufficientData {
            needed: n_total,
            got: data.len(),
        });
    }
    let training = data.slice(0, n_train);
    let model = train_inferrer(&training, observed, target, spec, alpha)?;
    let target_scale = ScalingVector::new(vec![scaling.as_slice()[target]])?;

    let training_inferred = infer(&model, &training)?;
    let training_truth = training.slice(w, n_train).select(&[target])?;
    // the test window keeps its own warm-up so every test sample gets a prediction
    let test_input = data.slice(n_train - w, n_total);
    let test_inferred = infer(&model, &test_input)?;
    let test_truth = data.slice(n_train, n_total).select(&[target])?;
    Ok(InferenceTrial {
        training_nrmse: nrmse(&training_inferred, &training_truth, &target_scale)?,
        test_nrmse: nrmse(&test_inferred, &test_truth, &target_scale)?,
        model,
        training_truth,
        training_inferred,
        test_truth,
        test_inferred,
    })
}

/// Summary statistics of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Stats {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Stats {
            mean,
            std: var.sqrt(),
            median: median(values),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
