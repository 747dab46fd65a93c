//! The computation behind each experiment task. Nothing here touches the
//! filesystem; [`super::runner`] turns the results into files.

use serde::Serialize;

use super::config::{ExperimentConfig, Task};
use super::pipeline::{
    add_measurement_noise, forecast_trial, generate, generate_noisy, inference_trial, median, reference_scaling,
    train_and_forecast, training_len, ForecastTrial, InferenceTrial, Stats, TrajectorySettings, TrialSettings,
};
use super::RunError;
use crate::baseline::{
    baseline_forecast, build_reservoir, estimate_cost, reference_cost_rows, spectral_radius, train_baseline, CostParams,
};
use crate::error::NgrcError;
use crate::model::{forecast, train_forecaster};
use crate::series::TimeSeries;
use crate::systems::{integrate, IntegrationConfig, SystemDef};
use crate::verify::{
    estimate_model_uss, extract_return_map, nrmse, return_map_deviation, valid_time, ReturnMap, ScalingVector,
    UssReport,
};

/// Length, in Lyapunov times, of the run whose standard deviations scale
/// every error metric.
pub const SCALING_LYAPUNOV_TIMES: f64 = 200.0;

pub fn trajectory_settings(config: &ExperimentConfig) -> TrajectorySettings {
    TrajectorySettings {
        dt: config.dt,
        transient: config.transient,
        initial_state: config.initial_state.clone(),
        rtol: config.rtol,
        atol: config.atol,
    }
}

pub fn trial_settings(config: &ExperimentConfig, train_points: usize) -> TrialSettings {
    TrialSettings {
        spec: config.feature_spec(),
        alpha: config.alpha,
        train_points,
        test_steps: config.test_steps(),
        threshold: config.valid_threshold,
        lyapunov_time: config.system().lyapunov_time,
    }
}

/// Unit-variance scaling of the noise-free attractor.
pub fn attractor_scaling(config: &ExperimentConfig) -> Result<ScalingVector, RunError> {
    reference_scaling(&config.system(), &trajectory_settings(config), SCALING_LYAPUNOV_TIMES)
        .map_err(RunError::numerical("integration"))
}

/// Ground-truth steady states of the task's system.
pub fn true_steady_states(system: &SystemDef) -> Result<Vec<Vec<f64>>, RunError> {
    if system.steady_states.is_empty() {
        return Err(RunError::Numerical {
            stage: "steady states",
            source: NgrcError::InvalidArgument(format!("no steady states known for {}", system.name)),
        });
    }
    Ok(system.steady_states.clone())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrialMetrics {
    pub segment: usize,
    pub training_nrmse: f64,
    pub test_nrmse: f64,
    pub valid_time: f64,
}

/// Checks that only make sense for an odd feature set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OddSymmetry {
    /// `max |W_out · O(0)|`: how far the origin is from a fixed point.
    pub origin_increment: f64,
    /// `max |forecast(-w) + forecast(w)|` over the test window.
    pub forecast_antisymmetry: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnMapOutcome {
    pub time_units: f64,
    pub diverged: bool,
    pub predicted_points: usize,
    pub truth_points: usize,
    pub deviation: Option<f64>,
    /// Deviation divided by the extent of the true map.
    pub relative_deviation: Option<f64>,
    #[serde(skip)]
    pub predicted: Option<ReturnMap>,
    #[serde(skip)]
    pub truth: ReturnMap,
}

#[derive(Debug, Clone)]
pub struct ForecastOutcome {
    pub scaling: ScalingVector,
    pub trials: Vec<ForecastTrial>,
    pub metrics: Vec<TrialMetrics>,
    pub uss: UssReport,
    pub odd_symmetry: Option<OddSymmetry>,
    pub return_map: Option<ReturnMapOutcome>,
}

impl ForecastOutcome {
    pub fn valid_times(&self) -> Vec<f64> {
        self.metrics.iter().map(|m| m.valid_time).collect()
    }
}

/// Lorenz63 or double-scroll forecasting over `config.segments` disjoint
/// train/test segments.
pub fn run_forecast(config: &ExperimentConfig) -> Result<ForecastOutcome, RunError> {
    let system = config.system();
    let traj = trajectory_settings(config);
    let settings = trial_settings(config, config.train_points);
    let scaling = attractor_scaling(config)?;
    let n = settings.footprint() * config.segments;
    let data = generate(&system, &traj, n).map_err(RunError::numerical("integration"))?;

    let n_train = training_len(&settings.spec, settings.train_points);
    let mut trials = Vec::with_capacity(config.segments);
    for j in 0..config.segments {
        let start = j * settings.footprint();
        let trial = if config.measurement_noise_rms > 0.0 {
            let noisy = add_measurement_noise(
                &data.slice(start, start + n_train),
                config.measurement_noise_rms,
                config.seed ^ j as u64,
            )
            .map_err(RunError::numerical("measurement noise"))?;
            let truth = data.slice(start + n_train, start + settings.footprint());
            train_and_forecast(noisy, truth, &settings, &scaling)
        } else {
            forecast_trial(&data, start, &settings, &scaling)
        };
        trials.push(trial.map_err(RunError::numerical("training"))?);
    }
    let metrics = trials
        .iter()
        .enumerate()
        .map(|(segment, t)| TrialMetrics {
            segment,
            training_nrmse: t.training_nrmse,
            test_nrmse: t.test_nrmse,
            valid_time: t.valid_time,
        })
        .collect();

    let truths = true_steady_states(&system)?;
    let mut estimates = Vec::with_capacity(trials.len());
    for t in &trials {
        estimates.push(estimate_model_uss(&t.model, &truths).map_err(RunError::numerical("steady states"))?);
    }
    let uss = UssReport::new(&truths, &estimates, &scaling);

    let first = &trials[0];
    let odd_symmetry = if settings.spec.is_odd() {
        Some(odd_symmetry_checks(first)?)
    } else {
        None
    };
    let return_map = if config.return_map_time > 0.0 {
        let start = data.last().expect("data is non-empty").to_vec();
        Some(return_map_outcome(config, first, start)?)
    } else {
        None
    };
    Ok(ForecastOutcome {
        scaling,
        trials,
        metrics,
        uss,
        odd_symmetry,
        return_map,
    })
}

fn odd_symmetry_checks(trial: &ForecastTrial) -> Result<OddSymmetry, RunError> {
    let model = &trial.model;
    let zero = vec![0.0; model.spec().linear_len()];
    let origin_increment = model.increment(&zero).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let n = trial.training.len();
    let warm = trial.training.slice(n - model.history_len(), n);
    let steps = trial.forecast.len();
    let neg = forecast(model, &warm.negated(), steps).map_err(RunError::numerical("forecast"))?;
    let forecast_antisymmetry = neg
        .as_flat()
        .iter()
        .zip(trial.forecast.as_flat())
        .fold(0.0_f64, |m, (a, b)| m.max((a + b).abs()));
    Ok(OddSymmetry {
        origin_increment,
        forecast_antisymmetry,
    })
}

/// Return map of the last coordinate from a long free-running forecast,
/// compared with a true trajectory of the same length.
fn return_map_outcome(
    config: &ExperimentConfig,
    trial: &ForecastTrial,
    truth_start: Vec<f64>,
) -> Result<ReturnMapOutcome, RunError> {
    let system = config.system();
    let component = system.dim - 1;
    let steps = (config.return_map_time / config.dt).round() as usize;
    let cfg = IntegrationConfig::new(truth_start, config.dt, steps as f64 * config.dt)
        .with_tolerances(config.rtol, config.atol);
    let truth_run = integrate(&system, &cfg).map_err(RunError::numerical("integration"))?;
    let truth =
        extract_return_map(&truth_run, component, config.return_map_time).map_err(RunError::numerical("return map"))?;

    let model = &trial.model;
    let n = trial.training.len();
    let warm = trial.training.slice(n - model.history_len(), n);
    let predicted_run = forecast(model, &warm, steps).map_err(RunError::numerical("forecast"))?;
    let diverged = predicted_run.as_flat().iter().any(|v| !v.is_finite());
    let predicted = if diverged {
        None
    } else {
        extract_return_map(&predicted_run, component, config.return_map_time).ok()
    };
    let deviation = predicted.as_ref().map(|p| return_map_deviation(p, &truth));
    Ok(ReturnMapOutcome {
        time_units: config.return_map_time,
        diverged,
        predicted_points: predicted.as_ref().map_or(0, |p| p.len()),
        truth_points: truth.len(),
        deviation,
        relative_deviation: deviation.map(|d| d / truth.extent()),
        predicted,
        truth,
    })
}

#[derive(Debug, Clone)]
pub struct InferenceOutcome {
    pub trial: InferenceTrial,
    /// Observed inputs over the training window.
    pub training_inputs: TimeSeries,
}

/// Lorenz63 inference of `target` from the `observed` components.
pub fn run_inference(config: &ExperimentConfig) -> Result<InferenceOutcome, RunError> {
    let system = config.system();
    let spec = config.feature_spec();
    let scaling = attractor_scaling(config)?;
    let test_points = config.test_steps();
    let n = spec.warmup() + config.train_points + test_points;
    let mut data = generate(&system, &trajectory_settings(config), n).map_err(RunError::numerical("integration"))?;
    if config.measurement_noise_rms > 0.0 {
        let n_train = spec.warmup() + config.train_points;
        let noisy = add_measurement_noise(&data.slice(0, n_train), config.measurement_noise_rms, config.seed)
            .map_err(RunError::numerical("measurement noise"))?;
        let mut flat = noisy.as_flat().to_vec();
        flat.extend_from_slice(data.slice(n_train, n).as_flat());
        data = TimeSeries::from_flat(data.t0(), data.dt(), data.dim(), flat)
            .map_err(RunError::numerical("measurement noise"))?;
    }
    let trial = inference_trial(
        &data,
        &config.observed,
        config.target,
        &spec,
        config.alpha,
        config.train_points,
        test_points,
        &scaling,
    )
    .map_err(RunError::numerical("training"))?;
    let training_inputs = data
        .slice(0, spec.warmup() + config.train_points)
        .select(&config.observed)
        .map_err(RunError::numerical("training"))?;
    Ok(InferenceOutcome { trial, training_inputs })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub train_points: usize,
    pub mean_nrmse: f64,
    pub std_nrmse: f64,
    pub median_nrmse: f64,
    pub min_nrmse: f64,
    pub max_nrmse: f64,
    /// Segments whose forecast stayed finite; the statistics cover all of them.
    pub finite_segments: usize,
    pub segments: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// `nrmse[size][segment]`.
    #[serde(skip)]
    pub nrmse: Vec<Vec<f64>>,
}

impl SweepOutcome {
    pub fn row(&self, train_points: usize) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.train_points == train_points)
    }
}

/// Testing NRMSE against training-set size, each size averaged over
/// `config.segments` contiguous disjoint segments of one long trajectory.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome, RunError> {
    let system = config.system();
    let scaling = attractor_scaling(config)?;
    let largest = config.sweep_sizes.iter().copied().max().unwrap_or(config.train_points);
    let n = trial_settings(config, largest).footprint() * config.segments;
    let data = generate(&system, &trajectory_settings(config), n).map_err(RunError::numerical("integration"))?;
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for &size in &config.sweep_sizes {
        let settings = trial_settings(config, size);
        let mut values = Vec::with_capacity(config.segments);
        for j in 0..config.segments {
            let trial = forecast_trial(&data, j * settings.footprint(), &settings, &scaling)
                .map_err(RunError::numerical("training"))?;
            values.push(trial.test_nrmse);
        }
        let finite = values.iter().filter(|v| v.is_finite()).count();
        let st = Stats::of(&values);
        rows.push(SweepRow {
            train_points: size,
            mean_nrmse: st.mean,
            std_nrmse: st.std,
            median_nrmse: st.median,
            min_nrmse: st.min,
            max_nrmse: st.max,
            finite_segments: finite,
            segments: config.segments,
        });
        all.push(values);
    }
    Ok(SweepOutcome { rows, nrmse: all })
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseSeedResult {
    pub seed: u64,
    /// Unit-variance scaled NRMSE against the noise-free continuation.
    pub nrmse: f64,
    /// Unscaled RMSE against the same continuation.
    pub rmse: f64,
    pub training_nrmse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseOutcome {
    pub per_seed: Vec<NoiseSeedResult>,
    pub median_nrmse: f64,
    pub median_rmse: f64,
    /// Component standard deviations of the noise-driven trajectory.
    pub driven_stds: Vec<f64>,
    #[serde(skip)]
    pub example_training: Option<TimeSeries>,
    #[serde(skip)]
    pub example_forecast: Option<TimeSeries>,
    #[serde(skip)]
    pub example_truth: Option<TimeSeries>,
}

/// Samples of the long noise-driven run used to report component spreads.
const DRIVEN_STD_SAMPLES: usize = 20_001;

/// Trains on a noise-driven Lorenz63 run and forecasts from the last
/// training point; the forecast is compared with the noise-free trajectory
/// from that same point. Repeated for `noise_seeds` seeds `seed ^ j`.
pub fn run_noise(config: &ExperimentConfig) -> Result<NoiseOutcome, RunError> {
    let system = config.system();
    let traj = trajectory_settings(config);
    let spec = config.feature_spec();
    let scaling = attractor_scaling(config)?;
    let n_train = training_len(&spec, config.train_points);
    let steps = config.test_steps();
    let mut per_seed = Vec::with_capacity(config.noise_seeds);
    let mut example = None;
    for j in 0..config.noise_seeds {
        let seed = config.seed ^ j as u64;
        let training = generate_noisy(&system, &traj, n_train, config.noise_rms, seed)
            .map_err(RunError::numerical("integration"))?;
        let model = train_forecaster(&training, &spec, config.alpha).map_err(RunError::numerical("training"))?;
        let last = training.last().expect("training is non-empty").to_vec();
        let cfg =
            IntegrationConfig::new(last, config.dt, steps as f64 * config.dt).with_tolerances(config.rtol, config.atol);
        let clean = integrate(&system, &cfg).map_err(RunError::numerical("integration"))?;
        let clean = clean.slice(1, clean.len());
        let clean = TimeSeries::from_flat(
            training.time(n_train - 1) + config.dt,
            config.dt,
            clean.dim(),
            clean.as_flat().to_vec(),
        )
        .map_err(RunError::numerical("integration"))?;
        let warm = training.slice(n_train - model.history_len(), n_train);
        let predicted = forecast(&model, &warm, steps).map_err(RunError::numerical("forecast"))?;
        per_seed.push(NoiseSeedResult {
            seed,
            nrmse: nrmse(&predicted, &clean, &scaling).map_err(RunError::numerical("forecast"))?,
            rmse: nrmse(&predicted, &clean, &ScalingVector::ones(clean.dim()))
                .map_err(RunError::numerical("forecast"))?,
            training_nrmse: model.metadata.training_nrmse,
        });
        if j == 0 {
            example = Some((training, predicted, clean));
        }
    }
    let driven = generate_noisy(&system, &traj, DRIVEN_STD_SAMPLES, config.noise_rms, config.seed)
        .map_err(RunError::numerical("integration"))?;
    let (example_training, example_forecast, example_truth) = match example {
        Some((a, b, c)) => (Some(a), Some(b), Some(c)),
        None => (None, None, None),
    };
    Ok(NoiseOutcome {
        median_nrmse: median(&per_seed.iter().map(|r| r.nrmse).collect::<Vec<_>>()),
        median_rmse: median(&per_seed.iter().map(|r| r.rmse).collect::<Vec<_>>()),
        per_seed,
        driven_stds: driven.component_stds(),
        example_training,
        example_forecast,
        example_truth,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexityRow {
    pub task: &'static str,
    pub label: &'static str,
    pub ngrc: CostParams,
    pub reservoir: CostParams,
    pub ngrc_multiplications: f64,
    pub reservoir_multiplications: f64,
    pub speedup: f64,
    pub quoted_speedup: &'static str,
    /// Activation evaluations of the reservoir, not part of the ratio.
    pub special_evaluations: f64,
}

/// Training-cost comparison table.
pub fn run_complexity() -> Result<Vec<ComplexityRow>, RunError> {
    reference_cost_rows()
        .into_iter()
        .map(|row| {
            let speedup = estimate_cost(&row.ng, &row.rc).map_err(RunError::numerical("cost estimate"))?;
            Ok(ComplexityRow {
                task: row.task,
                label: row.label,
                ngrc_multiplications: row.ng.multiplications(),
                reservoir_multiplications: row.rc.multiplications(),
                special_evaluations: row.rc.special_evaluations(),
                ngrc: row.ng,
                reservoir: row.rc,
                speedup,
                quoted_speedup: row.quoted,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub nonzeros: usize,
    pub spectral_radius: f64,
    pub training_nrmse: f64,
    pub test_nrmse: f64,
    pub valid_time: f64,
    pub forecast: TimeSeries,
    pub truth: TimeSeries,
}

/// Traditional reservoir computer on the Lorenz63 forecasting task.
pub fn run_baseline(config: &ExperimentConfig) -> Result<BaselineOutcome, RunError> {
    let system = config.system();
    let scaling = attractor_scaling(config)?;
    let steps = config.test_steps();
    let n_train = config.rc_washout + config.train_points + 1;
    let data =
        generate(&system, &trajectory_settings(config), n_train + steps).map_err(RunError::numerical("integration"))?;
    let reservoir =
        build_reservoir(&config.reservoir_params(), system.dim).map_err(RunError::numerical("reservoir"))?;
    let training = data.slice(0, n_train);
    let fit = train_baseline(&reservoir, &training, config.rc_washout, config.rc_alpha)
        .map_err(RunError::numerical("training"))?;
    let predicted = baseline_forecast(&reservoir, &fit, &training, steps).map_err(RunError::numerical("forecast"))?;
    let truth = data.slice(n_train, n_train + steps);
    Ok(BaselineOutcome {
        nonzeros: reservoir.nonzeros(),
        spectral_radius: spectral_radius(&reservoir.adjacency),
        training_nrmse: fit.training_nrmse,
        test_nrmse: nrmse(&predicted, &truth, &scaling).map_err(RunError::numerical("forecast"))?,
        valid_time: valid_time(
            &predicted,
            &truth,
            &scaling,
            config.valid_threshold,
            system.lyapunov_time,
        )
        .map_err(RunError::numerical("forecast"))?,
        forecast: predicted,
        truth,
    })
}

/// Whether `task` trains NG-RC forecasters on noise-free data.
pub fn is_forecast(task: Task) -> bool {
    matches!(task, Task::ForecastLorenz | Task::ForecastDoublescroll)
}
