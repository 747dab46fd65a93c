//! Experiment configuration files.
//!
//! A config is a flat TOML document. Only `task` is required; every other key
//! has a task-dependent default. [`validate_config`] fills the defaults and
//! checks every constraint, and the resolved form serializes back to a file
//! that reproduces the run exactly.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baseline::{Activation, ReservoirParams};
use crate::features::FeatureSpec;
use crate::systems::SystemDef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    ForecastLorenz,
    ForecastDoublescroll,
    InferLorenz,
    SweepTrainsize,
    NoiseLorenz,
    Complexity,
    BaselineRc,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::ForecastLorenz => "forecast-lorenz",
            Task::ForecastDoublescroll => "forecast-doublescroll",
            Task::InferLorenz => "infer-lorenz",
            Task::SweepTrainsize => "sweep-trainsize",
            Task::NoiseLorenz => "noise-lorenz",
            Task::Complexity => "complexity",
            Task::BaselineRc => "baseline-rc",
        }
    }

    pub fn system(self) -> SystemDef {
        match self {
            Task::ForecastDoublescroll => SystemDef::double_scroll(),
            _ => SystemDef::lorenz63(),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One problem found while validating a config.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Why a config could not be used.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    Invalid(Vec<FieldError>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Parse(m) => write!(f, "malformed config: {m}"),
            ConfigError::Invalid(errs) => {
                let parts: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
                write!(f, "invalid config: {}", parts.join("; "))
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// The file as written; absent keys take task defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub task: Option<Task>,
    pub seed: Option<u64>,
    pub out_dir: Option<String>,
    pub dt: Option<f64>,
    pub transient: Option<f64>,
    pub initial_state: Option<Vec<f64>>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub k: Option<i64>,
    pub s: Option<i64>,
    pub degrees: Option<Vec<i64>>,
    pub include_constant: Option<bool>,
    pub constant_value: Option<f64>,
    pub alpha: Option<f64>,
    pub train_points: Option<i64>,
    pub test_lyapunov_times: Option<f64>,
    pub segments: Option<i64>,
    pub valid_threshold: Option<f64>,
    pub observed: Option<Vec<i64>>,
    pub target: Option<i64>,
    pub sweep_sizes: Option<Vec<i64>>,
    pub noise_rms: Option<f64>,
    pub noise_seeds: Option<i64>,
    pub measurement_noise_rms: Option<f64>,
    pub return_map_time: Option<f64>,
    pub rc_n: Option<i64>,
    pub rc_sigma_r: Option<f64>,
    pub rc_spectral_radius: Option<f64>,
    pub rc_gamma: Option<f64>,
    pub rc_input_scale: Option<f64>,
    pub rc_bias: Option<f64>,
    pub rc_activation: Option<Activation>,
    pub rc_washout: Option<i64>,
    pub rc_alpha: Option<f64>,
}

/// A fully resolved and validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub seed: u64,
    pub out_dir: String,
    /// Sample step of every trajectory.
    pub dt: f64,
    /// Time integrated and discarded before recording.
    pub transient: f64,
    pub initial_state: Vec<f64>,
    pub rtol: f64,
    pub atol: f64,
    pub k: usize,
    pub s: usize,
    pub degrees: Vec<u32>,
    pub include_constant: bool,
    pub constant_value: f64,
    pub alpha: f64,
    pub train_points: usize,
    pub test_lyapunov_times: f64,
    /// Disjoint train/test trials.
    pub segments: usize,
    pub valid_threshold: f64,
    pub observed: Vec<usize>,
    pub target: usize,
    pub sweep_sizes: Vec<usize>,
    pub noise_rms: f64,
    pub noise_seeds: usize,
    /// Gaussian noise added to the recorded training data, 0 to disable.
    pub measurement_noise_rms: f64,
    /// Length of the free-running forecast used for the return map, 0 to skip.
    pub return_map_time: f64,
    pub rc_n: usize,
    pub rc_sigma_r: f64,
    pub rc_spectral_radius: f64,
    pub rc_gamma: f64,
    pub rc_input_scale: f64,
    pub rc_bias: f64,
    pub rc_activation: Activation,
    pub rc_washout: usize,
    pub rc_alpha: f64,
}

impl ExperimentConfig {
    /// Defaults for `task`; `validate_config` starts from these.
    pub fn defaults(task: Task) -> Self {
        let system = task.system();
        let mut c = ExperimentConfig {
            task,
            seed: 0,
            out_dir: format!("runs/{task}"),
            dt: 0.025,
            transient: 20.0,
            initial_state: system.default_seed_state(),
            rtol: 1e-8,
            atol: 1e-10,
            k: 2,
            s: 1,
            degrees: vec![2],
            include_constant: true,
            constant_value: 1.0,
            alpha: 2.5e-6,
            train_points: 400,
            test_lyapunov_times: 10.0,
            segments: 1,
            valid_threshold: 0.5,
            observed: vec![0, 1],
            target: 2,
            sweep_sizes: vec![100, 150, 200, 250, 300, 400, 500, 600, 700, 800, 900, 1000],
            noise_rms: 0.0,
            noise_seeds: 1,
            measurement_noise_rms: 0.0,
            return_map_time: 0.0,
            rc_n: 100,
            rc_sigma_r: 0.05,
            rc_spectral_radius: 0.9,
            rc_gamma: 1.0,
            rc_input_scale: 1.0,
            rc_bias: 0.0,
            rc_activation: Activation::Tanh,
            rc_washout: 100,
            rc_alpha: 1e-6,
        };
        match task {
            Task::ForecastLorenz => c.return_map_time = 1000.0,
            Task::ForecastDoublescroll => {
                c.dt = 0.25;
                c.degrees = vec![3];
                c.include_constant = false;
                c.alpha = 1e-3;
            }
            Task::InferLorenz => {
                c.dt = 0.05;
                c.k = 4;
                c.s = 5;
                c.alpha = 0.05;
            }
            Task::SweepTrainsize => {
                c.segments = 20;
                c.test_lyapunov_times = 1.0;
            }
            Task::NoiseLorenz => {
                c.alpha = 1.4e-2;
                c.noise_rms = 1.0;
                c.noise_seeds = 10;
                c.test_lyapunov_times = 1.0;
            }
            Task::Complexity => {}
            Task::BaselineRc => c.test_lyapunov_times = 5.0,
        }
        c
    }

    pub fn system(&self) -> SystemDef {
        self.task.system()
    }

    /// Feature layout for the observed inputs of this task.
    pub fn feature_spec(&self) -> FeatureSpec {
        let d = match self.task {
            Task::InferLorenz => self.observed.len(),
            _ => self.system().dim,
        };
        FeatureSpec {
            d,
            k: self.k,
            s: self.s,
            degrees: self.degrees.clone(),
            include_constant: self.include_constant,
            constant_value: self.constant_value,
        }
    }

    /// Test horizon in samples.
    pub fn test_steps(&self) -> usize {
        ((self.test_lyapunov_times * self.system().lyapunov_time / self.dt).round() as usize).max(1)
    }

    pub fn reservoir_params(&self) -> ReservoirParams {
        ReservoirParams {
            n: self.rc_n,
            gamma: self.rc_gamma,
            spectral_radius: self.rc_spectral_radius,
            sigma_r: self.rc_sigma_r,
            input_scale: self.rc_input_scale,
            bias: self.rc_bias,
            activation: self.rc_activation,
            seed: self.seed,
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("resolved config always serializes")
    }
}

/// Reads, resolves and validates a config file without side effects.
pub fn validate_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| ConfigError::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_config(&text)
}

/// Like [`validate_config`] for text already in memory.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
    resolve(file)
}

/// Applies task defaults to `file` and checks every field.
pub fn resolve(file: ConfigFile) -> Result<ExperimentConfig, ConfigError> {
    let mut errs = Vec::new();
    let Some(task) = file.task else {
        return Err(ConfigError::Invalid(vec![FieldError {
            field: "task".into(),
            message: "missing; one of forecast-lorenz, forecast-doublescroll, infer-lorenz, \
                      sweep-trainsize, noise-lorenz, complexity, baseline-rc"
                .into(),
        }]));
    };
    let mut c = ExperimentConfig::defaults(task);
    let mut err = |field: &str, message: String| {
        errs.push(FieldError {
            field: field.into(),
            message,
        })
    };

    macro_rules! take {
        ($name:ident) => {
            if let Some(v) = file.$name {
                c.$name = v;
            }
        };
    }
    macro_rules! count {
        ($name:ident, $min:expr) => {
            if let Some(v) = file.$name {
                if v < $min {
                    err(stringify!($name), format!("must be ≥ {}, got {v}", $min));
                } else {
                    c.$name = v as usize;
                }
            }
        };
    }
    take!(seed);
    take!(out_dir);
    take!(dt);
    take!(transient);
    take!(initial_state);
    take!(rtol);
    take!(atol);
    count!(k, 1);
    count!(s, 1);
    take!(include_constant);
    take!(constant_value);
    take!(alpha);
    count!(train_points, 1);
    take!(test_lyapunov_times);
    count!(segments, 1);
    take!(valid_threshold);
    count!(target, 0);
    take!(noise_rms);
    count!(noise_seeds, 1);
    take!(measurement_noise_rms);
    take!(return_map_time);
    count!(rc_n, 1);
    take!(rc_sigma_r);
    take!(rc_spectral_radius);
    take!(rc_gamma);
    take!(rc_input_scale);
    take!(rc_bias);
    take!(rc_activation);
    count!(rc_washout, 0);
    take!(rc_alpha);

    if let Some(v) = file.degrees {
        if v.iter().any(|&p| p < 2) {
            err("degrees", "every monomial degree must be ≥ 2".into());
        } else {
            let mut d: Vec<u32> = v.into_iter().map(|p| p as u32).collect();
            d.sort_unstable();
            d.dedup();
            c.degrees = d;
        }
    }
    if let Some(v) = file.observed {
        if v.iter().any(|&i| i < 0) {
            err("observed", "component indices must be ≥ 0".into());
        } else {
            c.observed = v.into_iter().map(|i| i as usize).collect();
        }
    }
    if let Some(v) = file.sweep_sizes {
        if v.iter().any(|&n| n < 1) {
            err("sweep_sizes", "every size must be ≥ 1".into());
        } else {
            c.sweep_sizes = v.into_iter().map(|n| n as usize).collect();
        }
    }

    let dim = c.system().dim;
    let positive = |x: f64| x > 0.0 && x.is_finite();
    let nonneg = |x: f64| x >= 0.0 && x.is_finite();
    if !positive(c.dt) {
        err("dt", format!("must be > 0, got {}", c.dt));
    }
    if !nonneg(c.transient) {
        err("transient", format!("must be ≥ 0, got {}", c.transient));
    }
    if c.initial_state.len() != dim || c.initial_state.iter().any(|v| !v.is_finite()) {
        err("initial_state", format!("needs {dim} finite components"));
    }
    if !positive(c.rtol) {
        err("rtol", format!("must be > 0, got {}", c.rtol));
    }
    if !positive(c.atol) {
        err("atol", format!("must be > 0, got {}", c.atol));
    }
    if !nonneg(c.alpha) {
        err("alpha", format!("must be ≥ 0, got {}", c.alpha));
    }
    if !positive(c.test_lyapunov_times) {
        err(
            "test_lyapunov_times",
            format!("must be > 0, got {}", c.test_lyapunov_times),
        );
    }
    if !positive(c.valid_threshold) {
        err("valid_threshold", format!("must be > 0, got {}", c.valid_threshold));
    }
    if !nonneg(c.noise_rms) {
        err("noise_rms", format!("must be ≥ 0, got {}", c.noise_rms));
    }
    if task == Task::NoiseLorenz && c.noise_rms == 0.0 {
        err("noise_rms", "must be > 0 for noise-lorenz".into());
    }
    if !nonneg(c.measurement_noise_rms) {
        err(
            "measurement_noise_rms",
            format!("must be ≥ 0, got {}", c.measurement_noise_rms),
        );
    }
    if !nonneg(c.return_map_time) {
        err("return_map_time", format!("must be ≥ 0, got {}", c.return_map_time));
    }
    if task == Task::InferLorenz {
        if c.observed.is_empty() {
            err("observed", "at least one component must be observed".into());
        }
        if c.observed.iter().any(|&i| i >= dim) {
            err("observed", format!("indices must be < {dim}"));
        }
        if c.target >= dim {
            err("target", format!("must be < {dim}, got {}", c.target));
        }
        if c.observed.contains(&c.target) {
            err("target", "must not also be observed".into());
        }
    }
    if !(c.rc_sigma_r > 0.0 && c.rc_sigma_r <= 1.0) {
        err("rc_sigma_r", format!("must lie in (0, 1], got {}", c.rc_sigma_r));
    }
    if !(0.0..=1.0).contains(&c.rc_gamma) {
        err("rc_gamma", format!("must lie in [0, 1], got {}", c.rc_gamma));
    }
    if !nonneg(c.rc_spectral_radius) {
        err(
            "rc_spectral_radius",
            format!("must be ≥ 0, got {}", c.rc_spectral_radius),
        );
    }
    if !nonneg(c.rc_input_scale) {
        err("rc_input_scale", format!("must be ≥ 0, got {}", c.rc_input_scale));
    }
    if !c.rc_bias.is_finite() {
        err("rc_bias", "must be finite".into());
    }
    if !nonneg(c.rc_alpha) {
        err("rc_alpha", format!("must be ≥ 0, got {}", c.rc_alpha));
    }
    if !c.constant_value.is_finite() {
        err("constant_value", "must be finite".into());
    }

    if errs.is_empty() {
        Ok(c)
    } else {
        Err(ConfigError::Invalid(errs))
    }
}
