//! Training and running NG-RC models.
//!
//! A forecaster learns the one-step increment: features at sample `i` (built
//! from `X_i` and earlier taps) are regressed onto `X_{i+1} - X_i`, and the
//! closed loop iterates `X_{i+1} = X_i + W_out · O_total,i`. An inferrer maps
//! features of the observed components directly onto a hidden component.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{NgrcError, Result};
use crate::features::{feature_length, FeatureSpec, Featurizer};
use crate::regression::{ridge_fit, ReadoutMatrix, TrainingBlock};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ForecastDelta,
    InferenceDirect,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ForecastDelta => "forecast-delta",
            Mode::InferenceDirect => "inference-direct",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bookkeeping recorded at training time.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMetadata {
    /// Scaled NRMSE of the fitted model on its own training columns.
    pub training_nrmse: f64,
    pub training_columns: usize,
}

#[derive(Debug, Clone)]
pub struct NgrcModel {
    spec: FeatureSpec,
    readout: ReadoutMatrix,
    mode: Mode,
    input_indices: Vec<usize>,
    target_index: Option<usize>,
    featurizer: Featurizer,
    pub metadata: ModelMetadata,
}

impl PartialEq for NgrcModel {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
            && self.readout == other.readout
            && self.mode == other.mode
            && self.input_indices == other.input_indices
            && self.target_index == other.target_index
            && self.metadata == other.metadata
    }
}

impl NgrcModel {
    /// Assembles a model from parts, checking every shape invariant.
    pub fn from_parts(
        spec: FeatureSpec,
        readout: ReadoutMatrix,
        mode: Mode,
        input_indices: Vec<usize>,
        target_index: Option<usize>,
    ) -> Result<Self> {
        spec.validate()?;
        if input_indices.len() != spec.d {
            return Err(NgrcError::DimensionMismatch(format!(
                "{} input indices for d = {}",
                input_indices.len(),
                spec.d
            )));
        }
        if readout.feature_dim() != feature_length(&spec) {
            return Err(NgrcError::DimensionMismatch(format!(
                "readout has {} feature columns, spec yields {}",
                readout.feature_dim(),
                feature_length(&spec)
            )));
        }
        if mode == Mode::ForecastDelta && readout.output_dim() != spec.d {
            return Err(NgrcError::DimensionMismatch(format!(
                "closed-loop forecaster needs output_dim = d = {}, got {}",
                spec.d,
                readout.output_dim()
            )));
        }
        Ok(Self {
            featurizer: Featurizer::new(spec.clone()),
            spec,
            readout,
            mode,
            input_indices,
            target_index,
            metadata: ModelMetadata {
                training_nrmse: f64::NAN,
                training_columns: 0,
            },
        })
    }

    pub fn spec(&self) -> &FeatureSpec {
        &self.spec
    }

    pub fn readout(&self) -> &ReadoutMatrix {
        &self.readout
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn input_indices(&self) -> &[usize] {
        &self.input_indices
    }

    pub fn target_index(&self) -> Option<usize> {
        self.target_index
    }

    pub fn output_dim(&self) -> usize {
        self.readout.output_dim()
    }

    pub fn featurizer(&self) -> &Featurizer {
        &self.featurizer
    }

    /// Samples needed before the first prediction, `(k-1)*s + 1`.
    pub fn history_len(&self) -> usize {
        self.spec.warmup() + 1
    }

    fn require(&self, mode: Mode) -> Result<()> {
        if self.mode != mode {
            return Err(NgrcError::ModeMismatch {
                expected: mode.as_str(),
                actual: self.mode.as_str(),
            });
        }
        Ok(())
    }

    /// Learned increment `W_out · O_total` for a linear block.
    pub fn increment(&self, linear_block: &[f64]) -> Vec<f64> {
        let f = self.featurizer.features_from_linear(linear_block);
        let mut out = vec![0.0; self.output_dim()];
        self.readout.apply_into(&f, &mut out);
        out
    }

    pub fn to_toml_string(&self) -> Result<String> {
        let w = &self.readout.weights;
        let doc = ModelDocument {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            mode: self.mode,
            d: self.spec.d,
            k: self.spec.k,
            s: self.spec.s,
            degrees: self.spec.degrees.clone(),
            include_constant: self.spec.include_constant,
            constant_value: self.spec.constant_value,
            input_indices: self.input_indices.clone(),
            target_index: self.target_index,
            output_dim: w.nrows(),
            feature_dim: w.ncols(),
            alpha: self.readout.alpha,
            training_nrmse: self.metadata.training_nrmse,
            training_columns: self.metadata.training_columns,
            weights: (0..w.nrows())
                .flat_map(|r| (0..w.ncols()).map(move |c| w[(r, c)]))
                .collect(),
        };
        toml::to_string(&doc).map_err(|e| NgrcError::Format(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: ModelDocument = toml::from_str(text).map_err(|e| NgrcError::Format(e.to_string()))?;
        if doc.format != MODEL_FORMAT {
            return Err(NgrcError::Format(format!("unexpected format tag {:?}", doc.format)));
        }
        if doc.version != MODEL_VERSION {
            return Err(NgrcError::Format(format!("unsupported model version {}", doc.version)));
        }
        if doc.weights.len() != doc.output_dim * doc.feature_dim {
            return Err(NgrcError::Format(format!(
                "{} weights for a {}×{} readout",
                doc.weights.len(),
                doc.output_dim,
                doc.feature_dim
            )));
        }
        let spec = FeatureSpec {
            d: doc.d,
            k: doc.k,
            s: doc.s,
            degrees: doc.degrees,
            include_constant: doc.include_constant,
            constant_value: doc.constant_value,
        };
        let readout = ReadoutMatrix {
            weights: DMatrix::from_row_slice(doc.output_dim, doc.feature_dim, &doc.weights),
            alpha: doc.alpha,
        };
        let mut model = Self::from_parts(spec, readout, doc.mode, doc.input_indices, doc.target_index)?;
        model.metadata = ModelMetadata {
            training_nrmse: doc.training_nrmse,
            training_columns: doc.training_columns,
        };
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

const MODEL_FORMAT: &str = "ngrc-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    format: String,
    version: u32,
    mode: Mode,
    d: usize,
    k: usize,
    s: usize,
    degrees: Vec<u32>,
    include_constant: bool,
    constant_value: f64,
    input_indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_index: Option<usize>,
    output_dim: usize,
    feature_dim: usize,
    alpha: f64,
    training_nrmse: f64,
    training_columns: usize,
    /// Row-major `output_dim × feature_dim`.
    weights: Vec<f64>,
}

fn safe_scale(std: f64) -> f64 {
    if std > 0.0 {
        std
    } else {
        1.0
    }
}

/// Fits a closed-loop forecaster on one-step increments.
pub fn train_forecaster(series: &TimeSeries, spec: &FeatureSpec, alpha: f64) -> Result<NgrcModel> {
    spec.validate()?;
    if series.dim() != spec.d {
        return Err(NgrcError::DimensionMismatch(format!(
            "series has {} components, spec expects d = {}",
            series.dim(),
            spec.d
        )));
    }
    let warmup = spec.warmup();
    let needed = warmup + 2;
    if series.len() < needed {
        return Err(NgrcError::InsufficientData {
            needed,
            got: series.len(),
        });
    }
    let featurizer = Featurizer::new(spec.clone());
    let d = spec.d;
    let n_cols = series.len() - 1 - warmup;
    let fd = featurizer.len();
    let mut features = DMatrix::zeros(fd, n_cols);
    let mut targets = DMatrix::zeros(d, n_cols);
    let mut buf = vec![0.0; fd];
    for (col, i) in (warmup..series.len() - 1).enumerate() {
        let lin = crate::features::linear_features(series, spec, i)?;
        featurizer.fill_from_linear(&lin, &mut buf);
        features.column_mut(col).copy_from_slice(&buf);
        let (now, next) = (series.sample(i), series.sample(i + 1));
        for c in 0..d {
            targets[(c, col)] = next[c] - now[c];
        }
    }
    let block = TrainingBlock::new(features, targets)?;
    let readout = ridge_fit(&block, alpha)?;

    // one-step reconstruction of the training samples
    let fitted = &readout.weights * &block.features;
    let scale: Vec<f64> = series.component_stds().into_iter().map(safe_scale).collect();
    let mut ss = 0.0;
    for col in 0..n_cols {
        for c in 0..d {
            let e = (fitted[(c, col)] - block.targets[(c, col)]) / scale[c];
            ss += e * e;
        }
    }
    let training_nrmse = (ss / (n_cols * d) as f64).sqrt();

    let mut model = NgrcModel::from_parts(spec.clone(), readout, Mode::ForecastDelta, (0..d).collect(), None)?;
    model.metadata = ModelMetadata {
        training_nrmse,
        training_columns: n_cols,
    };
    Ok(model)
}

/// Runs a forecaster autonomously for `n_steps` samples after the end of `warmup`.
pub fn forecast(model: &NgrcModel, warmup: &TimeSeries, n_steps: usize) -> Result<TimeSeries> {
    model.require(Mode::ForecastDelta)?;
    let spec = model.spec();
    let d = spec.d;
    if warmup.dim() != d {
        return Err(NgrcError::DimensionMismatch(format!(
            "warm-up has {} components, model expects {d}",
            warmup.dim()
        )));
    }
    let hist = model.history_len();
    if warmup.len() < hist {
        return Err(NgrcError::InsufficientData {
            needed: hist,
            got: warmup.len(),
        });
    }
    // ring buffer of the last `hist` states; `head` is the newest
    let mut ring: Vec<f64> = Vec::with_capacity(hist * d);
    for m in warmup.len() - hist..warmup.len() {
        ring.extend_from_slice(warmup.sample(m));
    }
    let mut head = hist - 1;
    let featurizer = model.featurizer();
    let mut lin = vec![0.0; spec.linear_len()];
    let mut feats = vec![0.0; featurizer.len()];
    let mut delta = vec![0.0; d];
    let mut out = Vec::with_capacity(n_steps * d);
    for _ in 0..n_steps {
        for tap in 0..spec.k {
            let slot = (head + hist - tap * spec.s) % hist;
            lin[tap * d..(tap + 1) * d].copy_from_slice(&ring[slot * d..(slot + 1) * d]);
        }
        featurizer.fill_from_linear(&lin, &mut feats);
        model.readout().apply_into(&feats, &mut delta);
        let next_slot = (head + 1) % hist;
        for c in 0..d {
            ring[next_slot * d + c] = lin[c] + delta[c];
        }
        out.extend_from_slice(&ring[next_slot * d..(next_slot + 1) * d]);
        head = next_slot;
    }
    TimeSeries::from_flat(warmup.time(warmup.len() - 1) + warmup.dt(), warmup.dt(), d, out)
}

/// Fits a direct (open-loop) map from the observed components to `target`.
pub fn train_inferrer(
    series: &TimeSeries,
    observed: &[usize],
    target: usize,
    spec: &FeatureSpec,
    alpha: f64,
) -> Result<NgrcModel> {
    spec.validate()?;
    if observed.contains(&target) {
        return Err(NgrcError::InvalidArgument(format!(
            "target component {target} is also observed"
        )));
    }
    if spec.d != observed.len() {
        return Err(NgrcError::DimensionMismatch(format!(
            "spec d = {} but {} components are observed",
            spec.d,
            observed.len()
        )));
    }
    if target >= series.dim() {
        return Err(NgrcError::DimensionMismatch(format!(
            "target component {target} out of range for a {}-dimensional series",
            series.dim()
        )));
    }
    let inputs = series.select(observed)?;
    let warmup = spec.warmup();
    if series.len() < warmup + 1 {
        return Err(NgrcError::InsufficientData {
            needed: warmup + 1,
            got: series.len(),
        });
    }
    let featurizer = Featurizer::new(spec.clone());
    let n_cols = series.len() - warmup;
    let mut features = DMatrix::zeros(featurizer.len(), n_cols);
    let mut targets = DMatrix::zeros(1, n_cols);
    for (col, i) in (warmup..series.len()).enumerate() {
        features
            .column_mut(col)
            .copy_from_slice(&featurizer.features_at(&inputs, i)?);
        targets[(0, col)] = series.sample(i)[target];
    }
    let block = TrainingBlock::new(features, targets)?;
    let readout = ridge_fit(&block, alpha)?;

    let fitted = &readout.weights * &block.features;
    let scale = safe_scale(series.component_stds()[target]);
    let ss: f64 = (0..n_cols)
        .map(|c| ((fitted[(0, c)] - block.targets[(0, c)]) / scale).powi(2))
        .sum();
    let training_nrmse = (ss / n_cols as f64).sqrt();

    let mut model = NgrcModel::from_parts(
        spec.clone(),
        readout,
        Mode::InferenceDirect,
        observed.to_vec(),
        Some(target),
    )?;
    model.metadata = ModelMetadata {
        training_nrmse,
        training_columns: n_cols,
    };
    Ok(model)
}

/// Open-loop inference over every sample past the warm-up.
///
/// `series` may hold all components (the model's input indices select the
/// observed ones) or exactly the observed components in order.
pub fn infer(model: &NgrcModel, series: &TimeSeries) -> Result<TimeSeries> {
    model.require(Mode::InferenceDirect)?;
    let inputs = if series.dim() == model.spec().d && model.input_indices().iter().any(|&c| c >= series.dim()) {
        series.clone()
    } else {
        series.select(model.input_indices())?
    };
    let warmup = model.spec().warmup();
    if inputs.len() <= warmup {
        return Err(NgrcError::InsufficientData {
            needed: warmup + 1,
            got: inputs.len(),
        });
    }
    let featurizer = model.featurizer();
    let od = model.output_dim();
    let mut feats = vec![0.0; featurizer.len()];
    let mut out = Vec::with_capacity((inputs.len() - warmup) * od);
    let mut y = vec![0.0; od];
    for i in warmup..inputs.len() {
        let lin = crate::features::linear_features(&inputs, model.spec(), i)?;
        featurizer.fill_from_linear(&lin, &mut feats);
        model.readout().apply_into(&feats, &mut y);
        out.extend_from_slice(&y);
    }
    TimeSeries::from_flat(inputs.time(warmup), inputs.dt(), od, out)
}
