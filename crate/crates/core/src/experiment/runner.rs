//! Runs a resolved experiment and writes its outputs:
//! `summary.json`, plot-ready CSVs and `resolved-config.toml`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, Task};
use super::pipeline::Stats;
use super::tasks;
use super::RunError;
use crate::model::NgrcModel;
use crate::series::TimeSeries;
use crate::verify::ReturnMap;

/// What a run produced.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    /// Short `(name, value)` lines for the terminal.
    pub headline: Vec<(String, String)>,
    pub summary: Value,
}

/// One entry of a readout snapshot.
#[derive(Debug, Clone, Serialize)]
pub struct WeightEntry {
    pub output: String,
    pub feature: String,
    pub weight: f64,
}

/// Every readout weight with its label, largest magnitude first.
pub fn ranked_weights(model: &NgrcModel, input_names: &[&str], output_names: &[&str]) -> Vec<WeightEntry> {
    let labels = model.featurizer().labels(input_names);
    let w = &model.readout().weights;
    let mut out = Vec::with_capacity(w.len());
    for r in 0..w.nrows() {
        for (c, label) in labels.iter().enumerate() {
            out.push(WeightEntry {
                output: output_names[r].to_string(),
                feature: label.clone(),
                weight: w[(r, c)],
            });
        }
    }
    out.sort_by(|a, b| b.weight.abs().total_cmp(&a.weight.abs()));
    out
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn io<T>(path: &Path, r: std::io::Result<T>) -> Result<T, RunError> {
        r.map_err(|source| RunError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), RunError> {
        let p = self.path(name);
        Self::io(&p, fs::write(&p, body))
    }

    fn series(&mut self, name: &str, s: &TimeSeries, labels: &[&str]) -> Result<(), RunError> {
        let p = self.path(name);
        s.save_csv(&p, Some(labels)).map_err(|e| RunError::Io {
            path: p.clone(),
            source: std::io::Error::other(e.to_string()),
        })
    }

    fn rows<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), RunError> {
        let p = self.path(name);
        let mut w = Self::io(&p, csv::Writer::from_path(&p).map_err(std::io::Error::other))?;
        for r in rows {
            Self::io(&p, w.serialize(r).map_err(std::io::Error::other))?;
        }
        Self::io(&p, w.flush())
    }

    fn return_map(&mut self, name: &str, map: &ReturnMap) -> Result<(), RunError> {
        let p = self.path(name);
        let f = Self::io(&p, fs::File::create(&p))?;
        map.write_csv(f).map_err(|e| RunError::Io {
            path: p.clone(),
            source: std::io::Error::other(e.to_string()),
        })
    }

    fn model(&mut self, name: &str, model: &NgrcModel) -> Result<(), RunError> {
        let p = self.path(name);
        model.save(&p).map_err(|e| RunError::Io {
            path: p.clone(),
            source: std::io::Error::other(e.to_string()),
        })
    }
}

/// Executes `config` and writes every output under `config.out_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, RunError> {
    let dir = PathBuf::from(&config.out_dir);
    let mut w = Writer::new(&dir)?;
    w.text("resolved-config.toml", &config.to_toml_string())?;
    let (summary, headline) = match config.task {
        Task::ForecastLorenz | Task::ForecastDoublescroll => forecast(config, &mut w)?,
        Task::InferLorenz => inference(config, &mut w)?,
        Task::SweepTrainsize => sweep(config, &mut w)?,
        Task::NoiseLorenz => noise(config, &mut w)?,
        Task::Complexity => complexity(&mut w)?,
        Task::BaselineRc => baseline(config, &mut w)?,
    };
    let body = serde_json::to_string_pretty(&summary).expect("summary serializes");
    w.text("summary.json", &(body + "\n"))?;
    w.files.sort();
    Ok(ExperimentReport {
        out_dir: dir,
        files: w.files,
        headline,
        summary,
    })
}

type Produced = (Value, Vec<(String, String)>);

fn header(config: &ExperimentConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("task".into(), json!(config.task.as_str()));
    m.insert("system".into(), json!(config.system().name));
    m.insert("seed".into(), json!(config.seed));
    m
}

fn forecast(config: &ExperimentConfig, w: &mut Writer) -> Result<Produced, RunError> {
    let out = tasks::run_forecast(config)?;
    let system = config.system();
    let labels = system.label_refs();
    let first = &out.trials[0];
    let model = &first.model;

    w.series("train.csv", &first.training, &labels)?;
    w.series("truth.csv", &first.truth, &labels)?;
    w.series("forecast.csv", &first.forecast, &labels)?;
    w.rows("trials.csv", &out.metrics)?;
    let uss_path = w.path("uss.csv");
    let f = Writer::io(&uss_path, fs::File::create(&uss_path))?;
    out.uss.write_csv(f).map_err(|e| RunError::Io {
        path: uss_path.clone(),
        source: std::io::Error::other(e.to_string()),
    })?;
    let weights = ranked_weights(model, &labels, &labels);
    w.rows("weights.csv", &weights)?;
    w.model("model.toml", model)?;
    if let Some(rm) = &out.return_map {
        w.return_map("return_map_truth.csv", &rm.truth)?;
        if let Some(p) = &rm.predicted {
            w.return_map("return_map_forecast.csv", p)?;
        }
    }

    let vt = Stats::of(&out.valid_times());
    let test = Stats::of(&out.metrics.iter().map(|m| m.test_nrmse).collect::<Vec<_>>());
    let train = Stats::of(&out.metrics.iter().map(|m| m.training_nrmse).collect::<Vec<_>>());
    let mut s = header(config);
    s.insert("feature_dim".into(), json!(model.featurizer().len()));
    s.insert(
        "readout_shape".into(),
        json!([model.output_dim(), model.featurizer().len()]),
    );
    s.insert("scaling".into(), json!(out.scaling.as_slice()));
    s.insert(
        "metrics".into(),
        json!({
            "segments": config.segments,
            "test_steps": config.test_steps(),
            "valid_threshold": config.valid_threshold,
            "valid_time_lyapunov": vt,
            "test_nrmse": test,
            "training_nrmse": train,
            "per_segment": out.metrics,
        }),
    );
    s.insert("steady_states".into(), json!(out.uss));
    s.insert("odd_symmetry".into(), json!(out.odd_symmetry));
    s.insert("return_map".into(), json!(out.return_map));
    s.insert("weights".into(), json!(weights));

    let mut head = vec![
        (
            "readout".into(),
            format!("{}x{}", model.output_dim(), model.featurizer().len()),
        ),
        ("median valid time".into(), format!("{:.3} Lyapunov times", vt.median)),
        ("mean test NRMSE".into(), format!("{:.4e}", test.mean)),
        ("mean training NRMSE".into(), format!("{:.4e}", train.mean)),
    ];
    for e in &out.uss.entries {
        head.push((
            "steady state distance".into(),
            format!("{:.3e} (missing {})", e.distance, e.missing),
        ));
    }
    if let Some(rm) = &out.return_map {
        head.push((
            "return map deviation".into(),
            match rm.relative_deviation {
                Some(r) => format!("{:.3}% of extent", 100.0 * r),
                None => "forecast diverged".into(),
            },
        ));
    }
    Ok((Value::Object(s), head))
}

fn inference(config: &ExperimentConfig, w: &mut Writer) -> Result<Produced, RunError> {
    let out = tasks::run_inference(config)?;
    let system = config.system();
    let labels = system.label_refs();
    let observed: Vec<&str> = config.observed.iter().map(|&i| labels[i]).collect();
    let target = [labels[config.target]];
    let t = &out.trial;

    w.series("train.csv", &out.training_inputs, &observed)?;
    w.series("training_truth.csv", &t.training_truth, &target)?;
    w.series("training_fit.csv", &t.training_inferred, &target)?;
    w.series("truth.csv", &t.test_truth, &target)?;
    w.series("inferred.csv", &t.test_inferred, &target)?;
    let weights = ranked_weights(&t.model, &observed, &target);
    w.rows("weights.csv", &weights)?;
    w.model("model.toml", &t.model)?;

    let mut s = header(config);
    s.insert("feature_dim".into(), json!(t.model.featurizer().len()));
    s.insert(
        "readout_shape".into(),
        json!([t.model.output_dim(), t.model.featurizer().len()]),
    );
    s.insert(
        "metrics".into(),
        json!({
            "training_nrmse": t.training_nrmse,
            "test_nrmse": t.test_nrmse,
            "test_to_training_ratio": t.test_nrmse / t.training_nrmse,
            "test_points": config.test_steps(),
        }),
    );
    s.insert("weights".into(), json!(weights));
    let head = vec![
        (
            "readout".into(),
            format!("{}x{}", t.model.output_dim(), t.model.featurizer().len()),
        ),
        ("training NRMSE".into(), format!("{:.4e}", t.training_nrmse)),
        ("testing NRMSE".into(), format!("{:.4e}", t.test_nrmse)),
    ];
    Ok((Value::Object(s), head))
}

#[derive(Serialize)]
struct SegmentValue {
    train_points: usize,
    segment: usize,
    nrmse: f64,
}

fn sweep(config: &ExperimentConfig, w: &mut Writer) -> Result<Produced, RunError> {
    let out = tasks::run_sweep(config)?;
    w.rows("sweep.csv", &out.rows)?;
    let mut cells = Vec::new();
    for (row, values) in out.rows.iter().zip(&out.nrmse) {
        for (segment, &nrmse) in values.iter().enumerate() {
            cells.push(SegmentValue {
                train_points: row.train_points,
                segment,
                nrmse,
            });
        }
    }
    w.rows("sweep_segments.csv", &cells)?;
    let mut s = header(config);
    s.insert(
        "metrics".into(),
        json!({ "rows": out.rows, "test_steps": config.test_steps() }),
    );
    let head = out
        .rows
        .iter()
        .map(|r| {
            (
                format!("{} points", r.train_points),
                format!(
                    "mean {:.4e}  median {:.4e}  finite {}/{}",
                    r.mean_nrmse, r.median_nrmse, r.finite_segments, r.segments
                ),
            )
        })
        .collect();
    Ok((Value::Object(s), head))
}

fn noise(config: &ExperimentConfig, w: &mut Writer) -> Result<Produced, RunError> {
    let out = tasks::run_noise(config)?;
    let system = config.system();
    let labels = system.label_refs();
    w.rows("noise_seeds.csv", &out.per_seed)?;
    if let (Some(a), Some(b), Some(c)) = (&out.example_training, &out.example_forecast, &out.example_truth) {
        w.series("train.csv", a, &labels)?;
        w.series("forecast.csv", b, &labels)?;
        w.series("truth.csv", c, &labels)?;
    }
    let mut s = header(config);
    s.insert("metrics".into(), json!(out));
    let head = vec![
        ("median NRMSE vs noise-free".into(), format!("{:.4e}", out.median_nrmse)),
        ("median RMSE vs noise-free".into(), format!("{:.4e}", out.median_rmse)),
        ("driven component stds".into(), format!("{:.2?}", out.driven_stds)),
    ];
    Ok((Value::Object(s), head))
}

fn complexity(w: &mut Writer) -> Result<Produced, RunError> {
    let rows = tasks::run_complexity()?;
    #[derive(Serialize)]
    struct Flat<'a> {
        task: &'a str,
        comparison: &'a str,
        reservoir_warmup: f64,
        reservoir_train: f64,
        reservoir_nodes: f64,
        reservoir_total: f64,
        reservoir_sigma_r: f64,
        ngrc_train: f64,
        ngrc_total: f64,
        ngrc_nonlinear: f64,
        speedup: f64,
        quoted_speedup: &'a str,
    }
    let flat: Vec<Flat> = rows
        .iter()
        .map(|r| Flat {
            task: r.task,
            comparison: r.label,
            reservoir_warmup: r.reservoir.m_warmup,
            reservoir_train: r.reservoir.m_train,
            reservoir_nodes: r.reservoir.n,
            reservoir_total: r.reservoir.n_total,
            reservoir_sigma_r: r.reservoir.sigma_r,
            ngrc_train: r.ngrc.m_train,
            ngrc_total: r.ngrc.n_total,
            ngrc_nonlinear: r.ngrc.n_nonlinear,
            speedup: r.speedup,
            quoted_speedup: r.quoted_speedup,
        })
        .collect();
    w.rows("complexity.csv", &flat)?;
    let s = json!({ "task": "complexity", "rows": rows });
    let head = rows
        .iter()
        .map(|r| {
            (
                format!("{}: {}", r.task, r.label),
                format!("{:.4e} (quoted {})", r.speedup, r.quoted_speedup),
            )
        })
        .collect();
    Ok((s, head))
}

fn baseline(config: &ExperimentConfig, w: &mut Writer) -> Result<Produced, RunError> {
    let out = tasks::run_baseline(config)?;
    let system = config.system();
    let labels = system.label_refs();
    w.series("truth.csv", &out.truth, &labels)?;
    w.series("forecast.csv", &out.forecast, &labels)?;
    let mut s = header(config);
    s.insert(
        "metrics".into(),
        json!({
            "nodes": config.rc_n,
            "nonzeros": out.nonzeros,
            "spectral_radius": out.spectral_radius,
            "training_nrmse": out.training_nrmse,
            "test_nrmse": out.test_nrmse,
            "valid_time_lyapunov": out.valid_time,
        }),
    );
    let head = vec![
        (
            "reservoir".into(),
            format!("{} nodes, {} links", config.rc_n, out.nonzeros),
        ),
        ("training NRMSE".into(), format!("{:.4e}", out.training_nrmse)),
        ("valid time".into(), format!("{:.3} Lyapunov times", out.valid_time)),
    ];
    Ok((Value::Object(s), head))
}
