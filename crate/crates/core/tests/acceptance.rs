//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Lines starting with `info` are
//! diagnostics and do not count.

use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use ngrc::experiment::config::{ExperimentConfig, Task};
use ngrc::experiment::tasks::{run_complexity, run_forecast, run_inference, run_noise, run_sweep};
use ngrc::experiment::{parse_config, run_experiment};
use ngrc::features::monomial_exponent_table;
use ngrc::{feature_length, forecast, ridge_fit, train_forecaster, Featurizer, SystemDef, TrainingBlock};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
    info: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self {
            pass,
            detail,
            info: Vec::new(),
        }
    }
}

fn criterion(number: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let secs = start.elapsed().as_secs_f64();
    let verdict = if out.pass { "PASS" } else { "FAIL" };
    println!("{verdict} {number:>2} {name}: {} [{secs:.2}s]", out.detail);
    for line in out.info {
        println!("     info: {line}");
    }
    out.pass
}

fn feature_counts() -> Outcome {
    let got: Vec<usize> = [Task::ForecastLorenz, Task::ForecastDoublescroll, Task::InferLorenz]
        .into_iter()
        .map(|t| feature_length(&ExperimentConfig::defaults(t).feature_spec()))
        .collect();
    Outcome::new(got == [28, 62, 45], format!("{got:?}, expected [28, 62, 45]"))
}

/// Gauss-Jordan inverse with partial pivoting.
fn gauss_jordan_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut inv = DMatrix::<f64>::identity(n, n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
            .unwrap();
        a.swap_rows(col, piv);
        inv.swap_rows(col, piv);
        let p = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = a[(i, col)];
                if f != 0.0 {
                    for j in 0..n {
                        a[(i, j)] -= f * a[(col, j)];
                        inv[(i, j)] -= f * inv[(col, j)];
                    }
                }
            }
        }
    }
    inv
}

fn ridge_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let p = rng.random_range(1..=60);
        let n = rng.random_range(p + 1..=p + 200);
        let d = rng.random_range(1..=4);
        let alpha = 10f64.powf(rng.random_range(-6.0..0.0));
        let o = DMatrix::from_fn(p, n, |_, _| rng.random_range(-1.0..1.0));
        let y = DMatrix::from_fn(d, n, |_, _| rng.random_range(-1.0..1.0));
        let gram = &o * o.transpose() + DMatrix::identity(p, p) * alpha;
        let oracle = &y * o.transpose() * gauss_jordan_inverse(&gram);
        let w = ridge_fit(&TrainingBlock::new(o, y).unwrap(), alpha).unwrap();
        worst = worst.max((&w.weights - oracle).amax());
    }
    Outcome::new(
        worst < 1e-10,
        format!("max |dW| over 50 instances = {worst:.2e} (limit 1e-10)"),
    )
}

fn monomial_tables() -> Outcome {
    let mut mismatches = 0;
    for n in 1..=12 {
        let mut two = Vec::new();
        for i in 0..n {
            for j in i..n {
                two.push(vec![i, j]);
            }
        }
        let mut three = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    three.push(vec![i, j, k]);
                }
            }
        }
        mismatches += usize::from(monomial_exponent_table(n, 2) != two);
        mismatches += usize::from(monomial_exponent_table(n, 3) != three);
    }
    Outcome::new(
        mismatches == 0,
        format!("{mismatches} mismatching tables for n_vars 1..=12, degrees 2 and 3"),
    )
}

fn lorenz_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(Task::ForecastLorenz);
    c.segments = 10;
    c.return_map_time = 0.0;
    c
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ")
}

fn lorenz_skill_and_uss() -> (Outcome, Outcome) {
    let config = lorenz_config();
    let out = match run_forecast(&config) {
        Ok(o) => o,
        Err(e) => {
            let msg = format!("run failed: {e}");
            return (Outcome::new(false, msg.clone()), Outcome::new(false, msg));
        }
    };
    let vt = out.valid_times();
    let med = ngrc::experiment::pipeline::median(&vt);
    let mut skill = Outcome::new(
        med >= 3.0,
        format!("median valid time {med:.3} Lyapunov times over 10 segments (need >= 3)"),
    );
    skill.info.push(format!("per segment: {}", fmt_list(&vt)));

    let mut alt = config.clone();
    alt.alpha = 1e-3;
    if let Ok(o) = run_forecast(&alt) {
        skill.info.push(format!(
            "same data with alpha 1e-3: median valid time {:.3}",
            ngrc::experiment::pipeline::median(&o.valid_times())
        ));
    }
    let mut coarse = config.clone();
    coarse.rtol = 1e-3;
    coarse.atol = 1e-6;
    if let Ok(o) = run_forecast(&coarse) {
        skill.info.push(format!(
            "data integrated at rtol 1e-3, alpha 2.5e-6: median valid time {:.3}",
            ngrc::experiment::pipeline::median(&o.valid_times())
        ));
    }

    let entries = &out.uss.entries;
    let worst = entries.iter().map(|e| e.distance).fold(0.0_f64, f64::max);
    let missing: usize = entries.iter().map(|e| e.missing).sum();
    let pass = missing == 0 && worst < 2e-2;
    let mut uss = Outcome::new(
        pass,
        format!("largest scaled distance of the segment-averaged USS {worst:.3e} (limit 2e-2), {missing} missing"),
    );
    for e in entries {
        uss.info.push(format!(
            "truth {:?}: distance {:.3e}, dispersion {:.3e}, worst single segment {:.3e}",
            e.truth, e.distance, e.dispersion, e.max_distance
        ));
    }
    (skill, uss)
}

fn double_scroll() -> Outcome {
    let mut config = ExperimentConfig::defaults(Task::ForecastDoublescroll);
    config.segments = 10;
    let out = match run_forecast(&config) {
        Ok(o) => o,
        Err(e) => return Outcome::new(false, format!("run failed: {e}")),
    };
    let origin = out.odd_symmetry.map_or(f64::INFINITY, |o| o.origin_increment);
    let nonzero: Vec<f64> = out
        .uss
        .entries
        .iter()
        .filter(|e| e.truth.iter().any(|v| *v != 0.0))
        .map(|e| if e.missing == 0 { e.distance } else { f64::INFINITY })
        .collect();
    let worst = nonzero.iter().copied().fold(0.0_f64, f64::max);
    let mut o = Outcome::new(
        origin < 1e-12 && worst < 2e-2 && !nonzero.is_empty(),
        format!("origin increment {origin:.1e} (limit 1e-12), nonzero USS distance {worst:.3e} (limit 2e-2)"),
    );
    o.info.push(format!(
        "median valid time {:.3} Lyapunov times",
        ngrc::experiment::pipeline::median(&out.valid_times())
    ));
    o
}

fn return_map() -> Outcome {
    let mut config = ExperimentConfig::defaults(Task::ForecastLorenz);
    config.segments = 1;
    let run = |c: &ExperimentConfig| run_forecast(c).ok().and_then(|o| o.return_map);
    let Some(rm) = run(&config) else {
        return Outcome::new(false, "run failed".into());
    };
    let detail = match rm.relative_deviation {
        Some(r) => format!(
            "deviation {:.3}% of the map range over {} time units (limit 2%)",
            100.0 * r,
            rm.time_units
        ),
        None => format!("free-running forecast diverged within {} time units", rm.time_units),
    };
    let mut o = Outcome::new(rm.relative_deviation.is_some_and(|r| r < 0.02), detail);
    let mut alt = config.clone();
    alt.alpha = 1e-3;
    if let Some(r) = run(&alt).and_then(|r| r.relative_deviation) {
        o.info
            .push(format!("alpha 1e-3: deviation {:.3}% of the map range", 100.0 * r));
    }
    o
}

fn sweep() -> Outcome {
    let config = ExperimentConfig::defaults(Task::SweepTrainsize);
    let out = match run_sweep(&config) {
        Ok(o) => o,
        Err(e) => return Outcome::new(false, format!("run failed: {e}")),
    };
    let mean = |tp| out.row(tp).map_or(f64::NAN, |r| r.mean_nrmse);
    let (m250, m400, m1000) = (mean(250), mean(400), mean(1000));
    let pass = m400 <= 1.5 * m1000 && m250 <= 2.0 * m1000;
    let mut o = Outcome::new(
        pass,
        format!(
            "mean NRMSE 250: {m250:.3e}, 400: {m400:.3e}, 1000: {m1000:.3e} (need 400 <= 1.5x and 250 <= 2x of 1000)"
        ),
    );
    for r in &out.rows {
        o.info.push(format!(
            "{:>5} points: mean {:.3e} median {:.3e} finite {}/{}",
            r.train_points, r.mean_nrmse, r.median_nrmse, r.finite_segments, r.segments
        ));
    }
    o
}

fn noise() -> Outcome {
    let config = ExperimentConfig::defaults(Task::NoiseLorenz);
    let out = match run_noise(&config) {
        Ok(o) => o,
        Err(e) => return Outcome::new(false, format!("run failed: {e}")),
    };
    let limit = 5.0 * 1.34e-2;
    let mut o = Outcome::new(
        out.median_nrmse <= limit,
        format!(
            "10-seed median scaled error {:.4e} over 1 Lyapunov time (limit {limit:.3e})",
            out.median_nrmse
        ),
    );
    o.info.push(format!("unscaled median RMSE {:.4e}", out.median_rmse));
    o.info.push(format!(
        "per seed: {}",
        fmt_list(&out.per_seed.iter().map(|r| r.nrmse).collect::<Vec<_>>())
    ));
    o
}

fn inference() -> Outcome {
    let config = ExperimentConfig::defaults(Task::InferLorenz);
    let out = match run_inference(&config) {
        Ok(o) => o,
        Err(e) => return Outcome::new(false, format!("run failed: {e}")),
    };
    let t = &out.trial;
    let shape = (t.model.output_dim(), t.model.featurizer().len());
    let ratio = t.test_nrmse / t.training_nrmse;
    Outcome::new(
        shape == (1, 45) && ratio <= 2.0,
        format!(
            "readout {}x{}, training {:.3e}, testing {:.3e}, ratio {ratio:.3} (limit 2)",
            shape.0, shape.1, t.training_nrmse, t.test_nrmse
        ),
    )
}

fn complexity() -> Outcome {
    let rows = match run_complexity() {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, format!("run failed: {e}")),
    };
    let lower = rows[0].speedup;
    let mut o = Outcome::new(
        (lower - 33.0).abs() <= 3.3,
        format!("Lorenz63 lower-bound speedup {lower:.2} (target 33 +/- 10%)"),
    );
    for r in &rows {
        o.info.push(format!(
            "{}: {}: computed {:.3e}, quoted {}",
            r.task, r.label, r.speedup, r.quoted_speedup
        ));
    }
    o
}

fn same_files(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> = std::fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name())
        .collect();
    names.sort();
    for name in &names {
        let x = std::fs::read(a.join(name)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(name)).map_err(|e| e.to_string())?;
        if x != y {
            return Err(format!("{} differs", name.to_string_lossy()));
        }
    }
    Ok(names.len())
}

fn properties() -> Outcome {
    let mut failures = Vec::new();
    let mut info = Vec::new();

    // odd features and forecasts
    let scroll = ExperimentConfig::defaults(Task::ForecastDoublescroll);
    let feat = Featurizer::new(scroll.feature_spec());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut feature_err = 0.0_f64;
    for _ in 0..100 {
        let lin: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        let neg: Vec<f64> = lin.iter().map(|v| -v).collect();
        let (a, b) = (feat.features_from_linear(&lin), feat.features_from_linear(&neg));
        feature_err = a.iter().zip(&b).fold(feature_err, |m, (x, y)| m.max((x + y).abs()));
    }
    if feature_err != 0.0 {
        failures.push(format!("odd features break symmetry by {feature_err:.1e}"));
    }
    let mut one = scroll.clone();
    one.segments = 1;
    match run_forecast(&one) {
        Ok(o) => {
            let anti = o.odd_symmetry.map_or(f64::INFINITY, |s| s.forecast_antisymmetry);
            info.push(format!("odd features exact, forecast antisymmetry {anti:.1e}"));
            if anti > 1e-12 {
                failures.push(format!("forecast antisymmetry {anti:.1e}"));
            }
        }
        Err(e) => failures.push(format!("double-scroll run failed: {e}")),
    }

    // readout norm shrinks as alpha grows
    let lorenz = SystemDef::lorenz63();
    let cfg = ExperimentConfig::defaults(Task::ForecastLorenz);
    let spec = cfg.feature_spec();
    let settings = ngrc::experiment::tasks::trajectory_settings(&cfg);
    let data = ngrc::experiment::pipeline::generate(&lorenz, &settings, 402).expect("data");
    let norms: Vec<f64> = [1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0, 100.0]
        .iter()
        .map(|&a| train_forecaster(&data, &spec, a).map_or(f64::NAN, |m| m.readout().weights.norm()))
        .collect();
    if !norms.windows(2).all(|w| w[1] <= w[0]) {
        failures.push(format!("readout norms not monotone: {norms:?}"));
    }

    // rerun from the emitted resolved config is bit-identical
    let tmp = tempfile::tempdir().expect("tempdir");
    let (d1, d2) = (tmp.path().join("a"), tmp.path().join("b"));
    let text = format!(
        "task = \"forecast-doublescroll\"\nsegments = 2\nout_dir = {:?}\n",
        d1.display().to_string()
    );
    let provenance = (|| -> Result<usize, String> {
        let c1 = parse_config(&text).map_err(|e| e.to_string())?;
        run_experiment(&c1).map_err(|e| e.to_string())?;
        std::fs::rename(&d1, &d2).map_err(|e| e.to_string())?;
        let resolved = std::fs::read_to_string(d2.join("resolved-config.toml")).map_err(|e| e.to_string())?;
        let c2 = parse_config(&resolved).map_err(|e| e.to_string())?;
        run_experiment(&c2).map_err(|e| e.to_string())?;
        let fc = forecast(
            &train_forecaster(&data, &spec, 1e-3).map_err(|e| e.to_string())?,
            &data.slice(400, 402),
            50,
        )
        .map_err(|e| e.to_string())?;
        let fc2 = forecast(
            &train_forecaster(&data, &spec, 1e-3).map_err(|e| e.to_string())?,
            &data.slice(400, 402),
            50,
        )
        .map_err(|e| e.to_string())?;
        if fc
            .as_flat()
            .iter()
            .zip(fc2.as_flat())
            .any(|(a, b)| a.to_bits() != b.to_bits())
        {
            return Err("repeated training differs".into());
        }
        same_files(&d1, &d2)
    })();
    match provenance {
        Ok(n) => info.push(format!("rerun from resolved config: {n} files bit-identical")),
        Err(e) => failures.push(format!("provenance: {e}")),
    }

    // steady states are zeros of the vector field
    let mut residual = 0.0_f64;
    for sys in [SystemDef::lorenz63(), SystemDef::double_scroll()] {
        for s in &sys.steady_states {
            residual = sys.eval(s).iter().fold(residual, |m, v| m.max(v.abs()));
        }
    }
    info.push(format!("max steady-state residual {residual:.1e}"));
    if residual >= 1e-8 {
        failures.push(format!("steady-state residual {residual:.1e}"));
    }

    let mut o = Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            "odd symmetry, regularization monotonicity, bit-identical reruns, steady-state residuals".into()
        } else {
            failures.join("; ")
        },
    );
    o.info = info;
    o
}

fn main() {
    println!("acceptance criteria");
    let mut passed = Vec::new();
    passed.push(criterion(1, "feature counts", feature_counts));
    passed.push(criterion(2, "ridge oracle equivalence", ridge_oracle));
    passed.push(criterion(3, "monomial enumeration", monomial_tables));
    let start = Instant::now();
    let (skill, uss) = lorenz_skill_and_uss();
    let shared = start.elapsed().as_secs_f64();
    passed.push(criterion(4, "Lorenz63 forecast skill", || skill));
    passed.push(criterion(5, "Lorenz63 USS accuracy", || uss));
    println!("     info: criteria 4 and 5 share one run, {shared:.2}s including diagnostics");
    passed.push(criterion(6, "double-scroll zero USS", double_scroll));
    passed.push(criterion(7, "Lorenz63 return map", return_map));
    passed.push(criterion(8, "training-size sweep", sweep));
    passed.push(criterion(9, "noise experiment", noise));
    passed.push(criterion(10, "inference task", inference));
    passed.push(criterion(11, "complexity report", complexity));
    passed.push(criterion(12, "property suites", properties));
    let n_pass = passed.iter().filter(|p| **p).count();
    println!("{n_pass}/{} criteria passed", passed.len());
    if n_pass != passed.len() {
        std::process::exit(1);
    }
}
