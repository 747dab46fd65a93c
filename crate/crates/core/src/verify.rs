//! Error metrics, steady states and return maps for checking that a trained
//! model reproduces both short-term trajectories and long-term climate.
//!
//! Distances and errors are measured in a scaled space where each component
//! is divided by the standard deviation of a reference trajectory.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{NgrcError, Result};
use crate::model::{Mode, NgrcModel};
use crate::series::TimeSeries;
use crate::systems::{DoubleScrollParams, Lorenz63Params};

/// Default valid-time threshold in scaled units.
pub const DEFAULT_VALID_THRESHOLD: f64 = 0.5;

/// Per-component standard deviations used to normalize errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingVector(Vec<f64>);

impl ScalingVector {
    pub fn new(stds: Vec<f64>) -> Result<Self> {
        if stds.is_empty() || stds.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(NgrcError::InvalidArgument(format!(
                "scaling entries must be positive and finite, got {stds:?}"
            )));
        }
        Ok(Self(stds))
    }

    pub fn from_series(reference: &TimeSeries) -> Result<Self> {
        Self::new(reference.component_stds())
    }

    pub fn ones(dim: usize) -> Self {
        Self(vec![1.0; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Keeps only the listed components.
    pub fn select(&self, components: &[usize]) -> Result<Self> {
        Self::new(components.iter().map(|&c| self.0[c]).collect())
    }
}

fn check_shapes(a: &TimeSeries, b: &TimeSeries, scaling: &ScalingVector) -> Result<()> {
    if a.len() != b.len() || a.dim() != b.dim() || a.dim() != scaling.len() {
        return Err(NgrcError::DimensionMismatch(format!(
            "predicted {}×{}, truth {}×{}, scaling {}",
            a.len(),
            a.dim(),
            b.len(),
            b.dim(),
            scaling.len()
        )));
    }
    Ok(())
}

/// Root of the mean (over samples and components) squared scaled error.
pub fn nrmse(predicted: &TimeSeries, truth: &TimeSeries, scaling: &ScalingVector) -> Result<f64> {
    check_shapes(predicted, truth, scaling)?;
    if predicted.is_empty() {
        return Err(NgrcError::InsufficientData { needed: 1, got: 0 });
    }
    let sc = scaling.as_slice();
    let ss: f64 = predicted
        .as_flat()
        .iter()
        .zip(truth.as_flat())
        .enumerate()
        .map(|(j, (p, t))| ((p - t) / sc[j % sc.len()]).powi(2))
        .sum();
    Ok((ss / predicted.as_flat().len() as f64).sqrt())
}

/// Scaled RMS error of each sample.
pub fn per_sample_error(predicted: &TimeSeries, truth: &TimeSeries, scaling: &ScalingVector) -> Result<Vec<f64>> {
    check_shapes(predicted, truth, scaling)?;
    let sc = scaling.as_slice();
    Ok(predicted
        .samples()
        .zip(truth.samples())
        .map(|(p, t)| {
            let ss: f64 = p.iter().zip(t).zip(sc).map(|((a, b), s)| ((a - b) / s).powi(2)).sum();
            (ss / sc.len() as f64).sqrt()
        })
        .collect())
}

/// Time, in Lyapunov units, until the per-sample scaled error first exceeds
/// `threshold` or stops being finite. Sample `m` sits at elapsed time
/// `m * dt`; if the threshold is never crossed the whole window `len * dt` is
/// returned.
pub fn valid_time(
    predicted: &TimeSeries,
    truth: &TimeSeries,
    scaling: &ScalingVector,
    threshold: f64,
    lyapunov_time: f64,
) -> Result<f64> {
    let errs = per_sample_error(predicted, truth, scaling)?;
    let dt = predicted.dt();
    // a non-finite error counts as a crossing
    let elapsed = match errs.iter().position(|&e| !(e <= threshold)) {
        Some(m) => m as f64 * dt,
        None => errs.len() as f64 * dt,
    };
    Ok(elapsed / lyapunov_time)
}

/// Euclidean distance between two states after scaling.
pub fn scaled_distance(a: &[f64], b: &[f64], scaling: &ScalingVector) -> f64 {
    a.iter()
        .zip(b)
        .zip(scaling.as_slice())
        .map(|((x, y), s)| ((x - y) / s).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn lorenz_uss_with(p: &Lorenz63Params) -> [[f64; 3]; 3] {
    let q = (p.beta * (p.rho - 1.0)).sqrt();
    [[0.0, 0.0, 0.0], [q, q, p.rho - 1.0], [-q, -q, p.rho - 1.0]]
}

/// Origin and the symmetric pair `(±√(β(ρ−1)), ±√(β(ρ−1)), ρ−1)`.
pub fn lorenz_uss() -> [[f64; 3]; 3] {
    lorenz_uss_with(&Lorenz63Params::default())
}

/// Residual of the reduced steady-state condition for the double scroll,
/// as a function of `V1`.
pub fn double_scroll_uss_residual(p: &DoubleScrollParams, v1: f64) -> f64 {
    v1 / p.r2 * (p.r1 - p.r4 - p.r2) + 2.0 * p.r1 * p.ir * (p.alpha * (1.0 - p.r4 / p.r1) * v1).sinh()
}

pub fn solve_double_scroll_uss_with(p: &DoubleScrollParams) -> Result<[[f64; 3]; 3]> {
    let g = |v: f64| double_scroll_uss_residual(p, v);
    // g is odd with g'(0) < 0 for the circuit parameters; walk out until it turns positive
    let mut lo = 1e-9;
    if g(lo) >= 0.0 {
        return Err(NgrcError::Bracketing { lo, hi: lo });
    }
    let mut hi = 0.5;
    let mut tries = 0;
    while g(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 60 || !g(hi).is_finite() {
            return Err(NgrcError::Bracketing { lo: 1e-9, hi });
        }
    }
    let mut v1 = 0.5 * (lo + hi);
    for _ in 0..400 {
        v1 = 0.5 * (lo + hi);
        let r = g(v1);
        if r.abs() < 1e-13 || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        if r < 0.0 {
            lo = v1;
        } else {
            hi = v1;
        }
    }
    // polish with secant steps that stay inside the bracket
    for _ in 0..4 {
        let (glo, ghi) = (g(lo), g(hi));
        if ghi == glo {
            break;
        }
        let cand = hi - ghi * (hi - lo) / (ghi - glo);
        if cand > lo && cand < hi && g(cand).abs() < g(v1).abs() {
            v1 = cand;
        }
    }
    let plus = [v1, v1 * p.r4 / p.r1, v1 / p.r1];
    Ok([[0.0; 3], plus, [-plus[0], -plus[1], -plus[2]]])
}

/// Origin and the symmetric pair built from the positive root `V1`:
/// `±(V1, V1·R4/R1, V1/R1)`.
pub fn solve_double_scroll_uss() -> Result<[[f64; 3]; 3]> {
    solve_double_scroll_uss_with(&DoubleScrollParams::default())
}

/// The learned increment at a state repeated across every delay tap, and its
/// Jacobian with respect to that state.
fn learned_map_and_jacobian(model: &NgrcModel, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let spec = model.spec();
    let d = spec.d;
    let lin: Vec<f64> = (0..spec.k).flat_map(|_| x.iter().copied()).collect();
    let feats = model.featurizer();
    let f = feats.features_from_linear(&lin);
    let jf = feats.jacobian_wrt_linear(&lin);
    let n = lin.len();
    let w = &model.readout().weights;
    let mut val = DVector::zeros(d);
    model.readout().apply_into(&f, val.as_mut_slice());
    // collapse the tap dimension: column m of the linear block is state component m % d
    let mut jf_state = DMatrix::zeros(feats.len(), d);
    for r in 0..feats.len() {
        for m in 0..n {
            jf_state[(r, m % d)] += jf[r * n + m];
        }
    }
    (val, w * jf_state)
}

/// Fixed points of a forecaster's learned map, one per guess, found by damped
/// Newton iteration on the state repeated over every tap. `None` marks a guess
/// that did not converge within 200 iterations.
pub fn estimate_model_uss(model: &NgrcModel, guesses: &[Vec<f64>]) -> Result<Vec<Option<Vec<f64>>>> {
    if model.mode() != Mode::ForecastDelta {
        return Err(NgrcError::ModeMismatch {
            expected: Mode::ForecastDelta.as_str(),
            actual: model.mode().as_str(),
        });
    }
    let d = model.spec().d;
    guesses
        .iter()
        .map(|g| {
            if g.len() != d {
                return Err(NgrcError::DimensionMismatch(format!(
                    "guess has {} components, model has {d}",
                    g.len()
                )));
            }
            Ok(newton_fixed_point(model, g))
        })
        .collect()
}

fn newton_fixed_point(model: &NgrcModel, guess: &[f64]) -> Option<Vec<f64>> {
    let mut x = DVector::from_column_slice(guess);
    for _ in 0..200 {
        let (f, jac) = learned_map_and_jacobian(model, x.as_slice());
        let fnorm = f.norm();
        if fnorm == 0.0 {
            return Some(x.as_slice().to_vec());
        }
        let step = jac.lu().solve(&(-&f))?;
        let mut lambda = 1.0;
        let mut trial = &x + &step;
        while lambda > 1e-4 {
            let (ft, _) = learned_map_and_jacobian(model, trial.as_slice());
            if ft.norm() < fnorm {
                break;
            }
            lambda *= 0.5;
            trial = &x + &step * lambda;
        }
        let update = (&step * lambda).norm();
        x = trial;
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
        if update < 1e-10 {
            return Some(x.as_slice().to_vec());
        }
    }
    None
}

/// One steady state compared over repeated trainings.
#[derive(Debug, Clone, Serialize)]
pub struct UssEntry {
    pub truth: Vec<f64>,
    /// Mean estimated location over the repeats that converged.
    pub estimate: Option<Vec<f64>>,
    /// Mean scaled L2 distance from the truth.
    pub distance: f64,
    /// Standard deviation of the scaled distance across repeats.
    pub dispersion: f64,
    pub max_distance: f64,
    pub repeats: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct UssReport {
    pub entries: Vec<UssEntry>,
}

impl UssReport {
    /// `estimates[r][j]` is repeat `r`'s estimate of steady state `j`.
    pub fn new(truths: &[Vec<f64>], estimates: &[Vec<Option<Vec<f64>>>], scaling: &ScalingVector) -> Self {
        let entries = truths
            .iter()
            .enumerate()
            .map(|(j, truth)| {
                let found: Vec<&Vec<f64>> = estimates.iter().filter_map(|rep| rep.get(j)?.as_ref()).collect();
                let dists: Vec<f64> = found.iter().map(|e| scaled_distance(e, truth, scaling)).collect();
                let n = dists.len() as f64;
                let (distance, dispersion, max_distance, estimate) = if found.is_empty() {
                    (f64::NAN, f64::NAN, f64::NAN, None)
                } else {
                    let mean = dists.iter().sum::<f64>() / n;
                    let var = dists.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
                    let mut loc = vec![0.0; truth.len()];
                    for e in &found {
                        for (l, v) in loc.iter_mut().zip(e.iter()) {
                            *l += v / n;
                        }
                    }
                    (mean, var.sqrt(), dists.iter().cloned().fold(0.0, f64::max), Some(loc))
                };
                UssEntry {
                    truth: truth.clone(),
                    estimate,
                    distance,
                    dispersion,
                    max_distance,
                    repeats: estimates.len(),
                    missing: estimates.len() - found.len(),
                }
            })
            .collect();
        Self { entries }
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "index",
            "truth",
            "estimate",
            "distance",
            "dispersion",
            "max_distance",
            "missing",
        ])?;
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        for (j, e) in self.entries.iter().enumerate() {
            w.write_record([
                j.to_string(),
                join(&e.truth),
                e.estimate.as_deref().map(join).unwrap_or_default(),
                e.distance.to_string(),
                e.dispersion.to_string(),
                e.max_distance.to_string(),
                e.missing.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Successive local maxima `(M_i, M_{i+1})` of one component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnMap {
    maxima: Vec<f64>,
}

impl ReturnMap {
    pub fn from_maxima(maxima: Vec<f64>) -> Result<Self> {
        if maxima.len() < 2 {
            return Err(NgrcError::EmptyReturnMap(maxima.len()));
        }
        Ok(Self { maxima })
    }

    pub fn maxima(&self) -> &[f64] {
        &self.maxima
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.maxima.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn len(&self) -> usize {
        self.maxima.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `max(M) - min(M)`.
    pub fn extent(&self) -> f64 {
        let lo = self.maxima.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.maxima.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            maxima: self.maxima.iter().map(|m| m + delta).collect(),
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["m_i", "m_next"])?;
        for (a, b) in self.points() {
            w.write_record([a.to_string(), b.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Coefficients `a0..a4` of the quartic through `f(-2), …, f(2)` at unit spacing.
pub fn quartic_through_five(f: [f64; 5]) -> [f64; 5] {
    let [fm2, fm1, f0, f1, f2] = f;
    [
        f0,
        (fm2 - 8.0 * fm1 + 8.0 * f1 - f2) / 12.0,
        (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * f1 - f2) / 24.0,
        (-fm2 + 2.0 * fm1 - 2.0 * f1 + f2) / 12.0,
        (fm2 - 4.0 * fm1 + 6.0 * f0 - 4.0 * f1 + f2) / 24.0,
    ]
}

fn eval_poly(a: &[f64], u: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

/// Maximum of the quartic on `[-1, 1]`, returned as `(u, value)`.
fn maximize_quartic(a: [f64; 5]) -> (f64, f64) {
    let da = [a[1], 2.0 * a[2], 3.0 * a[3], 4.0 * a[4]];
    let mut best = (0.0, a[0]);
    let mut consider = |u: f64| {
        let v = eval_poly(&a, u);
        if v > best.1 {
            best = (u, v);
        }
    };
    consider(-1.0);
    consider(1.0);
    const PIECES: usize = 64;
    for j in 0..PIECES {
        let mut lo = -1.0 + 2.0 * j as f64 / PIECES as f64;
        let mut hi = lo + 2.0 / PIECES as f64;
        let (mut glo, ghi) = (eval_poly(&da, lo), eval_poly(&da, hi));
        if glo == 0.0 {
            consider(lo);
            continue;
        }
        if glo.signum() == ghi.signum() {
            continue;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let gm = eval_poly(&da, mid);
            if gm.signum() == glo.signum() {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        consider(0.5 * (lo + hi));
    }
    best
}

/// Locates local maxima of `component` in the first `window` time units.
///
/// A discrete maximum is a sample strictly above both neighbours. Each is
/// refined by the quartic through the five samples centred on it, maximized
/// over the neighbouring interval. Peaks within two samples of either end are
/// skipped because the stencil does not fit.
pub fn extract_return_map(series: &TimeSeries, component: usize, window: f64) -> Result<ReturnMap> {
    ReturnMap::from_maxima(
        refined_maxima(series, component, window)?
            .into_iter()
            .map(|(_, v)| v)
            .collect(),
    )
}

/// Refined `(time, value)` of every interior local maximum.
pub fn refined_maxima(series: &TimeSeries, component: usize, window: f64) -> Result<Vec<(f64, f64)>> {
    if component >= series.dim() {
        return Err(NgrcError::DimensionMismatch(format!(
            "component {component} out of range for a {}-dimensional series",
            series.dim()
        )));
    }
    let n = series.len().min((window / series.dt()).round() as usize + 1);
    let z: Vec<f64> = series.samples().take(n).map(|r| r[component]).collect();
    let mut out = Vec::new();
    for m in 2..n.saturating_sub(2) {
        if z[m] > z[m - 1] && z[m] > z[m + 1] {
            let a = quartic_through_five([z[m - 2], z[m - 1], z[m], z[m + 1], z[m + 2]]);
            let (u, v) = maximize_quartic(a);
            out.push((series.time(m) + u * series.dt(), v));
        }
    }
    Ok(out)
}

/// Mean distance from each predicted map point to its nearest truth point.
pub fn return_map_deviation(predicted: &ReturnMap, truth: &ReturnMap) -> f64 {
    let tp = truth.points();
    let pp = predicted.points();
    let total: f64 = pp
        .iter()
        .map(|&(a, b)| {
            tp.iter()
                .map(|&(c, d)| (a - c).powi(2) + (b - d).powi(2))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    total / pp.len() as f64
}
