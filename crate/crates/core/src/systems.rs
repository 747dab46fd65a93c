//! Ground-truth dynamical systems and the integrators that sample them.
//!
//! Deterministic trajectories come from an adaptive Bogacki–Shampine 3(2)
//! pair with cubic Hermite dense output evaluated on the uniform `dt` grid.
//! Noise-driven trajectories use fixed Heun substeps with a piecewise-constant
//! Gaussian forcing.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{NgrcError, Result};
use crate::series::TimeSeries;

type Rhs = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorenz63Params {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Default for Lorenz63Params {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
        }
    }
}

/// Dimensionless double-scroll circuit parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleScrollParams {
    pub r1: f64,
    pub r2: f64,
    pub r4: f64,
    pub alpha: f64,
    pub ir: f64,
}

impl Default for DoubleScrollParams {
    fn default() -> Self {
        Self {
            r1: 1.2,
            r2: 3.44,
            r4: 0.193,
            alpha: 11.6,
            ir: 2.25e-5,
        }
    }
}

pub const LORENZ63_LYAPUNOV_TIME: f64 = 1.1;
pub const DOUBLE_SCROLL_LYAPUNOV_TIME: f64 = 7.81;

pub fn lorenz63_rhs_with(p: &Lorenz63Params, s: &[f64], out: &mut [f64]) {
    let (x, y, z) = (s[0], s[1], s[2]);
    out[0] = p.sigma * (y - x);
    out[1] = x * (p.rho - z) - y;
    out[2] = x * y - p.beta * z;
}

pub fn lorenz63_rhs(state: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    lorenz63_rhs_with(&Lorenz63Params::default(), &state, &mut out);
    out
}

pub fn double_scroll_rhs_with(p: &DoubleScrollParams, s: &[f64], out: &mut [f64]) {
    let (v1, v2, i) = (s[0], s[1], s[2]);
    let dv = v1 - v2;
    let g = dv / p.r2 + 2.0 * p.ir * (p.alpha * dv).sinh();
    out[0] = v1 / p.r1 - g;
    out[1] = g - i;
    out[2] = v2 - p.r4 * i;
}

pub fn double_scroll_rhs(state: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    double_scroll_rhs_with(&DoubleScrollParams::default(), &state, &mut out);
    out
}

/// A named vector field with its parameters and known steady states.
#[derive(Clone)]
pub struct SystemDef {
    pub name: String,
    pub dim: usize,
    pub params: Vec<(String, f64)>,
    pub lyapunov_time: f64,
    pub steady_states: Vec<Vec<f64>>,
    /// Component labels used in CSV headers and reports.
    pub labels: Vec<String>,
    rhs: Rhs,
}

impl fmt::Debug for SystemDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemDef")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("params", &self.params)
            .field("lyapunov_time", &self.lyapunov_time)
            .finish_non_exhaustive()
    }
}

impl SystemDef {
    pub fn custom<F>(name: &str, dim: usize, lyapunov_time: f64, rhs: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            dim,
            params: Vec::new(),
            lyapunov_time,
            steady_states: Vec::new(),
            labels: (0..dim).map(|c| format!("x{c}")).collect(),
            rhs: Arc::new(rhs),
        }
    }

    pub fn lorenz63() -> Self {
        Self::lorenz63_with(Lorenz63Params::default())
    }

    pub fn lorenz63_with(p: Lorenz63Params) -> Self {
        let mut sys = Self::custom("lorenz63", 3, LORENZ63_LYAPUNOV_TIME, move |s, out| {
            lorenz63_rhs_with(&p, s, out)
        });
        sys.params = vec![
            ("sigma".into(), p.sigma),
            ("rho".into(), p.rho),
            ("beta".into(), p.beta),
        ];
        sys.labels = vec!["x".into(), "y".into(), "z".into()];
        sys.steady_states = crate::verify::lorenz_uss_with(&p).iter().map(|s| s.to_vec()).collect();
        sys
    }

    pub fn double_scroll() -> Self {
        Self::double_scroll_with(DoubleScrollParams::default())
    }

    pub fn double_scroll_with(p: DoubleScrollParams) -> Self {
        let mut sys = Self::custom("double-scroll", 3, DOUBLE_SCROLL_LYAPUNOV_TIME, move |s, out| {
            double_scroll_rhs_with(&p, s, out)
        });
        sys.params = vec![
            ("R1".into(), p.r1),
            ("R2".into(), p.r2),
            ("R4".into(), p.r4),
            ("alpha".into(), p.alpha),
            ("Ir".into(), p.ir),
        ];
        sys.labels = vec!["V1".into(), "V2".into(), "I".into()];
        sys.steady_states = crate::verify::solve_double_scroll_uss_with(&p)
            .map(|v| v.iter().map(|s| s.to_vec()).collect())
            .unwrap_or_default();
        sys
    }

    pub fn eval_into(&self, state: &[f64], out: &mut [f64]) {
        (self.rhs)(state, out)
    }

    pub fn eval(&self, state: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(state, &mut out);
        out
    }

    pub fn label_refs(&self) -> Vec<&str> {
        self.labels.iter().map(String::as_str).collect()
    }

    /// Default starting point for transients: (1,1,1) for Lorenz63, 0.1 in
    /// every component otherwise.
    pub fn default_seed_state(&self) -> Vec<f64> {
        if self.name == "lorenz63" {
            vec![1.0; self.dim]
        } else {
            vec![0.1; self.dim]
        }
    }

    /// Integrates `transient` time units from the default seed state and
    /// returns the final state.
    pub fn settled_state(&self, transient: f64, dt: f64) -> Result<Vec<f64>> {
        let cfg = IntegrationConfig::new(self.default_seed_state(), dt, transient);
        let run = integrate(self, &cfg)?;
        Ok(run.last().expect("non-empty trajectory").to_vec())
    }
}

/// Settings for one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationConfig {
    pub t0: f64,
    pub dt: f64,
    /// Duration; the output holds `round(t_span / dt) + 1` samples.
    pub t_span: f64,
    pub initial_state: Vec<f64>,
    pub rtol: f64,
    pub atol: f64,
    pub noise_rms: f64,
    pub seed: Option<u64>,
    /// Fixed substeps per `dt` for noise-driven runs.
    pub noise_substeps: usize,
}

impl IntegrationConfig {
    pub fn new(initial_state: Vec<f64>, dt: f64, t_span: f64) -> Self {
        Self {
            t0: 0.0,
            dt,
            t_span,
            initial_state,
            rtol: 1e-8,
            atol: 1e-10,
            noise_rms: 0.0,
            seed: None,
            noise_substeps: 20,
        }
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_noise(mut self, noise_rms: f64, seed: u64) -> Self {
        self.noise_rms = noise_rms;
        self.seed = Some(seed);
        self
    }

    pub fn n_samples(&self) -> usize {
        (self.t_span / self.dt).round() as usize + 1
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: String| Err(NgrcError::InvalidArgument(m));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_span >= 0.0) || !self.t_span.is_finite() {
            return bad(format!("t_span must be ≥ 0, got {}", self.t_span));
        }
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.initial_state.len() != dim {
            return Err(NgrcError::DimensionMismatch(format!(
                "initial state has {} components, system has {dim}",
                self.initial_state.len()
            )));
        }
        if !(self.noise_rms >= 0.0) {
            return bad(format!("noise_rms must be ≥ 0, got {}", self.noise_rms));
        }
        Ok(())
    }
}

fn error_norm(err: &[f64], y: &[f64], y_new: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = err.len() as f64;
    let ss: f64 = err
        .iter()
        .zip(y.iter().zip(y_new))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (ss / n).sqrt()
}

fn initial_step(sys: &SystemDef, y0: &[f64], f0: &[f64], rtol: f64, atol: f64) -> f64 {
    let scale: Vec<f64> = y0.iter().map(|y| atol + rtol * y.abs()).collect();
    let rms = |v: &[f64]| (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
    let (d0, d1) = (rms(y0), rms(f0));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let f1 = sys.eval(&y1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 3.0)
    };
    (100.0 * h0).min(h1)
}

/// Adaptive Bogacki–Shampine 3(2) integration sampled on the uniform `dt` grid.
pub fn integrate(system: &SystemDef, config: &IntegrationConfig) -> Result<TimeSeries> {
    config.validate(system.dim)?;
    let dim = system.dim;
    let n_out = config.n_samples();
    let t_end = config.t0 + (n_out - 1) as f64 * config.dt;
    let grid = |m: usize| config.t0 + m as f64 * config.dt;

    let mut out = Vec::with_capacity(n_out * dim);
    out.extend_from_slice(&config.initial_state);
    let mut next_m = 1;

    let mut t = config.t0;
    let mut y = config.initial_state.clone();
    let mut k1 = system.eval(&y);
    let (mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    let mut h = initial_step(system, &y, &k1, config.rtol, config.atol).min(t_end - t);

    while next_m < n_out {
        let min_h = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < min_h {
            return Err(NgrcError::IntegrationFailure {
                t,
                reason: format!("step size {h:.3e} underflowed"),
            });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        for j in 0..dim {
            tmp[j] = y[j] + 0.5 * h * k1[j];
        }
        system.eval_into(&tmp, &mut k2);
        for j in 0..dim {
            tmp[j] = y[j] + 0.75 * h * k2[j];
        }
        system.eval_into(&tmp, &mut k3);
        for j in 0..dim {
            y_new[j] = y[j] + h * (2.0 / 9.0 * k1[j] + 1.0 / 3.0 * k2[j] + 4.0 / 9.0 * k3[j]);
        }
        system.eval_into(&y_new, &mut k4);
        for j in 0..dim {
            err[j] = h * (-5.0 / 72.0 * k1[j] + 1.0 / 12.0 * k2[j] + 1.0 / 9.0 * k3[j] - 0.125 * k4[j]);
        }
        let en = error_norm(&err, &y, &y_new, config.rtol, config.atol);
        if !en.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.2;
            continue;
        }
        if en <= 1.0 {
            let t_new = if last { t_end } else { t + h };
            // cubic Hermite dense output on [t, t_new]
            while next_m < n_out && grid(next_m) <= t_new + 1e-12 * config.dt {
                let tau = ((grid(next_m) - t) / h).clamp(0.0, 1.0);
                let (t2, t3) = (tau * tau, tau * tau * tau);
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + tau;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                for j in 0..dim {
                    out.push(h00 * y[j] + h10 * h * k1[j] + h01 * y_new[j] + h11 * h * k4[j]);
                }
                next_m += 1;
            }
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k4);
            let factor = if en == 0.0 {
                5.0
            } else {
                (0.9 * en.powf(-1.0 / 3.0)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            h *= (0.9 * en.powf(-1.0 / 3.0)).clamp(0.2, 1.0);
        }
    }
    TimeSeries::from_flat(config.t0, config.dt, dim, out)
}

/// Fixed-substep integration with additive Gaussian forcing.
///
/// Each of the `noise_substeps` substeps per `dt` draws an independent forcing
/// vector with per-component standard deviation `noise_rms / sqrt(h)`, holds it
/// constant, and advances one Heun step of the forced field.
pub fn integrate_noisy(system: &SystemDef, config: &IntegrationConfig) -> Result<TimeSeries> {
    config.validate(system.dim)?;
    let seed = config
        .seed
        .ok_or_else(|| NgrcError::InvalidArgument("noise-driven integration requires a seed".into()))?;
    if config.noise_substeps == 0 {
        return Err(NgrcError::InvalidArgument("noise_substeps must be ≥ 1".into()));
    }
    let dim = system.dim;
    let n_out = config.n_samples();
    let h = config.dt / config.noise_substeps as f64;
    let normal = Normal::new(0.0, config.noise_rms / h.sqrt())
        .map_err(|e| NgrcError::InvalidArgument(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut out = Vec::with_capacity(n_out * dim);
    out.extend_from_slice(&config.initial_state);
    let mut y = config.initial_state.clone();
    let (mut k1, mut k2, mut tmp) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut xi = vec![0.0; dim];
    for m in 1..n_out {
        for _ in 0..config.noise_substeps {
            xi.iter_mut().for_each(|v| *v = normal.sample(&mut rng));
            system.eval_into(&y, &mut k1);
            for j in 0..dim {
                k1[j] += xi[j];
                tmp[j] = y[j] + h * k1[j];
            }
            system.eval_into(&tmp, &mut k2);
            for j in 0..dim {
                y[j] += 0.5 * h * (k1[j] + k2[j] + xi[j]);
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(NgrcError::IntegrationFailure {
                t: config.t0 + m as f64 * config.dt,
                reason: "state diverged".into(),
            });
        }
        out.extend_from_slice(&y);
    }
    TimeSeries::from_flat(config.t0, config.dt, dim, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorenz_rhs_values() {
        assert_eq!(lorenz63_rhs([0.0; 3]), [0.0; 3]);
        let r = lorenz63_rhs([1.0, 1.0, 1.0]);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[1], 26.0);
        assert!((r[2] + 5.0 / 3.0).abs() < 1e-15);
        let q = 72f64.sqrt();
        let r = lorenz63_rhs([q, q, 27.0]);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn double_scroll_rhs_is_odd() {
        assert_eq!(double_scroll_rhs([0.0; 3]), [0.0; 3]);
        for v in [[0.3, -0.7, 0.05], [1.1, 0.2, -0.4], [-0.9, 0.8, 1.3]] {
            let a = double_scroll_rhs(v);
            let b = double_scroll_rhs([-v[0], -v[1], -v[2]]);
            for j in 0..3 {
                assert!((a[j] + b[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exponential_decay() {
        let sys = SystemDef::custom("decay", 1, 1.0, |s, o| o[0] = -s[0]);
        let run = integrate(&sys, &IntegrationConfig::new(vec![1.0], 0.1, 1.0)).unwrap();
        assert_eq!(run.len(), 11);
        assert!((run.sample(10)[0] - (-1.0f64).exp()).abs() < 1e-6);
        assert!((run.sample(5)[0] - (-0.5f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn lorenz_sample_count_and_bounds() {
        let sys = SystemDef::lorenz63();
        let cfg = IntegrationConfig::new(vec![17.678, 12.931, 43.914], 0.025, 10.0);
        let run = integrate(&sys, &cfg).unwrap();
        assert_eq!(run.len(), 401);
        for s in run.samples() {
            assert!(s[0].abs() < 30.0 && s[1].abs() < 30.0 && s[2] > 0.0 && s[2] < 60.0);
        }
    }

    #[test]
    fn tolerance_halving_converges() {
        let sys = SystemDef::lorenz63();
        let a = integrate(&sys, &IntegrationConfig::new(vec![17.678, 12.931, 43.914], 0.025, 1.0)).unwrap();
        let b = integrate(
            &sys,
            &IntegrationConfig::new(vec![17.678, 12.931, 43.914], 0.025, 1.0).with_tolerances(0.5e-8, 0.5e-10),
        )
        .unwrap();
        let (ea, eb) = (a.last().unwrap(), b.last().unwrap());
        for j in 0..3 {
            assert!((ea[j] - eb[j]).abs() < 1e-4);
        }
    }

    #[test]
    fn zero_noise_matches_plain_heun() {
        let sys = SystemDef::lorenz63();
        let cfg = IntegrationConfig::new(vec![1.0, 2.0, 20.0], 0.025, 2.0).with_noise(0.0, 7);
        let noisy = integrate_noisy(&sys, &cfg).unwrap();
        // independent fixed-step Heun
        let h = 0.025 / 20.0;
        let mut y = [1.0, 2.0, 20.0];
        for m in 1..noisy.len() {
            for _ in 0..20 {
                let k1 = lorenz63_rhs(y);
                let k2 = lorenz63_rhs([y[0] + h * k1[0], y[1] + h * k1[1], y[2] + h * k1[2]]);
                for j in 0..3 {
                    y[j] += 0.5 * h * (k1[j] + k2[j]);
                }
            }
            for (a, b) in noisy.sample(m).iter().zip(&y) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn noisy_runs_are_seeded() {
        let sys = SystemDef::lorenz63();
        let base = IntegrationConfig::new(vec![1.0, 2.0, 20.0], 0.025, 1.0);
        let a = integrate_noisy(&sys, &base.clone().with_noise(1.0, 3)).unwrap();
        let b = integrate_noisy(&sys, &base.clone().with_noise(1.0, 3)).unwrap();
        let c = integrate_noisy(&sys, &base.clone().with_noise(1.0, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(integrate_noisy(&sys, &base).is_err());
    }

    #[test]
    fn rejects_bad_config() {
        let sys = SystemDef::lorenz63();
        assert!(integrate(&sys, &IntegrationConfig::new(vec![1.0; 3], 0.0, 1.0)).is_err());
        assert!(integrate(&sys, &IntegrationConfig::new(vec![1.0; 2], 0.1, 1.0)).is_err());
        let cfg = IntegrationConfig::new(vec![1.0; 3], 0.1, 1.0).with_tolerances(0.0, 1e-9);
        assert!(integrate(&sys, &cfg).is_err());
    }

    #[test]
    fn blow_up_reports_failure() {
        let sys = SystemDef::custom("blowup", 1, 1.0, |s, o| o[0] = s[0] * s[0]);
        let err = integrate(&sys, &IntegrationConfig::new(vec![1.0], 0.1, 2.0)).unwrap_err();
        assert!(matches!(err, NgrcError::IntegrationFailure { .. }));
    }
}
