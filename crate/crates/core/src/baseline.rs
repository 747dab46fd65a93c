//! A minimal traditional reservoir computer, kept for comparison, and the
//! multiplication-count estimate used to compare its training cost with an
//! NG-RC.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NgrcError, Result};
use crate::regression::{ridge_fit, ReadoutMatrix, TrainingBlock};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirParams {
    pub n: usize,
    /// Leak rate; 1 replaces the state every step.
    pub gamma: f64,
    pub spectral_radius: f64,
    /// Fraction of nonzero entries in the adjacency matrix.
    pub sigma_r: f64,
    pub input_scale: f64,
    pub bias: f64,
    pub activation: Activation,
    pub seed: u64,
}

impl Default for ReservoirParams {
    fn default() -> Self {
        Self {
            n: 100,
            gamma: 1.0,
            spectral_radius: 0.9,
            sigma_r: 0.05,
            input_scale: 1.0,
            bias: 0.0,
            activation: Activation::Tanh,
            seed: 0,
        }
    }
}

impl ReservoirParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(NgrcError::InvalidArgument(m.to_string()));
        if self.n == 0 {
            return bad("reservoir needs at least one node");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.sigma_r > 0.0 && self.sigma_r <= 1.0) {
            return bad("sigma_r must lie in (0, 1]");
        }
        if !(self.spectral_radius >= 0.0) || !(self.input_scale >= 0.0) {
            return bad("spectral_radius and input_scale must be ≥ 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reservoir {
    /// Adjacency matrix, `N × N`.
    pub adjacency: DMatrix<f64>,
    /// Input weights, `N × d`.
    pub input: DMatrix<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub activation: Activation,
}

impl Reservoir {
    pub fn nodes(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn nonzeros(&self) -> usize {
        self.adjacency.iter().filter(|v| **v != 0.0).count()
    }
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Draws a seeded random reservoir for `input_dim`-dimensional inputs.
pub fn build_reservoir(params: &ReservoirParams, input_dim: usize) -> Result<Reservoir> {
    params.validate()?;
    let n = params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let cells = n * n;
    let nnz = ((params.sigma_r * cells as f64) - 1e-9).ceil().clamp(1.0, cells as f64) as usize;
    let mut adjacency = DMatrix::zeros(n, n);
    for pos in sample(&mut rng, cells, nnz) {
        let v: f64 = rng.random_range(-1.0..=1.0);
        // a zero draw would silently drop an entry
        adjacency[(pos / n, pos % n)] = if v == 0.0 { f64::MIN_POSITIVE } else { v };
    }
    let rho = spectral_radius(&adjacency);
    if rho > 0.0 {
        adjacency *= params.spectral_radius / rho;
    }
    let s = params.input_scale;
    let input = DMatrix::from_fn(
        n,
        input_dim,
        |_, _| if s > 0.0 { rng.random_range(-s..=s) } else { 0.0 },
    );
    Ok(Reservoir {
        adjacency,
        input,
        bias: params.bias,
        gamma: params.gamma,
        activation: params.activation,
    })
}

/// Drives the reservoir from `r = 0`; column `i` is the state after consuming sample `i`.
pub fn reservoir_run(reservoir: &Reservoir, series: &TimeSeries) -> Result<DMatrix<f64>> {
    if series.dim() != reservoir.input.ncols() {
        return Err(NgrcError::DimensionMismatch(format!(
            "series has {} components, reservoir expects {}",
            series.dim(),
            reservoir.input.ncols()
        )));
    }
    let n = reservoir.nodes();
    let mut states = DMatrix::zeros(n, series.len());
    let mut r = DVector::zeros(n);
    for (i, x) in series.samples().enumerate() {
        step(reservoir, &mut r, x);
        states.set_column(i, &r);
    }
    Ok(states)
}

fn step(reservoir: &Reservoir, r: &mut DVector<f64>, x: &[f64]) {
    let drive = &reservoir.adjacency * &*r + &reservoir.input * DVector::from_column_slice(x);
    let g = reservoir.gamma;
    for j in 0..r.len() {
        r[j] = (1.0 - g) * r[j] + g * reservoir.activation.apply(drive[j] + reservoir.bias);
    }
}

/// Stacks each state column with its elementwise square: `r ⊕ (r ⊙ r)`.
pub fn quadratic_readout_features(states: &DMatrix<f64>) -> DMatrix<f64> {
    let n = states.nrows();
    DMatrix::from_fn(2 * n, states.ncols(), |row, col| {
        let v = states[(row % n, col)];
        if row < n {
            v
        } else {
            v * v
        }
    })
}

/// Result of fitting a quadratic readout on reservoir states.
#[derive(Debug, Clone)]
pub struct BaselineFit {
    pub readout: ReadoutMatrix,
    pub training_nrmse: f64,
}

/// Trains a one-step-ahead readout `X_{i+1} ≈ W · [r; r⊙r]` after discarding
/// `washout` initial states.
pub fn train_baseline(reservoir: &Reservoir, series: &TimeSeries, washout: usize, alpha: f64) -> Result<BaselineFit> {
    if series.len() < washout + 2 {
        return Err(NgrcError::InsufficientData {
            needed: washout + 2,
            got: series.len(),
        });
    }
    let states = reservoir_run(reservoir, series)?;
    let cols = washout..series.len() - 1;
    let feats = quadratic_readout_features(&states.columns(cols.start, cols.len()).into_owned());
    let d = series.dim();
    let targets = DMatrix::from_fn(d, cols.len(), |c, j| series.sample(cols.start + j + 1)[c]);
    let block = TrainingBlock::new(feats, targets)?;
    let readout = ridge_fit(&block, alpha)?;
    let fitted = &readout.weights * &block.features;
    let scale = series.component_stds();
    let mut ss = 0.0;
    for j in 0..cols.len() {
        for c in 0..d {
            let s = if scale[c] > 0.0 { scale[c] } else { 1.0 };
            ss += ((fitted[(c, j)] - block.targets[(c, j)]) / s).powi(2);
        }
    }
    Ok(BaselineFit {
        readout,
        training_nrmse: (ss / (cols.len() * d) as f64).sqrt(),
    })
}

/// Drives the reservoir with `warmup`, then runs autonomously, feeding each
/// readout prediction back as the next input.
pub fn baseline_forecast(
    reservoir: &Reservoir,
    fit: &BaselineFit,
    warmup: &TimeSeries,
    n_steps: usize,
) -> Result<TimeSeries> {
    let states = reservoir_run(reservoir, warmup)?;
    let n = reservoir.nodes();
    let d = warmup.dim();
    if fit.readout.feature_dim() != 2 * n || fit.readout.output_dim() != d {
        return Err(NgrcError::DimensionMismatch(
            "readout does not match the reservoir".into(),
        ));
    }
    let mut r = if warmup.is_empty() {
        DVector::zeros(n)
    } else {
        states.column(warmup.len() - 1).into_owned()
    };
    let mut q = vec![0.0; 2 * n];
    let mut x = vec![0.0; d];
    let mut out = Vec::with_capacity(n_steps * d);
    for _ in 0..n_steps {
        for j in 0..n {
            q[j] = r[j];
            q[n + j] = r[j] * r[j];
        }
        fit.readout.apply_into(&q, &mut x);
        out.extend_from_slice(&x);
        step(reservoir, &mut r, &x);
    }
    let t0 = if warmup.is_empty() {
        warmup.t0()
    } else {
        warmup.time(warmup.len() - 1) + warmup.dt()
    };
    TimeSeries::from_flat(t0, warmup.dt(), d, out)
}

/// Inputs to the training-cost estimate. An NG-RC has `sigma_r = 0` and no
/// nodes; a reservoir has `n_nonlinear = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub m_warmup: f64,
    pub m_train: f64,
    pub n_total: f64,
    pub n_nonlinear: f64,
    pub n: f64,
    pub sigma_r: f64,
}

impl CostParams {
    pub fn ngrc(m_warmup: f64, m_train: f64, n_total: f64, n_nonlinear: f64) -> Self {
        Self {
            m_warmup,
            m_train,
            n_total,
            n_nonlinear,
            n: 0.0,
            sigma_r: 0.0,
        }
    }

    pub fn reservoir(m_warmup: f64, m_train: f64, n_total: f64, n: f64, sigma_r: f64) -> Self {
        Self {
            m_warmup,
            m_train,
            n_total,
            n_nonlinear: 0.0,
            n,
            sigma_r,
        }
    }

    /// Dominant multiplication count: sparse adjacency products over warm-up
    /// and training, the ridge regression, and feature formation.
    pub fn multiplications(&self) -> f64 {
        self.sigma_r * (self.m_warmup + self.m_train) * self.n * self.n
            + self.m_train * self.n_total * self.n_total
            + self.m_train * self.n_nonlinear
    }

    /// Activation-function evaluations; reported, never costed.
    pub fn special_evaluations(&self) -> f64 {
        self.n
    }
}

/// Ratio of reservoir cost to NG-RC cost.
pub fn estimate_cost(ng: &CostParams, rc: &CostParams) -> Result<f64> {
    let denom = ng.multiplications();
    if !(denom > 0.0) {
        return Err(NgrcError::InvalidArgument("NG-RC cost is zero".into()));
    }
    Ok(rc.multiplications() / denom)
}

/// One line of the cost comparison tables.
#[derive(Debug, Clone, Serialize)]
pub struct CostRow {
    pub task: &'static str,
    pub label: &'static str,
    pub ng: CostParams,
    pub rc: CostParams,
    /// Speed-up range quoted in the literature for this comparison.
    pub quoted: &'static str,
}

/// NG-RC versus the reservoir configurations it is usually compared against,
/// for the Lorenz63 and double-scroll forecasting tasks.
pub fn reference_cost_rows() -> Vec<CostRow> {
    let lorenz = CostParams::ngrc(2.0, 400.0, 28.0, 21.0);
    let scroll = CostParams::ngrc(2.0, 400.0, 62.0, 56.0);
    vec![
        CostRow {
            task: "lorenz63",
            label: "low-connectivity RC, N=100, sigma_r=0.01",
            ng: lorenz,
            rc: CostParams::reservoir(1000.0, 1000.0, 100.0, 100.0, 0.01),
            quoted: "33-163",
        },
        CostRow {
            task: "lorenz63",
            label: "low-connectivity RC, N=100, sigma_r=0.05",
            ng: lorenz,
            rc: CostParams::reservoir(1000.0, 1000.0, 100.0, 100.0, 0.05),
            quoted: "33-163",
        },
        CostRow {
            task: "lorenz63",
            label: "intermediate RC, N=300, sigma_r=0.02, warm-up unknown (0)",
            ng: lorenz,
            rc: CostParams::reservoir(0.0, 5000.0, 300.0, 300.0, 0.02),
            quoted: "1.5e3",
        },
        CostRow {
            task: "lorenz63",
            label: "high-accuracy RC, N=2000, N_total=4000, sigma_r=0.02",
            ng: lorenz,
            rc: CostParams::reservoir(1e5, 6e4, 4000.0, 2000.0, 0.02),
            quoted: "3.2e6",
        },
        CostRow {
            task: "double-scroll",
            label: "low-connectivity RC, N=100, sigma_r=0.01",
            ng: scroll,
            rc: CostParams::reservoir(1000.0, 1000.0, 100.0, 100.0, 0.01),
            quoted: "8-41",
        },
        CostRow {
            task: "double-scroll",
            label: "low-connectivity RC, N=100, sigma_r=0.05",
            ng: scroll,
            rc: CostParams::reservoir(1000.0, 1000.0, 100.0, 100.0, 0.05),
            quoted: "8-41",
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, sigma_r: f64) -> ReservoirParams {
        ReservoirParams {
            n,
            sigma_r,
            ..Default::default()
        }
    }

    #[test]
    fn spectral_radius_is_rescaled() {
        let r = build_reservoir(&params(2, 1.0), 1).unwrap();
        assert!((spectral_radius(&r.adjacency) - 0.9).abs() < 1e-8);
    }

    #[test]
    fn seeded_and_sparse() {
        let a = build_reservoir(&params(100, 0.05), 3).unwrap();
        let b = build_reservoir(&params(100, 0.05), 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.nonzeros(), 500);
        let c = build_reservoir(
            &ReservoirParams {
                seed: 1,
                ..params(100, 0.05)
            },
            3,
        )
        .unwrap();
        assert_ne!(a.adjacency, c.adjacency);
    }

    #[test]
    fn zero_leak_keeps_zero_state() {
        let res = build_reservoir(
            &ReservoirParams {
                gamma: 0.0,
                ..params(5, 0.5)
            },
            1,
        )
        .unwrap();
        let s = TimeSeries::from_flat(0.0, 1.0, 1, vec![1.0, -2.0, 3.0]).unwrap();
        let states = reservoir_run(&res, &s).unwrap();
        assert!(states.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn memoryless_linear_reservoir_is_input_projection() {
        let mut res = build_reservoir(
            &ReservoirParams {
                activation: Activation::Linear,
                ..params(4, 0.5)
            },
            2,
        )
        .unwrap();
        res.adjacency.fill(0.0);
        let s = TimeSeries::from_rows(0.0, 1.0, &[[1.0, 2.0], [-0.5, 0.25]]).unwrap();
        let states = reservoir_run(&res, &s).unwrap();
        for i in 0..2 {
            let want = &res.input * DVector::from_column_slice(s.sample(i));
            for j in 0..4 {
                assert!((states[(j, i)] - want[j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hand_unrolled_tanh_reservoir() {
        let res = Reservoir {
            adjacency: DMatrix::from_row_slice(2, 2, &[0.1, -0.4, 0.3, 0.2]),
            input: DMatrix::from_row_slice(2, 1, &[0.5, -1.0]),
            bias: 0.05,
            gamma: 0.7,
            activation: Activation::Tanh,
        };
        let s = TimeSeries::from_flat(0.0, 1.0, 1, vec![1.0, 0.5, -0.25]).unwrap();
        let states = reservoir_run(&res, &s).unwrap();
        let (mut r1, mut r2) = (0.0f64, 0.0f64);
        for (i, x) in [1.0, 0.5, -0.25].into_iter().enumerate() {
            let a1 = 0.1 * r1 - 0.4 * r2 + 0.5 * x + 0.05;
            let a2 = 0.3 * r1 + 0.2 * r2 - 1.0 * x + 0.05;
            r1 = 0.3 * r1 + 0.7 * a1.tanh();
            r2 = 0.3 * r2 + 0.7 * a2.tanh();
            assert!((states[(0, i)] - r1).abs() < 1e-12);
            assert!((states[(1, i)] - r2).abs() < 1e-12);
        }
    }

    #[test]
    fn tanh_states_are_bounded() {
        let res = build_reservoir(&params(20, 0.2), 1).unwrap();
        let s = TimeSeries::from_flat(0.0, 1.0, 1, (0..50).map(|i| 30.0 * (i as f64).sin()).collect()).unwrap();
        assert!(reservoir_run(&res, &s).unwrap().iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn quadratic_readout() {
        let st = DMatrix::from_column_slice(2, 1, &[1.0, -2.0]);
        assert_eq!(quadratic_readout_features(&st).as_slice(), &[1.0, -2.0, 1.0, 4.0]);
        let z = DMatrix::zeros(3, 2);
        assert!(quadratic_readout_features(&z).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_reservoir_fits_lorenz() {
        let sys = crate::systems::SystemDef::lorenz63();
        let x0 = sys.settled_state(20.0, 0.025).unwrap();
        let cfg = crate::systems::IntegrationConfig::new(x0, 0.025, 20.0);
        let data = crate::systems::integrate(&sys, &cfg).unwrap();
        let res = build_reservoir(
            &ReservoirParams {
                activation: Activation::Linear,
                spectral_radius: 0.5,
                input_scale: 0.1,
                ..params(50, 0.1)
            },
            3,
        )
        .unwrap();
        let fit = train_baseline(&res, &data.slice(0, 600), 100, 1e-6).unwrap();
        assert!(fit.training_nrmse.is_finite());
        let fc = baseline_forecast(&res, &fit, &data.slice(0, 600), 5).unwrap();
        assert_eq!(fc.len(), 5);
        assert!((fc.t0() - data.time(600)).abs() < 1e-12);
    }

    #[test]
    fn cost_ratio_properties() {
        let p = CostParams::reservoir(100.0, 400.0, 28.0, 28.0, 0.0);
        assert_eq!(estimate_cost(&p, &p).unwrap(), 1.0);
        let q = CostParams { sigma_r: 0.1, ..p };
        assert!(estimate_cost(&q, &q).unwrap() == 1.0);
        let ng = CostParams::ngrc(2.0, 400.0, 28.0, 21.0);
        let rc = CostParams::reservoir(1000.0, 1000.0, 100.0, 100.0, 0.01);
        let base = estimate_cost(&ng, &rc).unwrap();
        let longer = CostParams { m_train: 2000.0, ..rc };
        assert!(estimate_cost(&ng, &longer).unwrap() > base);
        assert!(estimate_cost(&CostParams::ngrc(0.0, 0.0, 0.0, 0.0), &rc).is_err());
    }
}
