//! NG-RC feature vectors: a constant, a linear block of time-delayed
//! observations, and the unique monomials of that block.
//!
//! Feature order is fixed:
//!
//! 1. the constant, when present;
//! 2. the linear block `X_i, X_{i-s}, …, X_{i-(k-1)s}`, most recent tap first,
//!    each tap in component order;
//! 3. one block per polynomial degree, ascending, each listing the
//!    non-decreasing index tuples over the linear block in lexicographic order.
//!
//! For degree 2 the last rule enumerates the upper triangle of the outer
//! product `lin ⊗ lin` row by row.

use serde::{Deserialize, Serialize};

use crate::error::{NgrcError, Result};
use crate::series::TimeSeries;

/// Declarative description of a feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    /// Input dimension.
    pub d: usize,
    /// Number of delay taps.
    pub k: usize,
    /// Spacing between taps in samples.
    pub s: usize,
    /// Polynomial degrees (each ≥ 2), stored ascending and deduplicated.
    pub degrees: Vec<u32>,
    pub include_constant: bool,
    pub constant_value: f64,
}

impl FeatureSpec {
    pub fn new(d: usize, k: usize, s: usize, degrees: &[u32], include_constant: bool) -> Result<Self> {
        let mut degrees = degrees.to_vec();
        degrees.sort_unstable();
        degrees.dedup();
        let spec = Self {
            d,
            k,
            s,
            degrees,
            include_constant,
            constant_value: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_constant_value(mut self, c: f64) -> Result<Self> {
        self.constant_value = c;
        self.validate()?;
        Ok(self)
    }

    /// Constant, linear and quadratic terms.
    pub fn quadratic(d: usize, k: usize, s: usize) -> Self {
        Self::new(d, k, s, &[2], true).expect("valid quadratic spec")
    }

    /// Linear and cubic terms without a constant; every feature is odd.
    pub fn odd_cubic(d: usize, k: usize, s: usize) -> Self {
        Self::new(d, k, s, &[3], false).expect("valid cubic spec")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(NgrcError::InvalidSpec(m));
        if self.d == 0 {
            return fail("d must be ≥ 1".into());
        }
        if self.k == 0 {
            return fail("k must be ≥ 1".into());
        }
        if self.s == 0 {
            return fail("s must be ≥ 1".into());
        }
        if let Some(p) = self.degrees.iter().find(|&&p| p < 2) {
            return fail(format!("polynomial degree {p} must be ≥ 2"));
        }
        if self.degrees.windows(2).any(|w| w[0] >= w[1]) {
            return fail("degrees must be strictly ascending".into());
        }
        if !self.constant_value.is_finite() {
            return fail("constant_value must be finite".into());
        }
        Ok(())
    }

    /// Length of the linear block, `d * k`.
    pub fn linear_len(&self) -> usize {
        self.d * self.k
    }

    /// Number of earlier samples needed before the first feature vector, `(k-1)*s`.
    pub fn warmup(&self) -> usize {
        (self.k - 1) * self.s
    }

    /// Number of monomials of degree `p` in the linear block.
    pub fn degree_block_len(&self, p: u32) -> usize {
        multichoose(self.linear_len(), p as usize)
    }

    pub fn nonlinear_len(&self) -> usize {
        self.degrees.iter().map(|&p| self.degree_block_len(p)).sum()
    }

    /// Offset of the linear block inside the total feature vector.
    pub fn linear_offset(&self) -> usize {
        usize::from(self.include_constant)
    }

    /// True when every feature is an odd function of the inputs.
    pub fn is_odd(&self) -> bool {
        !self.include_constant && self.degrees.iter().all(|p| p % 2 == 1)
    }
}

/// Total feature-vector length, computed without building any vector.
pub fn feature_length(spec: &FeatureSpec) -> usize {
    spec.linear_offset() + spec.linear_len() + spec.nonlinear_len()
}

/// `C(n + p - 1, p)`, the number of size-`p` multisets over `n` items.
fn multichoose(n: usize, p: usize) -> usize {
    let mut acc: usize = 1;
    for j in 0..p {
        // exact at every step: the running value is itself a binomial coefficient
        acc = acc * (n + j) / (j + 1);
    }
    acc
}

/// All non-decreasing index tuples of length `p` over `0..n_vars`, in
/// lexicographic order.
pub fn monomial_exponent_table(n_vars: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(multichoose(n_vars, p));
    if n_vars == 0 || p == 0 {
        return out;
    }
    let mut tuple = vec![0usize; p];
    loop {
        out.push(tuple.clone());
        // advance the rightmost position that can still grow, reset the tail to it
        let Some(pos) = (0..p).rev().find(|&j| tuple[j] + 1 < n_vars) else {
            break;
        };
        let next = tuple[pos] + 1;
        tuple[pos..].iter_mut().for_each(|a| *a = next);
    }
    out
}

/// `k` rows of `d` components: `X_i, X_{i-s}, …`, most recent first.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayWindow {
    k: usize,
    d: usize,
    rows: Vec<f64>,
}

impl DelayWindow {
    pub fn new<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(NgrcError::DimensionMismatch(
                "delay window needs at least one row".into(),
            ));
        }
        let d = rows[0].as_ref().len();
        let mut flat = Vec::with_capacity(k * d);
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(NgrcError::DimensionMismatch(
                    "delay window rows differ in length".into(),
                ));
            }
            flat.extend_from_slice(r);
        }
        Ok(Self { k, d, rows: flat })
    }

    /// Reads the window ending at sample `i` of `series`.
    pub fn at(series: &TimeSeries, spec: &FeatureSpec, i: usize) -> Result<Self> {
        Ok(Self {
            k: spec.k,
            d: spec.d,
            rows: linear_features(series, spec, i)?,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, tap: usize) -> &[f64] {
        &self.rows[tap * self.d..(tap + 1) * self.d]
    }

    /// The flattened window, which is exactly the linear block.
    pub fn as_linear(&self) -> &[f64] {
        &self.rows
    }
}

/// Linear block at sample `i`: `[X_i; X_{i-s}; …; X_{i-(k-1)s}]`.
pub fn linear_features(series: &TimeSeries, spec: &FeatureSpec, i: usize) -> Result<Vec<f64>> {
    if series.dim() != spec.d {
        return Err(NgrcError::DimensionMismatch(format!(
            "series has {} components, spec expects d = {}",
            series.dim(),
            spec.d
        )));
    }
    let warmup = spec.warmup();
    if i < warmup {
        return Err(NgrcError::IndexBeforeWarmup { index: i, warmup });
    }
    if i >= series.len() {
        return Err(NgrcError::DimensionMismatch(format!(
            "index {i} beyond series of length {}",
            series.len()
        )));
    }
    let mut out = Vec::with_capacity(spec.linear_len());
    for tap in 0..spec.k {
        out.extend_from_slice(series.sample(i - tap * spec.s));
    }
    Ok(out)
}

/// Total feature vector for a delay window.
pub fn total_features(window: &DelayWindow, spec: &FeatureSpec) -> Result<Vec<f64>> {
    if window.k() != spec.k || window.d() != spec.d {
        return Err(NgrcError::DimensionMismatch(format!(
            "window is {}×{}, spec expects {}×{}",
            window.k(),
            window.d(),
            spec.k,
            spec.d
        )));
    }
    Ok(Featurizer::new(spec.clone()).features_from_linear(window.as_linear()))
}

/// A [`FeatureSpec`] with its monomial tables precomputed, for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Featurizer {
    spec: FeatureSpec,
    len: usize,
    // one flattened index table per degree, `p` entries per monomial
    tables: Vec<(usize, Vec<usize>)>,
}

impl Featurizer {
    pub fn new(spec: FeatureSpec) -> Self {
        let n = spec.linear_len();
        let tables = spec
            .degrees
            .iter()
            .map(|&p| {
                let p = p as usize;
                let flat = monomial_exponent_table(n, p).into_iter().flatten().collect();
                (p, flat)
            })
            .collect();
        let len = feature_length(&spec);
        Self { spec, len, tables }
    }

    pub fn spec(&self) -> &FeatureSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Writes the total feature vector for linear block `lin` into `out`.
    pub fn fill_from_linear(&self, lin: &[f64], out: &mut [f64]) {
        debug_assert_eq!(lin.len(), self.spec.linear_len());
        debug_assert_eq!(out.len(), self.len);
        let mut at = 0;
        if self.spec.include_constant {
            out[0] = self.spec.constant_value;
            at = 1;
        }
        out[at..at + lin.len()].copy_from_slice(lin);
        at += lin.len();
        for (p, table) in &self.tables {
            for idx in table.chunks_exact(*p) {
                let mut prod = lin[idx[0]];
                for &j in &idx[1..] {
                    prod *= lin[j];
                }
                out[at] = prod;
                at += 1;
            }
        }
    }

    pub fn features_from_linear(&self, lin: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        self.fill_from_linear(lin, &mut out);
        out
    }

    /// Total features at sample `i` of `series`.
    pub fn features_at(&self, series: &TimeSeries, i: usize) -> Result<Vec<f64>> {
        let lin = linear_features(series, &self.spec, i)?;
        Ok(self.features_from_linear(&lin))
    }

    /// Jacobian of the total features with respect to the linear block,
    /// row-major `len × linear_len`.
    pub fn jacobian_wrt_linear(&self, lin: &[f64]) -> Vec<f64> {
        let n = lin.len();
        let mut jac = vec![0.0; self.len * n];
        let mut row = usize::from(self.spec.include_constant);
        for j in 0..n {
            jac[row * n + j] = 1.0;
            row += 1;
        }
        for (p, table) in &self.tables {
            for idx in table.chunks_exact(*p) {
                // d/dx_j of a product: drop one factor equal to j at a time
                for skip in 0..*p {
                    let mut prod = 1.0;
                    for (q, &a) in idx.iter().enumerate() {
                        if q != skip {
                            prod *= lin[a];
                        }
                    }
                    jac[row * n + idx[skip]] += prod;
                }
                row += 1;
            }
        }
        jac
    }

    /// Human-readable label for every feature, e.g. `x0(t-1)*x2(t)`.
    pub fn labels(&self, names: &[&str]) -> Vec<String> {
        let d = self.spec.d;
        let lin_label = |j: usize| {
            let (tap, c) = (j / d, j % d);
            let name = names.get(c).map(|s| s.to_string()).unwrap_or_else(|| format!("x{c}"));
            if tap == 0 {
                format!("{name}(t)")
            } else {
                format!("{name}(t-{})", tap * self.spec.s)
            }
        };
        let mut out = Vec::with_capacity(self.len);
        if self.spec.include_constant {
            out.push("c".to_string());
        }
        out.extend((0..self.spec.linear_len()).map(lin_label));
        for (p, table) in &self.tables {
            for idx in table.chunks_exact(*p) {
                out.push(idx.iter().map(|&j| lin_label(j)).collect::<Vec<_>>().join("*"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_for_reference_tasks() {
        assert_eq!(feature_length(&FeatureSpec::quadratic(3, 2, 1)), 28);
        assert_eq!(feature_length(&FeatureSpec::odd_cubic(3, 2, 1)), 62);
        assert_eq!(feature_length(&FeatureSpec::quadratic(2, 4, 5)), 45);
        assert_eq!(feature_length(&FeatureSpec::new(1, 1, 1, &[], true).unwrap()), 2);
    }

    #[test]
    fn degree_block_formulas() {
        for dk in 1..15usize {
            let spec = FeatureSpec::new(dk, 1, 1, &[2, 3], false).unwrap();
            assert_eq!(spec.degree_block_len(2), dk * (dk + 1) / 2);
            assert_eq!(spec.degree_block_len(3), dk * (dk + 1) * (dk + 2) / 6);
        }
    }

    #[test]
    fn linear_block_reads_taps() {
        let s = TimeSeries::from_rows(0.0, 1.0, &[[1.0], [2.0], [3.0]]).unwrap();
        let spec = FeatureSpec::new(1, 2, 1, &[], false).unwrap();
        assert_eq!(linear_features(&s, &spec, 1).unwrap(), vec![2.0, 1.0]);
        let spec = FeatureSpec::new(1, 2, 2, &[], false).unwrap();
        assert_eq!(linear_features(&s, &spec, 2).unwrap(), vec![3.0, 1.0]);
    }

    #[test]
    fn warmup_boundary() {
        let s = TimeSeries::from_rows(0.0, 1.0, &[[1.0]; 10]).unwrap();
        let spec = FeatureSpec::new(1, 3, 2, &[], false).unwrap();
        for i in 0..4 {
            assert!(matches!(
                linear_features(&s, &spec, i),
                Err(NgrcError::IndexBeforeWarmup { warmup: 4, .. })
            ));
        }
        assert!(linear_features(&s, &spec, 4).is_ok());
    }

    #[test]
    fn small_exponent_tables() {
        assert_eq!(monomial_exponent_table(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(
            monomial_exponent_table(2, 3),
            vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 1], vec![1, 1, 1]]
        );
    }

    #[test]
    fn zero_window_keeps_only_constant() {
        let spec = FeatureSpec::quadratic(3, 2, 1);
        let w = DelayWindow::new(&[[0.0; 3], [0.0; 3]]).unwrap();
        let f = total_features(&w, &spec).unwrap();
        assert_eq!(f.len(), 28);
        assert_eq!(f[0], 1.0);
        assert!(f[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_quadratic_by_hand() {
        let spec = FeatureSpec::new(1, 2, 1, &[2], false).unwrap();
        let w = DelayWindow::new(&[[2.0], [3.0]]).unwrap();
        assert_eq!(total_features(&w, &spec).unwrap(), vec![2.0, 3.0, 4.0, 6.0, 9.0]);
    }

    #[test]
    fn single_variable_single_square() {
        let spec = FeatureSpec::new(1, 1, 1, &[2], false).unwrap();
        let w = DelayWindow::new(&[[-1.5]]).unwrap();
        assert_eq!(total_features(&w, &spec).unwrap(), vec![-1.5, 2.25]);
    }

    #[test]
    fn invalid_specs() {
        assert!(FeatureSpec::new(0, 1, 1, &[2], true).is_err());
        assert!(FeatureSpec::new(1, 0, 1, &[2], true).is_err());
        assert!(FeatureSpec::new(1, 1, 0, &[2], true).is_err());
        assert!(FeatureSpec::new(1, 1, 1, &[1], true).is_err());
        assert_eq!(FeatureSpec::new(1, 1, 1, &[3, 2, 3], true).unwrap().degrees, vec![2, 3]);
    }

    #[test]
    fn window_shape_is_checked() {
        let spec = FeatureSpec::quadratic(3, 2, 1);
        let w = DelayWindow::new(&[[0.0; 3]]).unwrap();
        assert!(total_features(&w, &spec).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let spec = FeatureSpec::new(2, 2, 1, &[2, 3], true).unwrap();
        let f = Featurizer::new(spec);
        let lin = [0.3, -1.2, 0.7, 2.0];
        let jac = f.jacobian_wrt_linear(&lin);
        let h = 1e-6;
        for j in 0..lin.len() {
            let mut up = lin;
            let mut dn = lin;
            up[j] += h;
            dn[j] -= h;
            let (fu, fd) = (f.features_from_linear(&up), f.features_from_linear(&dn));
            for r in 0..f.len() {
                let fd_est = (fu[r] - fd[r]) / (2.0 * h);
                assert!((jac[r * lin.len() + j] - fd_est).abs() < 1e-6, "row {r} col {j}");
            }
        }
    }

    #[test]
    fn labels_follow_order() {
        let f = Featurizer::new(FeatureSpec::quadratic(1, 2, 1));
        assert_eq!(
            f.labels(&["x"]),
            vec!["c", "x(t)", "x(t-1)", "x(t)*x(t)", "x(t)*x(t-1)", "x(t-1)*x(t-1)"]
        );
    }
}
