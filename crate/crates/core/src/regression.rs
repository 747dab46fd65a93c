//! Tikhonov-regularized least squares for the linear readout.

use nalgebra::DMatrix;

use crate::error::{NgrcError, Result};

/// Trained output weights, `output_dim × feature_dim`, with the ridge
/// parameter used to fit them.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutMatrix {
    pub weights: DMatrix<f64>,
    pub alpha: f64,
}

impl ReadoutMatrix {
    pub fn zeros(output_dim: usize, feature_dim: usize) -> Self {
        Self {
            weights: DMatrix::zeros(output_dim, feature_dim),
            alpha: 0.0,
        }
    }

    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.weights.ncols()
    }

    /// `W_out · v`.
    pub fn apply(&self, feature_vec: &[f64]) -> Result<Vec<f64>> {
        readout_apply(self, feature_vec)
    }

    /// Writes `W_out · v` into `out` without allocating. Lengths must match.
    pub fn apply_into(&self, feature_vec: &[f64], out: &mut [f64]) {
        let w = &self.weights;
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (c, v) in feature_vec.iter().enumerate() {
                acc += w[(r, c)] * v;
            }
            *o = acc;
        }
    }
}

/// Stacked training columns: features `feature_dim × n`, targets `output_dim × n`.
#[derive(Debug, Clone)]
pub struct TrainingBlock {
    pub features: DMatrix<f64>,
    pub targets: DMatrix<f64>,
}

impl TrainingBlock {
    pub fn new(features: DMatrix<f64>, targets: DMatrix<f64>) -> Result<Self> {
        if features.ncols() != targets.ncols() {
            return Err(NgrcError::DimensionMismatch(format!(
                "{} feature columns vs {} target columns",
                features.ncols(),
                targets.ncols()
            )));
        }
        if features.ncols() == 0 {
            return Err(NgrcError::InsufficientData { needed: 1, got: 0 });
        }
        Ok(Self { features, targets })
    }

    /// Builds the block from per-sample column vectors.
    pub fn from_columns(features: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<Self> {
        let n = features.len();
        if n != targets.len() {
            return Err(NgrcError::DimensionMismatch(format!(
                "{n} feature columns vs {} target columns",
                targets.len()
            )));
        }
        if n == 0 {
            return Err(NgrcError::InsufficientData { needed: 1, got: 0 });
        }
        let fd = features[0].len();
        let od = targets[0].len();
        if features.iter().any(|c| c.len() != fd) || targets.iter().any(|c| c.len() != od) {
            return Err(NgrcError::DimensionMismatch("ragged training columns".into()));
        }
        let f = DMatrix::from_fn(fd, n, |r, c| features[c][r]);
        let t = DMatrix::from_fn(od, n, |r, c| targets[c][r]);
        Self::new(f, t)
    }

    pub fn n_samples(&self) -> usize {
        self.features.ncols()
    }
}

/// Fits `W_out = Y Oᵀ (O Oᵀ + αI)⁻¹` by factorizing the symmetric Gram
/// matrix, never forming the inverse.
pub fn ridge_fit(block: &TrainingBlock, alpha: f64) -> Result<ReadoutMatrix> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(NgrcError::InvalidArgument(format!("alpha must be ≥ 0, got {alpha}")));
    }
    let o = &block.features;
    let fd = o.nrows();
    let mut gram = o * o.transpose();
    for j in 0..fd {
        gram[(j, j)] += alpha;
    }
    // rhs of the transposed system  (O Oᵀ + αI) W_outᵀ = O Yᵀ
    let rhs = o * block.targets.transpose();

    let max_diag = (0..fd).map(|j| gram[(j, j)]).fold(0.0_f64, f64::max);
    let solution = match gram.clone().cholesky() {
        Some(chol) => {
            if alpha == 0.0 {
                let l = chol.l_dirty();
                let min_pivot = (0..fd).map(|j| l[(j, j)] * l[(j, j)]).fold(f64::INFINITY, f64::min);
                if !(min_pivot > 1e-12 * max_diag) {
                    return Err(NgrcError::Singular(format!(
                        "O·Oᵀ is rank-deficient (pivot ratio {:.3e}) and alpha = 0",
                        min_pivot / max_diag
                    )));
                }
            }
            chol.solve(&rhs)
        }
        None if alpha == 0.0 => {
            return Err(NgrcError::Singular(
                "O·Oᵀ is not positive definite and alpha = 0".into(),
            ));
        }
        // rounding can break positive definiteness of a badly scaled Gram matrix
        None => gram
            .full_piv_lu()
            .solve(&rhs)
            .ok_or_else(|| NgrcError::Singular("regularized Gram matrix could not be factorized".into()))?,
    };
    let weights = solution.transpose();
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(NgrcError::Singular("fit produced non-finite weights".into()));
    }
    Ok(ReadoutMatrix { weights, alpha })
}

/// Matrix–vector product `W_out · v`.
pub fn readout_apply(readout: &ReadoutMatrix, feature_vec: &[f64]) -> Result<Vec<f64>> {
    if feature_vec.len() != readout.feature_dim() {
        return Err(NgrcError::DimensionMismatch(format!(
            "feature vector has length {}, readout expects {}",
            feature_vec.len(),
            readout.feature_dim()
        )));
    }
    let mut out = vec![0.0; readout.output_dim()];
    readout.apply_into(feature_vec, &mut out);
    Ok(out)
}

/// Applies the readout to every column of a feature matrix.
pub fn predict_block(readout: &ReadoutMatrix, features: &DMatrix<f64>) -> DMatrix<f64> {
    &readout.weights * features
}

/// Training residual `Y − W O` of a fitted readout.
pub fn residual(readout: &ReadoutMatrix, block: &TrainingBlock) -> DMatrix<f64> {
    &block.targets - predict_block(readout, &block.features)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(f: &[&[f64]], t: &[&[f64]]) -> TrainingBlock {
        let fm = DMatrix::from_fn(f.len(), f[0].len(), |r, c| f[r][c]);
        let tm = DMatrix::from_fn(t.len(), t[0].len(), |r, c| t[r][c]);
        TrainingBlock::new(fm, tm).unwrap()
    }

    #[test]
    fn exact_linear_relation() {
        let b = block(&[&[1.0, 2.0, 3.0]], &[&[2.0, 4.0, 6.0]]);
        let r = ridge_fit(&b, 0.0).unwrap();
        assert!((r.weights[(0, 0)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn heavy_regularization_shrinks() {
        let b = block(&[&[1.0, 2.0, 3.0]], &[&[2.0, 4.0, 6.0]]);
        let alpha = 1e6;
        let w = ridge_fit(&b, alpha).unwrap().weights[(0, 0)];
        let limit = 28.0 / alpha;
        assert!((w - limit).abs() / limit < 0.01);
        assert!(w.abs() < 1e-4);
    }

    #[test]
    fn rank_deficient_without_ridge_is_singular() {
        let b = block(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]], &[&[1.0, 1.0, 1.0]]);
        assert!(matches!(ridge_fit(&b, 0.0), Err(NgrcError::Singular(_))));
        assert!(ridge_fit(&b, 1e-6).is_ok());
    }

    #[test]
    fn negative_alpha_rejected() {
        let b = block(&[&[1.0]], &[&[1.0]]);
        assert!(ridge_fit(&b, -1.0).is_err());
    }

    #[test]
    fn column_mismatch_rejected() {
        let f = DMatrix::zeros(2, 3);
        let t = DMatrix::zeros(1, 4);
        assert!(TrainingBlock::new(f, t).is_err());
    }

    #[test]
    fn apply_identity_and_zero() {
        let id = ReadoutMatrix {
            weights: DMatrix::identity(3, 3),
            alpha: 0.0,
        };
        let v = [1.5, -2.0, 7.0];
        assert_eq!(readout_apply(&id, &v).unwrap(), v.to_vec());
        let z = ReadoutMatrix::zeros(2, 3);
        assert_eq!(readout_apply(&z, &v).unwrap(), vec![0.0, 0.0]);
        assert!(readout_apply(&z, &v[..2]).is_err());
    }
}
