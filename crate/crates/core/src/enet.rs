//! Coordinate descent for elastic-net penalized least squares.
//!
//! Two scalings of the objective are supported (intercept `a` unpenalized):
//!
//! ```text
//! Mean:  (1/2n) ||y − a − X b||² + λ [ α ||b||₁ + ((1 − α)/2) ||b||² ]
//! Sum:         ||y − a − X b||² + λ [ α ||b||₁ + (1 − α) ||b||² ]
//! ```
//!
//! `Mean` (the default) keeps a given `λ` meaningful across sample sizes.
//! Predictors are used as given (no internal standardization).
//!
//! The descent itself runs on centered cross-products, which lets the
//! node-wise regressions of the graphical estimators share a single
//! `n · S` matrix.

use nalgebra::{DMatrix, DVector};

use serde::{Deserialize, Serialize};

use crate::error::{GgmError, Result};
use crate::model::PenaltyParams;

/// Scaling of the residual sum of squares against the penalty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossScaling {
    #[default]
    Mean,
    Sum,
}

impl LossScaling {
    /// Soft-threshold level and ridge term of a coordinate update written on
    /// the raw cross-products `Xᵀ X`, `Xᵀ y`.
    pub fn update_terms(self, params: PenaltyParams, n: usize) -> (f64, f64) {
        match self {
            LossScaling::Mean => (n as f64 * params.l1(), n as f64 * params.l2()),
            LossScaling::Sum => (0.5 * params.l1(), params.l2()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnetConfig {
    pub max_iter: usize,
    /// Sweeps stop once the largest coefficient change falls below this.
    pub tol: f64,
    pub scaling: LossScaling,
}

impl Default for EnetConfig {
    fn default() -> Self {
        Self { max_iter: 10_000, tol: 1e-7, scaling: LossScaling::Mean }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// `(1/n) ||y − â − X b̂||²`.
    pub residual_variance: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `sign(c) · max(|c| − t, 0)`.
#[inline]
pub fn soft_threshold(c: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if c > t {
        c - t
    } else if c < -t {
        c + t
    } else {
        0.0
    }
}

/// Centered cross-products of a regression problem.
#[derive(Debug, Clone)]
pub struct CrossProducts {
    /// `Xcᵀ Xc`
    pub xtx: DMatrix<f64>,
    /// `Xcᵀ yc`
    pub xty: DVector<f64>,
    /// `ycᵀ yc`
    pub yty: f64,
    pub n: usize,
}

impl CrossProducts {
    /// Regression of variable `target` on all other variables, read off a
    /// centered cross-product matrix `c = Xcᵀ Xc` of the full data.
    pub fn node(c: &DMatrix<f64>, target: usize, n: usize) -> Self {
        let others: Vec<usize> = (0..c.nrows()).filter(|&k| k != target).collect();
        let q = others.len();
        let xtx = DMatrix::from_fn(q, q, |a, b| c[(others[a], others[b])]);
        let xty = DVector::from_fn(q, |a, _| c[(others[a], target)]);
        Self { xtx, xty, yty: c[(target, target)], n }
    }
}

/// Runs coordinate descent on precomputed cross-products.
///
/// Returns the coefficients, the number of sweeps and whether the sweep
/// tolerance was reached.
pub fn descend(
    cp: &CrossProducts,
    params: PenaltyParams,
    cfg: EnetConfig,
    warm: Option<&[f64]>,
) -> (Vec<f64>, usize, bool) {
    let q = cp.xty.len();
    let mut b = match warm {
        Some(w) if w.len() == q => w.to_vec(),
        _ => vec![0.0; q],
    };
    // Gradient-free form: keep g = Xᵀ(y − Xb) up to date.
    let mut g: Vec<f64> = (0..q).map(|j| cp.xty[j] - (0..q).map(|k| cp.xtx[(j, k)] * b[k]).sum::<f64>()).collect();
    let (thresh, ridge) = cfg.scaling.update_terms(params, cp.n);
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < cfg.max_iter {
        sweeps += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..q {
            let h = cp.xtx[(j, j)];
            let new = if h <= f64::EPSILON * cp.yty.max(1.0) {
                0.0
            } else {
                soft_threshold(g[j] + h * b[j], thresh) / (h + ridge)
            };
            let delta = new - b[j];
            if delta != 0.0 {
                for k in 0..q {
                    g[k] -= cp.xtx[(k, j)] * delta;
                }
                b[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < cfg.tol {
            converged = true;
            break;
        }
    }
    (b, sweeps, converged)
}

/// Residual variance (divisor `n`) of coefficients `b` on the cross-products.
pub fn residual_variance(cp: &CrossProducts, b: &[f64]) -> f64 {
    let b = DVector::from_column_slice(b);
    let rss = cp.yty - 2.0 * b.dot(&cp.xty) + b.dot(&(&cp.xtx * &b));
    (rss / cp.n as f64).max(0.0)
}

/// Fits `y` on the columns of `x` with an unpenalized intercept.
pub fn fit_elastic_net(
    y: &[f64],
    x: &DMatrix<f64>,
    params: PenaltyParams,
    cfg: EnetConfig,
    warm: Option<&[f64]>,
) -> Result<RegressionFit> {
    let n = y.len();
    if n < 2 {
        return Err(GgmError::InvalidData(format!("need at least 2 observations, got {n}")));
    }
    if x.nrows() != n {
        return Err(GgmError::Dimension(format!("y has {n} rows, X has {}", x.nrows())));
    }
    if x.ncols() == 0 {
        return Err(GgmError::InvalidData("no predictors".into()));
    }
    if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
        return Err(GgmError::InvalidData("non-finite input".into()));
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let x_means = x.row_mean();
    let mut xc = x.clone();
    for mut row in xc.row_iter_mut() {
        row -= &x_means;
    }
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    let cp = CrossProducts { xtx: xc.transpose() * &xc, xty: xc.transpose() * &yc, yty: yc.dot(&yc), n };
    let (coefficients, iterations, converged) = descend(&cp, params, cfg, warm);
    let residual_variance = residual_variance(&cp, &coefficients);
    let intercept = y_mean - coefficients.iter().zip(x_means.iter()).map(|(b, m)| b * m).sum::<f64>();
    Ok(RegressionFit { intercept, coefficients, residual_variance, iterations, converged })
}

/// Value of the penalized objective at `(a, b)`.
pub fn objective(
    y: &[f64],
    x: &DMatrix<f64>,
    intercept: f64,
    b: &[f64],
    params: PenaltyParams,
    scaling: LossScaling,
) -> f64 {
    let bv = DVector::from_column_slice(b);
    let fitted = x * &bv;
    let rss: f64 = y.iter().zip(fitted.iter()).map(|(yi, fi)| (yi - intercept - fi).powi(2)).sum();
    let l1: f64 = b.iter().map(|v| v.abs()).sum();
    let l2: f64 = b.iter().map(|v| v * v).sum();
    match scaling {
        LossScaling::Mean => {
            rss / (2.0 * y.len() as f64) + params.lambda * (params.alpha * l1 + 0.5 * (1.0 - params.alpha) * l2)
        }
        LossScaling::Sum => rss + params.lambda * (params.alpha * l1 + (1.0 - params.alpha) * l2),
    }
}
