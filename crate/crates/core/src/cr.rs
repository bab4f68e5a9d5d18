//! Conditional-regression estimator: one elastic-net regression per variable,
//! rescaled into a column of `Θ`, then symmetrized.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enet::{descend, residual_variance, CrossProducts, EnetConfig};
use crate::error::{GgmError, Result};
use crate::model::{is_positive_definite, Dataset, EstimationResult, PenaltyParams, SymMatrix};

/// Symmetrization applied to the column-wise estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetrizeRule {
    /// Average of `(i, j)` and `(j, i)`.
    L2,
    /// Entry of smaller magnitude.
    MinEl,
}

/// Column-wise precision estimate; not symmetric in general.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymEstimate {
    values: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl AsymEstimate {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(GgmError::Dimension("asymmetric estimate must be square".into()));
        }
        if let Some(i) = (0..values.nrows()).find(|&i| !(values[(i, i)] > 0.0)) {
            return Err(GgmError::NonPositiveDiagonal { index: i, value: values[(i, i)] });
        }
        Ok(Self { values, converged: true, iterations: 0 })
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.values
    }
}

/// Column `i` holds `1/σ̂ᵢ²` on the diagonal and `−b̂ᵢ/σ̂ᵢ²` elsewhere.
pub fn cr_raw_estimate(data: &Dataset, params: PenaltyParams, cfg: EnetConfig) -> Result<AsymEstimate> {
    cr_raw_from_covariance(&data.covariance(), data.n(), params, cfg)
}

/// As [`cr_raw_estimate`] from the divisor-`n` covariance and sample size.
pub fn cr_raw_from_covariance(s: &SymMatrix, n: usize, params: PenaltyParams, cfg: EnetConfig) -> Result<AsymEstimate> {
    let p = s.dim();
    let c = s.as_matrix() * n as f64;
    let columns: Vec<(Vec<f64>, f64, usize, bool)> = (0..p)
        .into_par_iter()
        .map(|i| {
            let cp = CrossProducts::node(&c, i, n);
            let (b, iters, conv) = descend(&cp, params, cfg, None);
            let rv = residual_variance(&cp, &b);
            if !(rv > 1e-12 * s.get(i, i)) {
                return Err(GgmError::DegenerateFit(i));
            }
            Ok((b, rv, iters, conv))
        })
        .collect::<Result<_>>()?;

    let mut values = DMatrix::zeros(p, p);
    let mut converged = true;
    let mut iterations = 0;
    for (i, (b, rv, iters, conv)) in columns.into_iter().enumerate() {
        values[(i, i)] = 1.0 / rv;
        for (a, j) in (0..p).filter(|&j| j != i).enumerate() {
            values[(j, i)] = -b[a] / rv;
        }
        converged &= conv;
        iterations = iterations.max(iters);
    }
    Ok(AsymEstimate { values, converged, iterations })
}

pub fn symmetrize_l2(raw: &AsymEstimate) -> SymMatrix {
    SymMatrix::symmetrize(raw.values.clone())
}

/// Keeps the smaller-magnitude entry of each pair; exact magnitude ties keep
/// the upper-triangle entry.
pub fn symmetrize_minel(raw: &AsymEstimate) -> SymMatrix {
    let p = raw.dim();
    let mut out = raw.values.clone();
    for i in 0..p {
        for j in (i + 1)..p {
            let (up, low) = (raw.values[(i, j)], raw.values[(j, i)]);
            let v = if low.abs() < up.abs() { low } else { up };
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    SymMatrix::symmetrize(out)
}

pub fn symmetrize(raw: &AsymEstimate, rule: SymmetrizeRule) -> SymMatrix {
    match rule {
        SymmetrizeRule::L2 => symmetrize_l2(raw),
        SymmetrizeRule::MinEl => symmetrize_minel(raw),
    }
}

/// Full conditional-regression estimate. The result may be indefinite;
/// `positive_definite` reports it and nothing is repaired.
pub fn cr_estimate(
    data: &Dataset,
    params: PenaltyParams,
    rule: SymmetrizeRule,
    cfg: EnetConfig,
) -> Result<EstimationResult> {
    cr_estimate_from_covariance(&data.covariance(), data.n(), params, rule, cfg)
}

pub fn cr_estimate_from_covariance(
    s: &SymMatrix,
    n: usize,
    params: PenaltyParams,
    rule: SymmetrizeRule,
    cfg: EnetConfig,
) -> Result<EstimationResult> {
    let raw = cr_raw_from_covariance(s, n, params, cfg)?;
    let theta_hat = symmetrize(&raw, rule);
    let positive_definite = is_positive_definite(&theta_hat);
    Ok(EstimationResult {
        theta_hat,
        w_hat: None,
        params,
        iterations: raw.iterations,
        final_delta: 0.0,
        converged: raw.converged,
        positive_definite,
        selected_edges: None,
    })
}
