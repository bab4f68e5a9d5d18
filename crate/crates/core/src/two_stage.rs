//! Two-stage estimator: elastic-net neighbourhood selection picks the
//! support, then the Gaussian likelihood is maximized with every entry
//! outside that support pinned to zero.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enet::{descend, CrossProducts, EnetConfig};
use crate::error::{GgmError, Result};
use crate::gelnet::check_covariance;
use crate::model::{is_positive_definite, Dataset, EdgeSet, EstimationResult, PenaltyParams, SymMatrix, ZERO_TOL};

/// How the two directed regression decisions for a pair are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeRule {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStageConfig {
    pub enet: EnetConfig,
    /// Threshold on the largest change of `W` across a sweep of the constrained fit.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for TwoStageConfig {
    fn default() -> Self {
        Self { enet: EnetConfig::default(), tol: 1e-6, max_sweeps: 500 }
    }
}

/// `coef[(j, i)]` is the coefficient of variable `j` in the regression of `i`.
pub fn node_coefficients(s: &SymMatrix, n: usize, params: PenaltyParams, cfg: EnetConfig) -> (DMatrix<f64>, bool) {
    let p = s.dim();
    let c = s.as_matrix() * n as f64;
    let fits: Vec<(Vec<f64>, bool)> = (0..p)
        .into_par_iter()
        .map(|i| {
            let (b, _, conv) = descend(&CrossProducts::node(&c, i, n), params, cfg, None);
            (b, conv)
        })
        .collect();
    let mut coef = DMatrix::zeros(p, p);
    let mut converged = true;
    for (i, (b, conv)) in fits.into_iter().enumerate() {
        for (a, j) in (0..p).filter(|&j| j != i).enumerate() {
            coef[(j, i)] = b[a];
        }
        converged &= conv;
    }
    (coef, converged)
}

/// Combines directed nonzero patterns (`|b| > 1e-10`) into an undirected edge set.
pub fn combine_edges(coef: &DMatrix<f64>, rule: EdgeRule) -> EdgeSet {
    let p = coef.nrows();
    let mut edges = EdgeSet::empty(p);
    for i in 0..p {
        for j in (i + 1)..p {
            let a = coef[(j, i)].abs() > ZERO_TOL;
            let b = coef[(i, j)].abs() > ZERO_TOL;
            let keep = match rule {
                EdgeRule::And => a && b,
                EdgeRule::Or => a || b,
            };
            if keep {
                edges.insert(i, j).expect("indices in range");
            }
        }
    }
    edges
}

pub fn neighborhood_select(data: &Dataset, params: PenaltyParams, rule: EdgeRule, cfg: EnetConfig) -> EdgeSet {
    let (coef, _) = node_coefficients(&data.covariance(), data.n(), params, cfg);
    combine_edges(&coef, rule)
}

/// Maximizes `log det Θ − tr(SΘ)` subject to `θ_ij = 0` for pairs outside `edges`.
///
/// Cycles over columns; for column `k` the free part of `w₁₂` solves
/// `W₁₁* β* = s₁₂*` on the neighbours of `k` and `w₁₂ = W₁₁ β`. `Θ` is read off
/// the final `β`s. Off-pattern entries come out exactly zero.
pub fn constrained_mle(s: &SymMatrix, edges: &EdgeSet, tol: f64, max_sweeps: usize) -> Result<EstimationResult> {
    check_covariance(s)?;
    let p = s.dim();
    if edges.p() != p {
        return Err(GgmError::Dimension(format!("edge set over {} nodes, covariance is {p}x{p}", edges.p())));
    }
    let s = if is_positive_definite(s) {
        s.clone()
    } else {
        let eps = 1e-3 * s.diagonal().iter().sum::<f64>() / p as f64;
        SymMatrix::symmetrize(s.as_matrix() + DMatrix::identity(p, p) * eps)
    };
    let sm = s.as_matrix();
    let neighbours = edges.neighbours();
    let mut w = sm.clone();
    let mut betas: Vec<Vec<f64>> = vec![vec![0.0; p]; p];

    let mut sweeps = 0;
    let mut final_delta = f64::INFINITY;
    let mut converged = false;
    while sweeps < max_sweeps {
        sweeps += 1;
        let w_old = w.clone();
        for k in 0..p {
            let free = &neighbours[k];
            let mut beta = vec![0.0; p];
            if !free.is_empty() {
                let m = free.len();
                let w_free = DMatrix::from_fn(m, m, |a, b| w[(free[a], free[b])]);
                let s_free = DVector::from_fn(m, |a, _| sm[(free[a], k)]);
                let sol = w_free
                    .clone()
                    .cholesky()
                    .map(|c| c.solve(&s_free))
                    .or_else(|| w_free.lu().solve(&s_free))
                    .ok_or(GgmError::Singular)?;
                for (a, &i) in free.iter().enumerate() {
                    beta[i] = sol[a];
                }
            }
            for i in (0..p).filter(|&i| i != k) {
                let v: f64 = free.iter().map(|&t| w[(i, t)] * beta[t]).sum();
                w[(i, k)] = v;
                w[(k, i)] = v;
            }
            betas[k] = beta;
        }
        final_delta = (&w - &w_old).amax();
        if final_delta < tol {
            converged = true;
            break;
        }
    }

    let mut theta = DMatrix::zeros(p, p);
    for k in 0..p {
        let beta = &betas[k];
        let w12_beta: f64 = neighbours[k].iter().map(|&i| w[(i, k)] * beta[i]).sum();
        let schur = w[(k, k)] - w12_beta;
        if !(schur > 0.0) {
            return Err(GgmError::NotPositiveDefinite);
        }
        let theta22 = 1.0 / schur;
        theta[(k, k)] = theta22;
        for &i in &neighbours[k] {
            theta[(i, k)] = -beta[i] * theta22;
        }
    }
    let theta_hat = SymMatrix::symmetrize(theta);
    let positive_definite = is_positive_definite(&theta_hat);
    Ok(EstimationResult {
        theta_hat,
        w_hat: Some(SymMatrix::symmetrize(w)),
        params: PenaltyParams { alpha: 1.0, lambda: 0.0 },
        iterations: sweeps,
        final_delta,
        converged: converged && positive_definite,
        positive_definite,
        selected_edges: Some(edges.clone()),
    })
}

pub fn two_stage_estimate(
    data: &Dataset,
    params: PenaltyParams,
    rule: EdgeRule,
    cfg: &TwoStageConfig,
) -> Result<EstimationResult> {
    two_stage_from_covariance(&data.covariance(), data.n(), params, rule, cfg)
}

pub fn two_stage_from_covariance(
    s: &SymMatrix,
    n: usize,
    params: PenaltyParams,
    rule: EdgeRule,
    cfg: &TwoStageConfig,
) -> Result<EstimationResult> {
    let (coef, selection_converged) = node_coefficients(s, n, params, cfg.enet);
    let edges = combine_edges(&coef, rule);
    let mut result = constrained_mle(s, &edges, cfg.tol, cfg.max_sweeps)?;
    result.params = params;
    result.converged &= selection_converged;
    Ok(result)
}
