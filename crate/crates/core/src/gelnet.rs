//! Penalized Gaussian likelihood with an elastic-net matrix penalty.
//!
//! Maximizes
//!
//! ```text
//! log det Θ − tr(SΘ) − αλ Σ_{i≠j} |θ_ij| − (1 − α)λ Σ_{i≠j} θ_ij²
//! ```
//!
//! whose stationarity condition is `Θ⁻¹ − S − αλΓ − 2(1 − α)λΘ = 0` off the
//! diagonal and `diag Θ⁻¹ = diag S` (the diagonal is unpenalized).
//!
//! The solver cycles over rows/columns. For block `k`, with the rest of `Θ`
//! held fixed and `A = Θ₁₁⁻¹ = W₁₁ − w₁₂w₁₂ᵀ/w₂₂`, the exact block maximizer is
//!
//! ```text
//! θ₁₂ = argmin ½ θᵀ(s₂₂A + 2(1 − α)λI)θ + s₁₂ᵀθ + αλ|θ|₁
//! θ₂₂ = 1/s₂₂ + θ₁₂ᵀAθ₁₂
//! ```
//!
//! after which `W = Θ⁻¹` is refreshed in `O(p²)`: `w₂₂ = s₂₂`,
//! `w₁₂ = −s₂₂Aθ₁₂ = W₁₁b` and `W₁₁ = A + w₁₂w₁₂ᵀ/s₂₂`, with `b = −θ₁₂/θ₂₂`.
//! These satisfy `θ₂₂ = 1/(w₂₂ − bᵀw₁₂)` and `θ₁₂ = −bθ₂₂`, and the block
//! condition `W₁₁b − s₁₂ + αλγ + 2(1 − α)λθ₂₂b = 0` holds with the updated
//! `W₁₁`. Updating `W₁₁` along with the column matters once the ridge term is
//! present: holding `W₁₁` fixed instead (the glasso dual update) changes `Θ₁₁`
//! behind the other blocks' backs and can settle into a cycle that is not a
//! stationary point.
//!
//! With `α = 1` this is the graphical lasso.

use nalgebra::{DMatrix, DVector};

use crate::enet::soft_threshold;
use crate::error::{GgmError, Result};
use crate::model::{is_positive_definite, EstimationResult, PenaltyParams, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GelnetConfig {
    /// Convergence threshold on the largest absolute change of `W` over a sweep.
    pub delta: f64,
    pub max_sweeps: usize,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    /// Start from `S + εI` when `S` itself is singular.
    pub jitter: bool,
}

impl Default for GelnetConfig {
    fn default() -> Self {
        Self { delta: 1e-4, max_sweeps: 500, inner_tol: 1e-8, inner_max_iter: 10_000, jitter: true }
    }
}

impl GelnetConfig {
    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || self.max_sweeps == 0 || !(self.inner_tol > 0.0) {
            return Err(GgmError::InvalidParameter(format!("invalid gelnet configuration {self:?}")));
        }
        Ok(())
    }
}

/// Starting `(W, Θ)` with `Θ = W⁻¹`: `W = S`, or `S + εI` with
/// `ε = 10⁻³ · mean(diag S)` when `S` is singular and jitter is allowed.
fn initial_pair(s: &SymMatrix, jitter: bool) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    match s.inverse() {
        Ok(inv) => Ok((s.as_matrix().clone(), inv.into_matrix())),
        Err(_) if jitter => {
            let p = s.dim();
            let eps = 1e-3 * s.diagonal().iter().sum::<f64>() / p as f64;
            let shifted = SymMatrix::symmetrize(s.as_matrix() + DMatrix::identity(p, p) * eps);
            let inv = shifted.inverse().map_err(|_| GgmError::Singular)?;
            Ok((shifted.into_matrix(), inv.into_matrix()))
        }
        Err(_) => Err(GgmError::Singular),
    }
}

pub(crate) fn check_covariance(s: &SymMatrix) -> Result<()> {
    if let Some((index, &value)) = s.diagonal().iter().enumerate().find(|(_, &d)| !(d > 0.0)) {
        return Err(GgmError::NonPositiveDiagonal { index, value });
    }
    Ok(())
}

/// Coordinate descent for one block: minimizes
/// `½ θᵀ(s₂₂A + 2(1 − α)λI)θ + s₁₂ᵀθ + αλ|θ|₁` from `init`.
///
/// Each coordinate takes `θ_j = −Soft(c_j, αλ) / H_jj` with `H = s₂₂A + 2(1 − α)λI`
/// and `c_j = Σ_{t≠j} H_jt θ_t + s₁₂[j]`. Returns the solution and the number of passes.
pub fn solve_block(
    a: &DMatrix<f64>,
    s12: &[f64],
    s22: f64,
    params: PenaltyParams,
    init: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize) {
    let q = s12.len();
    debug_assert_eq!(a.nrows(), q);
    let ridge = 2.0 * params.l2();
    let thresh = params.l1();
    let h = |j: usize, t: usize| s22 * a[(j, t)] + if j == t { ridge } else { 0.0 };
    let mut theta = init.to_vec();
    // g = Hθ + s₁₂, so c_j = g_j − H_jj θ_j.
    let mut g: Vec<f64> = (0..q).map(|j| (0..q).map(|t| h(j, t) * theta[t]).sum::<f64>() + s12[j]).collect();
    let mut passes = 0;
    while passes < max_iter {
        passes += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..q {
            let hjj = h(j, j);
            debug_assert!(hjj > 0.0, "non-positive block curvature {hjj} at coordinate {j}");
            let c = g[j] - hjj * theta[j];
            let new = -soft_threshold(c, thresh) / hjj;
            let delta = new - theta[j];
            if delta != 0.0 {
                for t in 0..q {
                    g[t] += h(t, j) * delta;
                }
                theta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < tol {
            break;
        }
    }
    (theta, passes)
}

/// Penalized log-likelihood being maximized (diagonal unpenalized).
pub fn objective(theta: &SymMatrix, s: &SymMatrix, params: PenaltyParams) -> f64 {
    let Some(logdet) = theta.log_det() else {
        return f64::NEG_INFINITY;
    };
    let p = theta.dim();
    let (mut l1, mut l2) = (0.0, 0.0);
    for i in 0..p {
        for j in 0..p {
            if i != j {
                let v = theta.get(i, j);
                l1 += v.abs();
                l2 += v * v;
            }
        }
    }
    logdet - theta.trace_product(s) - params.l1() * l1 - params.l2() * l2
}

/// Per-sweep trace of an estimation run, used by diagnostics and tests.
#[derive(Debug, Clone, Default)]
pub struct SweepTrace {
    pub deltas: Vec<f64>,
    pub objectives: Vec<f64>,
}

/// Estimates `Θ` from the covariance `s`.
pub fn gelnet_estimate(s: &SymMatrix, params: PenaltyParams, cfg: &GelnetConfig) -> Result<EstimationResult> {
    gelnet_estimate_traced(s, params, cfg, None)
}

/// As [`gelnet_estimate`], optionally recording sweep deltas and objective values.
pub fn gelnet_estimate_traced(
    s: &SymMatrix,
    params: PenaltyParams,
    cfg: &GelnetConfig,
    mut trace: Option<&mut SweepTrace>,
) -> Result<EstimationResult> {
    cfg.validate()?;
    check_covariance(s)?;
    let p = s.dim();
    let sm = s.as_matrix();
    let (mut w, mut theta) = initial_pair(s, cfg.jitter)?;
    let q = p - 1;
    let mut a = DMatrix::zeros(q, q);
    let mut s12 = vec![0.0; q];
    let mut t12 = vec![0.0; q];

    let mut sweeps = 0;
    let mut final_delta = f64::INFINITY;
    let mut converged = false;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let w_old = w.clone();
        for k in 0..p {
            let others: Vec<usize> = (0..p).filter(|&i| i != k).collect();
            let w22 = w[(k, k)];
            for (x, &i) in others.iter().enumerate() {
                s12[x] = sm[(i, k)];
                t12[x] = theta[(i, k)];
                for (y, &j) in others.iter().enumerate() {
                    a[(x, y)] = w[(i, j)] - w[(i, k)] * w[(j, k)] / w22;
                }
            }
            let s22 = sm[(k, k)];
            let (t_new, _) = solve_block(&a, &s12, s22, params, &t12, cfg.inner_tol, cfg.inner_max_iter);
            let at = &a * DVector::from_column_slice(&t_new);
            let quad: f64 = t_new.iter().zip(at.iter()).map(|(x, y)| x * y).sum();
            let theta22 = 1.0 / s22 + quad;
            if !(theta22 > 0.0) || !theta22.is_finite() {
                return Err(GgmError::NotPositiveDefinite);
            }
            let w12 = -at * s22;
            theta[(k, k)] = theta22;
            w[(k, k)] = s22;
            for (x, &i) in others.iter().enumerate() {
                theta[(i, k)] = t_new[x];
                theta[(k, i)] = t_new[x];
                w[(i, k)] = w12[x];
                w[(k, i)] = w12[x];
                for (y, &j) in others.iter().enumerate() {
                    w[(i, j)] = a[(x, y)] + w12[x] * w12[y] / s22;
                }
            }
        }
        final_delta = (&w - &w_old).amax();
        if let Some(tr) = trace.as_deref_mut() {
            tr.deltas.push(final_delta);
            tr.objectives.push(objective(&SymMatrix::symmetrize(theta.clone()), s, params));
        }
        if final_delta < cfg.delta {
            converged = true;
            break;
        }
    }

    let theta_hat = SymMatrix::symmetrize(theta);
    let positive_definite = is_positive_definite(&theta_hat);
    Ok(EstimationResult {
        theta_hat,
        w_hat: Some(SymMatrix::symmetrize(w)),
        params,
        iterations: sweeps,
        final_delta,
        converged: converged && positive_definite,
        positive_definite,
        selected_edges: None,
    })
}
