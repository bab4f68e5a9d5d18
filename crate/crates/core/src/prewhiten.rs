//! AR(1)-GARCH(1,1) filtering of return series.
//!
//! Model: `r_t = c + φ r_{t−1} + ε_t`, `ε_t = σ_t z_t`,
//! `σ_t² = ω + a ε_{t−1}² + b σ_{t−1}²`. The recursion starts from
//! `σ₁² = Var(r)` and `ε₁ = r₁ − mean(r)`; the likelihood and the
//! standardized residuals cover `t = 2..T`.
//!
//! Parameters are fitted by Gaussian quasi-maximum likelihood with a
//! Nelder–Mead search over an unconstrained reparametrization
//! (`atanh φ`, `ln ω`, logistic persistence `a + b` and logistic share `a / (a + b)`).

use argmin::core::{CostFunction, Executor, State, TerminationReason};
use argmin::solver::neldermead::NelderMead;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GgmError, Result};
use crate::model::Dataset;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
/// Shortest series accepted by [`fit_ar1_garch11`].
pub const MIN_OBSERVATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArGarchParams {
    pub c: f64,
    pub phi: f64,
    pub omega: f64,
    pub a: f64,
    pub b: f64,
}

impl ArGarchParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.omega > 0.0 && self.a >= 0.0 && self.b >= 0.0 && self.a + self.b < 1.0 && self.phi.abs() < 1.0;
        if ok && self.c.is_finite() {
            Ok(())
        } else {
            Err(GgmError::InvalidParameter(format!("AR-GARCH parameters outside the stationary region: {self:?}")))
        }
    }

    fn to_free(self) -> Vec<f64> {
        let persistence = self.a + self.b;
        let share = if persistence > 0.0 { self.a / persistence } else { 0.5 };
        vec![self.c, self.phi.atanh(), self.omega.ln(), logit(persistence), logit(share)]
    }

    fn from_free(x: &[f64]) -> Self {
        let persistence = logistic(x[3]);
        let a = persistence * logistic(x[4]);
        ArGarchParams { c: x[0], phi: x[1].tanh(), omega: x[2].exp(), a, b: persistence - a }
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-9, 1.0 - 1e-9);
    (p / (1.0 - p)).ln()
}

fn mean_var(r: &[f64]) -> (f64, f64) {
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    let var = r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Residuals `ε_t` and variances `σ_t²` for `t = 1..T` (index 0 is the start-up value).
fn filter(r: &[f64], params: &ArGarchParams) -> (Vec<f64>, Vec<f64>) {
    let (mean, var) = mean_var(r);
    let mut eps = Vec::with_capacity(r.len());
    let mut sig2 = Vec::with_capacity(r.len());
    eps.push(r[0] - mean);
    sig2.push(var);
    for t in 1..r.len() {
        let s2 = params.omega + params.a * eps[t - 1] * eps[t - 1] + params.b * sig2[t - 1];
        sig2.push(s2);
        eps.push(r[t] - params.c - params.phi * r[t - 1]);
    }
    (eps, sig2)
}

/// Gaussian quasi log-likelihood over `t = 2..T`.
pub fn log_likelihood(r: &[f64], params: &ArGarchParams) -> f64 {
    let (eps, sig2) = filter(r, params);
    -0.5 * (1..r.len()).map(|t| LN_2PI + sig2[t].ln() + eps[t] * eps[t] / sig2[t]).sum::<f64>()
}

/// `z_t = ε̂_t / σ̂_t` for `t = 2..T`; always `T − 1` values.
pub fn standardized_residuals(r: &[f64], params: &ArGarchParams) -> Vec<f64> {
    let (eps, sig2) = filter(r, params);
    (1..r.len()).map(|t| eps[t] / sig2[t].sqrt()).collect()
}

/// Raw AR residuals `ε̂_t` for `t = 2..T`.
pub fn raw_residuals(r: &[f64], params: &ArGarchParams) -> Vec<f64> {
    let (eps, _) = filter(r, params);
    eps[1..].to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub params: ArGarchParams,
    pub loglik: f64,
    /// Log-likelihood at the starting point of the search.
    pub start_loglik: f64,
    pub iterations: u64,
    pub converged: bool,
    /// Persistence pressed against 1 or a coefficient pressed against 0.
    pub at_boundary: bool,
}

struct NegLogLik<'a> {
    r: &'a [f64],
}

impl CostFunction for NegLogLik<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let ll = log_likelihood(self.r, &ArGarchParams::from_free(x));
        Ok(if ll.is_finite() { -ll } else { f64::MAX })
    }
}

/// Starting point `(c, φ, ω, a, b) = (mean, 0, 0.1·Var, 0.05, 0.9)`.
pub fn starting_point(r: &[f64]) -> ArGarchParams {
    let (mean, var) = mean_var(r);
    ArGarchParams { c: mean, phi: 0.0, omega: 0.1 * var, a: 0.05, b: 0.9 }
}

/// Quasi-maximum-likelihood AR(1)-GARCH(1,1) fit. Deterministic.
pub fn fit_ar1_garch11(r: &[f64]) -> Result<GarchFit> {
    if r.len() < MIN_OBSERVATIONS {
        return Err(GgmError::InvalidData(format!("need at least {MIN_OBSERVATIONS} observations, got {}", r.len())));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(GgmError::InvalidData("non-finite return".into()));
    }
    let (_, var) = mean_var(r);
    if !(var > 0.0) {
        return Err(GgmError::InvalidData("series has zero variance".into()));
    }
    let start = starting_point(r);
    let start_loglik = log_likelihood(r, &start);
    let sd = var.sqrt();

    let mut best = start.to_free();
    let mut iterations = 0;
    let mut converged = false;
    // Restarting from the incumbent re-inflates a collapsed simplex.
    for round in 0..4 {
        let steps = [0.1 * sd, 0.2, 0.5, 0.5, 0.5];
        let simplex: Vec<Vec<f64>> = std::iter::once(best.clone())
            .chain((0..5).map(|k| {
                let mut v = best.clone();
                v[k] += steps[k];
                v
            }))
            .collect();
        let solver =
            NelderMead::new(simplex).with_sd_tolerance(1e-8).map_err(|e| GgmError::Optimizer(e.to_string()))?;
        let res = Executor::new(NegLogLik { r }, solver)
            .configure(|s| s.max_iters(4000))
            .run()
            .map_err(|e| GgmError::Optimizer(e.to_string()))?;
        let state = res.state();
        iterations += state.get_iter();
        let candidate = state.get_best_param().cloned().unwrap_or_else(|| best.clone());
        let cost = |x: &Vec<f64>| NegLogLik { r }.cost(x).expect("cost is infallible");
        let (cand_cost, best_cost) = (cost(&candidate), cost(&best));
        let improved = cand_cost < best_cost - 1e-9;
        if cand_cost <= best_cost {
            best = candidate;
        }
        converged = matches!(state.get_termination_reason(), Some(TerminationReason::SolverConverged));
        if round > 0 && !improved {
            break;
        }
    }

    let params = ArGarchParams::from_free(&best);
    let loglik = log_likelihood(r, &params);
    let at_boundary = params.a + params.b > 0.999 || params.a < 1e-6 || params.b < 1e-6;
    Ok(GarchFit { params, loglik, start_loglik, iterations, converged, at_boundary })
}

/// Which residuals feed the network estimation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualKind {
    #[default]
    Standardized,
    Raw,
}

/// Fits every column independently and returns the `(n − 1) × p` residual
/// dataset with the per-column fits.
pub fn prewhiten_dataset(data: &Dataset, kind: ResidualKind) -> Result<(Dataset, Vec<GarchFit>)> {
    let (n, p) = (data.n(), data.p());
    let columns: Vec<Vec<f64>> = (0..p).map(|j| data.values().column(j).iter().copied().collect()).collect();
    let fits: Vec<GarchFit> = columns.par_iter().map(|r| fit_ar1_garch11(r)).collect::<Result<_>>()?;
    let mut out = DMatrix::zeros(n - 1, p);
    for (j, (r, fit)) in columns.iter().zip(&fits).enumerate() {
        let res = match kind {
            ResidualKind::Standardized => standardized_residuals(r, &fit.params),
            ResidualKind::Raw => raw_residuals(r, &fit.params),
        };
        out.column_mut(j).copy_from_slice(&res);
    }
    let labels = data.labels().map(|l| l.to_vec());
    Ok((Dataset::new(out, labels)?, fits))
}

/// Simulates `t` observations after a 500-step burn-in, started at the
/// unconditional variance.
pub fn simulate_ar1_garch11(params: &ArGarchParams, t: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Vec::with_capacity(t);
    let mut prev_r = 0.0;
    let mut prev_eps = 0.0;
    let mut prev_s2 = params.omega / (1.0 - params.a - params.b);
    for _ in 0..(t + 500) {
        let s2 = params.omega + params.a * prev_eps * prev_eps + params.b * prev_s2;
        let z: f64 = StandardNormal.sample(&mut rng);
        let eps = s2.sqrt() * z;
        let x = params.c + params.phi * prev_r + eps;
        r.push(x);
        prev_r = x;
        prev_eps = eps;
        prev_s2 = s2;
    }
    r.split_off(500)
}
