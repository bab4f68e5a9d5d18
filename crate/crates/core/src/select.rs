//! Tuning-parameter grids, BIC and k-fold cross-validation scores, and
//! selection of the optimal `(α, λ)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GgmError, Result};
use crate::estimator::{Estimator, EstimatorConfig};
use crate::model::{edge_set_of, Dataset, PenaltyParams, SymMatrix, ZERO_TOL};

/// Relative score difference under which two grid points count as tied.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
}

/// `count` equally spaced values from 0 to `max` inclusive.
pub fn linspace(count: usize, max: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|k| max * k as f64 / (count - 1) as f64).collect(),
    }
}

impl GridSpec {
    pub fn new(alphas: Vec<f64>, lambdas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() || lambdas.is_empty() {
            return Err(GgmError::InvalidParameter("grid axes must be non-empty".into()));
        }
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !sorted(&alphas) || !sorted(&lambdas) {
            return Err(GgmError::InvalidParameter("grid values must be strictly ascending".into()));
        }
        if alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(GgmError::InvalidParameter("alphas must lie in [0, 1]".into()));
        }
        if lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(GgmError::InvalidParameter("lambdas must be finite and >= 0".into()));
        }
        Ok(Self { alphas, lambdas })
    }

    /// `alpha_count` values on [0, 1] by `lambda_count` values on [0, `lambda_max`].
    pub fn uniform(alpha_count: usize, lambda_count: usize, lambda_max: f64) -> Result<Self> {
        Self::new(linspace(alpha_count, 1.0), linspace(lambda_count, lambda_max))
    }

    /// Same λ axis with `α` restricted to one value.
    pub fn with_fixed_alpha(&self, alpha: f64) -> Self {
        Self { alphas: vec![alpha], lambdas: self.lambdas.clone() }
    }

    pub fn len(&self) -> usize {
        self.alphas.len() * self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid point at α-major flat index.
    pub fn point(&self, flat: usize) -> PenaltyParams {
        let (a, l) = (flat / self.lambdas.len(), flat % self.lambdas.len());
        PenaltyParams { alpha: self.alphas[a], lambda: self.lambdas[l] }
    }
}

/// 41 values of α on [0, 1] by 101 values of λ on [0, 0.4].
pub fn default_grid() -> GridSpec {
    GridSpec::uniform(41, 101, 0.4).expect("static grid is valid")
}

/// `−n [log det Θ̂ − tr(SΘ̂)] + log(n) · k`, `k` the number of nonzero
/// upper-triangle off-diagonal entries. Indefinite `Θ̂` scores `+∞`.
pub fn bic_score(theta_hat: &SymMatrix, s: &SymMatrix, n: usize) -> f64 {
    let Some(logdet) = theta_hat.log_det() else {
        return f64::INFINITY;
    };
    let k = edge_set_of(theta_hat, ZERO_TOL).len() as f64;
    let nf = n as f64;
    -nf * (logdet - theta_hat.trace_product(s)) + nf.ln() * k
}

/// Negative Gaussian predictive log-likelihood `−[log det Θ̂ − tr(S_test Θ̂)]`.
pub fn predictive_loss(theta_hat: &SymMatrix, s_test: &SymMatrix) -> f64 {
    match theta_hat.log_det() {
        Some(logdet) => -(logdet - theta_hat.trace_product(s_test)),
        None => f64::INFINITY,
    }
}

/// Held-out index sets: a seeded shuffle of `0..n` cut into `folds` contiguous blocks.
pub fn fold_partition(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 || n < folds {
        return Err(GgmError::InvalidParameter(format!("need 2 <= folds <= n, got folds = {folds}, n = {n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / folds;
    let extra = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        let mut block = idx[start..start + len].to_vec();
        block.sort_unstable();
        out.push(block);
        start += len;
    }
    Ok(out)
}

/// Divisor-`|rows|` second moment of the chosen rows about `means`.
fn second_moment(data: &Dataset, rows: &[usize], means: &nalgebra::DVector<f64>) -> SymMatrix {
    let p = data.p();
    let mut m = nalgebra::DMatrix::zeros(p, p);
    for &r in rows {
        let d = data.values().row(r).transpose() - means;
        m += &d * d.transpose();
    }
    SymMatrix::symmetrize(m / rows.len() as f64)
}

/// Sufficient statistics of each train/test split.
#[derive(Debug, Clone)]
pub struct CvFolds {
    /// (train covariance, train size, test covariance about the train means)
    splits: Vec<(SymMatrix, usize, SymMatrix)>,
}

impl CvFolds {
    pub fn new(data: &Dataset, folds: usize, seed: u64) -> Result<Self> {
        let parts = fold_partition(data.n(), folds, seed)?;
        let mut splits = Vec::with_capacity(folds);
        for test in &parts {
            let mut in_test = vec![false; data.n()];
            for &i in test {
                in_test[i] = true;
            }
            let train_rows: Vec<usize> = (0..data.n()).filter(|&i| !in_test[i]).collect();
            let train = data.select_rows(&train_rows)?;
            let means = train.means();
            let s_test = second_moment(data, test, &means);
            splits.push((train.covariance(), train.n(), s_test));
        }
        Ok(Self { splits })
    }

    /// Per-fold losses; `+∞` where the estimator fails.
    pub fn fold_scores(&self, estimator: Estimator, params: PenaltyParams, cfg: &EstimatorConfig) -> Vec<f64> {
        self.splits
            .iter()
            .map(|(s_train, n_train, s_test)| {
                match estimator.estimate_from_covariance(s_train, *n_train, params, cfg) {
                    Ok(r) => predictive_loss(&r.theta_hat, s_test),
                    Err(_) => f64::INFINITY,
                }
            })
            .collect()
    }

    pub fn score(&self, estimator: Estimator, params: PenaltyParams, cfg: &EstimatorConfig) -> f64 {
        let scores = self.fold_scores(estimator, params, cfg);
        scores.iter().sum::<f64>() / scores.len() as f64
    }
}

/// Mean held-out loss over `folds` seeded folds.
pub fn cv_score(
    data: &Dataset,
    estimator: Estimator,
    cfg: &EstimatorConfig,
    params: PenaltyParams,
    folds: usize,
    seed: u64,
) -> Result<f64> {
    Ok(CvFolds::new(data, folds, seed)?.score(estimator, params, cfg))
}

/// Argmin of an α-major score vector; near-ties go to the smallest α, then the smallest λ.
pub fn select_best(scores: &[f64], grid: &GridSpec) -> Result<PenaltyParams> {
    if scores.len() != grid.len() {
        return Err(GgmError::Dimension(format!("{} scores for {} grid points", scores.len(), grid.len())));
    }
    let min = scores.iter().copied().filter(|s| s.is_finite()).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(GgmError::NoFiniteScore);
    }
    let slack = TIE_TOL * min.abs();
    // α-major order with ascending axes: the first tied point has the smallest α, then λ.
    let flat = scores.iter().position(|&s| s.is_finite() && s - min <= slack).expect("minimum is attained");
    Ok(grid.point(flat))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    #[serde(rename = "BIC")]
    Bic,
    #[serde(rename = "CV")]
    Cv,
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::Bic => "bic",
            Criterion::Cv => "cv",
        }
    }

    /// Plot marker used for this criterion's selected ROC point.
    pub fn marker(&self) -> &'static str {
        match self {
            Criterion::Bic => "o",
            Criterion::Cv => "x",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub estimator: Estimator,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// α-major; `None` marks a failed or infinite score.
    pub scores: Vec<Option<f64>>,
    pub best: PenaltyParams,
    pub best_score: f64,
    pub criterion: Criterion,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub folds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

impl SelectionReport {
    pub fn grid(&self) -> GridSpec {
        GridSpec { alphas: self.alphas.clone(), lambdas: self.lambdas.clone() }
    }

    pub fn score_values(&self) -> Vec<f64> {
        self.scores.iter().map(|s| s.unwrap_or(f64::INFINITY)).collect()
    }
}

/// How grid points are scored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scoring {
    Bic,
    Cv { folds: usize, seed: u64 },
}

/// Scores every grid point (in parallel) and picks the optimum.
///
/// Estimators with a pinned `α` are evaluated on that single α row.
pub fn select(
    data: &Dataset,
    estimator: Estimator,
    grid: &GridSpec,
    scoring: Scoring,
    cfg: &EstimatorConfig,
) -> Result<SelectionReport> {
    let grid = match estimator.fixed_alpha() {
        Some(a) => grid.with_fixed_alpha(a),
        None => grid.clone(),
    };
    let scores: Vec<f64> = match scoring {
        Scoring::Bic => {
            let s = data.covariance();
            let n = data.n();
            (0..grid.len())
                .into_par_iter()
                .map(|k| match estimator.estimate_from_covariance(&s, n, grid.point(k), cfg) {
                    Ok(r) => bic_score(&r.theta_hat, &s, n),
                    Err(_) => f64::INFINITY,
                })
                .collect()
        }
        Scoring::Cv { folds, seed } => {
            let cv = CvFolds::new(data, folds, seed)?;
            (0..grid.len()).into_par_iter().map(|k| cv.score(estimator, grid.point(k), cfg)).collect()
        }
    };
    let best = select_best(&scores, &grid)?;
    let best_score = scores.iter().copied().filter(|s| s.is_finite()).fold(f64::INFINITY, f64::min);
    let (criterion, folds, seed) = match scoring {
        Scoring::Bic => (Criterion::Bic, None, None),
        Scoring::Cv { folds, seed } => (Criterion::Cv, Some(folds), Some(seed)),
    };
    Ok(SelectionReport {
        estimator,
        alphas: grid.alphas,
        lambdas: grid.lambdas,
        scores: scores.iter().map(|&s| s.is_finite().then_some(s)).collect(),
        best,
        best_score,
        criterion,
        folds,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn default_grid_shape() {
        let g = default_grid();
        assert_eq!(g.alphas.len(), 41);
        assert_eq!(g.lambdas.len(), 101);
        assert_eq!(g.len(), 4141);
        assert_eq!(g.alphas[0], 0.0);
        assert_eq!(g.alphas[40], 1.0);
        assert_eq!(g.lambdas[0], 0.0);
        assert_eq!(g.lambdas[100], 0.4);
        for w in g.alphas.windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], 0.025, epsilon = 1e-12);
        }
        for w in g.lambdas.windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], 0.004, epsilon = 1e-12);
        }
    }

    #[test]
    fn bic_identity() {
        for p in 1..5 {
            let i = SymMatrix::identity(p);
            assert_abs_diff_eq!(bic_score(&i, &i, 100), 100.0 * p as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn bic_penalizes_density() {
        let s = SymMatrix::identity(2);
        let sparse = SymMatrix::identity(2);
        // an extra edge with vanishing weight leaves the likelihood unchanged to rounding
        let dense = SymMatrix::from_rows(&[vec![1.0, 1e-9], vec![1e-9, 1.0]]).unwrap();
        assert!(bic_score(&dense, &s, 50) > bic_score(&sparse, &s, 50));
    }

    #[test]
    fn bic_indefinite_is_infinite() {
        let t = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(bic_score(&t, &SymMatrix::identity(2), 10), f64::INFINITY);
    }

    #[test]
    fn select_best_tie_breaks() {
        let grid = GridSpec::new(vec![0.5, 1.0], vec![0.1, 0.2]).unwrap();
        // (0.5,0.1) (0.5,0.2) (1.0,0.1) (1.0,0.2)
        assert_eq!(select_best(&[3.0, 1.0, 2.0, 4.0], &grid).unwrap(), PenaltyParams { alpha: 0.5, lambda: 0.2 });
        assert_eq!(select_best(&[1.0, 2.0, 1.0, 2.0], &grid).unwrap(), PenaltyParams { alpha: 0.5, lambda: 0.1 });
        assert_eq!(select_best(&[2.0, 2.0, 1.0, 1.0], &grid).unwrap(), PenaltyParams { alpha: 1.0, lambda: 0.1 });
        assert_eq!(
            select_best(&[5.0, 1.0, 1.0 + 1e-15, 9.0], &grid).unwrap(),
            PenaltyParams { alpha: 0.5, lambda: 0.2 }
        );
        let inf = f64::INFINITY;
        assert!(matches!(select_best(&[inf; 4], &grid), Err(GgmError::NoFiniteScore)));
    }

    #[test]
    fn folds_partition_rows() {
        let f = fold_partition(23, 5, 9).unwrap();
        assert_eq!(f.len(), 5);
        let mut all: Vec<usize> = f.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert!(f.iter().all(|b| b.len() == 4 || b.len() == 5));
        assert_eq!(f, fold_partition(23, 5, 9).unwrap());
        assert!(fold_partition(3, 5, 0).is_err());
        assert!(fold_partition(10, 1, 0).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(vec![0.5, 0.2], vec![0.1]).is_err());
        assert!(GridSpec::new(vec![1.5], vec![0.1]).is_err());
        assert!(GridSpec::new(vec![0.5], vec![-0.1]).is_err());
    }
}
