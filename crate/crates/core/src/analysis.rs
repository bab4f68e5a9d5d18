//! Network measures on partial-correlation graphs, steady-state shock
//! propagation and rolling-window strength.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GgmError, Result};
use crate::estimator::{Estimator, EstimatorConfig};
use crate::model::{partial_correlation, Dataset, EstimationResult, SymMatrix, ZERO_TOL};
use crate::prewhiten::{prewhiten_dataset, ResidualKind};
use crate::select::{select, GridSpec, Scoring, SelectionReport};
use crate::two_stage::EdgeRule;

/// How edge weights enter node strength.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrengthMode {
    #[default]
    Absolute,
    Signed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMeasures {
    #[serde(rename = "Degree")]
    pub mean_degree: f64,
    #[serde(rename = "Distance")]
    pub mean_distance: f64,
    #[serde(rename = "Eccentricity")]
    pub mean_eccentricity: f64,
    #[serde(rename = "Clustering")]
    pub mean_clustering: f64,
    #[serde(rename = "Strength")]
    pub mean_strength: f64,
    pub degree: Vec<usize>,
    pub eccentricity: Vec<usize>,
    pub clustering: Vec<f64>,
    pub strength: Vec<f64>,
    /// Some pair of nodes has no connecting path.
    pub disconnected: bool,
}

fn mean(v: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = v.len();
    if n == 0 {
        0.0
    } else {
        v.sum::<f64>() / n as f64
    }
}

/// Measures on the unweighted graph `|p_ij| > tol`, strength from the weights.
///
/// Distances and eccentricities only consider reachable nodes; the mean
/// distance averages over connected ordered pairs. Nodes with fewer than two
/// neighbours have clustering 0.
pub fn graph_measures(p_mat: &SymMatrix, tol: f64, mode: StrengthMode) -> NetworkMeasures {
    let p = p_mat.dim();
    let mut graph = UnGraph::<(), ()>::with_capacity(p, 0);
    let nodes: Vec<NodeIndex> = (0..p).map(|_| graph.add_node(())).collect();
    let mut adj = vec![vec![false; p]; p];
    let mut strength = vec![0.0; p];
    for i in 0..p {
        for j in (i + 1)..p {
            let w = p_mat.get(i, j);
            if w.abs() > tol {
                graph.add_edge(nodes[i], nodes[j], ());
                adj[i][j] = true;
                adj[j][i] = true;
                let w = match mode {
                    StrengthMode::Absolute => w.abs(),
                    StrengthMode::Signed => w,
                };
                strength[i] += w;
                strength[j] += w;
            }
        }
    }

    let neighbours: Vec<Vec<usize>> = (0..p).map(|i| (0..p).filter(|&j| adj[i][j]).collect()).collect();
    let degree: Vec<usize> = neighbours.iter().map(Vec::len).collect();

    let mut eccentricity = vec![0; p];
    let mut distance_sum = 0usize;
    let mut pairs = 0usize;
    for (i, &start) in nodes.iter().enumerate() {
        let dist = dijkstra(&graph, start, None, |_| 1usize);
        pairs += dist.len() - 1;
        distance_sum += dist.values().sum::<usize>();
        eccentricity[i] = dist.values().copied().max().unwrap_or(0);
    }
    let disconnected = pairs < p * (p - 1);

    let clustering: Vec<f64> = neighbours
        .iter()
        .map(|nb| {
            let k = nb.len();
            if k < 2 {
                return 0.0;
            }
            let links = nb
                .iter()
                .enumerate()
                .flat_map(|(a, &u)| nb[a + 1..].iter().map(move |&v| (u, v)))
                .filter(|&(u, v)| adj[u][v])
                .count();
            2.0 * links as f64 / (k * (k - 1)) as f64
        })
        .collect();

    NetworkMeasures {
        mean_degree: mean(degree.iter().map(|&d| d as f64)),
        mean_distance: if pairs == 0 { 0.0 } else { distance_sum as f64 / pairs as f64 },
        mean_eccentricity: mean(eccentricity.iter().map(|&e| e as f64)),
        mean_clustering: mean(clustering.iter().copied()),
        mean_strength: mean(strength.iter().copied()),
        degree,
        eccentricity,
        clustering,
        strength,
        disconnected,
    }
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_radius(m: &SymMatrix) -> f64 {
    SymmetricEigen::new(m.as_matrix().clone()).eigenvalues.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Steady state `s = (I − P)⁻¹ e` of a shock `e`.
pub fn shock_diffusion(p_mat: &SymMatrix, e: &[f64]) -> Result<Vec<f64>> {
    let p = p_mat.dim();
    if e.len() != p {
        return Err(GgmError::Dimension(format!("shock has length {}, network has {p} nodes", e.len())));
    }
    let rho = spectral_radius(p_mat);
    if !(rho < 1.0) {
        return Err(GgmError::Divergent(rho));
    }
    let a = DMatrix::identity(p, p) - p_mat.as_matrix();
    let s = a.lu().solve(&DVector::from_column_slice(e)).ok_or(GgmError::Singular)?;
    Ok(s.iter().copied().collect())
}

/// Model selection followed by a refit at the selected penalty.
#[derive(Debug, Clone)]
pub struct NetworkFit {
    pub report: SelectionReport,
    pub result: EstimationResult,
    pub partial: SymMatrix,
}

pub fn fit_network(
    data: &Dataset,
    estimator: Estimator,
    grid: &GridSpec,
    scoring: Scoring,
    cfg: &EstimatorConfig,
) -> Result<NetworkFit> {
    let report = select(data, estimator, grid, scoring, cfg)?;
    let result = estimator.estimate(data, report.best, cfg)?;
    let partial = partial_correlation(&result.theta_hat)?;
    Ok(NetworkFit { report, result, partial })
}

#[derive(Debug, Clone)]
pub struct RollingConfig {
    pub window: usize,
    pub shift: usize,
    pub prewhiten: Option<ResidualKind>,
    pub estimator: Estimator,
    pub grid: GridSpec,
    pub scoring: Scoring,
    pub solver: EstimatorConfig,
    pub strength: StrengthMode,
}

impl RollingConfig {
    /// 2S-gelnet (AND) with BIC, no prewhitening.
    pub fn new(window: usize, shift: usize, grid: GridSpec) -> Self {
        RollingConfig {
            window,
            shift,
            prewhiten: None,
            estimator: Estimator::TwoStage(EdgeRule::And),
            grid,
            scoring: Scoring::Bic,
            solver: EstimatorConfig::default(),
            strength: StrengthMode::Absolute,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingPoint {
    pub window_start: usize,
    /// Index of the last observation in the window.
    pub window_end: usize,
    pub mean_strength: Option<f64>,
    pub error: Option<String>,
}

impl RollingPoint {
    pub fn failed(&self) -> bool {
        self.mean_strength.is_none()
    }
}

/// Mean strength for windows `[k·shift, k·shift + window)`, in window order.
/// A failing window is reported with its error and the run continues.
pub fn rolling_strength(data: &Dataset, cfg: &RollingConfig) -> Result<Vec<RollingPoint>> {
    let n = data.n();
    if cfg.window < 2 || cfg.window > n {
        return Err(GgmError::InvalidParameter(format!("window {} outside [2, {n}]", cfg.window)));
    }
    if cfg.shift == 0 {
        return Err(GgmError::InvalidParameter("shift must be positive".into()));
    }
    let starts: Vec<usize> = (0..=n - cfg.window).step_by(cfg.shift).collect();
    Ok(starts
        .into_par_iter()
        .map(|start| {
            let end = start + cfg.window;
            let outcome = window_strength(data, start, end, cfg);
            RollingPoint {
                window_start: start,
                window_end: end - 1,
                mean_strength: outcome.as_ref().ok().copied(),
                error: outcome.err().map(|e| e.to_string()),
            }
        })
        .collect())
}

fn window_strength(data: &Dataset, start: usize, end: usize, cfg: &RollingConfig) -> Result<f64> {
    let mut window = data.window(start, end)?;
    if let Some(kind) = cfg.prewhiten {
        window = prewhiten_dataset(&window, kind)?.0;
    }
    let fit = fit_network(&window, cfg.estimator, &cfg.grid, cfg.scoring, &cfg.solver)?;
    Ok(graph_measures(&fit.partial, ZERO_TOL, cfg.strength).mean_strength)
}
