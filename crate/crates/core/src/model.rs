//! Domain types shared by every estimator, plus the precision / partial
//! correlation / edge-set conversions.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GgmError, Result};

/// Absolute threshold below which an off-diagonal precision entry counts as zero.
pub const ZERO_TOL: f64 = 1e-10;

/// Relative asymmetry accepted by [`SymMatrix::new`] before it refuses the input.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Dense symmetric real matrix.
///
/// Used for covariance, precision and partial-correlation matrices alike.
/// Entries `(i, j)` and `(j, i)` are bit-identical.
#[derive(Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Validates near-symmetry, then stores `(m + mᵀ)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(GgmError::Dimension(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
        }
        if m.nrows() == 0 {
            return Err(GgmError::Dimension("matrix must have dimension >= 1".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(GgmError::InvalidParameter("matrix has non-finite entries".into()));
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let asym = (&m - m.transpose()).amax() / scale;
        if asym > SYMMETRY_TOL {
            return Err(GgmError::Asymmetric(asym));
        }
        Ok(Self::symmetrize(m))
    }

    /// Averages `m` with its transpose without any tolerance check.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        let p = m.nrows();
        assert_eq!(p, m.ncols(), "symmetrize requires a square matrix");
        let mut out = m;
        for i in 0..p {
            for j in (i + 1)..p {
                let avg = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = avg;
                out[(j, i)] = avg;
            }
        }
        SymMatrix(out)
    }

    pub fn identity(p: usize) -> Self {
        SymMatrix(DMatrix::identity(p, p))
    }

    pub fn zeros(p: usize) -> Self {
        SymMatrix(DMatrix::zeros(p, p))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    /// Builds from nested rows; rows must form a near-symmetric square matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(GgmError::Dimension("rows must form a square matrix".into()));
        }
        Self::new(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect()).collect()
    }

    /// Inverse via Cholesky; fails unless the matrix is positive definite.
    pub fn inverse(&self) -> Result<SymMatrix> {
        let chol = Cholesky::new(self.0.clone()).ok_or(GgmError::NotPositiveDefinite)?;
        Ok(Self::symmetrize(chol.inverse()))
    }

    /// `log det` for a positive definite matrix, `None` otherwise.
    pub fn log_det(&self) -> Option<f64> {
        let chol = Cholesky::new(self.0.clone())?;
        let l = chol.l_dirty();
        Some(2.0 * (0..self.dim()).map(|i| l[(i, i)].ln()).sum::<f64>())
    }

    /// `trace(self · other)` without forming the product.
    pub fn trace_product(&self, other: &SymMatrix) -> f64 {
        self.0.component_mul(&other.0).sum()
    }

    /// Simultaneous row/column permutation: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> SymMatrix {
        let p = self.dim();
        SymMatrix(DMatrix::from_fn(p, p, |i, j| self.0[(perm[i], perm[j])]))
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix{}", self.0)
    }
}

/// True iff a Cholesky factorization succeeds with all pivots positive.
pub fn is_positive_definite(m: &SymMatrix) -> bool {
    Cholesky::new(m.as_matrix().clone()).is_some()
}

/// Elastic-net mixing `alpha` (1 = pure ℓ1) and strength `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyParams {
    pub alpha: f64,
    pub lambda: f64,
}

impl PenaltyParams {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(GgmError::InvalidParameter(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(GgmError::InvalidParameter(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        Ok(Self { alpha, lambda })
    }

    /// Weight on the ℓ1 term, `αλ`.
    pub fn l1(&self) -> f64 {
        self.alpha * self.lambda
    }

    /// Weight on the squared ℓ2 term, `(1 − α)λ`.
    pub fn l2(&self) -> f64 {
        (1.0 - self.alpha) * self.lambda
    }
}

/// Undirected simple graph over `p` nodes, stored as ordered pairs `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    p: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl EdgeSet {
    pub fn empty(p: usize) -> Self {
        Self { p, edges: BTreeSet::new() }
    }

    pub fn complete(p: usize) -> Self {
        let mut e = Self::empty(p);
        for i in 0..p {
            for j in (i + 1)..p {
                e.edges.insert((i, j));
            }
        }
        e
    }

    /// Builds from pairs in any orientation; rejects self-loops and out-of-range nodes.
    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(p: usize, pairs: I) -> Result<Self> {
        let mut e = Self::empty(p);
        for (i, j) in pairs {
            e.insert(i, j)?;
        }
        Ok(e)
    }

    pub fn insert(&mut self, i: usize, j: usize) -> Result<bool> {
        if i == j {
            return Err(GgmError::InvalidParameter(format!("self-loop at node {i}")));
        }
        if i >= self.p || j >= self.p {
            return Err(GgmError::InvalidParameter(format!("edge ({i}, {j}) out of range for p = {}", self.p)));
        }
        Ok(self.edges.insert((i.min(j), i.max(j))))
    }

    pub fn remove(&mut self, i: usize, j: usize) -> bool {
        self.edges.remove(&(i.min(j), i.max(j)))
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i != j && self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edges in ascending `(i, j)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.edges.is_subset(&other.edges)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.p];
        for &(i, j) in &self.edges {
            d[i] += 1;
            d[j] += 1;
        }
        d
    }

    /// Neighbour lists, each sorted ascending.
    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.p];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Relabels node `perm[k]` as `k`.
    pub fn permuted(&self, perm: &[usize]) -> EdgeSet {
        let mut inv = vec![0; self.p];
        for (k, &old) in perm.iter().enumerate() {
            inv[old] = k;
        }
        let mut e = EdgeSet::empty(self.p);
        for &(i, j) in &self.edges {
            let (a, b) = (inv[i], inv[j]);
            e.edges.insert((a.min(b), a.max(b)));
        }
        e
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeSetRepr {
    p: usize,
    edges: Vec<[usize; 2]>,
}

impl Serialize for EdgeSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EdgeSetRepr { p: self.p, edges: self.edges.iter().map(|&(i, j)| [i, j]).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EdgeSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = EdgeSetRepr::deserialize(d)?;
        EdgeSet::from_pairs(repr.p, repr.edges.into_iter().map(|[i, j]| (i, j))).map_err(serde::de::Error::custom)
    }
}

/// `n × p` observations with optional column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(values: DMatrix<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(GgmError::InvalidData(format!("need at least 2 observations, got {}", values.nrows())));
        }
        if values.ncols() < 2 {
            return Err(GgmError::InvalidData(format!("need at least 2 variables, got {}", values.ncols())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GgmError::InvalidData("non-finite entry".into()));
        }
        if let Some(l) = &labels {
            if l.len() != values.ncols() {
                return Err(GgmError::InvalidData(format!("{} labels for {} columns", l.len(), values.ncols())));
            }
        }
        Ok(Self { values, labels })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn means(&self) -> DVector<f64> {
        self.values.row_mean().transpose()
    }

    /// Sample covariance with divisor `n`.
    pub fn covariance(&self) -> SymMatrix {
        self.covariance_about(&self.means())
    }

    /// Divisor-`n` second moment about the supplied `means`.
    pub fn covariance_about(&self, means: &DVector<f64>) -> SymMatrix {
        let mut c = self.values.clone();
        for mut row in c.row_iter_mut() {
            row -= means.transpose();
        }
        let n = self.n() as f64;
        SymMatrix::symmetrize(c.transpose() * c / n)
    }

    /// Rows picked by index, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let m = DMatrix::from_fn(rows.len(), self.p(), |r, c| self.values[(rows[r], c)]);
        Dataset::new(m, self.labels.clone())
    }

    /// Contiguous row range `[start, end)`.
    pub fn window(&self, start: usize, end: usize) -> Result<Dataset> {
        let m = self.values.rows(start, end - start).into_owned();
        Dataset::new(m, self.labels.clone())
    }

    /// Columns rescaled to zero mean and unit (divisor-`n`) variance.
    pub fn standardized(&self) -> Result<Dataset> {
        let means = self.means();
        let cov = self.covariance();
        let mut m = self.values.clone();
        for j in 0..self.p() {
            let sd = cov.get(j, j).sqrt();
            if sd == 0.0 {
                return Err(GgmError::InvalidData(format!("column {j} has zero variance")));
            }
            for i in 0..self.n() {
                m[(i, j)] = (m[(i, j)] - means[j]) / sd;
            }
        }
        Dataset::new(m, self.labels.clone())
    }
}

/// Output of any of the precision estimators.
#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub theta_hat: SymMatrix,
    /// Covariance estimate; only the likelihood-based block solvers produce one.
    pub w_hat: Option<SymMatrix>,
    pub params: PenaltyParams,
    pub iterations: usize,
    pub final_delta: f64,
    pub converged: bool,
    pub positive_definite: bool,
    /// Structure chosen by neighbourhood selection, for the two-stage estimator.
    pub selected_edges: Option<EdgeSet>,
}

impl EstimationResult {
    pub fn edges(&self) -> EdgeSet {
        edge_set_of(&self.theta_hat, ZERO_TOL)
    }

    pub fn summary(&self) -> ResultSummary {
        ResultSummary {
            alpha: self.params.alpha,
            lambda: self.params.lambda,
            iterations: self.iterations,
            final_delta: self.final_delta,
            converged: self.converged,
            positive_definite: self.positive_definite,
            edge_count: self.edges().len(),
            selected_edges: self.selected_edges.clone(),
        }
    }
}

/// JSON-friendly digest of an [`EstimationResult`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResultSummary {
    pub alpha: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub final_delta: f64,
    pub converged: bool,
    pub positive_definite: bool,
    pub edge_count: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub selected_edges: Option<EdgeSet>,
}

/// `P[i][j] = −θ_ij / √(θ_ii θ_jj)` with a zero diagonal.
pub fn partial_correlation(theta: &SymMatrix) -> Result<SymMatrix> {
    let p = theta.dim();
    let diag = theta.diagonal();
    if let Some((index, &value)) = diag.iter().enumerate().find(|(_, &d)| !(d > 0.0)) {
        return Err(GgmError::NonPositiveDiagonal { index, value });
    }
    let root: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
    let mut out = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in (i + 1)..p {
            let v = -theta.get(i, j) / (root[i] * root[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(SymMatrix(out))
}

/// Pairs `(i, j)` with `|θ_ij| > tol`.
pub fn edge_set_of(theta: &SymMatrix, tol: f64) -> EdgeSet {
    let p = theta.dim();
    let mut e = EdgeSet::empty(p);
    for i in 0..p {
        for j in (i + 1)..p {
            if theta.get(i, j).abs() > tol {
                e.edges.insert((i, j));
            }
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn new_rejects_asymmetry() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(SymMatrix::new(m), Err(GgmError::Asymmetric(_))));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5 + 1e-12, 1.0]);
        let s = SymMatrix::new(m).unwrap();
        assert_eq!(s.get(0, 1).to_bits(), s.get(1, 0).to_bits());
    }

    #[test]
    fn partial_correlation_of_scaled_identity_is_zero() {
        let mut theta = SymMatrix::identity(3).into_matrix();
        theta *= 2.0;
        let p = partial_correlation(&SymMatrix::new(theta).unwrap()).unwrap();
        assert_eq!(p, SymMatrix::zeros(3));
    }

    #[test]
    fn partial_correlation_two_by_two() {
        let theta = SymMatrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        let p = partial_correlation(&theta).unwrap();
        assert_abs_diff_eq!(p.get(0, 1), 0.5);
        assert_abs_diff_eq!(p.get(1, 0), 0.5);
        assert_eq!(p.get(0, 0), 0.0);
    }

    #[test]
    fn partial_correlation_rejects_bad_diagonal() {
        let theta = SymMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        match partial_correlation(&theta) {
            Err(GgmError::NonPositiveDiagonal { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn edge_set_threshold() {
        let d = SymMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        assert!(edge_set_of(&d, 0.0).is_empty());
        let t = SymMatrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        assert_eq!(edge_set_of(&t, 0.0), EdgeSet::from_pairs(2, [(0, 1)]).unwrap());
        let t = SymMatrix::from_rows(&[vec![2.0, 1e-12], vec![1e-12, 2.0]]).unwrap();
        assert!(edge_set_of(&t, 1e-10).is_empty());
    }

    #[test]
    fn positive_definiteness() {
        assert!(is_positive_definite(&SymMatrix::identity(5)));
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(!is_positive_definite(&m));
    }

    #[test]
    fn edge_set_rejects_loops_and_range() {
        assert!(EdgeSet::from_pairs(3, [(1, 1)]).is_err());
        assert!(EdgeSet::from_pairs(3, [(0, 3)]).is_err());
        let e = EdgeSet::from_pairs(3, [(2, 0), (0, 2)]).unwrap();
        assert_eq!(e.len(), 1);
        assert!(e.contains(0, 2) && e.contains(2, 0));
    }

    #[test]
    fn edge_set_json_shape() {
        let e = EdgeSet::from_pairs(4, [(1, 0), (2, 3)]).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"p":4,"edges":[[0,1],[2,3]]}"#);
        let back: EdgeSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<EdgeSet>(r#"{"p":2,"edges":[[0,0]]}"#).is_err());
    }

    #[test]
    fn dataset_invariants() {
        assert!(Dataset::new(DMatrix::zeros(1, 3), None).is_err());
        assert!(Dataset::new(DMatrix::zeros(3, 1), None).is_err());
        let mut m = DMatrix::zeros(3, 2);
        m[(0, 0)] = f64::NAN;
        assert!(Dataset::new(m, None).is_err());
    }

    #[test]
    fn covariance_uses_n_divisor() {
        let d = Dataset::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 2.0]), None).unwrap();
        let s = d.covariance();
        assert_abs_diff_eq!(s.get(0, 0), 1.0);
        assert_abs_diff_eq!(s.get(1, 1), 1.0);
        assert_abs_diff_eq!(s.get(0, 1), -1.0);
    }

    #[test]
    fn penalty_params_range() {
        assert!(PenaltyParams::new(1.1, 0.1).is_err());
        assert!(PenaltyParams::new(0.5, -0.1).is_err());
        assert!(PenaltyParams::new(0.5, 0.0).is_ok());
    }
}
