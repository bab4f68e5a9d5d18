//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the solvers under test.

#![allow(dead_code)]

use std::collections::VecDeque;

use ggm_core::{Dataset, EdgeSet, SymMatrix};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` rows of independent standard normals mixed by a random `p × p` matrix.
pub fn random_dataset(n: usize, p: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let mix = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { 0.5 * r.sample::<f64, _>(StandardNormal) });
    let z = DMatrix::from_fn(n, p, |_, _| r.sample::<f64, _>(StandardNormal));
    Dataset::new(z * mix, None).unwrap()
}

/// Sample covariance of a random dataset with `n = 3p + 5`; well conditioned but not diagonal.
pub fn random_pd(p: usize, seed: u64) -> SymMatrix {
    random_dataset(3 * p + 5, p, seed).covariance()
}

pub fn random_edges(p: usize, prob: f64, r: &mut impl Rng) -> EdgeSet {
    let mut e = EdgeSet::empty(p);
    for i in 0..p {
        for j in (i + 1)..p {
            if r.random_bool(prob) {
                e.insert(i, j).unwrap();
            }
        }
    }
    e
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// Proximal step for the `Θ`-block of the log-det ADMM splitting:
/// `argmin −log det Θ + tr(SΘ) + (ρ/2)||Θ − V||²`.
fn logdet_prox(s: &DMatrix<f64>, v: &DMatrix<f64>, rho: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(v * rho - s);
    let d = eig.eigenvalues.map(|l| (l + (l * l + 4.0 * rho).sqrt()) / (2.0 * rho));
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// ADMM with splitting `Θ = Z`; `z_step(v)` is the proximal map of the penalty.
fn admm(s: &SymMatrix, rho: f64, tol: f64, z_step: impl Fn(usize, usize, f64) -> f64) -> DMatrix<f64> {
    let sm = s.as_matrix();
    let p = s.dim();
    let mut z = DMatrix::from_diagonal(&sm.diagonal().map(|d| 1.0 / d));
    let mut u = DMatrix::zeros(p, p);
    for _ in 0..200_000 {
        let theta = logdet_prox(sm, &(&z - &u), rho);
        let v = &theta + &u;
        let z_new = DMatrix::from_fn(p, p, |i, j| z_step(i, j, v[(i, j)]));
        let dual = (&z_new - &z).amax();
        let primal = (&theta - &z_new).amax();
        u += &theta - &z_new;
        z = z_new;
        if primal < tol && dual < tol {
            break;
        }
    }
    z
}

/// Maximizer of `log det Θ − tr(SΘ) − αλ Σ_{i≠j}|θ_ij| − (1−α)λ Σ_{i≠j} θ_ij²`.
pub fn admm_gelnet(s: &SymMatrix, alpha: f64, lambda: f64) -> DMatrix<f64> {
    let rho = 1.0;
    let (l1, l2) = (alpha * lambda, (1.0 - alpha) * lambda);
    admm(s, rho, 1e-11, |i, j, v| {
        if i == j {
            v
        } else {
            let t = (rho * v).abs() - l1;
            if t <= 0.0 {
                0.0
            } else {
                v.signum() * t / (rho + 2.0 * l2)
            }
        }
    })
}

/// Maximizer of `log det Θ − tr(SΘ)` with `θ_ij = 0` off `edges`.
pub fn admm_constrained(s: &SymMatrix, edges: &EdgeSet) -> DMatrix<f64> {
    admm(s, 1.0, 1e-11, |i, j, v| if i == j || edges.contains(i, j) { v } else { 0.0 })
}

/// Confusion counts by enumerating every unordered pair.
pub fn enumerate_counts(truth: &EdgeSet, est: &EdgeSet) -> (usize, usize, usize, usize) {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    let p = truth.p();
    for i in 0..p {
        for j in (i + 1)..p {
            match (truth.contains(i, j), est.contains(i, j)) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (false, false) => tn += 1,
                (true, false) => fn_ += 1,
            }
        }
    }
    (tp, fp, tn, fn_)
}

/// Hop distances from every node by breadth-first search; `None` when unreachable.
pub fn bfs_distances(adj: &[Vec<bool>]) -> Vec<Vec<Option<usize>>> {
    let p = adj.len();
    (0..p)
        .map(|src| {
            let mut dist = vec![None; p];
            dist[src] = Some(0);
            let mut queue = VecDeque::from([src]);
            while let Some(v) = queue.pop_front() {
                for w in 0..p {
                    if adj[v][w] && dist[w].is_none() {
                        dist[w] = Some(dist[v].unwrap() + 1);
                        queue.push_back(w);
                    }
                }
            }
            dist
        })
        .collect()
}

/// Largest |eigenvalue| of a symmetric matrix by power iteration on `M²`.
pub fn power_iteration_radius(m: &DMatrix<f64>) -> f64 {
    let p = m.nrows();
    let m2 = m * m;
    let mut x = nalgebra::DVector::from_fn(p, |i, _| 1.0 + 0.1 * i as f64);
    let mut est = 0.0;
    for _ in 0..20_000 {
        let y = &m2 * &x;
        let norm = y.norm();
        if norm == 0.0 {
            return 0.0;
        }
        est = x.dot(&y) / x.dot(&x);
        x = y / norm;
    }
    est.max(0.0).sqrt()
}

/// `Σ_{t=0}^{terms} Pᵗ e`.
pub fn power_series(p_mat: &DMatrix<f64>, e: &[f64], terms: usize) -> Vec<f64> {
    let mut term = nalgebra::DVector::from_column_slice(e);
    let mut acc = term.clone();
    for _ in 0..terms {
        term = p_mat * term;
        acc += &term;
    }
    acc.iter().copied().collect()
}

/// Random symmetric zero-diagonal matrix rescaled to the given spectral radius.
pub fn random_partial(p: usize, radius: f64, seed: u64) -> SymMatrix {
    let mut r = rng(seed);
    let mut m = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in (i + 1)..p {
            let v: f64 = r.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let rho = SymmetricEigen::new(m.clone()).eigenvalues.amax();
    SymMatrix::new(m * (radius / rho)).unwrap()
}
