//! Ground-truth network structures, their precision matrices, and Gaussian
//! sampling.
//!
//! Kinds and default parameters:
//!
//! | kind           | structure                                                        |
//! |----------------|------------------------------------------------------------------|
//! | scale-free     | Barabási–Albert, one attachment per new node (`p − 1` edges)     |
//! | random         | Erdős–Rényi, edge probability `3/p`                              |
//! | hub            | `⌈p/15⌉` contiguous groups, first node of each joined to the rest |
//! | cluster        | `⌈p/15⌉` contiguous groups, within-group probability `min(1, 6g/p)` |
//! | band           | `|i − j| ≤ 3`                                                    |
//! | small-world    | Watts–Strogatz ring, 2 neighbours per side, rewiring 0.1         |
//! | core-periphery | first `⌈0.2p⌉` nodes complete; each other node tied to 2 of them |
//!
//! Precision matrices put `+v` on every edge and shift the diagonal by
//! `|λ_min| + 0.1 + u`, so the smallest eigenvalue is `0.1 + u`. The ground
//! truth then rescales the covariance to unit variances.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GgmError, Result};
use crate::model::{Dataset, EdgeSet, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    ScaleFree,
    Random,
    Hub,
    Cluster,
    Band,
    SmallWorld,
    CorePeriphery,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 7] = [
        TopologyKind::ScaleFree,
        TopologyKind::Random,
        TopologyKind::Hub,
        TopologyKind::Cluster,
        TopologyKind::Band,
        TopologyKind::SmallWorld,
        TopologyKind::CorePeriphery,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TopologyKind::ScaleFree => "scale-free",
            TopologyKind::Random => "random",
            TopologyKind::Hub => "hub",
            TopologyKind::Cluster => "cluster",
            TopologyKind::Band => "band",
            TopologyKind::SmallWorld => "small-world",
            TopologyKind::CorePeriphery => "core-periphery",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = GgmError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase().replace('_', "-");
        TopologyKind::ALL.into_iter().find(|k| k.name() == lower).ok_or_else(|| {
            let valid: Vec<_> = TopologyKind::ALL.iter().map(|k| k.name()).collect();
            GgmError::InvalidParameter(format!("unknown topology '{s}' (valid: {})", valid.join(", ")))
        })
    }
}

/// Fully resolved generator parameters. Fields irrelevant to `kind` are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    pub p: usize,
    pub seed: u64,
    /// Edge probability (random) or within-group probability (cluster).
    pub prob: f64,
    /// Number of hubs / clusters.
    pub groups: usize,
    pub bandwidth: usize,
    /// Ring neighbours on each side (small-world).
    pub ring_degree: usize,
    pub rewire: f64,
    pub core: usize,
}

impl TopologySpec {
    /// Spec with every parameter at its default for `kind` and `p`.
    pub fn new(kind: TopologyKind, p: usize, seed: u64) -> Self {
        let groups = p.div_ceil(15).max(1);
        let prob = match kind {
            TopologyKind::Cluster => (6.0 * groups as f64 / p.max(1) as f64).min(1.0),
            _ => 3.0 / p.max(1) as f64,
        };
        Self {
            kind,
            p,
            seed,
            prob,
            groups,
            bandwidth: 3,
            ring_degree: 2,
            rewire: 0.1,
            core: (0.2 * p as f64).ceil() as usize,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GgmError::InvalidParameter(msg));
        if self.p < 3 {
            return bad(format!("need p >= 3, got {}", self.p));
        }
        match self.kind {
            TopologyKind::Random | TopologyKind::Cluster if !(0.0..=1.0).contains(&self.prob) => {
                bad(format!("edge probability {} outside [0, 1]", self.prob))
            }
            TopologyKind::Hub | TopologyKind::Cluster if self.groups == 0 || self.p / self.groups < 2 => {
                bad(format!("{} groups cannot each hold 2 of {} nodes", self.groups, self.p))
            }
            TopologyKind::Band if self.bandwidth == 0 || self.bandwidth >= self.p => {
                bad(format!("bandwidth {} must lie in [1, p)", self.bandwidth))
            }
            TopologyKind::SmallWorld if self.ring_degree == 0 || 2 * self.ring_degree >= self.p => {
                bad(format!("ring degree {} needs 1 <= k < p/2", self.ring_degree))
            }
            TopologyKind::SmallWorld if !(0.0..=1.0).contains(&self.rewire) => {
                bad(format!("rewiring probability {} outside [0, 1]", self.rewire))
            }
            TopologyKind::CorePeriphery if self.core < 2 || self.core >= self.p => {
                bad(format!("core size {} must lie in [2, p)", self.core))
            }
            _ => Ok(()),
        }
    }
}

/// Contiguous groups of near-equal size.
fn groups(p: usize, g: usize) -> Vec<std::ops::Range<usize>> {
    let (base, extra) = (p / g, p % g);
    let mut start = 0;
    (0..g)
        .map(|k| {
            let len = base + usize::from(k < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Edge set for `spec`; deterministic in `spec.seed`.
pub fn generate_structure(spec: &TopologySpec) -> Result<EdgeSet> {
    spec.validate()?;
    let p = spec.p;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut e = EdgeSet::empty(p);
    match spec.kind {
        TopologyKind::ScaleFree => {
            let mut degree = vec![0usize; p];
            e.insert(0, 1)?;
            degree[0] = 1;
            degree[1] = 1;
            for t in 2..p {
                let total: usize = degree[..t].iter().sum();
                let mut pick = rng.random_range(0..total);
                let mut target = 0;
                while pick >= degree[target] {
                    pick -= degree[target];
                    target += 1;
                }
                e.insert(t, target)?;
                degree[t] += 1;
                degree[target] += 1;
            }
        }
        TopologyKind::Random => {
            for i in 0..p {
                for j in (i + 1)..p {
                    if rng.random::<f64>() < spec.prob {
                        e.insert(i, j)?;
                    }
                }
            }
        }
        TopologyKind::Hub => {
            for g in groups(p, spec.groups) {
                for j in (g.start + 1)..g.end {
                    e.insert(g.start, j)?;
                }
            }
        }
        TopologyKind::Cluster => {
            for g in groups(p, spec.groups) {
                for i in g.clone() {
                    for j in (i + 1)..g.end {
                        if rng.random::<f64>() < spec.prob {
                            e.insert(i, j)?;
                        }
                    }
                }
            }
        }
        TopologyKind::Band => {
            for i in 0..p {
                for j in (i + 1)..p.min(i + spec.bandwidth + 1) {
                    e.insert(i, j)?;
                }
            }
        }
        TopologyKind::SmallWorld => {
            let k = spec.ring_degree;
            for i in 0..p {
                for d in 1..=k {
                    e.insert(i, (i + d) % p)?;
                }
            }
            // Rewire each lattice edge (i, i + d) once, keeping endpoint i.
            for d in 1..=k {
                for i in 0..p {
                    let j = (i + d) % p;
                    if rng.random::<f64>() < spec.rewire && e.contains(i, j) {
                        let free: Vec<usize> = (0..p).filter(|&m| m != i && !e.contains(i, m)).collect();
                        if free.is_empty() {
                            continue;
                        }
                        let m = free[rng.random_range(0..free.len())];
                        e.remove(i, j);
                        e.insert(i, m)?;
                    }
                }
            }
        }
        TopologyKind::CorePeriphery => {
            let c = spec.core;
            for i in 0..c {
                for j in (i + 1)..c {
                    e.insert(i, j)?;
                }
            }
            for node in c..p {
                for core in sample(&mut rng, c, 2) {
                    e.insert(node, core)?;
                }
            }
        }
    }
    Ok(e)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &SymMatrix) -> f64 {
    SymmetricEigen::new(m.as_matrix().clone()).eigenvalues.min()
}

/// `Θ = v·A + (|λ_min(v·A)| + 0.1 + u)·I` for the adjacency `A` of `edges`.
pub fn structure_to_precision(edges: &EdgeSet, v: f64, u: f64) -> Result<SymMatrix> {
    if !(v > 0.0) || !(u >= 0.0) {
        return Err(GgmError::InvalidParameter(format!("need v > 0 and u >= 0, got v = {v}, u = {u}")));
    }
    let p = edges.p();
    let mut base = DMatrix::zeros(p, p);
    for (i, j) in edges.iter() {
        base[(i, j)] = v;
        base[(j, i)] = v;
    }
    let base = SymMatrix::symmetrize(base);
    let shift = min_eigenvalue(&base).abs() + 0.1 + u;
    let mut theta = base.into_matrix();
    for i in 0..p {
        theta[(i, i)] = shift;
    }
    Ok(SymMatrix::symmetrize(theta))
}

/// Structure, precision and covariance of one simulated network.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub adjacency: EdgeSet,
    pub theta: SymMatrix,
    pub sigma: SymMatrix,
    pub spec: TopologySpec,
}

/// Ground truth with `sigma` rescaled to unit variances (a correlation
/// matrix) and `theta` its exact inverse `D Θ D`.
pub fn ground_truth(spec: &TopologySpec, v: f64, u: f64) -> Result<GroundTruth> {
    let adjacency = generate_structure(spec)?;
    let raw = structure_to_precision(&adjacency, v, u)?;
    let cov = raw.inverse()?;
    let sd: Vec<f64> = cov.diagonal().iter().map(|s| s.sqrt()).collect();
    let p = spec.p;
    let sigma =
        SymMatrix::symmetrize(DMatrix::from_fn(
            p,
            p,
            |i, j| {
                if i == j {
                    1.0
                } else {
                    cov.get(i, j) / (sd[i] * sd[j])
                }
            },
        ));
    let theta = SymMatrix::symmetrize(DMatrix::from_fn(p, p, |i, j| raw.get(i, j) * sd[i] * sd[j]));
    Ok(GroundTruth { adjacency, theta, sigma, spec: spec.clone() })
}

/// `n` i.i.d. rows from `N(0, sigma)`, computed as `L z` with `sigma = L Lᵀ`.
pub fn sample_gaussian(sigma: &SymMatrix, n: usize, seed: u64) -> Result<Dataset> {
    let l = Cholesky::new(sigma.as_matrix().clone()).ok_or(GgmError::NotPositiveDefinite)?.unpack();
    let p = sigma.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DMatrix::from_fn(p, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    Dataset::new((l * z).transpose(), None)
}
