mod common;

use common::{bfs_distances, power_iteration_radius, power_series, random_partial, rng};
use ggm_core::analysis::{
    fit_network, graph_measures, rolling_strength, shock_diffusion, spectral_radius, RollingConfig, StrengthMode,
};
use ggm_core::estimator::{Estimator, EstimatorConfig};
use ggm_core::netgen::{ground_truth, sample_gaussian, TopologyKind, TopologySpec};
use ggm_core::select::{GridSpec, Scoring};
use ggm_core::two_stage::EdgeRule;
use ggm_core::{Dataset, GgmError, SymMatrix, ZERO_TOL};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn small_grid() -> GridSpec {
    GridSpec::uniform(6, 21, 0.4).unwrap()
}

#[test]
fn steady_state_equals_truncated_power_series() {
    for seed in 0..20 {
        let p = 3 + (seed as usize % 8);
        let pm = random_partial(p, 0.5, seed);
        let mut r = rng(seed);
        let e: Vec<f64> = (0..p).map(|_| r.random_range(-1.0..1.0)).collect();
        let ours = shock_diffusion(&pm, &e).unwrap();
        let series = power_series(pm.as_matrix(), &e, 50);
        for (a, b) in ours.iter().zip(&series) {
            assert!((a - b).abs() < 1e-8, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn steady_state_on_an_estimated_network() {
    // A chain keeps the radius below one; wider bands push it past.
    let spec = TopologySpec { bandwidth: 1, ..TopologySpec::new(TopologyKind::Band, 10, 1) };
    let truth = ground_truth(&spec, 0.3, 0.1).unwrap();
    let data = sample_gaussian(&truth.sigma, 1000, 77).unwrap();
    let fit = fit_network(
        &data,
        Estimator::TwoStage(EdgeRule::And),
        &small_grid(),
        Scoring::Bic,
        &EstimatorConfig::default(),
    )
    .unwrap();
    let radius = spectral_radius(&fit.partial);
    assert!(radius < 0.95, "radius {radius}");
    let mut e = vec![0.0; 10];
    e[5] = 1.0;
    let ours = shock_diffusion(&fit.partial, &e).unwrap();
    // Enough terms for the tail to vanish at this radius.
    let terms = 50.max(((1e-12f64).ln() / radius.ln()).ceil() as usize);
    let series = power_series(fit.partial.as_matrix(), &e, terms);
    for (a, b) in ours.iter().zip(&series) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn spectral_radius_matches_power_iteration() {
    for seed in 0..10 {
        let pm = random_partial(7, 0.3 + 0.1 * seed as f64, 300 + seed);
        let ours = spectral_radius(&pm);
        assert!((ours - power_iteration_radius(pm.as_matrix())).abs() < 1e-6);
        assert!((ours - (0.3 + 0.1 * seed as f64)).abs() < 1e-9);
    }
}

#[test]
fn divergent_networks_are_rejected() {
    let pm = random_partial(5, 1.2, 1);
    match shock_diffusion(&pm, &[1.0, 0.0, 0.0, 0.0, 0.0]) {
        Err(GgmError::Divergent(rho)) => assert!((rho - 1.2).abs() < 1e-9),
        other => panic!("expected divergence, got {other:?}"),
    }
}

fn random_graph(p: usize, prob: f64, seed: u64) -> SymMatrix {
    let mut r = rng(seed);
    let mut m = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in (i + 1)..p {
            if r.random_bool(prob) {
                let w = r.random_range(-0.4..0.4);
                m[(i, j)] = w;
                m[(j, i)] = w;
            }
        }
    }
    SymMatrix::new(m).unwrap()
}

#[test]
fn measures_agree_with_breadth_first_search() {
    for seed in 0..30 {
        let p = 4 + seed as usize % 9;
        let pm = random_graph(p, 0.3, seed);
        let adj: Vec<Vec<bool>> =
            (0..p).map(|i| (0..p).map(|j| i != j && pm.get(i, j).abs() > ZERO_TOL).collect()).collect();
        let dist = bfs_distances(&adj);
        let (mut total, mut pairs) = (0usize, 0usize);
        let mut ecc = vec![0usize; p];
        for i in 0..p {
            for j in 0..p {
                if let (true, Some(d)) = (i != j, dist[i][j]) {
                    total += d;
                    pairs += 1;
                    ecc[i] = ecc[i].max(d);
                }
            }
        }
        let m = graph_measures(&pm, ZERO_TOL, StrengthMode::Absolute);
        let expected_distance = if pairs == 0 { 0.0 } else { total as f64 / pairs as f64 };
        assert!((m.mean_distance - expected_distance).abs() < 1e-12, "seed {seed}");
        assert_eq!(m.eccentricity, ecc, "seed {seed}");
        assert_eq!(m.disconnected, dist.iter().flatten().any(Option::is_none));
        for i in 0..p {
            let nb: Vec<usize> = (0..p).filter(|&j| adj[i][j]).collect();
            assert_eq!(m.degree[i], nb.len());
            let links =
                nb.iter().flat_map(|&a| nb.iter().map(move |&b| (a, b))).filter(|&(a, b)| a < b && adj[a][b]).count();
            let k = nb.len();
            let cc = if k < 2 { 0.0 } else { links as f64 / (k * (k - 1) / 2) as f64 };
            assert!((m.clustering[i] - cc).abs() < 1e-12);
            let strength: f64 = nb.iter().map(|&j| pm.get(i, j).abs()).sum();
            assert!((m.strength[i] - strength).abs() < 1e-12);
        }
        assert!(m.mean_degree >= 0.0 && m.mean_degree <= (p - 1) as f64);
        assert!((0.0..=1.0).contains(&m.mean_clustering));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn measures_follow_relabelling(seed in 0u64..100_000, perm in Just((0..8).collect::<Vec<usize>>()).prop_shuffle()) {
        let pm = random_graph(8, 0.35, seed);
        let a = graph_measures(&pm, ZERO_TOL, StrengthMode::Absolute);
        let b = graph_measures(&pm.permuted(&perm), ZERO_TOL, StrengthMode::Absolute);
        prop_assert_eq!(a.mean_degree, b.mean_degree);
        prop_assert!((a.mean_distance - b.mean_distance).abs() < 1e-12);
        prop_assert!((a.mean_eccentricity - b.mean_eccentricity).abs() < 1e-12);
        prop_assert!((a.mean_clustering - b.mean_clustering).abs() < 1e-12);
        prop_assert!((a.mean_strength - b.mean_strength).abs() < 1e-12);
        prop_assert!(a.mean_strength >= 0.0);
        for (k, &old) in perm.iter().enumerate() {
            prop_assert_eq!(b.degree[k], a.degree[old]);
            prop_assert_eq!(b.eccentricity[k], a.eccentricity[old]);
            prop_assert!((b.clustering[k] - a.clustering[old]).abs() < 1e-12);
        }
    }

    #[test]
    fn shock_response_is_linear(seed in 0u64..100_000, radius in 0.0f64..0.95) {
        let pm = random_partial(6, radius, seed);
        let mut r = rng(seed ^ 0xabc);
        let e1: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
        let e2: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
        let sum: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| a + b).collect();
        let (s1, s2, s12) = (shock_diffusion(&pm, &e1).unwrap(), shock_diffusion(&pm, &e2).unwrap(), shock_diffusion(&pm, &sum).unwrap());
        for k in 0..6 {
            prop_assert!((s12[k] - s1[k] - s2[k]).abs() < 1e-10);
        }
    }
}

/// Rows drawn with `corr(x_i, x_j) = rho` for all pairs of columns.
fn equicorrelated(n: usize, p: usize, rho: f64, r: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let common: f64 = r.sample(StandardNormal);
            (0..p).map(|_| rho.sqrt() * common + (1.0 - rho).sqrt() * r.sample::<f64, _>(StandardNormal)).collect()
        })
        .collect()
}

fn to_dataset(rows: &[Vec<f64>]) -> Dataset {
    let p = rows[0].len();
    Dataset::new(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]), None).unwrap()
}

#[test]
fn independent_series_have_negligible_strength() {
    // BIC keeps a spurious edge once |r| clears about 0.15 at n = 250, so single
    // windows occasionally carry one or two; the average over windows stays small.
    let mut r = rng(2024);
    let data = to_dataset(&equicorrelated(5000, 10, 0.0, &mut r));
    let points = rolling_strength(&data, &RollingConfig::new(250, 250, small_grid())).unwrap();
    assert_eq!(points.len(), 20);
    let s: Vec<f64> = points.iter().map(|p| p.mean_strength.expect("window fitted")).collect();
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    assert!(mean < 0.05, "{s:?}");
    assert!(s.iter().all(|&v| v < 0.2), "{s:?}");
}

#[test]
fn strength_rises_across_a_regime_change() {
    let mut r = rng(99);
    let mut rows = equicorrelated(500, 8, 0.05, &mut r);
    rows.extend(equicorrelated(500, 8, 0.6, &mut r));
    let data = to_dataset(&rows);
    let points = rolling_strength(&data, &RollingConfig::new(250, 50, small_grid())).unwrap();
    let s: Vec<f64> = points.iter().map(|p| p.mean_strength.unwrap()).collect();
    let calm = &s[..=5]; // windows ending by observation 499
    let stressed = &s[s.len() - 6..]; // windows starting at 500 or later
    let calm_max = calm.iter().copied().fold(f64::MIN, f64::max);
    let stressed_min = stressed.iter().copied().fold(f64::MAX, f64::min);
    assert!(stressed_min > calm_max + 0.1, "{s:?}");
    // Straddling windows sit between the two regimes.
    for &v in &s[6..s.len() - 6] {
        assert!(v > calm_max - 0.05 && v < stressed_min + 0.3, "{s:?}");
    }
}

#[test]
fn whole_sample_window_equals_full_fit() {
    let data = common::random_dataset(300, 6, 8);
    let points = rolling_strength(&data, &RollingConfig::new(300, 17, small_grid())).unwrap();
    assert_eq!(points.len(), 1);
    let fit = fit_network(
        &data,
        Estimator::TwoStage(EdgeRule::And),
        &small_grid(),
        Scoring::Bic,
        &EstimatorConfig::default(),
    )
    .unwrap();
    let full = graph_measures(&fit.partial, ZERO_TOL, StrengthMode::Absolute).mean_strength;
    assert_eq!(points[0].mean_strength, Some(full));
    assert_eq!((points[0].window_start, points[0].window_end), (0, 299));
}
