//! Writes the bundled synthetic sector-returns file.
//!
//! Ten AR(1)-GARCH(1,1) series whose innovations follow a small-world
//! network with equal positive partial correlations `w`. The weight rises
//! halfway through the sample, so the network strengthens in the second regime.
//!
//! `cargo run -p ggm-cli --example synthetic_returns -- data/sector_returns.csv`

use chrono::{Datelike, NaiveDate, Weekday};
use ggm_core::netgen::{generate_structure, sample_gaussian, TopologyKind, TopologySpec};
use ggm_core::prewhiten::ArGarchParams;
use ggm_core::SymMatrix;
use nalgebra::DMatrix;

const SECTORS: [&str; 10] = [
    "basic_materials",
    "consumer_cyclicals",
    "consumer_non_cyclicals",
    "energy",
    "financials",
    "healthcare",
    "industrials",
    "real_estate",
    "technology",
    "utilities",
];
const DAYS: usize = 756;

/// Unit-variance innovations with precision proportional to `I − w·A`.
fn innovations(w: f64, n: usize, seed: u64) -> DMatrix<f64> {
    let p = SECTORS.len();
    let edges = generate_structure(&TopologySpec::new(TopologyKind::SmallWorld, p, 3)).expect("valid spec");
    let theta = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else if edges.contains(i, j) {
            -w
        } else {
            0.0
        }
    });
    let sigma = SymMatrix::new(theta).and_then(|t| t.inverse()).expect("positive definite");
    let sd: Vec<f64> = sigma.diagonal().iter().map(|s| s.sqrt()).collect();
    let z = sample_gaussian(&sigma, n, seed).expect("positive definite");
    DMatrix::from_fn(n, SECTORS.len(), |i, j| z.values()[(i, j)] / sd[j])
}

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "data/sector_returns.csv".into());
    let half = DAYS / 2;
    let z = {
        let (a, b) = (innovations(0.04, half, 21), innovations(0.18, DAYS - half, 22));
        DMatrix::from_fn(DAYS, SECTORS.len(), |i, j| if i < half { a[(i, j)] } else { b[(i - half, j)] })
    };

    let mut returns = DMatrix::zeros(DAYS, SECTORS.len());
    for j in 0..SECTORS.len() {
        let g = ArGarchParams { c: 0.0002, phi: 0.05 + 0.01 * j as f64, omega: 2e-6, a: 0.08, b: 0.9 };
        let mut s2 = g.omega / (1.0 - g.a - g.b);
        let (mut prev_r, mut prev_eps) = (0.0, 0.0);
        for t in 0..DAYS {
            s2 = g.omega + g.a * prev_eps * prev_eps + g.b * s2;
            let eps = s2.sqrt() * z[(t, j)];
            let r = g.c + g.phi * prev_r + eps;
            returns[(t, j)] = r;
            prev_r = r;
            prev_eps = eps;
        }
    }

    let mut w = csv::Writer::from_path(&out).expect("writable output path");
    let mut header = vec!["date"];
    header.extend(SECTORS);
    w.write_record(&header).unwrap();
    let mut day = NaiveDate::from_ymd_opt(2018, 1, 2).unwrap();
    for t in 0..DAYS {
        while matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
            day = day.succ_opt().unwrap();
        }
        let mut rec = vec![day.to_string()];
        rec.extend(returns.row(t).iter().map(|r| format!("{r:.8}")));
        w.write_record(&rec).unwrap();
        day = day.succ_opt().unwrap();
    }
    w.flush().unwrap();
}
