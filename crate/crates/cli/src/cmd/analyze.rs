use anyhow::Result;
use ggm_core::analysis::{fit_network, graph_measures, rolling_strength, shock_diffusion, RollingConfig, StrengthMode};
use ggm_core::estimator::EstimatorConfig;
use ggm_core::prewhiten::{prewhiten_dataset, GarchFit};
use ggm_core::select::Criterion;
use ggm_core::{GgmError, ZERO_TOL};
use serde::Serialize;

use super::estimate::write_result;
use super::usage;
use crate::io::{read_table, write_json, write_records, write_table};
use crate::manifest::Recorder;
use crate::AnalyzeArgs;

#[derive(Serialize)]
struct SeriesFit<'a> {
    series: &'a str,
    #[serde(flatten)]
    fit: &'a GarchFit,
}

pub fn run(a: &AnalyzeArgs) -> Result<()> {
    let grid = a.grid.grid().map_err(|e| usage(e.to_string()))?;
    let table = read_table(&a.returns)?;
    let labels: Vec<String> = match table.data.labels() {
        Some(l) => l.to_vec(),
        None => (1..=table.data.p()).map(|j| format!("X{j}")).collect(),
    };
    let shock = if a.shock.is_empty() {
        let col = labels
            .iter()
            .position(|l| l.eq_ignore_ascii_case(&a.shock_column))
            .ok_or_else(|| usage(format!("no column named '{}' (columns: {})", a.shock_column, labels.join(", "))))?;
        let mut e = vec![0.0; labels.len()];
        e[col] = 1.0;
        e
    } else if a.shock.len() == labels.len() {
        a.shock.clone()
    } else {
        return Err(usage(format!("--shock has {} entries for {} columns", a.shock.len(), labels.len())));
    };

    let mut rec = Recorder::new(&a.out, "analyze", a)?;
    let (data, index) = if a.no_prewhiten {
        (table.data, table.index)
    } else {
        let (resid, fits) = prewhiten_dataset(&table.data, a.residuals.into())?;
        let index = table.index.map(|ix| ix[1..].to_vec());
        write_table(&rec.file("residuals.csv")?, &resid, index.as_deref())?;
        let per_series: Vec<SeriesFit> =
            labels.iter().zip(&fits).map(|(series, fit)| SeriesFit { series, fit }).collect();
        write_json(&rec.file("garch.json")?, &per_series)?;
        (resid, index)
    };
    let data = if a.standardize { data.standardized()? } else { data };

    let scoring = a.scoring.scoring();
    if Criterion::from(a.scoring.criterion) == Criterion::Cv {
        rec.seed("folds", a.scoring.seed);
    }
    let cfg = EstimatorConfig::default();
    let fit = fit_network(&data, a.estimator, &grid, scoring, &cfg)?;
    write_json(&rec.file("report.json")?, &fit.report)?;
    write_result(&mut rec, a.estimator, &fit.result)?;

    let mode = if a.signed_strength { StrengthMode::Signed } else { StrengthMode::Absolute };
    let measures = graph_measures(&fit.partial, ZERO_TOL, mode);
    write_json(&rec.file("measures.json")?, &measures)?;

    // A divergent network still gets its other outputs; the steady state is marked NA.
    let steady: Vec<String> = match shock_diffusion(&fit.partial, &shock) {
        Ok(s) => s.iter().map(f64::to_string).collect(),
        Err(GgmError::Divergent(rho)) => {
            eprintln!("warning: spectral radius {rho:.4} >= 1, shock response has no steady state");
            vec!["NA".to_string(); shock.len()]
        }
        Err(e) => return Err(e.into()),
    };
    let rows: Vec<Vec<String>> = labels
        .iter()
        .zip(shock.iter().zip(&steady))
        .map(|(l, (e, s))| vec![l.clone(), e.to_string(), s.clone()])
        .collect();
    write_records(&rec.file("shock.csv")?, &["series", "shock", "steady_state"].map(String::from), &rows)?;

    if !a.no_rolling {
        if a.window > data.n() {
            return Err(usage(format!("--window {} exceeds the {} available observations", a.window, data.n())));
        }
        let rolling = RollingConfig {
            estimator: a.estimator,
            scoring,
            solver: cfg,
            strength: mode,
            ..RollingConfig::new(a.window, a.shift, grid)
        };
        let points = rolling_strength(&data, &rolling)?;
        let rows: Vec<Vec<String>> = points
            .iter()
            .map(|p| {
                let end = index.as_ref().map_or_else(|| p.window_end.to_string(), |ix| ix[p.window_end].clone());
                vec![
                    end,
                    p.mean_strength.map_or_else(|| "NA".to_string(), |s| s.to_string()),
                    u8::from(p.failed()).to_string(),
                    p.error.clone().unwrap_or_default(),
                ]
            })
            .collect();
        let header = ["window_end", "mean_strength", "failed", "error"].map(String::from);
        write_records(&rec.file("rolling.csv")?, &header, &rows)?;
    }
    rec.finish()
}
