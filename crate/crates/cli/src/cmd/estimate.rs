use std::path::Path;

use anyhow::Result;
use ggm_core::estimator::{Estimator, EstimatorConfig};
use ggm_core::select::select;
use ggm_core::{partial_correlation, Dataset, EstimationResult, PenaltyParams, ResultSummary};
use serde::Serialize;

use super::usage;
use crate::io::{read_table, write_json, write_sym};
use crate::manifest::Recorder;
use crate::{EstimateArgs, SelectArgs};

/// Contents of `result.json`. Glasso is reported under its canonical name.
#[derive(Debug, Serialize)]
pub struct ResultFile {
    pub estimator: Estimator,
    #[serde(flatten)]
    pub summary: ResultSummary,
}

/// Writes `theta.csv`, `partial.csv`, `edges.json` and `result.json`.
pub fn write_result(rec: &mut Recorder, estimator: Estimator, result: &EstimationResult) -> Result<()> {
    write_sym(&rec.file("theta.csv")?, &result.theta_hat)?;
    write_sym(&rec.file("partial.csv")?, &partial_correlation(&result.theta_hat)?)?;
    write_json(&rec.file("edges.json")?, &result.edges())?;
    let file = ResultFile { estimator: estimator.canonical(), summary: result.summary() };
    write_json(&rec.file("result.json")?, &file)
}

fn load(path: &Path, standardize: bool) -> Result<Dataset> {
    let data = read_table(path)?.data;
    Ok(if standardize { data.standardized()? } else { data })
}

pub fn run(a: &EstimateArgs) -> Result<()> {
    let alpha = match (a.estimator.fixed_alpha(), a.alpha) {
        (Some(fixed), Some(given)) if given != fixed => {
            return Err(usage(format!("{} requires --alpha {fixed}", a.estimator)))
        }
        (Some(fixed), _) => fixed,
        (None, Some(given)) => given,
        (None, None) => return Err(usage(format!("--alpha is required for {}", a.estimator))),
    };
    let params = PenaltyParams::new(alpha, a.lambda).map_err(|e| usage(e.to_string()))?;
    let data = load(&a.data, a.standardize)?;
    let result = a.estimator.estimate(&data, params, &EstimatorConfig::default())?;
    let mut rec = Recorder::new(&a.out, "estimate", a)?;
    write_result(&mut rec, a.estimator, &result)?;
    rec.finish()
}

pub fn run_select(a: &SelectArgs) -> Result<()> {
    let grid = a.grid.grid().map_err(|e| usage(e.to_string()))?;
    let data = load(&a.data, a.standardize)?;
    let cfg = EstimatorConfig::default();
    let report = select(&data, a.estimator, &grid, a.scoring.scoring(), &cfg)?;
    let result = a.estimator.estimate(&data, report.best, &cfg)?;
    let mut rec = Recorder::new(&a.out, "select", a)?;
    if report.seed.is_some() {
        rec.seed("folds", a.scoring.seed);
    }
    write_json(&rec.file("report.json")?, &report)?;
    write_result(&mut rec, a.estimator, &result)?;
    rec.finish()
}
