use anyhow::Result;
use ggm_core::estimator::{Estimator, EstimatorConfig};
use ggm_core::metrics::{classification_scores, confusion, frobenius_distance, roc_path, RocPath};
use ggm_core::netgen::{ground_truth, sample_gaussian, TopologyKind, TopologySpec};
use ggm_core::select::{select, Criterion, GridSpec, Scoring};
use ggm_core::{partial_correlation, Dataset, EdgeSet, PenaltyParams, SymMatrix};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::usage;
use crate::io::{write_records, write_rows};
use crate::manifest::Recorder;
use crate::{CriterionArg, SimulateArgs};

#[derive(Debug, Clone, Copy)]
struct Seeds {
    graph: u64,
    sample: u64,
    folds: u64,
}

/// Seeds of one replicate, drawn from a dedicated stream of the master seed.
fn replicate_seeds(master: u64, kind: TopologyKind, replicate: usize) -> Seeds {
    let k = TopologyKind::ALL.iter().position(|t| *t == kind).expect("listed kind") as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream((k << 32) | replicate as u64);
    Seeds { graph: rng.next_u64(), sample: rng.next_u64(), folds: rng.next_u64() }
}

#[derive(Debug, Clone, Serialize)]
struct ReplicateRow {
    topology: TopologyKind,
    replicate: usize,
    estimator: Estimator,
    criterion: &'static str,
    graph_seed: u64,
    sample_seed: u64,
    fold_seed: u64,
    alpha: Option<f64>,
    lambda: Option<f64>,
    tp: Option<usize>,
    fp: Option<usize>,
    tn: Option<usize>,
    #[serde(rename = "fn")]
    fn_: Option<usize>,
    accuracy: Option<f64>,
    f1: Option<f64>,
    precision: Option<f64>,
    recall: Option<f64>,
    fpr: Option<f64>,
    tpr: Option<f64>,
    frobenius: Option<f64>,
    error: Option<String>,
}

struct Roc {
    topology: TopologyKind,
    estimator: Estimator,
    criterion: Criterion,
    alpha: f64,
    path: RocPath,
}

struct Setting<'a> {
    args: &'a SimulateArgs,
    estimators: Vec<Estimator>,
    criteria: Vec<Criterion>,
    grid: GridSpec,
    cfg: EstimatorConfig,
}

struct Outcome {
    rows: Vec<ReplicateRow>,
    rocs: Vec<Roc>,
}

struct Fit {
    params: PenaltyParams,
    edges: EdgeSet,
    partial: SymMatrix,
}

fn fit(
    data: &Dataset,
    estimator: Estimator,
    grid: &GridSpec,
    scoring: Scoring,
    cfg: &EstimatorConfig,
) -> ggm_core::Result<Fit> {
    let report = select(data, estimator, grid, scoring, cfg)?;
    let result = estimator.estimate(data, report.best, cfg)?;
    Ok(Fit { params: report.best, edges: result.edges(), partial: partial_correlation(&result.theta_hat)? })
}

fn roc_for(
    data: &Dataset,
    truth: &EdgeSet,
    estimator: Estimator,
    chosen: PenaltyParams,
    grid: &GridSpec,
    cfg: &EstimatorConfig,
) -> ggm_core::Result<RocPath> {
    let estimates = grid
        .lambdas
        .par_iter()
        .map(|&lambda| {
            let r = estimator.estimate(data, PenaltyParams::new(chosen.alpha, lambda)?, cfg)?;
            Ok((lambda, r.edges()))
        })
        .collect::<ggm_core::Result<Vec<_>>>()?;
    let mut path = roc_path(truth, &estimates)?;
    path.selected_index = grid.lambdas.iter().position(|&l| l == chosen.lambda);
    Ok(path)
}

fn run_replicate(set: &Setting, kind: TopologyKind, replicate: usize) -> Outcome {
    let a = set.args;
    let seeds = replicate_seeds(a.seed, kind, replicate);
    let blank = |estimator: Estimator, criterion: Criterion| ReplicateRow {
        topology: kind,
        replicate,
        estimator,
        criterion: criterion.name(),
        graph_seed: seeds.graph,
        sample_seed: seeds.sample,
        fold_seed: seeds.folds,
        alpha: None,
        lambda: None,
        tp: None,
        fp: None,
        tn: None,
        fn_: None,
        accuracy: None,
        f1: None,
        precision: None,
        recall: None,
        fpr: None,
        tpr: None,
        frobenius: None,
        error: None,
    };
    let pairs: Vec<(Estimator, Criterion)> =
        set.estimators.iter().flat_map(|&e| set.criteria.iter().map(move |&c| (e, c))).collect();

    let setup = (|| {
        let truth = ground_truth(&TopologySpec::new(kind, a.p, seeds.graph), a.v, a.u)?;
        let data = sample_gaussian(&truth.sigma, a.n, seeds.sample)?;
        let p_true = partial_correlation(&truth.theta)?;
        Ok::<_, ggm_core::GgmError>((truth, data, p_true))
    })();
    let (truth, data, p_true) = match setup {
        Ok(v) => v,
        Err(e) => {
            let rows = pairs
                .iter()
                .map(|&(est, crit)| ReplicateRow { error: Some(e.to_string()), ..blank(est, crit) })
                .collect();
            return Outcome { rows, rocs: Vec::new() };
        }
    };

    let mut rows = Vec::with_capacity(pairs.len());
    let mut rocs = Vec::new();
    for (estimator, criterion) in pairs {
        let scoring = match criterion {
            Criterion::Bic => Scoring::Bic,
            Criterion::Cv => Scoring::Cv { folds: a.folds, seed: seeds.folds },
        };
        let row = match fit(&data, estimator, &set.grid, scoring, &set.cfg) {
            Ok(f) => {
                let c = confusion(&truth.adjacency, &f.edges).expect("same dimension");
                let s = classification_scores(&c);
                if replicate == 0 && !a.no_roc {
                    if let Ok(path) = roc_for(&data, &truth.adjacency, estimator, f.params, &set.grid, &set.cfg) {
                        rocs.push(Roc { topology: kind, estimator, criterion, alpha: f.params.alpha, path });
                    }
                }
                ReplicateRow {
                    alpha: Some(f.params.alpha),
                    lambda: Some(f.params.lambda),
                    tp: Some(c.tp),
                    fp: Some(c.fp),
                    tn: Some(c.tn),
                    fn_: Some(c.fn_),
                    accuracy: Some(s.accuracy),
                    f1: Some(s.f1),
                    precision: Some(s.precision),
                    recall: Some(s.recall),
                    fpr: Some(s.fpr),
                    tpr: Some(s.tpr),
                    frobenius: frobenius_distance(&p_true, &f.partial).ok(),
                    ..blank(estimator, criterion)
                }
            }
            Err(e) => ReplicateRow { error: Some(e.to_string()), ..blank(estimator, criterion) },
        };
        rows.push(row);
    }
    Outcome { rows, rocs }
}

/// Mean and sample standard deviation; the deviation is undefined below two values.
fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some(var.sqrt()))
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

const METRICS: [&str; 7] = ["accuracy", "f1", "precision", "recall", "fpr", "tpr", "frobenius"];

fn metric(row: &ReplicateRow, name: &str) -> Option<f64> {
    match name {
        "accuracy" => row.accuracy,
        "f1" => row.f1,
        "precision" => row.precision,
        "recall" => row.recall,
        "fpr" => row.fpr,
        "tpr" => row.tpr,
        "frobenius" => row.frobenius,
        _ => None,
    }
}

pub fn run(a: &SimulateArgs) -> Result<()> {
    if a.replicates == 0 {
        return Err(usage("--replicates must be at least 1"));
    }
    let topologies = if a.topologies.is_empty() { TopologyKind::ALL.to_vec() } else { a.topologies.clone() };
    let estimators = if a.estimators.is_empty() { Estimator::ALL.to_vec() } else { a.estimators.clone() };
    let criteria: Vec<Criterion> = if a.criteria.is_empty() {
        vec![Criterion::Bic, Criterion::Cv]
    } else {
        a.criteria.iter().map(|&c: &CriterionArg| c.into()).collect()
    };
    for &kind in &topologies {
        TopologySpec::new(kind, a.p, 0).validate().map_err(|e| usage(e.to_string()))?;
    }
    let set = Setting {
        args: a,
        estimators: estimators.clone(),
        criteria: criteria.clone(),
        grid: a.grid.grid().map_err(|e| usage(e.to_string()))?,
        cfg: EstimatorConfig::default(),
    };

    let jobs: Vec<(TopologyKind, usize)> =
        topologies.iter().flat_map(|&k| (0..a.replicates).map(move |r| (k, r))).collect();
    let outcomes: Vec<Outcome> = jobs.par_iter().map(|&(k, r)| run_replicate(&set, k, r)).collect();

    let mut rec = Recorder::new(&a.out, "simulate", a)?;
    rec.seed("master", a.seed);
    for &(k, r) in &jobs {
        let s = replicate_seeds(a.seed, k, r);
        rec.seed(format!("{k}/{r}/graph"), s.graph);
        rec.seed(format!("{k}/{r}/sample"), s.sample);
        if criteria.contains(&Criterion::Cv) {
            rec.seed(format!("{k}/{r}/folds"), s.folds);
        }
    }

    let rows: Vec<&ReplicateRow> = outcomes.iter().flat_map(|o| &o.rows).collect();
    write_rows(&rec.file("replicates.csv")?, &rows)?;

    let cell = |k: TopologyKind, e: Estimator, c: Criterion| -> Vec<&ReplicateRow> {
        rows.iter().copied().filter(|r| r.topology == k && r.estimator == e && r.criterion == c.name()).collect()
    };

    let mut header: Vec<String> =
        ["topology", "estimator", "criterion", "n", "successes", "failures"].map(String::from).to_vec();
    for m in METRICS {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_sd"));
    }
    let mut summary = Vec::new();
    for &k in &topologies {
        for &e in &estimators {
            for &c in &criteria {
                let cell_rows = cell(k, e, c);
                let ok: Vec<_> = cell_rows.iter().filter(|r| r.error.is_none()).collect();
                let mut line = vec![
                    k.to_string(),
                    e.to_string(),
                    c.name().to_string(),
                    a.n.to_string(),
                    ok.len().to_string(),
                    (cell_rows.len() - ok.len()).to_string(),
                ];
                for m in METRICS {
                    let values: Vec<f64> = ok.iter().filter_map(|r| metric(r, m)).collect();
                    let (mean, sd) = mean_sd(&values);
                    line.push(fmt(mean));
                    line.push(fmt(sd));
                }
                summary.push(line);
            }
        }
    }
    write_records(&rec.file("summary.csv")?, &header, &summary)?;

    // One table per metric: topologies down, estimators across.
    for m in ["accuracy", "f1", "frobenius"] {
        let mut header: Vec<String> = vec!["topology".into(), "criterion".into()];
        for e in &estimators {
            header.push(format!("{e}_mean"));
            header.push(format!("{e}_sd"));
        }
        let mut table = Vec::new();
        for &c in &criteria {
            for &k in &topologies {
                let mut line = vec![k.to_string(), c.name().to_string()];
                for &e in &estimators {
                    let values: Vec<f64> =
                        cell(k, e, c).iter().filter(|r| r.error.is_none()).filter_map(|r| metric(r, m)).collect();
                    let (mean, sd) = mean_sd(&values);
                    line.push(fmt(mean));
                    line.push(fmt(sd));
                }
                table.push(line);
            }
        }
        write_records(&rec.file(&format!("table_{m}.csv"))?, &header, &table)?;
    }

    if !a.no_roc {
        let header: Vec<String> = ["lambda", "fpr", "tpr", "selected", "criterion", "alpha"].map(String::from).to_vec();
        for &k in &topologies {
            for &e in &estimators {
                let mut lines = Vec::new();
                for roc in outcomes.iter().flat_map(|o| &o.rocs).filter(|r| r.topology == k && r.estimator == e) {
                    for (i, pt) in roc.path.points.iter().enumerate() {
                        lines.push(vec![
                            pt.lambda.to_string(),
                            pt.fpr.to_string(),
                            pt.tpr.to_string(),
                            u8::from(roc.path.selected_index == Some(i)).to_string(),
                            roc.criterion.marker().to_string(),
                            roc.alpha.to_string(),
                        ]);
                    }
                }
                if !lines.is_empty() {
                    write_records(&rec.file(&format!("roc/{k}_{e}.csv"))?, &header, &lines)?;
                }
            }
        }
    }
    rec.finish()
}
