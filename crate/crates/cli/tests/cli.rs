mod support;

use std::fs;

use support::{assert_same_tree, ggm, ggm_ok, path_str, read_csv, tree};

fn sample(dir: &std::path::Path, kind: &str, n: &str) -> String {
    let out = dir.join(format!("gen-{kind}"));
    ggm_ok(&["generate", "--kind", kind, "--p", "8", "--n", n, "--seed", "3", "--out", path_str(&out)]);
    path_str(&out.join("data.csv")).to_string()
}

#[test]
fn generate_writes_a_consistent_network() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in ["scale-free", "random", "hub", "cluster", "band", "small-world", "core-periphery"] {
        sample(tmp.path(), kind, "50");
        let dir = tmp.path().join(format!("gen-{kind}"));
        for f in ["adjacency.csv", "theta.csv", "sigma.csv", "partial.csv", "spec.json", "manifest.json", "data.csv"] {
            assert!(dir.join(f).exists(), "{kind}: missing {f}");
        }
        let data = fs::read_to_string(dir.join("data.csv")).unwrap();
        assert_eq!(data.lines().count(), 51, "{kind}: header plus 50 rows");
    }
}

#[test]
fn every_estimator_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let data = sample(tmp.path(), "hub", "120");
    for est in ["gelnet", "glasso", "cr-l2", "cr-minel", "2s-and", "2s-or"] {
        let out = tmp.path().join(est);
        let alpha = if est == "glasso" { "1" } else { "0.5" };
        ggm_ok(&[
            "estimate",
            "--data",
            &data,
            "--estimator",
            est,
            "--alpha",
            alpha,
            "--lambda",
            "0.1",
            "--out",
            path_str(&out),
        ]);
        let result: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
        assert!(result.is_object(), "{est}");
        assert!(out.join("theta.csv").exists() && out.join("partial.csv").exists());
    }
}

#[test]
fn glasso_and_gelnet_at_alpha_one_write_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let data = sample(tmp.path(), "band", "150");
    let (a, b) = (tmp.path().join("glasso"), tmp.path().join("gelnet"));
    ggm_ok(&["estimate", "--data", &data, "--estimator", "glasso", "--lambda", "0.08", "--out", path_str(&a)]);
    ggm_ok(&[
        "estimate",
        "--data",
        &data,
        "--estimator",
        "gelnet",
        "--alpha",
        "1",
        "--lambda",
        "0.08",
        "--out",
        path_str(&b),
    ]);
    assert_same_tree(&a, &b);
    let sel = tmp.path().join("sel-glasso");
    ggm_ok(&[
        "select",
        "--data",
        &data,
        "--estimator",
        "glasso",
        "--grid-alphas",
        "5",
        "--grid-lambdas",
        "9",
        "--out",
        path_str(&sel),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(sel.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["alphas"], serde_json::json!([1.0]));
}

#[test]
fn simulate_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        ggm_ok(&[
            "simulate",
            "--topologies",
            "band,hub",
            "--replicates",
            "2",
            "--n",
            "80",
            "--p",
            "8",
            "--estimators",
            "2s-and,cr-l2",
            "--criteria",
            "bic,cv",
            "--grid-alphas",
            "3",
            "--grid-lambdas",
            "5",
            "--folds",
            "3",
            "--seed",
            "11",
            "--out",
            path_str(&out),
        ]);
        tree(&out)
    };
    let first = run("a");
    assert!(first.keys().any(|k| k.ends_with("summary.csv")));
    assert_eq!(first, run("b"));
}

#[test]
fn simulate_summary_has_one_row_per_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    ggm_ok(&[
        "simulate",
        "--topologies",
        "band",
        "--replicates",
        "3",
        "--n",
        "100",
        "--p",
        "8",
        "--estimators",
        "2s-or,gelnet",
        "--criteria",
        "bic",
        "--grid-alphas",
        "3",
        "--grid-lambdas",
        "5",
        "--no-roc",
        "--out",
        path_str(&out),
    ]);
    let rows = read_csv(&out.join("summary.csv"));
    assert_eq!(rows.len(), 2);
    for r in &rows {
        let acc: f64 = r["accuracy_mean"].parse().unwrap();
        assert!((0.0..=1.0).contains(&acc));
        assert_eq!(r["successes"], "3");
    }
    assert_eq!(read_csv(&out.join("replicates.csv")).len(), 6);
}

#[test]
fn analyze_runs_on_the_bundled_returns() {
    let tmp = tempfile::tempdir().unwrap();
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/sector_returns.csv");
    let out = tmp.path().join("a");
    ggm_ok(&["analyze", "--returns", data, "--grid-alphas", "3", "--grid-lambdas", "9", "--out", path_str(&out)]);
    for f in ["garch.json", "measures.json", "shock.csv", "rolling.csv", "partial.csv", "residuals.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let resid = fs::read_to_string(out.join("residuals.csv")).unwrap();
    let rows = fs::read_to_string(data).unwrap().lines().count() - 1;
    assert_eq!(resid.lines().count() - 1, rows - 1, "one observation lost to the AR lag");
    assert!(!read_csv(&out.join("rolling.csv")).is_empty());
}

#[test]
fn standardizing_removes_column_scale() {
    let tmp = tempfile::tempdir().unwrap();
    let data = sample(tmp.path(), "band", "120");
    let text = fs::read_to_string(&data).unwrap();
    let mut lines = text.lines();
    let mut scaled = format!("{}\n", lines.next().unwrap());
    for line in lines {
        let row: Vec<String> = line
            .split(',')
            .enumerate()
            .map(|(j, v)| format!("{:e}", v.parse::<f64>().unwrap() * 10f64.powi(j as i32 - 3) + j as f64))
            .collect();
        scaled.push_str(&row.join(","));
        scaled.push('\n');
    }
    let scaled_path = tmp.path().join("scaled.csv");
    fs::write(&scaled_path, scaled).unwrap();
    let run = |input: &str, name: &str, extra: &[&str]| {
        let out = tmp.path().join(name);
        let base = [
            "estimate",
            "--data",
            input,
            "--estimator",
            "2s-and",
            "--alpha",
            "1",
            "--lambda",
            "0.1",
            "--out",
            path_str(&out),
        ];
        ggm_ok(&[&base[..], extra].concat());
        fs::read_to_string(out.join("edges.json")).unwrap()
    };
    let plain = run(&data, "plain", &["--standardize"]);
    assert_eq!(plain, run(path_str(&scaled_path), "scaled", &["--standardize"]));
    assert_ne!(run(path_str(&scaled_path), "raw", &[]), plain, "raw scaled columns should change the fit");
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path_str(tmp.path()).to_string();
    let bad = [
        vec!["generate", "--kind", "lattice", "--out", &out],
        vec!["estimate", "--data", "x.csv", "--estimator", "lasso", "--lambda", "0.1", "--out", &out],
        vec!["estimate", "--data", "x.csv", "--estimator", "gelnet", "--alpha", "2", "--lambda", "0.1", "--out", &out],
        vec!["generate", "--kind", "band", "--p", "5", "--bandwidth", "9", "--out", &out],
        vec!["frobnicate"],
    ];
    for args in bad {
        assert_eq!(ggm(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn malformed_data_reports_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("bad.csv");
    fs::write(&csv, "a,b,c\n1,2,3\n4,5,6\n7,oops,9\n").unwrap();
    let out = ggm(&[
        "estimate",
        "--data",
        path_str(&csv),
        "--estimator",
        "gelnet",
        "--alpha",
        "0.5",
        "--lambda",
        "0.1",
        "--out",
        path_str(&tmp.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
    let missing = ggm(&[
        "estimate",
        "--data",
        "/nonexistent.csv",
        "--estimator",
        "gelnet",
        "--alpha",
        "0.5",
        "--lambda",
        "0.1",
        "--out",
        path_str(tmp.path()),
    ]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn divergent_networks_still_write_their_outputs() {
    // Bandwidth-3 ground truths have spectral radius near 1.8.
    let tmp = tempfile::tempdir().unwrap();
    let gen = tmp.path().join("g");
    ggm_ok(&["generate", "--kind", "band", "--p", "10", "--n", "2000", "--seed", "1", "--out", path_str(&gen)]);
    let out = tmp.path().join("a");
    let shock = "1,0,0,0,0,0,0,0,0,0";
    let res = ggm(&[
        "analyze",
        "--returns",
        path_str(&gen.join("data.csv")),
        "--no-prewhiten",
        "--no-rolling",
        "--shock",
        shock,
        "--grid-alphas",
        "3",
        "--grid-lambdas",
        "9",
        "--out",
        path_str(&out),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("spectral radius"));
    let rows = read_csv(&out.join("shock.csv"));
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r["steady_state"] == "NA"));
    assert!(out.join("measures.json").exists());
}
