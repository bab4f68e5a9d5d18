//! Helpers for driving the `ggm` binary from tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn ggm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ggm")).args(args).output().expect("binary runs")
}

/// Runs `ggm` and panics with its stderr unless it succeeds.
pub fn ggm_ok(args: &[&str]) {
    let out = ggm(args);
    assert!(out.status.success(), "ggm {args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Every file under `root` keyed by its relative path, manifests excluded.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n != "manifest.json") {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// Rows of a CSV file as maps from header to field.
pub fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines.map(|l| header.iter().zip(l.split(',')).map(|(h, v)| (h.to_string(), v.to_string())).collect()).collect()
}

/// Asserts two output trees match, naming the first differing file.
pub fn assert_same_tree(a: &Path, b: &Path) {
    let (ta, tb) = (tree(a), tree(b));
    assert_eq!(ta.keys().collect::<Vec<_>>(), tb.keys().collect::<Vec<_>>());
    for (k, v) in &ta {
        assert!(
            v == &tb[k],
            "{} differs:\n{}\n---\n{}",
            k.display(),
            String::from_utf8_lossy(v),
            String::from_utf8_lossy(&tb[k])
        );
    }
}
