use anyhow::Result;
use ggm_core::netgen::{ground_truth, sample_gaussian, TopologySpec};
use ggm_core::partial_correlation;
use nalgebra::DMatrix;

use crate::io::{write_json, write_matrix, write_sym, write_table};
use crate::manifest::Recorder;
use crate::GenerateArgs;

pub fn spec_from_args(a: &GenerateArgs) -> TopologySpec {
    let mut spec = TopologySpec::new(a.kind, a.p, a.seed);
    if let Some(v) = a.prob {
        spec.prob = v;
    }
    if let Some(v) = a.groups {
        spec.groups = v;
    }
    if let Some(v) = a.bandwidth {
        spec.bandwidth = v;
    }
    if let Some(v) = a.ring_degree {
        spec.ring_degree = v;
    }
    if let Some(v) = a.rewire {
        spec.rewire = v;
    }
    if let Some(v) = a.core {
        spec.core = v;
    }
    spec
}

pub fn run(a: &GenerateArgs) -> Result<()> {
    let spec = spec_from_args(a);
    let truth = ground_truth(&spec, a.v, a.u)?;
    let mut rec = Recorder::new(&a.out, "generate", a)?;
    rec.seed("graph", spec.seed);

    write_json(&rec.file("spec.json")?, &spec)?;
    write_json(&rec.file("adjacency.json")?, &truth.adjacency)?;
    let p = spec.p;
    let adj = DMatrix::from_fn(p, p, |i, j| f64::from(u8::from(truth.adjacency.contains(i, j))));
    write_matrix(&rec.file("adjacency.csv")?, &adj)?;
    write_sym(&rec.file("theta.csv")?, &truth.theta)?;
    write_sym(&rec.file("sigma.csv")?, &truth.sigma)?;
    write_sym(&rec.file("partial.csv")?, &partial_correlation(&truth.theta)?)?;

    if let Some(n) = a.n {
        let seed = a.sample_seed.unwrap_or(a.seed);
        rec.seed("sample", seed);
        let data = sample_gaussian(&truth.sigma, n, seed)?;
        write_table(&rec.file("data.csv")?, &data, None)?;
    }
    rec.finish()
}
