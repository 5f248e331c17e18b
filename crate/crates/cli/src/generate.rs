use anyhow::{bail, Result};
use quic_core::io::{write_dataset, write_matrix_dense, write_matrix_sparse};
use quic_core::{
    chain_precision, random_precision, sample_covariance, sample_gaussian, Dataset, GroundTruth,
    SymMatrix,
};
use serde_json::json;

use crate::args::{GenerateArgs, GeneratorArgs, Kind};
use crate::manifest::{ensure_dir, write, RunManifest};

pub struct Generated {
    pub truth: GroundTruth,
    pub data: Dataset,
    pub cov: SymMatrix,
}

pub fn build(gen: &GeneratorArgs) -> Result<Generated> {
    let (Some(kind), Some(p)) = (gen.kind, gen.p) else {
        bail!("--kind and --p are required to generate a problem");
    };
    let n = gen.n.unwrap_or(p / 2);
    let truth = match kind {
        Kind::Chain => chain_precision(p)?,
        Kind::Random => random_precision(p, gen.nnz.unwrap_or(10 * p), gen.seed)?,
    };
    // A separate stream for the samples so --nnz does not shift them.
    let data = sample_gaussian(&truth, n, gen.seed.wrapping_add(1))?;
    let cov = sample_covariance(&data)?;
    Ok(Generated { truth, data, cov })
}

pub fn config_json(gen: &GeneratorArgs) -> serde_json::Value {
    json!({
        "kind": gen.kind.map(|k| format!("{k:?}").to_lowercase()),
        "p": gen.p,
        "n": gen.n.or(gen.p.map(|p| p / 2)),
        "nnz": gen.nnz,
        "seed": gen.seed,
    })
}

pub fn run(args: &GenerateArgs) -> Result<u8> {
    let manifest = RunManifest::start(config_json(&args.gen), Some(args.gen.seed));
    let g = build(&args.gen)?;
    ensure_dir(&args.out)?;
    let files = [
        ("precision.txt", write_matrix_sparse(&g.truth.precision)),
        ("data.txt", write_dataset(&g.data)),
        ("cov.txt", write_matrix_dense(&g.cov)),
    ];
    let mut outputs = Vec::new();
    for (name, text) in files {
        let path = args.out.join(name);
        write(&path, &text)?;
        outputs.push(path);
    }
    manifest.finish(&args.out, &outputs)?;
    println!(
        "wrote p={} n={} ({} true nonzeros) to {}",
        g.truth.dim(),
        g.data.n(),
        g.truth.nnz(),
        args.out.display()
    );
    Ok(0)
}
