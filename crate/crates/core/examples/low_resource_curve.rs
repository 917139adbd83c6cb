//! Correlation on the test split as the number of training labels grows.
//!
//!     cargo run --release --example low_resource_curve

use std::path::Path;

use dialeval::analysis::{low_resource_curve, DomainSpec, LoadedDomain, ModelSpec};
use dialeval::evaluators::{EvalConfig, Variant};
use dialeval::trainer::Mode;

fn main() -> dialeval::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let loaded = LoadedDomain::load(
        &DomainSpec {
            name: "toy".into(),
            corpus: "corpus.jsonl".into(),
            encodings: None,
            embeddings: Some("embeddings.txt".into()),
            labels: "labels.tsv".into(),
            split: Some("split.tsv".into()),
        },
        &data,
    )?;
    let domain = loaded.domain();
    let mut spec = ModelSpec::new(Variant::Ruber, EvalConfig::UnreferencedOnly, Mode::Supervised);
    spec.train.supervised.lr = 0.01;
    spec.train.supervised.max_epochs = 30;
    let curve = low_resource_curve(&domain, &spec, &[25, 50, 100, 200, 400, 720], &[1, 2, 3])?;
    println!("size  pearson  spearman");
    for p in &curve {
        println!("{:>4}  {:>7.3}  {:>8.3}", p.size, p.mean_pearson, p.mean_spearman);
    }
    Ok(())
}
