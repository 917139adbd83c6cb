//! Label noise on the training split and rounding of the output scores.
//!
//!     cargo run --release --example noise_and_discretize

use std::collections::BTreeMap;
use std::path::Path;

use dialeval::analysis::{
    basic_report, discretize_scores, evaluate_model, fit_model, histogram, noise_robustness, score_ids, DomainSpec,
    LoadedDomain, ModelSpec,
};
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

    for p in noise_robustness(&domain, &spec, &[0.0, 0.5, 1.0, 2.0], &[1, 2, 3])? {
        println!("sigma {:<4} pearson {:.3}  spearman {:.3}", p.sigma, p.mean_pearson, p.mean_spearman);
    }

    let ids: Vec<&str> = domain.train_ids.iter().map(String::as_str).collect();
    let (params, _) = fit_model(&spec, &domain, &ids, &domain.labels, 1)?;
    let test: Vec<&str> = domain.test_ids.iter().map(String::as_str).collect();
    let scores = score_ids(&params, &domain, &test)?;
    let disc: BTreeMap<String, f64> = scores
        .keys()
        .cloned()
        .zip(discretize_scores(&scores.values().copied().collect::<Vec<_>>())?.into_iter().map(f64::from))
        .collect();
    let cont = evaluate_model(&params, &domain)?;
    let rounded = basic_report(&disc, &domain.labels)?;
    println!("continuous pearson {:.3}, discretized {:.3}", cont.pearson_r, rounded.pearson_r);
    for b in histogram(&scores.values().copied().collect::<Vec<_>>(), 8)? {
        println!("[{:.1}, {:.1}) {}", b.lo, b.hi, "#".repeat(b.count));
    }
    Ok(())
}
