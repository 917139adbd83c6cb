//! RUBER-unref trained three ways on the bundled toy data: next-response
//! ranking only, regression on the 720 training labels only, and ranking
//! followed by regression.
//!
//!     cargo run --release --example semi_supervised

use std::path::Path;

use dialeval::analysis::{evaluate_model, fit_model, DomainSpec, LoadedDomain, ModelSpec};
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
    let ids: Vec<&str> = domain.train_ids.iter().map(String::as_str).collect();

    for mode in [Mode::Unsupervised, Mode::Supervised, Mode::SemiSupervised] {
        let mut spec = ModelSpec::new(Variant::Ruber, EvalConfig::UnreferencedOnly, mode);
        spec.train.unsupervised.lr = 0.1;
        spec.train.supervised.lr = 0.01;
        let (params, trace) = fit_model(&spec, &domain, &ids, &domain.labels, 1)?;
        let r = evaluate_model(&params, &domain)?;
        println!(
            "{:<16} epochs {:>3}  test pearson {:.3}  spearman {:.3}  sd {:.3} (human {:.3})",
            mode.as_str(),
            trace.epochs().len(),
            r.pearson_r,
            r.spearman_rho,
            r.sd_pred,
            r.sd_label
        );
    }
    Ok(())
}
