//! Referenced scores lean on the ground truth matching itself. Removing the
//! ground-truth responses from the evaluation set exposes it, while a
//! reference-free score does not move when the references are replaced.
//!
//!     cargo run --release --example reference_collapse

use std::collections::BTreeMap;
use std::path::Path;

use dialeval::analysis::{gt_excluded_report, report_table, ReportRow};
use dialeval::annotation::{label_map, load_labels, Dimension};
use dialeval::corpus::Corpus;
use dialeval::embeddings::{BagEncoder, EmbeddingTable, VectorSource};
use dialeval::metrics::{run_metrics, MetricName};
use dialeval::evaluators::{score_corpus, EvalConfig, EvaluatorParams, InitOptions, Variant};

fn main() -> dialeval::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let corpus = Corpus::load(data.join("corpus.jsonl"))?;
    let encoder = BagEncoder::new(EmbeddingTable::load(data.join("embeddings.txt"))?);
    let labels = label_map(&load_labels(data.join("labels.tsv"))?, Dimension::Appropriateness);

    let bleu: BTreeMap<String, f64> = run_metrics(&corpus, None, &[MetricName::Bleu2])
        .scores
        .into_iter()
        .map(|s| (s.pair_id, s.value))
        .collect();
    let cosine = EvaluatorParams::init(Variant::Ruber, EvalConfig::ReferencedOnly, encoder.dim(), &InitOptions::default())?;
    let cosine: BTreeMap<String, f64> = score_corpus(&corpus, &encoder, &cosine)?
        .into_iter()
        .map(|s| (s.pair_id, s.scaled))
        .collect();

    let mut rows = Vec::new();
    for (name, scores) in [("bleu2", &bleu), ("ruber_ref", &cosine)] {
        let r = gt_excluded_report(scores, &labels, &corpus)?;
        rows.push(ReportRow { name: format!("{name}/full"), report: r.full });
        rows.push(ReportRow { name: format!("{name}/gt_excluded"), report: r.excluded });
    }
    print!("{}", report_table(&rows));

    // An unreferenced head does not read the reference at all.
    let unref = EvaluatorParams::init(Variant::Ruber, EvalConfig::UnreferencedOnly, encoder.dim(), &InitOptions::default())?;
    // Ground-truth candidates are the references themselves, so compare the rest.
    let raw = |c: &Corpus| -> dialeval::Result<Vec<(String, f64)>> {
        Ok(score_corpus(c, &encoder, &unref)?
            .into_iter()
            .filter(|s| !s.pair_id.ends_with("-gt"))
            .map(|s| (s.pair_id, s.raw))
            .collect())
    };
    let scrambled = corpus.with_replaced_references(|_| "fw0 fw1 fw2".to_string())?;
    println!(
        "unreferenced raw scores unchanged after replacing references: {}",
        raw(&corpus)? == raw(&scrambled)?
    );
    Ok(())
}
