//! Reference-based baselines: BLEU-2 and the three word-embedding metrics,
//! first on a hand-made pair, then over the bundled corpus with their
//! correlation against the human labels.
//!
//!     cargo run --release --example overlap_metrics

use std::collections::BTreeMap;
use std::path::Path;

use dialeval::analysis::{basic_report, report_table, ReportRow};
use dialeval::annotation::{label_map, load_labels, Dimension};
use dialeval::corpus::{tokenize, Corpus};
use dialeval::embeddings::EmbeddingTable;
use dialeval::metrics::{bleu2, run_metrics, MetricName};

fn main() -> dialeval::Result<()> {
    let r = tokenize("I'd love to, but I have work tomorrow.");
    let h = tokenize("I have work tomorrow, sorry.");
    println!("tokens {h:?}");
    println!("bleu2 {:.4}", bleu2(&r, &h)?);

    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let corpus = Corpus::load(data.join("corpus.jsonl"))?;
    let table = EmbeddingTable::load(data.join("embeddings.txt"))?;
    let labels = label_map(&load_labels(data.join("labels.tsv"))?, Dimension::Appropriateness);

    let run = run_metrics(&corpus, Some(&table), &MetricName::ALL);
    println!("{} values, {} skipped", run.scores.len(), run.skipped.len());
    let mut by_metric: BTreeMap<&str, BTreeMap<String, f64>> = BTreeMap::new();
    for s in &run.scores {
        by_metric.entry(s.metric.as_str()).or_default().insert(s.pair_id.clone(), s.value);
    }
    let rows = by_metric
        .into_iter()
        .map(|(name, s)| {
            Ok(ReportRow {
                name: name.to_string(),
                report: basic_report(&s, &labels)?,
            })
        })
        .collect::<dialeval::Result<Vec<_>>>()?;
    print!("{}", report_table(&rows));
    Ok(())
}
