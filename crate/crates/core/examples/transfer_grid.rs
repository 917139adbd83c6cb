//! Train in one synthetic domain, test in another. The two worlds share the
//! word vectors but not the dialogues.
//!
//!     cargo run --release --example transfer_grid

use std::collections::HashSet;

use dialeval::analysis::{transfer_report, Domain, ModelSpec};
use dialeval::annotation::{aggregate, label_map, Dimension, DEFAULT_MAD_THRESHOLD};
use dialeval::corpus::{make_split, Split, SplitRatios};
use dialeval::embeddings::BagEncoder;
use dialeval::evaluators::{EvalConfig, Variant};
use dialeval::synth::{annotate, AnnotatorConfig, World, WorldConfig};
use dialeval::trainer::Mode;

fn main() -> dialeval::Result<()> {
    let world = World::generate(&WorldConfig {
        n_dialogues: 200,
        ..Default::default()
    })?;
    let encoder = BagEncoder::new(world.table.clone());
    let ids: Vec<&str> = world.corpus.dialogues().iter().map(|d| d.dialogue_id.as_str()).collect();
    let halves = [&ids[..100], &ids[100..]];

    let mut corpora = Vec::new();
    let mut domains = Vec::new();
    for half in halves {
        corpora.push(world.corpus.subset(&half.iter().copied().collect::<HashSet<_>>())?);
    }
    for (k, corpus) in corpora.iter().enumerate() {
        let part = World {
            corpus: corpus.clone(),
            ..world.clone()
        };
        let pairs = part.annotated_pairs(9);
        let records = annotate(&world.quality, &pairs, Dimension::Appropriateness, &AnnotatorConfig { seed: k as u64, ..Default::default() });
        let labels = label_map(&aggregate(&records, DEFAULT_MAD_THRESHOLD)?.labels, Dimension::Appropriateness);
        let split = make_split(&pairs, SplitRatios { train: 0.8, valid: 0.1, test: 0.1 }, 1)?;
        let of = |s: Split| split.ids(s).into_iter().map(str::to_string).collect();
        domains.push(Domain {
            name: format!("world{k}"),
            corpus,
            source: &encoder,
            labels,
            train_ids: of(Split::Train),
            valid_ids: of(Split::Valid),
            test_ids: of(Split::Test),
        });
    }

    let mut spec = ModelSpec::new(Variant::Ruber, EvalConfig::UnreferencedOnly, Mode::SemiSupervised);
    spec.train.unsupervised.lr = 0.1;
    spec.train.supervised.lr = 0.01;
    spec.train.supervised.max_epochs = 30;
    let cells = transfer_report(&domains, &[(0, 0), (0, 1), (1, 1), (1, 0)], &spec, 1)?;
    for c in &cells {
        println!("{} -> {}  pearson {:.3}  spearman {:.3}", c.train, c.test, c.report.pearson_r, c.report.spearman_rho);
    }
    Ok(())
}
