//! Write a synthetic topic world to disk: corpus, word vectors and crowd
//! ratings, plus aggregated labels and a split. The bundled `data/` directory was produced with
//!
//!     cargo run --release --example synthetic_fixtures -- crates/core/data

use std::path::PathBuf;

use dialeval::annotation::{aggregate, save_annotations, save_labels, Dimension, DEFAULT_MAD_THRESHOLD};
use dialeval::corpus::{make_split, SplitRatios};
use dialeval::synth::{annotate, AnnotatorConfig, World, WorldConfig};

fn main() -> dialeval::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&out).map_err(|e| dialeval::Error::io(&out, e))?;

    let world = World::generate(&WorldConfig::default())?;
    let pairs = world.annotated_pairs(9);
    let mut records = annotate(&world.quality, &pairs, Dimension::Appropriateness, &AnnotatorConfig::default());
    // Relevance raters are a little more careful.
    records.extend(annotate(
        &world.quality,
        &pairs,
        Dimension::Relevance,
        &AnnotatorConfig {
            noise_sd: 0.35,
            careless_rate: 0.1,
            ..Default::default()
        },
    ));

    world.corpus.save(out.join("corpus.jsonl"), Some("synthetic topic world, seed 0"))?;
    world.table.save(out.join("embeddings.txt"))?;
    save_annotations(&records, out.join("annotations.tsv"), Some("synthetic crowd ratings"))?;
    let agg = aggregate(&records, DEFAULT_MAD_THRESHOLD)?;
    save_labels(&agg.labels, out.join("labels.tsv"), Some("MAD-filtered means"))?;
    let split = make_split(&pairs, SplitRatios { train: 0.8, valid: 0.1, test: 0.1 }, 1)?;
    split.save(out.join("split.tsv"), Some("0.8/0.1/0.1 of the rated pairs, seed 1"))?;
    println!(
        "{} dialogues, {} candidates, {} words, {} ratings over {} pairs -> {}",
        world.corpus.dialogues().len(),
        world.corpus.candidates().len(),
        world.table.len(),
        records.len(),
        pairs.len(),
        out.display()
    );
    Ok(())
}
