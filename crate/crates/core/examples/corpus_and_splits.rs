//! Load the bundled corpus, draw negatives from other dialogues and split
//! the rated pairs 0.8 / 0.1 / 0.1.
//!
//!     cargo run --example corpus_and_splits

use std::collections::BTreeMap;
use std::path::Path;

use dialeval::corpus::{make_split, sample_negatives, Corpus, Split, SplitRatios};

fn main() -> dialeval::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let corpus = Corpus::load(data.join("corpus.jsonl"))?;
    println!("{} dialogues, {} candidates", corpus.dialogues().len(), corpus.candidates().len());

    let mut by_source: BTreeMap<String, usize> = BTreeMap::new();
    for c in corpus.candidates() {
        *by_source.entry(c.source.tag()).or_default() += 1;
    }
    for (tag, n) in &by_source {
        println!("  {tag:<28} {n}");
    }

    let negs = sample_negatives(&corpus, 2, 7)?;
    let self_pairs = negs.iter().filter(|n| n.origin_dialogue_id == n.candidate.dialogue_id).count();
    println!("{} negatives, {self_pairs} drawn from their own dialogue", negs.len());
    let first = &negs[0];
    println!(
        "  {} <- text of {}: {:?}",
        first.candidate.pair_id, first.origin_pair_id, first.candidate.text
    );
    let grown = corpus.with_candidates(negs.into_iter().map(|n| n.candidate))?;
    println!("corpus now holds {} candidates", grown.candidates().len());

    let ids: Vec<String> = corpus.candidates().iter().take(900).map(|c| c.pair_id.clone()).collect();
    let split = make_split(&ids, SplitRatios { train: 0.8, valid: 0.1, test: 0.1 }, 1)?;
    println!(
        "split of {}: train {} valid {} test {}",
        ids.len(),
        split.len(Split::Train),
        split.len(Split::Valid),
        split.len(Split::Test)
    );
    Ok(())
}
