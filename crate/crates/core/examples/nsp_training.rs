//! Unsupervised next-response training of the reference-free RUBER head on
//! a synthetic topic world, then held-out ranking accuracy.
//!
//!     cargo run --release --example nsp_training

use std::collections::HashSet;

use dialeval::embeddings::{BagEncoder, VectorSource};
use dialeval::evaluators::{gather_inputs, head_output, EvalConfig, EvaluatorParams, InitOptions, Variant};
use dialeval::synth::{World, WorldConfig};
use dialeval::trainer::{train, Mode, ResampledTriples, StageConfig, TrainConfig, TrainData};

fn main() -> dialeval::Result<()> {
    let world = World::generate(&WorldConfig {
        n_dialogues: 200,
        model_candidates: 0,
        seed: 7,
        ..Default::default()
    })?;
    let ids: Vec<&str> = world.corpus.dialogues().iter().map(|d| d.dialogue_id.as_str()).collect();
    let (train_ids, held_ids) = ids.split_at(160);
    let train_corpus = world.corpus.subset(&train_ids.iter().copied().collect::<HashSet<_>>())?;
    let held = world.corpus.subset(&held_ids.iter().copied().collect::<HashSet<_>>())?;
    let encoder = BagEncoder::new(world.table.clone());

    let params = EvaluatorParams::init(
        Variant::Ruber,
        EvalConfig::UnreferencedOnly,
        encoder.dim(),
        &InitOptions {
            hidden_dims: vec![64],
            pca: None,
            seed: 1,
        },
    )?;
    let mut config = TrainConfig::defaults(Variant::Ruber, Mode::Unsupervised);
    config.unsupervised = StageConfig::new(0.1, 30, 30);
    let triples = ResampledTriples::new(&train_corpus, &encoder, &params, 1)?;
    let (trained, trace) = train(&params, &TrainData::unsupervised(triples, vec![]), &config)?;
    for e in trace.epochs().iter().step_by(5) {
        println!("epoch {:>2}  loss {:.4}  lr {:.0e}", e.epoch, e.train_loss, e.lr);
    }

    // Every held-out ground truth against every other held-out ground truth.
    let gts: Vec<_> = held
        .dialogues()
        .iter()
        .map(|d| held.ground_truth(&d.dialogue_id).unwrap().clone())
        .collect();
    let mut wins = 0usize;
    let mut total = 0usize;
    for (i, d) in held.dialogues().iter().enumerate() {
        let swapped: Vec<_> = gts
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, g)| {
                let mut c = g.clone();
                c.dialogue_id = d.dialogue_id.clone();
                c
            })
            .collect();
        let pos = gather_inputs(&held, [&gts[i]], &encoder, &trained)?;
        let s_pos = head_output(&trained, &pos[0])?;
        for input in gather_inputs(&held, &swapped, &encoder, &trained)? {
            wins += usize::from(s_pos > head_output(&trained, &input)?);
            total += 1;
        }
    }
    println!("held-out ranking accuracy {:.4} over {total} pairs", wins as f64 / total as f64);
    Ok(())
}
