//! Seeded synthetic dialogue worlds with known response quality.
//!
//! Words belong to topics; a topic word's embedding is its topic centroid
//! plus noise. Each dialogue stays on one topic. A response's latent
//! quality is `1 + 4 · f`, where `f` is the fraction of its content words
//! drawn from the dialogue's topic, so word-vector encoders carry signal
//! about quality while no encoder sees it directly.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::annotation::{AnnotationRecord, Dimension};
use crate::corpus::{Corpus, Decoding, DialogueContext, ResponseCandidate, ResponseSource, Utterance};
use crate::derive_seed;
use crate::embeddings::EmbeddingTable;
use crate::error::Result;
use crate::linalg::norm;

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub n_topics: usize,
    pub words_per_topic: usize,
    /// Topic-free filler words ("the", "and", ...).
    pub n_function_words: usize,
    pub dim: usize,
    /// Size of per-word noise relative to the unit-norm topic centroid.
    pub word_noise: f64,
    pub n_dialogues: usize,
    pub turns_per_dialogue: usize,
    pub words_per_turn: usize,
    /// Model-generated candidates per dialogue, on top of one ground truth
    /// and one negative sample.
    pub model_candidates: usize,
    pub seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            n_topics: 50,
            words_per_topic: 20,
            n_function_words: 30,
            dim: 32,
            word_noise: 0.35,
            n_dialogues: 100,
            turns_per_dialogue: 3,
            words_per_turn: 8,
            model_candidates: 18,
            seed: 0,
        }
    }
}

pub const MODEL_NAMES: [&str; 3] = ["seq2seq", "hred", "transformer"];
const DECODINGS: [Decoding; 3] = [Decoding::Greedy, Decoding::Ancestral, Decoding::Nucleus];

#[derive(Debug, Clone)]
pub struct World {
    pub table: EmbeddingTable,
    pub corpus: Corpus,
    /// Latent quality in `[1, 5]` per pair id.
    pub quality: BTreeMap<String, f64>,
    /// Topic of each dialogue.
    pub topics: BTreeMap<String, usize>,
}

fn topic_word(t: usize, j: usize) -> String {
    format!("t{t}w{j}")
}

fn function_word(j: usize) -> String {
    format!("fw{j}")
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn build_table(cfg: &WorldConfig, rng: &mut ChaCha8Rng) -> Result<EmbeddingTable> {
    let mut table = EmbeddingTable::new(cfg.dim)?;
    let scale = cfg.word_noise / (cfg.dim as f64).sqrt();
    for t in 0..cfg.n_topics {
        let centroid = random_unit(cfg.dim, rng);
        for j in 0..cfg.words_per_topic {
            let v = centroid
                .iter()
                .map(|c| c + scale * rng.sample::<f64, _>(StandardNormal))
                .collect();
            table.insert(topic_word(t, j), v)?;
        }
    }
    for j in 0..cfg.n_function_words {
        let v = (0..cfg.dim)
            .map(|_| 0.3 * scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        table.insert(function_word(j), v)?;
    }
    Ok(table)
}

/// Words for one utterance: `topical` of them from `topic`, the rest from
/// random other topics, with a function word every few slots.
fn utterance(cfg: &WorldConfig, topic: usize, n: usize, topical: usize, rng: &mut ChaCha8Rng) -> (String, usize, usize) {
    let mut words = Vec::with_capacity(n + n / 3);
    let mut slots: Vec<bool> = (0..n).map(|i| i < topical).collect();
    for i in (1..slots.len()).rev() {
        slots.swap(i, rng.random_range(0..=i));
    }
    for (i, on_topic) in slots.iter().enumerate() {
        let t = if *on_topic || cfg.n_topics == 1 {
            topic
        } else {
            let mut other = rng.random_range(0..cfg.n_topics - 1);
            if other >= topic {
                other += 1;
            }
            other
        };
        words.push(topic_word(t, rng.random_range(0..cfg.words_per_topic)));
        if cfg.n_function_words > 0 && i % 3 == 1 {
            words.push(function_word(rng.random_range(0..cfg.n_function_words)));
        }
    }
    (words.join(" "), topical, n)
}

fn quality_of(topical: usize, n: usize) -> f64 {
    1.0 + 4.0 * topical as f64 / n as f64
}

impl World {
    pub fn generate(cfg: &WorldConfig) -> Result<World> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[1]));
        let table = build_table(cfg, &mut rng)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[2]));
        let mut dialogues = Vec::with_capacity(cfg.n_dialogues);
        let mut candidates = Vec::new();
        let mut quality = BTreeMap::new();
        let mut topics = BTreeMap::new();
        let mut gt_text = Vec::with_capacity(cfg.n_dialogues);
        let width = cfg.n_dialogues.max(1).to_string().len().max(3);
        for d in 0..cfg.n_dialogues {
            let did = format!("d{d:0width$}");
            let topic = rng.random_range(0..cfg.n_topics);
            topics.insert(did.clone(), topic);
            let turns = (0..cfg.turns_per_dialogue)
                .map(|k| {
                    let on = cfg.words_per_turn - rng.random_range(0..=cfg.words_per_turn / 4);
                    let (text, _, _) = utterance(cfg, topic, cfg.words_per_turn, on, &mut rng);
                    Utterance::new(if k % 2 == 0 { "A" } else { "B" }, text)
                })
                .collect();
            dialogues.push(DialogueContext {
                dialogue_id: did.clone(),
                turns,
            });
            let n = cfg.words_per_turn;
            let on = n - rng.random_range(0..=n / 5);
            let (text, t, len) = utterance(cfg, topic, n, on, &mut rng);
            let pid = format!("{did}-gt");
            quality.insert(pid.clone(), quality_of(t, len));
            gt_text.push((did.clone(), topic, text.clone()));
            candidates.push(ResponseCandidate::new(pid, did.clone(), ResponseSource::GroundTruth, text));
            for m in 0..cfg.model_candidates {
                let n = rng.random_range(cfg.words_per_turn / 2..=cfg.words_per_turn).max(1);
                let on = rng.random_range(0..=n);
                let (text, t, len) = utterance(cfg, topic, n, on, &mut rng);
                let pid = format!("{did}-m{m:02}");
                quality.insert(pid.clone(), quality_of(t, len));
                let source = ResponseSource::Model {
                    name: MODEL_NAMES[m % MODEL_NAMES.len()].to_string(),
                    decoding: DECODINGS[(m / MODEL_NAMES.len()) % DECODINGS.len()],
                };
                candidates.push(ResponseCandidate::new(pid, did.clone(), source, text));
            }
        }
        // One negative per dialogue: the ground truth of a different dialogue.
        if cfg.n_dialogues >= 2 {
            for (d, (did, topic, _)) in gt_text.iter().enumerate() {
                let mut other = rng.random_range(0..cfg.n_dialogues - 1);
                if other >= d {
                    other += 1;
                }
                let (_, _, text) = &gt_text[other];
                let pid = format!("{did}-ns");
                let prefix = format!("t{topic}w");
                let topical = text.split(' ').filter(|w| w.starts_with(&prefix)).count();
                let content = text.split(' ').filter(|w| w.starts_with('t')).count();
                quality.insert(pid.clone(), quality_of(topical, content.max(1)));
                candidates.push(ResponseCandidate::new(
                    pid,
                    did.clone(),
                    ResponseSource::NegativeSample,
                    text.clone(),
                ));
            }
        }
        let corpus = Corpus::new(dialogues, candidates)?;
        Ok(World {
            table,
            corpus,
            quality,
            topics,
        })
    }

    /// `per_dialogue` pair ids from every dialogue: the ground truth, the
    /// negative sample, then model responses in order.
    pub fn annotated_pairs(&self, per_dialogue: usize) -> Vec<String> {
        let mut by_dialogue: BTreeMap<&str, Vec<&ResponseCandidate>> = BTreeMap::new();
        for c in self.corpus.candidates() {
            by_dialogue.entry(c.dialogue_id.as_str()).or_default().push(c);
        }
        let rank = |c: &ResponseCandidate| match c.source {
            ResponseSource::GroundTruth => 0,
            ResponseSource::NegativeSample => 1,
            ResponseSource::Model { .. } => 2,
        };
        let mut out = Vec::new();
        for (_, mut cs) in by_dialogue {
            cs.sort_by_key(|c| rank(c));
            out.extend(cs.into_iter().take(per_dialogue).map(|c| c.pair_id.clone()));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatorConfig {
    pub workers_per_pair: usize,
    pub worker_pool: usize,
    /// Standard deviation of an attentive worker's error.
    pub noise_sd: f64,
    /// Probability that a single rating is a uniform random score.
    pub careless_rate: f64,
    pub seed: u64,
}

impl Default for AnnotatorConfig {
    fn default() -> Self {
        AnnotatorConfig {
            workers_per_pair: 4,
            worker_pool: 40,
            noise_sd: 0.45,
            careless_rate: 0.15,
            seed: 0,
        }
    }
}

fn likert(x: f64) -> u8 {
    (x.round().clamp(1.0, 5.0)) as u8
}

/// Crowd ratings of `pair_ids` around their latent quality.
pub fn annotate(
    quality: &BTreeMap<String, f64>,
    pair_ids: &[String],
    dimension: Dimension,
    cfg: &AnnotatorConfig,
) -> Vec<AnnotationRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[3, dimension as u64]));
    let noise = Normal::new(0.0, cfg.noise_sd.max(1e-12)).expect("valid sd");
    let pool: Vec<String> = (0..cfg.worker_pool).map(|w| format!("w{w:03}")).collect();
    let mut out = Vec::with_capacity(pair_ids.len() * cfg.workers_per_pair);
    for id in pair_ids {
        let q = quality.get(id).copied().unwrap_or(3.0);
        let workers: Vec<&String> = pool
            .choose_multiple(&mut rng, cfg.workers_per_pair.min(cfg.worker_pool))
            .collect();
        for w in workers {
            let score = if rng.random_bool(cfg.careless_rate.clamp(0.0, 1.0)) {
                rng.random_range(1..=5)
            } else {
                likert(q + noise.sample(&mut rng))
            };
            out.push(AnnotationRecord {
                pair_id: id.clone(),
                worker_id: w.clone(),
                dimension,
                score,
            });
        }
    }
    out
}
