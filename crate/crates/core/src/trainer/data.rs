use std::collections::{BTreeMap, HashMap, HashSet};

use crate::corpus::{sample_negatives, Corpus, ResponseCandidate, ResponseSource};
use crate::derive_seed;
use crate::embeddings::VectorSource;
use crate::error::{Error, Result};
use crate::evaluators::{gather_inputs, EvaluatorParams};

use super::backward::{RankingExample, SupervisedExample};

/// Supplies `(context, ground truth, negative)` triples for each epoch.
pub trait TripleSource {
    /// Triples for `epoch` (0-based). `seed` is the run seed.
    fn epoch(&self, epoch: usize, seed: u64) -> Result<Vec<RankingExample>>;
}

/// The same triples every epoch.
#[derive(Debug, Clone, Default)]
pub struct FixedTriples(pub Vec<RankingExample>);

impl TripleSource for FixedTriples {
    fn epoch(&self, _epoch: usize, _seed: u64) -> Result<Vec<RankingExample>> {
        Ok(self.0.clone())
    }
}

/// Fresh negatives drawn every epoch from other dialogues' ground truths.
/// Needs a source that can encode text it has not seen.
pub struct ResampledTriples<'a> {
    corpus: &'a Corpus,
    source: &'a dyn VectorSource,
    params: EvaluatorParams,
    per_dialogue: usize,
}

impl<'a> ResampledTriples<'a> {
    pub fn new(
        corpus: &'a Corpus,
        source: &'a dyn VectorSource,
        params: &EvaluatorParams,
        per_dialogue: usize,
    ) -> Result<Self> {
        if !source.encodes_arbitrary_text() {
            return Err(Error::invalid(format!(
                "encoder {:?} cannot encode resampled negatives",
                source.name()
            )));
        }
        if per_dialogue == 0 {
            return Err(Error::invalid("need at least one negative per dialogue"));
        }
        Ok(ResampledTriples {
            corpus,
            source,
            params: params.clone(),
            per_dialogue,
        })
    }
}

impl TripleSource for ResampledTriples<'_> {
    fn epoch(&self, epoch: usize, seed: u64) -> Result<Vec<RankingExample>> {
        let negatives = sample_negatives(self.corpus, self.per_dialogue, derive_seed(seed, &[0x6e73, epoch as u64]))?;
        let negs: Vec<ResponseCandidate> = negatives.into_iter().map(|n| n.candidate).collect();
        pair_with_ground_truth(self.corpus, &negs, self.source, &self.params)
    }
}

fn pair_with_ground_truth(
    corpus: &Corpus,
    negatives: &[ResponseCandidate],
    source: &dyn VectorSource,
    params: &EvaluatorParams,
) -> Result<Vec<RankingExample>> {
    let mut positives = Vec::with_capacity(negatives.len());
    for n in negatives {
        positives.push(
            corpus
                .ground_truth(&n.dialogue_id)
                .ok_or_else(|| Error::invalid(format!("dialogue {} has no ground truth", n.dialogue_id)))?,
        );
    }
    let pos = gather_inputs(corpus, positives, source, params)?;
    let neg = gather_inputs(corpus, negatives, source, params)?;
    Ok(pos
        .into_iter()
        .zip(neg)
        .map(|(positive, negative)| RankingExample { positive, negative })
        .collect())
}

/// One triple per stored negative-sample candidate, paired with the ground
/// truth of its dialogue.
pub fn corpus_triples(corpus: &Corpus, source: &dyn VectorSource, params: &EvaluatorParams) -> Result<Vec<RankingExample>> {
    let negs: Vec<ResponseCandidate> = corpus
        .candidates()
        .iter()
        .filter(|c| matches!(c.source, ResponseSource::NegativeSample))
        .cloned()
        .collect();
    pair_with_ground_truth(corpus, &negs, source, params)
}

/// Labelled examples for `pair_ids`, in the given order.
pub fn supervised_examples(
    corpus: &Corpus,
    source: &dyn VectorSource,
    params: &EvaluatorParams,
    labels: &BTreeMap<String, f64>,
    pair_ids: &[&str],
) -> Result<Vec<SupervisedExample>> {
    let mut missing = Vec::new();
    let mut cands = Vec::with_capacity(pair_ids.len());
    let mut ys = Vec::with_capacity(pair_ids.len());
    for id in pair_ids {
        match (corpus.candidate(id), labels.get(*id)) {
            (Some(c), Some(&y)) => {
                cands.push(c);
                ys.push(y);
            }
            _ => missing.push(id.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::UnresolvedIds(missing));
    }
    let inputs = gather_inputs(corpus, cands, source, params)?;
    Ok(inputs
        .into_iter()
        .zip(ys)
        .map(|(input, label)| SupervisedExample { input, label })
        .collect())
}

/// Corpus restricted to the dialogues referenced by `pair_ids`.
pub fn dialogues_of(corpus: &Corpus, pair_ids: &[&str]) -> Result<Corpus> {
    let by_pair: HashMap<&str, &str> = corpus
        .candidates()
        .iter()
        .map(|c| (c.pair_id.as_str(), c.dialogue_id.as_str()))
        .collect();
    let keep: HashSet<&str> = pair_ids.iter().filter_map(|p| by_pair.get(p).copied()).collect();
    corpus.subset(&keep)
}
