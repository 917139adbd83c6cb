//! Reference-based automated metrics: sentence BLEU-2 and the three
//! word-embedding similarities (average, vector extrema, greedy matching).

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::Corpus;
use crate::embeddings::{encode_bag, EmbeddingTable};
use crate::error::{Error, Result};
use crate::io_util;
use crate::linalg::cosine;

/// Floor applied to each modified n-gram precision.
pub const BLEU_PRECISION_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricName {
    Bleu2,
    Average,
    Extrema,
    Greedy,
}

impl MetricName {
    pub const ALL: [MetricName; 4] = [
        MetricName::Bleu2,
        MetricName::Average,
        MetricName::Extrema,
        MetricName::Greedy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Bleu2 => "bleu2",
            MetricName::Average => "average",
            MetricName::Extrema => "extrema",
            MetricName::Greedy => "greedy",
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MetricName::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown metric {s:?}")))
    }
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    counts
}

fn modified_precision<S: AsRef<str>>(reference: &[S], hypothesis: &[S], n: usize) -> f64 {
    let hyp = ngram_counts(hypothesis, n);
    let total: usize = hyp.values().sum();
    if total == 0 {
        return BLEU_PRECISION_FLOOR;
    }
    let refc = ngram_counts(reference, n);
    let clipped: usize = hyp
        .iter()
        .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
        .sum();
    (clipped as f64 / total as f64).max(BLEU_PRECISION_FLOOR)
}

/// Sentence-level BLEU over unigrams and bigrams with a brevity penalty.
pub fn bleu2<S: AsRef<str>>(reference: &[S], hypothesis: &[S]) -> Result<f64> {
    if hypothesis.is_empty() {
        return Err(Error::invalid("BLEU-2 needs a non-empty hypothesis"));
    }
    let p1 = modified_precision(reference, hypothesis, 1);
    let p2 = modified_precision(reference, hypothesis, 2);
    let bp = (1.0 - reference.len() as f64 / hypothesis.len() as f64)
        .exp()
        .min(1.0);
    Ok(bp * (0.5 * (p1.ln() + p2.ln())).exp())
}

fn known_vectors<'t, S: AsRef<str>>(tokens: &[S], table: &'t EmbeddingTable) -> Result<Vec<&'t [f64]>> {
    let v: Vec<&[f64]> = tokens.iter().filter_map(|t| table.get(t.as_ref())).collect();
    if v.is_empty() {
        return Err(Error::NoEmbeddableTokens);
    }
    Ok(v)
}

/// Cosine between the mean embeddings; 0 when a mean vector is zero.
pub fn embedding_average<S: AsRef<str>>(reference: &[S], hypothesis: &[S], table: &EmbeddingTable) -> Result<f64> {
    let r = encode_bag(reference, table);
    let h = encode_bag(hypothesis, table);
    if r.is_empty() || h.is_empty() {
        return Err(Error::NoEmbeddableTokens);
    }
    Ok(cosine(&r.vector, &h.vector).unwrap_or(0.0))
}

/// Per dimension, the extreme value with the largest magnitude (max on ties).
pub fn extrema_vector(vectors: &[&[f64]]) -> Vec<f64> {
    let dim = vectors.first().map_or(0, |v| v.len());
    (0..dim)
        .map(|j| {
            let max = vectors.iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max);
            let min = vectors.iter().map(|v| v[j]).fold(f64::INFINITY, f64::min);
            if max >= min.abs() {
                max
            } else {
                min
            }
        })
        .collect()
}

pub fn vector_extrema<S: AsRef<str>>(reference: &[S], hypothesis: &[S], table: &EmbeddingTable) -> Result<f64> {
    let r = extrema_vector(&known_vectors(reference, table)?);
    let h = extrema_vector(&known_vectors(hypothesis, table)?);
    Ok(cosine(&r, &h).unwrap_or(0.0))
}

fn greedy_direction(from: &[&[f64]], to: &[&[f64]]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|a| {
            to.iter()
                .map(|b| cosine(a, b).unwrap_or(0.0))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum();
    total / from.len() as f64
}

/// Symmetric greedy matching of word embeddings.
pub fn greedy_matching<S: AsRef<str>>(reference: &[S], hypothesis: &[S], table: &EmbeddingTable) -> Result<f64> {
    let r = known_vectors(reference, table)?;
    let h = known_vectors(hypothesis, table)?;
    Ok((greedy_direction(&r, &h) + greedy_direction(&h, &r)) / 2.0)
}

/// Score one `(reference, hypothesis)` pair with `metric`. Embedding metrics
/// need a table.
pub fn score_pair<S: AsRef<str>>(
    metric: MetricName,
    reference: &[S],
    hypothesis: &[S],
    table: Option<&EmbeddingTable>,
) -> Result<f64> {
    let need_table = || table.ok_or_else(|| Error::invalid(format!("{metric} needs an embedding table")));
    match metric {
        MetricName::Bleu2 => bleu2(reference, hypothesis),
        MetricName::Average => embedding_average(reference, hypothesis, need_table()?),
        MetricName::Extrema => vector_extrema(reference, hypothesis, need_table()?),
        MetricName::Greedy => greedy_matching(reference, hypothesis, need_table()?),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricScore {
    pub pair_id: String,
    pub metric: MetricName,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricRun {
    pub scores: Vec<MetricScore>,
    /// `(pair_id, metric, reason)` for pairs that could not be scored.
    pub skipped: Vec<(String, MetricName, String)>,
}

/// Score every candidate against its dialogue's ground truth.
pub fn run_metrics(corpus: &Corpus, table: Option<&EmbeddingTable>, metrics: &[MetricName]) -> MetricRun {
    let mut run = MetricRun::default();
    for c in corpus.candidates() {
        let Some(reference) = corpus.ground_truth(&c.dialogue_id) else {
            for &m in metrics {
                run.skipped
                    .push((c.pair_id.clone(), m, "no ground-truth reference".into()));
            }
            continue;
        };
        for &m in metrics {
            match score_pair(m, &reference.tokens, &c.tokens, table) {
                Ok(value) => run.scores.push(MetricScore {
                    pair_id: c.pair_id.clone(),
                    metric: m,
                    value,
                }),
                Err(e) => run.skipped.push((c.pair_id.clone(), m, e.to_string())),
            }
        }
    }
    run
}

pub fn save_metric_scores(scores: &[MetricScore], path: impl AsRef<Path>, header: Option<&str>) -> Result<()> {
    io_util::write_atomic(path.as_ref(), |w| {
        if let Some(h) = header {
            io_util::write_header(w, h)?;
        }
        writeln!(w, "pair_id\tmetric\tvalue")?;
        for s in scores {
            writeln!(w, "{}\t{}\t{:.6}", s.pair_id, s.metric, s.value)?;
        }
        Ok(())
    })
}
