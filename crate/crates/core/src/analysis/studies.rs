use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::{basic_report, CorrelationReport, ReportRow};
use crate::annotation::Dimension;
use crate::corpus::Corpus;
use crate::derive_seed;
use crate::embeddings::{fit_pca, VectorSource};
use crate::error::{Error, Result};
use crate::evaluators::{
    gather_inputs, score_batch, EvalConfig, EvaluatorParams, InitOptions, Variant, ADEM_PCA_COMPONENTS, DEFAULT_HIDDEN,
};
use crate::trainer::{
    corpus_triples, supervised_examples, train, FixedTriples, Mode, ResampledTriples, TrainConfig, TrainData,
    TrainTrace,
};

pub const DEFAULT_LOW_RESOURCE_SIZES: [usize; 6] = [25, 50, 100, 200, 400, 720];

/// A labelled corpus with encodings and a pair-level split.
pub struct Domain<'a> {
    pub name: String,
    pub corpus: &'a Corpus,
    pub source: &'a dyn VectorSource,
    pub labels: BTreeMap<String, f64>,
    pub train_ids: Vec<String>,
    pub valid_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

/// Everything needed to build and train one evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub variant: Variant,
    pub config: EvalConfig,
    pub hidden_dims: Vec<usize>,
    /// ADEM only; skipped when the encodings are already this small.
    pub pca_components: Option<usize>,
    pub train: TrainConfig,
    pub negatives_per_dialogue: usize,
}

impl ModelSpec {
    pub fn new(variant: Variant, config: EvalConfig, mode: Mode) -> Self {
        ModelSpec {
            variant,
            config: if variant == Variant::EncHead {
                EvalConfig::UnreferencedOnly
            } else {
                config
            },
            hidden_dims: DEFAULT_HIDDEN.to_vec(),
            pca_components: (variant == Variant::Adem).then_some(ADEM_PCA_COMPONENTS),
            train: TrainConfig::defaults(variant, mode),
            negatives_per_dialogue: 1,
        }
    }
}

fn as_strs(ids: &[String]) -> Vec<&str> {
    ids.iter().map(String::as_str).collect()
}

fn initial_params(spec: &ModelSpec, domain: &Domain<'_>, train_ids: &[&str], seed: u64) -> Result<EvaluatorParams> {
    let dim = domain.source.dim();
    let mut opts = InitOptions {
        hidden_dims: spec.hidden_dims.clone(),
        pca: None,
        seed: derive_seed(seed, &[0x696e6974]),
    };
    let base = EvaluatorParams::init(spec.variant, spec.config, dim, &opts)?;
    match spec.pca_components {
        Some(k) if spec.variant == Variant::Adem && dim > k => {
            let mut cands: Vec<_> = train_ids.iter().filter_map(|id| domain.corpus.candidate(id)).collect();
            if cands.is_empty() {
                cands = domain.corpus.candidates().iter().collect();
            }
            let inputs = gather_inputs(domain.corpus, cands, domain.source, &base)?;
            let vectors: Vec<Vec<f64>> = inputs
                .into_iter()
                .flat_map(|p| [p.context, p.reference, p.hypothesis])
                .flatten()
                .collect();
            opts.pca = Some(fit_pca(&vectors, k)?);
            EvaluatorParams::init(spec.variant, spec.config, dim, &opts)
        }
        _ => Ok(base),
    }
}

/// Train on `train_ids` of `domain` using `train_labels` (which may differ
/// from `domain.labels`, e.g. with noise added). Validation uses
/// `domain.valid_ids` against `domain.labels`.
pub fn fit_model(
    spec: &ModelSpec,
    domain: &Domain<'_>,
    train_ids: &[&str],
    train_labels: &BTreeMap<String, f64>,
    seed: u64,
) -> Result<(EvaluatorParams, TrainTrace)> {
    let params = initial_params(spec, domain, train_ids, seed)?;
    let mut config = spec.train;
    config.seed = seed;
    let mut data = TrainData::default();
    if matches!(config.mode, Mode::Unsupervised | Mode::SemiSupervised) {
        if domain.source.encodes_arbitrary_text() {
            data.triples = Some(Box::new(ResampledTriples::new(
                domain.corpus,
                domain.source,
                &params,
                spec.negatives_per_dialogue,
            )?));
        } else {
            let fixed = corpus_triples(domain.corpus, domain.source, &params)?;
            if fixed.is_empty() {
                return Err(Error::InsufficientData(
                    "no negative_sample candidates to train on with fixed encodings".into(),
                ));
            }
            data.triples = Some(Box::new(FixedTriples(fixed)));
        }
    }
    if matches!(config.mode, Mode::Supervised | Mode::SemiSupervised) {
        if train_labels.is_empty() {
            return Err(Error::MissingLabels);
        }
        let labeled = supervised_examples(domain.corpus, domain.source, &params, train_labels, train_ids)?;
        let valid_ids = as_strs(&domain.valid_ids);
        let valid = supervised_examples(domain.corpus, domain.source, &params, &domain.labels, &valid_ids)?;
        data.labeled = Some(labeled);
        data.valid_labeled = valid;
    }
    train(&params, &data, &config)
}

/// Scaled scores for `ids` keyed by pair id.
pub fn score_ids(params: &EvaluatorParams, domain: &Domain<'_>, ids: &[&str]) -> Result<BTreeMap<String, f64>> {
    let mut missing = Vec::new();
    let cands: Vec<_> = ids
        .iter()
        .filter_map(|id| {
            let c = domain.corpus.candidate(id);
            if c.is_none() {
                missing.push(id.to_string());
            }
            c
        })
        .collect();
    if !missing.is_empty() {
        return Err(Error::UnresolvedIds(missing));
    }
    let inputs = gather_inputs(domain.corpus, cands.iter().copied(), domain.source, params)?;
    let owned: Vec<String> = cands.iter().map(|c| c.pair_id.clone()).collect();
    Ok(score_batch(&owned, &inputs, params)?
        .into_iter()
        .map(|r| (r.pair_id, r.scaled))
        .collect())
}

/// Correlation of `params` with `domain.labels` on the test split.
pub fn evaluate_model(params: &EvaluatorParams, domain: &Domain<'_>) -> Result<CorrelationReport> {
    let scores = score_ids(params, domain, &as_strs(&domain.test_ids))?;
    basic_report(&scores, &domain.labels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferCell {
    pub train: String,
    pub test: String,
    pub report: CorrelationReport,
}

/// Train on each cell's first domain and test on its second.
pub fn transfer_report(
    domains: &[Domain<'_>],
    cells: &[(usize, usize)],
    spec: &ModelSpec,
    seed: u64,
) -> Result<Vec<TransferCell>> {
    for &(a, b) in cells {
        if a >= domains.len() || b >= domains.len() {
            return Err(Error::invalid(format!("transfer cell ({a}, {b}) names an unknown domain")));
        }
    }
    cells
        .par_iter()
        .map(|&(a, b)| {
            let (src, dst) = (&domains[a], &domains[b]);
            let (params, _) = fit_model(spec, src, &as_strs(&src.train_ids), &src.labels, seed)?;
            Ok(TransferCell {
                train: src.name.clone(),
                test: dst.name.clone(),
                report: evaluate_model(&params, dst)?,
            })
        })
        .collect()
}

/// `size` ids drawn without replacement, kept in their original order.
pub fn subsample_ids<'s>(ids: &[&'s str], size: usize, seed: u64) -> Result<Vec<&'s str>> {
    if size > ids.len() {
        return Err(Error::InsufficientData(format!(
            "subset size {size} exceeds {} training pairs",
            ids.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, ids.len(), size).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| ids[i]).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub size: usize,
    pub mean_pearson: f64,
    pub mean_spearman: f64,
    pub per_seed: Vec<CorrelationReport>,
}

/// Train on subsets of the training split and test on the test split.
pub fn low_resource_curve(domain: &Domain<'_>, spec: &ModelSpec, sizes: &[usize], seeds: &[u64]) -> Result<Vec<CurvePoint>> {
    if seeds.is_empty() {
        return Err(Error::invalid("low-resource curve needs at least one seed"));
    }
    let train_ids = as_strs(&domain.train_ids);
    if let Some(&s) = sizes.iter().find(|&&s| s > train_ids.len()) {
        return Err(Error::InsufficientData(format!(
            "subset size {s} exceeds {} training pairs",
            train_ids.len()
        )));
    }
    let jobs: Vec<(usize, u64)> = sizes.iter().flat_map(|&s| seeds.iter().map(move |&k| (s, k))).collect();
    let reports: Vec<CorrelationReport> = jobs
        .par_iter()
        .map(|&(size, seed)| {
            let ids = subsample_ids(&train_ids, size, derive_seed(seed, &[0x7375627365])) ?;
            let (params, _) = fit_model(spec, domain, &ids, &domain.labels, seed)?;
            evaluate_model(&params, domain)
        })
        .collect::<Result<_>>()?;
    Ok(sizes
        .iter()
        .zip(reports.chunks(seeds.len()))
        .map(|(&size, chunk)| summarize(size, chunk))
        .collect())
}

fn summarize(size: usize, chunk: &[CorrelationReport]) -> CurvePoint {
    let n = chunk.len() as f64;
    CurvePoint {
        size,
        mean_pearson: chunk.iter().map(|r| r.pearson_r).sum::<f64>() / n,
        mean_spearman: chunk.iter().map(|r| r.spearman_rho).sum::<f64>() / n,
        per_seed: chunk.to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePoint {
    pub sigma: f64,
    pub mean_pearson: f64,
    pub mean_spearman: f64,
    pub per_seed: Vec<CorrelationReport>,
}

/// Gaussian noise on the training labels (unclipped), clean evaluation.
pub fn noisy_labels(domain: &Domain<'_>, sigma: f64, seed: u64) -> Result<BTreeMap<String, f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let mut labels = domain.labels.clone();
    if sigma == 0.0 {
        return Ok(labels);
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x6e6f697365]));
    for id in &domain.train_ids {
        if let Some(y) = labels.get_mut(id) {
            *y += normal.sample(&mut rng);
        }
    }
    Ok(labels)
}

pub fn noise_robustness(domain: &Domain<'_>, spec: &ModelSpec, sigmas: &[f64], seeds: &[u64]) -> Result<Vec<NoisePoint>> {
    if seeds.is_empty() {
        return Err(Error::invalid("noise study needs at least one seed"));
    }
    let train_ids = as_strs(&domain.train_ids);
    let jobs: Vec<(f64, u64)> = sigmas.iter().flat_map(|&s| seeds.iter().map(move |&k| (s, k))).collect();
    let reports: Vec<CorrelationReport> = jobs
        .par_iter()
        .map(|&(sigma, seed)| {
            let labels = noisy_labels(domain, sigma, seed)?;
            let (params, _) = fit_model(spec, domain, &train_ids, &labels, seed)?;
            evaluate_model(&params, domain)
        })
        .collect::<Result<_>>()?;
    Ok(sigmas
        .iter()
        .zip(reports.chunks(seeds.len()))
        .map(|(&sigma, chunk)| {
            let p = summarize(0, chunk);
            NoisePoint {
                sigma,
                mean_pearson: p.mean_pearson,
                mean_spearman: p.mean_spearman,
                per_seed: p.per_seed,
            }
        })
        .collect())
}

/// Correlation of one score set with labels of several quality dimensions.
pub fn dimension_sensitivity(
    scores: &BTreeMap<String, f64>,
    labels: &[(Dimension, BTreeMap<String, f64>)],
) -> Result<Vec<ReportRow>> {
    labels
        .iter()
        .map(|(dim, l)| {
            Ok(ReportRow {
                name: dim.to_string(),
                report: basic_report(scores, l)?,
            })
        })
        .collect()
}
