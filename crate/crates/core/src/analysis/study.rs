//! JSON study descriptions and their runner.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{
    aligned, basic_report, discretize_scores, dimension_sensitivity, evaluate_model, fit_model, gt_excluded_report,
    low_resource_curve, noise_robustness, report_csv, report_table, score_ids, transfer_report, CurvePoint, Domain,
    ModelSpec, NoisePoint, ReportRow, DEFAULT_LOW_RESOURCE_SIZES,
};
use crate::annotation::{label_map, load_labels, AggregatedLabel, Dimension};
use crate::corpus::{Corpus, Split, SplitAssignment};
use crate::embeddings::{load_encodings, BagEncoder, EmbeddingTable, EncodingSet, VectorSource};
use crate::error::{Error, Result};
use crate::evaluators::{load_scores, EvalConfig, Variant};
use crate::io_util;
use crate::trainer::{Mode, StageConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Basic,
    GtExcluded,
    Transfer,
    LowResource,
    Noise,
    Discretize,
    DimensionSensitivity,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub name: String,
    pub corpus: PathBuf,
    #[serde(default)]
    pub encodings: Option<PathBuf>,
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    pub labels: PathBuf,
    #[serde(default)]
    pub split: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub lr: Option<f64>,
    pub batch: Option<usize>,
    pub epochs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub variant: String,
    #[serde(default)]
    pub config: Option<String>,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub hidden: Option<Vec<usize>>,
    #[serde(default)]
    pub pca: Option<usize>,
    #[serde(default)]
    pub unsup: Option<StageSpec>,
    #[serde(default)]
    pub sup: Option<StageSpec>,
    #[serde(default)]
    pub margin: Option<f64>,
    #[serde(default)]
    pub patience: Option<usize>,
    #[serde(default)]
    pub negatives: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Range { from: u64, to: u64 },
    List(Vec<u64>),
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::Range { from, to } => (*from..=*to).collect(),
            SeedSpec::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub kind: StudyKind,
    pub domains: Vec<DomainSpec>,
    #[serde(default)]
    pub model: Option<ModelFile>,
    /// Precomputed score file; when absent the model is trained on the
    /// first domain and scored on its test split.
    #[serde(default)]
    pub scores: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub seeds: Option<SeedSpec>,
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub sigmas: Option<Vec<f64>>,
    /// `[train, test]` domain names.
    #[serde(default)]
    pub cells: Option<Vec<[String; 2]>>,
    #[serde(default)]
    pub dimensions: Option<Vec<String>>,
}

impl StudySpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let spec: StudySpec = serde_json::from_reader(io_util::open(path)?)
            .map_err(|e| io_util::with_path(Error::parse(e.line(), e.to_string()), path))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Check that every parameter the kind needs is present.
    pub fn validate(&self) -> Result<()> {
        if self.domains.is_empty() {
            return Err(Error::invalid("study needs at least one domain"));
        }
        let needs_model = match self.kind {
            StudyKind::Transfer | StudyKind::LowResource | StudyKind::Noise => true,
            _ => self.scores.is_none(),
        };
        if needs_model && self.model.is_none() {
            return Err(Error::invalid(format!("{:?} study needs a model", self.kind)));
        }
        if self.kind == StudyKind::Transfer && self.cells.as_ref().is_none_or(Vec::is_empty) {
            return Err(Error::invalid("transfer study needs cells"));
        }
        if self.kind == StudyKind::Noise && self.sigmas.as_ref().is_none_or(Vec::is_empty) {
            return Err(Error::invalid("noise study needs sigmas"));
        }
        if let Some(s) = &self.sigmas {
            if s.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::invalid("sigmas must be >= 0"));
            }
        }
        Ok(())
    }

    /// Default seeds: 1..=100 for noise, the single run seed otherwise.
    pub fn seed_list(&self) -> Vec<u64> {
        match (&self.seeds, self.kind) {
            (Some(s), _) => s.seeds(),
            (None, StudyKind::Noise) => (1..=100).collect(),
            (None, _) => vec![self.seed.unwrap_or(0)],
        }
    }
}

impl ModelFile {
    pub fn to_spec(&self) -> Result<ModelSpec> {
        let variant: Variant = self.variant.parse()?;
        let config: EvalConfig = self.config.as_deref().unwrap_or("unref").parse()?;
        let mode: Mode = self.mode.as_deref().unwrap_or("semi_supervised").parse()?;
        let mut spec = ModelSpec::new(variant, config, mode);
        if let Some(h) = &self.hidden {
            spec.hidden_dims = h.clone();
        }
        if let Some(k) = self.pca {
            spec.pca_components = (k > 0).then_some(k);
        }
        let apply = |stage: &mut StageConfig, s: &Option<StageSpec>| {
            if let Some(s) = s {
                stage.lr = s.lr.unwrap_or(stage.lr);
                stage.batch_size = s.batch.unwrap_or(stage.batch_size);
                stage.max_epochs = s.epochs.unwrap_or(stage.max_epochs);
            }
        };
        apply(&mut spec.train.unsupervised, &self.unsup);
        apply(&mut spec.train.supervised, &self.sup);
        if let Some(p) = self.patience {
            spec.train.unsupervised.patience = p;
            spec.train.supervised.patience = p;
        }
        spec.train.margin = self.margin.unwrap_or(spec.train.margin);
        spec.negatives_per_dialogue = self.negatives.unwrap_or(1);
        spec.train.validate()?;
        Ok(spec)
    }
}

/// Either kind of vector source, owned.
pub enum Encoder {
    Bag(BagEncoder),
    Stored(EncodingSet),
}

impl Encoder {
    pub fn load(encodings: Option<&Path>, embeddings: Option<&Path>) -> Result<Self> {
        match (encodings, embeddings) {
            (Some(e), None) => Ok(Encoder::Stored(load_encodings(e)?)),
            (None, Some(t)) => Ok(Encoder::Bag(BagEncoder::new(EmbeddingTable::load(t)?))),
            _ => Err(Error::invalid("give exactly one of an encodings file or an embedding table")),
        }
    }

    pub fn as_source(&self) -> &dyn VectorSource {
        match self {
            Encoder::Bag(b) => b,
            Encoder::Stored(s) => s,
        }
    }
}

/// Files behind one domain, loaded.
pub struct LoadedDomain {
    pub name: String,
    pub corpus: Corpus,
    pub encoder: Encoder,
    pub labels: Vec<AggregatedLabel>,
    pub split: Option<SplitAssignment>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl LoadedDomain {
    pub fn load(spec: &DomainSpec, base: &Path) -> Result<Self> {
        Ok(LoadedDomain {
            name: spec.name.clone(),
            corpus: Corpus::load(resolve(base, &spec.corpus))?,
            encoder: Encoder::load(
                spec.encodings.as_ref().map(|p| resolve(base, p)).as_deref(),
                spec.embeddings.as_ref().map(|p| resolve(base, p)).as_deref(),
            )?,
            labels: load_labels(resolve(base, &spec.labels))?,
            split: spec.split.as_ref().map(|p| SplitAssignment::load(resolve(base, p))).transpose()?,
        })
    }

    /// Appropriateness labels with the split's train/valid/test ids. Without a
    /// split every labelled pair is a test pair.
    pub fn domain(&self) -> Domain<'_> {
        let labels = label_map(&self.labels, Dimension::Appropriateness);
        let ids = |s: Split| -> Vec<String> {
            match &self.split {
                Some(a) => a.ids(s).into_iter().map(str::to_string).collect(),
                None if s == Split::Test => labels.keys().cloned().collect(),
                None => Vec::new(),
            }
        };
        Domain {
            name: self.name.clone(),
            corpus: &self.corpus,
            source: self.encoder.as_source(),
            train_ids: ids(Split::Train),
            valid_ids: ids(Split::Valid),
            test_ids: ids(Split::Test),
            labels,
        }
    }
}

/// Scaled scores grouped by evaluator. Accepts evaluator score files and
/// metric files (`pair_id metric value`).
pub fn load_score_table(path: impl AsRef<Path>) -> Result<BTreeMap<String, BTreeMap<String, f64>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = text.lines().find(|l| !l.is_empty() && !l.starts_with('#')).unwrap_or("");
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    if header == "pair_id\tmetric\tvalue" {
        for (lineno, f) in io_util::parse_tsv(text.as_bytes(), &["pair_id", "metric", "value"])
            .map_err(|e| io_util::with_path(e, path))?
        {
            let v: f64 = f[2]
                .parse()
                .map_err(|_| io_util::with_path(Error::parse(lineno, format!("bad value {:?}", f[2])), path))?;
            out.entry(f[1].clone()).or_default().insert(f[0].clone(), v);
        }
    } else {
        for r in load_scores(path)? {
            out.entry(r.evaluator).or_default().insert(r.pair_id, r.scaled);
        }
    }
    Ok(out)
}

/// A finished study: CSV body and an aligned text table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutput {
    pub csv: String,
    pub table: String,
}

fn rows_output(rows: &[ReportRow]) -> StudyOutput {
    StudyOutput {
        csv: report_csv(rows),
        table: report_table(rows),
    }
}

fn curve_output(first: &str, points: &[(f64, f64, f64, usize)], int_key: bool) -> StudyOutput {
    let mut csv = format!("{first},mean_pearson,mean_spearman,n_seeds\n");
    let mut body = Vec::new();
    for &(k, r, rho, n) in points {
        let key = if int_key { format!("{}", k as usize) } else { format!("{k}") };
        let _ = writeln!(csv, "{key},{r:.6},{rho:.6},{n}");
        body.push([key, format!("{r:.3}"), format!("{rho:.3}"), n.to_string()]);
    }
    StudyOutput {
        csv,
        table: aligned(&[first, "pearson", "spearman", "seeds"], &body),
    }
}

fn scores_for(spec: &StudySpec, base: &Path, domain: &Domain<'_>) -> Result<BTreeMap<String, BTreeMap<String, f64>>> {
    if let Some(p) = &spec.scores {
        return load_score_table(resolve(base, p));
    }
    let model = spec.model.as_ref().expect("validated").to_spec()?;
    let seed = spec.seed.unwrap_or(0);
    let train_ids: Vec<&str> = domain.train_ids.iter().map(String::as_str).collect();
    let (params, _) = fit_model(&model, domain, &train_ids, &domain.labels, seed)?;
    let test: Vec<&str> = domain.test_ids.iter().map(String::as_str).collect();
    let mut out = BTreeMap::new();
    out.insert(params.name(), score_ids(&params, domain, &test)?);
    Ok(out)
}

/// Run `spec`; relative paths resolve against `base`.
pub fn run_study(spec: &StudySpec, base: &Path) -> Result<StudyOutput> {
    spec.validate()?;
    let loaded: Vec<LoadedDomain> = spec
        .domains
        .iter()
        .map(|d| LoadedDomain::load(d, base))
        .collect::<Result<_>>()?;
    let domains: Vec<Domain<'_>> = loaded.iter().map(LoadedDomain::domain).collect();
    let first = &domains[0];
    match spec.kind {
        StudyKind::Basic => {
            let rows = scores_for(spec, base, first)?
                .into_iter()
                .map(|(name, s)| Ok(ReportRow { name, report: basic_report(&s, &first.labels)? }))
                .collect::<Result<Vec<_>>>()?;
            Ok(rows_output(&rows))
        }
        StudyKind::GtExcluded => {
            let mut rows = Vec::new();
            for (name, s) in scores_for(spec, base, first)? {
                let r = gt_excluded_report(&s, &first.labels, first.corpus)?;
                rows.push(ReportRow { name: format!("{name}/full"), report: r.full });
                rows.push(ReportRow { name: format!("{name}/gt_excluded"), report: r.excluded });
            }
            Ok(rows_output(&rows))
        }
        StudyKind::Discretize => {
            let mut rows = Vec::new();
            for (name, s) in scores_for(spec, base, first)? {
                let ids: Vec<&String> = s.keys().collect();
                let values: Vec<f64> = s.values().copied().collect();
                let disc: BTreeMap<String, f64> = ids
                    .iter()
                    .zip(discretize_scores(&values)?)
                    .map(|(k, v)| ((*k).clone(), f64::from(v)))
                    .collect();
                rows.push(ReportRow { name: format!("{name}/continuous"), report: basic_report(&s, &first.labels)? });
                rows.push(ReportRow { name: format!("{name}/discretized"), report: basic_report(&disc, &first.labels)? });
            }
            Ok(rows_output(&rows))
        }
        StudyKind::DimensionSensitivity => {
            let dims: Vec<Dimension> = match &spec.dimensions {
                Some(d) => d.iter().map(|s| s.parse()).collect::<Result<_>>()?,
                None => vec![Dimension::Appropriateness, Dimension::Relevance, Dimension::Grammar],
            };
            let by_dim: Vec<(Dimension, BTreeMap<String, f64>)> =
                dims.iter().map(|&d| (d, label_map(&loaded[0].labels, d))).collect();
            let mut rows = Vec::new();
            for (name, s) in scores_for(spec, base, first)? {
                for mut r in dimension_sensitivity(&s, &by_dim)? {
                    r.name = format!("{name}/{}", r.name);
                    rows.push(r);
                }
            }
            Ok(rows_output(&rows))
        }
        StudyKind::Transfer => {
            let model = spec.model.as_ref().expect("validated").to_spec()?;
            let index = |n: &str| {
                domains
                    .iter()
                    .position(|d| d.name == n)
                    .ok_or_else(|| Error::invalid(format!("unknown domain {n:?}")))
            };
            let cells = spec
                .cells
                .as_ref()
                .expect("validated")
                .iter()
                .map(|[a, b]| Ok((index(a)?, index(b)?)))
                .collect::<Result<Vec<_>>>()?;
            let grid = transfer_report(&domains, &cells, &model, spec.seed.unwrap_or(0))?;
            let rows: Vec<ReportRow> = grid
                .into_iter()
                .map(|c| ReportRow { name: format!("{}->{}", c.train, c.test), report: c.report })
                .collect();
            Ok(rows_output(&rows))
        }
        StudyKind::LowResource => {
            let model = spec.model.as_ref().expect("validated").to_spec()?;
            let sizes = spec.sizes.clone().unwrap_or_else(|| DEFAULT_LOW_RESOURCE_SIZES.to_vec());
            let seeds = spec.seed_list();
            let curve: Vec<CurvePoint> = low_resource_curve(first, &model, &sizes, &seeds)?;
            let pts: Vec<_> = curve
                .iter()
                .map(|p| (p.size as f64, p.mean_pearson, p.mean_spearman, p.per_seed.len()))
                .collect();
            Ok(curve_output("size", &pts, true))
        }
        StudyKind::Noise => {
            let model = spec.model.as_ref().expect("validated").to_spec()?;
            let sigmas = spec.sigmas.clone().expect("validated");
            let points: Vec<NoisePoint> = noise_robustness(first, &model, &sigmas, &spec.seed_list())?;
            let pts: Vec<_> = points
                .iter()
                .map(|p| (p.sigma, p.mean_pearson, p.mean_spearman, p.per_seed.len()))
                .collect();
            Ok(curve_output("sigma", &pts, false))
        }
    }
}

/// Convenience for the in-domain case: train, then evaluate on test.
pub fn train_and_evaluate(domain: &Domain<'_>, model: &ModelSpec, seed: u64) -> Result<super::CorrelationReport> {
    let train_ids: Vec<&str> = domain.train_ids.iter().map(String::as_str).collect();
    let (params, _) = fit_model(model, domain, &train_ids, &domain.labels, seed)?;
    evaluate_model(&params, domain)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing_and_validation() {
        let spec: StudySpec = serde_json::from_str(
            r#"{"kind":"noise","domains":[{"name":"dd","corpus":"c","embeddings":"t","labels":"l","split":"s"}],
                "model":{"variant":"ruber","unsup":{"lr":0.1}},"sigmas":[0,0.5]}"#,
        )
        .unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.seed_list().len(), 100);
        let m = spec.model.unwrap().to_spec().unwrap();
        assert_eq!(m.train.unsupervised.lr, 0.1);
        assert_eq!(m.train.supervised.lr, 1e-4);
        assert_eq!(m.train.mode, Mode::SemiSupervised);

        let bad: StudySpec =
            serde_json::from_str(r#"{"kind":"transfer","domains":[{"name":"a","corpus":"c","labels":"l"}]}"#).unwrap();
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<StudySpec>(r#"{"kind":"basic","domains":[],"bogus":1}"#).is_err());
        let seeds: SeedSpec = serde_json::from_str(r#"{"from":3,"to":5}"#).unwrap();
        assert_eq!(seeds.seeds(), vec![3, 4, 5]);
    }
}
