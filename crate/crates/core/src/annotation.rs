//! Human ratings: outlier removal with the median absolute deviation, interval
//! Krippendorff's α and label aggregation.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::analysis::CorrelationReport;
use crate::error::{Error, Result};
use crate::io_util;

/// Normal-consistency constant applied to the raw MAD.
pub const MAD_CONSISTENCY: f64 = 1.4826;

/// Deviation threshold used for outlier removal.
pub const DEFAULT_MAD_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dimension {
    Appropriateness,
    Relevance,
    Grammar,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [
        Dimension::Appropriateness,
        Dimension::Relevance,
        Dimension::Grammar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Appropriateness => "appropriateness",
            Dimension::Relevance => "relevance",
            Dimension::Grammar => "grammar",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "appropriateness" => Ok(Dimension::Appropriateness),
            "relevance" => Ok(Dimension::Relevance),
            "grammar" | "grammaticality" => Ok(Dimension::Grammar),
            other => Err(Error::invalid(format!("unknown dimension {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub pair_id: String,
    pub worker_id: String,
    pub dimension: Dimension,
    /// Likert score in `1..=5`.
    pub score: u8,
}

const ANNOTATION_COLUMNS: [&str; 4] = ["pair_id", "worker_id", "dimension", "score"];
const LABEL_COLUMNS: [&str; 5] = ["pair_id", "dimension", "label", "kept", "removed"];

/// Load a ratings file (`pair_id worker_id dimension score`, tab separated).
pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotationRecord>> {
    let path = path.as_ref();
    let rows = io_util::read_tsv(path, &ANNOTATION_COLUMNS)?;
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(rows.len());
    for (lineno, f) in rows {
        let fail = |msg: String| io_util::with_path(Error::parse(lineno, msg), path);
        let dimension: Dimension = f[2].parse().map_err(|e: Error| fail(e.to_string()))?;
        let score: u8 = f[3]
            .parse()
            .map_err(|_| fail(format!("score {:?} is not an integer", f[3])))?;
        if !(1..=5).contains(&score) {
            return Err(fail(format!("score {score} outside 1..=5")));
        }
        if !seen.insert((f[0].clone(), f[1].clone(), dimension)) {
            return Err(fail(format!(
                "duplicate rating by {} for {} ({dimension})",
                f[1], f[0]
            )));
        }
        out.push(AnnotationRecord {
            pair_id: f[0].clone(),
            worker_id: f[1].clone(),
            dimension,
            score,
        });
    }
    Ok(out)
}

pub fn save_annotations(records: &[AnnotationRecord], path: impl AsRef<Path>, header: Option<&str>) -> Result<()> {
    io_util::write_atomic(path.as_ref(), |w| {
        if let Some(h) = header {
            io_util::write_header(w, h)?;
        }
        writeln!(w, "{}", ANNOTATION_COLUMNS.join("\t"))?;
        for r in records {
            writeln!(w, "{}\t{}\t{}\t{}", r.pair_id, r.worker_id, r.dimension, r.score)?;
        }
        Ok(())
    })
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Flags outliers in one rating group; `true` marks a removed score.
///
/// With `m = median(group)` and `mad = 1.4826 · median(|x − m|)`, a score is
/// an outlier when `|x − m| / mad > threshold`. When `mad` is zero any score
/// that differs from the median is an outlier.
pub fn mad_outlier_mask(group: &[f64], threshold: f64) -> Result<Vec<bool>> {
    if group.is_empty() {
        return Err(Error::InsufficientData("empty rating group".into()));
    }
    if !(threshold > 0.0) {
        return Err(Error::invalid("MAD threshold must be positive"));
    }
    let m = median(group);
    let deviations: Vec<f64> = group.iter().map(|x| (x - m).abs()).collect();
    let mad = MAD_CONSISTENCY * median(&deviations);
    Ok(deviations
        .iter()
        .map(|&d| if mad > 0.0 { d / mad > threshold } else { d > 0.0 })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MadFilter {
    pub kept: Vec<f64>,
    pub removed: Vec<f64>,
}

/// Split a rating group into kept and removed scores, preserving order.
pub fn mad_filter(group: &[f64], threshold: f64) -> Result<MadFilter> {
    let mask = mad_outlier_mask(group, threshold)?;
    let (removed, kept): (Vec<_>, Vec<_>) = group.iter().zip(&mask).partition(|(_, &out)| out);
    Ok(MadFilter {
        kept: kept.into_iter().map(|(x, _)| *x).collect(),
        removed: removed.into_iter().map(|(x, _)| *x).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpretation {
    NotGood,
    Tentative,
    Good,
}

impl Interpretation {
    pub fn from_alpha(alpha: f64) -> Self {
        if alpha < 0.67 {
            Interpretation::NotGood
        } else if alpha > 0.8 {
            Interpretation::Good
        } else {
            Interpretation::Tentative
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Interpretation::NotGood => "not_good",
            Interpretation::Tentative => "tentative",
            Interpretation::Good => "good",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementStat {
    pub alpha: f64,
    /// Number of values in units with at least two ratings.
    pub n_values: usize,
    pub interpretation: Interpretation,
}

/// Interval-metric Krippendorff's α over rating units.
///
/// Units with a single rating are not pairable and are ignored. Computed via
/// the coincidence matrix with `δ²(v, v') = (v − v')²`.
pub fn interval_alpha(units: &[Vec<f64>]) -> Result<AgreementStat> {
    let pairable: Vec<&Vec<f64>> = units.iter().filter(|u| u.len() >= 2).collect();
    if pairable.is_empty() {
        return Err(Error::NoPairableData);
    }
    let mut values: Vec<f64> = pairable.iter().flat_map(|u| u.iter().copied()).collect();
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("rating {bad}")));
    }
    let n_values = values.len();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let k = values.len();
    let index_of = |v: f64| values.binary_search_by(|x| x.total_cmp(&v)).unwrap();

    let mut coincidence = vec![0.0; k * k];
    for unit in &pairable {
        let weight = 1.0 / (unit.len() - 1) as f64;
        let idx: Vec<usize> = unit.iter().map(|&v| index_of(v)).collect();
        for (i, &a) in idx.iter().enumerate() {
            for (j, &b) in idx.iter().enumerate() {
                if i != j {
                    coincidence[a * k + b] += weight;
                }
            }
        }
    }
    let marginals: Vec<f64> = (0..k)
        .map(|a| coincidence[a * k..(a + 1) * k].iter().sum())
        .collect();
    let n = n_values as f64;

    let mut observed = 0.0;
    let mut expected = 0.0;
    for a in 0..k {
        for b in 0..k {
            let delta2 = (values[a] - values[b]).powi(2);
            observed += coincidence[a * k + b] * delta2;
            expected += marginals[a] * marginals[b] * delta2;
        }
    }
    observed /= n;
    expected /= n * (n - 1.0);

    let alpha = if observed == 0.0 {
        1.0
    } else {
        1.0 - observed / expected
    };
    Ok(AgreementStat {
        alpha,
        n_values,
        interpretation: Interpretation::from_alpha(alpha),
    })
}

/// α for the records of a single dimension, with units keyed by pair id.
pub fn krippendorff_alpha(records: &[AnnotationRecord]) -> Result<AgreementStat> {
    if let Some(first) = records.first() {
        if records.iter().any(|r| r.dimension != first.dimension) {
            return Err(Error::invalid(
                "krippendorff_alpha expects records of a single dimension",
            ));
        }
    }
    let mut units: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        units.entry(&r.pair_id).or_default().push(f64::from(r.score));
    }
    interval_alpha(&units.into_values().collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedLabel {
    pub pair_id: String,
    pub dimension: Dimension,
    /// Mean of the kept scores.
    pub label: f64,
    pub kept_count: usize,
    pub removed_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionAgreement {
    pub dimension: Dimension,
    /// `None` when no unit has two ratings.
    pub before: Option<AgreementStat>,
    pub after: Option<AgreementStat>,
    pub removed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    /// Sorted by `(pair_id, dimension)`.
    pub labels: Vec<AggregatedLabel>,
    pub agreement: Vec<DimensionAgreement>,
}

impl Aggregation {
    pub fn removed_total(&self) -> usize {
        self.agreement.iter().map(|a| a.removed).sum()
    }
}

/// MAD-filter each `(pair_id, dimension)` group and average what is kept.
pub fn aggregate(records: &[AnnotationRecord], threshold: f64) -> Result<Aggregation> {
    let mut groups: BTreeMap<(&str, Dimension), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((&r.pair_id, r.dimension))
            .or_default()
            .push(f64::from(r.score));
    }

    let mut labels = Vec::with_capacity(groups.len());
    let mut before_units: BTreeMap<Dimension, Vec<Vec<f64>>> = BTreeMap::new();
    let mut after_units: BTreeMap<Dimension, Vec<Vec<f64>>> = BTreeMap::new();
    for ((pair_id, dimension), scores) in groups {
        let MadFilter { kept, removed } = mad_filter(&scores, threshold)?;
        labels.push(AggregatedLabel {
            pair_id: pair_id.to_string(),
            dimension,
            label: kept.iter().sum::<f64>() / kept.len() as f64,
            kept_count: kept.len(),
            removed_count: removed.len(),
        });
        before_units.entry(dimension).or_default().push(scores);
        after_units.entry(dimension).or_default().push(kept);
    }

    let agreement = before_units
        .into_iter()
        .map(|(dimension, units)| {
            let kept = &after_units[&dimension];
            let total: usize = units.iter().map(Vec::len).sum();
            let kept_total: usize = kept.iter().map(Vec::len).sum();
            DimensionAgreement {
                dimension,
                before: interval_alpha(&units).ok(),
                after: interval_alpha(kept).ok(),
                removed: total - kept_total,
                total,
            }
        })
        .collect();
    Ok(Aggregation { labels, agreement })
}

pub fn save_labels(labels: &[AggregatedLabel], path: impl AsRef<Path>, header: Option<&str>) -> Result<()> {
    io_util::write_atomic(path.as_ref(), |w| {
        if let Some(h) = header {
            io_util::write_header(w, h)?;
        }
        writeln!(w, "{}", LABEL_COLUMNS.join("\t"))?;
        for l in labels {
            writeln!(
                w,
                "{}\t{}\t{:.6}\t{}\t{}",
                l.pair_id, l.dimension, l.label, l.kept_count, l.removed_count
            )?;
        }
        Ok(())
    })
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<AggregatedLabel>> {
    let path = path.as_ref();
    let rows = io_util::read_tsv(path, &LABEL_COLUMNS)?;
    rows.into_iter()
        .map(|(lineno, f)| {
            let fail = |msg: String| io_util::with_path(Error::parse(lineno, msg), path);
            let label: f64 = f[2].parse().map_err(|_| fail(format!("bad label {:?}", f[2])))?;
            if !(1.0..=5.0).contains(&label) {
                return Err(fail(format!("label {label} outside [1, 5]")));
            }
            Ok(AggregatedLabel {
                pair_id: f[0].clone(),
                dimension: f[1].parse().map_err(|e: Error| fail(e.to_string()))?,
                label,
                kept_count: f[3].parse().map_err(|_| fail(format!("bad kept {:?}", f[3])))?,
                removed_count: f[4]
                    .parse()
                    .map_err(|_| fail(format!("bad removed {:?}", f[4])))?,
            })
        })
        .collect()
}

/// `pair_id → label` for one dimension.
pub fn label_map(labels: &[AggregatedLabel], dimension: Dimension) -> BTreeMap<String, f64> {
    labels
        .iter()
        .filter(|l| l.dimension == dimension)
        .map(|l| (l.pair_id.clone(), l.label))
        .collect()
}

/// Correlate two label sets over their shared pair ids.
pub fn dimension_correlation(
    labels_a: &[AggregatedLabel],
    labels_b: &[AggregatedLabel],
) -> Result<CorrelationReport> {
    let b: BTreeMap<&str, f64> = labels_b.iter().map(|l| (l.pair_id.as_str(), l.label)).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = labels_a
        .iter()
        .filter_map(|l| b.get(l.pair_id.as_str()).map(|&v| (l.label, v)))
        .unzip();
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} shared pairs, need at least 3",
            x.len()
        )));
    }
    CorrelationReport::compute(&x, &y)
}
