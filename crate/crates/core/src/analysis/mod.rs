//! Correlation reports and the robustness studies built on them.

mod stats;
mod studies;
mod study;

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub use stats::{average_ranks, correlation_p_value, mean, pearson, population_sd, spearman, CorrelationReport};
pub use studies::{
    dimension_sensitivity, evaluate_model, fit_model, low_resource_curve, noise_robustness, noisy_labels, score_ids,
    subsample_ids, transfer_report, CurvePoint, Domain, ModelSpec, NoisePoint, TransferCell,
    DEFAULT_LOW_RESOURCE_SIZES,
};
pub use study::{
    load_score_table, run_study, train_and_evaluate, DomainSpec, Encoder, LoadedDomain, ModelFile, SeedSpec,
    StageSpec, StudyKind, StudyOutput, StudySpec,
};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Scores and labels matched on `pair_id`, in label order.
pub fn join_on_pair_id(scores: &BTreeMap<String, f64>, labels: &BTreeMap<String, f64>) -> (Vec<String>, Vec<f64>, Vec<f64>) {
    let mut ids = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (id, y) in labels {
        if let Some(x) = scores.get(id) {
            ids.push(id.clone());
            xs.push(*x);
            ys.push(*y);
        }
    }
    (ids, xs, ys)
}

/// Correlation of evaluator scores with human labels over shared pairs.
pub fn basic_report(scores: &BTreeMap<String, f64>, labels: &BTreeMap<String, f64>) -> Result<CorrelationReport> {
    let (_, xs, ys) = join_on_pair_id(scores, labels);
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!("only {} scored pairs have labels", xs.len())));
    }
    CorrelationReport::compute(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtExcludedReport {
    pub full: CorrelationReport,
    pub excluded: CorrelationReport,
}

/// The basic report, and again without ground-truth responses.
pub fn gt_excluded_report(
    scores: &BTreeMap<String, f64>,
    labels: &BTreeMap<String, f64>,
    corpus: &Corpus,
) -> Result<GtExcludedReport> {
    let full = basic_report(scores, labels)?;
    let non_gt: BTreeMap<String, f64> = scores
        .iter()
        .filter(|(id, _)| match corpus.candidate(id) {
            Some(c) => !c.source.is_ground_truth(),
            None => false,
        })
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    if non_gt.is_empty() {
        return Err(Error::InsufficientData("every scored pair is a ground-truth response".into()));
    }
    let excluded = basic_report(&non_gt, labels)?;
    Ok(GtExcludedReport { full, excluded })
}

/// Round half up onto `{1, …, 5}`.
pub fn discretize_scores(scores: &[f64]) -> Result<Vec<u8>> {
    scores
        .iter()
        .map(|&s| {
            if !(1.0..=5.0).contains(&s) {
                return Err(Error::invalid(format!("score {s} outside [1, 5]")));
            }
            Ok(((s + 0.5).floor() as u8).clamp(1, 5))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Fixed-width bins over `[1, 5]`; the last bin is closed. Values outside
/// the range land in the nearest edge bin.
pub fn histogram(scores: &[f64], bins: usize) -> Result<Vec<HistogramBin>> {
    if bins < 2 {
        return Err(Error::invalid("histogram needs at least 2 bins"));
    }
    let width = 4.0 / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|k| HistogramBin {
            lo: 1.0 + k as f64 * width,
            hi: if k + 1 == bins { 5.0 } else { 1.0 + (k + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for &s in scores {
        if s.is_nan() {
            return Err(Error::NonFinite("histogram input".into()));
        }
        let mut k = ((s - 1.0) / width).floor();
        if !(k >= 0.0) {
            k = 0.0;
        }
        let k = (k as usize).min(bins - 1);
        out[k].count += 1;
    }
    Ok(out)
}

/// A report row for text and CSV rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub report: CorrelationReport,
}

const REPORT_COLUMNS: [&str; 10] = [
    "name", "n", "pearson_r", "pearson_p", "spearman_rho", "spearman_p", "sd_pred", "sd_label", "p_lt_0.01", "p_lt_0.001",
];

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut s = REPORT_COLUMNS.join(",");
    s.push('\n');
    for r in rows {
        let c = &r.report;
        let _ = writeln!(
            s,
            "{},{},{:.6},{:.6e},{:.6},{:.6e},{:.6},{:.6},{},{}",
            r.name,
            c.n,
            c.pearson_r,
            c.pearson_p,
            c.spearman_rho,
            c.spearman_p,
            c.sd_pred,
            c.sd_label,
            c.pearson_p01() && c.spearman_p01(),
            c.pearson_p001() && c.spearman_p001(),
        );
    }
    s
}

/// Aligned text table; `*` marks p < 0.01 and `**` marks p < 0.001.
pub fn report_table(rows: &[ReportRow]) -> String {
    let header = ["name", "n", "pearson", "spearman", "sd_pred", "sd_label"];
    let body: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            let c = &r.report;
            [
                r.name.clone(),
                c.n.to_string(),
                format!("{:.3}{}", c.pearson_r, CorrelationReport::stars(c.pearson_p)),
                format!("{:.3}{}", c.spearman_rho, CorrelationReport::stars(c.spearman_p)),
                format!("{:.3}", c.sd_pred),
                format!("{:.3}", c.sd_label),
            ]
        })
        .collect();
    aligned(&header, &body)
}

pub(crate) fn aligned<const N: usize>(header: &[&str; N], body: &[[String; N]]) -> String {
    let mut widths = header.map(str::len);
    for row in body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut s = String::new();
    let line = |s: &mut String, cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(s, "{}", parts.join("  ").trim_end());
    };
    line(&mut s, header.to_vec());
    for row in body {
        line(&mut s, row.iter().map(String::as_str).collect());
    }
    s
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut s = String::from("lo,hi,count\n");
    for b in bins {
        let _ = writeln!(s, "{:.6},{:.6},{}", b.lo, b.hi, b.count);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(v: &[(&str, f64)]) -> BTreeMap<String, f64> {
        v.iter().map(|(k, x)| (k.to_string(), *x)).collect()
    }

    #[test]
    fn basic_report_joins_on_ids() {
        let labels = map(&[("a", 1.0), ("b", 2.0), ("c", 4.0), ("d", 5.0)]);
        let r = basic_report(&labels, &labels).unwrap();
        assert_eq!(r.pearson_r, 1.0);
        assert_eq!(r.sd_pred, r.sd_label);
        let few = map(&[("a", 1.0), ("z", 2.0)]);
        assert!(basic_report(&few, &labels).is_err());
    }

    #[test]
    fn discretize_rules() {
        assert_eq!(discretize_scores(&[3.0, 1.0, 5.0, 2.5, 2.4999, 4.5]).unwrap(), vec![3, 1, 5, 3, 2, 5]);
        assert!(discretize_scores(&[0.99]).is_err());
        assert!(discretize_scores(&[5.01]).is_err());
    }

    #[test]
    fn histogram_counts() {
        let h = histogram(&[3.0; 7], 4).unwrap();
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![0, 0, 7, 0]);
        let h = histogram(&[1.0, 5.0, 2.0], 2).unwrap();
        assert_eq!((h[0].count, h[1].count), (2, 1));
        assert!(histogram(&[1.0], 1).is_err());
    }

    #[test]
    fn table_marks_significance() {
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let rows = [ReportRow {
            name: "m".into(),
            report: CorrelationReport::compute(&x, &x).unwrap(),
        }];
        assert!(report_table(&rows).contains("1.000**"));
        assert!(report_csv(&rows).lines().nth(1).unwrap().ends_with("true,true"));
    }
}
