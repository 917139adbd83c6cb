use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("{} vs {} values", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!("correlation needs n >= 3, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("correlation input".into()));
    }
    Ok(())
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population standard deviation (divides by n).
pub fn population_sd(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Two-tailed p-value of a correlation coefficient under the t
/// approximation with `n - 2` degrees of freedom.
pub fn correlation_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    // P(|T| > |t|) = I_x(df/2, 1/2) with x = df / (df + t²) = 1 − r².
    let x = (1.0 - r) * (1.0 + r);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Sample Pearson correlation and its two-tailed p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    check_pair(x, y)?;
    let r = pearson_r(x, y)?;
    Ok((r, correlation_p_value(r, x.len())))
}

/// 1-based ranks; ties share the mean of the ranks they span.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation and its two-tailed p-value.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    check_pair(x, y)?;
    let r = pearson_r(&average_ranks(x), &average_ranks(y))?;
    Ok((r, correlation_p_value(r, x.len())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub n: usize,
    pub pearson_r: f64,
    pub pearson_p: f64,
    pub spearman_rho: f64,
    pub spearman_p: f64,
    pub sd_pred: f64,
    pub sd_label: f64,
}

impl CorrelationReport {
    /// `pred` against `label`.
    pub fn compute(pred: &[f64], label: &[f64]) -> Result<Self> {
        let (pearson_r, pearson_p) = pearson(pred, label)?;
        let (spearman_rho, spearman_p) = spearman(pred, label)?;
        Ok(CorrelationReport {
            n: pred.len(),
            pearson_r,
            pearson_p,
            spearman_rho,
            spearman_p,
            sd_pred: population_sd(pred),
            sd_label: population_sd(label),
        })
    }

    pub fn pearson_p01(&self) -> bool {
        self.pearson_p < 0.01
    }

    pub fn pearson_p001(&self) -> bool {
        self.pearson_p < 0.001
    }

    pub fn spearman_p01(&self) -> bool {
        self.spearman_p < 0.01
    }

    pub fn spearman_p001(&self) -> bool {
        self.spearman_p < 0.001
    }

    /// Significance marker: `**` below 0.001, `*` below 0.01.
    pub fn stars(p: f64) -> &'static str {
        if p < 0.001 {
            "**"
        } else if p < 0.01 {
            "*"
        } else {
            ""
        }
    }
}
