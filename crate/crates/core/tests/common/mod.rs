//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerical code; only plain data types are shared.

#![allow(dead_code)]

use std::path::PathBuf;

use dialeval::analysis::{pearson, spearman, DomainSpec, LoadedDomain};
use dialeval::embeddings::fit_pca;
use dialeval::evaluators::{Activation, EvalConfig, EvaluatorParams, InitOptions, PairVectors, Variant};
use dialeval::trainer::{backward, Batch, Gradients, RankingExample, SupervisedExample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// The bundled corpus, embeddings, labels and split.
pub fn bundled_domain() -> LoadedDomain {
    let spec = DomainSpec {
        name: "bundled".into(),
        corpus: "corpus.jsonl".into(),
        encodings: None,
        embeddings: Some("embeddings.txt".into()),
        labels: "labels.tsv".into(),
        split: Some("split.tsv".into()),
    };
    LoadedDomain::load(&spec, &data_dir()).unwrap()
}

// ---------- correlation reference values ----------

#[derive(serde::Deserialize)]
struct OracleCase {
    x: Vec<f64>,
    y: Vec<f64>,
    pearson_r: String,
    pearson_p: String,
    spearman_rho: String,
    spearman_p: String,
}

/// Largest absolute deviation from the high-precision reference values, as
/// `(coefficient error, p-value error, number of datasets)`.
pub fn stats_oracle_errors() -> (f64, f64, usize) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/stats_oracle.json");
    let cases: Vec<OracleCase> = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let num = |s: &str| s.parse::<f64>().unwrap();
    let mut coef = 0.0f64;
    let mut p = 0.0f64;
    for c in &cases {
        let (r, pr) = pearson(&c.x, &c.y).unwrap();
        let (rho, ps) = spearman(&c.x, &c.y).unwrap();
        coef = coef.max((r - num(&c.pearson_r)).abs()).max((rho - num(&c.spearman_rho)).abs());
        p = p.max((pr - num(&c.pearson_p)).abs()).max((ps - num(&c.spearman_p)).abs());
    }
    (coef, p, cases.len())
}

// ---------- linear algebra by hand ----------

pub fn naive_bilinear(a: &[f64], rows: &[Vec<f64>], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            s += a[i] * rows[i][j] * b[j];
        }
    }
    s
}

pub fn naive_cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for i in 0..a.len() {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    ab / (aa.sqrt() * bb.sqrt())
}

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Forward pass over `(weight rows, bias, is_output)` layers.
pub fn naive_mlp(params: &EvaluatorParams, x: &[f64]) -> f64 {
    let mlp = params.mlp.as_ref().expect("mlp");
    let mut a = x.to_vec();
    for layer in &mlp.layers {
        let w = layer.weights.to_rows();
        let mut next = Vec::with_capacity(w.len());
        for (i, row) in w.iter().enumerate() {
            let mut z = layer.bias[i];
            for (wij, aj) in row.iter().zip(&a) {
                z += wij * aj;
            }
            next.push(match layer.activation {
                Activation::Tanh => z.tanh(),
                Activation::Sigmoid => logistic(z),
            });
        }
        a = next;
    }
    a[0]
}

fn naive_project(params: &EvaluatorParams, v: &[f64]) -> Vec<f64> {
    match &params.pca {
        None => v.to_vec(),
        Some(p) => p
            .components
            .to_rows()
            .iter()
            .map(|row| row.iter().zip(v.iter().zip(&p.mean)).map(|(c, (x, m))| c * (x - m)).sum())
            .collect(),
    }
}

/// Head output `t` computed from the parameter values alone.
pub fn oracle_head(params: &EvaluatorParams, input: &PairVectors) -> f64 {
    match params.variant {
        Variant::Adem => {
            let h = naive_project(params, input.hypothesis.as_ref().unwrap());
            let mut s = 0.0;
            if let Some(n) = &params.n {
                let r = naive_project(params, input.reference.as_ref().unwrap());
                s += naive_bilinear(&r, &n.to_rows(), &h);
            }
            if let Some(m) = &params.m {
                let c = naive_project(params, input.context.as_ref().unwrap());
                s += naive_bilinear(&c, &m.to_rows(), &h);
            }
            s
        }
        Variant::Ruber => {
            let c = input.context.as_ref().unwrap();
            let h = input.hypothesis.as_ref().unwrap();
            let mut x = c.clone();
            x.extend_from_slice(h);
            x.push(naive_bilinear(c, &params.m.as_ref().unwrap().to_rows(), h));
            naive_mlp(params, &x)
        }
        Variant::EncHead => naive_mlp(params, input.joint.as_ref().unwrap()),
    }
}

pub enum OracleBatch<'a> {
    Mse(&'a [(PairVectors, f64)]),
    Margin(&'a [(PairVectors, PairVectors)], f64),
}

/// Mean loss. Squared error acts on `t` for ADEM and on `4t + 1` for the
/// sigmoid heads; the margin loss acts on `t`.
pub fn oracle_loss(params: &EvaluatorParams, batch: &OracleBatch<'_>) -> f64 {
    match batch {
        OracleBatch::Mse(xs) => {
            let total: f64 = xs
                .iter()
                .map(|(x, y)| {
                    let t = oracle_head(params, x);
                    let pred = if params.variant == Variant::Adem { t } else { 4.0 * t + 1.0 };
                    (pred - y).powi(2)
                })
                .sum();
            total / xs.len() as f64
        }
        OracleBatch::Margin(xs, margin) => {
            let total: f64 = xs
                .iter()
                .map(|(p, n)| (margin - oracle_head(params, p) + oracle_head(params, n)).max(0.0))
                .sum();
            total / xs.len() as f64
        }
    }
}

/// The scalars of every trainable block, in the order M, N, mlp[k].w,
/// mlp[k].b, each row-major.
pub fn flat_slots(params: &mut EvaluatorParams) -> Vec<&mut f64> {
    let mut out: Vec<&mut f64> = Vec::new();
    if let Some(m) = params.m.as_mut() {
        out.extend(m.as_mut_slice().iter_mut());
    }
    if let Some(n) = params.n.as_mut() {
        out.extend(n.as_mut_slice().iter_mut());
    }
    if let Some(mlp) = params.mlp.as_mut() {
        for l in &mut mlp.layers {
            out.extend(l.weights.as_mut_slice().iter_mut());
            out.extend(l.bias.iter_mut());
        }
    }
    out
}

/// Central finite differences of `oracle_loss` for every scalar.
pub fn finite_difference(params: &EvaluatorParams, batch: &OracleBatch<'_>, h: f64) -> Vec<f64> {
    let n = flat_slots(&mut params.clone()).len();
    (0..n)
        .map(|k| {
            let mut plus = params.clone();
            *flat_slots(&mut plus)[k] += h;
            let mut minus = params.clone();
            *flat_slots(&mut minus)[k] -= h;
            (oracle_loss(&plus, batch) - oracle_loss(&minus, batch)) / (2.0 * h)
        })
        .collect()
}

/// `|a − f| / max(|a|, |f|, floor)`, maximised over components.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, f)| (a - f).abs() / a.abs().max(f.abs()).max(floor))
        .fold(0.0, f64::max)
}

// ---------- gradient check ----------

const DIM: usize = 4;

pub fn random_params(variant: Variant, config: EvalConfig, r: &mut ChaCha8Rng, pca: bool) -> EvaluatorParams {
    let input_dim = if pca { 7 } else { DIM };
    let projection = pca.then(|| {
        let pts: Vec<Vec<f64>> = (0..30).map(|_| uniform_vec(r, input_dim, 1.0)).collect();
        fit_pca(&pts, 3).unwrap()
    });
    let opts = InitOptions {
        hidden_dims: vec![3, 2],
        pca: projection,
        seed: r.random(),
    };
    let mut p = EvaluatorParams::init(variant, config, input_dim, &opts).unwrap();
    // Move away from the zero / identity starts so every path is exercised.
    for m in [p.m.as_mut(), p.n.as_mut()].into_iter().flatten() {
        m.as_mut_slice().iter_mut().for_each(|v| *v = r.random_range(-0.5..0.5));
    }
    if let Some(mlp) = p.mlp.as_mut() {
        for l in &mut mlp.layers {
            l.bias.iter_mut().for_each(|b| *b = r.random_range(-0.5..0.5));
        }
    }
    p
}

pub fn random_input(p: &EvaluatorParams, r: &mut ChaCha8Rng) -> PairVectors {
    let d = p.input_dim;
    PairVectors {
        joint: Some(uniform_vec(r, d, 1.0)),
        ..PairVectors::new(uniform_vec(r, d, 1.0), Some(uniform_vec(r, d, 1.0)), uniform_vec(r, d, 1.0))
    }
}

fn flat(grads: &Gradients) -> Vec<f64> {
    grads.blocks().iter().flat_map(|(_, v)| v.iter().copied()).collect()
}

fn setups() -> Vec<(Variant, EvalConfig, bool)> {
    vec![
        (Variant::Adem, EvalConfig::Full, false),
        (Variant::Adem, EvalConfig::Full, true),
        (Variant::Adem, EvalConfig::UnreferencedOnly, false),
        (Variant::Ruber, EvalConfig::UnreferencedOnly, false),
        (Variant::EncHead, EvalConfig::UnreferencedOnly, false),
    ]
}

/// Worst relative error between the analytic gradient and central
/// differences over `instances` random (params, batch) draws.
pub fn gradient_check(instances: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for (variant, config, pca) in setups() {
        for _ in 0..instances {
            let p = random_params(variant, config, &mut r, pca);
            let n = r.random_range(1..4);
            let mse: Vec<SupervisedExample> = (0..n)
                .map(|_| SupervisedExample {
                    input: random_input(&p, &mut r),
                    label: r.random_range(1.0..5.0),
                })
                .collect();
            let refs: Vec<&SupervisedExample> = mse.iter().collect();
            let (loss, g) = backward(&p, Batch::Mse(&refs)).unwrap();
            let pairs: Vec<(PairVectors, f64)> = mse.iter().map(|e| (e.input.clone(), e.label)).collect();
            let ob = OracleBatch::Mse(&pairs);
            assert!((loss - oracle_loss(&p, &ob)).abs() <= 1e-10 * loss.abs().max(1.0));
            worst = worst.max(max_relative_error(&flat(&g), &finite_difference(&p, &ob, 1e-6), 1e-6));

            // Margins large enough that no hinge sits at its kink.
            let rank: Vec<RankingExample> = (0..n)
                .map(|_| RankingExample {
                    positive: random_input(&p, &mut r),
                    negative: random_input(&p, &mut r),
                })
                .collect();
            let margin = if variant == Variant::Adem { 20.0 } else { 2.0 };
            let refs: Vec<&RankingExample> = rank.iter().collect();
            let (_, g) = backward(&p, Batch::Margin { examples: &refs, margin }).unwrap();
            let pairs: Vec<(PairVectors, PairVectors)> =
                rank.iter().map(|e| (e.positive.clone(), e.negative.clone())).collect();
            let ob = OracleBatch::Margin(&pairs, margin);
            worst = worst.max(max_relative_error(&flat(&g), &finite_difference(&p, &ob, 1e-6), 1e-6));
        }
    }
    worst
}

// ---------- Krippendorff's alpha, pairwise form ----------

/// Interval α from all ordered value pairs: within-unit pairs weighted by
/// `1 / (m_u − 1)` for the observed disagreement, all pairs for the
/// expected one.
pub fn brute_force_alpha(units: &[Vec<f64>]) -> f64 {
    let pairable: Vec<&Vec<f64>> = units.iter().filter(|u| u.len() >= 2).collect();
    let all: Vec<f64> = pairable.iter().flat_map(|u| u.iter().copied()).collect();
    let n = all.len() as f64;
    let mut d_o = 0.0;
    for u in &pairable {
        let m = u.len() as f64;
        let mut s = 0.0;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j {
                    s += (u[i] - u[j]).powi(2);
                }
            }
        }
        d_o += s / (m - 1.0);
    }
    d_o /= n;
    let mut d_e = 0.0;
    for i in 0..all.len() {
        for j in 0..all.len() {
            if i != j {
                d_e += (all[i] - all[j]).powi(2);
            }
        }
    }
    d_e /= n * (n - 1.0);
    1.0 - d_o / d_e
}

// ---------- symmetric eigenproblem, cyclic Jacobi ----------

/// Eigenvalues (descending) and eigenvectors (as rows) of a symmetric matrix.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n).map(|k| (a[k][k], (0..n).map(|i| v[i][k]).collect())).collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    pairs.into_iter().unzip()
}

/// Sample covariance (divide by n − 1) of row vectors.
pub fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| rows.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / (n - 1.0))
                .collect()
        })
        .collect()
}

// ---------- the command-line tool ----------

pub fn run_cli(dir: &std::path::Path, args: &[&str]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_dialeval"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

pub const PIPELINE: &[&[&str]] = &[
    &["ingest", "--corpus", "corpus.jsonl", "--annotations", "annotations.tsv"],
    &["negatives", "--corpus", "corpus.jsonl", "--k", "1", "--seed", "2", "--out", "neg.jsonl"],
    &["aggregate", "--annotations", "annotations.tsv", "--out", "labels.tsv", "--split-out", "split.tsv", "--seed", "1"],
    &["encode", "--corpus", "neg.jsonl", "--embeddings", "embeddings.txt", "--out", "enc.jsonl"],
    &[
        "train", "--corpus", "neg.jsonl", "--embeddings", "embeddings.txt", "--labels", "labels.tsv", "--split", "split.tsv",
        "--unsup-lr", "0.1", "--unsup-epochs", "5", "--lr", "0.01", "--epochs", "10", "--seed", "3", "--out", "model.json",
        "--trace", "trace.csv",
    ],
    &["score", "--checkpoint", "model.json", "--corpus", "neg.jsonl", "--embeddings", "embeddings.txt", "--out", "scores.tsv"],
    &["metric", "run", "--corpus", "neg.jsonl", "--embeddings", "embeddings.txt", "--out", "metrics.tsv"],
    &["report", "basic", "--scores", "scores.tsv", "--labels", "labels.tsv", "--out", "report.csv"],
];

pub const PIPELINE_OUTPUTS: &[&str] = &[
    "neg.jsonl", "labels.tsv", "split.tsv", "enc.jsonl", "model.json", "trace.csv", "scores.tsv", "metrics.tsv", "report.csv",
];

/// Copy the bundled inputs into `dir` and run every pipeline step there
/// with relative paths. Returns each output file's bytes and the stdout.
pub fn run_pipeline(dir: &std::path::Path) -> (Vec<(String, Vec<u8>)>, String) {
    for f in ["corpus.jsonl", "embeddings.txt", "annotations.tsv"] {
        std::fs::copy(data_dir().join(f), dir.join(f)).unwrap();
    }
    let mut stdout = String::new();
    for step in PIPELINE {
        let out = run_cli(dir, step);
        assert!(out.status.success(), "{step:?}: {}", String::from_utf8_lossy(&out.stderr));
        stdout.push_str(&String::from_utf8_lossy(&out.stdout));
    }
    let files = PIPELINE_OUTPUTS
        .iter()
        .map(|f| (f.to_string(), std::fs::read(dir.join(f)).unwrap()))
        .collect();
    (files, stdout)
}
