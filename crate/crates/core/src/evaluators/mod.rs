//! Trainable scoring heads.
//!
//! * ADEM: `rᵀ N r̂ + cᵀ M r̂`, optionally on PCA-projected vectors.
//! * RUBER: cosine(r, r̂) as the referenced part and
//!   `MLP([c; r̂; cᵀ M r̂])` as the unreferenced part.
//! * Encoder head: `4 · MLP(d) + 1` on a joint context-response encoding `d`.
//!
//! Each head runs in a `full`, `referenced_only` or `unreferenced_only`
//! configuration. Unreferenced configurations never look at reference
//! vectors.

mod checkpoint;
mod mlp;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use mlp::{sigmoid, Activation, Layer, LayerGrad, Mlp, MlpTrace};

use crate::corpus::{Corpus, ResponseCandidate};
use crate::embeddings::{PcaProjection, VectorSource};
use crate::error::{Error, Result};
use crate::io_util;
use crate::linalg::{cosine, round_sig9, Matrix};

/// Hidden layer widths used when none are given.
pub const DEFAULT_HIDDEN: [usize; 1] = [256];

/// Principal components kept for ADEM inputs.
pub const ADEM_PCA_COMPONENTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Adem,
    Ruber,
    EncHead,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Adem => "adem",
            Variant::Ruber => "ruber",
            Variant::EncHead => "enc_head",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adem" => Ok(Variant::Adem),
            "ruber" => Ok(Variant::Ruber),
            "enc_head" | "enc-head" => Ok(Variant::EncHead),
            other => Err(Error::invalid(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalConfig {
    Full,
    ReferencedOnly,
    UnreferencedOnly,
}

impl EvalConfig {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalConfig::Full => "full",
            EvalConfig::ReferencedOnly => "referenced_only",
            EvalConfig::UnreferencedOnly => "unreferenced_only",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            EvalConfig::Full => "full",
            EvalConfig::ReferencedOnly => "ref",
            EvalConfig::UnreferencedOnly => "unref",
        }
    }

    pub fn uses_reference(self) -> bool {
        self != EvalConfig::UnreferencedOnly
    }
}

impl fmt::Display for EvalConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EvalConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(EvalConfig::Full),
            "ref" | "referenced_only" => Ok(EvalConfig::ReferencedOnly),
            "unref" | "unreferenced_only" => Ok(EvalConfig::UnreferencedOnly),
            other => Err(Error::invalid(format!("unknown evaluator config {other:?}"))),
        }
    }
}

/// Trainable state of one evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatorParams {
    pub variant: Variant,
    pub config: EvalConfig,
    /// Dimension of the raw encodings fed in (before any PCA).
    pub input_dim: usize,
    /// Unreferenced bilinear matrix (ADEM and RUBER).
    pub m: Option<Matrix>,
    /// Referenced bilinear matrix (ADEM).
    pub n: Option<Matrix>,
    pub mlp: Option<Mlp>,
    pub pca: Option<PcaProjection>,
}

#[derive(Debug, Clone)]
pub struct InitOptions {
    pub hidden_dims: Vec<usize>,
    /// ADEM only: project inputs first.
    pub pca: Option<PcaProjection>,
    pub seed: u64,
}

impl Default for InitOptions {
    fn default() -> Self {
        InitOptions {
            hidden_dims: DEFAULT_HIDDEN.to_vec(),
            pca: None,
            seed: 0,
        }
    }
}

impl EvaluatorParams {
    /// Fresh parameters. ADEM matrices start at zero, the RUBER bilinear
    /// matrix starts at the identity, MLP weights are Xavier-uniform.
    pub fn init(variant: Variant, config: EvalConfig, input_dim: usize, opts: &InitOptions) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Dimension("input dim must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let params = match variant {
            Variant::Adem => {
                if let Some(p) = &opts.pca {
                    if p.input_dim() != input_dim {
                        return Err(Error::Dimension(format!(
                            "PCA expects dim {}, encodings have {input_dim}",
                            p.input_dim()
                        )));
                    }
                }
                let k = opts.pca.as_ref().map_or(input_dim, PcaProjection::n_components);
                EvaluatorParams {
                    variant,
                    config,
                    input_dim,
                    m: (config != EvalConfig::ReferencedOnly).then(|| Matrix::zeros(k, k)),
                    n: (config != EvalConfig::UnreferencedOnly).then(|| Matrix::zeros(k, k)),
                    mlp: None,
                    pca: opts.pca.clone(),
                }
            }
            Variant::Ruber => EvaluatorParams {
                variant,
                config,
                input_dim,
                m: Some(Matrix::identity(input_dim)),
                n: None,
                mlp: Some(Mlp::init(2 * input_dim + 1, &opts.hidden_dims, &mut rng)),
                pca: None,
            },
            Variant::EncHead => {
                if config == EvalConfig::ReferencedOnly {
                    return Err(Error::invalid("enc_head has no referenced configuration"));
                }
                EvaluatorParams {
                    variant,
                    config: EvalConfig::UnreferencedOnly,
                    input_dim,
                    m: None,
                    n: None,
                    mlp: Some(Mlp::init(input_dim, &opts.hidden_dims, &mut rng)),
                    pca: None,
                }
            }
        };
        params.validate()?;
        Ok(params)
    }

    /// Check shapes against `input_dim` and `config`, and finiteness.
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, m: &Matrix| {
            if m.is_finite() {
                Ok(())
            } else {
                Err(Error::NonFinite(format!("parameter block {name}")))
            }
        };
        let square = |name: &str, m: &Matrix, k: usize| {
            if m.rows() == k && m.cols() == k {
                finite(name, m)
            } else {
                Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {k}x{k}",
                    m.rows(),
                    m.cols()
                )))
            }
        };
        match self.variant {
            Variant::Adem => {
                let k = self.bilinear_dim();
                if let Some(p) = &self.pca {
                    if p.input_dim() != self.input_dim {
                        return Err(Error::Dimension("PCA input dim mismatch".into()));
                    }
                }
                match (&self.m, self.config) {
                    (Some(m), _) => square("M", m, k)?,
                    (None, EvalConfig::ReferencedOnly) => {}
                    (None, _) => return Err(Error::invalid("ADEM config needs matrix M")),
                }
                match (&self.n, self.config) {
                    (Some(n), _) => square("N", n, k)?,
                    (None, EvalConfig::UnreferencedOnly) => {}
                    (None, _) => return Err(Error::invalid("ADEM config needs matrix N")),
                }
                if self.mlp.is_some() {
                    return Err(Error::invalid("ADEM has no MLP"));
                }
            }
            Variant::Ruber => {
                let m = self.m.as_ref().ok_or_else(|| Error::invalid("RUBER needs matrix M"))?;
                square("M", m, self.input_dim)?;
                let mlp = self.mlp.as_ref().ok_or_else(|| Error::invalid("RUBER needs an MLP"))?;
                mlp.validate(2 * self.input_dim + 1)?;
            }
            Variant::EncHead => {
                if self.config != EvalConfig::UnreferencedOnly {
                    return Err(Error::invalid("enc_head is unreferenced only"));
                }
                let mlp = self.mlp.as_ref().ok_or_else(|| Error::invalid("enc_head needs an MLP"))?;
                mlp.validate(self.input_dim)?;
            }
        }
        if let Some(mlp) = &self.mlp {
            for (k, l) in mlp.layers.iter().enumerate() {
                finite(&format!("mlp[{k}].w"), &l.weights)?;
                if l.bias.iter().any(|b| !b.is_finite()) {
                    return Err(Error::NonFinite(format!("parameter block mlp[{k}].b")));
                }
            }
        }
        Ok(())
    }

    /// Same parameters scored under another configuration.
    pub fn with_config(&self, config: EvalConfig) -> Result<Self> {
        let mut p = self.clone();
        p.config = config;
        p.validate()?;
        Ok(p)
    }

    /// Width of the vectors entering the bilinear forms.
    pub fn bilinear_dim(&self) -> usize {
        self.pca
            .as_ref()
            .map_or(self.input_dim, PcaProjection::n_components)
    }

    pub fn name(&self) -> String {
        match (self.variant, self.config) {
            (Variant::EncHead, _) => "enc_head".into(),
            (v, EvalConfig::Full) => v.to_string(),
            (v, c) => format!("{v}_{}", c.short()),
        }
    }

    pub fn needs_reference(&self) -> bool {
        self.variant != Variant::EncHead && self.config.uses_reference()
    }

    fn needs_context(&self) -> bool {
        match self.variant {
            Variant::Adem => self.config != EvalConfig::ReferencedOnly,
            Variant::Ruber => self.config != EvalConfig::ReferencedOnly,
            Variant::EncHead => false,
        }
    }

    fn needs_hypothesis(&self) -> bool {
        self.variant != Variant::EncHead
    }

    fn needs_joint(&self) -> bool {
        self.variant == Variant::EncHead
    }

    /// Whether this head has anything to train under its configuration.
    pub fn has_trainable_part(&self) -> bool {
        !(self.variant == Variant::Ruber && self.config == EvalConfig::ReferencedOnly)
    }

    pub(crate) fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        match &self.pca {
            Some(p) => p.project(v),
            None => {
                if v.len() != self.input_dim {
                    return Err(Error::Dimension(format!(
                        "vector has dim {}, evaluator expects {}",
                        v.len(),
                        self.input_dim
                    )));
                }
                Ok(v.to_vec())
            }
        }
    }
}

/// Vectors for one `(context, reference, hypothesis)` triple. Only the
/// fields an evaluator needs have to be present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairVectors {
    pub context: Option<Vec<f64>>,
    pub reference: Option<Vec<f64>>,
    pub hypothesis: Option<Vec<f64>>,
    pub joint: Option<Vec<f64>>,
}

impl PairVectors {
    pub fn new(context: Vec<f64>, reference: Option<Vec<f64>>, hypothesis: Vec<f64>) -> Self {
        PairVectors {
            context: Some(context),
            reference,
            hypothesis: Some(hypothesis),
            joint: None,
        }
    }

    pub fn joint_only(joint: Vec<f64>) -> Self {
        PairVectors {
            joint: Some(joint),
            ..Default::default()
        }
    }

    pub(crate) fn context(&self) -> Result<&[f64]> {
        self.context
            .as_deref()
            .ok_or_else(|| Error::invalid("context vector required"))
    }

    pub(crate) fn hypothesis(&self) -> Result<&[f64]> {
        self.hypothesis
            .as_deref()
            .ok_or_else(|| Error::invalid("hypothesis vector required"))
    }

    pub(crate) fn reference(&self) -> Result<&[f64]> {
        self.reference.as_deref().ok_or(Error::ReferenceRequired)
    }

    pub(crate) fn joint(&self) -> Result<&[f64]> {
        self.joint
            .as_deref()
            .ok_or_else(|| Error::invalid("joint context-response vector required"))
    }
}

fn require<'a>(m: &'a Option<Matrix>, name: &str) -> Result<&'a Matrix> {
    m.as_ref()
        .ok_or_else(|| Error::invalid(format!("matrix {name} missing")))
}

/// ADEM raw score under `params.config`.
pub fn adem_score(
    context: Option<&[f64]>,
    reference: Option<&[f64]>,
    hypothesis: &[f64],
    params: &EvaluatorParams,
) -> Result<f64> {
    if params.variant != Variant::Adem {
        return Err(Error::invalid("adem_score needs ADEM parameters"));
    }
    let h = params.project(hypothesis)?;
    let referenced = || -> Result<f64> {
        let r = params.project(reference.ok_or(Error::ReferenceRequired)?)?;
        Ok(require(&params.n, "N")?.bilinear(&r, &h))
    };
    let unreferenced = || -> Result<f64> {
        let c = params.project(context.ok_or_else(|| Error::invalid("context vector required"))?)?;
        Ok(require(&params.m, "M")?.bilinear(&c, &h))
    };
    match params.config {
        EvalConfig::ReferencedOnly => referenced(),
        EvalConfig::UnreferencedOnly => unreferenced(),
        EvalConfig::Full => Ok(referenced()? + unreferenced()?),
    }
}

/// Cosine similarity of reference and hypothesis.
pub fn ruber_referenced(reference: &[f64], hypothesis: &[f64]) -> Result<f64> {
    if reference.len() != hypothesis.len() {
        return Err(Error::Dimension("reference and hypothesis dims differ".into()));
    }
    cosine(reference, hypothesis).ok_or_else(|| Error::invalid("cosine of a zero vector"))
}

/// `[c; r̂; cᵀ M r̂]`
pub(crate) fn ruber_features(m: &Matrix, c: &[f64], h: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(c.len() + h.len() + 1);
    x.extend_from_slice(c);
    x.extend_from_slice(h);
    x.push(m.bilinear(c, h));
    x
}

/// `MLP([c; r̂; cᵀ M r̂])`, in `(0, 1)`.
pub fn ruber_unreferenced(context: &[f64], hypothesis: &[f64], params: &EvaluatorParams) -> Result<f64> {
    if params.variant != Variant::Ruber {
        return Err(Error::invalid("ruber_unreferenced needs RUBER parameters"));
    }
    if context.len() != params.input_dim || hypothesis.len() != params.input_dim {
        return Err(Error::Dimension(format!(
            "RUBER expects dim {}, got context {} and hypothesis {}",
            params.input_dim,
            context.len(),
            hypothesis.len()
        )));
    }
    let m = require(&params.m, "M")?;
    let mlp = params.mlp.as_ref().ok_or_else(|| Error::invalid("MLP missing"))?;
    Ok(mlp.forward(&ruber_features(m, context, hypothesis)))
}

/// Map `values` linearly onto `[lo, hi]`; a constant batch maps to the midpoint.
pub fn min_max_rescale(values: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    values
        .iter()
        .map(|&v| {
            if span > 0.0 {
                lo + (hi - lo) * (v - min) / span
            } else {
                (lo + hi) / 2.0
            }
        })
        .collect()
}

/// Combine per-pair referenced and unreferenced RUBER scores: min-max
/// normalise each over the batch to `[0, 1]`, then average.
pub fn ruber_combine(referenced: &[f64], unreferenced: &[f64]) -> Result<Vec<f64>> {
    if referenced.len() != unreferenced.len() {
        return Err(Error::Dimension("score lists differ in length".into()));
    }
    if referenced.len() < 2 {
        return Err(Error::InsufficientData(
            "full RUBER normalises over a batch of at least 2".into(),
        ));
    }
    let r = min_max_rescale(referenced, 0.0, 1.0);
    let u = min_max_rescale(unreferenced, 0.0, 1.0);
    Ok(r.iter().zip(&u).map(|(a, b)| (a + b) / 2.0).collect())
}

/// Full RUBER over a batch of pairs.
pub fn ruber_full(batch: &[PairVectors], params: &EvaluatorParams) -> Result<Vec<f64>> {
    let (refd, unref): (Vec<f64>, Vec<f64>) = batch
        .iter()
        .map(|p| {
            Ok((
                ruber_referenced(p.reference()?, p.hypothesis()?)?,
                ruber_unreferenced(p.context()?, p.hypothesis()?, params)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    ruber_combine(&refd, &unref)
}

/// Raw MLP output of the encoder head, in `(0, 1)`.
pub fn enc_head_output(joint: &[f64], params: &EvaluatorParams) -> Result<f64> {
    if params.variant != Variant::EncHead {
        return Err(Error::invalid("enc_head_score needs enc_head parameters"));
    }
    if joint.len() != params.input_dim {
        return Err(Error::Dimension(format!(
            "enc_head expects dim {}, got {}",
            params.input_dim,
            joint.len()
        )));
    }
    Ok(params.mlp.as_ref().expect("validated").forward(joint))
}

/// `4 · MLP(d) + 1`, on the annotators' 1–5 scale.
pub fn enc_head_score(joint: &[f64], params: &EvaluatorParams) -> Result<f64> {
    Ok(to_likert(enc_head_output(joint, params)?))
}

/// Map a `(0, 1)` head output onto the 1–5 scale.
#[inline]
pub fn to_likert(output: f64) -> f64 {
    4.0 * output + 1.0
}

/// The output that training acts on: the ADEM raw score, or the sigmoid
/// output of the RUBER unreferenced MLP or the encoder head.
pub fn head_output(params: &EvaluatorParams, input: &PairVectors) -> Result<f64> {
    match params.variant {
        Variant::Adem => adem_score(
            input.context.as_deref(),
            input.reference.as_deref(),
            input.hypothesis()?,
            params,
        ),
        Variant::Ruber => ruber_unreferenced(input.context()?, input.hypothesis()?, params),
        Variant::EncHead => enc_head_output(input.joint()?, params),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub pair_id: String,
    pub evaluator: String,
    pub raw: f64,
    /// On the 1–5 scale.
    pub scaled: f64,
}

/// Score a batch. ADEM and RUBER raw scores are min-max rescaled onto
/// `[1, 5]` over the batch; the encoder head uses `4 · output + 1`.
pub fn score_batch(ids: &[String], inputs: &[PairVectors], params: &EvaluatorParams) -> Result<Vec<ScoreRecord>> {
    if ids.len() != inputs.len() {
        return Err(Error::Dimension("ids and inputs differ in length".into()));
    }
    let raw: Vec<f64> = match (params.variant, params.config) {
        (Variant::Ruber, EvalConfig::Full) => ruber_full(inputs, params)?,
        (Variant::Ruber, EvalConfig::ReferencedOnly) => inputs
            .iter()
            .map(|p| ruber_referenced(p.reference()?, p.hypothesis()?))
            .collect::<Result<_>>()?,
        _ => inputs
            .par_iter()
            .map(|p| head_output(params, p))
            .collect::<Result<_>>()?,
    };
    let scaled = match params.variant {
        Variant::EncHead => raw.iter().copied().map(to_likert).collect(),
        _ => min_max_rescale(&raw, 1.0, 5.0),
    };
    let name = params.name();
    Ok(ids
        .iter()
        .zip(raw.into_iter().zip(scaled))
        .map(|(id, (raw, scaled))| ScoreRecord {
            pair_id: id.clone(),
            evaluator: name.clone(),
            raw,
            scaled,
        })
        .collect())
}

/// Fetch the vectors `params` needs for each candidate. Collects every
/// unresolved id before failing.
pub fn gather_inputs<'c>(
    corpus: &Corpus,
    candidates: impl IntoIterator<Item = &'c ResponseCandidate>,
    source: &dyn VectorSource,
    params: &EvaluatorParams,
) -> Result<Vec<PairVectors>> {
    let mut missing = Vec::new();
    let mut out = Vec::new();
    fn keep(missing: &mut Vec<String>, r: Result<Vec<f64>, String>) -> Option<Vec<f64>> {
        match r {
            Ok(v) => Some(v),
            Err(id) => {
                missing.push(id);
                None
            }
        }
    }
    for c in candidates {
        let d = corpus
            .dialogue(&c.dialogue_id)
            .ok_or_else(|| Error::DanglingDialogue(c.dialogue_id.clone()))?;
        let mut p = PairVectors::default();
        if params.needs_context() {
            p.context = keep(&mut missing, source.context(d));
        }
        if params.needs_hypothesis() {
            p.hypothesis = keep(&mut missing, source.hypothesis(c));
        }
        if params.needs_joint() {
            p.joint = keep(&mut missing, source.joint(d, c));
        }
        if params.needs_reference() {
            match corpus.ground_truth(&d.dialogue_id) {
                Some(gt) => p.reference = keep(&mut missing, source.reference(d, gt)),
                None => missing.push(crate::embeddings::ids::reference(&d.dialogue_id)),
            }
        }
        out.push(p);
    }
    if !missing.is_empty() {
        missing.dedup();
        return Err(Error::UnresolvedIds(missing));
    }
    Ok(out)
}

/// One score record per corpus candidate, in corpus order.
pub fn score_corpus(corpus: &Corpus, source: &dyn VectorSource, params: &EvaluatorParams) -> Result<Vec<ScoreRecord>> {
    let inputs = gather_inputs(corpus, corpus.candidates(), source, params)?;
    let ids: Vec<String> = corpus.candidates().iter().map(|c| c.pair_id.clone()).collect();
    score_batch(&ids, &inputs, params)
}

const SCORE_COLUMNS: [&str; 4] = ["pair_id", "evaluator", "raw", "scaled"];

pub fn save_scores(scores: &[ScoreRecord], path: impl AsRef<Path>, header: Option<&str>) -> Result<()> {
    io_util::write_atomic(path.as_ref(), |w| {
        if let Some(h) = header {
            io_util::write_header(w, h)?;
        }
        writeln!(w, "{}", SCORE_COLUMNS.join("\t"))?;
        for s in scores {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                s.pair_id,
                s.evaluator,
                round_sig9(s.raw),
                round_sig9(s.scaled)
            )?;
        }
        Ok(())
    })
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreRecord>> {
    let path = path.as_ref();
    io_util::read_tsv(path, &SCORE_COLUMNS)?
        .into_iter()
        .map(|(lineno, f)| {
            let num = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| io_util::with_path(Error::parse(lineno, format!("bad number {s:?}")), path))
            };
            Ok(ScoreRecord {
                pair_id: f[0].clone(),
                evaluator: f[1].clone(),
                raw: num(&f[2])?,
                scaled: num(&f[3])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ruber_params(dim: usize, hidden: usize, seed: u64) -> EvaluatorParams {
        EvaluatorParams::init(
            Variant::Ruber,
            EvalConfig::UnreferencedOnly,
            dim,
            &InitOptions {
                hidden_dims: vec![hidden],
                pca: None,
                seed,
            },
        )
        .unwrap()
    }

    #[test]
    fn adem_identity_referenced() {
        let mut p = EvaluatorParams::init(Variant::Adem, EvalConfig::ReferencedOnly, 3, &InitOptions::default()).unwrap();
        p.n = Some(Matrix::identity(3));
        let u = [0.0, 1.0, 0.0];
        assert_eq!(adem_score(None, Some(&u), &u, &p).unwrap(), 1.0);
    }

    #[test]
    fn adem_zero_m_unreferenced() {
        let p = EvaluatorParams::init(Variant::Adem, EvalConfig::UnreferencedOnly, 2, &InitOptions::default()).unwrap();
        assert_eq!(adem_score(Some(&[3.0, -1.0]), None, &[0.5, 7.0], &p).unwrap(), 0.0);
    }

    #[test]
    fn adem_full_requires_reference() {
        let p = EvaluatorParams::init(Variant::Adem, EvalConfig::Full, 2, &InitOptions::default()).unwrap();
        let err = adem_score(Some(&[1.0, 0.0]), None, &[1.0, 0.0], &p).unwrap_err();
        assert_eq!(err.to_string(), "reference required");
    }

    #[test]
    fn cosine_examples() {
        let r = [1.0, 0.0];
        assert_eq!(ruber_referenced(&r, &r).unwrap(), 1.0);
        assert_eq!(ruber_referenced(&r, &[-1.0, 0.0]).unwrap(), -1.0);
        assert!((ruber_referenced(&r, &[1.0, 1.0]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(ruber_referenced(&r, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn zero_mlp_outputs_half() {
        let mut p = ruber_params(3, 4, 1);
        for l in &mut p.mlp.as_mut().unwrap().layers {
            l.weights = Matrix::zeros(l.weights.rows(), l.weights.cols());
            l.bias.iter_mut().for_each(|b| *b = 0.0);
        }
        assert_eq!(ruber_unreferenced(&[1.0, 2.0, 3.0], &[-1.0, 0.5, 2.0], &p).unwrap(), 0.5);
    }

    #[test]
    fn bilinear_feature_is_monotone() {
        // Only the output weight on the hidden unit fed by cᵀMr̂ is positive.
        let mut p = ruber_params(2, 1, 0);
        let mlp = p.mlp.as_mut().unwrap();
        mlp.layers[0].weights = Matrix::from_fn(1, 5, |_, j| if j == 4 { 1.0 } else { 0.0 });
        mlp.layers[1].weights = Matrix::from_fn(1, 1, |_, _| 2.0);
        let c = [1.0, 0.0];
        let mut last = 0.0;
        for k in 0..10 {
            let s = ruber_unreferenced(&c, &[k as f64 * 0.3, 1.0], &p).unwrap();
            assert!(s > last);
            last = s;
        }
    }

    #[test]
    fn likert_range() {
        assert_eq!(to_likert(0.5), 3.0);
        assert!(to_likert(sigmoid(-30.0)) > 1.0);
        assert!(to_likert(sigmoid(30.0)) < 5.0);
    }

    #[test]
    fn ruber_combine_examples() {
        let a = [0.2, 0.9, 0.4];
        let same = ruber_combine(&a, &a).unwrap();
        assert_eq!(same, min_max_rescale(&a, 0.0, 1.0));
        let with_const = ruber_combine(&[0.3, 0.3, 0.3], &a).unwrap();
        let norm = min_max_rescale(&a, 0.0, 1.0);
        for (x, n) in with_const.iter().zip(norm) {
            assert!((x - (0.5 + n) / 2.0).abs() < 1e-15);
        }
        // hand-worked: ref (0, 1, 0.5) → (0, 1, .5); unref (2, 4, 3) → (0, 1, .5)
        let hand = ruber_combine(&[0.0, 1.0, 0.5], &[2.0, 6.0, 3.0]).unwrap();
        for (x, w) in hand.iter().zip([0.0, 1.0, 0.375]) {
            assert!((x - w).abs() < 1e-12);
        }
        assert!(ruber_combine(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn enc_head_rejects_referenced_config() {
        assert!(EvaluatorParams::init(Variant::EncHead, EvalConfig::ReferencedOnly, 4, &InitOptions::default()).is_err());
        let p = EvaluatorParams::init(Variant::EncHead, EvalConfig::Full, 4, &InitOptions::default()).unwrap();
        assert_eq!(p.config, EvalConfig::UnreferencedOnly);
        assert!(enc_head_score(&[1.0, 2.0], &p).is_err());
    }

    #[test]
    fn names() {
        let p = ruber_params(2, 2, 0);
        assert_eq!(p.name(), "ruber_unref");
        assert_eq!(p.with_config(EvalConfig::Full).unwrap().name(), "ruber");
    }
}
