//! Analytic gradients of the scoring heads.
//!
//! Each head exposes a scalar output `t` (ADEM raw score, or the sigmoid
//! output of an MLP). Losses are taken on `t` directly (margin ranking) or on
//! the prediction `g(t)` (squared error), where `g` is the identity for ADEM
//! and `4t + 1` for the sigmoid heads. PCA projections are constants.

use crate::error::{Error, Result};
use crate::evaluators::{
    ruber_features, to_likert, EvalConfig, EvaluatorParams, LayerGrad, PairVectors, Variant,
};
use crate::linalg::Matrix;

use super::loss::{margin_rank_loss, mse_loss};

/// Gradient blocks mirroring [`EvaluatorParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub m: Option<Matrix>,
    pub n: Option<Matrix>,
    pub mlp: Vec<LayerGrad>,
}

impl Gradients {
    pub fn zeros_like(params: &EvaluatorParams) -> Self {
        Gradients {
            m: params.m.as_ref().map(|m| Matrix::zeros(m.rows(), m.cols())),
            n: params.n.as_ref().map(|n| Matrix::zeros(n.rows(), n.cols())),
            mlp: params.mlp.as_ref().map(|m| m.zero_grads()).unwrap_or_default(),
        }
    }

    /// `(block name, values)` in canonical order: M, N, then each MLP layer's
    /// weights and bias.
    pub fn blocks(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        if let Some(m) = &self.m {
            out.push(("M".to_string(), m.as_slice()));
        }
        if let Some(n) = &self.n {
            out.push(("N".to_string(), n.as_slice()));
        }
        for (k, g) in self.mlp.iter().enumerate() {
            out.push((format!("mlp[{k}].w"), g.weights.as_slice()));
            out.push((format!("mlp[{k}].b"), g.bias.as_slice()));
        }
        out
    }

    pub fn check_finite(&self) -> Result<()> {
        for (name, values) in self.blocks() {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("gradient of {name}")));
            }
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|(_, v)| v.iter())
            .fold(0.0, |a, &b| a.max(b.abs()))
    }
}

/// Parameter blocks in the same canonical order as [`Gradients::blocks`].
pub(crate) fn param_blocks_mut(params: &mut EvaluatorParams) -> Vec<(String, &mut [f64])> {
    let mut out = Vec::new();
    if let Some(m) = &mut params.m {
        out.push(("M".to_string(), m.as_mut_slice()));
    }
    if let Some(n) = &mut params.n {
        out.push(("N".to_string(), n.as_mut_slice()));
    }
    if let Some(mlp) = &mut params.mlp {
        for (k, l) in mlp.layers.iter_mut().enumerate() {
            out.push((format!("mlp[{k}].w"), l.weights.as_mut_slice()));
            out.push((format!("mlp[{k}].b"), l.bias.as_mut_slice()));
        }
    }
    out
}

/// Forward the head output and accumulate `scale · d_t · ∂t/∂θ` into `grads`.
/// Returns `t`.
fn head_forward_backward(
    params: &EvaluatorParams,
    input: &PairVectors,
    d_t: impl FnOnce(f64) -> f64,
    grads: &mut Gradients,
) -> Result<f64> {
    match params.variant {
        Variant::Adem => {
            let h = params.project(input.hypothesis()?)?;
            let use_ref = params.config != EvalConfig::UnreferencedOnly;
            let use_unref = params.config != EvalConfig::ReferencedOnly;
            let r = if use_ref {
                Some(params.project(input.reference()?)?)
            } else {
                None
            };
            let c = if use_unref {
                Some(params.project(input.context()?)?)
            } else {
                None
            };
            let mut t = 0.0;
            if let (Some(r), Some(n)) = (&r, &params.n) {
                t += n.bilinear(r, &h);
            }
            if let (Some(c), Some(m)) = (&c, &params.m) {
                t += m.bilinear(c, &h);
            }
            let d = d_t(t);
            if d != 0.0 {
                if let (Some(r), Some(gn)) = (&r, &mut grads.n) {
                    gn.add_outer(d, r, &h);
                }
                if let (Some(c), Some(gm)) = (&c, &mut grads.m) {
                    gm.add_outer(d, c, &h);
                }
            }
            Ok(t)
        }
        Variant::Ruber => {
            let c = input.context()?;
            let h = input.hypothesis()?;
            let m = params.m.as_ref().expect("validated");
            let mlp = params.mlp.as_ref().expect("validated");
            let trace = mlp.forward_trace(&ruber_features(m, c, h));
            let t = trace.output();
            let d = d_t(t);
            if d != 0.0 {
                let d_input = mlp.backward(&trace, d, 1.0, &mut grads.mlp);
                let d_bilinear = d_input[d_input.len() - 1];
                if let Some(gm) = &mut grads.m {
                    gm.add_outer(d_bilinear, c, h);
                }
            }
            Ok(t)
        }
        Variant::EncHead => {
            let mlp = params.mlp.as_ref().expect("validated");
            let trace = mlp.forward_trace(input.joint()?);
            let t = trace.output();
            let d = d_t(t);
            if d != 0.0 {
                mlp.backward(&trace, d, 1.0, &mut grads.mlp);
            }
            Ok(t)
        }
    }
}

/// Map a head output onto the label scale, with its derivative.
#[inline]
pub fn supervised_prediction(variant: Variant, t: f64) -> (f64, f64) {
    match variant {
        Variant::Adem => (t, 1.0),
        Variant::Ruber | Variant::EncHead => (to_likert(t), 4.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedExample {
    pub input: PairVectors,
    /// Human label on the 1–5 scale.
    pub label: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingExample {
    /// Context with its ground-truth response.
    pub positive: PairVectors,
    /// Same context with a negative-sampled response.
    pub negative: PairVectors,
}

/// A mini-batch under one of the two losses.
#[derive(Debug, Clone, Copy)]
pub enum Batch<'a> {
    Mse(&'a [&'a SupervisedExample]),
    Margin {
        examples: &'a [&'a RankingExample],
        margin: f64,
    },
}

impl Batch<'_> {
    pub fn len(&self) -> usize {
        match self {
            Batch::Mse(e) => e.len(),
            Batch::Margin { examples, .. } => examples.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Mean loss over the batch and its exact gradient.
pub fn backward(params: &EvaluatorParams, batch: Batch<'_>) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::InsufficientData("empty batch".into()));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut grads = Gradients::zeros_like(params);
    let mut total = 0.0;
    match batch {
        Batch::Mse(examples) => {
            for ex in examples {
                let mut loss = 0.0;
                head_forward_backward(
                    params,
                    &ex.input,
                    |t| {
                        let (pred, dpred) = supervised_prediction(params.variant, t);
                        let (l, dl) = mse_loss(pred, ex.label);
                        loss = l;
                        scale * dl * dpred
                    },
                    &mut grads,
                )?;
                total += loss;
            }
        }
        Batch::Margin { examples, margin } => {
            for ex in examples {
                // The loss couples both outputs, so forward both first.
                let s_pos = crate::evaluators::head_output(params, &ex.positive)?;
                let s_neg = crate::evaluators::head_output(params, &ex.negative)?;
                let ml = margin_rank_loss(s_pos, s_neg, margin);
                total += ml.loss;
                if ml.loss > 0.0 {
                    head_forward_backward(params, &ex.positive, |_| scale * ml.d_pos, &mut grads)?;
                    head_forward_backward(params, &ex.negative, |_| scale * ml.d_neg, &mut grads)?;
                }
            }
        }
    }
    grads.check_finite()?;
    Ok((total * scale, grads))
}

/// Mean loss only.
pub fn batch_loss(params: &EvaluatorParams, batch: Batch<'_>) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::InsufficientData("empty batch".into()));
    }
    let mut total = 0.0;
    match batch {
        Batch::Mse(examples) => {
            for ex in examples {
                let t = crate::evaluators::head_output(params, &ex.input)?;
                total += mse_loss(supervised_prediction(params.variant, t).0, ex.label).0;
            }
        }
        Batch::Margin { examples, margin } => {
            for ex in examples {
                let s_pos = crate::evaluators::head_output(params, &ex.positive)?;
                let s_neg = crate::evaluators::head_output(params, &ex.negative)?;
                total += margin_rank_loss(s_pos, s_neg, margin).loss;
            }
        }
    }
    Ok(total / batch.len() as f64)
}

/// Which parameter blocks an optimiser may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainableMask {
    pub m: bool,
    pub n: bool,
    pub mlp: bool,
}

impl TrainableMask {
    pub fn allows(&self, block: &str) -> bool {
        match block {
            "M" => self.m,
            "N" => self.n,
            _ => self.mlp && block.starts_with("mlp["),
        }
    }
}

/// ADEM trains only its bilinear matrices; RUBER trains M and the MLP; the
/// encoder head trains its MLP (encodings are frozen inputs).
pub fn freeze_policy(params: &EvaluatorParams) -> TrainableMask {
    match params.variant {
        Variant::Adem => TrainableMask {
            m: params.m.is_some(),
            n: params.n.is_some(),
            mlp: false,
        },
        Variant::Ruber => TrainableMask {
            m: true,
            n: false,
            mlp: true,
        },
        Variant::EncHead => TrainableMask {
            m: false,
            n: false,
            mlp: true,
        },
    }
}

/// Number of scalars the mask leaves trainable.
pub fn trainable_scalars(params: &EvaluatorParams, mask: TrainableMask) -> usize {
    let mut p = params.clone();
    param_blocks_mut(&mut p)
        .iter()
        .filter(|(name, _)| mask.allows(name))
        .map(|(_, v)| v.len())
        .sum()
}
