use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EvalConfig, EvaluatorParams, Layer, Mlp, Variant};
use crate::embeddings::PcaProjection;
use crate::error::{Error, Result};
use crate::io_util;
use crate::linalg::{round_sig9, round_vec_sig9, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Dims {
    input_dim: usize,
    bilinear_dim: usize,
    hidden_dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LayerFile {
    w: Matrix,
    b: Vec<f64>,
    act: String,
}

/// On-disk form of [`EvaluatorParams`]; every number is written with 9
/// significant digits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    variant: String,
    config: String,
    dims: Dims,
    matrices: BTreeMap<String, Matrix>,
    mlp: Vec<LayerFile>,
    pca: Option<PcaProjection>,
    /// Free-form run description (tool version, seed, flags).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

fn round_matrix(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    out.as_mut_slice().iter_mut().for_each(|v| *v = round_sig9(*v));
    out
}

impl Checkpoint {
    pub fn from_params(params: &EvaluatorParams, meta: Option<serde_json::Value>) -> Self {
        let mut matrices = BTreeMap::new();
        if let Some(m) = &params.m {
            matrices.insert("M".to_string(), round_matrix(m));
        }
        if let Some(n) = &params.n {
            matrices.insert("N".to_string(), round_matrix(n));
        }
        let mlp = params
            .mlp
            .iter()
            .flat_map(|m| &m.layers)
            .map(|l| LayerFile {
                w: round_matrix(&l.weights),
                b: round_vec_sig9(&l.bias),
                act: l.activation.to_string(),
            })
            .collect();
        let pca = params.pca.as_ref().map(|p| PcaProjection {
            mean: round_vec_sig9(&p.mean),
            components: round_matrix(&p.components),
            explained_variance: round_vec_sig9(&p.explained_variance),
        });
        Checkpoint {
            variant: params.variant.to_string(),
            config: params.config.to_string(),
            dims: Dims {
                input_dim: params.input_dim,
                bilinear_dim: params.bilinear_dim(),
                hidden_dims: params.mlp.as_ref().map(Mlp::hidden_dims).unwrap_or_default(),
            },
            matrices,
            mlp,
            pca,
            meta,
        }
    }

    pub fn into_params(self) -> Result<EvaluatorParams> {
        let variant: Variant = self.variant.parse()?;
        let config: EvalConfig = self.config.parse()?;
        let mut matrices = self.matrices;
        let m = matrices.remove("M");
        let n = matrices.remove("N");
        if let Some(extra) = matrices.keys().next() {
            return Err(Error::invalid(format!("unknown checkpoint matrix {extra:?}")));
        }
        let mlp = if self.mlp.is_empty() {
            None
        } else {
            Some(Mlp {
                layers: self
                    .mlp
                    .into_iter()
                    .map(|l| {
                        Ok(Layer {
                            weights: l.w,
                            bias: l.b,
                            activation: l.act.parse()?,
                        })
                    })
                    .collect::<Result<_>>()?,
            })
        };
        let params = EvaluatorParams {
            variant,
            config,
            input_dim: self.dims.input_dim,
            m,
            n,
            mlp,
            pca: self.pca,
        };
        params.validate()?;
        if params.bilinear_dim() != self.dims.bilinear_dim {
            return Err(Error::Dimension("checkpoint bilinear_dim disagrees with matrices".into()));
        }
        Ok(params)
    }
}

pub fn save_checkpoint(params: &EvaluatorParams, path: impl AsRef<Path>, meta: Option<serde_json::Value>) -> Result<()> {
    let ck = Checkpoint::from_params(params, meta);
    io_util::write_atomic(path.as_ref(), |w| {
        serde_json::to_writer(&mut *w, &ck)?;
        std::io::Write::write_all(w, b"\n")
    })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<EvaluatorParams> {
    let path = path.as_ref();
    let ck: Checkpoint = serde_json::from_reader(io_util::open(path)?)
        .map_err(|e| io_util::with_path(Error::parse(e.line(), e.to_string()), path))?;
    ck.into_params()
}
