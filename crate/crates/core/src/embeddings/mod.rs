//! Vector representations: word-embedding tables, the built-in
//! bag-of-embeddings encoder, precomputed encoding files and PCA.

mod encodings;
mod pca;
mod source;

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

pub use encodings::{load_encodings, EncodingSet};
pub use pca::{fit_pca, PcaProjection};
pub use source::{ids, BagEncoder, VectorSource};

use crate::error::{Error, Result};
use crate::io_util;

/// Token → dense vector lookup, all of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    tokens: Vec<String>,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("embedding dim must be positive".into()));
        }
        Ok(EmbeddingTable {
            dim,
            tokens: Vec::new(),
            vectors: HashMap::new(),
        })
    }

    /// Insert or replace a vector.
    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let token = token.into();
        if vector.len() != self.dim {
            return Err(Error::Dimension(format!(
                "vector for {token:?} has {} entries, table dim is {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("vector for {token:?}")));
        }
        if self.vectors.insert(token.clone(), vector).is_none() {
            self.tokens.push(token);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// `None` for unknown tokens; there is no fallback vector.
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Load a GloVe-style text file: `token v1 v2 ... vd` per line.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_reader(io_util::open(path)?).map_err(|e| io_util::with_path(e, path))
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut table: Option<EmbeddingTable> = None;
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let vector = fields
                .map(|f| {
                    f.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::parse(lineno, format!("non-numeric field {f:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            let t = match &mut table {
                Some(t) => t,
                None => table.insert(
                    EmbeddingTable::new(vector.len())
                        .map_err(|_| Error::parse(lineno, "line has no vector components"))?,
                ),
            };
            if vector.len() != t.dim {
                return Err(Error::parse(
                    lineno,
                    format!("dimension {} differs from {}", vector.len(), t.dim),
                ));
            }
            t.insert(token, vector)?;
        }
        table.ok_or_else(|| Error::parse(0, "embedding file is empty"))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        io_util::write_atomic(path.as_ref(), |w| {
            for t in &self.tokens {
                write!(w, "{t}")?;
                for v in &self.vectors[t] {
                    write!(w, " {v}")?;
                }
                writeln!(w)?;
            }
            Ok(())
        })
    }
}

/// Mean embedding of a token list.
#[derive(Debug, Clone, PartialEq)]
pub struct BagEncoding {
    pub vector: Vec<f64>,
    /// In-vocabulary tokens that contributed.
    pub known: usize,
}

impl BagEncoding {
    /// True when no token was in the vocabulary; `vector` is then all zeros.
    pub fn is_empty(&self) -> bool {
        self.known == 0
    }
}

/// Arithmetic mean of the embeddings of in-vocabulary tokens.
///
/// Out-of-vocabulary tokens are skipped. Summation runs in sorted token order,
/// which makes the result exactly invariant to token permutation.
pub fn encode_bag<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> BagEncoding {
    let mut known: Vec<&[f64]> = tokens.iter().filter_map(|t| table.get(t.as_ref())).collect();
    known.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut vector = vec![0.0; table.dim()];
    for v in &known {
        for (acc, x) in vector.iter_mut().zip(v.iter()) {
            *acc += x;
        }
    }
    if !known.is_empty() {
        let n = known.len() as f64;
        vector.iter_mut().for_each(|x| *x /= n);
    }
    BagEncoding {
        vector,
        known: known.len(),
    }
}
