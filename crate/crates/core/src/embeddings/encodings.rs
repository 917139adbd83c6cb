use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io_util;
use crate::linalg::round_vec_sig9;

#[derive(Serialize, Deserialize)]
struct EncodingLine {
    id: String,
    encoder: String,
    vec: Vec<f64>,
}

/// Precomputed encodings keyed by id (`ctx:…`, `ref:…`, `hyp:…`, `pair:…`).
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingSet {
    encoder: String,
    dim: usize,
    ids: Vec<String>,
    vectors: HashMap<String, Vec<f64>>,
    warnings: Vec<String>,
}

impl EncodingSet {
    pub fn new(encoder: impl Into<String>, dim: usize) -> Self {
        EncodingSet {
            encoder: encoder.into(),
            dim,
            ids: Vec::new(),
            vectors: HashMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn insert(&mut self, id: impl Into<String>, vec: Vec<f64>) -> Result<()> {
        let id = id.into();
        if vec.len() != self.dim {
            return Err(Error::Dimension(format!(
                "encoding {id} has dim {}, expected {}",
                vec.len(),
                self.dim
            )));
        }
        if vec.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("encoding {id}")));
        }
        if self.vectors.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        if vec.iter().all(|&v| v == 0.0) {
            self.warnings.push(format!("encoding {id} is the zero vector"));
        }
        self.ids.push(id.clone());
        self.vectors.insert(id, vec);
        Ok(())
    }

    pub fn encoder(&self) -> &str {
        &self.encoder
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    /// Ids in file order.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Non-fatal issues noticed while loading (zero vectors).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut set: Option<EncodingSet> = None;
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let rec: EncodingLine =
                serde_json::from_str(line).map_err(|e| Error::parse(lineno, e.to_string()))?;
            let s = set.get_or_insert_with(|| EncodingSet::new(rec.encoder.clone(), rec.vec.len()));
            if rec.encoder != s.encoder {
                return Err(Error::parse(
                    lineno,
                    format!("encoder {:?} differs from {:?}", rec.encoder, s.encoder),
                ));
            }
            s.insert(rec.id, rec.vec).map_err(|e| match e {
                Error::Dimension(m) | Error::NonFinite(m) => Error::parse(lineno, m),
                other => other,
            })?;
        }
        set.ok_or_else(|| Error::parse(0, "encoding file is empty"))
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        for id in &self.ids {
            let line = EncodingLine {
                id: id.clone(),
                encoder: self.encoder.clone(),
                vec: round_vec_sig9(&self.vectors[id]),
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>, header: Option<&str>) -> Result<()> {
        io_util::write_atomic(path.as_ref(), |w| {
            if let Some(h) = header {
                io_util::write_header(w, h)?;
            }
            self.write_to(w)
        })
    }
}

/// Load an encoding JSONL file: `{"id":…,"encoder":…,"vec":[…]}` per line.
pub fn load_encodings(path: impl AsRef<Path>) -> Result<EncodingSet> {
    let path = path.as_ref();
    EncodingSet::from_reader(io_util::open(path)?).map_err(|e| io_util::with_path(e, path))
}
