//! Principal components of bag-of-words encodings. ADEM projects its
//! vectors this way before the bilinear maps.
//!
//!     cargo run --release --example pca_projection

use std::path::Path;

use dialeval::embeddings::{fit_pca, BagEncoder, EmbeddingTable};
use dialeval::corpus::Corpus;

fn main() -> dialeval::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let corpus = Corpus::load(data.join("corpus.jsonl"))?;
    let encoder = BagEncoder::new(EmbeddingTable::load(data.join("embeddings.txt"))?);
    let set = encoder.encode_corpus(&corpus)?;
    let vectors: Vec<Vec<f64>> = set
        .ids()
        .iter()
        .filter(|id| id.starts_with("hyp:"))
        .map(|id| set.get(id).unwrap().to_vec())
        .collect();
    println!("{} hypothesis vectors of dim {}", vectors.len(), set.dim());

    let pca = fit_pca(&vectors, 8)?;
    let total: f64 = fit_pca(&vectors, set.dim())?.explained_variance.iter().sum();
    let mut acc = 0.0;
    for (k, v) in pca.explained_variance.iter().enumerate() {
        acc += v;
        println!("pc{k}: variance {v:.5}  cumulative {:.3}", acc / total);
    }
    let y = pca.project(&vectors[0])?;
    let back = pca.reconstruct(&y);
    let err: f64 = back.iter().zip(&vectors[0]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    println!("reconstruction error of the first vector from 8 components: {err:.4}");
    Ok(())
}
