//! The three scoring heads on hand-built vectors: ADEM's bilinear terms,
//! RUBER's cosine and MLP halves with min-max fusion, and the sigmoid head
//! mapped onto the 1-5 scale.
//!
//!     cargo run --example evaluator_formulas

use dialeval::evaluators::{
    adem_score, enc_head_score, min_max_rescale, ruber_full, ruber_referenced, ruber_unreferenced, EvalConfig,
    EvaluatorParams, InitOptions, PairVectors, Variant,
};
use dialeval::linalg::Matrix;

fn main() -> dialeval::Result<()> {
    let opts = InitOptions {
        hidden_dims: vec![8],
        pca: None,
        seed: 3,
    };
    let c = vec![0.2, -0.1, 0.4, 0.3];
    let r = vec![0.1, 0.0, 0.5, 0.2];
    let h = vec![0.3, -0.2, 0.1, 0.4];

    // ADEM starts from zero maps; give it something to show.
    let mut adem = EvaluatorParams::init(Variant::Adem, EvalConfig::Full, 4, &opts)?;
    adem.m = Some(Matrix::identity(4));
    adem.n = Some(Matrix::from_rows(&[
        vec![1.0, 0.5, 0.0, 0.0],
        vec![0.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 2.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
    ])?);
    let full = adem_score(Some(&c), Some(&r), &h, &adem)?;
    let refd = adem_score(Some(&c), Some(&r), &h, &adem.with_config(EvalConfig::ReferencedOnly)?)?;
    let unref = adem_score(Some(&c), Some(&r), &h, &adem.with_config(EvalConfig::UnreferencedOnly)?)?;
    println!("adem full {full:.6} = ref {refd:.6} + unref {unref:.6}");

    let ruber = EvaluatorParams::init(Variant::Ruber, EvalConfig::Full, 4, &opts)?;
    println!("ruber ref (cosine) {:.6}", ruber_referenced(&r, &h)?);
    println!("ruber unref (mlp)  {:.6}", ruber_unreferenced(&c, &h, &ruber)?);
    let batch = vec![
        PairVectors::new(c.clone(), Some(r.clone()), h.clone()),
        PairVectors::new(c.clone(), Some(r.clone()), r.clone()),
        PairVectors::new(c.clone(), Some(r.clone()), vec![-0.3, 0.2, -0.1, 0.0]),
    ];
    println!("ruber full over a batch {:?}", ruber_full(&batch, &ruber)?);

    let head = EvaluatorParams::init(Variant::EncHead, EvalConfig::UnreferencedOnly, 6, &opts)?;
    let d = [0.5, -1.0, 0.25, 2.0, 0.0, 1.5];
    println!("enc head score {:.6}", enc_head_score(&d, &head)?);

    println!("rescaled {:?}", min_max_rescale(&[0.2, 0.4, 0.9], 1.0, 5.0));
    Ok(())
}
