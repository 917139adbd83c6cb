mod common;

use common::{data_dir, logistic, naive_bilinear, naive_cosine, naive_mlp, oracle_head, rng, uniform_vec};
use dialeval::corpus::Corpus;
use dialeval::embeddings::{fit_pca, BagEncoder, EmbeddingTable};
use dialeval::evaluators::{
    adem_score, enc_head_score, head_output, load_checkpoint, min_max_rescale, ruber_combine, ruber_full,
    ruber_referenced, ruber_unreferenced, save_checkpoint, score_batch, score_corpus, EvalConfig, EvaluatorParams,
    InitOptions, PairVectors, Variant,
};
use dialeval::linalg::Matrix;
use rand::Rng;

fn init(variant: Variant, config: EvalConfig, dim: usize, seed: u64) -> EvaluatorParams {
    let opts = InitOptions {
        seed,
        ..Default::default()
    };
    EvaluatorParams::init(variant, config, dim, &opts).unwrap()
}

fn random_matrix(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> Matrix {
    Matrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0))
}

#[test]
fn adem_identity_and_zero_matrices() {
    let mut p = init(Variant::Adem, EvalConfig::Full, 3, 0);
    p.n = Some(Matrix::identity(3));
    let r = [1.0, 0.0, 0.0];
    let h = [1.0, 0.0, 0.0];
    let c = [0.3, -2.0, 5.0];
    // M starts at zero, so only the referenced part contributes.
    assert_eq!(adem_score(Some(&c), Some(&r), &h, &p).unwrap(), 1.0);
    p.n = Some(Matrix::zeros(3, 3));
    assert_eq!(adem_score(Some(&c), Some(&r), &h, &p).unwrap(), 0.0);
}

#[test]
fn adem_matches_naive_bilinear() {
    let mut r = rng(1);
    for _ in 0..100 {
        let mut p = init(Variant::Adem, EvalConfig::Full, 8, 0);
        let m = random_matrix(&mut r, 8);
        let n = random_matrix(&mut r, 8);
        let (c, rf, h) = (uniform_vec(&mut r, 8, 1.0), uniform_vec(&mut r, 8, 1.0), uniform_vec(&mut r, 8, 1.0));
        let want = naive_bilinear(&c, &m.to_rows(), &h) + naive_bilinear(&rf, &n.to_rows(), &h);
        p.m = Some(m);
        p.n = Some(n);
        let got = adem_score(Some(&c), Some(&rf), &h, &p).unwrap();
        assert!((got - want).abs() < 1e-12);
        let referenced = p.with_config(EvalConfig::ReferencedOnly).unwrap();
        assert!(adem_score(None, Some(&rf), &h, &referenced).is_ok());
        let unreferenced = p.with_config(EvalConfig::UnreferencedOnly).unwrap();
        assert!(adem_score(Some(&c), None, &h, &unreferenced).is_ok());
    }
}

#[test]
fn adem_with_projection_matches_oracle() {
    let mut r = rng(2);
    let pts: Vec<Vec<f64>> = (0..80).map(|_| uniform_vec(&mut r, 12, 1.0)).collect();
    let opts = InitOptions {
        pca: Some(fit_pca(&pts, 4).unwrap()),
        ..Default::default()
    };
    let mut p = EvaluatorParams::init(Variant::Adem, EvalConfig::Full, 12, &opts).unwrap();
    assert_eq!(p.bilinear_dim(), 4);
    p.m = Some(random_matrix(&mut r, 4));
    p.n = Some(random_matrix(&mut r, 4));
    for _ in 0..20 {
        let x = PairVectors::new(uniform_vec(&mut r, 12, 1.0), Some(uniform_vec(&mut r, 12, 1.0)), uniform_vec(&mut r, 12, 1.0));
        assert!((head_output(&p, &x).unwrap() - oracle_head(&p, &x)).abs() < 1e-10);
    }
}

#[test]
fn cosine_reference_part() {
    let got = ruber_referenced(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
    assert!((got - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    let mut r = rng(3);
    for _ in 0..100 {
        let a = uniform_vec(&mut r, 10, 1.0);
        let b = uniform_vec(&mut r, 10, 1.0);
        let k = r.random_range(0.01..100.0);
        let scaled: Vec<f64> = b.iter().map(|x| x * k).collect();
        let base = ruber_referenced(&a, &b).unwrap();
        assert!((base - naive_cosine(&a, &b)).abs() < 1e-12);
        assert!((base - ruber_referenced(&a, &scaled).unwrap()).abs() < 1e-12);
    }
    assert!(ruber_referenced(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    assert!(ruber_referenced(&[1.0], &[1.0, 0.0]).is_err());
}

#[test]
fn zeroed_mlp_gives_one_half() {
    let mut p = init(Variant::Ruber, EvalConfig::UnreferencedOnly, 4, 0);
    for l in &mut p.mlp.as_mut().unwrap().layers {
        l.weights.as_mut_slice().iter_mut().for_each(|w| *w = 0.0);
        l.bias.iter_mut().for_each(|b| *b = 0.0);
    }
    assert_eq!(ruber_unreferenced(&[1.0; 4], &[2.0; 4], &p).unwrap(), 0.5);
}

#[test]
fn unreferenced_forward_matches_oracle() {
    let mut r = rng(4);
    for seed in 0..20 {
        let mut p = init(Variant::Ruber, EvalConfig::UnreferencedOnly, 6, seed);
        p.m = Some(random_matrix(&mut r, 6));
        let c = uniform_vec(&mut r, 6, 1.0);
        let h = uniform_vec(&mut r, 6, 1.0);
        let x = PairVectors::new(c.clone(), None, h.clone());
        let got = ruber_unreferenced(&c, &h, &p).unwrap();
        assert!((got - oracle_head(&p, &x)).abs() < 1e-12);
        assert!(got > 0.0 && got < 1.0);
    }
}

#[test]
fn one_layer_head_is_a_logistic_regression() {
    let opts = InitOptions {
        hidden_dims: vec![],
        seed: 9,
        ..Default::default()
    };
    let p = EvaluatorParams::init(Variant::EncHead, EvalConfig::UnreferencedOnly, 5, &opts).unwrap();
    let layer = &p.mlp.as_ref().unwrap().layers[0];
    let x = [0.1, -0.2, 0.3, 0.4, -0.5];
    let z: f64 = layer.weights.row(0).iter().zip(&x).map(|(w, v)| w * v).sum::<f64>() + layer.bias[0];
    assert!((enc_head_score(&x, &p).unwrap() - (4.0 * logistic(z) + 1.0)).abs() < 1e-12);
    assert!((naive_mlp(&p, &x) - logistic(z)).abs() < 1e-15);
}

#[test]
fn full_ruber_by_hand() {
    assert_eq!(ruber_combine(&[0.0, 1.0, 0.5], &[0.2, 0.6, 1.0]).unwrap(), [0.0, 0.75, 0.75]);
    assert_eq!(ruber_combine(&[0.3, 0.3], &[0.1, 0.9]).unwrap(), [0.25, 0.75]);
    assert!(ruber_combine(&[0.3], &[0.1]).is_err());

    let mut r = rng(5);
    let p = init(Variant::Ruber, EvalConfig::Full, 4, 1);
    let batch: Vec<PairVectors> = (0..6)
        .map(|_| PairVectors::new(uniform_vec(&mut r, 4, 1.0), Some(uniform_vec(&mut r, 4, 1.0)), uniform_vec(&mut r, 4, 1.0)))
        .collect();
    let refd: Vec<f64> = batch.iter().map(|b| naive_cosine(b.reference.as_ref().unwrap(), b.hypothesis.as_ref().unwrap())).collect();
    let unref: Vec<f64> = batch.iter().map(|b| oracle_head(&p, b)).collect();
    let norm = |v: &[f64]| -> Vec<f64> {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        v.iter().map(|x| (x - lo) / (hi - lo)).collect()
    };
    let (a, b) = (norm(&refd), norm(&unref));
    for (got, (x, y)) in ruber_full(&batch, &p).unwrap().iter().zip(a.iter().zip(&b)) {
        assert!((got - (x + y) / 2.0).abs() < 1e-12);
    }
}

#[test]
fn rescaling_and_enc_range() {
    assert_eq!(min_max_rescale(&[2.0, 4.0, 3.0], 1.0, 5.0), [1.0, 5.0, 3.0]);
    assert_eq!(min_max_rescale(&[7.0, 7.0], 1.0, 5.0), [3.0, 3.0]);
    let mut r = rng(6);
    let p = init(Variant::EncHead, EvalConfig::UnreferencedOnly, 8, 3);
    for _ in 0..1000 {
        let s = enc_head_score(&uniform_vec(&mut r, 8, 50.0), &p).unwrap();
        assert!((1.0..=5.0).contains(&s));
    }
    assert!(enc_head_score(&[0.0; 3], &p).is_err());
}

#[test]
fn adem_and_ruber_batches_span_one_to_five() {
    let mut r = rng(7);
    for (variant, config) in [(Variant::Adem, EvalConfig::Full), (Variant::Ruber, EvalConfig::Full), (Variant::Ruber, EvalConfig::UnreferencedOnly)] {
        let mut p = init(variant, config, 5, 2);
        if variant == Variant::Adem {
            p.m = Some(random_matrix(&mut r, 5));
            p.n = Some(random_matrix(&mut r, 5));
        }
        let inputs: Vec<PairVectors> = (0..30)
            .map(|_| PairVectors::new(uniform_vec(&mut r, 5, 1.0), Some(uniform_vec(&mut r, 5, 1.0)), uniform_vec(&mut r, 5, 1.0)))
            .collect();
        let ids: Vec<String> = (0..30).map(|i| format!("p{i}")).collect();
        let out = score_batch(&ids, &inputs, &p).unwrap();
        let lo = out.iter().map(|s| s.scaled).fold(f64::INFINITY, f64::min);
        let hi = out.iter().map(|s| s.scaled).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((lo, hi), (1.0, 5.0), "{variant} {config}");
    }
}

fn bundled() -> (Corpus, BagEncoder) {
    let corpus = Corpus::load(data_dir().join("corpus.jsonl")).unwrap();
    let table = EmbeddingTable::load(data_dir().join("embeddings.txt")).unwrap();
    (corpus, BagEncoder::new(table))
}

#[test]
fn unreferenced_scores_ignore_the_reference() {
    let (corpus, enc) = bundled();
    // Out-of-vocabulary words would leave bag encodings unchanged, so borrow
    // in-vocabulary text from another candidate.
    let filler = corpus.candidates()[7].text.clone();
    let swapped = corpus.with_replaced_references(|_| filler.clone()).unwrap();
    for (variant, dim) in [(Variant::Ruber, enc.table().dim()), (Variant::Adem, enc.table().dim())] {
        let mut p = init(variant, EvalConfig::UnreferencedOnly, dim, 4);
        if variant == Variant::Adem {
            let mut r = rng(8);
            p.m = Some(random_matrix(&mut r, dim));
        }
        let a = score_corpus(&corpus, &enc, &p).unwrap();
        let b = score_corpus(&swapped, &enc, &p).unwrap();
        assert_eq!(a.len(), 2000);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.pair_id, y.pair_id);
            if !x.pair_id.ends_with("-gt") {
                assert_eq!(x.raw.to_bits(), y.raw.to_bits(), "{}", x.pair_id);
            }
        }
    }
    // Referenced configurations do move.
    let p = init(Variant::Ruber, EvalConfig::ReferencedOnly, enc.table().dim(), 4);
    let a = score_corpus(&corpus, &enc, &p).unwrap();
    let b = score_corpus(&swapped, &enc, &p).unwrap();
    assert!(a.iter().zip(&b).any(|(x, y)| x.raw != y.raw));
}

#[test]
fn checkpoint_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(9);
    for (variant, config) in [(Variant::Adem, EvalConfig::Full), (Variant::Ruber, EvalConfig::Full), (Variant::EncHead, EvalConfig::UnreferencedOnly)] {
        let mut p = init(variant, config, 6, 5);
        if variant == Variant::Adem {
            p.m = Some(random_matrix(&mut r, 6));
            p.n = Some(random_matrix(&mut r, 6));
        }
        let path = dir.path().join(format!("{variant}.json"));
        save_checkpoint(&p, &path, Some(serde_json::json!({"seed": 5}))).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!((back.variant, back.config, back.input_dim), (p.variant, p.config, p.input_dim));
        let x = PairVectors {
            joint: Some(uniform_vec(&mut r, 6, 1.0)),
            ..PairVectors::new(uniform_vec(&mut r, 6, 1.0), Some(uniform_vec(&mut r, 6, 1.0)), uniform_vec(&mut r, 6, 1.0))
        };
        let (a, b) = (head_output(&p, &x).unwrap(), head_output(&back, &x).unwrap());
        assert!((a - b).abs() <= 1e-7 * a.abs().max(1e-3), "{variant}: {a} vs {b}");
        // A second save of the reloaded parameters is byte-identical.
        let again = dir.path().join(format!("{variant}-2.json"));
        save_checkpoint(&back, &again, Some(serde_json::json!({"seed": 5}))).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }
    std::fs::write(dir.path().join("bad.json"), "{\"variant\": \"adem\"}").unwrap();
    assert!(load_checkpoint(dir.path().join("bad.json")).is_err());
}
