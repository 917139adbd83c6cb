mod common;

use std::collections::{HashMap, HashSet};
use std::io::Cursor;

use dialeval::corpus::{make_split, sample_negatives, Corpus, ResponseSource, Split, SplitRatios};
use dialeval::Error;

const RATIOS: SplitRatios = SplitRatios {
    train: 0.8,
    valid: 0.1,
    test: 0.1,
};

fn parse(text: &str) -> dialeval::Result<Corpus> {
    Corpus::from_reader(Cursor::new(text))
}

fn toy(n: usize) -> Corpus {
    let mut s = String::new();
    for d in 0..n {
        s.push_str(&format!(
            "{{\"type\":\"dialogue\",\"dialogue_id\":\"d{d}\",\"turns\":[{{\"speaker\":\"A\",\"text\":\"hello number {d}\"}}]}}\n"
        ));
        s.push_str(&format!(
            "{{\"type\":\"candidate\",\"pair_id\":\"p{d}\",\"dialogue_id\":\"d{d}\",\"source\":\"ground_truth\",\"model\":null,\"decoding\":null,\"text\":\"reply {d}!\"}}\n"
        ));
    }
    parse(&s).unwrap()
}

#[test]
fn minimal_corpus_loads() {
    let c = toy(1);
    assert_eq!(c.dialogues().len(), 1);
    assert_eq!(c.candidates().len(), 1);
    assert_eq!(c.candidates()[0].source, ResponseSource::GroundTruth);
    assert_eq!(c.candidates()[0].tokens, ["reply", "0", "!"]);
}

#[test]
fn dangling_dialogue_is_named() {
    let text = r#"{"type":"dialogue","dialogue_id":"d1","turns":[{"speaker":"A","text":"hi"}]}
{"type":"candidate","pair_id":"p1","dialogue_id":"d99","source":"ground_truth","model":null,"decoding":null,"text":"yo"}
"#;
    let err = parse(text).unwrap_err();
    assert!(err.to_string().contains("dangling dialogue_id d99"), "{err}");
}

#[test]
fn malformed_line_reports_its_number() {
    let text = "{\"type\":\"dialogue\",\"dialogue_id\":\"d1\",\"turns\":[{\"speaker\":\"A\",\"text\":\"hi\"}]}\n{not json\n";
    match parse(text).unwrap_err() {
        Error::Parse { line, .. } => assert_eq!(line, 2),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn duplicate_pair_id_is_rejected() {
    let text = r#"{"type":"dialogue","dialogue_id":"d1","turns":[{"speaker":"A","text":"hi"}]}
{"type":"candidate","pair_id":"p1","dialogue_id":"d1","source":"ground_truth","model":null,"decoding":null,"text":"yo"}
{"type":"candidate","pair_id":"p1","dialogue_id":"d1","source":"negative_sample","model":null,"decoding":null,"text":"no"}
"#;
    assert!(matches!(parse(text), Err(Error::DuplicateId(id)) if id == "p1"));
}

#[test]
fn bundled_sample_corpus_shape() {
    let c = Corpus::load(common::data_dir().join("corpus.jsonl")).unwrap();
    assert_eq!(c.dialogues().len(), 100);
    assert_eq!(c.candidates().len(), 2000);
    assert!(c.dialogues_without_ground_truth().is_empty());
}

#[test]
fn save_then_load_is_identical() {
    let c = Corpus::load(common::data_dir().join("corpus.jsonl")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    c.save(&p, Some("round trip")).unwrap();
    let back = Corpus::load(&p).unwrap();
    assert_eq!(back.dialogues(), c.dialogues());
    assert_eq!(back.candidates(), c.candidates());
}

#[test]
fn two_dialogues_swap_ground_truths() {
    let c = toy(2);
    let negs = sample_negatives(&c, 1, 0).unwrap();
    assert_eq!(negs.len(), 2);
    for n in &negs {
        let other = if n.candidate.dialogue_id == "d0" { "d1" } else { "d0" };
        assert_eq!(n.origin_dialogue_id, other);
        assert_eq!(n.candidate.text, c.ground_truth(other).unwrap().text);
    }
    assert_eq!(negs, sample_negatives(&c, 1, 0).unwrap());
}

#[test]
fn hundred_dialogues_no_self_pairs() {
    let c = toy(100);
    let negs = sample_negatives(&c, 1, 7).unwrap();
    assert_eq!(negs.len(), 100);
    let gts: HashMap<&str, &str> = c
        .candidates()
        .iter()
        .map(|g| (g.dialogue_id.as_str(), g.text.as_str()))
        .collect();
    for n in &negs {
        assert_ne!(n.origin_dialogue_id, n.candidate.dialogue_id);
        assert_eq!(gts[n.origin_dialogue_id.as_str()], n.candidate.text);
        assert_eq!(n.candidate.source, ResponseSource::NegativeSample);
    }
}

#[test]
fn no_self_pairs_over_a_seed_sweep() {
    let c = toy(5);
    for seed in 0..1000 {
        for n in sample_negatives(&c, 2, seed).unwrap() {
            assert_ne!(n.origin_dialogue_id, n.candidate.dialogue_id, "seed {seed}");
        }
    }
}

#[test]
fn single_dialogue_cannot_be_negative_sampled() {
    assert!(sample_negatives(&toy(1), 1, 0).is_err());
}

#[test]
fn resampling_a_grown_corpus_keeps_ids_unique() {
    let c = toy(4);
    let grown = c.with_candidates(sample_negatives(&c, 1, 0).unwrap().into_iter().map(|n| n.candidate)).unwrap();
    let more = sample_negatives(&grown, 1, 1).unwrap();
    let grown = grown.with_candidates(more.into_iter().map(|n| n.candidate)).unwrap();
    assert_eq!(grown.candidates().len(), 12);
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

fn sizes(n: usize) -> (usize, usize, usize) {
    let s = make_split(&ids(n), RATIOS, 3).unwrap();
    (s.len(Split::Train), s.len(Split::Valid), s.len(Split::Test))
}

#[test]
fn split_sizes() {
    assert_eq!(sizes(900), (720, 90, 90));
    assert_eq!(sizes(10), (8, 1, 1));
    assert_eq!(sizes(11), (9, 1, 1));
}

#[test]
fn split_is_a_partition() {
    let all = ids(97);
    let s = make_split(&all, RATIOS, 5).unwrap();
    let mut seen = HashSet::new();
    for part in [Split::Train, Split::Valid, Split::Test] {
        for id in s.ids(part) {
            assert!(seen.insert(id.to_string()));
        }
    }
    assert_eq!(seen.len(), all.len());
}

#[test]
fn split_rejects_empty_input_and_bad_ratios() {
    assert!(make_split(&[], RATIOS, 0).is_err());
    let bad = SplitRatios {
        train: 0.8,
        valid: 0.1,
        test: 0.2,
    };
    assert!(make_split(&ids(10), bad, 0).is_err());
}

#[test]
fn split_seeds_matter() {
    let all = ids(900);
    let base = make_split(&all, RATIOS, 0).unwrap();
    assert_eq!(base, make_split(&all, RATIOS, 0).unwrap());
    let differing = (1..=100).filter(|&s| make_split(&all, RATIOS, s).unwrap() != base).count();
    assert!(differing as f64 / 100.0 > 0.99);
}
