//! Dialogue corpora: contexts, response candidates, negative sampling and
//! train/valid/test splits.
//!
//! Corpus files are JSONL. Each non-empty line is either a dialogue
//!
//! ```text
//! {"type":"dialogue","dialogue_id":"d1","turns":[{"speaker":"A","text":"hi there"}]}
//! ```
//!
//! or a response candidate
//!
//! ```text
//! {"type":"candidate","pair_id":"p1","dialogue_id":"d1","source":"ground_truth","model":null,"decoding":null,"text":"hello"}
//! ```
//!
//! Lines starting with `#` are header comments and are skipped.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io_util;

/// Lowercase, split punctuation into separate tokens, then split on whitespace.
///
/// Any character that is neither alphanumeric nor whitespace counts as
/// punctuation and becomes a token of its own.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            tokens.push(ch.to_lowercase().collect());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub speaker_id: String,
    pub text: String,
    pub tokens: Vec<String>,
}

impl Utterance {
    pub fn new(speaker_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        Utterance {
            speaker_id: speaker_id.into(),
            tokens: tokenize(&text),
            text,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DialogueContext {
    pub dialogue_id: String,
    pub turns: Vec<Utterance>,
}

impl DialogueContext {
    /// All context tokens, turn by turn.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.turns
            .iter()
            .flat_map(|t| t.tokens.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoding {
    Greedy,
    Ancestral,
    Nucleus,
}

impl Decoding {
    pub fn as_str(self) -> &'static str {
        match self {
            Decoding::Greedy => "greedy",
            Decoding::Ancestral => "ancestral",
            Decoding::Nucleus => "nucleus",
        }
    }
}

impl FromStr for Decoding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Decoding::Greedy),
            "ancestral" => Ok(Decoding::Ancestral),
            "nucleus" => Ok(Decoding::Nucleus),
            other => Err(Error::invalid(format!("unknown decoding {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ResponseSource {
    GroundTruth,
    NegativeSample,
    Model { name: String, decoding: Decoding },
}

impl ResponseSource {
    pub fn is_ground_truth(&self) -> bool {
        matches!(self, ResponseSource::GroundTruth)
    }

    /// Short tag used in summaries: `ground_truth`, `negative_sample` or
    /// `model:<name>:<decoding>`.
    pub fn tag(&self) -> String {
        match self {
            ResponseSource::GroundTruth => "ground_truth".into(),
            ResponseSource::NegativeSample => "negative_sample".into(),
            ResponseSource::Model { name, decoding } => {
                format!("model:{name}:{}", decoding.as_str())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCandidate {
    pub pair_id: String,
    pub dialogue_id: String,
    pub source: ResponseSource,
    pub text: String,
    pub tokens: Vec<String>,
}

impl ResponseCandidate {
    pub fn new(
        pair_id: impl Into<String>,
        dialogue_id: impl Into<String>,
        source: ResponseSource,
        text: impl Into<String>,
    ) -> Self {
        let text = text.into();
        ResponseCandidate {
            pair_id: pair_id.into(),
            dialogue_id: dialogue_id.into(),
            source,
            tokens: tokenize(&text),
            text,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TurnLine {
    speaker: String,
    text: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Dialogue {
        dialogue_id: String,
        turns: Vec<TurnLine>,
    },
    Candidate {
        pair_id: String,
        dialogue_id: String,
        source: String,
        model: Option<String>,
        decoding: Option<String>,
        text: String,
    },
}

/// An immutable, indexed collection of dialogues and their candidates.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    dialogues: Vec<DialogueContext>,
    candidates: Vec<ResponseCandidate>,
    dialogue_index: HashMap<String, usize>,
    pair_index: HashMap<String, usize>,
    ground_truth: HashMap<String, usize>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.dialogues == other.dialogues && self.candidates == other.candidates
    }
}

impl Corpus {
    /// Build and validate a corpus from parts.
    pub fn new(dialogues: Vec<DialogueContext>, candidates: Vec<ResponseCandidate>) -> Result<Self> {
        let mut dialogue_index = HashMap::with_capacity(dialogues.len());
        for (i, d) in dialogues.iter().enumerate() {
            if d.turns.is_empty() {
                return Err(Error::invalid(format!(
                    "dialogue {} has no turns",
                    d.dialogue_id
                )));
            }
            if dialogue_index.insert(d.dialogue_id.clone(), i).is_some() {
                return Err(Error::DuplicateId(d.dialogue_id.clone()));
            }
        }
        let mut pair_index = HashMap::with_capacity(candidates.len());
        let mut ground_truth = HashMap::new();
        for (i, c) in candidates.iter().enumerate() {
            if !dialogue_index.contains_key(&c.dialogue_id) {
                return Err(Error::DanglingDialogue(c.dialogue_id.clone()));
            }
            if pair_index.insert(c.pair_id.clone(), i).is_some() {
                return Err(Error::DuplicateId(c.pair_id.clone()));
            }
            if c.source.is_ground_truth()
                && ground_truth.insert(c.dialogue_id.clone(), i).is_some()
            {
                return Err(Error::invalid(format!(
                    "dialogue {} has more than one ground_truth candidate",
                    c.dialogue_id
                )));
            }
        }
        Ok(Corpus {
            dialogues,
            candidates,
            dialogue_index,
            pair_index,
            ground_truth,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = io_util::open(path)?;
        Self::from_reader(reader).map_err(|e| io_util::with_path(e, path))
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut dialogues = Vec::new();
        let mut candidates = Vec::new();
        let mut first_seen: HashMap<String, usize> = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed: Line =
                serde_json::from_str(line).map_err(|e| Error::parse(lineno, e.to_string()))?;
            match parsed {
                Line::Dialogue { dialogue_id, turns } => {
                    if turns.is_empty() {
                        return Err(Error::parse(lineno, "dialogue has no turns"));
                    }
                    if first_seen.insert(dialogue_id.clone(), lineno).is_some() {
                        return Err(Error::DuplicateId(dialogue_id));
                    }
                    dialogues.push(DialogueContext {
                        dialogue_id,
                        turns: turns
                            .into_iter()
                            .map(|t| Utterance::new(t.speaker, t.text))
                            .collect(),
                    });
                }
                Line::Candidate {
                    pair_id,
                    dialogue_id,
                    source,
                    model,
                    decoding,
                    text,
                } => {
                    let source = parse_source(&source, model, decoding)
                        .map_err(|e| Error::parse(lineno, e.to_string()))?;
                    candidates.push(ResponseCandidate::new(pair_id, dialogue_id, source, text));
                }
            }
        }
        Corpus::new(dialogues, candidates)
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        for d in &self.dialogues {
            let line = Line::Dialogue {
                dialogue_id: d.dialogue_id.clone(),
                turns: d
                    .turns
                    .iter()
                    .map(|t| TurnLine {
                        speaker: t.speaker_id.clone(),
                        text: t.text.clone(),
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        for c in &self.candidates {
            let (source, model, decoding) = match &c.source {
                ResponseSource::GroundTruth => ("ground_truth", None, None),
                ResponseSource::NegativeSample => ("negative_sample", None, None),
                ResponseSource::Model { name, decoding } => {
                    ("model", Some(name.clone()), Some(decoding.as_str().to_string()))
                }
            };
            let line = Line::Candidate {
                pair_id: c.pair_id.clone(),
                dialogue_id: c.dialogue_id.clone(),
                source: source.to_string(),
                model,
                decoding,
                text: c.text.clone(),
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>, header: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        io_util::write_atomic(path, |w| {
            if let Some(h) = header {
                io_util::write_header(w, h)?;
            }
            self.write_to(w)
        })
    }

    pub fn dialogues(&self) -> &[DialogueContext] {
        &self.dialogues
    }

    pub fn candidates(&self) -> &[ResponseCandidate] {
        &self.candidates
    }

    pub fn dialogue(&self, id: &str) -> Option<&DialogueContext> {
        self.dialogue_index.get(id).map(|&i| &self.dialogues[i])
    }

    pub fn candidate(&self, pair_id: &str) -> Option<&ResponseCandidate> {
        self.pair_index.get(pair_id).map(|&i| &self.candidates[i])
    }

    /// The ground-truth response of a dialogue, if the corpus has one.
    pub fn ground_truth(&self, dialogue_id: &str) -> Option<&ResponseCandidate> {
        self.ground_truth
            .get(dialogue_id)
            .map(|&i| &self.candidates[i])
    }

    /// Dialogue ids lacking a ground-truth candidate.
    pub fn dialogues_without_ground_truth(&self) -> Vec<&str> {
        self.dialogues
            .iter()
            .filter(|d| !self.ground_truth.contains_key(&d.dialogue_id))
            .map(|d| d.dialogue_id.as_str())
            .collect()
    }

    /// A new corpus with `extra` candidates appended.
    pub fn with_candidates(&self, extra: impl IntoIterator<Item = ResponseCandidate>) -> Result<Self> {
        let mut candidates = self.candidates.clone();
        candidates.extend(extra);
        Corpus::new(self.dialogues.clone(), candidates)
    }

    /// Restrict to the given dialogues (and their candidates), preserving order.
    pub fn subset(&self, dialogue_ids: &HashSet<&str>) -> Result<Self> {
        let dialogues = self
            .dialogues
            .iter()
            .filter(|d| dialogue_ids.contains(d.dialogue_id.as_str()))
            .cloned()
            .collect();
        let candidates = self
            .candidates
            .iter()
            .filter(|c| dialogue_ids.contains(c.dialogue_id.as_str()))
            .cloned()
            .collect();
        Corpus::new(dialogues, candidates)
    }

    /// A copy where every ground-truth reference text is replaced.
    pub fn with_replaced_references(&self, mut replace: impl FnMut(&ResponseCandidate) -> String) -> Result<Self> {
        let candidates = self
            .candidates
            .iter()
            .map(|c| {
                if c.source.is_ground_truth() {
                    ResponseCandidate::new(
                        c.pair_id.clone(),
                        c.dialogue_id.clone(),
                        c.source.clone(),
                        replace(c),
                    )
                } else {
                    c.clone()
                }
            })
            .collect();
        Corpus::new(self.dialogues.clone(), candidates)
    }
}

fn parse_source(source: &str, model: Option<String>, decoding: Option<String>) -> Result<ResponseSource> {
    match source {
        "ground_truth" => Ok(ResponseSource::GroundTruth),
        "negative_sample" => Ok(ResponseSource::NegativeSample),
        "model" => {
            let name = model.ok_or_else(|| Error::invalid("model candidate without model name"))?;
            let decoding = decoding
                .ok_or_else(|| Error::invalid("model candidate without decoding"))?
                .parse()?;
            Ok(ResponseSource::Model { name, decoding })
        }
        other => Err(Error::invalid(format!("unknown source {other:?}"))),
    }
}

/// A negative response drawn from another dialogue's ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeSample {
    /// The new candidate, attached to the target dialogue.
    pub candidate: ResponseCandidate,
    /// Dialogue the text was taken from.
    pub origin_dialogue_id: String,
    /// Ground-truth pair the text was taken from.
    pub origin_pair_id: String,
}

/// Draw `k_per_dialogue` negatives for every dialogue, uniformly without
/// replacement from the ground-truth responses of all other dialogues.
pub fn sample_negatives(corpus: &Corpus, k_per_dialogue: usize, seed: u64) -> Result<Vec<NegativeSample>> {
    if corpus.dialogues.len() < 2 {
        return Err(Error::InsufficientData(
            "negative sampling needs at least 2 dialogues".into(),
        ));
    }
    // Donor list in dialogue order keeps the draw independent of hash order.
    let donors: Vec<&ResponseCandidate> = corpus
        .dialogues
        .iter()
        .filter_map(|d| corpus.ground_truth(&d.dialogue_id))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(corpus.dialogues.len() * k_per_dialogue);
    for d in &corpus.dialogues {
        let pool: Vec<&ResponseCandidate> = donors
            .iter()
            .copied()
            .filter(|c| c.dialogue_id != d.dialogue_id)
            .collect();
        if pool.len() < k_per_dialogue {
            return Err(Error::InsufficientData(format!(
                "dialogue {} needs {k_per_dialogue} negatives but only {} other ground truths exist",
                d.dialogue_id,
                pool.len()
            )));
        }
        let picks = rand::seq::index::sample(&mut rng, pool.len(), k_per_dialogue);
        // Number past negatives already stored under the same scheme.
        let id = |j: usize| format!("{}#ns{}", d.dialogue_id, j);
        let mut start = 0;
        while (start..start + k_per_dialogue).any(|j| corpus.candidate(&id(j)).is_some()) {
            start += 1;
        }
        for (j, idx) in picks.into_iter().enumerate() {
            let donor = pool[idx];
            let pair_id = id(start + j);
            out.push(NegativeSample {
                candidate: ResponseCandidate {
                    pair_id,
                    dialogue_id: d.dialogue_id.clone(),
                    source: ResponseSource::NegativeSample,
                    text: donor.text.clone(),
                    tokens: donor.tokens.clone(),
                },
                origin_dialogue_id: donor.dialogue_id.clone(),
                origin_pair_id: donor.pair_id.clone(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(Error::invalid(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            valid: 0.1,
            test: 0.1,
        }
    }
}

/// Exhaustive, disjoint assignment of pair ids to splits, in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAssignment {
    entries: Vec<(String, Split)>,
    index: HashMap<String, Split>,
}

impl SplitAssignment {
    pub fn from_entries(entries: Vec<(String, Split)>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (id, s) in &entries {
            if index.insert(id.clone(), *s).is_some() {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        Ok(SplitAssignment { entries, index })
    }

    pub fn get(&self, pair_id: &str) -> Option<Split> {
        self.index.get(pair_id).copied()
    }

    pub fn entries(&self) -> &[(String, Split)] {
        &self.entries
    }

    pub fn ids(&self, split: Split) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, s)| *s == split)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    pub fn len(&self, split: Split) -> usize {
        self.entries.iter().filter(|(_, s)| *s == split).count()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let rows = io_util::read_tsv(path, &["pair_id", "split"])?;
        let mut entries = Vec::with_capacity(rows.len());
        for (lineno, fields) in rows {
            let split = fields[1]
                .parse()
                .map_err(|e: Error| io_util::with_path(Error::parse(lineno, e.to_string()), path))?;
            entries.push((fields[0].clone(), split));
        }
        Self::from_entries(entries)
    }

    pub fn save(&self, path: impl AsRef<Path>, header: Option<&str>) -> Result<()> {
        io_util::write_atomic(path.as_ref(), |w| {
            if let Some(h) = header {
                io_util::write_header(w, h)?;
            }
            writeln!(w, "pair_id\tsplit")?;
            for (id, s) in &self.entries {
                writeln!(w, "{id}\t{s}")?;
            }
            Ok(())
        })
    }
}

/// Shuffle deterministically by `seed`, then cut into train/valid/test.
///
/// Valid and test sizes are `floor(n · ratio)`; the remainder goes to train.
pub fn make_split(pair_ids: &[String], ratios: SplitRatios, seed: u64) -> Result<SplitAssignment> {
    if pair_ids.is_empty() {
        return Err(Error::InsufficientData("cannot split an empty id list".into()));
    }
    let SplitRatios { train, valid, test } = ratios;
    if !(train > 0.0 && valid > 0.0 && test > 0.0) {
        return Err(Error::invalid("split ratios must be positive"));
    }
    if ((train + valid + test) - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("split ratios must sum to 1"));
    }
    let n = pair_ids.len();
    // Guard the floor against representation error such as 0.29 * 100 = 28.999...
    let n_valid = ((n as f64) * valid + 1e-9).floor() as usize;
    let n_test = ((n as f64) * test + 1e-9).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assigned = vec![Split::Train; n];
    for &i in &order[..n_valid] {
        assigned[i] = Split::Valid;
    }
    for &i in &order[n_valid..n_valid + n_test] {
        assigned[i] = Split::Test;
    }
    SplitAssignment::from_entries(pair_ids.iter().cloned().zip(assigned).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_dialogue_corpus() -> Corpus {
        let d = |id: &str, text: &str| DialogueContext {
            dialogue_id: id.into(),
            turns: vec![Utterance::new("A", text)],
        };
        Corpus::new(
            vec![d("A", "how are you?"), d("B", "where to?")],
            vec![
                ResponseCandidate::new("a0", "A", ResponseSource::GroundTruth, "fine thanks"),
                ResponseCandidate::new("b0", "B", ResponseSource::GroundTruth, "the station"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn tokenizer_splits_punctuation_and_lowercases() {
        assert_eq!(
            tokenize("Hello, World! It's 5pm."),
            vec!["hello", ",", "world", "!", "it", "'", "s", "5pm", "."]
        );
        assert!(tokenize("   ").is_empty());
        assert_eq!(tokenize("ÄBC"), vec!["äbc"]);
    }

    #[test]
    fn minimal_corpus_loads() {
        let text = r#"{"type":"dialogue","dialogue_id":"d1","turns":[{"speaker":"A","text":"Hi there"}]}
{"type":"candidate","pair_id":"p1","dialogue_id":"d1","source":"ground_truth","model":null,"decoding":null,"text":"Hello!"}
"#;
        let c = Corpus::from_reader(text.as_bytes()).unwrap();
        assert_eq!(c.dialogues().len(), 1);
        assert_eq!(c.candidates().len(), 1);
        assert_eq!(c.candidates()[0].source, ResponseSource::GroundTruth);
        assert_eq!(c.candidates()[0].tokens, vec!["hello", "!"]);
        assert_eq!(c.dialogues()[0].turns[0].tokens, vec!["hi", "there"]);
    }

    #[test]
    fn dangling_dialogue_is_named() {
        let text = r#"{"type":"dialogue","dialogue_id":"d1","turns":[{"speaker":"A","text":"x"}]}
{"type":"candidate","pair_id":"p1","dialogue_id":"d99","source":"ground_truth","model":null,"decoding":null,"text":"y"}
"#;
        let err = Corpus::from_reader(text.as_bytes()).unwrap_err();
        assert_eq!(err.to_string(), "dangling dialogue_id d99");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "{\"type\":\"dialogue\",\"dialogue_id\":\"d1\",\"turns\":[{\"speaker\":\"A\",\"text\":\"x\"}]}\n{not json\n";
        match Corpus::from_reader(text.as_bytes()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn duplicate_pair_id_rejected() {
        let text = r#"{"type":"dialogue","dialogue_id":"d1","turns":[{"speaker":"A","text":"x"}]}
{"type":"candidate","pair_id":"p1","dialogue_id":"d1","source":"ground_truth","model":null,"decoding":null,"text":"y"}
{"type":"candidate","pair_id":"p1","dialogue_id":"d1","source":"negative_sample","model":null,"decoding":null,"text":"z"}
"#;
        assert!(matches!(
            Corpus::from_reader(text.as_bytes()),
            Err(Error::DuplicateId(id)) if id == "p1"
        ));
    }

    #[test]
    fn model_source_needs_decoding() {
        let text = r#"{"type":"dialogue","dialogue_id":"d1","turns":[{"speaker":"A","text":"x"}]}
{"type":"candidate","pair_id":"p1","dialogue_id":"d1","source":"model","model":"hred","decoding":null,"text":"y"}
"#;
        assert!(matches!(
            Corpus::from_reader(text.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn two_dialogue_negatives_swap() {
        let c = two_dialogue_corpus();
        let neg = sample_negatives(&c, 1, 3).unwrap();
        assert_eq!(neg.len(), 2);
        assert_eq!(neg[0].candidate.dialogue_id, "A");
        assert_eq!(neg[0].candidate.text, "the station");
        assert_eq!(neg[0].origin_dialogue_id, "B");
        assert_eq!(neg[1].candidate.text, "fine thanks");
        assert_eq!(neg, sample_negatives(&c, 1, 3).unwrap());
    }

    #[test]
    fn negatives_need_two_dialogues() {
        let c = two_dialogue_corpus();
        let one: HashSet<&str> = ["A"].into_iter().collect();
        let single = c.subset(&one).unwrap();
        assert!(sample_negatives(&single, 1, 0).is_err());
        assert!(sample_negatives(&c, 2, 0).is_err());
    }

    #[test]
    fn split_sizes_floor_with_remainder_to_train() {
        let ids = |n: usize| (0..n).map(|i| format!("p{i}")).collect::<Vec<_>>();
        for (n, want) in [(900, (720, 90, 90)), (10, (8, 1, 1)), (11, (9, 1, 1))] {
            let s = make_split(&ids(n), SplitRatios::default(), 1).unwrap();
            assert_eq!(
                (s.len(Split::Train), s.len(Split::Valid), s.len(Split::Test)),
                want,
                "n = {n}"
            );
        }
    }

    #[test]
    fn split_rejects_bad_input() {
        assert!(make_split(&[], SplitRatios::default(), 0).is_err());
        let ids = vec!["a".to_string()];
        let bad = SplitRatios {
            train: 0.5,
            valid: 0.1,
            test: 0.1,
        };
        assert!(make_split(&ids, bad, 0).is_err());
    }
}
