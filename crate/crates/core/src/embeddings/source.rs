use crate::corpus::{Corpus, DialogueContext, ResponseCandidate};
use crate::error::Result;

use super::{encode_bag, EmbeddingTable, EncodingSet};

/// Id scheme shared by encoding files and the export tool.
pub mod ids {
    pub fn context(dialogue_id: &str) -> String {
        format!("ctx:{dialogue_id}")
    }

    pub fn reference(dialogue_id: &str) -> String {
        format!("ref:{dialogue_id}")
    }

    pub fn hypothesis(pair_id: &str) -> String {
        format!("hyp:{pair_id}")
    }

    /// Joint context-and-response input.
    pub fn joint(pair_id: &str) -> String {
        format!("pair:{pair_id}")
    }
}

/// Supplies the context, reference, hypothesis and joint vectors the scoring
/// heads consume. A lookup failure returns the id that could not be resolved.
pub trait VectorSource: Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn context(&self, dialogue: &DialogueContext) -> Result<Vec<f64>, String>;

    /// Vector of the dialogue's ground-truth reference response.
    fn reference(&self, dialogue: &DialogueContext, reference: &ResponseCandidate) -> Result<Vec<f64>, String>;

    fn hypothesis(&self, candidate: &ResponseCandidate) -> Result<Vec<f64>, String>;

    /// Encoding of the concatenated context and response.
    fn joint(&self, dialogue: &DialogueContext, candidate: &ResponseCandidate) -> Result<Vec<f64>, String>;

    /// Whether vectors can be produced for candidates that are not stored
    /// anywhere (needed for fresh negatives every epoch).
    fn encodes_arbitrary_text(&self) -> bool;
}

/// Built-in encoder: every text is the mean of its word embeddings.
#[derive(Debug, Clone)]
pub struct BagEncoder {
    table: EmbeddingTable,
}

impl BagEncoder {
    pub const NAME: &'static str = "bag_of_embeddings";

    pub fn new(table: EmbeddingTable) -> Self {
        BagEncoder { table }
    }

    pub fn table(&self) -> &EmbeddingTable {
        &self.table
    }

    /// Encode every id a corpus can require, in corpus order.
    pub fn encode_corpus(&self, corpus: &Corpus) -> Result<EncodingSet> {
        let mut set = EncodingSet::new(Self::NAME, self.table.dim());
        for d in corpus.dialogues() {
            set.insert(ids::context(&d.dialogue_id), self.encode_context(d))?;
            if let Some(gt) = corpus.ground_truth(&d.dialogue_id) {
                set.insert(ids::reference(&d.dialogue_id), self.encode_response(gt))?;
            }
        }
        for c in corpus.candidates() {
            let d = corpus.dialogue(&c.dialogue_id).expect("corpus is validated");
            set.insert(ids::hypothesis(&c.pair_id), self.encode_response(c))?;
            set.insert(ids::joint(&c.pair_id), self.encode_joint(d, c))?;
        }
        Ok(set)
    }

    fn encode_context(&self, d: &DialogueContext) -> Vec<f64> {
        encode_bag(&d.tokens().collect::<Vec<_>>(), &self.table).vector
    }

    fn encode_response(&self, c: &ResponseCandidate) -> Vec<f64> {
        encode_bag(&c.tokens, &self.table).vector
    }

    fn encode_joint(&self, d: &DialogueContext, c: &ResponseCandidate) -> Vec<f64> {
        let tokens: Vec<&str> = d
            .tokens()
            .chain(c.tokens.iter().map(String::as_str))
            .collect();
        encode_bag(&tokens, &self.table).vector
    }
}

impl VectorSource for BagEncoder {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn dim(&self) -> usize {
        self.table.dim()
    }

    fn context(&self, dialogue: &DialogueContext) -> Result<Vec<f64>, String> {
        Ok(self.encode_context(dialogue))
    }

    fn reference(&self, _dialogue: &DialogueContext, reference: &ResponseCandidate) -> Result<Vec<f64>, String> {
        Ok(self.encode_response(reference))
    }

    fn hypothesis(&self, candidate: &ResponseCandidate) -> Result<Vec<f64>, String> {
        Ok(self.encode_response(candidate))
    }

    fn joint(&self, dialogue: &DialogueContext, candidate: &ResponseCandidate) -> Result<Vec<f64>, String> {
        Ok(self.encode_joint(dialogue, candidate))
    }

    fn encodes_arbitrary_text(&self) -> bool {
        true
    }
}

impl EncodingSet {
    fn lookup(&self, id: String) -> Result<Vec<f64>, String> {
        self.get(&id).map(<[f64]>::to_vec).ok_or(id)
    }
}

impl VectorSource for EncodingSet {
    fn name(&self) -> &str {
        self.encoder()
    }

    fn dim(&self) -> usize {
        EncodingSet::dim(self)
    }

    fn context(&self, dialogue: &DialogueContext) -> Result<Vec<f64>, String> {
        self.lookup(ids::context(&dialogue.dialogue_id))
    }

    fn reference(&self, dialogue: &DialogueContext, _reference: &ResponseCandidate) -> Result<Vec<f64>, String> {
        self.lookup(ids::reference(&dialogue.dialogue_id))
    }

    fn hypothesis(&self, candidate: &ResponseCandidate) -> Result<Vec<f64>, String> {
        self.lookup(ids::hypothesis(&candidate.pair_id))
    }

    fn joint(&self, _dialogue: &DialogueContext, candidate: &ResponseCandidate) -> Result<Vec<f64>, String> {
        self.lookup(ids::joint(&candidate.pair_id))
    }

    fn encodes_arbitrary_text(&self) -> bool {
        false
    }
}
