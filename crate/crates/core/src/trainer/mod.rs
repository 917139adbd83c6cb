//! Mini-batch gradient descent for the scoring heads.
//!
//! Three regimes: unsupervised next-response ranking under a margin loss,
//! supervised regression onto human labels, and the two in sequence. The
//! learning rate drops by `lr_decay` whenever validation loss stalls for
//! `patience` epochs; training stops once it falls below `min_lr`.

mod backward;
mod data;
mod loss;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use backward::{
    backward, batch_loss, freeze_policy, supervised_prediction, trainable_scalars, Batch, Gradients, RankingExample,
    SupervisedExample, TrainableMask,
};
pub use data::{corpus_triples, dialogues_of, supervised_examples, FixedTriples, ResampledTriples, TripleSource};
pub use loss::{margin_rank_loss, mse_loss, MarginLoss};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::evaluators::{EvalConfig, EvaluatorParams, Variant};
use crate::io_util;

pub const DEFAULT_MARGIN: f64 = 0.5;
pub const DEFAULT_LR_DECAY: f64 = 0.1;
pub const DEFAULT_MIN_LR: f64 = 1e-7;
pub const DEFAULT_PATIENCE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Unsupervised,
    Supervised,
    SemiSupervised,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Unsupervised => "unsupervised",
            Mode::Supervised => "supervised",
            Mode::SemiSupervised => "semi_supervised",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unsupervised" | "unsup" => Ok(Mode::Unsupervised),
            "supervised" | "sup" => Ok(Mode::Supervised),
            "semi_supervised" | "semi-supervised" | "semi" => Ok(Mode::SemiSupervised),
            other => Err(Error::invalid(format!("unknown training mode {other:?}"))),
        }
    }
}

/// Hyper-parameters of one optimisation stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub lr_decay: f64,
    pub min_lr: f64,
    pub patience: usize,
}

impl StageConfig {
    pub fn new(lr: f64, batch_size: usize, max_epochs: usize) -> Self {
        StageConfig {
            lr,
            batch_size,
            max_epochs,
            lr_decay: DEFAULT_LR_DECAY,
            min_lr: DEFAULT_MIN_LR,
            patience: DEFAULT_PATIENCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid("lr must be positive"));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay < 1.0) {
            return Err(Error::invalid("lr_decay must lie in (0, 1)"));
        }
        if !(self.min_lr > 0.0) {
            return Err(Error::invalid("min_lr must be positive"));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::invalid("batch size, epochs and patience must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub mode: Mode,
    /// Used by unsupervised runs and the first semi-supervised stage.
    pub unsupervised: StageConfig,
    /// Used by supervised runs and the semi-supervised finetuning stage.
    pub supervised: StageConfig,
    pub margin: f64,
    pub seed: u64,
}

impl TrainConfig {
    /// Published optimisation settings per evaluator.
    pub fn defaults(variant: Variant, mode: Mode) -> Self {
        let (unsupervised, supervised) = match variant {
            Variant::Ruber => (StageConfig::new(1e-4, 30, 30), StageConfig::new(1e-4, 30, 50)),
            // No unsupervised ADEM setting is published; reuse the supervised rate.
            Variant::Adem => (StageConfig::new(1e-3, 30, 30), StageConfig::new(1e-3, 30, 50)),
            Variant::EncHead => (StageConfig::new(3e-6, 3, 2), StageConfig::new(3e-6, 3, 50)),
        };
        TrainConfig {
            mode,
            unsupervised,
            supervised,
            margin: DEFAULT_MARGIN,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(Error::invalid("margin must be positive"));
        }
        self.unsupervised.validate()?;
        self.supervised.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxEpochs,
    LrFloor,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::MaxEpochs => "max_epochs",
            StopReason::LrFloor => "lr_floor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: f64,
    /// Rate used during this epoch.
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageTrace {
    pub mode: Mode,
    pub epochs: Vec<EpochRecord>,
    pub stop_reason: StopReason,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainTrace {
    pub stages: Vec<StageTrace>,
}

impl TrainTrace {
    /// All epochs, numbered consecutively across stages.
    pub fn epochs(&self) -> Vec<EpochRecord> {
        let mut out = Vec::new();
        for s in &self.stages {
            for e in &s.epochs {
                out.push(EpochRecord {
                    epoch: out.len() + 1,
                    ..*e
                });
            }
        }
        out
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stages.last().map(|s| s.stop_reason)
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "epoch,train_loss,valid_loss,lr")?;
        for e in self.epochs() {
            writeln!(w, "{},{:.9e},{:.9e},{:.9e}", e.epoch, e.train_loss, e.valid_loss, e.lr)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        io_util::write_atomic(path.as_ref(), |w| self.write_csv(w))
    }
}

/// Training material. Validation sets may be empty, in which case the
/// training loss stands in for validation loss.
#[derive(Default)]
pub struct TrainData<'a> {
    pub triples: Option<Box<dyn TripleSource + 'a>>,
    pub valid_triples: Vec<RankingExample>,
    pub labeled: Option<Vec<SupervisedExample>>,
    pub valid_labeled: Vec<SupervisedExample>,
}

impl<'a> TrainData<'a> {
    pub fn unsupervised(triples: impl TripleSource + 'a, valid: Vec<RankingExample>) -> Self {
        TrainData {
            triples: Some(Box::new(triples)),
            valid_triples: valid,
            ..Default::default()
        }
    }

    pub fn supervised(labeled: Vec<SupervisedExample>, valid: Vec<SupervisedExample>) -> Self {
        TrainData {
            labeled: Some(labeled),
            valid_labeled: valid,
            ..Default::default()
        }
    }

    pub fn with_labels(mut self, labeled: Vec<SupervisedExample>, valid: Vec<SupervisedExample>) -> Self {
        self.labeled = Some(labeled);
        self.valid_labeled = valid;
        self
    }
}

fn apply_update(params: &mut EvaluatorParams, grads: &Gradients, mask: TrainableMask, lr: f64) {
    let gblocks = grads.blocks();
    for (name, values) in backward::param_blocks_mut(params) {
        if !mask.allows(&name) {
            continue;
        }
        if let Some((_, g)) = gblocks.iter().find(|(n, _)| *n == name) {
            for (p, d) in values.iter_mut().zip(g.iter()) {
                *p -= lr * d;
            }
        }
    }
}

enum Examples<'d> {
    Triples(&'d dyn TripleSource, &'d [RankingExample]),
    Labeled(&'d [SupervisedExample], &'d [SupervisedExample]),
}

fn run_stage(
    mut params: EvaluatorParams,
    examples: Examples<'_>,
    cfg: &StageConfig,
    mode: Mode,
    margin: f64,
    seed: u64,
    stage_tag: u64,
) -> Result<(EvaluatorParams, StageTrace)> {
    cfg.validate()?;
    let mask = freeze_policy(&params);
    if trainable_scalars(&params, mask) == 0 {
        return Err(Error::invalid(format!("{} has no trainable parameters", params.name())));
    }
    let mut lr = cfg.lr;
    let factor = 1.0 / cfg.lr_decay;
    let mut decays = 0i32;
    let mut best: Option<(f64, usize, EvaluatorParams)> = None;
    let mut stale = 0;
    let mut epochs = Vec::new();
    let mut stop_reason = StopReason::MaxEpochs;

    for epoch in 0..cfg.max_epochs {
        let epoch_triples;
        let (n, valid_loss_of): (usize, Box<dyn Fn(&EvaluatorParams) -> Result<f64> + '_>);
        let mut order;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[stage_tag, epoch as u64]));
        let mut train_total = 0.0;
        let mut batches = 0usize;
        match &examples {
            Examples::Triples(src, valid) => {
                epoch_triples = src.epoch(epoch, seed)?;
                n = epoch_triples.len();
                if n == 0 {
                    return Err(Error::InsufficientData("empty training set".into()));
                }
                order = (0..n).collect::<Vec<_>>();
                order.shuffle(&mut rng);
                for chunk in order.chunks(cfg.batch_size) {
                    let refs: Vec<&RankingExample> = chunk.iter().map(|&i| &epoch_triples[i]).collect();
                    let (l, g) = backward(&params, Batch::Margin { examples: &refs, margin })?;
                    apply_update(&mut params, &g, mask, lr);
                    train_total += l;
                    batches += 1;
                }
                let valid: &[RankingExample] = if valid.is_empty() { &epoch_triples } else { valid };
                valid_loss_of = Box::new(move |p| {
                    let refs: Vec<&RankingExample> = valid.iter().collect();
                    batch_loss(p, Batch::Margin { examples: &refs, margin })
                });
            }
            Examples::Labeled(train, valid) => {
                n = train.len();
                order = (0..n).collect::<Vec<_>>();
                order.shuffle(&mut rng);
                for chunk in order.chunks(cfg.batch_size) {
                    let refs: Vec<&SupervisedExample> = chunk.iter().map(|&i| &train[i]).collect();
                    let (l, g) = backward(&params, Batch::Mse(&refs))?;
                    apply_update(&mut params, &g, mask, lr);
                    train_total += l;
                    batches += 1;
                }
                let valid: &[SupervisedExample] = if valid.is_empty() { train } else { valid };
                valid_loss_of = Box::new(move |p| {
                    let refs: Vec<&SupervisedExample> = valid.iter().collect();
                    batch_loss(p, Batch::Mse(&refs))
                });
            }
        }
        let valid_loss = valid_loss_of(&params)?;
        if !valid_loss.is_finite() {
            return Err(Error::NonFinite(format!("validation loss at epoch {}", epoch + 1)));
        }
        epochs.push(EpochRecord {
            epoch: epoch + 1,
            train_loss: train_total / batches as f64,
            valid_loss,
            lr,
        });
        match &best {
            Some((b, _, _)) if valid_loss >= *b => stale += 1,
            _ => {
                best = Some((valid_loss, epoch + 1, params.clone()));
                stale = 0;
            }
        }
        if stale >= cfg.patience {
            stale = 0;
            decays += 1;
            lr = cfg.lr / factor.powi(decays);
            // Relative slack so an lr that lands on the floor up to rounding keeps going.
            if lr < cfg.min_lr * (1.0 - 1e-9) {
                stop_reason = StopReason::LrFloor;
                break;
            }
        }
    }
    let (_, best_epoch, best_params) = best.expect("at least one epoch ran");
    Ok((
        best_params,
        StageTrace {
            mode,
            epochs,
            stop_reason,
            best_epoch,
        },
    ))
}

/// Train from `params0`. Returns the parameters of the best-validation
/// epoch (of the last stage) and the per-epoch trace.
pub fn train(params0: &EvaluatorParams, data: &TrainData<'_>, config: &TrainConfig) -> Result<(EvaluatorParams, TrainTrace)> {
    config.validate()?;
    params0.validate()?;
    if params0.variant == Variant::Ruber && params0.config == EvalConfig::ReferencedOnly {
        return Err(Error::invalid("ruber referenced_only has no trainable parameters"));
    }
    let needs_triples = matches!(config.mode, Mode::Unsupervised | Mode::SemiSupervised);
    let needs_labels = matches!(config.mode, Mode::Supervised | Mode::SemiSupervised);
    if needs_labels {
        match &data.labeled {
            None => return Err(Error::MissingLabels),
            Some(l) if l.is_empty() => return Err(Error::InsufficientData("empty training set".into())),
            _ => {}
        }
    }
    if needs_triples && data.triples.is_none() {
        return Err(Error::InsufficientData(
            "unsupervised training needs (context, ground truth, negative) triples".into(),
        ));
    }
    let mut params = params0.clone();
    let mut trace = TrainTrace::default();
    if needs_triples {
        let src = data.triples.as_deref().expect("checked");
        let (p, t) = run_stage(
            params,
            Examples::Triples(src, &data.valid_triples),
            &config.unsupervised,
            Mode::Unsupervised,
            config.margin,
            config.seed,
            1,
        )?;
        params = p;
        trace.stages.push(t);
    }
    if needs_labels {
        let labeled = data.labeled.as_deref().expect("checked");
        let (p, t) = run_stage(
            params,
            Examples::Labeled(labeled, &data.valid_labeled),
            &config.supervised,
            Mode::Supervised,
            config.margin,
            config.seed,
            2,
        )?;
        params = p;
        trace.stages.push(t);
    }
    Ok((params, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluators::{InitOptions, PairVectors};

    fn enc_head(dim: usize) -> EvaluatorParams {
        EvaluatorParams::init(
            Variant::EncHead,
            EvalConfig::UnreferencedOnly,
            dim,
            &InitOptions {
                hidden_dims: vec![4],
                pca: None,
                seed: 3,
            },
        )
        .unwrap()
    }

    #[test]
    fn table_defaults() {
        let r = TrainConfig::defaults(Variant::Ruber, Mode::SemiSupervised);
        assert_eq!((r.unsupervised.lr, r.unsupervised.batch_size, r.unsupervised.max_epochs), (1e-4, 30, 30));
        assert_eq!((r.supervised.lr, r.supervised.max_epochs), (1e-4, 50));
        assert_eq!(TrainConfig::defaults(Variant::Adem, Mode::Supervised).supervised.lr, 1e-3);
        let e = TrainConfig::defaults(Variant::EncHead, Mode::Supervised);
        assert_eq!((e.supervised.lr, e.supervised.batch_size), (3e-6, 3));
        assert_eq!((r.unsupervised.lr_decay, r.unsupervised.min_lr, r.margin), (0.1, 1e-7, 0.5));
    }

    #[test]
    fn supervised_without_labels_fails() {
        let p = enc_head(2);
        let cfg = TrainConfig::defaults(Variant::EncHead, Mode::Supervised);
        let err = train(&p, &TrainData::default(), &cfg).unwrap_err();
        assert_eq!(err.category(), "missing-labels");
        let err = train(&p, &TrainData::supervised(vec![], vec![]), &cfg).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    #[test]
    fn plateau_decays_to_floor() {
        // A huge margin gap keeps the loss at exactly zero, so nothing improves.
        let p = enc_head(2);
        let ex = RankingExample {
            positive: PairVectors::joint_only(vec![1.0, 0.0]),
            negative: PairVectors::joint_only(vec![0.0, 1.0]),
        };
        let mut cfg = TrainConfig::defaults(Variant::EncHead, Mode::Unsupervised);
        cfg.margin = 1e-12;
        cfg.unsupervised = StageConfig::new(1e-4, 1, 100);
        let q = p.clone();
        let s_pos = crate::evaluators::head_output(&q, &ex.positive).unwrap();
        let s_neg = crate::evaluators::head_output(&q, &ex.negative).unwrap();
        let ex = if s_pos > s_neg {
            ex
        } else {
            RankingExample {
                positive: ex.negative,
                negative: ex.positive,
            }
        };
        let data = TrainData::unsupervised(FixedTriples(vec![ex]), vec![]);
        let (out, trace) = train(&p, &data, &cfg).unwrap();
        assert_eq!(out, p);
        let mut lrs: Vec<f64> = trace.epochs().iter().map(|e| e.lr).collect();
        lrs.dedup();
        assert_eq!(lrs, vec![1e-4, 1e-4 / 10.0, 1e-4 / 100.0, 1e-4 / 1000.0]);
        assert_eq!(trace.stop_reason(), Some(StopReason::LrFloor));
    }
}
