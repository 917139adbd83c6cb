//! The `dialeval` command line.
//!
//! Every output file starts with `#` comment lines naming the tool version,
//! the effective command line and the parsed flag set. Failures print one
//! line `error:<category>:<detail>` on stderr and exit with 1 (domain
//! errors) or 2 (usage errors).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Debug;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    basic_report, dimension_sensitivity, discretize_scores, fit_model, gt_excluded_report, histogram, load_score_table,
    report_csv, report_table, run_study, Domain, Encoder, HistogramBin, ModelSpec, ReportRow, StudySpec,
};
use crate::annotation::{aggregate, AgreementStat, label_map, load_annotations, load_labels, save_labels, Dimension};
use crate::corpus::{make_split, sample_negatives, Corpus, Split, SplitAssignment, SplitRatios};
use crate::embeddings::{BagEncoder, EmbeddingTable};
use crate::error::{Error, Result};
use crate::evaluators::{gather_inputs, load_checkpoint, save_checkpoint, save_scores, score_batch, EvalConfig, Variant};
use crate::io_util;
use crate::metrics::{run_metrics, save_metric_scores, MetricName};
use crate::trainer::{Mode, DEFAULT_MARGIN};
use crate::VERSION;

#[derive(Debug, Parser)]
#[command(name = "dialeval", version, about = "Dialogue response evaluation toolkit")]
pub struct Cli {
    /// JSON object of default flag values for the subcommand; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config_file: Option<PathBuf>,
    /// Add a wall-clock timestamp to output headers.
    #[arg(long, global = true)]
    pub stamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus (and optionally ratings) and write it back normalised.
    Ingest(IngestArgs),
    /// Append negative-sample candidates drawn from other dialogues.
    Negatives(NegativesArgs),
    /// Filter ratings with MAD, average them, report agreement, split pairs.
    Aggregate(AggregateArgs),
    /// Encode a corpus with averaged word vectors.
    Encode(EncodeArgs),
    /// Word-overlap and embedding metrics.
    #[command(subcommand)]
    Metric(MetricCommand),
    /// Train an evaluator and write a checkpoint.
    Train(TrainArgs),
    /// Score corpus candidates with a checkpoint.
    Score(ScoreArgs),
    /// Correlation reports and studies.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Ratings file whose pair ids must all resolve in the corpus.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NegativesArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = crate::annotation::DEFAULT_MAD_THRESHOLD)]
    pub threshold: f64,
    /// Also write a train/valid/test split of the labelled pairs.
    #[arg(long)]
    pub split_out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.1, 0.1])]
    pub ratios: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-dimension agreement before and after filtering, as CSV.
    #[arg(long)]
    pub agreement_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// GloVe-style word vectors.
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum MetricCommand {
    Run(MetricArgs),
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Needed by the embedding metrics.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = ["bleu2".to_string(), "average".into(), "extrema".into(), "greedy".into()])]
    pub metrics: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Precomputed encodings (JSONL).
    #[arg(long, conflicts_with = "embeddings")]
    pub encodings: Option<PathBuf>,
    /// Word vectors for the built-in averaging encoder.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value = "semi_supervised")]
    pub mode: String,
    #[arg(long, default_value = "ruber")]
    pub variant: String,
    /// full, ref or unref.
    #[arg(long, default_value = "unref")]
    pub config: String,
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Aggregated labels; with --split the train and valid splits are used.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub split: Option<PathBuf>,
    /// Training labels file (overrides --labels).
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Validation labels file.
    #[arg(long)]
    pub valid: Option<PathBuf>,
    /// Learning rate of the supervised stage (of the only stage when unsupervised).
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// First-stage settings of a semi-supervised run.
    #[arg(long)]
    pub unsup_lr: Option<f64>,
    #[arg(long)]
    pub unsup_batch: Option<usize>,
    #[arg(long)]
    pub unsup_epochs: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// ADEM projection size; 0 disables it.
    #[arg(long)]
    pub pca: Option<usize>,
    /// Negatives per dialogue for unsupervised training.
    #[arg(long, default_value_t = 1)]
    pub negatives: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch loss trace (CSV).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Score with a different configuration of the same checkpoint.
    #[arg(long)]
    pub config: Option<String>,
    /// Restrict to one part of a split file.
    #[arg(long, requires = "subset")]
    pub split: Option<PathBuf>,
    #[arg(long, requires = "split")]
    pub subset: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ReportCommand {
    /// Correlation of each evaluator in a score file with labels.
    Basic(ReportArgs),
    /// The basic report with and without ground-truth responses.
    GtExcluded(GtArgs),
    /// Score distributions over [1, 5].
    Histogram(HistogramArgs),
    /// Round scores onto {1..5}; with labels, compare correlations.
    Discretize(DiscretizeArgs),
    /// Correlation with labels of each quality dimension.
    Dimensions(DimensionsArgs),
    /// Run a JSON study description.
    Study(StudyArgs),
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value = "appropriateness")]
    pub dimension: String,
    /// CSV output; the text table always goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GtArgs {
    #[command(flatten)]
    pub report: ReportArgs,
    #[arg(long)]
    pub corpus: PathBuf,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[arg(long)]
    pub scores: PathBuf,
    /// Also histogram these human labels.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub bins: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiscretizeArgs {
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Discretised scores (TSV `pair_id evaluator value`).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DimensionsArgs {
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// CSV output; a `.txt` table is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Ctx<'a> {
    header: String,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn say(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.stdout, "{}", s.as_ref());
    }

    fn warn(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.stderr, "warning: {}", s.as_ref());
    }

    fn header(&self) -> Option<&str> {
        Some(&self.header)
    }

    fn write_text(&self, path: &Path, body: &str) -> Result<()> {
        io_util::write_atomic(path, |w| {
            io_util::write_header(w, &self.header)?;
            w.write_all(body.as_bytes())
        })
    }
}

fn header_for(argv: &[String], flags: &impl Debug, seed: Option<u64>, stamp: bool) -> String {
    let mut h = format!("dialeval {VERSION}\ncommand: {}\nflags: {flags:?}", argv.join(" "));
    match seed {
        Some(s) => h.push_str(&format!("\nseed: {s}")),
        None => h.push_str("\nseed: none"),
    }
    if stamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        h.push_str(&format!("\ntimestamp: {secs}"));
    }
    h
}

/// Append flags from the `--config-file` JSON object that argv does not
/// already set.
fn merge_config_file(mut argv: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config-file" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config-file=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let path = PathBuf::from(path);
    let value: serde_json::Value = serde_json::from_reader(io_util::open(&path)?)
        .map_err(|e| io_util::with_path(Error::parse(e.line(), e.to_string()), &path))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::invalid("config file must hold a JSON object"))?;
    for (key, v) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        let explicit = argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if explicit {
            continue;
        }
        let scalar = |v: &serde_json::Value| match v {
            serde_json::Value::String(s) => Ok(s.clone()),
            serde_json::Value::Number(n) => Ok(n.to_string()),
            other => Err(Error::invalid(format!("config value for {key} is not a scalar: {other}"))),
        };
        match v {
            serde_json::Value::Bool(true) => argv.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
                argv.push(flag);
                argv.push(parts.join(","));
            }
            other => {
                argv.push(flag);
                argv.push(scalar(other)?);
            }
        }
    }
    Ok(argv)
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let argv = match merge_config_file(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error:{}:{}", e.category(), e);
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = write!(stderr, "{e}");
                return 2;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(stderr, "error:usage:{first}");
            return 2;
        }
    };
    let shown: Vec<String> = argv.iter().skip(1).cloned().collect();
    let (flags, seed): (&dyn Debug, Option<u64>) = match &cli.command {
        Command::Ingest(a) => (a, None),
        Command::Negatives(a) => (a, Some(a.seed)),
        Command::Aggregate(a) => (a, Some(a.seed)),
        Command::Encode(a) => (a, None),
        Command::Metric(a) => (a, None),
        Command::Train(a) => (a, Some(a.seed)),
        Command::Score(a) => (a, None),
        Command::Report(a) => (a, None),
    };
    let mut ctx = Ctx {
        header: header_for(&shown, &flags, seed, cli.stamp),
        stdout,
        stderr,
    };
    match dispatch(&cli.command, &mut ctx) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(ctx.stderr, "error:{}:{}", e.category(), e);
            1
        }
    }
}

fn dispatch(cmd: &Command, ctx: &mut Ctx<'_>) -> Result<()> {
    match cmd {
        Command::Ingest(a) => ingest(a, ctx),
        Command::Negatives(a) => negatives(a, ctx),
        Command::Aggregate(a) => aggregate_cmd(a, ctx),
        Command::Encode(a) => encode(a, ctx),
        Command::Metric(MetricCommand::Run(a)) => metric_run(a, ctx),
        Command::Train(a) => train_cmd(a, ctx),
        Command::Score(a) => score_cmd(a, ctx),
        Command::Report(r) => match r {
            ReportCommand::Basic(a) => report_basic(a, ctx),
            ReportCommand::GtExcluded(a) => report_gt(a, ctx),
            ReportCommand::Histogram(a) => report_histogram(a, ctx),
            ReportCommand::Discretize(a) => report_discretize(a, ctx),
            ReportCommand::Dimensions(a) => report_dimensions(a, ctx),
            ReportCommand::Study(a) => report_study(a, ctx),
        },
    }
}

fn ingest(a: &IngestArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let corpus = Corpus::load(&a.corpus)?;
    let mut by_source: BTreeMap<String, usize> = BTreeMap::new();
    for c in corpus.candidates() {
        *by_source.entry(c.source.tag()).or_default() += 1;
    }
    ctx.say(format!(
        "dialogues {}  candidates {}",
        corpus.dialogues().len(),
        corpus.candidates().len()
    ));
    for (tag, n) in &by_source {
        ctx.say(format!("  {tag:<32} {n}"));
    }
    let missing_gt = corpus.dialogues_without_ground_truth();
    if !missing_gt.is_empty() {
        ctx.warn(format!("{} dialogues have no ground truth", missing_gt.len()));
    }
    if let Some(p) = &a.annotations {
        let recs = load_annotations(p)?;
        let mut missing: Vec<String> = recs
            .iter()
            .filter(|r| corpus.candidate(&r.pair_id).is_none())
            .map(|r| r.pair_id.clone())
            .collect();
        missing.dedup();
        if !missing.is_empty() {
            return Err(Error::UnresolvedIds(missing));
        }
        ctx.say(format!("ratings {} (all pair ids resolve)", recs.len()));
    }
    if let Some(out) = &a.out {
        corpus.save(out, ctx.header())?;
    }
    Ok(())
}

fn negatives(a: &NegativesArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let corpus = Corpus::load(&a.corpus)?;
    let negs = sample_negatives(&corpus, a.k, a.seed)?;
    let n = negs.len();
    let out = corpus.with_candidates(negs.into_iter().map(|n| n.candidate))?;
    out.save(&a.out, ctx.header())?;
    ctx.say(format!("added {n} negative samples"));
    Ok(())
}

fn aggregate_cmd(a: &AggregateArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let recs = load_annotations(&a.annotations)?;
    let agg = aggregate(&recs, a.threshold)?;
    save_labels(&agg.labels, &a.out, ctx.header())?;
    let fmt = |x: &Option<AgreementStat>| x.as_ref().map(|v| format!("{:.3}", v.alpha)).unwrap_or_else(|| "n/a".into());
    let interp = |x: &Option<AgreementStat>| {
        x.as_ref()
            .map(|v| v.interpretation.as_str().to_string())
            .unwrap_or_else(|| "n/a".into())
    };
    let mut csv = String::from("dimension,alpha_before,alpha_after,interpretation_after,removed,total\n");
    let mut body = Vec::new();
    for d in &agg.agreement {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            d.dimension,
            d.before.as_ref().map(|v| format!("{:.6}", v.alpha)).unwrap_or_default(),
            d.after.as_ref().map(|v| format!("{:.6}", v.alpha)).unwrap_or_default(),
            interp(&d.after),
            d.removed,
            d.total
        ));
        body.push([
            d.dimension.to_string(),
            fmt(&d.before),
            fmt(&d.after),
            interp(&d.after),
            format!("{}/{}", d.removed, d.total),
        ]);
    }
    ctx.say(crate::analysis::aligned(
        &["dimension", "alpha_before", "alpha_after", "agreement", "removed"],
        &body,
    ));
    if let Some(p) = &a.agreement_out {
        ctx.write_text(p, &csv)?;
    }
    if let Some(p) = &a.split_out {
        let [train, valid, test] = a.ratios[..] else {
            return Err(Error::invalid("--ratios takes three values"));
        };
        let mut ids: Vec<String> = agg.labels.iter().map(|l| l.pair_id.clone()).collect();
        ids.dedup();
        let split = make_split(&ids, SplitRatios { train, valid, test }, a.seed)?;
        split.save(p, ctx.header())?;
        ctx.say(format!(
            "split train {} / valid {} / test {}",
            split.len(Split::Train),
            split.len(Split::Valid),
            split.len(Split::Test)
        ));
    }
    Ok(())
}

fn encode(a: &EncodeArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let corpus = Corpus::load(&a.corpus)?;
    let encoder = BagEncoder::new(EmbeddingTable::load(&a.embeddings)?);
    let set = encoder.encode_corpus(&corpus)?;
    for w in set.warnings().iter().take(5) {
        ctx.warn(w);
    }
    if set.warnings().len() > 5 {
        ctx.warn(format!("{} more zero-vector encodings", set.warnings().len() - 5));
    }
    set.save(&a.out, ctx.header())?;
    ctx.say(format!("wrote {} encodings of dim {}", set.len(), set.dim()));
    Ok(())
}

fn metric_run(a: &MetricArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let corpus = Corpus::load(&a.corpus)?;
    let table = a.embeddings.as_ref().map(EmbeddingTable::load).transpose()?;
    let metrics: Vec<MetricName> = a.metrics.iter().map(|m| m.parse()).collect::<Result<_>>()?;
    let run = run_metrics(&corpus, table.as_ref(), &metrics);
    for (id, m, why) in run.skipped.iter().take(5) {
        ctx.warn(format!("skipped {id} {m}: {why}"));
    }
    if run.skipped.len() > 5 {
        ctx.warn(format!("{} more skipped", run.skipped.len() - 5));
    }
    save_metric_scores(&run.scores, &a.out, ctx.header())?;
    ctx.say(format!("wrote {} metric values", run.scores.len()));
    Ok(())
}

fn appropriateness(path: &Path) -> Result<BTreeMap<String, f64>> {
    Ok(label_map(&load_labels(path)?, Dimension::Appropriateness))
}

fn train_cmd(a: &TrainArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let variant: Variant = a.variant.parse()?;
    let config: EvalConfig = a.config.parse()?;
    let mode: Mode = a.mode.parse()?;
    let corpus = Corpus::load(&a.corpus)?;
    let encoder = Encoder::load(a.source.encodings.as_deref(), a.source.embeddings.as_deref())?;

    let mut spec = ModelSpec::new(variant, config, mode);
    if let Some(h) = &a.hidden {
        spec.hidden_dims = h.clone();
    }
    if let Some(k) = a.pca {
        spec.pca_components = (k > 0).then_some(k);
    }
    spec.negatives_per_dialogue = a.negatives;
    spec.train.margin = a.margin;
    spec.train.seed = a.seed;
    let main = if mode == Mode::Unsupervised {
        &mut spec.train.unsupervised
    } else {
        &mut spec.train.supervised
    };
    main.lr = a.lr.unwrap_or(main.lr);
    main.batch_size = a.batch.unwrap_or(main.batch_size);
    main.max_epochs = a.epochs.unwrap_or(main.max_epochs);
    if mode == Mode::SemiSupervised {
        let s = &mut spec.train.unsupervised;
        s.lr = a.unsup_lr.unwrap_or(s.lr);
        s.batch_size = a.unsup_batch.unwrap_or(s.batch_size);
        s.max_epochs = a.unsup_epochs.unwrap_or(s.max_epochs);
    }
    if let Some(p) = a.patience {
        spec.train.unsupervised.patience = p;
        spec.train.supervised.patience = p;
    }

    let (labels, train_ids, valid_ids) = if let Some(t) = &a.train {
        let train = appropriateness(t)?;
        let valid = a.valid.as_deref().map(appropriateness).transpose()?.unwrap_or_default();
        let train_ids: Vec<String> = train.keys().cloned().collect();
        let valid_ids: Vec<String> = valid.keys().cloned().collect();
        let mut all = train;
        all.extend(valid);
        (all, train_ids, valid_ids)
    } else if let Some(l) = &a.labels {
        let labels = appropriateness(l)?;
        match &a.split {
            Some(s) => {
                let split = SplitAssignment::load(s)?;
                let pick = |part: Split| -> Vec<String> {
                    split
                        .ids(part)
                        .into_iter()
                        .filter(|id| labels.contains_key(*id))
                        .map(str::to_string)
                        .collect()
                };
                let (t, v) = (pick(Split::Train), pick(Split::Valid));
                (labels, t, v)
            }
            None => {
                let ids = labels.keys().cloned().collect();
                (labels, ids, Vec::new())
            }
        }
    } else {
        (BTreeMap::new(), Vec::new(), Vec::new())
    };
    let train_labels: BTreeMap<String, f64> = train_ids
        .iter()
        .filter_map(|id| labels.get(id).map(|v| (id.clone(), *v)))
        .collect();
    let domain = Domain {
        name: "train".into(),
        corpus: &corpus,
        source: encoder.as_source(),
        labels,
        train_ids,
        valid_ids,
        test_ids: Vec::new(),
    };
    let ids: Vec<&str> = domain.train_ids.iter().map(String::as_str).collect();
    let (params, trace) = fit_model(&spec, &domain, &ids, &train_labels, a.seed)?;
    for s in &trace.stages {
        let last = s.epochs.last().expect("non-empty stage");
        ctx.say(format!(
            "{}: {} epochs, stop {}, best epoch {}, final lr {:.1e}, valid loss {:.6}",
            s.mode,
            s.epochs.len(),
            s.stop_reason.as_str(),
            s.best_epoch,
            last.lr,
            s.epochs[s.best_epoch - 1].valid_loss
        ));
    }
    let meta = serde_json::json!({
        "tool": format!("dialeval {VERSION}"),
        "header": ctx.header,
        "seed": a.seed,
    });
    save_checkpoint(&params, &a.out, Some(meta))?;
    if let Some(t) = &a.trace {
        let mut body = Vec::new();
        trace.write_csv(&mut body).map_err(|e| Error::io(t, e))?;
        ctx.write_text(t, &String::from_utf8_lossy(&body))?;
    }
    ctx.say(format!("wrote {} checkpoint to {}", params.name(), a.out.display()));
    Ok(())
}

fn score_cmd(a: &ScoreArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let mut params = load_checkpoint(&a.checkpoint)?;
    if let Some(c) = &a.config {
        params = params.with_config(c.parse()?)?;
    }
    let corpus = Corpus::load(&a.corpus)?;
    let encoder = Encoder::load(a.source.encodings.as_deref(), a.source.embeddings.as_deref())?;
    let cands: Vec<_> = match (&a.split, &a.subset) {
        (Some(s), Some(part)) => {
            let part: Split = part.parse()?;
            let split = SplitAssignment::load(s)?;
            let mut missing = Vec::new();
            let cs = split
                .ids(part)
                .into_iter()
                .filter_map(|id| {
                    let c = corpus.candidate(id);
                    if c.is_none() {
                        missing.push(id.to_string());
                    }
                    c
                })
                .collect();
            if !missing.is_empty() {
                return Err(Error::UnresolvedIds(missing));
            }
            cs
        }
        _ => corpus.candidates().iter().collect(),
    };
    let inputs = gather_inputs(&corpus, cands.iter().copied(), encoder.as_source(), &params)?;
    let ids: Vec<String> = cands.iter().map(|c| c.pair_id.clone()).collect();
    let scores = score_batch(&ids, &inputs, &params)?;
    save_scores(&scores, &a.out, ctx.header())?;
    ctx.say(format!("scored {} pairs with {}", scores.len(), params.name()));
    Ok(())
}

fn emit_rows(rows: &[ReportRow], out: Option<&Path>, ctx: &mut Ctx<'_>) -> Result<()> {
    ctx.say(report_table(rows));
    if let Some(p) = out {
        ctx.write_text(p, &report_csv(rows))?;
    }
    Ok(())
}

fn labels_for(path: &Path, dimension: &str) -> Result<BTreeMap<String, f64>> {
    Ok(label_map(&load_labels(path)?, dimension.parse()?))
}

fn report_basic(a: &ReportArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let labels = labels_for(&a.labels, &a.dimension)?;
    let rows = load_score_table(&a.scores)?
        .into_iter()
        .map(|(name, s)| Ok(ReportRow { name, report: basic_report(&s, &labels)? }))
        .collect::<Result<Vec<_>>>()?;
    emit_rows(&rows, a.out.as_deref(), ctx)
}

fn report_gt(a: &GtArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let labels = labels_for(&a.report.labels, &a.report.dimension)?;
    let corpus = Corpus::load(&a.corpus)?;
    let mut rows = Vec::new();
    for (name, s) in load_score_table(&a.report.scores)? {
        let r = gt_excluded_report(&s, &labels, &corpus)?;
        rows.push(ReportRow { name: format!("{name}/full"), report: r.full });
        rows.push(ReportRow { name: format!("{name}/gt_excluded"), report: r.excluded });
    }
    emit_rows(&rows, a.report.out.as_deref(), ctx)
}

fn report_histogram(a: &HistogramArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let mut sets: Vec<(String, Vec<f64>)> = load_score_table(&a.scores)?
        .into_iter()
        .map(|(k, v)| (k, v.into_values().collect()))
        .collect();
    if let Some(l) = &a.labels {
        sets.push(("human".into(), appropriateness(l)?.into_values().collect()));
    }
    let mut csv = String::from("source,lo,hi,count\n");
    let mut body = Vec::new();
    for (name, values) in &sets {
        let bins: Vec<HistogramBin> = histogram(values, a.bins)?;
        for b in &bins {
            csv.push_str(&format!("{name},{:.6},{:.6},{}\n", b.lo, b.hi, b.count));
        }
        let counts: Vec<String> = bins.iter().map(|b| b.count.to_string()).collect();
        body.push([name.clone(), values.len().to_string(), counts.join(" ")]);
    }
    ctx.say(crate::analysis::aligned(&["source", "n", "counts"], &body));
    if let Some(p) = &a.out {
        ctx.write_text(p, &csv)?;
    }
    Ok(())
}

fn report_discretize(a: &DiscretizeArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let table = load_score_table(&a.scores)?;
    let labels = a.labels.as_deref().map(appropriateness).transpose()?;
    let mut tsv = String::from("pair_id\tevaluator\tvalue\n");
    let mut rows = Vec::new();
    for (name, s) in &table {
        let values: Vec<f64> = s.values().copied().collect();
        let disc = discretize_scores(&values)?;
        let dmap: BTreeMap<String, f64> = s.keys().cloned().zip(disc.iter().map(|&v| f64::from(v))).collect();
        for (id, v) in s.keys().zip(&disc) {
            tsv.push_str(&format!("{id}\t{name}\t{v}\n"));
        }
        if let Some(l) = &labels {
            rows.push(ReportRow { name: format!("{name}/continuous"), report: basic_report(s, l)? });
            rows.push(ReportRow { name: format!("{name}/discretized"), report: basic_report(&dmap, l)? });
        }
    }
    ctx.write_text(&a.out, &tsv)?;
    if !rows.is_empty() {
        ctx.say(report_table(&rows));
    }
    Ok(())
}

fn report_dimensions(a: &DimensionsArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let labels = load_labels(&a.labels)?;
    let dims: Vec<(Dimension, BTreeMap<String, f64>)> =
        [Dimension::Appropriateness, Dimension::Relevance, Dimension::Grammar]
            .into_iter()
            .map(|d| (d, label_map(&labels, d)))
            .filter(|(_, m)| !m.is_empty())
            .collect();
    let mut rows = Vec::new();
    for (name, s) in load_score_table(&a.scores)? {
        for mut r in dimension_sensitivity(&s, &dims)? {
            r.name = format!("{name}/{}", r.name);
            rows.push(r);
        }
    }
    emit_rows(&rows, a.out.as_deref(), ctx)
}

fn report_study(a: &StudyArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let spec = StudySpec::load(&a.spec)?;
    let base = a.spec.parent().map(Path::to_path_buf).unwrap_or_default();
    let out = run_study(&spec, &base)?;
    ctx.say(&out.table);
    if let Some(p) = &a.out {
        ctx.write_text(p, &out.csv)?;
        ctx.write_text(&p.with_extension("txt"), &out.table)?;
    }
    Ok(())
}
