use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
///
/// Every variant maps to a short machine-parsable category (see
/// [`Error::category`]) which the command-line front end prints as
/// `error:<category>:<detail>`.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dangling dialogue_id {0}")]
    DanglingDialogue(String),

    #[error("duplicate id {0}")]
    DuplicateId(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("no pairable data")]
    NoPairableData,

    #[error("constant input")]
    ConstantInput,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("reference required")]
    ReferenceRequired,

    #[error("no embeddable tokens")]
    NoEmbeddableTokens,

    #[error("supervised training requires labels")]
    MissingLabels,

    #[error("unresolved ids ({} missing): {}", .0.len(), preview(.0))]
    UnresolvedIds(Vec<String>),

    #[error("rank deficient: achieved rank {achieved}, requested {requested}")]
    RankDeficient { achieved: usize, requested: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn preview(ids: &[String]) -> String {
    const SHOWN: usize = 8;
    let mut s = ids.iter().take(SHOWN).cloned().collect::<Vec<_>>().join(",");
    if ids.len() > SHOWN {
        s.push_str(",...");
    }
    s
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Stable kebab-case category used in CLI error lines.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::DanglingDialogue(_) => "dangling-dialogue",
            Error::DuplicateId(_) => "duplicate-id",
            Error::Dimension(_) => "dimension",
            Error::NonFinite(_) => "non-finite",
            Error::NoPairableData => "no-pairable-data",
            Error::ConstantInput => "constant-input",
            Error::InsufficientData(_) => "insufficient-data",
            Error::ReferenceRequired => "reference-required",
            Error::NoEmbeddableTokens => "no-embeddable-tokens",
            Error::MissingLabels => "missing-labels",
            Error::UnresolvedIds(_) => "unresolved-ids",
            Error::RankDeficient { .. } => "rank-deficient",
            Error::InvalidArgument(_) => "invalid-argument",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
