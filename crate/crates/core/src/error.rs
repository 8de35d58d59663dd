use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown key `{key}` in {context}")]
    UnknownKey { context: String, key: String },

    #[error("missing key `{key}` in {context}")]
    MissingKey { context: String, key: String },

    #[error("duplicate attribute code `{0}`")]
    DuplicateCode(String),

    #[error("duplicate value `{value}` among siblings of attribute `{code}`")]
    DuplicateValue { code: String, value: String },

    #[error("ragged hierarchy in `{code}`: path depth {depth} but {levels} level names")]
    RaggedHierarchy { code: String, depth: usize, levels: usize },

    #[error("invalid range: min > max ({min} > {max})")]
    MinGreaterThanMax { min: f64, max: f64 },

    #[error("malformed interval: {0}")]
    MalformedInterval(String),

    #[error("unknown numeric shortcut `{0}`")]
    UnknownShortcut(String),

    #[error("unknown attribute code `{0}`")]
    UnknownCode(String),

    #[error("invalid template: {0}")]
    InvalidTemplate(String),

    #[error("expansion of generic template produced no individual template: {0}")]
    EmptyExpansion(String),

    #[error("empty axis: attribute `{0}` sampled no value")]
    EmptyAxis(String),

    #[error("malformed header tree: {0}")]
    MalformedHeader(String),

    #[error("query template {0} is not applicable to this table")]
    NotApplicable(u8),

    #[error("invalid query instance: {0}")]
    InvalidQuery(String),

    #[error("NL template parse error: {0}")]
    NlParse(String),

    #[error("unresolved placeholder `${0}`")]
    UnresolvedPlaceholder(String),

    #[error("ground truth must not be empty")]
    EmptyTruth,

    #[error("at least two questions are required")]
    TooFewQuestions,

    #[error("ground truth mismatch for {0}: evaluator and oracle disagree")]
    OracleMismatch(String),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}
