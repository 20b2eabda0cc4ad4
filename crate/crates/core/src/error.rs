use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported construct at {line}:{column}: {construct}")]
    UnsupportedConstruct {
        line: usize,
        column: usize,
        construct: String,
    },

    #[error("duplicate axiom id `{0}`")]
    DuplicateAxiomId(String),

    #[error("formula `{0}` has role conjecture; knowledge bases may only contain axioms")]
    ConjectureInKb(String),

    #[error("goal source contains no conjecture")]
    NoConjecture,

    #[error("goal source contains more than one conjecture (`{first}` and `{second}`)")]
    MultipleConjectures { first: String, second: String },

    #[error("knowledge base contains no axioms")]
    EmptyKnowledgeBase,

    #[error("dimension mismatch{}: expected {expected}, found {found}", line_suffix(*line))]
    DimensionMismatch {
        line: Option<usize>,
        expected: usize,
        found: usize,
    },

    #[error("duplicate embedding token `{token}` on line {line}")]
    DuplicateToken { token: String, line: usize },

    #[error("zero vector{}", line_suffix(*line))]
    ZeroVector { line: Option<usize> },

    #[error("embedding parse error on line {line}: {message}")]
    EmbeddingParse { line: usize, message: String },

    #[error("k = {k} is too large: only {available} candidates")]
    KTooLarge { k: usize, available: usize },

    #[error("unknown mapping source `{0}` (expected synonym, hyponym or instance)")]
    UnknownSource(String),

    #[error("mapping file line {line}: {message}")]
    MappingParse { line: usize, message: String },

    #[error("goal has no symbol that maps into the embedding vocabulary")]
    GoalNotVectorizable,

    #[error("prover executable not found: {0}")]
    ProverNotFound(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("vector cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn line_suffix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" on line {l}"),
        None => String::new(),
    }
}
