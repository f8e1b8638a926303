use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bit count must be in 1..=16, got {0}")]
    BadBitCount(u32),
    #[error("bit index {index} out of range for a {bit_count}-bit space")]
    BitIndexOutOfRange { index: u32, bit_count: u32 },
    #[error("vocabulary cap exceeded: {count} programs, cap {cap}")]
    CapExceeded { count: usize, cap: usize },
    #[error("vocabulary is empty after deduplication")]
    EmptyVocabulary,
    #[error("enumeration budget exceeded: {candidates} candidate subsets, budget {budget}")]
    BudgetExceeded { candidates: u128, budget: u128 },
    #[error("unknown program id {0}")]
    UnknownProgram(usize),
    #[error("unknown program label `{0}`")]
    UnknownLabel(String),
    #[error("statement is unsatisfiable")]
    Unsatisfiable,
    #[error("inclusion-exclusion budget exceeded: {sets} maximal truesets, limit {limit}")]
    InclusionExclusionBudget { sets: usize, limit: usize },
    #[error("no valid model exists for this task")]
    NoModel,
    #[error("search node budget exceeded after {nodes} nodes")]
    SearchBudget { nodes: usize },
    #[error("model is silent on this situation: no complete extension contains it")]
    SilentModel,
    #[error("task is malformed: {0}")]
    BadTask(String),
    #[error("tasks use different vocabularies")]
    VocabularyMismatch,
    #[error("|D_k| = {dk} out of range for a parent with {parent} decisions")]
    BadChildSize { dk: usize, parent: usize },
    #[error("fixture self-check failed: {0}")]
    Fixture(String),
    #[error("quantization is not invertible: {0}")]
    Quantization(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("bad configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
