use thiserror::Error;

use crate::automaton::ArcId;
use crate::semiring::{Divergent, SemiringError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Semiring(#[from] SemiringError),
    #[error(transparent)]
    Divergent(#[from] Divergent),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown arc {0}")]
    UnknownArc(ArcId),
    #[error("unknown nonterminal `{0}`")]
    UnknownNonterminal(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{0}` is reserved")]
    ReservedSymbol(String),
    #[error("`{0}` is used both as a nonterminal and as a terminal")]
    SymbolClash(String),
    #[error("zero-weight {0} rejected")]
    ZeroWeight(String),
    #[error("arcs do not connect: {0}")]
    BrokenPath(String),
    #[error("path is not full: it must start at an initial state and end at a final state")]
    NotFullPath,
    #[error("malformed derivation: {0}")]
    MalformedDerivation(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("derivation and path yields differ: `{tree}` vs `{path}`")]
    YieldMismatch { tree: String, path: String },
    #[error("provenance error: {0}")]
    Provenance(String),
    #[error("operation requires an untrimmed intersection grammar")]
    Trimmed,
    #[error("operation requires the generalized construction")]
    NotGeneralized,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
