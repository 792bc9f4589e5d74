//! Intersection of weighted context-free grammars with weighted finite-state
//! automata that may contain ε-arcs.
//!
//! Two constructions are provided. The classical Bar-Hillel construction
//! ([`Construction::Legacy`]) silently drops every automaton path that uses
//! an ε-arc. The generalized construction ([`Construction::Generalized`])
//! adds rules that thread ε-arcs either in front of a terminal or at the end
//! of the input, so each derivation of the output grammar corresponds to
//! exactly one (derivation, path) pair of the inputs with matching yield.
//! The [`correspondence`] module computes that mapping in both directions and
//! checks it exhaustively on bounded instances.
//!
//! Weights live in one of three commutative semirings ([`SemiringId`]).

pub mod automaton;
pub mod correspondence;
pub mod error;
pub mod generator;
pub mod grammar;
pub mod intersection;
pub mod semiring;

pub use automaton::{ArcId, Label, Path, PathWeighting, StateId, Wfsa};
pub use correspondence::{BijectionReport, JoinBounds, JoinPair, WeakReport};
pub use intersection::{Construction, Family, IntersectionGrammar, Mid, SourceRef, Triplet};

pub use error::{Error, Result};
pub use grammar::{Derivation, NonterminalId, RuleId, Symbol, TerminalId, TruncatedWeight, Wcfg};

pub use semiring::{Divergent, SemiringId, Weight};

/// Token reserved for ε in file formats and renderings.
pub const EPSILON: &str = "<eps>";
/// Token reserved for the auxiliary start-side symbol of the generalized construction.
pub const START_BAR: &str = "<sbar>";

/// Splits a string into whitespace-separated symbols.
pub fn tokens(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

pub(crate) fn is_reserved(name: &str) -> bool {
    name == EPSILON || name == START_BAR
}

/// Grammar and alphabet symbols must be non-empty, free of whitespace and
/// parentheses, and not one of the reserved tokens.
pub(crate) fn check_symbol_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(|c| c.is_whitespace() || matches!(c, '(' | ')')) {
        return Err(Error::InvalidName(name.to_string()));
    }
    if is_reserved(name) {
        return Err(Error::ReservedSymbol(name.to_string()));
    }
    Ok(())
}

/// State names additionally exclude the triplet delimiters `[`, `]` and `,`.
pub(crate) fn check_state_name(name: &str) -> Result<()> {
    check_symbol_name(name)?;
    if name.chars().any(|c| matches!(c, '[' | ']' | ',')) {
        return Err(Error::InvalidName(name.to_string()));
    }
    Ok(())
}
