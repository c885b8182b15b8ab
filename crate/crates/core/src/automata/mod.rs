//! Explicit finite automata: atomic automata, boolean operations with
//! cylindrification, subset-construction complement, existential projection,
//! and the classical decision procedure built from them.

mod atoms;
mod classical;
mod nfa;
mod ops;

use thiserror::Error;

use crate::alphabet::AlphabetError;

pub use atoms::atomic_automaton;
pub use classical::{
    compile_matrix, decide_classical, formula_table, ClassicalOutcome, ClassicalStats,
    DEFAULT_STATE_BUDGET,
};
pub use nfa::{Nfa, StateSet, Transition};
pub use ops::{
    complement, cylindrify, encoding_closure_witness, product, project_exists, trim, BoolMode,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomataError {
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error("state {0} out of range")]
    StateOutOfRange(usize),
    #[error("transition symbol uses a track outside the variable table")]
    SymbolOutsideTable,
    #[error("automata are over different variable tables")]
    TableMismatch,
    #[error("`{0}` is not an atomic formula")]
    NotAnAtom(String),
    #[error("matrix contains a quantifier")]
    QuantifiedMatrix,
    #[error("formula is not ground; free variables: {0:?}")]
    NotGround(Vec<String>),
    #[error("state budget of {0} exceeded")]
    Budget(usize),
    #[error("automaton dump line {line}: {message}")]
    Dump { line: usize, message: String },
}
