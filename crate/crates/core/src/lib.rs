//! A WS1S decision procedure.
//!
//! The quantifier-free matrix of a prenex formula is compiled to a
//! nondeterministic automaton; the quantifier prefix is then decided on the
//! fly over nested symbolic terms with subsumption pruning at every level
//! ([`engine`]). The classical procedure over explicit automata
//! ([`automata::decide_classical`]) is kept as a reference.

pub mod alphabet;
pub mod automata;
pub mod bench;
pub mod engine;
pub mod formula;
pub mod terms;
