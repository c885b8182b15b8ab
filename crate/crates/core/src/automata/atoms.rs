use super::{AutomataError, Nfa, Transition};
use crate::alphabet::{Symbol, VarTable};
use crate::formula::Formula;

fn tr(src: usize, care: u64, value: u64, dst: usize) -> Transition {
    Transition {
        src,
        symbol: Symbol::new(care, value),
        dst,
    }
}

/// The automaton for an atomic formula, over the table of the atom's own
/// variables (argument order, duplicates collapsed).
///
/// Every shape accepts a word iff it encodes a satisfying assignment, and is
/// closed under appending the zero symbol.
pub fn atomic_automaton(atom: &Formula) -> Result<Nfa, AutomataError> {
    let vars = VarTable::from_names(
        atom.atom_vars()
            .into_iter()
            .fold(Vec::<String>::new(), |mut acc, v| {
                if !acc.contains(v) {
                    acc.push(v.clone());
                }
                acc
            }),
    )?;
    match atom {
        // X ⊆ Y: every position with X=1 has Y=1.
        Formula::Sub(x, y) if x == y => Nfa::new(vars, 1, [0], [0], [tr(0, 0, 0, 0)]),
        Formula::Sub(..) => Nfa::new(
            vars,
            1,
            [0],
            [0],
            [tr(0, 0b01, 0b00, 0), tr(0, 0b11, 0b11, 0)],
        ),
        Formula::Sing(_) => Nfa::new(
            vars,
            2,
            [0],
            [1],
            [tr(0, 1, 0, 0), tr(0, 1, 1, 1), tr(1, 1, 0, 1)],
        ),
        Formula::Zeroth(_) => Nfa::new(vars, 2, [0], [1], [tr(0, 1, 1, 1), tr(1, 1, 0, 1)]),
        // X = X + 1 has no model.
        Formula::Succ(x, y) if x == y => Nfa::new(vars, 1, [0], [], []),
        // X = Y + 1 with track 0 = X, track 1 = Y.
        Formula::Succ(..) => Nfa::new(
            vars,
            3,
            [0],
            [2],
            [
                tr(0, 0b11, 0b00, 0),
                tr(0, 0b11, 0b10, 1),
                tr(1, 0b11, 0b01, 2),
                tr(2, 0b11, 0b00, 2),
            ],
        ),
        other => Err(AutomataError::NotAnAtom(other.to_string())),
    }
}
