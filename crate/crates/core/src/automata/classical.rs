use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{atomic_automaton, complement, cylindrify, product, project_exists, trim, BoolMode};
use super::{AutomataError, Nfa};
use crate::alphabet::VarTable;
use crate::formula::{Formula, PrenexFormula, Quantifier};

/// Default cap on the number of automaton states the classical procedure may build.
pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// Compiles a quantifier-free formula to an automaton over `vars`.
///
/// Atoms use the predefined shapes, negated atoms their complements; `&` is
/// the synchronous product and `|` the disjoint sum. Negations above compound
/// formulas fall back to complementing the compiled operand.
pub fn compile_matrix(f: &Formula, vars: &VarTable, budget: usize) -> Result<Nfa, AutomataError> {
    match f {
        atom if atom.is_atom() => cylindrify(&atomic_automaton(atom)?, vars),
        Formula::Not(a) if a.is_atom() => {
            cylindrify(&complement(&atomic_automaton(a)?, budget)?, vars)
        }
        Formula::Not(a) => complement(&compile_matrix(a, vars, budget)?, budget),
        Formula::And(a, b) => {
            let a = compile_matrix(a, vars, budget)?;
            let b = compile_matrix(b, vars, budget)?;
            trim(&product(&a, &b, BoolMode::And)?)
        }
        Formula::Or(a, b) => {
            let a = compile_matrix(a, vars, budget)?;
            let b = compile_matrix(b, vars, budget)?;
            product(&a, &b, BoolMode::Or)
        }
        Formula::Exists(..) | Formula::Forall(..) => Err(AutomataError::QuantifiedMatrix),
        _ => unreachable!("atoms handled above"),
    }
}

/// Counters of one classical run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassicalStats {
    /// States of the matrix automaton.
    pub matrix_states: usize,
    /// Sum of the states of every automaton built while eliminating the prefix.
    pub total_states: usize,
    /// States of each of those automata, in construction order.
    pub automaton_sizes: Vec<usize>,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalOutcome {
    /// Truth value of the ground formula.
    pub valid: bool,
    pub stats: ClassicalStats,
}

/// The table a prenex formula is compiled over: prefix variables outermost
/// first, then free matrix variables.
pub fn formula_table(g: &PrenexFormula) -> Result<VarTable, AutomataError> {
    Ok(VarTable::from_names(g.variable_order())?)
}

/// Decides a ground prenex formula with explicit automata: builds the matrix
/// automaton and then eliminates the prefix innermost first, projecting for
/// `∃` and complementing around the projection for `∀`. The formula holds iff
/// the final automaton accepts the empty word.
pub fn decide_classical(g: &PrenexFormula, budget: usize) -> Result<ClassicalOutcome, AutomataError> {
    let start = Instant::now();
    if !g.is_ground() {
        return Err(AutomataError::NotGround(g.free_variables()));
    }
    let vars = formula_table(g)?;
    let mut current = compile_matrix(&g.matrix, &vars, budget)?;
    let mut stats = ClassicalStats {
        matrix_states: current.num_states(),
        ..Default::default()
    };
    let record = |a: &Nfa, stats: &mut ClassicalStats| -> Result<(), AutomataError> {
        stats.total_states += a.num_states();
        stats.automaton_sizes.push(a.num_states());
        if stats.total_states > budget {
            return Err(AutomataError::Budget(budget));
        }
        Ok(())
    };
    // A pending negation is applied lazily so that the `¬¬` produced by
    // adjacent universal blocks cancels.
    let mut negated = false;
    for (q, block) in g.prefix.iter().rev() {
        let remaining = budget.saturating_sub(stats.total_states).max(1);
        if (*q == Quantifier::Forall) != negated {
            current = complement(&current, remaining)?;
            record(&current, &mut stats)?;
        }
        current = project_exists(&current, block)?;
        record(&current, &mut stats)?;
        negated = *q == Quantifier::Forall;
    }
    if negated {
        let remaining = budget.saturating_sub(stats.total_states).max(1);
        current = complement(&current, remaining)?;
        record(&current, &mut stats)?;
    }
    stats.millis = start.elapsed().as_secs_f64() * 1e3;
    Ok(ClassicalOutcome {
        valid: current.accepts_empty(),
        stats,
    })
}
