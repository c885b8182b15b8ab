//! On-the-fly elimination of a quantifier prefix over nested terms.
//!
//! A ground prenex formula is first brought to the shape
//! `¬∃X_m ¬∃X_{m−1} … ¬∃X_1 : φ0`. With `A_{φ0} = (Q0, Δ0, I0, F0)` the
//! engine then computes, as terms, the sequence
//! `F0, F0♯, N1, N1♯, F2, F2♯, …` up to `F_m` (even `m`) or `N_m` (odd `m`):
//!
//! ```text
//! F_{i+1} = ↓{N_i♯}        F_i♯ = lfp Z. F_i ∪ pre[Δ_i♯, 0̄](Z)
//! N_{i+1} = ↑⊗{F_i♯}       N_i♯ = gfp Z. N_i ∩ cpre[Δ_i♯, 0̄](Z)
//! ```
//!
//! and decides the formula by testing `I_{m−1} ∈ F_m`. The transition
//! relations above level 0 are never built: `cpre` on an `↑⊗` term reduces to
//! `pre` on its children and `pre` on a `↓` term to `cpre` on its children,
//! down to explicit `pre` on base states.
//!
//! Symbols at every level are kept over the full variable table; the tracks
//! already projected away are simply don't-care.

use std::time::Instant;

use fixedbitset::FixedBitSet;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alphabet::{Symbol, VarTable};
use crate::automata::{compile_matrix, formula_table, AutomataError, Nfa, DEFAULT_STATE_BUDGET};
use crate::formula::{negate_literal_normal, PrenexFormula, Quantifier, Var};
use crate::terms::{TermArena, TermError, TermId, DEFAULT_TERM_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error("formula is not ground; free variables: {0:?}")]
    NotGround(Vec<String>),
    #[error("quantifier blocks overlap or leave the variable table")]
    BadBlocks,
    #[error("level {level} needs block X{needed}, but only {available} blocks exist")]
    MissingBlock {
        level: usize,
        needed: usize,
        available: usize,
    },
    #[error("operation expects a term of {expected} level, got level {found}")]
    WrongParity { expected: &'static str, found: usize },
}

impl EngineError {
    /// Whether the error is a resource cap rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            EngineError::Term(TermError::Budget(_)) | EngineError::Automata(AutomataError::Budget(_))
        )
    }
}

/// A prefix in the shape `¬∃X_m … ¬∃X_1 : φ0`.
#[derive(Debug, Clone)]
pub struct PrefixSpec {
    /// `X_1 … X_m`, innermost first.
    pub blocks: Vec<Vec<Var>>,
    /// The answer for the normalized formula must be negated.
    pub flip: bool,
    /// `A_{φ0}` over the table of all prefix variables.
    pub matrix: Nfa,
    /// `var_tables[i]` is the table left after projecting `X_1 … X_i`.
    pub var_tables: Vec<VarTable>,
}

impl PrefixSpec {
    pub fn levels(&self) -> usize {
        self.blocks.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Not,
    Exists(Vec<Var>),
}

/// Rewrites the prefix of `g` to alternate `¬` and `∃`: `∀B` becomes
/// `¬∃B¬`, double negations cancel, adjacent `∃` blocks fuse. A negation
/// left directly above the matrix is pushed into the matrix formula, and a
/// missing outermost negation is recorded in `flip`.
pub fn normalize_prefix(g: &PrenexFormula) -> Result<PrefixSpec, EngineError> {
    normalize_prefix_with_budget(g, DEFAULT_STATE_BUDGET)
}

pub fn normalize_prefix_with_budget(
    g: &PrenexFormula,
    state_budget: usize,
) -> Result<PrefixSpec, EngineError> {
    if !g.is_ground() {
        return Err(EngineError::NotGround(g.free_variables()));
    }
    let mut tokens: Vec<Token> = Vec::new();
    let push = |tok: Token, tokens: &mut Vec<Token>| match (tok, tokens.last_mut()) {
        (Token::Not, Some(Token::Not)) => {
            tokens.pop();
        }
        (Token::Exists(b), Some(Token::Exists(prev))) => prev.extend(b),
        (tok, _) => tokens.push(tok),
    };
    for (q, block) in &g.prefix {
        match q {
            Quantifier::Exists => push(Token::Exists(block.clone()), &mut tokens),
            Quantifier::Forall => {
                push(Token::Not, &mut tokens);
                push(Token::Exists(block.clone()), &mut tokens);
                push(Token::Not, &mut tokens);
            }
        }
    }
    let negate_matrix = tokens.last() == Some(&Token::Not);
    if negate_matrix {
        tokens.pop();
    }
    let flip = match tokens.first() {
        Some(Token::Not) => {
            tokens.remove(0);
            false
        }
        Some(Token::Exists(_)) => true,
        None => false,
    };
    let mut blocks: Vec<Vec<Var>> = tokens
        .into_iter()
        .filter_map(|t| match t {
            Token::Exists(b) => Some(b),
            Token::Not => None,
        })
        .collect();
    blocks.reverse();

    let table = formula_table(g)?;
    let matrix_formula = if negate_matrix {
        negate_literal_normal(&g.matrix)
    } else {
        g.matrix.clone()
    };
    let matrix = compile_matrix(&matrix_formula, &table, state_budget)?;
    let mut var_tables = vec![table.clone()];
    let mut removed: Vec<&Var> = Vec::new();
    for block in &blocks {
        removed.extend(block);
        let rest = table.names().iter().filter(|n| !removed.contains(n));
        var_tables.push(VarTable::from_names(rest).map_err(AutomataError::from)?);
    }
    Ok(PrefixSpec {
        blocks,
        flip,
        matrix,
        var_tables,
    })
}

/// The base automaton together with the block masks `X_1 … X_m` over its
/// table. Blocks may be empty here (useful for testing single levels).
#[derive(Debug, Clone)]
pub struct LevelContext<'a> {
    nfa: &'a Nfa,
    blocks: Vec<u64>,
    care: Vec<u64>,
}

impl<'a> LevelContext<'a> {
    pub fn new(nfa: &'a Nfa, blocks: Vec<u64>) -> Result<Self, EngineError> {
        let full = nfa.vars().full_mask();
        let mut seen = 0u64;
        let mut care = vec![full];
        for &b in &blocks {
            if b & !full != 0 || b & seen != 0 {
                return Err(EngineError::BadBlocks);
            }
            seen |= b;
            care.push(full & !seen);
        }
        Ok(LevelContext { nfa, blocks, care })
    }

    pub fn from_spec(spec: &'a PrefixSpec) -> Result<Self, EngineError> {
        let vars = spec.matrix.vars();
        let masks = spec
            .blocks
            .iter()
            .map(|b| vars.mask_of(b))
            .collect::<Result<Vec<u64>, _>>()
            .map_err(AutomataError::from)?;
        Self::new(&spec.matrix, masks)
    }

    pub fn nfa(&self) -> &Nfa {
        self.nfa
    }

    /// Number of blocks `m`.
    pub fn levels(&self) -> usize {
        self.blocks.len()
    }

    /// Mask of `X_i`, `1 ≤ i ≤ m`.
    pub fn block(&self, i: usize) -> u64 {
        self.blocks[i - 1]
    }

    /// Tracks left after projecting `X_1 … X_i`.
    pub fn care(&self, i: usize) -> u64 {
        self.care[i]
    }

    /// `0̄` over the tracks left after projecting `X_1 … X_i`.
    pub fn zero(&self, i: usize) -> Symbol {
        Symbol::new(self.care[i], 0)
    }

    /// `π_i⁻¹(τ)`: every way of fixing the tracks of `X_i` in `τ`.
    pub fn inverse(&self, i: usize, tau: Symbol) -> Vec<Symbol> {
        tau.expand_block(self.block(i)).collect()
    }

    fn require_block(&self, level: usize) -> Result<(), EngineError> {
        if level + 1 > self.levels() {
            return Err(EngineError::MissingBlock {
                level,
                needed: level + 1,
                available: self.levels(),
            });
        }
        Ok(())
    }

    /// Explicit `pre[Δ0♯, τ](set)`: a transition matches when its symbol is
    /// compatible with `τ`, which covers every symbol projecting to `τ`.
    pub fn base_pre(&self, tau: Symbol, set: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.nfa.num_states());
        for q in set.ones() {
            for &(s, p) in self.nfa.predecessors(q) {
                if s.compatible(tau) {
                    out.insert(p);
                }
            }
        }
        out
    }
}

/// Counters of one nested run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NestedStats {
    pub levels: usize,
    pub base_states: usize,
    /// Distinct term nodes created.
    pub term_nodes: usize,
    /// Fixpoint rounds per level, `F0♯` first.
    pub iterations: Vec<usize>,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestedOutcome {
    /// Truth value of the formula the spec was built from.
    pub valid: bool,
    pub stats: NestedStats,
    /// Canonical renderings of every fixpoint iterate, when requested.
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NestedOptions {
    pub budget: usize,
    pub trace: bool,
}

impl Default for NestedOptions {
    fn default() -> Self {
        NestedOptions {
            budget: DEFAULT_TERM_BUDGET,
            trace: false,
        }
    }
}

/// Symbolic images and fixpoints over one [`LevelContext`].
pub struct Engine<'a> {
    ctx: LevelContext<'a>,
    terms: TermArena,
    pre_memo: FxHashMap<(TermId, Symbol), TermId>,
    cpre_memo: FxHashMap<(TermId, Symbol), TermId>,
    iterations: Vec<usize>,
    trace: Option<Vec<String>>,
}

impl<'a> Engine<'a> {
    pub fn new(ctx: LevelContext<'a>, budget: usize) -> Self {
        let terms = TermArena::with_budget(ctx.nfa.num_states(), budget);
        Engine {
            ctx,
            terms,
            pre_memo: FxHashMap::default(),
            cpre_memo: FxHashMap::default(),
            iterations: Vec::new(),
            trace: None,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn ctx(&self) -> &LevelContext<'a> {
        &self.ctx
    }

    pub fn terms(&self) -> &TermArena {
        &self.terms
    }

    pub fn terms_mut(&mut self) -> &mut TermArena {
        &mut self.terms
    }

    /// Fixpoint rounds recorded so far, indexed by level.
    pub fn iterations(&self) -> &[usize] {
        &self.iterations
    }

    pub fn take_trace(&mut self) -> Vec<String> {
        self.trace.take().unwrap_or_default()
    }

    fn note(&mut self, label: impl FnOnce() -> String, t: TermId) {
        if let Some(trace) = self.trace.as_mut() {
            let line = format!("{} = {}", label(), self.terms.render(t));
            trace.push(line);
        }
    }

    fn count_iteration(&mut self, level: usize) {
        if self.iterations.len() <= level {
            self.iterations.resize(level + 1, 0);
        }
        self.iterations[level] += 1;
    }

    /// `pre[Δ_i♯, τ](⟦t⟧)` for a term `t` of even level `i`, with `τ` over
    /// the tracks left after `X_1 … X_{i+1}`.
    ///
    /// Level 0 is the explicit base `pre`. Above it,
    /// `pre[Δ_i♯, τ](↓ℛ) = ↓{cpre[Δ_{i−1}♯, ω](R) | ω ∈ π_{i+1}⁻¹(τ), R ∈ ℛ}`.
    pub fn sym_pre(&mut self, t: TermId, tau: Symbol) -> Result<TermId, EngineError> {
        let level = self.terms.level(t);
        if level % 2 == 1 {
            return Err(EngineError::WrongParity {
                expected: "even",
                found: level,
            });
        }
        if let Some(&r) = self.pre_memo.get(&(t, tau)) {
            return Ok(r);
        }
        let result = if level == 0 {
            let set = self.terms.states(t).expect("level 0").clone();
            let pre = self.ctx.base_pre(tau, &set);
            self.terms.base_set(pre)?
        } else {
            self.ctx.require_block(level)?;
            let mut images = Vec::new();
            for omega in self.ctx.inverse(level + 1, tau) {
                for r in self.terms.children(t).to_vec() {
                    images.push(self.sym_cpre(r, omega)?);
                }
            }
            self.terms.compose(level, &images)?
        };
        self.pre_memo.insert((t, tau), result);
        Ok(result)
    }

    /// `cpre[Δ_i♯, τ](⟦t⟧)` for a term `t` of odd level `i`:
    /// `cpre[Δ_i♯, τ](↑⊗ℛ) = ↑⊗{pre[Δ_{i−1}♯, ω](R) | ω ∈ π_{i+1}⁻¹(τ), R ∈ ℛ}`.
    pub fn sym_cpre(&mut self, t: TermId, tau: Symbol) -> Result<TermId, EngineError> {
        let level = self.terms.level(t);
        if level.is_multiple_of(2) {
            return Err(EngineError::WrongParity {
                expected: "odd",
                found: level,
            });
        }
        if let Some(&r) = self.cpre_memo.get(&(t, tau)) {
            return Ok(r);
        }
        self.ctx.require_block(level)?;
        let mut images = Vec::new();
        for omega in self.ctx.inverse(level + 1, tau) {
            for r in self.terms.children(t).to_vec() {
                images.push(self.sym_pre(r, omega)?);
            }
        }
        let result = self.terms.compose(level, &images)?;
        self.cpre_memo.insert((t, tau), result);
        Ok(result)
    }

    /// `F0♯`: base states reaching `F0` over symbols projecting to `0̄`.
    pub fn base_fsharp(&mut self) -> Result<TermId, EngineError> {
        self.ctx.require_block(0)?;
        let zero = self.ctx.zero(1);
        let mut z = self.ctx.nfa.finals().clone();
        loop {
            self.count_iteration(0);
            let mut next = self.ctx.base_pre(zero, &z);
            next.union_with(&z);
            if next == z {
                break;
            }
            z = next;
        }
        let t = self.terms.base_set(z)?;
        self.note(|| "F0♯".to_string(), t);
        Ok(t)
    }

    /// `F_i♯` for even `i ≥ 2`, from `N_{i−1}♯`.
    pub fn fixpoint_fsharp(&mut self, i: usize, n_prev: TermId) -> Result<TermId, EngineError> {
        let mut z = self.terms.compose(i, &[n_prev])?;
        self.note(|| format!("F{i}"), z);
        let zero = self.ctx.zero(i + 1);
        loop {
            self.count_iteration(i);
            let image = self.sym_pre(z, zero)?;
            let mut gens = vec![n_prev];
            gens.extend_from_slice(self.terms.children(image));
            let next = self.terms.compose(i, &gens)?;
            let round = self.iterations[i];
            self.note(|| format!("F{i}♯ round {round}"), next);
            if self.terms.subsumes(next, z)? {
                return Ok(next);
            }
            z = next;
        }
    }

    /// `N_i♯` for odd `i`, from `F_{i−1}♯`.
    pub fn fixpoint_nsharp(&mut self, i: usize, f_prev: TermId) -> Result<TermId, EngineError> {
        let mut z = self.terms.compose(i, &[f_prev])?;
        self.note(|| format!("N{i}"), z);
        let zero = self.ctx.zero(i + 1);
        loop {
            self.count_iteration(i);
            let image = self.sym_cpre(z, zero)?;
            let mut gens = vec![f_prev];
            gens.extend_from_slice(self.terms.children(image));
            let next = self.terms.compose(i, &gens)?;
            let round = self.iterations[i];
            self.note(|| format!("N{i}♯ round {round}"), next);
            if self.terms.subsumes(z, next)? {
                return Ok(next);
            }
            z = next;
        }
    }

    /// Computes `F_m` (even `m`) or `N_m` (odd `m`) and returns it together
    /// with the truth value of `¬∃X_m … ¬∃X_1 : φ0`.
    pub fn run(&mut self) -> Result<(Option<TermId>, bool), EngineError> {
        let m = self.ctx.levels();
        let initial = self.ctx.nfa.initial().clone();
        if m == 0 {
            return Ok((None, !initial.is_disjoint(self.ctx.nfa.finals())));
        }
        let mut sharp = self.base_fsharp()?;
        for i in 1..=m {
            let top = self.terms.compose(i, &[sharp])?;
            if i == m {
                let label = if i % 2 == 1 { "N" } else { "F" };
                self.note(|| format!("{label}{i}"), top);
                let member = self.terms.member_initial(top, &initial)?;
                // For odd m the term is the non-final set N_m.
                let valid = if i % 2 == 1 { !member } else { member };
                return Ok((Some(top), valid));
            }
            sharp = if i % 2 == 1 {
                self.fixpoint_nsharp(i, sharp)?
            } else {
                self.fixpoint_fsharp(i, sharp)?
            };
        }
        unreachable!("loop returns at i == m")
    }
}

/// Decides the formula `spec` was normalized from.
pub fn decide_nested(spec: &PrefixSpec, opts: &NestedOptions) -> Result<NestedOutcome, EngineError> {
    let start = Instant::now();
    let ctx = LevelContext::from_spec(spec)?;
    let mut engine = Engine::new(ctx, opts.budget);
    if opts.trace {
        engine = engine.with_trace();
    }
    let (_, valid) = engine.run()?;
    let stats = NestedStats {
        levels: spec.levels(),
        base_states: spec.matrix.num_states(),
        term_nodes: engine.terms().len(),
        iterations: engine.iterations().to_vec(),
        millis: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(NestedOutcome {
        valid: valid != spec.flip,
        stats,
        trace: engine.take_trace(),
    })
}
