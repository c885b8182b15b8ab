//! Nested symbolic terms.
//!
//! A term of level 0 is a set of base states. A term of odd level `2j+1` is
//! `↑⊗{t1,…,tn}` over terms of level `2j`, and a term of even level `2j > 0`
//! is `↓{t1,…,tn}` over terms of level `2j−1`. A term of level `k` stands for
//! a set of states of the `k`-fold subset construction.
//!
//! Terms are hash-consed in a [`TermArena`]; structurally equal terms share
//! one [`TermId`].

use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

/// Default cap on the number of distinct term nodes.
pub const DEFAULT_TERM_BUDGET: usize = 1_000_000;

/// Default cap on the size of an explicit denotation.
pub const DEFAULT_DENOTE_GUARD: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("expected a term of level {expected}, found level {found}")]
    LevelMismatch { expected: usize, found: usize },
    #[error("term-node budget of {0} exceeded")]
    Budget(usize),
    #[error("denotation at level {level} has {size} candidate elements, above the guard")]
    DenoteTooLarge { level: usize, size: String },
    #[error("state {0} is outside the base automaton")]
    StateOutOfRange(usize),
    #[error("membership is only defined for levels ≥ 1")]
    MembershipAtLevelZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constructor {
    /// `↓`, at even levels.
    Down,
    /// `↑⊗`, at odd levels.
    UpChoice,
}

impl Constructor {
    /// The constructor of terms of `level` (≥ 1).
    pub fn of_level(level: usize) -> Self {
        if level % 2 == 1 {
            Constructor::UpChoice
        } else {
            Constructor::Down
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Base(FixedBitSet),
    /// Children sorted by id, duplicate-free.
    Up(Vec<TermId>),
    Down(Vec<TermId>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Term {
    level: usize,
    node: Node,
}

#[derive(Debug, Clone)]
pub struct TermArena {
    num_states: usize,
    budget: usize,
    terms: Vec<Term>,
    index: FxHashMap<Term, TermId>,
    subsumes_memo: FxHashMap<(TermId, TermId), bool>,
}

impl TermArena {
    /// An arena over base states `0..num_states`.
    pub fn new(num_states: usize) -> Self {
        Self::with_budget(num_states, DEFAULT_TERM_BUDGET)
    }

    pub fn with_budget(num_states: usize, budget: usize) -> Self {
        TermArena {
            num_states,
            budget,
            terms: Vec::new(),
            index: FxHashMap::default(),
            subsumes_memo: FxHashMap::default(),
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Number of distinct term nodes created so far.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn level(&self, t: TermId) -> usize {
        self.terms[t.index()].level
    }

    pub fn node(&self, t: TermId) -> &Node {
        &self.terms[t.index()].node
    }

    /// Children of a term of level ≥ 1; empty for base terms.
    pub fn children(&self, t: TermId) -> &[TermId] {
        match self.node(t) {
            Node::Base(_) => &[],
            Node::Up(c) | Node::Down(c) => c,
        }
    }

    /// The state set of a level-0 term.
    pub fn states(&self, t: TermId) -> Option<&FixedBitSet> {
        match self.node(t) {
            Node::Base(s) => Some(s),
            _ => None,
        }
    }

    fn intern(&mut self, term: Term) -> Result<TermId, TermError> {
        if let Some(&id) = self.index.get(&term) {
            return Ok(id);
        }
        if self.terms.len() >= self.budget {
            return Err(TermError::Budget(self.budget));
        }
        let id = TermId(self.terms.len() as u32);
        self.terms.push(term.clone());
        self.index.insert(term, id);
        Ok(id)
    }

    pub fn base(&mut self, states: impl IntoIterator<Item = usize>) -> Result<TermId, TermError> {
        let mut set = FixedBitSet::with_capacity(self.num_states);
        for q in states {
            if q >= self.num_states {
                return Err(TermError::StateOutOfRange(q));
            }
            set.insert(q);
        }
        self.base_set(set)
    }

    pub fn base_set(&mut self, set: FixedBitSet) -> Result<TermId, TermError> {
        let mut exact = FixedBitSet::with_capacity(self.num_states);
        for q in set.ones() {
            if q >= self.num_states {
                return Err(TermError::StateOutOfRange(q));
            }
            exact.insert(q);
        }
        self.intern(Term {
            level: 0,
            node: Node::Base(exact),
        })
    }

    fn check_children(&self, level: usize, children: &[TermId]) -> Result<(), TermError> {
        if level == 0 {
            return Err(TermError::LevelMismatch {
                expected: 1,
                found: 0,
            });
        }
        for &c in children {
            if self.level(c) != level - 1 {
                return Err(TermError::LevelMismatch {
                    expected: level - 1,
                    found: self.level(c),
                });
            }
        }
        Ok(())
    }

    /// Builds the level-`level` node over `children` without pruning.
    pub fn raw(&mut self, level: usize, children: &[TermId]) -> Result<TermId, TermError> {
        self.check_children(level, children)?;
        let mut kids = children.to_vec();
        kids.sort_unstable();
        kids.dedup();
        let node = match Constructor::of_level(level) {
            Constructor::UpChoice => Node::Up(kids),
            Constructor::Down => Node::Down(kids),
        };
        self.intern(Term { level, node })
    }

    /// Builds the level-`level` node over the pruned `children`.
    pub fn compose(&mut self, level: usize, children: &[TermId]) -> Result<TermId, TermError> {
        self.check_children(level, children)?;
        let kept = self.prune(children, Constructor::of_level(level))?;
        self.raw(level, &kept)
    }

    /// `↑⊗{children}`; the level is one above the children's.
    pub fn up(&mut self, children: &[TermId]) -> Result<TermId, TermError> {
        let level = children.first().map_or(1, |&c| self.level(c) + 1);
        self.compose(level, children)
    }

    /// `↓{children}`; the level is one above the children's.
    pub fn down(&mut self, children: &[TermId]) -> Result<TermId, TermError> {
        let level = children.first().map_or(2, |&c| self.level(c) + 1);
        self.compose(level, children)
    }

    /// Whether the denotation of `s` is included in that of `t`.
    pub fn subsumes(&mut self, s: TermId, t: TermId) -> Result<bool, TermError> {
        let (ls, lt) = (self.level(s), self.level(t));
        if ls != lt {
            return Err(TermError::LevelMismatch {
                expected: ls,
                found: lt,
            });
        }
        Ok(self.subsumes_same_level(s, t))
    }

    fn subsumes_same_level(&mut self, s: TermId, t: TermId) -> bool {
        if s == t {
            return true;
        }
        if let Some(&r) = self.subsumes_memo.get(&(s, t)) {
            return r;
        }
        let result = match (self.node(s), self.node(t)) {
            (Node::Base(a), Node::Base(b)) => a.is_subset(b),
            (Node::Down(xs), Node::Down(ys)) => {
                let (xs, ys) = (xs.clone(), ys.clone());
                xs.iter()
                    .all(|&x| ys.iter().any(|&y| self.subsumes_same_level(x, y)))
            }
            (Node::Up(xs), Node::Up(ys)) => {
                let (xs, ys) = (xs.clone(), ys.clone());
                ys.iter()
                    .all(|&y| xs.iter().any(|&x| self.subsumes_same_level(x, y)))
            }
            _ => unreachable!("terms of one level share a constructor"),
        };
        self.subsumes_memo.insert((s, t), result);
        result
    }

    /// Removes subsumed children: under `↓` every child included in a sibling,
    /// under `↑⊗` every child including a sibling. Of equivalent siblings the
    /// one with the lower id stays. The result is sorted by id.
    pub fn prune(
        &mut self,
        children: &[TermId],
        constructor: Constructor,
    ) -> Result<Vec<TermId>, TermError> {
        let mut kids = children.to_vec();
        kids.sort_unstable();
        kids.dedup();
        if let Some(&first) = kids.first() {
            let level = self.level(first);
            if let Some(&bad) = kids.iter().find(|&&c| self.level(c) != level) {
                return Err(TermError::LevelMismatch {
                    expected: level,
                    found: self.level(bad),
                });
            }
        }
        let mut kept = Vec::with_capacity(kids.len());
        for &c in &kids {
            let mut redundant = false;
            for &d in &kids {
                if c == d {
                    continue;
                }
                let (below, above) = match constructor {
                    Constructor::Down => (c, d),
                    Constructor::UpChoice => (d, c),
                };
                if self.subsumes_same_level(below, above)
                    && (d < c || !self.subsumes_same_level(above, below))
                {
                    redundant = true;
                    break;
                }
            }
            if !redundant {
                kept.push(c);
            }
        }
        Ok(kept)
    }

    /// Decides `I_{k−1} ∈ ⟦t⟧` for a term `t` of level `k ≥ 1`, where
    /// `I_0 = initial` and `I_j = {I_{j−1}}`.
    pub fn member_initial(&self, t: TermId, initial: &FixedBitSet) -> Result<bool, TermError> {
        if self.level(t) == 0 {
            return Err(TermError::MembershipAtLevelZero);
        }
        let mut memo = FxHashMap::default();
        Ok(self.member(t, initial, &mut memo))
    }

    fn member(&self, t: TermId, initial: &FixedBitSet, memo: &mut FxHashMap<TermId, bool>) -> bool {
        if let Some(&r) = memo.get(&t) {
            return r;
        }
        let result = match self.node(t) {
            Node::Up(ys) if self.level(t) == 1 => ys.iter().all(|&y| {
                let y = self.states(y).expect("level-0 child");
                !y.is_disjoint(initial)
            }),
            Node::Up(ys) => ys.iter().all(|&y| self.member(y, initial, memo)),
            Node::Down(ys) => ys.iter().any(|&y| self.member(y, initial, memo)),
            Node::Base(_) => unreachable!("recursion stops at level 1"),
        };
        memo.insert(t, result);
        result
    }

    /// Canonical rendering, e.g. `↑⊗{{b,c},{c,d}}`. Children are listed in
    /// the order of their own renderings; base states in increasing order.
    pub fn render_with(&self, t: TermId, name: &dyn Fn(usize) -> String) -> String {
        let mut out = String::new();
        self.render_into(t, name, &mut out);
        out
    }

    /// Canonical rendering with base states named by their index.
    pub fn render(&self, t: TermId) -> String {
        self.render_with(t, &|q| q.to_string())
    }

    fn render_into(&self, t: TermId, name: &dyn Fn(usize) -> String, out: &mut String) {
        let (prefix, kids) = match self.node(t) {
            Node::Base(s) => {
                let names: Vec<String> = s.ones().map(name).collect();
                let _ = write!(out, "{{{}}}", names.join(","));
                return;
            }
            Node::Up(c) => ("↑⊗", c),
            Node::Down(c) => ("↓", c),
        };
        let mut parts: Vec<(Vec<usize>, String)> = kids
            .iter()
            .map(|&c| {
                let key = self.states(c).map(|s| s.ones().collect()).unwrap_or_default();
                (key, self.render_with(c, name))
            })
            .collect();
        parts.sort();
        let parts: Vec<String> = parts.into_iter().map(|(_, s)| s).collect();
        let _ = write!(out, "{prefix}{{{}}}", parts.join(","));
    }

    /// Checks the level grammar below `t`: every child one level down, base
    /// terms only at level 0, `↑⊗` at odd and `↓` at even levels.
    pub fn well_formed(&self, t: TermId) -> bool {
        let mut seen = FxHashSet::default();
        self.well_formed_rec(t, &mut seen)
    }

    fn well_formed_rec(&self, t: TermId, seen: &mut FxHashSet<TermId>) -> bool {
        if !seen.insert(t) {
            return true;
        }
        let level = self.level(t);
        let shape_ok = match self.node(t) {
            Node::Base(_) => level == 0,
            Node::Up(_) => level % 2 == 1,
            Node::Down(_) => level > 0 && level.is_multiple_of(2),
        };
        shape_ok
            && self
                .children(t)
                .to_vec()
                .into_iter()
                .all(|c| self.level(c) + 1 == level && self.well_formed_rec(c, seen))
    }

    /// Explicit denotation of `t`, for testing.
    ///
    /// Elements of `Q_0` are the base states. An element of `Q_k`, `k ≥ 1`,
    /// is a subset of `Q_{k−1}` and is encoded as the bitmask of its members'
    /// encodings, so `|Q_k| = 2^|Q_{k−1}|`. The result is a bitset over
    /// `Q_k`. Fails when `|Q_k|` exceeds `guard`.
    pub fn denote(&self, t: TermId, guard: usize) -> Result<FixedBitSet, TermError> {
        let level = self.level(t);
        universe_size(self.num_states, level)
            .filter(|&u| u <= guard)
            .ok_or_else(|| TermError::DenoteTooLarge {
                level,
                size: universe_label(self.num_states, level),
            })?;
        let mut memo = FxHashMap::default();
        Ok(self.denote_rec(t, &mut memo))
    }

    fn denote_rec(&self, t: TermId, memo: &mut FxHashMap<TermId, FixedBitSet>) -> FixedBitSet {
        if let Some(d) = memo.get(&t) {
            return d.clone();
        }
        let level = self.level(t);
        let result = match self.node(t) {
            Node::Base(s) => s.clone(),
            Node::Up(kids) | Node::Down(kids) => {
                let below = universe_size(self.num_states, level - 1).expect("checked at top");
                let size = 1usize << below;
                let gens: Vec<u64> = kids
                    .iter()
                    .map(|&c| to_mask(&self.denote_rec(c, memo)))
                    .collect();
                let up = matches!(self.node(t), Node::Up(_));
                let mut out = FixedBitSet::with_capacity(size);
                for s in 0..size as u64 {
                    let member = if up {
                        gens.iter().all(|&g| s & g != 0)
                    } else {
                        gens.iter().any(|&g| s & !g == 0)
                    };
                    out.set(s as usize, member);
                }
                out
            }
        };
        memo.insert(t, result.clone());
        result
    }
}

/// `|Q_level|` for `|Q_0| = num_states`, if it fits in a `usize` below 2^32.
pub fn universe_size(num_states: usize, level: usize) -> Option<usize> {
    let mut size = num_states;
    for _ in 0..level {
        if size >= 32 {
            return None;
        }
        size = 1usize << size;
    }
    Some(size)
}

fn universe_label(num_states: usize, level: usize) -> String {
    let mut label = num_states.to_string();
    for _ in 0..level {
        label = format!("2^{label}");
    }
    label
}

fn to_mask(set: &FixedBitSet) -> u64 {
    set.ones().fold(0u64, |m, i| m | 1 << i)
}
