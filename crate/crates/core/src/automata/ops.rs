use std::collections::VecDeque;

use rustc_hash::FxHashMap;

use super::{AutomataError, Nfa, StateSet, Transition};
use crate::alphabet::{all_symbols, zero_symbol, Projection, Symbol, VarTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolMode {
    And,
    Or,
}

/// Re-expresses `a` over the larger table `vars`; new tracks are don't-care.
pub fn cylindrify(a: &Nfa, vars: &VarTable) -> Result<Nfa, AutomataError> {
    if !a.vars().is_subset_of(vars) {
        return Err(AutomataError::TableMismatch);
    }
    let map: Vec<usize> = a
        .vars()
        .names()
        .iter()
        .map(|n| vars.track(n).expect("checked subset"))
        .collect();
    let lift = |s: Symbol| {
        let (mut care, mut value) = (0u64, 0u64);
        for (from, &to) in map.iter().enumerate() {
            care |= (s.care() >> from & 1) << to;
            value |= (s.value() >> from & 1) << to;
        }
        Symbol::new(care, value)
    };
    Nfa::new(
        vars.clone(),
        a.num_states(),
        a.initial().ones(),
        a.finals().ones(),
        a.transitions().iter().map(|t| Transition {
            symbol: lift(t.symbol),
            ..*t
        }),
    )
}

/// Intersection (synchronous product over reachable pairs) or union
/// (disjoint sum) of two automata over the same table.
pub fn product(a: &Nfa, b: &Nfa, mode: BoolMode) -> Result<Nfa, AutomataError> {
    if a.vars() != b.vars() {
        return Err(AutomataError::TableMismatch);
    }
    match mode {
        BoolMode::And => intersection(a, b),
        BoolMode::Or => union(a, b),
    }
}

fn intersection(a: &Nfa, b: &Nfa) -> Result<Nfa, AutomataError> {
    let mut ids: FxHashMap<(usize, usize), usize> = FxHashMap::default();
    let mut queue = VecDeque::new();
    let mut initial = Vec::new();
    for p in a.initial().ones() {
        for q in b.initial().ones() {
            let id = ids.len();
            ids.insert((p, q), id);
            queue.push_back((p, q));
            initial.push(id);
        }
    }
    let mut transitions = Vec::new();
    let mut finals = Vec::new();
    while let Some((p, q)) = queue.pop_front() {
        let src = ids[&(p, q)];
        if a.finals().contains(p) && b.finals().contains(q) {
            finals.push(src);
        }
        for &(sa, pa) in a.successors(p) {
            for &(sb, qb) in b.successors(q) {
                let Some(symbol) = sa.meet(sb) else { continue };
                let next = ids.len();
                let dst = *ids.entry((pa, qb)).or_insert_with(|| {
                    queue.push_back((pa, qb));
                    next
                });
                transitions.push(Transition { src, symbol, dst });
            }
        }
    }
    Nfa::new(a.vars().clone(), ids.len(), initial, finals, transitions)
}

fn union(a: &Nfa, b: &Nfa) -> Result<Nfa, AutomataError> {
    let off = a.num_states();
    let shift = |t: &Transition| Transition {
        src: t.src + off,
        dst: t.dst + off,
        ..*t
    };
    Nfa::new(
        a.vars().clone(),
        off + b.num_states(),
        a.initial().ones().chain(b.initial().ones().map(|q| q + off)),
        a.finals().ones().chain(b.finals().ones().map(|q| q + off)),
        a.transitions()
            .iter()
            .copied()
            .chain(b.transitions().iter().map(shift)),
    )
}

/// Removes states that are unreachable from an initial state or cannot reach
/// a final state. The language is unchanged.
pub fn trim(a: &Nfa) -> Result<Nfa, AutomataError> {
    let forward = closure(a.initial().clone(), |q| {
        a.successors(q).iter().map(|&(_, d)| d).collect()
    });
    let backward = closure(a.finals().clone(), |q| {
        a.predecessors(q).iter().map(|&(_, p)| p).collect()
    });
    let mut keep = forward;
    keep.intersect_with(&backward);
    let remap: FxHashMap<usize, usize> = keep.ones().enumerate().map(|(i, q)| (q, i)).collect();
    let n = remap.len();
    if n == a.num_states() {
        return Ok(a.clone());
    }
    Nfa::new(
        a.vars().clone(),
        n,
        a.initial().ones().filter_map(|q| remap.get(&q).copied()),
        a.finals().ones().filter_map(|q| remap.get(&q).copied()),
        a.transitions().iter().filter_map(|t| {
            Some(Transition {
                src: *remap.get(&t.src)?,
                symbol: t.symbol,
                dst: *remap.get(&t.dst)?,
            })
        }),
    )
}

fn closure(start: StateSet, step: impl Fn(usize) -> Vec<usize>) -> StateSet {
    let mut seen = start.clone();
    let mut stack: Vec<usize> = start.ones().collect();
    while let Some(q) = stack.pop() {
        for d in step(q) {
            if !seen.put(d) {
                stack.push(d);
            }
        }
    }
    seen
}

/// Determinizes by the subset construction (reachable subsets only) and swaps
/// final and non-final states. `budget` bounds the number of subset states.
pub fn complement(a: &Nfa, budget: usize) -> Result<Nfa, AutomataError> {
    let width = a.vars().len();
    let symbols: Vec<Symbol> = all_symbols(width).collect();
    let mut ids: FxHashMap<StateSet, usize> = FxHashMap::default();
    let mut order: Vec<StateSet> = Vec::new();
    ids.insert(a.initial().clone(), 0);
    order.push(a.initial().clone());
    let mut transitions = Vec::new();
    let mut next = 0;
    while next < order.len() {
        let current = order[next].clone();
        for &sym in &symbols {
            let target = a.post(sym, &current);
            let dst = match ids.get(&target) {
                Some(&d) => d,
                None => {
                    if order.len() >= budget {
                        return Err(AutomataError::Budget(budget));
                    }
                    let d = order.len();
                    ids.insert(target.clone(), d);
                    order.push(target);
                    d
                }
            };
            transitions.push(Transition {
                src: next,
                symbol: sym,
                dst,
            });
        }
        next += 1;
    }
    let finals = order
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_disjoint(a.finals()))
        .map(|(i, _)| i);
    Nfa::new(a.vars().clone(), order.len(), [0], finals, transitions)
}

/// Existential quantification of `block`: projects the block out of every
/// transition symbol and extends the final states with every state that
/// reaches a final state over zero symbols.
pub fn project_exists<S: AsRef<str>>(a: &Nfa, block: &[S]) -> Result<Nfa, AutomataError> {
    if block.is_empty() {
        return Ok(a.clone());
    }
    let proj = Projection::new(a.vars(), block)?;
    let projected = Nfa::new(
        proj.reduced().clone(),
        a.num_states(),
        a.initial().ones(),
        a.finals().ones(),
        a.transitions().iter().map(|t| Transition {
            symbol: proj.project(t.symbol),
            ..*t
        }),
    )?;
    let zero = zero_symbol(proj.reduced());
    let mut finals = projected.finals().clone();
    loop {
        let mut grown = projected.pre(zero, &finals);
        grown.union_with(&finals);
        if grown == finals {
            break;
        }
        finals = grown;
    }
    Nfa::new(
        proj.reduced().clone(),
        projected.num_states(),
        projected.initial().ones(),
        finals.ones(),
        projected.transitions().iter().copied(),
    )
}

/// Searches words of length ≤ `max_len` for one that is accepted while its
/// extension by the zero symbol is rejected. Words reaching the same state
/// set are explored once, so the search is exhaustive over all words.
pub fn encoding_closure_witness(a: &Nfa, max_len: usize) -> Option<Vec<Symbol>> {
    let zero = zero_symbol(a.vars());
    let symbols: Vec<Symbol> = all_symbols(a.vars().len()).collect();
    let mut seen: FxHashMap<StateSet, usize> = FxHashMap::default();
    let mut frontier = vec![(a.initial().clone(), Vec::new())];
    seen.insert(a.initial().clone(), 0);
    for depth in 0..=max_len {
        let mut next = Vec::new();
        for (set, word) in frontier {
            if !set.is_disjoint(a.finals()) && a.post(zero, &set).is_disjoint(a.finals()) {
                return Some(word);
            }
            if depth == max_len {
                continue;
            }
            for &sym in &symbols {
                let target = a.post(sym, &set);
                if seen.get(&target).is_some_and(|&d| d <= depth + 1) {
                    continue;
                }
                seen.insert(target.clone(), depth + 1);
                let mut w = word.clone();
                w.push(sym);
                next.push((target, w));
            }
        }
        frontier = next;
    }
    None
}
