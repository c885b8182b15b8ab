use std::collections::BTreeSet;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;

use super::AutomataError;
use crate::alphabet::{Symbol, VarTable};

/// A set of automaton states.
pub type StateSet = FixedBitSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub src: usize,
    pub symbol: Symbol,
    pub dst: usize,
}

/// A nondeterministic finite automaton over the symbols of a [`VarTable`].
///
/// States are dense indices `0..num_states`. Transition symbols may leave
/// tracks as don't-care; a transition fires on every total symbol it is
/// compatible with.
#[derive(Debug, Clone)]
pub struct Nfa {
    vars: VarTable,
    num_states: usize,
    initial: StateSet,
    finals: StateSet,
    transitions: Vec<Transition>,
    succ: Vec<Vec<(Symbol, usize)>>,
    pred: Vec<Vec<(Symbol, usize)>>,
}

pub(crate) fn state_set(n: usize, members: impl IntoIterator<Item = usize>) -> StateSet {
    let mut s = FixedBitSet::with_capacity(n);
    for m in members {
        s.insert(m);
    }
    s
}

impl Nfa {
    pub fn new(
        vars: VarTable,
        num_states: usize,
        initial: impl IntoIterator<Item = usize>,
        finals: impl IntoIterator<Item = usize>,
        transitions: impl IntoIterator<Item = Transition>,
    ) -> Result<Self, AutomataError> {
        let initial: Vec<usize> = initial.into_iter().collect();
        let finals: Vec<usize> = finals.into_iter().collect();
        let full = vars.full_mask();
        let mut set = BTreeSet::new();
        for t in transitions {
            if t.src >= num_states || t.dst >= num_states {
                return Err(AutomataError::StateOutOfRange(t.src.max(t.dst)));
            }
            if t.symbol.care() & !full != 0 {
                return Err(AutomataError::SymbolOutsideTable);
            }
            set.insert(t);
        }
        if let Some(&bad) = initial.iter().chain(&finals).find(|&&q| q >= num_states) {
            return Err(AutomataError::StateOutOfRange(bad));
        }
        let transitions: Vec<Transition> = set.into_iter().collect();
        let mut succ = vec![Vec::new(); num_states];
        let mut pred = vec![Vec::new(); num_states];
        for t in &transitions {
            succ[t.src].push((t.symbol, t.dst));
            pred[t.dst].push((t.symbol, t.src));
        }
        Ok(Nfa {
            vars,
            num_states,
            initial: state_set(num_states, initial),
            finals: state_set(num_states, finals),
            transitions,
            succ,
            pred,
        })
    }

    pub fn vars(&self) -> &VarTable {
        &self.vars
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial(&self) -> &StateSet {
        &self.initial
    }

    pub fn finals(&self) -> &StateSet {
        &self.finals
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn successors(&self, q: usize) -> &[(Symbol, usize)] {
        &self.succ[q]
    }

    pub fn predecessors(&self, q: usize) -> &[(Symbol, usize)] {
        &self.pred[q]
    }

    pub fn empty_set(&self) -> StateSet {
        FixedBitSet::with_capacity(self.num_states)
    }

    pub fn set_of(&self, members: impl IntoIterator<Item = usize>) -> StateSet {
        state_set(self.num_states, members)
    }

    /// States reachable from `states` by one transition compatible with `t`.
    pub fn post(&self, t: Symbol, states: &StateSet) -> StateSet {
        let mut out = self.empty_set();
        for s in states.ones() {
            for &(sym, d) in &self.succ[s] {
                if sym.compatible(t) {
                    out.insert(d);
                }
            }
        }
        out
    }

    /// States with a transition compatible with `t` into `states`.
    pub fn pre(&self, t: Symbol, states: &StateSet) -> StateSet {
        let mut out = self.empty_set();
        for s in states.ones() {
            for &(sym, p) in &self.pred[s] {
                if sym.compatible(t) {
                    out.insert(p);
                }
            }
        }
        out
    }

    /// States all of whose `t`-successors lie in `states`; states without a
    /// `t`-successor qualify vacuously.
    pub fn cpre(&self, t: Symbol, states: &StateSet) -> StateSet {
        let mut out = self.empty_set();
        for q in 0..self.num_states {
            let inside = self.succ[q]
                .iter()
                .all(|&(sym, d)| !sym.compatible(t) || states.contains(d));
            if inside {
                out.insert(q);
            }
        }
        out
    }

    /// Whether the automaton has an accepting run over `word`.
    pub fn accepts(&self, word: &[Symbol]) -> bool {
        let mut current = self.initial.clone();
        for &sym in word {
            current = self.post(sym, &current);
            if current.is_clear() {
                return false;
            }
        }
        !current.is_disjoint(&self.finals)
    }

    /// Whether the empty word is accepted, i.e. some state is both initial and final.
    pub fn accepts_empty(&self) -> bool {
        !self.initial.is_disjoint(&self.finals)
    }

    /// Line-based dump: `VARS`, `STATES`, `INITIAL`, `FINAL`, then one
    /// `TRANS src symbol dst` per transition.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let join = |s: &StateSet| {
            s.ones()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "VARS {}", self.vars.names().join(" "));
        let _ = writeln!(out, "STATES {}", self.num_states);
        let _ = writeln!(out, "INITIAL {}", join(&self.initial));
        let _ = writeln!(out, "FINAL {}", join(&self.finals));
        for t in &self.transitions {
            let _ = writeln!(out, "TRANS {} {} {}", t.src, t.symbol.render(&self.vars), t.dst);
        }
        out
    }

    /// Parses the format produced by [`Nfa::dump`].
    pub fn parse_dump(text: &str) -> Result<Self, AutomataError> {
        let bad = |line: usize, msg: &str| AutomataError::Dump {
            line: line + 1,
            message: msg.to_string(),
        };
        let mut vars = VarTable::new();
        let mut states = None;
        let mut initial = Vec::new();
        let mut finals = Vec::new();
        let mut transitions = Vec::new();
        let numbers = |rest: &str, line: usize| -> Result<Vec<usize>, AutomataError> {
            rest.split_whitespace()
                .map(|w| w.parse().map_err(|_| bad(line, "expected a state number")))
                .collect()
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
            match head {
                "VARS" => {
                    vars = VarTable::from_names(rest.split_whitespace())
                        .map_err(|e| bad(i, &e.to_string()))?;
                }
                "STATES" => {
                    states = Some(rest.trim().parse().map_err(|_| bad(i, "bad state count"))?)
                }
                "INITIAL" => initial = numbers(rest, i)?,
                "FINAL" => finals = numbers(rest, i)?,
                "TRANS" => {
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    let [src, sym, dst] = parts[..] else {
                        return Err(bad(i, "expected `TRANS src symbol dst`"));
                    };
                    let symbol = parse_symbol(sym, &vars).ok_or_else(|| bad(i, "bad symbol"))?;
                    transitions.push(Transition {
                        src: src.parse().map_err(|_| bad(i, "bad source"))?,
                        symbol,
                        dst: dst.parse().map_err(|_| bad(i, "bad target"))?,
                    });
                }
                _ => return Err(bad(i, "unknown directive")),
            }
        }
        let n = states.ok_or_else(|| bad(0, "missing STATES"))?;
        Nfa::new(vars, n, initial, finals, transitions)
    }
}

fn parse_symbol(text: &str, vars: &VarTable) -> Option<Symbol> {
    let inner = text.strip_prefix('⟨')?.strip_suffix('⟩')?;
    let (mut care, mut value) = (0u64, 0u64);
    if inner.is_empty() {
        return Some(Symbol::new(0, 0));
    }
    for part in inner.split(',') {
        let (name, bit) = part.split_once('↦')?;
        let track = vars.track(name)?;
        match bit {
            "0" => care |= 1 << track,
            "1" => {
                care |= 1 << track;
                value |= 1 << track;
            }
            "?" => {}
            _ => return None,
        }
    }
    Some(Symbol::new(care, value))
}
