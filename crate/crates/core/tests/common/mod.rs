//! Explicit subset-construction oracle and random generators shared by the
//! integration tests.
//!
//! Encoding (same as `TermArena::denote`): elements of `Q_0` are base state
//! indices; an element of `Q_k`, `k ≥ 1`, is a subset of `Q_{k−1}` given as
//! the bitmask of its members' indices.

#![allow(dead_code)]

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use rand::rngs::StdRng;
use rand::Rng;

use ws1s_nested::alphabet::{Symbol, VarTable};
use ws1s_nested::automata::{Nfa, Transition};
use ws1s_nested::terms::{universe_size, TermArena, TermId};

pub struct Explicit<'a> {
    nfa: &'a Nfa,
    /// `X_1, X_2, …` as masks.
    blocks: Vec<u64>,
    /// `(j, ω)` ↦ table of `post[Δ_j♯, ω](S)` for every `S ⊆ Q_j`.
    tables: HashMap<(usize, Symbol), Vec<u64>>,
}

impl<'a> Explicit<'a> {
    pub fn new(nfa: &'a Nfa, blocks: Vec<u64>) -> Self {
        Explicit {
            nfa,
            blocks,
            tables: HashMap::new(),
        }
    }

    pub fn universe(&self, k: usize) -> usize {
        universe_size(self.nfa.num_states(), k).expect("small universe")
    }

    fn expand(&self, k: usize, tau: Symbol) -> Vec<Symbol> {
        tau.expand_block(self.blocks[k - 1]).collect()
    }

    /// Base successors of one state over every transition compatible with `ω`.
    fn base_post(&self, omega: Symbol, q: usize) -> u64 {
        self.nfa
            .successors(q)
            .iter()
            .filter(|(s, _)| s.compatible(omega))
            .fold(0, |m, &(_, d)| m | 1 << d)
    }

    /// `post[Δ_j♯, ω]` on all subsets of `Q_j`, by dynamic programming over
    /// the lowest member.
    fn table(&mut self, j: usize, omega: Symbol) -> &Vec<u64> {
        if !self.tables.contains_key(&(j, omega)) {
            let u = self.universe(j);
            assert!(u <= 20, "explicit table too large");
            let single: Vec<u64> = (0..u).map(|x| self.post_sharp_single(j, omega, x)).collect();
            let mut t = vec![0u64; 1 << u];
            for s in 1..(1usize << u) {
                let low = s.trailing_zeros() as usize;
                t[s] = t[s & (s - 1)] | single[low];
            }
            self.tables.insert((j, omega), t);
        }
        &self.tables[&(j, omega)]
    }

    /// `post[Δ_j♯, ω]({x})` as a set of `Q_j` elements, encoded as a mask.
    fn post_sharp_single(&mut self, j: usize, omega: Symbol, x: usize) -> u64 {
        if j == 0 {
            return self.base_post(omega, x);
        }
        self.expand(j + 1, omega)
            .into_iter()
            .fold(0, |m, w| m | 1 << self.table(j - 1, w)[x])
    }

    /// `post[Δ_k, ω](s)` for `k ≥ 1`: the unique successor of `s ∈ Q_k`.
    pub fn post_plain(&mut self, k: usize, omega: Symbol, s: usize) -> usize {
        self.table(k - 1, omega)[s] as usize
    }

    /// The successors of `s ∈ Q_k` under `Δ_k♯` and `τ`.
    pub fn post_sharp(&mut self, k: usize, tau: Symbol, s: usize) -> Vec<usize> {
        if k == 0 {
            let m = self.base_post(tau, s);
            return (0..64).filter(|q| m >> q & 1 == 1).collect();
        }
        self.expand(k + 1, tau)
            .into_iter()
            .map(|w| self.post_plain(k, w, s))
            .collect()
    }

    fn image(&mut self, k: usize, d: &FixedBitSet, keep: impl Fn(&[usize], &FixedBitSet) -> bool, sharp: Option<Symbol>, plain: Option<Symbol>) -> FixedBitSet {
        let u = self.universe(k);
        let mut out = FixedBitSet::with_capacity(u);
        for s in 0..u {
            let succ = match (sharp, plain) {
                (Some(tau), _) => self.post_sharp(k, tau, s),
                (None, Some(w)) => vec![self.post_plain(k, w, s)],
                _ => unreachable!(),
            };
            out.set(s, keep(&succ, d));
        }
        out
    }

    pub fn pre_sharp(&mut self, k: usize, tau: Symbol, d: &FixedBitSet) -> FixedBitSet {
        self.image(k, d, |succ, d| succ.iter().any(|&y| d.contains(y)), Some(tau), None)
    }

    pub fn cpre_sharp(&mut self, k: usize, tau: Symbol, d: &FixedBitSet) -> FixedBitSet {
        self.image(k, d, |succ, d| succ.iter().all(|&y| d.contains(y)), Some(tau), None)
    }

    /// `pre[Δ_k, ω]` on the determinized (unprojected) level `k ≥ 1`.
    pub fn pre_plain(&mut self, k: usize, omega: Symbol, d: &FixedBitSet) -> FixedBitSet {
        self.image(k, d, |succ, d| succ.iter().any(|&y| d.contains(y)), None, Some(omega))
    }

    pub fn cpre_plain(&mut self, k: usize, omega: Symbol, d: &FixedBitSet) -> FixedBitSet {
        self.image(k, d, |succ, d| succ.iter().all(|&y| d.contains(y)), None, Some(omega))
    }

    /// Explicit `F0♯`.
    pub fn base_fsharp(&mut self, zero: Symbol) -> FixedBitSet {
        let mut z = self.nfa.finals().clone();
        loop {
            let mut next = self.pre_sharp(0, zero, &z);
            next.union_with(&z);
            if next == z {
                return z;
            }
            z = next;
        }
    }

    /// `lfp Z. start ∪ pre[Δ_k♯, τ](Z)`.
    pub fn lfp(&mut self, k: usize, tau: Symbol, start: &FixedBitSet) -> FixedBitSet {
        let mut z = start.clone();
        loop {
            let mut next = self.pre_sharp(k, tau, &z);
            next.union_with(start);
            if next == z {
                return z;
            }
            z = next;
        }
    }

    /// `gfp Z. start ∩ cpre[Δ_k♯, τ](Z)`.
    pub fn gfp(&mut self, k: usize, tau: Symbol, start: &FixedBitSet) -> FixedBitSet {
        let mut z = start.clone();
        loop {
            let mut next = self.cpre_sharp(k, tau, &z);
            next.intersect_with(start);
            if next == z {
                return z;
            }
            z = next;
        }
    }

    /// `↑⊗{D}` as a subset of `Q_{k+1}`, for `D ⊆ Q_k`.
    pub fn up_choice(&self, k: usize, d: &FixedBitSet) -> FixedBitSet {
        let mask = to_mask(d);
        let u = self.universe(k + 1);
        let mut out = FixedBitSet::with_capacity(u);
        for s in 0..u {
            out.set(s, s as u64 & mask != 0);
        }
        out
    }

    /// `↓{D}` as a subset of `Q_{k+1}`.
    pub fn down(&self, k: usize, d: &FixedBitSet) -> FixedBitSet {
        let mask = to_mask(d);
        let u = self.universe(k + 1);
        let mut out = FixedBitSet::with_capacity(u);
        for s in 0..u {
            out.set(s, s as u64 & !mask == 0);
        }
        out
    }
}

pub fn to_mask(set: &FixedBitSet) -> u64 {
    set.ones().fold(0u64, |m, i| m | 1 << i)
}

/// Index of `I_{k−1}` as an element of `Q_k`, for `k ≥ 1`.
pub fn initial_chain(initial: &FixedBitSet, k: usize) -> usize {
    let mut index = to_mask(initial) as usize;
    for _ in 1..k {
        index = 1 << index;
    }
    index
}

/// A random NFA with `n` states over `width` tracks; transition symbols may
/// leave tracks don't-care.
pub fn random_nfa(rng: &mut StdRng, n: usize, width: usize) -> Nfa {
    let names: Vec<String> = (0..width).map(|i| format!("V{i}")).collect();
    let vars = VarTable::from_names(&names).unwrap();
    let full = (1u64 << width) - 1;
    let count = rng.gen_range(0..=3 * n);
    let transitions: Vec<Transition> = (0..count)
        .map(|_| Transition {
            src: rng.gen_range(0..n),
            symbol: Symbol::new(rng.gen::<u64>() & full, rng.gen::<u64>() & full),
            dst: rng.gen_range(0..n),
        })
        .collect();
    let initial: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
    let finals: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
    Nfa::new(vars, n, initial, finals, transitions).unwrap()
}

/// Splits the tracks `0..width` among `count` blocks, empty blocks allowed.
pub fn random_blocks(rng: &mut StdRng, width: usize, count: usize) -> Vec<u64> {
    let mut blocks = vec![0u64; count];
    for t in 0..width {
        if rng.gen_bool(0.75) {
            blocks[rng.gen_range(0..count)] |= 1 << t;
        }
    }
    blocks
}

/// A random term of exactly `level`, unpruned, with up to `fanout` children
/// per node.
pub fn random_term(rng: &mut StdRng, arena: &mut TermArena, level: usize, fanout: usize) -> TermId {
    if level == 0 {
        let n = arena.num_states();
        let states: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        return arena.base(states).unwrap();
    }
    let width = rng.gen_range(0..=fanout);
    let kids: Vec<TermId> = (0..width)
        .map(|_| random_term(rng, arena, level - 1, fanout))
        .collect();
    arena.raw(level, &kids).unwrap()
}

/// Every total symbol over the tracks of `care`.
pub fn symbols_over(care: u64) -> Vec<Symbol> {
    Symbol::new(care, 0).expand_block(care).collect()
}

/// Number of checks of each kind performed by [`lemma_trial`].
#[derive(Debug, Default, Clone, Copy)]
pub struct TrialCounts {
    pub base_pre: usize,
    pub lemma1: usize,
    pub lemma2: usize,
    pub lemma1_level3: usize,
    pub single_cpre: usize,
    pub single_pre: usize,
    pub choice_meet: usize,
    pub fixpoints: usize,
    pub verdicts: usize,
}

impl TrialCounts {
    pub fn add(&mut self, o: TrialCounts) {
        self.base_pre += o.base_pre;
        self.lemma1 += o.lemma1;
        self.lemma2 += o.lemma2;
        self.lemma1_level3 += o.lemma1_level3;
        self.single_cpre += o.single_cpre;
        self.single_pre += o.single_pre;
        self.choice_meet += o.choice_meet;
        self.fixpoints += o.fixpoints;
        self.verdicts += o.verdicts;
    }
}

fn expect_eq(what: &str, got: &FixedBitSet, want: &FixedBitSet) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!(
            "{what}: symbolic {:?} explicit {:?}",
            got.ones().collect::<Vec<_>>(),
            want.ones().collect::<Vec<_>>()
        ))
    }
}

/// One random automaton, checked against the explicit construction:
/// symbolic `pre`/`cpre` on every level up to 2 (3 when `|Q0| ≤ 2`),
/// the single-generator unprojected steps, the choice-intersection identity,
/// the first fixpoints with monotone iterates, and the verdicts for `m ≤ 2`.
pub fn lemma_trial(seed: u64) -> Result<TrialCounts, String> {
    use rand::SeedableRng;
    use ws1s_nested::engine::{Engine, LevelContext};
    use ws1s_nested::terms::DEFAULT_DENOTE_GUARD as GUARD;

    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(1..=4);
    let width = rng.gen_range(1..=2);
    let nfa = random_nfa(&mut rng, n, width);
    let blocks = random_blocks(&mut rng, width, 4);
    let ctx_err = |e| format!("seed {seed}: {e}");
    let mut explicit = Explicit::new(&nfa, blocks.clone());
    let mut engine = Engine::new(LevelContext::new(&nfa, blocks.clone()).map_err(ctx_err)?, 1 << 20);
    let mut c = TrialCounts::default();
    let fail = |m: String| format!("seed {seed} (n={n}, blocks={blocks:?}): {m}");

    macro_rules! den {
        ($t:expr) => {
            engine.terms().denote($t, GUARD).map_err(|e| fail(e.to_string()))?
        };
    }
    macro_rules! eng {
        ($e:expr) => {
            $e.map_err(|e| fail(e.to_string()))?
        };
    }

    // Level 0.
    let t0 = random_term(&mut rng, engine.terms_mut(), 0, 0);
    for tau in symbols_over(engine.ctx().care(1)) {
        let got = eng!(engine.sym_pre(t0, tau));
        let want = explicit.pre_sharp(0, tau, &den!(t0));
        expect_eq("base pre", &den!(got), &want).map_err(fail)?;
        c.base_pre += 1;
    }

    // cpre at level 1.
    let t1 = random_term(&mut rng, engine.terms_mut(), 1, 3);
    for tau in symbols_over(engine.ctx().care(2)) {
        let got = eng!(engine.sym_cpre(t1, tau));
        let want = explicit.cpre_sharp(1, tau, &den!(t1));
        expect_eq("cpre level 1", &den!(got), &want).map_err(fail)?;
        c.lemma1 += 1;
    }

    // pre at level 2.
    let t2 = random_term(&mut rng, engine.terms_mut(), 2, 3);
    for tau in symbols_over(engine.ctx().care(3)) {
        let got = eng!(engine.sym_pre(t2, tau));
        let want = explicit.pre_sharp(2, tau, &den!(t2));
        expect_eq("pre level 2", &den!(got), &want).map_err(fail)?;
        c.lemma2 += 1;
    }

    // cpre at level 3.
    if n <= 2 {
        let t3 = random_term(&mut rng, engine.terms_mut(), 3, 2);
        for tau in symbols_over(engine.ctx().care(4)) {
            let got = eng!(engine.sym_cpre(t3, tau));
            let want = explicit.cpre_sharp(3, tau, &den!(t3));
            expect_eq("cpre level 3", &den!(got), &want).map_err(fail)?;
            c.lemma1_level3 += 1;
        }
    }

    // Single generator, unprojected: cpre[Δ1, ω](↑⊗{R}) and pre[Δ2, ω](↓{R}).
    // Emptying X_{i+1} makes Δ_i♯ coincide with Δ_i.
    {
        let mut b1 = blocks.clone();
        b1[1] = 0;
        let mut one = Engine::new(LevelContext::new(&nfa, b1).map_err(ctx_err)?, 1 << 20);
        let r = random_term(&mut rng, one.terms_mut(), 0, 0);
        let t = eng!(one.terms_mut().raw(1, &[r]));
        let d = one.terms().denote(t, GUARD).unwrap();
        for omega in symbols_over(engine.ctx().care(1)) {
            let got = eng!(one.sym_cpre(t, omega));
            let want = explicit.cpre_plain(1, omega, &d);
            expect_eq("single cpre", &one.terms().denote(got, GUARD).unwrap(), &want).map_err(fail)?;
            c.single_cpre += 1;
        }

        let mut b2 = blocks.clone();
        b2[2] = 0;
        let mut two = Engine::new(LevelContext::new(&nfa, b2).map_err(ctx_err)?, 1 << 20);
        let r = random_term(&mut rng, two.terms_mut(), 1, 3);
        let t = eng!(two.terms_mut().raw(2, &[r]));
        let d = two.terms().denote(t, GUARD).unwrap();
        for omega in symbols_over(engine.ctx().care(2)) {
            let got = eng!(two.sym_pre(t, omega));
            let want = explicit.pre_plain(2, omega, &d);
            expect_eq("single pre", &two.terms().denote(got, GUARD).unwrap(), &want).map_err(fail)?;
            c.single_pre += 1;
        }
    }

    // ↑⊗X ∩ ↑⊗Y = ↑⊗(X ∪ Y).
    let top = if n <= 2 { 3 } else { 1 };
    for level in (1..=top).step_by(2) {
        let a = random_term(&mut rng, engine.terms_mut(), level, 3);
        let b = random_term(&mut rng, engine.terms_mut(), level, 3);
        let mut union = engine.terms().children(a).to_vec();
        union.extend_from_slice(engine.terms().children(b));
        let ab = eng!(engine.terms_mut().raw(level, &union));
        let mut meet = den!(a);
        meet.intersect_with(&den!(b));
        expect_eq("choice meet", &den!(ab), &meet).map_err(fail)?;
        c.choice_meet += 1;
    }

    // Fixpoints F0♯, N1♯, F2♯ with monotone iterates.
    let f0 = eng!(engine.base_fsharp());
    let f0_explicit = explicit.base_fsharp(engine.ctx().zero(1));
    expect_eq("F0♯", &den!(f0), &f0_explicit).map_err(fail)?;

    let zero2 = engine.ctx().zero(2);
    let mut z = eng!(engine.terms_mut().compose(1, &[f0]));
    let mut prev = den!(z);
    loop {
        let image = eng!(engine.sym_cpre(z, zero2));
        let mut gens = vec![f0];
        gens.extend_from_slice(engine.terms().children(image));
        let next = eng!(engine.terms_mut().compose(1, &gens));
        let d = den!(next);
        if !d.is_subset(&prev) {
            return Err(fail("N1 iterates not decreasing".into()));
        }
        if d == prev {
            break;
        }
        prev = d;
        z = next;
    }
    let n1 = eng!(engine.fixpoint_nsharp(1, f0));
    let n1_start = explicit.up_choice(0, &f0_explicit);
    let n1_explicit = explicit.gfp(1, zero2, &n1_start);
    expect_eq("N1♯", &den!(n1), &n1_explicit).map_err(fail)?;
    expect_eq("N1♯ iterates", &prev, &n1_explicit).map_err(fail)?;

    let zero3 = engine.ctx().zero(3);
    let mut z = eng!(engine.terms_mut().compose(2, &[n1]));
    let mut prev = den!(z);
    loop {
        let image = eng!(engine.sym_pre(z, zero3));
        let mut gens = vec![n1];
        gens.extend_from_slice(engine.terms().children(image));
        let next = eng!(engine.terms_mut().compose(2, &gens));
        let d = den!(next);
        if !prev.is_subset(&d) {
            return Err(fail("F2 iterates not increasing".into()));
        }
        if d == prev {
            break;
        }
        prev = d;
        z = next;
    }
    let f2 = eng!(engine.fixpoint_fsharp(2, n1));
    let f2_start = explicit.down(1, &n1_explicit);
    let f2_explicit = explicit.lfp(2, zero3, &f2_start);
    expect_eq("F2♯", &den!(f2), &f2_explicit).map_err(fail)?;
    expect_eq("F2♯ iterates", &prev, &f2_explicit).map_err(fail)?;
    c.fixpoints += 3;

    // Verdicts for m = 1, 2.
    for m in 1..=2 {
        let mut e = Engine::new(LevelContext::new(&nfa, blocks[..m].to_vec()).map_err(ctx_err)?, 1 << 20);
        let (_, valid) = eng!(e.run());
        let z1 = explicit.base_fsharp(e.ctx().zero(1));
        let top = explicit.up_choice(0, &z1);
        let want = if m == 1 {
            !top.contains(initial_chain(nfa.initial(), 1))
        } else {
            let n1 = explicit.gfp(1, e.ctx().zero(2), &top);
            explicit.down(1, &n1).contains(initial_chain(nfa.initial(), 2))
        };
        if valid != want {
            return Err(fail(format!("verdict m={m}: symbolic {valid} explicit {want}")));
        }
        c.verdicts += 1;
    }
    Ok(c)
}
