//! Formula families, single runs in either mode, and corpus comparisons.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{decide_classical, DEFAULT_STATE_BUDGET};
use crate::engine::{decide_nested, normalize_prefix_with_budget, NestedOptions};
use crate::formula::{close, desugar, to_prenex, Formula, Task};
use crate::terms::DEFAULT_TERM_BUDGET;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("unknown formula family `{0}`")]
    UnknownFamily(String),
    #[error("chain family needs n ≥ 2 and 1 ≤ k ≤ n−1, got n={n}, k={k}")]
    ChainRange { n: usize, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Classical,
    Antichain,
    Both,
}

impl Mode {
    fn classical(self) -> bool {
        self != Mode::Antichain
    }

    fn antichain(self) -> bool {
        self != Mode::Classical
    }
}

/// Text of a family member in the formula grammar.
///
/// `chain` with parameters `n`, `k` states that no ascending chain
/// `X1 ⊂ … ⊂ Xn` leaves a set `Y` once inside it; the prefix is
/// `∃Y ¬∃X1 ¬… ¬∃Xk,…,Xn` and the matrix
/// `⋀_{i<n} (Xi ⊆ Y ∧ Xi ⊂ Xi+1) ⇒ Xi+1 ⊆ Y` with `⊂` written as
/// `⊆ ∧ ¬⊇` and `⇒` as `¬a ∨ b`.
pub fn generate_family(name: &str, n: usize, k: usize) -> Result<String, BenchError> {
    if name != "chain" {
        return Err(BenchError::UnknownFamily(name.to_string()));
    }
    if n < 2 || k < 1 || k > n - 1 {
        return Err(BenchError::ChainRange { n, k });
    }
    let mut text = String::from("ex2 Y: ");
    for i in 1..k {
        let _ = write!(text, "~ex2 X{i}: ");
    }
    let last: Vec<String> = (k..=n).map(|i| format!("X{i}")).collect();
    let _ = write!(text, "~ex2 {}: ", last.join(", "));
    let conjuncts: Vec<String> = (1..n)
        .map(|i| {
            let j = i + 1;
            format!("(~(X{i} sub Y & (X{i} sub X{j} & ~X{j} sub X{i})) | X{j} sub Y)")
        })
        .collect();
    text.push_str(&conjuncts.join(" & "));
    Ok(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Term-node cap of the nested procedure.
    pub term_budget: usize,
    /// State cap of the classical procedure and of matrix compilation.
    pub state_budget: usize,
    pub trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            term_budget: DEFAULT_TERM_BUDGET,
            state_budget: DEFAULT_STATE_BUDGET,
            trace: false,
        }
    }
}

/// Outcome of one formula in one or both modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub formula_id: String,
    pub task: Task,
    pub mode: Mode,
    pub classical_verdict: Option<bool>,
    pub antichain_verdict: Option<bool>,
    /// States of the matrix automaton.
    pub base_states: Option<usize>,
    /// Sum of the states of all automata the classical procedure built.
    pub classical_total_states: Option<usize>,
    /// Distinct term nodes the nested procedure created.
    pub antichain_term_nodes: Option<usize>,
    pub fixpoint_iterations: Vec<usize>,
    pub classical_millis: Option<f64>,
    pub antichain_millis: Option<f64>,
    /// Both modes ran and returned different verdicts.
    pub disagreement: bool,
    pub resource_exhausted: bool,
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<String>,
}

impl RunReport {
    /// The agreed verdict, or the only one computed.
    pub fn verdict(&self) -> Option<bool> {
        match (self.classical_verdict, self.antichain_verdict) {
            (Some(a), Some(b)) => (a == b).then_some(a),
            (a, b) => a.or(b),
        }
    }

    fn fail(&mut self, message: String, resource: bool) {
        self.resource_exhausted |= resource;
        self.error = Some(match self.error.take() {
            Some(prev) => format!("{prev}; {message}"),
            None => message,
        });
    }
}

/// Decides `f` under `task` in the selected mode(s).
pub fn run(id: &str, f: &Formula, task: Task, mode: Mode, opts: &RunOptions) -> RunReport {
    let mut report = RunReport {
        formula_id: id.to_string(),
        task,
        mode,
        classical_verdict: None,
        antichain_verdict: None,
        base_states: None,
        classical_total_states: None,
        antichain_term_nodes: None,
        fixpoint_iterations: Vec::new(),
        classical_millis: None,
        antichain_millis: None,
        disagreement: false,
        resource_exhausted: false,
        error: None,
        trace: Vec::new(),
    };
    let g = to_prenex(&desugar(&close(f, task)));
    if mode.classical() {
        match decide_classical(&g, opts.state_budget) {
            Ok(out) => {
                report.classical_verdict = Some(out.valid);
                report.base_states = Some(out.stats.matrix_states);
                report.classical_total_states = Some(out.stats.total_states);
                report.classical_millis = Some(out.stats.millis);
            }
            Err(e) => {
                let resource = matches!(e, crate::automata::AutomataError::Budget(_));
                report.fail(format!("classical: {e}"), resource);
            }
        }
    }
    if mode.antichain() {
        let nested = normalize_prefix_with_budget(&g, opts.state_budget).and_then(|spec| {
            let nopts = NestedOptions {
                budget: opts.term_budget,
                trace: opts.trace,
            };
            decide_nested(&spec, &nopts)
        });
        match nested {
            Ok(out) => {
                report.antichain_verdict = Some(out.valid);
                report.base_states = Some(out.stats.base_states);
                report.antichain_term_nodes = Some(out.stats.term_nodes);
                report.fixpoint_iterations = out.stats.iterations;
                report.antichain_millis = Some(out.stats.millis);
                report.trace = out.trace;
            }
            Err(e) => report.fail(format!("antichain: {e}"), e.is_resource()),
        }
    }
    if let (Some(a), Some(b)) = (report.classical_verdict, report.antichain_verdict) {
        report.disagreement = a != b;
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusItem {
    pub id: String,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub reports: Vec<RunReport>,
    pub instances: usize,
    /// Instances where both modes produced a verdict.
    pub compared: usize,
    pub agreements: usize,
    pub disagreements: usize,
    pub errors: usize,
    /// `agreements / compared`; 1.0 for an empty comparison.
    pub agreement_rate: f64,
}

impl CorpusReport {
    /// Per-instance `term nodes / classical states`, where both exist.
    pub fn term_state_ratios(&self) -> Vec<(String, f64)> {
        self.reports
            .iter()
            .filter_map(|r| {
                let terms = r.antichain_term_nodes? as f64;
                let states = r.classical_total_states? as f64;
                Some((r.formula_id.clone(), terms / states.max(1.0)))
            })
            .collect()
    }

    /// Fixed-width table: verdict, space, and time of both modes.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>14} {:>12} {:>14} {:>12}",
            "formula", "verdict", "classical st.", "classical ms", "antichain tm.", "antichain ms"
        );
        let opt = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
        let ms = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
        for r in &self.reports {
            let verdict = match (r.disagreement, r.verdict()) {
                (true, _) => "DISAGREE",
                (false, Some(true)) => "valid",
                (false, Some(false)) => "invalid",
                (false, None) => "error",
            };
            let _ = writeln!(
                out,
                "{:<16} {:>8} {:>14} {:>12} {:>14} {:>12}",
                r.formula_id,
                verdict,
                opt(r.classical_total_states),
                ms(r.classical_millis),
                opt(r.antichain_term_nodes),
                ms(r.antichain_millis)
            );
        }
        let _ = writeln!(
            out,
            "instances {}  compared {}  agreements {}  disagreements {}  errors {}  agreement rate {:.4}",
            self.instances,
            self.compared,
            self.agreements,
            self.disagreements,
            self.errors,
            self.agreement_rate
        );
        out
    }
}

/// Runs every item in both modes on `workers` threads. Reports keep the
/// order of `items`; a failing run is recorded and the sweep goes on.
pub fn compare_corpus(
    items: &[CorpusItem],
    task: Task,
    opts: &RunOptions,
    workers: usize,
) -> CorpusReport {
    let workers = workers.clamp(1, items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    let reports: Vec<RunReport> = thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .map(|it| run(&it.id, &it.formula, task, Mode::Both, opts))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("corpus worker panicked"))
            .collect()
    });
    let compared = reports
        .iter()
        .filter(|r| r.classical_verdict.is_some() && r.antichain_verdict.is_some())
        .count();
    let disagreements = reports.iter().filter(|r| r.disagreement).count();
    let errors = reports.iter().filter(|r| r.error.is_some()).count();
    let agreements = compared - disagreements;
    CorpusReport {
        instances: reports.len(),
        compared,
        agreements,
        disagreements,
        errors,
        agreement_rate: if compared == 0 {
            1.0
        } else {
            agreements as f64 / compared as f64
        },
        reports,
    }
}

/// Members of the chain family for every `n` in `ns` and valid `k` in `ks`.
pub fn chain_grid(ns: impl IntoIterator<Item = usize>, ks: &[usize]) -> Vec<CorpusItem> {
    let mut items = Vec::new();
    for n in ns {
        for &k in ks {
            if let Ok(text) = generate_family("chain", n, k) {
                let formula = crate::formula::parse_formula(&text).expect("generated text parses");
                items.push(CorpusItem {
                    id: format!("chain-n{n}-k{k}"),
                    formula,
                });
            }
        }
    }
    items
}

/// The variables of the exhaustive corpus.
pub const CORPUS_VARS: [&str; 3] = ["X", "Y", "Z"];

/// The atom pool of the exhaustive corpus, one atom of each kind.
pub fn corpus_atoms() -> Vec<Formula> {
    vec![
        Formula::sub("X", "Y"),
        Formula::sing("Z"),
        Formula::zeroth("Y"),
        Formula::succ("Z", "X"),
    ]
}

/// All matrices over `atoms` with at most `max_connectives` occurrences of
/// `~`, `&`, `|`, up to commutativity of `&`/`|` and without `~~` or
/// binary connectives over two equal operands. Sorted by rendering.
pub fn corpus_matrices(atoms: &[Formula], max_connectives: usize) -> Vec<Formula> {
    let mut by_size: Vec<BTreeMap<String, Formula>> = Vec::new();
    by_size.push(atoms.iter().map(|a| (a.to_string(), a.clone())).collect());
    for c in 1..=max_connectives {
        let mut level = BTreeMap::new();
        for f in by_size[c - 1].values() {
            if !matches!(f, Formula::Not(_)) {
                let g = Formula::not(f.clone());
                level.insert(g.to_string(), g);
            }
        }
        for l in 0..c {
            let r = c - 1 - l;
            if l > r {
                continue;
            }
            for (ka, a) in &by_size[l] {
                for (kb, b) in &by_size[r] {
                    if (l == r && ka >= kb) || ka == kb {
                        continue;
                    }
                    for g in [Formula::and(a.clone(), b.clone()), Formula::or(a.clone(), b.clone())] {
                        level.insert(g.to_string(), g);
                    }
                }
            }
        }
        by_size.push(level);
    }
    by_size.into_iter().flat_map(|m| m.into_values()).collect()
}

/// Prefixes over `vars`: every ordered partition into at most `max_blocks`
/// blocks, each block existential or universal. Outermost block first.
pub fn corpus_prefixes(vars: &[&str], max_blocks: usize) -> Vec<Vec<(bool, Vec<String>)>> {
    let n = vars.len();
    let mut out = Vec::new();
    for blocks in 1..=max_blocks.min(n) {
        let total = blocks.pow(n as u32);
        for code in 0..total {
            let assign: Vec<usize> = (0..n).map(|v| code / blocks.pow(v as u32) % blocks).collect();
            if (0..blocks).any(|b| !assign.contains(&b)) {
                continue;
            }
            let parts: Vec<Vec<String>> = (0..blocks)
                .map(|b| {
                    (0..n)
                        .filter(|&v| assign[v] == b)
                        .map(|v| vars[v].to_string())
                        .collect()
                })
                .collect();
            for quants in 0..(1usize << blocks) {
                out.push(
                    parts
                        .iter()
                        .enumerate()
                        .map(|(b, p)| (quants >> b & 1 == 1, p.clone()))
                        .collect(),
                );
            }
        }
    }
    out
}

fn apply_prefix(prefix: &[(bool, Vec<String>)], matrix: &Formula) -> Formula {
    prefix.iter().rev().fold(matrix.clone(), |body, (universal, block)| {
        if *universal {
            Formula::forall(block, body)
        } else {
            Formula::exists(block, body)
        }
    })
}

/// Ground prenex formulas over [`CORPUS_VARS`]: every prefix of
/// [`corpus_prefixes`] (at most three blocks) in front of every matrix of
/// [`corpus_matrices`] over [`corpus_atoms`].
pub fn exhaustive_corpus(max_connectives: usize) -> Vec<CorpusItem> {
    let matrices = corpus_matrices(&corpus_atoms(), max_connectives);
    let prefixes = corpus_prefixes(&CORPUS_VARS, 3);
    let mut items = Vec::with_capacity(matrices.len() * prefixes.len());
    for (mi, m) in matrices.iter().enumerate() {
        for (pi, p) in prefixes.iter().enumerate() {
            items.push(CorpusItem {
                id: format!("m{mi:04}-p{pi:02}"),
                formula: apply_prefix(p, m),
            });
        }
    }
    items
}
