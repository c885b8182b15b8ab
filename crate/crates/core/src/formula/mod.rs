//! WS1S formulas over second-order variables: syntax tree, concrete syntax,
//! desugaring, closure and prenex normalization.

mod parser;
mod prenex;

use std::fmt;

pub use parser::{parse_formula, ParseError};
pub use prenex::{negate_literal_normal, to_prenex, PrenexFormula, Quantifier};

/// A second-order variable name.
pub type Var = String;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `X sub Y`
    Sub(Var, Var),
    /// `sing X`
    Sing(Var),
    /// `X = {0}`
    Zeroth(Var),
    /// `X = Y + 1`
    Succ(Var, Var),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Exists(Vec<Var>, Box<Formula>),
    Forall(Vec<Var>, Box<Formula>),
}

/// What a free-variable formula is closed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Validity,
    Satisfiability,
}

impl Formula {
    pub fn sub(x: &str, y: &str) -> Formula {
        Formula::Sub(x.into(), y.into())
    }

    pub fn sing(x: &str) -> Formula {
        Formula::Sing(x.into())
    }

    pub fn zeroth(x: &str) -> Formula {
        Formula::Zeroth(x.into())
    }

    pub fn succ(x: &str, y: &str) -> Formula {
        Formula::Succ(x.into(), y.into())
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn exists<S: AsRef<str>>(vars: &[S], body: Formula) -> Formula {
        Formula::Exists(
            vars.iter().map(|v| v.as_ref().to_string()).collect(),
            Box::new(body),
        )
    }

    pub fn forall<S: AsRef<str>>(vars: &[S], body: Formula) -> Formula {
        Formula::Forall(
            vars.iter().map(|v| v.as_ref().to_string()).collect(),
            Box::new(body),
        )
    }

    pub fn is_atom(&self) -> bool {
        matches!(
            self,
            Formula::Sub(..) | Formula::Sing(_) | Formula::Zeroth(_) | Formula::Succ(..)
        )
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Exists(..) | Formula::Forall(..) => false,
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Not(a) => a.is_quantifier_free(),
            _ => true,
        }
    }

    /// Whether negation occurs only directly above atoms and there are no
    /// quantifiers.
    pub fn is_literal_normal(&self) -> bool {
        match self {
            Formula::Not(a) => a.is_atom(),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.is_literal_normal() && b.is_literal_normal()
            }
            Formula::Exists(..) | Formula::Forall(..) => false,
            _ => true,
        }
    }

    /// Variables of an atom, in argument order.
    pub fn atom_vars(&self) -> Vec<&Var> {
        match self {
            Formula::Sub(x, y) | Formula::Succ(x, y) => vec![x, y],
            Formula::Sing(x) | Formula::Zeroth(x) => vec![x],
            _ => Vec::new(),
        }
    }

    /// Every variable occurrence (binders included), in first-occurrence order.
    pub fn all_variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.walk_vars(&mut |v| {
            if !out.iter().any(|o| o == v) {
                out.push(v.clone());
            }
        });
        out
    }

    fn walk_vars(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.walk_vars(f);
                b.walk_vars(f);
            }
            Formula::Not(a) => a.walk_vars(f),
            Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
                vs.iter().for_each(&mut *f);
                body.walk_vars(f);
            }
            atom => atom.atom_vars().into_iter().for_each(f),
        }
    }

    pub fn pretty(&self) -> String {
        self.to_string()
    }
}

/// Free variables of `f` in first-occurrence order.
pub fn free_variables(f: &Formula) -> Vec<Var> {
    fn go(f: &Formula, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        match f {
            Formula::And(a, b) | Formula::Or(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Formula::Not(a) => go(a, bound, out),
            Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
                let depth = bound.len();
                bound.extend(vs.iter().cloned());
                go(body, bound, out);
                bound.truncate(depth);
            }
            atom => {
                for v in atom.atom_vars() {
                    if !bound.contains(v) && !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

/// Replaces every universal quantifier `all2 Xs: ψ` by `~ex2 Xs: ~ψ`.
pub fn desugar(f: &Formula) -> Formula {
    match f {
        Formula::Forall(vs, body) => Formula::not(Formula::Exists(
            vs.clone(),
            Box::new(Formula::not(desugar(body))),
        )),
        Formula::Exists(vs, body) => Formula::Exists(vs.clone(), Box::new(desugar(body))),
        Formula::And(a, b) => Formula::and(desugar(a), desugar(b)),
        Formula::Or(a, b) => Formula::or(desugar(a), desugar(b)),
        Formula::Not(a) => Formula::not(desugar(a)),
        atom => atom.clone(),
    }
}

/// Binds every free variable of `f`: universally for validity, existentially
/// for satisfiability. Ground formulas are returned unchanged.
pub fn close(f: &Formula, task: Task) -> Formula {
    let free = free_variables(f);
    if free.is_empty() {
        return f.clone();
    }
    match task {
        Task::Satisfiability => Formula::Exists(free, Box::new(f.clone())),
        Task::Validity => Formula::not(Formula::Exists(free, Box::new(Formula::not(f.clone())))),
    }
}

// Printing precedence: quantifiers (and negations of them) extend to the
// right as far as possible, so they are parenthesized when followed by more
// input.
fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Exists(..) | Formula::Forall(..) => 0,
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        Formula::Not(a) => {
            if precedence(a) == 0 {
                0
            } else {
                3
            }
        }
        _ => 4,
    }
}

impl Formula {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8, last: bool) -> fmt::Result {
        let p = precedence(self);
        let paren = p < min && !(p == 0 && last);
        if paren {
            write!(f, "(")?;
        }
        match self {
            Formula::Sub(x, y) => write!(f, "{x} sub {y}")?,
            Formula::Sing(x) => write!(f, "sing {x}")?,
            Formula::Zeroth(x) => write!(f, "{x} = {{0}}")?,
            Formula::Succ(x, y) => write!(f, "{x} = {y} + 1")?,
            Formula::And(a, b) => {
                a.fmt_prec(f, 2, false)?;
                write!(f, " & ")?;
                b.fmt_prec(f, 3, last || paren)?;
            }
            Formula::Or(a, b) => {
                a.fmt_prec(f, 1, false)?;
                write!(f, " | ")?;
                b.fmt_prec(f, 2, last || paren)?;
            }
            Formula::Not(a) => {
                write!(f, "~")?;
                a.fmt_prec(f, 3, last || paren)?;
            }
            Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
                let kw = if matches!(self, Formula::Exists(..)) {
                    "ex2"
                } else {
                    "all2"
                };
                write!(f, "{kw} {}: ", vs.join(", "))?;
                body.fmt_prec(f, 0, true)?;
            }
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0, true)
    }
}
