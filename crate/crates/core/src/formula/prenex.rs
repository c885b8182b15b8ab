use std::collections::HashSet;
use std::fmt;

use super::{free_variables, Formula, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    fn dual(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

/// A quantifier prefix (outermost block first) over a quantifier-free matrix
/// whose negations sit directly above atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrenexFormula {
    pub prefix: Vec<(Quantifier, Vec<Var>)>,
    pub matrix: Formula,
}

impl PrenexFormula {
    pub fn to_formula(&self) -> Formula {
        self.prefix
            .iter()
            .rev()
            .fold(self.matrix.clone(), |body, (q, vs)| match q {
                Quantifier::Exists => Formula::Exists(vs.clone(), Box::new(body)),
                Quantifier::Forall => Formula::Forall(vs.clone(), Box::new(body)),
            })
    }

    pub fn bound_variables(&self) -> Vec<Var> {
        self.prefix.iter().flat_map(|(_, vs)| vs.iter().cloned()).collect()
    }

    pub fn free_variables(&self) -> Vec<Var> {
        let bound = self.bound_variables();
        free_variables(&self.matrix)
            .into_iter()
            .filter(|v| !bound.contains(v))
            .collect()
    }

    pub fn is_ground(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Checks the structural invariants: literal-normal matrix, non-empty
    /// duplicate-free blocks that are pairwise disjoint.
    pub fn is_well_formed(&self) -> bool {
        let mut seen = HashSet::new();
        self.matrix.is_literal_normal()
            && self
                .prefix
                .iter()
                .all(|(_, vs)| !vs.is_empty() && vs.iter().all(|v| seen.insert(v.clone())))
    }

    /// Variables in order of first occurrence: prefix (outermost first), then
    /// the free variables of the matrix.
    pub fn variable_order(&self) -> Vec<Var> {
        let mut order = self.bound_variables();
        for v in free_variables(&self.matrix) {
            if !order.contains(&v) {
                order.push(v);
            }
        }
        order
    }
}

impl fmt::Display for PrenexFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// Pushes a negation of a literal-normal quantifier-free formula down to the
/// atoms, cancelling double negations.
pub fn negate_literal_normal(f: &Formula) -> Formula {
    pull(f, true, &mut Vec::new())
}

/// Converts a formula to prenex form. Quantifiers are pulled outward left to
/// right; bound variables are renamed apart whenever a name is reused or
/// clashes with a free variable.
pub fn to_prenex(f: &Formula) -> PrenexFormula {
    let mut used: HashSet<Var> = f.all_variables().into_iter().collect();
    let mut claimed: HashSet<Var> = free_variables(f).into_iter().collect();
    let renamed = rename_apart(f, &mut Vec::new(), &mut used, &mut claimed);
    let mut prefix = Vec::new();
    let matrix = pull(&renamed, false, &mut prefix);
    PrenexFormula { prefix, matrix }
}

fn fresh(base: &str, used: &mut HashSet<Var>) -> Var {
    (1..)
        .map(|n| format!("{base}{n}"))
        .find(|cand| !used.contains(cand))
        .inspect(|name| {
            used.insert(name.clone());
        })
        .expect("unbounded counter")
}

fn rename_apart(
    f: &Formula,
    scope: &mut Vec<(Var, Var)>,
    used: &mut HashSet<Var>,
    claimed: &mut HashSet<Var>,
) -> Formula {
    let lookup = |v: &Var, scope: &Vec<(Var, Var)>| {
        scope
            .iter()
            .rev()
            .find(|(from, _)| from == v)
            .map_or_else(|| v.clone(), |(_, to)| to.clone())
    };
    match f {
        Formula::Sub(x, y) => Formula::Sub(lookup(x, scope), lookup(y, scope)),
        Formula::Succ(x, y) => Formula::Succ(lookup(x, scope), lookup(y, scope)),
        Formula::Sing(x) => Formula::Sing(lookup(x, scope)),
        Formula::Zeroth(x) => Formula::Zeroth(lookup(x, scope)),
        Formula::And(a, b) => Formula::and(
            rename_apart(a, scope, used, claimed),
            rename_apart(b, scope, used, claimed),
        ),
        Formula::Or(a, b) => Formula::or(
            rename_apart(a, scope, used, claimed),
            rename_apart(b, scope, used, claimed),
        ),
        Formula::Not(a) => Formula::not(rename_apart(a, scope, used, claimed)),
        Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
            let depth = scope.len();
            let mut names = Vec::with_capacity(vs.len());
            for v in vs {
                let name = if claimed.contains(v) {
                    fresh(v, used)
                } else {
                    v.clone()
                };
                claimed.insert(name.clone());
                scope.push((v.clone(), name.clone()));
                names.push(name);
            }
            let body = Box::new(rename_apart(body, scope, used, claimed));
            scope.truncate(depth);
            if matches!(f, Formula::Exists(..)) {
                Formula::Exists(names, body)
            } else {
                Formula::Forall(names, body)
            }
        }
    }
}

fn pull(f: &Formula, negated: bool, prefix: &mut Vec<(Quantifier, Vec<Var>)>) -> Formula {
    match f {
        Formula::Not(a) => pull(a, !negated, prefix),
        Formula::And(a, b) | Formula::Or(a, b) => {
            let a = pull(a, negated, prefix);
            let b = pull(b, negated, prefix);
            let conj = matches!(f, Formula::And(..)) != negated;
            if conj {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
        Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
            let q = if matches!(f, Formula::Exists(..)) {
                Quantifier::Exists
            } else {
                Quantifier::Forall
            };
            prefix.push((if negated { q.dual() } else { q }, vs.clone()));
            pull(body, negated, prefix)
        }
        atom if negated => Formula::not(atom.clone()),
        atom => atom.clone(),
    }
}
