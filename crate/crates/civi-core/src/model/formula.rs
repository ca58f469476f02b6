//! First-order formula and term AST over sorted values. Formulas and terms
//! share one enum; sortcheck tells them apart.

use std::collections::BTreeSet;
use std::fmt;

use super::{Name, Value};

/// A quantifier / construction domain: a declared parameter or the bounded
/// naturals of the instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Domain {
    Param(Name),
    Nat,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Param(p) => write!(f, "{p}"),
            Domain::Nat => write!(f, "Nat"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, a: u64, b: u64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmpOp::Lt => write!(f, "<"),
            CmpOp::Le => write!(f, "<="),
            CmpOp::Gt => write!(f, ">"),
            CmpOp::Ge => write!(f, ">="),
        }
    }
}

/// Core first-order AST. `UNCHANGED` and other surface sugar are desugared
/// away before this form is built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    NatLit(u64),
    /// Enum literal.
    StrLit(Name),
    /// State variable reference, optionally primed.
    Var { name: Name, primed: bool },
    /// A parameter domain used as a set value.
    Param(Name),
    /// Bound variable: quantified variable or action formal.
    Bound(Name),
    Eq(Box<Formula>, Box<Formula>),
    /// Set membership.
    Mem(Box<Formula>, Box<Formula>),
    SetLit(Vec<Formula>),
    SetUnion(Box<Formula>, Box<Formula>),
    /// `{x \in D : pred}`
    SetFilter {
        var: Name,
        domain: Domain,
        pred: Box<Formula>,
    },
    /// Function application `f[a]` / `f[a, b]`.
    Apply(Box<Formula>, Vec<Formula>),
    /// `[x \in D |-> body]`
    FnBuild {
        var: Name,
        domain: Domain,
        body: Box<Formula>,
    },
    /// `[base EXCEPT ![i][j] = v, ...]` — each update is an index path plus
    /// the replacement value.
    FnExcept {
        base: Box<Formula>,
        updates: Vec<(Vec<Formula>, Formula)>,
    },
    TupleLit(Vec<Formula>),
    TupleProj(Box<Formula>, usize),
    RecordLit(Vec<(Name, Formula)>),
    Field(Box<Formula>, Name),
    Cmp(CmpOp, Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall {
        var: Name,
        domain: Domain,
        body: Box<Formula>,
    },
    Exists {
        var: Name,
        domain: Domain,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn var(n: &Name) -> Formula {
        Formula::Var {
            name: n.clone(),
            primed: false,
        }
    }

    pub fn var_primed(n: &Name) -> Formula {
        Formula::Var {
            name: n.clone(),
            primed: true,
        }
    }

    pub fn eq(a: Formula, b: Formula) -> Formula {
        Formula::Eq(Box::new(a), Box::new(b))
    }

    pub fn neq(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::eq(a, b))
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn mem(a: Formula, b: Formula) -> Formula {
        Formula::Mem(Box::new(a), Box::new(b))
    }

    pub fn apply(f: Formula, args: Vec<Formula>) -> Formula {
        Formula::Apply(Box::new(f), args)
    }

    pub fn forall(var: &Name, domain: Domain, body: Formula) -> Formula {
        Formula::Forall {
            var: var.clone(),
            domain,
            body: Box::new(body),
        }
    }

    pub fn exists(var: &Name, domain: Domain, body: Formula) -> Formula {
        Formula::Exists {
            var: var.clone(),
            domain,
            body: Box::new(body),
        }
    }

    /// Conjunction of a list; `TRUE` when empty.
    pub fn and_all(items: Vec<Formula>) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::True,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Flattens nested conjunctions into a list of conjuncts.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// State variables referenced anywhere in the formula (primed or not).
    pub fn state_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Var { name, .. } = f {
                out.insert(name.clone());
            }
        });
        out
    }

    /// True if any primed variable reference occurs.
    pub fn has_primes(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if let Formula::Var { primed: true, .. } = f {
                found = true;
            }
        });
        found
    }

    /// Parameters referenced, either as domain references or quantifier
    /// domains.
    pub fn params(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Param(p) => {
                out.insert(p.clone());
            }
            Formula::Forall { domain, .. }
            | Formula::Exists { domain, .. }
            | Formula::FnBuild { domain, .. }
            | Formula::SetFilter { domain, .. } => {
                if let Domain::Param(p) = domain {
                    out.insert(p.clone());
                }
            }
            _ => {}
        });
        out
    }

    /// Bound-variable references not bound within the formula itself.
    pub fn free_bound_vars(&self) -> BTreeSet<Name> {
        fn walk(f: &Formula, scope: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
            match f {
                Formula::Bound(n) => {
                    if !scope.contains(n) {
                        out.insert(n.clone());
                    }
                }
                Formula::Forall { var, body, .. }
                | Formula::Exists { var, body, .. }
                | Formula::FnBuild { var, body, .. } => {
                    scope.push(var.clone());
                    walk(body, scope, out);
                    scope.pop();
                }
                Formula::SetFilter { var, pred, .. } => {
                    scope.push(var.clone());
                    walk(pred, scope, out);
                    scope.pop();
                }
                other => {
                    other.for_each_child(&mut |c| walk(c, scope, out));
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Applies `f` to every node, pre-order.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        self.for_each_child(&mut |c| c.visit(f));
    }

    fn for_each_child(&self, f: &mut impl FnMut(&Formula)) {
        match self {
            Formula::True
            | Formula::False
            | Formula::NatLit(_)
            | Formula::StrLit(_)
            | Formula::Var { .. }
            | Formula::Param(_)
            | Formula::Bound(_) => {}
            Formula::Eq(a, b)
            | Formula::Mem(a, b)
            | Formula::SetUnion(a, b)
            | Formula::Cmp(_, a, b)
            | Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                f(a);
                f(b);
            }
            Formula::SetLit(es) | Formula::TupleLit(es) => es.iter().for_each(f),
            Formula::SetFilter { pred, .. } => f(pred),
            Formula::Apply(fun, args) => {
                f(fun);
                args.iter().for_each(f);
            }
            Formula::FnBuild { body, .. } => f(body),
            Formula::FnExcept { base, updates } => {
                f(base);
                for (path, v) in updates {
                    path.iter().for_each(&mut *f);
                    f(v);
                }
            }
            Formula::TupleProj(a, _) | Formula::Field(a, _) | Formula::Not(a) => f(a),
            Formula::RecordLit(fields) => fields.iter().for_each(|(_, e)| f(e)),
            Formula::Forall { body, .. } | Formula::Exists { body, .. } => f(body),
        }
    }

    /// Rewrites every formula node bottom-up.
    pub fn map(&self, f: &impl Fn(Formula) -> Formula) -> Formula {
        let rebuilt = match self {
            Formula::True
            | Formula::False
            | Formula::NatLit(_)
            | Formula::StrLit(_)
            | Formula::Var { .. }
            | Formula::Param(_)
            | Formula::Bound(_) => self.clone(),
            Formula::Eq(a, b) => Formula::eq(a.map(f), b.map(f)),
            Formula::Mem(a, b) => Formula::mem(a.map(f), b.map(f)),
            Formula::SetUnion(a, b) => Formula::SetUnion(Box::new(a.map(f)), Box::new(b.map(f))),
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, Box::new(a.map(f)), Box::new(b.map(f))),
            Formula::And(a, b) => Formula::and(a.map(f), b.map(f)),
            Formula::Or(a, b) => Formula::or(a.map(f), b.map(f)),
            Formula::Implies(a, b) => Formula::implies(a.map(f), b.map(f)),
            Formula::Iff(a, b) => Formula::iff(a.map(f), b.map(f)),
            Formula::SetLit(es) => Formula::SetLit(es.iter().map(|e| e.map(f)).collect()),
            Formula::TupleLit(es) => Formula::TupleLit(es.iter().map(|e| e.map(f)).collect()),
            Formula::SetFilter { var, domain, pred } => Formula::SetFilter {
                var: var.clone(),
                domain: domain.clone(),
                pred: Box::new(pred.map(f)),
            },
            Formula::Apply(fun, args) => {
                Formula::apply(fun.map(f), args.iter().map(|a| a.map(f)).collect())
            }
            Formula::FnBuild { var, domain, body } => Formula::FnBuild {
                var: var.clone(),
                domain: domain.clone(),
                body: Box::new(body.map(f)),
            },
            Formula::FnExcept { base, updates } => Formula::FnExcept {
                base: Box::new(base.map(f)),
                updates: updates
                    .iter()
                    .map(|(path, v)| (path.iter().map(|p| p.map(f)).collect(), v.map(f)))
                    .collect(),
            },
            Formula::TupleProj(a, i) => Formula::TupleProj(Box::new(a.map(f)), *i),
            Formula::Field(a, n) => Formula::Field(Box::new(a.map(f)), n.clone()),
            Formula::RecordLit(fields) => Formula::RecordLit(
                fields
                    .iter()
                    .map(|(n, e)| (n.clone(), e.map(f)))
                    .collect(),
            ),
            Formula::Not(a) => Formula::not(a.map(f)),
            Formula::Forall { var, domain, body } => Formula::Forall {
                var: var.clone(),
                domain: domain.clone(),
                body: Box::new(body.map(f)),
            },
            Formula::Exists { var, domain, body } => Formula::Exists {
                var: var.clone(),
                domain: domain.clone(),
                body: Box::new(body.map(f)),
            },
        };
        f(rebuilt)
    }

    /// Primes every unprimed state-variable reference.
    pub fn primed(&self) -> Formula {
        self.map(&|f| match f {
            Formula::Var { name, primed: false } => Formula::Var { name, primed: true },
            other => other,
        })
    }

    /// Renames state variables according to `renames`, both primed and
    /// unprimed occurrences.
    pub fn rename_vars(&self, renames: &std::collections::BTreeMap<Name, Name>) -> Formula {
        self.map(&|f| match f {
            Formula::Var { name, primed } => match renames.get(&name) {
                Some(new) => Formula::Var {
                    name: new.clone(),
                    primed,
                },
                None => Formula::Var { name, primed },
            },
            other => other,
        })
    }

    /// Capture-avoiding rename of free bound-variable references.
    pub fn rename_free_bound(&self, from: &Name, to: &Name) -> Formula {
        match self {
            Formula::Bound(n) if n == from => Formula::Bound(to.clone()),
            Formula::Forall { var, domain, body } if var != from => Formula::Forall {
                var: var.clone(),
                domain: domain.clone(),
                body: Box::new(body.rename_free_bound(from, to)),
            },
            Formula::Forall { .. } => self.clone(),
            Formula::Exists { var, domain, body } if var != from => Formula::Exists {
                var: var.clone(),
                domain: domain.clone(),
                body: Box::new(body.rename_free_bound(from, to)),
            },
            Formula::Exists { .. } => self.clone(),
            Formula::FnBuild { var, domain, body } if var != from => Formula::FnBuild {
                var: var.clone(),
                domain: domain.clone(),
                body: Box::new(body.rename_free_bound(from, to)),
            },
            Formula::FnBuild { .. } => self.clone(),
            Formula::SetFilter { var, domain, pred } if var != from => Formula::SetFilter {
                var: var.clone(),
                domain: domain.clone(),
                pred: Box::new(pred.rename_free_bound(from, to)),
            },
            Formula::SetFilter { .. } => self.clone(),
            other => other.map(&|f| match f {
                Formula::Bound(n) if &n == from => Formula::Bound(to.clone()),
                g => g,
            }),
        }
    }

    /// Canonical form for bridge matching: conjunctions flattened and sorted
    /// by display text, bound variables renamed to positional names.
    pub fn canonicalize(&self) -> Formula {
        fn norm(f: &Formula, depth: &mut usize) -> Formula {
            match f {
                Formula::And(..) => {
                    let mut parts: Vec<Formula> =
                        f.conjuncts().iter().map(|c| norm(c, depth)).collect();
                    parts.sort_by_key(|p| p.to_string());
                    Formula::and_all(parts)
                }
                Formula::Forall { var, domain, body } | Formula::Exists { var, domain, body } => {
                    let fresh: Name = super::name(&format!("x{depth}"));
                    *depth += 1;
                    let renamed = body.rename_free_bound(var, &fresh);
                    let inner = norm(&renamed, depth);
                    *depth -= 1;
                    match f {
                        Formula::Forall { .. } => Formula::forall(&fresh, domain.clone(), inner),
                        _ => Formula::exists(&fresh, domain.clone(), inner),
                    }
                }
                Formula::Not(a) => Formula::not(norm(a, depth)),
                Formula::Or(a, b) => Formula::or(norm(a, depth), norm(b, depth)),
                Formula::Implies(a, b) => Formula::implies(norm(a, depth), norm(b, depth)),
                Formula::Iff(a, b) => Formula::iff(norm(a, depth), norm(b, depth)),
                Formula::Eq(a, b) => Formula::eq(norm(a, depth), norm(b, depth)),
                Formula::Mem(a, b) => Formula::mem(norm(a, depth), norm(b, depth)),
                leaf => leaf.clone(),
            }
        }
        norm(self, &mut 0)
    }

    /// A value embedded as a literal formula, for CTI re-evaluation and pool
    /// construction.
    pub fn from_value(v: &Value) -> Formula {
        match v {
            Value::Bool(true) => Formula::True,
            Value::Bool(false) => Formula::False,
            Value::Nat(n) => Formula::NatLit(*n),
            Value::Str(s) => Formula::StrLit(s.clone()),
            Value::Atom(_) => {
                // Atoms are instance-level objects with no closed-formula
                // syntax; they only appear in evaluated positions.
                unreachable!("atom values have no formula syntax")
            }
            Value::Set(es) => Formula::SetLit(es.iter().map(Formula::from_value).collect()),
            Value::Tuple(es) => Formula::TupleLit(es.iter().map(Formula::from_value).collect()),
            Value::Record(fs) => Formula::RecordLit(
                fs.iter()
                    .map(|(n, e)| (n.clone(), Formula::from_value(e)))
                    .collect(),
            ),
            Value::Fn(_) => unreachable!("function values have no closed-formula syntax"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::pretty::formula_to_text(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::name;

    #[test]
    fn conjunct_flattening() {
        let f = Formula::and(
            Formula::and(Formula::True, Formula::False),
            Formula::var(&name("x")),
        );
        assert_eq!(f.conjuncts().len(), 3);
    }

    #[test]
    fn primes_and_state_vars() {
        let f = Formula::eq(Formula::var_primed(&name("x")), Formula::var(&name("y")));
        assert!(f.has_primes());
        assert_eq!(f.state_vars().len(), 2);
        assert!(!Formula::var(&name("x")).has_primes());
    }

    #[test]
    fn canonicalize_sorts_conjuncts_and_renames_binders() {
        let ra = name("a");
        let rb = name("b");
        let d = Domain::Param(name("P"));
        let f1 = Formula::and(
            Formula::forall(&ra, d.clone(), Formula::Bound(ra.clone()).into()),
            Formula::True,
        );
        let f2 = Formula::and(
            Formula::True,
            Formula::forall(&rb, d.clone(), Formula::Bound(rb.clone()).into()),
        );
        assert_eq!(f1.canonicalize(), f2.canonicalize());
    }

    #[test]
    fn rename_free_bound_respects_shadowing() {
        let x = name("x");
        let y = name("y");
        let d = Domain::Nat;
        // x free here
        let f = Formula::Bound(x.clone());
        assert_eq!(f.rename_free_bound(&x, &y), Formula::Bound(y.clone()));
        // x bound by the quantifier: no rename inside
        let g = Formula::forall(&x, d, Formula::Bound(x.clone()));
        assert_eq!(g.rename_free_bound(&x, &y), g);
    }
}
