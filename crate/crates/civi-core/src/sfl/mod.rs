//! Symbolic fluents, fluent temporal formulas over finite traces, and the
//! translations to state-based form.

pub mod maps;
pub mod trace;
pub mod validate;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::compose::ComposeError;
use crate::model::instance::InstanceError;
use crate::model::successor::StepError;
use crate::model::{Component, Domain, Name, Sort};

pub use maps::{build_b, build_r, build_t};
pub use trace::{check_trace, fluent_run, language_member, trace_satisfies_always};
pub use validate::{validate_fluent, FluentCheck, FluentCheckKind, FluentReport};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SflError {
    #[error("unknown fluent {0}")]
    UnknownFluent(Name),
    #[error("free variable {0} in fluent formula")]
    FreeVariable(Name),
    #[error("fluent {fluent} takes {expected} arguments, got {got}")]
    ArityMismatch {
        fluent: Name,
        expected: usize,
        got: usize,
    },
    #[error("fluents share the state variable {0}")]
    SharedVariable(Name),
    #[error("temporal operator has no state-based counterpart here")]
    TemporalNotAllowed,
    #[error("trace index {index} out of range 0..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("fluent {0} has no initial state under this instance")]
    NoInitialState(Name),
    #[error("fluent {fluent} is non-deterministic: {detail}")]
    NonDeterministicFluent { fluent: Name, detail: String },
    #[error("action {action} of fluent {fluent} is not enabled: {detail}")]
    NotEnabled {
        fluent: Name,
        action: Name,
        detail: String,
    },
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("internal: {0}")]
    Internal(String),
}

/// A symbolic fluent: argument sorts, the tracked variable, and a
/// deterministic always-enabled machine owning exactly that variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Fluent {
    pub name: Name,
    pub arg_sorts: Vec<Sort>,
    pub var: Name,
    pub machine: Component,
}

impl Fluent {
    pub fn var_sort(&self) -> Option<&Sort> {
        self.machine.var_sort(&self.var)
    }

    pub fn alphabet(&self) -> BTreeSet<Name> {
        self.machine.alphabet()
    }
}

/// Fluent temporal formulas. Core connectives are `Until`, `Next`,
/// `Exists`, `Not`, `Or`, and fluent atoms; the rest are sugar kept in the
/// tree so printing preserves the source shape. Equality between quantified
/// variables is accepted as an extra atom.
#[derive(Debug, Clone, PartialEq)]
pub enum SflFormula {
    True,
    False,
    Atom {
        fluent: Arc<Fluent>,
        args: Vec<Name>,
    },
    VarEq(Name, Name),
    Not(Box<SflFormula>),
    Or(Box<SflFormula>, Box<SflFormula>),
    Until(Box<SflFormula>, Box<SflFormula>),
    Next(Box<SflFormula>),
    Exists {
        var: Name,
        domain: Domain,
        body: Box<SflFormula>,
    },
    // sugar
    And(Box<SflFormula>, Box<SflFormula>),
    Implies(Box<SflFormula>, Box<SflFormula>),
    Forall {
        var: Name,
        domain: Domain,
        body: Box<SflFormula>,
    },
    Always(Box<SflFormula>),
    Eventually(Box<SflFormula>),
}

impl SflFormula {
    pub fn not(a: SflFormula) -> SflFormula {
        SflFormula::Not(Box::new(a))
    }

    pub fn or(a: SflFormula, b: SflFormula) -> SflFormula {
        SflFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: SflFormula, b: SflFormula) -> SflFormula {
        SflFormula::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: SflFormula, b: SflFormula) -> SflFormula {
        SflFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn until(a: SflFormula, b: SflFormula) -> SflFormula {
        SflFormula::Until(Box::new(a), Box::new(b))
    }

    pub fn always(a: SflFormula) -> SflFormula {
        SflFormula::Always(Box::new(a))
    }

    /// True iff the formula contains no temporal operator; such formulas can
    /// head an action invariant.
    pub fn non_temporal(&self) -> bool {
        match self {
            SflFormula::Until(..)
            | SflFormula::Next(..)
            | SflFormula::Always(..)
            | SflFormula::Eventually(..) => false,
            SflFormula::True | SflFormula::False | SflFormula::Atom { .. } | SflFormula::VarEq(..) => {
                true
            }
            SflFormula::Not(a) => a.non_temporal(),
            SflFormula::Or(a, b) | SflFormula::And(a, b) | SflFormula::Implies(a, b) => {
                a.non_temporal() && b.non_temporal()
            }
            SflFormula::Exists { body, .. } | SflFormula::Forall { body, .. } => body.non_temporal(),
        }
    }

    /// Rewrites all sugar into the core `¬ / ∨ / U / X / ∃` fragment.
    pub fn desugar(&self) -> SflFormula {
        match self {
            SflFormula::True | SflFormula::False | SflFormula::Atom { .. } | SflFormula::VarEq(..) => {
                self.clone()
            }
            SflFormula::Not(a) => SflFormula::not(a.desugar()),
            SflFormula::Or(a, b) => SflFormula::or(a.desugar(), b.desugar()),
            SflFormula::Until(a, b) => SflFormula::until(a.desugar(), b.desugar()),
            SflFormula::Next(a) => SflFormula::Next(Box::new(a.desugar())),
            SflFormula::Exists { var, domain, body } => SflFormula::Exists {
                var: var.clone(),
                domain: domain.clone(),
                body: Box::new(body.desugar()),
            },
            SflFormula::And(a, b) => SflFormula::not(SflFormula::or(
                SflFormula::not(a.desugar()),
                SflFormula::not(b.desugar()),
            )),
            SflFormula::Implies(a, b) => SflFormula::or(SflFormula::not(a.desugar()), b.desugar()),
            SflFormula::Forall { var, domain, body } => SflFormula::not(SflFormula::Exists {
                var: var.clone(),
                domain: domain.clone(),
                body: Box::new(SflFormula::not(body.desugar())),
            }),
            SflFormula::Always(a) => SflFormula::not(SflFormula::until(
                SflFormula::True,
                SflFormula::not(a.desugar()),
            )),
            SflFormula::Eventually(a) => SflFormula::until(SflFormula::True, a.desugar()),
        }
    }

    /// All fluents, deduplicated by name in order of first occurrence.
    pub fn fluents(&self) -> Vec<Arc<Fluent>> {
        let mut out: Vec<Arc<Fluent>> = Vec::new();
        self.visit(&mut |f| {
            if let SflFormula::Atom { fluent, .. } = f {
                if !out.iter().any(|g| g.name == fluent.name) {
                    out.push(fluent.clone());
                }
            }
        });
        out
    }

    /// The alphabet: union of the fluent machines' alphabets.
    pub fn alphabet(&self) -> BTreeSet<Name> {
        self.fluents()
            .iter()
            .flat_map(|f| f.alphabet())
            .collect()
    }

    /// Parameters quantified over, plus those of the fluent machines.
    pub fn params(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            SflFormula::Exists { domain, .. } | SflFormula::Forall { domain, .. } => {
                if let Domain::Param(p) = domain {
                    out.insert(p.clone());
                }
            }
            SflFormula::Atom { fluent, .. } => {
                out.extend(fluent.machine.params.iter().cloned());
            }
            _ => {}
        });
        out
    }

    /// Variables used as fluent arguments (or in equations) that no
    /// quantifier binds.
    pub fn free_vars(&self) -> BTreeSet<Name> {
        fn walk(f: &SflFormula, scope: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
            match f {
                SflFormula::Atom { args, .. } => {
                    for a in args {
                        if !scope.contains(a) {
                            out.insert(a.clone());
                        }
                    }
                }
                SflFormula::VarEq(a, b) => {
                    for n in [a, b] {
                        if !scope.contains(n) {
                            out.insert(n.clone());
                        }
                    }
                }
                SflFormula::Exists { var, body, .. } | SflFormula::Forall { var, body, .. } => {
                    scope.push(var.clone());
                    walk(body, scope, out);
                    scope.pop();
                }
                SflFormula::Not(a)
                | SflFormula::Next(a)
                | SflFormula::Always(a)
                | SflFormula::Eventually(a) => walk(a, scope, out),
                SflFormula::Or(a, b)
                | SflFormula::And(a, b)
                | SflFormula::Implies(a, b)
                | SflFormula::Until(a, b) => {
                    walk(a, scope, out);
                    walk(b, scope, out);
                }
                SflFormula::True | SflFormula::False => {}
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn visit(&self, f: &mut impl FnMut(&SflFormula)) {
        f(self);
        match self {
            SflFormula::True
            | SflFormula::False
            | SflFormula::Atom { .. }
            | SflFormula::VarEq(..) => {}
            SflFormula::Not(a)
            | SflFormula::Next(a)
            | SflFormula::Always(a)
            | SflFormula::Eventually(a) => a.visit(f),
            SflFormula::Or(a, b)
            | SflFormula::And(a, b)
            | SflFormula::Implies(a, b)
            | SflFormula::Until(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            SflFormula::Exists { body, .. } | SflFormula::Forall { body, .. } => body.visit(f),
        }
    }

    fn conjuncts(&self) -> Vec<&SflFormula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a SflFormula, out: &mut Vec<&'a SflFormula>) {
            match f {
                SflFormula::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    fn rename_free(&self, from: &Name, to: &Name) -> SflFormula {
        match self {
            SflFormula::Atom { fluent, args } => SflFormula::Atom {
                fluent: fluent.clone(),
                args: args
                    .iter()
                    .map(|a| if a == from { to.clone() } else { a.clone() })
                    .collect(),
            },
            SflFormula::VarEq(a, b) => {
                let ren = |n: &Name| if n == from { to.clone() } else { n.clone() };
                SflFormula::VarEq(ren(a), ren(b))
            }
            SflFormula::Exists { var, domain, body } | SflFormula::Forall { var, domain, body } => {
                let body = if var == from {
                    body.clone()
                } else {
                    Box::new(body.rename_free(from, to))
                };
                match self {
                    SflFormula::Exists { .. } => SflFormula::Exists {
                        var: var.clone(),
                        domain: domain.clone(),
                        body,
                    },
                    _ => SflFormula::Forall {
                        var: var.clone(),
                        domain: domain.clone(),
                        body,
                    },
                }
            }
            SflFormula::Not(a) => SflFormula::not(a.rename_free(from, to)),
            SflFormula::Next(a) => SflFormula::Next(Box::new(a.rename_free(from, to))),
            SflFormula::Always(a) => SflFormula::Always(Box::new(a.rename_free(from, to))),
            SflFormula::Eventually(a) => SflFormula::Eventually(Box::new(a.rename_free(from, to))),
            SflFormula::Or(a, b) => SflFormula::or(a.rename_free(from, to), b.rename_free(from, to)),
            SflFormula::And(a, b) => {
                SflFormula::and(a.rename_free(from, to), b.rename_free(from, to))
            }
            SflFormula::Implies(a, b) => {
                SflFormula::implies(a.rename_free(from, to), b.rename_free(from, to))
            }
            SflFormula::Until(a, b) => {
                SflFormula::until(a.rename_free(from, to), b.rename_free(from, to))
            }
            SflFormula::True | SflFormula::False => self.clone(),
        }
    }

    /// Canonical form for bridge matching: conjunctions flattened and sorted
    /// by display text, binders renamed positionally.
    pub fn canonicalize(&self) -> SflFormula {
        fn norm(f: &SflFormula, depth: &mut usize) -> SflFormula {
            match f {
                SflFormula::And(..) => {
                    let mut parts: Vec<SflFormula> =
                        f.conjuncts().iter().map(|c| norm(c, depth)).collect();
                    parts.sort_by_key(|p| p.to_string());
                    let mut it = parts.into_iter();
                    let first = it.next().unwrap_or(SflFormula::True);
                    it.fold(first, SflFormula::and)
                }
                SflFormula::Exists { var, domain, body } | SflFormula::Forall { var, domain, body } => {
                    let fresh: Name = crate::model::name(&format!("x{depth}"));
                    *depth += 1;
                    let renamed = body.rename_free(var, &fresh);
                    let inner = norm(&renamed, depth);
                    *depth -= 1;
                    let body = Box::new(inner);
                    match f {
                        SflFormula::Exists { .. } => SflFormula::Exists {
                            var: fresh,
                            domain: domain.clone(),
                            body,
                        },
                        _ => SflFormula::Forall {
                            var: fresh,
                            domain: domain.clone(),
                            body,
                        },
                    }
                }
                SflFormula::Not(a) => SflFormula::not(norm(a, depth)),
                SflFormula::Or(a, b) => SflFormula::or(norm(a, depth), norm(b, depth)),
                SflFormula::Implies(a, b) => SflFormula::implies(norm(a, depth), norm(b, depth)),
                SflFormula::Until(a, b) => SflFormula::until(norm(a, depth), norm(b, depth)),
                SflFormula::Next(a) => SflFormula::Next(Box::new(norm(a, depth))),
                SflFormula::Always(a) => SflFormula::Always(Box::new(norm(a, depth))),
                SflFormula::Eventually(a) => SflFormula::Eventually(Box::new(norm(a, depth))),
                leaf => leaf.clone(),
            }
        }
        norm(self, &mut 0)
    }
}

impl fmt::Display for SflFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sfl(f, self, 0)
    }
}

fn sfl_prec(f: &SflFormula) -> u8 {
    match f {
        SflFormula::Exists { .. } | SflFormula::Forall { .. } => 0,
        SflFormula::Implies(..) => 2,
        SflFormula::Or(..) => 3,
        SflFormula::And(..) => 4,
        SflFormula::Until(..) => 5,
        SflFormula::Not(..)
        | SflFormula::Next(..)
        | SflFormula::Always(..)
        | SflFormula::Eventually(..) => 6,
        SflFormula::VarEq(..) => 7,
        _ => 10,
    }
}

fn write_sfl(f: &mut fmt::Formatter<'_>, e: &SflFormula, min_prec: u8) -> fmt::Result {
    if sfl_prec(e) < min_prec {
        write!(f, "(")?;
        write_sfl(f, e, 0)?;
        return write!(f, ")");
    }
    match e {
        SflFormula::True => write!(f, "TRUE"),
        SflFormula::False => write!(f, "FALSE"),
        SflFormula::Atom { fluent, args } => {
            write!(f, "{}(", fluent.name)?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")
        }
        SflFormula::VarEq(a, b) => write!(f, "{a} = {b}"),
        SflFormula::Not(a) => {
            write!(f, "~")?;
            write_sfl(f, a, 6)
        }
        SflFormula::Or(a, b) => {
            write_sfl(f, a, 3)?;
            write!(f, " \\/ ")?;
            write_sfl(f, b, 4)
        }
        SflFormula::And(a, b) => {
            write_sfl(f, a, 4)?;
            write!(f, " /\\ ")?;
            write_sfl(f, b, 5)
        }
        SflFormula::Implies(a, b) => {
            write_sfl(f, a, 3)?;
            write!(f, " => ")?;
            write_sfl(f, b, 2)
        }
        SflFormula::Until(a, b) => {
            write_sfl(f, a, 6)?;
            write!(f, " U ")?;
            write_sfl(f, b, 5)
        }
        SflFormula::Next(a) => {
            write!(f, "X ")?;
            write_sfl(f, a, 6)
        }
        SflFormula::Always(a) => {
            write!(f, "[]")?;
            write_sfl(f, a, 6)
        }
        SflFormula::Eventually(a) => {
            write!(f, "<>")?;
            write_sfl(f, a, 6)
        }
        SflFormula::Exists { var, domain, body } => {
            write!(f, "\\E {var} \\in {} : ", crate::parser::pretty::domain_text(domain))?;
            write_sfl(f, body, 0)
        }
        SflFormula::Forall { var, domain, body } => {
            write!(f, "\\A {var} \\in {} : ", crate::parser::pretty::domain_text(domain))?;
            write_sfl(f, body, 0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn always_true_desugars_to_core_form() {
        let d = SflFormula::always(SflFormula::True).desugar();
        assert_eq!(
            d,
            SflFormula::not(SflFormula::until(
                SflFormula::True,
                SflFormula::not(SflFormula::True)
            ))
        );
    }

    #[test]
    fn non_temporal_detection() {
        let a = SflFormula::and(SflFormula::True, SflFormula::False);
        assert!(a.non_temporal());
        assert!(!SflFormula::always(SflFormula::True).non_temporal());
        assert!(!SflFormula::Next(Box::new(SflFormula::True)).non_temporal());
    }

    #[test]
    fn canonicalize_orders_conjuncts() {
        let a = SflFormula::and(SflFormula::True, SflFormula::False);
        let b = SflFormula::and(SflFormula::False, SflFormula::True);
        assert_eq!(a.canonicalize(), b.canonicalize());
    }
}
