//! The three translations from fluent formulas to state-based form:
//! the composed fluent-machine component, the fluent-to-variable rewrite,
//! and the restricted transition system of an action invariant.

use crate::compose::compose_all;
use crate::model::{name, Component, Formula, Sort};

use super::{SflError, SflFormula};

/// Rewrites a non-temporal fluent formula into a first-order formula over
/// the fluent variables: each atom becomes an application of the fluent's
/// variable to its arguments, connectives map through unchanged.
pub fn build_r(phi: &SflFormula) -> Result<Formula, SflError> {
    match phi {
        SflFormula::True => Ok(Formula::True),
        SflFormula::False => Ok(Formula::False),
        SflFormula::Atom { fluent, args } => {
            let sort = fluent
                .var_sort()
                .ok_or_else(|| SflError::UnknownFluent(fluent.name.clone()))?;
            if args.len() != fluent.arg_sorts.len() {
                return Err(SflError::ArityMismatch {
                    fluent: fluent.name.clone(),
                    expected: fluent.arg_sorts.len(),
                    got: args.len(),
                });
            }
            // Follow the variable's (possibly curried) function shape.
            let mut expr = Formula::var(&fluent.var);
            let mut remaining: &[crate::model::Name] = args;
            let mut cursor = sort.clone();
            while !remaining.is_empty() {
                match cursor {
                    Sort::Fn(arg_sorts, result) => {
                        let take = arg_sorts.len().min(remaining.len());
                        let (now, rest) = remaining.split_at(take);
                        expr = Formula::apply(
                            expr,
                            now.iter().map(|a| Formula::Bound(a.clone())).collect(),
                        );
                        remaining = rest;
                        cursor = *result;
                    }
                    _ => {
                        return Err(SflError::ArityMismatch {
                            fluent: fluent.name.clone(),
                            expected: fluent.arg_sorts.len(),
                            got: args.len(),
                        })
                    }
                }
            }
            Ok(expr)
        }
        SflFormula::VarEq(a, b) => Ok(Formula::eq(
            Formula::Bound(a.clone()),
            Formula::Bound(b.clone()),
        )),
        SflFormula::Not(a) => Ok(Formula::not(build_r(a)?)),
        SflFormula::Or(a, b) => Ok(Formula::or(build_r(a)?, build_r(b)?)),
        SflFormula::And(a, b) => Ok(Formula::and(build_r(a)?, build_r(b)?)),
        SflFormula::Implies(a, b) => Ok(Formula::implies(build_r(a)?, build_r(b)?)),
        SflFormula::Exists { var, domain, body } => {
            Ok(Formula::exists(var, domain.clone(), build_r(body)?))
        }
        SflFormula::Forall { var, domain, body } => {
            Ok(Formula::forall(var, domain.clone(), build_r(body)?))
        }
        SflFormula::Until(..)
        | SflFormula::Next(..)
        | SflFormula::Always(..)
        | SflFormula::Eventually(..) => Err(SflError::TemporalNotAllowed),
    }
}

/// Parallel composition of all fluent machines in the formula. Fluents must
/// not share state variables. Returns `None` when the formula has no
/// fluents (the unit of composition).
pub fn build_b(phi: &SflFormula) -> Result<Option<Component>, SflError> {
    let fluents = phi.fluents();
    if fluents.is_empty() {
        return Ok(None);
    }
    let mut seen_vars = std::collections::BTreeSet::new();
    for f in &fluents {
        if !seen_vars.insert(f.var.clone()) {
            return Err(SflError::SharedVariable(f.var.clone()));
        }
    }
    let machines: Vec<Component> = fluents.iter().map(|f| f.machine.clone()).collect();
    let mut composed = compose_all(&machines)?;
    composed.name = name(&format!(
        "B_{}",
        fluents
            .iter()
            .map(|f| f.name.to_string())
            .collect::<Vec<_>>()
            .join("_")
    ));
    Ok(Some(composed))
}

/// The transition-system form of the action invariant `[]phi`: the fluent
/// machines with the rewritten formula conjoined to the initial predicate
/// and, primed, to every action body.
pub fn build_t(phi: &SflFormula) -> Result<Option<Component>, SflError> {
    if !phi.non_temporal() {
        return Err(SflError::TemporalNotAllowed);
    }
    let Some(b) = build_b(phi)? else {
        return Ok(None);
    };
    let r = build_r(phi)?;
    let r_primed = r.primed();
    let mut t = b;
    t.name = name(&format!("T{}", t.name.strip_prefix('B').unwrap_or(&t.name)));
    t.init = Formula::and(t.init, r.clone());
    for action in &mut t.actions {
        action.body = Formula::and(action.body.clone(), r_primed.clone());
    }
    Ok(Some(t))
}
