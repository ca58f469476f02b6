//! Translating contracts to state-based proof obligations. Action contracts
//! become state contracts over the component composed with the assumption
//! and guarantee fluent machines; hybrid contracts keep their state
//! guarantee.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::compose::{compose_all, ComposeError};
use crate::model::{name, Component, Formula, Name};
use crate::sfl::{build_b, build_r, SflError, SflFormula};

use super::Contract;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LowerError {
    #[error("action {action} of the formula is outside the component alphabet")]
    AlphabetViolation { action: Name },
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Sfl(#[from] SflError),
}

/// A state-based proof obligation: the target component, assumption,
/// guarantee, and candidate invariant, plus the condition formulas of the
/// local inductive invariant method.
#[derive(Debug, Clone, PartialEq)]
pub struct Obligation {
    pub name: Name,
    pub component: Component,
    pub assume: Formula,
    pub guarantee: Formula,
    pub invariant: Option<Formula>,
    /// Fluent-variable renames applied to avoid collisions with component
    /// variables, as (fluent variable, fresh name) pairs.
    pub renamings: Vec<(Name, Name)>,
}

impl Obligation {
    /// The three proof conditions, in display form. The transition relation
    /// is kept implicit during checking; here it is materialized for
    /// reports.
    pub fn conditions(&self) -> [Formula; 3] {
        let init = self.component.init.clone();
        let next = self.next_formula();
        let a = self.assume.clone();
        let i = self
            .invariant
            .clone()
            .unwrap_or(Formula::True);
        let g = self.guarantee.clone();
        [
            Formula::implies(Formula::and(init, a.clone()), i.clone()),
            Formula::implies(
                Formula::and_all(vec![i.clone(), next, a.clone(), a.primed()]),
                i.primed(),
            ),
            Formula::implies(i, g),
        ]
    }

    /// The implicit transition relation: disjunction over actions of the
    /// existential closure of each body.
    pub fn next_formula(&self) -> Formula {
        let mut disjuncts = Vec::new();
        for action in &self.component.actions {
            let mut body = action.body.clone();
            for (formal, sort) in action.formals.iter().rev() {
                let domain = match sort {
                    crate::model::Sort::Atom(p) => crate::model::Domain::Param(p.clone()),
                    _ => crate::model::Domain::Nat,
                };
                body = Formula::exists(formal, domain, body);
            }
            disjuncts.push(body);
        }
        let mut it = disjuncts.into_iter();
        match it.next() {
            None => Formula::False,
            Some(first) => it.fold(first, Formula::or),
        }
    }

    /// The restricted system used for off-the-shelf invariant inference:
    /// the assumption folded into the initial predicate and, primed, into
    /// every action.
    pub fn restricted(&self) -> Component {
        let mut c = self.component.clone();
        c.name = name(&format!("D_{}", self.name));
        if self.assume != Formula::True {
            c.init = Formula::and(c.init, self.assume.clone());
            let primed = self.assume.primed();
            for action in &mut c.actions {
                action.body = Formula::and(action.body.clone(), primed.clone());
            }
        }
        c
    }
}

/// Renames fluent variables that collide with the component's own variables
/// by prefixing the fluent name. Returns the renamed bridge component and
/// extends `renamings`.
fn avoid_collisions(
    bridge: Component,
    phi: &SflFormula,
    taken: &mut std::collections::BTreeSet<Name>,
    renamings: &mut Vec<(Name, Name)>,
) -> Component {
    let mut renames: BTreeMap<Name, Name> = BTreeMap::new();
    for fluent in phi.fluents() {
        if taken.contains(&fluent.var) {
            let fresh = name(&format!("{}_{}", fluent.name, fluent.var));
            renames.insert(fluent.var.clone(), fresh.clone());
            renamings.push((fluent.var.clone(), fresh));
        }
    }
    let mut out = bridge;
    if !renames.is_empty() {
        out.vars = out
            .vars
            .into_iter()
            .map(|(n, s)| (renames.get(&n).cloned().unwrap_or(n), s))
            .collect();
        out.init = out.init.rename_vars(&renames);
        for action in &mut out.actions {
            action.body = action.body.rename_vars(&renames);
        }
    }
    for (v, _) in &out.vars {
        taken.insert(v.clone());
    }
    out
}

fn rename_map(renamings: &[(Name, Name)]) -> BTreeMap<Name, Name> {
    renamings.iter().cloned().collect()
}

/// Lowers a contract to its proof obligation. State contracts lower to
/// themselves; action and hybrid contracts compose the fluent machines of
/// their assumption (and guarantee) around the component and rewrite the
/// fluent formulas over the machine variables.
pub fn lower(contract: &Contract) -> Result<Obligation, LowerError> {
    match contract {
        Contract::State(c) => Ok(Obligation {
            name: c.name.clone(),
            component: c.component.clone(),
            assume: c.assume.clone(),
            guarantee: c.guarantee.clone(),
            invariant: c.invariant.clone(),
            renamings: Vec::new(),
        }),
        Contract::Action(c) => {
            check_alphabet(&c.assume, &c.component)?;
            check_alphabet(&c.guarantee, &c.component)?;
            let mut taken = c.component.var_names();
            let mut renamings = Vec::new();
            let b_assume = build_b(&c.assume)?
                .map(|b| avoid_collisions(b, &c.assume, &mut taken, &mut renamings));
            let b_guar = build_b(&c.guarantee)?
                .map(|b| avoid_collisions(b, &c.guarantee, &mut taken, &mut renamings));
            let mut parts = Vec::new();
            if let Some(b) = b_assume {
                parts.push(b);
            }
            parts.push(c.component.clone());
            if let Some(b) = b_guar {
                parts.push(b);
            }
            let component = compose_all(&parts)?;
            let renames = rename_map(&renamings);
            let assume = build_r(&c.assume)?.rename_vars(&renames);
            let guarantee = build_r(&c.guarantee)?.rename_vars(&renames);
            Ok(Obligation {
                name: c.name.clone(),
                component,
                assume,
                guarantee,
                invariant: c.invariant.clone(),
                renamings,
            })
        }
        Contract::Hybrid(c) => {
            check_alphabet(&c.assume, &c.component)?;
            let mut taken = c.component.var_names();
            let mut renamings = Vec::new();
            let b_assume = build_b(&c.assume)?
                .map(|b| avoid_collisions(b, &c.assume, &mut taken, &mut renamings));
            let mut parts = Vec::new();
            if let Some(b) = b_assume {
                parts.push(b);
            }
            parts.push(c.component.clone());
            let component = compose_all(&parts)?;
            let renames = rename_map(&renamings);
            let assume = build_r(&c.assume)?.rename_vars(&renames);
            Ok(Obligation {
                name: c.name.clone(),
                component,
                assume,
                guarantee: c.guarantee.clone(),
                invariant: c.invariant.clone(),
                renamings,
            })
        }
    }
}

fn check_alphabet(phi: &SflFormula, component: &Component) -> Result<(), LowerError> {
    let alphabet = component.alphabet();
    for a in phi.alphabet() {
        if !alphabet.contains(&a) {
            return Err(LowerError::AlphabetViolation { action: a });
        }
    }
    Ok(())
}
