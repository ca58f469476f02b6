//! Transition computation. Action bodies that are conjunctions of `v' = e`
//! updates get their successors computed directly; anything else falls back
//! to an exhaustive scan over candidate next states, so the result is always
//! the full successor set.

use std::collections::BTreeMap;

use thiserror::Error;

use super::eval::{eval, EvalCx, EvalError};
use super::{ActionDecl, Component, Formula, Instance, Name, Sort, State, StateSpace, Value};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StepError {
    #[error("action {action} expects {expected} arguments, got {got}")]
    ArityMismatch {
        action: Name,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// True iff `(s, t)` satisfies the action body with formals bound to `args`.
pub fn step_holds(
    action: &ActionDecl,
    args: &[Value],
    space: &StateSpace,
    s: &State,
    t: &State,
) -> Result<bool, StepError> {
    if args.len() != action.formals.len() {
        return Err(StepError::ArityMismatch {
            action: action.name.clone(),
            expected: action.formals.len(),
            got: args.len(),
        });
    }
    let mut cx = EvalCx::with_next(space, s, t);
    cx.env = action
        .formals
        .iter()
        .map(|(n, _)| n.clone())
        .zip(args.iter().cloned())
        .collect();
    Ok(eval(&action.body, &mut cx)?.truth())
}

/// All argument tuples of an action under the instance, in lexicographic
/// order.
pub fn argument_tuples(
    action: &ActionDecl,
    instance: &Instance,
) -> Result<Vec<Vec<Value>>, super::instance::InstanceError> {
    let mut out = vec![Vec::new()];
    for (_, sort) in &action.formals {
        let space = instance.value_space(sort)?;
        let mut next = Vec::with_capacity(out.len() * space.len());
        for prefix in &out {
            for v in &space {
                let mut row = prefix.clone();
                row.push(v.clone());
                next.push(row);
            }
        }
        out = next;
    }
    Ok(out)
}

/// The successors of `s` under one action with concrete arguments, in
/// lexicographic order of the next state.
pub fn action_successors(
    space: &StateSpace,
    s: &State,
    action: &ActionDecl,
    args: &[Value],
) -> Result<Vec<State>, StepError> {
    if args.len() != action.formals.len() {
        return Err(StepError::ArityMismatch {
            action: action.name.clone(),
            expected: action.formals.len(),
            got: args.len(),
        });
    }
    let env: Vec<(Name, Value)> = action
        .formals
        .iter()
        .map(|(n, _)| n.clone())
        .zip(args.iter().cloned())
        .collect();

    let conjuncts = action.body.conjuncts();
    let mut guards = Vec::new();
    let mut primed_parts = Vec::new();
    for c in &conjuncts {
        if c.has_primes() {
            primed_parts.push(*c);
        } else {
            guards.push(*c);
        }
    }

    // Guards only look at the current state; reject early.
    {
        let mut cx = EvalCx::new(space, s);
        cx.env = env.clone();
        for g in &guards {
            if !eval(g, &mut cx)?.truth() {
                return Ok(Vec::new());
            }
        }
    }

    // Extract `v' = e` updates with prime-free right-hand sides.
    let mut determined: BTreeMap<usize, u32> = BTreeMap::new();
    {
        let mut cx = EvalCx::new(space, s);
        cx.env = env.clone();
        for c in &primed_parts {
            let (var, rhs) = match c {
                Formula::Eq(a, b) => match (a.as_ref(), b.as_ref()) {
                    (Formula::Var { name, primed: true }, rhs) if !rhs.has_primes() => {
                        (name, rhs)
                    }
                    (lhs, Formula::Var { name, primed: true }) if !lhs.has_primes() => {
                        (name, lhs)
                    }
                    _ => continue,
                },
                _ => continue,
            };
            let Some(slot) = space.slot(var) else { continue };
            if determined.contains_key(&slot) {
                continue;
            }
            let value = eval(rhs, &mut cx)?.into_owned();
            match space.value_index(slot, &value) {
                Some(vi) => {
                    determined.insert(slot, vi);
                }
                None => {
                    // Value outside the enumerated space (e.g. a natural
                    // past the bound): no type-correct successor assigns it.
                    return Ok(Vec::new());
                }
            }
        }
    }

    // Enumerate candidates: determined slots are fixed, the rest range over
    // their whole value space.
    let nvars = space.var_names.len();
    let mut free_slots = Vec::new();
    for slot in 0..nvars {
        if !determined.contains_key(&slot) {
            free_slots.push(slot);
        }
    }

    let mut out = Vec::new();
    let mut idx: Vec<u32> = (0..nvars)
        .map(|slot| determined.get(&slot).copied().unwrap_or(0))
        .collect();
    'outer: loop {
        let t = State {
            idx: idx.clone().into(),
        };
        let mut ok = true;
        {
            let mut cx = EvalCx::with_next(space, s, &t);
            cx.env = env.clone();
            for c in &primed_parts {
                if !eval(c, &mut cx)?.truth() {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            out.push(t);
        }
        // advance the free slots, last fastest
        let mut pos = free_slots.len();
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            let slot = free_slots[pos];
            idx[slot] += 1;
            if (idx[slot] as usize) < space.spaces[slot].len() {
                break;
            }
            idx[slot] = 0;
        }
    }
    Ok(out)
}

/// All transitions out of `s`: `(action index, args, successor)` triples in
/// deterministic order.
pub fn all_successors(
    space: &StateSpace,
    s: &State,
) -> Result<Vec<(usize, Vec<Value>, State)>, StepError> {
    let mut out = Vec::new();
    let component = space.component.clone();
    for (ai, action) in component.actions.iter().enumerate() {
        for args in argument_tuples(action, &space.instance).map_err(|e| {
            StepError::Eval(EvalError::Internal(e.to_string()))
        })? {
            for t in action_successors(space, s, action, &args)? {
                out.push((ai, args.clone(), t));
            }
        }
    }
    Ok(out)
}

/// The states satisfying the component's initial predicate, using the same
/// update extraction as the transition path: conjuncts of the form
/// `v = closed-term` pin variables, anything else filters.
pub fn initial_states(space: &StateSpace, init: &Formula) -> Result<Vec<State>, StepError> {
    if space.total == 0 {
        return Ok(Vec::new());
    }
    let conjuncts = init.conjuncts();
    let zero = space.state_at(0);
    let mut determined: BTreeMap<usize, u32> = BTreeMap::new();
    {
        let mut cx = EvalCx::new(space, &zero);
        for c in &conjuncts {
            let (var, rhs) = match c {
                Formula::Eq(a, b) => match (a.as_ref(), b.as_ref()) {
                    (Formula::Var { name, primed: false }, rhs)
                        if rhs.state_vars().is_empty() =>
                    {
                        (name, rhs)
                    }
                    (lhs, Formula::Var { name, primed: false })
                        if lhs.state_vars().is_empty() =>
                    {
                        (name, lhs)
                    }
                    _ => continue,
                },
                _ => continue,
            };
            let Some(slot) = space.slot(var) else { continue };
            if determined.contains_key(&slot) {
                continue;
            }
            let value = eval(rhs, &mut cx)?.into_owned();
            match space.value_index(slot, &value) {
                Some(vi) => {
                    determined.insert(slot, vi);
                }
                None => return Ok(Vec::new()),
            }
        }
    }

    let nvars = space.var_names.len();
    let free_slots: Vec<usize> = (0..nvars)
        .filter(|slot| !determined.contains_key(slot))
        .collect();
    let mut out = Vec::new();
    let mut idx: Vec<u32> = (0..nvars)
        .map(|slot| determined.get(&slot).copied().unwrap_or(0))
        .collect();
    'outer: loop {
        let s = State {
            idx: idx.clone().into(),
        };
        let mut cx = EvalCx::new(space, &s);
        if eval(init, &mut cx)?.truth() {
            out.push(s);
        }
        let mut pos = free_slots.len();
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            let slot = free_slots[pos];
            idx[slot] += 1;
            if (idx[slot] as usize) < space.spaces[slot].len() {
                break;
            }
            idx[slot] = 0;
        }
    }
    Ok(out)
}

/// Builds a state space for a component, with the instance's value spaces.
pub fn build_space(
    component: &Component,
    instance: &Instance,
    ceiling: u128,
) -> Result<StateSpace, super::instance::InstanceError> {
    StateSpace::build(component, instance, ceiling)
}

/// Formal sorts must be `Atom` or `Nat`; used by sortcheck and the parser.
pub fn formal_sort_ok(sort: &Sort) -> bool {
    matches!(sort, Sort::Atom(_) | Sort::Nat)
}
