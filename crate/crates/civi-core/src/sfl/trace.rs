//! Finite-trace semantics: deterministic fluent execution, formula checking
//! at trace indices, and language membership by simulation.
//!
//! Indices run from 0 to the trace length inclusive; index `i` sees the
//! first `i` events. `Until` needs a witness index within that range, and
//! `Next` at the final index is false.

use std::collections::BTreeSet;

use crate::model::successor::{action_successors, initial_states};
use crate::model::{
    ActionEvent, Component, Domain, Instance, Name, StateSpace, Value, DEFAULT_STATE_CEILING,
};

use super::{Fluent, SflError, SflFormula};

/// Executes a trace on the fluent's machine and returns the tracked
/// variable's value. Events outside the machine's alphabet leave the state
/// unchanged.
pub fn fluent_run(f: &Fluent, trace: &[ActionEvent], instance: &Instance) -> Result<Value, SflError> {
    let space = StateSpace::build(&f.machine, instance, DEFAULT_STATE_CEILING)?;
    let mut state = unique_initial(f, &space)?;
    for event in trace {
        let Some(action) = f.machine.action(&event.action) else {
            continue;
        };
        let succs = action_successors(&space, &state, action, &event.args)?;
        match succs.len() {
            1 => state = succs.into_iter().next().unwrap(),
            0 => {
                return Err(SflError::NotEnabled {
                    fluent: f.name.clone(),
                    action: event.action.clone(),
                    detail: format!("in state {}", space.state_to_text(&state)),
                })
            }
            _ => {
                return Err(SflError::NonDeterministicFluent {
                    fluent: f.name.clone(),
                    detail: format!(
                        "{} successors for {event} in state {}",
                        succs.len(),
                        space.state_to_text(&state)
                    ),
                })
            }
        }
    }
    let slot = space
        .slot(&f.var)
        .ok_or_else(|| SflError::UnknownFluent(f.name.clone()))?;
    Ok(space.value(&state, slot).clone())
}

fn unique_initial(f: &Fluent, space: &StateSpace) -> Result<crate::model::State, SflError> {
    let inits = initial_states(space, &f.machine.init)?;
    match inits.len() {
        1 => Ok(inits.into_iter().next().unwrap()),
        0 => Err(SflError::NoInitialState(f.name.clone())),
        n => Err(SflError::NonDeterministicFluent {
            fluent: f.name.clone(),
            detail: format!("{n} initial states"),
        }),
    }
}

fn domain_values(domain: &Domain, instance: &Instance) -> Result<Vec<Value>, SflError> {
    match domain {
        Domain::Param(p) => Ok(instance
            .atoms(p)
            .ok_or_else(|| SflError::Instance(
                crate::model::instance::InstanceError::UnboundParam(p.clone()),
            ))?
            .iter()
            .map(|a| Value::Atom(a.clone()))
            .collect()),
        Domain::Nat => Ok((0..=instance.nat_bound).map(Value::Nat).collect()),
    }
}

fn lookup(env: &[(Name, Value)], n: &Name) -> Result<Value, SflError> {
    env.iter()
        .rev()
        .find(|(en, _)| en == n)
        .map(|(_, v)| v.clone())
        .ok_or_else(|| SflError::FreeVariable(n.clone()))
}

/// Applies a fluent's (possibly curried) function value to concrete
/// arguments.
fn apply_fluent_value(mut v: Value, args: &[Value]) -> Result<bool, SflError> {
    let mut i = 0;
    while i < args.len() {
        match v {
            Value::Fn(map) => {
                // try single-argument application first, then tuple keys
                if let Some(next) = map.get(&args[i]) {
                    v = next.clone();
                    i += 1;
                } else {
                    let key = Value::Tuple(args[i..].to_vec());
                    match map.get(&key) {
                        Some(next) => {
                            v = next.clone();
                            i = args.len();
                        }
                        None => {
                            return Err(SflError::Internal(format!(
                                "fluent argument {} outside domain",
                                args[i]
                            )))
                        }
                    }
                }
            }
            other => {
                return Err(SflError::Internal(format!(
                    "fluent value {other} applied to too many arguments"
                )))
            }
        }
    }
    Ok(matches!(v, Value::Bool(true)))
}

/// The finite-trace satisfaction relation at index `i` under an environment
/// binding the formula's free variables.
pub fn check_trace(
    phi: &SflFormula,
    trace: &[ActionEvent],
    i: usize,
    env: &mut Vec<(Name, Value)>,
    instance: &Instance,
) -> Result<bool, SflError> {
    let len = trace.len();
    if i > len {
        return Err(SflError::IndexOutOfRange { index: i, len });
    }
    match phi {
        SflFormula::True => Ok(true),
        SflFormula::False => Ok(false),
        SflFormula::Atom { fluent, args } => {
            let run = fluent_run(fluent, &trace[..i], instance)?;
            let concrete: Result<Vec<Value>, SflError> =
                args.iter().map(|a| lookup(env, a)).collect();
            apply_fluent_value(run, &concrete?)
        }
        SflFormula::VarEq(a, b) => Ok(lookup(env, a)? == lookup(env, b)?),
        SflFormula::Not(a) => Ok(!check_trace(a, trace, i, env, instance)?),
        SflFormula::Or(a, b) => Ok(check_trace(a, trace, i, env, instance)?
            || check_trace(b, trace, i, env, instance)?),
        SflFormula::And(a, b) => Ok(check_trace(a, trace, i, env, instance)?
            && check_trace(b, trace, i, env, instance)?),
        SflFormula::Implies(a, b) => Ok(!check_trace(a, trace, i, env, instance)?
            || check_trace(b, trace, i, env, instance)?),
        SflFormula::Until(a, b) => {
            for j in i..=len {
                if check_trace(b, trace, j, env, instance)? {
                    return Ok(true);
                }
                if !check_trace(a, trace, j, env, instance)? {
                    return Ok(false);
                }
            }
            Ok(false)
        }
        SflFormula::Next(a) => {
            if i + 1 > len {
                Ok(false)
            } else {
                check_trace(a, trace, i + 1, env, instance)
            }
        }
        SflFormula::Always(a) => {
            for j in i..=len {
                if !check_trace(a, trace, j, env, instance)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        SflFormula::Eventually(a) => {
            for j in i..=len {
                if check_trace(a, trace, j, env, instance)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        SflFormula::Exists { var, domain, body } => {
            for v in domain_values(domain, instance)? {
                env.push((var.clone(), v));
                let holds = check_trace(body, trace, i, env, instance)?;
                env.pop();
                if holds {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        SflFormula::Forall { var, domain, body } => {
            for v in domain_values(domain, instance)? {
                env.push((var.clone(), v));
                let holds = check_trace(body, trace, i, env, instance)?;
                env.pop();
                if !holds {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// `sigma |= []phi` for a closed non-temporal formula.
pub fn trace_satisfies_always(
    phi: &SflFormula,
    trace: &[ActionEvent],
    instance: &Instance,
) -> Result<bool, SflError> {
    check_trace(
        &SflFormula::Always(Box::new(phi.clone())),
        trace,
        0,
        &mut Vec::new(),
        instance,
    )
}

/// Language membership of a finite trace in a component, by frontier
/// simulation. Events outside the component's alphabet stutter.
pub fn language_member(
    component: &Component,
    trace: &[ActionEvent],
    instance: &Instance,
) -> Result<bool, SflError> {
    let space = StateSpace::build(component, instance, DEFAULT_STATE_CEILING)?;
    let mut frontier: BTreeSet<crate::model::State> =
        initial_states(&space, &component.init)?.into_iter().collect();
    if frontier.is_empty() {
        return Ok(false);
    }
    for event in trace {
        let Some(action) = component.action(&event.action) else {
            continue;
        };
        let mut next = BTreeSet::new();
        for s in &frontier {
            for t in action_successors(&space, s, action, &event.args)? {
                next.insert(t);
            }
        }
        frontier = next;
        if frontier.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}
