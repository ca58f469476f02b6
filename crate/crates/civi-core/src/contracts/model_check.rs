//! Direct model checking of contract fulfillment by breadth-first
//! reachability on a finite instance. This is the semantic oracle that the
//! inductive proof method approximates.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::compose::compose_all;
use crate::model::eval::holds;
use crate::model::successor::{action_successors, argument_tuples, initial_states};
use crate::model::{
    ActionEvent, Component, Formula, Instance, Name, State, StateSpace, Value,
};
use crate::sfl::{build_b, build_r, build_t};

use super::check::CheckError;
use super::lower::LowerError;
use super::Contract;

#[derive(Debug, Clone, PartialEq)]
pub enum McVerdict {
    Holds {
        reachable: usize,
    },
    Violation {
        trace: Vec<ActionEvent>,
        state: BTreeMap<Name, Value>,
    },
}

impl McVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, McVerdict::Holds { .. })
    }
}

/// The reachability system of a contract: component, initial predicate,
/// per-step filter on the successor state, and the property to check
/// everywhere.
struct FulfillmentSystem {
    component: Component,
    init: Formula,
    step_filter: Option<Formula>,
    property: Formula,
}

fn system_for(contract: &Contract) -> Result<FulfillmentSystem, LowerError> {
    match contract {
        Contract::State(c) => Ok(FulfillmentSystem {
            component: c.component.clone(),
            init: Formula::and(c.component.init.clone(), c.assume.clone()),
            step_filter: Some(c.assume.clone()),
            property: c.guarantee.clone(),
        }),
        Contract::Action(c) => {
            // T(always assume) || C || B(guarantee), checking the rewritten
            // guarantee everywhere; language inclusion follows because the
            // guarantee machines are deterministic and always enabled.
            let mut parts = Vec::new();
            if let Some(t) = build_t(&c.assume)? {
                parts.push(t);
            }
            parts.push(c.component.clone());
            if let Some(b) = build_b(&c.guarantee)? {
                parts.push(b);
            }
            let component = compose_all(&parts)?;
            let init = component.init.clone();
            Ok(FulfillmentSystem {
                component,
                init,
                step_filter: None,
                property: build_r(&c.guarantee)?,
            })
        }
        Contract::Hybrid(c) => {
            let mut parts = Vec::new();
            if let Some(t) = build_t(&c.assume)? {
                parts.push(t);
            }
            parts.push(c.component.clone());
            let component = compose_all(&parts)?;
            let init = component.init.clone();
            Ok(FulfillmentSystem {
                component,
                init,
                step_filter: None,
                property: c.guarantee.clone(),
            })
        }
    }
}

/// BFS over the reachable states of the contract's fulfillment system,
/// checking the guarantee everywhere. Returns the first violation in BFS
/// order together with the action trace that reaches it.
pub fn model_check_fulfillment(
    contract: &Contract,
    instance: &Instance,
    ceiling: u128,
) -> Result<McVerdict, CheckError> {
    let sys = system_for(contract).map_err(|e| match e {
        LowerError::Compose(c) => CheckError::Compose(c),
        LowerError::Sfl(s) => CheckError::Sfl(s),
        LowerError::AlphabetViolation { action } => {
            CheckError::Sfl(crate::sfl::SflError::UnknownFluent(action))
        }
    })?;
    let space = StateSpace::build(&sys.component, instance, ceiling)?;
    let args_per_action: Vec<Vec<Vec<Value>>> = sys
        .component
        .actions
        .iter()
        .map(|a| argument_tuples(a, instance))
        .collect::<Result<_, _>>()?;

    let mut parents: HashMap<State, Option<(State, ActionEvent)>> = HashMap::new();
    let mut queue: VecDeque<State> = VecDeque::new();

    for s in initial_states(&space, &sys.init)? {
        if parents.contains_key(&s) {
            continue;
        }
        parents.insert(s.clone(), None);
        if !holds(&sys.property, &space, &s)? {
            return Ok(McVerdict::Violation {
                trace: Vec::new(),
                state: space.state_to_map(&s),
            });
        }
        queue.push_back(s);
    }

    while let Some(s) = queue.pop_front() {
        for (ai, action) in sys.component.actions.iter().enumerate() {
            for args in &args_per_action[ai] {
                for t in action_successors(&space, &s, action, args)? {
                    if let Some(filter) = &sys.step_filter {
                        if !holds(filter, &space, &t)? {
                            continue;
                        }
                    }
                    if parents.contains_key(&t) {
                        continue;
                    }
                    let event = ActionEvent {
                        action: action.name.clone(),
                        args: args.clone(),
                    };
                    parents.insert(t.clone(), Some((s.clone(), event)));
                    if !holds(&sys.property, &space, &t)? {
                        let trace = reconstruct(&parents, &t);
                        return Ok(McVerdict::Violation {
                            trace,
                            state: space.state_to_map(&t),
                        });
                    }
                    queue.push_back(t);
                }
            }
        }
    }
    Ok(McVerdict::Holds {
        reachable: parents.len(),
    })
}

fn reconstruct(
    parents: &HashMap<State, Option<(State, ActionEvent)>>,
    end: &State,
) -> Vec<ActionEvent> {
    let mut trace = Vec::new();
    let mut cursor = end.clone();
    while let Some(Some((prev, event))) = parents.get(&cursor) {
        trace.push(event.clone());
        cursor = prev.clone();
    }
    trace.reverse();
    trace
}

/// Count of reachable states of a bare component (no contract), used by
/// composition equivalence tests.
pub fn reachable_states(
    component: &Component,
    instance: &Instance,
    ceiling: u128,
) -> Result<Vec<BTreeMap<Name, Value>>, CheckError> {
    let space = StateSpace::build(component, instance, ceiling)?;
    let args_per_action: Vec<Vec<Vec<Value>>> = component
        .actions
        .iter()
        .map(|a| argument_tuples(a, instance))
        .collect::<Result<_, _>>()?;
    let mut seen: HashMap<State, ()> = HashMap::new();
    let mut queue: VecDeque<State> = VecDeque::new();
    for s in initial_states(&space, &component.init)? {
        if seen.insert(s.clone(), ()).is_none() {
            queue.push_back(s);
        }
    }
    let mut out = Vec::new();
    while let Some(s) = queue.pop_front() {
        out.push(space.state_to_map(&s));
        for (ai, action) in component.actions.iter().enumerate() {
            for args in &args_per_action[ai] {
                for t in action_successors(&space, &s, action, args)? {
                    if seen.insert(t.clone(), ()).is_none() {
                        queue.push_back(t);
                    }
                }
            }
        }
    }
    Ok(out)
}
