//! Exhaustive inductive checking of obligations: initiation, consecution,
//! and safety over every type-correct state of a finite instance. The scan
//! parallelizes over the state enumeration; the reported counterexample is
//! always the lexicographically first one.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::eval::{holds, EvalError};
use crate::model::instance::InstanceError;
use crate::model::successor::{action_successors, argument_tuples, initial_states, StepError};
use crate::model::{Formula, Instance, Name, StateSpace, Value};

use super::Obligation;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CheckError {
    #[error("obligation {0} has no candidate invariant")]
    NoInvariant(Name),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Compose(#[from] crate::compose::ComposeError),
    #[error(transparent)]
    Sfl(#[from] crate::sfl::SflError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtiKind {
    Initiation,
    Consecution,
    Safety,
}

impl std::fmt::Display for CtiKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CtiKind::Initiation => "initiation",
            CtiKind::Consecution => "consecution",
            CtiKind::Safety => "safety",
        };
        write!(f, "{s}")
    }
}

/// A counterexample to induction: the violated condition, the state, and
/// for consecution the step that leaves the invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Cti {
    pub kind: CtiKind,
    pub state: BTreeMap<Name, Value>,
    pub successor: Option<BTreeMap<Name, Value>>,
    pub action: Option<(Name, Vec<Value>)>,
}

impl Cti {
    pub fn to_text(&self) -> String {
        let mut out = format!("cti {} {{\n", self.kind);
        if let Some((a, args)) = &self.action {
            out.push_str(&format!(
                "  action {a}({})\n",
                args.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
            ));
        }
        out.push_str("  state {");
        for (i, (n, v)) in self.state.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(" {n} = {v}"));
        }
        out.push_str(" }\n");
        if let Some(t) = &self.successor {
            out.push_str("  next {");
            for (i, (n, v)) in t.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&format!(" {n} = {v}"));
            }
            out.push_str(" }\n");
        }
        out.push('}');
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Proved,
    Cti(Cti),
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved)
    }
}

/// Outcome with scan statistics for reports.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    pub states: u128,
}

/// Checks the three conditions of the local inductive invariant method on a
/// finite instance. Conditions are checked in order (initiation,
/// consecution, safety) and the first counterexample wins.
pub fn check_inductive(
    ob: &Obligation,
    instance: &Instance,
    ceiling: u128,
) -> Result<CheckOutcome, CheckError> {
    let invariant = ob
        .invariant
        .as_ref()
        .ok_or_else(|| CheckError::NoInvariant(ob.name.clone()))?;
    let outcome = check_inductive_with(ob, invariant, instance, ceiling)?;
    Ok(outcome)
}

/// As `check_inductive`, with an explicit candidate invariant (used by the
/// inference loop).
pub fn check_inductive_with(
    ob: &Obligation,
    invariant: &Formula,
    instance: &Instance,
    ceiling: u128,
) -> Result<CheckOutcome, CheckError> {
    let space = StateSpace::build(&ob.component, instance, ceiling)?;

    if let Some(cti) = initiation_cti(ob, invariant, &space)? {
        return Ok(CheckOutcome {
            verdict: Verdict::Cti(cti),
            states: space.total,
        });
    }
    if let Some(cti) = consecution_cti(ob, invariant, &space)? {
        return Ok(CheckOutcome {
            verdict: Verdict::Cti(cti),
            states: space.total,
        });
    }
    if let Some(cti) = safety_cti(ob, invariant, &space)? {
        return Ok(CheckOutcome {
            verdict: Verdict::Cti(cti),
            states: space.total,
        });
    }
    Ok(CheckOutcome {
        verdict: Verdict::Proved,
        states: space.total,
    })
}

/// `Init /\ A => I`.
fn initiation_cti(
    ob: &Obligation,
    invariant: &Formula,
    space: &StateSpace,
) -> Result<Option<Cti>, CheckError> {
    let constrained = Formula::and(ob.component.init.clone(), ob.assume.clone());
    for s in initial_states(space, &constrained)? {
        if !holds(invariant, space, &s)? {
            return Ok(Some(Cti {
                kind: CtiKind::Initiation,
                state: space.state_to_map(&s),
                successor: None,
                action: None,
            }));
        }
    }
    Ok(None)
}

/// `I /\ Next /\ A /\ A' => I'`, iterated per action with per-action
/// argument enumeration.
pub(crate) fn consecution_cti(
    ob: &Obligation,
    invariant: &Formula,
    space: &StateSpace,
) -> Result<Option<Cti>, CheckError> {
    let total = space.total as u64;
    let component = &ob.component;
    let args_per_action: Vec<Vec<Vec<Value>>> = component
        .actions
        .iter()
        .map(|a| argument_tuples(a, &space.instance))
        .collect::<Result<_, _>>()?;

    let scan = |ordinal: u64| -> Option<Result<Cti, CheckError>> {
        let s = space.state_at(ordinal as u128);
        let pre = (|| -> Result<bool, CheckError> {
            Ok(holds(invariant, space, &s)? && holds(&ob.assume, space, &s)?)
        })();
        match pre {
            Ok(false) => return None,
            Ok(true) => {}
            Err(e) => return Some(Err(e)),
        }
        for (ai, action) in component.actions.iter().enumerate() {
            for args in &args_per_action[ai] {
                let succs = match action_successors(space, &s, action, args) {
                    Ok(v) => v,
                    Err(e) => return Some(Err(e.into())),
                };
                for t in succs {
                    let step = (|| -> Result<Option<Cti>, CheckError> {
                        if holds(&ob.assume, space, &t)? && !holds(invariant, space, &t)? {
                            Ok(Some(Cti {
                                kind: CtiKind::Consecution,
                                state: space.state_to_map(&s),
                                successor: Some(space.state_to_map(&t)),
                                action: Some((action.name.clone(), args.clone())),
                            }))
                        } else {
                            Ok(None)
                        }
                    })();
                    match step {
                        Ok(Some(cti)) => return Some(Ok(cti)),
                        Ok(None) => {}
                        Err(e) => return Some(Err(e)),
                    }
                }
            }
        }
        None
    };

    (0..total)
        .into_par_iter()
        .find_map_first(scan)
        .transpose()
}

/// `I => G`.
fn safety_cti(
    ob: &Obligation,
    invariant: &Formula,
    space: &StateSpace,
) -> Result<Option<Cti>, CheckError> {
    let total = space.total as u64;
    (0..total)
        .into_par_iter()
        .find_map_first(|ordinal| {
            let s = space.state_at(ordinal as u128);
            let r = (|| -> Result<Option<Cti>, CheckError> {
                if holds(invariant, space, &s)? && !holds(&ob.guarantee, space, &s)? {
                    Ok(Some(Cti {
                        kind: CtiKind::Safety,
                        state: space.state_to_map(&s),
                        successor: None,
                        action: None,
                    }))
                } else {
                    Ok(None)
                }
            })();
            r.transpose()
        })
        .transpose()
}

/// Re-evaluates a counterexample against its obligation, confirming that it
/// violates exactly its reported condition.
pub fn cti_reproduces(
    ob: &Obligation,
    invariant: &Formula,
    cti: &Cti,
    instance: &Instance,
    ceiling: u128,
) -> Result<bool, CheckError> {
    let space = StateSpace::build(&ob.component, instance, ceiling)?;
    let values: Vec<Value> = space
        .var_names
        .iter()
        .map(|n| cti.state.get(n).cloned().expect("cti state missing a variable"))
        .collect();
    let Some(s) = space.pack(&values) else {
        return Ok(false);
    };
    match cti.kind {
        CtiKind::Initiation => Ok(holds(&ob.component.init, &space, &s)?
            && holds(&ob.assume, &space, &s)?
            && !holds(invariant, &space, &s)?),
        CtiKind::Safety => Ok(holds(invariant, &space, &s)? && !holds(&ob.guarantee, &space, &s)?),
        CtiKind::Consecution => {
            let succ = cti.successor.as_ref().expect("consecution cti without successor");
            let tvals: Vec<Value> = space
                .var_names
                .iter()
                .map(|n| succ.get(n).cloned().expect("cti successor missing a variable"))
                .collect();
            let Some(t) = space.pack(&tvals) else {
                return Ok(false);
            };
            let (aname, args) = cti.action.as_ref().expect("consecution cti without action");
            let Some(action) = ob.component.action(aname) else {
                return Ok(false);
            };
            let steps = crate::model::successor::step_holds(action, args, &space, &s, &t)?;
            Ok(steps
                && holds(invariant, &space, &s)?
                && holds(&ob.assume, &space, &s)?
                && holds(&ob.assume, &space, &t)?
                && !holds(invariant, &space, &t)?)
        }
    }
}
