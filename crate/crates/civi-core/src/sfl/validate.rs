//! Exhaustive per-instance validation of the four fluent requirements:
//! one owned variable, deterministic machine, boolean-function variable
//! shape, and universal enabledness.

use std::fmt;

use crate::model::successor::{action_successors, argument_tuples};
use crate::model::{Instance, Sort, StateSpace, DEFAULT_STATE_CEILING};

use super::{Fluent, SflError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluentCheckKind {
    SingleVariable,
    VarSortShape,
    Determinism,
    Enabledness,
}

impl fmt::Display for FluentCheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FluentCheckKind::SingleVariable => "single-variable",
            FluentCheckKind::VarSortShape => "variable-sort-shape",
            FluentCheckKind::Determinism => "determinism",
            FluentCheckKind::Enabledness => "enabledness",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone)]
pub struct FluentCheck {
    pub kind: FluentCheckKind,
    pub passed: bool,
    /// First counterexample found, rendered as text.
    pub witness: Option<String>,
}

#[derive(Debug, Clone)]
pub struct FluentReport {
    pub fluent: crate::model::Name,
    pub checks: Vec<FluentCheck>,
}

impl FluentReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failure(&self, kind: FluentCheckKind) -> Option<&FluentCheck> {
        self.checks.iter().find(|c| c.kind == kind && !c.passed)
    }
}

/// Does the variable's sort take arguments of the given sorts and land in
/// booleans? Both flat and curried function shapes qualify.
fn shape_matches(sort: &Sort, args: &[Sort]) -> bool {
    if args.is_empty() {
        return *sort == Sort::Bool;
    }
    match sort {
        Sort::Fn(arg_sorts, result) => {
            if arg_sorts.len() > args.len() {
                return false;
            }
            let (now, rest) = args.split_at(arg_sorts.len());
            arg_sorts.as_slice() == now && shape_matches(result, rest)
        }
        _ => false,
    }
}

/// Runs all four requirement checks by exhaustion; never fails early, so a
/// report always carries all four verdicts.
pub fn validate_fluent(f: &Fluent, instance: &Instance) -> Result<FluentReport, SflError> {
    let mut checks = Vec::new();

    let single = f.machine.vars.len() == 1 && f.machine.vars[0].0 == f.var;
    checks.push(FluentCheck {
        kind: FluentCheckKind::SingleVariable,
        passed: single,
        witness: if single {
            None
        } else {
            Some(format!(
                "machine owns variables [{}], fluent tracks {}",
                f.machine
                    .vars
                    .iter()
                    .map(|(n, _)| n.to_string())
                    .collect::<Vec<_>>()
                    .join(", "),
                f.var
            ))
        },
    });

    let shape = f
        .var_sort()
        .map(|s| shape_matches(s, &f.arg_sorts))
        .unwrap_or(false);
    checks.push(FluentCheck {
        kind: FluentCheckKind::VarSortShape,
        passed: shape,
        witness: if shape {
            None
        } else {
            Some(match f.var_sort() {
                Some(s) => format!("variable sort {s} does not map the argument sorts to Bool"),
                None => format!("machine has no variable {}", f.var),
            })
        },
    });

    let space = StateSpace::build(&f.machine, instance, DEFAULT_STATE_CEILING)?;
    let mut det_witness: Option<String> = None;
    let mut enb_witness: Option<String> = None;
    'scan: for s in space.states() {
        for action in &f.machine.actions {
            for args in argument_tuples(action, instance)? {
                let succs = action_successors(&space, &s, action, &args)?;
                if succs.len() > 1 && det_witness.is_none() {
                    det_witness = Some(format!(
                        "{}({}) from {} reaches both {} and {}",
                        action.name,
                        args.iter()
                            .map(|a| a.to_string())
                            .collect::<Vec<_>>()
                            .join(", "),
                        space.state_to_text(&s),
                        space.state_to_text(&succs[0]),
                        space.state_to_text(&succs[1]),
                    ));
                }
                if succs.is_empty() && enb_witness.is_none() {
                    enb_witness = Some(format!(
                        "{}({}) is disabled in {}",
                        action.name,
                        args.iter()
                            .map(|a| a.to_string())
                            .collect::<Vec<_>>()
                            .join(", "),
                        space.state_to_text(&s),
                    ));
                }
                if det_witness.is_some() && enb_witness.is_some() {
                    break 'scan;
                }
            }
        }
    }
    checks.push(FluentCheck {
        kind: FluentCheckKind::Determinism,
        passed: det_witness.is_none(),
        witness: det_witness,
    });
    checks.push(FluentCheck {
        kind: FluentCheckKind::Enabledness,
        passed: enb_witness.is_none(),
        witness: enb_witness,
    });

    Ok(FluentReport {
        fluent: f.name.clone(),
        checks,
    })
}
