//! Assume-guarantee contracts: the three contract kinds, their state-based
//! proof obligations, exhaustive inductive checking, direct model checking
//! of fulfillment, and the composition rules with certificates.

pub mod certify;
pub mod check;
pub mod lower;
pub mod model_check;
pub mod rules;

use std::fmt;

use thiserror::Error;

use crate::model::{Component, Formula, Name};
use crate::sfl::SflFormula;

pub use certify::{certify, Certificate, CertifyError};
pub use check::{check_inductive, CheckError, Cti, CtiKind, Verdict};
pub use lower::{lower, LowerError, Obligation};
pub use model_check::{model_check_fulfillment, McVerdict};
pub use rules::{compose_contracts, is_auxiliary, ProofStep, Rule, RuleError, StepKind};

/// `<A> C <G>` with non-temporal first-order assumption and guarantee.
#[derive(Debug, Clone, PartialEq)]
pub struct StateContract {
    pub name: Name,
    pub assume: Formula,
    pub component: Component,
    pub guarantee: Formula,
    pub invariant: Option<Formula>,
}

/// `<alpha> C <gamma>` with fluent-formula assumption and guarantee.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionContract {
    pub name: Name,
    pub assume: SflFormula,
    pub component: Component,
    pub guarantee: SflFormula,
    pub invariant: Option<Formula>,
}

/// `<alpha> C <G>`: fluent-formula assumption, state-based guarantee.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridContract {
    pub name: Name,
    pub assume: SflFormula,
    pub component: Component,
    pub guarantee: Formula,
    pub invariant: Option<Formula>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Contract {
    State(StateContract),
    Action(ActionContract),
    Hybrid(HybridContract),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ContractError {
    #[error("contract {contract}: formula mentions variable {var} outside the component")]
    ForeignVariable { contract: Name, var: Name },
    #[error("contract {contract}: formula mentions parameter {param} outside the component")]
    ForeignParam { contract: Name, param: Name },
    #[error("contract {contract}: action {action} is not in the component's alphabet")]
    AlphabetViolation { contract: Name, action: Name },
    #[error("contract {contract}: {side} must be non-temporal")]
    Temporal { contract: Name, side: &'static str },
    #[error("contract {contract}: assumption or guarantee has primed variables")]
    Primed { contract: Name },
}

impl Contract {
    pub fn name(&self) -> &Name {
        match self {
            Contract::State(c) => &c.name,
            Contract::Action(c) => &c.name,
            Contract::Hybrid(c) => &c.name,
        }
    }

    pub fn component(&self) -> &Component {
        match self {
            Contract::State(c) => &c.component,
            Contract::Action(c) => &c.component,
            Contract::Hybrid(c) => &c.component,
        }
    }

    pub fn invariant(&self) -> Option<&Formula> {
        match self {
            Contract::State(c) => c.invariant.as_ref(),
            Contract::Action(c) => c.invariant.as_ref(),
            Contract::Hybrid(c) => c.invariant.as_ref(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Contract::State(_) => "state",
            Contract::Action(_) => "action",
            Contract::Hybrid(_) => "hybrid",
        }
    }

    /// Checks the definitional side conditions: state formulas stay within
    /// the component's variables and parameters, fluent formulas within its
    /// alphabet and parameters, and all of them are non-temporal and
    /// unprimed.
    pub fn validate(&self) -> Result<(), ContractError> {
        let name = self.name().clone();
        let component = self.component();
        let check_state = |f: &Formula| -> Result<(), ContractError> {
            if f.has_primes() {
                return Err(ContractError::Primed {
                    contract: name.clone(),
                });
            }
            for v in f.state_vars() {
                if !component.has_var(&v) {
                    return Err(ContractError::ForeignVariable {
                        contract: name.clone(),
                        var: v,
                    });
                }
            }
            for p in f.params() {
                if !component.params.contains(&p) {
                    return Err(ContractError::ForeignParam {
                        contract: name.clone(),
                        param: p,
                    });
                }
            }
            Ok(())
        };
        let check_action = |f: &SflFormula, side: &'static str| -> Result<(), ContractError> {
            if !f.non_temporal() {
                return Err(ContractError::Temporal {
                    contract: name.clone(),
                    side,
                });
            }
            let alphabet = component.alphabet();
            for a in f.alphabet() {
                if !alphabet.contains(&a) {
                    return Err(ContractError::AlphabetViolation {
                        contract: name.clone(),
                        action: a,
                    });
                }
            }
            for p in f.params() {
                if !component.params.contains(&p) {
                    return Err(ContractError::ForeignParam {
                        contract: name.clone(),
                        param: p,
                    });
                }
            }
            Ok(())
        };
        match self {
            Contract::State(c) => {
                check_state(&c.assume)?;
                check_state(&c.guarantee)
            }
            Contract::Action(c) => {
                check_action(&c.assume, "assumption")?;
                check_action(&c.guarantee, "guarantee")
            }
            Contract::Hybrid(c) => {
                check_action(&c.assume, "assumption")?;
                check_state(&c.guarantee)
            }
        }
    }
}

impl fmt::Display for Contract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Contract::State(c) => write!(
                f,
                "<{}> {} <{}>",
                c.assume, c.component.name, c.guarantee
            ),
            Contract::Action(c) => write!(
                f,
                "<{}> {} <{}>",
                c.assume, c.component.name, c.guarantee
            ),
            Contract::Hybrid(c) => write!(
                f,
                "<{}> {} <{}>",
                c.assume, c.component.name, c.guarantee
            ),
        }
    }
}
