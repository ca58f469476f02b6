//! Inference rules for composing proved contracts. Bridges must match
//! syntactically after canonicalization; auxiliarity of a bridge component
//! is witnessed by an exhaustive always-enabled check on the instance.

use thiserror::Error;

use crate::compose::{compose_all, ComposeError};
use crate::model::successor::{action_successors, argument_tuples};
use crate::model::{name, Component, Formula, Instance, Name, StateSpace, DEFAULT_STATE_CEILING};
use crate::sfl::{build_b, SflError};

use super::check::{CheckError, Verdict};
use super::lower::Obligation;
use super::{ActionContract, Contract, HybridContract, StateContract};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    NaiveComp,
    BridgeComp,
    AuxComp,
    SflComp,
    SflSafe,
    HybridComp,
    HybridSafe,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::NaiveComp => "naive-comp",
            Rule::BridgeComp => "bridge-comp",
            Rule::AuxComp => "aux-comp",
            Rule::SflComp => "sfl-comp",
            Rule::SflSafe => "sfl-safe",
            Rule::HybridComp => "hybrid-comp",
            Rule::HybridSafe => "hybrid-safe",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Some(match s {
            "naive-comp" => Rule::NaiveComp,
            "bridge-comp" => Rule::BridgeComp,
            "aux-comp" => Rule::AuxComp,
            "sfl-comp" => Rule::SflComp,
            "sfl-safe" => Rule::SflSafe,
            "hybrid-comp" => Rule::HybridComp,
            "hybrid-safe" => Rule::HybridSafe,
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Error)]
pub enum RuleError {
    #[error("bridge mismatch: {0}")]
    BridgeMismatch(String),
    #[error("rule side condition failed: {0}")]
    RuleSideConditionFailed(String),
    #[error("rule {rule} expects {expected} premises, got {got}")]
    PremiseCount {
        rule: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Sfl(#[from] SflError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

/// How a proof step was established.
#[derive(Debug, Clone)]
pub enum StepKind {
    Leaf {
        obligation: Obligation,
        verdict: Verdict,
        states: u128,
        duration_ms: u128,
        invariant_source: &'static str,
    },
    Composed {
        rule: Rule,
        premises: Vec<ProofStep>,
    },
}

/// One node of a proof tree: the concluded contract, the operand components
/// it talks about, and the invariant (absent for *-safe conclusions).
#[derive(Debug, Clone)]
pub struct ProofStep {
    pub contract: Contract,
    /// Operand provenance of the contract's component, in composition order.
    pub parts: Vec<Component>,
    pub invariant: Option<Formula>,
    pub how: StepKind,
}

impl ProofStep {
    pub fn leaf(
        contract: Contract,
        obligation: Obligation,
        verdict: Verdict,
        states: u128,
        duration_ms: u128,
        invariant_source: &'static str,
    ) -> ProofStep {
        let invariant = obligation.invariant.clone();
        let parts = vec![contract.component().clone()];
        ProofStep {
            contract,
            parts,
            invariant,
            how: StepKind::Leaf {
                obligation,
                verdict,
                states,
                duration_ms,
                invariant_source,
            },
        }
    }

    pub fn proved(&self) -> bool {
        match &self.how {
            StepKind::Leaf { verdict, .. } => verdict.is_proved(),
            StepKind::Composed { premises, .. } => premises.iter().all(|p| p.proved()),
        }
    }
}

/// Auxiliarity witness: every action of the component is enabled in every
/// state of the instance (the shape of components produced from fluent
/// machines).
pub fn is_auxiliary(component: &Component, instance: &Instance) -> Result<bool, RuleError> {
    let space = StateSpace::build(component, instance, DEFAULT_STATE_CEILING)
        .map_err(CheckError::from)?;
    for s in space.states() {
        for action in &component.actions {
            for args in argument_tuples(action, instance).map_err(CheckError::from)? {
                if action_successors(&space, &s, action, &args)
                    .map_err(CheckError::from)?
                    .is_empty()
                {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn conjoin(a: Option<&Formula>, b: Option<&Formula>) -> Result<Formula, RuleError> {
    match (a, b) {
        (Some(x), Some(y)) => Ok(Formula::and(x.clone(), y.clone())),
        _ => Err(RuleError::RuleSideConditionFailed(
            "both premises of a *-comp rule must carry invariants".into(),
        )),
    }
}

fn state_bridge_match(g: &Formula, a: &Formula) -> Result<(), RuleError> {
    if g.canonicalize() != a.canonicalize() {
        return Err(RuleError::BridgeMismatch(format!(
            "guarantee {g} of the first premise differs from assumption {a} of the second"
        )));
    }
    Ok(())
}

fn sfl_bridge_match(
    g: &crate::sfl::SflFormula,
    a: &crate::sfl::SflFormula,
) -> Result<(), RuleError> {
    if g.canonicalize() != a.canonicalize() {
        return Err(RuleError::BridgeMismatch(format!(
            "guarantee {g} of the first premise differs from assumption {a} of the second"
        )));
    }
    Ok(())
}

/// The bridge alphabet must lie in the shared alphabet of the two premise
/// components.
fn bridge_alphabet_ok(
    rho: &crate::sfl::SflFormula,
    c1: &Component,
    c2: &Component,
) -> Result<(), RuleError> {
    let a1 = c1.alphabet();
    let a2 = c2.alphabet();
    for a in rho.alphabet() {
        if !a1.contains(&a) || !a2.contains(&a) {
            return Err(RuleError::RuleSideConditionFailed(format!(
                "bridge action {a} is not shared by {} and {}",
                c1.name, c2.name
            )));
        }
    }
    Ok(())
}

fn composed_name(steps: &[&ProofStep]) -> Name {
    name(&steps
        .iter()
        .map(|s| s.contract.name().to_string())
        .collect::<Vec<_>>()
        .join("+"))
}

/// Applies a composition rule to previously established proof steps.
/// `instance` is needed only by `aux-comp`, whose auxiliarity witness is
/// checked exhaustively.
pub fn compose_contracts(
    premises: Vec<ProofStep>,
    rule: Rule,
    instance: Option<&Instance>,
) -> Result<ProofStep, RuleError> {
    if premises.len() != 2 {
        return Err(RuleError::PremiseCount {
            rule: rule.name(),
            expected: 2,
            got: premises.len(),
        });
    }
    let s1 = &premises[0];
    let s2 = &premises[1];
    let cname = composed_name(&[s1, s2]);

    let step = match rule {
        Rule::NaiveComp => {
            let (c1, c2) = both_state(s1, s2, rule)?;
            state_bridge_match(&c1.guarantee, &c2.assume)?;
            let invariant = conjoin(s1.invariant.as_ref(), s2.invariant.as_ref())?;
            let mut parts = s1.parts.clone();
            parts.extend(s2.parts.iter().cloned());
            let component = compose_all(&parts)?;
            ProofStep {
                contract: Contract::State(StateContract {
                    name: cname,
                    assume: c1.assume.clone(),
                    component,
                    guarantee: c2.guarantee.clone(),
                    invariant: Some(invariant.clone()),
                }),
                parts,
                invariant: Some(invariant),
                how: StepKind::Composed {
                    rule,
                    premises,
                },
            }
        }
        Rule::BridgeComp | Rule::AuxComp => {
            let (c1, c2) = both_state(s1, s2, rule)?;
            state_bridge_match(&c1.guarantee, &c2.assume)?;
            // the shared bridge operand: last of premise 1, first of premise 2
            let b1 = s1.parts.last().ok_or_else(|| {
                RuleError::RuleSideConditionFailed("first premise has no operands".into())
            })?;
            let b2 = s2.parts.first().ok_or_else(|| {
                RuleError::RuleSideConditionFailed("second premise has no operands".into())
            })?;
            if b1 != b2 {
                return Err(RuleError::RuleSideConditionFailed(format!(
                    "premises do not share a bridge component ({} vs {})",
                    b1.name, b2.name
                )));
            }
            let bridge = b1.clone();
            if rule == Rule::AuxComp {
                let inst = instance.ok_or_else(|| {
                    RuleError::RuleSideConditionFailed(
                        "aux-comp needs an instance for the auxiliarity witness".into(),
                    )
                })?;
                if !is_auxiliary(&bridge, inst)? {
                    return Err(RuleError::RuleSideConditionFailed(format!(
                        "{} is not auxiliary: some action is disabled somewhere",
                        bridge.name
                    )));
                }
            }
            match rule {
                Rule::BridgeComp => {
                    let invariant = conjoin(s1.invariant.as_ref(), s2.invariant.as_ref())?;
                    let mut parts = s1.parts.clone();
                    parts.extend(s2.parts.iter().skip(1).cloned());
                    let component = compose_all(&parts)?;
                    ProofStep {
                        contract: Contract::State(StateContract {
                            name: cname,
                            assume: c1.assume.clone(),
                            component,
                            guarantee: c2.guarantee.clone(),
                            invariant: Some(invariant.clone()),
                        }),
                        parts,
                        invariant: Some(invariant),
                        how: StepKind::Composed { rule, premises },
                    }
                }
                _ => {
                    // aux-comp: conclusion drops the bridge and the invariant
                    let mut parts: Vec<Component> =
                        s1.parts[..s1.parts.len() - 1].to_vec();
                    parts.extend(s2.parts.iter().skip(1).cloned());
                    let component = compose_all(&parts)?;
                    ProofStep {
                        contract: Contract::State(StateContract {
                            name: cname,
                            assume: c1.assume.clone(),
                            component,
                            guarantee: c2.guarantee.clone(),
                            invariant: None,
                        }),
                        parts,
                        invariant: None,
                        how: StepKind::Composed { rule, premises },
                    }
                }
            }
        }
        Rule::SflComp | Rule::SflSafe => {
            let (c1, c2) = both_action(s1, s2, rule)?;
            sfl_bridge_match(&c1.guarantee, &c2.assume)?;
            bridge_alphabet_ok(&c1.guarantee, &c1.component, &c2.component)?;
            let rho = c1.guarantee.clone();
            if rule == Rule::SflComp {
                let invariant = conjoin(s1.invariant.as_ref(), s2.invariant.as_ref())?;
                let mut parts = s1.parts.clone();
                if let Some(b) = build_b(&rho)? {
                    parts.push(b);
                }
                parts.extend(s2.parts.iter().cloned());
                let component = compose_all(&parts)?;
                ProofStep {
                    contract: Contract::Action(ActionContract {
                        name: cname,
                        assume: c1.assume.clone(),
                        component,
                        guarantee: c2.guarantee.clone(),
                        invariant: Some(invariant.clone()),
                    }),
                    parts,
                    invariant: Some(invariant),
                    how: StepKind::Composed { rule, premises },
                }
            } else {
                let mut parts = s1.parts.clone();
                parts.extend(s2.parts.iter().cloned());
                let component = compose_all(&parts)?;
                ProofStep {
                    contract: Contract::Action(ActionContract {
                        name: cname,
                        assume: c1.assume.clone(),
                        component,
                        guarantee: c2.guarantee.clone(),
                        invariant: None,
                    }),
                    parts,
                    invariant: None,
                    how: StepKind::Composed { rule, premises },
                }
            }
        }
        Rule::HybridComp | Rule::HybridSafe => {
            let c1 = as_action(s1, rule)?;
            let c2 = as_hybrid(s2, rule)?;
            sfl_bridge_match(&c1.guarantee, &c2.assume)?;
            bridge_alphabet_ok(&c1.guarantee, &c1.component, &c2.component)?;
            let rho = c1.guarantee.clone();
            if rule == Rule::HybridComp {
                let invariant = conjoin(s1.invariant.as_ref(), s2.invariant.as_ref())?;
                let mut parts = s1.parts.clone();
                if let Some(b) = build_b(&rho)? {
                    parts.push(b);
                }
                parts.extend(s2.parts.iter().cloned());
                let component = compose_all(&parts)?;
                ProofStep {
                    contract: Contract::Hybrid(HybridContract {
                        name: cname,
                        assume: c1.assume.clone(),
                        component,
                        guarantee: c2.guarantee.clone(),
                        invariant: Some(invariant.clone()),
                    }),
                    parts,
                    invariant: Some(invariant),
                    how: StepKind::Composed { rule, premises },
                }
            } else {
                let mut parts = s1.parts.clone();
                parts.extend(s2.parts.iter().cloned());
                let component = compose_all(&parts)?;
                ProofStep {
                    contract: Contract::Hybrid(HybridContract {
                        name: cname,
                        assume: c1.assume.clone(),
                        component,
                        guarantee: c2.guarantee.clone(),
                        invariant: None,
                    }),
                    parts,
                    invariant: None,
                    how: StepKind::Composed { rule, premises },
                }
            }
        }
    };
    Ok(step)
}

fn both_state<'a>(
    s1: &'a ProofStep,
    s2: &'a ProofStep,
    rule: Rule,
) -> Result<(&'a StateContract, &'a StateContract), RuleError> {
    match (&s1.contract, &s2.contract) {
        (Contract::State(a), Contract::State(b)) => Ok((a, b)),
        _ => Err(RuleError::RuleSideConditionFailed(format!(
            "{} takes two state contracts",
            rule.name()
        ))),
    }
}

fn both_action<'a>(
    s1: &'a ProofStep,
    s2: &'a ProofStep,
    rule: Rule,
) -> Result<(&'a ActionContract, &'a ActionContract), RuleError> {
    match (&s1.contract, &s2.contract) {
        (Contract::Action(a), Contract::Action(b)) => Ok((a, b)),
        _ => Err(RuleError::RuleSideConditionFailed(format!(
            "{} takes two action contracts",
            rule.name()
        ))),
    }
}

fn as_action<'a>(s: &'a ProofStep, rule: Rule) -> Result<&'a ActionContract, RuleError> {
    match &s.contract {
        Contract::Action(a) => Ok(a),
        _ => Err(RuleError::RuleSideConditionFailed(format!(
            "{} takes an action contract as its first premise",
            rule.name()
        ))),
    }
}

fn as_hybrid<'a>(s: &'a ProofStep, rule: Rule) -> Result<&'a HybridContract, RuleError> {
    match &s.contract {
        Contract::Hybrid(h) => Ok(h),
        _ => Err(RuleError::RuleSideConditionFailed(format!(
            "{} takes a hybrid contract as its second premise",
            rule.name()
        ))),
    }
}
