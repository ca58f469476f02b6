//! Machine-checkable certificates: the proof tree serialized with the
//! instance, per-obligation verdicts, and a re-check stamp obtained by
//! running the inductive check on the composed conclusion directly.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

use crate::model::Instance;

use super::check::{check_inductive_with, CheckError, Verdict};
use super::lower::{lower, LowerError};
use super::rules::{ProofStep, StepKind};
use super::Contract;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("leaf contract {0} was not proved on this instance")]
    LeafNotProved(String),
    #[error("re-check of the composed invariant failed: {0}")]
    RecheckFailed(String),
    #[error("the conclusion carries no invariant and cannot be re-checked inductively")]
    NoComposedInvariant,
    #[error(transparent)]
    Lower(#[from] LowerError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceInfo {
    pub bindings: std::collections::BTreeMap<String, Vec<String>>,
    pub nat_bound: u64,
    pub allow_empty: bool,
}

impl InstanceInfo {
    pub fn of(instance: &Instance) -> InstanceInfo {
        InstanceInfo {
            bindings: instance
                .bindings()
                .iter()
                .map(|(k, v)| {
                    (
                        k.to_string(),
                        v.iter().map(|a| a.to_string()).collect(),
                    )
                })
                .collect(),
            nat_bound: instance.nat_bound,
            allow_empty: instance.allow_empty,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertStep {
    pub contract: String,
    pub kind: String,
    /// `None` for leaves; the rule name for composed steps.
    pub rule: Option<String>,
    pub premises: Vec<usize>,
    pub component: String,
    pub assume: String,
    pub guarantee: String,
    pub invariant: Option<String>,
    pub invariant_source: Option<String>,
    pub verdict: Option<String>,
    pub states: Option<u128>,
    pub duration_ms: Option<u128>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecheckStamp {
    pub verdict: String,
    pub states: u128,
    pub duration_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub tool: String,
    pub version: String,
    pub timestamp: u64,
    pub instance: InstanceInfo,
    /// Flattened proof tree, premises before conclusions.
    pub steps: Vec<CertStep>,
    pub conclusion: usize,
    pub composed_invariant: String,
    pub recheck: RecheckStamp,
    pub renamings: Vec<(String, String)>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialization")
    }
}

fn flatten(step: &ProofStep, out: &mut Vec<CertStep>) -> Result<usize, CertifyError> {
    let premise_ids = match &step.how {
        StepKind::Leaf { .. } => Vec::new(),
        StepKind::Composed { premises, .. } => {
            let mut ids = Vec::new();
            for p in premises {
                ids.push(flatten(p, out)?);
            }
            ids
        }
    };
    let (rule, verdict, states, duration_ms, invariant_source) = match &step.how {
        StepKind::Leaf {
            verdict,
            states,
            duration_ms,
            invariant_source,
            ..
        } => {
            if !verdict.is_proved() {
                return Err(CertifyError::LeafNotProved(step.contract.name().to_string()));
            }
            (
                None,
                Some("proved".to_string()),
                Some(*states),
                Some(*duration_ms),
                Some(invariant_source.to_string()),
            )
        }
        StepKind::Composed { rule, .. } => {
            (Some(rule.name().to_string()), None, None, None, None)
        }
    };
    let (assume, guarantee) = match &step.contract {
        Contract::State(c) => (c.assume.to_string(), c.guarantee.to_string()),
        Contract::Action(c) => (c.assume.to_string(), c.guarantee.to_string()),
        Contract::Hybrid(c) => (c.assume.to_string(), c.guarantee.to_string()),
    };
    out.push(CertStep {
        contract: step.contract.name().to_string(),
        kind: step.contract.kind_name().to_string(),
        rule,
        premises: premise_ids,
        component: step
            .parts
            .iter()
            .map(|c| c.name.to_string())
            .collect::<Vec<_>>()
            .join(" || "),
        assume,
        guarantee,
        invariant: step.invariant.as_ref().map(|f| f.to_string()),
        invariant_source,
        verdict,
        states,
        duration_ms,
    });
    Ok(out.len() - 1)
}

fn collect_renamings(step: &ProofStep, out: &mut Vec<(String, String)>) {
    if let StepKind::Leaf { obligation, .. } = &step.how {
        for (from, to) in &obligation.renamings {
            out.push((from.to_string(), to.to_string()));
        }
    }
    if let StepKind::Composed { premises, .. } = &step.how {
        for p in premises {
            collect_renamings(p, out);
        }
    }
}

/// Produces a certificate for a proof tree whose leaves were discharged on
/// `instance`. The conclusion's composed invariant is re-checked from
/// scratch on the composed system; a failure here signals an implementation
/// bug, never an expected outcome.
pub fn certify(
    root: &ProofStep,
    instance: &Instance,
    ceiling: u128,
) -> Result<Certificate, CertifyError> {
    let mut steps = Vec::new();
    let conclusion = flatten(root, &mut steps)?;
    let mut renamings = Vec::new();
    collect_renamings(root, &mut renamings);

    let invariant = root
        .invariant
        .clone()
        .ok_or(CertifyError::NoComposedInvariant)?;

    let mut obligation = lower(&root.contract)?;
    obligation.invariant = Some(invariant.clone());
    let started = Instant::now();
    let outcome = check_inductive_with(&obligation, &invariant, instance, ceiling)?;
    let duration_ms = started.elapsed().as_millis();
    match &outcome.verdict {
        Verdict::Proved => {}
        Verdict::Cti(cti) => {
            return Err(CertifyError::RecheckFailed(cti.to_text()));
        }
    }

    Ok(Certificate {
        tool: "civi".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        instance: InstanceInfo::of(instance),
        steps,
        conclusion,
        composed_invariant: invariant.to_string(),
        recheck: RecheckStamp {
            verdict: "proved".to_string(),
            states: outcome.states,
            duration_ms,
        },
        renamings,
    })
}
