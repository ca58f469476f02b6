//! Local invariant inference: a greatest-fixpoint weeding loop over a pool
//! of candidate predicates. Candidates that survive initiation are weeded
//! by consecution counterexamples until the surviving conjunction is
//! inductive and still implies the guarantee.

use serde::Serialize;

use crate::contracts::check::{check_inductive_with, consecution_cti, CheckError, Cti, Verdict};
use crate::contracts::Obligation;
use crate::model::eval::holds;
use crate::model::sortcheck::sortcheck_formula;
use crate::model::successor::initial_states;
use crate::model::{name, Domain, Formula, Instance, Sort, StateSpace, Value};

/// Candidate predicates for one obligation, in deterministic order.
#[derive(Debug, Clone)]
pub struct PredicatePool {
    pub candidates: Vec<Formula>,
}

impl PredicatePool {
    pub fn empty() -> PredicatePool {
        PredicatePool {
            candidates: Vec::new(),
        }
    }

    pub fn extend(&mut self, extra: Vec<Formula>) {
        for f in extra {
            if !self.candidates.contains(&f) {
                self.candidates.push(f);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Instantiates the built-in templates over the obligation's variables:
/// universally quantified implications, equivalences, and memberships
/// relating boolean function variables, enum-valued function variables,
/// set variables, and scalar enum variables over each parameter.
pub fn generate_pool(ob: &Obligation, _instance: &Instance, budget: usize) -> PredicatePool {
    let component = &ob.component;
    let r = name("r");
    let mut out: Vec<Formula> = Vec::new();

    for p in &component.params {
        let atom = Sort::Atom(p.clone());
        let bool_fns: Vec<&crate::model::Name> = component
            .vars
            .iter()
            .filter(|(_, s)| *s == Sort::fun(atom.clone(), Sort::Bool))
            .map(|(n, _)| n)
            .collect();
        let enum_fns: Vec<(&crate::model::Name, &Vec<crate::model::Name>)> = component
            .vars
            .iter()
            .filter_map(|(n, s)| match s {
                Sort::Fn(args, result) if args.as_slice() == [atom.clone()] => match &**result {
                    Sort::Enum(lits) => Some((n, lits)),
                    _ => None,
                },
                _ => None,
            })
            .collect();
        let set_vars: Vec<&crate::model::Name> = component
            .vars
            .iter()
            .filter(|(_, s)| **s == Sort::set(atom.clone()))
            .map(|(n, _)| n)
            .collect();
        let scalar_enums: Vec<(&crate::model::Name, &Vec<crate::model::Name>)> = component
            .vars
            .iter()
            .filter_map(|(n, s)| match s {
                Sort::Enum(lits) => Some((n, lits)),
                _ => None,
            })
            .collect();

        let fa = |body: Formula| Formula::forall(&r, Domain::Param(p.clone()), body);
        let app = |v: &crate::model::Name| {
            Formula::apply(Formula::var(v), vec![Formula::Bound(r.clone())])
        };

        // f[r] <=> v[r] = lit ; f[r] => v[r] = lit ; f[r] => v[r] /= lit ;
        // v[r] = lit => f[r]
        for f in &bool_fns {
            for (v, lits) in &enum_fns {
                for lit in lits.iter() {
                    let eq = Formula::eq(app(v), Formula::StrLit(lit.clone()));
                    out.push(fa(Formula::iff(app(f), eq.clone())));
                    out.push(fa(Formula::implies(app(f), eq.clone())));
                    out.push(fa(Formula::implies(app(f), Formula::not(eq.clone()))));
                    out.push(fa(Formula::implies(eq, app(f))));
                }
            }
        }
        // (f[r] /\ v[r] = lit) => g[r]
        for f in &bool_fns {
            for g in &bool_fns {
                if f == g {
                    continue;
                }
                for (v, lits) in &enum_fns {
                    for lit in lits.iter() {
                        let eq = Formula::eq(app(v), Formula::StrLit(lit.clone()));
                        out.push(fa(Formula::implies(
                            Formula::and(app(f), eq),
                            app(g),
                        )));
                    }
                }
            }
        }
        // r \in s => f[r] ; f[r] => r \in s
        for f in &bool_fns {
            for s in &set_vars {
                let member = Formula::mem(Formula::Bound(r.clone()), Formula::var(s));
                out.push(fa(Formula::implies(member.clone(), app(f))));
                out.push(fa(Formula::implies(app(f), member)));
            }
        }
        // f[r] => e = lit ; f[r] => e /= lit
        for f in &bool_fns {
            for (e, lits) in &scalar_enums {
                for lit in lits.iter() {
                    let eq = Formula::eq(Formula::var(e), Formula::StrLit(lit.clone()));
                    out.push(fa(Formula::implies(app(f), eq.clone())));
                    out.push(fa(Formula::implies(app(f), Formula::not(eq))));
                }
            }
        }
        // f[r] => g[r]
        for f in &bool_fns {
            for g in &bool_fns {
                if f != g {
                    out.push(fa(Formula::implies(app(f), app(g))));
                }
            }
        }
    }

    out.retain(|f| sortcheck_formula(f, component, false, &[]).is_ok());
    out.truncate(budget);
    PredicatePool { candidates: out }
}

#[derive(Debug, Clone, Serialize)]
pub enum HoudiniEvent {
    InitiationPruned {
        predicate: String,
        state: String,
    },
    ConsecutionPruned {
        predicates: Vec<String>,
        cti: String,
    },
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct HoudiniLog {
    pub iterations: usize,
    pub events: Vec<HoudiniEvent>,
}

#[derive(Debug, Clone)]
pub enum HoudiniResult {
    /// The surviving conjunction; passes the inductive check verbatim.
    Invariant(Formula),
    /// No pool subset works; carries the counterexample that removed the
    /// guarantee (or that remained at a guaranteeless fixpoint).
    Failed { cti: Option<Cti> },
}

/// Greatest-fixpoint weeding. The guarantee is pinned: it always enters the
/// candidate set, and its deletion fails the run immediately, because no
/// weaker conjunction can imply it.
pub fn houdini(
    ob: &Obligation,
    pool: &PredicatePool,
    instance: &Instance,
    ceiling: u128,
) -> Result<(HoudiniResult, HoudiniLog), CheckError> {
    let mut log = HoudiniLog::default();
    let space = StateSpace::build(&ob.component, instance, ceiling)?;

    let mut candidates: Vec<Formula> = vec![ob.guarantee.clone()];
    for p in &pool.candidates {
        if !candidates.contains(p) {
            candidates.push(p.clone());
        }
    }

    // Initiation filter: drop every candidate false in some initial state.
    let init_constrained = Formula::and(ob.component.init.clone(), ob.assume.clone());
    let inits = initial_states(&space, &init_constrained)?;
    let mut kept = Vec::with_capacity(candidates.len());
    for c in candidates {
        let mut pruned_at = None;
        for s in &inits {
            if !holds(&c, &space, s)? {
                pruned_at = Some(s.clone());
                break;
            }
        }
        match pruned_at {
            None => kept.push(c),
            Some(s) => {
                let is_guarantee = c == ob.guarantee;
                log.events.push(HoudiniEvent::InitiationPruned {
                    predicate: c.to_string(),
                    state: space.state_to_text(&s),
                });
                if is_guarantee {
                    return Ok((
                        HoudiniResult::Failed {
                            cti: Some(Cti {
                                kind: crate::contracts::check::CtiKind::Initiation,
                                state: space.state_to_map(&s),
                                successor: None,
                                action: None,
                            }),
                        },
                        log,
                    ));
                }
            }
        }
    }
    let mut surviving = kept;

    loop {
        log.iterations += 1;
        let candidate_inv = Formula::and_all(surviving.clone());
        let cti = consecution_cti(ob, &candidate_inv, &space)?;
        let Some(cti) = cti else {
            // Fixpoint: surviving conjunction is inductive and contains the
            // guarantee, so it implies it.
            let invariant = Formula::and_all(surviving.clone());
            let recheck = check_inductive_with(ob, &invariant, instance, ceiling)?;
            match recheck.verdict {
                Verdict::Proved => return Ok((HoudiniResult::Invariant(invariant), log)),
                Verdict::Cti(c) => {
                    // The weeding loop guarantees this cannot happen; treat
                    // it as a failure rather than masking the bug.
                    return Ok((HoudiniResult::Failed { cti: Some(c) }, log));
                }
            }
        };

        // Delete every candidate false at the successor state.
        let t_map = cti.successor.clone().expect("consecution cti has a successor");
        let t_values: Vec<Value> = space
            .var_names
            .iter()
            .map(|n| t_map.get(n).cloned().expect("cti covers all variables"))
            .collect();
        let t = space.pack(&t_values).expect("cti successor in space");
        let mut deleted = Vec::new();
        let mut next_surviving = Vec::with_capacity(surviving.len());
        for c in surviving.into_iter() {
            if holds(&c, &space, &t)? {
                next_surviving.push(c);
            } else {
                deleted.push(c.to_string());
            }
        }
        let guarantee_deleted = !next_surviving.contains(&ob.guarantee);
        log.events.push(HoudiniEvent::ConsecutionPruned {
            predicates: deleted.clone(),
            cti: cti.to_text(),
        });
        if deleted.is_empty() {
            // The invariant failed at t yet every conjunct holds there;
            // impossible by construction.
            return Ok((HoudiniResult::Failed { cti: Some(cti) }, log));
        }
        if guarantee_deleted {
            return Ok((HoudiniResult::Failed { cti: Some(cti) }, log));
        }
        surviving = next_surviving;
    }
}
