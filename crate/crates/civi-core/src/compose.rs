//! Parallel composition of components: shared actions synchronize, unshared
//! actions interleave with frame conditions on the other operand's
//! variables.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{name, ActionDecl, Component, Formula, Name};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ComposeError {
    #[error("components share the state variable {0}")]
    SharedVariable(Name),
    #[error("components have different parameter sets ({0} vs {1})")]
    ParamMismatch(Name, Name),
    #[error("shared action {0} has different formal sort lists")]
    SignatureMismatch(Name),
    #[error("cannot compose an empty component list")]
    EmptyList,
}

/// How a composition will be carried out: the merged signature plus, for
/// every action of the result, which operands own it.
#[derive(Debug, Clone)]
pub struct CompositionPlan {
    pub shared_actions: BTreeSet<Name>,
    pub params: BTreeSet<Name>,
    pub vars: Vec<(Name, crate::model::Sort)>,
    /// action name -> operand indices (0 = left, 1 = right) that define it
    pub provenance: BTreeMap<Name, Vec<usize>>,
}

pub fn plan(c1: &Component, c2: &Component) -> Result<CompositionPlan, ComposeError> {
    if c1.params != c2.params {
        return Err(ComposeError::ParamMismatch(
            c1.name.clone(),
            c2.name.clone(),
        ));
    }
    let vars1 = c1.var_names();
    for (v, _) in &c2.vars {
        if vars1.contains(v) {
            return Err(ComposeError::SharedVariable(v.clone()));
        }
    }
    let alpha1 = c1.alphabet();
    let alpha2 = c2.alphabet();
    let shared: BTreeSet<Name> = alpha1.intersection(&alpha2).cloned().collect();
    for a in &shared {
        let s1 = c1.action(a).unwrap().formal_sorts();
        let s2 = c2.action(a).unwrap().formal_sorts();
        if s1 != s2 {
            return Err(ComposeError::SignatureMismatch(a.clone()));
        }
    }
    let mut provenance: BTreeMap<Name, Vec<usize>> = BTreeMap::new();
    for a in &alpha1 {
        provenance.entry(a.clone()).or_default().push(0);
    }
    for a in &alpha2 {
        provenance.entry(a.clone()).or_default().push(1);
    }
    let mut vars = c1.vars.clone();
    vars.extend(c2.vars.iter().cloned());
    Ok(CompositionPlan {
        shared_actions: shared,
        params: c1.params.clone(),
        vars,
        provenance,
    })
}

/// Frame conjunct: every variable of `vars` is unchanged.
fn frame(vars: &[(Name, crate::model::Sort)]) -> Vec<Formula> {
    vars.iter()
        .map(|(v, _)| Formula::eq(Formula::var_primed(v), Formula::var(v)))
        .collect()
}

/// Renames the free occurrences of `c2`'s formals in its body to `c1`'s
/// formal names, so the conjoined body reads both sets of constraints over
/// one argument list.
fn align_formals(body: &Formula, from: &[(Name, crate::model::Sort)], to: &[(Name, crate::model::Sort)]) -> Formula {
    let mut out = body.clone();
    for ((f, _), (t, _)) in from.iter().zip(to) {
        if f != t {
            out = out.rename_free_bound(f, t);
        }
    }
    out
}

pub fn compose(c1: &Component, c2: &Component) -> Result<Component, ComposeError> {
    let plan = plan(c1, c2)?;
    let mut actions = Vec::new();
    for a in &c1.actions {
        if plan.shared_actions.contains(&a.name) {
            let other = c2.action(&a.name).unwrap();
            let body2 = align_formals(&other.body, &other.formals, &a.formals);
            actions.push(ActionDecl {
                name: a.name.clone(),
                formals: a.formals.clone(),
                body: Formula::and(a.body.clone(), body2),
            });
        } else {
            let mut parts = vec![a.body.clone()];
            parts.extend(frame(&c2.vars));
            actions.push(ActionDecl {
                name: a.name.clone(),
                formals: a.formals.clone(),
                body: Formula::and_all(parts),
            });
        }
    }
    for a in &c2.actions {
        if !plan.shared_actions.contains(&a.name) {
            let mut parts = vec![a.body.clone()];
            parts.extend(frame(&c1.vars));
            actions.push(ActionDecl {
                name: a.name.clone(),
                formals: a.formals.clone(),
                body: Formula::and_all(parts),
            });
        }
    }
    Ok(Component {
        name: name(&format!("{}_{}", c1.name, c2.name)),
        params: plan.params,
        vars: plan.vars,
        init: Formula::and(c1.init.clone(), c2.init.clone()),
        actions,
    })
}

/// Left fold of `compose`. The result is independent of fold order up to
/// logical equivalence of the action bodies.
pub fn compose_all(components: &[Component]) -> Result<Component, ComposeError> {
    let (first, rest) = components.split_first().ok_or(ComposeError::EmptyList)?;
    let mut acc = first.clone();
    for c in rest {
        acc = compose(&acc, c)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Sort};

    fn comp(n: &str, vars: &[(&str, Sort)], actions: Vec<ActionDecl>) -> Component {
        Component {
            name: name(n),
            params: [name("P")].into(),
            vars: vars.iter().map(|(v, s)| (name(v), s.clone())).collect(),
            init: Formula::True,
            actions,
        }
    }

    #[test]
    fn alphabet_is_the_union() {
        let a = comp(
            "A",
            &[("x", Sort::Bool)],
            vec![ActionDecl {
                name: name("Go"),
                formals: vec![],
                body: Formula::eq(Formula::var_primed(&name("x")), Formula::True),
            }],
        );
        let b = comp(
            "B",
            &[("y", Sort::Bool)],
            vec![ActionDecl {
                name: name("Stop"),
                formals: vec![],
                body: Formula::eq(Formula::var_primed(&name("y")), Formula::False),
            }],
        );
        let ab = compose(&a, &b).unwrap();
        let alpha: Vec<String> = ab.alphabet().iter().map(|n| n.to_string()).collect();
        assert_eq!(alpha, vec!["Go", "Stop"]);
        // unshared actions carry frame equalities for the other side
        let go = ab.action("Go").unwrap();
        assert!(go.body.to_string().contains("y' = y"));
    }

    #[test]
    fn shared_variable_is_rejected() {
        let a = comp("A", &[("x", Sort::Bool)], vec![]);
        let b = comp("B", &[("x", Sort::Bool)], vec![]);
        assert_eq!(
            compose(&a, &b).unwrap_err(),
            ComposeError::SharedVariable(name("x"))
        );
    }

    #[test]
    fn empty_component_is_a_unit() {
        let a = comp(
            "A",
            &[("x", Sort::Bool)],
            vec![ActionDecl {
                name: name("Go"),
                formals: vec![],
                body: Formula::eq(Formula::var_primed(&name("x")), Formula::True),
            }],
        );
        let unit = Component::empty(name("E"), [name("P")].into());
        let au = compose(&a, &unit).unwrap();
        assert_eq!(au.vars, a.vars);
        assert_eq!(au.alphabet(), a.alphabet());
        // body is unchanged apart from an empty frame
        assert_eq!(au.action("Go").unwrap().body, a.action("Go").unwrap().body);
    }

    #[test]
    fn signature_mismatch_detected() {
        let a = comp(
            "A",
            &[("x", Sort::Bool)],
            vec![ActionDecl {
                name: name("Go"),
                formals: vec![(name("p"), Sort::Atom(name("P")))],
                body: Formula::True,
            }],
        );
        let b = comp(
            "B",
            &[("y", Sort::Bool)],
            vec![ActionDecl {
                name: name("Go"),
                formals: vec![],
                body: Formula::True,
            }],
        );
        assert_eq!(
            compose(&a, &b).unwrap_err(),
            ComposeError::SignatureMismatch(name("Go"))
        );
    }
}
