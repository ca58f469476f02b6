//! Well-sortedness checking. Runs before any evaluation; success guarantees
//! the evaluator can only fail with bound/next-state errors.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{Component, Domain, Formula, Name, Sort};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SortError {
    #[error("{location}: expected {expected}, found {found}")]
    IllSorted {
        location: String,
        expected: String,
        found: String,
    },
    #[error("{location}: unbound name {name}")]
    UnboundName { location: String, name: Name },
    #[error("{location}: cannot determine the sort of this term without context")]
    CannotInfer { location: String },
    #[error("{location}: {reason}")]
    BadSort { location: String, reason: String },
    #[error("{location}: primed variable {name} not allowed here")]
    PrimeNotAllowed { location: String, name: Name },
    #[error("duplicate name {0}")]
    Duplicate(Name),
}

impl SortError {
    fn at(mut self, seg: &str) -> SortError {
        let loc = match &mut self {
            SortError::IllSorted { location, .. }
            | SortError::UnboundName { location, .. }
            | SortError::CannotInfer { location }
            | SortError::BadSort { location, .. }
            | SortError::PrimeNotAllowed { location, .. } => location,
            SortError::Duplicate(_) => return self,
        };
        if loc.is_empty() {
            *loc = seg.to_string();
        } else {
            *loc = format!("{seg}.{loc}");
        }
        self
    }
}

fn ill(expected: &Sort, found: &Sort) -> SortError {
    SortError::IllSorted {
        location: String::new(),
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

pub struct SortCx<'a> {
    pub params: &'a BTreeSet<Name>,
    pub vars: &'a [(Name, Sort)],
    pub primes_allowed: bool,
    bound: Vec<(Name, Sort)>,
}

impl<'a> SortCx<'a> {
    pub fn new(component: &'a Component, primes_allowed: bool) -> SortCx<'a> {
        SortCx {
            params: &component.params,
            vars: &component.vars,
            primes_allowed,
            bound: Vec::new(),
        }
    }

    pub fn push_bound(&mut self, name: Name, sort: Sort) {
        self.bound.push((name, sort));
    }

    fn var_sort(&self, n: &str) -> Option<&Sort> {
        self.vars
            .iter()
            .find(|(vn, _)| vn.as_ref() == n)
            .map(|(_, s)| s)
    }

    fn bound_sort(&self, n: &str) -> Option<&Sort> {
        self.bound
            .iter()
            .rev()
            .find(|(bn, _)| bn.as_ref() == n)
            .map(|(_, s)| s)
    }

    fn domain_sort(&self, d: &Domain) -> Result<Sort, SortError> {
        match d {
            Domain::Param(p) => {
                if self.params.contains(p) {
                    Ok(Sort::Atom(p.clone()))
                } else {
                    Err(SortError::UnboundName {
                        location: String::new(),
                        name: p.clone(),
                    })
                }
            }
            Domain::Nat => Ok(Sort::Nat),
        }
    }
}

/// Validates a sort expression itself: enums are non-empty and duplicate
/// free, function argument lists are non-empty, and sets never contain
/// functions.
pub fn sort_well_formed(sort: &Sort) -> Result<(), SortError> {
    match sort {
        Sort::Bool | Sort::Atom(_) | Sort::Nat => Ok(()),
        Sort::Enum(lits) => {
            if lits.is_empty() {
                return Err(SortError::BadSort {
                    location: String::new(),
                    reason: "enum sort with no literals".into(),
                });
            }
            let mut seen = BTreeSet::new();
            for l in lits {
                if !seen.insert(l.clone()) {
                    return Err(SortError::BadSort {
                        location: String::new(),
                        reason: format!("duplicate enum literal \"{l}\""),
                    });
                }
            }
            Ok(())
        }
        Sort::Set(e) => {
            if e.contains_fn() {
                return Err(SortError::BadSort {
                    location: String::new(),
                    reason: "sets of functions are not enumerable".into(),
                });
            }
            sort_well_formed(e)
        }
        Sort::Fn(args, r) => {
            if args.is_empty() {
                return Err(SortError::BadSort {
                    location: String::new(),
                    reason: "function sort with no arguments".into(),
                });
            }
            for a in args {
                sort_well_formed(a)?;
            }
            sort_well_formed(r)
        }
        Sort::Tuple(ts) => ts.iter().try_for_each(sort_well_formed),
        Sort::Record(fs) => fs.iter().try_for_each(|(_, s)| sort_well_formed(s)),
    }
}

/// Infers the sort of a formula, using `expected` to resolve literals whose
/// sort is context dependent. Returns the (checked) sort.
pub fn infer(f: &Formula, cx: &mut SortCx, expected: Option<&Sort>) -> Result<Sort, SortError> {
    let got = infer_inner(f, cx, expected)?;
    if let Some(exp) = expected {
        if &got != exp {
            return Err(ill(exp, &got));
        }
    }
    Ok(got)
}

fn infer_inner(f: &Formula, cx: &mut SortCx, expected: Option<&Sort>) -> Result<Sort, SortError> {
    match f {
        Formula::True | Formula::False => Ok(Sort::Bool),
        Formula::NatLit(_) => Ok(Sort::Nat),
        Formula::StrLit(s) => match expected {
            Some(Sort::Enum(lits)) if lits.contains(s) => Ok(Sort::Enum(lits.clone())),
            Some(other) => Err(SortError::IllSorted {
                location: String::new(),
                expected: other.to_string(),
                found: format!("\"{s}\""),
            }),
            None => Err(SortError::CannotInfer {
                location: String::new(),
            }),
        },
        Formula::Var { name, primed } => {
            if *primed && !cx.primes_allowed {
                return Err(SortError::PrimeNotAllowed {
                    location: String::new(),
                    name: name.clone(),
                });
            }
            cx.var_sort(name)
                .cloned()
                .ok_or_else(|| SortError::UnboundName {
                    location: String::new(),
                    name: name.clone(),
                })
        }
        Formula::Param(p) => {
            if cx.params.contains(p) {
                Ok(Sort::set(Sort::Atom(p.clone())))
            } else {
                Err(SortError::UnboundName {
                    location: String::new(),
                    name: p.clone(),
                })
            }
        }
        Formula::Bound(n) => cx
            .bound_sort(n)
            .cloned()
            .ok_or_else(|| SortError::UnboundName {
                location: String::new(),
                name: n.clone(),
            }),
        Formula::Eq(a, b) => {
            both_same_sort(a, b, cx).map_err(|e| e.at("="))?;
            Ok(Sort::Bool)
        }
        Formula::Mem(e, s) => {
            match infer(e, cx, None) {
                Ok(elem) => {
                    infer(s, cx, Some(&Sort::set(elem))).map_err(|er| er.at("\\in"))?;
                }
                Err(SortError::CannotInfer { .. }) => {
                    let set_sort = infer(s, cx, None).map_err(|er| er.at("\\in"))?;
                    match set_sort {
                        Sort::Set(elem) => {
                            infer(e, cx, Some(&elem)).map_err(|er| er.at("\\in"))?;
                        }
                        other => {
                            return Err(ill(&Sort::set(Sort::Bool), &other).at("\\in"));
                        }
                    }
                }
                Err(e) => return Err(e.at("\\in")),
            }
            Ok(Sort::Bool)
        }
        Formula::SetLit(es) => match expected {
            Some(Sort::Set(elem)) => {
                for (i, e) in es.iter().enumerate() {
                    infer(e, cx, Some(elem)).map_err(|er| er.at(&format!("set[{i}]")))?;
                }
                Ok(Sort::Set(elem.clone()))
            }
            _ => {
                let mut it = es.iter();
                match it.next() {
                    None => Err(SortError::CannotInfer {
                        location: "{}".into(),
                    }),
                    Some(first) => {
                        let elem = infer(first, cx, None).map_err(|er| er.at("set[0]"))?;
                        for (i, e) in it.enumerate() {
                            infer(e, cx, Some(&elem))
                                .map_err(|er| er.at(&format!("set[{}]", i + 1)))?;
                        }
                        Ok(Sort::set(elem))
                    }
                }
            }
        },
        Formula::SetUnion(a, b) => {
            let sa = match infer(a, cx, expected) {
                Ok(s) => s,
                Err(SortError::CannotInfer { .. }) => {
                    let sb = infer(b, cx, expected).map_err(|e| e.at("\\union"))?;
                    infer(a, cx, Some(&sb)).map_err(|e| e.at("\\union"))?;
                    sb
                }
                Err(e) => return Err(e.at("\\union")),
            };
            if !matches!(sa, Sort::Set(_)) {
                return Err(ill(&Sort::set(Sort::Bool), &sa).at("\\union"));
            }
            infer(b, cx, Some(&sa)).map_err(|e| e.at("\\union"))?;
            Ok(sa)
        }
        Formula::SetFilter { var, domain, pred } => {
            let d = cx.domain_sort(domain)?;
            cx.bound.push((var.clone(), d.clone()));
            let r = infer(pred, cx, Some(&Sort::Bool)).map_err(|e| e.at("filter"));
            cx.bound.pop();
            r?;
            Ok(Sort::set(d))
        }
        Formula::Apply(fun, args) => {
            let fs = infer(fun, cx, None).map_err(|e| e.at("apply"))?;
            match fs {
                Sort::Fn(arg_sorts, result) => {
                    if arg_sorts.len() != args.len() {
                        return Err(SortError::BadSort {
                            location: "apply".into(),
                            reason: format!(
                                "function takes {} arguments, got {}",
                                arg_sorts.len(),
                                args.len()
                            ),
                        });
                    }
                    for (i, (a, s)) in args.iter().zip(&arg_sorts).enumerate() {
                        infer(a, cx, Some(s)).map_err(|e| e.at(&format!("apply.arg[{i}]")))?;
                    }
                    Ok(*result)
                }
                other => Err(SortError::BadSort {
                    location: "apply".into(),
                    reason: format!("applying a non-function of sort {other}"),
                }),
            }
        }
        Formula::FnBuild { var, domain, body } => {
            let d = cx.domain_sort(domain)?;
            let body_expected = match expected {
                Some(Sort::Fn(args, result)) if args.len() == 1 => {
                    if args[0] != d {
                        return Err(ill(&args[0], &d).at("fn-domain"));
                    }
                    Some((**result).clone())
                }
                _ => None,
            };
            cx.bound.push((var.clone(), d.clone()));
            let body_sort = infer(body, cx, body_expected.as_ref());
            cx.bound.pop();
            Ok(Sort::fun(d, body_sort.map_err(|e| e.at("fn-body"))?))
        }
        Formula::FnExcept { base, updates } => {
            let base_sort = match infer(base, cx, expected) {
                Ok(s) => s,
                Err(e) => return Err(e.at("except")),
            };
            for (ui, (path, value)) in updates.iter().enumerate() {
                let mut cursor = base_sort.clone();
                for (pi, key) in path.iter().enumerate() {
                    match cursor {
                        Sort::Fn(arg_sorts, result) => {
                            if arg_sorts.len() != 1 {
                                return Err(SortError::BadSort {
                                    location: format!("except[{ui}]"),
                                    reason: "EXCEPT paths require single-argument functions"
                                        .into(),
                                });
                            }
                            infer(key, cx, Some(&arg_sorts[0]))
                                .map_err(|e| e.at(&format!("except[{ui}].path[{pi}]")))?;
                            cursor = *result;
                        }
                        other => {
                            return Err(SortError::BadSort {
                                location: format!("except[{ui}]"),
                                reason: format!("indexing into non-function sort {other}"),
                            })
                        }
                    }
                }
                infer(value, cx, Some(&cursor))
                    .map_err(|e| e.at(&format!("except[{ui}].value")))?;
            }
            Ok(base_sort)
        }
        Formula::TupleLit(es) => match expected {
            Some(Sort::Tuple(ts)) if ts.len() == es.len() => {
                for (i, (e, t)) in es.iter().zip(ts).enumerate() {
                    infer(e, cx, Some(t)).map_err(|er| er.at(&format!("tuple[{i}]")))?;
                }
                Ok(Sort::Tuple(ts.clone()))
            }
            _ => {
                let mut ts = Vec::with_capacity(es.len());
                for (i, e) in es.iter().enumerate() {
                    ts.push(infer(e, cx, None).map_err(|er| er.at(&format!("tuple[{i}]")))?);
                }
                Ok(Sort::Tuple(ts))
            }
        },
        Formula::TupleProj(t, i) => {
            let ts = infer(t, cx, None).map_err(|e| e.at("proj"))?;
            match ts {
                Sort::Tuple(parts) if *i < parts.len() => Ok(parts[*i].clone()),
                other => Err(SortError::BadSort {
                    location: "proj".into(),
                    reason: format!("projection {i} of sort {other}"),
                }),
            }
        }
        Formula::RecordLit(fields) => match expected {
            Some(Sort::Record(fs)) => {
                if fs.len() != fields.len() {
                    return Err(SortError::BadSort {
                        location: "record".into(),
                        reason: "field set differs from expected record sort".into(),
                    });
                }
                let mut sorted = fields.clone();
                sorted.sort_by(|(a, _), (b, _)| a.cmp(b));
                for ((n, e), (fn_, fs_)) in sorted.iter().zip(fs) {
                    if n != fn_ {
                        return Err(SortError::BadSort {
                            location: "record".into(),
                            reason: format!("unexpected field {n}"),
                        });
                    }
                    infer(e, cx, Some(fs_)).map_err(|er| er.at(&format!("record.{n}")))?;
                }
                Ok(Sort::Record(fs.clone()))
            }
            _ => {
                let mut fs = Vec::with_capacity(fields.len());
                for (n, e) in fields {
                    let s = infer(e, cx, None).map_err(|er| er.at(&format!("record.{n}")))?;
                    fs.push((n.clone(), s));
                }
                fs.sort_by(|(a, _), (b, _)| a.cmp(b));
                Ok(Sort::Record(fs))
            }
        },
        Formula::Field(r, n) => {
            let rs = infer(r, cx, None).map_err(|e| e.at("field"))?;
            match rs {
                Sort::Record(fs) => fs
                    .iter()
                    .find(|(fname, _)| fname == n)
                    .map(|(_, s)| s.clone())
                    .ok_or_else(|| SortError::BadSort {
                        location: "field".into(),
                        reason: format!("no field {n}"),
                    }),
                other => Err(SortError::BadSort {
                    location: "field".into(),
                    reason: format!("field access on sort {other}"),
                }),
            }
        }
        Formula::Cmp(op, a, b) => {
            infer(a, cx, Some(&Sort::Nat)).map_err(|e| e.at(&op.to_string()))?;
            infer(b, cx, Some(&Sort::Nat)).map_err(|e| e.at(&op.to_string()))?;
            Ok(Sort::Bool)
        }
        Formula::Not(a) => {
            infer(a, cx, Some(&Sort::Bool)).map_err(|e| e.at("~"))?;
            Ok(Sort::Bool)
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            infer(a, cx, Some(&Sort::Bool))?;
            infer(b, cx, Some(&Sort::Bool))?;
            Ok(Sort::Bool)
        }
        Formula::Forall { var, domain, body } | Formula::Exists { var, domain, body } => {
            let d = cx.domain_sort(domain)?;
            cx.bound.push((var.clone(), d));
            let r = infer(body, cx, Some(&Sort::Bool));
            cx.bound.pop();
            r.map_err(|e| e.at("quantifier"))?;
            Ok(Sort::Bool)
        }
    }
}

fn both_same_sort(a: &Formula, b: &Formula, cx: &mut SortCx) -> Result<Sort, SortError> {
    match infer(a, cx, None) {
        Ok(sa) => {
            infer(b, cx, Some(&sa))?;
            Ok(sa)
        }
        Err(SortError::CannotInfer { .. }) => {
            let sb = infer(b, cx, None)?;
            infer(a, cx, Some(&sb))?;
            Ok(sb)
        }
        Err(e) => Err(e),
    }
}

/// Checks a whole component: sort declarations, the initial predicate, and
/// every action body. Returns the first failure.
pub fn sortcheck(component: &Component) -> Result<(), SortError> {
    let mut seen_vars = BTreeSet::new();
    for (n, sort) in &component.vars {
        if !seen_vars.insert(n.clone()) {
            return Err(SortError::Duplicate(n.clone()));
        }
        sort_well_formed(sort).map_err(|e| e.at(&format!("{}.var {}", component.name, n)))?;
        if let Sort::Atom(p) = sort {
            if !component.params.contains(p) {
                return Err(SortError::UnboundName {
                    location: format!("{}.var {}", component.name, n),
                    name: p.clone(),
                });
            }
        }
    }

    {
        let mut cx = SortCx::new(component, false);
        infer(&component.init, &mut cx, Some(&Sort::Bool))
            .map_err(|e| e.at(&format!("{}.Init", component.name)))?;
    }

    let mut seen_actions = BTreeSet::new();
    for action in &component.actions {
        if !seen_actions.insert(action.name.clone()) {
            return Err(SortError::Duplicate(action.name.clone()));
        }
        let mut seen_formals = BTreeSet::new();
        for (fname, fsort) in &action.formals {
            if !seen_formals.insert(fname.clone()) {
                return Err(SortError::Duplicate(fname.clone()));
            }
            if component.has_var(fname) {
                return Err(SortError::BadSort {
                    location: format!("{}.{}", component.name, action.name),
                    reason: format!("formal {fname} shadows a state variable"),
                });
            }
            if !super::successor::formal_sort_ok(fsort) {
                return Err(SortError::BadSort {
                    location: format!("{}.{}", component.name, action.name),
                    reason: format!("formal {fname} must have a parameter or Nat sort"),
                });
            }
            if let Sort::Atom(p) = fsort {
                if !component.params.contains(p) {
                    return Err(SortError::UnboundName {
                        location: format!("{}.{}", component.name, action.name),
                        name: p.clone(),
                    });
                }
            }
        }
        let mut cx = SortCx::new(component, true);
        for (fname, fsort) in &action.formals {
            cx.push_bound(fname.clone(), fsort.clone());
        }
        infer(&action.body, &mut cx, Some(&Sort::Bool))
            .map_err(|e| e.at(&format!("{}.{}", component.name, action.name)))?;
    }
    Ok(())
}

/// Checks a standalone formula against a component's variables and
/// parameters. `bound` supplies extra in-scope variables.
pub fn sortcheck_formula(
    f: &Formula,
    component: &Component,
    primes_allowed: bool,
    bound: &[(Name, Sort)],
) -> Result<(), SortError> {
    let mut cx = SortCx::new(component, primes_allowed);
    for (n, s) in bound {
        cx.push_bound(n.clone(), s.clone());
    }
    infer(f, &mut cx, Some(&Sort::Bool))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::name;

    fn toy_rm_like() -> Component {
        let rm_enum = Sort::Enum(vec![
            name("working"),
            name("prepared"),
            name("commit"),
            name("abort"),
        ]);
        Component {
            name: name("C"),
            params: [name("RMs")].into(),
            vars: vec![(name("rmState"), Sort::fun(Sort::Atom(name("RMs")), rm_enum))],
            init: Formula::eq(
                Formula::var(&name("rmState")),
                Formula::FnBuild {
                    var: name("rm"),
                    domain: Domain::Param(name("RMs")),
                    body: Box::new(Formula::StrLit(name("working"))),
                },
            ),
            actions: vec![ActionDecl {
                name: name("Prepare"),
                formals: vec![(name("rm"), Sort::Atom(name("RMs")))],
                body: Formula::and(
                    Formula::eq(
                        Formula::apply(Formula::var(&name("rmState")), vec![Formula::Bound(name("rm"))]),
                        Formula::StrLit(name("working")),
                    ),
                    Formula::eq(
                        Formula::var_primed(&name("rmState")),
                        Formula::FnExcept {
                            base: Box::new(Formula::var(&name("rmState"))),
                            updates: vec![(
                                vec![Formula::Bound(name("rm"))],
                                Formula::StrLit(name("prepared")),
                            )],
                        },
                    ),
                ),
            }],
        }
    }

    use crate::model::{ActionDecl, Component, Domain, Formula};

    #[test]
    fn well_sorted_component_passes() {
        assert!(sortcheck(&toy_rm_like()).is_ok());
    }

    #[test]
    fn enum_assigned_to_function_variable_is_ill_sorted() {
        let mut c = toy_rm_like();
        c.actions[0].body = Formula::eq(
            Formula::var_primed(&name("rmState")),
            Formula::StrLit(name("commit")),
        );
        let err = sortcheck(&c).unwrap_err();
        assert!(matches!(err, SortError::IllSorted { .. }), "{err:?}");
    }

    #[test]
    fn zero_action_component_is_legal() {
        let c = Component {
            name: name("E"),
            params: BTreeSet::new(),
            vars: vec![],
            init: Formula::True,
            actions: vec![],
        };
        assert!(sortcheck(&c).is_ok());
    }

    #[test]
    fn primes_rejected_in_init() {
        let mut c = toy_rm_like();
        c.init = Formula::eq(
            Formula::var_primed(&name("rmState")),
            Formula::var(&name("rmState")),
        );
        assert!(matches!(
            sortcheck(&c),
            Err(SortError::PrimeNotAllowed { .. })
        ));
    }

    #[test]
    fn set_of_functions_rejected() {
        let mut c = toy_rm_like();
        c.vars.push((
            name("bad"),
            Sort::set(Sort::fun(Sort::Bool, Sort::Bool)),
        ));
        assert!(matches!(sortcheck(&c), Err(SortError::BadSort { .. })));
    }
}
