//! Formula evaluation against packed states. Evaluation is pure: identical
//! inputs always yield identical values.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{Domain, Formula, Name, State, StateSpace, Value};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("primed variable {0} evaluated without a next state")]
    MissingNextState(Name),
    #[error("natural {value} exceeds the instance bound {bound}")]
    OutOfBounds { value: u64, bound: u64 },
    #[error("unbound name {0} during evaluation")]
    Unbound(Name),
    #[error("evaluation reached an ill-sorted term: {0}")]
    Internal(String),
}

/// Evaluation context. `env` holds action formals and quantified variables;
/// it is pushed and popped during evaluation.
pub struct EvalCx<'s> {
    pub space: &'s StateSpace,
    pub current: &'s State,
    pub next: Option<&'s State>,
    pub env: Vec<(Name, Value)>,
}

impl<'s> EvalCx<'s> {
    pub fn new(space: &'s StateSpace, current: &'s State) -> EvalCx<'s> {
        EvalCx {
            space,
            current,
            next: None,
            env: Vec::new(),
        }
    }

    pub fn with_next(space: &'s StateSpace, current: &'s State, next: &'s State) -> EvalCx<'s> {
        EvalCx {
            space,
            current,
            next: Some(next),
            env: Vec::new(),
        }
    }

    fn lookup_env(&self, n: &Name) -> Option<&Value> {
        self.env
            .iter()
            .rev()
            .find(|(en, _)| en == n)
            .map(|(_, v)| v)
    }

    fn domain_values(&self, d: &Domain) -> Result<Vec<Value>, EvalError> {
        match d {
            Domain::Param(p) => match self.space.param_set(p) {
                Some(Value::Set(atoms)) => Ok(atoms.iter().cloned().collect()),
                _ => Err(EvalError::Unbound(p.clone())),
            },
            Domain::Nat => Ok((0..=self.space.instance.nat_bound).map(Value::Nat).collect()),
        }
    }
}

/// Evaluates a formula or term. Boolean formulas produce `Value::Bool`.
pub fn eval<'s>(f: &Formula, cx: &mut EvalCx<'s>) -> Result<Cow<'s, Value>, EvalError> {
    match f {
        Formula::True => Ok(Cow::Owned(Value::Bool(true))),
        Formula::False => Ok(Cow::Owned(Value::Bool(false))),
        Formula::NatLit(n) => {
            let bound = cx.space.instance.nat_bound;
            if *n > bound {
                return Err(EvalError::OutOfBounds { value: *n, bound });
            }
            Ok(Cow::Owned(Value::Nat(*n)))
        }
        Formula::StrLit(s) => Ok(Cow::Owned(Value::Str(s.clone()))),
        Formula::Var { name, primed } => {
            let slot = cx
                .space
                .slot(name)
                .ok_or_else(|| EvalError::Unbound(name.clone()))?;
            let state = if *primed {
                cx.next
                    .ok_or_else(|| EvalError::MissingNextState(name.clone()))?
            } else {
                cx.current
            };
            Ok(Cow::Borrowed(cx.space.value(state, slot)))
        }
        Formula::Param(p) => cx
            .space
            .param_set(p)
            .map(Cow::Borrowed)
            .ok_or_else(|| EvalError::Unbound(p.clone())),
        Formula::Bound(n) => cx
            .lookup_env(n)
            .cloned()
            .map(Cow::Owned)
            .ok_or_else(|| EvalError::Unbound(n.clone())),
        Formula::Eq(a, b) => {
            let va = eval(a, cx)?;
            let vb = eval(b, cx)?;
            Ok(Cow::Owned(Value::Bool(*va == *vb)))
        }
        Formula::Mem(e, s) => {
            let ve = eval(e, cx)?;
            let vs = eval(s, cx)?;
            match &*vs {
                Value::Set(elems) => Ok(Cow::Owned(Value::Bool(elems.contains(&*ve)))),
                other => Err(EvalError::Internal(format!(
                    "membership in non-set value {other}"
                ))),
            }
        }
        Formula::SetLit(es) => {
            let mut out = BTreeSet::new();
            for e in es {
                out.insert(eval(e, cx)?.into_owned());
            }
            Ok(Cow::Owned(Value::Set(out)))
        }
        Formula::SetUnion(a, b) => {
            let va = eval(a, cx)?;
            let vb = eval(b, cx)?;
            match (&*va, &*vb) {
                (Value::Set(x), Value::Set(y)) => {
                    let mut out = x.clone();
                    out.extend(y.iter().cloned());
                    Ok(Cow::Owned(Value::Set(out)))
                }
                _ => Err(EvalError::Internal("union of non-sets".into())),
            }
        }
        Formula::SetFilter { var, domain, pred } => {
            let mut out = BTreeSet::new();
            for v in cx.domain_values(domain)? {
                cx.env.push((var.clone(), v.clone()));
                let keep = eval(pred, cx)?.truth();
                cx.env.pop();
                if keep {
                    out.insert(v);
                }
            }
            Ok(Cow::Owned(Value::Set(out)))
        }
        Formula::Apply(fun, args) => {
            let vf = eval(fun, cx)?;
            let key = if args.len() == 1 {
                eval(&args[0], cx)?.into_owned()
            } else {
                let mut parts = Vec::with_capacity(args.len());
                for a in args {
                    parts.push(eval(a, cx)?.into_owned());
                }
                Value::Tuple(parts)
            };
            match vf {
                Cow::Borrowed(Value::Fn(map)) => map
                    .get(&key)
                    .map(Cow::Borrowed)
                    .ok_or_else(|| EvalError::Internal(format!("application outside domain: {key}"))),
                Cow::Owned(Value::Fn(mut map)) => map
                    .remove(&key)
                    .map(Cow::Owned)
                    .ok_or_else(|| EvalError::Internal(format!("application outside domain: {key}"))),
                other => Err(EvalError::Internal(format!(
                    "application of non-function {other}"
                ))),
            }
        }
        Formula::FnBuild { var, domain, body } => {
            let mut map = BTreeMap::new();
            for v in cx.domain_values(domain)? {
                cx.env.push((var.clone(), v.clone()));
                let result = eval(body, cx)?.into_owned();
                cx.env.pop();
                map.insert(v, result);
            }
            Ok(Cow::Owned(Value::Fn(map)))
        }
        Formula::FnExcept { base, updates } => {
            let mut out = eval(base, cx)?.into_owned();
            for (path, value) in updates {
                let mut keys = Vec::with_capacity(path.len());
                for p in path {
                    keys.push(eval(p, cx)?.into_owned());
                }
                let v = eval(value, cx)?.into_owned();
                apply_update(&mut out, &keys, v)?;
            }
            Ok(Cow::Owned(out))
        }
        Formula::TupleLit(es) => {
            let mut out = Vec::with_capacity(es.len());
            for e in es {
                out.push(eval(e, cx)?.into_owned());
            }
            Ok(Cow::Owned(Value::Tuple(out)))
        }
        Formula::TupleProj(t, i) => {
            let vt = eval(t, cx)?;
            match vt {
                Cow::Borrowed(Value::Tuple(vs)) => vs
                    .get(*i)
                    .map(Cow::Borrowed)
                    .ok_or_else(|| EvalError::Internal("tuple index out of range".into())),
                Cow::Owned(Value::Tuple(mut vs)) => {
                    if *i < vs.len() {
                        Ok(Cow::Owned(vs.swap_remove(*i)))
                    } else {
                        Err(EvalError::Internal("tuple index out of range".into()))
                    }
                }
                _ => Err(EvalError::Internal("projection of non-tuple".into())),
            }
        }
        Formula::RecordLit(fields) => {
            let mut out = BTreeMap::new();
            for (n, e) in fields {
                out.insert(n.clone(), eval(e, cx)?.into_owned());
            }
            Ok(Cow::Owned(Value::Record(out)))
        }
        Formula::Field(r, n) => {
            let vr = eval(r, cx)?;
            match vr {
                Cow::Borrowed(Value::Record(fs)) => fs
                    .get(n)
                    .map(Cow::Borrowed)
                    .ok_or_else(|| EvalError::Internal(format!("missing field {n}"))),
                Cow::Owned(Value::Record(mut fs)) => fs
                    .remove(n)
                    .map(Cow::Owned)
                    .ok_or_else(|| EvalError::Internal(format!("missing field {n}"))),
                _ => Err(EvalError::Internal("field access on non-record".into())),
            }
        }
        Formula::Cmp(op, a, b) => {
            let va = eval(a, cx)?;
            let vb = eval(b, cx)?;
            match (&*va, &*vb) {
                (Value::Nat(x), Value::Nat(y)) => Ok(Cow::Owned(Value::Bool(op.holds(*x, *y)))),
                _ => Err(EvalError::Internal("comparison of non-naturals".into())),
            }
        }
        Formula::Not(a) => {
            let v = eval(a, cx)?.truth();
            Ok(Cow::Owned(Value::Bool(!v)))
        }
        Formula::And(a, b) => {
            if !eval(a, cx)?.truth() {
                return Ok(Cow::Owned(Value::Bool(false)));
            }
            eval(b, cx)
        }
        Formula::Or(a, b) => {
            if eval(a, cx)?.truth() {
                return Ok(Cow::Owned(Value::Bool(true)));
            }
            eval(b, cx)
        }
        Formula::Implies(a, b) => {
            if !eval(a, cx)?.truth() {
                return Ok(Cow::Owned(Value::Bool(true)));
            }
            eval(b, cx)
        }
        Formula::Iff(a, b) => {
            let va = eval(a, cx)?.truth();
            let vb = eval(b, cx)?.truth();
            Ok(Cow::Owned(Value::Bool(va == vb)))
        }
        Formula::Forall { var, domain, body } => {
            for v in cx.domain_values(domain)? {
                cx.env.push((var.clone(), v));
                let holds = eval(body, cx)?.truth();
                cx.env.pop();
                if !holds {
                    return Ok(Cow::Owned(Value::Bool(false)));
                }
            }
            Ok(Cow::Owned(Value::Bool(true)))
        }
        Formula::Exists { var, domain, body } => {
            for v in cx.domain_values(domain)? {
                cx.env.push((var.clone(), v));
                let holds = eval(body, cx)?.truth();
                cx.env.pop();
                if holds {
                    return Ok(Cow::Owned(Value::Bool(true)));
                }
            }
            Ok(Cow::Owned(Value::Bool(false)))
        }
    }
}

fn apply_update(target: &mut Value, keys: &[Value], v: Value) -> Result<(), EvalError> {
    match target {
        Value::Fn(map) => {
            let (k, rest) = keys
                .split_first()
                .ok_or_else(|| EvalError::Internal("empty update path".into()))?;
            let entry = map
                .get_mut(k)
                .ok_or_else(|| EvalError::Internal(format!("update outside domain: {k}")))?;
            if rest.is_empty() {
                *entry = v;
                Ok(())
            } else {
                apply_update(entry, rest, v)
            }
        }
        other => Err(EvalError::Internal(format!(
            "EXCEPT update on non-function {other}"
        ))),
    }
}

/// Convenience wrapper: evaluates a closed boolean formula on one state.
pub fn holds(f: &Formula, space: &StateSpace, state: &State) -> Result<bool, EvalError> {
    let mut cx = EvalCx::new(space, state);
    Ok(eval(f, &mut cx)?.truth())
}

/// As `holds`, over a state pair.
pub fn holds_step(
    f: &Formula,
    space: &StateSpace,
    s: &State,
    t: &State,
) -> Result<bool, EvalError> {
    let mut cx = EvalCx::with_next(space, s, t);
    Ok(eval(f, &mut cx)?.truth())
}
