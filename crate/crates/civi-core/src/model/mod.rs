//! Core model: sorts, values, formulas, components, instances, and the
//! evaluation machinery shared by every other module.

pub mod component;
pub mod eval;
pub mod formula;
pub mod instance;
pub mod sortcheck;
pub mod successor;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

pub use component::{ActionDecl, ActionEvent, ActionTrace, Component};
pub use eval::{eval, EvalCx, EvalError};
pub use formula::{CmpOp, Domain, Formula};
pub use instance::{Instance, State, StateSpace, DEFAULT_STATE_CEILING};
pub use sortcheck::{sortcheck, sortcheck_formula, SortError};

/// Interned identifier. Cloning is cheap; comparison is by string content.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// The sort (type) of a value. Every state variable, action formal, and
/// quantified variable carries one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Sort {
    Bool,
    /// An element of the named parameter's instantiated domain.
    Atom(Name),
    /// A string constant drawn from a fixed literal list.
    Enum(Vec<Name>),
    /// Bounded natural, enumerated as 0..=nat_bound per instance.
    Nat,
    Set(Box<Sort>),
    /// Total function; argument list is non-empty.
    Fn(Vec<Sort>, Box<Sort>),
    Tuple(Vec<Sort>),
    /// Fields are kept sorted by name.
    Record(Vec<(Name, Sort)>),
}

impl Sort {
    pub fn fun(arg: Sort, result: Sort) -> Sort {
        Sort::Fn(vec![arg], Box::new(result))
    }

    pub fn set(elem: Sort) -> Sort {
        Sort::Set(Box::new(elem))
    }

    /// True if the sort contains a function sort anywhere inside it.
    pub fn contains_fn(&self) -> bool {
        match self {
            Sort::Bool | Sort::Atom(_) | Sort::Enum(_) | Sort::Nat => false,
            Sort::Fn(..) => true,
            Sort::Set(e) => e.contains_fn(),
            Sort::Tuple(ts) => ts.iter().any(Sort::contains_fn),
            Sort::Record(fs) => fs.iter().any(|(_, s)| s.contains_fn()),
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Atom(p) => write!(f, "{p}"),
            Sort::Enum(lits) => {
                write!(f, "{{")?;
                for (i, l) in lits.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "\"{l}\"")?;
                }
                write!(f, "}}")
            }
            Sort::Nat => write!(f, "Nat"),
            Sort::Set(e) => write!(f, "SUBSET {e}"),
            Sort::Fn(args, r) => {
                write!(f, "[")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, " -> {r}]")
            }
            Sort::Tuple(ts) => {
                write!(f, "<<")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ">>")
            }
            Sort::Record(fs) => {
                write!(f, "[")?;
                for (i, (n, s)) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{n} : {s}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// A concrete value. Functions are represented as total finite maps;
/// multi-argument functions key on tuples.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Nat(u64),
    /// Enum literal.
    Str(Name),
    /// Element of an instantiated parameter domain.
    Atom(Name),
    Set(BTreeSet<Value>),
    Fn(BTreeMap<Value, Value>),
    Tuple(Vec<Value>),
    Record(BTreeMap<Name, Value>),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn truth(&self) -> bool {
        matches!(self, Value::Bool(true))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => write!(f, "TRUE"),
            Value::Bool(false) => write!(f, "FALSE"),
            Value::Nat(n) => write!(f, "{n}"),
            Value::Str(s) => write!(f, "\"{s}\""),
            Value::Atom(a) => write!(f, "{a}"),
            Value::Set(elems) => {
                write!(f, "{{")?;
                for (i, e) in elems.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "}}")
            }
            Value::Fn(map) => {
                write!(f, "[")?;
                for (i, (k, v)) in map.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k} |-> {v}")?;
                }
                write!(f, "]")
            }
            Value::Tuple(vs) => {
                write!(f, "<<")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ">>")
            }
            Value::Record(fields) => {
                write!(f, "[")?;
                for (i, (n, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{n} |-> {v}")?;
                }
                write!(f, "]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_display_matches_dsl_syntax() {
        let v = Value::Fn(
            [
                (Value::Atom(name("r1")), Value::Str(name("working"))),
                (Value::Atom(name("r2")), Value::Bool(false)),
            ]
            .into(),
        );
        assert_eq!(v.to_string(), "[r1 |-> \"working\", r2 |-> FALSE]");
        let s = Value::Set([Value::Nat(0), Value::Nat(2)].into());
        assert_eq!(s.to_string(), "{0, 2}");
    }

    #[test]
    fn set_of_functions_is_flagged() {
        let bad = Sort::set(Sort::fun(Sort::Bool, Sort::Bool));
        assert!(bad.contains_fn());
        assert!(!Sort::set(Sort::set(Sort::Bool)).contains_fn());
    }
}
