//! Components (parameterized symbolic transition systems), actions, and
//! action traces.

use std::collections::BTreeSet;
use std::fmt;

use super::{Formula, Name, Sort, Value};

/// A named action with sorted formals. The implicit transition relation of a
/// component is the disjunction over its actions of the existential closure
/// of each body over its formals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDecl {
    pub name: Name,
    /// Each formal sort is `Atom` or `Nat`.
    pub formals: Vec<(Name, Sort)>,
    pub body: Formula,
}

impl ActionDecl {
    pub fn formal_sorts(&self) -> Vec<Sort> {
        self.formals.iter().map(|(_, s)| s.clone()).collect()
    }
}

/// A parameterized symbolic transition system: parameters, sorted state
/// variables, an initial-state formula, and named actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub name: Name,
    pub params: BTreeSet<Name>,
    /// Declaration order; drives deterministic state enumeration.
    pub vars: Vec<(Name, Sort)>,
    pub init: Formula,
    pub actions: Vec<ActionDecl>,
}

impl Component {
    /// A component with no variables and no actions; the unit of parallel
    /// composition when its parameters match.
    pub fn empty(name: Name, params: BTreeSet<Name>) -> Component {
        Component {
            name,
            params,
            vars: Vec::new(),
            init: Formula::True,
            actions: Vec::new(),
        }
    }

    pub fn var_sort(&self, name: &str) -> Option<&Sort> {
        self.vars
            .iter()
            .find(|(n, _)| n.as_ref() == name)
            .map(|(_, s)| s)
    }

    pub fn has_var(&self, name: &str) -> bool {
        self.var_sort(name).is_some()
    }

    pub fn var_names(&self) -> BTreeSet<Name> {
        self.vars.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn action(&self, name: &str) -> Option<&ActionDecl> {
        self.actions.iter().find(|a| a.name.as_ref() == name)
    }

    /// The alphabet: the set of action names.
    pub fn alphabet(&self) -> BTreeSet<Name> {
        self.actions.iter().map(|a| a.name.clone()).collect()
    }
}

/// One concrete event: an action name plus fully-evaluated arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionEvent {
    pub action: Name,
    pub args: Vec<Value>,
}

impl fmt::Display for ActionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.action)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A finite action-based behavior.
pub type ActionTrace = Vec<ActionEvent>;
