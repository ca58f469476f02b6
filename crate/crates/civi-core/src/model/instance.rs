//! Finite instances and the packed state representation used by every
//! exhaustive check.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use super::{name, Component, Name, Sort, Value};

/// Default ceiling on enumerated state counts.
pub const DEFAULT_STATE_CEILING: u128 = 100_000_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("parameter {0} is not bound by the instance")]
    UnboundParam(Name),
    #[error("parameter {0} is bound to the empty set (pass allow_empty to permit this)")]
    EmptyBinding(Name),
    #[error("state space of {component} has {total} states, over the ceiling {ceiling}")]
    StateSpaceOverflow {
        component: Name,
        total: u128,
        ceiling: u128,
    },
    #[error("value space of sort {sort} is too large to materialize")]
    SortSpaceTooLarge { sort: String },
}

/// A finite instantiation: each parameter maps to a set of fresh atoms, and
/// naturals are enumerated up to `nat_bound` inclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    bindings: BTreeMap<Name, Vec<Name>>,
    pub nat_bound: u64,
    pub allow_empty: bool,
}

impl Instance {
    pub fn new(nat_bound: u64) -> Instance {
        Instance {
            bindings: BTreeMap::new(),
            nat_bound,
            allow_empty: false,
        }
    }

    /// Binds a parameter; atoms are sorted lexicographically so enumeration
    /// order never depends on declaration order.
    pub fn bind(mut self, param: &str, atoms: &[&str]) -> Instance {
        let mut v: Vec<Name> = atoms.iter().map(|a| name(a)).collect();
        v.sort();
        v.dedup();
        self.bindings.insert(name(param), v);
        self
    }

    pub fn bind_names(&mut self, param: Name, mut atoms: Vec<Name>) {
        atoms.sort();
        atoms.dedup();
        self.bindings.insert(param, atoms);
    }

    pub fn atoms(&self, param: &str) -> Option<&[Name]> {
        self.bindings.get(param).map(|v| v.as_slice())
    }

    pub fn bindings(&self) -> &BTreeMap<Name, Vec<Name>> {
        &self.bindings
    }

    /// Checks that every parameter in `params` is bound, and non-empty
    /// unless empty bindings were explicitly allowed.
    pub fn validate_for(&self, params: &BTreeSet<Name>) -> Result<(), InstanceError> {
        for p in params {
            match self.bindings.get(p) {
                None => return Err(InstanceError::UnboundParam(p.clone())),
                Some(v) if v.is_empty() && !self.allow_empty => {
                    return Err(InstanceError::EmptyBinding(p.clone()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// All values of a sort under this instance, in enumeration order.
    pub fn value_space(&self, sort: &Sort) -> Result<Vec<Value>, InstanceError> {
        Ok(match sort {
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Sort::Atom(p) => self
                .bindings
                .get(p)
                .ok_or_else(|| InstanceError::UnboundParam(p.clone()))?
                .iter()
                .map(|a| Value::Atom(a.clone()))
                .collect(),
            Sort::Enum(lits) => lits.iter().map(|l| Value::Str(l.clone())).collect(),
            Sort::Nat => (0..=self.nat_bound).map(Value::Nat).collect(),
            Sort::Set(elem) => {
                let base = self.value_space(elem)?;
                let n = base.len();
                if n >= 28 {
                    return Err(InstanceError::SortSpaceTooLarge {
                        sort: sort.to_string(),
                    });
                }
                let mut out = Vec::with_capacity(1usize << n);
                for mask in 0u64..(1u64 << n) {
                    let mut s = BTreeSet::new();
                    for (i, v) in base.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            s.insert(v.clone());
                        }
                    }
                    out.push(Value::Set(s));
                }
                out
            }
            Sort::Fn(args, result) => {
                let keys = self.fn_domain(args)?;
                let results = self.value_space(result)?;
                if checked_pow(results.len() as u128, keys.len() as u128) > (1 << 28) {
                    return Err(InstanceError::SortSpaceTooLarge {
                        sort: sort.to_string(),
                    });
                }
                let mut out = Vec::new();
                let mut odometer = vec![0usize; keys.len()];
                loop {
                    let map: BTreeMap<Value, Value> = keys
                        .iter()
                        .zip(&odometer)
                        .map(|(k, &ri)| (k.clone(), results[ri].clone()))
                        .collect();
                    out.push(Value::Fn(map));
                    // advance, last key fastest
                    let mut pos = keys.len();
                    loop {
                        if pos == 0 {
                            return Ok(out);
                        }
                        pos -= 1;
                        odometer[pos] += 1;
                        if odometer[pos] < results.len() {
                            break;
                        }
                        odometer[pos] = 0;
                    }
                }
            }
            Sort::Tuple(ts) => {
                let spaces: Result<Vec<_>, _> = ts.iter().map(|t| self.value_space(t)).collect();
                cartesian(&spaces?).into_iter().map(Value::Tuple).collect()
            }
            Sort::Record(fields) => {
                let spaces: Result<Vec<_>, _> =
                    fields.iter().map(|(_, s)| self.value_space(s)).collect();
                cartesian(&spaces?)
                    .into_iter()
                    .map(|vals| {
                        Value::Record(
                            fields
                                .iter()
                                .map(|(n, _)| n.clone())
                                .zip(vals)
                                .collect(),
                        )
                    })
                    .collect()
            }
        })
    }

    /// Keys of a function sort: the single argument's values, or tuples when
    /// the sort takes several arguments.
    pub fn fn_domain(&self, args: &[Sort]) -> Result<Vec<Value>, InstanceError> {
        if args.len() == 1 {
            self.value_space(&args[0])
        } else {
            let spaces: Result<Vec<_>, _> = args.iter().map(|a| self.value_space(a)).collect();
            Ok(cartesian(&spaces?).into_iter().map(Value::Tuple).collect())
        }
    }

    /// Size of a sort's value space without materializing it.
    pub fn space_size(&self, sort: &Sort) -> Result<u128, InstanceError> {
        Ok(match sort {
            Sort::Bool => 2,
            Sort::Atom(p) => self
                .bindings
                .get(p)
                .ok_or_else(|| InstanceError::UnboundParam(p.clone()))?
                .len() as u128,
            Sort::Enum(lits) => lits.len() as u128,
            Sort::Nat => self.nat_bound as u128 + 1,
            Sort::Set(elem) => {
                let n = self.space_size(elem)?;
                if n >= 100 {
                    return Ok(u128::MAX);
                }
                1u128.checked_shl(n as u32).unwrap_or(u128::MAX)
            }
            Sort::Fn(args, result) => {
                let mut dom = 1u128;
                for a in args {
                    dom = dom.saturating_mul(self.space_size(a)?);
                }
                let res = self.space_size(result)?;
                checked_pow(res, dom)
            }
            Sort::Tuple(ts) => {
                let mut n = 1u128;
                for t in ts {
                    n = n.saturating_mul(self.space_size(t)?);
                }
                n
            }
            Sort::Record(fields) => {
                let mut n = 1u128;
                for (_, s) in fields {
                    n = n.saturating_mul(self.space_size(s)?);
                }
                n
            }
        })
    }
}

fn checked_pow(base: u128, exp: u128) -> u128 {
    if base == 0 {
        return if exp == 0 { 1 } else { 0 };
    }
    if base == 1 {
        return 1;
    }
    // base >= 2 saturates within 128 multiplications
    let mut acc = 1u128;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
        if acc == u128::MAX {
            return acc;
        }
    }
    acc
}

fn cartesian(spaces: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for space in spaces {
        let mut next = Vec::with_capacity(out.len() * space.len());
        for prefix in &out {
            for v in space {
                let mut row = prefix.clone();
                row.push(v.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// A packed state: per-variable indices into the precomputed value spaces of
/// one `StateSpace`. Ordering is the deterministic enumeration order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State {
    pub idx: Box<[u32]>,
}

/// Precomputed enumeration context for one component under one instance:
/// variable table, per-variable value spaces, and reverse indices for packing
/// successor values.
pub struct StateSpace {
    pub component: Arc<Component>,
    pub instance: Instance,
    /// Variable names in component declaration order.
    pub var_names: Vec<Name>,
    var_slots: HashMap<Name, usize>,
    pub spaces: Vec<Vec<Value>>,
    indices: Vec<HashMap<Value, u32>>,
    /// Parameter domains precomputed as set values.
    param_sets: BTreeMap<Name, Value>,
    pub total: u128,
}

impl StateSpace {
    pub fn build(
        component: &Component,
        instance: &Instance,
        ceiling: u128,
    ) -> Result<StateSpace, InstanceError> {
        instance.validate_for(&component.params)?;
        let mut total = 1u128;
        for (_, sort) in &component.vars {
            total = total.saturating_mul(instance.space_size(sort)?);
        }
        if total > ceiling {
            return Err(InstanceError::StateSpaceOverflow {
                component: component.name.clone(),
                total,
                ceiling,
            });
        }
        let mut spaces = Vec::new();
        let mut indices = Vec::new();
        let mut var_names = Vec::new();
        let mut var_slots = HashMap::new();
        for (slot, (n, sort)) in component.vars.iter().enumerate() {
            let space = instance.value_space(sort)?;
            let index: HashMap<Value, u32> = space
                .iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), i as u32))
                .collect();
            var_names.push(n.clone());
            var_slots.insert(n.clone(), slot);
            spaces.push(space);
            indices.push(index);
        }
        let mut param_sets = BTreeMap::new();
        for p in &component.params {
            let atoms = instance
                .atoms(p)
                .ok_or_else(|| InstanceError::UnboundParam(p.clone()))?;
            param_sets.insert(
                p.clone(),
                Value::Set(atoms.iter().map(|a| Value::Atom(a.clone())).collect()),
            );
        }
        Ok(StateSpace {
            component: Arc::new(component.clone()),
            instance: instance.clone(),
            var_names,
            var_slots,
            spaces,
            indices,
            param_sets,
            total,
        })
    }

    pub fn slot(&self, var: &str) -> Option<usize> {
        self.var_slots.get(var).copied()
    }

    pub fn value(&self, state: &State, slot: usize) -> &Value {
        &self.spaces[slot][state.idx[slot] as usize]
    }

    pub fn value_of(&self, state: &State, var: &str) -> Option<&Value> {
        self.slot(var).map(|s| self.value(state, s))
    }

    pub fn param_set(&self, param: &str) -> Option<&Value> {
        self.param_sets.get(param)
    }

    /// Packs explicit per-variable values into a state. Values must lie in
    /// the corresponding spaces.
    pub fn pack(&self, values: &[Value]) -> Option<State> {
        let mut idx = Vec::with_capacity(values.len());
        for (slot, v) in values.iter().enumerate() {
            idx.push(*self.indices[slot].get(v)?);
        }
        Some(State { idx: idx.into() })
    }

    pub fn value_index(&self, slot: usize, v: &Value) -> Option<u32> {
        self.indices[slot].get(v).copied()
    }

    /// Decodes the `ordinal`-th state of the deterministic enumeration.
    /// The first declared variable is the most significant digit.
    pub fn state_at(&self, ordinal: u128) -> State {
        let mut idx = vec![0u32; self.spaces.len()];
        let mut rem = ordinal;
        for slot in (0..self.spaces.len()).rev() {
            let radix = self.spaces[slot].len() as u128;
            idx[slot] = (rem % radix) as u32;
            rem /= radix;
        }
        State { idx: idx.into() }
    }

    /// Streams every type-correct state exactly once, in enumeration order.
    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        let total = self.total;
        (0..total).map(move |i| self.state_at(i))
    }

    pub fn state_to_map(&self, state: &State) -> BTreeMap<Name, Value> {
        self.var_names
            .iter()
            .enumerate()
            .map(|(slot, n)| (n.clone(), self.value(state, slot).clone()))
            .collect()
    }

    /// Renders a state in DSL value syntax, one `var = value` pair per entry.
    pub fn state_to_text(&self, state: &State) -> String {
        self.var_names
            .iter()
            .enumerate()
            .map(|(slot, n)| format!("{n} = {}", self.value(state, slot)))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Formula, Sort};

    fn inst2() -> Instance {
        Instance::new(2).bind("RMs", &["r2", "r1"])
    }

    #[test]
    fn atoms_are_sorted_lexicographically() {
        let i = inst2();
        let atoms: Vec<_> = i.atoms("RMs").unwrap().iter().map(|a| a.to_string()).collect();
        assert_eq!(atoms, vec!["r1", "r2"]);
    }

    #[test]
    fn value_space_sizes() {
        let i = inst2();
        let rm_enum = Sort::Enum(vec![
            name("working"),
            name("prepared"),
            name("commit"),
            name("abort"),
        ]);
        let fn_sort = Sort::fun(Sort::Atom(name("RMs")), rm_enum);
        assert_eq!(i.space_size(&fn_sort).unwrap(), 16);
        assert_eq!(i.value_space(&fn_sort).unwrap().len(), 16);
        let set_sort = Sort::set(Sort::Atom(name("RMs")));
        assert_eq!(i.space_size(&set_sort).unwrap(), 4);
        assert_eq!(i.space_size(&Sort::Nat).unwrap(), 3);
    }

    #[test]
    fn empty_binding_rejected_unless_allowed() {
        let mut i = Instance::new(0);
        i.bind_names(name("P"), vec![]);
        let params: BTreeSet<Name> = [name("P")].into();
        assert!(matches!(
            i.validate_for(&params),
            Err(InstanceError::EmptyBinding(_))
        ));
        i.allow_empty = true;
        assert!(i.validate_for(&params).is_ok());
    }

    #[test]
    fn state_ordinals_round_trip() {
        let comp = Component {
            name: name("C"),
            params: [name("RMs")].into(),
            vars: vec![
                (name("a"), Sort::Bool),
                (name("b"), Sort::Atom(name("RMs"))),
            ],
            init: Formula::True,
            actions: vec![],
        };
        let space = StateSpace::build(&comp, &inst2(), DEFAULT_STATE_CEILING).unwrap();
        assert_eq!(space.total, 4);
        let all: Vec<State> = space.states().collect();
        assert_eq!(all.len(), 4);
        for (i, s) in all.iter().enumerate() {
            assert_eq!(space.state_at(i as u128), *s);
        }
        // last variable varies fastest
        assert_eq!(space.value(&all[0], 0), &Value::Bool(false));
        assert_eq!(space.value(&all[1], 0), &Value::Bool(false));
        assert_ne!(space.value(&all[0], 1), space.value(&all[1], 1));
    }
}
