//! Linking: resolves parsed declarations into model components, fluents,
//! fluent formulas, and contracts. Name resolution order inside formulas is
//! bound variable, then state variable, then parameter, then named formula
//! (inlined).

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::contracts::{ActionContract, Contract, HybridContract, StateContract};
use crate::model::sortcheck::{sortcheck, sortcheck_formula, SortError};
use crate::model::{name, ActionDecl, Component, Domain, Formula, Instance, Name, Sort};
use crate::sfl::{Fluent, SflError, SflFormula};

use super::ast::*;
use super::parse::{parse, ParseError};

#[derive(Debug, Clone)]
pub struct LinkError {
    pub message: String,
    pub span: Option<Span>,
}

impl LinkError {
    fn new(message: impl Into<String>, span: Span) -> LinkError {
        LinkError {
            message: message.into(),
            span: Some(span),
        }
    }

    fn global(message: impl Into<String>) -> LinkError {
        LinkError {
            message: message.into(),
            span: None,
        }
    }
}

impl fmt::Display for LinkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(s) => write!(f, "{s}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for LinkError {}

impl From<SortError> for LinkError {
    fn from(e: SortError) -> LinkError {
        LinkError::global(e.to_string())
    }
}

impl From<SflError> for LinkError {
    fn from(e: SflError) -> LinkError {
        LinkError::global(e.to_string())
    }
}

impl From<ParseError> for LinkError {
    fn from(e: ParseError) -> LinkError {
        LinkError {
            message: e.message.clone(),
            span: Some(e.span),
        }
    }
}

/// Everything a file set links to: components, fluents, named formulas
/// (kept in surface form for per-component resolution), fluent formulas,
/// contracts, and the default instance.
pub struct Linked {
    pub components: IndexMap<Name, Component>,
    pub fluents: IndexMap<Name, Arc<Fluent>>,
    pub formulas: IndexMap<Name, Expr>,
    pub sfl_formulas: IndexMap<Name, SflFormula>,
    pub contracts: IndexMap<Name, Contract>,
    pub instance: Instance,
    pub files: Vec<SpecFile>,
}

// ---- state-formula lowering ----

pub(crate) struct FormulaCx<'a> {
    pub params: &'a BTreeSet<Name>,
    pub vars: BTreeSet<Name>,
    pub defs: &'a IndexMap<Name, Expr>,
    pub bound: Vec<Name>,
    pub expanding: Vec<Name>,
    pub primes_allowed: bool,
}

impl<'a> FormulaCx<'a> {
    fn domain(&self, d: &DomainExpr, span: Span) -> Result<Domain, LinkError> {
        match d {
            DomainExpr::Nat => Ok(Domain::Nat),
            DomainExpr::Name(n) => {
                if self.params.contains(n) {
                    Ok(Domain::Param(n.clone()))
                } else {
                    Err(LinkError::new(
                        format!("unknown domain {n}; domains are parameters or Nat"),
                        span,
                    ))
                }
            }
        }
    }
}

pub(crate) fn lower_formula(e: &Expr, cx: &mut FormulaCx) -> Result<Formula, LinkError> {
    let span = e.span;
    Ok(match &e.kind {
        ExprKind::True => Formula::True,
        ExprKind::False => Formula::False,
        ExprKind::Nat(n) => Formula::NatLit(*n),
        ExprKind::Str(s) => Formula::StrLit(s.clone()),
        ExprKind::Ident(n) => {
            if cx.bound.contains(n) {
                Formula::Bound(n.clone())
            } else if cx.vars.contains(n) {
                Formula::Var {
                    name: n.clone(),
                    primed: false,
                }
            } else if cx.params.contains(n) {
                Formula::Param(n.clone())
            } else if let Some(def) = cx.defs.get(n) {
                if cx.expanding.contains(n) {
                    return Err(LinkError::new(
                        format!("cyclic formula definition {n}"),
                        span,
                    ));
                }
                cx.expanding.push(n.clone());
                let def = def.clone();
                let lowered = lower_formula(&def, cx)?;
                cx.expanding.pop();
                lowered
            } else {
                return Err(LinkError::new(format!("unbound name {n}"), span));
            }
        }
        ExprKind::Call(n, _) => {
            return Err(LinkError::new(
                format!("fluent application {n}(..) is not a state formula"),
                span,
            ))
        }
        ExprKind::Apply(f, args) => {
            let fun = lower_formula(f, cx)?;
            let args = args
                .iter()
                .map(|a| lower_formula(a, cx))
                .collect::<Result<Vec<_>, _>>()?;
            Formula::apply(fun, args)
        }
        ExprKind::Prime(inner) => {
            if !cx.primes_allowed {
                return Err(LinkError::new("primed variable outside an action body", span));
            }
            match lower_formula(inner, cx)? {
                Formula::Var { name, .. } => Formula::Var { name, primed: true },
                _ => {
                    return Err(LinkError::new(
                        "only state variables can be primed",
                        span,
                    ))
                }
            }
        }
        ExprKind::Field(r, n) => Formula::Field(Box::new(lower_formula(r, cx)?), n.clone()),
        ExprKind::ProjIdx(t, i) => Formula::TupleProj(Box::new(lower_formula(t, cx)?), *i),
        ExprKind::Unary(op, a) => match op {
            UnOp::Not => Formula::not(lower_formula(a, cx)?),
            UnOp::Always | UnOp::Eventually | UnOp::Next => {
                return Err(LinkError::new(
                    "temporal operator in a state formula",
                    span,
                ))
            }
        },
        ExprKind::Binary(op, a, b) => {
            use crate::model::CmpOp;
            let mut bin = |f: fn(Formula, Formula) -> Formula,
                           cx: &mut FormulaCx|
             -> Result<Formula, LinkError> {
                Ok(f(lower_formula(a, cx)?, lower_formula(b, cx)?))
            };
            match op {
                BinOp::And => bin(Formula::and, cx)?,
                BinOp::Or => bin(Formula::or, cx)?,
                BinOp::Implies => bin(Formula::implies, cx)?,
                BinOp::Iff => bin(Formula::iff, cx)?,
                BinOp::Eq => bin(Formula::eq, cx)?,
                BinOp::Neq => bin(Formula::neq, cx)?,
                BinOp::In => bin(Formula::mem, cx)?,
                BinOp::NotIn => Formula::not(Formula::mem(
                    lower_formula(a, cx)?,
                    lower_formula(b, cx)?,
                )),
                BinOp::Union => Formula::SetUnion(
                    Box::new(lower_formula(a, cx)?),
                    Box::new(lower_formula(b, cx)?),
                ),
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    let cmp = match op {
                        BinOp::Lt => CmpOp::Lt,
                        BinOp::Le => CmpOp::Le,
                        BinOp::Gt => CmpOp::Gt,
                        _ => CmpOp::Ge,
                    };
                    Formula::Cmp(
                        cmp,
                        Box::new(lower_formula(a, cx)?),
                        Box::new(lower_formula(b, cx)?),
                    )
                }
                BinOp::Until => {
                    return Err(LinkError::new(
                        "temporal operator in a state formula",
                        span,
                    ))
                }
            }
        }
        ExprKind::Quant(kind, binders, domain, body) => {
            let d = cx.domain(domain, span)?;
            for b in binders {
                cx.bound.push(b.clone());
            }
            let inner = lower_formula(body, cx);
            for _ in binders {
                cx.bound.pop();
            }
            let mut out = inner?;
            for b in binders.iter().rev() {
                out = match kind {
                    QuantKind::Forall => Formula::forall(b, d.clone(), out),
                    QuantKind::Exists => Formula::exists(b, d.clone(), out),
                };
            }
            out
        }
        ExprKind::SetEnum(es) => Formula::SetLit(
            es.iter()
                .map(|x| lower_formula(x, cx))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        ExprKind::SetFilter(v, domain, pred) => {
            let d = cx.domain(domain, span)?;
            cx.bound.push(v.clone());
            let p = lower_formula(pred, cx);
            cx.bound.pop();
            Formula::SetFilter {
                var: v.clone(),
                domain: d,
                pred: Box::new(p?),
            }
        }
        ExprKind::FnBuild(v, domain, body) => {
            let d = cx.domain(domain, span)?;
            cx.bound.push(v.clone());
            let b = lower_formula(body, cx);
            cx.bound.pop();
            Formula::FnBuild {
                var: v.clone(),
                domain: d,
                body: Box::new(b?),
            }
        }
        ExprKind::Except(base, updates) => {
            let b = lower_formula(base, cx)?;
            let mut ups = Vec::new();
            for (path, v) in updates {
                let path = path
                    .iter()
                    .map(|p| lower_formula(p, cx))
                    .collect::<Result<Vec<_>, _>>()?;
                ups.push((path, lower_formula(v, cx)?));
            }
            Formula::FnExcept {
                base: Box::new(b),
                updates: ups,
            }
        }
        ExprKind::RecordLit(fields) => Formula::RecordLit(
            fields
                .iter()
                .map(|(n, x)| Ok((n.clone(), lower_formula(x, cx)?)))
                .collect::<Result<Vec<_>, LinkError>>()?,
        ),
        ExprKind::Tuple(es) => Formula::TupleLit(
            es.iter()
                .map(|x| lower_formula(x, cx))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        ExprKind::Unchanged(vars) => {
            if !cx.primes_allowed {
                return Err(LinkError::new("UNCHANGED outside an action body", span));
            }
            let mut parts = Vec::new();
            for v in vars {
                if !cx.vars.contains(v) {
                    return Err(LinkError::new(
                        format!("UNCHANGED of unknown variable {v}"),
                        span,
                    ));
                }
                parts.push(Formula::eq(Formula::var_primed(v), Formula::var(v)));
            }
            Formula::and_all(parts)
        }
    })
}

// ---- fluent-formula lowering ----

struct SflCx<'a> {
    fluents: &'a IndexMap<Name, Arc<Fluent>>,
    defs: &'a IndexMap<Name, SflFormula>,
    params: &'a BTreeSet<Name>,
    bound: Vec<(Name, Sort)>,
}

fn sfl_domain(cx: &SflCx, d: &DomainExpr, span: Span) -> Result<(Domain, Sort), LinkError> {
    match d {
        DomainExpr::Nat => Ok((Domain::Nat, Sort::Nat)),
        DomainExpr::Name(n) => {
            if cx.params.contains(n) {
                Ok((Domain::Param(n.clone()), Sort::Atom(n.clone())))
            } else {
                Err(LinkError::new(
                    format!("unknown domain {n}; domains are parameters or Nat"),
                    span,
                ))
            }
        }
    }
}

fn lower_sfl(e: &Expr, cx: &mut SflCx) -> Result<SflFormula, LinkError> {
    let span = e.span;
    Ok(match &e.kind {
        ExprKind::True => SflFormula::True,
        ExprKind::False => SflFormula::False,
        ExprKind::Ident(n) => {
            if let Some(def) = cx.defs.get(n) {
                def.clone()
            } else if cx.fluents.contains_key(n) {
                return Err(LinkError::new(
                    format!("fluent {n} must be applied to arguments"),
                    span,
                ));
            } else {
                return Err(LinkError::new(
                    format!("unknown fluent formula {n}"),
                    span,
                ));
            }
        }
        ExprKind::Call(n, args) => {
            let fluent = cx
                .fluents
                .get(n)
                .ok_or_else(|| LinkError::from(SflError::UnknownFluent(n.clone())))?
                .clone();
            if args.len() != fluent.arg_sorts.len() {
                return Err(SflError::ArityMismatch {
                    fluent: n.clone(),
                    expected: fluent.arg_sorts.len(),
                    got: args.len(),
                }
                .into());
            }
            let mut arg_names = Vec::with_capacity(args.len());
            for (i, a) in args.iter().enumerate() {
                let ExprKind::Ident(an) = &a.kind else {
                    return Err(LinkError::new(
                        "fluent arguments must be quantified variables",
                        a.span,
                    ));
                };
                match cx.bound.iter().rev().find(|(bn, _)| bn == an) {
                    Some((_, sort)) => {
                        if *sort != fluent.arg_sorts[i] {
                            return Err(LinkError::new(
                                format!(
                                    "argument {an} has sort {sort}, fluent {n} expects {}",
                                    fluent.arg_sorts[i]
                                ),
                                a.span,
                            ));
                        }
                    }
                    None => return Err(SflError::FreeVariable(an.clone()).into()),
                }
                arg_names.push(an.clone());
            }
            SflFormula::Atom {
                fluent,
                args: arg_names,
            }
        }
        ExprKind::Binary(BinOp::Eq, a, b) => {
            let get = |x: &Expr| -> Result<Name, LinkError> {
                match &x.kind {
                    ExprKind::Ident(n) => Ok(n.clone()),
                    _ => Err(LinkError::new(
                        "equality in fluent formulas relates quantified variables",
                        x.span,
                    )),
                }
            };
            let (an, bn) = (get(a)?, get(b)?);
            for n in [&an, &bn] {
                if !cx.bound.iter().any(|(bn_, _)| bn_ == n) {
                    return Err(SflError::FreeVariable(n.clone()).into());
                }
            }
            SflFormula::VarEq(an, bn)
        }
        ExprKind::Unary(op, a) => match op {
            UnOp::Not => SflFormula::not(lower_sfl(a, cx)?),
            UnOp::Always => SflFormula::Always(Box::new(lower_sfl(a, cx)?)),
            UnOp::Eventually => SflFormula::Eventually(Box::new(lower_sfl(a, cx)?)),
            UnOp::Next => SflFormula::Next(Box::new(lower_sfl(a, cx)?)),
        },
        ExprKind::Binary(op, a, b) => {
            let l = lower_sfl(a, cx)?;
            let r = lower_sfl(b, cx)?;
            match op {
                BinOp::And => SflFormula::and(l, r),
                BinOp::Or => SflFormula::or(l, r),
                BinOp::Implies => SflFormula::implies(l, r),
                BinOp::Iff => SflFormula::and(
                    SflFormula::implies(l.clone(), r.clone()),
                    SflFormula::implies(r, l),
                ),
                BinOp::Until => SflFormula::until(l, r),
                _ => {
                    return Err(LinkError::new(
                        "operator is not part of the fluent formula grammar",
                        span,
                    ))
                }
            }
        }
        ExprKind::Quant(kind, binders, domain, body) => {
            let (d, sort) = sfl_domain(cx, domain, span)?;
            for b in binders {
                cx.bound.push((b.clone(), sort.clone()));
            }
            let inner = lower_sfl(body, cx);
            for _ in binders {
                cx.bound.pop();
            }
            let mut out = inner?;
            for b in binders.iter().rev() {
                out = match kind {
                    QuantKind::Forall => SflFormula::Forall {
                        var: b.clone(),
                        domain: d.clone(),
                        body: Box::new(out),
                    },
                    QuantKind::Exists => SflFormula::Exists {
                        var: b.clone(),
                        domain: d.clone(),
                        body: Box::new(out),
                    },
                };
            }
            out
        }
        _ => {
            return Err(LinkError::new(
                "expression is not part of the fluent formula grammar",
                span,
            ))
        }
    })
}

// ---- sorts ----

fn lower_sort(s: &SortExpr, params: &BTreeSet<Name>, span: Span) -> Result<Sort, LinkError> {
    Ok(match s {
        SortExpr::Bool => Sort::Bool,
        SortExpr::Nat => Sort::Nat,
        SortExpr::Named(n) => {
            if params.contains(n) {
                Sort::Atom(n.clone())
            } else {
                return Err(LinkError::new(format!("unknown sort {n}"), span));
            }
        }
        SortExpr::Enum(lits) => Sort::Enum(lits.clone()),
        SortExpr::Set(e) => Sort::set(lower_sort(e, params, span)?),
        SortExpr::Fn(args, r) => Sort::Fn(
            args.iter()
                .map(|a| lower_sort(a, params, span))
                .collect::<Result<Vec<_>, _>>()?,
            Box::new(lower_sort(r, params, span)?),
        ),
        SortExpr::Tuple(ts) => Sort::Tuple(
            ts.iter()
                .map(|t| lower_sort(t, params, span))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        SortExpr::Record(fields) => {
            let mut fs = fields
                .iter()
                .map(|(n, t)| Ok((n.clone(), lower_sort(t, params, span)?)))
                .collect::<Result<Vec<_>, LinkError>>()?;
            fs.sort_by(|(a, _), (b, _)| a.cmp(b));
            Sort::Record(fs)
        }
    })
}

// ---- declaration lowering ----

fn lower_component(
    decl: &ComponentDecl,
    defs: &IndexMap<Name, Expr>,
) -> Result<Component, LinkError> {
    let params: BTreeSet<Name> = decl.params.iter().cloned().collect();
    let mut vars = Vec::new();
    for (n, s) in &decl.vars {
        vars.push((n.clone(), lower_sort(s, &params, decl.span)?));
    }
    let var_names: BTreeSet<Name> = vars.iter().map(|(n, _)| n.clone()).collect();

    let mut cx = FormulaCx {
        params: &params,
        vars: var_names.clone(),
        defs,
        bound: Vec::new(),
        expanding: Vec::new(),
        primes_allowed: false,
    };
    let init = lower_formula(&decl.init, &mut cx)?;

    let mut actions = Vec::new();
    for item in &decl.actions {
        let mut formals = Vec::new();
        for (fname, fsort) in &item.formals {
            let sort = lower_sort(fsort, &params, item.span)?;
            formals.push((fname.clone(), sort));
        }
        let mut acx = FormulaCx {
            params: &params,
            vars: var_names.clone(),
            defs,
            bound: formals.iter().map(|(n, _)| n.clone()).collect(),
            expanding: Vec::new(),
            primes_allowed: true,
        };
        let body = lower_formula(&item.body, &mut acx)?;
        actions.push(ActionDecl {
            name: item.name.clone(),
            formals,
            body,
        });
    }
    Ok(Component {
        name: decl.name.clone(),
        params,
        vars,
        init,
        actions,
    })
}

/// The fluent variable's sort: arguments consumed one at a time through
/// nested single-argument functions, landing in Bool.
fn fluent_var_sort(arg_sorts: &[Sort]) -> Sort {
    let mut out = Sort::Bool;
    for s in arg_sorts.iter().rev() {
        out = Sort::fun(s.clone(), out);
    }
    out
}

fn lower_fluent(decl: &FluentDecl, defs: &IndexMap<Name, Expr>) -> Result<Fluent, LinkError> {
    // parameters: everything named in argument sorts, formal sorts, and the
    // formulas
    let mut params: BTreeSet<Name> = BTreeSet::new();
    let mut collect_sort = |s: &SortExpr, params: &mut BTreeSet<Name>| {
        fn walk(s: &SortExpr, params: &mut BTreeSet<Name>) {
            match s {
                SortExpr::Named(n) => {
                    params.insert(n.clone());
                }
                SortExpr::Set(e) => walk(e, params),
                SortExpr::Fn(args, r) => {
                    args.iter().for_each(|a| walk(a, params));
                    walk(r, params);
                }
                SortExpr::Tuple(ts) => ts.iter().for_each(|t| walk(t, params)),
                SortExpr::Record(fs) => fs.iter().for_each(|(_, t)| walk(t, params)),
                _ => {}
            }
        }
        walk(s, params)
    };
    for s in &decl.arg_sorts {
        collect_sort(s, &mut params);
    }
    for h in &decl.handlers {
        for (_, s) in &h.formals {
            collect_sort(s, &mut params);
        }
    }
    // quantified domains in bodies also name parameters
    fn collect_expr_domains(e: &Expr, params: &mut BTreeSet<Name>) {
        match &e.kind {
            ExprKind::Quant(_, _, DomainExpr::Name(n), body) => {
                params.insert(n.clone());
                collect_expr_domains(body, params);
            }
            ExprKind::FnBuild(_, DomainExpr::Name(n), body) => {
                params.insert(n.clone());
                collect_expr_domains(body, params);
            }
            ExprKind::SetFilter(_, DomainExpr::Name(n), pred) => {
                params.insert(n.clone());
                collect_expr_domains(pred, params);
            }
            _ => {
                // visit children generically
                match &e.kind {
                    ExprKind::Apply(f, args) => {
                        collect_expr_domains(f, params);
                        args.iter().for_each(|a| collect_expr_domains(a, params));
                    }
                    ExprKind::Call(_, args) => {
                        args.iter().for_each(|a| collect_expr_domains(a, params))
                    }
                    ExprKind::Prime(a)
                    | ExprKind::Field(a, _)
                    | ExprKind::ProjIdx(a, _)
                    | ExprKind::Unary(_, a) => collect_expr_domains(a, params),
                    ExprKind::Binary(_, a, b) => {
                        collect_expr_domains(a, params);
                        collect_expr_domains(b, params);
                    }
                    ExprKind::Quant(_, _, DomainExpr::Nat, body) => {
                        collect_expr_domains(body, params)
                    }
                    ExprKind::FnBuild(_, DomainExpr::Nat, body) => {
                        collect_expr_domains(body, params)
                    }
                    ExprKind::SetFilter(_, DomainExpr::Nat, pred) => {
                        collect_expr_domains(pred, params)
                    }
                    ExprKind::SetEnum(es) | ExprKind::Tuple(es) => {
                        es.iter().for_each(|x| collect_expr_domains(x, params))
                    }
                    ExprKind::Except(b, ups) => {
                        collect_expr_domains(b, params);
                        for (path, v) in ups {
                            path.iter().for_each(|p| collect_expr_domains(p, params));
                            collect_expr_domains(v, params);
                        }
                    }
                    ExprKind::RecordLit(fs) => {
                        fs.iter().for_each(|(_, x)| collect_expr_domains(x, params))
                    }
                    _ => {}
                }
            }
        }
    }
    collect_expr_domains(&decl.init, &mut params);
    for h in &decl.handlers {
        collect_expr_domains(&h.body, &mut params);
    }

    let arg_sorts: Vec<Sort> = decl
        .arg_sorts
        .iter()
        .map(|s| lower_sort(s, &params, decl.span))
        .collect::<Result<_, _>>()?;
    let var_sort = fluent_var_sort(&arg_sorts);

    let var_names: BTreeSet<Name> = [decl.var.clone()].into();
    let mut cx = FormulaCx {
        params: &params,
        vars: var_names.clone(),
        defs,
        bound: Vec::new(),
        expanding: Vec::new(),
        primes_allowed: false,
    };
    let init = lower_formula(&decl.init, &mut cx)?;
    let mut actions = Vec::new();
    for item in &decl.handlers {
        let mut formals = Vec::new();
        for (fname, fsort) in &item.formals {
            formals.push((fname.clone(), lower_sort(fsort, &params, item.span)?));
        }
        let mut acx = FormulaCx {
            params: &params,
            vars: var_names.clone(),
            defs,
            bound: formals.iter().map(|(n, _)| n.clone()).collect(),
            expanding: Vec::new(),
            primes_allowed: true,
        };
        let body = lower_formula(&item.body, &mut acx)?;
        actions.push(ActionDecl {
            name: item.name.clone(),
            formals,
            body,
        });
    }
    let machine = Component {
        name: name(&format!("{}T", decl.name)),
        params,
        vars: vec![(decl.var.clone(), var_sort)],
        init,
        actions,
    };

    Ok(Fluent {
        name: decl.name.clone(),
        arg_sorts,
        var: decl.var.clone(),
        machine,
    })
}

// ---- the link step ----

/// Links a set of parsed files: lowers components and fluents, sortchecks
/// them, lowers fluent formulas and contracts, and merges instance blocks.
pub fn link(files: Vec<SpecFile>) -> Result<Linked, LinkError> {
    let mut components = IndexMap::new();
    let mut fluents = IndexMap::new();
    let mut formulas: IndexMap<Name, Expr> = IndexMap::new();
    let mut sfl_exprs: Vec<(Name, Expr)> = Vec::new();
    let mut contract_decls: Vec<ContractDecl> = Vec::new();
    let mut instance = Instance::new(2);

    // collect named declarations, checking cross-file uniqueness per kind
    let mut seen: BTreeSet<(&'static str, Name)> = BTreeSet::new();
    for file in &files {
        for decl in &file.decls {
            let (tag, n) = match decl {
                Decl::Component(c) => ("component", Some(c.name.clone())),
                Decl::Fluent(f) => ("fluent", Some(f.name.clone())),
                Decl::Formula(f) => ("formula", Some(f.name.clone())),
                Decl::Sfl(f) => ("formula", Some(f.name.clone())),
                Decl::Contract(c) => ("contract", Some(c.name.clone())),
                Decl::Instance(_) => ("instance", None),
            };
            if let Some(n) = n {
                if !seen.insert((tag, n.clone())) {
                    return Err(LinkError::global(format!("duplicate {tag} {n}")));
                }
            }
        }
    }

    for file in &files {
        for decl in &file.decls {
            match decl {
                Decl::Formula(f) => {
                    formulas.insert(f.name.clone(), f.body.clone());
                }
                Decl::Sfl(f) => sfl_exprs.push((f.name.clone(), f.body.clone())),
                Decl::Instance(i) => {
                    for (p, atoms) in &i.bindings {
                        instance.bind_names(p.clone(), atoms.clone());
                    }
                    if let Some(nb) = i.natbound {
                        instance.nat_bound = nb;
                    }
                }
                _ => {}
            }
        }
    }

    for file in &files {
        for decl in &file.decls {
            match decl {
                Decl::Component(c) => {
                    let lowered = lower_component(c, &formulas)?;
                    sortcheck(&lowered)?;
                    components.insert(c.name.clone(), lowered);
                }
                Decl::Fluent(f) => {
                    let lowered = lower_fluent(f, &formulas)?;
                    sortcheck(&lowered.machine)?;
                    fluents.insert(f.name.clone(), Arc::new(lowered));
                }
                _ => {}
            }
        }
    }

    // fluent formulas may reference earlier fluent formulas
    let mut sfl_formulas: IndexMap<Name, SflFormula> = IndexMap::new();
    let all_params: BTreeSet<Name> = components
        .values()
        .flat_map(|c| c.params.iter().cloned())
        .chain(fluents.values().flat_map(|f| f.machine.params.iter().cloned()))
        .collect();
    for (n, body) in &sfl_exprs {
        let mut cx = SflCx {
            fluents: &fluents,
            defs: &sfl_formulas,
            params: &all_params,
            bound: Vec::new(),
        };
        let lowered = lower_sfl(body, &mut cx)?;
        let free = lowered.free_vars();
        if let Some(v) = free.into_iter().next() {
            return Err(SflError::FreeVariable(v).into());
        }
        sfl_formulas.insert(n.clone(), lowered);
    }

    let mut contracts = IndexMap::new();
    for file in &files {
        for decl in &file.decls {
            if let Decl::Contract(c) = decl {
                contract_decls.push(c.clone());
            }
        }
    }
    for cd in &contract_decls {
        let component = components
            .get(&cd.component)
            .ok_or_else(|| {
                LinkError::new(format!("unknown component {}", cd.component), cd.span)
            })?
            .clone();
        let contract = lower_contract(cd, component, &formulas, &fluents, &sfl_formulas)?;
        contract
            .validate()
            .map_err(|e| LinkError::new(e.to_string(), cd.span))?;
        // surface ill-sorted contract formulas now rather than at check time
        {
            let ob = crate::contracts::lower(&contract)
                .map_err(|e| LinkError::new(e.to_string(), cd.span))?;
            sortcheck_formula(&ob.assume, &ob.component, false, &[])
                .map_err(|e| LinkError::new(format!("assumption: {e}"), cd.span))?;
            sortcheck_formula(&ob.guarantee, &ob.component, false, &[])
                .map_err(|e| LinkError::new(format!("guarantee: {e}"), cd.span))?;
            if let Some(inv) = &ob.invariant {
                sortcheck_formula(inv, &ob.component, false, &[])
                    .map_err(|e| LinkError::new(format!("invariant: {e}"), cd.span))?;
            }
        }
        contracts.insert(cd.name.clone(), contract);
    }

    Ok(Linked {
        components,
        fluents,
        formulas,
        sfl_formulas,
        contracts,
        instance,
        files,
    })
}

fn lower_contract(
    cd: &ContractDecl,
    component: Component,
    formulas: &IndexMap<Name, Expr>,
    fluents: &IndexMap<Name, Arc<Fluent>>,
    sfl_formulas: &IndexMap<Name, SflFormula>,
) -> Result<Contract, LinkError> {
    let lower_state = |e: &Expr, vars: &BTreeSet<Name>| -> Result<Formula, LinkError> {
        let mut cx = FormulaCx {
            params: &component.params,
            vars: vars.clone(),
            defs: formulas,
            bound: Vec::new(),
            expanding: Vec::new(),
            primes_allowed: false,
        };
        lower_formula(e, &mut cx)
    };
    let lower_action = |e: &Expr| -> Result<SflFormula, LinkError> {
        let mut cx = SflCx {
            fluents,
            defs: sfl_formulas,
            params: &component.params,
            bound: Vec::new(),
        };
        let f = lower_sfl(e, &mut cx)?;
        if let Some(v) = f.free_vars().into_iter().next() {
            return Err(SflError::FreeVariable(v).into());
        }
        Ok(f)
    };

    let own_vars = component.var_names();
    Ok(match cd.kind {
        ContractKindSyntax::State => {
            let assume = lower_state(&cd.assume, &own_vars)?;
            let guarantee = lower_state(&cd.guarantee, &own_vars)?;
            let invariant = cd
                .invariant
                .as_ref()
                .map(|e| lower_state(e, &own_vars))
                .transpose()?;
            Contract::State(StateContract {
                name: cd.name.clone(),
                assume,
                component,
                guarantee,
                invariant,
            })
        }
        ContractKindSyntax::Action => {
            let assume = lower_action(&cd.assume)?;
            let guarantee = lower_action(&cd.guarantee)?;
            let mut inv_vars = own_vars.clone();
            for f in assume.fluents().iter().chain(guarantee.fluents().iter()) {
                inv_vars.insert(f.var.clone());
            }
            let invariant = cd
                .invariant
                .as_ref()
                .map(|e| lower_state(e, &inv_vars))
                .transpose()?;
            Contract::Action(ActionContract {
                name: cd.name.clone(),
                assume,
                component,
                guarantee,
                invariant,
            })
        }
        ContractKindSyntax::Hybrid => {
            let assume = lower_action(&cd.assume)?;
            let guarantee = lower_state(&cd.guarantee, &own_vars)?;
            let mut inv_vars = own_vars.clone();
            for f in assume.fluents() {
                inv_vars.insert(f.var.clone());
            }
            let invariant = cd
                .invariant
                .as_ref()
                .map(|e| lower_state(e, &inv_vars))
                .transpose()?;
            Contract::Hybrid(HybridContract {
                name: cd.name.clone(),
                assume,
                component,
                guarantee,
                invariant,
            })
        }
    })
}

impl Linked {
    /// Parses and links a set of `(path, source)` pairs.
    pub fn from_sources(sources: &[(&str, &str)]) -> Result<Linked, LinkError> {
        let mut files = Vec::new();
        for (path, text) in sources {
            let mut f = parse(text).map_err(|e| LinkError {
                message: format!("{path}: {}", e.message),
                span: Some(e.span),
            })?;
            f.path = Some(path.to_string());
            files.push(f);
        }
        link(files)
    }

    /// Parses a fluent formula against this file set's fluent registry.
    pub fn parse_sfl(&self, text: &str) -> Result<SflFormula, LinkError> {
        let tokens = crate::parser::lexer::tokenize(text).map_err(|e| LinkError {
            message: e.message,
            span: Some(e.span),
        })?;
        let mut p = crate::parser::parse::Parser::from_tokens(tokens);
        let expr = p.expr().map_err(LinkError::from)?;
        p.expect_eof().map_err(LinkError::from)?;
        let all_params: BTreeSet<Name> = self
            .components
            .values()
            .flat_map(|c| c.params.iter().cloned())
            .chain(
                self.fluents
                    .values()
                    .flat_map(|f| f.machine.params.iter().cloned()),
            )
            .collect();
        let mut cx = SflCx {
            fluents: &self.fluents,
            defs: &self.sfl_formulas,
            params: &all_params,
            bound: Vec::new(),
        };
        let f = lower_sfl(&expr, &mut cx)?;
        if let Some(v) = f.free_vars().into_iter().next() {
            return Err(SflError::FreeVariable(v).into());
        }
        Ok(f)
    }

    /// Lowers a state formula against a component, for pools and ad-hoc
    /// checks.
    pub fn state_formula(
        &self,
        text: &str,
        component: &Component,
    ) -> Result<Formula, LinkError> {
        let tokens = crate::parser::lexer::tokenize(text).map_err(|e| LinkError {
            message: e.message,
            span: Some(e.span),
        })?;
        let mut p = crate::parser::parse::Parser::from_tokens(tokens);
        let expr = p.expr().map_err(LinkError::from)?;
        p.expect_eof().map_err(LinkError::from)?;
        let mut cx = FormulaCx {
            params: &component.params,
            vars: component.var_names(),
            defs: &self.formulas,
            bound: Vec::new(),
            expanding: Vec::new(),
            primes_allowed: false,
        };
        lower_formula(&expr, &mut cx)
    }
}
