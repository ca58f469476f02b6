//! Surface AST. Spans compare equal everywhere, so derived `PartialEq` on
//! these types is equality modulo source locations — exactly what the
//! pretty-print round-trip needs.

pub use super::lexer::Span;
use crate::model::Name;

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Always,
    Eventually,
    Next,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    And,
    Or,
    Implies,
    Iff,
    Until,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    NotIn,
    Union,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantKind {
    Forall,
    Exists,
}

/// Quantifier / construction domain in surface syntax: a named parameter or
/// the bounded naturals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainExpr {
    Name(Name),
    Nat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    True,
    False,
    Nat(u64),
    Str(Name),
    Ident(Name),
    /// `f(a, b)` — a fluent atom in SFL positions; illegal in state formulas.
    Call(Name, Vec<Expr>),
    /// `e[a, b]`
    Apply(Box<Expr>, Vec<Expr>),
    /// `e'`
    Prime(Box<Expr>),
    /// `e.field`
    Field(Box<Expr>, Name),
    /// `e.0`
    ProjIdx(Box<Expr>, usize),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `\A x, y \in D : body`
    Quant(QuantKind, Vec<Name>, DomainExpr, Box<Expr>),
    SetEnum(Vec<Expr>),
    /// `{x \in D : pred}`
    SetFilter(Name, DomainExpr, Box<Expr>),
    /// `[x \in D |-> body]`
    FnBuild(Name, DomainExpr, Box<Expr>),
    /// `[base EXCEPT ![i][j] = v, ...]`
    Except(Box<Expr>, Vec<(Vec<Expr>, Expr)>),
    /// `[f1 |-> e1, ...]`
    RecordLit(Vec<(Name, Expr)>),
    Tuple(Vec<Expr>),
    /// `UNCHANGED <<v1, v2>>`
    Unchanged(Vec<Name>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SortExpr {
    Bool,
    Nat,
    Named(Name),
    Enum(Vec<Name>),
    Set(Box<SortExpr>),
    Fn(Vec<SortExpr>, Box<SortExpr>),
    Tuple(Vec<SortExpr>),
    Record(Vec<(Name, SortExpr)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDecl {
    pub name: Name,
    pub span: Span,
    pub params: Vec<Name>,
    pub vars: Vec<(Name, SortExpr)>,
    pub init: Expr,
    pub actions: Vec<ActionItem>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionItem {
    pub name: Name,
    pub span: Span,
    pub formals: Vec<(Name, SortExpr)>,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluentDecl {
    pub name: Name,
    pub span: Span,
    pub arg_sorts: Vec<SortExpr>,
    pub var: Name,
    pub init: Expr,
    pub handlers: Vec<ActionItem>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedExpr {
    pub name: Name,
    pub span: Span,
    pub body: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractKindSyntax {
    State,
    Action,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractDecl {
    pub name: Name,
    pub span: Span,
    pub kind: ContractKindSyntax,
    pub assume: Expr,
    pub component: Name,
    pub guarantee: Expr,
    pub invariant: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceDecl {
    pub span: Span,
    pub bindings: Vec<(Name, Vec<Name>)>,
    pub natbound: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decl {
    Component(ComponentDecl),
    Fluent(FluentDecl),
    Formula(NamedExpr),
    Sfl(NamedExpr),
    Contract(ContractDecl),
    Instance(InstanceDecl),
}

impl Decl {
    pub fn name(&self) -> Option<&Name> {
        match self {
            Decl::Component(c) => Some(&c.name),
            Decl::Fluent(f) => Some(&f.name),
            Decl::Formula(f) | Decl::Sfl(f) => Some(&f.name),
            Decl::Contract(c) => Some(&c.name),
            Decl::Instance(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub path: Option<String>,
    pub decls: Vec<Decl>,
}
