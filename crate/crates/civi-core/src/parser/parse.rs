//! Recursive-descent parser for `.civ` files.

use std::collections::BTreeSet;
use std::fmt;

use super::ast::*;
use super::lexer::{tokenize, Span, Tok};
use crate::model::{name, Name};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    DuplicateName,
}

#[derive(Debug, Clone)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
    pub span: Span,
    pub expected: Option<String>,
    pub found: Option<String>,
}

impl ParseError {
    fn syntax(span: Span, expected: impl Into<String>, found: impl fmt::Display) -> ParseError {
        let expected = expected.into();
        ParseError {
            kind: ParseErrorKind::Syntax,
            message: format!("expected {expected}, found {found}"),
            span,
            expected: Some(expected),
            found: Some(found.to_string()),
        }
    }

    fn duplicate(n: &Name, span: Span) -> ParseError {
        ParseError {
            kind: ParseErrorKind::DuplicateName,
            message: format!("duplicate name {n}"),
            span,
            expected: None,
            found: None,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

impl std::error::Error for ParseError {}

type Result<T> = std::result::Result<T, ParseError>;

pub struct Parser {
    tokens: Vec<(Tok, Span)>,
    pos: usize,
}

const EOF_SPAN: Span = Span { line: 0, col: 0 };

impl Parser {
    pub fn from_tokens(tokens: Vec<(Tok, Span)>) -> Parser {
        Parser { tokens, pos: 0 }
    }

    pub fn expect_eof(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(ParseError::syntax(self.span(), "end of input", t)),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, off: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + off).map(|(t, _)| t)
    }

    fn span(&self) -> Span {
        self.tokens
            .get(self.pos)
            .map(|(_, s)| *s)
            .unwrap_or(EOF_SPAN)
    }

    fn next(&mut self) -> Option<(Tok, Span)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span> {
        match self.next() {
            Some((t, s)) if t == tok => Ok(s),
            Some((t, s)) => Err(ParseError::syntax(s, format!("'{tok}'"), t)),
            None => Err(ParseError::syntax(EOF_SPAN, format!("'{tok}'"), "end of input")),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(Name, Span)> {
        match self.next() {
            Some((Tok::Ident(n), s)) => Ok((n, s)),
            Some((t, s)) => Err(ParseError::syntax(s, what, t)),
            None => Err(ParseError::syntax(EOF_SPAN, what, "end of input")),
        }
    }

    /// Matches an identifier with a fixed text (contextual keyword).
    fn eat_word(&mut self, word: &str) -> bool {
        match self.peek() {
            Some(Tok::Ident(n)) if n.as_ref() == word => {
                self.pos += 1;
                true
            }
            _ => false,
        }
    }

    fn at_word(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(n)) if n.as_ref() == word)
    }

    fn skip_semis(&mut self) {
        while self.eat(&Tok::Semi) {}
    }

    // ---- declarations ----

    fn spec_file(&mut self) -> Result<SpecFile> {
        let mut decls = Vec::new();
        let mut seen: BTreeSet<(&'static str, Name)> = BTreeSet::new();
        self.skip_semis();
        while let Some(tok) = self.peek() {
            let decl = match tok {
                Tok::Component => Decl::Component(self.component_decl()?),
                Tok::Fluent => Decl::Fluent(self.fluent_decl()?),
                Tok::Formula => Decl::Formula(self.named_expr(Tok::Formula)?),
                Tok::Sfl => Decl::Sfl(self.named_expr(Tok::Sfl)?),
                Tok::Contract => Decl::Contract(self.contract_decl()?),
                Tok::Instance => Decl::Instance(self.instance_decl()?),
                other => {
                    return Err(ParseError::syntax(
                        self.span(),
                        "a declaration (component, fluent, formula, sfl, contract, instance)",
                        other,
                    ))
                }
            };
            let kind_tag = match &decl {
                Decl::Component(_) => "component",
                Decl::Fluent(_) => "fluent",
                Decl::Formula(_) | Decl::Sfl(_) => "formula",
                Decl::Contract(_) => "contract",
                Decl::Instance(_) => "instance",
            };
            if let Some(n) = decl.name() {
                if !seen.insert((kind_tag, n.clone())) {
                    return Err(ParseError::duplicate(n, self.span()));
                }
            }
            decls.push(decl);
            self.skip_semis();
        }
        Ok(SpecFile { path: None, decls })
    }

    fn component_decl(&mut self) -> Result<ComponentDecl> {
        let kw = self.expect(Tok::Component)?;
        let (cname, _) = self.expect_ident("component name")?;
        self.expect(Tok::LBrace)?;
        let mut params: Vec<Name> = Vec::new();
        let mut vars: Vec<(Name, SortExpr)> = Vec::new();
        let mut init: Option<Expr> = None;
        let mut actions: Vec<ActionItem> = Vec::new();
        loop {
            self.skip_semis();
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Constant) => {
                    self.pos += 1;
                    loop {
                        // stop before an identifier that begins the next item
                        let is_item_start = matches!(self.peek(), Some(Tok::Ident(_)))
                            && matches!(self.peek_at(1), Some(Tok::DefEq) | Some(Tok::LParen));
                        if is_item_start {
                            break;
                        }
                        match self.peek() {
                            Some(Tok::Ident(_)) => {
                                let (n, s) = self.expect_ident("parameter name")?;
                                if params.contains(&n) {
                                    return Err(ParseError::duplicate(&n, s));
                                }
                                params.push(n);
                                self.eat(&Tok::Comma);
                            }
                            _ => break,
                        }
                    }
                }
                Some(Tok::Variable) => {
                    self.pos += 1;
                    loop {
                        let (n, s) = self.expect_ident("variable name")?;
                        if vars.iter().any(|(v, _)| *v == n) {
                            return Err(ParseError::duplicate(&n, s));
                        }
                        self.expect(Tok::In)?;
                        let sort = self.sort_expr()?;
                        vars.push((n, sort));
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                Some(Tok::Ident(n)) if n.as_ref() == "Init" => {
                    let (_, s) = self.expect_ident("Init")?;
                    if init.is_some() {
                        return Err(ParseError::duplicate(&name("Init"), s));
                    }
                    self.expect(Tok::DefEq)?;
                    init = Some(self.expr()?);
                }
                Some(Tok::Ident(_)) => {
                    let (aname, aspan) = self.expect_ident("action name")?;
                    if actions.iter().any(|a| a.name == aname) {
                        return Err(ParseError::duplicate(&aname, aspan));
                    }
                    let formals = if self.eat(&Tok::LParen) {
                        self.formals()?
                    } else {
                        Vec::new()
                    };
                    self.expect(Tok::DefEq)?;
                    let body = self.expr()?;
                    actions.push(ActionItem {
                        name: aname,
                        span: aspan,
                        formals,
                        body,
                    });
                }
                other => {
                    return Err(ParseError::syntax(
                        self.span(),
                        "a component item (CONSTANT, VARIABLE, Init, or an action)",
                        other.map(|t| t.to_string()).unwrap_or("end of input".into()),
                    ))
                }
            }
        }
        let init = init.ok_or_else(|| {
            ParseError::syntax(kw, format!("an Init definition in component {cname}"), "}")
        })?;
        Ok(ComponentDecl {
            name: cname,
            span: kw,
            params,
            vars,
            init,
            actions,
        })
    }

    fn formals(&mut self) -> Result<Vec<(Name, SortExpr)>> {
        let mut out = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            let (n, s) = self.expect_ident("formal name")?;
            if out.iter().any(|(f, _)| *f == n) {
                return Err(ParseError::duplicate(&n, s));
            }
            self.expect(Tok::In)?;
            let sort = self.sort_expr()?;
            out.push((n, sort));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }

    fn fluent_decl(&mut self) -> Result<FluentDecl> {
        let kw = self.expect(Tok::Fluent)?;
        let (fname, _) = self.expect_ident("fluent name")?;
        self.expect(Tok::LParen)?;
        let mut arg_sorts = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                arg_sorts.push(self.sort_expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        if !self.eat_word("var") {
            return Err(ParseError::syntax(
                self.span(),
                "'var'",
                self.peek().map(|t| t.to_string()).unwrap_or_default(),
            ));
        }
        let (var, _) = self.expect_ident("fluent variable name")?;
        self.expect(Tok::LBrace)?;
        self.skip_semis();
        if !self.eat_word("init") {
            return Err(ParseError::syntax(
                self.span(),
                "'init'",
                self.peek().map(|t| t.to_string()).unwrap_or_default(),
            ));
        }
        let init = self.expr()?;
        let mut handlers = Vec::new();
        loop {
            self.skip_semis();
            if self.eat(&Tok::RBrace) {
                break;
            }
            if !self.eat_word("on") {
                return Err(ParseError::syntax(
                    self.span(),
                    "'on' or '}'",
                    self.peek().map(|t| t.to_string()).unwrap_or_default(),
                ));
            }
            let (aname, aspan) = self.expect_ident("action name")?;
            if handlers.iter().any(|h: &ActionItem| h.name == aname) {
                return Err(ParseError::duplicate(&aname, aspan));
            }
            self.expect(Tok::LParen)?;
            let formals = self.formals()?;
            self.expect(Tok::LBrace)?;
            let body = self.expr()?;
            self.expect(Tok::RBrace)?;
            handlers.push(ActionItem {
                name: aname,
                span: aspan,
                formals,
                body,
            });
        }
        Ok(FluentDecl {
            name: fname,
            span: kw,
            arg_sorts,
            var,
            init,
            handlers,
        })
    }

    fn named_expr(&mut self, lead: Tok) -> Result<NamedExpr> {
        let kw = self.expect(lead)?;
        let (n, _) = self.expect_ident("name")?;
        self.expect(Tok::DefEq)?;
        let body = self.expr()?;
        Ok(NamedExpr {
            name: n,
            span: kw,
            body,
        })
    }

    fn contract_decl(&mut self) -> Result<ContractDecl> {
        let kw = self.expect(Tok::Contract)?;
        let (cname, _) = self.expect_ident("contract name")?;
        let kind = if self.eat_word("state") {
            ContractKindSyntax::State
        } else if self.eat_word("action") {
            ContractKindSyntax::Action
        } else if self.eat_word("hybrid") {
            ContractKindSyntax::Hybrid
        } else {
            return Err(ParseError::syntax(
                self.span(),
                "'state', 'action', or 'hybrid'",
                self.peek().map(|t| t.to_string()).unwrap_or_default(),
            ));
        };
        if !self.eat_word("assume") {
            return Err(ParseError::syntax(
                self.span(),
                "'assume'",
                self.peek().map(|t| t.to_string()).unwrap_or_default(),
            ));
        }
        let assume = self.expr()?;
        self.expect(Tok::Component)?;
        let (component, _) = self.expect_ident("component name")?;
        if !self.eat_word("guarantee") {
            return Err(ParseError::syntax(
                self.span(),
                "'guarantee'",
                self.peek().map(|t| t.to_string()).unwrap_or_default(),
            ));
        }
        let guarantee = self.expr()?;
        let invariant = if self.eat_word("invariant") {
            Some(self.expr()?)
        } else {
            None
        };
        Ok(ContractDecl {
            name: cname,
            span: kw,
            kind,
            assume,
            component,
            guarantee,
            invariant,
        })
    }

    fn instance_decl(&mut self) -> Result<InstanceDecl> {
        let kw = self.expect(Tok::Instance)?;
        let mut bindings = Vec::new();
        let mut natbound = None;
        loop {
            if self.at_word("natbound") {
                self.pos += 1;
                self.expect(Tok::Eq)?;
                match self.next() {
                    Some((Tok::NatLit(n), _)) => natbound = Some(n),
                    Some((t, s)) => return Err(ParseError::syntax(s, "a number", t)),
                    None => {
                        return Err(ParseError::syntax(EOF_SPAN, "a number", "end of input"))
                    }
                }
            } else {
                let (p, s) = self.expect_ident("parameter name")?;
                if bindings.iter().any(|(b, _)| *b == p) {
                    return Err(ParseError::duplicate(&p, s));
                }
                self.expect(Tok::Eq)?;
                self.expect(Tok::LBrace)?;
                let mut atoms = Vec::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        let (a, _) = self.expect_ident("atom")?;
                        atoms.push(a);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RBrace)?;
                }
                bindings.push((p, atoms));
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(InstanceDecl {
            span: kw,
            bindings,
            natbound,
        })
    }

    // ---- sorts ----

    fn sort_expr(&mut self) -> Result<SortExpr> {
        match self.next() {
            Some((Tok::BoolKw, _)) => Ok(SortExpr::Bool),
            Some((Tok::NatKw, _)) => Ok(SortExpr::Nat),
            Some((Tok::Ident(n), _)) => Ok(SortExpr::Named(n)),
            Some((Tok::Subset, _)) => Ok(SortExpr::Set(Box::new(self.sort_expr()?))),
            Some((Tok::LBrace, s)) => {
                let mut lits = Vec::new();
                loop {
                    match self.next() {
                        Some((Tok::StrLit(l), _)) => lits.push(l),
                        Some((t, sp)) => {
                            return Err(ParseError::syntax(sp, "an enum literal string", t))
                        }
                        None => {
                            return Err(ParseError::syntax(
                                s,
                                "an enum literal string",
                                "end of input",
                            ))
                        }
                    }
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(SortExpr::Enum(lits))
            }
            Some((Tok::LTuple, _)) => {
                let mut parts = vec![self.sort_expr()?];
                while self.eat(&Tok::Comma) {
                    parts.push(self.sort_expr()?);
                }
                self.expect(Tok::RTuple)?;
                Ok(SortExpr::Tuple(parts))
            }
            Some((Tok::LBracket, _)) => {
                // record sort: [name : sort, ...]; function sort: [s, .. -> r]
                if matches!(self.peek(), Some(Tok::Ident(_)))
                    && self.peek_at(1) == Some(&Tok::Colon)
                {
                    let mut fields = Vec::new();
                    loop {
                        let (f, s) = self.expect_ident("field name")?;
                        if fields.iter().any(|(n, _)| *n == f) {
                            return Err(ParseError::duplicate(&f, s));
                        }
                        self.expect(Tok::Colon)?;
                        let sort = self.sort_expr()?;
                        fields.push((f, sort));
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RBracket)?;
                    Ok(SortExpr::Record(fields))
                } else {
                    let mut args = vec![self.sort_expr()?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.sort_expr()?);
                    }
                    self.expect(Tok::Arrow)?;
                    let result = self.sort_expr()?;
                    self.expect(Tok::RBracket)?;
                    Ok(SortExpr::Fn(args, Box::new(result)))
                }
            }
            Some((t, s)) => Err(ParseError::syntax(s, "a sort", t)),
            None => Err(ParseError::syntax(EOF_SPAN, "a sort", "end of input")),
        }
    }

    // ---- expressions ----

    pub fn expr(&mut self) -> Result<Expr> {
        // optional leading conjunction bullet
        self.eat(&Tok::And);
        self.iff_expr()
    }

    fn iff_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.implies_expr()?;
        while self.peek() == Some(&Tok::Iff) {
            let span = self.span();
            self.pos += 1;
            let rhs = self.implies_expr()?;
            lhs = Expr::new(ExprKind::Binary(BinOp::Iff, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn implies_expr(&mut self) -> Result<Expr> {
        let lhs = self.or_expr()?;
        if self.peek() == Some(&Tok::Implies) {
            let span = self.span();
            self.pos += 1;
            let rhs = self.implies_expr()?;
            return Ok(Expr::new(
                ExprKind::Binary(BinOp::Implies, Box::new(lhs), Box::new(rhs)),
                span,
            ));
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some(&Tok::Or) {
            let span = self.span();
            self.pos += 1;
            let rhs = self.and_expr()?;
            lhs = Expr::new(ExprKind::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.until_expr()?;
        while self.peek() == Some(&Tok::And) {
            let span = self.span();
            self.pos += 1;
            let rhs = self.until_expr()?;
            lhs = Expr::new(ExprKind::Binary(BinOp::And, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn until_expr(&mut self) -> Result<Expr> {
        let lhs = self.unary_expr()?;
        if self.peek() == Some(&Tok::UntilOp) {
            let span = self.span();
            self.pos += 1;
            let rhs = self.until_expr()?;
            return Ok(Expr::new(
                ExprKind::Binary(BinOp::Until, Box::new(lhs), Box::new(rhs)),
                span,
            ));
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr> {
        let span = self.span();
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                let e = self.unary_expr()?;
                Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(e)), span))
            }
            Some(Tok::Always) => {
                self.pos += 1;
                let e = self.unary_expr()?;
                Ok(Expr::new(ExprKind::Unary(UnOp::Always, Box::new(e)), span))
            }
            Some(Tok::Eventually) => {
                self.pos += 1;
                let e = self.unary_expr()?;
                Ok(Expr::new(
                    ExprKind::Unary(UnOp::Eventually, Box::new(e)),
                    span,
                ))
            }
            Some(Tok::NextOp) => {
                self.pos += 1;
                let e = self.unary_expr()?;
                Ok(Expr::new(ExprKind::Unary(UnOp::Next, Box::new(e)), span))
            }
            Some(Tok::Forall) | Some(Tok::Exists) => {
                let kind = if self.peek() == Some(&Tok::Forall) {
                    QuantKind::Forall
                } else {
                    QuantKind::Exists
                };
                self.pos += 1;
                let mut binders = Vec::new();
                loop {
                    let (n, _) = self.expect_ident("quantified variable")?;
                    binders.push(n);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::In)?;
                let domain = self.domain_expr()?;
                self.expect(Tok::Colon)?;
                let body = self.expr()?;
                Ok(Expr::new(
                    ExprKind::Quant(kind, binders, domain, Box::new(body)),
                    span,
                ))
            }
            _ => self.cmp_expr(),
        }
    }

    fn domain_expr(&mut self) -> Result<DomainExpr> {
        match self.next() {
            Some((Tok::Ident(n), _)) => Ok(DomainExpr::Name(n)),
            Some((Tok::NatKw, _)) => Ok(DomainExpr::Nat),
            Some((t, s)) => Err(ParseError::syntax(s, "a parameter name or Nat", t)),
            None => Err(ParseError::syntax(
                EOF_SPAN,
                "a parameter name or Nat",
                "end of input",
            )),
        }
    }

    fn cmp_expr(&mut self) -> Result<Expr> {
        let lhs = self.union_expr()?;
        let op = match self.peek() {
            Some(Tok::Eq) => Some(BinOp::Eq),
            Some(Tok::Neq) => Some(BinOp::Neq),
            Some(Tok::Lt) => Some(BinOp::Lt),
            Some(Tok::Le) => Some(BinOp::Le),
            Some(Tok::Gt) => Some(BinOp::Gt),
            Some(Tok::Ge) => Some(BinOp::Ge),
            Some(Tok::In) => Some(BinOp::In),
            Some(Tok::NotIn) => Some(BinOp::NotIn),
            _ => None,
        };
        if let Some(op) = op {
            let span = self.span();
            self.pos += 1;
            let rhs = self.union_expr()?;
            return Ok(Expr::new(
                ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            ));
        }
        Ok(lhs)
    }

    fn union_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.postfix_expr()?;
        while self.peek() == Some(&Tok::Union) {
            let span = self.span();
            self.pos += 1;
            let rhs = self.postfix_expr()?;
            lhs = Expr::new(
                ExprKind::Binary(BinOp::Union, Box::new(lhs), Box::new(rhs)),
                span,
            );
        }
        Ok(lhs)
    }

    fn postfix_expr(&mut self) -> Result<Expr> {
        let mut e = self.primary_expr()?;
        loop {
            match self.peek() {
                Some(Tok::LBracket) => {
                    let span = self.span();
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RBracket)?;
                    e = Expr::new(ExprKind::Apply(Box::new(e), args), span);
                }
                Some(Tok::Prime) => {
                    let span = self.span();
                    self.pos += 1;
                    e = Expr::new(ExprKind::Prime(Box::new(e)), span);
                }
                Some(Tok::Dot) => {
                    let span = self.span();
                    self.pos += 1;
                    match self.next() {
                        Some((Tok::Ident(n), _)) => {
                            e = Expr::new(ExprKind::Field(Box::new(e), n), span);
                        }
                        Some((Tok::NatLit(i), _)) => {
                            e = Expr::new(ExprKind::ProjIdx(Box::new(e), i as usize), span);
                        }
                        Some((t, s)) => {
                            return Err(ParseError::syntax(s, "a field name or tuple index", t))
                        }
                        None => {
                            return Err(ParseError::syntax(
                                EOF_SPAN,
                                "a field name or tuple index",
                                "end of input",
                            ))
                        }
                    }
                }
                Some(Tok::LParen) => {
                    // call form: only directly after a plain identifier
                    let fname = match &e.kind {
                        ExprKind::Ident(n) => n.clone(),
                        _ => break,
                    };
                    let span = e.span;
                    self.pos += 1;
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                        self.expect(Tok::RParen)?;
                    }
                    e = Expr::new(ExprKind::Call(fname, args), span);
                }
                _ => break,
            }
        }
        Ok(e)
    }

    fn primary_expr(&mut self) -> Result<Expr> {
        let span = self.span();
        match self.next() {
            Some((Tok::True, _)) => Ok(Expr::new(ExprKind::True, span)),
            Some((Tok::False, _)) => Ok(Expr::new(ExprKind::False, span)),
            Some((Tok::NatLit(n), _)) => Ok(Expr::new(ExprKind::Nat(n), span)),
            Some((Tok::StrLit(s), _)) => Ok(Expr::new(ExprKind::Str(s), span)),
            Some((Tok::Ident(n), _)) => Ok(Expr::new(ExprKind::Ident(n), span)),
            Some((Tok::LParen, _)) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some((Tok::LBrace, _)) => {
                // set filter {x \in D : P} or set enumeration
                if matches!(self.peek(), Some(Tok::Ident(_)))
                    && self.peek_at(1) == Some(&Tok::In)
                    && matches!(
                        self.peek_at(2),
                        Some(Tok::Ident(_)) | Some(Tok::NatKw)
                    )
                    && self.peek_at(3) == Some(&Tok::Colon)
                {
                    let (v, _) = self.expect_ident("bound variable")?;
                    self.expect(Tok::In)?;
                    let domain = self.domain_expr()?;
                    self.expect(Tok::Colon)?;
                    let pred = self.expr()?;
                    self.expect(Tok::RBrace)?;
                    return Ok(Expr::new(
                        ExprKind::SetFilter(v, domain, Box::new(pred)),
                        span,
                    ));
                }
                let mut elems = Vec::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        elems.push(self.expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RBrace)?;
                }
                Ok(Expr::new(ExprKind::SetEnum(elems), span))
            }
            Some((Tok::LBracket, _)) => {
                // [x \in D |-> e] | [f |-> e, ...] | [base EXCEPT !..]
                if matches!(self.peek(), Some(Tok::Ident(_))) && self.peek_at(1) == Some(&Tok::In)
                {
                    let (v, _) = self.expect_ident("bound variable")?;
                    self.expect(Tok::In)?;
                    let domain = self.domain_expr()?;
                    self.expect(Tok::MapsTo)?;
                    let body = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    return Ok(Expr::new(
                        ExprKind::FnBuild(v, domain, Box::new(body)),
                        span,
                    ));
                }
                if matches!(self.peek(), Some(Tok::Ident(_)))
                    && self.peek_at(1) == Some(&Tok::MapsTo)
                {
                    let mut fields = Vec::new();
                    loop {
                        let (f, s) = self.expect_ident("field name")?;
                        if fields.iter().any(|(n, _)| *n == f) {
                            return Err(ParseError::duplicate(&f, s));
                        }
                        self.expect(Tok::MapsTo)?;
                        let e = self.expr()?;
                        fields.push((f, e));
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RBracket)?;
                    return Ok(Expr::new(ExprKind::RecordLit(fields), span));
                }
                let base = self.expr()?;
                self.expect(Tok::Except)?;
                let mut updates = Vec::new();
                loop {
                    self.expect(Tok::Bang)?;
                    let mut path = Vec::new();
                    while self.eat(&Tok::LBracket) {
                        path.push(self.expr()?);
                        self.expect(Tok::RBracket)?;
                    }
                    if path.is_empty() {
                        return Err(ParseError::syntax(
                            self.span(),
                            "an index path ![..]",
                            self.peek().map(|t| t.to_string()).unwrap_or_default(),
                        ));
                    }
                    self.expect(Tok::Eq)?;
                    let v = self.expr()?;
                    updates.push((path, v));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBracket)?;
                Ok(Expr::new(ExprKind::Except(Box::new(base), updates), span))
            }
            Some((Tok::LTuple, _)) => {
                let mut parts = Vec::new();
                if !self.eat(&Tok::RTuple) {
                    loop {
                        parts.push(self.expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RTuple)?;
                }
                Ok(Expr::new(ExprKind::Tuple(parts), span))
            }
            Some((Tok::Unchanged, _)) => {
                self.expect(Tok::LTuple)?;
                let mut vars = Vec::new();
                loop {
                    let (v, _) = self.expect_ident("variable name")?;
                    vars.push(v);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RTuple)?;
                Ok(Expr::new(ExprKind::Unchanged(vars), span))
            }
            Some((t, s)) => Err(ParseError::syntax(s, "an expression", t)),
            None => Err(ParseError::syntax(EOF_SPAN, "an expression", "end of input")),
        }
    }
}

/// Parses one `.civ` source text into a spec file AST.
pub fn parse(src: &str) -> Result<SpecFile> {
    let tokens = tokenize(src).map_err(|e| ParseError {
        kind: ParseErrorKind::Syntax,
        message: e.message.clone(),
        span: e.span,
        expected: None,
        found: None,
    })?;
    let mut p = Parser { tokens, pos: 0 };
    p.spec_file()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_parses_to_zero_declarations() {
        let f = parse("").unwrap();
        assert!(f.decls.is_empty());
        let f = parse("# only a comment\n").unwrap();
        assert!(f.decls.is_empty());
    }

    #[test]
    fn duplicate_constant_is_reported() {
        let src = "component C { CONSTANT RMs RMs VARIABLE x \\in Bool Init == x = FALSE }";
        let err = parse(src).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateName);
    }

    #[test]
    fn syntax_errors_carry_location() {
        let err = parse("component C {").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
        let err = parse("component 7").unwrap_err();
        assert_eq!(err.span.line, 1);
        assert!(err.expected.is_some());
    }

    #[test]
    fn contract_fields_terminate_expressions() {
        let src = "contract K hybrid assume a /\\ b component C guarantee G invariant I";
        let f = parse(src).unwrap();
        match &f.decls[0] {
            Decl::Contract(c) => {
                assert_eq!(c.component.as_ref(), "C");
                assert!(c.invariant.is_some());
                assert!(matches!(c.assume.kind, ExprKind::Binary(BinOp::And, ..)));
            }
            _ => panic!("expected contract"),
        }
    }

    #[test]
    fn leading_conjunction_bullet_is_accepted() {
        let src = "formula F == /\\ a\n /\\ b";
        let f = parse(src).unwrap();
        match &f.decls[0] {
            Decl::Formula(ne) => {
                assert!(matches!(ne.body.kind, ExprKind::Binary(BinOp::And, ..)))
            }
            _ => panic!(),
        }
    }
}
