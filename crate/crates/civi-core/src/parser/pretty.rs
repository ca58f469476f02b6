//! Deterministic printers. Model formulas print to DSL text that reparses
//! to an equal AST; declarations print to canonical block form.

use std::fmt::Write;

use crate::model::{CmpOp, Domain, Formula};

// Precedence levels, loosest to tightest. Quantifiers are 0: they extend as
// far as possible and need parentheses in any operand position.
const P_QUANT: u8 = 0;
const P_IFF: u8 = 1;
const P_IMPL: u8 = 2;
const P_OR: u8 = 3;
const P_AND: u8 = 4;
const P_UNTIL: u8 = 5;
const P_UNARY: u8 = 6;
const P_CMP: u8 = 7;
const P_UNION: u8 = 8;
const P_POSTFIX: u8 = 9;
const P_ATOM: u8 = 10;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Forall { .. } | Formula::Exists { .. } => P_QUANT,
        Formula::Iff(..) => P_IFF,
        Formula::Implies(..) => P_IMPL,
        Formula::Or(..) => P_OR,
        Formula::And(..) => P_AND,
        Formula::Not(..) => P_UNARY,
        Formula::Eq(..) | Formula::Mem(..) | Formula::Cmp(..) => P_CMP,
        Formula::SetUnion(..) => P_UNION,
        Formula::Apply(..) | Formula::Field(..) | Formula::TupleProj(..) => P_POSTFIX,
        _ => P_ATOM,
    }
}

/// Renders a model formula as DSL text.
pub fn formula_to_text(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f, 0);
    out
}

fn write_formula(out: &mut String, f: &Formula, min_prec: u8) {
    if prec(f) < min_prec {
        out.push('(');
        write_formula(out, f, 0);
        out.push(')');
        return;
    }
    match f {
        Formula::True => out.push_str("TRUE"),
        Formula::False => out.push_str("FALSE"),
        Formula::NatLit(n) => {
            let _ = write!(out, "{n}");
        }
        Formula::StrLit(s) => {
            let _ = write!(out, "\"{s}\"");
        }
        Formula::Var { name, primed } => {
            out.push_str(name);
            if *primed {
                out.push('\'');
            }
        }
        Formula::Param(p) => out.push_str(p),
        Formula::Bound(n) => out.push_str(n),
        Formula::Eq(a, b) => {
            write_formula(out, a, P_UNION);
            out.push_str(" = ");
            write_formula(out, b, P_UNION);
        }
        Formula::Mem(a, b) => {
            write_formula(out, a, P_UNION);
            out.push_str(" \\in ");
            write_formula(out, b, P_UNION);
        }
        Formula::SetLit(es) => {
            out.push('{');
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_formula(out, e, 0);
            }
            out.push('}');
        }
        Formula::SetUnion(a, b) => {
            write_formula(out, a, P_UNION);
            out.push_str(" \\union ");
            write_formula(out, b, P_POSTFIX);
        }
        Formula::SetFilter { var, domain, pred } => {
            let _ = write!(out, "{{{var} \\in {} : ", domain_text(domain));
            write_formula(out, pred, 0);
            out.push('}');
        }
        Formula::Apply(fun, args) => {
            write_formula(out, fun, P_POSTFIX);
            out.push('[');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_formula(out, a, 0);
            }
            out.push(']');
        }
        Formula::FnBuild { var, domain, body } => {
            let _ = write!(out, "[{var} \\in {} |-> ", domain_text(domain));
            write_formula(out, body, 0);
            out.push(']');
        }
        Formula::FnExcept { base, updates } => {
            out.push('[');
            write_formula(out, base, 0);
            out.push_str(" EXCEPT ");
            for (i, (path, v)) in updates.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push('!');
                for k in path {
                    out.push('[');
                    write_formula(out, k, 0);
                    out.push(']');
                }
                out.push_str(" = ");
                write_formula(out, v, 0);
            }
            out.push(']');
        }
        Formula::TupleLit(es) => {
            out.push_str("<<");
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_formula(out, e, 0);
            }
            out.push_str(">>");
        }
        Formula::TupleProj(t, i) => {
            write_formula(out, t, P_POSTFIX);
            let _ = write!(out, ".{i}");
        }
        Formula::RecordLit(fields) => {
            out.push('[');
            for (i, (n, e)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{n} |-> ");
                write_formula(out, e, 0);
            }
            out.push(']');
        }
        Formula::Field(r, n) => {
            write_formula(out, r, P_POSTFIX);
            let _ = write!(out, ".{n}");
        }
        Formula::Cmp(op, a, b) => {
            write_formula(out, a, P_UNION);
            let _ = write!(out, " {op} ");
            write_formula(out, b, P_UNION);
        }
        Formula::Not(a) => {
            out.push('~');
            write_formula(out, a, P_UNARY);
        }
        Formula::And(a, b) => {
            write_formula(out, a, P_AND);
            out.push_str(" /\\ ");
            write_formula(out, b, P_AND + 1);
        }
        Formula::Or(a, b) => {
            write_formula(out, a, P_OR);
            out.push_str(" \\/ ");
            write_formula(out, b, P_OR + 1);
        }
        Formula::Implies(a, b) => {
            write_formula(out, a, P_IMPL + 1);
            out.push_str(" => ");
            write_formula(out, b, P_IMPL);
        }
        Formula::Iff(a, b) => {
            write_formula(out, a, P_IFF + 1);
            out.push_str(" <=> ");
            write_formula(out, b, P_IFF + 1);
        }
        Formula::Forall { var, domain, body } => {
            let _ = write!(out, "\\A {var} \\in {} : ", domain_text(domain));
            write_formula(out, body, 0);
        }
        Formula::Exists { var, domain, body } => {
            let _ = write!(out, "\\E {var} \\in {} : ", domain_text(domain));
            write_formula(out, body, 0);
        }
    }
}

pub fn domain_text(d: &Domain) -> String {
    match d {
        Domain::Param(p) => p.to_string(),
        Domain::Nat => "Nat".to_string(),
    }
}

pub fn cmp_text(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Lt => "<",
        CmpOp::Le => "<=",
        CmpOp::Gt => ">",
        CmpOp::Ge => ">=",
    }
}
