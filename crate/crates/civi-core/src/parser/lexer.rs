//! Tokenizer for `.civ` files. `#` starts a line comment; semicolons are
//! optional separators and surface as ordinary tokens.

use std::fmt;

use crate::model::{name, Name};

/// Source position, 1-based. Positions compare equal to each other so that
/// AST equality ignores them; they exist for diagnostics only.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}
impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(Name),
    NatLit(u64),
    StrLit(Name),
    // keywords
    Component,
    Fluent,
    Formula,
    Sfl,
    Contract,
    Instance,
    Constant,
    Variable,
    Except,
    Unchanged,
    True,
    False,
    Subset,
    NatKw,
    BoolKw,
    NextOp,  // X
    UntilOp, // U
    // punctuation and operators
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LTuple,  // <<
    RTuple,  // >>
    Comma,
    Colon,
    Semi,
    Prime,
    Bang,
    Dot,
    DefEq,   // ==
    Eq,
    Neq,     // /=
    Le,
    Ge,
    Lt,
    Gt,
    In,      // \in
    NotIn,   // \notin
    Union,   // \union or \cup
    And,     // /\
    Or,      // \/
    Not,     // ~
    Implies, // =>
    Iff,     // <=>
    MapsTo,  // |->
    Arrow,   // ->
    Always,  // []
    Eventually, // <>
    Forall,  // \A
    Exists,  // \E
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(n) => return write!(f, "{n}"),
            Tok::NatLit(n) => return write!(f, "{n}"),
            Tok::StrLit(s) => return write!(f, "\"{s}\""),
            Tok::Component => "component",
            Tok::Fluent => "fluent",
            Tok::Formula => "formula",
            Tok::Sfl => "sfl",
            Tok::Contract => "contract",
            Tok::Instance => "instance",
            Tok::Constant => "CONSTANT",
            Tok::Variable => "VARIABLE",
            Tok::Except => "EXCEPT",
            Tok::Unchanged => "UNCHANGED",
            Tok::True => "TRUE",
            Tok::False => "FALSE",
            Tok::Subset => "SUBSET",
            Tok::NatKw => "Nat",
            Tok::BoolKw => "Bool",
            Tok::NextOp => "X",
            Tok::UntilOp => "U",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LTuple => "<<",
            Tok::RTuple => ">>",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Prime => "'",
            Tok::Bang => "!",
            Tok::Dot => ".",
            Tok::DefEq => "==",
            Tok::Eq => "=",
            Tok::Neq => "/=",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::In => "\\in",
            Tok::NotIn => "\\notin",
            Tok::Union => "\\union",
            Tok::And => "/\\",
            Tok::Or => "\\/",
            Tok::Not => "~",
            Tok::Implies => "=>",
            Tok::Iff => "<=>",
            Tok::MapsTo => "|->",
            Tok::Arrow => "->",
            Tok::Always => "[]",
            Tok::Eventually => "<>",
            Tok::Forall => "\\A",
            Tok::Exists => "\\E",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone)]
pub struct LexError {
    pub message: String,
    pub span: Span,
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Span)>, LexError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($tok:expr, $len:expr) => {{
            out.push(($tok, Span { line, col }));
            i += $len;
            col += $len as u32;
        }};
    }

    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '"' => {
                let start = Span { line, col };
                let mut j = i + 1;
                while j < bytes.len() && bytes[j] != b'"' && bytes[j] != b'\n' {
                    j += 1;
                }
                if j >= bytes.len() || bytes[j] != b'"' {
                    return Err(LexError {
                        message: "unterminated string literal".into(),
                        span: start,
                    });
                }
                let text = &src[i + 1..j];
                out.push((Tok::StrLit(name(text)), start));
                col += (j + 1 - i) as u32;
                i = j + 1;
            }
            '\\' => {
                let start = Span { line, col };
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j] as char).is_ascii_alphabetic() {
                    j += 1;
                }
                let word = &src[i + 1..j];
                let tok = match word {
                    "in" => Tok::In,
                    "notin" => Tok::NotIn,
                    "union" | "cup" => Tok::Union,
                    "A" => Tok::Forall,
                    "E" => Tok::Exists,
                    _ => {
                        if src[i..].starts_with("\\/") {
                            out.push((Tok::Or, start));
                            i += 2;
                            col += 2;
                            continue;
                        }
                        return Err(LexError {
                            message: format!("unknown operator \\{word}"),
                            span: start,
                        });
                    }
                };
                out.push((tok, start));
                col += (j - i) as u32;
                i = j;
            }
            '/' => {
                if src[i..].starts_with("/\\") {
                    push!(Tok::And, 2);
                } else if src[i..].starts_with("/=") {
                    push!(Tok::Neq, 2);
                } else {
                    return Err(LexError {
                        message: "stray '/'".into(),
                        span: Span { line, col },
                    });
                }
            }
            '=' => {
                if src[i..].starts_with("==") {
                    push!(Tok::DefEq, 2);
                } else if src[i..].starts_with("=>") {
                    push!(Tok::Implies, 2);
                } else {
                    push!(Tok::Eq, 1);
                }
            }
            '<' => {
                if src[i..].starts_with("<<") {
                    push!(Tok::LTuple, 2);
                } else if src[i..].starts_with("<=>") {
                    push!(Tok::Iff, 3);
                } else if src[i..].starts_with("<=") {
                    push!(Tok::Le, 2);
                } else if src[i..].starts_with("<>") {
                    push!(Tok::Eventually, 2);
                } else {
                    push!(Tok::Lt, 1);
                }
            }
            '>' => {
                if src[i..].starts_with(">>") {
                    push!(Tok::RTuple, 2);
                } else if src[i..].starts_with(">=") {
                    push!(Tok::Ge, 2);
                } else {
                    push!(Tok::Gt, 1);
                }
            }
            '[' => {
                if src[i..].starts_with("[]") {
                    push!(Tok::Always, 2);
                } else {
                    push!(Tok::LBracket, 1);
                }
            }
            '|' => {
                if src[i..].starts_with("|->") {
                    push!(Tok::MapsTo, 3);
                } else {
                    return Err(LexError {
                        message: "stray '|'".into(),
                        span: Span { line, col },
                    });
                }
            }
            '-' => {
                if src[i..].starts_with("->") {
                    push!(Tok::Arrow, 2);
                } else {
                    return Err(LexError {
                        message: "stray '-'".into(),
                        span: Span { line, col },
                    });
                }
            }
            '{' => push!(Tok::LBrace, 1),
            '}' => push!(Tok::RBrace, 1),
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            ']' => push!(Tok::RBracket, 1),
            ',' => push!(Tok::Comma, 1),
            ':' => push!(Tok::Colon, 1),
            ';' => push!(Tok::Semi, 1),
            '\'' => push!(Tok::Prime, 1),
            '!' => push!(Tok::Bang, 1),
            '.' => push!(Tok::Dot, 1),
            '~' => push!(Tok::Not, 1),
            '0'..='9' => {
                let start = Span { line, col };
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let n: u64 = src[i..j].parse().map_err(|_| LexError {
                    message: "number too large".into(),
                    span: start,
                })?;
                out.push((Tok::NatLit(n), start));
                col += (j - i) as u32;
                i = j;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = Span { line, col };
                let mut j = i;
                while j < bytes.len()
                    && ((bytes[j] as char).is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                let word = &src[i..j];
                let tok = match word {
                    "component" => Tok::Component,
                    "fluent" => Tok::Fluent,
                    "formula" => Tok::Formula,
                    "sfl" => Tok::Sfl,
                    "contract" => Tok::Contract,
                    "instance" => Tok::Instance,
                    "CONSTANT" | "CONSTANTS" => Tok::Constant,
                    "VARIABLE" | "VARIABLES" => Tok::Variable,
                    "EXCEPT" => Tok::Except,
                    "UNCHANGED" => Tok::Unchanged,
                    "TRUE" => Tok::True,
                    "FALSE" => Tok::False,
                    "SUBSET" => Tok::Subset,
                    "Nat" => Tok::NatKw,
                    "Bool" => Tok::BoolKw,
                    "X" => Tok::NextOp,
                    "U" => Tok::UntilOp,
                    _ => Tok::Ident(name(word)),
                };
                out.push((tok, start));
                col += (j - i) as u32;
                i = j;
            }
            other => {
                return Err(LexError {
                    message: format!("unexpected character '{other}'"),
                    span: Span { line, col },
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_operators_and_comments() {
        let toks = tokenize("a /\\ b' = [f EXCEPT ![x] = TRUE] # comment\n\\A r \\in RMs : <>x")
            .unwrap();
        let kinds: Vec<String> = toks.iter().map(|(t, _)| t.to_string()).collect();
        assert_eq!(
            kinds,
            vec![
                "a", "/\\", "b", "'", "=", "[", "f", "EXCEPT", "!", "[", "x", "]", "=", "TRUE",
                "]", "\\A", "r", "\\in", "RMs", ":", "<>", "x"
            ]
        );
    }

    #[test]
    fn always_token_vs_brackets() {
        let toks = tokenize("[]p /\\ f[x]").unwrap();
        assert_eq!(toks[0].0, Tok::Always);
        assert!(toks.iter().any(|(t, _)| *t == Tok::LBracket));
    }

    #[test]
    fn string_spans_reported() {
        let err = tokenize("x = \"unterminated").unwrap_err();
        assert_eq!(err.span.line, 1);
        assert_eq!(err.span.col, 5);
    }
}
