//! Recursive-descent parser.
//!
//! ```text
//! file  := { norm }
//! norm  := "norm" IDENT [ "priority" INT ] "whenever" cond "then" action { ";" action }
//! cond  := conj { "or" conj }
//! conj  := neg { "and" neg }
//! neg   := [ "not" ] prim
//! prim  := "(" cond ")" | term [ REL term ]
//! term  := path | NUMBER | STRING | "true" | "false"
//! path  := IDENT { "." IDENT }
//! action:= IDENT "(" [ term { "," term } ] ")"
//! ```
//!
//! A `prim` without a relational operator must be a path or a boolean
//! literal. Nested `and`/`or` of the same kind are flattened, so redundant
//! parentheses leave no trace in the tree.

use thiserror::Error;

use super::ast::{ActionCall, Condition, Literal, NormAst, PathRef, Term};
use super::diagnostic::{Diagnostic, Span};
use super::lexer::{tokenize, Token, TokenKind};

const MAX_DEPTH: usize = 128;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{diagnostic}")]
pub struct ParseError {
    pub diagnostic: Diagnostic,
    /// What the parser would have accepted at the error position. Empty for
    /// lexical errors.
    pub expected: Vec<String>,
}

impl From<Diagnostic> for ParseError {
    fn from(diagnostic: Diagnostic) -> Self {
        Self {
            diagnostic,
            expected: Vec::new(),
        }
    }
}

pub fn parse(text: &str) -> Result<Vec<NormAst>, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        at: 0,
        depth: 0,
    };
    let mut norms = Vec::new();
    while !p.check(&TokenKind::Eof) {
        norms.push(p.norm()?);
    }
    Ok(norms)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    depth: usize,
}

const TERM_START: &[&str] = &["identifier", "number", "string", "`true`", "`false`"];

impl Parser {
    fn peek(&self) -> &Token {
        // tokenize always ends with Eof and we never advance past it
        &self.tokens[self.at.min(self.tokens.len() - 1)]
    }

    fn check(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    fn advance(&mut self) -> Token {
        let tok = self.peek().clone();
        if tok.kind != TokenKind::Eof {
            self.at += 1;
        }
        tok
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let tok = self.peek();
        let list = expected.join(", ");
        let message = if expected.len() == 1 {
            format!("expected {list}, found {}", tok.kind.describe())
        } else {
            format!("expected one of {list}, found {}", tok.kind.describe())
        };
        ParseError {
            diagnostic: Diagnostic::error(tok.span.start, message),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, kind: TokenKind, label: &str) -> Result<Token, ParseError> {
        if self.check(&kind) {
            Ok(self.advance())
        } else {
            Err(self.error(&[label]))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                let span = self.advance().span;
                Ok((name, span))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn norm(&mut self) -> Result<NormAst, ParseError> {
        let start = self.expect(TokenKind::Norm, "`norm`")?.span;
        let (name, _) = self.ident()?;
        let mut priority = 0;
        if self.check(&TokenKind::Priority) {
            self.advance();
            priority = match &self.peek().kind {
                TokenKind::Number(_, text) if !text.contains('.') => {
                    let parsed = text.parse::<i64>().map_err(|_| {
                        ParseError::from(Diagnostic::error(
                            self.peek().span.start,
                            format!("priority `{text}` does not fit a 64-bit integer"),
                        ))
                    })?;
                    self.advance();
                    parsed
                }
                _ => return Err(self.error(&["integer"])),
            };
        } else if !self.check(&TokenKind::Whenever) {
            return Err(self.error(&["`priority`", "`whenever`"]));
        }
        self.expect(TokenKind::Whenever, "`whenever`")?;
        let condition = self.disjunction()?;
        self.expect(TokenKind::Then, "`then`")?;
        let mut actions = vec![self.action()?];
        while self.check(&TokenKind::Semi) {
            self.advance();
            actions.push(self.action()?);
        }
        let end = actions.last().map(|a| a.span).unwrap_or(start);
        if !matches!(self.peek().kind, TokenKind::Norm | TokenKind::Eof) {
            return Err(self.error(&["`;`", "`norm`", "end of input"]));
        }
        Ok(NormAst {
            name,
            priority,
            condition,
            actions,
            span: start.to(end),
        })
    }

    fn action(&mut self) -> Result<ActionCall, ParseError> {
        let (name, start) = self.ident()?;
        self.expect(TokenKind::LParen, "`(`")?;
        let mut args = Vec::new();
        if !self.check(&TokenKind::RParen) {
            args.push(self.term(&[])?);
            while self.check(&TokenKind::Comma) {
                self.advance();
                args.push(self.term(&[])?);
            }
        }
        if !self.check(&TokenKind::RParen) {
            return Err(self.error(&["`,`", "`)`"]));
        }
        let end = self.advance().span;
        Ok(ActionCall {
            name,
            args,
            span: start.to(end),
        })
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Diagnostic::error(
                self.peek().span.start,
                format!("condition nested deeper than {MAX_DEPTH} levels"),
            )
            .into());
        }
        Ok(())
    }

    fn disjunction(&mut self) -> Result<Condition, ParseError> {
        self.enter()?;
        let mut parts = Vec::new();
        push_flat(&mut parts, self.conjunction()?, true);
        while self.check(&TokenKind::Or) {
            self.advance();
            push_flat(&mut parts, self.conjunction()?, true);
        }
        self.depth -= 1;
        Ok(collapse(parts, Condition::Or))
    }

    fn conjunction(&mut self) -> Result<Condition, ParseError> {
        let mut parts = Vec::new();
        push_flat(&mut parts, self.negation()?, false);
        while self.check(&TokenKind::And) {
            self.advance();
            push_flat(&mut parts, self.negation()?, false);
        }
        Ok(collapse(parts, Condition::And))
    }

    fn negation(&mut self) -> Result<Condition, ParseError> {
        if self.check(&TokenKind::Not) {
            self.advance();
            if self.check(&TokenKind::Not) {
                return Err(self.error(&["`(`", "identifier", "`true`", "`false`"]));
            }
            Ok(Condition::Not(Box::new(self.primary()?)))
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> Result<Condition, ParseError> {
        if self.check(&TokenKind::LParen) {
            self.advance();
            let inner = self.disjunction()?;
            if !self.check(&TokenKind::RParen) {
                return Err(self.error(&["`)`", "`and`", "`or`"]));
            }
            self.advance();
            return Ok(inner);
        }
        let lhs = self.term(&["`not`", "`(`"])?;
        if let TokenKind::Rel(op) = self.peek().kind {
            self.advance();
            let rhs = self.term(&[])?;
            return Ok(Condition::Compare { op, lhs, rhs });
        }
        match lhs {
            Term::Path(p) => Ok(Condition::Path(p)),
            Term::Lit(Literal::Bool(b)) => Ok(Condition::Const(b)),
            Term::Lit(_) => Err(self.error(&["comparison operator"])),
        }
    }

    /// `extra` lists further tokens accepted at this position, for the
    /// expected-set of the error message.
    fn term(&mut self, extra: &[&str]) -> Result<Term, ParseError> {
        let term = match &self.peek().kind {
            TokenKind::Number(v, _) => Term::Lit(Literal::Number(*v)),
            TokenKind::Str(s) => Term::Lit(Literal::Str(s.clone())),
            TokenKind::True => Term::Lit(Literal::Bool(true)),
            TokenKind::False => Term::Lit(Literal::Bool(false)),
            TokenKind::Ident(_) => return self.path().map(Term::Path),
            _ => {
                let mut expected = TERM_START.to_vec();
                expected.extend_from_slice(extra);
                return Err(self.error(&expected));
            }
        };
        self.advance();
        Ok(term)
    }

    fn path(&mut self) -> Result<PathRef, ParseError> {
        let (first, start) = self.ident()?;
        let mut segments = vec![first];
        let mut end = start;
        while self.check(&TokenKind::Dot) {
            self.advance();
            let (seg, span) = self.ident()?;
            segments.push(seg);
            end = span;
        }
        Ok(PathRef {
            segments,
            span: start.to(end),
        })
    }
}

fn push_flat(parts: &mut Vec<Condition>, c: Condition, is_or: bool) {
    match c {
        Condition::Or(inner) if is_or => parts.extend(inner),
        Condition::And(inner) if !is_or => parts.extend(inner),
        other => parts.push(other),
    }
}

fn collapse(mut parts: Vec<Condition>, wrap: fn(Vec<Condition>) -> Condition) -> Condition {
    if parts.len() == 1 {
        parts.pop().expect("one element")
    } else {
        wrap(parts)
    }
}
