use std::fmt;

use super::ast::RelOp;
use super::diagnostic::{Diagnostic, Pos, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Norm,
    Priority,
    Whenever,
    Then,
    And,
    Or,
    Not,
    True,
    False,
    Ident(String),
    /// Numeric literal plus its source text (needed to tell integers apart).
    Number(f64, String),
    Str(String),
    Rel(RelOp),
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    Eof,
}

impl TokenKind {
    /// Short human-readable form used in "found ..." messages.
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Number(_, text) => format!("number `{text}`"),
            TokenKind::Str(_) => "string literal".into(),
            TokenKind::Eof => "end of input".into(),
            other => format!("`{other}`"),
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Norm => "norm",
            TokenKind::Priority => "priority",
            TokenKind::Whenever => "whenever",
            TokenKind::Then => "then",
            TokenKind::And => "and",
            TokenKind::Or => "or",
            TokenKind::Not => "not",
            TokenKind::True => "true",
            TokenKind::False => "false",
            TokenKind::Ident(s) => s,
            TokenKind::Number(_, text) => text,
            TokenKind::Str(s) => return write!(f, "{s:?}"),
            TokenKind::Rel(op) => op.as_str(),
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::Comma => ",",
            TokenKind::Semi => ";",
            TokenKind::Dot => ".",
            TokenKind::Eof => "<eof>",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek_second(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }
}

fn keyword(word: &str) -> Option<TokenKind> {
    Some(match word {
        "norm" => TokenKind::Norm,
        "priority" => TokenKind::Priority,
        "whenever" => TokenKind::Whenever,
        "then" => TokenKind::Then,
        "and" => TokenKind::And,
        "or" => TokenKind::Or,
        "not" => TokenKind::Not,
        "true" => TokenKind::True,
        "false" => TokenKind::False,
        _ => return None,
    })
}

/// Splits source text into tokens, ending with `Eof`. `#` starts a comment
/// that runs to the end of the line.
pub fn tokenize(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '#' {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let start = cur.pos();
        let Some(c) = cur.peek() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                span: Span::new(start, start),
            });
            return Ok(tokens);
        };
        let kind = match c {
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut word = String::new();
                while let Some(c) = cur
                    .peek()
                    .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
                {
                    word.push(c);
                    cur.bump();
                }
                keyword(&word).unwrap_or(TokenKind::Ident(word))
            }
            '0'..='9' => lex_number(&mut cur, String::new())?,
            '-' if cur.peek_second().is_some_and(|c| c.is_ascii_digit()) => {
                cur.bump();
                lex_number(&mut cur, "-".into())?
            }
            '"' => lex_string(&mut cur)?,
            '(' | ')' | ',' | ';' | '.' => {
                cur.bump();
                match c {
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    ',' => TokenKind::Comma,
                    ';' => TokenKind::Semi,
                    _ => TokenKind::Dot,
                }
            }
            '=' | '!' | '<' | '>' => {
                cur.bump();
                let eq = cur.peek() == Some('=');
                if eq {
                    cur.bump();
                }
                TokenKind::Rel(match (c, eq) {
                    ('=', true) => RelOp::Eq,
                    ('!', true) => RelOp::Ne,
                    ('<', false) => RelOp::Lt,
                    ('<', true) => RelOp::Le,
                    ('>', false) => RelOp::Gt,
                    ('>', true) => RelOp::Ge,
                    _ => {
                        return Err(Diagnostic::error(
                            start,
                            format!("unexpected character `{c}`; did you mean `{c}=`?"),
                        ))
                    }
                })
            }
            other => {
                return Err(Diagnostic::error(
                    start,
                    format!("unexpected character {other:?}"),
                ))
            }
        };
        tokens.push(Token {
            kind,
            span: Span::new(start, cur.pos()),
        });
    }
}

fn lex_number(cur: &mut Cursor<'_>, mut text: String) -> Result<TokenKind, Diagnostic> {
    let start = cur.pos();
    while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
        text.push(d);
        cur.bump();
    }
    if cur.peek() == Some('.') && cur.peek_second().is_some_and(|c| c.is_ascii_digit()) {
        text.push('.');
        cur.bump();
        while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
            text.push(d);
            cur.bump();
        }
    }
    let value: f64 = text
        .parse()
        .map_err(|_| Diagnostic::error(start, format!("malformed number `{text}`")))?;
    if !value.is_finite() {
        return Err(Diagnostic::error(
            start,
            format!("number `{text}` out of range"),
        ));
    }
    Ok(TokenKind::Number(value, text))
}

fn lex_string(cur: &mut Cursor<'_>) -> Result<TokenKind, Diagnostic> {
    let start = cur.pos();
    cur.bump();
    let mut out = String::new();
    loop {
        let here = cur.pos();
        match cur.bump() {
            None | Some('\n') => {
                return Err(Diagnostic::error(start, "unterminated string literal"));
            }
            Some('"') => return Ok(TokenKind::Str(out)),
            Some('\\') => match cur.bump() {
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some('r') => out.push('\r'),
                Some(other) => {
                    return Err(Diagnostic::error(
                        here,
                        format!("unknown escape sequence `\\{other}`"),
                    ))
                }
                None => return Err(Diagnostic::error(start, "unterminated string literal")),
            },
            Some(c) => out.push(c),
        }
    }
}
