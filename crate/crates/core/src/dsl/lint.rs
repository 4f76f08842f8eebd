use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{Condition, Literal, NormAst, PathRef, Term};
use super::diagnostic::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Number,
    String,
    Boolean,
    /// Accepts any kind. Only meaningful for action arguments.
    Any,
}

impl Kind {
    fn accepts(self, other: Kind) -> bool {
        self == Kind::Any || other == Kind::Any || self == other
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Number => "number",
            Kind::String => "string",
            Kind::Boolean => "boolean",
            Kind::Any => "any",
        })
    }
}

/// Legal state paths and actions for a norm set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SchemaCatalog {
    paths: BTreeMap<String, Kind>,
    actions: BTreeMap<String, Vec<Kind>>,
}

impl SchemaCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_path(mut self, path: &str, kind: Kind) -> Self {
        assert!(kind != Kind::Any, "state paths need a concrete kind");
        self.paths.insert(path.to_string(), kind);
        self
    }

    pub fn with_action(mut self, name: &str, args: &[Kind]) -> Self {
        self.actions.insert(name.to_string(), args.to_vec());
        self
    }

    pub fn path_kind(&self, path: &str) -> Option<Kind> {
        self.paths.get(path).copied()
    }

    pub fn action(&self, name: &str) -> Option<&[Kind]> {
        self.actions.get(name).map(Vec::as_slice)
    }

    pub fn paths(&self) -> impl Iterator<Item = (&str, Kind)> + '_ {
        self.paths.iter().map(|(p, k)| (p.as_str(), *k))
    }
}

struct Linter<'a> {
    schema: &'a SchemaCatalog,
    out: Vec<Diagnostic>,
}

impl Linter<'_> {
    fn path_kind(&mut self, p: &PathRef) -> Option<Kind> {
        let dotted = p.dotted();
        let kind = self.schema.path_kind(&dotted);
        if kind.is_none() {
            self.out.push(Diagnostic::error(
                p.span.start,
                format!("unknown path `{dotted}`"),
            ));
        }
        kind
    }

    fn term_kind(&mut self, t: &Term) -> Option<Kind> {
        match t {
            Term::Path(p) => self.path_kind(p),
            Term::Lit(Literal::Number(_)) => Some(Kind::Number),
            Term::Lit(Literal::Str(_)) => Some(Kind::String),
            Term::Lit(Literal::Bool(_)) => Some(Kind::Boolean),
        }
    }

    fn condition(&mut self, c: &Condition, norm: &NormAst) {
        match c {
            Condition::And(parts) | Condition::Or(parts) => {
                parts.iter().for_each(|p| self.condition(p, norm))
            }
            Condition::Not(inner) => self.condition(inner, norm),
            Condition::Const(_) => {}
            Condition::Path(p) => {
                if let Some(kind) = self.path_kind(p) {
                    if kind != Kind::Boolean {
                        self.out.push(Diagnostic::error(
                            p.span.start,
                            format!("kind mismatch: `{p}` is a {kind}, a bare condition must be boolean"),
                        ));
                    }
                }
            }
            Condition::Compare { op, lhs, rhs } => {
                let pos = match lhs {
                    Term::Path(p) => p.span.start,
                    Term::Lit(_) => norm.span.start,
                };
                let (lk, rk) = (self.term_kind(lhs), self.term_kind(rhs));
                let (Some(lk), Some(rk)) = (lk, rk) else {
                    return;
                };
                if lk != rk {
                    self.out.push(Diagnostic::error(
                        pos,
                        format!(
                            "kind mismatch: cannot compare {lk} with {rk} using `{}`",
                            op.as_str()
                        ),
                    ));
                } else if op.is_ordering() && lk != Kind::Number {
                    self.out.push(Diagnostic::error(
                        pos,
                        format!("kind mismatch: `{}` needs numbers, found {lk}", op.as_str()),
                    ));
                }
            }
        }
    }
}

/// Checks norms against a schema: unknown paths and actions, arity and kind
/// mismatches, and repeated norm names. Returns an empty list when every
/// norm resolves.
pub fn lint(norms: &[NormAst], schema: &SchemaCatalog) -> Vec<Diagnostic> {
    let mut linter = Linter {
        schema,
        out: Vec::new(),
    };
    let mut seen = HashSet::new();
    for norm in norms {
        if !seen.insert(norm.name.as_str()) {
            linter.out.push(Diagnostic::error(
                norm.span.start,
                format!("norm `{}` is declared more than once", norm.name),
            ));
        }
        linter.condition(&norm.condition, norm);
        for action in &norm.actions {
            let Some(sig) = schema.action(&action.name) else {
                linter.out.push(Diagnostic::error(
                    action.span.start,
                    format!("unknown action `{}`", action.name),
                ));
                action.args.iter().for_each(|a| {
                    linter.term_kind(a);
                });
                continue;
            };
            if sig.len() != action.args.len() {
                linter.out.push(Diagnostic::error(
                    action.span.start,
                    format!(
                        "arity mismatch: `{}` expects {} argument{}, found {}",
                        action.name,
                        sig.len(),
                        if sig.len() == 1 { "" } else { "s" },
                        action.args.len()
                    ),
                ));
            }
            for (i, arg) in action.args.iter().enumerate() {
                let found = linter.term_kind(arg);
                if let (Some(&want), Some(found)) = (sig.get(i), found) {
                    if !want.accepts(found) {
                        linter.out.push(Diagnostic::error(
                            action.span.start,
                            format!(
                                "kind mismatch: argument {} of `{}` must be a {want}, found {found}",
                                i + 1,
                                action.name
                            ),
                        ));
                    }
                }
            }
        }
    }
    linter.out
}
