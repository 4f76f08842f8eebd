//! Syntax tree for norm files.
//!
//! Equality ignores source spans, so a tree compares equal to the tree
//! obtained by reparsing its pretty-printed form.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::diagnostic::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub fn as_str(self) -> &'static str {
        match self {
            RelOp::Eq => "==",
            RelOp::Ne => "!=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, RelOp::Eq | RelOp::Ne)
    }
}

/// Dotted reference into engine state, e.g. `question.id`.
#[derive(Debug, Clone)]
pub struct PathRef {
    pub segments: Vec<String>,
    pub span: Span,
}

impl PathRef {
    pub fn dotted(&self) -> String {
        self.segments.join(".")
    }
}

impl PartialEq for PathRef {
    fn eq(&self, other: &Self) -> bool {
        self.segments == other.segments
    }
}

impl fmt::Display for PathRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dotted())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Number(f64),
    Str(String),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Path(PathRef),
    Lit(Literal),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    /// Two or more conjuncts.
    And(Vec<Condition>),
    /// Two or more disjuncts.
    Or(Vec<Condition>),
    Not(Box<Condition>),
    Compare {
        op: RelOp,
        lhs: Term,
        rhs: Term,
    },
    /// A boolean-valued path used on its own.
    Path(PathRef),
    /// `true` or `false` used on its own.
    Const(bool),
}

impl Condition {
    /// Visits every comparison, bare path and constant, left to right.
    pub fn leaves<'a>(&'a self, out: &mut Vec<&'a Condition>) {
        match self {
            Condition::And(cs) | Condition::Or(cs) => cs.iter().for_each(|c| c.leaves(out)),
            Condition::Not(c) => c.leaves(out),
            leaf => out.push(leaf),
        }
    }

    /// The top-level conjuncts: the children of a root `and`, otherwise the
    /// condition itself.
    pub fn conjuncts(&self) -> &[Condition] {
        match self {
            Condition::And(cs) => cs,
            other => std::slice::from_ref(other),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ActionCall {
    pub name: String,
    pub args: Vec<Term>,
    pub span: Span,
}

impl PartialEq for ActionCall {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.args == other.args
    }
}

#[derive(Debug, Clone)]
pub struct NormAst {
    pub name: String,
    pub priority: i64,
    pub condition: Condition,
    pub actions: Vec<ActionCall>,
    pub span: Span,
}

impl PartialEq for NormAst {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.priority == other.priority
            && self.condition == other.condition
            && self.actions == other.actions
    }
}
