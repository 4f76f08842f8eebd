//! Condition evaluation with per-leaf explanation traces.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{condition_to_string, Condition, NormAst, Term};

use super::value::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub path: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafTrace {
    /// The leaf as written in canonical form, e.g. `candidate.score >= 0.6`.
    pub condition: String,
    pub observed: Vec<Observation>,
    pub outcome: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fault {
    pub action: String,
    pub message: String,
}

/// Why a norm did or did not fire on one event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationTrace {
    pub norm: String,
    pub fired: bool,
    /// Outcome of each top-level conjunct; `fired` is their conjunction.
    pub conjuncts: Vec<bool>,
    pub leaves: Vec<LeafTrace>,
    /// Index into `leaves` of the leaf that blocked a non-fired norm.
    pub blocking: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub faults: Vec<Fault>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ExplainError {
    #[error("no trace for norm `{0}`")]
    UnknownNorm(String),
}

struct Evaluator<'a, F> {
    resolve: &'a F,
    leaves: Vec<LeafTrace>,
}

impl<F: Fn(&str) -> Value> Evaluator<'_, F> {
    fn term(&self, t: &Term, observed: &mut Vec<Observation>) -> Value {
        match t {
            Term::Lit(lit) => Value::from(lit),
            Term::Path(p) => {
                let path = p.dotted();
                let value = (self.resolve)(&path);
                observed.push(Observation {
                    path,
                    value: value.clone(),
                });
                value
            }
        }
    }

    // Every leaf is evaluated (no short-circuit) so traces are complete.
    fn eval(&mut self, c: &Condition) -> bool {
        match c {
            Condition::And(parts) => parts.iter().map(|p| self.eval(p)).fold(true, |a, b| a & b),
            Condition::Or(parts) => parts.iter().map(|p| self.eval(p)).fold(false, |a, b| a | b),
            Condition::Not(inner) => !self.eval(inner),
            leaf => {
                let mut observed = Vec::new();
                let outcome = match leaf {
                    Condition::Compare { op, lhs, rhs } => {
                        let l = self.term(lhs, &mut observed);
                        let r = self.term(rhs, &mut observed);
                        l.compare(*op, &r)
                    }
                    Condition::Path(p) => {
                        self.term(&Term::Path(p.clone()), &mut observed) == Value::Bool(true)
                    }
                    Condition::Const(b) => *b,
                    _ => unreachable!("compound conditions handled above"),
                };
                self.leaves.push(LeafTrace {
                    condition: condition_to_string(leaf),
                    observed,
                    outcome,
                });
                outcome
            }
        }
    }
}

/// Evaluates a norm's condition with `resolve` supplying path values.
pub fn evaluate<F: Fn(&str) -> Value>(norm: &NormAst, resolve: &F) -> ExplanationTrace {
    let mut ev = Evaluator {
        resolve,
        leaves: Vec::new(),
    };
    let mut conjuncts = Vec::new();
    let mut blocking = None;
    for conjunct in norm.condition.conjuncts() {
        let first_leaf = ev.leaves.len();
        let ok = ev.eval(conjunct);
        if !ok && blocking.is_none() {
            let own = &ev.leaves[first_leaf..];
            let offset = own.iter().position(|l| !l.outcome).unwrap_or(0);
            blocking = (!own.is_empty()).then_some(first_leaf + offset);
        }
        conjuncts.push(ok);
    }
    ExplanationTrace {
        norm: norm.name.clone(),
        fired: conjuncts.iter().all(|c| *c),
        conjuncts,
        leaves: ev.leaves,
        blocking,
        faults: Vec::new(),
    }
}

/// Renders the trace of one norm: a status line, then one line per leaf
/// with its observed values and verdict. The blocking leaf of a norm that
/// did not fire is marked.
pub fn explain(traces: &[ExplanationTrace], norm: &str) -> Result<String, ExplainError> {
    let trace = traces
        .iter()
        .find(|t| t.norm == norm)
        .ok_or_else(|| ExplainError::UnknownNorm(norm.into()))?;
    let mut out = format!(
        "norm {}: {}\n",
        trace.norm,
        if trace.fired { "fired" } else { "did not fire" }
    );
    for (i, leaf) in trace.leaves.iter().enumerate() {
        let _ = write!(
            out,
            "  [{}] {}",
            if leaf.outcome { "true " } else { "false" },
            leaf.condition
        );
        if !leaf.observed.is_empty() {
            let seen: Vec<String> = leaf
                .observed
                .iter()
                .map(|o| format!("{} = {}", o.path, o.value))
                .collect();
            let _ = write!(out, "  (observed {})", seen.join(", "));
        }
        if !trace.fired && trace.blocking == Some(i) {
            out.push_str("  <- blocking");
        }
        out.push('\n');
    }
    for fault in &trace.faults {
        let _ = writeln!(out, "  fault in {}: {}", fault.action, fault.message);
    }
    Ok(out)
}
