use std::fmt::Write;

use super::ast::{ActionCall, Condition, Literal, NormAst, Term};

/// Canonical layout:
///
/// ```text
/// norm name priority 2
///   whenever a.b == 1 and c
///   then first(x);
///     second(y)
/// ```
///
/// The priority clause is left out when it is 0 and parentheses appear only
/// where precedence needs them. Norms are separated by a blank line.
pub fn pretty_print(norms: &[NormAst]) -> String {
    let mut out = String::new();
    for (i, norm) in norms.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_norm(&mut out, norm);
    }
    out
}

fn write_norm(out: &mut String, norm: &NormAst) {
    out.push_str("norm ");
    out.push_str(&norm.name);
    if norm.priority != 0 {
        let _ = write!(out, " priority {}", norm.priority);
    }
    out.push_str("\n  whenever ");
    out.push_str(&condition_to_string(&norm.condition));
    out.push_str("\n  then ");
    for (i, action) in norm.actions.iter().enumerate() {
        if i > 0 {
            out.push_str(";\n    ");
        }
        out.push_str(&action_to_string(action));
    }
    out.push('\n');
}

// or < and < not < atom
fn precedence(c: &Condition) -> u8 {
    match c {
        Condition::Or(_) => 1,
        Condition::And(_) => 2,
        Condition::Not(_) => 3,
        _ => 4,
    }
}

pub fn condition_to_string(c: &Condition) -> String {
    let mut out = String::new();
    write_condition(&mut out, c, 0);
    out
}

fn write_condition(out: &mut String, c: &Condition, min_prec: u8) {
    let parens = precedence(c) < min_prec;
    if parens {
        out.push('(');
    }
    match c {
        Condition::Or(parts) | Condition::And(parts) => {
            let (sep, child_prec) = if matches!(c, Condition::Or(_)) {
                (" or ", 2)
            } else {
                (" and ", 3)
            };
            for (i, part) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                write_condition(out, part, child_prec);
            }
        }
        Condition::Not(inner) => {
            out.push_str("not ");
            write_condition(out, inner, 4);
        }
        Condition::Compare { op, lhs, rhs } => {
            out.push_str(&term_to_string(lhs));
            out.push(' ');
            out.push_str(op.as_str());
            out.push(' ');
            out.push_str(&term_to_string(rhs));
        }
        Condition::Path(p) => out.push_str(&p.dotted()),
        Condition::Const(b) => out.push_str(if *b { "true" } else { "false" }),
    }
    if parens {
        out.push(')');
    }
}

pub fn action_to_string(a: &ActionCall) -> String {
    let args: Vec<String> = a.args.iter().map(term_to_string).collect();
    format!("{}({})", a.name, args.join(", "))
}

pub fn term_to_string(t: &Term) -> String {
    match t {
        Term::Path(p) => p.dotted(),
        Term::Lit(lit) => literal_to_string(lit),
    }
}

pub fn literal_to_string(lit: &Literal) -> String {
    match lit {
        Literal::Number(v) => format!("{v}"),
        Literal::Bool(b) => b.to_string(),
        Literal::Str(s) => quote(s),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
