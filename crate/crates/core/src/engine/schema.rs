use crate::dsl::{Kind, SchemaCatalog};

use super::value::Value;

/// Community-level variables the `set` action may write, with their
/// initial values.
pub fn scalar_defaults() -> Vec<(&'static str, Value)> {
    vec![
        ("community.suggested_k", Value::Number(5.0)),
        ("community.paused", Value::Bool(false)),
        ("community.min_score", Value::Number(0.0)),
    ]
}

/// Every path and action a norm may use.
pub fn engine_schema() -> SchemaCatalog {
    use Kind::*;
    let mut schema = SchemaCatalog::new()
        .with_path("event.id", String)
        .with_path("event.type", String)
        .with_path("event.t", Number)
        .with_path("event.question_id", String)
        .with_path("event.user_id", String)
        .with_path("event.rating", Number)
        .with_path("event.text", String)
        .with_path("question.id", String)
        .with_path("question.text", String)
        .with_path("question.questioner", String)
        .with_path("question.status", String)
        .with_path("question.k", Number)
        .with_path("question.recipients", Number)
        .with_path("question.answers", Number)
        .with_path("question.helpful", Number)
        .with_path("questioner.id", String)
        .with_path("questioner.gender", String)
        .with_path("candidate.id", String)
        .with_path("candidate.gender", String)
        .with_path("candidate.score", Number)
        .with_path("candidate.tier", Number)
        .with_path("candidate.selected", Boolean)
        .with_path("community.id", String)
        .with_path("community.size", Number)
        .with_path("community.open_questions", Number)
        .with_action("send_message", &[String, String])
        .with_action("notify", &[String, String])
        .with_action("update_profile", &[String, String, Any])
        .with_action("select_responders", &[String, Number])
        .with_action("set", &[String, Any]);
    for (path, value) in scalar_defaults() {
        let kind = match value {
            Value::Bool(_) => Boolean,
            Value::Number(_) => Number,
            _ => String,
        };
        schema = schema.with_path(path, kind);
    }
    schema
}
