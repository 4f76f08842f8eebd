use std::collections::BTreeMap;
use std::io;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{lint, parse, Diagnostic, NormAst, Term};
use crate::matching::{run_match, score_candidate, MatchError, MatchQuery, MatchScore};
use crate::metrics::MetricParams;
use crate::profile::{Community, Profile};

use super::event::{Event, EventKind, Rating};
use super::schema::{engine_schema, scalar_defaults};
use super::trace::{evaluate, ExplanationTrace, Fault};
use super::value::Value;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("invalid event `{id}`: {reason}")]
    InvalidEvent { id: String, reason: String },
    #[error("unknown scalar variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` has a different kind")]
    VariableKind(String),
}

/// A rejected reload. The previous norm set stays active.
#[derive(Debug, Error, PartialEq)]
#[error("norm reload rejected with {} diagnostic(s)", .diagnostics.len())]
pub struct ReloadError {
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionStatus {
    Open,
    Dispatched,
    Answered,
}

impl QuestionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            QuestionStatus::Open => "open",
            QuestionStatus::Dispatched => "dispatched",
            QuestionStatus::Answered => "answered",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub questioner: String,
    pub text: String,
    pub query: MatchQuery,
    pub status: QuestionStatus,
    pub recipients: Vec<String>,
    /// Scores of the recipients, in dispatch order.
    pub selection: Vec<MatchScore>,
    pub answers: Vec<String>,
    pub ratings: Vec<(String, Rating)>,
}

/// One executed action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEffect {
    pub seq: u64,
    pub norm: String,
    pub action: String,
    pub args: Vec<Value>,
    pub event_id: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventOutcome {
    pub effects: Vec<ActionEffect>,
    /// One trace per installed norm, in declaration order.
    pub traces: Vec<ExplanationTrace>,
}

/// Writes effects as newline-delimited JSON records.
pub fn write_effect_log<W: io::Write>(effects: &[ActionEffect], mut out: W) -> io::Result<()> {
    for effect in effects {
        serde_json::to_writer(&mut out, effect)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Community snapshot, open questions, effect log, installed norms and
/// scalar variables.
///
/// Events are processed one at a time. All norm conditions and action
/// arguments are read from the state as it stands after the event's own
/// bookkeeping (registering a question, recording an answer) and before
/// any action runs; fired norms then execute in priority-descending,
/// declaration order. Actions never trigger further norms within the same
/// event.
#[derive(Debug, Clone)]
pub struct EngineState {
    community: Arc<Community>,
    params: MetricParams,
    questions: BTreeMap<String, QuestionRecord>,
    effects: Vec<ActionEffect>,
    events: Vec<String>,
    norms: Arc<Vec<NormAst>>,
    version: u64,
    vars: BTreeMap<String, Value>,
}

struct PendingAction {
    norm_index: usize,
    action: String,
    args: Vec<Value>,
}

impl EngineState {
    /// Empty norm set, version 0.
    pub fn new(community: Community, params: MetricParams) -> Self {
        Self {
            community: Arc::new(community),
            params,
            questions: BTreeMap::new(),
            effects: Vec::new(),
            events: Vec::new(),
            norms: Arc::new(Vec::new()),
            version: 0,
            vars: scalar_defaults()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        }
    }

    pub fn community(&self) -> &Community {
        &self.community
    }

    pub fn params(&self) -> &MetricParams {
        &self.params
    }

    pub fn norms(&self) -> &[NormAst] {
        &self.norms
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn effects(&self) -> &[ActionEffect] {
        &self.effects
    }

    pub fn event_log(&self) -> &[String] {
        &self.events
    }

    pub fn question(&self, id: &str) -> Option<&QuestionRecord> {
        self.questions.get(id)
    }

    pub fn questions(&self) -> impl Iterator<Item = &QuestionRecord> + '_ {
        self.questions.values()
    }

    pub fn var(&self, path: &str) -> Option<&Value> {
        self.vars.get(path)
    }

    /// Writes a scalar variable from outside the norm set (e.g. a simulator
    /// feeding back an adapted fan-out).
    pub fn set_var(&mut self, path: &str, value: Value) -> Result<(), EngineError> {
        let slot = self
            .vars
            .get_mut(path)
            .ok_or_else(|| EngineError::UnknownVariable(path.into()))?;
        if !slot.same_kind(&value) {
            return Err(EngineError::VariableKind(path.into()));
        }
        *slot = value;
        Ok(())
    }

    /// Parses and lints `text`; on success swaps in the new norm set and bumps
    /// the version. Questions, logs and variables are kept. On failure
    /// nothing changes.
    pub fn reload_norms(&mut self, text: &str) -> Result<u64, ReloadError> {
        let norms = parse(text).map_err(|e| ReloadError {
            diagnostics: vec![e.diagnostic],
        })?;
        let diagnostics = lint(&norms, &engine_schema());
        if !diagnostics.is_empty() {
            return Err(ReloadError { diagnostics });
        }
        self.norms = Arc::new(norms);
        self.version += 1;
        Ok(self.version)
    }

    pub fn handle_event(&mut self, event: &Event) -> Result<EventOutcome, EngineError> {
        self.validate(event)?;
        self.record(event);

        let norms = Arc::clone(&self.norms);
        let resolve = |path: &str| self.resolve(event, path);
        let mut traces: Vec<ExplanationTrace> =
            norms.iter().map(|n| evaluate(n, &resolve)).collect();

        let mut order: Vec<usize> = (0..norms.len()).filter(|&i| traces[i].fired).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(norms[i].priority));
        let pending: Vec<PendingAction> = order
            .into_iter()
            .flat_map(|i| norms[i].actions.iter().map(move |a| (i, a)))
            .map(|(i, a)| PendingAction {
                norm_index: i,
                action: a.name.clone(),
                args: a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Lit(lit) => Value::from(lit),
                        Term::Path(p) => self.resolve(event, &p.dotted()),
                    })
                    .collect(),
            })
            .collect();

        let mut outcome = EventOutcome::default();
        for action in pending {
            let norm = &norms[action.norm_index].name;
            match self.apply(&action.action, &action.args) {
                Ok(emitted) => {
                    for (name, args) in emitted {
                        let effect = ActionEffect {
                            seq: self.effects.len() as u64 + 1,
                            norm: norm.clone(),
                            action: name,
                            args,
                            event_id: event.id.clone(),
                        };
                        self.effects.push(effect.clone());
                        outcome.effects.push(effect);
                    }
                }
                Err(message) => traces[action.norm_index].faults.push(Fault {
                    action: action.action.clone(),
                    message,
                }),
            }
        }
        outcome.traces = traces;
        Ok(outcome)
    }

    fn validate(&self, event: &Event) -> Result<(), EngineError> {
        let invalid = |reason: String| EngineError::InvalidEvent {
            id: event.id.clone(),
            reason,
        };
        match &event.kind {
            EventKind::QuestionCreated {
                question_id,
                questioner,
                query,
                ..
            } => {
                if self.questions.contains_key(question_id) {
                    return Err(invalid(format!("question `{question_id}` already exists")));
                }
                if !self.community.contains(questioner) {
                    return Err(invalid(format!("unknown questioner `{questioner}`")));
                }
                if !query.questioner.is_empty() && &query.questioner != questioner {
                    return Err(invalid(
                        "query questioner differs from event questioner".into(),
                    ));
                }
                let mut q = query.clone();
                q.questioner = questioner.clone();
                q.validate().map_err(|e| invalid(e.to_string()))?;
            }
            EventKind::AnswerSubmitted {
                question_id,
                responder,
            }
            | EventKind::FeedbackSubmitted {
                question_id,
                responder,
                ..
            } => {
                if !self.questions.contains_key(question_id) {
                    return Err(invalid(format!("unknown question `{question_id}`")));
                }
                if !self.community.contains(responder) {
                    return Err(invalid(format!("unknown user `{responder}`")));
                }
            }
            EventKind::TimerTick => {}
        }
        Ok(())
    }

    fn record(&mut self, event: &Event) {
        self.events.push(event.id.clone());
        match &event.kind {
            EventKind::QuestionCreated {
                question_id,
                questioner,
                text,
                query,
            } => {
                let mut query = query.clone();
                query.questioner = questioner.clone();
                self.questions.insert(
                    question_id.clone(),
                    QuestionRecord {
                        id: question_id.clone(),
                        questioner: questioner.clone(),
                        text: text.clone(),
                        query,
                        status: QuestionStatus::Open,
                        recipients: Vec::new(),
                        selection: Vec::new(),
                        answers: Vec::new(),
                        ratings: Vec::new(),
                    },
                );
            }
            EventKind::AnswerSubmitted {
                question_id,
                responder,
            } => {
                if let Some(q) = self.questions.get_mut(question_id) {
                    q.answers.push(responder.clone());
                    q.status = QuestionStatus::Answered;
                }
            }
            EventKind::FeedbackSubmitted {
                question_id,
                responder,
                rating,
            } => {
                if let Some(q) = self.questions.get_mut(question_id) {
                    q.ratings.push((responder.clone(), *rating));
                }
            }
            EventKind::TimerTick => {}
        }
    }

    /// Value of a schema path in the context of `event`.
    pub fn resolve(&self, event: &Event, path: &str) -> Value {
        let (head, field) = path.split_once('.').unwrap_or((path, ""));
        let question = event
            .kind
            .question_id()
            .and_then(|id| self.questions.get(id));
        match head {
            "event" => match field {
                "id" => Value::from(event.id.as_str()),
                "type" => Value::from(event.kind.type_name()),
                "t" => Value::Number(event.t),
                "question_id" => event.kind.question_id().map_or(Value::Null, Value::from),
                "user_id" => event.kind.user_id().map_or(Value::Null, Value::from),
                "rating" => match &event.kind {
                    EventKind::FeedbackSubmitted { rating, .. } => Value::Number(rating.score()),
                    _ => Value::Null,
                },
                "text" => match &event.kind {
                    EventKind::QuestionCreated { text, .. } => Value::from(text.as_str()),
                    _ => Value::Null,
                },
                _ => Value::Null,
            },
            "question" => {
                let Some(q) = question else {
                    return Value::Null;
                };
                match field {
                    "id" => Value::from(q.id.as_str()),
                    "text" => Value::from(q.text.as_str()),
                    "questioner" => Value::from(q.questioner.as_str()),
                    "status" => Value::from(q.status.as_str()),
                    "k" => Value::Number(q.query.k as f64),
                    "recipients" => Value::Number(q.recipients.len() as f64),
                    "answers" => Value::Number(q.answers.len() as f64),
                    "helpful" => Value::Number(
                        q.ratings
                            .iter()
                            .filter(|(_, r)| *r == Rating::Helpful)
                            .count() as f64,
                    ),
                    _ => Value::Null,
                }
            }
            "questioner" => {
                let Some(p) = question.and_then(|q| self.community.get(&q.questioner)) else {
                    return Value::Null;
                };
                profile_field(p, field)
            }
            "candidate" => {
                let candidate = match &event.kind {
                    EventKind::AnswerSubmitted { responder, .. }
                    | EventKind::FeedbackSubmitted { responder, .. } => {
                        self.community.get(responder)
                    }
                    _ => None,
                };
                let Some(p) = candidate else {
                    return Value::Null;
                };
                match (field, question) {
                    ("score" | "tier", Some(q)) => {
                        match score_candidate(&q.query, &self.community, &p.id, &self.params) {
                            Ok(s) if field == "score" => Value::Number(s.aggregate),
                            Ok(s) => Value::Number(f64::from(s.tier)),
                            Err(_) => Value::Null,
                        }
                    }
                    ("selected", Some(q)) => Value::Bool(q.recipients.contains(&p.id)),
                    _ => profile_field(p, field),
                }
            }
            "community" => match field {
                "id" => Value::from(self.community.id()),
                "size" => Value::Number(self.community.len() as f64),
                "open_questions" => Value::Number(
                    self.questions
                        .values()
                        .filter(|q| q.status != QuestionStatus::Answered)
                        .count() as f64,
                ),
                _ => self.vars.get(path).cloned().unwrap_or(Value::Null),
            },
            _ => Value::Null,
        }
    }

    /// Runs one action. Returns the effects to log as `(action, args)`, or a
    /// fault message when the action cannot run.
    fn apply(&mut self, action: &str, args: &[Value]) -> Result<Vec<(String, Vec<Value>)>, String> {
        let text_arg = |i: usize| -> Result<String, String> {
            args.get(i)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| format!("argument {} is missing or not a string", i + 1))
        };
        let member = |id: &str| -> Result<(), String> {
            if self.community.contains(id) {
                Ok(())
            } else {
                Err(format!("unknown user `{id}`"))
            }
        };
        match action {
            "send_message" | "notify" => {
                let (to, text) = (text_arg(0)?, text_arg(1)?);
                member(&to)?;
                Ok(vec![(
                    action.to_string(),
                    vec![Value::Str(to), Value::Str(text)],
                )])
            }
            "update_profile" => {
                let (user, field) = (text_arg(0)?, text_arg(1)?);
                member(&user)?;
                let value = match args.get(2) {
                    Some(Value::Str(s)) => s.clone(),
                    Some(Value::Null) | None => return Err("argument 3 is missing".into()),
                    Some(other) => other.to_string(),
                };
                let mut profile = self.community.get(&user).cloned().expect("checked member");
                if field == "gender" {
                    profile.gender = value.clone();
                } else {
                    profile.extra_shallow.insert(field.clone(), value.clone());
                }
                let next = self
                    .community
                    .with_member(profile)
                    .map_err(|e| e.to_string())?;
                self.community = Arc::new(next);
                Ok(vec![(
                    action.to_string(),
                    vec![Value::Str(user), Value::Str(field), Value::Str(value)],
                )])
            }
            "select_responders" => {
                let qid = text_arg(0)?;
                let k = args
                    .get(1)
                    .and_then(Value::as_number)
                    .filter(|k| k.is_finite() && *k >= 1.0 && k.fract() == 0.0)
                    .ok_or("argument 2 must be a positive integer")?;
                let question = self
                    .questions
                    .get(&qid)
                    .ok_or_else(|| format!("unknown question `{qid}`"))?;
                let mut query = question.query.clone();
                query.k = k.min(usize::MAX as f64) as usize;
                let outcome = run_match(&query, &self.community, &self.params)
                    .map_err(|e: MatchError| e.to_string())?;
                let text = question.text.clone();
                let mut emitted = vec![(
                    action.to_string(),
                    vec![Value::Str(qid.clone()), Value::Number(k)],
                )];
                emitted.extend(outcome.selected.iter().map(|s| {
                    (
                        "send_message".to_string(),
                        vec![Value::Str(s.candidate.clone()), Value::Str(text.clone())],
                    )
                }));
                let q = self.questions.get_mut(&qid).expect("looked up above");
                q.recipients = outcome.selected_ids();
                q.selection = outcome.selected;
                if q.status == QuestionStatus::Open {
                    q.status = QuestionStatus::Dispatched;
                }
                Ok(emitted)
            }
            "set" => {
                let path = text_arg(0)?;
                let value = args.get(1).cloned().unwrap_or(Value::Null);
                self.set_var(&path, value.clone())
                    .map_err(|e| e.to_string())?;
                Ok(vec![(action.to_string(), vec![Value::Str(path), value])])
            }
            other => Err(format!("unknown action `{other}`")),
        }
    }
}

fn profile_field(p: &Profile, field: &str) -> Value {
    match field {
        "id" => Value::from(p.id.as_str()),
        "gender" => Value::from(p.gender.as_str()),
        _ => Value::Null,
    }
}
