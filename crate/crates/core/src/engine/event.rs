use serde::{Deserialize, Serialize};

use crate::matching::MatchQuery;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rating {
    Helpful,
    Unhelpful,
}

impl Rating {
    /// 1 for helpful, 0 otherwise; the value `event.rating` reads.
    pub fn score(self) -> f64 {
        match self {
            Rating::Helpful => 1.0,
            Rating::Unhelpful => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    QuestionCreated {
        question_id: String,
        questioner: String,
        text: String,
        query: MatchQuery,
    },
    AnswerSubmitted {
        question_id: String,
        responder: String,
    },
    FeedbackSubmitted {
        question_id: String,
        responder: String,
        rating: Rating,
    },
    TimerTick,
}

impl EventKind {
    pub fn type_name(&self) -> &'static str {
        match self {
            EventKind::QuestionCreated { .. } => "question_created",
            EventKind::AnswerSubmitted { .. } => "answer_submitted",
            EventKind::FeedbackSubmitted { .. } => "feedback_submitted",
            EventKind::TimerTick => "timer_tick",
        }
    }

    pub fn question_id(&self) -> Option<&str> {
        match self {
            EventKind::QuestionCreated { question_id, .. }
            | EventKind::AnswerSubmitted { question_id, .. }
            | EventKind::FeedbackSubmitted { question_id, .. } => Some(question_id),
            EventKind::TimerTick => None,
        }
    }

    /// The user the event originates from: the questioner for a new
    /// question, the responder for answers and feedback.
    pub fn user_id(&self) -> Option<&str> {
        match self {
            EventKind::QuestionCreated { questioner, .. } => Some(questioner),
            EventKind::AnswerSubmitted { responder, .. }
            | EventKind::FeedbackSubmitted { responder, .. } => Some(responder),
            EventKind::TimerTick => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub id: String,
    /// Scenario time; engine behaviour does not depend on it beyond `event.t`.
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl Event {
    pub fn new(id: impl Into<String>, t: f64, kind: EventKind) -> Self {
        Self {
            id: id.into(),
            t,
            kind,
        }
    }
}
