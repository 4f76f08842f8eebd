//! Norm evaluation over community state.
//!
//! The engine owns a community snapshot, the open questions, an append-only
//! effect log, the installed norm set and a handful of scalar variables.
//! Norm files can be swapped at runtime with [`EngineState::reload_norms`];
//! a rejected reload leaves the running norms untouched.

mod event;
mod schema;
mod state;
mod trace;
mod value;

pub use event::{Event, EventKind, Rating};
pub use schema::{engine_schema, scalar_defaults};
pub use state::{
    write_effect_log, ActionEffect, EngineError, EngineState, EventOutcome, QuestionRecord,
    QuestionStatus, ReloadError,
};
pub use trace::{evaluate, explain, ExplainError, ExplanationTrace, Fault, LeafTrace, Observation};
pub use value::Value;
