//! Norm-mediated question routing.
//!
//! Declarative if-then norms, evaluated over community state, decide when a
//! question is dispatched and to whom. Candidates are scored along four
//! deep-feature dimensions, ranked, re-balanced over a shallow attribute such
//! as gender, and the top `k` receive the question. A seeded simulator replays
//! question scripts through the engine and reports matching-score histograms.

pub mod cli;
pub mod dsl;
pub mod engine;
pub mod matching;
pub mod metrics;
pub mod profile;
pub mod sim;
