//! Seeded scenario replay.
//!
//! A scenario names a community, a norm file and a script of questions,
//! reloads and timer ticks. Each question goes through the engine; every
//! recipient then answers with the scripted probability and, having answered,
//! is rated helpful with probability equal to its matching score. All draws
//! come from one ChaCha stream seeded by the run seed, so a report is a pure
//! function of the scenario and the seed.

mod adapt;
mod histogram;
mod report;
mod scenario;

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dsl::Diagnostic;
use crate::engine::{EngineError, EngineState, Event, EventKind, Rating, Value};
use crate::profile::ProfileError;

pub use adapt::{adapt_k, AdaptConfig, FeedbackRecord};
pub use histogram::{bar_length, histogram, Histogram, HistogramBin, HistogramError, DEFAULT_BINS};
pub use report::{
    load_report, save_report, CommunitySummary, NormVersion, QuestionReport, SimulationReport,
};
pub use scenario::{
    query_mix, synthetic_script, CommunitySource, NormSource, Scenario, ScriptEvent, ScriptStep,
    DEFAULT_ANSWER_PROB,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Community(#[from] ProfileError),
    #[error("norm file {source_label} rejected")]
    Norms {
        source_label: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("invalid report: {0}")]
    Report(String),
    #[error(transparent)]
    Histogram(#[from] HistogramError),
}

struct Runner {
    engine: EngineState,
    rng: ChaCha8Rng,
    next_event: u64,
    report: SimulationReport,
}

impl Runner {
    fn event(&mut self, t: f64, kind: EventKind) -> Result<crate::engine::EventOutcome, SimError> {
        self.next_event += 1;
        let ev = Event::new(format!("e{:05}", self.next_event), t, kind);
        Ok(self.engine.handle_event(&ev)?)
    }

    fn question(
        &mut self,
        t: f64,
        questioner: &str,
        text: &str,
        query: &crate::matching::MatchQuery,
        answer_prob: f64,
        adapt: &AdaptConfig,
    ) -> Result<(), SimError> {
        let qid = format!("q{:04}", self.report.questions.len() + 1);
        let outcome = self.event(
            t,
            EventKind::QuestionCreated {
                question_id: qid.clone(),
                questioner: questioner.into(),
                text: text.into(),
                query: query.clone(),
            },
        )?;
        let record = self
            .engine
            .question(&qid)
            .expect("question just recorded")
            .clone();

        let mut answers = 0;
        let mut ratings = Vec::new();
        for recipient in &record.recipients {
            if self.rng.gen::<f64>() >= answer_prob {
                continue;
            }
            answers += 1;
            self.event(
                t,
                EventKind::AnswerSubmitted {
                    question_id: qid.clone(),
                    responder: recipient.clone(),
                },
            )?;
            let score = record
                .selection
                .iter()
                .find(|s| &s.candidate == recipient)
                .map_or(0.0, |s| s.aggregate);
            let rating = if self.rng.gen::<f64>() < score {
                Rating::Helpful
            } else {
                Rating::Unhelpful
            };
            ratings.push(rating);
            self.event(
                t,
                EventKind::FeedbackSubmitted {
                    question_id: qid.clone(),
                    responder: recipient.clone(),
                    rating,
                },
            )?;
        }

        self.report.feedback.push(FeedbackRecord {
            question_id: qid.clone(),
            recipients: record.recipients.len(),
            answers,
            ratings,
        });
        let k = adapt_k(&self.report.feedback, adapt);
        self.engine
            .set_var("community.suggested_k", Value::Number(k as f64))?;
        self.report.k_trajectory.push(k);
        self.report.questions.push(QuestionReport {
            id: qid,
            t,
            questioner: questioner.into(),
            text: text.into(),
            norm_version: self.engine.version(),
            recipients: record.recipients,
            selection: record.selection,
            traces: outcome.traces,
        });
        Ok(())
    }
}

/// Replays `sc` with relative paths resolved against `base`. The initial norm
/// file must parse and lint cleanly or nothing runs. A scripted reload that
/// is rejected is recorded in the version history and the old norms stay.
pub fn run_scenario(sc: &Scenario, base: &Path) -> Result<SimulationReport, SimError> {
    let community = sc.load_community(base)?;
    sc.validate(&community)?;
    let norms = sc.norms.read(base)?;

    let summary = CommunitySummary {
        id: community.id().to_string(),
        size: community.len(),
    };
    let mut engine = EngineState::new(community, sc.params);
    engine.reload_norms(&norms).map_err(|e| SimError::Norms {
        source_label: sc.norms.label(),
        diagnostics: e.diagnostics,
    })?;

    let mut run = Runner {
        engine,
        rng: ChaCha8Rng::seed_from_u64(sc.seed),
        next_event: 0,
        report: SimulationReport {
            seed: sc.seed,
            community: summary,
            questions: Vec::new(),
            histogram: histogram(&[], DEFAULT_BINS)?,
            feedback: Vec::new(),
            k_trajectory: Vec::new(),
            norm_versions: vec![NormVersion {
                t: None,
                source: sc.norms.label(),
                accepted: true,
                version: 1,
                diagnostics: Vec::new(),
            }],
        },
    };

    for ev in &sc.events {
        match &ev.step {
            ScriptStep::QuestionCreated {
                questioner,
                text,
                query,
                answer_prob,
            } => run.question(ev.t, questioner, text, query, *answer_prob, &sc.adapt)?,
            ScriptStep::Reload { reload } => {
                let text = reload.read(base)?;
                let entry = match run.engine.reload_norms(&text) {
                    Ok(version) => NormVersion {
                        t: Some(ev.t),
                        source: reload.label(),
                        accepted: true,
                        version,
                        diagnostics: Vec::new(),
                    },
                    Err(e) => NormVersion {
                        t: Some(ev.t),
                        source: reload.label(),
                        accepted: false,
                        version: run.engine.version(),
                        diagnostics: e
                            .diagnostics
                            .iter()
                            .map(|d| d.render(&reload.label()))
                            .collect(),
                    },
                };
                run.report.norm_versions.push(entry);
            }
            ScriptStep::TimerTick => {
                run.event(ev.t, EventKind::TimerTick)?;
            }
        }
    }

    let scores: Vec<f64> = run
        .report
        .questions
        .iter()
        .flat_map(|q| q.selection.iter().map(|s| s.aggregate))
        .collect();
    run.report.histogram = histogram(&scores, DEFAULT_BINS)?;
    Ok(run.report)
}
