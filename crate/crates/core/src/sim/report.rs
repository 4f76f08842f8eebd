use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::ExplanationTrace;
use crate::matching::MatchScore;

use super::adapt::FeedbackRecord;
use super::histogram::Histogram;
use super::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySummary {
    pub id: String,
    pub size: usize,
}

/// One entry per norm load; the first is the scenario's own norm file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormVersion {
    /// Script time of the reload, absent for the initial load.
    pub t: Option<f64>,
    pub source: String,
    pub accepted: bool,
    /// Version active after this entry.
    pub version: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionReport {
    pub id: String,
    pub t: f64,
    pub questioner: String,
    pub text: String,
    pub norm_version: u64,
    pub recipients: Vec<String>,
    pub selection: Vec<MatchScore>,
    /// One trace per installed norm for the question's creation event.
    pub traces: Vec<ExplanationTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub seed: u64,
    pub community: CommunitySummary,
    pub questions: Vec<QuestionReport>,
    /// Aggregates of every selected profile.
    pub histogram: Histogram,
    pub feedback: Vec<FeedbackRecord>,
    /// Fan-out suggested after each question.
    pub k_trajectory: Vec<usize>,
    pub norm_versions: Vec<NormVersion>,
}

impl SimulationReport {
    /// Pretty JSON with a trailing newline. Field order is fixed by the
    /// struct layout and maps are sorted, so output is byte-stable.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn question(&self, id: &str) -> Option<&QuestionReport> {
        self.questions.iter().find(|q| q.id == id)
    }

    pub fn selected_aggregates(&self) -> impl Iterator<Item = f64> + '_ {
        self.questions
            .iter()
            .flat_map(|q| q.selection.iter().map(|s| s.aggregate))
    }

    /// Short human-readable overview.
    pub fn summary(&self) -> String {
        let selected: Vec<f64> = self.selected_aggregates().collect();
        let mean = if selected.is_empty() {
            0.0
        } else {
            selected.iter().sum::<f64>() / selected.len() as f64
        };
        let answers: usize = self.feedback.iter().map(|f| f.answers).sum();
        let accepted = self.norm_versions.iter().filter(|v| v.accepted).count();
        format!(
            "community {} ({} members), seed {}\n\
             questions: {}\n\
             selected profiles: {} (mean score {:.4})\n\
             answers: {}\n\
             final suggested k: {}\n\
             norm loads: {} accepted, {} rejected\n",
            self.community.id,
            self.community.size,
            self.seed,
            self.questions.len(),
            selected.len(),
            mean,
            answers,
            self.k_trajectory
                .last()
                .map_or("-".to_string(), |k| k.to_string()),
            accepted,
            self.norm_versions.len() - accepted,
        )
    }
}

pub fn save_report(report: &SimulationReport, path: impl AsRef<Path>) -> Result<(), SimError> {
    let path = path.as_ref();
    fs::write(path, report.to_json()).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_report(path: impl AsRef<Path>) -> Result<SimulationReport, SimError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| SimError::Report(e.to_string()))
}
