use serde::{Deserialize, Serialize};

use crate::engine::Rating;
use crate::matching::DEFAULT_K;

/// Outcome of one dispatched question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub question_id: String,
    /// How many members received the question.
    pub recipients: usize,
    pub answers: usize,
    pub ratings: Vec<Rating>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptConfig {
    pub k_min: usize,
    pub k_max: usize,
    /// Wanted probability of at least one answer.
    pub target: f64,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            k_min: 1,
            k_max: 10,
            target: 0.95,
        }
    }
}

/// Smallest fan-out `k` in `[k_min, k_max]` whose chance of collecting at
/// least one answer, `1 - (1 - p)^k`, reaches the target, where `p` is the
/// pooled answer rate over `history`. Falls back to the default fan-out when
/// there is no evidence yet or nobody ever answered, and to `k_max` when no
/// admissible `k` reaches the target.
pub fn adapt_k(history: &[FeedbackRecord], cfg: &AdaptConfig) -> usize {
    let sent: usize = history.iter().map(|r| r.recipients).sum();
    let answered: usize = history.iter().map(|r| r.answers).sum();
    if sent == 0 || answered == 0 {
        return DEFAULT_K.clamp(cfg.k_min, cfg.k_max.max(cfg.k_min));
    }
    let p = answered as f64 / sent as f64;
    (cfg.k_min..=cfg.k_max)
        .find(|&k| 1.0 - (1.0 - p).powi(k as i32) >= cfg.target)
        .unwrap_or(cfg.k_max)
}
