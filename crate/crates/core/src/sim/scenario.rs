use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matching::{MatchMode, MatchQuery, Polarity, DEFAULT_K};
use crate::metrics::{Dimension, MetricParams};
use crate::profile::{generate_synthetic, load_community, Community, GeneratorConfig};

use super::adapt::AdaptConfig;
use super::SimError;

pub const DEFAULT_ANSWER_PROB: f64 = 0.5;

/// Where the community comes from: a community JSON file, or a generator
/// config plus seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CommunitySource {
    Path(PathBuf),
    Generated {
        generator: GeneratorConfig,
        seed: u64,
    },
}

/// A norm file path, or the norm text itself as `{"inline": "..."}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormSource {
    Path(PathBuf),
    Inline { inline: String },
}

impl NormSource {
    pub fn label(&self) -> String {
        match self {
            NormSource::Path(p) => p.display().to_string(),
            NormSource::Inline { .. } => "<inline>".into(),
        }
    }

    pub(crate) fn read(&self, base: &Path) -> Result<String, SimError> {
        match self {
            NormSource::Inline { inline } => Ok(inline.clone()),
            NormSource::Path(p) => {
                let path = base.join(p);
                fs::read_to_string(&path).map_err(|source| SimError::Io { path, source })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScriptStep {
    QuestionCreated {
        questioner: String,
        #[serde(default)]
        text: String,
        query: MatchQuery,
        /// Chance that each recipient answers.
        #[serde(default = "default_answer_prob")]
        answer_prob: f64,
    },
    /// Swap the active norm set.
    Reload {
        reload: NormSource,
    },
    TimerTick,
}

fn default_answer_prob() -> f64 {
    DEFAULT_ANSWER_PROB
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEvent {
    pub t: f64,
    #[serde(flatten)]
    pub step: ScriptStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub community: CommunitySource,
    pub norms: NormSource,
    pub seed: u64,
    #[serde(default)]
    pub params: MetricParams,
    #[serde(default)]
    pub adapt: AdaptConfig,
    #[serde(default)]
    pub events: Vec<ScriptEvent>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Scenario(e.to_string()))
    }

    /// Reads a scenario file. Relative paths inside it resolve against the
    /// returned base directory (the file's parent).
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf), SimError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| SimError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::parse(&text)?, base))
    }

    pub fn load_community(&self, base: &Path) -> Result<Community, SimError> {
        match &self.community {
            CommunitySource::Path(p) => Ok(load_community(base.join(p))?),
            CommunitySource::Generated { generator, seed } => {
                Ok(generate_synthetic(generator, *seed)?)
            }
        }
    }

    /// Checks script order, probabilities and questioner ids.
    pub fn validate(&self, community: &Community) -> Result<(), SimError> {
        let bad = |i: usize, m: String| Err(SimError::Scenario(format!("event {i}: {m}")));
        let mut last = f64::NEG_INFINITY;
        for (i, ev) in self.events.iter().enumerate() {
            if !ev.t.is_finite() {
                return bad(i, "time is not finite".into());
            }
            if ev.t < last {
                return bad(
                    i,
                    format!("time {} precedes the previous event at {last}", ev.t),
                );
            }
            last = ev.t;
            if let ScriptStep::QuestionCreated {
                questioner,
                answer_prob,
                ..
            } = &ev.step
            {
                if !community.contains(questioner) {
                    return bad(i, format!("unknown questioner `{questioner}`"));
                }
                if !(0.0..=1.0).contains(answer_prob) {
                    return bad(i, format!("answer_prob {answer_prob} outside [0, 1]"));
                }
            }
        }
        self.adapt_valid()
    }

    fn adapt_valid(&self) -> Result<(), SimError> {
        let a = &self.adapt;
        if a.k_min == 0 || a.k_min > a.k_max || !(0.0..=1.0).contains(&a.target) {
            return Err(SimError::Scenario(format!(
                "adapt needs 1 <= k_min <= k_max and target in [0, 1], got {a:?}"
            )));
        }
        Ok(())
    }
}

/// The fixed query mix used by synthetic scripts: a weighted query over all
/// four dimensions, a lexicographic query gated on shared interests, one gated
/// on social ties, and a weighted query asking for different values.
pub fn query_mix() -> Vec<MatchQuery> {
    use Dimension::*;
    let query = |requirements: Vec<(Dimension, Polarity)>, mode| MatchQuery {
        questioner: String::new(),
        requirements: requirements.into_iter().collect(),
        mode,
        k: DEFAULT_K,
        diversify_attribute: "gender".into(),
    };
    vec![
        query(
            vec![
                (DomainInterests, Polarity::Similar),
                (BeliefsValues, Polarity::Similar),
                (SocialCloseness, Polarity::Close),
                (PhysicalCloseness, Polarity::Close),
            ],
            MatchMode::Weighted {
                weights: BTreeMap::from([
                    (DomainInterests, 0.4),
                    (BeliefsValues, 0.2),
                    (SocialCloseness, 0.2),
                    (PhysicalCloseness, 0.2),
                ]),
            },
        ),
        query(
            vec![
                (DomainInterests, Polarity::Similar),
                (BeliefsValues, Polarity::Diverse),
                (PhysicalCloseness, Polarity::Close),
            ],
            MatchMode::Lexicographic {
                primary: [DomainInterests].into(),
                secondary: [BeliefsValues, PhysicalCloseness].into(),
                threshold: 0.6,
            },
        ),
        query(
            vec![
                (SocialCloseness, Polarity::Close),
                (DomainInterests, Polarity::Similar),
            ],
            MatchMode::Lexicographic {
                primary: [SocialCloseness].into(),
                secondary: [DomainInterests].into(),
                threshold: 0.5,
            },
        ),
        query(
            vec![
                (DomainInterests, Polarity::Similar),
                (BeliefsValues, Polarity::Diverse),
            ],
            MatchMode::Weighted {
                weights: BTreeMap::from([(DomainInterests, 1.0), (BeliefsValues, 1.0)]),
            },
        ),
    ]
}

/// `count` questions at t = 0, 1, 2, ... cycling through [`query_mix`], each
/// from a questioner drawn uniformly from `questioners` with a stream seeded
/// by `seed`.
pub fn synthetic_script(
    questioners: &[String],
    count: usize,
    seed: u64,
    answer_prob: f64,
) -> Vec<ScriptEvent> {
    if questioners.is_empty() {
        return Vec::new();
    }
    let mix = query_mix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| ScriptEvent {
            t: i as f64,
            step: ScriptStep::QuestionCreated {
                questioner: questioners[rng.gen_range(0..questioners.len())].clone(),
                text: format!("synthetic question {}", i + 1),
                query: mix[i % mix.len()].clone(),
                answer_prob,
            },
        })
        .collect()
}
