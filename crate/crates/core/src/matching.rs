//! Candidate scoring, ranking, shallow-attribute diversification and top-k
//! responder selection.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{closeness_row, dimension_similarity, Dimension, MetricError, MetricParams};
use crate::profile::{Community, Profile};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_THRESHOLD: f64 = 0.6;

#[derive(Debug, Error, PartialEq)]
pub enum MatchError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("questioner `{0}` is not a member of the community")]
    UnknownQuestioner(String),
    #[error("candidate `{0}` is not a member of the community")]
    UnknownCandidate(String),
    #[error("all weights are zero")]
    ZeroWeights,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Direction of a requirement on one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Similar,
    Diverse,
    Close,
    Distant,
}

impl Polarity {
    pub fn apply(self, similarity: f64) -> f64 {
        match self {
            Polarity::Similar | Polarity::Close => similarity,
            Polarity::Diverse | Polarity::Distant => 1.0 - similarity,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Similar => Polarity::Diverse,
            Polarity::Diverse => Polarity::Similar,
            Polarity::Close => Polarity::Distant,
            Polarity::Distant => Polarity::Close,
        }
    }

    fn fits(self, dim: Dimension) -> bool {
        dim.is_closeness() == matches!(self, Polarity::Close | Polarity::Distant)
    }
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    Weighted {
        weights: BTreeMap<Dimension, f64>,
    },
    Lexicographic {
        #[serde(default)]
        primary: BTreeSet<Dimension>,
        #[serde(default)]
        secondary: BTreeSet<Dimension>,
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_attribute() -> String {
    "gender".into()
}

/// A question's diversity requirements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchQuery {
    #[serde(default)]
    pub questioner: String,
    /// Dimensions absent from the map are unspecified and do not score.
    pub requirements: BTreeMap<Dimension, Polarity>,
    pub mode: MatchMode,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_attribute")]
    pub diversify_attribute: String,
}

impl MatchQuery {
    pub fn validate(&self) -> Result<(), MatchError> {
        let bad = |m: String| Err(MatchError::InvalidQuery(m));
        if self.questioner.is_empty() {
            return bad("questioner id is empty".into());
        }
        if self.k == 0 {
            return bad("k must be positive".into());
        }
        if self.requirements.is_empty() {
            return bad("at least one dimension must be specified".into());
        }
        for (dim, pol) in &self.requirements {
            if !pol.fits(*dim) {
                return bad(format!("polarity {pol:?} does not apply to {dim}"));
            }
        }
        match &self.mode {
            MatchMode::Weighted { weights } => {
                for (dim, w) in weights {
                    if !w.is_finite() || *w < 0.0 {
                        return bad(format!("weight for {dim} must be a non-negative number"));
                    }
                    if !self.requirements.contains_key(dim) {
                        return bad(format!("weight given for unspecified dimension {dim}"));
                    }
                }
                if !weights.values().any(|w| *w > 0.0) {
                    return Err(MatchError::ZeroWeights);
                }
            }
            MatchMode::Lexicographic {
                primary,
                secondary,
                threshold,
            } => {
                if !(0.0..=1.0).contains(threshold) {
                    return bad(format!("threshold {threshold} outside [0, 1]"));
                }
                if let Some(d) = primary.intersection(secondary).next() {
                    return bad(format!("{d} is both primary and secondary"));
                }
                if let Some(d) = primary
                    .iter()
                    .chain(secondary)
                    .find(|d| !self.requirements.contains_key(d))
                {
                    return bad(format!("tiered dimension {d} is not specified"));
                }
            }
        }
        Ok(())
    }
}

/// Scored candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchScore {
    pub candidate: String,
    pub scores: BTreeMap<Dimension, f64>,
    pub aggregate: f64,
    /// 1 when every primary dimension clears the threshold. Always 1 in
    /// weighted mode.
    pub tier: u8,
}

/// Best first: tier, then aggregate, then ascending id.
pub fn rank_order(a: &MatchScore, b: &MatchScore) -> Ordering {
    b.tier
        .cmp(&a.tier)
        .then_with(|| b.aggregate.total_cmp(&a.aggregate))
        .then_with(|| a.candidate.cmp(&b.candidate))
}

pub fn dimension_score(
    dim: Dimension,
    polarity: Polarity,
    questioner: &Profile,
    candidate: &Profile,
    community: &Community,
    params: &MetricParams,
) -> Result<f64, MatchError> {
    let s = dimension_similarity(dim, questioner, candidate, community, params)?;
    Ok(polarity.apply(s))
}

/// Weighted mean `sum(w * s) / sum(w)` over the scored dimensions; a
/// dimension without a weight counts as weight 0.
pub fn score_weighted(
    scores: &BTreeMap<Dimension, f64>,
    weights: &BTreeMap<Dimension, f64>,
) -> Result<f64, MatchError> {
    let (mut num, mut den) = (0.0, 0.0);
    for (dim, s) in scores {
        let w = weights.get(dim).copied().unwrap_or(0.0);
        num += w * s;
        den += w;
    }
    if den <= 0.0 {
        return Err(MatchError::ZeroWeights);
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// `(tier, aggregate)` where the tier gates on the primary dimensions and
/// the aggregate is the plain mean of every scored dimension.
pub fn score_lexicographic(
    scores: &BTreeMap<Dimension, f64>,
    primary: &BTreeSet<Dimension>,
    threshold: f64,
) -> (u8, f64) {
    let tier = primary
        .iter()
        .all(|d| scores.get(d).is_some_and(|s| *s >= threshold));
    let aggregate = if scores.is_empty() {
        0.0
    } else {
        (scores.values().sum::<f64>() / scores.len() as f64).clamp(0.0, 1.0)
    };
    (u8::from(tier), aggregate)
}

/// Scores candidates for one validated query. Social closeness is computed
/// once from the questioner.
pub struct Scorer<'a> {
    query: &'a MatchQuery,
    community: &'a Community,
    params: &'a MetricParams,
    questioner: &'a Profile,
    social_row: Option<Vec<f64>>,
}

impl<'a> Scorer<'a> {
    pub fn new(
        query: &'a MatchQuery,
        community: &'a Community,
        params: &'a MetricParams,
    ) -> Result<Self, MatchError> {
        query.validate()?;
        params.validate()?;
        let questioner = community
            .get(&query.questioner)
            .ok_or_else(|| MatchError::UnknownQuestioner(query.questioner.clone()))?;
        let social_row = if query.requirements.contains_key(&Dimension::SocialCloseness) {
            Some(closeness_row(
                params.closeness,
                community.graph(),
                &questioner.id,
            )?)
        } else {
            None
        };
        Ok(Self {
            query,
            community,
            params,
            questioner,
            social_row,
        })
    }

    pub fn score(&self, candidate: &Profile) -> Result<MatchScore, MatchError> {
        let mut scores = BTreeMap::new();
        for (&dim, &polarity) in &self.query.requirements {
            let s = match (&self.social_row, dim) {
                (Some(row), Dimension::SocialCloseness) => {
                    let idx = self
                        .community
                        .graph()
                        .index_of(&candidate.id)
                        .ok_or_else(|| MatchError::UnknownCandidate(candidate.id.clone()))?;
                    polarity.apply(row[idx])
                }
                _ => dimension_score(
                    dim,
                    polarity,
                    self.questioner,
                    candidate,
                    self.community,
                    self.params,
                )?,
            };
            scores.insert(dim, s);
        }
        let (tier, aggregate) = match &self.query.mode {
            MatchMode::Weighted { weights } => (1, score_weighted(&scores, weights)?),
            MatchMode::Lexicographic {
                primary, threshold, ..
            } => score_lexicographic(&scores, primary, *threshold),
        };
        Ok(MatchScore {
            candidate: candidate.id.clone(),
            scores,
            aggregate,
            tier,
        })
    }
}

/// Scores one member against a query.
pub fn score_candidate(
    query: &MatchQuery,
    community: &Community,
    candidate: &str,
    params: &MetricParams,
) -> Result<MatchScore, MatchError> {
    let profile = community
        .get(candidate)
        .ok_or_else(|| MatchError::UnknownCandidate(candidate.into()))?;
    Scorer::new(query, community, params)?.score(profile)
}

/// Every member except the questioner, best first.
pub fn rank_candidates(
    query: &MatchQuery,
    community: &Community,
    params: &MetricParams,
) -> Result<Vec<MatchScore>, MatchError> {
    let scorer = Scorer::new(query, community, params)?;
    let mut ranked = community
        .members()
        .filter(|p| p.id != query.questioner)
        .map(|p| scorer.score(p))
        .collect::<Result<Vec<_>, _>>()?;
    ranked.sort_by(rank_order);
    Ok(ranked)
}

/// Round-robin over shallow-attribute groups.
///
/// Groups are visited in the order of their best-ranked member; each cycle
/// takes the best remaining member of every non-empty group until `k` are
/// chosen. The result is returned in rank order. Members whose attribute is
/// missing form one group keyed by the empty string.
pub fn diversify_shortlist(
    ranked: &[MatchScore],
    community: &Community,
    k: usize,
    attribute: &str,
) -> Vec<MatchScore> {
    if k >= ranked.len() {
        return ranked.to_vec();
    }
    let mut groups: Vec<(&str, VecDeque<usize>)> = Vec::new();
    for (i, score) in ranked.iter().enumerate() {
        let key = community
            .get(&score.candidate)
            .and_then(|p| p.shallow(attribute))
            .unwrap_or("");
        match groups.iter_mut().find(|(g, _)| *g == key) {
            Some((_, members)) => members.push_back(i),
            None => groups.push((key, VecDeque::from([i]))),
        }
    }
    let mut chosen = Vec::with_capacity(k);
    'cycle: loop {
        for (_, members) in groups.iter_mut() {
            if let Some(i) = members.pop_front() {
                chosen.push(i);
                if chosen.len() == k {
                    break 'cycle;
                }
            }
        }
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|i| ranked[i].clone()).collect()
}

/// Full ranking plus the diversified selection drawn from it.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    pub ranked: Vec<MatchScore>,
    pub selected: Vec<MatchScore>,
}

impl MatchOutcome {
    pub fn selected_ids(&self) -> Vec<String> {
        self.selected.iter().map(|s| s.candidate.clone()).collect()
    }

    /// CSV with one row per ranked candidate: id, the four dimension
    /// columns (blank when unspecified), aggregate, tier, selected flag.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["candidate_id"];
        header.extend(Dimension::ALL.iter().map(|d| d.as_str()));
        header.extend(["aggregate", "tier", "selected"]);
        w.write_record(&header)?;
        for score in &self.ranked {
            let selected = self.selected.iter().any(|s| s.candidate == score.candidate);
            let mut row = vec![score.candidate.clone()];
            row.extend(
                Dimension::ALL
                    .iter()
                    .map(|d| score.scores.get(d).map(f64::to_string).unwrap_or_default()),
            );
            row.push(score.aggregate.to_string());
            row.push(score.tier.to_string());
            row.push(selected.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn run_match(
    query: &MatchQuery,
    community: &Community,
    params: &MetricParams,
) -> Result<MatchOutcome, MatchError> {
    let ranked = rank_candidates(query, community, params)?;
    let selected = diversify_shortlist(&ranked, community, query.k, &query.diversify_attribute);
    Ok(MatchOutcome { ranked, selected })
}

/// Ids of the `min(k, |community| - 1)` members a question goes to.
pub fn select_responders(
    query: &MatchQuery,
    community: &Community,
    params: &MetricParams,
) -> Result<Vec<String>, MatchError> {
    run_match(query, community, params).map(|o| o.selected_ids())
}
