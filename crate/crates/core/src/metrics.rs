//! Per-dimension similarity between a questioner and a candidate.
//!
//! Every metric returns a value in [0, 1] where 1 means "same" (identical
//! features, same person, same place).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::{Community, Location, Profile, SocialGraph};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("unknown member `{0}`")]
    UnknownMember(String),
    #[error("decay length must be positive, got {0}")]
    InvalidDecay(f64),
}

/// The four deep-feature axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    DomainInterests,
    BeliefsValues,
    SocialCloseness,
    PhysicalCloseness,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::DomainInterests,
        Dimension::BeliefsValues,
        Dimension::SocialCloseness,
        Dimension::PhysicalCloseness,
    ];

    /// Closeness axes take Close/Distant polarities, feature axes
    /// Similar/Diverse.
    pub fn is_closeness(self) -> bool {
        matches!(
            self,
            Dimension::SocialCloseness | Dimension::PhysicalCloseness
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::DomainInterests => "domain_interests",
            Dimension::BeliefsValues => "beliefs_values",
            Dimension::SocialCloseness => "social_closeness",
            Dimension::PhysicalCloseness => "physical_closeness",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How social ties turn into a closeness score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosenessModel {
    /// `1 / (1 + hops)`, 0 when unreachable.
    #[default]
    InverseShortestPath,
    /// 1 for self or a direct tie, otherwise 0.
    DirectTie,
}

impl ClosenessModel {
    fn score_hops(self, hops: Option<u32>) -> f64 {
        match (self, hops) {
            (_, None) => 0.0,
            (ClosenessModel::InverseShortestPath, Some(h)) => 1.0 / (1.0 + h as f64),
            (ClosenessModel::DirectTie, Some(h)) => {
                if h <= 1 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricParams {
    pub decay_length_km: f64,
    pub closeness: ClosenessModel,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            decay_length_km: 50.0,
            closeness: ClosenessModel::default(),
        }
    }
}

impl MetricParams {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.decay_length_km > 0.0 && self.decay_length_km.is_finite() {
            Ok(())
        } else {
            Err(MetricError::InvalidDecay(self.decay_length_km))
        }
    }
}

/// Cosine similarity of two non-negative vectors.
///
/// Two all-zero vectors compare as 1, a single all-zero vector as 0.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, MetricError> {
    if u.len() != v.len() {
        return Err(MetricError::DimensionMismatch(u.len(), v.len()));
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    Ok(match (nu == 0.0, nv == 0.0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => (dot / (nu.sqrt() * nv.sqrt())).clamp(0.0, 1.0),
    })
}

/// `1 / (1 + shortest path length)`, 0 when the pair is disconnected.
pub fn social_closeness(graph: &SocialGraph, a: &str, b: &str) -> Result<f64, MetricError> {
    closeness_with(ClosenessModel::InverseShortestPath, graph, a, b)
}

pub fn closeness_with(
    model: ClosenessModel,
    graph: &SocialGraph,
    a: &str,
    b: &str,
) -> Result<f64, MetricError> {
    if !graph.contains(b) {
        return Err(MetricError::UnknownMember(b.into()));
    }
    let hops = graph
        .shortest_path_len(a, b)
        .ok_or_else(|| MetricError::UnknownMember(a.into()))?;
    Ok(model.score_hops(hops))
}

/// Closeness from `source` to every member, indexed like the graph nodes.
/// One BFS instead of one per pair.
pub fn closeness_row(
    model: ClosenessModel,
    graph: &SocialGraph,
    source: &str,
) -> Result<Vec<f64>, MetricError> {
    let hops = graph
        .hop_distances(source)
        .ok_or_else(|| MetricError::UnknownMember(source.into()))?;
    Ok(hops.into_iter().map(|h| model.score_hops(h)).collect())
}

/// Great-circle distance in kilometres.
pub fn haversine_km(p: &Location, q: &Location) -> f64 {
    let (phi1, phi2) = (p.lat.to_radians(), q.lat.to_radians());
    let dphi = (q.lat - p.lat).to_radians();
    let dlambda = (q.lon - p.lon).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    let a = a.clamp(0.0, 1.0);
    2.0 * EARTH_RADIUS_KM * a.sqrt().atan2((1.0 - a).sqrt())
}

/// `exp(-distance / decay_length_km)`.
pub fn physical_proximity(p: &Location, q: &Location, params: &MetricParams) -> f64 {
    (-haversine_km(p, q) / params.decay_length_km).exp()
}

pub fn dimension_similarity(
    dim: Dimension,
    questioner: &Profile,
    candidate: &Profile,
    community: &Community,
    params: &MetricParams,
) -> Result<f64, MetricError> {
    match dim {
        Dimension::DomainInterests => {
            cosine_similarity(&questioner.interests, &candidate.interests)
        }
        Dimension::BeliefsValues => cosine_similarity(&questioner.values, &candidate.values),
        Dimension::SocialCloseness => closeness_with(
            params.closeness,
            community.graph(),
            &questioner.id,
            &candidate.id,
        ),
        Dimension::PhysicalCloseness => Ok(physical_proximity(
            &questioner.location,
            &candidate.location,
            params,
        )),
    }
}
