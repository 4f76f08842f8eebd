//! Community members, their feature vectors and the social graph that links them.
//!
//! A [`Community`] is immutable once built. Every constructor validates the
//! full set of invariants (vector dimensions, value ranges, gender labels,
//! unique ids, edge endpoints), so any `Community` value in hand is known to be
//! well formed. Members and edges are kept in id order, which makes the JSON
//! form canonical.

mod generate;
mod io;

pub use generate::{generate_synthetic, BoundingBox, GeneratorConfig};
pub use io::{load_community, parse_community, save_community, to_json};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate member id `{0}`")]
    DuplicateId(String),
    #[error("edge ({0}, {1}) references unknown member `{2}`")]
    UnknownEdgeEndpoint(String, String, String),
    #[error("self-loop on member `{0}`")]
    SelfLoop(String),
    #[error("member `{id}`: {message}")]
    InvalidMember { id: String, message: String },
    #[error("invalid community: {0}")]
    InvalidCommunity(String),
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("unknown member `{0}`")]
    UnknownMember(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Geographic position in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub lat: f64,
    pub lon: f64,
}

impl Location {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    /// Latitude in [-90, 90], longitude in (-180, 180].
    pub fn is_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat) && self.lon > -180.0 && self.lon <= 180.0
    }
}

/// One community member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub id: String,
    /// Domain-interest vector, entries in [0, 1].
    pub interests: Vec<f64>,
    /// Beliefs-and-values vector, entries in [0, 1].
    pub values: Vec<f64>,
    pub location: Location,
    pub gender: String,
    /// Further shallow attributes such as nationality.
    #[serde(default)]
    pub extra_shallow: BTreeMap<String, String>,
}

impl Profile {
    /// Looks up a shallow attribute. `gender` is served from the dedicated
    /// field, anything else from `extra_shallow`.
    pub fn shallow(&self, attribute: &str) -> Option<&str> {
        if attribute == "gender" {
            Some(self.gender.as_str())
        } else {
            self.extra_shallow.get(attribute).map(String::as_str)
        }
    }
}

/// Undirected, unweighted graph over member ids.
///
/// Nodes are indexed by the position of the member id in sorted order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SocialGraph {
    ids: Vec<String>,
    index: BTreeMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl SocialGraph {
    fn build(
        ids: Vec<String>,
        raw_edges: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ProfileError> {
        let index: BTreeMap<String, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        let mut edge_set = BTreeSet::new();
        for (a, b) in raw_edges {
            let ia = *index.get(&a).ok_or_else(|| {
                ProfileError::UnknownEdgeEndpoint(a.clone(), b.clone(), a.clone())
            })?;
            let ib = *index.get(&b).ok_or_else(|| {
                ProfileError::UnknownEdgeEndpoint(a.clone(), b.clone(), b.clone())
            })?;
            if ia == ib {
                return Err(ProfileError::SelfLoop(a));
            }
            edge_set.insert((ia.min(ib), ia.max(ib)));
        }
        let mut adjacency = vec![Vec::new(); ids.len()];
        for &(a, b) in &edge_set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            ids,
            index,
            adjacency,
            edges: edge_set.into_iter().collect(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id_at(&self, index: usize) -> &str {
        &self.ids[index]
    }

    /// Edges as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(a, b)| (self.ids[a].as_str(), self.ids[b].as_str()))
    }

    pub fn neighbors(&self, id: &str) -> Option<impl Iterator<Item = &str> + '_> {
        let i = self.index_of(id)?;
        Some(self.adjacency[i].iter().map(|&j| self.ids[j].as_str()))
    }

    pub fn are_adjacent(&self, a: &str, b: &str) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(ia), Some(ib)) => self.adjacency[ia].binary_search(&ib).is_ok(),
            _ => false,
        }
    }

    /// Breadth-first hop counts from `source` to every node, indexed like the
    /// sorted member ids. `None` marks unreachable nodes.
    pub fn hop_distances(&self, source: &str) -> Option<Vec<Option<u32>>> {
        let start = self.index_of(source)?;
        let mut dist = vec![None; self.ids.len()];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        Some(dist)
    }

    /// Shortest-path length between two members, `None` when disconnected.
    pub fn shortest_path_len(&self, a: &str, b: &str) -> Option<Option<u32>> {
        let target = self.index_of(b)?;
        self.hop_distances(a).map(|d| d[target])
    }
}

/// A set of members plus their social graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Community {
    id: String,
    interest_dim: usize,
    values_dim: usize,
    gender_labels: BTreeSet<String>,
    members: BTreeMap<String, Profile>,
    graph: SocialGraph,
}

impl Community {
    pub fn new(
        id: impl Into<String>,
        interest_dim: usize,
        values_dim: usize,
        gender_labels: impl IntoIterator<Item = String>,
        members: impl IntoIterator<Item = Profile>,
        edges: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ProfileError> {
        if interest_dim == 0 || values_dim == 0 {
            return Err(ProfileError::InvalidCommunity(
                "interest_dim and values_dim must be positive".into(),
            ));
        }
        let gender_labels: BTreeSet<String> = gender_labels.into_iter().collect();
        let mut by_id = BTreeMap::new();
        for profile in members {
            validate_profile(&profile, interest_dim, values_dim, &gender_labels)?;
            if by_id.contains_key(&profile.id) {
                return Err(ProfileError::DuplicateId(profile.id));
            }
            by_id.insert(profile.id.clone(), profile);
        }
        let graph = SocialGraph::build(by_id.keys().cloned().collect(), edges)?;
        Ok(Self {
            id: id.into(),
            interest_dim,
            values_dim,
            gender_labels,
            members: by_id,
            graph,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn interest_dim(&self) -> usize {
        self.interest_dim
    }

    pub fn values_dim(&self) -> usize {
        self.values_dim
    }

    pub fn gender_labels(&self) -> &BTreeSet<String> {
        &self.gender_labels
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Profile> {
        self.members.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.members.contains_key(id)
    }

    /// Members in ascending id order.
    pub fn members(&self) -> impl ExactSizeIterator<Item = &Profile> + '_ {
        self.members.values()
    }

    pub fn graph(&self) -> &SocialGraph {
        &self.graph
    }

    /// Returns a copy of this community with one member replaced.
    pub fn with_member(&self, profile: Profile) -> Result<Self, ProfileError> {
        if !self.members.contains_key(&profile.id) {
            return Err(ProfileError::UnknownMember(profile.id));
        }
        validate_profile(
            &profile,
            self.interest_dim,
            self.values_dim,
            &self.gender_labels,
        )?;
        let mut next = self.clone();
        next.members.insert(profile.id.clone(), profile);
        Ok(next)
    }
}

fn validate_profile(
    p: &Profile,
    interest_dim: usize,
    values_dim: usize,
    gender_labels: &BTreeSet<String>,
) -> Result<(), ProfileError> {
    let fail = |message: String| ProfileError::InvalidMember {
        id: p.id.clone(),
        message,
    };
    if p.id.is_empty() {
        return Err(fail("empty id".into()));
    }
    if p.interests.len() != interest_dim {
        return Err(fail(format!(
            "interests has length {}, expected {interest_dim}",
            p.interests.len()
        )));
    }
    if p.values.len() != values_dim {
        return Err(fail(format!(
            "values has length {}, expected {values_dim}",
            p.values.len()
        )));
    }
    let in_unit = |x: &f64| (0.0..=1.0).contains(x);
    if !p.interests.iter().all(in_unit) || !p.values.iter().all(in_unit) {
        return Err(fail("feature entries must lie in [0, 1]".into()));
    }
    if !p.location.is_valid() {
        return Err(fail(format!(
            "location ({}, {}) out of range",
            p.location.lat, p.location.lon
        )));
    }
    if !gender_labels.contains(&p.gender) {
        return Err(fail(format!(
            "gender `{}` is not a declared label",
            p.gender
        )));
    }
    Ok(())
}
