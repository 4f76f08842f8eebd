use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Community, Profile, ProfileError};

#[derive(Serialize, Deserialize)]
struct CommunityFile {
    id: String,
    interest_dim: usize,
    values_dim: usize,
    gender_labels: Vec<String>,
    members: Vec<Profile>,
    edges: Vec<(String, String)>,
}

pub fn parse_community(text: &str) -> Result<Community, ProfileError> {
    let file: CommunityFile = serde_json::from_str(text).map_err(|e| ProfileError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Community::new(
        file.id,
        file.interest_dim,
        file.values_dim,
        file.gender_labels,
        file.members,
        file.edges,
    )
}

pub fn load_community(path: impl AsRef<Path>) -> Result<Community, ProfileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ProfileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_community(&text)
}

/// Canonical JSON: members sorted by id, edges as `[a, b]` with `a < b`.
pub fn to_json(c: &Community) -> String {
    let file = CommunityFile {
        id: c.id.clone(),
        interest_dim: c.interest_dim,
        values_dim: c.values_dim,
        gender_labels: c.gender_labels.iter().cloned().collect(),
        members: c.members().cloned().collect(),
        edges: c
            .graph()
            .edges()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("community serializes");
    out.push('\n');
    out
}

pub fn save_community(c: &Community, path: impl AsRef<Path>) -> Result<(), ProfileError> {
    let path = path.as_ref();
    fs::write(path, to_json(c)).map_err(|source| ProfileError::Io {
        path: path.display().to_string(),
        source,
    })
}
