//! Seeded synthetic populations.
//!
//! Each member draws its features from its own ChaCha stream (stream `i + 1`
//! for member `i`), and social ties are decided by member `i` for every
//! lower-indexed member. Growing `size` under a fixed seed therefore keeps the
//! features and ties of the existing members; only the gender assignment is
//! recomputed to hit the configured mix exactly.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Community, Location, Profile, ProfileError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    pub fn contains(&self, loc: &Location) -> bool {
        (self.min_lat..=self.max_lat).contains(&loc.lat)
            && (self.min_lon..=self.max_lon).contains(&loc.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    #[serde(default = "default_id")]
    pub id: String,
    pub size: usize,
    pub interest_dim: usize,
    pub values_dim: usize,
    pub gender_mix: BTreeMap<String, f64>,
    pub edge_probability: f64,
    pub location_region: BoundingBox,
}

fn default_id() -> String {
    "synthetic".into()
}

impl GeneratorConfig {
    /// A university-town sized population: 8 interest and 5 value dimensions,
    /// an even two-label gender mix, sparse ties, members spread over roughly
    /// 45 km x 30 km.
    pub fn pilot(size: usize) -> Self {
        Self {
            id: format!("pilot-{size}"),
            size,
            interest_dim: 8,
            values_dim: 5,
            gender_mix: BTreeMap::from([("female".into(), 0.5), ("male".into(), 0.5)]),
            edge_probability: 0.04,
            location_region: BoundingBox {
                min_lat: 56.90,
                max_lat: 57.30,
                min_lon: 9.60,
                max_lon: 10.10,
            },
        }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let bad = |m: &str| Err(ProfileError::InvalidConfig(m.into()));
        if self.size == 0 {
            return bad("size must be positive");
        }
        if self.interest_dim == 0 || self.values_dim == 0 {
            return bad("feature dimensions must be positive");
        }
        if self.gender_mix.is_empty() {
            return bad("gender_mix must declare at least one label");
        }
        if self.gender_mix.values().any(|p| !p.is_finite() || *p < 0.0) {
            return bad("gender proportions must be non-negative");
        }
        let total: f64 = self.gender_mix.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad("gender proportions must sum to 1");
        }
        if !(0.0..=1.0).contains(&self.edge_probability) {
            return bad("edge_probability must lie in [0, 1]");
        }
        let r = &self.location_region;
        let ordered = r.min_lat <= r.max_lat && r.min_lon <= r.max_lon;
        let in_range =
            r.min_lat >= -90.0 && r.max_lat <= 90.0 && r.min_lon > -180.0 && r.max_lon <= 180.0;
        if !ordered || !in_range {
            return bad("location_region must be a well-ordered box inside valid coordinates");
        }
        Ok(())
    }
}

/// Label counts by largest-remainder rounding; ties go to the label that
/// sorts first.
pub(crate) fn largest_remainder(size: usize, mix: &BTreeMap<String, f64>) -> Vec<(String, usize)> {
    let mut counts: Vec<(String, usize, f64)> = mix
        .iter()
        .map(|(label, p)| {
            let quota = size as f64 * p;
            let floor = quota.floor();
            (label.clone(), floor as usize, quota - floor)
        })
        .collect();
    let assigned: usize = counts.iter().map(|c| c.1).sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].2.total_cmp(&counts[a].2).then(a.cmp(&b)));
    for &i in order.iter().take(size.saturating_sub(assigned)) {
        counts[i].1 += 1;
    }
    counts.into_iter().map(|(l, n, _)| (l, n)).collect()
}

pub fn generate_synthetic(cfg: &GeneratorConfig, seed: u64) -> Result<Community, ProfileError> {
    cfg.validate()?;
    let width = cfg.size.to_string().len().max(3);
    let region = cfg.location_region;

    let mut drafts = Vec::with_capacity(cfg.size);
    let mut edges = Vec::new();
    for i in 0..cfg.size {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let id = format!("u{i:0width$}");
        let interests: Vec<f64> = (0..cfg.interest_dim).map(|_| rng.gen::<f64>()).collect();
        let values: Vec<f64> = (0..cfg.values_dim).map(|_| rng.gen::<f64>()).collect();
        let lat = region.min_lat + rng.gen::<f64>() * (region.max_lat - region.min_lat);
        let lon = region.min_lon + rng.gen::<f64>() * (region.max_lon - region.min_lon);
        let gender_key: u64 = rng.gen();
        for j in 0..i {
            if rng.gen::<f64>() < cfg.edge_probability {
                edges.push((format!("u{j:0width$}"), id.clone()));
            }
        }
        drafts.push((gender_key, id, interests, values, Location::new(lat, lon)));
    }

    let mut by_key: Vec<usize> = (0..drafts.len()).collect();
    by_key.sort_by_key(|&i| (drafts[i].0, i));
    let mut genders = vec![String::new(); drafts.len()];
    let mut cursor = by_key.into_iter();
    for (label, count) in largest_remainder(cfg.size, &cfg.gender_mix) {
        for i in cursor.by_ref().take(count) {
            genders[i] = label.clone();
        }
    }

    let members =
        drafts
            .into_iter()
            .zip(genders)
            .map(|((_, id, interests, values, location), gender)| Profile {
                id,
                interests,
                values,
                location,
                gender,
                extra_shallow: BTreeMap::new(),
            });
    Community::new(
        cfg.id.clone(),
        cfg.interest_dim,
        cfg.values_dim,
        cfg.gender_mix.keys().cloned(),
        members,
        edges,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::to_json;
    use std::collections::HashSet;

    #[test]
    fn aau_sized_population_is_reproducible() {
        let cfg = GeneratorConfig::pilot(51);
        let a = generate_synthetic(&cfg, 42).unwrap();
        let b = generate_synthetic(&cfg, 42).unwrap();
        assert_eq!(a.len(), 51);
        assert_eq!(to_json(&a), to_json(&b));
    }

    #[test]
    fn zero_size_rejected() {
        let cfg = GeneratorConfig::pilot(0);
        assert!(matches!(
            generate_synthetic(&cfg, 1),
            Err(ProfileError::InvalidConfig(_))
        ));
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = GeneratorConfig::pilot(10);
        cfg.gender_mix.insert("female".into(), 0.6);
        assert!(cfg.validate().is_err());
        let mut cfg = GeneratorConfig::pilot(10);
        cfg.location_region.min_lat = 80.0;
        cfg.location_region.max_lat = 70.0;
        assert!(cfg.validate().is_err());
        let mut cfg = GeneratorConfig::pilot(10);
        cfg.edge_probability = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn distinct_seeds_never_collide() {
        let cfg = GeneratorConfig::pilot(51);
        let outputs: HashSet<String> = (0..100)
            .map(|s| to_json(&generate_synthetic(&cfg, s).unwrap()))
            .collect();
        assert_eq!(outputs.len(), 100);
    }

    #[test]
    fn largest_remainder_matches_quotas() {
        let mix = BTreeMap::from([
            ("a".to_string(), 1.0 / 3.0),
            ("b".to_string(), 1.0 / 3.0),
            ("c".to_string(), 1.0 / 3.0),
        ]);
        let counts = largest_remainder(10, &mix);
        assert_eq!(counts.iter().map(|c| c.1).sum::<usize>(), 10);
        assert_eq!(counts[0], ("a".to_string(), 4));
        for (_, n) in counts {
            assert!((n as f64 - 10.0 / 3.0).abs() < 1.0);
        }
    }

    #[test]
    fn existing_members_keep_features_when_size_grows() {
        let small = generate_synthetic(&GeneratorConfig::pilot(105), 9).unwrap();
        let large = generate_synthetic(&GeneratorConfig::pilot(115), 9).unwrap();
        for p in small.members() {
            let q = large.get(&p.id).unwrap();
            assert_eq!(p.interests, q.interests);
            assert_eq!(p.location, q.location);
        }
        for (a, b) in small.graph().edges() {
            assert!(large.graph().are_adjacent(a, b));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn generated_members_respect_config(
                size in 1usize..80,
                seed in any::<u64>(),
                female in 0.0f64..=1.0,
                p in 0.0f64..=1.0,
            ) {
                let mut cfg = GeneratorConfig::pilot(size);
                cfg.gender_mix = BTreeMap::from([
                    ("female".into(), female),
                    ("male".into(), 1.0 - female),
                ]);
                cfg.edge_probability = p;
                let c = generate_synthetic(&cfg, seed).unwrap();
                prop_assert_eq!(c.len(), size);
                for m in c.members() {
                    prop_assert!(m.interests.iter().chain(&m.values).all(|x| (0.0..=1.0).contains(x)));
                    prop_assert!(cfg.location_region.contains(&m.location));
                }
                for (label, share) in &cfg.gender_mix {
                    let n = c.members().filter(|m| &m.gender == label).count();
                    prop_assert!((n as f64 - size as f64 * share).abs() < 1.0);
                }
            }
        }
    }
}
