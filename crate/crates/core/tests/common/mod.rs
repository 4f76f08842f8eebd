//! Independent reference implementations and random instance builders
//! shared by the integration tests and the acceptance harness.
//!
//! Nothing here calls into the library's scoring code: distances come from
//! Floyd-Warshall, great-circle distance from the arcsine haversine form,
//! and the round-robin selection is computed in closed form from
//! (position within group, group order).

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use normroute::matching::{MatchMode, MatchQuery, Polarity};
use normroute::metrics::Dimension;
use normroute::profile::{Community, Location, Profile};
use rand::seq::SliceRandom;
use rand::Rng;

pub const R_EARTH: f64 = 6371.0;

pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nu == 0.0 && nv == 0.0 {
        1.0
    } else if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        (dot / (nu * nv)).clamp(0.0, 1.0)
    }
}

pub fn haversine(p: &Location, q: &Location) -> f64 {
    let (f1, f2) = (p.lat.to_radians(), q.lat.to_radians());
    let h = ((f2 - f1) / 2.0).sin().powi(2)
        + f1.cos() * f2.cos() * ((q.lon - p.lon).to_radians() / 2.0).sin().powi(2);
    2.0 * R_EARTH * h.min(1.0).sqrt().asin()
}

/// All-pairs hop counts over the members in id order; `None` = unreachable.
pub fn floyd_warshall(c: &Community) -> (Vec<String>, Vec<Vec<Option<u32>>>) {
    let ids: Vec<String> = c.members().map(|p| p.id.clone()).collect();
    let n = ids.len();
    let at = |id: &str| ids.iter().position(|x| x == id).unwrap();
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for (a, b) in c.graph().edges() {
        let (i, j) = (at(a), at(b));
        d[i][j] = Some(1);
        d[j][i] = Some(1);
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][m], d[m][j]) {
                    if d[i][j].is_none_or(|cur| x + y < cur) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    (ids, d)
}

#[derive(Debug, Clone)]
pub struct OracleScore {
    pub id: String,
    pub scores: BTreeMap<Dimension, f64>,
    pub tier: u8,
    pub aggregate: f64,
}

/// Scores every non-questioner member and sorts by (tier desc, aggregate
/// desc, id asc).
pub fn oracle_rank(q: &MatchQuery, c: &Community, decay_km: f64) -> Vec<OracleScore> {
    let (ids, hops) = floyd_warshall(c);
    let qi = ids.iter().position(|x| *x == q.questioner).unwrap();
    let me = c.get(&q.questioner).unwrap();
    let mut out: Vec<OracleScore> = Vec::new();
    for (ci, id) in ids.iter().enumerate() {
        if ci == qi {
            continue;
        }
        let other = c.get(id).unwrap();
        let mut scores = BTreeMap::new();
        for (&dim, &pol) in &q.requirements {
            let s = match dim {
                Dimension::DomainInterests => cosine(&me.interests, &other.interests),
                Dimension::BeliefsValues => cosine(&me.values, &other.values),
                Dimension::SocialCloseness => match hops[qi][ci] {
                    Some(h) => 1.0 / (1.0 + f64::from(h)),
                    None => 0.0,
                },
                Dimension::PhysicalCloseness => {
                    (-haversine(&me.location, &other.location) / decay_km).exp()
                }
            };
            let s = match pol {
                Polarity::Similar | Polarity::Close => s,
                Polarity::Diverse | Polarity::Distant => 1.0 - s,
            };
            scores.insert(dim, s);
        }
        let (tier, aggregate) = match &q.mode {
            MatchMode::Weighted { weights } => {
                let mut num = 0.0;
                let mut den = 0.0;
                for (d, s) in &scores {
                    let w = weights.get(d).copied().unwrap_or(0.0);
                    num += w * s;
                    den += w;
                }
                (1, num / den)
            }
            MatchMode::Lexicographic {
                primary, threshold, ..
            } => {
                let ok = primary.iter().all(|d| scores[d] >= *threshold);
                let mean = scores.values().sum::<f64>() / scores.len() as f64;
                (u8::from(ok), mean)
            }
        };
        out.push(OracleScore {
            id: id.clone(),
            scores,
            tier,
            aggregate,
        });
    }
    out.sort_by(|a, b| {
        b.tier
            .cmp(&a.tier)
            .then(b.aggregate.partial_cmp(&a.aggregate).unwrap())
            .then(a.id.cmp(&b.id))
    });
    out
}

/// Round-robin without simulating the cycles: a member at position `r`
/// within its group, whose group is `g`-th by best member, is picked in
/// cycle `r` at slot `g`. Taking the `k` smallest `(r, g)` is exactly the
/// round-robin prefix. Returned in rank order.
pub fn oracle_round_robin(ranked: &[String], group_of: &[String], k: usize) -> Vec<String> {
    let mut group_order: Vec<&String> = Vec::new();
    for g in group_of {
        if !group_order.contains(&g) {
            group_order.push(g);
        }
    }
    let mut keyed: Vec<((usize, usize), usize)> = (0..ranked.len())
        .map(|i| {
            let within = group_of[..i].iter().filter(|g| **g == group_of[i]).count();
            let g = group_order.iter().position(|x| **x == group_of[i]).unwrap();
            ((within, g), i)
        })
        .collect();
    keyed.sort();
    let mut picked: Vec<usize> = keyed.into_iter().take(k).map(|(_, i)| i).collect();
    picked.sort();
    picked.into_iter().map(|i| ranked[i].clone()).collect()
}

pub fn oracle_select(q: &MatchQuery, c: &Community, decay_km: f64) -> Vec<String> {
    let ranked = oracle_rank(q, c, decay_km);
    let ids: Vec<String> = ranked.iter().map(|s| s.id.clone()).collect();
    let groups: Vec<String> = ranked
        .iter()
        .map(|s| {
            c.get(&s.id)
                .unwrap()
                .shallow(&q.diversify_attribute)
                .unwrap_or("")
                .to_string()
        })
        .collect();
    oracle_round_robin(&ids, &groups, q.k)
}

fn unit_vec<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    if rng.gen_bool(0.05) {
        return vec![0.0; dim];
    }
    (0..dim).map(|_| rng.gen::<f64>()).collect()
}

/// A random community of `n` members with ids `m0..`, two or three gender
/// labels, random ties and locations within a few hundred km.
pub fn random_community<R: Rng>(rng: &mut R, n: usize) -> Community {
    let labels: Vec<String> = ["f", "m", "x"][..rng.gen_range(2..=3)]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let members: Vec<Profile> = (0..n)
        .map(|i| Profile {
            id: format!("m{i}"),
            interests: unit_vec(rng, 4),
            values: unit_vec(rng, 3),
            location: Location::new(rng.gen_range(55.0..58.0), rng.gen_range(8.0..12.0)),
            gender: labels.choose(rng).unwrap().clone(),
            extra_shallow: BTreeMap::new(),
        })
        .collect();
    let p_edge = rng.gen_range(0.0..0.6);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(p_edge) {
                edges.push((format!("m{i}"), format!("m{j}")));
            }
        }
    }
    Community::new("rand", 4, 3, labels, members, edges).unwrap()
}

fn polarity_for<R: Rng>(rng: &mut R, dim: Dimension) -> Polarity {
    match (dim.is_closeness(), rng.gen_bool(0.5)) {
        (false, true) => Polarity::Similar,
        (false, false) => Polarity::Diverse,
        (true, true) => Polarity::Close,
        (true, false) => Polarity::Distant,
    }
}

/// A valid random query from `questioner` with `k` in `1..=k_max`.
pub fn random_query<R: Rng>(rng: &mut R, questioner: &str, k_max: usize) -> MatchQuery {
    let mut dims: Vec<Dimension> = Dimension::ALL.to_vec();
    dims.shuffle(rng);
    dims.truncate(rng.gen_range(1..=4));
    let requirements: BTreeMap<Dimension, Polarity> =
        dims.iter().map(|&d| (d, polarity_for(rng, d))).collect();
    let mode = if rng.gen_bool(0.5) {
        let mut weights: BTreeMap<Dimension, f64> = dims
            .iter()
            .map(|&d| {
                (
                    d,
                    if rng.gen_bool(0.2) {
                        0.0
                    } else {
                        rng.gen_range(0.1..3.0)
                    },
                )
            })
            .collect();
        if weights.values().all(|w| *w == 0.0) {
            weights.insert(dims[0], 1.0);
        }
        MatchMode::Weighted { weights }
    } else {
        let mut primary = BTreeSet::new();
        let mut secondary = BTreeSet::new();
        for &d in &dims {
            match rng.gen_range(0..3) {
                0 => {
                    primary.insert(d);
                }
                1 => {
                    secondary.insert(d);
                }
                _ => {}
            }
        }
        MatchMode::Lexicographic {
            primary,
            secondary,
            threshold: rng.gen_range(0.0..=1.0),
        }
    };
    MatchQuery {
        questioner: questioner.to_string(),
        requirements,
        mode,
        k: rng.gen_range(1..=k_max),
        diversify_attribute: "gender".into(),
    }
}

/// How many of `selected` have gender `a`, and how many do not.
pub fn gender_split(selected: &[String], c: &Community, a: &str) -> (usize, usize) {
    let na = selected
        .iter()
        .filter(|id| c.get(id).unwrap().gender == a)
        .count();
    (na, selected.len() - na)
}

const FUZZ_TOKENS: &[&str] = &[
    "norm",
    "whenever",
    "then",
    "priority",
    "and",
    "or",
    "not",
    "true",
    "false",
    "(",
    ")",
    ",",
    ";",
    ".",
    "==",
    "!=",
    ">=",
    "<=",
    ">",
    "<",
    "=",
    "!",
    "-",
    "-3",
    "0.6",
    "12",
    "\"x\"",
    "\"",
    "\\",
    "event",
    "type",
    "question",
    "id",
    "select_responders",
    "notify",
    "#",
    "\n",
    " ",
    "\t",
    "é",
    "\u{0}",
    "1e9",
    "..",
    "9999999999999999999999",
];

/// `count` random inputs for the norm parser: token soups, mutated copies
/// of `seed_text`, and raw random characters, in equal shares.
pub fn fuzz_inputs<R: Rng>(rng: &mut R, count: usize, seed_text: &str) -> Vec<String> {
    let seed_chars: Vec<char> = seed_text.chars().collect();
    (0..count)
        .map(|i| match i % 3 {
            0 => (0..rng.gen_range(0..40))
                .map(|_| *FUZZ_TOKENS.choose(rng).unwrap())
                .collect::<Vec<_>>()
                .join(if rng.gen_bool(0.5) { " " } else { "" }),
            1 => {
                let mut chars = seed_chars.clone();
                for _ in 0..rng.gen_range(1..6) {
                    if chars.is_empty() {
                        break;
                    }
                    let at = rng.gen_range(0..chars.len());
                    match rng.gen_range(0..3) {
                        0 => {
                            chars.remove(at);
                        }
                        1 => chars.insert(at, *b"()\";.=-#a0 \n".choose(rng).unwrap() as char),
                        _ => {
                            let to = rng.gen_range(at..chars.len().min(at + 30));
                            chars.drain(at..to);
                        }
                    }
                }
                chars.into_iter().collect()
            }
            _ => (0..rng.gen_range(0..80))
                .map(|_| char::from_u32(rng.gen_range(0..0x250)).unwrap_or('?'))
                .collect(),
        })
        .collect()
}
