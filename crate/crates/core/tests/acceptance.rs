//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use normroute::dsl::{lint, parse, pretty_print};
use normroute::engine::engine_schema;
use normroute::matching::{select_responders, MatchQuery};
use normroute::metrics::{cosine_similarity, physical_proximity, MetricParams};
use normroute::profile::{generate_synthetic, GeneratorConfig, Location};
use normroute::sim::{
    adapt_k, run_scenario, synthetic_script, AdaptConfig, CommunitySource, FeedbackRecord,
    NormSource, Scenario, ScriptStep,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FANOUT_QUESTIONS: usize = 1000;
const FANOUT_BUDGET: Duration = Duration::from_secs(10);
const POOLS: usize = 10_000;
const TREND_SIZES: [usize; 3] = [51, 105, 115];
const TREND_SEEDS: u64 = 30;
const TREND_QUESTIONS: usize = 20;
const TREND_BUDGET: Duration = Duration::from_secs(60);
const ORACLE_INSTANCES: usize = 500;
const CORPUS_MIN_NORMS: usize = 20;
const FUZZ_INPUTS: usize = 10_000;
const COSINE_TOL: f64 = 1e-12;
const PROXIMITY_TOL: f64 = 1e-9;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn generated(
    size: usize,
    community_seed: u64,
    run_seed: u64,
    questions: usize,
    answer_prob: f64,
) -> Scenario {
    let ids: Vec<String> = generate_synthetic(&GeneratorConfig::pilot(size), community_seed)
        .unwrap()
        .members()
        .map(|p| p.id.clone())
        .collect();
    Scenario {
        community: CommunitySource::Generated {
            generator: GeneratorConfig::pilot(size),
            seed: community_seed,
        },
        norms: NormSource::Path("default.nm".into()),
        seed: run_seed,
        params: MetricParams::default(),
        adapt: AdaptConfig::default(),
        events: synthetic_script(&ids, questions, run_seed, answer_prob),
    }
}

fn fanout_cap() -> Verdict {
    let start = Instant::now();
    let report = run_scenario(&generated(51, 1, 1, FANOUT_QUESTIONS, 0.5), &data_dir())
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let want = 5; // min(5, 51 - 1)
    let mut violations = report
        .questions
        .iter()
        .filter(|q| q.recipients.len() != want)
        .count();
    // a community smaller than the cap sends to everyone else
    let small =
        run_scenario(&generated(4, 2, 2, 50, 0.5), &data_dir()).map_err(|e| e.to_string())?;
    violations += small
        .questions
        .iter()
        .filter(|q| q.recipients.len() != 3)
        .count();
    let detail = format!(
        "{} questions at n=51 and 50 at n=4, {violations} violations, {:.2} s",
        report.questions.len(),
        elapsed.as_secs_f64()
    );
    if report.questions.len() == FANOUT_QUESTIONS && violations == 0 && elapsed < FANOUT_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gender_balance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xba1a);
    let params = MetricParams::default();
    let (mut qualifying, mut violations) = (0, 0);
    for _ in 0..POOLS {
        let n = rng.gen_range(2..=30);
        let mut c = common::random_community(&mut rng, n);
        // keep two groups: fold any third label into the second
        let members: Vec<_> = c
            .members()
            .map(|p| {
                let mut p = p.clone();
                if p.gender == "x" {
                    p.gender = "m".into();
                }
                p
            })
            .collect();
        for p in members {
            c = c.with_member(p).unwrap();
        }
        let questioner = format!("m{}", rng.gen_range(0..n));
        let mut q: MatchQuery = common::random_query(&mut rng, &questioner, 1);
        q.k = rng.gen_range(1..=10);
        let pool_f = c
            .members()
            .filter(|p| p.id != questioner && p.gender == "f")
            .count();
        let pool_m = n - 1 - pool_f;
        let need = q.k.div_ceil(2);
        if pool_f < need || pool_m < need {
            continue;
        }
        qualifying += 1;
        let picked = select_responders(&q, &c, &params).map_err(|e| e.to_string())?;
        let (f, m) = common::gender_split(&picked, &c, "f");
        if f.abs_diff(m) > 1 {
            violations += 1;
        }
    }
    let detail = format!(
        "{POOLS} pools, {qualifying} with both groups >= ceil(k/2), {violations} violations"
    );
    if violations == 0 && qualifying > 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn size_trend() -> Verdict {
    let start = Instant::now();
    let mut means = Vec::new();
    for size in TREND_SIZES {
        let (mut sum, mut count) = (0.0, 0usize);
        for seed in 0..TREND_SEEDS {
            let r = run_scenario(
                &generated(size, seed, seed, TREND_QUESTIONS, 0.5),
                &data_dir(),
            )
            .map_err(|e| e.to_string())?;
            sum += r.selected_aggregates().sum::<f64>();
            count += r.selected_aggregates().count();
        }
        means.push(sum / count as f64);
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "mean selected score {:.4} (51) / {:.4} (105) / {:.4} (115), {:.2} s",
        means[0],
        means[1],
        means[2],
        elapsed.as_secs_f64()
    );
    if means.windows(2).all(|w| w[0] <= w[1]) && elapsed < TREND_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ac1e);
    let params = MetricParams::default();
    let mut mismatches = 0;
    for _ in 0..ORACLE_INSTANCES {
        let n = rng.gen_range(2..=8);
        let c = common::random_community(&mut rng, n);
        let who = format!("m{}", rng.gen_range(0..n));
        let q = common::random_query(&mut rng, &who, 3);
        let got = select_responders(&q, &c, &params).map_err(|e| e.to_string())?;
        if got != common::oracle_select(&q, &c, params.decay_length_km) {
            mismatches += 1;
        }
    }
    let detail = format!("{ORACLE_INSTANCES} instances (n <= 8, k <= 3), {mismatches} mismatches");
    if mismatches == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn parser_round_trip() -> Verdict {
    let corpus = fs::read_to_string(data_dir().join("corpus.nm")).map_err(|e| e.to_string())?;
    let first = parse(&corpus).map_err(|e| e.diagnostic.to_string())?;
    let printed = pretty_print(&first);
    let second = parse(&printed).map_err(|e| e.diagnostic.to_string())?;
    let fixpoint = first == second && pretty_print(&second) == printed;

    let mut rng = ChaCha8Rng::seed_from_u64(0xf022);
    let inputs = common::fuzz_inputs(&mut rng, FUZZ_INPUTS, &corpus);
    let (mut crashes, mut diagnosed) = (0, 0);
    for input in &inputs {
        let outcome = catch_unwind(|| match parse(input) {
            Ok(norms) => {
                lint(&norms, &engine_schema());
                false
            }
            Err(_) => true,
        });
        match outcome {
            Ok(true) => diagnosed += 1,
            Ok(false) => {}
            Err(_) => crashes += 1,
        }
    }
    let detail = format!(
        "{}-norm corpus fixpoint {fixpoint}; {} fuzz inputs, {diagnosed} diagnosed, {crashes} crashes",
        first.len(),
        inputs.len()
    );
    if fixpoint && first.len() >= CORPUS_MIN_NORMS && crashes == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn hot_reload() -> Verdict {
    let (with, base) =
        Scenario::load(data_dir().join("reload-scenario.json")).map_err(|e| e.to_string())?;
    let at = with
        .events
        .iter()
        .position(|e| matches!(e.step, ScriptStep::Reload { .. }))
        .ok_or("scenario has no reload")?;
    let mut without = with.clone();
    without.events.remove(at);
    let a = run_scenario(&with, &base).map_err(|e| e.to_string())?;
    let b = run_scenario(&without, &base).map_err(|e| e.to_string())?;
    let pre = with.events[..at]
        .iter()
        .filter(|e| matches!(e.step, ScriptStep::QuestionCreated { .. }))
        .count();
    let pre_ok = a.questions[..pre].iter().all(|q| q.recipients.len() == 5);
    let post_ok =
        a.questions.len() > pre && a.questions[pre..].iter().all(|q| q.recipients.len() == 3);
    let prefix_ok = a.questions[..pre] == b.questions[..pre]
        && a.feedback[..pre] == b.feedback[..pre]
        && a.k_trajectory[..pre] == b.k_trajectory[..pre];
    let detail = format!(
        "{pre} questions before reload (5 each: {pre_ok}), {} after (3 each: {post_ok}), prefix identical: {prefix_ok}",
        a.questions.len() - pre
    );
    if pre > 0 && pre_ok && post_ok && prefix_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn simulate(dir: &Path, seed: u64, name: &str) -> Result<Vec<u8>, String> {
    let out_path = dir.join(name);
    let out = Command::new(env!("CARGO_BIN_EXE_normroute"))
        .arg("simulate")
        .arg(data_dir().join("pilot-scenario.json"))
        .args(["--seed", &seed.to_string(), "--out"])
        .arg(&out_path)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    fs::read(out_path).map_err(|e| e.to_string())
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = simulate(dir.path(), 7, "a.json")?;
    let second = simulate(dir.path(), 7, "b.json")?;
    let others = [1u64, 2, 3]
        .iter()
        .map(|s| simulate(dir.path(), *s, &format!("s{s}.json")))
        .collect::<Result<Vec<_>, _>>()?;
    let identical = first == second;
    let distinct = others[0] != others[1] && others[1] != others[2] && others[0] != others[2];
    let detail = format!(
        "seed 7 twice byte-identical: {identical}; seeds 1/2/3 pairwise distinct: {distinct}"
    );
    if identical && distinct {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn numeric_checks() -> Verdict {
    let u = [1.0 / 3.0, 2.0 / 3.0, 1.0];
    let v = [1.0, 2.0 / 3.0, 1.0 / 3.0];
    let cos = cosine_similarity(&u, &v).map_err(|e| e.to_string())?;
    let cos_err = (cos - 5.0 / 7.0).abs();

    // on the equator a longitude step of d/R radians is exactly d km
    let params = MetricParams::default();
    let p = Location::new(0.0, 10.0);
    let q = Location::new(
        0.0,
        10.0 + (params.decay_length_km / common::R_EARTH).to_degrees(),
    );
    let d = common::haversine(&p, &q);
    let prox_err = (physical_proximity(&p, &q, &params) - (-1.0f64).exp()).abs();

    let half = [FeedbackRecord {
        question_id: "q".into(),
        recipients: 10,
        answers: 5,
        ratings: vec![],
    }];
    let k = adapt_k(&half, &AdaptConfig::default());
    let detail = format!(
        "cosine err {cos_err:.1e}, proximity err {prox_err:.1e} at d = {d:.9} km, adapt_k(0.5) = {k}"
    );
    if cos_err <= COSINE_TOL && prox_err <= PROXIMITY_TOL && (d - 50.0).abs() < 1e-9 && k == 5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("fan-out cap", fanout_cap),
        ("gender diversification", gender_balance),
        ("community-size effect", size_trend),
        ("oracle equivalence", oracle_equivalence),
        ("parser round trip and fuzz", parser_round_trip),
        ("hot reload", hot_reload),
        ("determinism", determinism),
        ("numerical metric checks", numeric_checks),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let verdict =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
