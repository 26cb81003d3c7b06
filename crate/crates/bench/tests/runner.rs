use std::path::PathBuf;

use longhot_bench::report::SuiteReport;
use longhot_bench::runner::{run_episodes, RowStatus, RunSpec};
use longhot_bench::scene_io::{load_scene, SceneSet};
use longhot_bench::suite::SuiteFile;
use longhot_bench::trace::{read_trace, verify, write_trace, Verdict};
use longhot_core::policy::{run_episode, HtpConfig};
use longhot_core::world::generate_scene;
use longhot_core::{EnvConfig, LevelParams, SceneSpec};

fn scenes() -> SceneSet {
    let mut s = SceneSet::default();
    for i in 0..2 {
        s.insert(&format!("r{i}"), generate_scene(40 + i, &SceneSpec::with_extent(14.0)).unwrap());
    }
    s
}

fn spec(parallelism: usize) -> RunSpec {
    RunSpec { htp: HtpConfig::default(), env: EnvConfig { t_max: 400, ..EnvConfig::default() }, parallelism }
}

#[test]
fn failing_episodes_become_error_rows() {
    let scenes = scenes();
    let mut suite = SuiteFile::generate(&scenes, &LevelParams::default_level().with_k(2), 5, 3).unwrap();
    suite.episodes[1].scene_id = "missing".into();
    // a goal inside the wall ring fails environment validation
    suite.episodes[3].goal = longhot_core::Point::new(0.1, 0.1);
    let rows = run_episodes(&suite.episodes, &scenes, &spec(3), &|_, _, _| Ok(()));
    let status: Vec<RowStatus> = rows.iter().map(|r| r.status).collect();
    assert_eq!(status, [RowStatus::Ok, RowStatus::Error, RowStatus::Ok, RowStatus::Error, RowStatus::Ok]);
    assert!(rows[1].error.as_deref().unwrap().contains("missing"));
    assert!(rows[3].result.is_none());

    let report = SuiteReport::new(&spec(3), &suite.episodes, &scenes, 3, rows);
    assert_eq!((report.episodes, report.errors), (5, 2));
    assert_eq!(report.summary.as_ref().unwrap().overall.episodes, 3);
}

#[test]
fn sink_failures_and_panics_stay_in_their_row() {
    let scenes = scenes();
    let suite = SuiteFile::generate(&scenes, &LevelParams::default_level().with_k(1), 4, 8).unwrap();
    let rows = run_episodes(&suite.episodes, &scenes, &spec(2), &|i, _, _| match i {
        0 => panic!("sink exploded"),
        2 => Err("disk full".into()),
        _ => Ok(()),
    });
    assert_eq!(rows[0].error.as_deref(), Some("panic: sink exploded"));
    assert_eq!(rows[2].error.as_deref(), Some("disk full"));
    assert_eq!(rows[1].status, RowStatus::Ok);
    assert_eq!(rows[3].status, RowStatus::Ok);
}

#[test]
fn config_hash_ignores_parallelism_only() {
    let scenes = scenes();
    let suite = SuiteFile::generate(&scenes, &LevelParams::default_level().with_k(1), 2, 1).unwrap();
    let hash = |s: &RunSpec| SuiteReport::new(s, &suite.episodes, &scenes, 1, vec![]).provenance.config_hash;
    assert_eq!(hash(&spec(1)), hash(&spec(8)));
    let mut strict = spec(1);
    strict.env.strict = true;
    assert_ne!(hash(&spec(1)), hash(&strict));
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

#[test]
fn golden_trace_replays() {
    let (id, grid) = load_scene(&fixtures().join("golden_scene.json")).unwrap();
    let (header, records) = read_trace(&fixtures().join("golden_trace.jsonl")).unwrap();
    assert_eq!(header.episode.scene_id, id);
    match verify(&header, &records, &grid).unwrap() {
        Verdict::Pass { steps, final_state } => {
            assert_eq!(steps, records.len());
            assert_eq!(final_state.goal_state.delivered.len(), header.episode.k());
        }
        Verdict::Fail { step, field } => panic!("golden trace diverges at step {step}: {field}"),
    }
}

#[test]
fn policy_reproduces_the_golden_trace() {
    let (_, grid) = load_scene(&fixtures().join("golden_scene.json")).unwrap();
    let (header, records) = read_trace(&fixtures().join("golden_trace.jsonl")).unwrap();
    let run = run_episode(&grid, &header.episode, &header.env, &HtpConfig::default()).unwrap();
    if std::env::var_os("LONGHOT_BLESS").is_some() {
        write_trace(&fixtures().join("golden_trace.jsonl"), &header, &run.trace).unwrap();
        return;
    }
    assert_eq!(run.trace.len(), records.len());
    assert!(run.trace == records, "policy no longer reproduces the golden trace; rerun with LONGHOT_BLESS=1 after an intended change");
}
