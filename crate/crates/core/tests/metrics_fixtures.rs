mod support;

use longhot_core::env::{Placement, FORWARD_STEP_M};
use longhot_core::episodes::{sample_episode, TargetSpec};
use longhot_core::metrics::{efficiency, evaluate, ppl, reference_length, score, spl, MetricsError};
use longhot_core::policy::{run_episode, HtpConfig};
use longhot_core::world::{generate_scene, geodesic, CellPos};
use longhot_core::{Action, Env, EnvConfig, Episode, Heading, LevelParams, OccupancyGrid, Point, Pose, SceneSpec, TerminationReason};
use rand::Rng;
use support::*;

const EXACT: f64 = 1e-9;

/// One-cell-wide east-west corridor of `len` interior cells.
fn corridor(len: usize) -> OccupancyGrid {
    OccupancyGrid::new_closed(len + 2, 3, 0.25)
}

fn at(g: &OccupancyGrid, x: i64) -> Point {
    g.center(CellPos::new(x, 1))
}

fn episode(start: Point, container: Point, objects: &[Point], goal: Point) -> Episode {
    Episode {
        scene_id: "fixture".into(),
        seed: 0,
        goal,
        objects: objects.iter().enumerate().map(|(i, p)| TargetSpec { color: i as u8, position: *p }).collect(),
        container,
        start: Pose::new(start, Heading::from_index(0)),
        level: LevelParams::unconstrained(objects.len()),
    }
}

#[test]
fn corridor_reference_is_ten_meters() {
    let g = corridor(60);
    // start -> container 2 m, container -> object 5 m, object -> goal 3 m
    let ep = episode(at(&g, 2), at(&g, 10), &[at(&g, 30)], at(&g, 42));
    assert!((reference_length(&g, &ep).unwrap() - 10.0).abs() < EXACT);
}

#[test]
fn corridor_reference_visits_nearest_object_first() {
    let g = corridor(60);
    // from the container at 20 the object at 14 is nearer than the one at 27
    let ep = episode(at(&g, 2), at(&g, 20), &[at(&g, 27), at(&g, 14)], at(&g, 50));
    let expected = (18 + 6 + 13 + 23) as f64 * 0.25;
    assert!((reference_length(&g, &ep).unwrap() - expected).abs() < EXACT);
}

#[test]
fn single_object_reference_is_the_sum_of_three_geodesics() {
    let level = LevelParams::default_level().with_k(1);
    for s in 0..12 {
        let g = generate_scene(s, &SceneSpec::default()).unwrap();
        let ep = sample_episode(&g, "s", &level, 100 + s).unwrap();
        let o = ep.objects[0].position;
        let want = geodesic(&g, ep.start.position(), ep.container).unwrap() + geodesic(&g, ep.container, o).unwrap() + geodesic(&g, o, ep.goal).unwrap();
        assert!((reference_length(&g, &ep).unwrap() - want).abs() < EXACT, "scene {s}");
    }
}

#[test]
fn reference_matches_brute_force_greedy_chain() {
    let mut r = rng(20);
    let mut checked = 0;
    while checked < 80 {
        let g = random_grid(&mut r, 20, 20, 0.15);
        let mut p = || g.center(random_free_cell(&mut r, &g));
        let k = 1 + (checked % 4);
        let ep = episode(p(), p(), &(0..k).map(|_| p()).collect::<Vec<_>>(), p());
        let admissible = greedy_chain_oracle(&g, &ep);
        match reference_length(&g, &ep) {
            Ok(len) => {
                assert!(admissible.iter().any(|a| (a - len).abs() < EXACT), "{len} not in {admissible:?}");
                checked += 1;
            }
            Err(MetricsError::InfeasibleEpisode { .. }) => assert!(admissible.iter().all(|a| !a.is_finite())),
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn unreachable_leg_is_reported() {
    let mut g = corridor(20);
    g.set(CellPos::new(10, 1), longhot_core::world::Cell::Obstacle);
    let ep = episode(at(&g, 2), at(&g, 4), &[at(&g, 15)], at(&g, 6));
    assert_eq!(reference_length(&g, &ep), Err(MetricsError::InfeasibleEpisode { leg: 1 }));
}

#[test]
fn spl_is_clamped_to_one() {
    assert_eq!(spl(true, 10.0, 5.0), 1.0);
    assert!((spl(true, 10.0, 20.0) - 0.5).abs() < EXACT);
    assert_eq!(spl(true, 10.0, 10.0), 1.0);
    assert_eq!(spl(false, 10.0, 5.0), 0.0);
    assert_eq!(efficiency(3.0, 0.0), 1.0);
    assert!((ppl(0.5, 10.0, 40.0) - 0.125).abs() < EXACT);
    assert!((ppl(0.75, 10.0, 2.0) - 0.75).abs() < EXACT);
}

#[test]
fn energy_is_one_before_anything_moves() {
    let level = LevelParams::default_level();
    for s in 0..8 {
        let g = generate_scene(s, &SceneSpec::default()).unwrap();
        let ep = sample_episode(&g, "s", &level, s).unwrap();
        let mut env = Env::new(&g, &ep, EnvConfig::default()).unwrap();
        env.reset();
        let r = evaluate(&g, &ep, env.state(), reference_length(&g, &ep).unwrap());
        assert!((r.energy - 1.0).abs() < EXACT);
        assert_eq!((r.progress, r.spl, r.picked, r.path_length), (0.0, 0.0, 0.0, 0.0));
        assert!(!r.success);
    }
}

#[test]
fn scripted_delivery_reaches_zero_energy() {
    let g = corridor(20);
    let ep = episode(at(&g, 5), at(&g, 5), &[at(&g, 6)], at(&g, 7));
    let mut env = Env::new(&g, &ep, EnvConfig::default()).unwrap();
    env.reset();
    assert_eq!(env.step(Action::Pickup).unwrap().picked, Some(longhot_core::ObjectId::Container));
    assert_eq!(env.step(Action::Pickup).unwrap().picked, Some(longhot_core::ObjectId::Target(0)));
    let held = evaluate(&g, &ep, env.state(), 0.5);
    // held objects sit at the agent, two cells from the goal
    assert!((held.energy - 0.5 / 0.25).abs() < EXACT);
    let out = env.step(Action::Drop).unwrap();
    assert_eq!(out.delivered, vec![0]);
    assert_eq!(out.done, Some(TerminationReason::Success));
    let r = evaluate(&g, &ep, env.state(), reference_length(&g, &ep).unwrap());
    assert!(r.success);
    assert_eq!(r.energy, 0.0);
    assert_eq!((r.progress, r.picked, r.spl), (1.0, 1.0, 1.0));
    assert_eq!(env.state().targets, vec![Placement::Delivered]);
}

#[test]
fn dropping_away_from_the_goal_leaves_energy_positive() {
    let g = corridor(30);
    let ep = episode(at(&g, 2), at(&g, 2), &[at(&g, 3)], at(&g, 25));
    let mut env = Env::new(&g, &ep, EnvConfig::default()).unwrap();
    env.reset();
    env.step(Action::Pickup).unwrap();
    env.step(Action::Pickup).unwrap();
    for _ in 0..4 {
        env.step(Action::Forward).unwrap();
    }
    let out = env.step(Action::Drop).unwrap();
    assert!(out.delivered.is_empty());
    let r = evaluate(&g, &ep, env.state(), 1.0);
    // dropped at cell 6, 19 cells from the goal instead of 22
    assert!((r.energy - 19.0 / 22.0).abs() < EXACT);
    assert_eq!((r.progress, r.picked), (0.0, 1.0));
}

#[test]
fn path_length_counts_only_successful_moves() {
    let g = corridor(12);
    let ep = episode(at(&g, 1), at(&g, 1), &[at(&g, 2)], at(&g, 3));
    let mut env = Env::new(&g, &ep, EnvConfig::default()).unwrap();
    env.reset();
    let mut moved = 0;
    for i in 0..30 {
        let a = if i % 7 == 3 { Action::TurnLeft } else { Action::Forward };
        if !env.step(a).unwrap().collided && a == Action::Forward {
            moved += 1;
        }
    }
    assert!(moved > 0 && moved < 30);
    assert_eq!(env.state().forward_moves, moved);
    let r = evaluate(&g, &ep, env.state(), 1.0);
    assert!((r.path_length - moved as f64 * FORWARD_STEP_M).abs() < EXACT);
}

#[test]
fn trace_score_equals_run_result() {
    let level = LevelParams::default_level().with_k(2);
    let env_cfg = EnvConfig { t_max: 600, ..EnvConfig::default() };
    let mut r = rng(3);
    for s in 0..4 {
        let g = generate_scene(s, &SceneSpec::with_extent(16.0)).unwrap();
        let ep = sample_episode(&g, "s", &level, r.gen()).unwrap();
        let run = run_episode(&g, &ep, &env_cfg, &HtpConfig::default()).unwrap();
        assert_eq!(score(&run.trace, &ep, &g, &env_cfg).unwrap(), run.result);
    }
}
