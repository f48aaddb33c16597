use std::collections::BTreeSet;
use std::f64::consts::PI;

use aerovln_core::eval::{generate_episodes, generate_scene, optimal_length};
use aerovln_core::executive::{
    check_termination, run_episode, EpisodeLog, EpisodeSpec, FailureReason, Outcome,
    PipelineConfig, PlanProgress, TerminationReport,
};
use aerovln_core::language::{Instruction, ObjectRef};
use aerovln_core::perception::{detect, Detection, DetectionQuery, FidelityProfile};
use aerovln_core::planner::{rasterize, PlannerConfig};
use aerovln_core::world::{
    apply_action, Aabb, Archetype, CameraModel, Pose, Scene, SceneObject, Vec3,
};
use proptest::prelude::*;

fn object(id: &str, label: &str, aabb: Aabb, is_obstacle: bool) -> SceneObject {
    SceneObject {
        id: id.into(),
        label: label.into(),
        attributes: BTreeSet::new(),
        aabb,
        is_obstacle,
    }
}

/// Open park: a fountain 8 m ahead of the start and two trees off to the side.
fn open_park() -> Scene {
    Scene {
        name: "open-park".into(),
        bounds: Aabb::new(Vec3::new(-15.0, -15.0, 0.0), Vec3::new(15.0, 15.0, 10.0)),
        objects: vec![
            object(
                "fountain-0",
                "fountain",
                Aabb::new(Vec3::new(6.5, -1.5, 0.0), Vec3::new(9.5, 1.5, 1.2)),
                false,
            ),
            object(
                "tree-0",
                "tree",
                Aabb::new(Vec3::new(3.4, 4.4, 0.0), Vec3::new(4.6, 5.6, 5.0)),
                true,
            ),
            object(
                "tree-1",
                "tree",
                Aabb::new(Vec3::new(-5.6, -4.6, 0.0), Vec3::new(-4.4, -3.4, 5.0)),
                true,
            ),
        ],
        start_pose: Pose::new(Vec3::ZERO, 0.0),
        archetype: Archetype::Park,
    }
}

fn fountain_spec(max_steps: usize) -> EpisodeSpec {
    let scene = open_park();
    let planner = PlannerConfig::default();
    let grid = rasterize(&scene, planner.resolution, planner.clearance);
    let goal = scene.object("fountain-0").unwrap();
    let optimal = optimal_length(&scene, &[goal], &grid, 1.5).unwrap();
    EpisodeSpec {
        instruction: Instruction::new("take off, fly to the fountain, then land").unwrap(),
        goal: ObjectRef::new("fountain"),
        success_radius: 1.5,
        optimal_length: optimal,
        seed: 11,
        max_steps,
        scene,
    }
}

fn profile(name: &str) -> FidelityProfile {
    name.parse().unwrap()
}

fn segment_hits_box(from: Vec3, to: Vec3, b: &Aabb) -> bool {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (o, d, lo, hi) in [
        (from.x, to.x - from.x, b.min.x, b.max.x),
        (from.y, to.y - from.y, b.min.y, b.max.y),
        (from.z, to.z - from.z, b.min.z, b.max.z),
    ] {
        if d.abs() < 1e-12 {
            if o < lo || o > hi {
                return false;
            }
            continue;
        }
        let (a, c) = ((lo - o) / d, (hi - o) / d);
        t0 = t0.max(a.min(c));
        t1 = t1.min(a.max(c));
    }
    t0 <= t1
}

#[test]
fn termination_all_satisfied() {
    let spec = fountain_spec(200);
    let pose = Pose::new(Vec3::new(7.5, 0.0, 1.5), 0.0);
    let dets = detect(
        &pose,
        &CameraModel::default(),
        &spec.scene,
        &[DetectionQuery::new(spec.goal.clone())],
        &profile("ORACLE"),
        0,
    );
    assert_eq!(dets.len(), 1);
    let report = check_termination(
        &pose,
        &dets,
        PlanProgress {
            completed: 2,
            total: 2,
        },
        &spec,
    );
    assert_eq!(
        report,
        TerminationReport {
            goal_detected: true,
            within_threshold: true,
            subgoals_done: true
        }
    );
    assert!(report.satisfied());
}

#[test]
fn hovering_before_final_subgoal_does_not_terminate() {
    let spec = fountain_spec(200);
    let pose = Pose::new(Vec3::new(7.5, 0.0, 1.5), 0.0);
    let dets = detect(
        &pose,
        &CameraModel::default(),
        &spec.scene,
        &[DetectionQuery::new(spec.goal.clone())],
        &profile("ORACLE"),
        0,
    );
    let report = check_termination(
        &pose,
        &dets,
        PlanProgress {
            completed: 1,
            total: 2,
        },
        &spec,
    );
    assert_eq!(
        (
            report.goal_detected,
            report.within_threshold,
            report.subgoals_done
        ),
        (true, true, false)
    );
    assert!(!report.satisfied());
}

#[test]
fn occluded_goal_at_arrival_does_not_terminate() {
    let mut spec = fountain_spec(200);
    spec.scene.objects.push(object(
        "pillar-0",
        "pillar",
        Aabb::new(Vec3::new(7.7, 0.55, 0.0), Vec3::new(8.3, 0.75, 2.5)),
        true,
    ));
    let pose = Pose::new(Vec3::new(8.0, 1.3, 0.6), -PI / 2.0);
    let center = spec.scene.object("fountain-0").unwrap().center();
    let pillar = spec.scene.object("pillar-0").unwrap().aabb;
    assert!(segment_hits_box(pose.position, center, &pillar));
    assert!(pose.position.distance(&center) <= spec.success_radius);

    let dets = detect(
        &pose,
        &CameraModel::default(),
        &spec.scene,
        &[DetectionQuery::new(spec.goal.clone())],
        &profile("ORACLE"),
        0,
    );
    assert!(dets.is_empty());
    let report = check_termination(
        &pose,
        &dets,
        PlanProgress {
            completed: 2,
            total: 2,
        },
        &spec,
    );
    assert_eq!(
        (
            report.goal_detected,
            report.within_threshold,
            report.subgoals_done
        ),
        (false, true, true)
    );
}

#[test]
fn unresolved_detection_is_not_the_goal() {
    let spec = fountain_spec(200);
    let pose = Pose::new(Vec3::new(7.5, 0.0, 1.5), 0.0);
    let fake = Detection {
        object_id: "spurious-0".into(),
        label: "fountain".into(),
        bearing: 0.0,
        elevation: -0.5,
        range: 2.0,
        confidence: 0.5,
    };
    let report = check_termination(
        &pose,
        &[fake],
        PlanProgress {
            completed: 2,
            total: 2,
        },
        &spec,
    );
    assert!(!report.goal_detected);
}

fn replay_checks(spec: &EpisodeSpec, log: &EpisodeLog) {
    assert!(log.steps.len() <= spec.max_steps);
    let clearance = PlannerConfig::default().clearance;
    let mut pose = spec.scene.start_pose;
    let mut length = 0.0;
    for (i, s) in log.steps.iter().enumerate() {
        assert_eq!(s.step, i);
        let next = apply_action(&pose, &s.action, &spec.scene, clearance)
            .unwrap_or_else(|e| panic!("step {i} {:?} does not replay: {e}", s.action));
        assert!(
            (next.position.distance(&s.pose.position)) < 1e-9,
            "step {i} pose mismatch"
        );
        for o in spec.scene.obstacles() {
            assert!(
                !o.aabb.contains_strict(&s.pose.position),
                "step {i} inside {}",
                o.id
            );
        }
        length += next.position.distance(&pose.position);
        pose = next;
    }
    assert!((length - log.path_length()).abs() < 1e-6);
    assert_eq!(log.outcome.final_pose, pose);
    if log.is_success() {
        assert!(log.outcome.termination.satisfied());
        let d = spec
            .goal_objects()
            .iter()
            .map(|o| o.center().distance(&pose.position))
            .fold(f64::INFINITY, f64::min);
        assert!(d <= spec.success_radius, "final pose {d:.3} m from goal");
    }
}

#[test]
fn oracle_reaches_fountain_in_open_park() {
    let spec = fountain_spec(200);
    // lower bound: climb to takeoff altitude, then straight to the goal ball
    let center = spec.scene.object("fountain-0").unwrap().center();
    let takeoff = Vec3::new(0.0, 0.0, 2.0);
    assert!(spec.optimal_length >= 2.0 + takeoff.distance(&center) - spec.success_radius - 1e-9);

    let log = run_episode(&spec, &PipelineConfig::reference(profile("ORACLE")));
    assert_eq!(log.outcome.outcome, Outcome::Success);
    assert!(log.path_length() >= spec.optimal_length - 1e-9);
    replay_checks(&spec, &log);
}

#[test]
fn closed_vocabulary_cannot_find_a_fountain() {
    let spec = fountain_spec(200);
    let log = run_episode(
        &spec,
        &PipelineConfig::reference(profile("CLOSED_VOCAB_80")),
    );
    assert_eq!(
        log.outcome.outcome,
        Outcome::Failure(FailureReason::SearchExhausted)
    );
    assert!(log.steps.iter().all(|s| s.detections.is_empty()));
    replay_checks(&spec, &log);
}

#[test]
fn one_step_budget_runs_out() {
    let spec = fountain_spec(1);
    let log = run_episode(&spec, &PipelineConfig::reference(profile("ORACLE")));
    assert_eq!(
        log.outcome.outcome,
        Outcome::Failure(FailureReason::StepBudget)
    );
    assert!(log.steps.len() <= 1);
    replay_checks(&spec, &log);
}

#[test]
fn unknown_verb_is_a_decompose_error() {
    let mut spec = fountain_spec(200);
    spec.instruction = Instruction::new("juggle the fountain").unwrap();
    let log = run_episode(&spec, &PipelineConfig::reference(profile("ORACLE")));
    assert_eq!(
        log.outcome.outcome,
        Outcome::Failure(FailureReason::DecomposeError)
    );
    assert!(log.steps.is_empty());
    assert!(log.header.decompose_error.is_some());
}

#[test]
fn logs_are_byte_identical_and_roundtrip() {
    let spec = fountain_spec(200);
    for name in ["ORACLE", "OPEN_VOCAB_COARSE"] {
        let config = PipelineConfig::reference(profile(name));
        let a = run_episode(&spec, &config).to_jsonl();
        let b = run_episode(&spec, &config).to_jsonl();
        assert_eq!(a, b);
        let parsed = EpisodeLog::from_jsonl(&a).unwrap();
        assert_eq!(parsed.to_jsonl(), a);
        assert!(a.lines().all(|l| l.contains("\"schema\":\"log/1\"")));
    }
}

#[test]
fn log_lines_out_of_order_are_rejected() {
    let spec = fountain_spec(200);
    let text = run_episode(&spec, &PipelineConfig::reference(profile("ORACLE"))).to_jsonl();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.swap(0, 1);
    assert!(EpisodeLog::from_jsonl(&lines.join("\n")).is_err());
    let truncated: Vec<&str> = text.lines().take(3).collect();
    assert!(EpisodeLog::from_jsonl(&truncated.join("\n")).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generated_episodes_are_safe_and_sound(
        arch in 0usize..4,
        scene_seed in 0u64..50,
        index in 0usize..15,
        which in 0usize..4,
        max_steps in prop_oneof![Just(200usize), 1usize..60],
    ) {
        let archetype = Archetype::ALL[arch];
        let scene = generate_scene(archetype, scene_seed);
        let specs = generate_episodes(&scene, 15, scene_seed, 1.5, max_steps, &PlannerConfig::default(), &CameraModel::default()).unwrap();
        let spec = &specs[index];
        let name = ["ORACLE", "OPEN_VOCAB_PRECISE", "OPEN_VOCAB_COARSE", "CLOSED_VOCAB_80"][which];
        let log = run_episode(spec, &PipelineConfig::reference(profile(name)));
        replay_checks(spec, &log);
    }
}
