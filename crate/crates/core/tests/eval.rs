use std::collections::BTreeSet;

use aerovln_core::eval::{
    ablation_matrix, archetype_vocabulary, generate_episodes, generate_scene, run_episodes,
    run_suite, spl, success_rate, AblationRow, EpisodeScore, SuiteConfig, COLORS,
};
use aerovln_core::executive::{EpisodeSpec, ParserVariant, PipelineConfig};
use aerovln_core::language::{parse_instruction, Instruction, ObjectRef, SubGoalKind};
use aerovln_core::perception::{FidelityProfile, COCO_80};
use aerovln_core::planner::PlannerConfig;
use aerovln_core::world::{
    validate_scene, Aabb, Action, ActionKind, Archetype, CameraModel, Pose, Scene, SceneObject,
    Vec3,
};
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn outcomes(successes: usize, total: usize) -> Vec<EpisodeScore> {
    (0..total)
        .map(|i| EpisodeScore::new(i < successes, 10.0, 8.0))
        .collect()
}

#[test]
fn success_rate_percent_cells() {
    // 13 and 14 of 15 successes, in percent
    assert_abs_diff_eq!(
        success_rate(&outcomes(13, 15)).unwrap() * 100.0,
        86.67,
        epsilon = 0.01
    );
    assert_abs_diff_eq!(
        success_rate(&outcomes(14, 15)).unwrap() * 100.0,
        93.33,
        epsilon = 0.01
    );
    assert_eq!(success_rate(&outcomes(0, 15)).unwrap(), 0.0);
}

#[test]
fn spl_single_episode_identities() {
    assert_eq!(spl(&[EpisodeScore::new(true, 12.5, 12.5)]).unwrap(), 1.0);
    assert_eq!(spl(&[EpisodeScore::new(false, 12.5, 12.5)]).unwrap(), 0.0);
    assert_eq!(spl(&[EpisodeScore::new(true, 20.0, 10.0)]).unwrap(), 0.5);
}

#[test]
fn spl_matches_term_by_term_recomputation() {
    // (success, p, l) rows with each term worked out by hand
    let rows: [(bool, f64, f64, f64); 15] = [
        (true, 10.0, 10.0, 1.0),
        (true, 20.0, 10.0, 0.5),
        (false, 5.0, 10.0, 0.0),
        (true, 12.0, 9.0, 0.75),
        (true, 8.0, 10.0, 1.0),
        (true, 16.0, 4.0, 0.25),
        (false, 30.0, 12.0, 0.0),
        (true, 25.0, 20.0, 0.8),
        (true, 14.0, 7.0, 0.5),
        (false, 0.0, 6.0, 0.0),
        (true, 40.0, 10.0, 0.25),
        (true, 11.0, 11.0, 1.0),
        (true, 15.0, 12.0, 0.8),
        (false, 9.0, 3.0, 0.0),
        (true, 50.0, 5.0, 0.1),
    ];
    let scores: Vec<EpisodeScore> = rows
        .iter()
        .map(|&(s, p, l, _)| EpisodeScore::new(s, p, l))
        .collect();
    let expected = rows.iter().map(|r| r.3).sum::<f64>() / 15.0;
    assert_abs_diff_eq!(spl(&scores).unwrap(), expected, epsilon = 1e-12);
    assert_abs_diff_eq!(expected, 6.95 / 15.0, epsilon = 1e-12);
    assert_abs_diff_eq!(success_rate(&scores).unwrap(), 11.0 / 15.0, epsilon = 1e-12);
}

fn score() -> impl Strategy<Value = EpisodeScore> {
    (any::<bool>(), 0.0f64..200.0, 0.1f64..200.0).prop_map(|(s, p, l)| EpisodeScore::new(s, p, l))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn spl_never_exceeds_sr(batch in prop::collection::vec(score(), 1..40)) {
        let sr = success_rate(&batch).unwrap();
        let v = spl(&batch).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!(v <= sr);
        prop_assert!(sr <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metrics_ignore_episode_order(
        batch in prop::collection::vec(score(), 1..30),
        rot in 0usize..30,
    ) {
        let mut shuffled = batch.clone();
        shuffled.reverse();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        prop_assert_eq!(success_rate(&batch).unwrap(), success_rate(&shuffled).unwrap());
        prop_assert!((spl(&batch).unwrap() - spl(&shuffled).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn spl_equals_sr_when_paths_are_short(
        batch in prop::collection::vec((any::<bool>(), 0.1f64..100.0, 0.0f64..1.0), 1..30),
    ) {
        let scores: Vec<EpisodeScore> = batch.iter().map(|&(s, l, f)| EpisodeScore::new(s, l * f, l)).collect();
        prop_assert!((spl(&scores).unwrap() - success_rate(&scores).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn scenes_are_deterministic_per_seed() {
    assert_eq!(
        generate_scene(Archetype::Warehouse, 7),
        generate_scene(Archetype::Warehouse, 7)
    );
    assert_ne!(
        generate_scene(Archetype::Warehouse, 7),
        generate_scene(Archetype::Warehouse, 8)
    );
}

#[test]
fn unknown_archetype_is_rejected() {
    assert!("castle".parse::<Archetype>().is_err());
}

#[test]
fn generated_scenes_are_valid_and_varied() {
    for a in Archetype::ALL {
        for seed in 0..20 {
            let scene = generate_scene(a, seed);
            assert_eq!(validate_scene(&scene), vec![], "{a:?} seed {seed}");
            let labeled = scene.objects.iter().filter(|o| !o.is_obstacle).count();
            assert!(labeled >= 8);
            let colorings: BTreeSet<&BTreeSet<String>> = scene
                .objects
                .iter()
                .filter(|o| !o.attributes.is_empty())
                .map(|o| &o.attributes)
                .collect();
            assert!(colorings.len() >= 3);
            for o in &scene.objects {
                assert!(o.attributes.iter().all(|c| COLORS.contains(&c.as_str())));
            }
        }
    }
}

#[test]
fn labels_come_from_the_archetype_vocabulary() {
    let documented: [(Archetype, &[&str]); 4] = [
        (
            Archetype::Warehouse,
            &["shelf", "pallet", "box", "forklift"],
        ),
        (Archetype::Park, &["tree", "bench", "fountain"]),
        (Archetype::Neighborhood, &["house", "car", "mailbox"]),
        (Archetype::Office, &["desk", "chair"]),
    ];
    for (a, required) in documented {
        let vocab: BTreeSet<&str> = archetype_vocabulary(a).into_iter().collect();
        for seed in [0, 1, 2, 3, 7, 42] {
            let scene = generate_scene(a, seed);
            let labels: BTreeSet<&str> = scene.objects.iter().map(|o| o.label.as_str()).collect();
            assert!(labels.is_subset(&vocab), "{a:?}: {labels:?}");
            for r in required {
                assert!(labels.contains(r), "{a:?} seed {seed} lacks {r}");
            }
        }
    }
    // the office ceiling is low enough that ascents run out quickly
    assert!(generate_scene(Archetype::Office, 0).bounds.max.z <= 4.0);
}

#[test]
fn generated_instructions_parse_to_their_goal() {
    let planner = PlannerConfig::default();
    let camera = CameraModel::default();
    for a in Archetype::ALL {
        let scene = generate_scene(a, 3);
        let specs = generate_episodes(&scene, 15, 9, 1.5, 200, &planner, &camera).unwrap();
        assert_eq!(specs.len(), 15);
        for spec in &specs {
            spec.check().unwrap();
            let plan = parse_instruction(&spec.instruction, &ActionKind::ALL).unwrap();
            let targets: Vec<&ObjectRef> =
                plan.subgoals.iter().filter_map(|s| s.target()).collect();
            assert!(!targets.is_empty());
            assert!(
                targets.iter().all(|t| **t == spec.goal),
                "{}",
                spec.instruction.as_str()
            );
            assert_eq!(plan.subgoals.last().unwrap().kind(), SubGoalKind::Land);
        }
    }
}

fn pad_spec(seed: u64) -> EpisodeSpec {
    let scene = Scene {
        name: "pad".into(),
        bounds: Aabb::new(Vec3::new(-6.0, -6.0, 0.0), Vec3::new(6.0, 6.0, 5.0)),
        objects: vec![SceneObject {
            id: "bench-0".into(),
            label: "bench".into(),
            attributes: BTreeSet::new(),
            aabb: Aabb::new(Vec3::new(-0.9, -0.3, 0.0), Vec3::new(0.9, 0.3, 0.9)),
            is_obstacle: false,
        }],
        start_pose: Pose::new(Vec3::ZERO, 0.0),
        archetype: Archetype::Park,
    };
    EpisodeSpec {
        scene,
        instruction: Instruction::new("take off, fly to the bench, then land").unwrap(),
        goal: ObjectRef::new("bench"),
        success_radius: 1.5,
        optimal_length: 2.0,
        seed,
        max_steps: 200,
    }
}

#[test]
fn goal_at_start_always_succeeds() {
    let specs: Vec<EpisodeSpec> = (0..15).map(pad_spec).collect();
    let episodes = vec![(Archetype::Park, specs)];
    let run = run_episodes(
        &episodes,
        &PipelineConfig::reference(FidelityProfile::oracle()),
        "x".into(),
    );
    assert_eq!(run.result.overall.sr, 1.0);
    for r in &run.episodes {
        assert_eq!(r.log.steps.last().unwrap().action, Action::Land);
    }
}

#[test]
fn closed_vocabulary_misses_every_open_goal() {
    let base = SuiteConfig::new(PipelineConfig::reference(FidelityProfile::closed_vocab_80()));
    let episodes: Vec<(Archetype, Vec<EpisodeSpec>)> = base
        .episodes()
        .unwrap()
        .into_iter()
        .map(|(a, specs)| {
            (
                a,
                specs
                    .into_iter()
                    .filter(|s| !COCO_80.contains(&s.goal.label.as_str()))
                    .collect(),
            )
        })
        .collect();
    let total: usize = episodes.iter().map(|(_, s)| s.len()).sum();
    assert!(total >= 10);
    let episodes: Vec<_> = episodes
        .into_iter()
        .filter(|(_, s)| !s.is_empty())
        .collect();
    let run = run_episodes(&episodes, &base.pipeline, base.digest());
    assert_eq!(run.result.overall.sr, 0.0);
    assert_eq!(run.result.overall.spl, 0.0);
}

#[test]
fn suite_scores_stay_ordered() {
    let base = SuiteConfig::new(PipelineConfig::reference(
        FidelityProfile::open_vocab_coarse(),
    ));
    let result = run_suite(&base).unwrap();
    assert_eq!(result.scenes.len(), 4);
    for s in &result.scenes {
        assert_eq!(s.episodes, 15);
        assert!(0.0 <= s.spl && s.spl <= s.sr && s.sr <= 1.0);
    }
    assert_eq!(result.config_digest, base.digest());
}

#[test]
fn single_row_ablation_equals_run_suite() {
    let base = SuiteConfig::new(PipelineConfig::reference(FidelityProfile::oracle()));
    let table = ablation_matrix(
        &base,
        &[AblationRow::new(
            ParserVariant::Reference,
            FidelityProfile::oracle(),
        )],
    )
    .unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.rows[0].result, run_suite(&base).unwrap());
    let csv = table.to_csv();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("design_choice,Warehouse,Park,House Neighborhood,Office"));
    assert!(ablation_matrix(&base, &[]).is_err());
}

#[test]
fn invalid_suite_configs_are_rejected() {
    let mut c = SuiteConfig::new(PipelineConfig::reference(FidelityProfile::oracle()));
    c.episodes_per_scene = 0;
    assert!(run_suite(&c).is_err());
    let mut c = SuiteConfig::new(PipelineConfig::reference(FidelityProfile::oracle()));
    c.archetypes.clear();
    assert!(run_suite(&c).is_err());
    let json = r#"{"pipeline":{"profile":"ORACLE"},"extra":1}"#;
    assert!(serde_json::from_str::<SuiteConfig>(json).is_err());
    let json = r#"{"pipeline":{"profile":"NOPE"}}"#;
    assert!(serde_json::from_str::<SuiteConfig>(json).is_err());
    let json = r#"{"pipeline":{"profile":"ORACLE"}}"#;
    assert_eq!(
        serde_json::from_str::<SuiteConfig>(json).unwrap(),
        SuiteConfig::new(PipelineConfig::reference(FidelityProfile::oracle()))
    );
}
