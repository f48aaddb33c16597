mod common;

use std::collections::BTreeSet;
use std::time::Duration;

use aerovln_core::http::Endpoint;
use aerovln_core::language::{
    corrupt_plan_traced, instruction_corpus, parse_instruction, remote_decompose, DecomposeError,
    Instruction, ObjectRef, PlanSource, RelationKind, SubGoal, SubGoalPlan,
};
use aerovln_core::world::ActionKind;
use common::{dead_url, serve_once, Reply};
use proptest::prelude::*;

/// `label[a,b]@rel:anchor[c]`
fn golden_ref(text: &str) -> ObjectRef {
    fn simple(t: &str) -> ObjectRef {
        match t.split_once('[') {
            Some((label, attrs)) => ObjectRef::new(label).with_attributes(
                attrs
                    .trim_end_matches(']')
                    .split(',')
                    .filter(|s| !s.is_empty()),
            ),
            None => ObjectRef::new(t),
        }
    }
    match text.split_once('@') {
        None => simple(text),
        Some((head, rel)) => {
            let (kind, anchor) = rel.split_once(':').unwrap();
            let kind = RelationKind::ALL
                .into_iter()
                .find(|k| k.as_str() == kind)
                .unwrap();
            simple(head).related(kind, simple(anchor))
        }
    }
}

fn golden_plan(text: &str) -> Vec<SubGoal> {
    text.split(';')
        .map(|item| {
            let item = item.trim();
            let (kind, arg) = match item.split_once('(') {
                Some((k, a)) => (k, a.trim_end_matches(')')),
                None => (item, ""),
            };
            let num = || arg.parse::<f64>().unwrap();
            match kind {
                "T" => SubGoal::Takeoff { alt: num() },
                "NAV" => SubGoal::NavigateTo(golden_ref(arg)),
                "OVER" => SubGoal::FlyOver(golden_ref(arg)),
                "UP" => SubGoal::AscendTo { alt: num() },
                "DOWN" => SubGoal::DescendTo { alt: num() },
                "SEARCH" => SubGoal::Search(golden_ref(arg)),
                "HOVER" => SubGoal::Hover { seconds: num() },
                "LAND" => SubGoal::Land,
                "LANDAT" => SubGoal::LandAt(golden_ref(arg)),
                other => panic!("bad golden kind {other}"),
            }
        })
        .collect()
}

#[test]
fn corpus_matches_goldens() {
    let corpus = instruction_corpus();
    assert_eq!(corpus.len(), 60);
    for (text, golden) in corpus {
        let plan = parse_instruction(&Instruction::new(text).unwrap(), &ActionKind::ALL)
            .unwrap_or_else(|e| panic!("{text:?}: {e}"));
        assert_eq!(plan.subgoals, golden_plan(golden), "{text:?}");
        assert_eq!(plan.source, PlanSource::ReferenceParser);
        plan.check(true).unwrap();
    }
}

#[test]
fn parser_is_deterministic() {
    for (text, _) in instruction_corpus() {
        let i = Instruction::new(text).unwrap();
        assert_eq!(
            parse_instruction(&i, &ActionKind::ALL),
            parse_instruction(&i, &ActionKind::ALL)
        );
    }
}

// Random instructions drawn from the documented grammar.
fn noun_phrase() -> impl Strategy<Value = String> {
    let attrs = prop::collection::vec(
        prop::sample::select(vec!["red", "blue", "small", "wooden", "tall"]),
        0..3,
    );
    let label = prop::sample::select(vec![
        "car",
        "bench",
        "fire hydrant",
        "pallet",
        "chair",
        "tree",
    ]);
    let relation = prop::option::of((
        prop::sample::select(vec![
            "near",
            "left of",
            "to the right of",
            "behind",
            "in front of",
            "next to",
        ]),
        prop::sample::select(vec!["house", "desk", "fountain", "truck"]),
    ));
    (attrs, label, relation).prop_map(|(a, l, r)| {
        let mut s = format!("the {} {}", a.join(" "), l);
        if let Some((rel, anchor)) = r {
            s = format!("{s} {rel} the {anchor}");
        }
        s.split_whitespace().collect::<Vec<_>>().join(" ")
    })
}

fn clause() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("take off".to_string()),
        (1u32..9).prop_map(|n| format!("take off to {n} meters")),
        noun_phrase().prop_map(|np| format!("fly to {np}")),
        noun_phrase().prop_map(|np| format!("go to {np}")),
        noun_phrase().prop_map(|np| format!("fly over {np}")),
        noun_phrase().prop_map(|np| format!("search for {np}")),
        Just("hover".to_string()),
        (1u32..20).prop_map(|n| format!("hover for {n} seconds")),
        (1u32..9).prop_map(|n| format!("climb to {n} m")),
        (1u32..9).prop_map(|n| format!("descend to {n} m")),
    ]
}

fn instruction() -> impl Strategy<Value = String> {
    let ending = prop::option::of(prop_oneof![
        Just("land".to_string()),
        noun_phrase().prop_map(|np| format!("land on {np}")),
    ]);
    let connective = prop::sample::select(vec![
        ", ",
        " then ",
        " and then ",
        ", after that ",
        ", then ",
    ]);
    (
        prop::collection::vec((clause(), connective.clone()), 1..6),
        ending,
        connective,
    )
        .prop_map(|(clauses, end, last_conn)| {
            let mut s = String::new();
            for (i, (c, conn)) in clauses.iter().enumerate() {
                if i > 0 {
                    s.push_str(conn);
                }
                s.push_str(c);
            }
            if let Some(e) = end {
                s.push_str(last_conn);
                s.push_str(&e);
            }
            s
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn synthesized_instructions_yield_valid_plans(text in instruction()) {
        let plan = parse_instruction(&Instruction::new(text.clone()).unwrap(), &ActionKind::ALL)
            .map_err(|e| TestCaseError::fail(format!("{text:?}: {e}")))?;
        prop_assert!(plan.check(true).is_ok(), "{text:?}");
    }
}

fn vocabulary() -> Vec<String> {
    ["bench", "car", "fountain", "tree", "statue"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn long_plan(n: usize) -> SubGoalPlan {
    let mut subgoals = vec![SubGoal::Takeoff { alt: 2.0 }];
    for i in 0..n - 1 {
        subgoals.push(if i % 2 == 0 {
            SubGoal::NavigateTo(ObjectRef::new("car"))
        } else {
            SubGoal::Hover { seconds: 3.0 }
        });
    }
    SubGoalPlan {
        subgoals,
        source: PlanSource::ReferenceParser,
    }
}

#[test]
fn full_rate_alters_every_subgoal() {
    let plan = long_plan(12);
    for seed in [0u64, 7, 42] {
        let c = corrupt_plan_traced(&plan, 1.0, seed, &vocabulary());
        assert_eq!(c.altered, (0..plan.subgoals.len()).collect::<Vec<_>>());
        let offset = c.plan.subgoals.len() - plan.subgoals.len();
        for (i, original) in plan.subgoals.iter().enumerate() {
            assert_ne!(
                &c.plan.subgoals[i + offset],
                original,
                "seed {seed} index {i}"
            );
        }
        c.plan.check(true).unwrap();
    }
}

#[test]
fn half_rate_alteration_fraction() {
    let plan = long_plan(10_000);
    let c = corrupt_plan_traced(&plan, 0.5, 2024, &vocabulary());
    let fraction = c.altered.len() as f64 / plan.subgoals.len() as f64;
    assert!((fraction - 0.5).abs() <= 0.02, "fraction {fraction}");
    c.plan.check(true).unwrap();
}

#[test]
fn corruption_is_seed_deterministic() {
    let plan = long_plan(50);
    let a = corrupt_plan_traced(&plan, 0.3, 11, &vocabulary());
    let b = corrupt_plan_traced(&plan, 0.3, 11, &vocabulary());
    assert_eq!(a, b);
    assert_ne!(
        a.plan,
        corrupt_plan_traced(&plan, 0.3, 12, &vocabulary()).plan
    );
}

const VALID: &str = r#"{"schema":"decompose/1","subgoals":[{"kind":"TAKEOFF","args":{"alt":2.0}},{"kind":"NAVIGATE_TO","args":{"label":"fountain","attributes":[]}},{"kind":"LAND"}]}"#;

#[test]
fn remote_round_trip() {
    let (url, requests) = serve_once(Reply::ok(VALID));
    let instr = Instruction::new("take off, fly to the fountain, then land").unwrap();
    let plan =
        remote_decompose(&instr, &ActionKind::ALL, &vocabulary(), &Endpoint::new(url)).unwrap();
    assert_eq!(plan.source, PlanSource::ExternalLlm);
    assert_eq!(
        plan.subgoals,
        vec![
            SubGoal::Takeoff { alt: 2.0 },
            SubGoal::NavigateTo(ObjectRef::new("fountain")),
            SubGoal::Land
        ]
    );
    let sent: serde_json::Value = serde_json::from_str(&requests.recv().unwrap()).unwrap();
    assert_eq!(sent["schema"], "decompose/1");
    assert_eq!(
        sent["instruction"],
        "take off, fly to the fountain, then land"
    );
    assert_eq!(sent["action_space"].as_array().unwrap().len(), 8);
    assert_eq!(sent["scene_vocabulary"][2], "fountain");
    let keys: BTreeSet<_> = sent.as_object().unwrap().keys().cloned().collect();
    assert_eq!(
        keys,
        ["action_space", "instruction", "scene_vocabulary", "schema"]
            .map(String::from)
            .into()
    );
}

#[test]
fn remote_mid_sequence_land_rejected() {
    let body = r#"{"schema":"decompose/1","subgoals":[{"kind":"TAKEOFF","args":{"alt":2.0}},{"kind":"LAND"},{"kind":"HOVER","args":{"seconds":3}}]}"#;
    let (url, _) = serve_once(Reply::ok(body));
    let r = remote_decompose(
        &Instruction::new("x").unwrap(),
        &ActionKind::ALL,
        &[],
        &Endpoint::new(url),
    );
    assert!(
        matches!(r, Err(DecomposeError::InvariantViolation(_))),
        "{r:?}"
    );
}

#[test]
fn remote_timeout_and_unreachable() {
    let (url, _) = serve_once(Reply {
        status: 200,
        body: VALID.into(),
        delay: Duration::from_millis(800),
    });
    let endpoint = Endpoint::new(url).with_timeout(Duration::from_millis(150));
    let r = remote_decompose(
        &Instruction::new("x").unwrap(),
        &ActionKind::ALL,
        &[],
        &endpoint,
    );
    assert!(
        matches!(r, Err(DecomposeError::BackendUnavailable(_))),
        "{r:?}"
    );

    let r = remote_decompose(
        &Instruction::new("x").unwrap(),
        &ActionKind::ALL,
        &[],
        &Endpoint::new(dead_url()),
    );
    assert!(
        matches!(r, Err(DecomposeError::BackendUnavailable(_))),
        "{r:?}"
    );
}

#[test]
fn remote_server_error_is_unavailable() {
    let (url, _) = serve_once(Reply {
        status: 503,
        body: "{}".into(),
        delay: Duration::ZERO,
    });
    let r = remote_decompose(
        &Instruction::new("x").unwrap(),
        &ActionKind::ALL,
        &[],
        &Endpoint::new(url),
    );
    assert!(
        matches!(r, Err(DecomposeError::BackendUnavailable(_))),
        "{r:?}"
    );
}
