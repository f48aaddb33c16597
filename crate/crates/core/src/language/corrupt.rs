//! Injected decomposition errors, used to vary language-model quality in
//! ablations.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::types::{
    ObjectRef, SubGoal, SubGoalKind, SubGoalPlan, DEFAULT_HOVER_SECONDS, DEFAULT_TAKEOFF_ALT,
};
use crate::rng::{derive_seed, seeded};

/// A corrupted plan plus the indices (into the input plan) that were altered.
#[derive(Debug, Clone, PartialEq)]
pub struct Corruption {
    pub plan: SubGoalPlan,
    pub altered: Vec<usize>,
}

fn build(kind: SubGoalKind, target: ObjectRef) -> SubGoal {
    match kind {
        SubGoalKind::Takeoff => SubGoal::Takeoff {
            alt: DEFAULT_TAKEOFF_ALT,
        },
        SubGoalKind::NavigateTo => SubGoal::NavigateTo(target),
        SubGoalKind::FlyOver => SubGoal::FlyOver(target),
        SubGoalKind::AscendTo => SubGoal::AscendTo { alt: 4.0 },
        SubGoalKind::DescendTo => SubGoal::DescendTo { alt: 1.0 },
        SubGoalKind::Search => SubGoal::Search(target),
        SubGoalKind::Hover => SubGoal::Hover {
            seconds: DEFAULT_HOVER_SECONDS,
        },
        SubGoalKind::Land => SubGoal::Land,
        SubGoalKind::LandAt => SubGoal::LandAt(target),
    }
}

fn alter<R: Rng>(rng: &mut R, sg: &SubGoal, is_last: bool, vocabulary: &[String]) -> SubGoal {
    let current = sg.kind();
    let label_choices: Vec<&String> = match sg.target() {
        Some(t) => vocabulary.iter().filter(|l| **l != t.label).collect(),
        None => Vec::new(),
    };
    let swap_label = !label_choices.is_empty() && rng.random_bool(0.5);
    if swap_label {
        let mut out = sg.clone();
        let label = (*label_choices.choose(rng).expect("non-empty")).clone();
        out.target_mut().expect("has target").label = label;
        return out;
    }
    let kinds: Vec<SubGoalKind> = SubGoalKind::ALL
        .into_iter()
        .filter(|k| *k != current && (is_last || !k.is_landing()))
        .collect();
    let kind = *kinds.choose(rng).expect("at least one alternative kind");
    let target = match sg.target() {
        Some(t) => t.clone(),
        None => {
            let label = vocabulary
                .choose(rng)
                .cloned()
                .unwrap_or_else(|| "object".to_string());
            ObjectRef::new(label)
        }
    };
    build(kind, target)
}

/// Independently alters each sub-goal with probability `rate`: either its
/// kind is swapped for another kind, or its object label is replaced by a
/// different label from `vocabulary`. Each position draws from its own
/// seeded stream, so the altered set at a lower rate is a subset of the set
/// at a higher rate for the same seed.
pub fn corrupt_plan_traced(
    plan: &SubGoalPlan,
    rate: f64,
    seed: u64,
    vocabulary: &[String],
) -> Corruption {
    let rate = rate.clamp(0.0, 1.0);
    let last = plan.subgoals.len().saturating_sub(1);
    let mut altered = Vec::new();
    let subgoals = plan
        .subgoals
        .iter()
        .enumerate()
        .map(|(i, sg)| {
            let mut rng = seeded(derive_seed(seed, i as u64));
            let draw: f64 = rng.random();
            if draw < rate {
                altered.push(i);
                alter(&mut rng, sg, i == last, vocabulary)
            } else {
                sg.clone()
            }
        })
        .collect();
    let mut out = SubGoalPlan {
        subgoals,
        source: plan.source,
    };
    out.repair_takeoff(true);
    Corruption { plan: out, altered }
}

pub fn corrupt_plan(
    plan: &SubGoalPlan,
    rate: f64,
    seed: u64,
    vocabulary: &[String],
) -> SubGoalPlan {
    corrupt_plan_traced(plan, rate, seed, vocabulary).plan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::PlanSource;

    fn vocab() -> Vec<String> {
        ["car", "tree", "bench", "fountain"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn sample() -> SubGoalPlan {
        SubGoalPlan {
            subgoals: vec![
                SubGoal::Takeoff { alt: 2.0 },
                SubGoal::NavigateTo(ObjectRef::new("car").with_attributes(["red"])),
                SubGoal::Hover { seconds: 3.0 },
                SubGoal::Land,
            ],
            source: PlanSource::ReferenceParser,
        }
    }

    #[test]
    fn zero_rate_is_identity() {
        for seed in 0..20 {
            assert_eq!(corrupt_plan(&sample(), 0.0, seed, &vocab()), sample());
        }
    }

    #[test]
    fn structure_survives_full_corruption() {
        for seed in 0..200 {
            let c = corrupt_plan_traced(&sample(), 1.0, seed, &vocab());
            assert_eq!(c.altered, vec![0, 1, 2, 3]);
            c.plan.check(true).unwrap();
        }
    }

    #[test]
    fn lower_rate_alters_subset() {
        let long = SubGoalPlan {
            subgoals: std::iter::repeat_n(SubGoal::Search(ObjectRef::new("car")), 200).collect(),
            source: PlanSource::ReferenceParser,
        };
        let low = corrupt_plan_traced(&long, 0.25, 3, &vocab());
        let high = corrupt_plan_traced(&long, 0.5, 3, &vocab());
        assert!(low.altered.iter().all(|i| high.altered.contains(i)));
        // a prepended TAKEOFF shifts positions by one
        let low_off = low.plan.subgoals.len() - long.subgoals.len();
        let high_off = high.plan.subgoals.len() - long.subgoals.len();
        for i in &low.altered {
            assert_eq!(
                low.plan.subgoals[i + low_off],
                high.plan.subgoals[i + high_off]
            );
        }
    }
}
