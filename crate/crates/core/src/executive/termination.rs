use serde::{Deserialize, Serialize};

use super::spec::EpisodeSpec;
use crate::perception::{matches_ref, Detection};
use crate::world::{Pose, SceneObject};

/// The three stopping criteria, evaluated independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminationReport {
    pub goal_detected: bool,
    pub within_threshold: bool,
    pub subgoals_done: bool,
}

impl TerminationReport {
    /// Success requires every criterion at once.
    pub fn satisfied(&self) -> bool {
        self.goal_detected && self.within_threshold && self.subgoals_done
    }
}

/// How many of the plan's sub-goals have been fully executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanProgress {
    pub completed: usize,
    pub total: usize,
}

impl PlanProgress {
    pub fn is_done(&self) -> bool {
        self.completed >= self.total
    }
}

/// Goal-matching object whose center is nearest `pose`, with that distance.
pub fn nearest_goal<'a>(pose: &Pose, spec: &'a EpisodeSpec) -> Option<(&'a SceneObject, f64)> {
    spec.scene
        .objects
        .iter()
        .filter(|o| matches_ref(o, &spec.goal, &spec.scene, pose))
        .map(|o| (o, o.center().distance(&pose.position)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.id.cmp(&b.0.id)))
}

/// Evaluates the stopping criteria. A detection counts for the goal only if
/// it resolves to a scene object that satisfies the goal reference, so
/// hallucinated boxes never terminate an episode. Proximity is measured to
/// the nearest goal-matching object center whether or not it is visible.
pub fn check_termination(
    pose: &Pose,
    detections: &[Detection],
    progress: PlanProgress,
    spec: &EpisodeSpec,
) -> TerminationReport {
    let goal_detected = detections.iter().any(|d| {
        spec.scene
            .object(&d.object_id)
            .is_some_and(|o| matches_ref(o, &spec.goal, &spec.scene, pose))
    });
    let within_threshold = nearest_goal(pose, spec).is_some_and(|(_, d)| d <= spec.success_radius);
    TerminationReport {
        goal_detected,
        within_threshold,
        subgoals_done: progress.is_done(),
    }
}
