use serde::{Deserialize, Serialize};

use super::PlanError;
use crate::world::{apply_action, translation_distance, Action, Pose, Scene};
use crate::Error;

pub const PLAN_SCHEMA: &str = "plan/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    #[serde(flatten)]
    pub action: Action,
    pub subgoal: usize,
}

/// Discrete actions, each tagged with the sub-goal it realizes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ActionPlan {
    pub steps: Vec<PlanStep>,
    /// Sum of the translation distances of the steps, meters.
    pub estimated_length: f64,
}

#[derive(Serialize, Deserialize)]
struct PlanDocument {
    schema: String,
    steps: Vec<PlanStep>,
    estimated_length: f64,
}

impl ActionPlan {
    /// Builds a plan and measures it by integrating the actions from `start`.
    pub fn measured(actions: Vec<Action>, subgoal: usize, start: &Pose, ground: f64) -> Self {
        let estimated_length = measure(actions.iter(), start, ground);
        Self {
            steps: actions
                .into_iter()
                .map(|action| PlanStep { action, subgoal })
                .collect(),
            estimated_length,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn actions(&self) -> impl Iterator<Item = &Action> {
        self.steps.iter().map(|s| &s.action)
    }

    /// Re-tags every step with `subgoal`.
    pub fn for_subgoal(mut self, subgoal: usize) -> Self {
        for s in &mut self.steps {
            s.subgoal = subgoal;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PlanDocument {
            schema: PLAN_SCHEMA.into(),
            steps: self.steps.clone(),
            estimated_length: self.estimated_length,
        })
        .expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let doc: PlanDocument = serde_json::from_str(text)?;
        if doc.schema != PLAN_SCHEMA {
            return Err(Error::Schema(format!(
                "unsupported plan schema {:?}",
                doc.schema
            )));
        }
        Ok(Self {
            steps: doc.steps,
            estimated_length: doc.estimated_length,
        })
    }
}

/// Total distance travelled by integrating `actions` kinematically.
pub fn measure<'a>(actions: impl Iterator<Item = &'a Action>, start: &Pose, ground: f64) -> f64 {
    let mut pose = *start;
    let mut total = 0.0;
    for a in actions {
        total += translation_distance(&pose, a, ground);
        pose = crate::world::integrate(&pose, a, ground);
    }
    total
}

/// Concatenates per-sub-goal segments into one execution plan and replays it
/// from `start` to confirm every step is collision-free.
pub fn assemble_mission(
    segments: Vec<ActionPlan>,
    start: &Pose,
    scene: &Scene,
    clearance: f64,
) -> Result<ActionPlan, PlanError> {
    let steps: Vec<PlanStep> = segments.into_iter().flat_map(|s| s.steps).collect();
    if let Some(i) = steps.windows(2).position(|w| w[1].subgoal < w[0].subgoal) {
        return Err(PlanError::SegmentOrder(i + 1));
    }
    let mut pose = *start;
    let mut length = 0.0;
    for (i, step) in steps.iter().enumerate() {
        let next = apply_action(&pose, &step.action, scene, clearance)
            .map_err(|reason| PlanError::ValidationFailure { step: i, reason })?;
        length += next.position.distance(&pose.position);
        pose = next;
    }
    Ok(ActionPlan {
        steps,
        estimated_length: length,
    })
}
