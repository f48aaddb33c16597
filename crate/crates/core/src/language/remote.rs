//! `decompose/1` client for an external LLM decomposition backend.

use serde::{Deserialize, Serialize};

use super::types::{Instruction, PlanSource, SubGoal, SubGoalPlan};
use crate::http::{post_json, Endpoint};
use crate::world::ActionKind;

pub const DECOMPOSE_SCHEMA: &str = "decompose/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeRequest {
    pub schema: String,
    pub instruction: String,
    pub action_space: Vec<ActionKind>,
    pub scene_vocabulary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeResponse {
    pub schema: String,
    pub subgoals: Vec<SubGoal>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecomposeError {
    #[error("decomposition backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend response violates the decompose/1 schema: {0}")]
    SchemaViolation(String),
    #[error("backend plan violates sub-goal invariants: {0}")]
    InvariantViolation(String),
}

impl DecomposeRequest {
    pub fn new(
        instr: &Instruction,
        action_space: &[ActionKind],
        scene_vocabulary: &[String],
    ) -> Self {
        Self {
            schema: DECOMPOSE_SCHEMA.to_string(),
            instruction: instr.as_str().to_string(),
            action_space: action_space.to_vec(),
            scene_vocabulary: scene_vocabulary.to_vec(),
        }
    }
}

/// Validates a raw `decompose/1` response body into a plan.
pub fn decode_response(
    body: &str,
    action_space: &[ActionKind],
) -> Result<SubGoalPlan, DecomposeError> {
    let response: DecomposeResponse =
        serde_json::from_str(body).map_err(|e| DecomposeError::SchemaViolation(e.to_string()))?;
    if response.schema != DECOMPOSE_SCHEMA {
        return Err(DecomposeError::SchemaViolation(format!(
            "schema tag {:?}, expected {DECOMPOSE_SCHEMA:?}",
            response.schema
        )));
    }
    let plan = SubGoalPlan {
        subgoals: response.subgoals,
        source: PlanSource::ExternalLlm,
    };
    plan.check(true)
        .map_err(DecomposeError::InvariantViolation)?;
    if let Some(kind) = plan.missing_action(action_space) {
        return Err(DecomposeError::InvariantViolation(format!(
            "plan requires {kind}, which is not in the action space"
        )));
    }
    Ok(plan)
}

/// Asks an external backend to decompose `instr`. Invalid responses are
/// errors; no fallback to the reference parser happens here.
pub fn remote_decompose(
    instr: &Instruction,
    action_space: &[ActionKind],
    scene_vocabulary: &[String],
    backend: &Endpoint,
) -> Result<SubGoalPlan, DecomposeError> {
    let request = DecomposeRequest::new(instr, action_space, scene_vocabulary);
    let body = serde_json::to_string(&request).expect("request serializes");
    let text = post_json(backend, &body).map_err(DecomposeError::BackendUnavailable)?;
    decode_response(&text, action_space)
}
