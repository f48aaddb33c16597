use std::fmt;

use serde::{Deserialize, Serialize};

use super::termination::TerminationReport;
use crate::language::SubGoalPlan;
use crate::perception::Detection;
use crate::world::{Action, Pose, Vec3};
use crate::Error;

pub const LOG_SCHEMA: &str = "log/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    SearchExhausted,
    Unreachable,
    StepBudget,
    DecomposeError,
    /// Stopped from outside; only interactive sessions produce this.
    Aborted,
}

impl FailureReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailureReason::SearchExhausted => "search_exhausted",
            FailureReason::Unreachable => "unreachable",
            FailureReason::StepBudget => "step_budget",
            FailureReason::DecomposeError => "decompose_error",
            FailureReason::Aborted => "aborted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure(FailureReason),
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Success => f.write_str("success"),
            Outcome::Failure(r) => write!(f, "failure({})", r.as_str()),
        }
    }
}

/// What the executive was doing when it issued a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    Execute,
    Search,
    Verify,
    Land,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub spec_digest: String,
    pub scene: String,
    pub instruction: String,
    pub seed: u64,
    pub max_steps: usize,
    pub profile: String,
    pub parser: String,
    pub plan: Option<SubGoalPlan>,
    pub decompose_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Active sub-goal index; `None` once every sub-goal has been executed.
    pub subgoal: Option<usize>,
    pub mode: StepMode,
    #[serde(flatten)]
    pub action: Action,
    /// Pose after the action.
    pub pose: Pose,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedGoal {
    pub object_id: String,
    pub center: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    #[serde(flatten)]
    pub outcome: Outcome,
    pub steps: usize,
    pub path_length: f64,
    pub termination: TerminationReport,
    /// Pose at which the termination criteria were last evaluated.
    pub termination_pose: Option<Pose>,
    pub final_pose: Pose,
    /// Nearest goal-matching object at the final pose.
    pub matched_goal: Option<MatchedGoal>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line {
    Header(LogHeader),
    Step(StepRecord),
    Outcome(OutcomeRecord),
}

#[derive(Serialize, Deserialize)]
struct Tagged {
    schema: String,
    #[serde(flatten)]
    line: Line,
}

/// Complete trajectory and verdict of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub header: LogHeader,
    pub steps: Vec<StepRecord>,
    pub outcome: OutcomeRecord,
}

impl EpisodeLog {
    pub fn is_success(&self) -> bool {
        self.outcome.outcome.is_success()
    }

    pub fn path_length(&self) -> f64 {
        self.outcome.path_length
    }

    /// JSON Lines: header, one line per step, outcome.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: Line| {
            let tagged = Tagged {
                schema: LOG_SCHEMA.into(),
                line,
            };
            out.push_str(&serde_json::to_string(&tagged).expect("log line serializes"));
            out.push('\n');
        };
        push(Line::Header(self.header.clone()));
        for s in &self.steps {
            push(Line::Step(s.clone()));
        }
        push(Line::Outcome(self.outcome.clone()));
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, Error> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut outcome = None;
        for (n, raw) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let tagged: Tagged = serde_json::from_str(raw)?;
            if tagged.schema != LOG_SCHEMA {
                return Err(Error::Schema(format!(
                    "line {}: unsupported log schema {:?}",
                    n + 1,
                    tagged.schema
                )));
            }
            match (tagged.line, header.is_some(), outcome.is_some()) {
                (Line::Header(h), false, false) => header = Some(h),
                (Line::Step(s), true, false) => steps.push(s),
                (Line::Outcome(o), true, false) => outcome = Some(o),
                _ => return Err(Error::Schema(format!("line {}: out of order", n + 1))),
            }
        }
        match (header, outcome) {
            (Some(header), Some(outcome)) => Ok(Self {
                header,
                steps,
                outcome,
            }),
            _ => Err(Error::Schema(
                "log lacks a header or an outcome line".into(),
            )),
        }
    }
}
