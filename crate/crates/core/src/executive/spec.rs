use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::http::Endpoint;
use crate::language::{Instruction, ObjectRef};
use crate::perception::{matches_ref, FidelityProfile};
use crate::planner::PlannerConfig;
use crate::world::{CameraModel, Scene, SceneObject};
use crate::Error;

pub const DEFAULT_SUCCESS_RADIUS: f64 = 1.5;
pub const DEFAULT_MAX_STEPS: usize = 200;
pub const DEFAULT_REFINE_PASSES: usize = 2;

/// One navigation task: a scene, what to say, and what counts as arriving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeSpec {
    pub scene: Scene,
    pub instruction: Instruction,
    pub goal: ObjectRef,
    pub success_radius: f64,
    /// Shortest path length from the start to the goal region, meters.
    pub optimal_length: f64,
    pub seed: u64,
    pub max_steps: usize,
}

impl EpisodeSpec {
    pub fn check(&self) -> Result<(), Error> {
        if !(self.success_radius > 0.0) {
            return Err(Error::Config(format!(
                "success_radius {} must be > 0",
                self.success_radius
            )));
        }
        if !(self.optimal_length > 0.0) {
            return Err(Error::Config(format!(
                "optimal_length {} must be > 0",
                self.optimal_length
            )));
        }
        self.goal.check().map_err(Error::Config)?;
        if self.goal_objects().is_empty() {
            return Err(Error::Config(format!(
                "goal {} matches no object in {}",
                self.goal, self.scene.name
            )));
        }
        Ok(())
    }

    /// Scene objects satisfying the goal reference, judged from the start pose.
    pub fn goal_objects(&self) -> Vec<&SceneObject> {
        let pose = self.scene.start_pose;
        self.scene
            .objects
            .iter()
            .filter(|o| matches_ref(o, &self.goal, &self.scene, &pose))
            .collect()
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&json))
    }
}

/// How instructions are turned into sub-goals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParserVariant {
    Reference,
    /// Reference parse followed by injected decomposition errors.
    Corrupted {
        rate: f64,
    },
    Remote {
        endpoint: Endpoint,
    },
}

impl ParserVariant {
    pub fn label(&self) -> String {
        match self {
            ParserVariant::Reference => "reference".into(),
            ParserVariant::Corrupted { rate } => format!("corrupted@{rate}"),
            ParserVariant::Remote { .. } => "remote".into(),
        }
    }
}

pub(crate) fn profile_by_name_or_value<'de, D: Deserializer<'de>>(
    d: D,
) -> Result<FidelityProfile, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Name(String),
        Full(FidelityProfile),
    }
    let profile = match Repr::deserialize(d)? {
        Repr::Name(name) => name.parse().map_err(serde::de::Error::custom)?,
        Repr::Full(p) => p,
    };
    profile.check().map_err(serde::de::Error::custom)?;
    Ok(profile)
}

/// Everything about the pipeline that is not the episode itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_parser")]
    pub parser: ParserVariant,
    /// A shipped profile name or a full profile object.
    #[serde(deserialize_with = "profile_by_name_or_value")]
    pub profile: FidelityProfile,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub camera: CameraModel,
    /// Re-plans from closer range after each navigation segment.
    #[serde(default = "default_refine_passes")]
    pub refine_passes: usize,
}

fn default_parser() -> ParserVariant {
    ParserVariant::Reference
}

fn default_refine_passes() -> usize {
    DEFAULT_REFINE_PASSES
}

impl PipelineConfig {
    pub fn new(parser: ParserVariant, profile: FidelityProfile) -> Self {
        Self {
            parser,
            profile,
            planner: PlannerConfig::default(),
            camera: CameraModel::default(),
            refine_passes: DEFAULT_REFINE_PASSES,
        }
    }

    pub fn reference(profile: FidelityProfile) -> Self {
        Self::new(ParserVariant::Reference, profile)
    }
}
