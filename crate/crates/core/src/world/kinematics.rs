use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::geometry::{Aabb, Vec3};
use super::scene::{Pose, Scene};

const GROUND_EPS: f64 = 1e-9;
const BOUNDS_EPS: f64 = 1e-9;

/// The discrete UAV action space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", content = "args", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Action {
    Takeoff { alt: f64 },
    Land,
    Hover { steps: u32 },
    MoveForward { d: f64 },
    TurnLeft { theta: f64 },
    TurnRight { theta: f64 },
    Ascend { d: f64 },
    Descend { d: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ActionKind {
    Takeoff,
    Land,
    Hover,
    MoveForward,
    TurnLeft,
    TurnRight,
    Ascend,
    Descend,
}

impl ActionKind {
    pub const ALL: [ActionKind; 8] = [
        ActionKind::Takeoff,
        ActionKind::Land,
        ActionKind::Hover,
        ActionKind::MoveForward,
        ActionKind::TurnLeft,
        ActionKind::TurnRight,
        ActionKind::Ascend,
        ActionKind::Descend,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ActionKind::Takeoff => "TAKEOFF",
            ActionKind::Land => "LAND",
            ActionKind::Hover => "HOVER",
            ActionKind::MoveForward => "MOVE_FORWARD",
            ActionKind::TurnLeft => "TURN_LEFT",
            ActionKind::TurnRight => "TURN_RIGHT",
            ActionKind::Ascend => "ASCEND",
            ActionKind::Descend => "DESCEND",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown action kind {s:?}"))
    }
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Takeoff { .. } => ActionKind::Takeoff,
            Action::Land => ActionKind::Land,
            Action::Hover { .. } => ActionKind::Hover,
            Action::MoveForward { .. } => ActionKind::MoveForward,
            Action::TurnLeft { .. } => ActionKind::TurnLeft,
            Action::TurnRight { .. } => ActionKind::TurnRight,
            Action::Ascend { .. } => ActionKind::Ascend,
            Action::Descend { .. } => ActionKind::Descend,
        }
    }

    fn has_valid_parameter(&self) -> bool {
        match *self {
            Action::Land => true,
            Action::Hover { steps } => steps > 0,
            Action::Takeoff { alt: v }
            | Action::MoveForward { d: v }
            | Action::TurnLeft { theta: v }
            | Action::TurnRight { theta: v }
            | Action::Ascend { d: v }
            | Action::Descend { d: v } => v.is_finite() && v > 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorldError {
    #[error("collision with obstacle {0}")]
    Collision(String),
    #[error("action leaves the scene bounds")]
    OutOfBounds,
    #[error("{0} is not possible while landed")]
    InvalidFromGround(ActionKind),
    #[error("action parameter must be positive and finite")]
    InvalidParameter,
}

pub fn is_landed(pose: &Pose, scene: &Scene) -> bool {
    pose.position.z <= scene.ground() + GROUND_EPS
}

/// Kinematic successor of `pose` under `action`, ignoring obstacles and bounds.
pub fn integrate(pose: &Pose, action: &Action, ground: f64) -> Pose {
    let p = pose.position;
    match *action {
        Action::Takeoff { alt } => Pose::new(Vec3::new(p.x, p.y, ground + alt), pose.yaw),
        Action::Land => Pose::new(Vec3::new(p.x, p.y, ground), pose.yaw),
        Action::Hover { .. } => *pose,
        Action::MoveForward { d } => Pose::new(p + pose.heading() * d, pose.yaw),
        Action::TurnLeft { theta } => Pose::new(p, pose.yaw + theta),
        Action::TurnRight { theta } => Pose::new(p, pose.yaw - theta),
        Action::Ascend { d } => Pose::new(Vec3::new(p.x, p.y, p.z + d), pose.yaw),
        Action::Descend { d } => Pose::new(Vec3::new(p.x, p.y, p.z - d), pose.yaw),
    }
}

/// Distance the drone body travels when executing `action` from `pose`.
pub fn translation_distance(pose: &Pose, action: &Action, ground: f64) -> f64 {
    integrate(pose, action, ground)
        .position
        .distance(&pose.position)
}

fn within_bounds(bounds: &Aabb, p: &Vec3) -> bool {
    bounds.inflated(BOUNDS_EPS).contains(p)
}

/// Executes one action. Translations are straight-line sweeps checked against
/// every obstacle box inflated by `clearance`.
pub fn apply_action(
    pose: &Pose,
    action: &Action,
    scene: &Scene,
    clearance: f64,
) -> Result<Pose, WorldError> {
    if !action.has_valid_parameter() {
        return Err(WorldError::InvalidParameter);
    }
    let kind = action.kind();
    if is_landed(pose, scene)
        && !matches!(
            kind,
            ActionKind::Takeoff | ActionKind::Land | ActionKind::Hover
        )
    {
        return Err(WorldError::InvalidFromGround(kind));
    }
    let next = integrate(pose, action, scene.ground());
    if !within_bounds(&scene.bounds, &next.position) {
        return Err(WorldError::OutOfBounds);
    }
    if next.position != pose.position {
        for obs in scene.obstacles() {
            if obs
                .aabb
                .inflated(clearance)
                .intersects_segment(&pose.position, &next.position)
            {
                return Err(WorldError::Collision(obs.id.clone()));
            }
        }
    }
    Ok(next)
}
