//! World model: scene geometry, drone kinematics over the discrete action
//! space, and camera visibility.

mod camera;
mod geometry;
mod kinematics;
mod scene;

pub use camera::{
    direction_to_point, relative_direction, visible_objects, CameraModel, Sighting,
    OCCLUSION_SAMPLES,
};
pub use geometry::{normalize_angle, wrap_signed, Aabb, Vec3};
pub use kinematics::{
    apply_action, integrate, is_landed, translation_distance, Action, ActionKind, WorldError,
};
pub use scene::{validate_scene, Archetype, Pose, Scene, SceneObject, Violation, SCENE_SCHEMA};

/// Radius of the sphere standing in for the airframe, meters.
pub const DEFAULT_CLEARANCE: f64 = 0.3;
