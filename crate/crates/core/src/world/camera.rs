use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::geometry::{wrap_signed, Vec3};
use super::scene::{Pose, Scene, SceneObject};

/// Number of points sampled along each camera ray for the occlusion test.
pub const OCCLUSION_SAMPLES: usize = 16;

/// Forward-down camera rigidly attached to the drone body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraModel {
    pub horizontal_fov: f64,
    pub vertical_fov: f64,
    pub max_range: f64,
    /// Optical axis tilt below the horizon; negative looks down.
    pub pitch: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            horizontal_fov: PI / 2.0,
            vertical_fov: 2.0 * PI / 3.0,
            max_range: 20.0,
            pitch: -PI / 4.0,
        }
    }
}

impl CameraModel {
    pub fn is_valid(&self) -> bool {
        self.horizontal_fov > 0.0
            && self.horizontal_fov < PI
            && self.vertical_fov > 0.0
            && self.vertical_fov < PI
            && self.max_range > 0.0
            && self.pitch.is_finite()
    }

    /// True when the relative direction lies inside the frustum.
    pub fn in_frustum(&self, bearing: f64, elevation: f64, range: f64) -> bool {
        range > 0.0
            && range <= self.max_range
            && bearing.abs() <= self.horizontal_fov / 2.0
            && (elevation - self.pitch).abs() <= self.vertical_fov / 2.0
    }
}

/// An object seen from a pose. `bearing` is relative to the drone heading
/// (positive to the left); `elevation` is measured from the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sighting<'a> {
    pub object: &'a SceneObject,
    pub bearing: f64,
    pub elevation: f64,
    pub range: f64,
}

/// Bearing, elevation, range of `target` as seen from `pose`.
pub fn relative_direction(pose: &Pose, target: &Vec3) -> (f64, f64, f64) {
    let d = *target - pose.position;
    let horizontal = d.horizontal_norm();
    let bearing = if horizontal > 0.0 {
        wrap_signed(d.y.atan2(d.x) - pose.yaw)
    } else {
        0.0
    };
    (bearing, d.z.atan2(horizontal), d.norm())
}

/// Inverse of [`relative_direction`].
pub fn direction_to_point(pose: &Pose, bearing: f64, elevation: f64, range: f64) -> Vec3 {
    let heading = pose.yaw + bearing;
    let horizontal = range * elevation.cos();
    pose.position
        + Vec3::new(
            horizontal * heading.cos(),
            horizontal * heading.sin(),
            range * elevation.sin(),
        )
}

fn ray_blocked(scene: &Scene, from: &Vec3, to: &Vec3, target_id: &str) -> bool {
    (0..OCCLUSION_SAMPLES).any(|i| {
        let t = (i as f64 + 0.5) / OCCLUSION_SAMPLES as f64;
        let p = from.lerp(to, t);
        scene
            .obstacles()
            .any(|o| o.id != target_id && o.aabb.contains_strict(&p))
    })
}

/// Objects whose box center is inside the camera frustum and not hidden
/// behind an obstacle, nearest first (ties broken by id).
pub fn visible_objects<'a>(
    pose: &Pose,
    camera: &CameraModel,
    scene: &'a Scene,
) -> Vec<Sighting<'a>> {
    let mut seen: Vec<Sighting<'a>> = scene
        .objects
        .iter()
        .filter_map(|object| {
            let center = object.center();
            let (bearing, elevation, range) = relative_direction(pose, &center);
            if !camera.in_frustum(bearing, elevation, range) {
                return None;
            }
            if ray_blocked(scene, &pose.position, &center, &object.id) {
                return None;
            }
            Some(Sighting {
                object,
                bearing,
                elevation,
                range,
            })
        })
        .collect();
    seen.sort_by(|a, b| {
        a.range
            .total_cmp(&b.range)
            .then_with(|| a.object.id.cmp(&b.object.id))
    });
    seen
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::world::geometry::Aabb;
    use crate::world::scene::Archetype;

    fn obj(id: &str, center: Vec3, half: f64, obstacle: bool) -> SceneObject {
        let h = Vec3::new(half, half, half);
        SceneObject {
            id: id.into(),
            label: id.into(),
            attributes: BTreeSet::new(),
            aabb: Aabb::new(center - h, center + h),
            is_obstacle: obstacle,
        }
    }

    fn scene(objects: Vec<SceneObject>) -> Scene {
        Scene {
            name: "cam".into(),
            bounds: Aabb::new(Vec3::new(-20.0, -20.0, 0.0), Vec3::new(20.0, 20.0, 10.0)),
            objects,
            start_pose: Pose::new(Vec3::ZERO, 0.0),
            archetype: Archetype::Park,
        }
    }

    fn camera() -> CameraModel {
        CameraModel {
            max_range: 10.0,
            ..CameraModel::default()
        }
    }

    #[test]
    fn object_straight_ahead_is_seen() {
        let s = scene(vec![obj("ball", Vec3::new(1.0, 0.0, 2.0), 0.1, false)]);
        let pose = Pose::new(Vec3::new(0.0, 0.0, 2.0), 0.0);
        let seen = visible_objects(&pose, &camera(), &s);
        assert_eq!(seen.len(), 1);
        assert!((seen[0].range - 1.0).abs() < 1e-12);
        assert!(seen[0].bearing.abs() < 1e-12);
    }

    #[test]
    fn object_behind_is_not_seen() {
        let s = scene(vec![obj("ball", Vec3::new(-3.0, 0.0, 1.0), 0.1, false)]);
        let pose = Pose::new(Vec3::new(0.0, 0.0, 2.0), 0.0);
        assert!(visible_objects(&pose, &camera(), &s).is_empty());
    }

    #[test]
    fn ordering_by_range_then_id() {
        let s = scene(vec![
            obj("b", Vec3::new(4.0, 1.0, 1.0), 0.1, false),
            obj("a", Vec3::new(4.0, -1.0, 1.0), 0.1, false),
            obj("c", Vec3::new(2.0, 0.0, 1.0), 0.1, false),
        ]);
        let pose = Pose::new(Vec3::new(0.0, 0.0, 2.0), 0.0);
        let ids: Vec<_> = visible_objects(&pose, &camera(), &s)
            .iter()
            .map(|v| v.object.id.as_str())
            .collect();
        assert_eq!(ids, ["c", "a", "b"]);
    }

    #[test]
    fn direction_round_trip() {
        let pose = Pose::new(Vec3::new(1.0, 2.0, 3.0), 0.9);
        let target = Vec3::new(-4.0, 5.5, 0.5);
        let (b, e, r) = relative_direction(&pose, &target);
        let back = direction_to_point(&pose, b, e, r);
        assert!(back.distance(&target) < 1e-9);
    }
}
