use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::profile::FidelityProfile;
use crate::language::{ObjectRef, RelationKind};
use crate::rng::{derive_seed, seeded};
use crate::world::{visible_objects, wrap_signed, CameraModel, Pose, Scene, SceneObject, Vec3};

/// Center-to-center distance under which two objects count as near.
pub const NEAR_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionQuery {
    #[serde(rename = "ref")]
    pub target: ObjectRef,
}

impl DetectionQuery {
    pub fn new(target: ObjectRef) -> Self {
        Self { target }
    }
}

/// A localized match for a query, relative to the drone pose it was taken
/// from. `bearing` is relative to the heading; `elevation` is from the
/// horizontal plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detection {
    pub object_id: String,
    pub label: String,
    pub bearing: f64,
    pub elevation: f64,
    pub range: f64,
    pub confidence: f64,
}

impl Detection {
    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.confidence)
            && self.range > 0.0
            && self.range.is_finite()
            && self.bearing.is_finite()
            && self.elevation.is_finite()
    }
}

fn has_attributes(object: &SceneObject, target: &ObjectRef) -> bool {
    object.label == target.label && target.attributes.is_subset(&object.attributes)
}

/// Ground-truth relation test between `object` and `anchor` as seen from `pose`.
pub fn relation_holds(
    kind: RelationKind,
    object: &SceneObject,
    anchor: &SceneObject,
    pose: &Pose,
) -> bool {
    let offset: Vec3 = object.center() - anchor.center();
    let heading = pose.heading();
    match kind {
        RelationKind::Near => offset.norm() <= NEAR_THRESHOLD,
        RelationKind::LeftOf => heading.x * offset.y - heading.y * offset.x > 0.0,
        RelationKind::RightOf => heading.x * offset.y - heading.y * offset.x < 0.0,
        RelationKind::Behind => heading.dot(&offset) > 0.0,
        RelationKind::InFrontOf => heading.dot(&offset) < 0.0,
    }
}

/// Whether a scene object satisfies a reference: label, every attribute, and
/// the relation against at least one other object matching the anchor.
pub fn matches_ref(object: &SceneObject, target: &ObjectRef, scene: &Scene, pose: &Pose) -> bool {
    if !has_attributes(object, target) {
        return false;
    }
    match &target.relation {
        None => true,
        Some(rel) => scene.objects.iter().any(|anchor| {
            anchor.id != object.id
                && has_attributes(anchor, &rel.anchor)
                && relation_holds(rel.kind, object, anchor, pose)
        }),
    }
}

/// Simulated detector over the ground-truth visibility set. Each query draws
/// from its own seeded stream so results depend only on `(inputs, seed)`.
pub fn detect(
    pose: &Pose,
    camera: &CameraModel,
    scene: &Scene,
    queries: &[DetectionQuery],
    profile: &FidelityProfile,
    seed: u64,
) -> Vec<Detection> {
    let visible = visible_objects(pose, camera, scene);
    let mut out = Vec::new();
    for (qi, query) in queries.iter().enumerate() {
        let target = &query.target;
        if !profile.vocabulary.accepts(&target.label) {
            continue;
        }
        let mut rng = seeded(derive_seed(seed, qi as u64));
        let sigma = profile.localization_sigma;
        for seen in visible
            .iter()
            .filter(|v| matches_ref(v.object, target, scene, pose))
        {
            let miss: f64 = rng.random();
            let db: f64 = rng.sample(StandardNormal);
            let de: f64 = rng.sample(StandardNormal);
            let conf: f64 = rng.random();
            if miss < profile.miss_rate {
                continue;
            }
            out.push(Detection {
                object_id: seen.object.id.clone(),
                label: seen.object.label.clone(),
                bearing: wrap_signed(seen.bearing + sigma * db),
                elevation: (seen.elevation + sigma * de)
                    .clamp(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
                range: seen.range,
                confidence: 1.0 - profile.miss_rate * conf,
            });
        }
        let fp: f64 = rng.random();
        if fp < profile.false_positive_rate {
            let half_h = camera.horizontal_fov / 2.0;
            let half_v = camera.vertical_fov / 2.0;
            let bearing = rng.random_range(-half_h..=half_h);
            let elevation = (camera.pitch + rng.random_range(-half_v..=half_v))
                .clamp(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
            let range = rng.random_range(1.0..=camera.max_range.max(1.0));
            out.push(Detection {
                object_id: format!("spurious-{qi}"),
                label: target.label.clone(),
                bearing,
                elevation,
                range,
                confidence: 0.35 + 0.3 * rng.random::<f64>(),
            });
        }
    }
    out
}
