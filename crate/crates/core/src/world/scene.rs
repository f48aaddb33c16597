use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::geometry::{normalize_angle, Aabb, Vec3};
use super::DEFAULT_CLEARANCE;
use crate::Error;

pub const SCENE_SCHEMA: &str = "scene/1";

/// Drone state: position plus heading. Yaw is kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub position: Vec3,
    pub yaw: f64,
}

impl Pose {
    pub fn new(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            yaw: normalize_angle(yaw),
        }
    }

    /// Unit heading vector in the horizontal plane.
    pub fn heading(&self) -> Vec3 {
        Vec3::new(self.yaw.cos(), self.yaw.sin(), 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub attributes: BTreeSet<String>,
    pub aabb: Aabb,
    pub is_obstacle: bool,
}

impl SceneObject {
    pub fn center(&self) -> Vec3 {
        self.aabb.center()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    Warehouse,
    Park,
    Neighborhood,
    Office,
}

impl Archetype {
    pub const ALL: [Archetype; 4] = [
        Archetype::Warehouse,
        Archetype::Park,
        Archetype::Neighborhood,
        Archetype::Office,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Archetype::Warehouse => "warehouse",
            Archetype::Park => "park",
            Archetype::Neighborhood => "neighborhood",
            Archetype::Office => "office",
        }
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Archetype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Archetype::ALL
            .into_iter()
            .find(|a| a.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownArchetype(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub name: String,
    pub bounds: Aabb,
    pub objects: Vec<SceneObject>,
    pub start_pose: Pose,
    pub archetype: Archetype,
}

#[derive(Serialize)]
struct SceneDocument<'a> {
    schema: &'static str,
    #[serde(flatten)]
    scene: &'a Scene,
}

impl Scene {
    pub fn ground(&self) -> f64 {
        self.bounds.min.z
    }

    pub fn obstacles(&self) -> impl Iterator<Item = &SceneObject> {
        self.objects.iter().filter(|o| o.is_obstacle)
    }

    pub fn object(&self, id: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Distinct object labels, sorted.
    pub fn vocabulary(&self) -> Vec<String> {
        self.objects
            .iter()
            .map(|o| o.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Parses a `scene/1` JSON document.
    pub fn from_json(text: &str) -> Result<Scene, Error> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::Schema("scene document must be a JSON object".into()))?;
        match obj.remove("schema") {
            Some(serde_json::Value::String(s)) if s == SCENE_SCHEMA => {}
            Some(other) => {
                return Err(Error::Schema(format!(
                    "unsupported scene schema {other}, expected \"{SCENE_SCHEMA}\""
                )))
            }
            None => return Err(Error::Schema("scene document has no schema field".into())),
        }
        let mut scene: Scene = serde_json::from_value(value)?;
        scene.start_pose.yaw = normalize_angle(scene.start_pose.yaw);
        Ok(scene)
    }

    /// Hex SHA-256 of the `scene/1` document.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SceneDocument {
            schema: SCENE_SCHEMA,
            scene: self,
        })
        .expect("scene serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonFiniteGeometry(String),
    InvertedBox(String),
    EmptyLabel(String),
    ObjectOutOfBounds(String),
    DuplicateId(String),
    StartOutOfBounds,
    StartInCollision(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFiniteGeometry(id) => write!(f, "object {id}: non-finite coordinates"),
            Violation::InvertedBox(id) => write!(f, "object {id}: min exceeds max"),
            Violation::EmptyLabel(id) => write!(f, "object {id}: empty label"),
            Violation::ObjectOutOfBounds(id) => write!(f, "object {id}: box leaves scene bounds"),
            Violation::DuplicateId(id) => write!(f, "duplicate object id {id}"),
            Violation::StartOutOfBounds => write!(f, "start pose outside scene bounds"),
            Violation::StartInCollision(id) => write!(f, "start pose collides with {id}"),
        }
    }
}

/// Lists every broken scene invariant; empty means the scene is well formed.
/// The start pose is checked against the default clearance radius.
pub fn validate_scene(scene: &Scene) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for obj in &scene.objects {
        let count = seen.entry(obj.id.as_str()).or_default();
        *count += 1;
        if *count > 1 {
            out.push(Violation::DuplicateId(obj.id.clone()));
        }
        if obj.label.trim().is_empty() {
            out.push(Violation::EmptyLabel(obj.id.clone()));
        }
        if !obj.aabb.min.is_finite() || !obj.aabb.max.is_finite() {
            out.push(Violation::NonFiniteGeometry(obj.id.clone()));
            continue;
        }
        if !obj.aabb.is_well_formed() {
            out.push(Violation::InvertedBox(obj.id.clone()));
        } else if !scene.bounds.contains_box(&obj.aabb) {
            out.push(Violation::ObjectOutOfBounds(obj.id.clone()));
        }
    }
    let start = &scene.start_pose.position;
    if !start.is_finite() || !scene.bounds.contains(start) {
        out.push(Violation::StartOutOfBounds);
    } else {
        for obs in scene.obstacles() {
            if obs.aabb.is_well_formed() && obs.aabb.intersects_sphere(start, DEFAULT_CLEARANCE) {
                out.push(Violation::StartInCollision(obs.id.clone()));
            }
        }
    }
    out
}
