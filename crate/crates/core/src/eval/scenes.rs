use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::rng::{derive_seed, seeded};
use crate::world::{Aabb, Archetype, Pose, Scene, SceneObject, Vec3};

/// Attribute colorings applied to landmarks.
pub const COLORS: [&str; 5] = ["red", "blue", "green", "yellow", "white"];

/// Landmarks placed per scene.
pub const LANDMARK_COUNT: usize = 10;

/// Farthest a landmark is placed from the start, horizontally.
const MAX_LANDMARK_RANGE: f64 = 17.0;
/// Keep-out radius around the start position.
const START_KEEP_OUT: f64 = 3.5;
/// Horizontal gap between a landmark and any structure.
const STRUCTURE_MARGIN: f64 = 0.6;
const LANDMARK_GAP: f64 = 0.5;

/// Landmark labels with footprint and height, meters.
type Landmark = (&'static str, f64, f64, f64);

const WAREHOUSE_LANDMARKS: &[Landmark] = &[
    ("pallet", 1.2, 1.0, 0.3),
    ("suitcase", 0.5, 0.3, 0.7),
    ("forklift", 1.2, 2.2, 2.0),
    ("bicycle", 1.7, 0.5, 1.0),
    ("barrel", 0.6, 0.6, 0.9),
    ("person", 0.5, 0.4, 1.7),
    ("box", 0.8, 0.8, 0.8),
    ("chair", 0.6, 0.6, 1.0),
];

const PARK_LANDMARKS: &[Landmark] = &[
    ("fountain", 3.0, 3.0, 1.2),
    ("bench", 1.8, 0.6, 0.9),
    ("statue", 1.0, 1.0, 2.5),
    ("umbrella", 1.5, 1.5, 2.2),
    ("picnic table", 2.0, 1.6, 0.8),
    ("bicycle", 1.7, 0.5, 1.0),
    ("trash can", 0.6, 0.6, 1.0),
    ("dog", 0.9, 0.3, 0.6),
];

const NEIGHBORHOOD_LANDMARKS: &[Landmark] = &[
    ("mailbox", 0.5, 0.4, 1.2),
    ("car", 4.2, 1.8, 1.5),
    ("trash can", 0.6, 0.6, 1.0),
    ("fire hydrant", 0.4, 0.4, 0.8),
    ("street lamp", 0.4, 0.4, 4.0),
    ("stop sign", 0.6, 0.2, 2.4),
    ("scooter", 1.2, 0.4, 1.0),
    ("truck", 2.2, 5.5, 2.8),
];

const OFFICE_LANDMARKS: &[Landmark] = &[
    ("printer", 0.8, 0.6, 1.0),
    ("chair", 0.6, 0.6, 1.0),
    ("filing cabinet", 0.5, 0.6, 1.3),
    ("potted plant", 0.5, 0.5, 1.2),
    ("whiteboard", 1.8, 0.2, 1.8),
    ("laptop", 0.35, 0.25, 0.3),
    ("cooler", 0.4, 0.4, 1.2),
    ("couch", 2.0, 0.9, 0.9),
];

fn landmarks(archetype: Archetype) -> &'static [Landmark] {
    match archetype {
        Archetype::Warehouse => WAREHOUSE_LANDMARKS,
        Archetype::Park => PARK_LANDMARKS,
        Archetype::Neighborhood => NEIGHBORHOOD_LANDMARKS,
        Archetype::Office => OFFICE_LANDMARKS,
    }
}

fn structure_label(archetype: Archetype) -> &'static str {
    match archetype {
        Archetype::Warehouse => "shelf",
        Archetype::Park => "tree",
        Archetype::Neighborhood => "house",
        Archetype::Office => "desk",
    }
}

/// Every label the generator can emit for `archetype`: the structural
/// obstacle label first, then the landmark labels.
pub fn archetype_vocabulary(archetype: Archetype) -> Vec<&'static str> {
    std::iter::once(structure_label(archetype))
        .chain(landmarks(archetype).iter().map(|l| l.0))
        .collect()
}

/// Column title used in result tables.
pub fn archetype_title(archetype: Archetype) -> &'static str {
    match archetype {
        Archetype::Warehouse => "Warehouse",
        Archetype::Park => "Park",
        Archetype::Neighborhood => "House Neighborhood",
        Archetype::Office => "Office",
    }
}

fn bounds(archetype: Archetype) -> Aabb {
    match archetype {
        Archetype::Warehouse => Aabb::new(Vec3::new(-14.0, -12.0, 0.0), Vec3::new(14.0, 12.0, 8.0)),
        Archetype::Park => Aabb::new(Vec3::new(-15.0, -15.0, 0.0), Vec3::new(15.0, 15.0, 12.0)),
        Archetype::Neighborhood => {
            Aabb::new(Vec3::new(-16.0, -13.0, 0.0), Vec3::new(16.0, 13.0, 10.0))
        }
        Archetype::Office => Aabb::new(Vec3::new(-10.0, -8.0, 0.0), Vec3::new(10.0, 8.0, 3.5)),
    }
}

fn footprint(x0: f64, y0: f64, x1: f64, y1: f64, h: f64) -> Aabb {
    Aabb::new(Vec3::new(x0, y0, 0.0), Vec3::new(x1, y1, h))
}

fn structures(archetype: Archetype, rng: &mut ChaCha8Rng) -> Vec<Aabb> {
    let mut out = Vec::new();
    match archetype {
        Archetype::Warehouse => {
            // shelving rows with a cross aisle through the middle
            for y in [-9.5, -5.5, 5.5, 9.5] {
                for (x0, x1) in [(-11.0, -1.5), (1.5, 11.0)] {
                    let j0 = rng.random_range(-0.5..0.5);
                    let j1 = rng.random_range(-0.5..0.5);
                    let h = rng.random_range(3.0..4.5);
                    out.push(footprint(x0 + j0, y - 0.6, x1 + j1, y + 0.6, h));
                }
            }
        }
        Archetype::Park => {
            let mut tries = 0;
            while out.len() < 12 && tries < 2000 {
                tries += 1;
                let x: f64 = rng.random_range(-13.5..13.5);
                let y: f64 = rng.random_range(-13.5..13.5);
                if (x * x + y * y).sqrt() < 5.0 {
                    continue;
                }
                let b = footprint(
                    x - 0.6,
                    y - 0.6,
                    x + 0.6,
                    y + 0.6,
                    rng.random_range(4.0..6.5),
                );
                if out.iter().any(|o: &Aabb| o.inflated(2.0).overlaps(&b)) {
                    continue;
                }
                out.push(b);
            }
        }
        Archetype::Neighborhood => {
            for (y0, y1) in [(7.0, 12.5), (-12.5, -7.0)] {
                for x in [-12.0, -4.0, 4.0, 12.0] {
                    let w = rng.random_range(2.5..3.2);
                    let h = rng.random_range(4.0..6.5);
                    out.push(footprint(x - w, y0, x + w, y1, h));
                }
            }
        }
        Archetype::Office => {
            for x in [-7.0, -3.5, 3.5, 7.0] {
                for y in [-5.0, -2.5, 2.5, 5.0] {
                    if rng.random_bool(0.15) {
                        continue;
                    }
                    out.push(footprint(x - 1.0, y - 0.5, x + 1.0, y + 0.5, 0.75));
                }
            }
        }
    }
    out
}

fn overlaps_xy(a: &Aabb, b: &Aabb) -> bool {
    a.min.x < b.max.x && b.min.x < a.max.x && a.min.y < b.max.y && b.min.y < a.max.y
}

fn id_for(label: &str, n: usize) -> String {
    format!("{}-{n}", label.replace(' ', "-"))
}

/// Procedural scene for `archetype`. The layout depends only on
/// `(archetype, seed)`; the drone starts landed at the origin facing +x.
pub fn generate_scene(archetype: Archetype, seed: u64) -> Scene {
    let mut rng = seeded(derive_seed(seed, archetype as u64));
    let bounds = bounds(archetype);
    let start = Vec3::ZERO;
    let structure = structure_label(archetype);
    let blocks = structures(archetype, &mut rng);
    let mut objects: Vec<SceneObject> = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| SceneObject {
            id: id_for(structure, i),
            label: structure.into(),
            attributes: BTreeSet::new(),
            aabb: *b,
            is_obstacle: true,
        })
        .collect();

    let pool = landmarks(archetype);
    let first = rng.random_range(0..pool.len());
    let mut colors = COLORS;
    colors.shuffle(&mut rng);
    let mut placed: Vec<Aabb> = Vec::new();
    let mut tries = 0;
    while placed.len() < LANDMARK_COUNT && tries < 20_000 {
        tries += 1;
        let (label, w, d, h) = pool[(first + placed.len()) % pool.len()];
        let (w, d) = if rng.random_bool(0.5) { (w, d) } else { (d, w) };
        let x = rng.random_range(bounds.min.x + w..bounds.max.x - w);
        let y = rng.random_range(bounds.min.y + d..bounds.max.y - d);
        let r = (x * x + y * y).sqrt();
        if !(START_KEEP_OUT..=MAX_LANDMARK_RANGE).contains(&r) {
            continue;
        }
        let b = footprint(
            x - w / 2.0,
            y - d / 2.0,
            x + w / 2.0,
            y + d / 2.0,
            h.min(bounds.max.z - 0.5),
        );
        if blocks
            .iter()
            .any(|s| overlaps_xy(&s.inflated(STRUCTURE_MARGIN), &b))
            || placed
                .iter()
                .any(|p| overlaps_xy(&p.inflated(LANDMARK_GAP), &b))
        {
            continue;
        }
        let color = colors[placed.len() % colors.len()];
        objects.push(SceneObject {
            id: id_for(label, placed.len()),
            label: label.into(),
            attributes: BTreeSet::from([color.to_string()]),
            aabb: b,
            is_obstacle: false,
        });
        placed.push(b);
    }

    Scene {
        name: format!("{}-{seed}", archetype.name()),
        bounds,
        objects,
        start_pose: Pose::new(start, 0.0),
        archetype,
    }
}
