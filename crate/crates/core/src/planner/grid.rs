use crate::world::{Aabb, Scene, Vec3};

/// Integer cell coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize, z: usize) -> Self {
        Self { x, y, z }
    }

    pub fn manhattan(&self, other: &Cell) -> usize {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y) + self.z.abs_diff(other.z)
    }
}

/// Boolean occupancy over a regular lattice. Cell `(i, j, k)` spans
/// `origin + [i, i+1) * resolution` per axis, so cell centers sit at
/// `bounds.min + index * resolution` for a rasterized scene.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub resolution: f64,
    pub dims: (usize, usize, usize),
    pub origin: Vec3,
    occupied: Vec<bool>,
}

impl OccupancyGrid {
    /// A grid with every cell free.
    pub fn empty(resolution: f64, dims: (usize, usize, usize), origin: Vec3) -> Self {
        assert!(resolution > 0.0, "resolution must be positive");
        Self {
            resolution,
            dims,
            origin,
            occupied: vec![false; dims.0 * dims.1 * dims.2],
        }
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    fn index(&self, c: &Cell) -> usize {
        (c.z * self.dims.1 + c.y) * self.dims.0 + c.x
    }

    pub fn contains(&self, c: &Cell) -> bool {
        c.x < self.dims.0 && c.y < self.dims.1 && c.z < self.dims.2
    }

    pub fn is_occupied(&self, c: &Cell) -> bool {
        self.occupied[self.index(c)]
    }

    pub fn is_free(&self, c: &Cell) -> bool {
        self.contains(c) && !self.is_occupied(c)
    }

    pub fn set_occupied(&mut self, c: &Cell, value: bool) {
        let i = self.index(c);
        self.occupied[i] = value;
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let (nx, ny, nz) = self.dims;
        (0..nz)
            .flat_map(move |z| (0..ny).flat_map(move |y| (0..nx).map(move |x| Cell::new(x, y, z))))
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|o| **o).count()
    }

    pub fn cell_box(&self, c: &Cell) -> Aabb {
        let r = self.resolution;
        let min = self.origin + Vec3::new(c.x as f64 * r, c.y as f64 * r, c.z as f64 * r);
        Aabb::new(min, min + Vec3::new(r, r, r))
    }

    pub fn center(&self, c: &Cell) -> Vec3 {
        self.cell_box(c).center()
    }

    /// Height of the lowest cell center.
    pub fn floor(&self) -> f64 {
        self.origin.z + self.resolution / 2.0
    }

    /// Cell whose center is nearest `p`, clamped into the grid.
    pub fn nearest_cell(&self, p: &Vec3) -> Cell {
        let idx = |v: f64, o: f64, n: usize| -> usize {
            let i = ((v - o) / self.resolution - 0.5).round();
            i.clamp(0.0, (n - 1) as f64) as usize
        };
        Cell::new(
            idx(p.x, self.origin.x, self.dims.0),
            idx(p.y, self.origin.y, self.dims.1),
            idx(p.z, self.origin.z, self.dims.2),
        )
    }

    /// Free cells adjacent through a face, in the fixed order +x, -x, +y, -y, +z, -z.
    pub fn neighbors(&self, c: &Cell) -> impl Iterator<Item = Cell> + '_ {
        let c = *c;
        const OFFSETS: [(i64, i64, i64); 6] = [
            (1, 0, 0),
            (-1, 0, 0),
            (0, 1, 0),
            (0, -1, 0),
            (0, 0, 1),
            (0, 0, -1),
        ];
        OFFSETS.into_iter().filter_map(move |(dx, dy, dz)| {
            let x = c.x as i64 + dx;
            let y = c.y as i64 + dy;
            let z = c.z as i64 + dz;
            if x < 0 || y < 0 || z < 0 {
                return None;
            }
            let n = Cell::new(x as usize, y as usize, z as usize);
            self.is_free(&n).then_some(n)
        })
    }
}

fn axis_span(
    lo: f64,
    hi: f64,
    origin: f64,
    res: f64,
    margin: f64,
    n: usize,
) -> std::ops::Range<usize> {
    let first = ((lo - margin - origin) / res).floor() as i64 - 1;
    let last = ((hi + margin - origin) / res).ceil() as i64 + 1;
    let first = first.clamp(0, n as i64) as usize;
    let last = last.clamp(0, n as i64) as usize;
    first..last
}

/// Rasterizes the scene's obstacles. A cell is occupied iff its box, grown
/// by `clearance` on every side, overlaps an obstacle box.
pub fn rasterize(scene: &Scene, resolution: f64, clearance: f64) -> OccupancyGrid {
    assert!(resolution > 0.0, "resolution must be positive");
    let extent = scene.bounds.size();
    let count = |e: f64| (e / resolution + 1e-9).floor() as usize + 1;
    let dims = (count(extent.x), count(extent.y), count(extent.z));
    let half = Vec3::new(resolution / 2.0, resolution / 2.0, resolution / 2.0);
    let mut grid = OccupancyGrid::empty(resolution, dims, scene.bounds.min - half);
    for obs in scene.obstacles() {
        let b = &obs.aabb;
        let xs = axis_span(
            b.min.x,
            b.max.x,
            grid.origin.x,
            resolution,
            clearance,
            dims.0,
        );
        let ys = axis_span(
            b.min.y,
            b.max.y,
            grid.origin.y,
            resolution,
            clearance,
            dims.1,
        );
        let zs = axis_span(
            b.min.z,
            b.max.z,
            grid.origin.z,
            resolution,
            clearance,
            dims.2,
        );
        for z in zs {
            for y in ys.clone() {
                for x in xs.clone() {
                    let c = Cell::new(x, y, z);
                    if !grid.is_occupied(&c) && grid.cell_box(&c).inflated(clearance).overlaps(b) {
                        grid.set_occupied(&c, true);
                    }
                }
            }
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::world::{Archetype, Pose, SceneObject};

    fn scene(obstacles: Vec<Aabb>) -> Scene {
        Scene {
            name: "g".into(),
            bounds: Aabb::new(Vec3::ZERO, Vec3::new(5.0, 4.0, 3.0)),
            objects: obstacles
                .into_iter()
                .enumerate()
                .map(|(i, aabb)| SceneObject {
                    id: format!("o{i}"),
                    label: "box".into(),
                    attributes: BTreeSet::new(),
                    aabb,
                    is_obstacle: true,
                })
                .collect(),
            start_pose: Pose::new(Vec3::ZERO, 0.0),
            archetype: Archetype::Warehouse,
        }
    }

    #[test]
    fn lattice_centers_on_bounds() {
        let g = rasterize(&scene(vec![]), 0.5, 0.3);
        assert_eq!(g.dims, (11, 9, 7));
        assert_eq!(g.center(&Cell::new(0, 0, 0)), Vec3::ZERO);
        assert_eq!(g.center(&Cell::new(10, 8, 6)), Vec3::new(5.0, 4.0, 3.0));
        assert_eq!(g.occupied_count(), 0);
        assert_eq!(
            g.nearest_cell(&Vec3::new(2.0, 1.1, 2.0)),
            Cell::new(4, 2, 4)
        );
    }

    #[test]
    fn obstacle_filling_bounds_occupies_all() {
        let s = scene(vec![Aabb::new(Vec3::ZERO, Vec3::new(5.0, 4.0, 3.0))]);
        let g = rasterize(&s, 0.5, 0.3);
        assert_eq!(g.occupied_count(), g.len());
    }

    #[test]
    fn neighbors_skip_occupied_and_edges() {
        let mut g = OccupancyGrid::empty(1.0, (3, 3, 3), Vec3::ZERO);
        g.set_occupied(&Cell::new(1, 0, 0), true);
        let n: Vec<_> = g.neighbors(&Cell::new(0, 0, 0)).collect();
        assert_eq!(n, vec![Cell::new(0, 1, 0), Cell::new(0, 0, 1)]);
    }
}
