use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// A point or displacement in world coordinates, meters. `z` is up.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &Vec3) -> f64 {
        (*self - *other).norm()
    }

    pub fn horizontal_norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Point on the segment `self -> other` at parameter `t`.
    pub fn lerp(&self, other: &Vec3, t: f64) -> Vec3 {
        *self + (*other - *self) * t
    }

    fn axis(&self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

/// Axis-aligned box. Boundaries are treated as touching, not overlapping:
/// overlap and containment tests against obstacles use open interiors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub const fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn is_well_formed(&self) -> bool {
        self.min.is_finite()
            && self.max.is_finite()
            && self.min.x <= self.max.x
            && self.min.y <= self.max.y
            && self.min.z <= self.max.z
    }

    pub fn center(&self) -> Vec3 {
        self.min.lerp(&self.max, 0.5)
    }

    pub fn size(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn inflated(&self, margin: f64) -> Aabb {
        let m = Vec3::new(margin, margin, margin);
        Aabb::new(self.min - m, self.max + m)
    }

    /// Closed containment, used for bounds checks.
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p.axis(i) >= self.min.axis(i) && p.axis(i) <= self.max.axis(i))
    }

    /// Strict containment, used for occupancy checks.
    pub fn contains_strict(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p.axis(i) > self.min.axis(i) && p.axis(i) < self.max.axis(i))
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.contains(&other.min) && self.contains(&other.max)
    }

    /// True when the interiors of the two boxes overlap.
    pub fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|i| self.min.axis(i) < other.max.axis(i) && other.min.axis(i) < self.max.axis(i))
    }

    /// Squared distance from `p` to the closest point of the box (zero inside).
    pub fn distance_sq(&self, p: &Vec3) -> f64 {
        (0..3)
            .map(|i| {
                let v = p.axis(i);
                let d = if v < self.min.axis(i) {
                    self.min.axis(i) - v
                } else if v > self.max.axis(i) {
                    v - self.max.axis(i)
                } else {
                    0.0
                };
                d * d
            })
            .sum()
    }

    /// True when the sphere's interior overlaps the box interior.
    pub fn intersects_sphere(&self, center: &Vec3, radius: f64) -> bool {
        self.distance_sq(center) < radius * radius
    }

    /// Slab test against the open box interior for the segment `a -> b`.
    pub fn intersects_segment(&self, a: &Vec3, b: &Vec3) -> bool {
        let d = *b - *a;
        let mut t_enter = f64::NEG_INFINITY;
        let mut t_exit = f64::INFINITY;
        for i in 0..3 {
            let (p, dir) = (a.axis(i), d.axis(i));
            let (lo, hi) = (self.min.axis(i), self.max.axis(i));
            if dir.abs() < 1e-12 {
                if p <= lo || p >= hi {
                    return false;
                }
                continue;
            }
            let (t1, t2) = ((lo - p) / dir, (hi - p) / dir);
            let (near, far) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            t_enter = t_enter.max(near);
            t_exit = t_exit.min(far);
        }
        t_enter < t_exit && t_exit > 0.0 && t_enter < 1.0
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let wrapped = theta.rem_euclid(tau);
    if wrapped >= tau {
        0.0
    } else {
        wrapped
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_signed(theta: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let w = normalize_angle(theta);
    if w > pi {
        w - std::f64::consts::TAU
    } else {
        w
    }
}
