//! Geometric predicates shared by the perturbation, camera and render code.
//!
//! Everything here is defined against brute force: the per-object BVHs in
//! [`SceneIndex`] only prune work and never change an answer.

mod bvh;
mod index;
mod support;
mod triangle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Vec3;

pub use bvh::Bvh;
pub use index::{meshes_intersect, ray_first_hit, ObjectGeom, SceneIndex};
pub use support::drop_to_support;
pub use triangle::{ray_triangle, segment_triangle, triangles_overlap};

/// Separation below which two surfaces count as touching (and intersecting).
pub const TOUCH_EPSILON: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    /// Inverted box that any point grows into.
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Aabb::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn max_extent(&self) -> f64 {
        self.extent().max()
    }

    pub fn overlaps(&self, other: &Aabb, eps: f64) -> bool {
        (0..3).all(|k| self.min[k] <= other.max[k] + eps && other.min[k] <= self.max[k] + eps)
    }

    pub fn overlaps_xy(&self, other: &Aabb) -> bool {
        (0..2).all(|k| self.min[k] <= other.max[k] && other.min[k] <= self.max[k])
    }

    /// Parametric entry/exit of a ray against the box, clipped to `[0, t_max]`.
    pub fn ray_interval(&self, origin: &Vec3, inv_dir: &Vec3, t_max: f64) -> Option<(f64, f64)> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for k in 0..3 {
            if inv_dir[k].is_infinite() {
                if origin[k] < self.min[k] || origin[k] > self.max[k] {
                    return None;
                }
                continue;
            }
            let a = (self.min[k] - origin[k]) * inv_dir[k];
            let b = (self.max[k] - origin[k]) * inv_dir[k];
            let (near, far) = if a <= b { (a, b) } else { (b, a) };
            t0 = t0.max(near);
            t1 = t1.min(far);
        }
        (t0 <= t1).then_some((t0, t1))
    }
}

/// Half-line with a unit direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    /// Normalizes `direction`; fails for a zero or non-finite direction.
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Self> {
        let norm = direction.norm();
        if !(norm > 0.0 && norm.is_finite()) || !origin.iter().all(|v| v.is_finite()) {
            return Err(Error::Schema(format!("invalid ray direction {direction:?}")));
        }
        Ok(Ray {
            origin,
            direction: direction / norm,
        })
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }

    pub(crate) fn inv_direction(&self) -> Vec3 {
        self.direction.map(|d| 1.0 / d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HitRecord {
    pub object_id: String,
    pub distance: f64,
    pub point: Vec3,
}

/// Pixel rectangle `[min_x, max_x) × [min_y, max_y)`, top-left origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScreenBox {
    pub min_x: u32,
    pub min_y: u32,
    pub max_x: u32,
    pub max_y: u32,
}

impl ScreenBox {
    pub fn new(min_x: u32, min_y: u32, max_x: u32, max_y: u32) -> Result<Self> {
        if min_x > max_x || min_y > max_y {
            return Err(Error::Schema(format!(
                "screen box ({min_x},{min_y},{max_x},{max_y}) has min > max"
            )));
        }
        Ok(ScreenBox {
            min_x,
            min_y,
            max_x,
            max_y,
        })
    }

    pub fn width(&self) -> u32 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> u32 {
        self.max_y - self.min_y
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn is_within(&self, image_size: u32) -> bool {
        self.min_x <= self.max_x && self.min_y <= self.max_y && self.max_x <= image_size && self.max_y <= image_size
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        (self.min_x..self.max_x).contains(&x) && (self.min_y..self.max_y).contains(&y)
    }
}

/// Exact pixel area of the union of `boxes`.
///
/// Sweeps the compressed x coordinates and merges the y intervals of the
/// boxes spanning each slab.
pub fn box_union_area(boxes: &[ScreenBox], image_size: u32) -> u64 {
    debug_assert!(boxes.iter().all(|b| b.is_within(image_size)));
    let boxes: Vec<&ScreenBox> = boxes.iter().filter(|b| b.area() > 0).collect();
    let mut xs: Vec<u32> = boxes.iter().flat_map(|b| [b.min_x, b.max_x]).collect();
    xs.sort_unstable();
    xs.dedup();

    let mut total = 0u64;
    let mut spans: Vec<(u32, u32)> = Vec::with_capacity(boxes.len());
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        spans.clear();
        spans.extend(
            boxes
                .iter()
                .filter(|b| b.min_x <= x0 && b.max_x >= x1)
                .map(|b| (b.min_y, b.max_y)),
        );
        spans.sort_unstable();
        let mut covered = 0u64;
        let mut cur: Option<(u32, u32)> = None;
        for &(y0, y1) in &spans {
            match cur {
                Some((c0, c1)) if y0 <= c1 => cur = Some((c0, c1.max(y1))),
                Some((c0, c1)) => {
                    covered += (c1 - c0) as u64;
                    cur = Some((y0, y1));
                }
                None => cur = Some((y0, y1)),
            }
        }
        if let Some((c0, c1)) = cur {
            covered += (c1 - c0) as u64;
        }
        total += covered * (x1 - x0) as u64;
    }
    total
}
