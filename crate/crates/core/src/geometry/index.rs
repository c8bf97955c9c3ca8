use std::collections::HashMap;
use std::sync::Arc;

use super::bvh::Bvh;
use super::triangle::segment_triangle;
use super::{Aabb, HitRecord, Ray, TOUCH_EPSILON};
use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::scene::Scene;

/// World-space geometry of one object.
#[derive(Debug)]
pub struct ObjectGeom {
    pub id: String,
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[Vec3; 3]>,
    pub aabb: Aabb,
    bvh: Bvh,
}

// Directions for inside tests; skewed so they rarely graze axis-aligned edges.
const PARITY_DIRECTIONS: [[f64; 3]; 3] = [
    [0.5345224838248488, 0.6172133998483676, 0.5773502691896258],
    [-0.6311451901050766, 0.4417329302553209, 0.6377448018811018],
    [0.2298918345712871, -0.7325410098241323, 0.6407362843918213],
];

impl ObjectGeom {
    pub fn build(scene: &Scene, id: &str) -> Result<Self> {
        let obj = scene.object(id)?;
        let mesh = scene.mesh_of(obj);
        let vertices: Vec<Vec3> = mesh.vertices.iter().map(|v| obj.pose.transform_point(v)).collect();
        let triangles: Vec<[Vec3; 3]> = mesh
            .triangles
            .iter()
            .map(|t| [vertices[t[0] as usize], vertices[t[1] as usize], vertices[t[2] as usize]])
            .collect();
        let aabb = Aabb::from_points(vertices.iter());
        let bvh = Bvh::build(&triangles);
        Ok(ObjectGeom {
            id: id.to_string(),
            vertices,
            triangles,
            aabb,
            bvh,
        })
    }

    /// Copy moved rigidly by `offset`.
    pub fn translated(&self, offset: &Vec3) -> ObjectGeom {
        ObjectGeom {
            id: self.id.clone(),
            vertices: self.vertices.iter().map(|v| v + offset).collect(),
            triangles: self.triangles.iter().map(|t| t.map(|v| v + offset)).collect(),
            aabb: Aabb {
                min: self.aabb.min + offset,
                max: self.aabb.max + offset,
            },
            bvh: self.bvh.translated(offset),
        }
    }

    pub fn closest_hit(&self, ray: &Ray, t_max: f64) -> Option<f64> {
        let inv = ray.inv_direction();
        self.aabb.ray_interval(&ray.origin, &inv, t_max)?;
        self.bvh
            .closest_hit(&self.triangles, &ray.origin, &ray.direction, &inv, t_max)
            .map(|(t, _)| t)
    }

    /// Parity test against the closed surface, majority vote over three rays.
    pub fn contains_point(&self, p: &Vec3) -> bool {
        if !self.aabb.overlaps(&Aabb { min: *p, max: *p }, 0.0) {
            return false;
        }
        let votes = PARITY_DIRECTIONS
            .iter()
            .filter(|d| {
                let dir = Vec3::from(**d);
                let inv = dir.map(|c| 1.0 / c);
                let mut count = 0usize;
                self.bvh.for_each_hit(&self.triangles, p, &dir, &inv, |t| {
                    if t > 0.0 {
                        count += 1;
                    }
                });
                count % 2 == 1
            })
            .count();
        votes >= 2
    }

    /// Surfaces touch or cross, or one mesh encloses the other.
    pub fn intersects(&self, other: &ObjectGeom) -> bool {
        if !self.aabb.overlaps(&other.aabb, TOUCH_EPSILON) {
            return false;
        }
        let mut hit = false;
        self.bvh
            .overlapping_pairs(&self.triangles, &other.bvh, &other.triangles, TOUCH_EPSILON, |_, _| {
                hit = true;
                false
            });
        hit || self.vertices.first().is_some_and(|v| other.contains_point(v))
            || other.vertices.first().is_some_and(|v| self.contains_point(v))
    }

    /// Points where the two surfaces cross, plus vertices of either mesh
    /// lying inside the other.
    pub fn contact_points(&self, other: &ObjectGeom) -> Vec<Vec3> {
        let mut points = Vec::new();
        self.bvh
            .overlapping_pairs(&self.triangles, &other.bvh, &other.triangles, TOUCH_EPSILON, |i, j| {
                let a = &self.triangles[i as usize];
                let b = &other.triangles[j as usize];
                for (s, t) in [(a, b), (b, a)] {
                    for k in 0..3 {
                        if let Some(p) = segment_triangle(&s[k], &s[(k + 1) % 3], t) {
                            points.push(p);
                        }
                    }
                }
                true
            });
        points.extend(self.vertices.iter().filter(|v| other.contains_point(v)));
        points.extend(other.vertices.iter().filter(|v| self.contains_point(v)));
        points
    }
}

/// Per-object world geometry for a scene at one set of poses.
///
/// Cloning is cheap. After changing poses, call [`SceneIndex::update`] for the
/// objects that moved.
#[derive(Clone, Debug)]
pub struct SceneIndex {
    entries: Vec<Arc<ObjectGeom>>,
    by_id: HashMap<String, usize>,
}

impl SceneIndex {
    pub fn build(scene: &Scene) -> Result<Self> {
        let entries = scene
            .objects()
            .iter()
            .map(|o| ObjectGeom::build(scene, &o.id).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        let by_id = entries.iter().enumerate().map(|(i, e)| (e.id.clone(), i)).collect();
        Ok(SceneIndex { entries, by_id })
    }

    pub fn update(&mut self, scene: &Scene, ids: &[String]) -> Result<()> {
        for id in ids {
            let i = *self.by_id.get(id).ok_or_else(|| Error::UnknownObject(id.clone()))?;
            self.entries[i] = Arc::new(ObjectGeom::build(scene, id)?);
        }
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = &ObjectGeom> {
        self.entries.iter().map(|e| e.as_ref())
    }

    pub fn get(&self, id: &str) -> Result<&ObjectGeom> {
        self.by_id
            .get(id)
            .map(|&i| self.entries[i].as_ref())
            .ok_or_else(|| Error::UnknownObject(id.to_string()))
    }

    /// Nearest hit over objects accepted by `include`; ties broken by id.
    pub fn first_hit_where(&self, ray: &Ray, t_max: f64, include: impl Fn(&str) -> bool) -> Option<HitRecord> {
        let mut best: Option<(f64, &str)> = None;
        let mut limit = t_max;
        for e in &self.entries {
            if !include(&e.id) {
                continue;
            }
            if let Some(t) = e.closest_hit(ray, limit) {
                let better = match best {
                    None => true,
                    Some((bt, bid)) => t < bt || (t == bt && e.id.as_str() < bid),
                };
                if better {
                    best = Some((t, &e.id));
                    limit = t;
                }
            }
        }
        best.map(|(t, id)| HitRecord {
            object_id: id.to_string(),
            distance: t,
            point: ray.at(t),
        })
    }

    /// First pair `(member, other)` where a member of `group` intersects an
    /// object outside it.
    pub fn group_collision(&self, group: &[String]) -> Result<Option<(String, String)>> {
        for member in group {
            let g = self.get(member)?;
            for e in &self.entries {
                if group.contains(&e.id) {
                    continue;
                }
                if g.intersects(e) {
                    return Ok(Some((member.clone(), e.id.clone())));
                }
            }
        }
        Ok(None)
    }

    /// Objects outside `exclude` that `id` intersects, in scene order.
    pub fn intersecting(&self, id: &str, exclude: &[String]) -> Result<Vec<String>> {
        let g = self.get(id)?;
        Ok(self
            .entries
            .iter()
            .filter(|e| e.id != id && !exclude.contains(&e.id) && g.intersects(e))
            .map(|e| e.id.clone())
            .collect())
    }
}

/// Nearest intersection of `ray` with any object, ties broken by object id.
pub fn ray_first_hit(index: &SceneIndex, ray: &Ray) -> Option<HitRecord> {
    index.first_hit_where(ray, f64::INFINITY, |_| true)
}

/// Whether two objects' meshes intersect (touching within 1e-9 included) or
/// one contains the other.
pub fn meshes_intersect(index: &SceneIndex, id_a: &str, id_b: &str) -> Result<bool> {
    let a = index.get(id_a)?;
    let b = index.get(id_b)?;
    Ok(a.intersects(b))
}
