//! Camera placement: a random start above the changed objects, then a
//! two-way line search through their centroid until every change is visible.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{Aabb, ObjectGeom, Ray, SceneIndex};
use crate::math::Vec3;
use crate::perturb::TransformRecord;
use crate::scene::Scene;

/// Points closer than this to the camera plane are not projected.
pub const NEAR_PLANE: f64 = 0.05;

/// Pinhole camera with a square image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub location: Vec3,
    pub target: Vec3,
    /// Vertical field of view, degrees.
    pub vertical_fov: f64,
    pub image_size: u32,
}

/// Orthonormal camera frame.
#[derive(Clone, Copy, Debug)]
pub struct CameraBasis {
    pub forward: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    /// `tan(fov / 2)`.
    pub tan_half: f64,
}

impl CameraSpec {
    pub fn new(location: Vec3, target: Vec3, vertical_fov: f64, image_size: u32) -> Result<Self> {
        let cam = CameraSpec {
            location,
            target,
            vertical_fov,
            image_size,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn from_config(location: Vec3, target: Vec3, config: &Config) -> Result<Self> {
        Self::new(location, target, config.camera_fov, config.image_size)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.location.iter().chain(self.target.iter()).all(|v| v.is_finite())) {
            return Err(Error::DegenerateCamera("non-finite coordinates".into()));
        }
        if (self.target - self.location).norm() <= 1e-12 {
            return Err(Error::DegenerateCamera("location equals target".into()));
        }
        if !(self.vertical_fov > 10.0 && self.vertical_fov < 120.0) {
            return Err(Error::DegenerateCamera(format!("fov {} outside (10, 120)", self.vertical_fov)));
        }
        if self.image_size == 0 {
            return Err(Error::DegenerateCamera("zero image size".into()));
        }
        Ok(())
    }

    /// Camera frame with world +Z as the up reference (+Y when looking
    /// straight up or down).
    pub fn basis(&self) -> Result<CameraBasis> {
        self.validate()?;
        let forward = (self.target - self.location).normalize();
        let mut right = forward.cross(&Vec3::z());
        if right.norm() < 1e-9 {
            right = forward.cross(&Vec3::y());
        }
        let right = right.normalize();
        let up = right.cross(&forward);
        Ok(CameraBasis {
            forward,
            right,
            up,
            tan_half: (self.vertical_fov.to_radians() * 0.5).tan(),
        })
    }

    /// Continuous pixel coordinates `(x, y)` with the origin at the top-left
    /// corner, plus view depth. `None` behind the near plane.
    pub fn project(&self, basis: &CameraBasis, p: &Vec3) -> Option<(f64, f64, f64)> {
        let d = p - self.location;
        let z = d.dot(&basis.forward);
        if z < NEAR_PLANE {
            return None;
        }
        let n = self.image_size as f64;
        let x = d.dot(&basis.right) / (z * basis.tan_half);
        let y = d.dot(&basis.up) / (z * basis.tan_half);
        Some(((x + 1.0) * 0.5 * n, (1.0 - y) * 0.5 * n, z))
    }

    /// Whether `p` projects inside the image.
    pub fn in_frustum(&self, basis: &CameraBasis, p: &Vec3) -> bool {
        let n = self.image_size as f64;
        self.project(basis, p)
            .is_some_and(|(x, y, _)| (0.0..n).contains(&x) && (0.0..n).contains(&y))
    }

    /// Ray through the center of pixel `(px, py)`.
    pub fn pixel_ray(&self, basis: &CameraBasis, px: u32, py: u32) -> Ray {
        let n = self.image_size as f64;
        let x = (2.0 * (px as f64 + 0.5) / n - 1.0) * basis.tan_half;
        let y = (1.0 - 2.0 * (py as f64 + 0.5) / n) * basis.tan_half;
        let dir = basis.forward + basis.right * x + basis.up * y;
        Ray {
            origin: self.location,
            direction: dir.normalize(),
        }
    }
}

/// Per-object share of surface samples the camera sees.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VisibilityReport {
    pub visible_fraction: BTreeMap<String, f64>,
    /// Objects with a visible fraction of at least `v_min`.
    pub objects_in_view: usize,
}

/// `count` points spread over the surface in proportion to triangle area.
pub fn surface_samples(triangles: &[[Vec3; 3]], count: usize) -> Vec<Vec3> {
    let mut cumulative = Vec::with_capacity(triangles.len());
    let mut total = 0.0;
    for t in triangles {
        total += 0.5 * (t[1] - t[0]).cross(&(t[2] - t[0])).norm();
        cumulative.push(total);
    }
    if triangles.is_empty() || total <= 0.0 {
        return Vec::new();
    }
    // R2 low-discrepancy sequence for the in-triangle position.
    const A1: f64 = 0.754_877_666_246_692_7;
    const A2: f64 = 0.569_840_290_998_053_3;
    (0..count)
        .map(|j| {
            let a = (j as f64 + 0.5) / count as f64 * total;
            let k = cumulative.partition_point(|&c| c < a).min(triangles.len() - 1);
            let mut u = (0.5 + A1 * (j as f64 + 1.0)).fract();
            let mut v = (0.5 + A2 * (j as f64 + 1.0)).fract();
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            let t = &triangles[k];
            t[0] + (t[1] - t[0]) * u + (t[2] - t[0]) * v
        })
        .collect()
}

fn object_visibility(index: &SceneIndex, geom: &ObjectGeom, cam: &CameraSpec, basis: &CameraBasis, n: usize) -> f64 {
    let samples = surface_samples(&geom.triangles, n);
    if samples.is_empty() {
        return 0.0;
    }
    let seen = samples
        .iter()
        .filter(|p| {
            if !cam.in_frustum(basis, p) {
                return false;
            }
            let d = *p - cam.location;
            let dist = d.norm();
            if dist <= 0.0 {
                return false;
            }
            let ray = Ray {
                origin: cam.location,
                direction: d / dist,
            };
            let slack = 1e-6 * dist.max(1.0);
            match index.first_hit_where(&ray, dist + slack, |_| true) {
                Some(hit) => hit.object_id == geom.id && hit.distance >= dist - slack,
                None => false,
            }
        })
        .count();
    seen as f64 / samples.len() as f64
}

/// Visible fraction of every object in `index` (or only `ids` when given).
pub fn visibility_report(
    index: &SceneIndex,
    camera: &CameraSpec,
    config: &Config,
    ids: Option<&[String]>,
) -> Result<VisibilityReport> {
    let basis = camera.basis()?;
    let geoms: Vec<&ObjectGeom> = match ids {
        Some(ids) => ids.iter().map(|id| index.get(id)).collect::<Result<_>>()?,
        None => index.entries().collect(),
    };
    let fractions: Vec<(String, f64)> = geoms
        .par_iter()
        .map(|g| {
            (
                g.id.clone(),
                object_visibility(index, g, camera, &basis, config.surface_samples),
            )
        })
        .collect();
    let objects_in_view = fractions.iter().filter(|(_, f)| *f >= config.v_min).count();
    Ok(VisibilityReport {
        visible_fraction: fractions.into_iter().collect(),
        objects_in_view,
    })
}

/// A transformed scene together with its untransformed counterpart, for
/// validating cameras against a set of transformations.
#[derive(Clone)]
pub struct ViewCheck<'a> {
    pub config: &'a Config,
    pub records: &'a [TransformRecord],
    pub after: SceneIndex,
    pub before: SceneIndex,
    /// Ids of the transformed objects, in record order.
    pub transformed: Vec<String>,
}

impl<'a> ViewCheck<'a> {
    /// `scene` holds every record committed; the untransformed view is
    /// rebuilt by reverting them on a scratch copy.
    pub fn new(scene: &Scene, records: &'a [TransformRecord], config: &'a Config) -> Result<Self> {
        let mut reverted = scene.clone();
        for r in records.iter().rev() {
            r.revert(&mut reverted)?;
        }
        Ok(ViewCheck {
            config,
            records,
            after: SceneIndex::build(scene)?,
            before: SceneIndex::build(&reverted)?,
            transformed: records.iter().map(|r| r.object_id.clone()).collect(),
        })
    }

    /// Centroid of the transformed objects' box centers before and after.
    pub fn centroid(&self) -> Result<Vec3> {
        let mut sum = Vec3::zeros();
        for id in &self.transformed {
            sum += self.before.get(id)?.aabb.center();
            sum += self.after.get(id)?.aabb.center();
        }
        Ok(sum / (2 * self.transformed.len()).max(1) as f64)
    }

    /// Every transformed object is visible after and before its change, and
    /// enough objects are in view.
    pub fn check_visibility(&self, camera: &CameraSpec) -> Result<bool> {
        let v_min = self.config.v_min;
        let after = visibility_report(&self.after, camera, self.config, None)?;
        if after.objects_in_view < self.config.n_min {
            return Ok(false);
        }
        if self.transformed.iter().any(|id| after.visible_fraction[id] < v_min) {
            return Ok(false);
        }
        let before = visibility_report(&self.before, camera, self.config, Some(&self.transformed))?;
        Ok(self.transformed.iter().all(|id| before.visible_fraction[id] >= v_min))
    }

    /// Some transformed object is nearly invisible and the line of sight to
    /// its center is blocked by another object.
    pub fn check_obscuration(&self, camera: &CameraSpec) -> Result<bool> {
        let report = visibility_report(&self.after, camera, self.config, Some(&self.transformed))?;
        for id in &self.transformed {
            if report.visible_fraction[id] >= self.config.o_max {
                continue;
            }
            let center = self.after.get(id)?.aabb.center();
            let d = center - camera.location;
            let dist = d.norm();
            if dist <= 0.0 {
                continue;
            }
            let ray = Ray {
                origin: camera.location,
                direction: d / dist,
            };
            if let Some(hit) = self.after.first_hit_where(&ray, dist, |_| true) {
                if hit.object_id != *id {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

pub fn check_visibility(
    scene: &Scene,
    camera: &CameraSpec,
    records: &[TransformRecord],
    config: &Config,
) -> Result<bool> {
    ViewCheck::new(scene, records, config)?.check_visibility(camera)
}

pub fn check_obscuration(
    scene: &Scene,
    camera: &CameraSpec,
    records: &[TransformRecord],
    config: &Config,
) -> Result<bool> {
    ViewCheck::new(scene, records, config)?.check_obscuration(camera)
}

/// Camera drawn uniformly from the configured box above `centroid`,
/// looking at it.
pub fn random_initial_camera<R: Rng + ?Sized>(rng: &mut R, centroid: Vec3, config: &Config) -> Result<CameraSpec> {
    let b = &config.camera_box;
    let offset = Vec3::new(
        rng.random_range(-b.half_xy..=b.half_xy),
        rng.random_range(-b.half_xy..=b.half_xy),
        rng.random_range(b.z_min..=b.z_max),
    );
    CameraSpec::from_config(centroid + offset, centroid, config)
}

/// One evaluated candidate of the line search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub i: usize,
    pub direction: i32,
    pub location: Vec3,
    pub visible: bool,
    pub obscured: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraSearch {
    pub camera: Option<CameraSpec>,
    pub centroid: Vec3,
    pub initial: Vec3,
    /// Unit vector from the centroid to the initial location.
    pub axis: Vec3,
    pub step: f64,
    pub trace: Vec<TraceStep>,
    /// Directions abandoned after an occlusion, in the order they died.
    pub dead: Vec<i32>,
}

/// Line search along `centroid → initial`.
///
/// Slot `i` in `0..2·n_iter` tries direction `d = −1` for even `i` and
/// `d = +1` for odd `i`, at `centroid + axis·(⌊i/2⌋ + 1)·d·step`. A visible
/// candidate ends the search; an occluded one kills its direction.
pub fn line_search(view: &ViewCheck<'_>, centroid: Vec3, initial: Vec3, n_iter: usize, step: f64) -> Result<CameraSearch> {
    let axis_raw = initial - centroid;
    if axis_raw.norm() <= 1e-12 {
        return Err(Error::DegenerateCamera("initial location equals centroid".into()));
    }
    let axis = axis_raw.normalize();
    let mut search = CameraSearch {
        camera: None,
        centroid,
        initial,
        axis,
        step,
        trace: Vec::new(),
        dead: Vec::new(),
    };
    for i in 0..2 * n_iter {
        let d: i32 = if i % 2 == 0 { -1 } else { 1 };
        if search.dead.contains(&d) {
            if search.dead.len() == 2 {
                break;
            }
            continue;
        }
        let location = centroid + axis * ((i / 2 + 1) as f64 * d as f64 * step);
        let camera = CameraSpec::from_config(location, centroid, view.config)?;
        let visible = view.check_visibility(&camera)?;
        let obscured = !visible && view.check_obscuration(&camera)?;
        search.trace.push(TraceStep {
            i,
            direction: d,
            location,
            visible,
            obscured,
        });
        if visible {
            search.camera = Some(camera);
            break;
        }
        if obscured {
            search.dead.push(d);
        }
    }
    Ok(search)
}

/// Full camera search for the transformed `scene`.
pub fn find_camera_traced<R: Rng + ?Sized>(
    scene: &Scene,
    records: &[TransformRecord],
    config: &Config,
    rng: &mut R,
) -> Result<CameraSearch> {
    if records.is_empty() {
        return Err(Error::DegenerateCamera("no transformations to frame".into()));
    }
    let view = ViewCheck::new(scene, records, config)?;
    let centroid = view.centroid()?;
    let initial = random_initial_camera(rng, centroid, config)?.location;
    let step = config.step_fraction * (initial - centroid).norm();
    line_search(&view, centroid, initial, config.n_iter, step)
}

pub fn find_camera<R: Rng + ?Sized>(
    scene: &Scene,
    records: &[TransformRecord],
    config: &Config,
    rng: &mut R,
) -> Result<Option<CameraSpec>> {
    Ok(find_camera_traced(scene, records, config, rng)?.camera)
}

/// Union of the transformed objects' boxes, before and after.
pub fn transformed_bounds(view: &ViewCheck<'_>) -> Result<Aabb> {
    let mut b = Aabb::empty();
    for id in &view.transformed {
        b = b.union(&view.before.get(id)?.aabb).union(&view.after.get(id)?.aabb);
    }
    Ok(b)
}
