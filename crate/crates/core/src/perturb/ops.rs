//! The six operations. Each `op_*` draws parameters and retries the matching
//! `apply_*` until it accepts or the retry budget runs out; `apply_*` is
//! deterministic in its parameters so callers can force a draw.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, UnitBall};

use super::{ImplausibilityType, OpContext, PoseChange, TransformRecord};
use crate::error::{Error, Result};
use crate::geometry::{drop_to_support, Aabb, ObjectGeom, SceneIndex, TOUCH_EPSILON};
use crate::math::{euler_zyx, rotation_angle, rotation_z, Pose3, Vec3};
use crate::scene::Scene;

/// Outcome of applying one parameter draw.
#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Attempt {
    Accepted(TransformRecord),
    Rejected(String),
}

impl Attempt {
    pub fn accepted(self) -> Option<TransformRecord> {
        match self {
            Attempt::Accepted(r) => Some(r),
            Attempt::Rejected(_) => None,
        }
    }
}

/// Mutable copy of the context scene plus its geometry.
struct Work {
    scene: Scene,
    index: SceneIndex,
}

impl Work {
    fn new(ctx: &OpContext<'_>) -> Self {
        Work {
            scene: ctx.scene.clone(),
            index: ctx.index.clone(),
        }
    }

    fn apply(&mut self, id: &str, delta: &Pose3, move_dependents: bool) -> Result<()> {
        self.scene.apply_pose_delta(id, delta, move_dependents)?;
        let ids = if move_dependents {
            self.scene.group_of(id)?
        } else {
            vec![id.to_string()]
        };
        self.index.update(&self.scene, &ids)
    }

    fn translate(&mut self, id: &str, offset: Vec3, move_dependents: bool) -> Result<()> {
        self.apply(id, &Pose3::from_translation(offset), move_dependents)
    }

    fn aabb(&self, id: &str) -> Result<Aabb> {
        Ok(self.index.get(id)?.aabb)
    }
}

fn record(
    ctx: &OpContext<'_>,
    work: &Work,
    kind: ImplausibilityType,
    id: &str,
    draw_params: BTreeMap<String, f64>,
) -> Result<TransformRecord> {
    let pose_before = ctx.scene.object(id)?.pose.clone();
    let pose_after = work.scene.object(id)?.pose.clone();
    let mut co_moved = Vec::new();
    for dep in ctx.scene.dependents_of(id)? {
        let before = &ctx.scene.object(&dep)?.pose;
        let after = &work.scene.object(&dep)?.pose;
        if before != after {
            co_moved.push(PoseChange {
                object_id: dep,
                pose_before: before.clone(),
                pose_after: after.clone(),
            });
        }
    }
    Ok(TransformRecord {
        kind,
        object_id: id.to_string(),
        pose_before,
        pose_after,
        draw_params,
        co_moved,
    })
}

fn params<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn retry<R: Rng + ?Sized>(
    ctx: &OpContext<'_>,
    kind: ImplausibilityType,
    id: &str,
    rng: &mut R,
    mut attempt: impl FnMut(&mut R) -> Result<Attempt>,
) -> Result<TransformRecord> {
    let mut last = String::from("retry budget is zero");
    for _ in 0..ctx.config.retry_budget {
        match attempt(rng)? {
            Attempt::Accepted(r) => return Ok(r),
            Attempt::Rejected(reason) => last = reason,
        }
    }
    Err(Error::TransformFailed {
        object: id.to_string(),
        kind,
        reason: format!("{} attempts rejected, last: {last}", ctx.config.retry_budget),
    })
}

/// Signed fraction in `[-0.5, 0.5]` of a dimension.
fn half_jitter<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-0.5..=0.5)
}

/// Lifts the object and its dependents by `u × maxdim`.
pub fn apply_gravity(ctx: OpContext<'_>, id: &str, u: f64) -> Result<Attempt> {
    let mut work = Work::new(&ctx);
    let maxdim = work.aabb(id)?.max_extent();
    work.translate(id, Vec3::new(0.0, 0.0, u * maxdim), true)?;
    let rec = record(&ctx, &work, ImplausibilityType::Gravity, id, params([("u", u)]))?;
    if rec.pose_before == rec.pose_after {
        return Ok(Attempt::Rejected("zero lift".into()));
    }
    Ok(Attempt::Accepted(rec))
}

pub fn op_gravity<R: Rng + ?Sized>(ctx: OpContext<'_>, id: &str, rng: &mut R) -> Result<TransformRecord> {
    retry(&ctx, ImplausibilityType::Gravity, id, rng, |rng| {
        apply_gravity(ctx, id, rng.random_range(1.0..=2.0))
    })
}

/// Shifts by `(dx_frac·dim_x, dy_frac·dim_y, −v·dim_z)`; accepted when the
/// object then intersects something outside its own group.
pub fn apply_intersection(ctx: OpContext<'_>, id: &str, dx_frac: f64, dy_frac: f64, v: f64) -> Result<Attempt> {
    let mut work = Work::new(&ctx);
    let dims = work.aabb(id)?.extent();
    work.translate(id, Vec3::new(dx_frac * dims.x, dy_frac * dims.y, -v * dims.z), true)?;
    let group = work.scene.group_of(id)?;
    if work.index.intersecting(id, &group)?.is_empty() {
        return Ok(Attempt::Rejected("no intersection after lowering".into()));
    }
    let p = params([("dx_frac", dx_frac), ("dy_frac", dy_frac), ("v", v)]);
    Ok(Attempt::Accepted(record(&ctx, &work, ImplausibilityType::Intersection, id, p)?))
}

pub fn op_intersection<R: Rng + ?Sized>(ctx: OpContext<'_>, id: &str, rng: &mut R) -> Result<TransformRecord> {
    retry(&ctx, ImplausibilityType::Intersection, id, rng, |rng| {
        let dx = half_jitter(rng);
        let dy = half_jitter(rng);
        let v = rng.random_range(1.0 / 3.0..=2.0 / 3.0);
        apply_intersection(ctx, id, dx, dy, v)
    })
}

/// Rotates by Z·Y·X Euler angles about the box center, then shifts in Z so
/// the lowest point keeps its height. Dependents stay put.
pub fn apply_pose(ctx: OpContext<'_>, id: &str, angles_zyx_deg: [f64; 3]) -> Result<Attempt> {
    let [z, y, x] = angles_zyx_deg;
    let rot = euler_zyx(z, y, x);
    if rotation_angle(&rot) < 1e-6 {
        return Ok(Attempt::Rejected("rotation is identity".into()));
    }
    let mut work = Work::new(&ctx);
    let before = work.aabb(id)?;
    work.apply(id, &Pose3::rotation_about(before.center(), rot), false)?;
    let dz = before.min.z - work.aabb(id)?.min.z;
    work.translate(id, Vec3::new(0.0, 0.0, dz), false)?;
    let p = params([("rot_z_deg", z), ("rot_y_deg", y), ("rot_x_deg", x)]);
    Ok(Attempt::Accepted(record(&ctx, &work, ImplausibilityType::Pose, id, p)?))
}

pub fn op_pose<R: Rng + ?Sized>(ctx: OpContext<'_>, id: &str, rng: &mut R) -> Result<TransformRecord> {
    retry(&ctx, ImplausibilityType::Pose, id, rng, |rng| {
        let angles = [
            rng.random_range(0.0..360.0),
            rng.random_range(0.0..360.0),
            rng.random_range(0.0..360.0),
        ];
        apply_pose(ctx, id, angles)
    })
}

/// Scales uniformly by `s` about the box center, lifts by half the new
/// height and drops onto the first support below.
///
/// Dependents are not scaled; each keeps its spot on the object by moving
/// its bottom center through the same scaling.
pub fn apply_size(ctx: OpContext<'_>, id: &str, s: f64) -> Result<Attempt> {
    let mut work = Work::new(&ctx);
    let center = work.aabb(id)?.center();
    let deps = work.scene.dependents_of(id)?;
    let anchors = deps
        .iter()
        .map(|d| {
            let b = work.aabb(d)?;
            Ok(Vec3::new(b.center().x, b.center().y, b.min.z))
        })
        .collect::<Result<Vec<_>>>()?;
    work.apply(id, &Pose3::scaling_about(center, s), false)?;
    for (d, anchor) in deps.iter().zip(&anchors) {
        let moved = center + (anchor - center) * s;
        work.translate(d, moved - anchor, false)?;
    }
    let height = work.aabb(id)?.extent().z;
    work.translate(id, Vec3::new(0.0, 0.0, 0.5 * height), true)?;
    let dz = drop_to_support(&work.scene, &work.index, id, ctx.config)?;
    work.translate(id, Vec3::new(0.0, 0.0, dz), true)?;
    let group = work.scene.group_of(id)?;
    if let Some((a, b)) = work.index.group_collision(&group)? {
        return Ok(Attempt::Rejected(format!("{a} intersects {b} after resizing")));
    }
    let p = params([("scale", s), ("up", if s > 1.0 { 1.0 } else { 0.0 }), ("drop", dz)]);
    Ok(Attempt::Accepted(record(&ctx, &work, ImplausibilityType::Size, id, p)?))
}

pub fn op_size<R: Rng + ?Sized>(ctx: OpContext<'_>, id: &str, rng: &mut R) -> Result<TransformRecord> {
    retry(&ctx, ImplausibilityType::Size, id, rng, |rng| {
        let s = if rng.random_bool(ctx.config.size_up_probability) {
            rng.random_range(2.0..=3.0)
        } else {
            rng.random_range(0.3..=0.5)
        };
        apply_size(ctx, id, s)
    })
}

/// Moves by `offset` and drops. Accepted when the lowest point changes
/// height by more than `epsilon_height`, stays above the floor and nothing
/// intersects.
pub fn apply_co_occurrence_location(ctx: OpContext<'_>, id: &str, offset: Vec3) -> Result<Attempt> {
    let tol = ctx.config.contact_tolerance;
    let mut work = Work::new(&ctx);
    let z_before = work.aabb(id)?.min.z;
    work.translate(id, offset, true)?;
    let dz = drop_to_support(&work.scene, &work.index, id, ctx.config)?;
    work.translate(id, Vec3::new(0.0, 0.0, dz), true)?;
    let z_after = work.aabb(id)?.min.z;
    if z_after < -tol {
        return Ok(Attempt::Rejected("below the floor".into()));
    }
    if (z_after - z_before).abs() <= ctx.config.epsilon_height {
        return Ok(Attempt::Rejected("height unchanged".into()));
    }
    let group = work.scene.group_of(id)?;
    if let Some((a, b)) = work.index.group_collision(&group)? {
        return Ok(Attempt::Rejected(format!("{a} intersects {b}")));
    }
    let p = params([
        ("dx", offset.x),
        ("dy", offset.y),
        ("dz", offset.z),
        ("radius", offset.norm()),
        ("drop", dz),
    ]);
    Ok(Attempt::Accepted(record(
        &ctx,
        &work,
        ImplausibilityType::CoOccurrenceLocation,
        id,
        p,
    )?))
}

pub fn op_co_occurrence_location<R: Rng + ?Sized>(
    ctx: OpContext<'_>,
    id: &str,
    rng: &mut R,
) -> Result<TransformRecord> {
    retry(&ctx, ImplausibilityType::CoOccurrenceLocation, id, rng, |rng| {
        let [x, y, z]: [f64; 3] = UnitBall.sample(rng);
        let offset = Vec3::new(x, y, z) * ctx.config.co_loc_radius;
        apply_co_occurrence_location(ctx, id, offset)
    })
}

/// Turns about the vertical axis through the box center by `angle_deg`,
/// shifts by `(dx_frac·dim_x, dy_frac·dim_y)`, then walks away from the
/// contact in fixed steps until nothing intersects.
pub fn apply_co_occurrence_rotation(
    ctx: OpContext<'_>,
    id: &str,
    angle_deg: f64,
    dx_frac: f64,
    dy_frac: f64,
) -> Result<Attempt> {
    let mut work = Work::new(&ctx);
    let bounds = work.aabb(id)?;
    let dims = bounds.extent();
    work.apply(id, &Pose3::rotation_about(bounds.center(), rotation_z(angle_deg)), true)?;
    work.translate(id, Vec3::new(dx_frac * dims.x, dy_frac * dims.y, 0.0), true)?;

    let group = work.scene.group_of(id)?;
    let mut steps = 0usize;
    if let Some((member, other)) = work.index.group_collision(&group)? {
        let dir = separation_direction(&work.index, &member, &other)?;
        let step = ctx.config.separation_step;
        let max_steps = (ctx.config.separation_budget * dims.max() / step).floor() as usize;
        match walk_free(&work.index, &group, dir, step, max_steps)? {
            Some(k) => {
                steps = k;
                work.translate(id, dir * (k as f64 * step), true)?;
            }
            None => return Ok(Attempt::Rejected("separation walk exceeded its budget".into())),
        }
    }
    let p = params([
        ("angle_deg", angle_deg),
        ("dx_frac", dx_frac),
        ("dy_frac", dy_frac),
        ("walk_steps", steps as f64),
    ]);
    Ok(Attempt::Accepted(record(
        &ctx,
        &work,
        ImplausibilityType::CoOccurrenceRotation,
        id,
        p,
    )?))
}

pub fn op_co_occurrence_rotation<R: Rng + ?Sized>(
    ctx: OpContext<'_>,
    id: &str,
    rng: &mut R,
) -> Result<TransformRecord> {
    retry(&ctx, ImplausibilityType::CoOccurrenceRotation, id, rng, |rng| {
        let angle = rng.random_range(160.0..=200.0);
        let dx = half_jitter(rng);
        let dy = half_jitter(rng);
        apply_co_occurrence_rotation(ctx, id, angle, dx, dy)
    })
}

/// Horizontal unit vector from the centroid of the contact between `member`
/// and `other` toward the member's center.
fn separation_direction(index: &SceneIndex, member: &str, other: &str) -> Result<Vec3> {
    let a = index.get(member)?;
    let b = index.get(other)?;
    let target = a.aabb.center();
    let contacts = a.contact_points(b);
    let mut sources = Vec::new();
    if !contacts.is_empty() {
        sources.push(contacts.iter().sum::<Vec3>() / contacts.len() as f64);
    }
    sources.push(b.aabb.center());
    for src in sources {
        let d = Vec3::new(target.x - src.x, target.y - src.y, 0.0);
        let n = d.norm();
        if n > 1e-9 {
            return Ok(d / n);
        }
    }
    Ok(Vec3::x())
}

/// Smallest `k <= max_steps` such that `group` moved by `k·step·dir` meets
/// nothing outside the group.
fn walk_free(index: &SceneIndex, group: &[String], dir: Vec3, step: f64, max_steps: usize) -> Result<Option<usize>> {
    let members = group.iter().map(|g| index.get(g)).collect::<Result<Vec<_>>>()?;
    let others: Vec<&ObjectGeom> = index.entries().filter(|e| !group.contains(&e.id)).collect();
    for k in 1..=max_steps {
        let offset = dir * (k as f64 * step);
        let mut blocked = false;
        for m in &members {
            let moved_box = Aabb {
                min: m.aabb.min + offset,
                max: m.aabb.max + offset,
            };
            let near: Vec<&&ObjectGeom> = others
                .iter()
                .filter(|o| o.aabb.overlaps(&moved_box, TOUCH_EPSILON))
                .collect();
            if near.is_empty() {
                continue;
            }
            let moved = m.translated(&offset);
            if near.iter().any(|o| moved.intersects(o)) {
                blocked = true;
                break;
            }
        }
        if !blocked {
            return Ok(Some(k));
        }
    }
    Ok(None)
}
