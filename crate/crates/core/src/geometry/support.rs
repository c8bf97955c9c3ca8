use super::{Ray, SceneIndex};
use crate::config::Config;
use crate::error::Result;
use crate::math::Vec3;
use crate::scene::Scene;

/// Downward Z displacement (always `<= 0`) that lets `id` fall onto the first
/// surface beneath it: another object or the floor plane `z = 0`.
///
/// The gap to the support is measured with vertical rays: down from a
/// `drop_grid × drop_grid` grid of points on the object's underside and from
/// every object vertex, and up from support edges clipped to the object's
/// footprint. The object and everything resting on it
/// are ignored as supports. The returned displacement leaves a gap of half
/// the contact tolerance so the object rests without touching.
pub fn drop_to_support(scene: &Scene, index: &SceneIndex, id: &str, config: &Config) -> Result<f64> {
    let group = scene.group_of(id)?;
    let geom = index.get(id)?;
    let tol = config.contact_tolerance;
    let bounds = geom.aabb;
    let down = -Vec3::z();
    let not_in_group = |other: &str| !group.iter().any(|g| g == other);

    // Distance to the floor plane from the lowest point.
    let mut gap = bounds.min.z;

    let mut probe_down = |p: Vec3| {
        let ray = Ray {
            origin: p + Vec3::new(0.0, 0.0, tol),
            direction: down,
        };
        if let Some(hit) = index.first_hit_where(&ray, gap + tol, not_in_group) {
            gap = gap.min(hit.distance - tol);
        }
    };

    let n = config.drop_grid;
    let ext = bounds.extent();
    for i in 0..n {
        for j in 0..n {
            let x = bounds.min.x + ext.x * (i as f64 + 0.5) / n as f64;
            let y = bounds.min.y + ext.y * (j as f64 + 0.5) / n as f64;
            let up = Ray {
                origin: Vec3::new(x, y, bounds.min.z - 1.0),
                direction: Vec3::z(),
            };
            if let Some(t) = geom.closest_hit(&up, f64::INFINITY) {
                probe_down(up.at(t));
            }
        }
    }
    for v in &geom.vertices {
        probe_down(*v);
    }

    // Support edges under the footprint, e.g. a thin rail the grid steps
    // over. Each edge is clipped to the footprint and probed upward at the
    // clipped ends and midpoint.
    let shrink = 1e-7 * ext.x.max(ext.y).max(1.0);
    let (lo, hi) = (
        [bounds.min.x + shrink, bounds.min.y + shrink],
        [bounds.max.x - shrink, bounds.max.y - shrink],
    );
    for other in index.entries() {
        if !not_in_group(&other.id) || !other.aabb.overlaps_xy(&bounds) || other.aabb.min.z > bounds.max.z {
            continue;
        }
        for tri in &other.triangles {
            for k in 0..3 {
                let (p, q) = (tri[k], tri[(k + 1) % 3]);
                let Some((t0, t1)) = clip_segment_xy(&p, &q, lo, hi) else {
                    continue;
                };
                for t in [t0, 0.5 * (t0 + t1), t1] {
                    let w = p + (q - p) * t;
                    if w.z > bounds.max.z {
                        continue;
                    }
                    let ray = Ray {
                        origin: w - Vec3::new(0.0, 0.0, tol),
                        direction: Vec3::z(),
                    };
                    if let Some(t) = geom.closest_hit(&ray, gap + tol) {
                        gap = gap.min(t - tol);
                    }
                }
            }
        }
    }

    let fall = (gap - 0.5 * tol).max(0.0);
    Ok(if fall > 0.0 { -fall } else { 0.0 })
}

/// Liang–Barsky clip of segment `p → q` to an XY rectangle, as parameters.
fn clip_segment_xy(p: &Vec3, q: &Vec3, lo: [f64; 2], hi: [f64; 2]) -> Option<(f64, f64)> {
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for k in 0..2 {
        let d = q[k] - p[k];
        if d == 0.0 {
            if p[k] < lo[k] || p[k] > hi[k] {
                return None;
            }
            continue;
        }
        let a = (lo[k] - p[k]) / d;
        let b = (hi[k] - p[k]) / d;
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    (t0 <= t1).then_some((t0, t1))
}
