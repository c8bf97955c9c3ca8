use crate::math::Vec3;

/// Möller–Trumbore. Returns the ray parameter `t >= 0` of the hit; edges are
/// inclusive. `dir` need not be normalized (then `t` is in units of `dir`).
pub fn ray_triangle(origin: &Vec3, dir: &Vec3, tri: &[Vec3; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() <= 1e-14 * e1.norm() * e2.norm() * dir.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t >= 0.0).then_some(t)
}

/// Crossing point of segment `p → q` with a triangle.
pub fn segment_triangle(p: &Vec3, q: &Vec3, tri: &[Vec3; 3]) -> Option<Vec3> {
    let d = q - p;
    ray_triangle(p, &d, tri).filter(|&t| t <= 1.0).map(|t| p + d * t)
}

/// Separating-axis test for two triangles.
///
/// Triangles closer than `eps` along every candidate axis are reported as
/// overlapping, so touching counts as intersecting.
pub fn triangles_overlap(a: &[Vec3; 3], b: &[Vec3; 3], eps: f64) -> bool {
    let ea = [a[1] - a[0], a[2] - a[1], a[0] - a[2]];
    let eb = [b[1] - b[0], b[2] - b[1], b[0] - b[2]];
    let na = ea[0].cross(&ea[1]);
    let nb = eb[0].cross(&eb[1]);

    let separated = |axis: Vec3, scale: f64| -> bool {
        let len = axis.norm();
        if len <= 1e-12 * scale {
            return false;
        }
        let axis = axis / len;
        let (amin, amax) = project(a, &axis);
        let (bmin, bmax) = project(b, &axis);
        amax < bmin - eps || bmax < amin - eps
    };

    let la = ea.map(|e| e.norm());
    let lb = eb.map(|e| e.norm());
    if separated(na, la[0] * la[1]) || separated(nb, lb[0] * lb[1]) {
        return false;
    }
    for i in 0..3 {
        for j in 0..3 {
            if separated(ea[i].cross(&eb[j]), la[i] * lb[j]) {
                return false;
            }
        }
    }
    // In-plane edge normals settle the coplanar configurations.
    let na_len = na.norm();
    let nb_len = nb.norm();
    for i in 0..3 {
        if separated(na.cross(&ea[i]), na_len * la[i]) || separated(nb.cross(&eb[i]), nb_len * lb[i]) {
            return false;
        }
    }
    true
}

fn project(tri: &[Vec3; 3], axis: &Vec3) -> (f64, f64) {
    let d = [tri[0].dot(axis), tri[1].dot(axis), tri[2].dot(axis)];
    (d[0].min(d[1]).min(d[2]), d[0].max(d[1]).max(d[2]))
}
