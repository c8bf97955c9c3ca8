//! Brute-force oracles and fixture helpers shared by the integration tests.
//! The oracles never call the library's geometry kernel; only the fixture
//! builders at the end use library operations.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use scenegen::math::{Mat3, Pose3, Vec3};
use scenegen::perturb::ImplausibilityType;
use scenegen::camera::CameraSearch;
use scenegen::perturb::{apply_gravity, OpContext};
use scenegen::{Config, Mesh, Scene, SceneIndex, SceneObject, ScreenBox, SizeCategory, TransformRecord};

pub type Tri = [Vec3; 3];

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn load_fixture(name: &str) -> Scene {
    Scene::load(&fixtures_dir().join(format!("{name}.json"))).expect("fixture loads")
}

pub fn fixture_names() -> Vec<String> {
    scenegen::scene::scene_files(&fixtures_dir())
        .unwrap()
        .iter()
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect()
}

pub fn all_fixtures() -> Vec<Scene> {
    fixture_names().iter().map(|n| load_fixture(n)).collect()
}

/// Object description for hand-built scenes: `(id, class, mesh, pose)`.
pub struct Spec<'a> {
    pub id: &'a str,
    pub class: &'a str,
    pub size: SizeCategory,
    pub mesh: Mesh,
    pub pose: Pose3,
    pub allowed: &'a [ImplausibilityType],
}

pub fn build_scene(specs: Vec<Spec<'_>>, deps: &[(&str, &str)]) -> Scene {
    let mut meshes = BTreeMap::new();
    let mut objects = Vec::new();
    for s in specs {
        meshes.insert(s.id.to_string(), Arc::new(s.mesh));
        objects.push(SceneObject {
            id: s.id.to_string(),
            class_label: s.class.to_string(),
            size_category: s.size,
            mesh_ref: s.id.to_string(),
            pose: s.pose,
            allowed_transforms: s.allowed.iter().copied().collect::<BTreeSet<_>>(),
        });
    }
    let deps: Vec<[String; 2]> = deps.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect();
    Scene::new("test", "cm", objects, meshes, &deps).unwrap()
}

pub fn cuboid_spec<'a>(id: &'a str, min: [f64; 3], max: [f64; 3], allowed: &'a [ImplausibilityType]) -> Spec<'a> {
    Spec {
        id,
        class: id,
        size: SizeCategory::Small,
        mesh: Mesh::cuboid(Vec3::from(min), Vec3::from(max)),
        pose: Pose3::identity(),
        allowed,
    }
}

/// World triangles through the homogeneous matrix, not the library's
/// point transform.
pub fn world_tris(scene: &Scene, id: &str) -> Vec<Tri> {
    let obj = scene.object(id).unwrap();
    let m = obj.pose.to_homogeneous();
    let mesh = scene.mesh_of(obj);
    let world: Vec<Vec3> = mesh
        .vertices
        .iter()
        .map(|v| (m * v.push(1.0)).xyz())
        .collect();
    mesh.triangles
        .iter()
        .map(|t| [world[t[0] as usize], world[t[1] as usize], world[t[2] as usize]])
        .collect()
}

pub fn tri_vertices(tris: &[Tri]) -> Vec<Vec3> {
    tris.iter().flat_map(|t| t.iter().copied()).collect()
}

pub fn bounds(tris: &[Tri]) -> (Vec3, Vec3) {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for v in tri_vertices(tris) {
        lo = lo.inf(&v);
        hi = hi.sup(&v);
    }
    (lo, hi)
}

/// Ray parameter of a hit by Cramer's rule, edges included.
pub fn ray_tri(o: &Vec3, d: &Vec3, t: &Tri) -> Option<f64> {
    let e1 = t[1] - t[0];
    let e2 = t[2] - t[0];
    let m = Mat3::from_columns(&[-*d, e1, e2]);
    let det = m.determinant();
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = m.try_inverse()?;
    let x = inv * (o - t[0]);
    let (s, u, v) = (x[0], x[1], x[2]);
    let eps = 1e-12;
    (s >= 0.0 && u >= -eps && v >= -eps && u + v <= 1.0 + eps).then_some(s)
}

/// Nearest `(object, distance)` over every triangle of every object.
pub fn brute_first_hit(scene: &Scene, o: &Vec3, d: &Vec3) -> Option<(String, f64)> {
    let mut best: Option<(String, f64)> = None;
    for obj in scene.objects() {
        for t in world_tris(scene, &obj.id) {
            if let Some(s) = ray_tri(o, d, &t) {
                let better = match &best {
                    None => true,
                    Some((id, bs)) => s < *bs || (s == *bs && obj.id < *id),
                };
                if better {
                    best = Some((obj.id.clone(), s));
                }
            }
        }
    }
    best
}

/// Odd number of crossings along a fixed irrational direction.
pub fn brute_contains(tris: &[Tri], p: &Vec3) -> bool {
    let d = Vec3::new(0.3141592653589793, 0.2718281828459045, 0.9101).normalize();
    let hits = tris.iter().filter(|t| ray_tri(p, &d, t).is_some_and(|s| s > 0.0)).count();
    hits % 2 == 1
}

fn closest_on_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> Vec3 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared().max(1e-300)).clamp(0.0, 1.0);
    a + ab * t
}

fn closest_on_triangle(p: &Vec3, t: &Tri) -> Vec3 {
    let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
    let nn = n.norm_squared();
    if nn > 0.0 {
        let q = p - n * ((p - t[0]).dot(&n) / nn);
        let inside = (0..3).all(|i| {
            let a = t[i];
            let b = t[(i + 1) % 3];
            (b - a).cross(&(q - a)).dot(&n) >= 0.0
        });
        if inside {
            return q;
        }
    }
    (0..3)
        .map(|i| closest_on_segment(p, &t[i], &t[(i + 1) % 3]))
        .min_by(|x, y| (x - p).norm().total_cmp(&(y - p).norm()))
        .unwrap()
}

fn segment_segment_distance(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= 1e-300 && e <= 1e-300 {
        return r.norm();
    }
    if a <= 1e-300 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= 1e-300 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

fn segment_crosses(p: &Vec3, q: &Vec3, t: &Tri) -> bool {
    let d = q - p;
    let len = d.norm();
    if len == 0.0 {
        return false;
    }
    ray_tri(p, &(d / len), t).is_some_and(|s| s <= len)
}

/// Exact distance between two triangles (zero when they cross).
pub fn tri_tri_distance(a: &Tri, b: &Tri) -> f64 {
    for (s, t) in [(a, b), (b, a)] {
        for i in 0..3 {
            if segment_crosses(&s[i], &s[(i + 1) % 3], t) {
                return 0.0;
            }
        }
    }
    let mut best = f64::INFINITY;
    for (s, t) in [(a, b), (b, a)] {
        for p in s {
            best = best.min((closest_on_triangle(p, t) - p).norm());
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            best = best.min(segment_segment_distance(&a[i], &a[(i + 1) % 3], &b[j], &b[(j + 1) % 3]));
        }
    }
    best
}

fn tri_box(t: &Tri) -> (Vec3, Vec3) {
    (t[0].inf(&t[1]).inf(&t[2]), t[0].sup(&t[1]).sup(&t[2]))
}

fn box_gap(a: &(Vec3, Vec3), b: &(Vec3, Vec3)) -> f64 {
    let mut g2 = 0.0;
    for k in 0..3 {
        let g = (a.0[k] - b.1[k]).max(b.0[k] - a.1[k]).max(0.0);
        g2 += g * g;
    }
    g2.sqrt()
}

/// Minimum distance between two triangle surfaces, brute force with
/// box pruning against the running best.
pub fn min_separation(a: &[Tri], b: &[Tri]) -> f64 {
    let bb: Vec<_> = b.iter().map(tri_box).collect();
    let mut best = f64::INFINITY;
    for ta in a {
        let ab = tri_box(ta);
        for (tb, bbox) in b.iter().zip(&bb) {
            if box_gap(&ab, bbox) >= best {
                continue;
            }
            best = best.min(tri_tri_distance(ta, tb));
            if best == 0.0 {
                return 0.0;
            }
        }
    }
    best
}

/// Surfaces within 1e-9 or one mesh inside the other.
pub fn brute_intersects(a: &[Tri], b: &[Tri]) -> bool {
    min_separation(a, b) < 1e-9 || brute_contains(b, &a[0][0]) || brute_contains(a, &b[0][0])
}

/// Solid intervals of a closed mesh along the vertical line through `(x, y)`.
///
/// Crossings are signed by the face normal (entering or leaving) and swept as
/// a winding number, so parts of a mesh that touch along a face stay solid
/// across it. Same-sign crossings at one height come from a shared edge and
/// count once.
fn column_intervals(tris: &[Tri], x: f64, y: f64) -> Vec<(f64, f64)> {
    let volume: f64 = tris.iter().map(|t| t[0].dot(&t[1].cross(&t[2]))).sum();
    let orient = if volume < 0.0 { -1.0 } else { 1.0 };
    let mut crossings: Vec<(f64, i32)> = Vec::new();
    for t in tris {
        let (a, b, c) = (t[0], t[1], t[2]);
        let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        if det.abs() < 1e-18 {
            continue;
        }
        let u = ((x - a.x) * (c.y - a.y) - (c.x - a.x) * (y - a.y)) / det;
        let v = ((b.x - a.x) * (y - a.y) - (x - a.x) * (b.y - a.y)) / det;
        if u >= 0.0 && v >= 0.0 && u + v <= 1.0 {
            let z = a.z + u * (b.z - a.z) + v * (c.z - a.z);
            // det is the z component of the unnormalized normal.
            let leaving = det * orient > 0.0;
            crossings.push((z, if leaving { 1 } else { -1 }));
        }
    }
    // Entering sorts before leaving at equal height.
    crossings.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
    crossings.dedup_by(|p, q| p.1 == q.1 && (p.0 - q.0).abs() < 1e-12);
    let mut out = Vec::new();
    let mut winding = 0;
    let mut start = 0.0;
    for (z, s) in crossings {
        let before = winding;
        winding = (winding - s).max(0);
        if before == 0 && winding > 0 {
            start = z;
        } else if before > 0 && winding == 0 {
            out.push((start, z));
        }
    }
    out
}

/// Whether some voxel of an `h`-spaced lattice is occupied by both meshes
/// (voxel center inside each solid). Columns are visited coarse to fine so
/// overlaps are found early; `max_columns` bounds the work.
pub fn voxel_overlap(a: &[Tri], b: &[Tri], h: f64, max_columns: usize) -> Option<bool> {
    let (alo, ahi) = bounds(a);
    let (blo, bhi) = bounds(b);
    let lo = alo.sup(&blo);
    let hi = ahi.inf(&bhi);
    if (0..3).any(|k| lo[k] > hi[k]) {
        return Some(false);
    }
    let first = |v: f64| ((v / h) - 0.5).ceil() as i64;
    let last = |v: f64| ((v / h) - 0.5).floor() as i64;
    let (i0, i1, j0, j1) = (first(lo.x), last(hi.x), first(lo.y), last(hi.y));
    if i0 > i1 || j0 > j1 {
        return Some(false);
    }
    let span = ((i1 - i0).max(j1 - j0) + 1) as u64;
    let mut stride = span.next_power_of_two() as i64;
    let mut visited = 0usize;
    loop {
        for i in (i0..=i1).filter(|i| (i - i0) % stride == 0) {
            for j in (j0..=j1).filter(|j| (j - j0) % stride == 0) {
                let coarser = stride * 2;
                let seen_before = (i - i0) % coarser == 0 && (j - j0) % coarser == 0 && coarser <= span as i64 * 2;
                if seen_before && stride != span.next_power_of_two() as i64 {
                    continue;
                }
                visited += 1;
                if visited > max_columns {
                    return None;
                }
                let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                let ia = column_intervals(a, x, y);
                if ia.is_empty() {
                    continue;
                }
                let ib = column_intervals(b, x, y);
                for &(a0, a1) in &ia {
                    for &(b0, b1) in &ib {
                        let z0 = a0.max(b0).max(lo.z - h);
                        let z1 = a1.min(b1).min(hi.z + h);
                        if z0 <= z1 && ((z0 / h) - 0.5).ceil() <= ((z1 / h) - 0.5).floor() {
                            return Some(true);
                        }
                    }
                }
            }
        }
        if stride == 1 {
            return Some(false);
        }
        stride /= 2;
    }
}

/// Marked-cell count of the boxes on an `n × n` grid.
pub fn grid_union_area(boxes: &[ScreenBox], n: u32) -> u64 {
    let mut grid = vec![false; (n * n) as usize];
    for b in boxes {
        for y in b.min_y..b.max_y {
            for x in b.min_x..b.max_x {
                grid[(y * n + x) as usize] = true;
            }
        }
    }
    grid.iter().filter(|&&g| g).count() as u64
}

/// Pixel-scan extents and count of `id` in an id map.
pub fn scan_id_map(id_map: &[u16], n: u32, id: u16) -> Option<(ScreenBox, u64)> {
    let mut lo = (u32::MAX, u32::MAX);
    let mut hi = (0u32, 0u32);
    let mut count = 0;
    for y in 0..n {
        for x in 0..n {
            if id_map[(y * n + x) as usize] == id {
                lo = (lo.0.min(x), lo.1.min(y));
                hi = (hi.0.max(x + 1), hi.1.max(y + 1));
                count += 1;
            }
        }
    }
    (count > 0).then(|| (ScreenBox::new(lo.0, lo.1, hi.0, hi.1).unwrap(), count))
}

/// Kolmogorov–Smirnov statistic of samples against Uniform[a, b].
pub fn ks_uniform(samples: &mut [f64], a: f64, b: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = ((x - a) / (b - a)).clamp(0.0, 1.0);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Lowest `min z` over the object's world vertices.
pub fn min_z(scene: &Scene, id: &str) -> f64 {
    tri_vertices(&world_tris(scene, id)).iter().map(|v| v.z).fold(f64::INFINITY, f64::min)
}

/// Exact oracle: no member of `group` touches or contains anything outside
/// it. Returns the first offending pair.
pub fn group_collision_oracle(scene: &Scene, group: &[String]) -> Option<(String, String)> {
    let others: Vec<(String, Vec<Tri>)> = scene
        .objects()
        .iter()
        .filter(|o| !group.contains(&o.id))
        .map(|o| (o.id.clone(), world_tris(scene, &o.id)))
        .collect();
    for m in group {
        let mt = world_tris(scene, m);
        let (mlo, mhi) = bounds(&mt);
        for (id, ot) in &others {
            let (olo, ohi) = bounds(ot);
            if (0..3).any(|k| mlo[k] > ohi[k] + 1e-6 || olo[k] > mhi[k] + 1e-6) {
                continue;
            }
            if brute_intersects(&mt, ot) {
                return Some((m.clone(), id.clone()));
            }
        }
    }
    None
}

/// Commits a record's poses onto a clone of `scene`.
pub fn committed(scene: &Scene, rec: &scenegen::TransformRecord) -> Scene {
    let mut s = scene.clone();
    rec.commit(&mut s).unwrap();
    s
}

/// World triangles of every object, with bounds for cheap rejection.
pub fn scene_tris(scene: &Scene) -> Vec<(String, Vec<Tri>, (Vec3, Vec3))> {
    scene
        .objects()
        .iter()
        .map(|o| {
            let tris = world_tris(scene, &o.id);
            let b = bounds(&tris);
            (o.id.clone(), tris, b)
        })
        .collect()
}

fn slab_hit(o: &Vec3, d: &Vec3, (lo, hi): &(Vec3, Vec3)) -> bool {
    let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
    for k in 0..3 {
        let pad = 1e-6 * (1.0 + hi[k].abs().max(lo[k].abs()));
        let (a, b) = (lo[k] - pad, hi[k] + pad);
        if d[k].abs() < 1e-300 {
            if o[k] < a || o[k] > b {
                return false;
            }
            continue;
        }
        let (mut u, mut v) = ((a - o[k]) / d[k], (b - o[k]) / d[k]);
        if u > v {
            std::mem::swap(&mut u, &mut v);
        }
        t0 = t0.max(u);
        t1 = t1.min(v);
    }
    t0 <= t1
}

/// Same answer as `brute_first_hit`, over precomputed triangles.
pub fn first_hit_in(tris: &[(String, Vec<Tri>, (Vec3, Vec3))], o: &Vec3, d: &Vec3) -> Option<(String, f64)> {
    let mut best: Option<(String, f64)> = None;
    for (id, ts, b) in tris {
        if !slab_hit(o, d, b) {
            continue;
        }
        for t in ts {
            if let Some(s) = ray_tri(o, d, t) {
                let better = match &best {
                    None => true,
                    Some((bid, bs)) => s < *bs || (s == *bs && id < bid),
                };
                if better {
                    best = Some((id.clone(), s));
                }
            }
        }
    }
    best
}

/// Pinhole ray through a pixel center, built from the camera fields alone.
pub fn camera_ray(cam: &scenegen::CameraSpec, px: u32, py: u32) -> (Vec3, Vec3) {
    let f = (cam.target - cam.location).normalize();
    let r = f.cross(&Vec3::z()).normalize();
    let u = r.cross(&f);
    let n = cam.image_size as f64;
    let t = (cam.vertical_fov.to_radians() / 2.0).tan();
    let x = ((px as f64 + 0.5) / n * 2.0 - 1.0) * t;
    let y = (1.0 - (py as f64 + 0.5) / n * 2.0) * t;
    (cam.location, (f + r * x + u * y).normalize())
}

/// Agreement of the id map with the ray oracle on a 32×32 grid of pixel
/// centers. Pixels whose 3×3 neighborhood is not uniform are skipped.
/// Returns `(agreeing, compared)`.
pub fn raster_vs_rays(scene: &Scene, cam: &scenegen::CameraSpec, out: &scenegen::render::RenderOutput) -> (usize, usize) {
    let n = out.image_size;
    let stride = n / 32;
    let tris = scene_tris(scene);
    let (mut agree, mut total) = (0, 0);
    for gy in 0..32 {
        for gx in 0..32 {
            let (px, py) = (gx * stride + stride / 2, gy * stride + stride / 2);
            let v = out.id_map[(py * n + px) as usize];
            let edge = (py.saturating_sub(1)..=(py + 1).min(n - 1))
                .any(|y| (px.saturating_sub(1)..=(px + 1).min(n - 1)).any(|x| out.id_map[(y * n + x) as usize] != v));
            if edge {
                continue;
            }
            total += 1;
            let (o, d) = camera_ray(cam, px, py);
            let want = first_hit_in(&tris, &o, &d).map(|(id, _)| id);
            let got = (v != 0).then(|| out.object_ids[v as usize - 1].clone());
            if want == got {
                agree += 1;
            }
        }
    }
    (agree, total)
}

/// A camera above the middle of the scene, looking at it.
pub fn overview_camera(scene: &Scene, seed: u64) -> scenegen::CameraSpec {
    use rand::SeedableRng;
    let mut c = Vec3::zeros();
    for o in scene.objects() {
        let b = scene.world_aabb(&o.id).unwrap();
        c += (b.min + b.max) / 2.0;
    }
    c /= scene.objects().len() as f64;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    scenegen::camera::random_initial_camera(&mut rng, c, &scenegen::Config::default()).unwrap()
}

// Camera search fixtures.

/// Floor slab plus a 3×2 grid of unit-ish boxes; "target" sits in the middle.
pub fn open_specs() -> Vec<Spec<'static>> {
    let mut v = vec![cuboid_spec("floor", [-300.0, -300.0, -5.0], [300.0, 300.0, 0.0], &[])];
    let names = ["b0", "b1", "b2", "b3", "b4"];
    let spots = [(-60.0, -40.0), (60.0, -40.0), (-60.0, 40.0), (60.0, 40.0), (0.0, 80.0)];
    for (n, (x, y)) in names.iter().zip(spots) {
        v.push(cuboid_spec(n, [x - 10.0, y - 10.0, 0.0005], [x + 10.0, y + 10.0, 20.0], &[]));
    }
    v.push(cuboid_spec("target", [-10.0, -10.0, 0.0005], [10.0, 10.0, 20.0], &[ImplausibilityType::Gravity]));
    v
}

pub fn lifted(scene: &Scene, id: &str, config: &Config) -> (Scene, Vec<TransformRecord>) {
    let index = SceneIndex::build(scene).unwrap();
    let ctx = OpContext {
        scene,
        index: &index,
        config,
    };
    let rec = apply_gravity(ctx, id, 1.5).unwrap().accepted().unwrap();
    (committed(scene, &rec), vec![rec])
}

/// Open scene with an opaque shell around the target's before and after positions.
pub fn enclosed_scene() -> Scene {
    let mut specs = open_specs();
    let shell = Mesh::cuboid(Vec3::new(-12.0, -12.0, 0.0), Vec3::new(12.0, 12.0, 75.0));
    specs.push(Spec {
        id: "shell",
        class: "shell",
        size: SizeCategory::Large,
        mesh: shell,
        pose: Pose3::identity(),
        allowed: &[],
    });
    build_scene(specs, &[])
}

/// Replays the loop from the recorded outcomes and checks every candidate.
pub fn check_trace(search: &CameraSearch, n_iter: usize) {
    let mut dead: Vec<i32> = Vec::new();
    let mut expected = Vec::new();
    let mut outcomes = search.trace.iter();
    for i in 0..2 * n_iter {
        let d = if i % 2 == 0 { -1 } else { 1 };
        if dead.len() == 2 {
            break;
        }
        if dead.contains(&d) {
            continue;
        }
        let Some(step) = outcomes.next() else { break };
        expected.push((i, d));
        if step.visible {
            break;
        }
        if step.obscured {
            dead.push(d);
        }
    }
    let got: Vec<_> = search.trace.iter().map(|s| (s.i, s.direction)).collect();
    assert_eq!(got, expected);
    assert_eq!(search.dead, dead);
    for s in &search.trace {
        let want = search.centroid + search.axis * ((s.i / 2 + 1) as f64 * s.direction as f64 * search.step);
        assert_eq!(s.location, want, "slot {}", s.i);
    }
    // Early stop soundness.
    for (k, s) in search.trace.iter().enumerate() {
        if s.obscured && !s.visible {
            assert!(search.trace[k + 1..].iter().all(|t| t.direction != s.direction));
        }
    }
    let visible: Vec<_> = search.trace.iter().filter(|s| s.visible).collect();
    assert!(visible.len() <= 1);
    assert_eq!(search.camera.is_some(), visible.len() == 1);
    if let Some(c) = &search.camera {
        assert_eq!(c.location, visible[0].location);
        assert_eq!(c.target, search.centroid);
    }
}

