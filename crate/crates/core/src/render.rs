//! Headless z-buffered rasterizer: flat-shaded color pass, object-ID pass,
//! tight screen boxes and the plausibility score.

use std::collections::BTreeMap;
use std::path::Path;

use image::{ImageBuffer, Luma, Rgb};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::camera::{CameraBasis, CameraSpec, NEAR_PLANE};
use crate::error::{Error, Result};
use crate::geometry::{box_union_area, SceneIndex, ScreenBox};
use crate::math::Vec3;
use crate::scene::Scene;

pub const BACKGROUND: [u8; 3] = [0, 0, 0];
const AMBIENT: f64 = 0.3;

fn light_direction() -> Vec3 {
    Vec3::new(0.35, 0.5, 0.8).normalize()
}

/// Pixels and visibility of one object in a frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectPixels {
    pub bbox: ScreenBox,
    pub pixel_count: u64,
    /// `pixel_count` over the pixels the object covers when drawn alone.
    pub visible_fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderOutput {
    pub image_size: u32,
    /// Row-major RGB8; empty for an ID-only pass.
    pub color: Vec<u8>,
    /// Row-major; `0` is background, `k` is `object_ids[k - 1]`.
    pub id_map: Vec<u16>,
    pub object_ids: Vec<String>,
    /// Objects with at least one pixel.
    pub per_object: BTreeMap<String, ObjectPixels>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderMode {
    Full,
    IdOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityScore {
    pub value: f64,
}

/// Deterministic base color for a class label. Components stay in
/// `[72, 247]` so shaded pixels never equal the background.
pub fn class_color(label: &str) -> [u8; 3] {
    let h = Sha256::digest(label.as_bytes());
    [72 + h[0] % 176, 72 + h[1] % 176, 72 + h[2] % 176]
}

/// Vertex in camera space: `(right, up, depth)`.
type CamVert = Vec3;

fn to_camera(cam: &CameraSpec, basis: &CameraBasis, p: &Vec3) -> CamVert {
    let d = p - cam.location;
    Vec3::new(d.dot(&basis.right), d.dot(&basis.up), d.dot(&basis.forward))
}

/// Clips a polygon to `depth >= NEAR_PLANE`.
fn clip_near(poly: &[CamVert]) -> Vec<CamVert> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let a_in = a.z >= NEAR_PLANE;
        let b_in = b.z >= NEAR_PLANE;
        if a_in {
            out.push(a);
        }
        if a_in != b_in {
            let t = (NEAR_PLANE - a.z) / (b.z - a.z);
            let mut p = a + (b - a) * t;
            p.z = NEAR_PLANE;
            out.push(p);
        }
    }
    out
}

struct Raster {
    n: u32,
    tan_half: f64,
}

impl Raster {
    fn screen(&self, v: &CamVert) -> (f64, f64, f64) {
        let n = self.n as f64;
        let x = v.x / (v.z * self.tan_half);
        let y = v.y / (v.z * self.tan_half);
        ((x + 1.0) * 0.5 * n, (1.0 - y) * 0.5 * n, 1.0 / v.z)
    }

    /// Calls `f(pixel_index, inverse_depth)` for every pixel center inside
    /// the projected triangle.
    fn triangle(&self, tri: [CamVert; 3], mut f: impl FnMut(usize, f64)) {
        let poly = clip_near(&tri);
        if poly.len() < 3 {
            return;
        }
        let s: Vec<(f64, f64, f64)> = poly.iter().map(|v| self.screen(v)).collect();
        for k in 1..s.len() - 1 {
            self.fill(s[0], s[k], s[k + 1], &mut f);
        }
    }

    fn fill(&self, a: (f64, f64, f64), b: (f64, f64, f64), c: (f64, f64, f64), f: &mut impl FnMut(usize, f64)) {
        let area = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
        if area.abs() < 1e-12 || !area.is_finite() {
            return;
        }
        let n = self.n as f64;
        let min_x = a.0.min(b.0).min(c.0);
        let max_x = a.0.max(b.0).max(c.0);
        let min_y = a.1.min(b.1).min(c.1);
        let max_y = a.1.max(b.1).max(c.1);
        if max_x < 0.0 || max_y < 0.0 || min_x >= n || min_y >= n {
            return;
        }
        let x0 = (min_x - 0.5).ceil().max(0.0) as u32;
        let x1 = ((max_x - 0.5).floor().min(n - 1.0)) as i64;
        let y0 = (min_y - 0.5).ceil().max(0.0) as u32;
        let y1 = ((max_y - 0.5).floor().min(n - 1.0)) as i64;
        let inv_area = 1.0 / area;
        for py in y0 as i64..=y1 {
            let y = py as f64 + 0.5;
            for px in x0 as i64..=x1 {
                let x = px as f64 + 0.5;
                let w0 = ((c.0 - b.0) * (y - b.1) - (c.1 - b.1) * (x - b.0)) * inv_area;
                let w1 = ((a.0 - c.0) * (y - c.1) - (a.1 - c.1) * (x - c.0)) * inv_area;
                let w2 = 1.0 - w0 - w1;
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                let inv_z = w0 * a.2 + w1 * b.2 + w2 * c.2;
                f(py as usize * self.n as usize + px as usize, inv_z);
            }
        }
    }
}

pub fn render(scene: &Scene, camera: &CameraSpec) -> Result<RenderOutput> {
    let index = SceneIndex::build(scene)?;
    render_with(scene, &index, camera, RenderMode::Full)
}

/// Renders the scene as posed in `index`; `scene` supplies class labels.
pub fn render_with(scene: &Scene, index: &SceneIndex, camera: &CameraSpec, mode: RenderMode) -> Result<RenderOutput> {
    let basis = camera.basis()?;
    let n = camera.image_size;
    let pixels = n as usize * n as usize;
    if scene.objects().len() >= u16::MAX as usize {
        return Err(Error::Schema(format!("{} objects exceed the id map range", scene.objects().len())));
    }
    let raster = Raster {
        n,
        tan_half: basis.tan_half,
    };
    let light = light_direction();
    let mut depth = vec![0.0f64; pixels];
    let mut id_map = vec![0u16; pixels];
    let mut color = if mode == RenderMode::Full {
        vec![0u8; pixels * 3]
    } else {
        Vec::new()
    };
    for px in color.chunks_exact_mut(3) {
        px.copy_from_slice(&BACKGROUND);
    }

    let mut object_ids = Vec::with_capacity(scene.objects().len());
    let mut cam_tris: Vec<Vec<[CamVert; 3]>> = Vec::with_capacity(scene.objects().len());
    for (k, obj) in scene.objects().iter().enumerate() {
        object_ids.push(obj.id.clone());
        let geom = index.get(&obj.id)?;
        let tris: Vec<[CamVert; 3]> = geom
            .triangles
            .iter()
            .map(|t| t.map(|v| to_camera(camera, &basis, &v)))
            .collect();
        let base = class_color(&obj.class_label);
        let id = (k + 1) as u16;
        for (world, tri) in geom.triangles.iter().zip(&tris) {
            let shade = if mode == RenderMode::Full {
                let normal = (world[1] - world[0]).cross(&(world[2] - world[0]));
                let lambert = if normal.norm() > 0.0 {
                    normal.normalize().dot(&light).abs()
                } else {
                    0.0
                };
                let k = AMBIENT + (1.0 - AMBIENT) * lambert;
                base.map(|c| (c as f64 * k).round().clamp(1.0, 255.0) as u8)
            } else {
                base
            };
            raster.triangle(*tri, |i, inv_z| {
                if inv_z > depth[i] {
                    depth[i] = inv_z;
                    id_map[i] = id;
                    if !color.is_empty() {
                        color[3 * i..3 * i + 3].copy_from_slice(&shade);
                    }
                }
            });
        }
        cam_tris.push(tris);
    }

    let mut stats: Vec<Option<(ScreenBox, u64)>> = vec![None; object_ids.len()];
    for (i, &id) in id_map.iter().enumerate() {
        if id == 0 {
            continue;
        }
        let (x, y) = ((i % n as usize) as u32, (i / n as usize) as u32);
        let entry = &mut stats[id as usize - 1];
        match entry {
            None => *entry = Some((ScreenBox::new(x, y, x + 1, y + 1)?, 1)),
            Some((b, count)) => {
                b.min_x = b.min_x.min(x);
                b.min_y = b.min_y.min(y);
                b.max_x = b.max_x.max(x + 1);
                b.max_y = b.max_y.max(y + 1);
                *count += 1;
            }
        }
    }

    let mut per_object = BTreeMap::new();
    for (k, stat) in stats.into_iter().enumerate() {
        let Some((bbox, pixel_count)) = stat else {
            continue;
        };
        let alone = alone_pixel_count(&raster, &cam_tris[k], pixels);
        per_object.insert(
            object_ids[k].clone(),
            ObjectPixels {
                bbox,
                pixel_count,
                visible_fraction: if alone == 0 {
                    0.0
                } else {
                    (pixel_count as f64 / alone as f64).min(1.0)
                },
            },
        );
    }

    Ok(RenderOutput {
        image_size: n,
        color,
        id_map,
        object_ids,
        per_object,
    })
}

fn alone_pixel_count(raster: &Raster, tris: &[[CamVert; 3]], pixels: usize) -> u64 {
    let mut hit = vec![false; pixels];
    for tri in tris {
        raster.triangle(*tri, |i, _| hit[i] = true);
    }
    hit.iter().filter(|&&h| h).count() as u64
}

impl RenderOutput {
    pub fn id_at(&self, x: u32, y: u32) -> Option<&str> {
        let v = self.id_map[(y * self.image_size + x) as usize];
        (v != 0).then(|| self.object_ids[v as usize - 1].as_str())
    }

    pub fn write_color_png(&self, path: &Path) -> Result<()> {
        if self.color.is_empty() {
            return Err(Error::Schema("no color pass to write".into()));
        }
        let img: ImageBuffer<Rgb<u8>, _> = ImageBuffer::from_raw(self.image_size, self.image_size, self.color.clone())
            .ok_or_else(|| Error::Schema("color buffer size mismatch".into()))?;
        img.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }

    pub fn write_id_png(&self, path: &Path) -> Result<()> {
        let img: ImageBuffer<Luma<u16>, _> =
            ImageBuffer::from_raw(self.image_size, self.image_size, self.id_map.clone())
                .ok_or_else(|| Error::Schema("id buffer size mismatch".into()))?;
        img.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }
}

/// `1 − |∪ boxes| / image area` over the transformed objects that have
/// pixels in `output`.
pub fn plausibility_score(output: &RenderOutput, transformed_ids: &[String]) -> PlausibilityScore {
    let boxes: Vec<ScreenBox> = transformed_ids
        .iter()
        .filter_map(|id| output.per_object.get(id))
        .filter(|o| o.pixel_count > 0)
        .map(|o| o.bbox)
        .collect();
    score_from_boxes(&boxes, output.image_size)
}

pub fn score_from_boxes(boxes: &[ScreenBox], image_size: u32) -> PlausibilityScore {
    let area = image_size as f64 * image_size as f64;
    let union = box_union_area(boxes, image_size) as f64;
    PlausibilityScore {
        value: (1.0 - union / area).clamp(0.0, 1.0),
    }
}
