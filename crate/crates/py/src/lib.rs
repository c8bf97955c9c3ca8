//! Python bindings: scenes, operations, camera search, rendering and scores.
//!
//! Structured values (object records, transform records, image metadata)
//! cross the boundary as plain dicts decoded from the library's JSON form.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIndexError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use scenegen::dataset::{generate_scene_images, validate_json, SchemaKind};
use scenegen::perturb::{find_transformation, OpContext};
use scenegen::render::{plausibility_score, score_from_boxes};
use scenegen::{camera, render, ImplausibilityType, SceneIndex, ScreenBox, SelectionState, Vec3};

create_exception!(scenegen_py, SceneGenError, PyException, "Raised for library errors; `kind` names the error class.");

fn err(e: scenegen::Error) -> PyErr {
    Python::attach(|py| {
        let exc = SceneGenError::new_err(e.to_string());
        let _ = exc.value(py).setattr("kind", e.kind());
        exc
    })
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyException::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn from_py<T: serde::de::DeserializeOwned>(py: Python<'_>, value: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = py.import("json")?.call_method1("dumps", (value,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| SceneGenError::new_err(e.to_string()))
}

fn kind(name: &str) -> PyResult<ImplausibilityType> {
    name.parse().map_err(err)
}

fn config_or_default(config: Option<&Config>) -> scenegen::Config {
    config.map(|c| c.inner.clone()).unwrap_or_default()
}

#[pyclass(module = "scenegen_py", from_py_object)]
#[derive(Clone)]
struct Config {
    inner: scenegen::Config,
}

#[pymethods]
impl Config {
    /// Defaults, optionally overridden by a TOML document.
    #[new]
    #[pyo3(signature = (toml=None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        let inner = match toml {
            Some(text) => scenegen::Config::from_toml(text).map_err(err)?,
            None => scenegen::Config::default(),
        };
        Ok(Config { inner })
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner)
    }

    #[getter]
    fn image_size(&self) -> u32 {
        self.inner.image_size
    }

    #[setter]
    fn set_image_size(&mut self, n: u32) -> PyResult<()> {
        let mut c = self.inner.clone();
        c.image_size = n;
        c.validate().map_err(err)?;
        self.inner = c;
        Ok(())
    }
}

#[pyclass(module = "scenegen_py", from_py_object)]
#[derive(Clone)]
struct Scene {
    inner: scenegen::Scene,
}

#[pymethods]
impl Scene {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Scene {
            inner: scenegen::Scene::load(&path).map_err(err)?,
        })
    }

    /// Parses a scene document; mesh paths resolve against `base_dir`.
    #[staticmethod]
    fn from_json(text: &str, base_dir: PathBuf) -> PyResult<Self> {
        Ok(Scene {
            inner: scenegen::Scene::from_json_str(text, &base_dir).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    fn object_ids(&self) -> Vec<String> {
        self.inner.objects().iter().map(|o| o.id.clone()).collect()
    }

    fn class_label(&self, id: &str) -> PyResult<String> {
        Ok(self.inner.object(id).map_err(err)?.class_label.clone())
    }

    fn size_category(&self, id: &str) -> PyResult<String> {
        Ok(self.inner.object(id).map_err(err)?.size_category.to_string())
    }

    fn allowed_transforms(&self, id: &str) -> PyResult<Vec<String>> {
        let obj = self.inner.object(id).map_err(err)?;
        Ok(obj.allowed_transforms.iter().map(|t| t.to_string()).collect())
    }

    fn pose(&self, py: Python<'_>, id: &str) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.object(id).map_err(err)?.pose)
    }

    /// World-space `(min, max)` corners.
    fn world_aabb(&self, id: &str) -> PyResult<([f64; 3], [f64; 3])> {
        let b = self.inner.world_aabb(id).map_err(err)?;
        Ok((b.min.into(), b.max.into()))
    }

    fn supporter_of(&self, id: &str) -> Option<String> {
        self.inner.dependency_tree().supporter_of(id).map(str::to_string)
    }

    fn copy(&self) -> Self {
        self.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.objects().len()
    }

    fn __repr__(&self) -> String {
        format!("Scene({:?}, {} objects)", self.inner.name, self.inner.objects().len())
    }
}

#[pyclass(module = "scenegen_py", from_py_object)]
#[derive(Clone)]
struct TransformRecord {
    inner: scenegen::TransformRecord,
}

#[pymethods]
impl TransformRecord {
    #[staticmethod]
    fn from_dict(py: Python<'_>, value: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(TransformRecord {
            inner: from_py(py, value)?,
        })
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind.to_string()
    }

    #[getter]
    fn object_id(&self) -> String {
        self.inner.object_id.clone()
    }

    fn moved_ids(&self) -> Vec<String> {
        self.inner.moved_ids()
    }

    fn param(&self, name: &str) -> Option<f64> {
        self.inner.param(name)
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner)
    }

    /// Applies the change to `scene` in place.
    fn commit(&self, scene: &mut Scene) -> PyResult<()> {
        self.inner.commit(&mut scene.inner).map_err(err)
    }

    fn revert(&self, scene: &mut Scene) -> PyResult<()> {
        self.inner.revert(&mut scene.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("TransformRecord({}, {:?})", self.inner.kind, self.inner.object_id)
    }
}

#[pyclass(module = "scenegen_py", from_py_object)]
#[derive(Clone)]
struct Camera {
    inner: scenegen::CameraSpec,
}

#[pymethods]
impl Camera {
    #[new]
    #[pyo3(signature = (location, target, vertical_fov=50.0, image_size=512))]
    fn new(location: [f64; 3], target: [f64; 3], vertical_fov: f64, image_size: u32) -> PyResult<Self> {
        let inner = scenegen::CameraSpec::new(Vec3::from(location), Vec3::from(target), vertical_fov, image_size)
            .map_err(err)?;
        Ok(Camera { inner })
    }

    #[getter]
    fn location(&self) -> [f64; 3] {
        self.inner.location.into()
    }

    #[getter]
    fn target(&self) -> [f64; 3] {
        self.inner.target.into()
    }

    #[getter]
    fn vertical_fov(&self) -> f64 {
        self.inner.vertical_fov
    }

    #[getter]
    fn image_size(&self) -> u32 {
        self.inner.image_size
    }

    fn __repr__(&self) -> String {
        let (l, t) = (self.inner.location, self.inner.target);
        format!(
            "Camera(location=({}, {}, {}), target=({}, {}, {}), fov={}, size={})",
            l.x, l.y, l.z, t.x, t.y, t.z, self.inner.vertical_fov, self.inner.image_size
        )
    }
}

#[pyclass(module = "scenegen_py", frozen)]
struct RenderOutput {
    inner: scenegen::RenderOutput,
}

#[pymethods]
impl RenderOutput {
    #[getter]
    fn image_size(&self) -> u32 {
        self.inner.image_size
    }

    /// Row-major RGB8 bytes.
    #[getter]
    fn color<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.color)
    }

    /// Row-major ids; 0 is background, k is `object_ids[k - 1]`.
    #[getter]
    fn id_map(&self) -> Vec<u16> {
        self.inner.id_map.clone()
    }

    #[getter]
    fn object_ids(&self) -> Vec<String> {
        self.inner.object_ids.clone()
    }

    /// Visible objects: id to `{bbox, pixel_count, visible_fraction}`.
    fn per_object(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.per_object)
    }

    fn id_at(&self, x: u32, y: u32) -> PyResult<Option<String>> {
        let n = self.inner.image_size;
        if x >= n || y >= n {
            return Err(PyIndexError::new_err(format!("pixel ({x}, {y}) outside {n}x{n}")));
        }
        Ok(self.inner.id_at(x, y).map(str::to_string))
    }

    fn write_color_png(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write_color_png(&path).map_err(err)
    }

    fn write_id_png(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write_id_png(&path).map_err(err)
    }
}

/// Draws one transformation of `kind` for `object_id` without changing the scene.
#[pyfunction]
#[pyo3(signature = (scene, kind_name, object_id, seed, config=None))]
fn find_transform(
    scene: &Scene,
    kind_name: &str,
    object_id: &str,
    seed: u64,
    config: Option<&Config>,
) -> PyResult<TransformRecord> {
    let config = config_or_default(config);
    let index = SceneIndex::build(&scene.inner).map_err(err)?;
    let ctx = OpContext {
        scene: &scene.inner,
        index: &index,
        config: &config,
    };
    let rec = find_transformation(ctx, kind(kind_name)?, object_id, &mut ChaCha8Rng::seed_from_u64(seed))
        .map_err(err)?;
    Ok(TransformRecord { inner: rec })
}

/// Searches a camera seeing every record's object in `scene` (records already applied).
#[pyfunction]
#[pyo3(signature = (scene, records, seed, config=None))]
fn find_camera(scene: &Scene, records: Vec<TransformRecord>, seed: u64, config: Option<&Config>) -> PyResult<Option<Camera>> {
    let config = config_or_default(config);
    let records: Vec<_> = records.into_iter().map(|r| r.inner).collect();
    let found = camera::find_camera(&scene.inner, &records, &config, &mut ChaCha8Rng::seed_from_u64(seed))
        .map_err(err)?;
    Ok(found.map(|inner| Camera { inner }))
}

#[pyfunction(name = "render")]
fn render_scene(scene: &Scene, camera: &Camera) -> PyResult<RenderOutput> {
    Ok(RenderOutput {
        inner: render::render(&scene.inner, &camera.inner).map_err(err)?,
    })
}

/// One minus the share of the image covered by the union of the boxes of
/// the visible transformed objects.
#[pyfunction]
fn score(output: &RenderOutput, transformed_ids: Vec<String>) -> f64 {
    plausibility_score(&output.inner, &transformed_ids).value
}

/// Same as `score` from explicit `(min_x, min_y, max_x, max_y)` pixel boxes, max exclusive.
#[pyfunction]
fn score_boxes(boxes: Vec<(u32, u32, u32, u32)>, image_size: u32) -> PyResult<f64> {
    let boxes = boxes
        .into_iter()
        .map(|(a, b, c, d)| ScreenBox::new(a, b, c, d).map_err(err))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(score_from_boxes(&boxes, image_size).value)
}

/// Generates one image sequence; returns `(RenderOutput, metadata dict)` pairs.
#[pyfunction]
#[pyo3(signature = (scene, kind_name, seed, camera_index=0, config=None))]
fn generate_sequence(
    py: Python<'_>,
    scene: &Scene,
    kind_name: &str,
    seed: u64,
    camera_index: u32,
    config: Option<&Config>,
) -> PyResult<Vec<(RenderOutput, Py<PyAny>)>> {
    let config = config_or_default(config);
    let t = kind(kind_name)?;
    let mut state = SelectionState::new(&config.target_distribution, seed);
    let images = py
        .detach(|| generate_scene_images(&scene.inner, t, &mut state, &config, seed, camera_index))
        .map_err(err)?;
    images
        .into_iter()
        .map(|g| Ok((RenderOutput { inner: g.output }, to_py(py, &g.metadata)?)))
        .collect()
}

/// Checks a decoded JSON value against the `scene`, `image_metadata` or `manifest` schema.
#[pyfunction]
fn validate(py: Python<'_>, schema: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
    let kind = match schema {
        "scene" => SchemaKind::Scene,
        "image_metadata" => SchemaKind::ImageMetadata,
        "manifest" => SchemaKind::Manifest,
        other => return Err(PyException::new_err(format!("unknown schema {other}"))),
    };
    let value: serde_json::Value = from_py(py, value)?;
    validate_json(kind, &value).map_err(err)
}

#[pyfunction]
fn implausibility_types() -> Vec<&'static str> {
    ImplausibilityType::ALL.iter().map(|t| t.as_str()).collect()
}

#[pymodule]
fn scenegen_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SceneGenError", m.py().get_type::<SceneGenError>())?;
    m.add_class::<Config>()?;
    m.add_class::<Scene>()?;
    m.add_class::<TransformRecord>()?;
    m.add_class::<Camera>()?;
    m.add_class::<RenderOutput>()?;
    m.add_function(wrap_pyfunction!(find_transform, m)?)?;
    m.add_function(wrap_pyfunction!(find_camera, m)?)?;
    m.add_function(wrap_pyfunction!(render_scene, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(score_boxes, m)?)?;
    m.add_function(wrap_pyfunction!(generate_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(implausibility_types, m)?)?;
    Ok(())
}
