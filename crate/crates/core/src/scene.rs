//! Scene graph: objects, meshes, size annotations and the on-top-of
//! dependency tree.
//!
//! A scene is described by one JSON document (see `schemas/scene.schema.json`)
//! that references Wavefront OBJ meshes by path relative to the document.
//! The up axis is always +Z.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Aabb;
use crate::math::{Pose3, Vec3};
use crate::perturb::ImplausibilityType;

pub const SCENE_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeCategory {
    Small,
    Medium,
    Large,
}

impl SizeCategory {
    pub const ALL: [SizeCategory; 3] = [SizeCategory::Small, SizeCategory::Medium, SizeCategory::Large];

    pub fn as_str(self) -> &'static str {
        match self {
            SizeCategory::Small => "small",
            SizeCategory::Medium => "medium",
            SizeCategory::Large => "large",
        }
    }
}

impl fmt::Display for SizeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Triangle mesh in the object's local frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub normals: Option<Vec<Vec3>>,
}

impl Mesh {
    /// Builds a mesh, dropping zero-area triangles.
    ///
    /// `name` is only used in diagnostics.
    pub fn new(name: &str, vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>, normals: Option<Vec<Vec3>>) -> Result<Self> {
        let n = vertices.len();
        if let Some(normals) = &normals {
            if normals.len() != n {
                return Err(Error::Schema(format!(
                    "mesh {name}: {} normals for {n} vertices",
                    normals.len()
                )));
            }
        }
        if let Some(bad) = triangles.iter().flatten().find(|&&i| i as usize >= n) {
            return Err(Error::Schema(format!("mesh {name}: index {bad} out of range ({n} vertices)")));
        }
        let before = triangles.len();
        let triangles: Vec<[u32; 3]> = triangles
            .into_iter()
            .filter(|t| !is_degenerate(&vertices, t))
            .collect();
        if triangles.len() < before {
            log::warn!("mesh {name}: dropped {} degenerate triangles", before - triangles.len());
        }
        if triangles.is_empty() {
            return Err(Error::DegenerateGeometry(name.to_string()));
        }
        Ok(Mesh {
            vertices,
            triangles,
            normals,
        })
    }

    /// Axis-aligned box mesh with 12 outward-facing triangles.
    pub fn cuboid(min: Vec3, max: Vec3) -> Self {
        let c = |x: bool, y: bool, z: bool| {
            Vec3::new(
                if x { max.x } else { min.x },
                if y { max.y } else { min.y },
                if z { max.z } else { min.z },
            )
        };
        let vertices = vec![
            c(false, false, false),
            c(true, false, false),
            c(true, true, false),
            c(false, true, false),
            c(false, false, true),
            c(true, false, true),
            c(true, true, true),
            c(false, true, true),
        ];
        let triangles = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        Mesh {
            vertices,
            triangles,
            normals: None,
        }
    }

    /// Unit cube centered at the origin.
    pub fn unit_cube() -> Self {
        Self::cuboid(Vec3::repeat(-0.5), Vec3::repeat(0.5))
    }

    /// Loads an OBJ file, triangulating polygons and merging all groups.
    pub fn load_obj(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::MissingMesh(path.to_path_buf()));
        }
        let options = tobj::LoadOptions {
            triangulate: true,
            single_index: true,
            ignore_points: true,
            ignore_lines: true,
        };
        let (models, _materials) =
            tobj::load_obj(path, &options).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;

        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut normals = Vec::new();
        let mut all_have_normals = true;
        for model in &models {
            let mesh = &model.mesh;
            let offset = vertices.len() as u32;
            vertices.extend(mesh.positions.chunks_exact(3).map(|p| Vec3::new(p[0], p[1], p[2])));
            if mesh.normals.len() == mesh.positions.len() {
                normals.extend(mesh.normals.chunks_exact(3).map(|n| Vec3::new(n[0], n[1], n[2])));
            } else {
                all_have_normals = false;
            }
            triangles.extend(
                mesh.indices
                    .chunks_exact(3)
                    .map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]),
            );
        }
        let normals = (all_have_normals && !normals.is_empty()).then(|| {
            normals
                .into_iter()
                .map(|n: Vec3| n.try_normalize(0.0).unwrap_or_else(Vec3::z))
                .collect()
        });
        Mesh::new(&path.display().to_string(), vertices, triangles, normals)
    }

    pub fn to_obj_string(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        let t = self.triangles[i];
        [
            self.vertices[t[0] as usize],
            self.vertices[t[1] as usize],
            self.vertices[t[2] as usize],
        ]
    }
}

fn is_degenerate(vertices: &[Vec3], t: &[u32; 3]) -> bool {
    let a = vertices[t[0] as usize];
    let b = vertices[t[1] as usize];
    let c = vertices[t[2] as usize];
    let e1 = b - a;
    let e2 = c - a;
    let longest = e1.norm_squared().max(e2.norm_squared()).max((c - b).norm_squared());
    let area2 = e1.cross(&e2).norm();
    !area2.is_finite() || area2 <= 1e-12 * longest
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneObject {
    pub id: String,
    pub class_label: String,
    pub size_category: SizeCategory,
    pub mesh_ref: String,
    pub pose: Pose3,
    pub allowed_transforms: BTreeSet<ImplausibilityType>,
}

/// Which object rests on which. Each object has at most one supporter.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DependencyTree {
    /// Supporter id to supported ids, children sorted by id.
    edges: BTreeMap<String, Vec<String>>,
    supporter: BTreeMap<String, String>,
}

impl DependencyTree {
    pub fn edges(&self) -> &BTreeMap<String, Vec<String>> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.supporter.len()
    }

    pub fn supporter_of(&self, id: &str) -> Option<&str> {
        self.supporter.get(id).map(String::as_str)
    }

    pub fn children(&self, id: &str) -> &[String] {
        self.edges.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Edge list as `[supporter, supported]` pairs, sorted.
    pub fn edge_pairs(&self) -> Vec<[String; 2]> {
        self.edges
            .iter()
            .flat_map(|(s, kids)| kids.iter().map(move |k| [s.clone(), k.clone()]))
            .collect()
    }

    fn build(pairs: &[[String; 2]], known: &HashMap<String, usize>) -> Result<Self> {
        let mut tree = DependencyTree::default();
        for [supporter, supported] in pairs {
            for id in [supporter, supported] {
                if !known.contains_key(id) {
                    return Err(Error::Schema(format!("dependency references unknown object {id}")));
                }
            }
            if supporter == supported {
                return Err(Error::Schema(format!("object {supporter} supports itself")));
            }
            if let Some(prev) = tree.supporter.insert(supported.clone(), supporter.clone()) {
                return Err(Error::Schema(format!(
                    "object {supported} has two supporters ({prev}, {supporter})"
                )));
            }
            tree.edges.entry(supporter.clone()).or_default().push(supported.clone());
        }
        for kids in tree.edges.values_mut() {
            kids.sort();
        }
        // A cycle shows up as a walk up the supporter chain revisiting a node.
        for start in tree.supporter.keys() {
            let mut seen = BTreeSet::new();
            let mut cur = start.as_str();
            while let Some(up) = tree.supporter.get(cur) {
                if !seen.insert(cur) {
                    return Err(Error::Schema(format!("dependency cycle through {cur}")));
                }
                cur = up;
            }
        }
        Ok(tree)
    }
}

/// A loaded scene. Cloning is cheap: meshes are shared.
#[derive(Clone, Debug)]
pub struct Scene {
    pub name: String,
    pub units: String,
    objects: Vec<SceneObject>,
    meshes: BTreeMap<String, Arc<Mesh>>,
    dependency_tree: DependencyTree,
    index: HashMap<String, usize>,
}

impl Scene {
    pub fn new(
        name: impl Into<String>,
        units: impl Into<String>,
        objects: Vec<SceneObject>,
        meshes: BTreeMap<String, Arc<Mesh>>,
        dependencies: &[[String; 2]],
    ) -> Result<Self> {
        let name = name.into();
        if objects.is_empty() {
            return Err(Error::Schema(format!("scene {name} has no objects")));
        }
        let mut index = HashMap::with_capacity(objects.len());
        for (i, obj) in objects.iter().enumerate() {
            if obj.id.is_empty() {
                return Err(Error::Schema("empty object id".into()));
            }
            if obj.class_label.is_empty() {
                return Err(Error::Schema(format!("object {} has an empty class", obj.id)));
            }
            if index.insert(obj.id.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate object id {}", obj.id)));
            }
            if !meshes.contains_key(&obj.mesh_ref) {
                return Err(Error::Schema(format!(
                    "object {} references unloaded mesh {}",
                    obj.id, obj.mesh_ref
                )));
            }
            obj.pose.validate()?;
        }
        let dependency_tree = DependencyTree::build(dependencies, &index)?;
        Ok(Scene {
            name,
            units: units.into(),
            objects,
            meshes,
            dependency_tree,
            index,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_json_str(&text, base)
    }

    /// Parses a scene description, resolving mesh paths against `base_dir`.
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self> {
        let file: SceneFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if file.schema_version != SCENE_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema_version {} (expected {SCENE_SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        if let Some(up) = &file.up_axis {
            if up != "Z" && up != "+Z" {
                return Err(Error::Schema(format!("up_axis {up} not supported, scenes must be +Z up")));
            }
        }
        let mut meshes = BTreeMap::new();
        let mut objects = Vec::with_capacity(file.objects.len());
        for entry in file.objects {
            if !meshes.contains_key(&entry.mesh) {
                let mesh = Mesh::load_obj(&base_dir.join(&entry.mesh))?;
                meshes.insert(entry.mesh.clone(), Arc::new(mesh));
            }
            objects.push(SceneObject {
                id: entry.id,
                class_label: entry.class,
                size_category: entry.size_category,
                mesh_ref: entry.mesh,
                pose: entry.pose,
                allowed_transforms: entry.allowed_transforms.into_iter().collect(),
            });
        }
        Scene::new(file.name, file.units, objects, meshes, &file.dependencies)
    }

    /// Scene description JSON; mesh paths are written as referenced.
    pub fn to_json_string(&self) -> String {
        let file = SceneFile {
            schema_version: SCENE_SCHEMA_VERSION,
            name: self.name.clone(),
            units: self.units.clone(),
            up_axis: Some("Z".into()),
            objects: self
                .objects
                .iter()
                .map(|o| ObjectEntry {
                    id: o.id.clone(),
                    class: o.class_label.clone(),
                    size_category: o.size_category,
                    mesh: o.mesh_ref.clone(),
                    pose: o.pose.clone(),
                    allowed_transforms: o.allowed_transforms.iter().copied().collect(),
                })
                .collect(),
            dependencies: self.dependency_tree.edge_pairs(),
        };
        serde_json::to_string_pretty(&file).expect("scene serializes")
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn meshes(&self) -> &BTreeMap<String, Arc<Mesh>> {
        &self.meshes
    }

    pub fn dependency_tree(&self) -> &DependencyTree {
        &self.dependency_tree
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownObject(id.to_string()))
    }

    pub fn object(&self, id: &str) -> Result<&SceneObject> {
        Ok(&self.objects[self.index_of(id)?])
    }

    pub fn mesh_of(&self, obj: &SceneObject) -> &Mesh {
        &self.meshes[&obj.mesh_ref]
    }

    pub fn set_pose(&mut self, id: &str, pose: Pose3) -> Result<()> {
        pose.validate()?;
        let i = self.index_of(id)?;
        self.objects[i].pose = pose;
        Ok(())
    }

    pub fn world_vertices(&self, id: &str) -> Result<Vec<Vec3>> {
        let obj = self.object(id)?;
        Ok(self
            .mesh_of(obj)
            .vertices
            .iter()
            .map(|v| obj.pose.transform_point(v))
            .collect())
    }

    /// Tight world-space box of the object's transformed vertices.
    pub fn world_aabb(&self, id: &str) -> Result<Aabb> {
        Ok(Aabb::from_points(self.world_vertices(id)?.iter()))
    }

    /// Every object resting (transitively) on `id`, breadth first with
    /// siblings ordered by id, so supporters precede what they support.
    pub fn dependents_of(&self, id: &str) -> Result<Vec<String>> {
        self.index_of(id)?;
        let mut out = Vec::new();
        let mut queue: VecDeque<&str> = VecDeque::from([id]);
        while let Some(cur) = queue.pop_front() {
            for kid in self.dependency_tree.children(cur) {
                out.push(kid.clone());
                queue.push_back(kid);
            }
        }
        Ok(out)
    }

    /// `id` followed by its dependents.
    pub fn group_of(&self, id: &str) -> Result<Vec<String>> {
        let mut group = vec![id.to_string()];
        group.extend(self.dependents_of(id)?);
        Ok(group)
    }

    /// Composes `delta` onto the object's pose and, when `move_dependents`
    /// is set, onto every dependent's pose as well.
    pub fn apply_pose_delta(&mut self, id: &str, delta: &Pose3, move_dependents: bool) -> Result<()> {
        delta.validate()?;
        let ids = if move_dependents {
            self.group_of(id)?
        } else {
            vec![id.to_string()]
        };
        let updated = ids
            .iter()
            .map(|i| self.object(i).and_then(|o| o.pose.then(delta)))
            .collect::<Result<Vec<_>>>()?;
        for (i, pose) in ids.iter().zip(updated) {
            let k = self.index[i];
            self.objects[k].pose = pose;
        }
        Ok(())
    }

    pub fn translate(&mut self, id: &str, offset: Vec3, move_dependents: bool) -> Result<()> {
        self.apply_pose_delta(id, &Pose3::from_translation(offset), move_dependents)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    schema_version: u32,
    name: String,
    units: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    up_axis: Option<String>,
    objects: Vec<ObjectEntry>,
    #[serde(default)]
    dependencies: Vec<[String; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectEntry {
    id: String,
    class: String,
    size_category: SizeCategory,
    mesh: String,
    pose: Pose3,
    #[serde(default)]
    allowed_transforms: Vec<ImplausibilityType>,
}

/// Scene description files (`*.json`) directly inside `dir`, sorted by name.
pub fn scene_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}
