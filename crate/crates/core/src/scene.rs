//! Scene description: projection surfaces, the target CG object, observer
//! and projector cameras, and pose timelines for moving surfaces.
//!
//! Each observer eye camera sits at its lens' optical center with +z along
//! the optical axis; the eye proper is `etl_eye_offset` behind it. Depths
//! rendered from these cameras are therefore distances from the lens plane,
//! which is what the placement math expects.

use crate::img::{ImageError, RadianceImage};
use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

pub type Pose = Isometry3<f64>;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("mesh: {0}")]
    BadMesh(String),
    #[error("camera: {0}")]
    BadCamera(String),
    #[error("scene file: {0}")]
    Format(String),
    #[error("obj line {line}: {message}")]
    Obj { line: usize, message: String },
    #[error("timeline row {row}: {message}")]
    Timeline { row: usize, message: String },
    #[error("unknown surface id {0}")]
    UnknownSurface(String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Indexed triangle mesh with optional per-vertex texture coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3<f64>>,
    pub indices: Vec<[u32; 3]>,
    /// Either empty or one UV per vertex.
    pub uvs: Vec<[f64; 2]>,
}

impl TriangleMesh {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.vertices.is_empty() || self.indices.is_empty() {
            return Err(SceneError::BadMesh("empty mesh".into()));
        }
        if !self.uvs.is_empty() && self.uvs.len() != self.vertices.len() {
            return Err(SceneError::BadMesh(format!(
                "{} uvs for {} vertices",
                self.uvs.len(),
                self.vertices.len()
            )));
        }
        let n = self.vertices.len() as u32;
        for (t, tri) in self.indices.iter().enumerate() {
            for &i in tri {
                if i >= n {
                    return Err(SceneError::BadMesh(format!(
                        "triangle {t} references vertex {i} of {n}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Axis-aligned rectangle in the local XY plane, centered at the origin,
    /// with UVs covering [0,1]^2. `width` spans x, `height` spans y.
    pub fn rectangle(width: f64, height: f64) -> TriangleMesh {
        let hw = width / 2.0;
        let hh = height / 2.0;
        TriangleMesh {
            vertices: vec![
                Point3::new(-hw, -hh, 0.0),
                Point3::new(hw, -hh, 0.0),
                Point3::new(hw, hh, 0.0),
                Point3::new(-hw, hh, 0.0),
            ],
            indices: vec![[0, 1, 2], [0, 2, 3]],
            uvs: vec![[0.0, 1.0], [1.0, 1.0], [1.0, 0.0], [0.0, 0.0]],
        }
    }

    /// Rectangle whose four corners are given explicitly (in local space),
    /// UVs covering [0,1]^2 from bottom-left counterclockwise.
    pub fn quad(corners: [Point3<f64>; 4]) -> TriangleMesh {
        TriangleMesh {
            vertices: corners.to_vec(),
            indices: vec![[0, 1, 2], [0, 2, 3]],
            uvs: vec![[0.0, 1.0], [1.0, 1.0], [1.0, 0.0], [0.0, 0.0]],
        }
    }

    /// Axis-aligned box centered at the origin (no UVs).
    pub fn cuboid(sx: f64, sy: f64, sz: f64) -> TriangleMesh {
        let (hx, hy, hz) = (sx / 2.0, sy / 2.0, sz / 2.0);
        let v = |x: f64, y: f64, z: f64| Point3::new(x, y, z);
        let vertices = vec![
            v(-hx, -hy, -hz),
            v(hx, -hy, -hz),
            v(hx, hy, -hz),
            v(-hx, hy, -hz),
            v(-hx, -hy, hz),
            v(hx, -hy, hz),
            v(hx, hy, hz),
            v(-hx, hy, hz),
        ];
        let indices = vec![
            [0, 1, 2],
            [0, 2, 3],
            [4, 6, 5],
            [4, 7, 6],
            [0, 4, 5],
            [0, 5, 1],
            [3, 2, 6],
            [3, 6, 7],
            [0, 3, 7],
            [0, 7, 4],
            [1, 5, 6],
            [1, 6, 2],
        ];
        TriangleMesh {
            vertices,
            indices,
            uvs: Vec::new(),
        }
    }

    /// Minimal OBJ support: `v`, `vt` and triangulated `f` records.
    pub fn from_obj_str(text: &str) -> Result<TriangleMesh, SceneError> {
        let mut vertices = Vec::new();
        let mut obj_uvs: Vec<[f64; 2]> = Vec::new();
        let mut faces: Vec<[(usize, Option<usize>); 3]> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("v") => {
                    let mut coords = [0.0; 3];
                    for c in &mut coords {
                        *c = parts
                            .next()
                            .ok_or_else(|| SceneError::Obj {
                                line: lineno + 1,
                                message: "vertex needs 3 coordinates".into(),
                            })?
                            .parse()
                            .map_err(|e| SceneError::Obj {
                                line: lineno + 1,
                                message: format!("bad coordinate: {e}"),
                            })?;
                    }
                    vertices.push(Point3::new(coords[0], coords[1], coords[2]));
                }
                Some("vt") => {
                    let mut uv = [0.0; 2];
                    for c in &mut uv {
                        *c = parts
                            .next()
                            .ok_or_else(|| SceneError::Obj {
                                line: lineno + 1,
                                message: "vt needs 2 coordinates".into(),
                            })?
                            .parse()
                            .map_err(|e| SceneError::Obj {
                                line: lineno + 1,
                                message: format!("bad coordinate: {e}"),
                            })?;
                    }
                    obj_uvs.push(uv);
                }
                Some("f") => {
                    let verts: Vec<(usize, Option<usize>)> = parts
                        .map(|p| {
                            let mut it = p.split('/');
                            let vi: usize = it
                                .next()
                                .unwrap()
                                .parse()
                                .map_err(|e| SceneError::Obj {
                                    line: lineno + 1,
                                    message: format!("bad face index: {e}"),
                                })?;
                            let ti = match it.next() {
                                Some("") | None => None,
                                Some(s) => Some(s.parse::<usize>().map_err(|e| {
                                    SceneError::Obj {
                                        line: lineno + 1,
                                        message: format!("bad uv index: {e}"),
                                    }
                                })?),
                            };
                            Ok((vi, ti))
                        })
                        .collect::<Result<_, SceneError>>()?;
                    if verts.len() < 3 {
                        return Err(SceneError::Obj {
                            line: lineno + 1,
                            message: "face needs at least 3 vertices".into(),
                        });
                    }
                    for i in 1..verts.len() - 1 {
                        faces.push([verts[0], verts[i], verts[i + 1]]);
                    }
                }
                _ => {}
            }
        }
        // re-index so each (vertex, uv) pair is a unique vertex
        let mut mesh = TriangleMesh {
            vertices: Vec::new(),
            indices: Vec::new(),
            uvs: Vec::new(),
        };
        let has_uvs = !obj_uvs.is_empty();
        let mut remap: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for face in faces {
            let mut tri = [0u32; 3];
            for (k, &(vi, ti)) in face.iter().enumerate() {
                let key = (vi, ti.unwrap_or(0));
                let idx = *remap.entry(key).or_insert_with(|| {
                    let idx = mesh.vertices.len() as u32;
                    mesh.vertices.push(vertices[vi - 1]);
                    if has_uvs {
                        let uv = ti.map(|t| obj_uvs[t - 1]).unwrap_or([0.0, 0.0]);
                        mesh.uvs.push(uv);
                    }
                    idx
                });
                tri[k] = idx;
            }
            mesh.indices.push(tri);
        }
        mesh.validate()?;
        Ok(mesh)
    }
}

/// Grayscale texture sampled bilinearly in [0,1]^2; outside samples are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Texture {
    image: RadianceImage,
}

impl Texture {
    pub fn from_image(image: RadianceImage) -> Self {
        Texture { image }
    }

    pub fn constant(value: f64, resolution: usize) -> Self {
        Texture {
            image: RadianceImage::from_fn(resolution, resolution, |_, _| value),
        }
    }

    /// Black-and-white checker with `squares` cells per side.
    pub fn checker(squares: usize, resolution: usize) -> Self {
        let cell = resolution as f64 / squares as f64;
        Texture {
            image: RadianceImage::from_fn(resolution, resolution, |x, y| {
                let cx = (x as f64 / cell) as usize;
                let cy = (y as f64 / cell) as usize;
                if (cx + cy) % 2 == 0 {
                    1.0
                } else {
                    0.0
                }
            }),
        }
    }

    /// Vertical stripes, `stripes` periods per side.
    pub fn stripes(stripes: usize, resolution: usize) -> Self {
        let cell = resolution as f64 / (2 * stripes) as f64;
        Texture {
            image: RadianceImage::from_fn(resolution, resolution, |x, _| {
                if (x as f64 / cell) as usize % 2 == 0 {
                    1.0
                } else {
                    0.25
                }
            }),
        }
    }

    pub fn sample(&self, u: f64, v: f64) -> f64 {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return 0.0;
        }
        self.image
            .sample_bilinear(u * self.image.width() as f64, v * self.image.height() as f64)
    }

    pub fn image(&self) -> &RadianceImage {
        &self.image
    }
}

/// Pinhole camera. Camera space is left-handed with +z along the viewing
/// axis, +y up and +x right; pixel y grows downward.
#[derive(Debug, Clone, PartialEq)]
pub struct PinholeCamera {
    /// World-to-camera transform.
    pub view: Isometry3<f64>,
    pub vertical_fov: f64,
    pub width: usize,
    pub height: usize,
}

impl PinholeCamera {
    pub fn look_at(
        position: Point3<f64>,
        target: Point3<f64>,
        up: Vector3<f64>,
        vertical_fov: f64,
        width: usize,
        height: usize,
    ) -> Result<PinholeCamera, SceneError> {
        if !(vertical_fov > 0.0 && vertical_fov < std::f64::consts::PI) {
            return Err(SceneError::BadCamera(format!(
                "vertical fov {vertical_fov} rad out of (0, pi)"
            )));
        }
        if width == 0 || height == 0 {
            return Err(SceneError::BadCamera("zero image dimension".into()));
        }
        Ok(PinholeCamera {
            view: Isometry3::look_at_lh(&position, &target, &up),
            vertical_fov,
            width,
            height,
        })
    }

    pub fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }

    /// Focal length in pixels (same for x and y with square pixels).
    pub fn focal_px(&self) -> f64 {
        (self.height as f64 / 2.0) / (self.vertical_fov / 2.0).tan()
    }

    pub fn cx(&self) -> f64 {
        self.width as f64 / 2.0
    }

    pub fn cy(&self) -> f64 {
        self.height as f64 / 2.0
    }

    /// Camera position in world space.
    pub fn position(&self) -> Point3<f64> {
        self.view.inverse() * Point3::origin()
    }

    /// Viewing direction (+z of camera space) in world space.
    pub fn forward(&self) -> Vector3<f64> {
        self.view.inverse_transform_vector(&Vector3::z())
    }

    pub fn to_camera(&self, p_world: &Point3<f64>) -> Point3<f64> {
        self.view * p_world
    }

    /// Projects a camera-space point to pixel coordinates; `None` behind the
    /// camera. Returns (px, py, z).
    pub fn project_camera_point(&self, p: &Point3<f64>) -> Option<(f64, f64, f64)> {
        if p.z <= 1e-9 {
            return None;
        }
        let f = self.focal_px();
        let px = self.cx() + f * p.x / p.z;
        let py = self.cy() - f * p.y / p.z;
        Some((px, py, p.z))
    }

    pub fn project_world_point(&self, p_world: &Point3<f64>) -> Option<(f64, f64, f64)> {
        self.project_camera_point(&(self.view * p_world))
    }

    /// Tangent-space coordinates of a pixel center: (x/z, y/z) for rays
    /// through that pixel.
    pub fn pixel_to_tan(&self, px: f64, py: f64) -> (f64, f64) {
        let f = self.focal_px();
        ((px - self.cx()) / f, (self.cy() - py) / f)
    }
}

/// A physical projection surface with a stable id for tracking.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub id: String,
    pub mesh: TriangleMesh,
    pub pose: Pose,
}

/// The 3D CG object to display, with its grayscale texture.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetObject {
    pub mesh: TriangleMesh,
    pub pose: Pose,
    pub texture: Texture,
}

/// Full scene: surfaces, target object, the stereo observer and the
/// projector.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub surfaces: Vec<Surface>,
    pub target: TargetObject,
    pub eye_left: PinholeCamera,
    pub eye_right: PinholeCamera,
    pub projector: PinholeCamera,
    /// Distance from each lens plane back to the eye proper, meters.
    pub etl_eye_offset_m: f64,
    pub eye_separation_m: f64,
}

impl Scene {
    pub fn eye(&self, eye: crate::Eye) -> &PinholeCamera {
        match eye {
            crate::Eye::Left => &self.eye_left,
            crate::Eye::Right => &self.eye_right,
        }
    }

    pub fn surface_index(&self, id: &str) -> Result<usize, SceneError> {
        self.surfaces
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| SceneError::UnknownSurface(id.to_string()))
    }

    pub fn set_surface_pose(&mut self, id: &str, pose: Pose) -> Result<(), SceneError> {
        let idx = self.surface_index(id)?;
        self.surfaces[idx].pose = pose;
        Ok(())
    }

    /// Nearest surface vertex distance along the given eye's optical axis.
    pub fn nearest_surface_depth(&self, eye: crate::Eye) -> Option<f64> {
        let cam = self.eye(eye);
        let mut best: Option<f64> = None;
        for s in &self.surfaces {
            for v in &s.mesh.vertices {
                let p = cam.view * (s.pose * v);
                if p.z > 0.0 {
                    best = Some(best.map_or(p.z, |b: f64| b.min(p.z)));
                }
            }
        }
        best
    }

    /// Builds the stereo observer from a head position: eyes displaced along
    /// the head's lateral axis, optical axes parallel to the head's forward
    /// direction.
    #[allow(clippy::too_many_arguments)]
    pub fn stereo_eyes(
        head: Point3<f64>,
        target: Point3<f64>,
        up: Vector3<f64>,
        separation_m: f64,
        vertical_fov: f64,
        width: usize,
        height: usize,
    ) -> Result<(PinholeCamera, PinholeCamera), SceneError> {
        let forward = (target - head).normalize();
        let right = up.cross(&forward).normalize();
        let make = |pos: Point3<f64>| {
            PinholeCamera::look_at(pos, pos + forward, up, vertical_fov, width, height)
        };
        let left = make(head - right * (separation_m / 2.0))?;
        let right_eye = make(head + right * (separation_m / 2.0))?;
        Ok((left, right_eye))
    }
}

// ---------------------------------------------------------------------------
// serializable scene description
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseSpec {
    pub translation: [f64; 3],
    /// Quaternion as [x, y, z, w]; identity when omitted.
    #[serde(default = "identity_quat")]
    pub rotation: [f64; 4],
}

fn identity_quat() -> [f64; 4] {
    [0.0, 0.0, 0.0, 1.0]
}

impl PoseSpec {
    pub fn to_pose(&self) -> Pose {
        let t = Translation3::new(self.translation[0], self.translation[1], self.translation[2]);
        let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
            self.rotation[3],
            self.rotation[0],
            self.rotation[1],
            self.rotation[2],
        ));
        Isometry3::from_parts(t, q)
    }

    pub fn from_pose(pose: &Pose) -> PoseSpec {
        let q = pose.rotation.quaternion();
        PoseSpec {
            translation: [pose.translation.x, pose.translation.y, pose.translation.z],
            rotation: [q.i, q.j, q.k, q.w],
        }
    }
}

impl Default for PoseSpec {
    fn default() -> Self {
        PoseSpec {
            translation: [0.0; 3],
            rotation: identity_quat(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeshSpec {
    Obj {
        obj: String,
    },
    Inline {
        vertices: Vec<[f64; 3]>,
        indices: Vec<[u32; 3]>,
        #[serde(default)]
        uvs: Vec<[f64; 2]>,
    },
}

impl MeshSpec {
    pub fn load(&self, base: &Path) -> Result<TriangleMesh, SceneError> {
        match self {
            MeshSpec::Obj { obj } => {
                let text = std::fs::read_to_string(base.join(obj))?;
                TriangleMesh::from_obj_str(&text)
            }
            MeshSpec::Inline {
                vertices,
                indices,
                uvs,
            } => {
                let mesh = TriangleMesh {
                    vertices: vertices
                        .iter()
                        .map(|v| Point3::new(v[0], v[1], v[2]))
                        .collect(),
                    indices: indices.clone(),
                    uvs: uvs.clone(),
                };
                mesh.validate()?;
                Ok(mesh)
            }
        }
    }

    pub fn from_mesh(mesh: &TriangleMesh) -> MeshSpec {
        MeshSpec::Inline {
            vertices: mesh.vertices.iter().map(|p| [p.x, p.y, p.z]).collect(),
            indices: mesh.indices.clone(),
            uvs: mesh.uvs.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TextureSpec {
    Checker {
        squares: usize,
        #[serde(default = "default_texture_resolution")]
        resolution: usize,
    },
    Stripes {
        stripes: usize,
        #[serde(default = "default_texture_resolution")]
        resolution: usize,
    },
    Constant {
        value: f64,
        #[serde(default = "default_texture_resolution")]
        resolution: usize,
    },
    Pgm {
        path: String,
    },
}

fn default_texture_resolution() -> usize {
    256
}

impl TextureSpec {
    pub fn load(&self, base: &Path) -> Result<Texture, SceneError> {
        Ok(match self {
            TextureSpec::Checker {
                squares,
                resolution,
            } => Texture::checker(*squares, *resolution),
            TextureSpec::Stripes {
                stripes,
                resolution,
            } => Texture::stripes(*stripes, *resolution),
            TextureSpec::Constant { value, resolution } => Texture::constant(*value, *resolution),
            TextureSpec::Pgm { path } => {
                Texture::from_image(RadianceImage::read_pgm(&base.join(path))?)
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub id: String,
    pub mesh: MeshSpec,
    #[serde(default)]
    pub pose: PoseSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetSpec {
    pub mesh: MeshSpec,
    #[serde(default)]
    pub pose: PoseSpec,
    pub texture: TextureSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObserverSpec {
    pub head_position: [f64; 3],
    pub look_at: [f64; 3],
    #[serde(default = "default_up")]
    pub up: [f64; 3],
    pub separation_m: f64,
    pub vertical_fov_deg: f64,
    pub image: [usize; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectorCameraSpec {
    pub position: [f64; 3],
    pub look_at: [f64; 3],
    #[serde(default = "default_up")]
    pub up: [f64; 3],
    pub vertical_fov_deg: f64,
    pub image: [usize; 2],
}

fn default_up() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}

/// On-disk scene description (JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneFile {
    pub surfaces: Vec<SurfaceSpec>,
    pub target: TargetSpec,
    pub observer: ObserverSpec,
    pub projector: ProjectorCameraSpec,
    pub etl_eye_offset_m: f64,
}

fn p3(v: [f64; 3]) -> Point3<f64> {
    Point3::new(v[0], v[1], v[2])
}

fn v3(v: [f64; 3]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

impl SceneFile {
    pub fn build(&self, base: &Path) -> Result<Scene, SceneError> {
        let surfaces = self
            .surfaces
            .iter()
            .map(|s| {
                Ok(Surface {
                    id: s.id.clone(),
                    mesh: s.mesh.load(base)?,
                    pose: s.pose.to_pose(),
                })
            })
            .collect::<Result<Vec<_>, SceneError>>()?;
        let target = TargetObject {
            mesh: self.target.mesh.load(base)?,
            pose: self.target.pose.to_pose(),
            texture: self.target.texture.load(base)?,
        };
        let (eye_left, eye_right) = Scene::stereo_eyes(
            p3(self.observer.head_position),
            p3(self.observer.look_at),
            v3(self.observer.up),
            self.observer.separation_m,
            self.observer.vertical_fov_deg.to_radians(),
            self.observer.image[0],
            self.observer.image[1],
        )?;
        let projector = PinholeCamera::look_at(
            p3(self.projector.position),
            p3(self.projector.look_at),
            v3(self.projector.up),
            self.projector.vertical_fov_deg.to_radians(),
            self.projector.image[0],
            self.projector.image[1],
        )?;
        if self.etl_eye_offset_m < 0.0 {
            return Err(SceneError::Format("etl_eye_offset_m must be >= 0".into()));
        }
        Ok(Scene {
            surfaces,
            target,
            eye_left,
            eye_right,
            projector,
            etl_eye_offset_m: self.etl_eye_offset_m,
            eye_separation_m: self.observer.separation_m,
        })
    }

    pub fn from_json_path(path: &Path) -> Result<SceneFile, SceneError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn load_scene(path: &Path) -> Result<Scene, SceneError> {
        let file = SceneFile::from_json_path(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        file.build(base)
    }
}

// ---------------------------------------------------------------------------
// pose timeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub time_s: f64,
    pub surface_id: String,
    pub pose: PoseSpec,
}

/// Timed rigid poses for moving surfaces. CSV columns:
/// `time_s,surface_id,tx,ty,tz,qx,qy,qz,qw` with a header line; times must
/// be strictly increasing per surface.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PoseTimeline {
    pub records: Vec<PoseRecord>,
}

impl PoseTimeline {
    pub fn from_csv_str(text: &str) -> Result<PoseTimeline, SceneError> {
        let mut records: Vec<PoseRecord> = Vec::new();
        let mut last_time: BTreeMap<String, f64> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                continue;
            }
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = records.len();
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 9 {
                return Err(SceneError::Timeline {
                    row,
                    message: format!("expected 9 columns, got {}", cols.len()),
                });
            }
            let num = |s: &str| -> Result<f64, SceneError> {
                s.parse().map_err(|e| SceneError::Timeline {
                    row,
                    message: format!("bad number {s:?}: {e}"),
                })
            };
            let time_s = num(cols[0])?;
            let surface_id = cols[1].to_string();
            if let Some(&prev) = last_time.get(&surface_id) {
                if time_s <= prev {
                    return Err(SceneError::Timeline {
                        row,
                        message: format!(
                            "time {time_s} not increasing for surface {surface_id} (previous {prev})"
                        ),
                    });
                }
            }
            last_time.insert(surface_id.clone(), time_s);
            records.push(PoseRecord {
                time_s,
                surface_id,
                pose: PoseSpec {
                    translation: [num(cols[2])?, num(cols[3])?, num(cols[4])?],
                    rotation: [num(cols[5])?, num(cols[6])?, num(cols[7])?, num(cols[8])?],
                },
            });
        }
        Ok(PoseTimeline { records })
    }

    pub fn from_csv_path(path: &Path) -> Result<PoseTimeline, SceneError> {
        PoseTimeline::from_csv_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("time_s,surface_id,tx,ty,tz,qx,qy,qz,qw\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.time_s,
                r.surface_id,
                r.pose.translation[0],
                r.pose.translation[1],
                r.pose.translation[2],
                r.pose.rotation[0],
                r.pose.rotation[1],
                r.pose.rotation[2],
                r.pose.rotation[3],
            ));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
