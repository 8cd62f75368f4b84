//! The extended two-pass rendering pipeline.
//!
//! Pass one renders the desired appearance and depth maps from each eye,
//! splits the image into per-power slices with depth filtering, and applies
//! the lens-breathing resize. Pass two projectively textures the surfaces
//! with each compensated slice and captures them from the physical
//! projector, yielding the images the projector actually displays.
//!
//! Everything is deterministic: serial rasterization with a strict
//! lowest-depth-wins z-test (ties keep the earlier, lower-index triangle).

use crate::img::{DepthMap, RadianceImage};
use crate::optics::{
    breathing_scale, depth_filter, fov_scale, required_power, virtual_distance, Diopter, Distance,
    OpticsError, PowerSamples,
};
use crate::scene::{PinholeCamera, Pose, Scene, SceneError, Surface, Texture, TriangleMesh};
use crate::Eye;
use nalgebra::Point3;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Geometry closer than this to a camera plane is clipped.
pub const NEAR_PLANE_M: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("depth maps and color image must share dimensions")]
    SizeMismatch,
    #[error("target object is entirely outside the {0} eye frustum")]
    ObjectOutOfFrustum(Eye),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    /// Apply the lens-breathing resize.
    pub compensation: bool,
    /// Width of the surface-depth bins used to subdivide non-planar
    /// surfaces, meters.
    pub depth_bin_m: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            compensation: true,
            depth_bin_m: 0.05,
        }
    }
}

// ---------------------------------------------------------------------------
// rasterizer
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct RasterVertex {
    cam: Point3<f64>,
    world: Point3<f64>,
    uv: [f64; 2],
}

enum Shading<'a> {
    Flat(f64),
    Textured(&'a Texture),
    /// Sample `image` by projecting the fragment's world position into
    /// `cam`, gated by visibility against `vis_depth`.
    Projective {
        image: &'a RadianceImage,
        cam: &'a PinholeCamera,
        vis_depth: &'a DepthMap,
    },
}

pub struct Framebuffer {
    pub color: RadianceImage,
    pub depth: DepthMap,
}

impl Framebuffer {
    pub fn new(width: usize, height: usize) -> Self {
        Framebuffer {
            color: RadianceImage::new(width, height),
            depth: DepthMap::new(width, height),
        }
    }
}

/// Clips a camera-space triangle against the near plane; emits 0..=2
/// triangles. Attributes interpolate linearly in camera space.
fn clip_near(tri: [RasterVertex; 3]) -> Vec<[RasterVertex; 3]> {
    let inside = |v: &RasterVertex| v.cam.z >= NEAR_PLANE_M;
    let lerp = |a: &RasterVertex, b: &RasterVertex| -> RasterVertex {
        let t = (NEAR_PLANE_M - a.cam.z) / (b.cam.z - a.cam.z);
        RasterVertex {
            cam: Point3::from(a.cam.coords + (b.cam.coords - a.cam.coords) * t),
            world: Point3::from(a.world.coords + (b.world.coords - a.world.coords) * t),
            uv: [
                a.uv[0] + (b.uv[0] - a.uv[0]) * t,
                a.uv[1] + (b.uv[1] - a.uv[1]) * t,
            ],
        }
    };
    let mut poly: Vec<RasterVertex> = Vec::with_capacity(4);
    for i in 0..3 {
        let curr = tri[i];
        let next = tri[(i + 1) % 3];
        let (ci, ni) = (inside(&curr), inside(&next));
        if ci {
            poly.push(curr);
        }
        if ci != ni {
            poly.push(lerp(&curr, &next));
        }
    }
    match poly.len() {
        3 => vec![[poly[0], poly[1], poly[2]]],
        4 => vec![[poly[0], poly[1], poly[2]], [poly[0], poly[2], poly[3]]],
        _ => Vec::new(),
    }
}

fn rasterize_mesh(
    fb: &mut Framebuffer,
    mesh: &TriangleMesh,
    pose: &Pose,
    cam: &PinholeCamera,
    shading: &Shading,
) {
    let width = fb.color.width();
    let height = fb.color.height();
    let f = cam.focal_px();
    let (cx, cy) = (cam.cx(), cam.cy());
    let has_uv = !mesh.uvs.is_empty();

    for tri_idx in &mesh.indices {
        let fetch = |i: u32| -> RasterVertex {
            let world = pose * mesh.vertices[i as usize];
            RasterVertex {
                cam: cam.view * world,
                world,
                uv: if has_uv { mesh.uvs[i as usize] } else { [0.0, 0.0] },
            }
        };
        let tri = [fetch(tri_idx[0]), fetch(tri_idx[1]), fetch(tri_idx[2])];
        for clipped in clip_near(tri) {
            raster_triangle(fb, &clipped, f, cx, cy, width, height, shading);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn raster_triangle(
    fb: &mut Framebuffer,
    tri: &[RasterVertex; 3],
    f: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
    shading: &Shading,
) {
    // screen positions
    let sx: Vec<f64> = tri.iter().map(|v| cx + f * v.cam.x / v.cam.z).collect();
    let sy: Vec<f64> = tri.iter().map(|v| cy - f * v.cam.y / v.cam.z).collect();
    let area = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sx[2] - sx[0]) * (sy[1] - sy[0]);
    if area.abs() < 1e-12 {
        return;
    }
    let min_x = sx.iter().cloned().fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
    let max_x = (sx.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ceil() as i64)
        .min(width as i64 - 1);
    let min_y = sy.iter().cloned().fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
    let max_y = (sy.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ceil() as i64)
        .min(height as i64 - 1);
    if max_x < min_x as i64 || max_y < min_y as i64 {
        return;
    }
    let inv_z = [1.0 / tri[0].cam.z, 1.0 / tri[1].cam.z, 1.0 / tri[2].cam.z];
    // constant-depth triangles interpolate exactly
    let flat_z = (tri[0].cam.z == tri[1].cam.z && tri[1].cam.z == tri[2].cam.z)
        .then_some(tri[0].cam.z);

    for py in min_y..=max_y as usize {
        for px in min_x..=max_x as usize {
            let x = px as f64 + 0.5;
            let y = py as f64 + 0.5;
            let w0 = (sx[1] - x) * (sy[2] - y) - (sx[2] - x) * (sy[1] - y);
            let w1 = (sx[2] - x) * (sy[0] - y) - (sx[0] - x) * (sy[2] - y);
            let w2 = (sx[0] - x) * (sy[1] - y) - (sx[1] - x) * (sy[0] - y);
            // inside test for either winding
            let inside = if area > 0.0 {
                w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0
            } else {
                w0 <= 0.0 && w1 <= 0.0 && w2 <= 0.0
            };
            if !inside {
                continue;
            }
            let (b0, b1, b2) = (w0 / area, w1 / area, w2 / area);
            let frag_inv_z = b0 * inv_z[0] + b1 * inv_z[1] + b2 * inv_z[2];
            if frag_inv_z <= 0.0 {
                continue;
            }
            let z = match flat_z {
                Some(z) => z,
                None => 1.0 / frag_inv_z,
            };
            // strict test: the earlier (lower-index) triangle wins ties
            if z >= fb.depth.raw(px, py) {
                continue;
            }
            let radiance = match shading {
                Shading::Flat(v) => *v,
                Shading::Textured(tex) => {
                    let u = (b0 * tri[0].uv[0] * inv_z[0]
                        + b1 * tri[1].uv[0] * inv_z[1]
                        + b2 * tri[2].uv[0] * inv_z[2])
                        * z;
                    let v = (b0 * tri[0].uv[1] * inv_z[0]
                        + b1 * tri[1].uv[1] * inv_z[1]
                        + b2 * tri[2].uv[1] * inv_z[2])
                        * z;
                    tex.sample(u, v)
                }
                Shading::Projective {
                    image,
                    cam,
                    vis_depth,
                } => {
                    let wx = (b0 * tri[0].world.x * inv_z[0]
                        + b1 * tri[1].world.x * inv_z[1]
                        + b2 * tri[2].world.x * inv_z[2])
                        * z;
                    let wy = (b0 * tri[0].world.y * inv_z[0]
                        + b1 * tri[1].world.y * inv_z[1]
                        + b2 * tri[2].world.y * inv_z[2])
                        * z;
                    let wz = (b0 * tri[0].world.z * inv_z[0]
                        + b1 * tri[1].world.z * inv_z[1]
                        + b2 * tri[2].world.z * inv_z[2])
                        * z;
                    projective_sample(image, cam, vis_depth, &Point3::new(wx, wy, wz))
                }
            };
            fb.depth.set(px, py, z);
            fb.color.set(px, py, radiance);
        }
    }
}

/// Samples a camera-space image at a world point, zero when the point is
/// outside the frustum or hidden from that camera.
fn projective_sample(
    image: &RadianceImage,
    cam: &PinholeCamera,
    vis_depth: &DepthMap,
    world: &Point3<f64>,
) -> f64 {
    let Some((px, py, z)) = cam.project_world_point(world) else {
        return 0.0;
    };
    if px < 0.0 || py < 0.0 || px >= cam.width as f64 || py >= cam.height as f64 {
        return 0.0;
    }
    let xi = (px as usize).min(vis_depth.width() - 1);
    let yi = (py as usize).min(vis_depth.height() - 1);
    match vis_depth.get(xi, yi) {
        Some(d) => {
            let tol = (1e-3 * z).max(1e-4);
            if z <= d + tol {
                image.sample_bilinear(px, py)
            } else {
                0.0
            }
        }
        // no depth recorded at this pixel (silhouette edge): take the sample
        None => image.sample_bilinear(px, py),
    }
}

// ---------------------------------------------------------------------------
// pass one: observer view and slicing
// ---------------------------------------------------------------------------

/// Observer-side render products: the desired appearance of the target and
/// the depth maps of target and surfaces.
#[derive(Debug, Clone)]
pub struct ObserverView {
    pub color: RadianceImage,
    pub object_depth: DepthMap,
    pub surface_depth: DepthMap,
}

impl ObserverView {
    pub fn object_pixels(&self) -> usize {
        self.object_depth.covered_pixels()
    }
}

/// Renders the target object (color + depth) and the projection surfaces
/// (depth only) from one eye camera.
pub fn render_observer_view(scene: &Scene, eye: &PinholeCamera) -> Result<ObserverView, RenderError> {
    let mut fb_obj = Framebuffer::new(eye.width, eye.height);
    let shading = if scene.target.mesh.uvs.is_empty() {
        Shading::Flat(0.85)
    } else {
        Shading::Textured(&scene.target.texture)
    };
    rasterize_mesh(&mut fb_obj, &scene.target.mesh, &scene.target.pose, eye, &shading);

    let mut fb_surf = Framebuffer::new(eye.width, eye.height);
    for s in &scene.surfaces {
        rasterize_mesh(&mut fb_surf, &s.mesh, &s.pose, eye, &Shading::Flat(1.0));
    }
    Ok(ObserverView {
        color: fb_obj.color,
        object_depth: fb_obj.depth,
        surface_depth: fb_surf.depth,
    })
}

/// Depth map of the surfaces as seen from an arbitrary camera.
pub fn render_surface_depth(scene: &Scene, cam: &PinholeCamera) -> DepthMap {
    let mut fb = Framebuffer::new(cam.width, cam.height);
    for s in &scene.surfaces {
        rasterize_mesh(&mut fb, &s.mesh, &s.pose, cam, &Shading::Flat(1.0));
    }
    fb.depth
}

/// Depth map of a single surface from an arbitrary camera.
pub fn render_single_surface_depth(surface: &Surface, cam: &PinholeCamera) -> DepthMap {
    let mut fb = Framebuffer::new(cam.width, cam.height);
    rasterize_mesh(&mut fb, &surface.mesh, &surface.pose, cam, &Shading::Flat(1.0));
    fb.depth
}

/// Observer-space slice images plus the coverage bookkeeping.
#[derive(Debug, Clone)]
pub struct SlicedImages {
    pub images: Vec<RadianceImage>,
    /// Object pixels with radiance but no surface behind them; their
    /// radiance was dropped.
    pub dropped_pixels: usize,
    /// True where an object pixel had no surface coverage.
    pub coverage_gaps: Vec<bool>,
}

/// Splits the observer render into per-power slices: each object pixel's
/// required power is computed from the surface and object depths and its
/// radiance distributed to the two bracketing samples. The pixelwise sum of
/// the slices reproduces the input exactly.
pub fn slice_and_filter(
    color: &RadianceImage,
    object_depth: &DepthMap,
    surface_depth: &DepthMap,
    samples: &PowerSamples,
) -> Result<SlicedImages, RenderError> {
    let (w, h) = (color.width(), color.height());
    if object_depth.width() != w
        || object_depth.height() != h
        || surface_depth.width() != w
        || surface_depth.height() != h
    {
        return Err(RenderError::SizeMismatch);
    }
    let mut images = vec![RadianceImage::new(w, h); samples.len()];
    let mut coverage_gaps = vec![false; w * h];
    let mut dropped = 0usize;
    for y in 0..h {
        for x in 0..w {
            let Some(d_obj) = object_depth.get(x, y) else {
                continue;
            };
            let r = color.get(x, y);
            let Some(d_surf) = surface_depth.get(x, y) else {
                coverage_gaps[y * w + x] = true;
                if r > 0.0 {
                    dropped += 1;
                }
                continue;
            };
            if r == 0.0 {
                continue;
            }
            let v = required_power(Distance::Finite(d_surf), Distance::Finite(d_obj))?;
            let weights = depth_filter(r, v, samples)?;
            images[weights.lower_index].add(x, y, weights.radiance_lower);
            if weights.radiance_upper != 0.0 {
                images[weights.lower_index + 1].add(x, y, weights.radiance_upper);
            }
        }
    }
    Ok(SlicedImages {
        images,
        dropped_pixels: dropped,
        coverage_gaps,
    })
}

// ---------------------------------------------------------------------------
// lens-breathing compensation
// ---------------------------------------------------------------------------

/// Surface pixels grouped into depth bins; each bin is treated as one
/// fronto-parallel plane for the resize.
#[derive(Debug, Clone)]
pub struct DepthBins {
    pub bin_m: f64,
    /// bin index -> mean surface depth of its pixels
    pub means: BTreeMap<i64, f64>,
}

pub fn bin_surface_depths(surface_depth: &DepthMap, bin_m: f64) -> DepthBins {
    let mut acc: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for y in 0..surface_depth.height() {
        for x in 0..surface_depth.width() {
            if let Some(d) = surface_depth.get(x, y) {
                let bin = (d / bin_m).floor() as i64;
                let e = acc.entry(bin).or_insert((0.0, 0));
                e.0 += d;
                e.1 += 1;
            }
        }
    }
    DepthBins {
        bin_m,
        means: acc
            .into_iter()
            .map(|(bin, (sum, count))| (bin, sum / count as f64))
            .collect(),
    }
}

impl DepthBins {
    pub fn bin_of(&self, depth: f64) -> i64 {
        (depth / self.bin_m).floor() as i64
    }
}

/// Per-slice record of the applied resize.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceCompensation {
    pub power_d: f64,
    /// Mean surface depth under the slice's nonzero pixels, if any.
    pub mean_surface_depth_m: Option<f64>,
    /// Height resize factor at the mean depth.
    pub breathing: f64,
    /// Field-of-view multiplier of the virtual projector at the mean depth.
    pub fov_factor: f64,
    /// (bin index, mean depth, resize factor) actually applied.
    pub bins: Vec<(i64, f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct CompensatedSlices {
    pub images: Vec<RadianceImage>,
    pub info: Vec<SliceCompensation>,
}

/// Resize factor for content shown at power `v` on a plane at `d_p`:
/// exactly 1 at zero power.
fn resize_factor(d_p: f64, v: Diopter, d_e: f64) -> Option<f64> {
    if v.0 == 0.0 {
        return Some(1.0);
    }
    let d_v = virtual_distance(Distance::Finite(d_p), v).ok()?;
    breathing_scale(Distance::Finite(d_p), d_v, Distance::Finite(d_e)).ok()
}

/// Applies the lens-breathing resize to each observer-space slice.
///
/// Pixels are grouped by surface depth into bins and every bin is resized
/// about the optical axis by its own constant factor, which is equivalent to
/// modifying the virtual projector's field of view per part. With
/// compensation disabled the images pass through and all factors are 1.
pub fn compensate_slices(
    sliced: &SlicedImages,
    surface_depth: &DepthMap,
    eye: &PinholeCamera,
    d_e: f64,
    samples: &PowerSamples,
    options: &RenderOptions,
) -> Result<CompensatedSlices, RenderError> {
    let bins = bin_surface_depths(surface_depth, options.depth_bin_m);
    let (w, h) = (eye.width, eye.height);
    let f = eye.focal_px();
    let (cx, cy) = (eye.cx(), eye.cy());
    let mut images = Vec::with_capacity(sliced.images.len());
    let mut info = Vec::with_capacity(sliced.images.len());

    for (n, src) in sliced.images.iter().enumerate() {
        let power = samples.powers()[n];
        // factor per depth bin
        let mut bin_factors: BTreeMap<i64, f64> = BTreeMap::new();
        let mut applied: Vec<(i64, f64, f64)> = Vec::new();
        for (&bin, &mean_d) in &bins.means {
            let s = if options.compensation {
                resize_factor(mean_d, power, d_e).unwrap_or(1.0)
            } else {
                1.0
            };
            bin_factors.insert(bin, s);
            applied.push((bin, mean_d, s));
        }

        // slice-level representative depth for reporting
        let mut depth_sum = 0.0;
        let mut depth_n = 0usize;
        for y in 0..h {
            for x in 0..w {
                if src.get(x, y) > 0.0 {
                    if let Some(d) = surface_depth.get(x, y) {
                        depth_sum += d;
                        depth_n += 1;
                    }
                }
            }
        }
        let mean_depth = (depth_n > 0).then(|| depth_sum / depth_n as f64);
        let (breathing, fov_factor) = match mean_depth {
            Some(d_p) => {
                let s = if options.compensation {
                    resize_factor(d_p, power, d_e).unwrap_or(1.0)
                } else {
                    1.0
                };
                let half_extent = d_p * (eye.vertical_fov / 2.0).tan();
                let ff = if s == 1.0 {
                    1.0
                } else {
                    fov_scale(
                        Distance::Finite(half_extent),
                        s,
                        Distance::Finite(d_e),
                        Distance::Finite(d_p),
                    )?
                };
                (s, ff)
            }
            None => (1.0, 1.0),
        };

        let mut out = RadianceImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                let Some(d) = surface_depth.get(x, y) else {
                    continue; // nothing projectable without a surface
                };
                let s = bin_factors
                    .get(&bins.bin_of(d))
                    .copied()
                    .unwrap_or(1.0);
                let value = if s == 1.0 {
                    src.get(x, y)
                } else {
                    // enlarge the pattern by s: sample the source at the
                    // tangent coordinates scaled down by s
                    let (tx, ty) = eye.pixel_to_tan(x as f64 + 0.5, y as f64 + 0.5);
                    let sx = cx + f * (tx / s);
                    let sy = cy - f * (ty / s);
                    src.sample_bilinear(sx, sy)
                };
                out.set(x, y, value);
            }
        }
        images.push(out);
        info.push(SliceCompensation {
            power_d: power.0,
            mean_surface_depth_m: mean_depth,
            breathing,
            fov_factor,
            bins: applied,
        });
    }
    Ok(CompensatedSlices { images, info })
}

// ---------------------------------------------------------------------------
// pass two: projector view
// ---------------------------------------------------------------------------

/// Captures the surfaces, projectively textured with an observer-space
/// image, from the projector's viewpoint.
pub fn render_projector_view(
    surfaces: &[Surface],
    observer_image: &RadianceImage,
    eye: &PinholeCamera,
    eye_surface_depth: &DepthMap,
    projector: &PinholeCamera,
) -> RadianceImage {
    let mut fb = Framebuffer::new(projector.width, projector.height);
    let shading = Shading::Projective {
        image: observer_image,
        cam: eye,
        vis_depth: eye_surface_depth,
    };
    for s in surfaces {
        rasterize_mesh(&mut fb, &s.mesh, &s.pose, projector, &shading);
    }
    fb.color
}

/// Uniform white image covering every surface visible from the projector.
pub fn render_illumination(scene: &Scene) -> RadianceImage {
    let mut fb = Framebuffer::new(scene.projector.width, scene.projector.height);
    for s in &scene.surfaces {
        rasterize_mesh(&mut fb, &s.mesh, &s.pose, &scene.projector, &Shading::Flat(1.0));
    }
    fb.color
}

// ---------------------------------------------------------------------------
// full frame set
// ---------------------------------------------------------------------------

/// One projector frame of a stack: the image displayed when the lens power
/// reaches `power`.
#[derive(Debug, Clone)]
pub struct Slice {
    /// Index into the power samples.
    pub sample_index: usize,
    pub power: Diopter,
    /// Projector-space image, already quantized to 8 bits.
    pub image: RadianceImage,
    pub fov_factor: f64,
}

/// Per-eye set of projection images in display order (left eye ascending
/// power for the up-segment, right eye descending for the down-segment).
#[derive(Debug, Clone)]
pub struct SliceStack {
    pub eye: Eye,
    pub slices: Vec<Slice>,
}

impl SliceStack {
    pub fn slice_by_sample(&self, sample_index: usize) -> Option<&Slice> {
        self.slices.iter().find(|s| s.sample_index == sample_index)
    }
}

/// Intermediate images kept for verification.
#[derive(Debug, Clone)]
pub struct EyeArtifacts {
    pub view: ObserverView,
    pub sliced: SlicedImages,
    pub compensated: CompensatedSlices,
}

/// Everything the projector displays during one sweep period, plus the
/// per-eye intermediates.
#[derive(Debug, Clone)]
pub struct FrameSet {
    pub left: SliceStack,
    pub right: SliceStack,
    /// White surface-illumination frame, quantized to 8 bits.
    pub illumination: RadianceImage,
    pub artifacts_left: EyeArtifacts,
    pub artifacts_right: EyeArtifacts,
}

impl FrameSet {
    pub fn stack(&self, eye: Eye) -> &SliceStack {
        match eye {
            Eye::Left => &self.left,
            Eye::Right => &self.right,
        }
    }

    pub fn artifacts(&self, eye: Eye) -> &EyeArtifacts {
        match eye {
            Eye::Left => &self.artifacts_left,
            Eye::Right => &self.artifacts_right,
        }
    }
}

fn render_eye(
    scene: &Scene,
    eye: Eye,
    samples: &PowerSamples,
    options: &RenderOptions,
) -> Result<(SliceStack, EyeArtifacts), RenderError> {
    let cam = scene.eye(eye);
    let view = render_observer_view(scene, cam)?;
    if view.object_pixels() == 0 {
        return Err(RenderError::ObjectOutOfFrustum(eye));
    }
    let sliced = slice_and_filter(&view.color, &view.object_depth, &view.surface_depth, samples)?;
    let compensated = compensate_slices(
        &sliced,
        &view.surface_depth,
        cam,
        scene.etl_eye_offset_m,
        samples,
        options,
    )?;
    let mut slices = Vec::with_capacity(samples.len());
    for n in 0..samples.len() {
        let mut image = render_projector_view(
            &scene.surfaces,
            &compensated.images[n],
            cam,
            &view.surface_depth,
            &scene.projector,
        );
        image.quantize_8bit();
        slices.push(Slice {
            sample_index: n,
            power: samples.powers()[n],
            image,
            fov_factor: compensated.info[n].fov_factor,
        });
    }
    // display order follows the eye's segment
    if eye == Eye::Right {
        slices.reverse();
    }
    Ok((
        SliceStack { eye, slices },
        EyeArtifacts {
            view,
            sliced,
            compensated,
        },
    ))
}

/// Runs the whole pipeline for both eyes and renders the illumination
/// frame.
pub fn render_frame_set(
    scene: &Scene,
    samples: &PowerSamples,
    options: &RenderOptions,
) -> Result<FrameSet, RenderError> {
    let (left, artifacts_left) = render_eye(scene, Eye::Left, samples, options)?;
    let (right, artifacts_right) = render_eye(scene, Eye::Right, samples, options)?;
    let mut illumination = render_illumination(scene);
    illumination.quantize_8bit();
    Ok(FrameSet {
        left,
        right,
        illumination,
        artifacts_left,
        artifacts_right,
    })
}
