//! World-to-camera transforms, Unified Camera Model projection, region of
//! interest and height-priority rasterization.

use std::cmp::Ordering;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::{Intrinsics, Pose};
use crate::error::{Error, Result};
use crate::scene::{quantize_channel, Point};

/// Denominators at or below this are treated as behind the camera.
pub const MIN_DENOMINATOR: f64 = 1e-9;

/// ROI sides narrower than this (in pixels) are widened to one pixel.
const MIN_ROI_EXTENT: f64 = 1e-9;

pub fn world_to_camera(pose: &Pose, p: &Vector3<f64>) -> Vector3<f64> {
    pose.rotation().tr_mul(&(p - pose.position))
}

pub fn camera_to_world(pose: &Pose, p_cam: &Vector3<f64>) -> Vector3<f64> {
    pose.rotation() * p_cam + pose.position
}

/// UCM projection of a camera-frame point, `None` when it lies behind the
/// camera.
#[inline]
pub fn ucm_project(intr: &Intrinsics, p_cam: &Vector3<f64>) -> Option<(f64, f64)> {
    if p_cam.z <= 0.0 {
        return None;
    }
    let denom = intr.zeta * p_cam.norm() + p_cam.z;
    if denom <= MIN_DENOMINATOR {
        return None;
    }
    Some((
        intr.gamma_x * (p_cam.x / denom) + intr.c_x,
        intr.gamma_y * (p_cam.y / denom) + intr.c_y,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedPoint {
    pub u: f64,
    pub v: f64,
    /// Camera-frame z, meters.
    pub depth: f64,
    /// World height, the rasterization priority.
    pub world_z: f64,
    pub color: [f32; 3],
    /// Scene index of the source point; final tie-breaker.
    pub index: u32,
}

/// Precomputed world-to-image mapping for one view.
pub struct Projector {
    rot_t: Matrix3<f64>,
    origin: Vector3<f64>,
    intr: Intrinsics,
}

impl Projector {
    pub fn new(pose: &Pose, intr: Intrinsics) -> Self {
        Self {
            rot_t: pose.rotation().transpose(),
            origin: pose.position,
            intr,
        }
    }

    #[inline]
    pub fn project(&self, point: &Point, index: usize) -> Option<ProjectedPoint> {
        let cam = self.rot_t * (point.position - self.origin);
        let (u, v) = ucm_project(&self.intr, &cam)?;
        Some(ProjectedPoint {
            u,
            v,
            depth: cam.z,
            world_z: point.position.z,
            color: point.color,
            index: index as u32,
        })
    }

    /// Projects `points[i]` for every `i` in `indices`, dropping points
    /// behind the camera.
    pub fn project_indices(&self, points: &[Point], indices: &[usize]) -> Vec<ProjectedPoint> {
        indices.iter().filter_map(|&i| self.project(&points[i], i)).collect()
    }
}

/// Region of interest in continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Roi {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub epsilon: f64,
}

impl Roi {
    #[inline]
    pub fn contains(&self, u: f64, v: f64) -> bool {
        self.u_min <= u && u <= self.u_max && self.v_min <= v && v <= self.v_max
    }

    /// Half-open binning of (u, v) onto a `size` x `size` grid, clamped to the
    /// last row/column. Returns (row, col), or `None` outside the ROI.
    #[inline]
    pub fn pixel(&self, u: f64, v: f64, size: usize) -> Option<(usize, usize)> {
        if !self.contains(u, v) {
            return None;
        }
        let s = size as f64;
        let col = ((u - self.u_min) / (self.u_max - self.u_min) * s).floor();
        let row = ((v - self.v_min) / (self.v_max - self.v_min) * s).floor();
        Some(((row as usize).min(size - 1), (col as usize).min(size - 1)))
    }
}

fn extend(lo: f64, hi: f64, eps: f64) -> (f64, f64) {
    let (lo, hi) = if hi - lo < MIN_ROI_EXTENT {
        let mid = 0.5 * (lo + hi);
        (mid - 0.5, mid + 0.5)
    } else {
        (lo, hi)
    };
    let pad = eps * (hi - lo);
    (lo - pad, hi + pad)
}

/// Tight bounds of the object's projections, each side pushed out by
/// `epsilon` times that side's extent.
pub fn compute_roi(object: &[ProjectedPoint], epsilon: f64) -> Result<Roi> {
    if object.is_empty() {
        return Err(Error::BehindCamera);
    }
    let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in object {
        u0 = u0.min(p.u);
        u1 = u1.max(p.u);
        v0 = v0.min(p.v);
        v1 = v1.max(p.v);
    }
    let (u_min, u_max) = extend(u0, u1, epsilon);
    let (v_min, v_max) = extend(v0, v1, epsilon);
    Ok(Roi {
        u_min,
        u_max,
        v_min,
        v_max,
        epsilon,
    })
}

/// An RGB raster with a per-pixel occupancy mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticImage {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB, `height * width * 3` bytes.
    pub pixels: Vec<u8>,
    pub occupancy: Vec<bool>,
    pub background: [u8; 3],
}

impl SyntheticImage {
    pub fn blank(width: usize, height: usize, background: [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            pixels.extend_from_slice(&background);
        }
        Self {
            width,
            height,
            pixels,
            occupancy: vec![false; width * height],
            background,
        }
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let i = 3 * (row * self.width + col);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn is_occupied(&self, row: usize, col: usize) -> bool {
        self.occupancy[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, rgb: [u8; 3]) {
        let k = row * self.width + col;
        self.pixels[3 * k..3 * k + 3].copy_from_slice(&rgb);
        self.occupancy[k] = true;
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }
}

/// Strict priority order: higher world z, then nearer, then lower index.
#[inline]
pub fn outranks(a: &ProjectedPoint, b: &ProjectedPoint) -> bool {
    match a.world_z.total_cmp(&b.world_z) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => match a.depth.total_cmp(&b.depth) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => a.index < b.index,
        },
    }
}

/// Streaming height-priority z-buffer over a square grid.
pub struct RasterGrid {
    roi: Roi,
    size: usize,
    cells: Vec<Option<ProjectedPoint>>,
}

impl RasterGrid {
    pub fn new(roi: Roi, size: usize) -> Self {
        Self {
            roi,
            size,
            cells: vec![None; size * size],
        }
    }

    /// Offers a projection to its pixel; ignored outside the ROI.
    #[inline]
    pub fn insert(&mut self, p: &ProjectedPoint) {
        let Some((row, col)) = self.roi.pixel(p.u, p.v, self.size) else {
            return;
        };
        let cell = &mut self.cells[row * self.size + col];
        match cell {
            Some(cur) if !outranks(p, cur) => {}
            _ => *cell = Some(*p),
        }
    }

    pub fn finish(self, background: [u8; 3]) -> SyntheticImage {
        let mut img = SyntheticImage::blank(self.size, self.size, background);
        for (k, cell) in self.cells.iter().enumerate() {
            if let Some(p) = cell {
                img.set(k / self.size, k % self.size, p.color.map(quantize_channel));
            }
        }
        img
    }
}

/// Assigns projections inside `roi` to a `size` x `size` grid. When several
/// land on one pixel the highest point in world z wins.
pub fn rasterize(projections: &[ProjectedPoint], roi: &Roi, size: usize, background: [u8; 3]) -> SyntheticImage {
    let mut grid = RasterGrid::new(*roi, size);
    for p in projections {
        grid.insert(p);
    }
    grid.finish(background)
}
