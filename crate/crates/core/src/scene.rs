//! In-memory scenes and object proposals.
//!
//! A [`Scene`] owns every point of a scanned room; an [`ObjectProposal`] only
//! stores indices into it, so a loaded scene can be shared read-only by any
//! number of concurrent renders.

use nalgebra::Vector3;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of z-values treated as floor noise.
pub const FLOOR_PERCENTILE: f64 = 0.005;

/// Below this many points the floor is simply the lowest z.
pub const FLOOR_MIN_POINTS: usize = 200;

/// Smallest proposal accepted from a proposals file.
pub const MIN_PROPOSAL_POINTS: usize = 4;

/// A colored 3D point. Position is in meters, color is RGB in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub position: Vector3<f64>,
    pub color: [f32; 3],
}

impl Point {
    pub fn new(position: Vector3<f64>, color: [f32; 3]) -> Self {
        Self { position, color }
    }

    pub fn from_rgb8(position: Vector3<f64>, rgb: [u8; 3]) -> Self {
        Self {
            position,
            color: rgb.map(|c| c as f32 / 255.0),
        }
    }

    pub fn rgb8(&self) -> [u8; 3] {
        self.color.map(quantize_channel)
    }
}

#[inline]
pub(crate) fn quantize_channel(c: f32) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn new(min: Vector3<f64>, max: Vector3<f64>) -> Self {
        debug_assert!(min.iter().zip(max.iter()).all(|(a, b)| a <= b));
        Self { min, max }
    }

    /// Tight box around `positions`, or `None` when the iterator is empty.
    pub fn from_positions<'a>(positions: impl IntoIterator<Item = &'a Vector3<f64>>) -> Option<Self> {
        let mut it = positions.into_iter();
        let first = *it.next()?;
        let (min, max) = it.fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
        Some(Self { min, max })
    }

    pub fn center(&self) -> Vector3<f64> {
        (self.min + self.max) * 0.5
    }

    pub fn extents(&self) -> Vector3<f64> {
        self.max - self.min
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|k| self.min[k] <= p[k] && p[k] <= self.max[k])
    }
}

/// A point-cloud scene with its derived center and floor height.
#[derive(Debug, Clone)]
pub struct Scene {
    points: Vec<Point>,
    bounds: Aabb,
    center: Vector3<f64>,
    floor_height: f64,
}

impl Scene {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyScene);
        }
        if let Some(i) = points.iter().position(|p| !p.position.iter().all(|c| c.is_finite())) {
            return Err(Error::NonFinitePoint(i));
        }
        let bounds = Aabb::from_positions(points.iter().map(|p| &p.position)).expect("non-empty");
        let floor_height = floor_height_of(&points);
        Ok(Self {
            center: bounds.center(),
            bounds,
            floor_height,
            points,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounds(&self) -> &Aabb {
        &self.bounds
    }

    /// Room center, the midpoint of the scene's bounding box.
    pub fn center(&self) -> Vector3<f64> {
        self.center
    }

    pub fn floor_height(&self) -> f64 {
        self.floor_height
    }
}

/// Midpoint of the scene's axis-aligned bounds.
pub fn compute_scene_center(scene: &Scene) -> Vector3<f64> {
    scene.bounds().center()
}

/// Noise-robust floor estimate: the 0.5th percentile of point heights,
/// or the minimum height for scenes under [`FLOOR_MIN_POINTS`] points.
pub fn compute_floor_height(scene: &Scene) -> f64 {
    floor_height_of(scene.points())
}

fn floor_height_of(points: &[Point]) -> f64 {
    let mut z: Vec<f64> = points.iter().map(|p| p.position.z).collect();
    if z.len() < FLOOR_MIN_POINTS {
        return z.iter().copied().fold(f64::INFINITY, f64::min);
    }
    // Linear interpolation between the two neighbouring order statistics.
    let pos = FLOOR_PERCENTILE * (z.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    let (_, lo_val, upper) = z.select_nth_unstable_by(lo, f64::total_cmp);
    let lo_val = *lo_val;
    if frac == 0.0 || upper.is_empty() {
        return lo_val;
    }
    let hi_val = upper.iter().copied().fold(f64::INFINITY, f64::min);
    lo_val + frac * (hi_val - lo_val)
}

/// A hypothesised object: a set of scene point indices and their tight box.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectProposal {
    id: String,
    point_indices: Vec<usize>,
    bbox: Aabb,
}

impl ObjectProposal {
    /// Builds a proposal over `indices` of `scene`, recomputing its box.
    pub fn new(id: impl Into<String>, indices: Vec<usize>, scene: &Scene) -> Result<Self> {
        let id = id.into();
        if indices.is_empty() {
            return Err(Error::InvalidProposal {
                id,
                reason: "empty index list".into(),
            });
        }
        let mut seen = vec![false; scene.len()];
        for &i in &indices {
            if i >= scene.len() {
                return Err(Error::IndexOutOfRange {
                    id,
                    index: i,
                    len: scene.len(),
                });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidProposal {
                    id,
                    reason: format!("index {i} listed twice"),
                });
            }
        }
        let pts = scene.points();
        let bbox = Aabb::from_positions(indices.iter().map(|&i| &pts[i].position)).expect("non-empty");
        Ok(Self {
            id,
            point_indices: indices,
            bbox,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn point_indices(&self) -> &[usize] {
        &self.point_indices
    }

    pub fn len(&self) -> usize {
        self.point_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point_indices.is_empty()
    }

    pub fn bbox(&self) -> &Aabb {
        &self.bbox
    }
}

/// Draws `n` scene indices from the proposal: without replacement when the
/// proposal has at least `n` points, with replacement otherwise.
pub fn sample_proposal_indices<R: Rng + ?Sized>(
    proposal: &ObjectProposal,
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let src = proposal.point_indices();
    if src.is_empty() {
        return Err(Error::InvalidProposal {
            id: proposal.id().to_owned(),
            reason: "cannot sample from an empty proposal".into(),
        });
    }
    if n == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    if src.len() >= n {
        Ok(index::sample(rng, src.len(), n).into_iter().map(|k| src[k]).collect())
    } else {
        Ok((0..n).map(|_| src[rng.random_range(0..src.len())]).collect())
    }
}

/// Same as [`sample_proposal_indices`] but returns the points themselves.
pub fn sample_proposal_points<R: Rng + ?Sized>(
    proposal: &ObjectProposal,
    scene: &Scene,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Point>> {
    let pts = scene.points();
    Ok(sample_proposal_indices(proposal, n, rng)?
        .into_iter()
        .map(|i| pts[i])
        .collect())
}
