//! Virtual camera placement around an object's prominent face.
//!
//! The prominent face is the side face of the object's box nearest the room
//! center. Cameras sit on the room side of that face, `d_f` meters away
//! horizontally and `d_up` meters above the floor, and look at the face
//! center. A cocoon is a fan of such cameras rotated about the vertical axis
//! through the face center.

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::config::RenderConfig;
use crate::error::{Error, Result};
use crate::scene::{Aabb, ObjectProposal, Scene};

const WORLD_UP: Vector3<f64> = Vector3::new(0.0, 0.0, 1.0);

/// Unified Camera Model intrinsics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub c_x: f64,
    pub c_y: f64,
    pub zeta: f64,
}

impl Intrinsics {
    pub fn as_array(&self) -> [f64; 5] {
        [self.gamma_x, self.gamma_y, self.c_x, self.c_y, self.zeta]
    }

    pub fn is_valid(&self) -> bool {
        self.gamma_x > 0.0 && self.gamma_y > 0.0 && self.zeta >= 0.0 && self.as_array().iter().all(|v| v.is_finite())
    }
}

/// Square-image intrinsics with focal length equal to the image size and
/// the principal point at the image center.
pub fn default_intrinsics(image_size: u32) -> Intrinsics {
    let s = image_size as f64;
    Intrinsics {
        gamma_x: s,
        gamma_y: s,
        c_x: s / 2.0,
        c_y: s / 2.0,
        zeta: 0.0,
    }
}

/// Rigid camera pose built from the look-at basis.
///
/// `right`, `up` and `forward` are world-space unit vectors. The camera frame
/// used for projection is x = right, y = down (image rows), z = forward, which
/// makes [`Pose::rotation`] a proper rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub right: Vector3<f64>,
    pub up: Vector3<f64>,
    pub forward: Vector3<f64>,
    pub position: Vector3<f64>,
}

impl Pose {
    /// Camera-to-world rotation with columns (right, -up, forward).
    pub fn rotation(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.right, -self.up, self.forward])
    }
}

/// One virtual view: intrinsics, pose, and the placement parameters that
/// produced the pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraRig {
    pub intrinsics: Intrinsics,
    pub pose: Pose,
    pub view_angle_deg: f64,
    pub d_f: f64,
    pub d_up: f64,
}

/// Side faces in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Face {
    PosX = 0,
    PosY = 1,
    NegX = 2,
    NegY = 3,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::PosX, Face::PosY, Face::NegX, Face::NegY];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Center of this face of `bbox`, at the box's mid height.
    pub fn center(self, bbox: &Aabb) -> Vector3<f64> {
        let mut c = bbox.center();
        match self {
            Face::PosX => c.x = bbox.max.x,
            Face::PosY => c.y = bbox.max.y,
            Face::NegX => c.x = bbox.min.x,
            Face::NegY => c.y = bbox.min.y,
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProminentFace {
    pub face: Face,
    pub center: Vector3<f64>,
}

impl ProminentFace {
    pub fn index(&self) -> usize {
        self.face.index()
    }
}

/// The side face whose center is closest to `scene_center`. Ties go to the
/// face earliest in [`Face::ALL`].
pub fn prominent_face(bbox: &Aabb, scene_center: &Vector3<f64>) -> Result<ProminentFace> {
    let ext = bbox.extents();
    if ext.x <= 0.0 && ext.y <= 0.0 {
        return Err(Error::DegenerateBox);
    }
    let mut best = ProminentFace {
        face: Face::PosX,
        center: Face::PosX.center(bbox),
    };
    let mut best_dist = (best.center - scene_center).norm();
    for face in &Face::ALL[1..] {
        let center = face.center(bbox);
        let dist = (center - scene_center).norm();
        if dist < best_dist {
            best = ProminentFace { face: *face, center };
            best_dist = dist;
        }
    }
    Ok(best)
}

/// Camera position for one view.
///
/// The base direction points horizontally from the face center toward the
/// scene center (or +x when the two coincide horizontally) and is rotated
/// counter-clockwise by `theta_deg` about the vertical axis.
pub fn camera_position(
    face: &ProminentFace,
    scene_center: &Vector3<f64>,
    d_f: f64,
    d_up: f64,
    floor_height: f64,
    theta_deg: f64,
) -> Vector3<f64> {
    let offset = Vector2::new(scene_center.x - face.center.x, scene_center.y - face.center.y);
    let norm = offset.norm();
    let base = if norm > 1e-9 { offset / norm } else { Vector2::new(1.0, 0.0) };
    let (s, c) = theta_deg.to_radians().sin_cos();
    let dir = Vector2::new(c * base.x - s * base.y, s * base.x + c * base.y);
    Vector3::new(
        face.center.x + d_f * dir.x,
        face.center.y + d_f * dir.y,
        floor_height + d_up,
    )
}

/// Look-at basis from `cam_p` toward `target` with world z as up.
pub fn look_at_pose(cam_p: &Vector3<f64>, target: &Vector3<f64>) -> Result<Pose> {
    let to_target = target - cam_p;
    let dist = to_target.norm();
    if dist <= 1e-9 {
        return Err(Error::CoincidentTarget);
    }
    let forward = to_target / dist;
    let right = forward.cross(&WORLD_UP);
    let right_norm = right.norm();
    if right_norm < 1e-6 {
        return Err(Error::VerticalLookDirection);
    }
    let right = right / right_norm;
    let up = right.cross(&forward).normalize();
    Ok(Pose {
        right,
        up,
        forward,
        position: *cam_p,
    })
}

/// Fan angles `0, +s, -s, +2s, -2s, ...` for `views` cameras.
pub fn cocoon_angles(views: usize, step_deg: f64) -> Vec<f64> {
    (0..views)
        .map(|k| {
            let ring = k.div_ceil(2) as f64;
            if k % 2 == 1 {
                ring * step_deg
            } else {
                -ring * step_deg
            }
        })
        .map(|a| if a == 0.0 { 0.0 } else { a })
        .collect()
}

/// Builds the rig for a single view around an already chosen face.
pub fn place_rig(
    face: &ProminentFace,
    scene: &Scene,
    intrinsics: Intrinsics,
    d_f: f64,
    d_up: f64,
    theta_deg: f64,
) -> Result<CameraRig> {
    let cam_p = camera_position(face, &scene.center(), d_f, d_up, scene.floor_height(), theta_deg);
    let pose = look_at_pose(&cam_p, &face.center)?;
    Ok(CameraRig {
        intrinsics,
        pose,
        view_angle_deg: theta_deg,
        d_f,
        d_up,
    })
}

/// The un-augmented cocoon of `config.views` cameras for one object.
pub fn cocoon_rigs(proposal: &ObjectProposal, scene: &Scene, config: &RenderConfig) -> Result<Vec<CameraRig>> {
    let face = prominent_face(proposal.bbox(), &scene.center())?;
    let intrinsics = default_intrinsics(config.image_size);
    config
        .view_angles()
        .into_iter()
        .map(|theta| place_rig(&face, scene, intrinsics, config.d_f, config.d_up, theta))
        .collect()
}
