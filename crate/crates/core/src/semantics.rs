//! Per-view geometry vectors and line-delimited metadata records.
//!
//! Layout of the 30 slots (tag [`GEO_LAYOUT`]):
//!
//! | slots   | content                                        |
//! |---------|------------------------------------------------|
//! | 0..3    | object box center                              |
//! | 3..6    | object box extents                             |
//! | 6..9    | camera position                                |
//! | 9..18   | right, up, forward unit vectors                |
//! | 18..23  | gamma_x, gamma_y, c_x, c_y, zeta               |
//! | 23, 24  | d_f, d_up                                      |
//! | 25      | view angle, radians                            |
//! | 26      | ROI extension epsilon                          |
//! | 27      | distance from camera to box center             |
//! | 28      | floor height                                   |
//! | 29      | reserved, always 0                             |

use serde::{Deserialize, Serialize};

use crate::camera::CameraRig;
use crate::error::Result;
use crate::render::ViewMeta;
use crate::scene::Aabb;

pub const GEO_DIM: usize = 30;
pub const GEO_LAYOUT: &str = "geo30-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoSemantics {
    pub layout: String,
    pub values: [f64; GEO_DIM],
}

impl GeoSemantics {
    pub fn rotation_slots(&self) -> [[f64; 3]; 3] {
        let v = &self.values;
        [[v[9], v[10], v[11]], [v[12], v[13], v[14]], [v[15], v[16], v[17]]]
    }
}

pub fn build_geo_vector(bbox: &Aabb, rig: &CameraRig, floor_height: f64, epsilon: f64) -> GeoSemantics {
    let mut v = [0.0; GEO_DIM];
    let center = bbox.center();
    let pose = &rig.pose;
    v[0..3].copy_from_slice(center.as_slice());
    v[3..6].copy_from_slice(bbox.extents().as_slice());
    v[6..9].copy_from_slice(pose.position.as_slice());
    v[9..12].copy_from_slice(pose.right.as_slice());
    v[12..15].copy_from_slice(pose.up.as_slice());
    v[15..18].copy_from_slice(pose.forward.as_slice());
    v[18..23].copy_from_slice(&rig.intrinsics.as_array());
    v[23] = rig.d_f;
    v[24] = rig.d_up;
    v[25] = rig.view_angle_deg.to_radians();
    v[26] = epsilon;
    v[27] = (pose.position - center).norm();
    v[28] = floor_height;
    GeoSemantics {
        layout: GEO_LAYOUT.to_owned(),
        values: v,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRecord {
    pub meta: ViewMeta,
    pub geo: GeoSemantics,
}

/// One JSON line (without the trailing newline).
pub fn serialize_meta(meta: &ViewMeta, geo: &GeoSemantics) -> Result<String> {
    #[derive(Serialize)]
    struct Borrowed<'a> {
        meta: &'a ViewMeta,
        geo: &'a GeoSemantics,
    }
    Ok(serde_json::to_string(&Borrowed { meta, geo })?)
}

pub fn parse_meta(line: &str) -> Result<MetaRecord> {
    Ok(serde_json::from_str(line)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{default_intrinsics, look_at_pose};
    use nalgebra::Vector3;

    fn rig() -> CameraRig {
        CameraRig {
            intrinsics: default_intrinsics(32),
            pose: look_at_pose(&Vector3::new(0.0, -1.0, 0.0), &Vector3::zeros()).unwrap(),
            view_angle_deg: 30.0,
            d_f: 2.0,
            d_up: 1.0,
        }
    }

    #[test]
    fn axis_aligned_rig_layout() {
        let bbox = Aabb::new(Vector3::new(-1.0, 0.0, 0.0), Vector3::new(1.0, 2.0, 0.5));
        let g = build_geo_vector(&bbox, &rig(), -0.25, 0.02);
        assert_eq!(g.values.len(), GEO_DIM);
        assert_eq!(&g.values[9..18], &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(&g.values[0..6], &[0.0, 1.0, 0.25, 2.0, 2.0, 0.5]);
        assert_eq!(&g.values[18..23], &[32.0, 32.0, 16.0, 16.0, 0.0]);
        assert_eq!(g.values[25], 30f64.to_radians());
        assert_eq!(g.values[26], 0.02);
        assert_eq!(g.values[28], -0.25);
        assert_eq!(g.values[29], 0.0);
        // |(0,-1,0) - (0,1,0.25)|
        let d = (0.0f64 + 4.0 + 0.0625).sqrt();
        assert!((g.values[27] - d).abs() < 1e-12);
    }

    #[test]
    fn geo_is_pure() {
        let bbox = Aabb::new(Vector3::new(0.1, 0.2, 0.3), Vector3::new(1.0, 2.0, 3.0));
        let a = build_geo_vector(&bbox, &rig(), 0.0, 0.1);
        let b = build_geo_vector(&bbox, &rig(), 0.0, 0.1);
        assert_eq!(
            a.values.map(f64::to_bits),
            b.values.map(f64::to_bits)
        );
    }
}
