//! End-to-end multi-view rendering of one object proposal.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::augment::{apply_image_aug, dropout_sources, sample_camera_params, CameraSample, ImageAugConfig};
use crate::camera::{default_intrinsics, place_rig, prominent_face, CameraRig, Face, ProminentFace};
use crate::config::{RenderConfig, Source};
use crate::error::{Error, Result};
use crate::projector::{compute_roi, Projector, RasterGrid, Roi, SyntheticImage};
use crate::scene::{ObjectProposal, Scene};
use crate::semantics::{build_geo_vector, GeoSemantics, MetaRecord, GEO_DIM};

// Independent ChaCha streams so that replaying one stage never depends on
// how many draws another stage made.
const STREAM_CAMERA: u64 = 0;
const STREAM_IMAGE: u64 = 1;
const STREAM_DROPOUT: u64 = 2;

/// Stable seed for a (scene, object, view) triple; `view = None` gives the
/// object-level seed.
pub fn derive_seed(global: u64, scene_id: &str, object_id: &str, view: Option<u32>) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    for s in [scene_id, object_id] {
        h.update((s.len() as u64).to_le_bytes());
        h.update(s.as_bytes());
    }
    match view {
        Some(v) => {
            h.update([1]);
            h.update(v.to_le_bytes());
        }
        None => h.update([0]),
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub global: u64,
    pub view_seed: u64,
}

/// Everything needed to reproduce one rendered view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewMeta {
    pub scene_id: String,
    pub object_id: String,
    pub view_index: usize,
    pub seed: SeedRecord,
    pub rig: CameraRig,
    pub epsilon: f64,
    pub roi: Roi,
    pub image_size: u32,
    pub source: Source,
    pub background: [u8; 3],
    pub image_aug: Option<ImageAugConfig>,
    /// Set when camera dropout replaced this slot with another view.
    pub duplicate_of: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedView {
    pub image: SyntheticImage,
    pub meta: ViewMeta,
    pub geo: GeoSemantics,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewFailure {
    pub view_index: usize,
    pub message: String,
}

pub type ViewResult = std::result::Result<RenderedView, ViewFailure>;

#[derive(Debug, Clone)]
pub struct ObjectRender {
    pub object_id: String,
    /// Exactly `config.views` entries, in view order.
    pub views: Vec<ViewResult>,
}

/// Dense arrays for a host training loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewTensors {
    /// (views, height, width, 3)
    pub image_shape: [usize; 4],
    pub images: Vec<u8>,
    /// (views, 30)
    pub geo_shape: [usize; 2],
    pub geo: Vec<f64>,
}

impl ObjectRender {
    pub fn failures(&self) -> impl Iterator<Item = &ViewFailure> {
        self.views.iter().filter_map(|v| v.as_ref().err())
    }

    /// Row-major image and geometry arrays; fails if any view failed.
    pub fn to_tensors(&self) -> std::result::Result<ViewTensors, ViewFailure> {
        let views: Vec<&RenderedView> = self.views.iter().map(|v| v.as_ref()).collect::<std::result::Result<_, _>>().map_err(Clone::clone)?;
        let (h, w) = views.first().map_or((0, 0), |v| (v.image.height, v.image.width));
        let mut images = Vec::with_capacity(views.len() * h * w * 3);
        let mut geo = Vec::with_capacity(views.len() * GEO_DIM);
        for v in &views {
            images.extend_from_slice(&v.image.pixels);
            geo.extend_from_slice(&v.geo.values);
        }
        Ok(ViewTensors {
            image_shape: [views.len(), h, w, 3],
            images,
            geo_shape: [views.len(), GEO_DIM],
            geo,
        })
    }
}

/// Projects, bounds and rasterizes one view for a fixed rig.
pub fn rasterize_view(
    scene: &Scene,
    proposal: &ObjectProposal,
    rig: &CameraRig,
    epsilon: f64,
    source: Source,
    size: usize,
    background: [u8; 3],
) -> Result<(SyntheticImage, Roi)> {
    let projector = Projector::new(&rig.pose, rig.intrinsics);
    let points = scene.points();
    let object = projector.project_indices(points, proposal.point_indices());
    let roi = compute_roi(&object, epsilon)?;
    let mut grid = RasterGrid::new(roi, size);
    match source {
        Source::Object => object.iter().for_each(|p| grid.insert(p)),
        Source::Scene => {
            for (i, p) in points.iter().enumerate() {
                if let Some(pp) = projector.project(p, i) {
                    grid.insert(&pp);
                }
            }
        }
    }
    Ok((grid.finish(background), roi))
}

fn finish_view(
    scene: &Scene,
    proposal: &ObjectProposal,
    rig: CameraRig,
    epsilon: f64,
    mut meta: ViewMeta,
) -> Result<RenderedView> {
    let (mut image, roi) = rasterize_view(
        scene,
        proposal,
        &rig,
        epsilon,
        meta.source,
        meta.image_size as usize,
        meta.background,
    )?;
    if let Some(aug) = &meta.image_aug {
        let mut rng = stream_rng(meta.seed.view_seed, STREAM_IMAGE);
        image = apply_image_aug(&image, &mut rng, aug);
    }
    meta.roi = roi;
    let geo = build_geo_vector(proposal.bbox(), &rig, scene.floor_height(), epsilon);
    Ok(RenderedView { image, meta, geo })
}

/// Renders every view of `proposal`, then applies camera dropout if
/// configured. Seeds come from `config.seed`, `scene_id` and the object id,
/// so results do not depend on call order or threading.
pub fn render_object_views(
    scene: &Scene,
    scene_id: &str,
    proposal: &ObjectProposal,
    config: &RenderConfig,
) -> Result<ObjectRender> {
    let face = match prominent_face(proposal.bbox(), &scene.center()) {
        // all four side faces collapse onto the box axis
        Err(Error::DegenerateBox) => ProminentFace {
            face: Face::PosX,
            center: proposal.bbox().center(),
        },
        other => other?,
    };
    let base_intr = default_intrinsics(config.image_size);
    let augment = config.augment.as_ref();
    let cam_aug = augment.and_then(|a| a.camera.as_ref());
    let object_seed = derive_seed(config.seed, scene_id, proposal.id(), None);

    let fixed = CameraSample {
        d_f: config.d_f,
        d_up: config.d_up,
        epsilon: config.epsilon,
        intrinsics: base_intr,
    };
    let per_object = cam_aug
        .filter(|c| c.per_object)
        .map(|c| sample_camera_params(&mut stream_rng(object_seed, STREAM_CAMERA), c, base_intr));

    let angles = config.view_angles();
    let mut views: Vec<ViewResult> = Vec::with_capacity(angles.len());
    for (k, theta) in angles.into_iter().enumerate() {
        let view_seed = derive_seed(config.seed, scene_id, proposal.id(), Some(k as u32));
        let sample = match (per_object, cam_aug) {
            (Some(s), _) => s,
            (None, Some(c)) => sample_camera_params(&mut stream_rng(view_seed, STREAM_CAMERA), c, base_intr),
            (None, None) => fixed,
        };
        let rendered = place_rig(&face, scene, sample.intrinsics, sample.d_f, sample.d_up, theta).and_then(|rig| {
            let meta = ViewMeta {
                scene_id: scene_id.to_owned(),
                object_id: proposal.id().to_owned(),
                view_index: k,
                seed: SeedRecord {
                    global: config.seed,
                    view_seed,
                },
                rig,
                epsilon: sample.epsilon,
                roi: Roi {
                    u_min: 0.0,
                    u_max: 0.0,
                    v_min: 0.0,
                    v_max: 0.0,
                    epsilon: sample.epsilon,
                },
                image_size: config.image_size,
                source: config.source,
                background: config.background,
                image_aug: augment.and_then(|a| a.image.clone()),
                duplicate_of: None,
            };
            finish_view(scene, proposal, rig, sample.epsilon, meta)
        });
        views.push(rendered.map_err(|e| ViewFailure {
            view_index: k,
            message: e.to_string(),
        }));
    }

    let drop = augment.map_or(0, |a| a.camera_dropout);
    if drop > 0 {
        let sources = dropout_sources(views.len(), drop, &mut stream_rng(object_seed, STREAM_DROPOUT))?;
        let originals = views.clone();
        for (slot, &src) in sources.iter().enumerate() {
            if slot == src {
                continue;
            }
            views[slot] = match &originals[src] {
                Ok(v) => {
                    let mut dup = v.clone();
                    dup.meta.view_index = slot;
                    dup.meta.duplicate_of = Some(src);
                    Ok(dup)
                }
                Err(f) => Err(ViewFailure {
                    view_index: slot,
                    message: format!("duplicate of failed view {src}: {}", f.message),
                }),
            };
        }
    }

    Ok(ObjectRender {
        object_id: proposal.id().to_owned(),
        views,
    })
}

/// Re-renders a view from its metadata record.
pub fn replay_view(scene: &Scene, proposal: &ObjectProposal, record: &MetaRecord) -> Result<RenderedView> {
    if record.meta.object_id != proposal.id() {
        return Err(Error::Config(format!(
            "record is for object `{}`, not `{}`",
            record.meta.object_id,
            proposal.id()
        )));
    }
    let meta = record.meta.clone();
    finish_view(scene, proposal, meta.rig, meta.epsilon, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AugmentConfig;
    use crate::scene::Point;
    use crate::semantics::{parse_meta, serialize_meta};
    use nalgebra::Vector3;

    fn room() -> (Scene, ObjectProposal) {
        let mut pts = Vec::new();
        for i in 0..40 {
            for j in 0..40 {
                pts.push(Point::new(Vector3::new(i as f64 * 0.15, j as f64 * 0.15, 0.0), [0.4; 3]));
            }
        }
        let start = pts.len();
        for k in 0..200 {
            let t = k as f64;
            let p = Vector3::new(
                4.0 + (t * 0.37).sin().abs() * 0.5,
                2.0 + (t * 0.91).cos().abs() * 0.5,
                (t * 0.13).sin().abs() * 0.9,
            );
            pts.push(Point::new(p, [0.9, 0.1, (k % 7) as f32 / 7.0]));
        }
        let scene = Scene::new(pts).unwrap();
        let prop = ObjectProposal::new("chair_3", (start..start + 200).collect(), &scene).unwrap();
        (scene, prop)
    }

    #[test]
    fn default_render_shape() {
        let (scene, prop) = room();
        let out = render_object_views(&scene, "room", &prop, &RenderConfig::default()).unwrap();
        assert_eq!(out.views.len(), 5);
        for v in &out.views {
            let v = v.as_ref().unwrap();
            assert_eq!((v.image.width, v.image.height), (32, 32));
            assert!(v.image.occupied_count() > 0);
        }
        let t = out.to_tensors().unwrap();
        assert_eq!(t.image_shape, [5, 32, 32, 3]);
        assert_eq!(t.images.len(), 5 * 32 * 32 * 3);
        assert_eq!(t.geo_shape, [5, 30]);
    }

    #[test]
    fn single_point_object_one_pixel() {
        let (scene, _) = room();
        let prop = ObjectProposal::new("dot", vec![45], &scene).unwrap();
        let cfg = RenderConfig {
            views: 1,
            source: Source::Object,
            ..Default::default()
        };
        let out = render_object_views(&scene, "room", &prop, &cfg).unwrap();
        assert_eq!(out.views.len(), 1);
        let img = &out.views[0].as_ref().unwrap().image;
        assert_eq!(img.occupied_count(), 1);
        assert!(img.is_occupied(16, 16));
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let (scene, prop) = room();
        let cfg = RenderConfig {
            seed: 42,
            augment: Some(AugmentConfig {
                camera_dropout: 1,
                ..AugmentConfig::enabled()
            }),
            ..Default::default()
        };
        let a = render_object_views(&scene, "room", &prop, &cfg).unwrap();
        let b = render_object_views(&scene, "room", &prop, &cfg).unwrap();
        assert_eq!(a.views, b.views);
    }

    #[test]
    fn replay_matches_including_augmentation_and_dropout() {
        let (scene, prop) = room();
        let cfg = RenderConfig {
            seed: 7,
            augment: Some(AugmentConfig {
                camera_dropout: 2,
                ..AugmentConfig::enabled()
            }),
            ..Default::default()
        };
        let out = render_object_views(&scene, "room", &prop, &cfg).unwrap();
        assert_eq!(out.views.iter().filter(|v| v.as_ref().unwrap().meta.duplicate_of.is_some()).count(), 2);
        for v in &out.views {
            let v = v.as_ref().unwrap();
            let line = serialize_meta(&v.meta, &v.geo).unwrap();
            let rec = parse_meta(&line).unwrap();
            assert_eq!(rec.meta, v.meta);
            assert_eq!(rec.geo, v.geo);
            let again = replay_view(&scene, &prop, &rec).unwrap();
            assert_eq!(again.image, v.image);
        }
    }

    #[test]
    fn per_object_camera_mode_shares_parameters() {
        let (scene, prop) = room();
        let mut aug = AugmentConfig::enabled();
        aug.camera.as_mut().unwrap().per_object = true;
        let cfg = RenderConfig {
            augment: Some(aug),
            ..Default::default()
        };
        let out = render_object_views(&scene, "room", &prop, &cfg).unwrap();
        let first = &out.views[0].as_ref().unwrap().meta;
        for v in &out.views {
            let m = &v.as_ref().unwrap().meta;
            assert_eq!(m.rig.d_f, first.rig.d_f);
            assert_eq!(m.rig.intrinsics, first.rig.intrinsics);
            assert_eq!(m.epsilon, first.epsilon);
        }
    }

    #[test]
    fn seeds_differ_by_every_component() {
        let base = derive_seed(1, "s", "o", Some(0));
        assert_ne!(base, derive_seed(2, "s", "o", Some(0)));
        assert_ne!(base, derive_seed(1, "t", "o", Some(0)));
        assert_ne!(base, derive_seed(1, "s", "p", Some(0)));
        assert_ne!(base, derive_seed(1, "s", "o", Some(1)));
        assert_ne!(base, derive_seed(1, "s", "o", None));
        assert_ne!(derive_seed(1, "ab", "c", None), derive_seed(1, "a", "bc", None));
    }
}
