#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use pointview::batch::SceneInput;
use pointview::ply::{save_scene, PlyFormat};
use pointview::projector::{ProjectedPoint, Roi};
use pointview::proposals::save_proposals;
use pointview::synthetic::{generate_room, RoomSpec};
use rand::Rng;

/// Writes a procedural room as `<dir>/<name>.ply` + `<dir>/<name>.json`.
pub fn write_room(dir: &Path, name: &str, spec: &RoomSpec, format: PlyFormat) -> SceneInput {
    let (scene, proposals) = generate_room(spec).unwrap();
    let scene_path = dir.join(format!("{name}.ply"));
    let prop_path = dir.join(format!("{name}.json"));
    save_scene(&scene, &scene_path, format).unwrap();
    save_proposals(&proposals, &prop_path).unwrap();
    SceneInput {
        scene: scene_path,
        proposals: prop_path,
    }
}

pub fn small_room(seed: u64) -> RoomSpec {
    RoomSpec {
        background_points: 5000,
        points_per_object: 600,
        objects: 3,
        seed,
        ..Default::default()
    }
}

/// Relative path -> file bytes for every file under `root`.
pub fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_owned(), std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Naive rasterizer: for every pixel, scan all points and keep the highest
/// one that bins there (ties: nearer, then lower index).
pub fn oracle_raster(points: &[ProjectedPoint], roi: &Roi, size: usize, background: [u8; 3]) -> (Vec<u8>, Vec<bool>) {
    let mut pixels = Vec::with_capacity(size * size * 3);
    let mut occ = Vec::with_capacity(size * size);
    let s = size as f64;
    for row in 0..size {
        for col in 0..size {
            let mut best: Option<&ProjectedPoint> = None;
            for p in points {
                if p.u < roi.u_min || p.u > roi.u_max || p.v < roi.v_min || p.v > roi.v_max {
                    continue;
                }
                let c = ((p.u - roi.u_min) / (roi.u_max - roi.u_min) * s).floor() as i64;
                let r = ((p.v - roi.v_min) / (roi.v_max - roi.v_min) * s).floor() as i64;
                let c = c.clamp(0, size as i64 - 1) as usize;
                let r = r.clamp(0, size as i64 - 1) as usize;
                if (r, c) != (row, col) {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(b) => {
                        p.world_z > b.world_z
                            || (p.world_z == b.world_z && (p.depth < b.depth || (p.depth == b.depth && p.index < b.index)))
                    }
                };
                if better {
                    best = Some(p);
                }
            }
            match best {
                Some(p) => {
                    for ch in p.color {
                        pixels.push((ch.clamp(0.0, 1.0) * 255.0).round() as u8);
                    }
                    occ.push(true);
                }
                None => {
                    pixels.extend_from_slice(&background);
                    occ.push(false);
                }
            }
        }
    }
    (pixels, occ)
}

/// Random projections with deliberately coarse heights, depths and pixel
/// positions so that ties are common.
pub fn random_projections<R: Rng>(rng: &mut R, n: usize, roi: &Roi) -> Vec<ProjectedPoint> {
    (0..n)
        .map(|i| {
            let margin = 0.1 * (roi.u_max - roi.u_min);
            let u = if rng.random_bool(0.3) {
                roi.u_min + (roi.u_max - roi.u_min) * (rng.random_range(0..9) as f64 / 8.0)
            } else {
                rng.random_range(roi.u_min - margin..roi.u_max + margin)
            };
            let v = if rng.random_bool(0.3) {
                roi.v_min + (roi.v_max - roi.v_min) * (rng.random_range(0..9) as f64 / 8.0)
            } else {
                rng.random_range(roi.v_min - margin..roi.v_max + margin)
            };
            ProjectedPoint {
                u,
                v,
                depth: rng.random_range(1..4) as f64 * 0.5,
                world_z: rng.random_range(0..6) as f64 * 0.25,
                color: [rng.random(), rng.random(), rng.random()],
                index: i as u32,
            }
        })
        .collect()
}
