//! Procedural rooms for demos, tests and benchmarks: a noisy floor, two
//! walls, and box-shaped furniture whose surface points form the proposals.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::scene::{ObjectProposal, Point, Scene};

#[derive(Debug, Clone)]
pub struct RoomSpec {
    pub size: [f64; 2],
    pub wall_height: f64,
    pub background_points: usize,
    pub objects: usize,
    pub points_per_object: usize,
    pub seed: u64,
}

impl Default for RoomSpec {
    fn default() -> Self {
        Self {
            size: [6.0, 5.0],
            wall_height: 2.5,
            background_points: 20_000,
            objects: 3,
            points_per_object: 2048,
            seed: 0,
        }
    }
}

const PALETTE: [[f32; 3]; 6] = [
    [0.80, 0.15, 0.10],
    [0.15, 0.55, 0.85],
    [0.20, 0.70, 0.25],
    [0.90, 0.75, 0.10],
    [0.55, 0.30, 0.70],
    [0.95, 0.50, 0.15],
];

pub fn generate_room(spec: &RoomSpec) -> Result<(Scene, Vec<ObjectProposal>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let [w, d] = spec.size;
    let mut points = Vec::with_capacity(spec.background_points + spec.objects * spec.points_per_object);

    let wall_points = spec.background_points / 4;
    for _ in 0..spec.background_points - wall_points {
        let p = Vector3::new(
            rng.random_range(0.0..w),
            rng.random_range(0.0..d),
            rng.random_range(-0.005..0.005),
        );
        let shade = rng.random_range(0.45f32..0.55);
        points.push(Point::new(p, [shade, shade, shade * 0.95]));
    }
    for _ in 0..wall_points {
        let z = rng.random_range(0.0..spec.wall_height);
        let p = if rng.random_bool(w / (w + d)) {
            Vector3::new(rng.random_range(0.0..w), d, z)
        } else {
            Vector3::new(0.0, rng.random_range(0.0..d), z)
        };
        points.push(Point::new(p, [0.85, 0.80, 0.70]));
    }

    let mut ranges = Vec::with_capacity(spec.objects);
    for k in 0..spec.objects {
        let half = Vector3::new(rng.random_range(0.2..0.6), rng.random_range(0.2..0.6), 0.0);
        let height = rng.random_range(0.4..1.5);
        let cx = rng.random_range(0.8..w - 0.8);
        let cy = rng.random_range(0.8..d - 0.8);
        let lo = Vector3::new(cx - half.x, cy - half.y, 0.0);
        let hi = Vector3::new(cx + half.x, cy + half.y, height);
        let base = PALETTE[k % PALETTE.len()];
        let start = points.len();
        for _ in 0..spec.points_per_object {
            let mut p = Vector3::new(
                rng.random_range(lo.x..=hi.x),
                rng.random_range(lo.y..=hi.y),
                rng.random_range(lo.z..=hi.z),
            );
            // snap to one of the five visible faces
            match rng.random_range(0..5) {
                0 => p.x = lo.x,
                1 => p.x = hi.x,
                2 => p.y = lo.y,
                3 => p.y = hi.y,
                _ => p.z = hi.z,
            }
            let jitter = rng.random_range(-0.05f32..0.05);
            points.push(Point::new(p, base.map(|c| (c + jitter).clamp(0.0, 1.0))));
        }
        ranges.push(start..points.len());
    }

    let scene = Scene::new(points)?;
    let proposals = ranges
        .into_iter()
        .enumerate()
        .map(|(k, r)| ObjectProposal::new(format!("object_{k}"), r.collect(), &scene))
        .collect::<Result<Vec<_>>>()?;
    Ok((scene, proposals))
}
