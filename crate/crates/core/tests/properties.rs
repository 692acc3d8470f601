mod common;

use nalgebra::Vector3;
use pointview::camera::Intrinsics;
use pointview::ply::{parse_points, write_points, PlyFormat};
use pointview::projector::{rasterize, ucm_project, ProjectedPoint, Roi};
use pointview::scene::compute_floor_height;
use pointview::{Point, Scene};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coord() -> impl Strategy<Value = f64> {
    -100.0f64..100.0
}

fn points(max: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(
        (coord(), coord(), coord(), any::<[u8; 3]>()).prop_map(|(x, y, z, c)| Point::from_rgb8(Vector3::new(x, y, z), c)),
        1..max,
    )
}

fn roi() -> Roi {
    Roi {
        u_min: -3.0,
        u_max: 13.0,
        v_min: 2.0,
        v_max: 10.0,
        epsilon: 0.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ply_round_trip(pts in points(200), binary in any::<bool>()) {
        let format = if binary { PlyFormat::BinaryLittleEndian } else { PlyFormat::Ascii };
        let mut buf = Vec::new();
        write_points(&pts, format, &mut buf).unwrap();
        let back = parse_points(&buf).unwrap();
        prop_assert_eq!(back.len(), pts.len());
        for (a, b) in pts.iter().zip(&back) {
            prop_assert!((a.position - b.position).amax() <= 1e-6 * a.position.amax().max(1.0));
            prop_assert_eq!(a.rgb8(), b.rgb8());
        }
    }

    #[test]
    fn ascii_and_binary_agree(pts in points(100)) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_points(&pts, PlyFormat::Ascii, &mut a).unwrap();
        write_points(&pts, PlyFormat::BinaryLittleEndian, &mut b).unwrap();
        prop_assert_eq!(parse_points(&a).unwrap(), parse_points(&b).unwrap());
    }

    #[test]
    fn scene_center_ignores_order(pts in points(100), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = Scene::new(pts).unwrap();
        let b = Scene::new(shuffled).unwrap();
        prop_assert_eq!(a.center(), b.center());
        prop_assert_eq!(a.floor_height(), b.floor_height());
    }

    #[test]
    fn floor_rises_with_points(pts in points(400), lift in 0.0f64..5.0) {
        let a = Scene::new(pts.clone()).unwrap();
        let raised: Vec<Point> = pts.iter().map(|p| Point::new(p.position + Vector3::z() * lift, p.color)).collect();
        let b = Scene::new(raised).unwrap();
        prop_assert!(compute_floor_height(&b) >= compute_floor_height(&a));
        prop_assert!(a.floor_height() >= a.bounds().min.z && a.floor_height() <= a.bounds().max.z);
    }

    #[test]
    fn zero_zeta_is_pinhole(x in -10.0f64..10.0, y in -10.0f64..10.0, z in 0.01f64..50.0, g in 1.0f64..500.0, c in 0.0f64..100.0) {
        let intr = Intrinsics { gamma_x: g, gamma_y: g * 0.9, c_x: c, c_y: c + 1.0, zeta: 0.0 };
        let (u, v) = ucm_project(&intr, &Vector3::new(x, y, z)).unwrap();
        prop_assert!((u - (g * x / z + c)).abs() <= 1e-9 * u.abs().max(1.0));
        prop_assert!((v - (0.9 * g * y / z + c + 1.0)).abs() <= 1e-9 * v.abs().max(1.0));
    }

    #[test]
    fn behind_camera_rejected(x in -10.0f64..10.0, y in -10.0f64..10.0, z in -50.0f64..=0.0) {
        let intr = Intrinsics { gamma_x: 16.0, gamma_y: 16.0, c_x: 16.0, c_y: 16.0, zeta: 0.0 };
        prop_assert!(ucm_project(&intr, &Vector3::new(x, y, z)).is_none());
    }

    #[test]
    fn raster_ignores_input_order(seed in any::<u64>(), n in 1usize..500) {
        use rand::seq::SliceRandom;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = common::random_projections(&mut rng, n, &roi());
        let a = rasterize(&pts, &roi(), 16, [0, 0, 0]);
        pts.shuffle(&mut rng);
        let b = rasterize(&pts, &roi(), 16, [0, 0, 0]);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn raised_point_wins_its_pixel(seed in any::<u64>(), n in 1usize..300, pick in any::<prop::sample::Index>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = common::random_projections(&mut rng, n, &roi());
        let k = pick.index(n);
        let r = roi();
        pts[k].u = pts[k].u.clamp(r.u_min, r.u_max);
        pts[k].v = pts[k].v.clamp(r.v_min, r.v_max);
        pts[k].world_z = 100.0;
        pts[k].color = [1.0, 0.0, 1.0];
        let img = rasterize(&pts, &r, 16, [0, 0, 0]);
        let (row, col) = r.pixel(pts[k].u, pts[k].v, 16).unwrap();
        prop_assert_eq!(img.pixel(row, col), [255, 0, 255]);
    }

    #[test]
    fn occupancy_never_exceeds_points(seed in any::<u64>(), n in 0usize..300) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<ProjectedPoint> = common::random_projections(&mut rng, n, &roi());
        let img = rasterize(&pts, &roi(), 32, [1, 2, 3]);
        prop_assert!(img.occupied_count() <= n);
        let inside = pts.iter().filter(|p| roi().contains(p.u, p.v)).count();
        prop_assert_eq!(img.occupied_count() == 0, inside == 0);
    }
}
