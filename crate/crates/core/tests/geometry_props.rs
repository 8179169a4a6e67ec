use nalgebra::{Rotation3, Unit};
use proptest::prelude::*;

use planeway::geometry::{convex_hull, expand_polygon, fit_plane, frame_from_normal, plane_polygon_intersection, ConvexPolygon2D, PlanePatch, Vec2, Vec3};

fn cloud_on_plane(normal: Vec3, offsets: &[(f64, f64, f64)]) -> Vec<Vec3> {
    let tf = frame_from_normal(&normal, Vec3::new(0.3, -0.2, 0.5));
    offsets.iter().map(|&(u, v, w)| tf.to_world(&Vec3::new(u, v, w * 1e-3))).collect()
}

fn unit(v: (f64, f64, f64)) -> Option<Vec3> {
    let v = Vec3::new(v.0, v.1, v.2);
    (v.norm() > 0.2).then(|| v.normalize())
}

fn square(c: Vec2, half: f64) -> ConvexPolygon2D {
    ConvexPolygon2D::new(vec![
        c + Vec2::new(-half, -half),
        c + Vec2::new(half, -half),
        c + Vec2::new(half, half),
        c + Vec2::new(-half, half),
    ])
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fitted_normal_rotates_with_the_cloud(
        n in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
        axis in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
        angle in -3.0..3.0f64,
        offsets in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64, -1.0..1.0f64), 20..60),
    ) {
        let (Some(n), Some(axis)) = (unit(n), unit(axis)) else { return Ok(()) };
        let pts = cloud_on_plane(n, &offsets);
        let Ok(fit) = fit_plane(&pts) else { return Ok(()) };
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        let rotated: Vec<Vec3> = pts.iter().map(|p| rot * p).collect();
        let fit_r = fit_plane(&rotated).unwrap();
        let expected = rot * fit.transform.normal();
        // the fitted normal's sign follows an orientation convention, so compare lines
        prop_assert!(expected.dot(&fit_r.transform.normal()).abs() > 1.0 - 1e-9);
        prop_assert!((fit.thickness - fit_r.thickness).abs() < 1e-9);
    }

    #[test]
    fn hull_ignores_point_order(
        pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 3..40),
        seed in any::<u64>(),
    ) {
        let pts: Vec<Vec2> = pts.into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
        let Ok(h) = convex_hull(&pts) else { return Ok(()) };
        let mut shuffled = pts.clone();
        // deterministic permutation from the seed
        let n = shuffled.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let h2 = convex_hull(&shuffled).unwrap();
        let mut a: Vec<(f64, f64)> = h.vertices().iter().map(|v| (v.x, v.y)).collect();
        let mut b: Vec<(f64, f64)> = h2.vertices().iter().map(|v| (v.x, v.y)).collect();
        a.sort_by(|p, q| p.partial_cmp(q).unwrap());
        b.sort_by(|p, q| p.partial_cmp(q).unwrap());
        prop_assert_eq!(a, b);
        for p in &pts {
            prop_assert!(h.contains(p, 1e-9));
        }
    }

    #[test]
    fn expanded_polygon_contains_original(
        pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 3..30),
        margin in 0.0..1.0f64,
    ) {
        let pts: Vec<Vec2> = pts.into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
        let Ok(h) = convex_hull(&pts) else { return Ok(()) };
        let e = expand_polygon(&h, margin);
        for v in h.vertices() {
            prop_assert!(e.contains(v, 1e-9));
        }
        prop_assert!(e.area() >= h.area() - 1e-9);
    }

    #[test]
    fn intersection_is_symmetric(
        tilt in 5.0..60.0f64,
        heading in -3.0..3.0f64,
        cx in -1.0..1.0f64,
        half in 0.5..2.0f64,
    ) {
        let floor = frame_from_normal(&Vec3::z(), Vec3::zeros());
        let t = tilt.to_radians();
        let n = Vec3::new(-t.sin() * heading.cos(), -t.sin() * heading.sin(), t.cos());
        let ramp = frame_from_normal(&n, Vec3::new(cx, 0.0, 0.0));
        let fa = square(floor.to_local_2d(&Vec3::new(cx, 0.0, 0.0)), 2.0);
        let fb = square(ramp.to_local_2d(&Vec3::new(cx, 0.0, 0.0)), half);
        let a = PlanePatch { transform: &floor, boundary: &fa };
        let b = PlanePatch { transform: &ramp, boundary: &fb };
        let ab = plane_polygon_intersection(a, b, 0.1, 0.05);
        let ba = plane_polygon_intersection(b, a, 0.1, 0.05);
        prop_assert_eq!(ab.is_some(), ba.is_some());
        if let (Some(ab), Some(ba)) = (ab, ba) {
            prop_assert!((ab.a - ba.a).norm() < 1e-9 && (ab.b - ba.b).norm() < 1e-9);
            // both endpoints lie on both planes
            for p in [ab.a, ab.b] {
                prop_assert!(floor.height_of(&p).abs() < 1e-9);
                prop_assert!(ramp.height_of(&p).abs() < 1e-9);
            }
        }
        prop_assert!((fa.intersection_area(&fb) - fb.intersection_area(&fa)).abs() < 1e-9);
    }
}
