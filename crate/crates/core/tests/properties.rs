use corridor::bench::{forest_domain, forest_grid, gen_forest, run_benchmark, BenchConfig, BenchRecord};
use corridor::cpoly::{config, hit_and_run_sample, HPolytope};
use corridor::drm::{build_drm, decode_drm, encode_drm, DrmBuildParams, PwlPath};
use corridor::eizo::{
    compute_step_back, dist_gradient, dist_to_segment, inflate_edge, project_to_segment, EizoParams, Segment,
};
use corridor::scsopt::{lscs_on_sequence, path_length, project_onto_intersection, LscsOptions};
use corridor::world::{CollisionChecker, World};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn vec_in(dim: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-r..r, dim)
}

fn seg_and_point() -> impl Strategy<Value = (Segment, Vec<f64>)> {
    (2usize..=6)
        .prop_flat_map(|d| (vec_in(d, 4.0), vec_in(d, 4.0), vec_in(d, 6.0)))
        .prop_map(|(a, b, c)| (Segment::from_slices(&a, &b).unwrap(), c))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_is_closest_point((seg, c) in seg_and_point(), t in 0.0..=1.0f64) {
        let p = project_to_segment(&c, &seg).unwrap();
        let other = seg.point_at(t);
        let d_other = (config(&c) - other).norm();
        prop_assert!(p.dist <= d_other + 1e-12);
        prop_assert!((0.0..=1.0).contains(&p.alpha));
    }

    #[test]
    fn distance_is_convex((seg, x) in seg_and_point(), seed in any::<u64>(), l in 0.0..=1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = (0..x.len()).map(|_| rand::Rng::random_range(&mut rng, -6.0..6.0)).collect();
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| l * a + (1.0 - l) * b).collect();
        let lhs = dist_to_segment(&z, &seg).unwrap();
        let rhs = l * dist_to_segment(&x, &seg).unwrap() + (1.0 - l) * dist_to_segment(&y, &seg).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn gradient_is_unit_and_separates((seg, c) in seg_and_point()) {
        prop_assume!(dist_to_segment(&c, &seg).unwrap() > 1e-6);
        let g = dist_gradient(&c, &seg).unwrap();
        prop_assert!((g.norm() - 1.0).abs() < 1e-12);
        // The tangent plane through c leaves the whole segment on the far side.
        let b = dot(g.as_slice(), &c);
        for v in [&seg.v1, &seg.v2] {
            prop_assert!(dot(g.as_slice(), v.as_slice()) < b);
        }
    }

    #[test]
    fn step_back_keeps_segment_inside((seg, c) in seg_and_point(), dmax in 1e-4..0.5f64) {
        prop_assume!(dist_to_segment(&c, &seg).unwrap() > 1e-6);
        let a = dist_gradient(&c, &seg).unwrap();
        let b_raw = dot(a.as_slice(), &c);
        let delta = compute_step_back(a.as_slice(), b_raw, &seg, dmax);
        prop_assert!(delta > 0.0 && delta <= dmax);
        for v in [&seg.v1, &seg.v2] {
            prop_assert!(dot(a.as_slice(), v.as_slice()) <= b_raw - delta + 1e-12);
        }
    }

    #[test]
    fn hit_and_run_stays_inside(lo in vec_in(3, 2.0), ext in proptest::collection::vec(0.1..2.0f64, 3), seed in any::<u64>()) {
        let hi: Vec<f64> = lo.iter().zip(&ext).map(|(l, e)| l + e).collect();
        let mut p = HPolytope::from_box(&lo, &hi).unwrap();
        let center: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
        p.add_halfspace(&[1.0, 1.0, 1.0], center.iter().sum::<f64>() + 0.05).unwrap();
        let batch = hit_and_run_sample(&p, &[config(&center)], 50, 5, seed).unwrap();
        prop_assert_eq!(batch.points.len(), 50);
        for x in &batch.points {
            prop_assert!(p.contains(x.as_slice(), 1e-9).unwrap());
        }
    }

    #[test]
    fn pwl_path_drops_repeats(knots in proptest::collection::vec(vec_in(2, 3.0), 2..8), reps in proptest::collection::vec(1usize..3, 8)) {
        let mut with_repeats = Vec::new();
        for (k, r) in knots.iter().zip(&reps) {
            for _ in 0..*r {
                with_repeats.push(config(k));
            }
        }
        let a = PwlPath::new(knots.iter().map(|k| config(k)).collect());
        let b = PwlPath::new(with_repeats);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.knots(), b.knots());
                prop_assert!(b.knots().windows(2).all(|w| w[0] != w[1]));
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lscs_is_feasible_and_beats_warm_start(
        s in (-3.5..-2.5f64, -0.5..0.5f64),
        g in (2.5..3.5f64, -0.5..0.5f64),
        gap in 0.2..1.0f64,
        lift in -1.0..1.0f64,
    ) {
        let a = HPolytope::from_box(&[-4.0, -1.0], &[0.5, 1.0]).unwrap();
        let b = HPolytope::from_box(&[0.5 - gap, -1.0 + lift], &[4.0, 1.0 + lift]).unwrap();
        let (s, g) = (config(&[s.0, s.1]), config(&[g.0, g.1]));
        prop_assume!(b.contains(g.as_slice(), 0.0).unwrap());
        let (knots, _, _) = lscs_on_sequence(&[&a, &b], &s, &g, None, &LscsOptions::default()).unwrap();
        prop_assert_eq!(knots.len(), 3);
        prop_assert!(a.contains(knots[1].as_slice(), 1e-7).unwrap() && b.contains(knots[1].as_slice(), 1e-7).unwrap());
        let mid = project_onto_intersection(&[&a, &b], &((&s + &g) * 0.5)).unwrap();
        let warm = path_length(&[s.clone(), mid, g.clone()]);
        let cost = path_length(&knots);
        prop_assert!(cost <= warm + 1e-9);
        prop_assert!(cost >= (&g - &s).norm() - 1e-12);
    }

    #[test]
    fn inflated_polytope_contains_seed(seed in 0u64..1000, t in 0.0..std::f64::consts::TAU, len in 0.3..2.0f64) {
        let scene = gen_forest(seed);
        let world = scene.world();
        let v1 = [-4.5 + (seed % 9) as f64, -4.0 + (seed % 7) as f64];
        let v2 = [v1[0] + len * t.cos(), v1[1] + len * t.sin()];
        prop_assume!(v2.iter().all(|v| v.abs() < 4.9));
        prop_assume!(world.segment_free(&v1, &v2, 0.001));
        prop_assume!([v1, v2].iter().all(|v| scene.obstacles().iter().all(|o| {
            (o.pose.translation.vector.xy() - nalgebra_xy(v)).norm() > scene.radius + 0.01
        })));
        let seg = Segment::from_slices(&v1, &v2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rep = inflate_edge(&seg, &forest_domain(), &EizoParams::forest(), &world, &mut rng).unwrap();
        prop_assert!(rep.polytope.contains_segment(&v1, &v2, 1e-9).unwrap());
        // The domain faces are kept.
        for (a, b) in forest_domain().rows() {
            prop_assert!(rep.polytope.rows().any(|(ra, rb)| ra == a && rb == b));
        }
    }
}

fn nalgebra_xy(v: &[f64; 2]) -> nalgebra::Vector2<f64> {
    nalgebra::Vector2::new(v[0], v[1])
}

#[test]
fn roadmap_binary_round_trips() {
    let world = World::new(corridor::world::RobotModel::point_robot(&[-5.0, -5.0], &[5.0, 5.0]).unwrap(), vec![]);
    for seed in 0..5 {
        let params = DrmBuildParams { n_nodes: 40 + 10 * seed as usize, k: 4, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let drm = build_drm(&world, &[-5.0, -5.0], &[5.0, 5.0], &params, forest_grid(), &mut rng).unwrap();
        let bytes = encode_drm(&drm);
        let back = decode_drm(&bytes).unwrap();
        assert_eq!(encode_drm(&back), bytes);
        assert_eq!(back.nodes(), drm.nodes());
        for i in 0..drm.len() {
            assert_eq!(back.neighbors(i), drm.neighbors(i));
        }
    }
}

fn strip_timings(mut r: BenchRecord) -> BenchRecord {
    r.drm_build_ms = 0.0;
    r.search_ms = 0.0;
    r.inflate_ms = 0.0;
    r.optimize_ms = 0.0;
    r.recovery_ms = 0.0;
    r
}

#[test]
fn benchmark_is_deterministic() {
    let cfg = BenchConfig { env_seeds: vec![0, 1, 2], drm_seeds: vec![0, 1], sizes: vec![150], ..Default::default() };
    let a: Vec<_> = run_benchmark(&cfg).unwrap().records.into_iter().map(strip_timings).collect();
    let b: Vec<_> = run_benchmark(&cfg).unwrap().records.into_iter().map(strip_timings).collect();
    assert_eq!(a.len(), 6);
    assert_eq!(a, b);
}
