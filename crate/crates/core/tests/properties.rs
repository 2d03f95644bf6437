use approx::assert_relative_eq;
use isoconst::hull::{contains, validate_polytope};
use isoconst::isotropic::random_volume_preserving_map;
use isoconst::moments::{barycenter, summarize};
use isoconst::rng::StreamKey;
use isoconst::{convex_hull, functional_value, isotropic_constant, sample_matrix, sample_uniform, symmetric_hull, DistributionSpec, SampleMatrix};
use proptest::prelude::*;

fn cloud() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..=4).prop_flat_map(|n| (Just(n), (n + 2)..(4 * n + 4), any::<u64>()))
}

fn gaussian(n: usize, rows: usize, seed: u64) -> SampleMatrix {
    sample_matrix(DistributionSpec::StandardGaussian, rows, n, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hull_contains_its_points_and_is_well_formed((n, rows, seed) in cloud()) {
        let pts = gaussian(n, rows, seed);
        for poly in [convex_hull(&pts).unwrap(), symmetric_hull(&pts).unwrap()] {
            let diag = validate_polytope(&poly, &pts);
            prop_assert!(diag.is_valid(poly.tolerance()), "{diag:?}");
            prop_assert!(poly.facets.len() > n);
        }
    }

    #[test]
    fn moments_do_not_depend_on_the_apex((n, rows, seed) in cloud(), w in 0.05f64..0.95) {
        let poly = convex_hull(&gaussian(n, rows, seed)).unwrap();
        let avg = poly.vertex_average();
        let bary = barycenter(&poly).unwrap();
        let mixed: Vec<f64> = avg.iter().zip(&bary).map(|(a, b)| w * a + (1.0 - w) * b).collect();
        let base = summarize(&poly, &avg).unwrap();
        let origin = vec![0.0; n];
        for apex in [bary, mixed] {
            let s = summarize(&poly, &apex).unwrap();
            assert_relative_eq!(s.volume, base.volume, max_relative = 1e-10);
            assert_relative_eq!(s.second_moment_about(&origin), base.second_moment_about(&origin), max_relative = 1e-9);
            for (a, b) in s.barycenter.iter().zip(&base.barycenter) {
                prop_assert!((a - b).abs() < 1e-9 * poly.scale());
            }
        }
    }

    #[test]
    fn isotropic_constant_is_affine_invariant((n, rows, seed) in cloud()) {
        let pts = gaussian(n, rows, seed);
        let l = isotropic_constant(&convex_hull(&pts).unwrap()).unwrap().l_constant;
        let map = isoconst::isotropic::random_affine_map(n, 20.0, &mut StreamKey::new(seed).child(1).rng());
        let moved: Vec<Vec<f64>> = pts.iter_rows().map(|r| map.apply(r)).collect();
        let moved = SampleMatrix::from_rows(&moved).unwrap();
        let l2 = isotropic_constant(&convex_hull(&moved).unwrap()).unwrap().l_constant;
        prop_assert!((l - l2).abs() < 1e-8, "{l} vs {l2}");
    }

    #[test]
    fn functional_never_beats_the_whitened_body((n, rows, seed) in cloud()) {
        let poly = convex_hull(&gaussian(n, rows, seed)).unwrap();
        let iso = isotropic_constant(&poly).unwrap();
        let floor = n as f64 * iso.l_squared();
        let mut rng = StreamKey::new(seed).child(2).rng();
        for _ in 0..5 {
            let map = random_volume_preserving_map(n, 0.5, &mut rng);
            prop_assert!(functional_value(&poly, &map).unwrap() >= floor - 1e-9);
        }
        assert_relative_eq!(functional_value(&poly, &iso.whitening_map).unwrap(), floor, max_relative = 1e-9);
    }

    #[test]
    fn uniform_samples_stay_inside((n, rows, seed) in cloud()) {
        let poly = convex_hull(&gaussian(n, rows, seed)).unwrap();
        let pts = sample_uniform(&poly, &poly.vertex_average(), 500, seed).unwrap();
        for x in pts.iter_rows() {
            prop_assert!(contains(&poly, x));
        }
    }
}
