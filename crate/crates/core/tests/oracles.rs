use isoconst::bodies::{cross_polytope, regular_simplex};
use isoconst::experiments::tail::sample_means;
use isoconst::experiments::{bernstein_tail_check, lemma_statistics, ExperimentConfig, PointRule};
use isoconst::isotropic::{max_isotropic_section, random_volume_preserving_map, AffineMap};
use isoconst::oracle::{facet_frequency_test, sample_uniform_tagged};
use isoconst::rng::StreamKey;
use isoconst::{convex_hull, functional_value, isotropic_constant, rejection_mc, run_trial, sample_matrix, symmetric_hull, DistributionSpec, Polytope};
use statrs::distribution::{Binomial, ContinuousCDF, Discrete, Normal};

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[test]
fn cross_polytope_volume_by_rejection() {
    for n in 2..=4 {
        let poly = cross_polytope(n);
        let est = rejection_mc(&poly, 400_000, 11 + n as u64, &vec![0.0; n]).unwrap();
        let v = est.volume.unwrap();
        let exact = 2f64.powi(n as i32) / factorial(n);
        assert!((v.value - exact).abs() < 4.0 * v.stderr, "n={n}: {} vs {exact}", v.value);
    }
}

#[test]
fn cube_cone_frequencies_pass_chi_square() {
    let poly = isoconst::bodies::cube(3);
    let apex = vec![0.0; 3];
    let (_, tags) = sample_uniform_tagged(&poly, &apex, 120_000, 3).unwrap();
    let test = facet_frequency_test(&poly, &apex, &tags).unwrap();
    assert!(test.p_value > 0.001, "{test:?}");
}

/// Minimizes the functional over volume-preserving maps by random search
/// followed by coordinate descent on the matrix and translation entries.
fn brute_force_minimum(poly: &Polytope, starts: usize, seed: u64) -> f64 {
    let n = poly.dim;
    let normalize = |m: &AffineMap| {
        let det = m.determinant();
        let mut m = m.clone();
        m.linear /= det.abs().powf(1.0 / n as f64);
        m
    };
    let eval = |m: &AffineMap| functional_value(poly, &normalize(m)).unwrap();
    let mut rng = StreamKey::new(seed).rng();
    let mut best = AffineMap::identity(n);
    let mut best_val = eval(&best);
    for _ in 0..starts {
        let m = random_volume_preserving_map(n, 0.3, &mut rng);
        let v = eval(&m);
        if v < best_val {
            best = m;
            best_val = v;
        }
    }
    let mut step = 0.25;
    while step > 1e-7 {
        let mut improved = false;
        for k in 0..n * n + n {
            for sign in [1.0, -1.0] {
                let mut m = best.clone();
                if k < n * n {
                    m.linear[(k / n, k % n)] += sign * step;
                } else {
                    m.translation[k - n * n] += sign * step;
                }
                if m.determinant().abs() < 1e-6 {
                    continue;
                }
                let v = eval(&m);
                if v < best_val {
                    best = normalize(&m);
                    best_val = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    best_val
}

#[test]
fn simplex_constant_matches_direct_minimization() {
    let simplex = regular_simplex(3);
    let l2 = isotropic_constant(&simplex).unwrap().l_squared();
    let found = brute_force_minimum(&simplex, 10_000, 5);
    assert!((found - 3.0 * l2).abs() < 1e-4, "{found} vs {}", 3.0 * l2);
    // a lopsided simplex has the same constant
    let pts = sample_matrix(DistributionSpec::StandardGaussian, 4, 3, 8).unwrap();
    let lopsided = convex_hull(&pts).unwrap();
    let found = brute_force_minimum(&lopsided, 2_000, 6);
    assert!((found - 3.0 * l2).abs() < 1e-4, "{found} vs {}", 3.0 * l2);
}

#[test]
fn sections_times_constant_lie_in_band() {
    for (n, seed) in [(2, 1u64), (2, 2), (3, 3), (3, 4)] {
        let pts = sample_matrix(DistributionSpec::StandardGaussian, 4 * n, n, seed).unwrap();
        for poly in [convex_hull(&pts).unwrap(), symmetric_hull(&pts).unwrap()] {
            let l = isotropic_constant(&poly).unwrap().l_constant;
            let section = max_isotropic_section(&poly, 1000, &mut StreamKey::new(seed).rng()).unwrap().unwrap();
            let product = section * l;
            assert!((0.2..=0.7).contains(&product), "n={n} seed={seed}: {product}");
        }
    }
}

fn cfg(n: usize, big_n: usize, dist: DistributionSpec, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(vec![n], vec![PointRule::fixed(big_n)], dist);
    c.master_seed = seed;
    c
}

#[test]
fn rademacher_planar_pairs_are_degenerate_half_the_time() {
    let c = cfg(2, 2, DistributionSpec::Rademacher, 19);
    let trials = 10_000;
    let degenerate = (0..trials).filter(|&i| run_trial(&c, 2, 2, i).unwrap().degenerate_t).count();
    let p = degenerate as f64 / trials as f64;
    let stderr = (0.25 / trials as f64).sqrt();
    assert!((p - 0.5).abs() < 4.0 * stderr, "{p}");
}

#[test]
fn gaussian_planar_hull_of_three_points_is_a_triangle() {
    let c = cfg(2, 3, DistributionSpec::StandardGaussian, 23);
    for i in 0..50 {
        let pts = sample_matrix(DistributionSpec::StandardGaussian, 3, 2, i).unwrap();
        assert_eq!(convex_hull(&pts).unwrap().facets.len(), 3);
        let r = run_trial(&c, 2, 3, i as usize).unwrap();
        assert!(!r.degenerate());
        assert!((3..=4).contains(&r.facet_count_k.unwrap()));
    }
}

#[test]
fn trials_are_reproducible() {
    let c = cfg(4, 16, DistributionSpec::StandardGaussian, 31);
    for i in [0, 7] {
        let a = run_trial(&c, 4, 16, i).unwrap();
        let b = run_trial(&c, 4, 16, i).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn rademacher_degeneracy_is_rare_at_twice_the_dimension() {
    let c = cfg(8, 16, DistributionSpec::Rademacher, 37);
    let trials = 200;
    let degenerate = (0..trials).filter(|&i| run_trial(&c, 8, 16, i).unwrap().degenerate()).count();
    assert!((degenerate as f64) < 0.05 * trials as f64, "{degenerate}");
}

/// `P(|S/m| > t)` for `S` a sum of `m` signs, from the binomial law.
fn exact_rademacher_tail(m: usize, t: f64) -> f64 {
    let law = Binomial::new(0.5, m as u64).unwrap();
    (0..=m as u64).filter(|&k| ((2 * k) as f64 - m as f64).abs() > t * m as f64 + 1e-9).map(|k| law.pmf(k)).sum()
}

#[test]
fn rademacher_tails_match_binomial_law() {
    let grid: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let trials = 100_000;
    let table = bernstein_tail_check(DistributionSpec::Rademacher, 100, 1.0, &grid, trials, 41);
    for row in &table.rows {
        let exact = exact_rademacher_tail(100, row.t);
        let sd = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((row.empirical - exact).abs() <= 4.0 * sd + 1e-12, "t={}: {} vs {exact}", row.t, row.empirical);
    }
    let at_half = exact_rademacher_tail(100, 0.5);
    assert!(at_half <= 2.0 * (-100.0 * 0.25 * 0.3f64).exp());
    assert!(table.calibrated_c.unwrap() >= 0.25);
}

#[test]
fn gaussian_single_draw_tail_is_normal() {
    let grid = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5];
    let trials = 100_000;
    let table = bernstein_tail_check(DistributionSpec::StandardGaussian, 1, 1.0, &grid, trials, 43);
    let std = Normal::standard();
    for row in &table.rows {
        let exact = 2.0 * (1.0 - std.cdf(row.t));
        let sd = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((row.empirical - exact).abs() <= 4.0 * sd + 1e-12, "t={}", row.t);
    }
}

#[test]
fn mean_of_two_normals_has_normal_quantiles() {
    let trials = 20_000;
    let mut stats: Vec<f64> = (0..trials)
        .map(|i| {
            let pts = sample_matrix(DistributionSpec::StandardGaussian, 2, 1, 1000 + i).unwrap();
            lemma_statistics(&pts, 4, i).full_mean
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let q90 = stats[(0.9 * trials as f64) as usize];
    // |X| with X ~ N(0, 1/2): P(|X| <= q) = 0.9 at q = z_{0.95} / sqrt 2
    let z = Normal::standard().inverse_cdf(0.95);
    let target = z / 2f64.sqrt();
    // order-statistic stderr: sqrt(p(1-p)/n) over the density of |X| at the quantile
    let density = 2.0 * (-target * target).exp() / std::f64::consts::PI.sqrt();
    let stderr = (0.09 / trials as f64).sqrt() / density;
    assert!((q90 - target).abs() < 4.0 * stderr, "{q90} vs {target}");
}

#[test]
fn subset_statistic_is_sign_symmetric() {
    let pts = sample_matrix(DistributionSpec::Rademacher, 9, 4, 3).unwrap();
    let flipped = isoconst::SampleMatrix::from_rows(&pts.iter_rows().map(|r| r.iter().map(|x| -x).collect::<Vec<f64>>()).collect::<Vec<_>>()).unwrap();
    let a = lemma_statistics(&pts, 50, 8);
    let b = lemma_statistics(&flipped, 50, 8);
    assert_eq!(a.subset_mean, b.subset_mean);
    assert_eq!(a.quadratic, b.quadratic);
}

#[test]
fn sample_means_are_centered() {
    let means = sample_means(DistributionSpec::UniformSymmetric, 10, 50_000, 2);
    let avg = means.iter().sum::<f64>() / means.len() as f64;
    assert!(avg.abs() < 4.0 * (0.1f64 / 50_000.0).sqrt());
}
