mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use stablewave::{estimate_alpha, estimate_scale, StableSampleSet};

#[test]
fn scale_of_cms_samples() {
    let s = StableSampleSet::new(common::cms_samples(1.5, 100_000, 1), 1.5).unwrap();
    let sigma = estimate_scale(&s, 1.5).unwrap();
    assert!((0.98..=1.02).contains(&sigma), "{sigma}");
}

#[test]
fn alpha_of_cms_samples() {
    for (alpha, seed) in [(1.5, 2), (1.8, 3)] {
        let s = StableSampleSet::new(common::cms_samples(alpha, 100_000, seed), alpha).unwrap();
        let a = estimate_alpha(&s).unwrap();
        assert!((a - alpha).abs() <= 0.05, "alpha {alpha}: {a}");
    }
}

#[test]
fn alpha_of_gaussian_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let v: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let a = estimate_alpha(&StableSampleSet::new(v, 2.0).unwrap()).unwrap();
    assert!((1.95..=2.05).contains(&a), "{a}");
}

#[test]
fn scale_equivariance() {
    let s = StableSampleSet::new(common::cms_samples(1.5, 10_000, 5), 1.5).unwrap();
    let base = estimate_scale(&s, 1.5).unwrap();
    for c in [0.5, -4.0] {
        assert_eq!(estimate_scale(&s.scaled(c), 1.5).unwrap(), c.abs() * base);
    }
    let c = 3.7;
    let scaled = estimate_scale(&s.scaled(c), 1.5).unwrap();
    assert!((scaled - c * base).abs() <= 1e-12 * c * base);
    assert_eq!(estimate_alpha(&s.scaled(0.25)).unwrap(), estimate_alpha(&s).unwrap());
}
