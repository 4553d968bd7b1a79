use std::f64::consts::PI;

use filament_core::lattice::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(rng: &mut ChaCha8Rng, radius: usize, decay: f64) -> SymmetricField {
    let mut u = SymmetricField::zeros(radius);
    for j in 0..radius {
        for k in 0..radius - j {
            let scale = (-decay * (j + k) as f64).exp();
            let b = if j == 0 { 0.0 } else { rng.random_range(-1.0..1.0) * scale };
            u.set(j, k, rng.random_range(-1.0..1.0) * scale, b);
        }
    }
    u
}

#[test]
fn algebra_constant_is_uniform_over_random_pairs() {
    let p = NormParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let decay = 0.2 + 0.02 * (i % 20) as f64;
        let u = random_field(&mut rng, 8, decay);
        let v = random_field(&mut rng, 8, decay);
        let ratio = u.multiply_exact(&v).sigma_norm(&p) / (u.sigma_norm(&p) * v.sigma_norm(&p));
        worst = worst.max(ratio);
    }
    // weighted ℓ² with s = 2 > 1 is an algebra; the constant is bounded by Σ⟨Δ⟩^{−2s}-type sums
    assert!(worst.is_finite() && worst < 4.0, "algebra constant {worst}");
}

#[test]
fn products_stay_in_the_symmetric_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = random_field(&mut rng, 5, 0.3);
    let v = random_field(&mut rng, 5, 0.3);
    let w = u.multiply_exact(&v).multiply_exact(&u.conj());
    for (t, s) in [(0.3, 1.1), (2.0, -0.7), (-1.4, 2.9)] {
        let z = w.evaluate(t, s);
        assert!((w.evaluate(t, -s) - z).norm() < 1e-12);
        assert!((w.evaluate(-t, s) - z.conj()).norm() < 1e-12);
        let direct = u.evaluate(t, s) * v.evaluate(t, s) * u.evaluate(t, s).conj();
        assert!((z - direct).norm() < 1e-12);
    }
}

#[test]
fn kernel_mode_square_by_quadrature() {
    let e = SymmetricField::mode(1, 1, 1.0, -3f64.sqrt(), 3);
    let sq = e.multiply_exact(&e);
    for (t, s) in [(0.1, 0.2), (1.0, 2.0), (PI / 3.0, PI / 5.0)] {
        let z = e.evaluate(t, s);
        assert!((sq.evaluate(t, s) - z * z).norm() < 1e-13);
    }
    assert_eq!(sq.support_radius(), 5);
}

#[test]
fn truncation_never_increases_the_norm() {
    let p = NormParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = random_field(&mut rng, 16, 0.1);
    let mut last = f64::INFINITY;
    for radius in (1..=16).rev() {
        let n = u.with_radius(radius).sigma_norm(&p);
        assert!(n <= last);
        last = n;
    }
}

#[test]
fn lattice_counts_match_the_ball() {
    for radius in [4usize, 16, 64] {
        let sites = build_lattice(radius);
        // (0,k) carries one branch, j ≥ 1 carries two
        let expected = radius + 2 * (1..radius).map(|j| radius - j).sum::<usize>();
        assert_eq!(sites.len(), expected);
        assert!(sites.iter().all(|s| s.is_member() && s.radius() < radius));
    }
}
