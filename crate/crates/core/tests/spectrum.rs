use filament_core::lattice::build_lattice;
use filament_core::spectrum::*;

fn golden() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

#[test]
fn eigenpairs_solve_their_blocks_up_to_256() {
    let (big, omega) = (1.7, 0.8);
    for conv in [Convention::Physical, Convention::Printed] {
        for site in build_lattice(256).into_iter().step_by(97) {
            let m = block_matrix(site.j, site.k, big, omega, conv);
            let e = eigenpair(site, big, omega, conv);
            let v = e.vector;
            let scale = 1.0 + e.lambda.abs();
            for row in 0..2 {
                let mv = m[row][0] * v[0] + m[row][1] * v[1];
                assert!((mv - e.lambda * v[row]).abs() <= 1e-12 * scale, "{site:?}");
            }
            assert!((v[0].hypot(v[1]) - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn plus_branch_is_bounded_below() {
    for omega in [0.1, 1.0, 3.0] {
        for site in build_lattice(64).into_iter().filter(|s| s.l > 0) {
            for big in [0.0, 1.0, 10.0] {
                let lambda = eigenvalue(site, big, omega);
                assert!(lambda >= (site.k * site.k) as f64 + omega.min(2.0 * omega) - 1e-12);
            }
        }
    }
}

#[test]
fn kernel_is_the_single_site_up_to_256() {
    for omega in [2f64.sqrt(), golden()] {
        let w0 = omega0(omega);
        let sites = kernel_sites(w0, omega, 256, 1e-9);
        assert_eq!(sites, vec![KERNEL_SITE], "ω = {omega}");
    }
}

#[test]
fn determinant_vanishes_only_at_the_kernel() {
    for omega in [2f64.sqrt(), golden()] {
        for j in 1..200usize {
            for k in 0..200usize {
                let d = block_determinant(j, k, omega);
                if (j, k) == (1, 1) {
                    assert!(d.abs() < 1e-12);
                } else {
                    assert!(d.abs() > 1e-6, "({j},{k}) at ω = {omega}: {d:e}");
                }
            }
        }
    }
}

#[test]
fn singular_sites_are_separated_at_256() {
    let total = build_lattice(256).len();
    for omega in [2f64.sqrt(), golden()] {
        for d0 in [0.05, 0.1, 0.2] {
            let c = classify_and_cluster(omega0(omega), omega, 256, d0).unwrap();
            let singular = c.singular();
            assert!(singular.contains(&KERNEL_SITE));
            assert!(c.clusters.iter().all(|cl| cl.sites.len() == 1));
            assert!(singular.iter().all(|s| s.l < 0));
            assert_eq!(c.regular.len() + singular.len(), total);
            if singular.len() > 1 {
                let constant = c.separation_constant.unwrap();
                assert!(constant >= 1.0, "ω = {omega}, d0 = {d0}: constant {constant}");
                for (i, a) in singular.iter().enumerate() {
                    for b in &singular[i + 1..] {
                        assert!(a.j.abs_diff(b.j) as f64 >= constant * (a.k + b.k) as f64 - 1e-12);
                    }
                }
            }
        }
        // a threshold this large merges neighbouring resonances and is refused
        assert!(matches!(
            classify_and_cluster(omega0(omega), omega, 256, 0.5),
            Err(filament_core::error::Error::ThresholdTooLarge(_))
        ));
    }
}

#[test]
fn classification_agrees_with_brute_force_at_64() {
    let omega = golden();
    let big = omega0(omega);
    let c = classify_and_cluster(big, omega, 64, 0.05).unwrap();
    let mut brute: Vec<_> = build_lattice(64).into_iter().filter(|s| eigenvalue(*s, big, omega).abs() <= 0.05).collect();
    let mut singular = c.singular();
    brute.sort();
    singular.sort();
    assert_eq!(brute, singular);
}

#[test]
fn resonance_frequencies_zero_the_minus_branch() {
    let omega = 1.0;
    for (j, k) in [(1, 1), (15, 5), (7, 3), (40, 11)] {
        let big = resonance_frequency(j, k, omega).unwrap();
        let site = filament_core::lattice::LatticeSite::new(j, k, -1).unwrap();
        assert!(eigenvalue(site, big, omega).abs() < 1e-10);
    }
    // the (15,5) resonance sits exactly on the bifurcation frequency at ω = 1
    assert!((resonance_frequency(15, 5, 1.0).unwrap() - omega0(1.0)).abs() < 1e-14);
}
