mod common;

use common::{isotropic_gain_by_quadrature, psi_by_quadrature, rel_err, upper_gamma_by_quadrature};
use hybridnet::analytic::{mean_power_directed, mean_power_isotropic, psi, upper_incomplete_gamma};

#[test]
fn incomplete_gamma_matches_quadrature_on_grid() {
    let xs = [1e-3, 0.01, 0.05, 0.2, 0.5, 1.0, 2.0, 3.5, 7.0, 12.0, 20.0];
    let mut worst: f64 = 0.0;
    for i in 0..=24 {
        let a = -3.0 + 0.25 * i as f64;
        if a == 0.0 || a == -1.0 || a == -2.0 {
            continue;
        }
        for &x in &xs {
            let got = upper_incomplete_gamma(a, x).unwrap();
            let want = upper_gamma_by_quadrature(a, x);
            let err = rel_err(got, want);
            worst = worst.max(err);
            assert!(err < 1e-8, "Gamma({a}, {x}) = {got}, quadrature {want}, rel {err:e}");
        }
    }
    println!("worst relative error {worst:e}");
}

#[test]
fn incomplete_gamma_reference_value() {
    let v = upper_incomplete_gamma(-0.5, 1.0).unwrap();
    assert!((v - 0.178148).abs() < 1e-6);
    assert!(rel_err(v, upper_gamma_by_quadrature(-0.5, 1.0)) < 1e-10);
}

#[test]
fn psi_matches_quadrature() {
    for &lambda in &[1e-4, 1e-2, 0.1, 1.0, 5.0, 40.0] {
        for &nu in &[1.0, 1.2, 1.5, 3.0] {
            for &beta in &[2.5, 3.0, 4.0, 6.0] {
                let got = psi(lambda, nu, beta).unwrap();
                let want = psi_by_quadrature(lambda, nu, beta);
                assert!(
                    rel_err(got, want) < 1e-6,
                    "psi({lambda}, {nu}, {beta}) = {got}, quadrature {want}"
                );
            }
        }
    }
}

#[test]
fn mean_powers_match_campbell_integrals() {
    for &lambda in &[0.01, 0.3, 2.0] {
        for &nu in &[1.0, 1.5, 2.5] {
            for &beta in &[2.5, 3.0, 4.0] {
                let iso = mean_power_isotropic(2.0, lambda, nu, beta).unwrap();
                let want_iso = 2.0 * isotropic_gain_by_quadrature(lambda, nu, beta);
                assert!(
                    rel_err(iso, want_iso) < 1e-9,
                    "iso {lambda} {nu} {beta}: {iso} vs {want_iso}"
                );

                let (z_m, z_s) = (8.0, 0.05);
                let dir = mean_power_directed(2.0, lambda, nu, beta, z_m, z_s).unwrap();
                let near = psi_by_quadrature(lambda, nu, beta);
                let want_dir = 2.0 * (z_m * near + z_s * (want_iso / 2.0 - near));
                assert!(
                    rel_err(dir, want_dir) < 1e-6,
                    "dir {lambda} {nu} {beta}: {dir} vs {want_dir}"
                );
            }
        }
    }
}

#[test]
fn isotropic_reference_value() {
    let v = mean_power_isotropic(1.0, 1.0, 1.0, 3.0).unwrap();
    assert!((v - 9.42478).abs() < 1e-5);
}
