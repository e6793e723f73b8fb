mod common;

use common::*;
use dirac_kernel::fft::Spectral;
use dirac_kernel::linalg::{SpinMatrix, C64};
use dirac_kernel::packet::{gaussian_packet, EnergyBranch, PacketSpec};
use dirac_kernel::spinor::{clifford_residual, inner, Grid, Representation, SpinorField};
use dirac_kernel::Error;
use proptest::prelude::*;

#[test]
fn shipped_representations_satisfy_clifford_relations() {
    for d in [1, 3] {
        let reps = representations(d);
        assert!(!reps.is_empty());
        for rep in reps {
            assert!(clifford_residual(&rep).unwrap() <= 1e-15);
            // velocity operators have eigenvalues +-1
            for a in rep.alpha() {
                let ev = eigenvalues(a);
                let s = rep.spinor_dim();
                for (k, v) in ev.iter().enumerate() {
                    let want = if k < s / 2 { -1.0 } else { 1.0 };
                    assert!((v - want).abs() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn perturbed_beta_is_detected() {
    let rep = Representation::dirac(3).unwrap();
    let mut beta = *rep.beta();
    beta[(0, 1)] += C64::new(0.01, 0.0);
    let bad = Representation::from_matrices(beta, rep.alpha().to_vec()).unwrap();
    assert!(clifford_residual(&bad).unwrap() >= 0.01);
}

#[test]
fn dimension_mismatch_is_structural() {
    let rep = Representation::dirac(1).unwrap();
    let alpha3 = Representation::dirac(3).unwrap().alpha().to_vec();
    assert!(matches!(
        Representation::from_matrices(*rep.beta(), alpha3),
        Err(Error::Structural(_))
    ));
}

#[test]
fn grid_conventions() {
    let g = Grid::new(1, 8, 0.5).unwrap();
    assert_eq!(g.extent(), 4.0);
    assert_eq!(g.coord(0), -1.75);
    assert_eq!(g.coord(7), 1.75);
    // momenta in (-pi/dx, pi/dx]
    let pmax = std::f64::consts::PI / 0.5;
    assert_eq!(g.wavenumber(4), pmax);
    assert!((0..8).all(|k| g.wavenumber(k) > -pmax && g.wavenumber(k) <= pmax));
    assert!(Grid::new(1, 4, 0.1).is_err());
    assert!(Grid::new(2, 8, 0.1).is_err());
    assert!(Grid::new(1, 8, 0.0).is_err());
}

#[test]
fn normalised_inner_product_and_disjoint_support() {
    let grid = Grid::new(1, 256, 0.1).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let a = gaussian_packet(&grid, &rep, &PacketSpec::new(1, 0.5, 1.0).center(&[-6.0])).unwrap();
    let b = gaussian_packet(&grid, &rep, &PacketSpec::new(1, 0.5, 1.0).center(&[6.0]).momentum(&[1.0])).unwrap();
    assert!((inner(&a, &a).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
    assert!(inner(&a, &b).unwrap().norm() < 1e-12);
    let other = SpinorField::zeros(Grid::new(1, 128, 0.1).unwrap(), rep).unwrap();
    assert!(matches!(inner(&a, &other), Err(Error::Structural(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn inner_is_sesquilinear(seed in 0u64..1000, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let grid = Grid::new(1, 16, 0.3).unwrap();
        let rep = Representation::dirac(1).unwrap();
        let mut r = rng(seed);
        let a = random_field(&mut r, grid, rep.clone());
        let b = random_field(&mut r, grid, rep.clone());
        let c = random_field(&mut r, grid, rep.clone());
        let z = C64::new(re, im);
        let ab = inner(&a, &b).unwrap();
        prop_assert!((ab - inner(&b, &a).unwrap().conj()).norm() < 1e-12);
        let aa = inner(&a, &a).unwrap();
        prop_assert!(aa.re > 0.0 && aa.im.abs() < 1e-12);
        // conjugate-linear in the first slot, linear in the second
        let za = SpinorField::from_data(grid, rep.clone(), a.data().iter().map(|v| v * z).collect()).unwrap();
        prop_assert!((inner(&za, &b).unwrap() - z.conj() * ab).norm() < 1e-11);
        let bc = SpinorField::from_data(grid, rep.clone(), b.data().iter().zip(c.data()).map(|(x, y)| x + y * z).collect()).unwrap();
        let want = ab + z * inner(&a, &c).unwrap();
        prop_assert!((inner(&a, &bc).unwrap() - want).norm() < 1e-11);
    }

    #[test]
    fn packet_is_translation_covariant(shift in -20i32..20, p0 in -3.0f64..3.0) {
        let grid = Grid::new(1, 256, 0.1).unwrap();
        let rep = Representation::dirac(1).unwrap();
        let base = PacketSpec::new(1, 0.6, 1.0).momentum(&[p0]).branch(EnergyBranch::Positive);
        let a = gaussian_packet(&grid, &rep, &base.clone().center(&[0.0])).unwrap();
        let b = gaussian_packet(&grid, &rep, &base.center(&[shift as f64 * 0.1])).unwrap();
        let n = 256usize;
        let mut worst = 0.0f64;
        for c in 0..2 {
            for j in 0..n {
                let k = (j as i64 + shift as i64).rem_euclid(n as i64) as usize;
                worst = worst.max((a.component(c)[j] - b.component(c)[k]).norm());
            }
        }
        prop_assert!(worst < 1e-12, "{}", worst);
    }
}

#[test]
fn positive_packet_at_rest_has_no_mean_velocity() {
    let grid = Grid::new(1, 256, 0.1).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let spec = PacketSpec::new(1, 1.0, 1.0).branch(EnergyBranch::Positive);
    let psi = gaussian_packet(&grid, &rep, &spec).unwrap();
    let alpha = psi.expectation(&rep.alpha()[0]).re;
    // independent oracle: sum over modes of |psi(p)|^2 p / E
    let mut modes = psi.clone();
    let sp = Spectral::new(grid);
    sp.forward_field(&mut modes);
    let rho = modes.density();
    let total: f64 = rho.iter().sum();
    let oracle: f64 = rho
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let p = grid.wavenumber(k);
            r * p / (p * p + 1.0).sqrt()
        })
        .sum::<f64>()
        / total;
    assert!(alpha.abs() < 1e-6);
    assert!((alpha - oracle).abs() < 1e-10);
}

#[test]
fn expectation_of_identity_is_norm() {
    let grid = Grid::new(3, 8, 0.5).unwrap();
    let rep = Representation::dirac(3).unwrap();
    let mut r = rng(3);
    let mut psi = random_field(&mut r, grid, rep);
    psi.normalize();
    assert!((psi.expectation(&SpinMatrix::identity(4)) - C64::new(1.0, 0.0)).norm() < 1e-12);
}
