mod common;

use common::*;
use dirac_kernel::fft::Spectral;
use dirac_kernel::free::*;
use dirac_kernel::kernel::KernelField;
use dirac_kernel::linalg::{SpinMatrix, C64};
use dirac_kernel::packet::{gaussian_packet, PacketSpec};
use dirac_kernel::spinor::{Grid, Representation, SpinorField};
use dirac_kernel::Error;
use proptest::prelude::*;

#[test]
fn hamiltonian_examples() {
    let rep = Representation::dirac(3).unwrap();
    let h = hamiltonian(&rep, &[0.0, 0.0, 0.0], 1.0).unwrap();
    assert_eq!(h.max_diff(rep.beta()), 0.0);
    let ev = eigenvalues(&hamiltonian(&rep, &[0.0, 4.0, 0.0], 3.0).unwrap());
    for (v, want) in ev.iter().zip([-5.0, -5.0, 5.0, 5.0]) {
        assert!((v - want).abs() < 1e-12);
    }
    let h0 = hamiltonian(&rep, &[1.0, -2.0, 2.0], 0.0).unwrap();
    assert!(h0.trace().norm() < 1e-15);
    for v in eigenvalues(&h0) {
        assert!((v.abs() - 3.0).abs() < 1e-12);
    }
    assert!(hamiltonian(&rep, &[1.0], 1.0).is_err());
}

#[test]
fn step_unitary_matches_matrix_exponential() {
    let mut r = rng(1);
    for d in [1, 3] {
        for rep in representations(d) {
            for _ in 0..200 {
                let p = random_vec(&mut r, d, 5.0);
                let m = rand::Rng::gen_range(&mut r, 0.0..3.0);
                let dt = rand::Rng::gen_range(&mut r, 1e-3..2.0);
                let u = step_unitary(&rep, &p, m, dt).unwrap();
                let oracle = expm_minus_i(&hamiltonian(&rep, &p, m).unwrap(), dt);
                assert!(na_max_diff(&oracle, &u) < 1e-12);
                assert!(u.unitarity_residual() < 1e-13);
            }
        }
    }
}

#[test]
fn small_energy_series_branch() {
    let rep = Representation::dirac(1).unwrap();
    let u = step_unitary(&rep, &[1e-9], 0.0, 1e-3).unwrap();
    let oracle = expm_minus_i(&hamiltonian(&rep, &[1e-9], 0.0).unwrap(), 1e-3);
    assert!(na_max_diff(&oracle, &u) < 1e-15);
    let zero = step_unitary(&rep, &[0.0], 0.0, 1.0).unwrap();
    assert_eq!(zero.max_diff(&SpinMatrix::identity(2)), 0.0);
}

#[test]
fn projector_examples() {
    let rep = Representation::dirac(3).unwrap();
    let (plus, minus) = spectral_projectors(&rep, &[0.0; 3], 1.0).unwrap();
    let mut want = SpinMatrix::zeros(4);
    want[(0, 0)] = C64::new(1.0, 0.0);
    want[(1, 1)] = C64::new(1.0, 0.0);
    assert!(plus.max_diff(&want) < 1e-15);
    let rep1 = Representation::dirac(1).unwrap();
    let (plus1, _) = spectral_projectors(&rep1, &[0.0], 1.0).unwrap();
    assert!((plus1[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15 && plus1[(1, 1)].norm() < 1e-15);
    assert!((plus + minus).max_diff(&SpinMatrix::identity(4)) < 1e-15);
    assert!(matches!(spectral_projectors(&rep, &[0.0; 3], 0.0), Err(Error::DegenerateMode)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projector_algebra(px in -5.0f64..5.0, py in -5.0f64..5.0, pz in -5.0f64..5.0, m in 0.01f64..3.0) {
        let rep = Representation::dirac(3).unwrap();
        let p = [px, py, pz];
        let h = hamiltonian(&rep, &p, m).unwrap();
        let e = energy(&p, m);
        let (lp, lm) = spectral_projectors(&rep, &p, m).unwrap();
        prop_assert!((lp * lp).max_diff(&lp) < 1e-13);
        prop_assert!((lm * lm).max_diff(&lm) < 1e-13);
        prop_assert!((lp * lm).max_abs() < 1e-13);
        prop_assert!((h * lp).max_diff(&lp.scale_real(e)) < 1e-12);
        prop_assert!((h * lm).max_diff(&lm.scale_real(-e)) < 1e-12);
        prop_assert!((lp.trace() - C64::new(2.0, 0.0)).norm() < 1e-13);
        // eigen multiplicity oracle for tr Lambda_+ = spinor_dim / 2
        let positive = eigenvalues(&h).iter().filter(|v| **v > 0.0).count();
        prop_assert_eq!(positive, 2);
    }

    #[test]
    fn per_mode_semigroup(p in -10.0f64..10.0, m in 0.0f64..3.0, t in 0.0f64..5.0, s in 0.0f64..5.0) {
        let rep = Representation::dirac(1).unwrap();
        let lhs = step_unitary(&rep, &[p], m, t + s).unwrap();
        let rhs = step_unitary(&rep, &[p], m, t).unwrap() * step_unitary(&rep, &[p], m, s).unwrap();
        prop_assert!(lhs.max_diff(&rhs) < 1e-12);
    }
}

#[test]
fn massless_single_mode_chirality_phases() {
    let grid = Grid::new(1, 64, 0.1).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let k = 5usize;
    let p = grid.wavenumber(k);
    let dt = 0.3;
    // eigenvectors of sigma_1: (1, +-1)/sqrt 2 move with energy +-p
    for sign in [1.0, -1.0] {
        let mut psi = SpinorField::zeros(grid, rep.clone()).unwrap();
        for j in 0..64 {
            let ph = C64::from_polar(1.0, p * grid.coord(j));
            psi.component_mut(0)[j] = ph;
            psi.component_mut(1)[j] = ph * sign;
        }
        let n0 = psi.norm();
        let out = free_step(&psi, dt, 0.0).unwrap();
        let phase = C64::from_polar(1.0, -sign * p * dt);
        let mut worst = 0.0f64;
        for (a, b) in out.data().iter().zip(psi.data()) {
            worst = worst.max((a - b * phase).norm());
        }
        assert!(worst < 1e-12);
        assert!((out.norm() - n0).abs() < 1e-12);
    }
}

#[test]
fn positive_mode_acquires_eigen_phase() {
    let grid = Grid::new(1, 64, 0.1).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let (k, m, dt) = (3usize, 1.3, 0.7);
    let p = grid.wavenumber(k);
    let h = hamiltonian(&rep, &[p], m).unwrap();
    let eig = nalgebra::SymmetricEigen::new(to_na(&h));
    let idx = if eig.eigenvalues[0] > 0.0 { 0 } else { 1 };
    let v = eig.eigenvectors.column(idx);
    let mut psi = SpinorField::zeros(grid, rep).unwrap();
    for j in 0..64 {
        let ph = C64::from_polar(1.0, p * grid.coord(j));
        psi.component_mut(0)[j] = ph * v[0];
        psi.component_mut(1)[j] = ph * v[1];
    }
    let out = free_step(&psi, dt, m).unwrap();
    let phase = C64::from_polar(1.0, -eig.eigenvalues[idx] * dt);
    let worst = out.data().iter().zip(psi.data()).map(|(a, b)| (a - b * phase).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-12);
}

#[test]
fn free_step_semigroup_and_long_run_norm() {
    let grid = Grid::new(1, 256, 0.1).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let psi = gaussian_packet(&grid, &rep, &PacketSpec::new(1, 0.7, 1.0).momentum(&[2.0])).unwrap();
    let twice = free_step(&free_step(&psi, 0.05, 1.0).unwrap(), 0.05, 1.0).unwrap();
    let once = free_step(&psi, 0.1, 1.0).unwrap();
    assert!(twice.max_diff(&once) < 1e-12);
    let prop = FreePropagator::new(grid, rep, 1.0, 1e-3).unwrap();
    let mut state = psi.clone();
    let n0 = state.norm();
    for _ in 0..10_000 {
        let before = state.norm();
        prop.step(&mut state);
        assert!((state.norm() - before).abs() < 1e-12);
    }
    assert!((state.norm() - n0).abs() < 1e-10);
    assert!(matches!(free_step(&psi, 0.0, 1.0), Err(Error::Domain(_))));
}

#[test]
fn generator_consistency_is_first_order() {
    let grid = Grid::new(1, 256, 0.1).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let psi = gaussian_packet(&grid, &rep, &PacketSpec::new(1, 0.8, 1.0).momentum(&[1.0])).unwrap();
    let hpsi = apply_free_hamiltonian(&Spectral::new(grid), &psi, 1.0).unwrap();
    let dts = [1e-2, 3e-3, 1e-3, 3e-4];
    let res: Vec<f64> = dts
        .iter()
        .map(|dt| {
            let out = free_step(&psi, *dt, 1.0).unwrap();
            let r: Vec<C64> = out
                .data()
                .iter()
                .zip(psi.data())
                .zip(hpsi.data())
                .map(|((u, p), h)| (u - p) / *dt + C64::new(0.0, 1.0) * h)
                .collect();
            SpinorField::from_data(grid, psi.rep().clone(), r).unwrap().norm()
        })
        .collect();
    let slope = dirac_kernel::evolution::loglog_slope(&dts, &res);
    assert!((0.9..=1.1).contains(&slope), "{slope}");
}

#[test]
fn kernel_at_zero_is_band_limited_identity() {
    let grid = Grid::new(1, 32, 0.25).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let k = free_kernel(&grid, &rep, 0.0, 1.0).unwrap();
    let mut delta = vec![C64::new(1.0, 0.0); 32];
    Spectral::new(grid).to_position(&mut delta);
    for cell in 0..32 {
        for r in 0..2 {
            for c in 0..2 {
                let want = if r == c { delta[cell] } else { C64::new(0.0, 0.0) };
                assert!((k.entry(cell, r, c) - want).norm() < 1e-14);
            }
        }
    }
    assert!(matches!(free_kernel(&grid, &rep, -1.0, 1.0), Err(Error::Domain(_))));
}

#[test]
fn kernel_composition_and_application() {
    let grid = Grid::new(1, 128, 0.1).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let (t1, t2, m) = (0.4, 0.9, 1.0);
    let k1 = free_kernel(&grid, &rep, t1, m).unwrap();
    let k2 = free_kernel(&grid, &rep, t2, m).unwrap();
    let k12 = free_kernel(&grid, &rep, t1 + t2, m).unwrap();
    assert!(k2.compose(&k1).unwrap().max_diff(&k12) < 1e-10 * k12.max_abs().max(1.0));
    // kernel applied to a state equals free evolution
    let psi = gaussian_packet(&grid, &rep, &PacketSpec::new(1, 0.5, m).momentum(&[1.0])).unwrap();
    let via_kernel = k1.apply(&psi).unwrap();
    assert!(via_kernel.max_diff(&free_step(&psi, t1, m).unwrap()) < 1e-11);
}

#[test]
fn light_cone_leakage_from_bump_source() {
    let grid = Grid::new(1, 1024, 0.02).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let w = 0.5;
    let src = dirac_kernel::scenario::bump_source(&grid, &rep, w).unwrap();
    let out = free_step(&src, 2.0, 1.0).unwrap();
    let leak = dirac_kernel::scenario::mass_outside(&out, w + 2.0 + 4.0 * grid.dx());
    assert!(leak < 1e-6, "{leak}");
    // the bound is not vacuous: inside the cone most of the mass remains
    assert!(dirac_kernel::scenario::mass_outside(&out, 0.5 * w) > 0.1);
}

#[test]
fn dkf_roundtrip_is_bit_exact() {
    let grid = Grid::new(1, 16, 0.2).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let k = free_kernel(&grid, &rep, 0.3, 1.5).unwrap();
    let mut buf = Vec::new();
    k.write_dkf(&mut buf).unwrap();
    let header_end = buf.iter().position(|b| *b == b'\n').unwrap();
    assert_eq!(
        std::str::from_utf8(&buf[..header_end]).unwrap(),
        "DKF1 1 16 2.0000000000000001e-1 2.9999999999999999e-1 1.5000000000000000e0"
    );
    assert_eq!(buf.len(), header_end + 1 + 16 * 4 * 16);
    let back = KernelField::read_dkf(std::io::Cursor::new(buf), rep).unwrap();
    assert_eq!(back, k);
}

#[test]
fn projection_annihilates_opposite_branch() {
    let grid = Grid::new(3, 8, 0.6).unwrap();
    let rep = Representation::dirac(3).unwrap();
    let mut r = rng(5);
    let psi = random_field(&mut r, grid, rep);
    let plus = project_energy(&psi, 1.0, true).unwrap();
    let back = project_energy(&plus, 1.0, false).unwrap();
    assert!(back.norm() < 1e-12 * psi.norm());
    let minus = project_energy(&psi, 1.0, false).unwrap();
    let total: Vec<C64> = plus.data().iter().zip(minus.data()).map(|(a, b)| a + b).collect();
    let sum = SpinorField::from_data(grid, psi.rep().clone(), total).unwrap();
    assert!(sum.max_diff(&psi) < 1e-12);
}
