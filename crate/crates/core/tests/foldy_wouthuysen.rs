mod common;

use common::*;
use dirac_kernel::evolution::{loglog_slope, SplitScheme};
use dirac_kernel::fft::Spectral;
use dirac_kernel::free::{energy, hamiltonian};
use dirac_kernel::fw::*;
use dirac_kernel::linalg::{SpinMatrix, C64};
use dirac_kernel::packet::{gaussian_packet, PacketSpec};
use dirac_kernel::potential::Potential;
use dirac_kernel::spinor::{Grid, Representation, SpinorField};
use dirac_kernel::Error;
use rand::Rng;

/// Projector onto the positive-energy eigenspace assembled from nalgebra
/// eigenvectors; independent of any phase convention.
fn eigen_positive_projector(h: &SpinMatrix) -> SpinMatrix {
    let eig = nalgebra::SymmetricEigen::new(to_na(h));
    let s = h.dim();
    let mut out = SpinMatrix::zeros(s);
    for (k, ev) in eig.eigenvalues.iter().enumerate() {
        if *ev > 0.0 {
            let v = eig.eigenvectors.column(k);
            for i in 0..s {
                for j in 0..s {
                    out[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
    }
    out
}

fn beta_plus(rep: &Representation) -> SpinMatrix {
    let s = rep.spinor_dim();
    (SpinMatrix::identity(s) + *rep.beta()).scale_real(0.5)
}

#[test]
fn identity_at_rest() {
    for d in [1, 3] {
        for rep in representations(d) {
            let t = fw_matrix(&rep, &vec![0.0; d], 1.3).unwrap();
            assert!(t.max_diff(&SpinMatrix::identity(rep.spinor_dim())) < 1e-15);
        }
    }
    let rep = Representation::dirac(3).unwrap();
    assert!(matches!(fw_matrix(&rep, &[0.0; 3], 0.0), Err(Error::DegenerateMode)));
}

#[test]
fn diagonalizes_against_eigendecomposition() {
    let mut r = rng(30);
    for d in [1, 3] {
        for rep in representations(d) {
            for _ in 0..100 {
                let p = random_vec(&mut r, d, 4.0);
                let mode = FwMode::new(&rep, &p, 1.0).unwrap();
                assert!(mode.diagonalization_residual(&rep) < 1e-12);
                let h = hamiltonian(&rep, &p, 1.0).unwrap();
                let ev = eigenvalues(&h);
                assert!((ev[ev.len() - 1] - mode.energy).abs() < 1e-12 && (ev[0] + mode.energy).abs() < 1e-12);
                // T maps the positive eigenspace of H onto the +1 eigenspace of beta
                let pulled = mode.t.adjoint() * beta_plus(&rep) * mode.t;
                assert!(pulled.max_diff(&eigen_positive_projector(&h)) < 1e-12);
            }
        }
    }
}

#[test]
fn unitary_for_many_momenta_including_massless() {
    let mut r = rng(31);
    let rep = Representation::dirac(3).unwrap();
    for i in 0..1000 {
        let p = random_vec(&mut r, 3, 10.0);
        let m = if i % 5 == 0 { 0.0 } else { r.gen_range(0.0..5.0) };
        let mode = FwMode::new(&rep, &p, m).unwrap();
        assert!(mode.t.unitarity_residual() < 1e-13);
        assert!(mode.diagonalization_residual(&rep) < 1e-12);
    }
}

#[test]
fn heavy_mass_stays_well_conditioned() {
    let rep = Representation::dirac(3).unwrap();
    let mode = FwMode::new(&rep, &[0.3, -0.1, 0.2], 100.0).unwrap();
    assert!(mode.t.unitarity_residual() < 1e-13);
    assert!(mode.diagonalization_residual(&rep) < 1e-12);
    let grid = Grid::new(1, 128, 0.1).unwrap();
    let rep1 = Representation::dirac(1).unwrap();
    assert!(fw_conjugation_check(&grid, &rep1, 1.0, 100.0).unwrap() < 1e-12);
}

#[test]
fn conjugation_identity_on_full_mode_sets() {
    let grid = Grid::new(1, 256, 0.1).unwrap();
    for rep in representations(1) {
        for (t, m) in [(0.0, 1.0), (1.0, 1.0), (3.7, 0.2), (1.0, 0.0)] {
            assert!(fw_conjugation_check(&grid, &rep, t, m).unwrap() < 1e-12);
        }
    }
    let g3 = Grid::new(3, 8, 0.4).unwrap();
    for rep in representations(3) {
        assert!(fw_conjugation_check(&g3, &rep, 1.0, 1.0).unwrap() < 1e-12);
    }
}

#[test]
fn fw_kernel_structure() {
    let grid = Grid::new(1, 64, 0.2).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let k0 = fw_kernel(&grid, &rep, 0.0, 1.0).unwrap();
    let mut delta = vec![C64::new(1.0, 0.0); 64];
    Spectral::new(grid).to_position(&mut delta);
    for cell in 0..64 {
        assert!((k0.entry(cell, 0, 0) - delta[cell]).norm() < 1e-14);
        assert!((k0.entry(cell, 1, 1) - delta[cell]).norm() < 1e-14);
    }
    let g3 = Grid::new(3, 8, 0.4).unwrap();
    let rep3 = Representation::dirac(3).unwrap();
    for (g, r) in [(grid, rep.clone()), (g3, rep3)] {
        let k = fw_kernel(&g, &r, 1.3, 0.8).unwrap();
        let s = r.spinor_dim();
        for cell in 0..g.cell_count() {
            for a in 0..s {
                for b in 0..s {
                    if a != b {
                        assert_eq!(k.entry(cell, a, b), C64::new(0.0, 0.0));
                    }
                }
            }
        }
        for (mode, table) in k.mode_table().iter().enumerate() {
            let en = energy(&g.momentum(mode)[..g.spatial_dim()], 0.8);
            let upper = C64::from_polar(1.0, -en * 1.3);
            assert!((table[(0, 0)] - upper).norm() < 1e-12);
            assert!((table[(s - 1, s - 1)] - upper.conj()).norm() < 1e-12);
            assert!((table[(s - 1, s - 1)] - table[(0, 0)].conj()).norm() < 1e-12);
        }
    }
    assert!(matches!(fw_kernel(&grid, &rep, -0.5, 1.0), Err(Error::Domain(_))));
}

fn packet() -> SpinorField {
    let grid = Grid::new(1, 256, 0.1).unwrap();
    let rep = Representation::dirac(1).unwrap();
    gaussian_packet(&grid, &rep, &PacketSpec::new(1, 1.0, 1.0).momentum(&[1.0])).unwrap()
}

#[test]
fn interacting_comparison() {
    let psi = packet();
    for scheme in [SplitScheme::lie(0.05), SplitScheme::strang(0.05)] {
        assert!(fw_interacting_compare(&psi, &Potential::Zero, 0.0, 2.0, scheme, 1.0, 1.0).unwrap() < 1e-12);
        let scalar = Potential::uniform(0.7, &[0.0]);
        assert!(fw_interacting_compare(&psi, &scalar, 0.0, 2.0, scheme, 1.0, 1.0).unwrap() < 1e-10);
    }
    let pot = Potential::constant_electric(&[0.5]);
    let dts = [0.08, 0.04, 0.02];
    let diffs: Vec<f64> = dts
        .iter()
        .map(|dt| fw_interacting_compare(&psi, &pot, 0.0, 1.6, SplitScheme::strang(*dt), 1.0, 1.0).unwrap())
        .collect();
    let slope = loglog_slope(&dts, &diffs);
    assert!(slope >= 0.9, "{slope} {diffs:?}");
    assert!(diffs[2] < diffs[0]);
}

#[test]
fn basis_difference_shrinks_for_slow_packets() {
    let grid = Grid::new(1, 256, 0.1).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let wide = gaussian_packet(&grid, &rep, &PacketSpec::new(1, 2.0, 1.0)).unwrap();
    let narrow = gaussian_packet(&grid, &rep, &PacketSpec::new(1, 0.5, 1.0)).unwrap();
    let a = fw_basis_difference(&wide, 1.0).unwrap();
    let b = fw_basis_difference(&narrow, 1.0).unwrap();
    assert!(a < b);
}
