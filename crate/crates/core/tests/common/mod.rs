#![allow(dead_code)]

use dirac_kernel::linalg::{SpinMatrix, C64};
use dirac_kernel::spinor::{Grid, Representation, SpinorField};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_na(m: &SpinMatrix) -> DMatrix<C64> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| m[(i, j)])
}

pub fn na_max_diff(a: &DMatrix<C64>, b: &SpinMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..b.dim() {
        for j in 0..b.dim() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// `exp(-i H t)` by nalgebra's general matrix exponential.
pub fn expm_minus_i(h: &SpinMatrix, t: f64) -> DMatrix<C64> {
    (to_na(h) * C64::new(0.0, -t)).exp()
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn eigenvalues(h: &SpinMatrix) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new(to_na(h));
    let mut v: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

pub fn random_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn random_field(rng: &mut ChaCha8Rng, grid: Grid, rep: Representation) -> SpinorField {
    let n = grid.cell_count() * rep.spinor_dim();
    let data = (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    SpinorField::from_data(grid, rep, data).unwrap()
}

/// Every representation available in a dimension.
pub fn representations(d: usize) -> Vec<Representation> {
    use dirac_kernel::spinor::RepresentationKind::*;
    [Dirac, Chiral, Swapped]
        .into_iter()
        .filter_map(|k| Representation::new(d, k).ok())
        .collect()
}
