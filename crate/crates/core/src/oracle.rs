//! Dense position-space transfer matrices for 1+1D grids: the time-sliced
//! product `prod_k (K_dt Phi_k)` assembled from explicit convolution and
//! diagonal phase matrices, independent of the FFT stepping path.

use crate::error::{Error, Result};
use crate::evolution::{interaction_phase, SplitScheme};
use crate::free::step_unitary;
use crate::linalg::{SpinMatrix, C64};
use crate::potential::Potential;
use crate::spinor::{Grid, Representation, SpinorField};

/// Largest supported `N * spinor_dim`.
pub const DENSE_CAP: usize = 4096;

/// Dense square complex matrix acting on flattened fields (component-major,
/// the [`SpinorField`] layout).
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl TransferMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, rhs: &TransferMatrix) -> TransferMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let out = &mut data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for (o, b) in out.iter_mut().zip(&rhs.data[k * n..(k + 1) * n]) {
                    *o += a * b;
                }
            }
        }
        TransferMatrix { dim: n, data }
    }

    pub fn adjoint(&self) -> TransferMatrix {
        let n = self.dim;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        TransferMatrix { dim: n, data }
    }

    pub fn max_diff(&self, other: &TransferMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M^dagger M - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        self.adjoint().matmul(self).max_diff(&Self::identity(self.dim))
    }
}

fn check_dense(grid: &Grid, rep: &Representation) -> Result<()> {
    if grid.spatial_dim() != 1 {
        return Err(Error::Feasibility("dense transfer matrices are 1+1D only".into()));
    }
    let dim = grid.points_per_axis() * rep.spinor_dim();
    if dim > DENSE_CAP {
        return Err(Error::Feasibility(format!(
            "N * spinor_dim = {dim} exceeds the dense cap {DENSE_CAP}"
        )));
    }
    Ok(())
}

/// Matrix of one free slice. The convolution block for cell offset `r` is
/// `(1/N) sum_k U(p_k) exp(2 pi i k r / N)`, summed directly.
pub fn build_transfer(grid: &Grid, rep: &Representation, m: f64, dt: f64) -> Result<TransferMatrix> {
    check_dense(grid, rep)?;
    let n = grid.points_per_axis();
    let s = rep.spinor_dim();
    let units = (0..n)
        .map(|k| step_unitary(rep, &[grid.wavenumber(k)], m, dt))
        .collect::<Result<Vec<_>>>()?;
    // circulant blocks by offset r = i - j (mod n)
    let mut blocks = vec![SpinMatrix::zeros(s); n];
    for (r, block) in blocks.iter_mut().enumerate() {
        let mut acc = SpinMatrix::zeros(s);
        for (k, u) in units.iter().enumerate() {
            let angle = 2.0 * std::f64::consts::PI * ((k * r) % n) as f64 / n as f64;
            acc = acc + u.scale(C64::from_polar(1.0, angle));
        }
        *block = acc.scale_real(1.0 / n as f64);
    }
    let dim = n * s;
    let mut data = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..n {
        for j in 0..n {
            let b = &blocks[(i + n - j) % n];
            for a in 0..s {
                for c in 0..s {
                    data[(a * n + i) * dim + c * n + j] = b[(a, c)];
                }
            }
        }
    }
    Ok(TransferMatrix { dim, data })
}

/// Block-diagonal interaction matrix at time `t` over a slice `dt`.
pub fn build_phase(
    grid: &Grid,
    rep: &Representation,
    pot: &Potential,
    t: f64,
    dt: f64,
    e: f64,
) -> Result<TransferMatrix> {
    check_dense(grid, rep)?;
    let n = grid.points_per_axis();
    let s = rep.spinor_dim();
    let dim = n * s;
    let mut data = vec![C64::new(0.0, 0.0); dim * dim];
    for j in 0..n {
        let x = grid.coord(j);
        let v = pot.evaluate(t, &[x])?;
        let ph = interaction_phase(rep, v.a0, &v.a[..1], e, dt)?;
        for a in 0..s {
            for c in 0..s {
                data[(a * n + j) * dim + c * n + j] = ph[(a, c)];
            }
        }
    }
    Ok(TransferMatrix { dim, data })
}

/// `prod_k (K_dt Phi_k) psi0` with `Phi_k` sampled at slice midpoints, in
/// chronological order.
pub fn oracle_evolve(psi0: &SpinorField, pot: &Potential, t: f64, dt: f64, m: f64, e: f64) -> Result<SpinorField> {
    let grid = *psi0.grid();
    let rep = psi0.rep().clone();
    let steps = SplitScheme::lie(dt).slices(t)?;
    let transfer = build_transfer(&grid, &rep, m, dt)?;
    let mut v = psi0.data().to_vec();
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let phase = build_phase(&grid, &rep, pot, t_mid, dt, e)?;
        v = transfer.apply(&phase.apply(&v));
    }
    SpinorField::from_data(grid, rep, v)
}

/// Discretised massless-charge action `e sum (A.dx - A0 dtau)` along a path of
/// `(tau_k, x_k)` samples, with the potential at segment midpoints.
pub fn path_action(path: &[(f64, Vec<f64>)], pot: &Potential, e: f64) -> Result<f64> {
    let mut total = 0.0;
    for w in path.windows(2) {
        let (t0, x0) = (&w[0].0, &w[0].1);
        let (t1, x1) = (&w[1].0, &w[1].1);
        if x0.len() != x1.len() {
            return Err(Error::Structural("path points have inconsistent dimension".into()));
        }
        let dtau = t1 - t0;
        let dx: Vec<f64> = x1.iter().zip(x0).map(|(a, b)| a - b).collect();
        let step = dx.iter().map(|v| v * v).sum::<f64>().sqrt();
        if step > dtau * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "superluminal path step: |dx| = {step} > dtau = {dtau}"
            )));
        }
        let xm: Vec<f64> = x1.iter().zip(x0).map(|(a, b)| 0.5 * (a + b)).collect();
        let v = pot.evaluate(0.5 * (t0 + t1), &xm)?;
        let a_dx: f64 = dx.iter().zip(&v.a).map(|(d, a)| d * a).sum();
        total += a_dx - v.a0 * dtau;
    }
    Ok(e * total)
}
