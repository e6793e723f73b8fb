//! Clifford data, periodic grids and spinor-valued fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SpinMatrix, C64};

/// Dirac matrices for one spatial dimension (2-spinors) or three (4-spinors).
///
/// `beta` is `gamma^0` and `alpha[i]` is `gamma^0 gamma^i`, the velocity
/// operator along axis `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    spatial_dim: usize,
    spinor_dim: usize,
    beta: SpinMatrix,
    alpha: Vec<SpinMatrix>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationKind {
    /// `beta` diagonal: `sigma_3` in 1+1D, `diag(I, -I)` in 3+1D.
    #[default]
    Dirac,
    /// Chiral (Weyl) form with off-diagonal `beta`. 3+1D only.
    Chiral,
    /// 1+1D with `beta = sigma_1`, `alpha = sigma_3`.
    Swapped,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pauli() -> [SpinMatrix; 3] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        SpinMatrix::from_rows(&[&[z, one], &[one, z]]),
        SpinMatrix::from_rows(&[&[z, -i], &[i, z]]),
        SpinMatrix::from_rows(&[&[one, z], &[z, -one]]),
    ]
}

/// Places 2x2 blocks into a 4x4 matrix `[[a, b], [c, d]]`.
fn blocks(a: &SpinMatrix, b: &SpinMatrix, cc: &SpinMatrix, d: &SpinMatrix) -> SpinMatrix {
    let mut m = SpinMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = a[(i, j)];
            m[(i, j + 2)] = b[(i, j)];
            m[(i + 2, j)] = cc[(i, j)];
            m[(i + 2, j + 2)] = d[(i, j)];
        }
    }
    m
}

impl Representation {
    pub fn new(spatial_dim: usize, kind: RepresentationKind) -> Result<Self> {
        let s = pauli();
        let i2 = SpinMatrix::identity(2);
        let z2 = SpinMatrix::zeros(2);
        match (spatial_dim, kind) {
            (1, RepresentationKind::Dirac) => Ok(Self::from_matrices(s[2], vec![s[0]])?),
            (1, RepresentationKind::Swapped) => Ok(Self::from_matrices(s[0], vec![s[2]])?),
            (3, RepresentationKind::Dirac) => {
                let beta = blocks(&i2, &z2, &z2, &(-i2));
                let alpha = s.iter().map(|si| blocks(&z2, si, si, &z2)).collect();
                Self::from_matrices(beta, alpha)
            }
            (3, RepresentationKind::Chiral) => {
                let beta = blocks(&z2, &i2, &i2, &z2);
                let alpha = s.iter().map(|si| blocks(&(-*si), &z2, &z2, si)).collect();
                Self::from_matrices(beta, alpha)
            }
            (d, k) => Err(Error::Structural(format!(
                "representation {k:?} unavailable for spatial dimension {d}"
            ))),
        }
    }

    /// The default representation: diagonal `beta`.
    pub fn dirac(spatial_dim: usize) -> Result<Self> {
        Self::new(spatial_dim, RepresentationKind::Dirac)
    }

    /// Builds a representation from explicit matrices. Only the shapes are
    /// checked here; the algebra is measured by [`clifford_residual`].
    pub fn from_matrices(beta: SpinMatrix, alpha: Vec<SpinMatrix>) -> Result<Self> {
        let spatial_dim = alpha.len();
        let spinor_dim = match spatial_dim {
            1 => 2,
            3 => 4,
            d => {
                return Err(Error::Structural(format!(
                    "spatial dimension {d} not supported (1 or 3)"
                )))
            }
        };
        if beta.dim() != spinor_dim || alpha.iter().any(|a| a.dim() != spinor_dim) {
            return Err(Error::Structural(format!(
                "matrices must be {spinor_dim}x{spinor_dim} for spatial dimension {spatial_dim}"
            )));
        }
        Ok(Self {
            spatial_dim,
            spinor_dim,
            beta,
            alpha,
        })
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    pub fn spinor_dim(&self) -> usize {
        self.spinor_dim
    }

    pub fn beta(&self) -> &SpinMatrix {
        &self.beta
    }

    pub fn alpha(&self) -> &[SpinMatrix] {
        &self.alpha
    }

    /// `sum_i alpha_i v_i`.
    pub fn alpha_dot(&self, v: &[f64]) -> SpinMatrix {
        let mut m = SpinMatrix::zeros(self.spinor_dim);
        for (a, vi) in self.alpha.iter().zip(v) {
            m = m + a.scale_real(*vi);
        }
        m
    }
}

/// Max-norm over the Hermiticity and anticommutation residuals of a
/// representation.
pub fn clifford_residual(rep: &Representation) -> Result<f64> {
    let s = rep.spinor_dim;
    if rep.beta.dim() != s || rep.alpha.iter().any(|a| a.dim() != s) {
        return Err(Error::Structural("matrix dimension mismatch".into()));
    }
    let id = SpinMatrix::identity(s);
    let mut r = rep.beta.hermiticity_residual();
    r = r.max((rep.beta * rep.beta).max_diff(&id));
    for (i, ai) in rep.alpha.iter().enumerate() {
        r = r.max(ai.hermiticity_residual());
        r = r.max((*ai * rep.beta + rep.beta * *ai).max_abs());
        for (j, aj) in rep.alpha.iter().enumerate() {
            let anti = *ai * *aj + *aj * *ai;
            let target = if i == j { id.scale_real(2.0) } else { SpinMatrix::zeros(s) };
            r = r.max(anti.max_diff(&target));
        }
    }
    Ok(r)
}

/// Periodic cell-centred grid with `n` points per axis and the origin at the
/// centre of the box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    spatial_dim: usize,
    n: usize,
    dx: f64,
}

impl Grid {
    pub fn new(spatial_dim: usize, n: usize, dx: f64) -> Result<Self> {
        if spatial_dim != 1 && spatial_dim != 3 {
            return Err(Error::Structural(format!(
                "spatial dimension {spatial_dim} not supported (1 or 3)"
            )));
        }
        if !n.is_power_of_two() {
            return Err(Error::Validation(
                "points_per_axis must be a power of two".into(),
            ));
        }
        if n < 8 {
            return Err(Error::Validation("points_per_axis must be at least 8".into()));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::Validation("spacing dx must be positive".into()));
        }
        Ok(Self { spatial_dim, n, dx })
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn extent(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn half_extent(&self) -> f64 {
        0.5 * self.extent()
    }

    pub fn cell_count(&self) -> usize {
        self.n.pow(self.spatial_dim as u32)
    }

    /// `dx^d`.
    pub fn cell_volume(&self) -> f64 {
        self.dx.powi(self.spatial_dim as i32)
    }

    /// Coordinate of axis index `j`.
    #[inline]
    pub fn coord(&self, j: usize) -> f64 {
        (j as f64 + 0.5 - 0.5 * self.n as f64) * self.dx
    }

    /// Momentum of DFT index `k`, in `(-pi/dx, pi/dx]`.
    #[inline]
    pub fn wavenumber(&self, k: usize) -> f64 {
        let signed = if k <= self.n / 2 {
            k as f64
        } else {
            k as f64 - self.n as f64
        };
        2.0 * std::f64::consts::PI * signed / self.extent()
    }

    /// Per-axis indices of a flat cell index (last axis fastest).
    #[inline]
    pub fn axis_indices(&self, cell: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rem = cell;
        for a in (0..self.spatial_dim).rev() {
            idx[a] = rem % self.n;
            rem /= self.n;
        }
        idx
    }

    /// Position of a cell; unused axes are zero.
    #[inline]
    pub fn position(&self, cell: usize) -> [f64; 3] {
        let idx = self.axis_indices(cell);
        let mut x = [0.0; 3];
        for a in 0..self.spatial_dim {
            x[a] = self.coord(idx[a]);
        }
        x
    }

    /// Momentum of a mode; unused axes are zero.
    #[inline]
    pub fn momentum(&self, mode: usize) -> [f64; 3] {
        let idx = self.axis_indices(mode);
        let mut p = [0.0; 3];
        for a in 0..self.spatial_dim {
            p[a] = self.wavenumber(idx[a]);
        }
        p
    }

    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::PI / self.dx
    }
}

/// Spinor amplitudes on a grid, stored component-major: entry
/// `component * cell_count + cell`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    grid: Grid,
    rep: Representation,
    data: Vec<C64>,
}

impl SpinorField {
    pub fn zeros(grid: Grid, rep: Representation) -> Result<Self> {
        check_compatible(&grid, &rep)?;
        let len = grid.cell_count() * rep.spinor_dim();
        Ok(Self {
            grid,
            rep,
            data: vec![C64::new(0.0, 0.0); len],
        })
    }

    pub fn from_data(grid: Grid, rep: Representation, data: Vec<C64>) -> Result<Self> {
        check_compatible(&grid, &rep)?;
        if data.len() != grid.cell_count() * rep.spinor_dim() {
            return Err(Error::Structural(format!(
                "expected {} amplitudes, got {}",
                grid.cell_count() * rep.spinor_dim(),
                data.len()
            )));
        }
        Ok(Self { grid, rep, data })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rep(&self) -> &Representation {
        &self.rep
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[C64] {
        let n = self.grid.cell_count();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [C64] {
        let n = self.grid.cell_count();
        &mut self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn spinor_at(&self, cell: usize) -> [C64; 4] {
        let n = self.grid.cell_count();
        let mut v = [C64::new(0.0, 0.0); 4];
        for (c, vc) in v.iter_mut().enumerate().take(self.rep.spinor_dim()) {
            *vc = self.data[c * n + cell];
        }
        v
    }

    #[inline]
    pub fn set_spinor(&mut self, cell: usize, v: &[C64]) {
        let n = self.grid.cell_count();
        for c in 0..self.rep.spinor_dim() {
            self.data[c * n + cell] = v[c];
        }
    }

    /// Applies a per-cell spinor matrix in place.
    pub fn apply_pointwise<F>(&mut self, mut matrix_at: F)
    where
        F: FnMut(usize) -> SpinMatrix,
    {
        let s = self.rep.spinor_dim();
        let mut out = [C64::new(0.0, 0.0); 4];
        for cell in 0..self.grid.cell_count() {
            let v = self.spinor_at(cell);
            matrix_at(cell).apply(&v[..s], &mut out[..s]);
            self.set_spinor(cell, &out[..s]);
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&mut self, s: C64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            self.scale(C64::new(1.0 / n, 0.0));
        }
        n
    }

    /// Largest pointwise amplitude difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `||self - other|| / ||other||` in the grid L2 norm.
    pub fn relative_l2_diff(&self, other: &Self) -> f64 {
        let num: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = other.data.iter().map(|b| b.norm_sqr()).sum();
        (num / den).sqrt()
    }

    /// `||self - other||` in the grid L2 norm.
    pub fn l2_diff(&self, other: &Self) -> f64 {
        let num: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (num * self.grid.cell_volume()).sqrt()
    }

    /// Probability density summed over spinor components, per cell.
    pub fn density(&self) -> Vec<f64> {
        let n = self.grid.cell_count();
        let mut rho = vec![0.0; n];
        for c in 0..self.rep.spinor_dim() {
            for (r, z) in rho.iter_mut().zip(&self.data[c * n..(c + 1) * n]) {
                *r += z.norm_sqr();
            }
        }
        rho
    }

    /// `<x_axis>` computed with the cell measure.
    pub fn mean_position(&self, axis: usize) -> f64 {
        let rho = self.density();
        let vol = self.grid.cell_volume();
        rho.iter()
            .enumerate()
            .map(|(cell, r)| r * self.grid.position(cell)[axis])
            .sum::<f64>()
            * vol
    }

    /// `<psi, M psi>` for a constant spinor matrix.
    pub fn expectation(&self, m: &SpinMatrix) -> C64 {
        let s = self.rep.spinor_dim();
        let mut out = [C64::new(0.0, 0.0); 4];
        let mut acc = C64::new(0.0, 0.0);
        for cell in 0..self.grid.cell_count() {
            let v = self.spinor_at(cell);
            m.apply(&v[..s], &mut out[..s]);
            for c in 0..s {
                acc += v[c].conj() * out[c];
            }
        }
        acc * self.grid.cell_volume()
    }

    /// Radius (max-norm over axes) outside of which at most `tail` of the
    /// probability lies.
    pub fn support_radius(&self, tail: f64) -> f64 {
        let rho = self.density();
        let vol = self.grid.cell_volume();
        let total: f64 = rho.iter().sum::<f64>() * vol;
        let mut by_radius: Vec<(f64, f64)> = rho
            .iter()
            .enumerate()
            .map(|(cell, r)| {
                let x = self.grid.position(cell);
                let rad = x[..self.grid.spatial_dim()]
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()));
                (rad, r * vol)
            })
            .collect();
        by_radius.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut outside = 0.0;
        for (rad, mass) in by_radius {
            outside += mass;
            if outside > tail * total {
                return rad;
            }
        }
        0.0
    }

    pub(crate) fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.rep != other.rep {
            return Err(Error::Structural("fields live on different grids".into()));
        }
        Ok(())
    }
}

fn check_compatible(grid: &Grid, rep: &Representation) -> Result<()> {
    if grid.spatial_dim() != rep.spatial_dim() {
        return Err(Error::Structural(format!(
            "grid dimension {} does not match representation dimension {}",
            grid.spatial_dim(),
            rep.spatial_dim()
        )));
    }
    Ok(())
}

/// Grid inner product `sum conj(a) b dx^d`, conjugate-linear in `a`.
pub fn inner(a: &SpinorField, b: &SpinorField) -> Result<C64> {
    a.check_same_space(b)?;
    let acc: C64 = a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum();
    Ok(acc * a.grid.cell_volume())
}
