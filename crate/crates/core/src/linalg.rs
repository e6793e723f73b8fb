//! Small dense complex matrices for spinor-space algebra (dimension 2 or 4).

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

pub const MAX_DIM: usize = 4;

/// Square complex matrix of dimension `dim <= 4`, stored row-major in a
/// fixed 4x4 buffer. Entries outside the `dim x dim` block stay zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinMatrix {
    dim: usize,
    data: [[C64; MAX_DIM]; MAX_DIM],
}

impl SpinMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "spinor dimension {dim} unsupported");
        Self {
            dim,
            data: [[C64::new(0.0, 0.0); MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, C64::new(1.0, 0.0))
    }

    pub fn scalar(dim: usize, value: C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i][i] = value;
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "non-square matrix rows");
            for (j, v) in row.iter().enumerate() {
                m.data[i][j] = *v;
            }
        }
        m
    }

    pub fn from_real(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "non-square matrix rows");
            for (j, v) in row.iter().enumerate() {
                m.data[i][j] = C64::new(*v, 0.0);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] = self.data[j][i].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] *= s;
            }
        }
        m
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i][i]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                best = best.max(self.data[i][j].norm());
            }
        }
        best
    }

    /// `max |self - other|` entrywise.
    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        (*self - *other).max_abs()
    }

    /// Writes `self * v` into `out`. Both slices have length `dim`.
    #[inline]
    pub fn apply(&self, v: &[C64], out: &mut [C64]) {
        for i in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.dim {
                acc += self.data[i][j] * v[j];
            }
            out[i] = acc;
        }
    }

    /// Residual of `self` being unitary: `max |U^dagger U - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        (self.adjoint() * *self).max_diff(&Self::identity(self.dim))
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.max_diff(&self.adjoint())
    }
}

impl Index<(usize, usize)> for SpinMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i][j]
    }
}

impl IndexMut<(usize, usize)> for SpinMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i][j]
    }
}

impl Add for SpinMatrix {
    type Output = SpinMatrix;
    fn add(self, rhs: SpinMatrix) -> SpinMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut m = self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] += rhs.data[i][j];
            }
        }
        m
    }
}

impl Sub for SpinMatrix {
    type Output = SpinMatrix;
    fn sub(self, rhs: SpinMatrix) -> SpinMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut m = self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] -= rhs.data[i][j];
            }
        }
        m
    }
}

impl Neg for SpinMatrix {
    type Output = SpinMatrix;
    fn neg(self) -> SpinMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul for SpinMatrix {
    type Output = SpinMatrix;
    fn mul(self, rhs: SpinMatrix) -> SpinMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut m = SpinMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for k in 0..self.dim {
                let a = self.data[i][k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..self.dim {
                    m.data[i][j] += a * rhs.data[k][j];
                }
            }
        }
        m
    }
}
