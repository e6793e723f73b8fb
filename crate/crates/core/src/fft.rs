//! Discrete Fourier transforms on periodic grids.
//!
//! Two conventions live here. The raw transforms are plain unnormalised
//! forward / `1/N^d`-normalised inverse DFTs, used by the steppers where
//! coordinate phases cancel. The physical transform
//! `f(p) = dx^d sum_j f(x_j) exp(-i p.x_j)` accounts for the cell-centred
//! origin, so a band-limited delta at the origin has every mode equal to one.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::linalg::C64;
use crate::spinor::{Grid, SpinorField};

#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `exp(-i p.x_0)` per mode, where `x_0` is the first cell centre.
    origin_phase: Vec<C64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points_per_axis();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let x0 = grid.coord(0);
        let origin_phase = (0..grid.cell_count())
            .map(|mode| {
                let p = grid.momentum(mode);
                let phase: f64 = p.iter().map(|pi| pi * x0).sum();
                C64::from_polar(1.0, -phase)
            })
            .collect();
        Self {
            grid,
            forward,
            inverse,
            origin_phase,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn transform(&self, data: &mut [C64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points_per_axis();
        let d = self.grid.spatial_dim();
        debug_assert_eq!(data.len(), self.grid.cell_count());
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // last axis: contiguous rows
        plan.process_with_scratch(data, &mut scratch);
        if d == 1 {
            return;
        }
        let mut line = vec![C64::new(0.0, 0.0); n];
        for axis in (0..d - 1).rev() {
            let stride = n.pow((d - 1 - axis) as u32);
            let block = stride * n;
            for base in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = data[base + offset + k * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        data[base + offset + k * stride] = *v;
                    }
                }
            }
        }
    }

    /// Unnormalised forward DFT of one component array.
    pub fn forward_raw(&self, data: &mut [C64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse DFT including the `1/N^d` factor.
    pub fn inverse_raw(&self, data: &mut [C64]) {
        self.transform(data, &self.inverse);
        let s = 1.0 / self.grid.cell_count() as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    pub fn forward_field(&self, field: &mut SpinorField) {
        for c in 0..field.rep().spinor_dim() {
            self.forward_raw(field.component_mut(c));
        }
    }

    pub fn inverse_field(&self, field: &mut SpinorField) {
        for c in 0..field.rep().spinor_dim() {
            self.inverse_raw(field.component_mut(c));
        }
    }

    /// Position samples to physical momentum amplitudes.
    pub fn to_momentum(&self, data: &mut [C64]) {
        self.forward_raw(data);
        let vol = self.grid.cell_volume();
        for (z, ph) in data.iter_mut().zip(&self.origin_phase) {
            *z *= ph * vol;
        }
    }

    /// Physical momentum amplitudes back to position samples:
    /// `f(x_j) = L^-d sum_p f(p) exp(i p.x_j)`.
    pub fn to_position(&self, data: &mut [C64]) {
        let vol = self.grid.cell_volume();
        for (z, ph) in data.iter_mut().zip(&self.origin_phase) {
            *z *= ph.conj() / vol;
        }
        self.inverse_raw(data);
    }
}
