//! Exact free Dirac evolution, mode by mode.

use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::kernel::KernelField;
use crate::linalg::{SpinMatrix, C64};
use crate::spinor::{Grid, Representation, SpinorField};

/// Below this value of `E dt` the closed-form exponential switches to its
/// series expansion.
const SERIES_THRESHOLD: f64 = 1e-6;

/// `H(p) = alpha.p + m beta`.
pub fn hamiltonian(rep: &Representation, p: &[f64], m: f64) -> Result<SpinMatrix> {
    if p.len() != rep.spatial_dim() {
        return Err(Error::Structural(format!(
            "momentum has {} components, representation expects {}",
            p.len(),
            rep.spatial_dim()
        )));
    }
    Ok(rep.alpha_dot(p) + rep.beta().scale_real(m))
}

pub fn energy(p: &[f64], m: f64) -> f64 {
    (p.iter().map(|v| v * v).sum::<f64>() + m * m).sqrt()
}

/// `exp(-i H(p) dt) = cos(E dt) I - i sin(E dt) H / E`.
pub fn step_unitary(rep: &Representation, p: &[f64], m: f64, dt: f64) -> Result<SpinMatrix> {
    let h = hamiltonian(rep, p, m)?;
    Ok(exp_hermitian_involution(&h, energy(p, m), dt))
}

/// `exp(-i h dt)` for a Hermitian `h` with `h^2 = e^2 I`.
pub(crate) fn exp_hermitian_involution(h: &SpinMatrix, e: f64, dt: f64) -> SpinMatrix {
    let theta = e * dt;
    let (cos, sinc_dt) = if theta.abs() < SERIES_THRESHOLD {
        (1.0 - 0.5 * theta * theta, dt * (1.0 - theta * theta / 6.0))
    } else {
        (theta.cos(), theta.sin() / e)
    };
    SpinMatrix::identity(h.dim()).scale_real(cos) + h.scale(C64::new(0.0, -sinc_dt))
}

/// Positive and negative energy projectors `(E I +- H(p)) / 2E`.
pub fn spectral_projectors(
    rep: &Representation,
    p: &[f64],
    m: f64,
) -> Result<(SpinMatrix, SpinMatrix)> {
    let h = hamiltonian(rep, p, m)?;
    let e = energy(p, m);
    if e == 0.0 {
        return Err(Error::DegenerateMode);
    }
    let id = SpinMatrix::identity(rep.spinor_dim()).scale_real(e);
    let inv = 1.0 / (2.0 * e);
    Ok(((id + h).scale_real(inv), (id - h).scale_real(inv)))
}

/// Free evolution over a fixed step `dt`, with the per-mode unitaries
/// tabulated once.
#[derive(Clone, Debug)]
pub struct FreePropagator {
    spectral: Spectral,
    rep: Representation,
    mass: f64,
    dt: f64,
    unitaries: Vec<SpinMatrix>,
}

impl FreePropagator {
    pub fn new(grid: Grid, rep: Representation, mass: f64, dt: f64) -> Result<Self> {
        Self::with_spectral(Spectral::new(grid), rep, mass, dt)
    }

    pub fn with_spectral(spectral: Spectral, rep: Representation, mass: f64, dt: f64) -> Result<Self> {
        let grid = *spectral.grid();
        let d = grid.spatial_dim();
        let unitaries = (0..grid.cell_count())
            .map(|mode| step_unitary(&rep, &grid.momentum(mode)[..d], mass, dt))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spectral,
            rep,
            mass,
            dt,
            unitaries,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn unitaries(&self) -> &[SpinMatrix] {
        &self.unitaries
    }

    /// Multiplies raw mode amplitudes by the step unitaries.
    pub fn apply_modes(&self, modes: &mut SpinorField) {
        let table = &self.unitaries;
        modes.apply_pointwise(|mode| table[mode]);
    }

    pub fn step(&self, field: &mut SpinorField) {
        debug_assert_eq!(field.rep(), &self.rep);
        self.spectral.forward_field(field);
        self.apply_modes(field);
        self.spectral.inverse_field(field);
    }
}

/// One exact free step of length `dt`.
pub fn free_step(psi: &SpinorField, dt: f64, m: f64) -> Result<SpinorField> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("free step needs dt > 0, got {dt}")));
    }
    let prop = FreePropagator::new(*psi.grid(), psi.rep().clone(), m, dt)?;
    let mut out = psi.clone();
    prop.step(&mut out);
    Ok(out)
}

/// Applies `H_free` spectrally.
pub fn apply_free_hamiltonian(spectral: &Spectral, psi: &SpinorField, m: f64) -> Result<SpinorField> {
    let grid = *psi.grid();
    let d = grid.spatial_dim();
    let rep = psi.rep().clone();
    let table = (0..grid.cell_count())
        .map(|mode| hamiltonian(&rep, &grid.momentum(mode)[..d], m))
        .collect::<Result<Vec<_>>>()?;
    let mut out = psi.clone();
    spectral.forward_field(&mut out);
    out.apply_pointwise(|mode| table[mode]);
    spectral.inverse_field(&mut out);
    Ok(out)
}

/// Retarded free kernel sampled on the grid: the band-limited delta at the
/// origin propagated per spinor basis column.
pub fn free_kernel(grid: &Grid, rep: &Representation, t: f64, m: f64) -> Result<KernelField> {
    if t < 0.0 {
        return Err(Error::Domain(format!(
            "retarded kernel is defined for t >= 0, got t = {t}"
        )));
    }
    let d = grid.spatial_dim();
    let table = (0..grid.cell_count())
        .map(|mode| {
            if t == 0.0 {
                Ok(SpinMatrix::identity(rep.spinor_dim()))
            } else {
                step_unitary(rep, &grid.momentum(mode)[..d], m, t)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    KernelField::from_mode_table(*grid, rep.clone(), t, m, &table)
}

/// Projects raw or physical mode amplitudes onto one energy branch. The
/// zero mode at `m = 0` is split evenly.
pub(crate) fn project_modes(modes: &mut SpinorField, m: f64, positive: bool) -> Result<()> {
    let grid = *modes.grid();
    let rep = modes.rep().clone();
    let d = grid.spatial_dim();
    let mut table = Vec::with_capacity(grid.cell_count());
    for mode in 0..grid.cell_count() {
        let proj = match spectral_projectors(&rep, &grid.momentum(mode)[..d], m) {
            Ok((plus, minus)) => {
                if positive {
                    plus
                } else {
                    minus
                }
            }
            Err(Error::DegenerateMode) => SpinMatrix::identity(rep.spinor_dim()).scale_real(0.5),
            Err(e) => return Err(e),
        };
        table.push(proj);
    }
    modes.apply_pointwise(|mode| table[mode]);
    Ok(())
}

/// Projects a position-space field onto one energy branch.
pub fn project_energy(psi: &SpinorField, m: f64, positive: bool) -> Result<SpinorField> {
    let spectral = Spectral::new(*psi.grid());
    let mut out = psi.clone();
    spectral.forward_field(&mut out);
    project_modes(&mut out, m, positive)?;
    spectral.inverse_field(&mut out);
    Ok(out)
}
