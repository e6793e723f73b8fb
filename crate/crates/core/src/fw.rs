//! Foldy-Wouthuysen unitaries per momentum mode and the diagonal free
//! kernel they expose.
//!
//! `T(p) = ((E + m) I + beta alpha.p) / sqrt(2E(E + m))` satisfies
//! `T H(p) T^dagger = beta E`, so `U_free(t, p) = T^dagger exp(-i beta E t) T`.

use crate::error::{Error, Result};
use crate::evolution::{apply_interaction_phase, evolve, SplitScheme, SplitVariant};
use crate::fft::Spectral;
use crate::free::{energy, hamiltonian, step_unitary};
use crate::kernel::KernelField;
use crate::linalg::{SpinMatrix, C64};
use crate::potential::Potential;
use crate::spinor::{Grid, Representation, SpinorField};

/// FW data for one momentum mode.
#[derive(Clone, Debug)]
pub struct FwMode {
    pub p: Vec<f64>,
    pub energy: f64,
    pub t: SpinMatrix,
    /// `T H T^dagger`, equal to `beta E` up to rounding.
    pub h_fw: SpinMatrix,
}

impl FwMode {
    pub fn new(rep: &Representation, p: &[f64], m: f64) -> Result<Self> {
        let t = fw_matrix(rep, p, m)?;
        let h = hamiltonian(rep, p, m)?;
        Ok(Self {
            p: p.to_vec(),
            energy: energy(p, m),
            t,
            h_fw: t * h * t.adjoint(),
        })
    }

    /// `max |T H T^dagger - beta E|`.
    pub fn diagonalization_residual(&self, rep: &Representation) -> f64 {
        self.h_fw.max_diff(&rep.beta().scale_real(self.energy))
    }
}

/// Closed-form FW unitary. Fails only at `p = 0, m = 0`.
pub fn fw_matrix(rep: &Representation, p: &[f64], m: f64) -> Result<SpinMatrix> {
    if p.len() != rep.spatial_dim() {
        return Err(Error::Structural("momentum dimension mismatch".into()));
    }
    let e = energy(p, m);
    if e == 0.0 {
        return Err(Error::DegenerateMode);
    }
    let s = rep.spinor_dim();
    let norm = 1.0 / (2.0 * e * (e + m)).sqrt();
    Ok((SpinMatrix::identity(s).scale_real(e + m) + *rep.beta() * rep.alpha_dot(p)).scale_real(norm))
}

/// `T(p)` with the zero mode of a massless field mapped to the identity.
fn fw_or_identity(rep: &Representation, p: &[f64], m: f64) -> Result<SpinMatrix> {
    match fw_matrix(rep, p, m) {
        Err(Error::DegenerateMode) => Ok(SpinMatrix::identity(rep.spinor_dim())),
        other => other,
    }
}

/// `exp(-i beta E t)`.
pub fn fw_free_factor(rep: &Representation, e: f64, t: f64) -> SpinMatrix {
    let beta = *rep.beta();
    SpinMatrix::identity(rep.spinor_dim()).scale_real((e * t).cos()) + beta.scale(C64::new(0.0, -(e * t).sin()))
}

/// FW-presentation kernel: per mode `exp(-i beta E t)`.
pub fn fw_kernel(grid: &Grid, rep: &Representation, t: f64, m: f64) -> Result<KernelField> {
    if t < 0.0 {
        return Err(Error::Domain(format!("retarded kernel needs t >= 0, got {t}")));
    }
    let d = grid.spatial_dim();
    let table: Vec<SpinMatrix> = (0..grid.cell_count())
        .map(|mode| fw_free_factor(rep, energy(&grid.momentum(mode)[..d], m), t))
        .collect();
    KernelField::from_mode_table(*grid, rep.clone(), t, m, &table)
}

/// `max_p |U_free(t, p) - T^dagger exp(-i beta E t) T|` over the grid modes.
pub fn fw_conjugation_check(grid: &Grid, rep: &Representation, t: f64, m: f64) -> Result<f64> {
    let d = grid.spatial_dim();
    let mut worst = 0.0f64;
    for mode in 0..grid.cell_count() {
        let p = &grid.momentum(mode)[..d];
        let u = step_unitary(rep, p, m, t)?;
        let tm = fw_or_identity(rep, p, m)?;
        let conj = tm.adjoint() * fw_free_factor(rep, energy(p, m), t) * tm;
        worst = worst.max(u.max_diff(&conj));
    }
    Ok(worst)
}

/// Evolution carried out in FW variables: the state is mapped by `T`, each
/// slice applies `exp(-i beta E dt)` and the interaction phase conjugated by
/// `T`, and the result is mapped back. The slice ordering is the mirror of
/// the direct scheme (free factor first for Lie; free-phase-free for
/// Strang), so the two routes agree up to the splitting error.
#[allow(clippy::too_many_arguments)]
pub fn fw_evolve(
    psi0: &SpinorField,
    pot: &Potential,
    t0: f64,
    t1: f64,
    scheme: SplitScheme,
    m: f64,
    e: f64,
) -> Result<SpinorField> {
    let steps = scheme.slices(t1 - t0)?;
    let grid = *psi0.grid();
    let rep = psi0.rep().clone();
    let d = grid.spatial_dim();
    let spectral = Spectral::new(grid);
    let dt = scheme.dt;
    let mut t_table = Vec::with_capacity(grid.cell_count());
    let mut free_full = Vec::with_capacity(grid.cell_count());
    let mut free_half = Vec::with_capacity(grid.cell_count());
    for mode in 0..grid.cell_count() {
        let p = &grid.momentum(mode)[..d];
        t_table.push(fw_or_identity(&rep, p, m)?);
        let en = energy(p, m);
        free_full.push(fw_free_factor(&rep, en, dt));
        free_half.push(fw_free_factor(&rep, en, 0.5 * dt));
    }
    let t_adj: Vec<SpinMatrix> = t_table.iter().map(|t| t.adjoint()).collect();

    let mut phi = psi0.clone();
    spectral.forward_field(&mut phi);
    phi.apply_pointwise(|mode| t_table[mode]);

    let conjugated_phase = |phi: &mut SpinorField, t_mid: f64, h: f64| -> Result<()> {
        if pot.is_zero() {
            return Ok(());
        }
        phi.apply_pointwise(|mode| t_adj[mode]);
        spectral.inverse_field(phi);
        apply_interaction_phase(phi, pot, t_mid, h, e)?;
        spectral.forward_field(phi);
        phi.apply_pointwise(|mode| t_table[mode]);
        Ok(())
    };

    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        match scheme.variant {
            SplitVariant::Lie => {
                phi.apply_pointwise(|mode| free_full[mode]);
                conjugated_phase(&mut phi, t + 0.5 * dt, dt)?;
            }
            SplitVariant::Strang => {
                phi.apply_pointwise(|mode| free_half[mode]);
                conjugated_phase(&mut phi, t + 0.5 * dt, dt)?;
                phi.apply_pointwise(|mode| free_half[mode]);
            }
        }
    }
    phi.apply_pointwise(|mode| t_adj[mode]);
    spectral.inverse_field(&mut phi);
    Ok(phi)
}

/// Relative L2 difference between direct split-step evolution and the FW
/// route of [`fw_evolve`].
#[allow(clippy::too_many_arguments)]
pub fn fw_interacting_compare(
    psi0: &SpinorField,
    pot: &Potential,
    t0: f64,
    t1: f64,
    scheme: SplitScheme,
    m: f64,
    e: f64,
) -> Result<f64> {
    let direct = evolve(psi0, pot, t0, t1, scheme, m, e)?.final_state;
    let via_fw = fw_evolve(psi0, pot, t0, t1, scheme, m, e)?;
    Ok(via_fw.relative_l2_diff(&direct))
}

/// `||T psi - psi|| / ||psi||`: how far the FW map moves a state.
pub fn fw_basis_difference(psi: &SpinorField, m: f64) -> Result<f64> {
    let grid = *psi.grid();
    let rep = psi.rep().clone();
    let d = grid.spatial_dim();
    let spectral = Spectral::new(grid);
    let table = (0..grid.cell_count())
        .map(|mode| fw_or_identity(&rep, &grid.momentum(mode)[..d], m))
        .collect::<Result<Vec<_>>>()?;
    let mut out = psi.clone();
    spectral.forward_field(&mut out);
    out.apply_pointwise(|mode| table[mode]);
    spectral.inverse_field(&mut out);
    Ok(out.relative_l2_diff(psi))
}
