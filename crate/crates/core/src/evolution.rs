//! Interacting evolution as an alternating product of exact free steps and
//! pointwise gauge-phase factors, plus the generator and Duhamel checks.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::free::{apply_free_hamiltonian, FreePropagator};
use crate::kernel::KernelField;
use crate::linalg::{SpinMatrix, C64};
use crate::potential::Potential;
use crate::spinor::{Grid, Representation, SpinorField};

const PHASE_SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SplitVariant {
    /// Phase for the whole slice, then the free step.
    Lie,
    /// Half phase, free step, half phase.
    #[default]
    Strang,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitScheme {
    pub variant: SplitVariant,
    pub dt: f64,
}

impl SplitScheme {
    pub fn lie(dt: f64) -> Self {
        Self {
            variant: SplitVariant::Lie,
            dt,
        }
    }

    pub fn strang(dt: f64) -> Self {
        Self {
            variant: SplitVariant::Strang,
            dt,
        }
    }

    /// Number of slices covering `span`, rejecting spans that `dt` does not
    /// divide.
    pub fn slices(&self, span: f64) -> Result<usize> {
        if !(self.dt > 0.0) {
            return Err(Error::Configuration(format!("dt must be positive, got {}", self.dt)));
        }
        if span < 0.0 {
            return Err(Error::Configuration(format!("negative evolution span {span}")));
        }
        let n = (span / self.dt).round();
        if (span - n * self.dt).abs() > 1e-12 * span.max(1.0) {
            return Err(Error::Configuration(format!(
                "dt = {} does not divide the span {span}",
                self.dt
            )));
        }
        Ok(n as usize)
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionReport {
    pub final_state: SpinorField,
    /// Norm after each slice.
    pub norm_log: Vec<f64>,
    pub wall_time: Duration,
    pub steps: usize,
}

impl EvolutionReport {
    /// Largest deviation of the logged norms from the initial norm.
    pub fn norm_drift(&self, initial: f64) -> f64 {
        self.norm_log
            .iter()
            .map(|n| (n - initial).abs())
            .fold(0.0, f64::max)
    }
}

/// `H_int = e (A0 I - alpha.A)`.
pub fn interaction_hamiltonian(rep: &Representation, a0: f64, a: &[f64], e: f64) -> Result<SpinMatrix> {
    check_vector(rep, a)?;
    let s = rep.spinor_dim();
    Ok((SpinMatrix::identity(s).scale_real(a0) - rep.alpha_dot(a)).scale_real(e))
}

/// `exp(-i H_int dt) = exp(-i e A0 dt) [cos(e|A|dt) I + i sin(e|A|dt) alpha.A/|A|]`.
pub fn interaction_phase(rep: &Representation, a0: f64, a: &[f64], e: f64, dt: f64) -> Result<SpinMatrix> {
    check_vector(rep, a)?;
    Ok(phase_unchecked(rep, a0, a, e, dt))
}

#[inline]
fn phase_unchecked(rep: &Representation, a0: f64, a: &[f64], e: f64, dt: f64) -> SpinMatrix {
    let s = rep.spinor_dim();
    let global = C64::from_polar(1.0, -e * a0 * dt);
    let norm_a = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_a == 0.0 {
        return SpinMatrix::scalar(s, global);
    }
    let theta = e * norm_a * dt;
    let alpha_a = rep.alpha_dot(a);
    let (cos, sin_over_norm) = if theta.abs() < PHASE_SERIES_THRESHOLD {
        (1.0 - 0.5 * theta * theta, e * dt * (1.0 - theta * theta / 6.0))
    } else {
        (theta.cos(), theta.sin() / norm_a)
    };
    (SpinMatrix::identity(s).scale_real(cos) + alpha_a.scale(C64::new(0.0, sin_over_norm))).scale(global)
}

fn check_vector(rep: &Representation, a: &[f64]) -> Result<()> {
    if a.len() != rep.spatial_dim() {
        return Err(Error::Structural(format!(
            "vector potential has {} components, expected {}",
            a.len(),
            rep.spatial_dim()
        )));
    }
    Ok(())
}

/// Applies the pointwise interaction factor `exp(-i H_int(t, x) dt)`.
pub fn apply_interaction_phase(
    psi: &mut SpinorField,
    pot: &Potential,
    t: f64,
    dt: f64,
    e: f64,
) -> Result<()> {
    if pot.is_zero() {
        return Ok(());
    }
    let phases = phase_table(psi.grid(), psi.rep(), pot, t, dt, e)?;
    psi.apply_pointwise(|cell| phases[cell]);
    Ok(())
}

fn phase_table(
    grid: &Grid,
    rep: &Representation,
    pot: &Potential,
    t: f64,
    dt: f64,
    e: f64,
) -> Result<Vec<SpinMatrix>> {
    let d = grid.spatial_dim();
    (0..grid.cell_count())
        .map(|cell| {
            let x = grid.position(cell);
            let v = pot.evaluate(t, &x[..d])?;
            Ok(phase_unchecked(rep, v.a0, &v.a[..d], e, dt))
        })
        .collect()
}

/// Applies `H_int(t)` pointwise.
pub fn apply_interaction_hamiltonian(psi: &SpinorField, pot: &Potential, t: f64, e: f64) -> Result<SpinorField> {
    let grid = *psi.grid();
    let rep = psi.rep().clone();
    let d = grid.spatial_dim();
    let table = (0..grid.cell_count())
        .map(|cell| {
            let x = grid.position(cell);
            let v = pot.evaluate(t, &x[..d])?;
            interaction_hamiltonian(&rep, v.a0, &v.a[..d], e)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = psi.clone();
    out.apply_pointwise(|cell| table[cell]);
    Ok(out)
}

/// Applies the full Hamiltonian `H_free + H_int(t)`.
pub fn apply_hamiltonian(psi: &SpinorField, pot: &Potential, t: f64, m: f64, e: f64) -> Result<SpinorField> {
    let spectral = Spectral::new(*psi.grid());
    let mut out = apply_free_hamiltonian(&spectral, psi, m)?;
    let hint = apply_interaction_hamiltonian(psi, pot, t, e)?;
    for (o, h) in out.data_mut().iter_mut().zip(hint.data()) {
        *o += h;
    }
    Ok(out)
}

/// Reusable slice operator for one grid, potential and scheme.
pub struct Stepper<'a> {
    free: FreePropagator,
    potential: &'a Potential,
    coupling: f64,
    scheme: SplitScheme,
    /// Phase tables for time-independent potentials, keyed by sub-step
    /// length.
    cached: Vec<(f64, Vec<SpinMatrix>)>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        grid: Grid,
        rep: Representation,
        potential: &'a Potential,
        scheme: SplitScheme,
        mass: f64,
        coupling: f64,
    ) -> Result<Self> {
        if !(scheme.dt > 0.0) {
            return Err(Error::Configuration(format!("dt must be positive, got {}", scheme.dt)));
        }
        let free = FreePropagator::new(grid, rep, mass, scheme.dt)?;
        Ok(Self {
            free,
            potential,
            coupling,
            scheme,
            cached: Vec::new(),
        })
    }

    pub fn scheme(&self) -> SplitScheme {
        self.scheme
    }

    fn phase(&mut self, psi: &mut SpinorField, t_mid: f64, dt: f64) -> Result<()> {
        if self.potential.is_zero() {
            return Ok(());
        }
        if self.potential.is_static() {
            let pos = match self.cached.iter().position(|(h, _)| *h == dt) {
                Some(i) => i,
                None => {
                    let table = phase_table(psi.grid(), psi.rep(), self.potential, t_mid, dt, self.coupling)?;
                    self.cached.push((dt, table));
                    self.cached.len() - 1
                }
            };
            let table = &self.cached[pos].1;
            psi.apply_pointwise(|cell| table[cell]);
            Ok(())
        } else {
            apply_interaction_phase(psi, self.potential, t_mid, dt, self.coupling)
        }
    }

    /// Advances `psi` over the slice `[t, t + dt]`.
    pub fn step(&mut self, psi: &mut SpinorField, t: f64) -> Result<()> {
        let dt = self.scheme.dt;
        match self.scheme.variant {
            SplitVariant::Lie => {
                self.phase(psi, t + 0.5 * dt, dt)?;
                self.free.step(psi);
            }
            SplitVariant::Strang => {
                self.phase(psi, t + 0.25 * dt, 0.5 * dt)?;
                self.free.step(psi);
                self.phase(psi, t + 0.75 * dt, 0.5 * dt)?;
            }
        }
        Ok(())
    }

    /// Runs `steps` slices from `t0`, calling `observe(k, t_k, psi)` after
    /// every slice.
    pub fn run<F>(&mut self, psi: &mut SpinorField, t0: f64, steps: usize, mut observe: F) -> Result<()>
    where
        F: FnMut(usize, f64, &SpinorField),
    {
        for k in 0..steps {
            self.step(psi, t0 + k as f64 * self.scheme.dt)?;
            observe(k + 1, t0 + (k + 1) as f64 * self.scheme.dt, psi);
        }
        Ok(())
    }
}

/// Rejects states that could wrap around the periodic box within the span,
/// with propagation speed bounded by one.
pub fn check_wraparound(psi: &SpinorField, span: f64) -> Result<()> {
    let radius = psi.support_radius(1e-6);
    let half = psi.grid().half_extent();
    if radius + span >= half {
        return Err(Error::Scenario(format!(
            "wraparound budget violated: support radius {radius} + span {span} >= L/2 = {half}"
        )));
    }
    Ok(())
}

/// Evolves `psi0` from `t0` to `t1` with the product formula.
pub fn evolve(
    psi0: &SpinorField,
    pot: &Potential,
    t0: f64,
    t1: f64,
    scheme: SplitScheme,
    m: f64,
    e: f64,
) -> Result<EvolutionReport> {
    let steps = scheme.slices(t1 - t0)?;
    check_wraparound(psi0, t1 - t0)?;
    evolve_unchecked(psi0, pot, t0, steps, scheme, m, e)
}

pub(crate) fn evolve_unchecked(
    psi0: &SpinorField,
    pot: &Potential,
    t0: f64,
    steps: usize,
    scheme: SplitScheme,
    m: f64,
    e: f64,
) -> Result<EvolutionReport> {
    let start = Instant::now();
    let mut stepper = Stepper::new(*psi0.grid(), psi0.rep().clone(), pot, scheme, m, e)?;
    let mut psi = psi0.clone();
    let mut norm_log = Vec::with_capacity(steps);
    stepper.run(&mut psi, t0, steps, |_, _, s| norm_log.push(s.norm()))?;
    Ok(EvolutionReport {
        final_state: psi,
        norm_log,
        wall_time: start.elapsed(),
        steps,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Debug)]
pub struct GeneratorTable {
    pub dts: Vec<f64>,
    /// `||(U(dt) psi - psi)/dt + i H psi||`
    pub residuals: Vec<f64>,
    /// Same residual with the zero-coupling residual vector subtracted: the
    /// part attributable to the interaction.
    pub interaction_residuals: Vec<f64>,
    pub slope: f64,
    /// Set when more than `1e-6` of the probability sits in the top octave
    /// of modes.
    pub resolution_warning: bool,
}

fn generator_vectors(
    psi: &SpinorField,
    pot: &Potential,
    t: f64,
    m: f64,
    e: f64,
    dt: f64,
) -> Result<SpinorField> {
    let mut stepper = Stepper::new(*psi.grid(), psi.rep().clone(), pot, SplitScheme::lie(dt), m, e)?;
    let mut stepped = psi.clone();
    stepper.step(&mut stepped, t)?;
    let h = apply_hamiltonian(psi, pot, t, m, e)?;
    let mut r = stepped;
    for ((ri, p), hi) in r.data_mut().iter_mut().zip(psi.data()).zip(h.data()) {
        *ri = (*ri - p) / dt + C64::new(0.0, 1.0) * hi;
    }
    Ok(r)
}

/// Fraction of the probability carried by modes whose largest momentum
/// component exceeds half the band limit.
pub fn top_octave_fraction(psi: &SpinorField) -> f64 {
    let grid = *psi.grid();
    let spectral = Spectral::new(grid);
    let mut modes = psi.clone();
    spectral.forward_field(&mut modes);
    let half = 0.5 * grid.max_wavenumber();
    let rho = modes.density();
    let total: f64 = rho.iter().sum();
    let tail: f64 = rho
        .iter()
        .enumerate()
        .filter(|(mode, _)| {
            grid.momentum(*mode)[..grid.spatial_dim()]
                .iter()
                .any(|p| p.abs() > half)
        })
        .map(|(_, r)| r)
        .sum();
    tail / total
}

/// Finite-difference check of the generator of one Lie slice against
/// `H_free + H_int(t)` over a ladder of step sizes.
pub fn generator_residual(
    psi: &SpinorField,
    pot: &Potential,
    t: f64,
    m: f64,
    e: f64,
    dt_ladder: &[f64],
) -> Result<GeneratorTable> {
    if dt_ladder.len() < 2 || dt_ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Configuration("dt ladder must be strictly decreasing with >= 2 entries".into()));
    }
    let resolution_warning = top_octave_fraction(psi) > 1e-6;
    let zero = Potential::Zero;
    let mut residuals = Vec::with_capacity(dt_ladder.len());
    let mut interaction_residuals = Vec::with_capacity(dt_ladder.len());
    for &dt in dt_ladder {
        let full = generator_vectors(psi, pot, t, m, e, dt)?;
        let free = generator_vectors(psi, &zero, t, m, 0.0, dt)?;
        residuals.push(full.norm());
        interaction_residuals.push(full.l2_diff(&free));
    }
    let slope = loglog_slope(dt_ladder, &residuals);
    Ok(GeneratorTable {
        dts: dt_ladder.to_vec(),
        residuals,
        interaction_residuals,
        slope,
        resolution_warning,
    })
}

/// Residual of the Duhamel identity
/// `U(t) psi = U_free(t) psi - i int_0^t U_free(t - s) H_int(s) U(s) psi ds`
/// with Lie slices of length `dt` and midpoint quadrature.
pub fn duhamel_residual(psi: &SpinorField, pot: &Potential, t: f64, m: f64, e: f64, dt: f64) -> Result<f64> {
    let scheme = SplitScheme::lie(dt);
    let steps = scheme.slices(t)?;
    check_wraparound(psi, t)?;
    let grid = *psi.grid();
    let rep = psi.rep().clone();
    let d = grid.spatial_dim();
    let spectral = Spectral::new(grid);
    let mut stepper = Stepper::new(grid, rep.clone(), pot, scheme, m, e)?;
    let mut half = Stepper::new(grid, rep.clone(), pot, SplitScheme::lie(0.5 * dt), m, e)?;

    // accumulated in raw mode space
    let mut integral = SpinorField::zeros(grid, rep.clone())?;
    let mut state = psi.clone();
    for k in 0..steps {
        let tk = k as f64 * dt;
        let mut mid = state.clone();
        half.step(&mut mid, tk)?;
        let t_mid = tk + 0.5 * dt;
        let mut v = apply_interaction_hamiltonian(&mid, pot, t_mid, e)?;
        spectral.forward_field(&mut v);
        let lag = t - t_mid;
        v.apply_pointwise(|mode| {
            crate::free::step_unitary(&rep, &grid.momentum(mode)[..d], m, lag)
                .expect("momentum dimension matches grid")
        });
        for (acc, vi) in integral.data_mut().iter_mut().zip(v.data()) {
            *acc += vi;
        }
        stepper.step(&mut state, tk)?;
    }
    spectral.inverse_field(&mut integral);
    let free_t = FreePropagator::new(grid, rep, m, t)?;
    let mut free_state = psi.clone();
    if t > 0.0 {
        free_t.step(&mut free_state);
    }
    let mut r = state;
    for ((ri, f), s) in r.data_mut().iter_mut().zip(free_state.data()).zip(integral.data()) {
        *ri = *ri - f + C64::new(0.0, dt) * s;
    }
    Ok(r.norm())
}

/// Grid-sampled interacting kernel from `t0` to `t1`: each band-limited basis
/// column evolved with the product formula.
#[allow(clippy::too_many_arguments)]
pub fn interacting_kernel(
    grid: &Grid,
    rep: &Representation,
    pot: &Potential,
    t0: f64,
    t1: f64,
    scheme: SplitScheme,
    m: f64,
    e: f64,
) -> Result<KernelField> {
    if t1 < t0 {
        return Err(Error::Domain(format!(
            "retarded kernel needs t1 >= t0, got [{t0}, {t1}]"
        )));
    }
    let steps = scheme.slices(t1 - t0)?;
    let columns = (0..rep.spinor_dim())
        .map(|j| {
            let src = KernelField::delta_source(*grid, rep.clone(), j)?;
            Ok(evolve_unchecked(&src, pot, t0, steps, scheme, m, e)?.final_state)
        })
        .collect::<Result<Vec<_>>>()?;
    KernelField::from_columns(*grid, rep.clone(), t1 - t0, m, columns)
}

/// L2 distance between the evolution under `pot` and under its gauge
/// transform, after multiplying the former by `exp(i e chi(t1, x))`. The
/// initial state is given in the gauge of `pot` and mapped by
/// `exp(i e chi(t0, x))`.
#[allow(clippy::too_many_arguments)]
pub fn gauge_covariance_difference(
    psi0: &SpinorField,
    pot: &Potential,
    gauge: &crate::potential::GaugeFunction,
    t0: f64,
    t1: f64,
    scheme: SplitScheme,
    m: f64,
    e: f64,
) -> Result<f64> {
    let gauged = pot.gauge_transform(gauge.clone());
    let grid = *psi0.grid();
    let d = grid.spatial_dim();
    let multiply = |psi: &mut SpinorField, t: f64| {
        let s = psi.rep().spinor_dim();
        psi.apply_pointwise(|cell| {
            let x = grid.position(cell);
            SpinMatrix::scalar(s, C64::from_polar(1.0, e * gauge.value(t, &x[..d])))
        });
    };
    let mut psi0_gauged = psi0.clone();
    multiply(&mut psi0_gauged, t0);
    let a = evolve(psi0, pot, t0, t1, scheme, m, e)?;
    let b = evolve(&psi0_gauged, &gauged, t0, t1, scheme, m, e)?;
    let mut mapped = a.final_state;
    multiply(&mut mapped, t1);
    Ok(mapped.l2_diff(&b.final_state))
}

/// Phase-conjugates a kernel column set:
/// `exp(i e chi(t1, x)) K exp(-i e chi(t0, 0))`.
pub fn phase_conjugate_kernel(
    kernel: &KernelField,
    gauge: &crate::potential::GaugeFunction,
    t0: f64,
    t1: f64,
    e: f64,
) -> Result<KernelField> {
    let grid = *kernel.grid();
    let d = grid.spatial_dim();
    let s = kernel.rep().spinor_dim();
    let origin = [0.0; 3];
    let source = C64::from_polar(1.0, -e * gauge.value(t0, &origin[..d]));
    let columns = kernel
        .columns()
        .iter()
        .map(|col| {
            let mut c = col.clone();
            c.apply_pointwise(|cell| {
                let x = grid.position(cell);
                SpinMatrix::scalar(s, C64::from_polar(1.0, e * gauge.value(t1, &x[..d])) * source)
            });
            c
        })
        .collect();
    KernelField::from_columns(grid, kernel.rep().clone(), kernel.time(), kernel.mass(), columns)
}

/// Three-level self-convergence order `log2(|u_h - u_h/2| / |u_h/2 - u_h/4|)`.
pub fn self_convergence_order(coarse: &SpinorField, mid: &SpinorField, fine: &SpinorField) -> f64 {
    (coarse.l2_diff(mid) / mid.l2_diff(fine)).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interaction_hamiltonian_examples() {
        let rep = Representation::dirac(3).unwrap();
        let h = interaction_hamiltonian(&rep, 2.0, &[0.0; 3], 0.5).unwrap();
        assert_eq!(h, SpinMatrix::identity(4));
        let h = interaction_hamiltonian(&rep, 0.0, &[1.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(h, -rep.alpha()[0]);
        assert!(interaction_hamiltonian(&rep, 0.0, &[1.0], 1.0).is_err());
    }

    #[test]
    fn scalar_phase_and_half_turn() {
        let rep = Representation::dirac(1).unwrap();
        let u = interaction_phase(&rep, 3.0, &[0.0], 0.5, 0.2).unwrap();
        let want = SpinMatrix::scalar(2, C64::from_polar(1.0, -0.3));
        assert!(u.max_diff(&want) < 1e-15);
        // e|A|dt = pi/2 gives i alpha.A_hat, whose square is -I
        let u = interaction_phase(&rep, 0.0, &[1.0], 1.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(u.max_diff(&rep.alpha()[0].scale(C64::new(0.0, 1.0))) < 1e-15);
        assert!((u * u).max_diff(&SpinMatrix::identity(2).scale_real(-1.0)) < 1e-15);
        // e|A|dt = pi gives -I
        let u = interaction_phase(&rep, 0.0, &[1.0], 1.0, std::f64::consts::PI).unwrap();
        assert!(u.max_diff(&SpinMatrix::identity(2).scale_real(-1.0)) < 1e-15);
    }

    #[test]
    fn tiny_vector_potential_uses_series() {
        let rep = Representation::dirac(1).unwrap();
        let u = interaction_phase(&rep, 0.0, &[1e-9], -2.0, 0.1).unwrap();
        let lin = SpinMatrix::identity(2) + rep.alpha()[0].scale(C64::new(0.0, -2.0e-10));
        assert!(u.max_diff(&lin) < 1e-18);
        assert!(u.unitarity_residual() < 1e-15);
    }

    #[test]
    fn slices_require_divisor() {
        assert_eq!(SplitScheme::lie(0.1).slices(1.0).unwrap(), 10);
        assert!(matches!(
            SplitScheme::lie(0.3).slices(1.0),
            Err(Error::Configuration(_))
        ));
        assert!(SplitScheme::lie(0.0).slices(1.0).is_err());
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let x = [1e-2, 1e-3, 1e-4];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((loglog_slope(&x, &y) - 1.5).abs() < 1e-12);
    }
}
