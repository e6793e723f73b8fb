//! Correspondence-principle harness: unit substitutions, classical
//! relativistic trajectories and actions, the hbar sweep comparing quantum
//! centroids with classical motion, Zitterbewegung observables and the
//! eikonal phase check of the FW kernel.

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::evolution::{check_wraparound, SplitScheme, Stepper};
use crate::fft::Spectral;
use crate::free::energy;
use crate::fw::fw_basis_difference;
use crate::linalg::C64;
use crate::packet::{gaussian_packet, EnergyBranch, PacketSpec};
use crate::potential::Potential;
use crate::spinor::{Grid, Representation, SpinorField};

/// Physical constants and their mapping onto the natural-unit solver:
/// mass `m0 c / hbar`, coupling `e / (c hbar)`, time `t c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitsConfig {
    pub hbar: f64,
    pub c: f64,
    pub m0: f64,
    pub e: f64,
}

impl UnitsConfig {
    pub fn natural(m0: f64, e: f64) -> Self {
        Self {
            hbar: 1.0,
            c: 1.0,
            m0,
            e,
        }
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.c > 0.0 && self.m0 > 0.0) || !self.e.is_finite() {
            return Err(Error::Validation(format!(
                "units need hbar, c, m0 > 0 and finite e, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn solver_mass(&self) -> f64 {
        self.m0 * self.c / self.hbar
    }

    pub fn solver_coupling(&self) -> f64 {
        self.e / (self.c * self.hbar)
    }

    pub fn solver_time(&self, t: f64) -> f64 {
        t * self.c
    }

    /// Solver wavenumber of a physical momentum.
    pub fn solver_momentum(&self, p: f64) -> f64 {
        p / self.hbar
    }
}

/// Classical phase-space point with kinetic momentum `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalState {
    pub t: f64,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl ClassicalState {
    pub fn new(t: f64, x: &[f64], p: &[f64]) -> Self {
        Self {
            t,
            x: x.to_vec(),
            p: p.to_vec(),
        }
    }

    /// `v = p c^2 / sqrt(m0^2 c^4 + |p|^2 c^2)`.
    pub fn velocity(&self, units: &UnitsConfig) -> Vec<f64> {
        velocity(&self.p, units)
    }
}

fn velocity(p: &[f64], u: &UnitsConfig) -> Vec<f64> {
    let p2: f64 = p.iter().map(|v| v * v).sum();
    let en = (u.m0 * u.m0 * u.c.powi(4) + p2 * u.c * u.c).sqrt();
    p.iter().map(|pi| pi * u.c * u.c / en).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<ClassicalState>,
}

impl Trajectory {
    pub fn last(&self) -> &ClassicalState {
        self.states.last().expect("trajectory is never empty")
    }

    /// Concatenation; `later` must start where `self` ends.
    pub fn concat(&self, later: &Trajectory) -> Result<Trajectory> {
        let end = self.last();
        let start = &later.states[0];
        if (end.t - start.t).abs() > 1e-12 || end.x != start.x || (self.dt - later.dt).abs() > 1e-15 {
            return Err(Error::Structural("trajectories do not join".into()));
        }
        let mut states = self.states.clone();
        states.extend(later.states[1..].iter().cloned());
        Ok(Trajectory { dt: self.dt, states })
    }
}

fn derivative(
    t: f64,
    x: &[f64],
    p: &[f64],
    pot: &Potential,
    u: &UnitsConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let v = velocity(p, u);
    let f = pot.fields(t, x)?;
    let d = x.len();
    let mut force = vec![0.0; d];
    for i in 0..d {
        force[i] = u.e * f.electric[i];
    }
    if d == 3 {
        let b = f.magnetic;
        let vxb = [
            v[1] * b[2] - v[2] * b[1],
            v[2] * b[0] - v[0] * b[2],
            v[0] * b[1] - v[1] * b[0],
        ];
        for i in 0..3 {
            force[i] += u.e * vxb[i] / u.c;
        }
    }
    if force.iter().any(|f| !f.is_finite()) {
        return Err(Error::Domain(format!("non-finite field at t = {t}, x = {x:?}")));
    }
    Ok((v, force))
}

/// Classical RK4 for `dx/dt = v(p)`, `dp/dt = e (E + v x B / c)`.
/// `half_width`, when given, is the box half-extent the trajectory must stay
/// inside.
pub fn integrate_classical(
    state0: &ClassicalState,
    pot: &Potential,
    t1: f64,
    dt: f64,
    units: &UnitsConfig,
    half_width: Option<f64>,
) -> Result<Trajectory> {
    units.validate()?;
    let steps = SplitScheme::lie(dt).slices(t1 - state0.t)?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(state0.clone());
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
    for k in 0..steps {
        let cur = &states[k];
        let t = state0.t + k as f64 * dt;
        let (k1x, k1p) = derivative(t, &cur.x, &cur.p, pot, units)?;
        let (k2x, k2p) = derivative(
            t + 0.5 * dt,
            &axpy(&cur.x, 0.5 * dt, &k1x),
            &axpy(&cur.p, 0.5 * dt, &k1p),
            pot,
            units,
        )?;
        let (k3x, k3p) = derivative(
            t + 0.5 * dt,
            &axpy(&cur.x, 0.5 * dt, &k2x),
            &axpy(&cur.p, 0.5 * dt, &k2p),
            pot,
            units,
        )?;
        let (k4x, k4p) = derivative(t + dt, &axpy(&cur.x, dt, &k3x), &axpy(&cur.p, dt, &k3p), pot, units)?;
        let combine = |y: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
            (0..y.len())
                .map(|i| y[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
                .collect()
        };
        let x = combine(&cur.x, &k1x, &k2x, &k3x, &k4x);
        let p = combine(&cur.p, &k1p, &k2p, &k3p, &k4p);
        if let Some(h) = half_width {
            if x.iter().any(|xi| xi.abs() >= h) {
                return Err(Error::Domain(format!(
                    "trajectory leaves the box |x| < {h} at t = {}",
                    t + dt
                )));
            }
        }
        states.push(ClassicalState {
            t: state0.t + (k + 1) as f64 * dt,
            x,
            p,
        });
    }
    Ok(Trajectory { dt, states })
}

/// Closed-form position for motion from rest at the origin in a constant
/// field with force `e E` (1+1D): `x(t) = (m0 c^2 / eE)(sqrt(1 + (eE t / m0 c)^2) - 1)`.
pub fn hyperbolic_motion(t: f64, force: f64, units: &UnitsConfig) -> f64 {
    let mc = units.m0 * units.c;
    mc * units.c / force * ((1.0 + (force * t / mc).powi(2)).sqrt() - 1.0)
}

/// `S = sum_k [-m0 c^2 sqrt(1 - v_k^2/c^2) + (e/c) A.v_k - e A0] dt` with
/// chord velocities and the potential at segment midpoints.
pub fn classical_action(traj: &Trajectory, pot: &Potential, units: &UnitsConfig) -> Result<f64> {
    let u = units;
    let mut total = 0.0;
    for w in traj.states.windows(2) {
        let dt = w[1].t - w[0].t;
        let dx: Vec<f64> = w[1].x.iter().zip(&w[0].x).map(|(a, b)| a - b).collect();
        let v2: f64 = dx.iter().map(|d| d * d).sum::<f64>() / (dt * dt);
        if v2 >= u.c * u.c {
            return Err(Error::Domain(format!(
                "superluminal step at t = {}: |v| = {} >= c",
                w[0].t,
                v2.sqrt()
            )));
        }
        let xm: Vec<f64> = w[1].x.iter().zip(&w[0].x).map(|(a, b)| 0.5 * (a + b)).collect();
        let a = pot.evaluate(0.5 * (w[0].t + w[1].t), &xm)?;
        let a_dx: f64 = dx.iter().zip(&a.a).map(|(d, ai)| d * ai).sum();
        total += -u.m0 * u.c * u.c * (1.0 - v2 / (u.c * u.c)).sqrt() * dt + u.e / u.c * a_dx - u.e * a.a0 * dt;
    }
    Ok(total)
}

/// `m0 sqrt(t^2 - r^2)`, defined strictly inside the light cone.
pub fn eikonal_free(x: &[f64], t: f64, m0: f64) -> Result<f64> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r >= t {
        return Err(Error::Domain(format!("r = {r} is not inside the light cone t = {t}")));
    }
    Ok(m0 * (t * t - r * r).sqrt())
}

/// Inputs of an hbar sweep. Lengths, times and momenta are physical.
#[derive(Clone, Debug)]
pub struct SweepScenario {
    pub grid: Grid,
    pub rep: Representation,
    pub potential: Potential,
    pub center: Vec<f64>,
    pub momentum: Vec<f64>,
    /// Packet width at `reference_hbar`; rescaled as `sqrt(hbar)`.
    pub width: f64,
    pub reference_hbar: f64,
    pub t1: f64,
    pub dt: f64,
    pub variant: crate::evolution::SplitVariant,
    /// Centroid sampling stride in steps.
    pub sample_every: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub hbar: f64,
    pub width: f64,
    /// `max_t |<x>(t) - x_classical(t)|` along axis 0.
    pub error: f64,
    /// `||T psi0 - psi0||`: the FW map's distance from the identity on the
    /// initial packet.
    pub fw_difference: f64,
    pub times: Vec<f64>,
    pub centroid: Vec<f64>,
    pub classical: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    /// Errors strictly decrease along the (decreasing) hbar list.
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }

    /// `err(hbar_min) / err(hbar_max)`.
    pub fn reduction(&self) -> f64 {
        self.rows.last().unwrap().error / self.rows[0].error
    }
}

fn sweep_member(sc: &SweepScenario, units: &UnitsConfig) -> Result<SweepRow> {
    let d = sc.grid.spatial_dim();
    let width = sc.width * (units.hbar / sc.reference_hbar).sqrt();
    // classical reference at the sampling times
    let traj = integrate_classical(
        &ClassicalState::new(0.0, &sc.center, &sc.momentum),
        &sc.potential,
        sc.t1,
        sc.dt,
        units,
        Some(sc.grid.half_extent()),
    )?;
    // resolution: at least 8 points per shortest de Broglie wavelength
    let p_max = traj
        .states
        .iter()
        .map(|s| s.p.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .fold(0.0, f64::max)
        + 5.0 * units.hbar / (2.0 * width);
    let k_max = p_max / units.hbar;
    let wavelength = 2.0 * std::f64::consts::PI / k_max;
    if wavelength < 8.0 * sc.grid.dx() {
        return Err(Error::Resolution(format!(
            "hbar = {}: shortest wavelength {wavelength} below 8 dx = {}",
            units.hbar,
            8.0 * sc.grid.dx()
        )));
    }
    let m = units.solver_mass();
    let e = units.solver_coupling();
    let p_solver: Vec<f64> = sc.momentum.iter().map(|p| units.solver_momentum(*p)).collect();
    let spec = PacketSpec::new(d, width, m)
        .center(&sc.center)
        .momentum(&p_solver)
        .branch(EnergyBranch::Positive);
    let psi0 = gaussian_packet(&sc.grid, &sc.rep, &spec)?;
    let span = units.solver_time(sc.t1);
    let dt = units.solver_time(sc.dt);
    let scheme = SplitScheme {
        variant: sc.variant,
        dt,
    };
    let steps = scheme.slices(span)?;
    check_wraparound(&psi0, span)?;
    let fw_difference = fw_basis_difference(&psi0, m)?;
    let solver_pot = sc.potential.time_scaled(1.0 / units.c);
    let mut stepper = Stepper::new(sc.grid, sc.rep.clone(), &solver_pot, scheme, m, e)?;
    let mut psi = psi0.clone();
    let mut times = vec![0.0];
    let mut centroid = vec![psi.mean_position(0)];
    let mut classical = vec![traj.states[0].x[0]];
    let stride = sc.sample_every.max(1);
    stepper.run(&mut psi, 0.0, steps, |k, _, s| {
        if k % stride == 0 || k == steps {
            times.push(k as f64 * sc.dt);
            centroid.push(s.mean_position(0));
            classical.push(traj.states[k].x[0]);
        }
    })?;
    let error = centroid
        .iter()
        .zip(&classical)
        .map(|(q, c)| (q - c).abs())
        .fold(0.0, f64::max);
    Ok(SweepRow {
        hbar: units.hbar,
        width,
        error,
        fw_difference,
        times,
        centroid,
        classical,
    })
}

/// Runs the scenario for every hbar (decreasing), members in parallel.
pub fn hbar_sweep(scenario: &SweepScenario, hbar_list: &[f64], units_base: &UnitsConfig) -> Result<SweepTable> {
    units_base.validate()?;
    if hbar_list.is_empty() || hbar_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Configuration("hbar list must be non-empty and strictly decreasing".into()));
    }
    let rows = hbar_list
        .par_iter()
        .map(|h| sweep_member(scenario, &units_base.with_hbar(*h)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZbTable {
    pub times: Vec<f64>,
    /// `<x_i>(t)` per axis.
    pub position: Vec<Vec<f64>>,
    /// `<alpha_i>(t)` per axis.
    pub velocity: Vec<Vec<f64>>,
    /// Dominant angular frequency of `<alpha_1>(t)`.
    pub dominant_frequency: f64,
}

/// Half the peak-to-peak excursion of a series after removing its
/// least-squares linear trend (a slow drift is not an oscillation).
pub fn oscillation_amplitude(series: &[f64]) -> f64 {
    let n = series.len() as f64;
    let mean_k = 0.5 * (n - 1.0);
    let mean_y = series.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in series.iter().enumerate() {
        let dk = k as f64 - mean_k;
        sxy += dk * (y - mean_y);
        sxx += dk * dk;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let (lo, hi) = series
        .iter()
        .enumerate()
        .map(|(k, y)| y - mean_y - slope * (k as f64 - mean_k))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    0.5 * (hi - lo)
}

/// Dominant angular frequency of a uniformly sampled real series: mean
/// removed, Hann window, 8x zero padding, parabolic interpolation of the log
/// magnitude around the peak bin.
pub fn dominant_frequency(samples: &[f64], dt: f64) -> f64 {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let padded = (8 * n).next_power_of_two();
    let mut buf: Vec<C64> = vec![C64::new(0.0, 0.0); padded];
    for (i, s) in samples.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
        buf[i] = C64::new((s - mean) * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    let mags: Vec<f64> = buf[..padded / 2].iter().map(|z| z.norm()).collect();
    let (peak, _) = mags
        .iter()
        .enumerate()
        .skip(1)
        .fold((1, f64::NEG_INFINITY), |best, (i, m)| if *m > best.1 { (i, *m) } else { best });
    let mut offset = 0.0;
    if peak + 1 < mags.len() {
        let (a, b, c) = (mags[peak - 1].ln(), mags[peak].ln(), mags[peak + 1].ln());
        let denom = a - 2.0 * b + c;
        if denom != 0.0 {
            offset = 0.5 * (a - c) / denom;
        }
    }
    2.0 * std::f64::consts::PI * (peak as f64 + offset) / (padded as f64 * dt)
}

/// Centroid and velocity-operator expectations along a sampled series, and
/// the dominant frequency of `<alpha_1>`. `mass` is the solver mass used to
/// bound the expected oscillation period `pi / E`.
pub fn zitterbewegung_observables(series: &[SpinorField], dt_sample: f64, mass: f64) -> Result<ZbTable> {
    if series.len() < 16 {
        return Err(Error::Sampling("series needs at least 16 samples".into()));
    }
    let first = &series[0];
    let grid = *first.grid();
    let rep = first.rep().clone();
    let d = grid.spatial_dim();
    // spectral mean energy of the first sample
    let spectral = Spectral::new(grid);
    let mut modes = first.clone();
    spectral.forward_field(&mut modes);
    let rho = modes.density();
    let total: f64 = rho.iter().sum();
    let p2: f64 = rho
        .iter()
        .enumerate()
        .map(|(mode, r)| r * grid.momentum(mode)[..d].iter().map(|p| p * p).sum::<f64>())
        .sum::<f64>()
        / total;
    let e_mean = (p2 + mass * mass).sqrt();
    let period = std::f64::consts::PI / e_mean;
    if dt_sample > period / 64.0 {
        return Err(Error::Sampling(format!(
            "sample spacing {dt_sample} exceeds period/64 = {}",
            period / 64.0
        )));
    }
    let times: Vec<f64> = (0..series.len()).map(|k| k as f64 * dt_sample).collect();
    let position: Vec<Vec<f64>> = (0..d)
        .map(|a| series.iter().map(|s| s.mean_position(a)).collect())
        .collect();
    let velocity: Vec<Vec<f64>> = (0..d)
        .map(|a| series.iter().map(|s| s.expectation(&rep.alpha()[a]).re).collect())
        .collect();
    let dominant = dominant_frequency(&velocity[0], dt_sample);
    Ok(ZbTable {
        times,
        position,
        velocity,
        dominant_frequency: dominant,
    })
}

/// Evolves `psi0` freely and collects `samples` states spaced by `dt_sample`.
pub fn sample_free_series(psi0: &SpinorField, mass: f64, dt_sample: f64, samples: usize) -> Result<Vec<SpinorField>> {
    let zero = Potential::Zero;
    let mut stepper = Stepper::new(*psi0.grid(), psi0.rep().clone(), &zero, SplitScheme::lie(dt_sample), mass, 0.0)?;
    let mut psi = psi0.clone();
    let mut out = Vec::with_capacity(samples);
    out.push(psi.clone());
    for k in 1..samples {
        stepper.step(&mut psi, (k - 1) as f64 * dt_sample)?;
        out.push(psi.clone());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EikonalReport {
    /// Sample radii (both signs of x contribute).
    pub radii: Vec<f64>,
    pub measured: Vec<f64>,
    pub predicted: Vec<f64>,
    pub max_relative_deviation: f64,
}

/// Local wavenumber of the lower (`exp(+iEt)`) FW branch against the
/// eikonal prediction `m0 r / (hbar sqrt(t^2 - r^2))`, over the window
/// `window.0 * t <= r <= window.1 * t`.
///
/// The kernel is tested against a Gaussian bump of width `smoothing`
/// (mode weights `exp(-p^2 w^2 / 2)`) so the band edge of the grid does not
/// contribute. 1+1D only.
pub fn eikonal_phase_check(
    grid: &Grid,
    t: f64,
    units: &UnitsConfig,
    window: (f64, f64),
    smoothing: f64,
) -> Result<EikonalReport> {
    units.validate()?;
    if grid.spatial_dim() != 1 {
        return Err(Error::Structural("eikonal check is 1+1D only".into()));
    }
    if !(0.0 < window.0 && window.0 < window.1 && window.1 < 1.0) {
        return Err(Error::Configuration(format!("bad window {window:?}")));
    }
    let tau = units.solver_time(t);
    let m = units.solver_mass();
    let l = |r: f64| (tau * tau - r * r).sqrt();
    let (r_lo, r_hi) = (window.0 * tau, window.1 * tau);
    let k_hi = m * r_hi / l(r_hi);
    // the window covers both signs of x
    let phase_span = 2.0 * m * (l(r_lo) - l(r_hi));
    if phase_span < 20.0 * std::f64::consts::PI {
        return Err(Error::Resolution(format!(
            "only {:.2} local wavelengths in the window, need 10",
            phase_span / (2.0 * std::f64::consts::PI)
        )));
    }
    if k_hi * grid.dx() > std::f64::consts::FRAC_PI_4 {
        return Err(Error::Resolution(format!(
            "local wavenumber {k_hi} not resolved by dx = {}",
            grid.dx()
        )));
    }
    if tau >= grid.half_extent() {
        return Err(Error::Scenario(format!(
            "light cone {tau} does not fit in L/2 = {}",
            grid.half_extent()
        )));
    }
    let n = grid.points_per_axis();
    let spectral = Spectral::new(*grid);
    let mut branch: Vec<C64> = (0..n)
        .map(|k| {
            let p = grid.wavenumber(k);
            C64::from_polar((-0.5 * p * p * smoothing * smoothing).exp(), energy(&[p], m) * tau)
        })
        .collect();
    spectral.to_position(&mut branch);
    let mut radii = Vec::new();
    let mut measured = Vec::new();
    let mut predicted = Vec::new();
    let mut worst = 0.0f64;
    for j in 1..n - 1 {
        let x = grid.coord(j);
        let r = x.abs();
        if r < r_lo || r > r_hi {
            continue;
        }
        let k_meas = (branch[j + 1] * branch[j - 1].conj()).arg() / (2.0 * grid.dx());
        let k_pred = m * r / l(r);
        let dev = (k_meas.abs() - k_pred).abs() / k_pred;
        worst = worst.max(dev);
        radii.push(x);
        measured.push(k_meas);
        predicted.push(k_pred);
    }
    Ok(EikonalReport {
        radii,
        measured,
        predicted,
        max_relative_deviation: worst,
    })
}

/// Measured local wavenumber of the lower FW branch at the cell nearest `x`.
pub fn local_wavenumber(grid: &Grid, t: f64, units: &UnitsConfig, x: f64, smoothing: f64) -> Result<f64> {
    let tau = units.solver_time(t);
    let m = units.solver_mass();
    let n = grid.points_per_axis();
    let spectral = Spectral::new(*grid);
    let mut branch: Vec<C64> = (0..n)
        .map(|k| {
            let p = grid.wavenumber(k);
            C64::from_polar((-0.5 * p * p * smoothing * smoothing).exp(), energy(&[p], m) * tau)
        })
        .collect();
    spectral.to_position(&mut branch);
    let j = ((x / grid.dx()) + 0.5 * n as f64 - 0.5).round() as usize;
    if j == 0 || j + 1 >= n {
        return Err(Error::Domain(format!("x = {x} at the grid edge")));
    }
    Ok((branch[j + 1] * branch[j - 1].conj()).arg() / (2.0 * grid.dx()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_substitutions() {
        let u = UnitsConfig {
            hbar: 0.5,
            c: 2.0,
            m0: 3.0,
            e: -1.0,
        };
        assert_eq!(u.solver_mass(), 12.0);
        assert_eq!(u.solver_coupling(), -1.0);
        assert_eq!(u.solver_time(1.5), 3.0);
        assert!(UnitsConfig { hbar: 0.0, ..u }.validate().is_err());
    }

    #[test]
    fn eikonal_examples() {
        assert_eq!(eikonal_free(&[0.0], 2.5, 2.0).unwrap(), 5.0);
        assert!((eikonal_free(&[1.0], 2.0, 1.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!(eikonal_free(&[0.0, 0.0, 1.0 - 1e-12], 1.0, 1.0).unwrap() < 2e-6);
        assert!(matches!(eikonal_free(&[2.0], 2.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn dominant_frequency_of_a_cosine() {
        let dt = 0.01;
        let s: Vec<f64> = (0..2000).map(|k| (2.3 * k as f64 * dt).cos()).collect();
        assert!((dominant_frequency(&s, dt) - 2.3).abs() < 2.3e-3);
    }

    #[test]
    fn superluminal_action_is_rejected() {
        let u = UnitsConfig::natural(1.0, 1.0);
        let traj = Trajectory {
            dt: 0.1,
            states: vec![ClassicalState::new(0.0, &[0.0], &[0.0]), ClassicalState::new(0.1, &[0.2], &[0.0])],
        };
        assert!(matches!(classical_action(&traj, &Potential::Zero, &u), Err(Error::Domain(_))));
    }
}
