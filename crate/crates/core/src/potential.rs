//! External 4-potentials: analytic presets, tabulated data, gauge
//! transformations and the derived electric and magnetic fields.
//!
//! Conventions: `E = -grad A0 - dA/dt`, `B = curl A`. A gauge function `chi`
//! maps `A -> A + grad chi`, `A0 -> A0 - d chi/dt`, under which a solution
//! transforms as `psi -> exp(i e chi) psi`.

use std::path::Path;

use crate::error::{Error, Result};

/// Value of `(A0, A)` at a space-time point. Unused spatial slots are zero.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FourPotential {
    pub a0: f64,
    pub a: [f64; 3],
}

/// Electric and magnetic fields. In 1+1D the magnetic field is identically
/// zero.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Fields {
    pub electric: [f64; 3],
    pub magnetic: [f64; 3],
}

/// Potential together with its first derivatives at one point.
#[derive(Clone, Copy, Debug, Default)]
struct Jet {
    a0: f64,
    a0_x: [f64; 3],
    a: [f64; 3],
    a_t: [f64; 3],
    /// `a_x[i][j] = d A_i / d x_j`
    a_x: [[f64; 3]; 3],
}

impl Jet {
    fn fields(&self, spatial_dim: usize) -> Fields {
        let mut f = Fields::default();
        for i in 0..spatial_dim {
            f.electric[i] = -self.a0_x[i] - self.a_t[i];
        }
        if spatial_dim == 3 {
            let j = &self.a_x;
            f.magnetic = [j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]];
        }
        f
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn pad(v: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    out[..v.len()].copy_from_slice(v);
    out
}

/// Smooth real gauge function
/// `chi = (c0 + c_t t + c_x.x + c_tt t^2 + t c_tx.x) * G(x)` where the
/// optional envelope is `G = exp(-|x - x_c|^2 / 2 w^2)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaugeFunction {
    pub c0: f64,
    pub c_t: f64,
    pub c_x: [f64; 3],
    pub c_tt: f64,
    pub c_tx: [f64; 3],
    pub envelope: Option<([f64; 3], f64)>,
}

/// Values and derivatives of a gauge function at one point.
#[derive(Clone, Copy, Debug, Default)]
pub struct GaugeJet {
    pub chi: f64,
    pub chi_t: f64,
    pub grad: [f64; 3],
    /// `grad (d chi / dt)`
    pub grad_of_t: [f64; 3],
    /// `d (grad chi) / dt`
    pub t_of_grad: [f64; 3],
    pub hessian: [[f64; 3]; 3],
}

impl GaugeFunction {
    pub fn constant(c: f64) -> Self {
        Self {
            c0: c,
            ..Default::default()
        }
    }

    /// `chi = rate * t`.
    pub fn linear_in_time(rate: f64) -> Self {
        Self {
            c_t: rate,
            ..Default::default()
        }
    }

    /// `chi = -t E.x`: takes the scalar-potential gauge `A0 = -E.x` of a
    /// constant electric field to the temporal gauge `A = -E t`.
    pub fn electric_to_temporal(field: &[f64]) -> Self {
        let e = pad(field);
        Self {
            c_tx: [-e[0], -e[1], -e[2]],
            ..Default::default()
        }
    }

    pub fn jet(&self, t: f64, x: &[f64]) -> GaugeJet {
        let x = pad(x);
        let p = self.c0 + self.c_t * t + dot(&self.c_x, &x) + self.c_tt * t * t + t * dot(&self.c_tx, &x);
        let p_t = self.c_t + 2.0 * self.c_tt * t + dot(&self.c_tx, &x);
        let mut p_x = [0.0; 3];
        for i in 0..3 {
            p_x[i] = self.c_x[i] + t * self.c_tx[i];
        }
        let p_xt = self.c_tx;
        let (g, g_x, g_xx) = match self.envelope {
            None => (1.0, [0.0; 3], [[0.0; 3]; 3]),
            Some((xc, w)) => {
                let d = [x[0] - xc[0], x[1] - xc[1], x[2] - xc[2]];
                let w2 = w * w;
                let g = (-dot(&d, &d) / (2.0 * w2)).exp();
                let mut g_x = [0.0; 3];
                let mut g_xx = [[0.0; 3]; 3];
                for i in 0..3 {
                    g_x[i] = -d[i] / w2 * g;
                    for j in 0..3 {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        g_xx[i][j] = (d[i] * d[j] / (w2 * w2) - delta / w2) * g;
                    }
                }
                (g, g_x, g_xx)
            }
        };
        let mut jet = GaugeJet {
            chi: p * g,
            chi_t: p_t * g,
            ..Default::default()
        };
        for i in 0..3 {
            jet.grad[i] = p_x[i] * g + p * g_x[i];
            jet.grad_of_t[i] = self.c_tx[i] * g + p_t * g_x[i];
            jet.t_of_grad[i] = p_xt[i] * g + (self.c_t + 2.0 * self.c_tt * t + dot(&self.c_tx, &x)) * g_x[i];
            for j in 0..3 {
                jet.hessian[i][j] = p_x[i] * g_x[j] + g_x[i] * p_x[j] + p * g_xx[i][j];
            }
        }
        jet
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        self.jet(t, x).chi
    }
}

/// Potential sampled on a regular `(t, x...)` lattice and interpolated
/// multilinearly.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    spatial_dim: usize,
    /// First coordinate per axis: `t` then `x_1..x_d`.
    origin: Vec<f64>,
    spacing: Vec<f64>,
    counts: Vec<usize>,
    /// Per lattice node: `A0, A_1..A_d`, node index row-major with `t` slowest.
    values: Vec<f64>,
    fd_step: f64,
}

impl Table {
    /// Builds a table by sampling a closure on the lattice.
    pub fn sample<F>(
        spatial_dim: usize,
        origin: &[f64],
        spacing: &[f64],
        counts: &[usize],
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(f64, &[f64]) -> Result<FourPotential>,
    {
        let axes = spatial_dim + 1;
        if origin.len() != axes || spacing.len() != axes || counts.len() != axes {
            return Err(Error::Structural("table axes mismatch".into()));
        }
        if counts.iter().any(|c| *c < 2) || spacing.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::Structural(
                "table needs at least two nodes and positive spacing per axis".into(),
            ));
        }
        let total: usize = counts.iter().product();
        let width = spatial_dim + 1;
        let mut values = Vec::with_capacity(total * width);
        let mut idx = vec![0usize; axes];
        for _ in 0..total {
            let t = origin[0] + idx[0] as f64 * spacing[0];
            let x: Vec<f64> = (1..axes).map(|a| origin[a] + idx[a] as f64 * spacing[a]).collect();
            let v = f(t, &x)?;
            values.push(v.a0);
            values.extend_from_slice(&v.a[..spatial_dim]);
            for a in (0..axes).rev() {
                idx[a] += 1;
                if idx[a] < counts[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        let fd_step = spacing[1..].iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Self {
            spatial_dim,
            origin: origin.to_vec(),
            spacing: spacing.to_vec(),
            counts: counts.to_vec(),
            values,
            fd_step,
        })
    }

    /// Loads a CSV with columns `t, x..., A0, A...` (header row required)
    /// whose rows cover a full regular lattice in any order.
    pub fn from_csv(path: &Path, spatial_dim: usize) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let axes = spatial_dim + 1;
        let width = axes + spatial_dim + 1;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            if rec.len() != width {
                return Err(Error::Parse(format!(
                    "{}: row {} has {} columns, expected {width}",
                    path.display(),
                    line + 2,
                    rec.len()
                )));
            }
            let row = rec
                .iter()
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|e| {
                        Error::Parse(format!("{}: row {}: {e}", path.display(), line + 2))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let mut origin = Vec::with_capacity(axes);
        let mut spacing = Vec::with_capacity(axes);
        let mut counts = Vec::with_capacity(axes);
        for a in 0..axes {
            let mut coords: Vec<f64> = rows.iter().map(|r| r[a]).collect();
            coords.sort_by(f64::total_cmp);
            coords.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
            if coords.len() < 2 {
                return Err(Error::Parse(format!("axis {a} needs at least two nodes")));
            }
            let h = (coords[coords.len() - 1] - coords[0]) / (coords.len() - 1) as f64;
            origin.push(coords[0]);
            spacing.push(h);
            counts.push(coords.len());
        }
        let total: usize = counts.iter().product();
        if rows.len() != total {
            return Err(Error::Parse(format!(
                "{} rows do not fill a {total}-node lattice",
                rows.len()
            )));
        }
        let mut values = vec![f64::NAN; total * (spatial_dim + 1)];
        for row in &rows {
            let mut node = 0usize;
            for a in 0..axes {
                let k = ((row[a] - origin[a]) / spacing[a]).round();
                if (row[a] - origin[a] - k * spacing[a]).abs() > 1e-9 * spacing[a].max(1.0) {
                    return Err(Error::Parse(format!("irregular lattice coordinate {}", row[a])));
                }
                node = node * counts[a] + k as usize;
            }
            let base = node * (spatial_dim + 1);
            values[base..base + spatial_dim + 1].copy_from_slice(&row[axes..]);
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Parse("lattice has missing nodes".into()));
        }
        let fd_step = spacing[1..].iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Self {
            spatial_dim,
            origin,
            spacing,
            counts,
            values,
            fd_step,
        })
    }

    /// Writes the table in the CSV layout read by [`Table::from_csv`].
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        let d = self.spatial_dim;
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|i| format!("x{i}")));
        header.push("A0".into());
        header.extend((1..=d).map(|i| format!("A{i}")));
        w.write_record(&header)
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        let axes = d + 1;
        let total: usize = self.counts.iter().product();
        let mut idx = vec![0usize; axes];
        for node in 0..total {
            let mut rec: Vec<String> = (0..axes)
                .map(|a| format!("{:.16e}", self.origin[a] + idx[a] as f64 * self.spacing[a]))
                .collect();
            let base = node * (d + 1);
            rec.extend(self.values[base..base + d + 1].iter().map(|v| format!("{v:.16e}")));
            w.write_record(&rec)
                .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
            for a in (0..axes).rev() {
                idx[a] += 1;
                if idx[a] < self.counts[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn set_fd_step(&mut self, h: f64) {
        self.fd_step = h;
    }

    fn evaluate(&self, t: f64, x: &[f64]) -> Result<FourPotential> {
        let axes = self.spatial_dim + 1;
        let mut lo = [0usize; 4];
        let mut frac = [0.0f64; 4];
        for a in 0..axes {
            let coord = if a == 0 { t } else { x[a - 1] };
            let u = (coord - self.origin[a]) / self.spacing[a];
            let last = (self.counts[a] - 1) as f64;
            let tol = 1e-9;
            if !(u >= -tol && u <= last + tol) {
                return Err(Error::Domain(format!(
                    "point outside tabulated potential on axis {a}: {coord}"
                )));
            }
            let u = u.clamp(0.0, last);
            let k = (u.floor() as usize).min(self.counts[a] - 2);
            lo[a] = k;
            frac[a] = u - k as f64;
        }
        let width = self.spatial_dim + 1;
        let mut acc = [0.0f64; 4];
        for corner in 0..(1usize << axes) {
            let mut weight = 1.0;
            let mut node = 0usize;
            for a in 0..axes {
                let bit = (corner >> (axes - 1 - a)) & 1;
                weight *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                node = node * self.counts[a] + lo[a] + bit;
            }
            if weight == 0.0 {
                continue;
            }
            for (v, acc_v) in self.values[node * width..(node + 1) * width].iter().zip(acc.iter_mut()) {
                *acc_v += weight * v;
            }
        }
        let mut out = FourPotential {
            a0: acc[0],
            ..Default::default()
        };
        out.a[..self.spatial_dim].copy_from_slice(&acc[1..width]);
        Ok(out)
    }
}

/// External 4-potential.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    Zero,
    /// Constant `(A0, A)`.
    Uniform { a0: f64, a: [f64; 3] },
    /// `A0 = -E.x`, `A = 0`.
    ConstantElectric { field: [f64; 3] },
    /// `A = B x x / 2`, `A0 = 0`. 3+1D only.
    ConstantMagnetic { field: [f64; 3] },
    /// `A = a eps cos(k.x - w t + phi)`, `A0 = 0`.
    PlaneWave {
        amplitude: f64,
        wave_vector: [f64; 3],
        omega: f64,
        polarization: [f64; 3],
        phase: f64,
    },
    /// Plane wave under the temporal envelope `exp(-(t - t_c)^2 / 2 tau^2)`.
    GaussianPulse {
        amplitude: f64,
        wave_vector: [f64; 3],
        omega: f64,
        polarization: [f64; 3],
        center_time: f64,
        duration: f64,
    },
    Tabulated(Box<Table>),
    Gauged {
        base: Box<Potential>,
        gauge: GaugeFunction,
    },
    /// `base` evaluated at time `factor * t`.
    TimeScaled { base: Box<Potential>, factor: f64 },
}

impl Potential {
    pub fn constant_electric(field: &[f64]) -> Self {
        Potential::ConstantElectric { field: pad(field) }
    }

    pub fn uniform(a0: f64, a: &[f64]) -> Self {
        Potential::Uniform { a0, a: pad(a) }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Potential::Zero)
    }

    /// True when the potential does not depend on time.
    pub fn is_static(&self) -> bool {
        match self {
            Potential::Zero
            | Potential::Uniform { .. }
            | Potential::ConstantElectric { .. }
            | Potential::ConstantMagnetic { .. } => true,
            Potential::PlaneWave { omega, .. } => *omega == 0.0,
            Potential::GaussianPulse { .. } | Potential::Tabulated(_) => false,
            Potential::Gauged { base, gauge } => {
                base.is_static() && gauge.c_t == 0.0 && gauge.c_tt == 0.0 && gauge.c_tx == [0.0; 3]
            }
            Potential::TimeScaled { base, .. } => base.is_static(),
        }
    }

    /// True when `(A0, A)` does not depend on position, so the interaction
    /// phase commutes with translations.
    pub fn is_translation_invariant(&self) -> bool {
        match self {
            Potential::Zero | Potential::Uniform { .. } => true,
            Potential::PlaneWave { wave_vector, .. } | Potential::GaussianPulse { wave_vector, .. } => {
                *wave_vector == [0.0; 3]
            }
            Potential::Gauged { base, gauge } => {
                base.is_translation_invariant()
                    && gauge.envelope.is_none()
                    && gauge.c_x == [0.0; 3]
                    && gauge.c_tx == [0.0; 3]
            }
            Potential::TimeScaled { base, .. } => base.is_translation_invariant(),
            _ => false,
        }
    }

    pub fn evaluate(&self, t: f64, x: &[f64]) -> Result<FourPotential> {
        match self {
            Potential::Tabulated(table) => table.evaluate(t, x),
            _ => Ok(self.jet(t, x)?.value()),
        }
    }

    pub fn fields(&self, t: f64, x: &[f64]) -> Result<Fields> {
        Ok(self.jet(t, x)?.fields(x.len()))
    }

    pub fn gauge_transform(&self, gauge: GaugeFunction) -> Potential {
        Potential::Gauged {
            base: Box::new(self.clone()),
            gauge,
        }
    }

    pub fn time_scaled(&self, factor: f64) -> Potential {
        Potential::TimeScaled {
            base: Box::new(self.clone()),
            factor,
        }
    }

    fn jet(&self, t: f64, x: &[f64]) -> Result<Jet> {
        let xp = pad(x);
        let mut j = Jet::default();
        match self {
            Potential::Zero => {}
            Potential::Uniform { a0, a } => {
                j.a0 = *a0;
                j.a = *a;
            }
            Potential::ConstantElectric { field } => {
                j.a0 = -dot(field, &xp);
                for i in 0..3 {
                    j.a0_x[i] = -field[i];
                }
            }
            Potential::ConstantMagnetic { field: b } => {
                j.a = [
                    0.5 * (b[1] * xp[2] - b[2] * xp[1]),
                    0.5 * (b[2] * xp[0] - b[0] * xp[2]),
                    0.5 * (b[0] * xp[1] - b[1] * xp[0]),
                ];
                j.a_x = [
                    [0.0, -0.5 * b[2], 0.5 * b[1]],
                    [0.5 * b[2], 0.0, -0.5 * b[0]],
                    [-0.5 * b[1], 0.5 * b[0], 0.0],
                ];
            }
            Potential::PlaneWave {
                amplitude,
                wave_vector: k,
                omega,
                polarization: eps,
                phase,
            } => {
                let ph = dot(k, &xp) - omega * t + phase;
                let (s, c) = ph.sin_cos();
                for i in 0..3 {
                    j.a[i] = amplitude * eps[i] * c;
                    j.a_t[i] = amplitude * eps[i] * omega * s;
                    for l in 0..3 {
                        j.a_x[i][l] = -amplitude * eps[i] * k[l] * s;
                    }
                }
            }
            Potential::GaussianPulse {
                amplitude,
                wave_vector: k,
                omega,
                polarization: eps,
                center_time,
                duration,
            } => {
                let tau = t - center_time;
                let g = (-tau * tau / (2.0 * duration * duration)).exp();
                let g_t = -tau / (duration * duration) * g;
                let ph = dot(k, &xp) - omega * tau;
                let (s, c) = ph.sin_cos();
                for i in 0..3 {
                    j.a[i] = amplitude * eps[i] * c * g;
                    j.a_t[i] = amplitude * eps[i] * (omega * s * g + c * g_t);
                    for l in 0..3 {
                        j.a_x[i][l] = -amplitude * eps[i] * k[l] * s * g;
                    }
                }
            }
            Potential::Tabulated(table) => {
                let h = table.fd_step();
                let v = table.evaluate(t, x)?;
                j.a0 = v.a0;
                j.a = v.a;
                let d = x.len();
                let diff = |tp: f64, xp: &[f64], tm: f64, xm: &[f64], step: f64| -> Result<FourPotential> {
                    let p = table.evaluate(tp, xp)?;
                    let m = table.evaluate(tm, xm)?;
                    let mut out = FourPotential {
                        a0: (p.a0 - m.a0) / step,
                        ..Default::default()
                    };
                    for i in 0..3 {
                        out.a[i] = (p.a[i] - m.a[i]) / step;
                    }
                    Ok(out)
                };
                let dt = diff(t + h, x, t - h, x, 2.0 * h)?;
                j.a_t = dt.a;
                for l in 0..d {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[l] += h;
                    xm[l] -= h;
                    let dl = diff(t, &xp, t, &xm, 2.0 * h)?;
                    j.a0_x[l] = dl.a0;
                    for i in 0..3 {
                        j.a_x[i][l] = dl.a[i];
                    }
                }
            }
            Potential::Gauged { base, gauge } => {
                j = base.jet(t, x)?;
                let g = gauge.jet(t, x);
                let d = x.len();
                j.a0 -= g.chi_t;
                for i in 0..d {
                    j.a0_x[i] -= g.grad_of_t[i];
                    j.a[i] += g.grad[i];
                    j.a_t[i] += g.t_of_grad[i];
                    for l in 0..d {
                        j.a_x[i][l] += g.hessian[i][l];
                    }
                }
            }
            Potential::TimeScaled { base, factor } => {
                j = base.jet(factor * t, x)?;
                for i in 0..3 {
                    j.a_t[i] *= factor;
                }
            }
        }
        // restrict to the active dimensions
        for i in x.len()..3 {
            j.a[i] = 0.0;
            j.a_t[i] = 0.0;
            j.a0_x[i] = 0.0;
        }
        Ok(j)
    }
}

impl Jet {
    fn value(&self) -> FourPotential {
        FourPotential {
            a0: self.a0,
            a: self.a,
        }
    }
}

/// Evaluates `(A0, A)`.
pub fn evaluate(pot: &Potential, t: f64, x: &[f64]) -> Result<FourPotential> {
    pot.evaluate(t, x)
}

/// `E = -grad A0 - dA/dt`, `B = curl A` (zero in 1+1D).
pub fn fields_from_potential(pot: &Potential, t: f64, x: &[f64]) -> Result<Fields> {
    pot.fields(t, x)
}

pub fn gauge_transform(pot: &Potential, chi: GaugeFunction) -> Potential {
    pot.gauge_transform(chi)
}
