//! Gaussian wavepackets, optionally projected onto one energy branch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::free::project_modes;
use crate::linalg::C64;
use crate::spinor::{Grid, Representation, SpinorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnergyBranch {
    #[default]
    None,
    Positive,
    Negative,
}

/// Parameters of a Gaussian packet `exp(-|x-x0|^2 / 4 sigma^2 + i p0.(x-x0))`
/// times a constant spinor; `|psi|^2` has standard deviation `sigma` per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct PacketSpec {
    pub center: Vec<f64>,
    pub momentum: Vec<f64>,
    pub width: f64,
    pub branch: EnergyBranch,
    pub mass: f64,
    /// Constant spinor; defaults to the first basis vector.
    pub spinor: Option<Vec<C64>>,
}

impl PacketSpec {
    pub fn new(spatial_dim: usize, width: f64, mass: f64) -> Self {
        Self {
            center: vec![0.0; spatial_dim],
            momentum: vec![0.0; spatial_dim],
            width,
            branch: EnergyBranch::None,
            mass,
            spinor: None,
        }
    }

    pub fn center(mut self, x0: &[f64]) -> Self {
        self.center = x0.to_vec();
        self
    }

    pub fn momentum(mut self, p0: &[f64]) -> Self {
        self.momentum = p0.to_vec();
        self
    }

    pub fn branch(mut self, branch: EnergyBranch) -> Self {
        self.branch = branch;
        self
    }

    pub fn spinor(mut self, spinor: &[C64]) -> Self {
        self.spinor = Some(spinor.to_vec());
        self
    }
}

/// Builds a normalised Gaussian packet.
pub fn gaussian_packet(grid: &Grid, rep: &Representation, spec: &PacketSpec) -> Result<SpinorField> {
    let d = grid.spatial_dim();
    let s = rep.spinor_dim();
    if spec.center.len() != d || spec.momentum.len() != d {
        return Err(Error::Structural(format!(
            "packet centre and momentum need {d} components"
        )));
    }
    if spec.width < 3.0 * grid.dx() {
        return Err(Error::Resolution(format!(
            "packet width {} below 3 dx = {}",
            spec.width,
            3.0 * grid.dx()
        )));
    }
    let reach = spec.center.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 5.0 * spec.width;
    if reach >= grid.half_extent() {
        return Err(Error::Scenario(format!(
            "packet |x0| + 5 sigma = {reach} does not fit inside L/2 = {}",
            grid.half_extent()
        )));
    }
    let spinor = match &spec.spinor {
        Some(v) if v.len() == s => v.clone(),
        Some(v) => {
            return Err(Error::Structural(format!(
                "packet spinor has {} components, expected {s}",
                v.len()
            )))
        }
        None => {
            let mut v = vec![C64::new(0.0, 0.0); s];
            v[0] = C64::new(1.0, 0.0);
            v
        }
    };
    let mut field = SpinorField::zeros(*grid, rep.clone())?;
    let inv = 1.0 / (4.0 * spec.width * spec.width);
    let n = grid.cell_count();
    for cell in 0..n {
        let x = grid.position(cell);
        let mut r2 = 0.0;
        let mut phase = 0.0;
        for a in 0..d {
            let dx = x[a] - spec.center[a];
            r2 += dx * dx;
            phase += spec.momentum[a] * dx;
        }
        let amp = C64::from_polar((-r2 * inv).exp(), phase);
        for (c, sc) in spinor.iter().enumerate() {
            field.data_mut()[c * n + cell] = amp * sc;
        }
    }
    if field.normalize() == 0.0 {
        return Err(Error::DegenerateProjection(0.0));
    }
    if spec.branch != EnergyBranch::None {
        let spectral = Spectral::new(*grid);
        spectral.forward_field(&mut field);
        project_modes(&mut field, spec.mass, spec.branch == EnergyBranch::Positive)?;
        spectral.inverse_field(&mut field);
        let norm = field.norm();
        if norm < 1e-10 {
            return Err(Error::DegenerateProjection(norm));
        }
        field.normalize();
    }
    Ok(field)
}
