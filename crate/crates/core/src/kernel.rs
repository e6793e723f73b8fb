//! Matrix-valued position-space kernels and the `DKF1` binary dump.
//!
//! Column `j` of a kernel is the field evolved from a unit band-limited
//! source in spinor component `j` at the origin. Composition of
//! translation-invariant kernels is a per-mode matrix product.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::linalg::{SpinMatrix, C64};
use crate::spinor::{Grid, Representation, SpinorField};

#[derive(Clone, Debug, PartialEq)]
pub struct KernelField {
    grid: Grid,
    rep: Representation,
    t: f64,
    mass: f64,
    columns: Vec<SpinorField>,
}

impl KernelField {
    pub fn from_columns(
        grid: Grid,
        rep: Representation,
        t: f64,
        mass: f64,
        columns: Vec<SpinorField>,
    ) -> Result<Self> {
        if columns.len() != rep.spinor_dim()
            || columns.iter().any(|c| c.grid() != &grid || c.rep() != &rep)
        {
            return Err(Error::Structural(
                "kernel needs one column per spinor component on the kernel grid".into(),
            ));
        }
        Ok(Self {
            grid,
            rep,
            t,
            mass,
            columns,
        })
    }

    /// Builds the kernel whose physical mode amplitudes are `table[mode]`.
    pub fn from_mode_table(
        grid: Grid,
        rep: Representation,
        t: f64,
        mass: f64,
        table: &[SpinMatrix],
    ) -> Result<Self> {
        let s = rep.spinor_dim();
        if table.len() != grid.cell_count() {
            return Err(Error::Structural("mode table length mismatch".into()));
        }
        let spectral = Spectral::new(grid);
        let mut columns = Vec::with_capacity(s);
        for col in 0..s {
            let mut field = SpinorField::zeros(grid, rep.clone())?;
            for row in 0..s {
                let comp = field.component_mut(row);
                for (mode, z) in comp.iter_mut().enumerate() {
                    *z = table[mode][(row, col)];
                }
                spectral.to_position(comp);
            }
            columns.push(field);
        }
        Self::from_columns(grid, rep, t, mass, columns)
    }

    /// Band-limited delta source at the origin in spinor component `j`.
    pub fn delta_source(grid: Grid, rep: Representation, j: usize) -> Result<SpinorField> {
        let mut field = SpinorField::zeros(grid, rep)?;
        let spectral = Spectral::new(grid);
        let comp = field.component_mut(j);
        comp.fill(C64::new(1.0, 0.0));
        spectral.to_position(comp);
        Ok(field)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rep(&self) -> &Representation {
        &self.rep
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn columns(&self) -> &[SpinorField] {
        &self.columns
    }

    /// Entry `(row, col)` at a cell.
    pub fn entry(&self, cell: usize, row: usize, col: usize) -> C64 {
        self.columns[col].component(row)[cell]
    }

    /// Physical mode amplitudes `K(p)` per mode.
    pub fn mode_table(&self) -> Vec<SpinMatrix> {
        let s = self.rep.spinor_dim();
        let spectral = Spectral::new(self.grid);
        let mut table = vec![SpinMatrix::zeros(s); self.grid.cell_count()];
        for (col, field) in self.columns.iter().enumerate() {
            for row in 0..s {
                let mut comp = field.component(row).to_vec();
                spectral.to_momentum(&mut comp);
                for (mode, z) in comp.into_iter().enumerate() {
                    table[mode][(row, col)] = z;
                }
            }
        }
        table
    }

    /// `self o earlier`: the kernel of applying `earlier` first, then `self`.
    /// Valid for translation-invariant kernels.
    pub fn compose(&self, earlier: &KernelField) -> Result<KernelField> {
        if self.grid != earlier.grid || self.rep != earlier.rep {
            return Err(Error::Structural("kernels live on different grids".into()));
        }
        let a = self.mode_table();
        let b = earlier.mode_table();
        let table: Vec<SpinMatrix> = a.iter().zip(&b).map(|(x, y)| *x * *y).collect();
        KernelField::from_mode_table(
            self.grid,
            self.rep.clone(),
            self.t + earlier.t,
            self.mass,
            &table,
        )
    }

    /// Convolves the kernel with a field.
    pub fn apply(&self, psi: &SpinorField) -> Result<SpinorField> {
        if psi.grid() != &self.grid || psi.rep() != &self.rep {
            return Err(Error::Structural("field and kernel grids differ".into()));
        }
        let table = self.mode_table();
        let spectral = Spectral::new(self.grid);
        let mut out = psi.clone();
        for c in 0..self.rep.spinor_dim() {
            spectral.to_momentum(out.component_mut(c));
        }
        out.apply_pointwise(|mode| table[mode]);
        for c in 0..self.rep.spinor_dim() {
            spectral.to_position(out.component_mut(c));
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.columns
            .iter()
            .flat_map(|c| c.data().iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &KernelField) -> f64 {
        self.columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| a.max_diff(b))
            .fold(0.0, f64::max)
    }

    /// Writes the `DKF1` dump: one ASCII header line
    /// `DKF1 <d> <N> <dx> <t> <m>\n` (reals with 17 significant digits),
    /// followed by `N^d * s * s` complex entries as little-endian `f64`
    /// pairs `(re, im)`, ordered by cell (last axis fastest), then row, then
    /// column.
    pub fn write_dkf<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "DKF1 {} {} {:.16e} {:.16e} {:.16e}",
            self.grid.spatial_dim(),
            self.grid.points_per_axis(),
            self.grid.dx(),
            self.t,
            self.mass
        )?;
        let s = self.rep.spinor_dim();
        let mut buf = Vec::with_capacity(self.grid.cell_count() * s * s * 16);
        for cell in 0..self.grid.cell_count() {
            for row in 0..s {
                for col in 0..s {
                    let z = self.entry(cell, row, col);
                    buf.extend_from_slice(&z.re.to_le_bytes());
                    buf.extend_from_slice(&z.im.to_le_bytes());
                }
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Reads a `DKF1` dump. The representation must be supplied since the
    /// format stores entries only.
    pub fn read_dkf<R: BufRead>(mut r: R, rep: Representation) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != "DKF1" {
            return Err(Error::Parse(format!("bad DKF1 header: {header:?}")));
        }
        let parse_f = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad header number {s:?}: {e}")))
        };
        let parse_u = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad header integer {s:?}: {e}")))
        };
        let d = parse_u(fields[1])?;
        let n = parse_u(fields[2])?;
        let grid = Grid::new(d, n, parse_f(fields[3])?)?;
        let t = parse_f(fields[4])?;
        let mass = parse_f(fields[5])?;
        let s = rep.spinor_dim();
        let mut columns = vec![SpinorField::zeros(grid, rep.clone())?; s];
        let mut bytes = [0u8; 16];
        for cell in 0..grid.cell_count() {
            for row in 0..s {
                for col in columns.iter_mut() {
                    r.read_exact(&mut bytes)?;
                    let re = f64::from_le_bytes(bytes[..8].try_into().unwrap());
                    let im = f64::from_le_bytes(bytes[8..].try_into().unwrap());
                    col.component_mut(row)[cell] = C64::new(re, im);
                }
            }
        }
        Self::from_columns(grid, rep, t, mass, columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free::free_kernel;

    #[test]
    fn dkf_header_and_size() {
        let grid = Grid::new(1, 16, 0.125).unwrap();
        let rep = Representation::dirac(1).unwrap();
        let k = free_kernel(&grid, &rep, 0.5, 1.0).unwrap();
        let mut buf = Vec::new();
        k.write_dkf(&mut buf).unwrap();
        let nl = buf.iter().position(|b| *b == b'\n').unwrap();
        let header = std::str::from_utf8(&buf[..nl]).unwrap();
        assert_eq!(
            header,
            "DKF1 1 16 1.2500000000000000e-1 5.0000000000000000e-1 1.0000000000000000e0"
        );
        assert_eq!(buf.len() - nl - 1, 16 * 2 * 2 * 16);
        // first entry: cell 0, row 0, col 0
        let re = f64::from_le_bytes(buf[nl + 1..nl + 9].try_into().unwrap());
        assert_eq!(re, k.entry(0, 0, 0).re);
        let back = KernelField::read_dkf(&buf[..], rep).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn bad_header_is_parse_error() {
        let rep = Representation::dirac(1).unwrap();
        let r = KernelField::read_dkf(&b"DKF2 1 16 0.1 0 1\n"[..], rep);
        assert!(matches!(r, Err(Error::Parse(_))));
    }
}
