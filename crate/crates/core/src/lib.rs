//! Dirac propagators in external electromagnetic fields built as time-sliced
//! products of exact free kernels and gauge phase factors.
//!
//! Modules, bottom up:
//! - [`spinor`], [`packet`]: Clifford data, grids, spinor fields, packets.
//! - [`free`], [`kernel`]: exact per-mode free evolution and kernels.
//! - [`potential`]: external 4-potentials and gauge transformations.
//! - [`evolution`]: the split-step product formula and its generator checks.
//! - [`oracle`]: dense transfer-matrix products (1+1D reference).
//! - [`fw`]: Foldy-Wouthuysen unitaries and the diagonal kernel.
//! - [`classical`]: units, classical trajectories, actions, the hbar sweep,
//!   Zitterbewegung observables and the eikonal phase check.
//! - [`scenario`], [`report`]: JSON scenarios, runs and deterministic output.

pub mod classical;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod free;
pub mod fw;
pub mod kernel;
pub mod linalg;
pub mod oracle;
pub mod packet;
pub mod potential;
pub mod report;
pub mod scenario;
pub mod spinor;

pub use error::{Error, Result};
pub use linalg::{SpinMatrix, C64};
