//! Scenario files: JSON schema, validation and the task runners behind the
//! `dirac-kernel` binary.
//!
//! Lengths, times and momenta in a scenario are physical; the solver works
//! with mass `m0 c / hbar`, coupling `e / (c hbar)` and time `c t`. Gauge
//! functions are written in solver variables `(c t, x)`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::classical::{
    classical_action, eikonal_phase_check, hbar_sweep, hyperbolic_motion, integrate_classical,
    local_wavenumber, oscillation_amplitude, sample_free_series, zitterbewegung_observables, ClassicalState,
    SweepScenario, UnitsConfig,
};
use crate::error::{Error, Result};
use crate::evolution::{
    duhamel_residual, evolve, generator_residual, interacting_kernel, loglog_slope, self_convergence_order,
    gauge_covariance_difference, SplitScheme, SplitVariant, Stepper,
};
use crate::free::{free_kernel, free_step, step_unitary};
use crate::fw::{fw_conjugation_check, fw_interacting_compare, FwMode};
use crate::linalg::C64;
use crate::oracle::{build_transfer, oracle_evolve, DENSE_CAP};
use crate::packet::{gaussian_packet, EnergyBranch, PacketSpec};
use crate::potential::{GaugeFunction, Potential, Table};
use crate::report::{Json, Series};
use crate::spinor::{clifford_residual, Grid, Representation, RepresentationKind, SpinorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    FreeKernel,
    Evolve,
    OracleCompare,
    FwCheck,
    Classical,
    Zb,
    SweepHbar,
    GaugeCheck,
    GeneratorCheck,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::FreeKernel => "free-kernel",
            Task::Evolve => "evolve",
            Task::OracleCompare => "oracle-compare",
            Task::FwCheck => "fw-check",
            Task::Classical => "classical",
            Task::Zb => "zb",
            Task::SweepHbar => "sweep-hbar",
            Task::GaugeCheck => "gauge-check",
            Task::GeneratorCheck => "generator-check",
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Zero,
    Uniform {
        #[serde(default)]
        a0: f64,
        #[serde(default)]
        a: Vec<f64>,
    },
    ConstantElectric {
        field: Vec<f64>,
    },
    ConstantMagnetic {
        field: Vec<f64>,
    },
    PlaneWave {
        amplitude: f64,
        wave_vector: Vec<f64>,
        omega: f64,
        polarization: Vec<f64>,
        #[serde(default)]
        phase: f64,
    },
    GaussianPulse {
        amplitude: f64,
        wave_vector: Vec<f64>,
        omega: f64,
        polarization: Vec<f64>,
        center_time: f64,
        duration: f64,
    },
    /// CSV with columns `t, x..., A0, A...`, relative to the scenario file.
    Tabulated {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugeSpec {
    /// `chi = -t E.x` for the scenario's constant electric field.
    ElectricToTemporal,
    /// `chi = (c0 + c_t t + c_x.x + c_tt t^2 + t c_tx.x) G(x)`.
    Polynomial {
        #[serde(default)]
        c0: f64,
        #[serde(default)]
        c_t: f64,
        #[serde(default)]
        c_x: Vec<f64>,
        #[serde(default)]
        c_tt: f64,
        #[serde(default)]
        c_tx: Vec<f64>,
        #[serde(default)]
        envelope_center: Option<Vec<f64>>,
        #[serde(default)]
        envelope_width: Option<f64>,
    },
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PacketFile {
    #[serde(default)]
    pub center: Vec<f64>,
    #[serde(default)]
    pub momentum: Vec<f64>,
    pub width: f64,
    #[serde(default)]
    pub branch: EnergyBranch,
    /// Constant spinor as `[re, im]` pairs.
    #[serde(default)]
    pub spinor: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EikonalFile {
    pub t: f64,
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    /// Smoothing width in cells.
    #[serde(default = "default_smoothing")]
    pub smoothing_cells: f64,
}

fn default_window() -> [f64; 2] {
    [0.1, 0.8]
}

fn default_smoothing() -> f64 {
    3.0
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "Outputs::summary_default")]
    pub summary: String,
    #[serde(default = "Outputs::series_default")]
    pub series: String,
    #[serde(default = "Outputs::kernel_default")]
    pub kernel: String,
    #[serde(default = "Outputs::timing_default")]
    pub timing: String,
}

impl Outputs {
    fn summary_default() -> String {
        "summary.json".into()
    }
    fn series_default() -> String {
        "series.csv".into()
    }
    fn kernel_default() -> String {
        "kernel.dkf".into()
    }
    fn timing_default() -> String {
        "timing.json".into()
    }
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            summary: Self::summary_default(),
            series: Self::series_default(),
            kernel: Self::kernel_default(),
            timing: Self::timing_default(),
        }
    }
}

/// The on-disk schema. Unknown keys are rejected.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub task: Task,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub dx: f64,
    #[serde(default)]
    pub representation: RepresentationKind,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub c: f64,
    pub m0: f64,
    #[serde(default = "one")]
    pub e: f64,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub packet: Option<PacketFile>,
    #[serde(default)]
    pub t0: f64,
    /// End time; `t` is accepted as a synonym.
    #[serde(default, alias = "t")]
    pub t1: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub scheme: SplitVariant,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub sample_every: Option<usize>,
    /// `evolve`: also measure Lie and Strang orders at `dt, dt/2, dt/4`.
    #[serde(default)]
    pub convergence: bool,
    #[serde(default)]
    pub dt_ladder: Option<Vec<f64>>,
    #[serde(default)]
    pub duhamel_dts: Option<Vec<f64>>,
    #[serde(default)]
    pub hbar_list: Option<Vec<f64>>,
    #[serde(default)]
    pub gauge: Option<GaugeSpec>,
    #[serde(default)]
    pub eikonal: Option<EikonalFile>,
    #[serde(default)]
    pub samples: Option<usize>,
    /// `classical`: coarsest step count of the self-convergence ladder.
    #[serde(default)]
    pub order_steps: Option<usize>,
    /// Half-width of the causality test bump.
    #[serde(default)]
    pub source_width: Option<f64>,
    /// Overrides of the built-in acceptance bounds, by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub grid: Grid,
    pub rep: Representation,
    pub units: UnitsConfig,
    pub potential: Potential,
    /// Directory the scenario was loaded from; relative paths resolve here.
    pub base_dir: PathBuf,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn pad3(v: &[f64], what: &str, d: usize) -> Result<[f64; 3]> {
    if v.len() > 3 || (v.len() != d && v.len() != 3) {
        return Err(invalid(format!("{what} needs {d} components, got {}", v.len())));
    }
    let mut out = [0.0; 3];
    out[..v.len()].copy_from_slice(v);
    Ok(out)
}

fn build_potential(spec: &PotentialSpec, d: usize, base: &Path) -> Result<Potential> {
    Ok(match spec {
        PotentialSpec::Zero => Potential::Zero,
        PotentialSpec::Uniform { a0, a } => {
            let a = if a.is_empty() { [0.0; 3] } else { pad3(a, "uniform A", d)? };
            Potential::Uniform { a0: *a0, a }
        }
        PotentialSpec::ConstantElectric { field } => Potential::ConstantElectric {
            field: pad3(field, "electric field", d)?,
        },
        PotentialSpec::ConstantMagnetic { field } => {
            if d != 3 {
                return Err(invalid("constant_magnetic needs d = 3"));
            }
            Potential::ConstantMagnetic {
                field: pad3(field, "magnetic field", d)?,
            }
        }
        PotentialSpec::PlaneWave {
            amplitude,
            wave_vector,
            omega,
            polarization,
            phase,
        } => Potential::PlaneWave {
            amplitude: *amplitude,
            wave_vector: pad3(wave_vector, "wave_vector", d)?,
            omega: *omega,
            polarization: pad3(polarization, "polarization", d)?,
            phase: *phase,
        },
        PotentialSpec::GaussianPulse {
            amplitude,
            wave_vector,
            omega,
            polarization,
            center_time,
            duration,
        } => {
            if !(*duration > 0.0) {
                return Err(invalid("gaussian_pulse duration must be > 0"));
            }
            Potential::GaussianPulse {
                amplitude: *amplitude,
                wave_vector: pad3(wave_vector, "wave_vector", d)?,
                omega: *omega,
                polarization: pad3(polarization, "polarization", d)?,
                center_time: *center_time,
                duration: *duration,
            }
        }
        PotentialSpec::Tabulated { path } => {
            let full = base.join(path);
            Potential::Tabulated(Box::new(Table::from_csv(&full, d)?))
        }
    })
}

fn gauge_function(s: &Scenario) -> Result<GaugeFunction> {
    let d = s.grid.spatial_dim();
    match &s.file.gauge {
        None | Some(GaugeSpec::ElectricToTemporal) => match &s.potential {
            Potential::ConstantElectric { field } => Ok(GaugeFunction::electric_to_temporal(field)),
            _ => Err(invalid("electric_to_temporal gauge needs a constant_electric potential")),
        },
        Some(GaugeSpec::Polynomial {
            c0,
            c_t,
            c_x,
            c_tt,
            c_tx,
            envelope_center,
            envelope_width,
        }) => {
            let zero_or = |v: &Vec<f64>, what: &str| if v.is_empty() { Ok([0.0; 3]) } else { pad3(v, what, d) };
            let envelope = match (envelope_center, envelope_width) {
                (None, None) => None,
                (c, Some(w)) if *w > 0.0 => Some((zero_or(&c.clone().unwrap_or_default(), "envelope_center")?, *w)),
                _ => return Err(invalid("gauge envelope needs envelope_width > 0")),
            };
            Ok(GaugeFunction {
                c0: *c0,
                c_t: *c_t,
                c_x: zero_or(c_x, "c_x")?,
                c_tt: *c_tt,
                c_tx: zero_or(c_tx, "c_tx")?,
                envelope,
            })
        }
    }
}

/// Parses and validates scenario text; `base_dir` resolves relative paths.
pub fn parse_scenario(text: &str, base_dir: &Path) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    validate(file, base_dir)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_scenario(&text, &base).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn require<T: Copy>(v: Option<T>, what: &str, task: Task) -> Result<T> {
    v.ok_or_else(|| invalid(format!("task {} needs `{what}`", task.name())))
}

fn validate(file: ScenarioFile, base_dir: &Path) -> Result<Scenario> {
    let grid = Grid::new(file.d, file.n, file.dx).map_err(|e| invalid(strip_kind(e)))?;
    let rep = Representation::new(file.d, file.representation).map_err(|e| invalid(strip_kind(e)))?;
    let units = UnitsConfig {
        hbar: file.hbar,
        c: file.c,
        m0: file.m0,
        e: file.e,
    };
    units.validate()?;
    let potential = build_potential(&file.potential, file.d, base_dir)?;
    let task = file.task;
    let s = Scenario {
        grid,
        rep,
        units,
        potential,
        base_dir: base_dir.to_path_buf(),
        file,
    };
    let f = &s.file;
    let needs_packet = !matches!(task, Task::FreeKernel | Task::FwCheck);
    if needs_packet && f.packet.is_none() {
        return Err(invalid(format!("task {} needs a `packet`", task.name())));
    }
    let needs_span = !matches!(task, Task::GeneratorCheck);
    let t1 = f.t1.unwrap_or(f.t0);
    if needs_span {
        let t1 = require(f.t1, "t1", task)?;
        if !(t1 > f.t0) && !(task == Task::FreeKernel && t1 == f.t0) {
            return Err(invalid(format!("t1 = {t1} must exceed t0 = {}", f.t0)));
        }
    }
    let needs_dt = match task {
        Task::FreeKernel => !s.potential.is_zero() && s.potential.is_translation_invariant(),
        Task::FwCheck => f.packet.is_some() && !s.potential.is_zero(),
        Task::GeneratorCheck => false,
        _ => true,
    };
    if needs_dt {
        let dt = require(f.dt, "dt", task)?;
        if !(dt > 0.0) {
            return Err(invalid(format!("dt = {dt} must be > 0")));
        }
        if task != Task::Zb {
            SplitScheme::lie(dt).slices(t1 - f.t0).map_err(|e| invalid(strip_kind(e)))?;
        }
    }
    if let Some(p) = &f.packet {
        let d = s.grid.spatial_dim();
        for (v, what) in [(&p.center, "packet center"), (&p.momentum, "packet momentum")] {
            if !v.is_empty() && v.len() != d {
                return Err(invalid(format!("{what} needs {d} components")));
            }
        }
        let width_now = p.width;
        if !matches!(task, Task::Classical | Task::SweepHbar) && width_now < 3.0 * s.grid.dx() {
            return Err(invalid(format!(
                "packet width {} below the resolution bound 3 dx = {}",
                width_now,
                3.0 * s.grid.dx()
            )));
        }
        let reach = p.center.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 5.0 * p.width;
        let span = match task {
            Task::Classical | Task::Zb => 0.0,
            Task::GeneratorCheck => 0.0,
            _ => s.units.solver_time(t1 - f.t0),
        };
        if task != Task::Classical && reach + span >= s.grid.half_extent() {
            return Err(invalid(format!(
                "wraparound budget violated: |x0| + 5 sigma + c (t1 - t0) = {} >= L/2 = {}",
                reach + span,
                s.grid.half_extent()
            )));
        }
    }
    match task {
        Task::OracleCompare => {
            let dim = s.grid.cell_count() * s.rep.spinor_dim();
            if s.grid.spatial_dim() != 1 || dim > DENSE_CAP {
                return Err(invalid(format!(
                    "oracle-compare needs d = 1 and N * spinor_dim <= {DENSE_CAP}, got {dim}"
                )));
            }
        }
        Task::SweepHbar => {
            let list = f.hbar_list.clone().unwrap_or_else(default_hbar_list);
            if list.is_empty() || list.windows(2).any(|w| !(w[1] < w[0])) || list.iter().any(|h| !(*h > 0.0)) {
                return Err(invalid("hbar_list must be positive and strictly decreasing"));
            }
            if s.grid.spatial_dim() != 1 {
                return Err(invalid("sweep-hbar compares centroids along axis 1 and needs d = 1"));
            }
        }
        Task::GaugeCheck => {
            gauge_function(&s)?;
        }
        Task::FreeKernel if s.grid.spatial_dim() == 1 => {
            let w = f.source_width.unwrap_or(0.5);
            let tau = s.units.solver_time(t1 - f.t0);
            if w + tau + 4.0 * s.grid.dx() >= s.grid.half_extent() {
                return Err(invalid(format!(
                    "wraparound budget violated: source width + c t + 4 dx = {} >= L/2 = {}",
                    w + tau + 4.0 * s.grid.dx(),
                    s.grid.half_extent()
                )));
            }
        }
        Task::Zb if f.samples.unwrap_or(1024) < 16 => {
            return Err(invalid("zb needs at least 16 samples"));
        }
        _ => {}
    }
    if let Some(ladder) = &f.dt_ladder {
        if ladder.len() < 2 || ladder.windows(2).any(|w| !(w[1] < w[0])) || ladder.iter().any(|v| !(*v > 0.0)) {
            return Err(invalid("dt_ladder must be positive, strictly decreasing, with >= 2 entries"));
        }
    }
    Ok(s)
}

fn strip_kind(e: Error) -> String {
    match e {
        Error::Structural(m)
        | Error::Resolution(m)
        | Error::Domain(m)
        | Error::Scenario(m)
        | Error::Configuration(m)
        | Error::Validation(m) => m,
        other => other.to_string(),
    }
}

fn default_hbar_list() -> Vec<f64> {
    vec![1.0, 0.5, 0.25, 0.125]
}

/// One acceptance check in a summary.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Below(f64),
    AtLeast(f64),
    Within(f64, f64),
}

impl Check {
    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::Below(b) => self.value < b,
            Bound::AtLeast(b) => self.value >= b,
            Bound::Within(lo, hi) => self.value >= lo && self.value <= hi,
        }
    }

    fn to_json(&self) -> Json {
        let mut j = Json::object();
        j.set("name", self.name.as_str());
        j.set("value", self.value);
        match self.bound {
            Bound::Below(b) => {
                j.set("relation", "<");
                j.set("bound", b);
            }
            Bound::AtLeast(b) => {
                j.set("relation", ">=");
                j.set("bound", b);
            }
            Bound::Within(lo, hi) => {
                j.set("relation", "within");
                j.set("bound", vec![lo, hi]);
            }
        }
        j.set("pass", self.passed());
        j
    }
}

/// Result of a run, already written to disk.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub summary: Json,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Ctx<'a> {
    s: &'a Scenario,
    results: Json,
    checks: Vec<Check>,
    series: Option<Series>,
    extra: Vec<(String, Series)>,
    kernel: Option<crate::kernel::KernelField>,
}

impl Ctx<'_> {
    fn check(&mut self, name: &str, value: f64, bound: Bound) {
        let bound = match (self.s.file.tolerances.get(name), bound) {
            (Some(b), Bound::Below(_)) => Bound::Below(*b),
            (Some(b), Bound::AtLeast(_)) => Bound::AtLeast(*b),
            (_, b) => b,
        };
        self.checks.push(Check {
            name: name.into(),
            value,
            bound,
        });
    }

    fn set(&mut self, key: &str, value: impl Into<Json>) {
        self.results.set(key, value);
    }

    fn m(&self) -> f64 {
        self.s.units.solver_mass()
    }

    fn e(&self) -> f64 {
        self.s.units.solver_coupling()
    }

    fn solver_potential(&self) -> Potential {
        if self.s.units.c == 1.0 {
            self.s.potential.clone()
        } else {
            self.s.potential.time_scaled(1.0 / self.s.units.c)
        }
    }

    fn tau(&self, t: f64) -> f64 {
        self.s.units.solver_time(t)
    }

    fn span(&self) -> (f64, f64) {
        (self.tau(self.s.file.t0), self.tau(self.s.file.t1.unwrap_or(self.s.file.t0)))
    }

    fn scheme(&self, variant: SplitVariant) -> SplitScheme {
        SplitScheme {
            variant,
            dt: self.tau(self.s.file.dt.unwrap_or(0.0)),
        }
    }

    fn packet(&self, branch: Option<EnergyBranch>) -> Result<SpinorField> {
        let p = self.s.file.packet.as_ref().ok_or_else(|| invalid("missing packet"))?;
        let d = self.s.grid.spatial_dim();
        let center = if p.center.is_empty() { vec![0.0; d] } else { p.center.clone() };
        let momentum: Vec<f64> = if p.momentum.is_empty() {
            vec![0.0; d]
        } else {
            p.momentum.iter().map(|v| self.s.units.solver_momentum(*v)).collect()
        };
        let mut spec = PacketSpec::new(d, p.width, self.m())
            .center(&center)
            .momentum(&momentum)
            .branch(branch.unwrap_or(p.branch));
        if let Some(sp) = &p.spinor {
            let v: Vec<C64> = sp.iter().map(|[re, im]| C64::new(*re, *im)).collect();
            spec = spec.spinor(&v);
        }
        gaussian_packet(&self.s.grid, &self.s.rep, &spec)
    }
}

/// Runs a validated scenario and writes its artifacts into `out_dir`.
pub fn run(s: &Scenario, out_dir: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    let mut ctx = Ctx {
        s,
        results: Json::object(),
        checks: Vec::new(),
        series: None,
        extra: Vec::new(),
        kernel: None,
    };
    let task = s.file.task;
    let outcome = match task {
        Task::FreeKernel => run_free_kernel(&mut ctx),
        Task::Evolve => run_evolve(&mut ctx),
        Task::OracleCompare => run_oracle(&mut ctx),
        Task::FwCheck => run_fw(&mut ctx),
        Task::Classical => run_classical(&mut ctx),
        Task::Zb => run_zb(&mut ctx),
        Task::SweepHbar => run_sweep(&mut ctx),
        Task::GaugeCheck => run_gauge(&mut ctx),
        Task::GeneratorCheck => run_generator(&mut ctx),
    };
    outcome.map_err(|e| with_context(e, task))?;
    let wall = start.elapsed().as_secs_f64();

    let mut summary = Json::object();
    summary.set("task", task.name());
    let mut sc = Json::object();
    sc.set("d", s.grid.spatial_dim());
    sc.set("N", s.grid.points_per_axis());
    sc.set("dx", s.grid.dx());
    sc.set("hbar", s.units.hbar);
    sc.set("c", s.units.c);
    sc.set("m0", s.units.m0);
    sc.set("e", s.units.e);
    sc.set("solver_mass", s.units.solver_mass());
    sc.set("solver_coupling", s.units.solver_coupling());
    sc.set(
        "scheme",
        match s.file.scheme {
            SplitVariant::Lie => "lie",
            SplitVariant::Strang => "strang",
        },
    );
    sc.set("seed", s.file.seed as usize);
    summary.set("scenario", sc);
    summary.set("results", ctx.results.clone());
    summary.set("checks", Json::Array(ctx.checks.iter().map(Check::to_json).collect()));
    summary.set("passed", ctx.checks.iter().all(Check::passed));

    let mut files = Vec::new();
    let summary_path = out_dir.join(&s.file.outputs.summary);
    summary.write(&summary_path)?;
    files.push(summary_path);
    if let Some(series) = &ctx.series {
        let p = out_dir.join(&s.file.outputs.series);
        series.write(&p)?;
        files.push(p);
    }
    for (name, series) in &ctx.extra {
        let p = out_dir.join(name);
        series.write(&p)?;
        files.push(p);
    }
    if let Some(k) = &ctx.kernel {
        let p = out_dir.join(&s.file.outputs.kernel);
        let f = std::io::BufWriter::new(std::fs::File::create(&p)?);
        k.write_dkf(f)?;
        files.push(p);
    }
    let mut timing = Json::object();
    timing.set("wall_time_s", wall);
    timing.write(&out_dir.join(&s.file.outputs.timing))?;
    Ok(RunOutcome {
        summary,
        checks: ctx.checks,
        files,
    })
}

fn with_context(e: Error, task: Task) -> Error {
    let ctx = |m: String| format!("task {}: {m}", task.name());
    match e {
        Error::Structural(m) => Error::Structural(ctx(m)),
        Error::Resolution(m) => Error::Resolution(ctx(m)),
        Error::Domain(m) => Error::Domain(ctx(m)),
        Error::Scenario(m) => Error::Scenario(ctx(m)),
        Error::Configuration(m) => Error::Configuration(ctx(m)),
        Error::Feasibility(m) => Error::Feasibility(ctx(m)),
        Error::Sampling(m) => Error::Sampling(ctx(m)),
        Error::Validation(m) => Error::Validation(ctx(m)),
        other => other,
    }
}

/// `exp(-1/(1 - (x/w)^2))` inside `|x| < w`, zero outside; normalised.
pub fn bump_source(grid: &Grid, rep: &Representation, width: f64) -> Result<SpinorField> {
    let mut psi = SpinorField::zeros(*grid, rep.clone())?;
    for cell in 0..grid.cell_count() {
        let x = grid.position(cell)[0] / width;
        if x.abs() < 1.0 {
            psi.data_mut()[cell] = C64::new((-1.0 / (1.0 - x * x)).exp(), 0.0);
        }
    }
    if psi.normalize() == 0.0 {
        return Err(Error::Resolution(format!("bump width {width} narrower than one cell")));
    }
    Ok(psi)
}

/// Probability outside `|x| <= radius` (axis 1).
pub fn mass_outside(psi: &SpinorField, radius: f64) -> f64 {
    let grid = psi.grid();
    let rho = psi.density();
    rho.iter()
        .enumerate()
        .filter(|(cell, _)| grid.position(*cell)[0].abs() > radius)
        .map(|(_, r)| r * grid.cell_volume())
        .sum()
}

fn run_free_kernel(ctx: &mut Ctx) -> Result<()> {
    let s = ctx.s;
    let (t0, t1) = ctx.span();
    let tau = t1 - t0;
    let m = ctx.m();
    let d = s.grid.spatial_dim();
    let clifford = [RepresentationKind::Dirac, RepresentationKind::Chiral, RepresentationKind::Swapped]
        .into_iter()
        .filter_map(|k| Representation::new(d, k).ok())
        .map(|r| clifford_residual(&r))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    ctx.set("clifford_residual", clifford);
    ctx.check("clifford_residual", clifford, Bound::Below(1e-13));

    let kernel = free_kernel(&s.grid, &s.rep, tau, m)?;
    ctx.set("kernel_max_abs", kernel.max_abs());
    if tau > 0.0 {
        let half = free_kernel(&s.grid, &s.rep, 0.5 * tau, m)?;
        let composed = half.compose(&half)?;
        let r = composed.max_diff(&kernel) / kernel.max_abs();
        ctx.set("kernel_composition_residual", r);
        ctx.check("kernel_composition_residual", r, Bound::Below(1e-10));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(s.file.seed);
    let mut semigroup = 0.0f64;
    for _ in 0..64 {
        let mode = rng.gen_range(0..s.grid.cell_count());
        let p = &s.grid.momentum(mode)[..d];
        let a = rng.gen_range(0.0..1.0) * tau.max(1.0);
        let b = rng.gen_range(0.0..1.0) * tau.max(1.0);
        let lhs = step_unitary(&s.rep, p, m, a + b)?;
        let rhs = step_unitary(&s.rep, p, m, a)? * step_unitary(&s.rep, p, m, b)?;
        semigroup = semigroup.max(lhs.max_diff(&rhs));
    }
    ctx.set("mode_semigroup_residual", semigroup);
    ctx.check("mode_semigroup_residual", semigroup, Bound::Below(1e-12));

    let pot = ctx.solver_potential();
    if !pot.is_zero() && pot.is_translation_invariant() && tau > 0.0 {
        let scheme = ctx.scheme(s.file.scheme);
        let mid = t0 + 0.5 * tau;
        let (e, m) = (ctx.e(), ctx.m());
        let early = interacting_kernel(&s.grid, &s.rep, &pot, t0, mid, scheme, m, e)?;
        let late = interacting_kernel(&s.grid, &s.rep, &pot, mid, t1, scheme, m, e)?;
        let whole = interacting_kernel(&s.grid, &s.rep, &pot, t0, t1, scheme, m, e)?;
        let r = late.compose(&early)?.max_diff(&whole) / whole.max_abs();
        ctx.set("interacting_composition_residual", r);
        ctx.check("interacting_composition_residual", r, Bound::Below(1e-12));
    }

    if d == 1 && tau > 0.0 {
        let w = s.file.source_width.unwrap_or(0.5);
        let src = bump_source(&s.grid, &s.rep, w)?;
        let out = free_step(&src, tau, m)?;
        let radius = w + tau + 4.0 * s.grid.dx();
        let leak = mass_outside(&out, radius);
        ctx.set("cone_radius", radius);
        ctx.set("light_cone_leakage", leak);
        ctx.check("light_cone_leakage", leak, Bound::Below(1e-6));
    }

    let sdim = s.rep.spinor_dim();
    let mut header = vec!["x".to_string()];
    for r in 0..sdim {
        for c in 0..sdim {
            header.push(format!("re_k{r}{c}"));
            header.push(format!("im_k{r}{c}"));
        }
    }
    let mut series = Series::new(&header);
    let n = s.grid.points_per_axis();
    let stride = n.pow(d as u32 - 1);
    let offset: usize = (1..d).map(|a| (n / 2) * n.pow((d - 1 - a) as u32)).sum();
    for j in 0..n {
        let cell = j * stride + offset;
        let mut row = vec![s.grid.coord(j)];
        for r in 0..sdim {
            for c in 0..sdim {
                let z = kernel.entry(cell, r, c);
                row.push(z.re);
                row.push(z.im);
            }
        }
        series.push(row);
    }
    ctx.series = Some(series);
    ctx.kernel = Some(kernel);
    Ok(())
}

fn run_evolve(ctx: &mut Ctx) -> Result<()> {
    let s = ctx.s;
    let d = s.grid.spatial_dim();
    let (t0, t1) = ctx.span();
    let pot = ctx.solver_potential();
    let scheme = ctx.scheme(s.file.scheme);
    let steps = scheme.slices(t1 - t0)?;
    let psi0 = ctx.packet(None)?;
    crate::evolution::check_wraparound(&psi0, t1 - t0)?;
    let (m, e) = (ctx.m(), ctx.e());
    let mut stepper = Stepper::new(s.grid, s.rep.clone(), &pot, scheme, m, e)?;
    let mut header = vec!["t".to_string(), "norm".to_string()];
    for a in 0..d {
        header.push(format!("x{}", a + 1));
    }
    header.push("re_alpha1".into());
    header.push("im_alpha1".into());
    let mut series = Series::new(&header);
    let alpha1 = s.rep.alpha()[0];
    let c = s.units.c;
    let record = |series: &mut Series, t: f64, psi: &SpinorField| {
        let mut row = vec![t / c, psi.norm()];
        for a in 0..d {
            row.push(psi.mean_position(a));
        }
        let al = psi.expectation(&alpha1);
        row.push(al.re);
        row.push(al.im);
        series.push(row);
    };
    record(&mut series, t0, &psi0);
    let stride = s.file.sample_every.unwrap_or(1).max(1);
    let n0 = psi0.norm();
    let mut prev = n0;
    let mut max_step = 0.0f64;
    let mut psi = psi0.clone();
    stepper.run(&mut psi, t0, steps, |k, t, st| {
        let nk = st.norm();
        max_step = max_step.max((nk - prev).abs());
        prev = nk;
        if k % stride == 0 || k == steps {
            record(&mut series, t, st);
        }
    })?;
    let drift = (psi.norm() - n0).abs();
    ctx.set("steps", steps);
    ctx.set("norm_drift", drift);
    ctx.set("max_step_norm_drift", max_step);
    ctx.set("final_centroid", (0..d).map(|a| psi.mean_position(a)).collect::<Vec<_>>());
    ctx.check("norm_drift", drift, Bound::Below(1e-10));
    ctx.check("max_step_norm_drift", max_step, Bound::Below(1e-13));

    if s.file.convergence {
        for (variant, name, lo, hi) in [
            (SplitVariant::Lie, "lie_order", 0.9, 1.1),
            (SplitVariant::Strang, "strang_order", 1.9, 2.1),
        ] {
            let base = ctx.scheme(variant);
            let run = |dt: f64| -> Result<SpinorField> {
                Ok(evolve(&psi0, &pot, t0, t1, SplitScheme { variant, dt }, m, e)?.final_state)
            };
            let (a, b, cc) = (run(base.dt)?, run(0.5 * base.dt)?, run(0.25 * base.dt)?);
            let order = self_convergence_order(&a, &b, &cc);
            ctx.set(name, order);
            ctx.check(name, order, Bound::Within(lo, hi));
        }
    }
    ctx.series = Some(series);
    Ok(())
}

fn run_oracle(ctx: &mut Ctx) -> Result<()> {
    let s = ctx.s;
    let (t0, t1) = ctx.span();
    // the oracle starts its clock at zero
    if t0 != 0.0 {
        return Err(invalid("oracle-compare needs t0 = 0"));
    }
    let shifted = ctx.solver_potential();
    let dt = ctx.tau(s.file.dt.unwrap_or(0.0));
    let (m, e) = (ctx.m(), ctx.e());
    let psi0 = ctx.packet(None)?;
    let split = evolve(&psi0, &shifted, 0.0, t1, SplitScheme::lie(dt), m, e)?.final_state;
    let dense = oracle_evolve(&psi0, &shifted, t1, dt, m, e)?;
    let rel = dense.relative_l2_diff(&split);
    let transfer = build_transfer(&s.grid, &s.rep, m, dt)?;
    let unit = transfer.unitarity_residual();
    ctx.set("slices", SplitScheme::lie(dt).slices(t1)?);
    ctx.set("rel_diff", rel);
    ctx.set("transfer_unitarity_residual", unit);
    ctx.check("rel_diff", rel, Bound::Below(1e-9));
    ctx.check("transfer_unitarity_residual", unit, Bound::Below(1e-12));
    let mut series = Series::new(&["x", "density_split", "density_oracle"]);
    let (a, b) = (split.density(), dense.density());
    for j in 0..s.grid.points_per_axis() {
        series.push(vec![s.grid.coord(j), a[j], b[j]]);
    }
    ctx.series = Some(series);
    Ok(())
}

fn run_fw(ctx: &mut Ctx) -> Result<()> {
    let s = ctx.s;
    let d = s.grid.spatial_dim();
    let m = ctx.m();
    let (t0, t1) = ctx.span();
    let mut unitarity = 0.0f64;
    let mut diag = 0.0f64;
    for mode in 0..s.grid.cell_count() {
        let p = &s.grid.momentum(mode)[..d];
        if m == 0.0 && p.iter().all(|v| *v == 0.0) {
            continue;
        }
        let fm = FwMode::new(&s.rep, p, m)?;
        unitarity = unitarity.max(fm.t.unitarity_residual());
        diag = diag.max(fm.diagonalization_residual(&s.rep));
    }
    ctx.set("fw_unitarity_residual", unitarity);
    ctx.set("fw_diagonalization_residual", diag);
    ctx.check("fw_unitarity_residual", unitarity, Bound::Below(1e-13));
    ctx.check("fw_diagonalization_residual", diag, Bound::Below(1e-12));
    let conj = fw_conjugation_check(&s.grid, &s.rep, (t1 - t0).max(0.0), m)?;
    ctx.set("fw_conjugation_residual", conj);
    ctx.check("fw_conjugation_residual", conj, Bound::Below(1e-12));

    let pot = ctx.solver_potential();
    if s.file.packet.is_some() && !pot.is_zero() {
        let psi0 = ctx.packet(None)?;
        crate::evolution::check_wraparound(&psi0, t1 - t0)?;
        let base = ctx.scheme(s.file.scheme);
        let ladder: Vec<f64> = match &s.file.dt_ladder {
            Some(l) => l.iter().map(|v| ctx.tau(*v)).collect(),
            None => vec![base.dt, 0.5 * base.dt, 0.25 * base.dt],
        };
        let mut diffs = Vec::new();
        let mut series = Series::new(&["dt", "fw_direct_difference"]);
        for &dt in &ladder {
            let scheme = SplitScheme {
                variant: s.file.scheme,
                dt,
            };
            let r = fw_interacting_compare(&psi0, &pot, t0, t1, scheme, m, ctx.e())?;
            series.push(vec![dt / s.units.c, r]);
            diffs.push(r);
        }
        let slope = loglog_slope(&ladder, &diffs);
        ctx.set("fw_direct_differences", diffs);
        ctx.set("fw_direct_slope", slope);
        ctx.check("fw_direct_slope", slope, Bound::AtLeast(0.9));
        ctx.series = Some(series);
    }

    if let Some(eik) = &s.file.eikonal {
        let smoothing = eik.smoothing_cells * s.grid.dx();
        let window = (eik.window[0], eik.window[1]);
        let report = eikonal_phase_check(&s.grid, eik.t, &s.units, window, smoothing)?;
        let center = local_wavenumber(&s.grid, eik.t, &s.units, 0.0, smoothing)?.abs();
        let r_probe = 0.5 * eik.t * s.units.c;
        let k1 = local_wavenumber(&s.grid, eik.t, &s.units, r_probe, smoothing)?;
        let k2 = local_wavenumber(&s.grid, eik.t, &s.units.with_hbar(0.5 * s.units.hbar), r_probe, smoothing)?;
        let scale = m / s.units.c;
        ctx.set("eikonal_max_relative_deviation", report.max_relative_deviation);
        ctx.set("eikonal_samples", report.radii.len());
        ctx.set("eikonal_center_wavenumber", center);
        ctx.set("eikonal_hbar_halving_ratio", k2 / k1);
        ctx.check("eikonal_max_relative_deviation", report.max_relative_deviation, Bound::Below(0.05));
        ctx.check("eikonal_center_wavenumber", center / scale, Bound::Below(0.05));
        ctx.check("eikonal_hbar_halving_ratio", k2 / k1, Bound::Within(1.9, 2.1));
        let mut series = Series::new(&["x", "k_measured", "k_predicted"]);
        for i in 0..report.radii.len() {
            series.push(vec![report.radii[i], report.measured[i], report.predicted[i]]);
        }
        ctx.extra.push(("eikonal.csv".into(), series));
    }
    Ok(())
}

fn run_classical(ctx: &mut Ctx) -> Result<()> {
    let s = ctx.s;
    let f = &s.file;
    let d = s.grid.spatial_dim();
    let p = f.packet.as_ref().ok_or_else(|| invalid("missing packet"))?;
    let x0 = if p.center.is_empty() { vec![0.0; d] } else { p.center.clone() };
    let p0 = if p.momentum.is_empty() { vec![0.0; d] } else { p.momentum.clone() };
    let t1 = f.t1.unwrap_or(f.t0);
    let dt = f.dt.unwrap_or(0.0);
    let state0 = ClassicalState::new(f.t0, &x0, &p0);
    let box_half = Some(s.grid.half_extent());
    let traj = integrate_classical(&state0, &s.potential, t1, dt, &s.units, box_half)?;
    let last = traj.last().clone();
    ctx.set("steps", traj.states.len() - 1);
    ctx.set("final_position", last.x.clone());
    ctx.set("final_momentum", last.p.clone());
    match classical_action(&traj, &s.potential, &s.units) {
        Ok(a) => ctx.set("action", a),
        Err(Error::Domain(_)) => ctx.set("action", Json::Null),
        Err(e) => return Err(e),
    }

    let span = t1 - f.t0;
    let n0 = f.order_steps.unwrap_or(8).max(1);
    let ladder = [n0, 2 * n0, 4 * n0]
        .iter()
        .map(|k| integrate_classical(&state0, &s.potential, t1, span / *k as f64, &s.units, box_half))
        .collect::<Result<Vec<_>>>()?;
    // max position gap over the coarse time grid
    let gap = |coarse: &crate::classical::Trajectory, fine: &crate::classical::Trajectory| {
        coarse
            .states
            .iter()
            .enumerate()
            .map(|(k, st)| {
                let other = &fine.states[2 * k];
                st.x.iter().zip(&other.x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    };
    let order = (gap(&ladder[0], &ladder[1]) / gap(&ladder[1], &ladder[2])).log2();
    ctx.set("rk4_order", order);
    ctx.check("rk4_order", order, Bound::Within(3.8, 4.2));

    if let Potential::ConstantElectric { field } = &s.potential {
        if d == 1 && p0[0] == 0.0 && x0[0] == 0.0 && f.t0 == 0.0 {
            let exact = hyperbolic_motion(t1, s.units.e * field[0], &s.units);
            let err = (last.x[0] - exact).abs();
            ctx.set("hyperbolic_exact", exact);
            ctx.set("hyperbolic_error", err);
            ctx.check("hyperbolic_error", err, Bound::Below(1e-8));
        }
    }
    if let Potential::ConstantMagnetic { field } = &s.potential {
        let pmag = |p: &[f64]| p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let p_ref = pmag(&p0);
        let dev = traj.states.iter().map(|st| (pmag(&st.p) - p_ref).abs()).fold(0.0, f64::max);
        let b = pmag(field);
        let u = &s.units;
        let gamma = (1.0 + (p_ref / (u.m0 * u.c)).powi(2)).sqrt();
        let period = 2.0 * std::f64::consts::PI * gamma * u.m0 * u.c / (u.e.abs() * b);
        let per_period = dev / (span / period).max(1.0);
        ctx.set("gyro_period", period);
        ctx.set("momentum_drift_per_period", per_period);
        ctx.check("momentum_drift_per_period", per_period, Bound::Below(1e-10));
    }

    let mut header = vec!["t".to_string()];
    for a in 0..d {
        header.push(format!("x{}", a + 1));
    }
    for a in 0..d {
        header.push(format!("p{}", a + 1));
    }
    let mut series = Series::new(&header);
    let stride = f.sample_every.unwrap_or(1).max(1);
    for (k, st) in traj.states.iter().enumerate() {
        if k % stride == 0 || k + 1 == traj.states.len() {
            let mut row = vec![st.t];
            row.extend_from_slice(&st.x);
            row.extend_from_slice(&st.p);
            series.push(row);
        }
    }
    ctx.series = Some(series);
    Ok(())
}

fn run_zb(ctx: &mut Ctx) -> Result<()> {
    let s = ctx.s;
    let m = ctx.m();
    let c = s.units.c;
    let samples = s.file.samples.unwrap_or(1024);
    let dt = ctx.tau(s.file.dt.unwrap_or(0.0));
    let mixed0 = ctx.packet(Some(EnergyBranch::None))?;
    let projected0 = ctx.packet(Some(EnergyBranch::Positive))?;
    let span = dt * (samples - 1) as f64;
    crate::evolution::check_wraparound(&mixed0, span)?;
    let mixed = zitterbewegung_observables(&sample_free_series(&mixed0, m, dt, samples)?, dt, m)?;
    let projected = zitterbewegung_observables(&sample_free_series(&projected0, m, dt, samples)?, dt, m)?;
    let p0: f64 = s
        .file
        .packet
        .as_ref()
        .map(|p| p.momentum.iter().map(|v| (v / s.units.hbar).powi(2)).sum())
        .unwrap_or(0.0);
    let expected = 2.0 * (p0 + m * m).sqrt() * c;
    let freq = mixed.dominant_frequency * c;
    let rel = (freq - expected).abs() / expected;
    let amp_mixed = oscillation_amplitude(&mixed.velocity[0]);
    let amp_projected = oscillation_amplitude(&projected.velocity[0]);
    let ratio = amp_projected / amp_mixed;
    let x_amp = oscillation_amplitude(&mixed.position[0]);
    let compton = 1.0 / (2.0 * m);
    ctx.set("dominant_frequency", freq);
    ctx.set("expected_frequency", expected);
    ctx.set("frequency_relative_error", rel);
    ctx.set("alpha_amplitude_mixed", amp_mixed);
    ctx.set("alpha_amplitude_projected", amp_projected);
    ctx.set("amplitude_ratio", ratio);
    ctx.set("position_amplitude_mixed", x_amp);
    ctx.set("compton_half_length", compton);
    ctx.check("frequency_relative_error", rel, Bound::Below(0.02));
    ctx.check("amplitude_ratio", ratio, Bound::Below(1e-2));
    ctx.check("position_amplitude_over_compton", x_amp / compton, Bound::Within(0.5, 2.0));
    let mut series = Series::new(&["t", "x_mixed", "alpha1_mixed", "x_projected", "alpha1_projected"]);
    for k in 0..samples {
        series.push(vec![
            mixed.times[k] / c,
            mixed.position[0][k],
            mixed.velocity[0][k],
            projected.position[0][k],
            projected.velocity[0][k],
        ]);
    }
    ctx.series = Some(series);
    Ok(())
}

fn run_sweep(ctx: &mut Ctx) -> Result<()> {
    let s = ctx.s;
    let f = &s.file;
    let p = f.packet.as_ref().ok_or_else(|| invalid("missing packet"))?;
    let d = s.grid.spatial_dim();
    let list = f.hbar_list.clone().unwrap_or_else(default_hbar_list);
    let sweep = SweepScenario {
        grid: s.grid,
        rep: s.rep.clone(),
        potential: s.potential.clone(),
        center: if p.center.is_empty() { vec![0.0; d] } else { p.center.clone() },
        momentum: if p.momentum.is_empty() { vec![0.0; d] } else { p.momentum.clone() },
        width: p.width,
        reference_hbar: s.units.hbar,
        t1: f.t1.unwrap_or(f.t0) - f.t0,
        dt: f.dt.unwrap_or(0.0),
        variant: f.scheme,
        sample_every: f.sample_every.unwrap_or(10),
    };
    if f.t0 != 0.0 {
        return Err(invalid("sweep-hbar starts at t0 = 0"));
    }
    let table = hbar_sweep(&sweep, &list, &s.units)?;
    let errors = table.errors();
    ctx.set("hbar", list.clone());
    ctx.set("errors", errors.clone());
    ctx.set("fw_differences", table.rows.iter().map(|r| r.fw_difference).collect::<Vec<_>>());
    ctx.set("monotone", table.is_monotone());
    ctx.set("reduction", table.reduction());
    ctx.check("monotone_violations", table.rows.windows(2).filter(|w| !(w[1].error < w[0].error)).count() as f64, Bound::Below(0.5));
    ctx.check("reduction", table.reduction(), Bound::Below(0.25));
    let fw_shrinks = table.rows.windows(2).filter(|w| !(w[1].fw_difference < w[0].fw_difference)).count();
    ctx.check("fw_difference_violations", fw_shrinks as f64, Bound::Below(0.5));
    let mut summary = Series::new(&["hbar", "width", "error", "fw_difference"]);
    let mut series = Series::new(&["hbar", "t", "centroid", "classical"]);
    for row in &table.rows {
        summary.push(vec![row.hbar, row.width, row.error, row.fw_difference]);
        for k in 0..row.times.len() {
            series.push(vec![row.hbar, row.times[k], row.centroid[k], row.classical[k]]);
        }
    }
    ctx.series = Some(series);
    ctx.extra.push(("sweep.csv".into(), summary));
    Ok(())
}

fn run_gauge(ctx: &mut Ctx) -> Result<()> {
    let s = ctx.s;
    let d = s.grid.spatial_dim();
    let gauge = gauge_function(s)?;
    let pot = ctx.solver_potential();
    let (t0, t1) = ctx.span();
    let (m, e) = (ctx.m(), ctx.e());
    let base = ctx.scheme(s.file.scheme);
    let ladder: Vec<f64> = match &s.file.dt_ladder {
        Some(l) => l.iter().map(|v| ctx.tau(*v)).collect(),
        None => vec![4.0 * base.dt, 2.0 * base.dt, base.dt],
    };
    let psi0 = ctx.packet(None)?;
    let mut diffs = Vec::new();
    let mut series = Series::new(&["dt", "difference"]);
    for &dt in &ladder {
        let scheme = SplitScheme {
            variant: s.file.scheme,
            dt,
        };
        let r = gauge_covariance_difference(&psi0, &pot, &gauge, t0, t1, scheme, m, e)?;
        series.push(vec![dt / s.units.c, r]);
        diffs.push(r);
    }
    let slope = loglog_slope(&ladder, &diffs);
    let finest = *diffs.last().unwrap();
    ctx.set("dts", ladder.iter().map(|v| v / s.units.c).collect::<Vec<_>>());
    ctx.set("differences", diffs);
    ctx.set("slope", slope);
    ctx.set("finest_difference", finest);
    let want = match s.file.scheme {
        SplitVariant::Lie => 0.9,
        SplitVariant::Strang => 1.9,
    };
    ctx.check("slope", slope, Bound::AtLeast(want));
    ctx.check("finest_difference", finest, Bound::Below(1e-6));

    let gauged = pot.gauge_transform(gauge);
    let mut rng = ChaCha8Rng::seed_from_u64(s.file.seed);
    let half = s.grid.half_extent();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = rng.gen_range(t0..=t1);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-half..half)).collect();
        let a = pot.fields(t, &x)?;
        let b = gauged.fields(t, &x)?;
        for i in 0..3 {
            worst = worst.max((a.electric[i] - b.electric[i]).abs());
            worst = worst.max((a.magnetic[i] - b.magnetic[i]).abs());
        }
    }
    ctx.set("field_invariance_residual", worst);
    ctx.check("field_invariance_residual", worst, Bound::Below(1e-9));
    ctx.series = Some(series);
    Ok(())
}

fn run_generator(ctx: &mut Ctx) -> Result<()> {
    let s = ctx.s;
    let pot = ctx.solver_potential();
    let (t0, _) = ctx.span();
    let (m, e) = (ctx.m(), ctx.e());
    let psi0 = ctx.packet(None)?;
    let ladder: Vec<f64> = match &s.file.dt_ladder {
        Some(l) => l.iter().map(|v| ctx.tau(*v)).collect(),
        None => vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4],
    };
    let table = generator_residual(&psi0, &pot, t0, m, e, &ladder)?;
    ctx.set("dts", table.dts.iter().map(|v| v / s.units.c).collect::<Vec<_>>());
    ctx.set("residuals", table.residuals.clone());
    ctx.set("interaction_residuals", table.interaction_residuals.clone());
    ctx.set("generator_slope", table.slope);
    ctx.set("resolution_warning", table.resolution_warning);
    ctx.check("generator_slope", table.slope, Bound::Within(0.9, 1.1));
    let mut series = Series::new(&["dt", "residual", "interaction_residual"]);
    for i in 0..table.dts.len() {
        series.push(vec![table.dts[i] / s.units.c, table.residuals[i], table.interaction_residuals[i]]);
    }
    ctx.series = Some(series);

    if let Some(t1) = s.file.t1 {
        let span = ctx.tau(t1) - t0;
        if t0 != 0.0 {
            return Err(invalid("the Duhamel check starts at t0 = 0"));
        }
        let dts: Vec<f64> = match &s.file.duhamel_dts {
            Some(l) => l.iter().map(|v| ctx.tau(*v)).collect(),
            None => vec![0.02, 0.01, 0.005],
        };
        let res = dts
            .iter()
            .map(|dt| duhamel_residual(&psi0, &pot, span, m, e, *dt))
            .collect::<Result<Vec<_>>>()?;
        let slope = loglog_slope(&dts, &res);
        ctx.set("duhamel_dts", dts.iter().map(|v| v / s.units.c).collect::<Vec<_>>());
        ctx.set("duhamel_residuals", res.clone());
        ctx.set("duhamel_slope", slope);
        ctx.check("duhamel_slope", slope, Bound::Within(0.9, 1.1));
        let mut dseries = Series::new(&["dt", "duhamel_residual"]);
        for (dt, r) in dts.iter().zip(&res) {
            dseries.push(vec![dt / s.units.c, *r]);
        }
        ctx.extra.push(("duhamel.csv".into(), dseries));
    }
    Ok(())
}

/// Exit status for an error: 2 for invalid input, 4 for I/O, 3 for numerical
/// failures during a run.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 4,
        Error::Parse(_)
        | Error::Validation(_)
        | Error::Structural(_)
        | Error::Resolution(_)
        | Error::Scenario(_)
        | Error::Configuration(_) => 2,
        Error::Domain(_)
        | Error::DegenerateProjection(_)
        | Error::DegenerateMode
        | Error::Feasibility(_)
        | Error::Sampling(_) => 3,
    }
}
