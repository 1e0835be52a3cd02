//! The two case studies: a wall under synthetic sinusoidal weather, and an
//! insulation layer between two climatic rooms driven by measured surface
//! temperatures.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bases::{coefficient_ranges, ApproximationBasis, BasisKind, SnapshotMatrix};
use crate::error::{invalid, Error, Result};
use crate::fdm::{qin_flux, solve_model_error, solve_transient, BcKind, FieldSeries};
use crate::grid::{interp_linear, SpatialGrid};
use crate::io;
use crate::metrics::{self, ErrorReport};
use crate::pgd::{self, Edge, Interpolation, ParameterDomain, PgdDomains, PgdModel, Simulation, StoppingCriteria};
use crate::physics::{
    celsius_to_kelvin, dimensionless_signals, dimensionless_temperature, kelvin_to_celsius, nondimensionalize,
    BoundarySignals, ConvectiveEnvironment, DimensionlessProblem, DimensionlessSignals, WallLayer,
};

const HOUR: f64 = 3600.0;

/// Weather, room and wall of the theoretical case. Temperatures in Celsius,
/// frequencies in 1/h, fluxes in W/m^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoreticalCaseConfig {
    pub u_om: f64,
    pub delta_o1: f64,
    pub omega_o1: f64,
    pub delta_o2: f64,
    pub omega_o2: f64,
    pub q_m: f64,
    pub omega_q: f64,
    pub u_im: f64,
    pub delta_i: f64,
    pub omega_i1: f64,
    pub h_in: f64,
    pub h_out: f64,
    pub wall: WallLayer,
    /// Reference temperature of the scaling (K).
    pub u0: f64,
    /// Simulated duration (s).
    pub horizon: f64,
    /// Dimensionless time step.
    pub dt: f64,
    /// Nodes of the reference grid.
    pub nodes: usize,
}

impl Default for TheoreticalCaseConfig {
    fn default() -> Self {
        Self {
            u_om: 20.0,
            delta_o1: -4.4,
            omega_o1: 1.0 / 72.0,
            delta_o2: -11.7,
            omega_o2: 1.0 / 24.0,
            q_m: 500.0,
            omega_q: 1.0 / 48.0,
            u_im: 20.0,
            delta_i: -2.0,
            omega_i1: 1.0 / 48.0,
            h_in: 8.7,
            h_out: 23.2,
            wall: WallLayer {
                thickness: 0.1,
                conductivity: 1.75,
                heat_capacity: 2.2e6,
            },
            u0: 293.15,
            horizon: 3.0 * 24.0 * HOUR,
            dt: 1e-3,
            nodes: 200,
        }
    }
}

/// Boundary values at one instant, temperatures in Kelvin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSample {
    pub u_out: f64,
    pub u_in: f64,
    pub q: f64,
}

/// Outside air, inside air and outside flux at `t` seconds.
pub fn theoretical_signals(config: &TheoreticalCaseConfig, t: f64) -> SignalSample {
    let th = t / HOUR;
    let s = |omega: f64| (2.0 * PI * omega * th).sin();
    let c = config;
    SignalSample {
        u_out: celsius_to_kelvin(c.u_om + c.delta_o1 * s(c.omega_o1) + c.delta_o2 * s(c.omega_o2)),
        u_in: celsius_to_kelvin(c.u_im + c.delta_i * s(c.omega_i1)),
        q: c.q_m * s(c.omega_q).powi(20),
    }
}

impl TheoreticalCaseConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("theoretical case config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.wall.validate()?;
        self.environment().validate()?;
        if !(self.dt > 0.0 && self.horizon > 0.0) {
            return Err(invalid("time step and horizon must be positive"));
        }
        if self.nodes < 3 {
            return Err(invalid("the reference grid needs at least three nodes"));
        }
        Ok(())
    }

    pub fn environment(&self) -> ConvectiveEnvironment {
        ConvectiveEnvironment {
            h_in: self.h_in,
            h_out: self.h_out,
            u0: self.u0,
        }
    }

    pub fn problem(&self) -> Result<DimensionlessProblem> {
        nondimensionalize(&self.wall, &self.environment(), self.horizon)
    }

    /// Number of time steps covering the horizon.
    pub fn steps(&self) -> Result<usize> {
        let p = self.problem()?;
        Ok((p.gamma / self.dt).round() as usize)
    }

    /// Physical signals on the step grid `t_n = n dt t_ref`.
    pub fn boundary_signals(&self) -> Result<BoundarySignals> {
        self.validate()?;
        let p = self.problem()?;
        let times: Vec<f64> = (0..=self.steps()?).map(|n| n as f64 * self.dt * p.t_ref).collect();
        BoundarySignals::sample(&times, |t| {
            let s = theoretical_signals(self, t);
            (s.u_out, s.u_in, s.q)
        })
    }

    pub fn dimensionless_signals(&self) -> Result<DimensionlessSignals> {
        dimensionless_signals(&self.boundary_signals()?, &self.environment(), &self.wall)
    }

    pub fn reference_grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::uniform(self.nodes - 1)
    }

    /// Finite-difference solution from a uniform initial field at `u_om`.
    pub fn reference(&self, grid: &SpatialGrid) -> Result<FieldSeries> {
        let p = self.problem()?;
        let s = self.dimensionless_signals()?;
        let left = BcKind::Fourier {
            bi: p.bi_out,
            air: s.u_out.clone(),
            flux: s.q.clone(),
        };
        let right = BcKind::Fourier {
            bi: p.bi_in,
            air: s.u_in.clone(),
            flux: vec![0.0; s.len()],
        };
        let init = dimensionless_temperature(celsius_to_kelvin(self.u_om), self.u0);
        solve_transient(&p, &left, &right, self.dt, grid, &vec![init; grid.len()])
    }
}

/// Inside long-wave exchange neglected by the convective model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadiationConfig {
    pub f_w: f64,
    pub f_g: f64,
    pub eps_w: f64,
    pub eps_g: f64,
    /// Floor temperature (Celsius).
    pub u_g: f64,
}

impl Default for RadiationConfig {
    fn default() -> Self {
        Self {
            f_w: 0.2,
            f_g: 0.2,
            eps_w: 0.9,
            eps_g: 0.9,
            u_g: 23.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelErrorReport {
    /// Inside radiative flux per sample (W/m^2).
    pub qin: Vec<f64>,
    /// Model error field (K).
    pub error: FieldSeries,
    /// Convective-only solution (K).
    pub simplified: FieldSeries,
    pub max_abs: f64,
    pub argmax_node: usize,
    pub argmax_time: usize,
}

/// Error made by ignoring the inside radiative exchange: `qin` is computed
/// from the convective-only inside surface temperature, then the error
/// problem is solved on the same grid and time steps.
pub fn model_error(
    config: &TheoreticalCaseConfig,
    radiation: &RadiationConfig,
    grid: &SpatialGrid,
) -> Result<ModelErrorReport> {
    let p = config.problem()?;
    let signals = config.boundary_signals()?;
    let reference = config.reference(grid)?;
    let simplified = reference.map_values(|v| config.u0 * (v + 1.0));
    let last = grid.len() - 1;
    let u_g = celsius_to_kelvin(radiation.u_g);
    let qin = simplified
        .profiles
        .iter()
        .zip(&signals.u_in)
        .map(|(prof, &u_w)| {
            qin_flux(
                prof[last],
                u_w,
                u_g,
                radiation.f_w,
                radiation.f_g,
                radiation.eps_w,
                radiation.eps_g,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let error = solve_model_error(&p, &config.wall, &config.environment(), &qin, config.dt, grid)?;
    let (mut max_abs, mut argmax_node, mut argmax_time) = (0.0, 0, 0);
    for (t, prof) in error.profiles.iter().enumerate() {
        for (i, v) in prof.iter().enumerate() {
            if v.abs() > max_abs {
                (max_abs, argmax_node, argmax_time) = (v.abs(), i, t);
            }
        }
    }
    Ok(ModelErrorReport {
        qin,
        error,
        simplified,
        max_abs,
        argmax_node,
        argmax_time,
    })
}

// ---------------------------------------------------------------------------
// practical case

pub const SENSOR_COLUMNS: [&str; 4] = ["T01_C", "T02_C", "T03_C", "T04_C"];

/// Insulation layer between the two rooms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PracticalCaseConfig {
    pub wall: WallLayer,
    pub u0: f64,
    /// Sensor depths from the inner (warm) surface (m).
    pub positions: Vec<f64>,
    /// Sensor uncertainty (K).
    pub sigma_m: f64,
    /// Sensor position uncertainty (m).
    pub delta_x: f64,
    /// Nodes of the finite-difference grid.
    pub nodes: usize,
}

impl Default for PracticalCaseConfig {
    fn default() -> Self {
        Self {
            wall: WallLayer {
                thickness: 0.1,
                conductivity: 0.04,
                heat_capacity: 30e3,
            },
            u0: 293.15,
            positions: vec![0.0, 0.04, 0.08, 0.1],
            sigma_m: 0.1,
            delta_x: 1e-3,
            nodes: 99,
        }
    }
}

impl PracticalCaseConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("practical case config: {e}")))
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        if self.nodes < 3 {
            return Err(invalid("the grid needs at least three nodes"));
        }
        SpatialGrid::uniform(self.nodes - 1)
    }

    /// Only the time scale matters for a Dirichlet-driven layer.
    pub fn problem(&self, horizon: f64) -> Result<DimensionlessProblem> {
        nondimensionalize(&self.wall, &ConvectiveEnvironment::new(1.0, 1.0, self.u0)?, horizon)
    }
}

/// Thermocouple records on a common time grid, in Kelvin.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub times: Vec<f64>,
    pub series: Vec<Vec<f64>>,
    /// Sensor depths from the inner surface (m).
    pub positions: Vec<f64>,
    pub sigma_m: f64,
    pub delta_x: f64,
}

impl MeasurementSet {
    pub fn new(times: Vec<f64>, series: Vec<Vec<f64>>, positions: Vec<f64>, sigma_m: f64, delta_x: f64) -> Result<Self> {
        if series.len() != positions.len() {
            return Err(invalid("one position per sensor series is required"));
        }
        if times.len() < 2 {
            return Err(invalid("measurements need at least two samples"));
        }
        if series.iter().any(|s| s.len() != times.len()) {
            return Err(invalid("sensor series have different lengths"));
        }
        Ok(Self {
            times,
            series,
            positions,
            sigma_m,
            delta_x,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sampling interval (s).
    pub fn sampling(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn sensor_values(&self, n: usize) -> Vec<f64> {
        self.series.iter().map(|s| s[n]).collect()
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut header = vec!["time_s".to_owned()];
        header.extend(SENSOR_COLUMNS.iter().map(|s| s.to_string()));
        let rows = (0..self.len()).map(|n| {
            let mut r = vec![self.times[n]];
            r.extend(self.series.iter().map(|s| kelvin_to_celsius(s[n])));
            r
        });
        io::write_table(path, &header, rows)
    }
}

/// Reads `time_s,T01_C,T02_C,T03_C,T04_C` rows (Celsius) into Kelvin.
pub fn load_measurements<P: AsRef<Path>>(path: P, config: &PracticalCaseConfig) -> Result<MeasurementSet> {
    let table = io::read_table(path)?;
    let column = |name: &str| {
        table.header.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("missing column '{name}'"),
        })
    };
    let t_col = column("time_s")?;
    let s_cols = SENSOR_COLUMNS.iter().map(|c| column(c)).collect::<Result<Vec<_>>>()?;
    if table.rows.len() < 2 {
        return Err(Error::Parse {
            line: table.rows.len() + 1,
            msg: "need at least two samples".into(),
        });
    }
    let times: Vec<f64> = table.rows.iter().map(|r| r[t_col]).collect();
    if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Parse {
            line: i + 3,
            msg: "time is not strictly increasing".into(),
        });
    }
    let series = s_cols
        .iter()
        .map(|&c| table.rows.iter().map(|r| celsius_to_kelvin(r[c])).collect())
        .collect();
    MeasurementSet::new(times, series, config.positions.clone(), config.sigma_m, config.delta_x)
}

/// Wall coordinate in `[0, 1]` (0 = outer face) of a depth from the inner
/// surface.
pub fn depth_to_coordinate(depth: f64, thickness: f64) -> f64 {
    1.0 - depth / thickness
}

/// Piecewise-linear interpolation of sensor values (at wall coordinates in
/// `[0, 1]`) onto the grid, constant beyond the outermost sensors.
pub fn initial_profile(coords: &[f64], values: &[f64], grid: &SpatialGrid) -> Result<Vec<f64>> {
    if coords.len() != values.len() || coords.len() < 2 {
        return Err(invalid("need at least two sensors with one value each"));
    }
    let mut pairs: Vec<(f64, f64)> = coords.iter().copied().zip(values.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(invalid("duplicate sensor positions"));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(grid.physical_nodes().iter().map(|&x| interp_linear(&xs, &ys, x)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningPeriod {
    Full,
    Half,
    Cycle1,
}

impl LearningPeriod {
    pub const ALL: [LearningPeriod; 3] = [LearningPeriod::Full, LearningPeriod::Half, LearningPeriod::Cycle1];

    /// Window in seconds from the start of the evaluation period.
    pub fn window(self) -> (f64, f64) {
        match self {
            LearningPeriod::Full => (0.0, 9.0 * HOUR),
            LearningPeriod::Half => (0.0, 4.0 * HOUR + 50.0 * 60.0),
            LearningPeriod::Cycle1 => (0.0, 40.0 * 60.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LearningPeriod::Full => "full",
            LearningPeriod::Half => "half",
            LearningPeriod::Cycle1 => "cycle1",
        }
    }
}

impl std::str::FromStr for LearningPeriod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(LearningPeriod::Full),
            "half" => Ok(LearningPeriod::Half),
            "cycle1" => Ok(LearningPeriod::Cycle1),
            other => Err(invalid(format!("unknown learning period '{other}'"))),
        }
    }
}

/// Profiles of `series` (times in units of `t_ref` seconds) inside the
/// learning window.
pub fn learning_split(series: &FieldSeries, period: LearningPeriod, t_ref: f64) -> Result<SnapshotMatrix> {
    let (lo, hi) = period.window();
    let end = series.times.last().copied().unwrap_or(0.0) * t_ref;
    if hi > end + 1e-6 * t_ref {
        return Err(invalid(format!(
            "learning window ends at {hi} s but the data stop at {end} s"
        )));
    }
    let w = series.window(lo / t_ref - 1e-9, hi / t_ref + 1e-9);
    SnapshotMatrix::new(w.times, w.profiles)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Uncertainty {
    /// Per-sample global uncertainty (K).
    pub sigma: Vec<f64>,
    pub mean: f64,
}

pub fn combined_uncertainty(gradient: f64, sigma_m: f64, delta_x: f64) -> f64 {
    (sigma_m * sigma_m + (gradient * delta_x).powi(2)).sqrt()
}

/// Derivative at `x[i]` of the parabola through three neighbouring points.
fn three_point_derivative(x: [f64; 3], y: [f64; 3], at: usize) -> f64 {
    let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
    match at {
        0 => (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) * y[0] + ((h1 + h2) / (h1 * h2)) * y[1]
            - (h1 / (h2 * (h1 + h2))) * y[2],
        1 => (-h2 / (h1 * (h1 + h2))) * y[0] + ((h2 - h1) / (h1 * h2)) * y[1] + (h1 / (h2 * (h1 + h2))) * y[2],
        _ => (h2 / (h1 * (h1 + h2))) * y[0] - ((h1 + h2) / (h1 * h2)) * y[1]
            + ((h1 + 2.0 * h2) / (h2 * (h1 + h2))) * y[2],
    }
}

/// Sensor and position uncertainty of sensor `sensor`, the gradient coming
/// from a second-order three-point stencil across neighbouring sensors.
pub fn experimental_uncertainty(set: &MeasurementSet, sensor: usize) -> Result<Uncertainty> {
    let n = set.positions.len();
    if n < 3 {
        return Err(invalid("the gradient needs at least three sensors"));
    }
    if sensor >= n {
        return Err(invalid(format!("sensor {sensor} out of range")));
    }
    if set.positions.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("sensor positions must be strictly increasing"));
    }
    let start = sensor.saturating_sub(1).min(n - 3);
    let at = sensor - start;
    let x = [set.positions[start], set.positions[start + 1], set.positions[start + 2]];
    let sigma: Vec<f64> = (0..set.len())
        .map(|t| {
            let y = [set.series[start][t], set.series[start + 1][t], set.series[start + 2][t]];
            combined_uncertainty(three_point_derivative(x, y, at), set.sigma_m, set.delta_x)
        })
        .collect();
    let mean = sigma.iter().sum::<f64>() / sigma.len() as f64;
    Ok(Uncertainty { sigma, mean })
}

/// Dimensionless surface drives: `(inside, outside)` from the first and last
/// sensors.
pub fn surface_drives(set: &MeasurementSet, u0: f64) -> (Vec<f64>, Vec<f64>) {
    let inside = set.series[0].iter().map(|&v| dimensionless_temperature(v, u0)).collect();
    let outside = set.series[set.series.len() - 1]
        .iter()
        .map(|&v| dimensionless_temperature(v, u0))
        .collect();
    (inside, outside)
}

/// Finite-difference solution driven by the two surface sensors, started
/// from the interpolated sensor profile.
pub fn practical_reference(set: &MeasurementSet, config: &PracticalCaseConfig) -> Result<FieldSeries> {
    let grid = config.grid()?;
    let horizon = set.times[set.len() - 1] - set.times[0];
    let p = config.problem(horizon)?;
    let dt = set.sampling() / p.t_ref;
    let (inside, outside) = surface_drives(set, config.u0);
    let coords: Vec<f64> = set
        .positions
        .iter()
        .map(|&d| depth_to_coordinate(d, config.wall.thickness))
        .collect();
    let values: Vec<f64> = set
        .sensor_values(0)
        .iter()
        .map(|&v| dimensionless_temperature(v, config.u0))
        .collect();
    let init = initial_profile(&coords, &values, &grid)?;
    solve_transient(
        &p,
        &BcKind::Dirichlet { surface: outside },
        &BcKind::Dirichlet { surface: inside },
        dt,
        &grid,
        &init,
    )
}

/// One phase of the room schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub heater: bool,
    pub heat_pump: bool,
    pub minutes: f64,
}

/// Heater / heat pump schedule of the evaluation period (cycles 0 to 6).
pub fn cycle_schedule() -> Vec<Phase> {
    let p = |heater, heat_pump, minutes| Phase {
        heater,
        heat_pump,
        minutes,
    };
    vec![
        p(false, true, 40.0),
        p(true, true, 40.0),
        p(false, true, 40.0),
        p(true, true, 25.0),
        p(false, true, 25.0),
        p(true, true, 60.0),
        p(false, true, 60.0),
        p(true, false, 40.0),
        p(false, false, 40.0),
        p(true, false, 25.0),
        p(false, false, 25.0),
        p(true, false, 60.0),
        p(false, false, 60.0),
    ]
}

/// Room models and wall exchange used to synthesize the fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSettings {
    /// Settling period with heater and heat pump on (s).
    pub initialization: f64,
    pub h_warm: f64,
    pub h_cold: f64,
    /// Warm room set point with heater on / free-floating level (Celsius).
    pub warm_on: f64,
    pub warm_off: f64,
    /// Cold room set point with heat pump on / free-floating level.
    pub cold_on: f64,
    pub cold_off: f64,
    /// Air time constants (s).
    pub tau_warm: f64,
    pub tau_cold: f64,
}

impl Default for FixtureSettings {
    fn default() -> Self {
        Self {
            initialization: 2.0 * HOUR,
            h_warm: 5.0,
            h_cold: 8.0,
            warm_on: 32.0,
            warm_off: 21.0,
            cold_on: 5.0,
            cold_off: 14.0,
            tau_warm: 600.0,
            tau_cold: 1200.0,
        }
    }
}

/// Synthetic thermocouple records: room air follows first-order responses to
/// the schedule, the wall is solved with convective faces, and the sensors
/// read the field at their depths. Sampling every 30 s.
pub fn synthetic_fixture(config: &PracticalCaseConfig, settings: &FixtureSettings) -> Result<MeasurementSet> {
    let sampling = 30.0;
    let mut phases = vec![Phase {
        heater: true,
        heat_pump: true,
        minutes: settings.initialization / 60.0,
    }];
    phases.extend(cycle_schedule());
    let mut heater = Vec::new();
    let mut pump = Vec::new();
    for ph in &phases {
        let samples = (ph.minutes * 60.0 / sampling).round() as usize;
        heater.extend(std::iter::repeat(ph.heater).take(samples));
        pump.extend(std::iter::repeat(ph.heat_pump).take(samples));
    }
    let total = heater.len() + 1;
    let (mut warm, mut cold) = (vec![settings.warm_off; total], vec![settings.cold_off; total]);
    let aw = 1.0 - (-sampling / settings.tau_warm).exp();
    let ac = 1.0 - (-sampling / settings.tau_cold).exp();
    for n in 1..total {
        let tw = if heater[n - 1] { settings.warm_on } else { settings.warm_off };
        let tc = if pump[n - 1] { settings.cold_on } else { settings.cold_off };
        warm[n] = warm[n - 1] + aw * (tw - warm[n - 1]);
        cold[n] = cold[n - 1] + ac * (tc - cold[n - 1]);
    }

    let env = ConvectiveEnvironment::new(settings.h_warm, settings.h_cold, config.u0)?;
    let horizon = (total - 1) as f64 * sampling;
    let p = nondimensionalize(&config.wall, &env, horizon)?;
    let u = |c: f64| dimensionless_temperature(celsius_to_kelvin(c), config.u0);
    let grid = SpatialGrid::uniform(100)?;
    let left = BcKind::Fourier {
        bi: p.bi_out,
        air: cold.iter().map(|&c| u(c)).collect(),
        flux: vec![0.0; total],
    };
    let right = BcKind::Fourier {
        bi: p.bi_in,
        air: warm.iter().map(|&c| u(c)).collect(),
        flux: vec![0.0; total],
    };
    let start = 0.5 * (u(settings.warm_off) + u(settings.cold_off));
    let run = solve_transient(&p, &left, &right, sampling / p.t_ref, &grid, &vec![start; grid.len()])?;

    let skip = (settings.initialization / sampling).round() as usize;
    let x = grid.physical_nodes();
    let series = config
        .positions
        .iter()
        .map(|&d| {
            let at = depth_to_coordinate(d, config.wall.thickness);
            run.profiles[skip..]
                .iter()
                .map(|prof| {
                    // records carry 1e-4 K resolution
                    let v = kelvin_to_celsius(config.u0 * (interp_linear(&x, prof, at) + 1.0));
                    celsius_to_kelvin((v * 1e4).round() / 1e4)
                })
                .collect()
        })
        .collect();
    let times = (0..total - skip).map(|n| n as f64 * sampling).collect();
    MeasurementSet::new(times, series, config.positions.clone(), config.sigma_m, config.delta_x)
}

// ---------------------------------------------------------------------------
// shared study plumbing

/// Reference source profiles and the model inputs derived from them.
#[derive(Debug, Clone)]
pub struct StudyData {
    pub problem: DimensionlessProblem,
    pub dt: f64,
    /// Reference on the model grid.
    pub reference: FieldSeries,
    pub training: SnapshotMatrix,
    pub inside: Edge,
    pub outside: Edge,
    /// Edge parameters per sample.
    pub drive_in: Vec<f64>,
    pub drive_out: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    /// Intervals of the model grid.
    pub intervals: usize,
    pub delta_b_in: f64,
    pub delta_b_out: f64,
    /// Margin added to each side of the edge-parameter domains, as a
    /// fraction of their width.
    pub margin: f64,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            intervals: 100,
            delta_b_in: 1e-3,
            delta_b_out: 1e-4,
            margin: 0.1,
        }
    }
}

fn extent(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

impl StudyData {
    /// Theoretical case with the reference resampled to the model grid.
    pub fn theoretical(config: &TheoreticalCaseConfig, settings: &ModelSettings) -> Result<Self> {
        let reference = config.reference(&config.reference_grid()?)?;
        Self::theoretical_from_reference(config, settings, &reference)
    }

    pub fn theoretical_from_reference(
        config: &TheoreticalCaseConfig,
        settings: &ModelSettings,
        reference: &FieldSeries,
    ) -> Result<Self> {
        let problem = config.problem()?;
        let grid = SpatialGrid::uniform(settings.intervals)?;
        let reference = reference.resample(&grid);
        let signals = config.dimensionless_signals()?;
        if signals.len() != reference.len() {
            return Err(invalid("reference and signals have different lengths"));
        }
        let (drive_in, drive_out) = (0..signals.len())
            .map(|n| signals.boundary_coefficients(&problem, n))
            .unzip();
        Ok(Self {
            problem,
            dt: config.dt,
            training: SnapshotMatrix::from(&reference),
            reference,
            inside: Edge::Robin { bi: problem.bi_in },
            outside: Edge::Robin { bi: problem.bi_out },
            drive_in,
            drive_out,
        })
    }

    /// Practical case; POD bases train on `period`.
    pub fn practical(set: &MeasurementSet, config: &PracticalCaseConfig, period: LearningPeriod) -> Result<Self> {
        let reference = practical_reference(set, config)?;
        let horizon = set.times[set.len() - 1] - set.times[0];
        let problem = config.problem(horizon)?;
        let training = learning_split(&reference, period, problem.t_ref)?;
        let (drive_in, drive_out) = surface_drives(set, config.u0);
        Ok(Self {
            problem,
            dt: set.sampling() / problem.t_ref,
            reference,
            training,
            inside: Edge::Dirichlet,
            outside: Edge::Dirichlet,
            drive_in,
            drive_out,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.reference.grid
    }

    /// Basis of `n` modes with coefficient ranges from the training set.
    pub fn basis(&self, kind: BasisKind, n: usize) -> Result<ApproximationBasis> {
        let b = match kind {
            BasisKind::Chebyshev => ApproximationBasis::chebyshev(n, self.grid())?,
            BasisKind::Legendre => ApproximationBasis::legendre(n, self.grid())?,
            BasisKind::Pod => ApproximationBasis::pod(&self.training, n, self.grid())?,
        };
        // polynomial bases have no learning period: their ranges cover the
        // whole reference
        let r = match kind {
            BasisKind::Pod => coefficient_ranges(&self.training, &b)?,
            _ => coefficient_ranges(&SnapshotMatrix::from(&self.reference), &b)?,
        };
        b.with_ranges(r)
    }

    pub fn domains(&self, n: usize, delta_zeta: f64, settings: &ModelSettings) -> Result<PgdDomains> {
        let (lo, hi) = extent(&self.drive_in);
        let b_in = ParameterDomain::covering(lo, hi, settings.margin, settings.delta_b_in)?;
        let (lo, hi) = extent(&self.drive_out);
        let b_out = ParameterDomain::covering(lo, hi, settings.margin, settings.delta_b_out)?;
        PgdDomains::with_unit_zeta(b_in, b_out, n, delta_zeta)
    }

    pub fn build(
        &self,
        basis: &ApproximationBasis,
        delta_zeta: f64,
        settings: &ModelSettings,
        criteria: &StoppingCriteria,
        seed: u64,
    ) -> Result<PgdModel> {
        let domains = self.domains(basis.n_modes(), delta_zeta, settings)?;
        pgd::build_with_edges(
            self.dt * self.problem.fourier,
            self.inside,
            self.outside,
            basis,
            &domains,
            criteria,
            seed,
        )
    }

    pub fn simulate(&self, model: &PgdModel, interp: Interpolation) -> Result<Simulation> {
        model.simulate_driven(&self.drive_in, &self.drive_out, self.dt, &self.reference.profiles[0], interp)
    }

    pub fn epsilon(&self, simulation: &Simulation) -> Result<ErrorReport> {
        metrics::epsilon(&self.reference, &simulation.series)
    }
}
