//! The subcommands. Each writes its outputs and a manifest into the output
//! directory and returns that manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;
use wallrom::bases::BasisKind;
use wallrom::metrics::{self, cpu_ratios, time_block, Timing};
use wallrom::pgd::{Interpolation, PgdModel};
use wallrom::physics::kelvin_to_celsius;
use wallrom::studies::{
    depth_to_coordinate, experimental_uncertainty, learning_split, model_error as run_model_error,
    practical_reference, LearningPeriod, StudyData, SENSOR_COLUMNS,
};
use wallrom::{FieldSeries, SnapshotMatrix};

use crate::config::{BasisSpec, CaseKind, RunConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

const HOUR: f64 = 3600.0;

pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
    pub seed: u64,
    /// Also write gnuplot scripts for the CSV outputs.
    pub gnuplot: bool,
}

impl Context {
    fn start(&self, command: &str) -> CliResult<RunManifest> {
        self.config.validate()?;
        std::fs::create_dir_all(&self.out).map_err(|e| CliError::io(&self.out, e))?;
        Ok(RunManifest::new(command, self.config.hash(), self.seed))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_text(&self, manifest: &mut RunManifest, name: &str, text: &str) -> CliResult<()> {
        let path = self.path(name);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        manifest.outputs.push(name.to_owned());
        Ok(())
    }

    /// Case data with the POD training window `period`.
    fn study(&self, period: LearningPeriod) -> CliResult<StudyData> {
        let cfg = &self.config;
        Ok(match cfg.case {
            CaseKind::Theoretical => StudyData::theoretical(&cfg.theoretical, &cfg.model)?,
            CaseKind::Practical => StudyData::practical(&cfg.measurements()?, &cfg.practical, period)?,
        })
    }
}

fn finish(ctx: &Context, mut manifest: RunManifest, timings: Vec<Timing>) -> CliResult<RunManifest> {
    manifest.timings = timings;
    manifest.write(&ctx.out)?;
    Ok(manifest)
}

fn rho_map(timings: &[Timing]) -> CliResult<serde_json::Value> {
    let ratios = cpu_ratios(timings)?;
    Ok(timings
        .iter()
        .zip(ratios)
        .map(|(t, r)| (t.label.clone(), json!(r.rho)))
        .collect::<serde_json::Map<_, _>>()
        .into())
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct ReferenceArgs {
    pub nodes: Option<usize>,
    pub dt: Option<f64>,
}

/// Full-order finite-difference solution of the selected case.
pub fn reference(ctx: &Context, args: &ReferenceArgs) -> CliResult<RunManifest> {
    let mut manifest = ctx.start("reference")?;
    let cfg = &ctx.config;
    let (series, timing, problem) = match cfg.case {
        CaseKind::Theoretical => {
            let mut case = cfg.theoretical.clone();
            if let Some(n) = args.nodes {
                case.nodes = n;
            }
            if let Some(dt) = args.dt {
                case.dt = dt;
            }
            case.validate()?;
            let grid = case.reference_grid()?;
            let (series, timing) = time_block("reference", || case.reference(&grid));
            (series?, timing, case.problem()?)
        }
        CaseKind::Practical => {
            if args.dt.is_some() {
                return Err(CliError::Config(
                    "the practical time step follows the measurement sampling".into(),
                ));
            }
            let mut case = cfg.practical.clone();
            if let Some(n) = args.nodes {
                case.nodes = n;
            }
            let set = cfg.measurements()?;
            let (series, timing) = time_block("reference", || practical_reference(&set, &case));
            let horizon = set.times[set.len() - 1] - set.times[0];
            (series?, timing, case.problem(horizon)?)
        }
    };
    series.write_csv(ctx.path("reference.csv"))?;
    manifest.outputs.push("reference.csv".into());
    manifest.summary = json!({
        "case": cfg.case,
        "nodes": series.grid.len(),
        "samples": series.len(),
        "dt": series.times.get(1).map(|t| t - series.times[0]),
        "t_ref_s": problem.t_ref,
        "bi_in": problem.bi_in,
        "bi_out": problem.bi_out,
    });
    finish(ctx, manifest, vec![timing])
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct BuildArgs {
    pub basis: Option<BasisKind>,
    pub n: Option<usize>,
    pub delta_zeta: Option<f64>,
    pub train: Option<LearningPeriod>,
    /// Reference series CSV the POD basis is learnt from.
    pub snapshots: Option<PathBuf>,
}

/// Offline phase: approximation basis plus PGD model.
pub fn build(ctx: &Context, args: &BuildArgs) -> CliResult<RunManifest> {
    let mut manifest = ctx.start("build")?;
    let cfg = &ctx.config;
    let kind = args.basis.unwrap_or(cfg.build.basis);
    let n = args.n.unwrap_or(cfg.build.n);
    let dz = args.delta_zeta.unwrap_or(cfg.build.delta_zeta);

    let (data, t_case) = time_block("case", || ctx.study(args.train.unwrap_or(LearningPeriod::Full)));
    let mut data = data?;
    if kind == BasisKind::Pod {
        let path = args
            .snapshots
            .as_ref()
            .ok_or_else(|| CliError::Config("a POD basis needs --snapshots".into()))?;
        let snaps = FieldSeries::read_csv(path)?.resample(data.grid());
        data.training = match args.train {
            Some(p) => learning_split(&snaps, p, data.problem.t_ref)?,
            None => SnapshotMatrix::from(&snaps),
        };
    }
    let (basis, t_basis) = time_block("basis", || data.basis(kind, n));
    let basis = basis?;
    let (model, t_model) = time_block("model", || data.build(&basis, dz, &cfg.model, &cfg.criteria, ctx.seed));
    let model = model?;

    basis.save_json(ctx.path("basis.json"))?;
    model.save(ctx.path("model.json"))?;
    manifest.outputs.extend(["basis.json".into(), "model.json".into()]);
    let amps = &model.meta.amplitudes;
    let offline = vec![t_basis, t_model];
    manifest.summary = json!({
        "basis": kind,
        "n": n,
        "delta_zeta": dz,
        "train": args.train,
        "modes": model.n_modes(),
        "modes_converged": model.meta.converged.iter().filter(|&&c| c).count(),
        "last_relative_amplitude": amps.last().unwrap_or(&0.0) / amps.first().copied().filter(|&a| a > 0.0).unwrap_or(1.0),
        "rho_cpu": rho_map(&offline)?,
    });
    let mut timings = vec![t_case];
    timings.extend(offline);
    finish(ctx, manifest, timings)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub model: PathBuf,
    pub interpolation: Option<Interpolation>,
}

/// Online phase against the case reference.
pub fn simulate(ctx: &Context, args: &SimulateArgs) -> CliResult<RunManifest> {
    let mut manifest = ctx.start("simulate")?;
    let model = PgdModel::load(&args.model)?;
    let (data, t_reference) = time_block("reference", || ctx.study(LearningPeriod::Full));
    let data = data?;
    if model.grid() != data.grid() {
        return Err(CliError::Config(format!(
            "model grid has {} nodes, the case grid {}",
            model.grid().len(),
            data.grid().len()
        )));
    }
    let interp = args.interpolation.unwrap_or(ctx.config.build.interpolation);
    let (sim, t_online) = time_block("online", || data.simulate(&model, interp));
    let sim = sim?;
    let err = data.epsilon(&sim)?;

    sim.series.write_csv(ctx.path("simulation.csv"))?;
    let rows = sim.series.times.iter().zip(&err.trace).map(|(t, e)| [*t, *e]);
    wallrom::io::write_table(ctx.path("error_trace.csv"), &["time".into(), "rmse".into()], rows)?;
    manifest.outputs.extend(["simulation.csv".into(), "error_trace.csv".into()]);
    let timings = vec![t_reference, t_online];
    manifest.summary = json!({
        "basis": model.basis.kind(),
        "n": model.basis.n_modes(),
        "modes": model.n_modes(),
        "epsilon": err.value,
        "epsilon_time": sim.series.times[err.argmax],
        "clamped_coefficients": sim.clamped_coefficients,
        "clamped_parameters": sim.clamped_parameters,
        "rho_cpu": rho_map(&timings)?,
    });
    finish(ctx, manifest, timings)
}

// ---------------------------------------------------------------------------

const SWEEP_METRICS: [&str; 4] = ["epsilon", "mu", "nu", "modes"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub basis: String,
    pub n: usize,
    pub delta_zeta: f64,
    pub modes: usize,
    pub metric: String,
    pub value: f64,
    pub rho_cpu: f64,
}

struct Cell {
    spec: BasisSpec,
    n: usize,
    dz: f64,
}

struct CellResult {
    modes: usize,
    values: Vec<(String, f64)>,
    seconds: f64,
}

fn run_cell(ctx: &Context, data: &StudyData, cell: &Cell, metric_names: &[String]) -> CliResult<CellResult> {
    let cfg = &ctx.config;
    let basis = data.basis(cell.spec.kind, cell.n)?;
    let (res, timing) = time_block("cell", || -> CliResult<_> {
        let model = data.build(&basis, cell.dz, &cfg.model, &cfg.criteria, ctx.seed)?;
        let sim = data.simulate(&model, cfg.build.interpolation)?;
        Ok((model, sim))
    });
    let (model, sim) = res?;
    let mut values = Vec::with_capacity(metric_names.len());
    for name in metric_names {
        let v = match name.as_str() {
            "epsilon" => data.epsilon(&sim)?.value,
            "mu" => metrics::mu(&data.reference, &basis)?.value,
            "nu" => metrics::nu(&data.reference, &basis, cell.dz)?.value,
            _ => model.n_modes() as f64,
        };
        values.push((name.clone(), v));
    }
    Ok(CellResult {
        modes: model.n_modes(),
        values,
        seconds: timing.seconds,
    })
}

/// Runs every (basis, N, delta_zeta) combination in parallel. Failing cells
/// are reported in the manifest and make the command return
/// [`CliError::Partial`] once all outputs are written.
pub fn sweep(ctx: &Context) -> CliResult<(RunManifest, Vec<SweepRow>)> {
    let mut manifest = ctx.start("sweep")?;
    let sc = &ctx.config.sweep;
    if sc.bases.is_empty() || sc.n.is_empty() || sc.delta_zeta.is_empty() || sc.metrics.is_empty() {
        return Err(CliError::Config("the sweep grid is empty".into()));
    }
    if let Some(m) = sc.metrics.iter().find(|m| !SWEEP_METRICS.contains(&m.as_str())) {
        return Err(CliError::Config(format!("unknown sweep metric '{m}'")));
    }
    let specs = sc
        .bases
        .iter()
        .map(|s| s.parse::<BasisSpec>())
        .collect::<CliResult<Vec<_>>>()?;

    let (base, t_case) = time_block("case", || ctx.study(LearningPeriod::Full));
    let base = base?;
    let mut data: BTreeMap<Option<&'static str>, StudyData> = BTreeMap::new();
    for spec in &specs {
        let key = spec.period.map(|p| p.name());
        if data.contains_key(&key) {
            continue;
        }
        let mut d = base.clone();
        if let Some(p) = spec.period {
            d.training = learning_split(&d.reference, p, d.problem.t_ref)?;
        }
        data.insert(key, d);
    }

    let cells: Vec<Cell> = specs
        .iter()
        .flat_map(|&spec| {
            sc.n
                .iter()
                .flat_map(move |&n| sc.delta_zeta.iter().map(move |&dz| Cell { spec, n, dz }))
        })
        .collect();
    let results: Vec<CliResult<CellResult>> = cells
        .par_iter()
        .map(|c| run_cell(ctx, &data[&c.spec.period.map(|p| p.name())], c, &sc.metrics))
        .collect();

    let t0 = results
        .iter()
        .filter_map(|r| r.as_ref().ok().map(|c| c.seconds))
        .fold(0.0, f64::max);
    let t0 = if t0 > 0.0 { t0 } else { f64::MIN_POSITIVE };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (cell, res) in cells.iter().zip(&results) {
        match res {
            Ok(r) => rows.extend(r.values.iter().map(|(metric, value)| SweepRow {
                basis: cell.spec.label(),
                n: cell.n,
                delta_zeta: cell.dz,
                modes: r.modes,
                metric: metric.clone(),
                value: *value,
                rho_cpu: r.seconds / t0,
            })),
            Err(e) => {
                log::error!("{} N={} dz={}: {e}", cell.spec.label(), cell.n, cell.dz);
                failures.push(json!({
                    "basis": cell.spec.label(),
                    "n": cell.n,
                    "delta_zeta": cell.dz,
                    "error": e.to_string(),
                }));
            }
        }
    }

    let mut csv = String::from("basis,N,delta_zeta,M,metric,value,rho_cpu\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{:e},{},{},{:e},{}",
            r.basis, r.n, r.delta_zeta, r.modes, r.metric, r.value, r.rho_cpu
        );
    }
    ctx.write_text(&mut manifest, "sweep.csv", &csv)?;
    if ctx.gnuplot {
        ctx.write_text(&mut manifest, "sweep.gp", &sweep_script(&rows))?;
    }
    manifest.summary = json!({
        "cells": cells.len(),
        "failed": failures.len(),
        "failures": failures,
        "t0_s": t0,
    });
    let manifest = finish(ctx, manifest, vec![t_case])?;
    if !failures.is_empty() {
        return Err(CliError::Partial {
            failed: failures.len(),
            total: cells.len(),
        });
    }
    Ok((manifest, rows))
}

fn sweep_script(rows: &[SweepRow]) -> String {
    let mut series: Vec<(String, String, f64)> = rows
        .iter()
        .map(|r| (r.metric.clone(), r.basis.clone(), r.delta_zeta))
        .collect();
    series.dedup();
    series.sort_by(|a, b| a.partial_cmp(b).unwrap());
    series.dedup();
    let mut s = String::from(
        "set datafile separator ','\nset logscale y\nset xlabel 'N'\nset key outside\nset terminal pngcairo size 900,600\n",
    );
    let mut metric = None;
    for (m, basis, dz) in &series {
        if metric.as_ref() != Some(m) {
            if metric.is_some() {
                s.push('\n');
            }
            let _ = write!(s, "set output 'sweep_{m}.png'\nset ylabel '{m}'\nplot ");
            metric = Some(m.clone());
        } else {
            s.push_str(", \\\n     ");
        }
        let _ = write!(
            s,
            "'sweep.csv' using ($5 eq '{m}' && strcol(1) eq '{basis}' && $3 == {dz:e} ? $2 : 1/0):6 with linespoints title '{basis} {dz:e}'"
        );
    }
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------

/// Error caused by neglecting the inside long-wave exchange.
pub fn model_error(ctx: &Context) -> CliResult<RunManifest> {
    let mut manifest = ctx.start("model-error")?;
    let cfg = &ctx.config;
    let case = &cfg.theoretical;
    let grid = case.reference_grid()?;
    let (report, timing) = time_block("model_error", || run_model_error(case, &cfg.radiation, &grid));
    let report = report?;
    let t_ref = case.problem()?.t_ref;
    let hours: Vec<f64> = report.error.times.iter().map(|t| t * t_ref / HOUR).collect();

    let rows = hours.iter().zip(&report.qin).map(|(t, q)| [*t, *q]);
    wallrom::io::write_table(ctx.path("qin.csv"), &["time_h".into(), "qin_w_m2".into()], rows)?;
    report.error.write_csv(ctx.path("model_error.csv"))?;
    let last = grid.len() - 1;
    let header: Vec<String> = ["time_h", "u_in_c", "u_tilde_in_c", "u_out_c", "u_tilde_out_c", "e_in_k", "e_out_k"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = (0..hours.len()).map(|n| {
        let u = &report.simplified.profiles[n];
        let e = &report.error.profiles[n];
        [
            hours[n],
            kelvin_to_celsius(u[last]),
            kelvin_to_celsius(u[last] - e[last]),
            kelvin_to_celsius(u[0]),
            kelvin_to_celsius(u[0] - e[0]),
            e[last],
            e[0],
        ]
    });
    wallrom::io::write_table(ctx.path("surfaces.csv"), &header, rows)?;
    manifest.outputs.extend(["qin.csv".into(), "model_error.csv".into(), "surfaces.csv".into()]);
    if ctx.gnuplot {
        let script = "set datafile separator ','\nset terminal pngcairo size 900,600\nset xlabel 't (h)'\n\
                      set output 'qin.png'\nset ylabel 'q_in (W/m^2)'\nplot 'qin.csv' using 1:2 with lines notitle\n\
                      set output 'model_error.png'\nset ylabel 'e (K)'\n\
                      plot 'surfaces.csv' using 1:6 with lines title 'inside', '' using 1:7 with lines title 'outside'\n";
        ctx.write_text(&mut manifest, "model_error.gp", script)?;
    }
    let (qmin, qmax) = report
        .qin
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &q| (a.min(q), b.max(q)));
    let e_out = report.error.profiles.iter().map(|p| p[0].abs()).fold(0.0, f64::max);
    manifest.summary = json!({
        "max_abs_error_k": report.max_abs,
        "argmax_x": grid.physical_nodes()[report.argmax_node],
        "argmax_at_inside_surface": report.argmax_node == last,
        "argmax_time_h": hours[report.argmax_time],
        "qin_min_w_m2": qmin,
        "qin_max_w_m2": qmax,
        "max_abs_error_outside_k": e_out,
    });
    finish(ctx, manifest, vec![timing])
}

// ---------------------------------------------------------------------------

/// Experimental uncertainty of every sensor and the residual of the
/// full-order model against the measurements.
pub fn uncertainty(ctx: &Context) -> CliResult<RunManifest> {
    let mut manifest = ctx.start("uncertainty")?;
    let cfg = &ctx.config;
    let set = cfg.measurements()?;
    let (reference, timing) = time_block("reference", || practical_reference(&set, &cfg.practical));
    let reference = reference?;
    let n_sensors = set.positions.len();
    let sigma = (0..n_sensors)
        .map(|i| experimental_uncertainty(&set, i))
        .collect::<wallrom::Result<Vec<_>>>()?;
    let residual: Vec<Vec<f64>> = set
        .positions
        .iter()
        .zip(&set.series)
        .map(|(&d, measured)| {
            let x = depth_to_coordinate(d, cfg.practical.wall.thickness);
            reference
                .trace_at(x)
                .iter()
                .zip(measured)
                .map(|(u, m)| cfg.practical.u0 * (u + 1.0) - m)
                .collect()
        })
        .collect();

    let mut header = vec!["time_s".to_owned()];
    let names: Vec<&str> = SENSOR_COLUMNS.iter().map(|c| c.trim_end_matches("_C")).collect();
    header.extend(names.iter().map(|c| format!("sigma_{c}")));
    header.extend(names.iter().map(|c| format!("residual_{c}")));
    let rows = (0..set.len()).map(|n| {
        let mut r = vec![set.times[n]];
        r.extend(sigma.iter().map(|s| s.sigma[n]));
        r.extend(residual.iter().map(|s| s[n]));
        r
    });
    wallrom::io::write_table(ctx.path("uncertainty.csv"), &header, rows)?;
    manifest.outputs.push("uncertainty.csv".into());
    let sensors: Vec<_> = (0..n_sensors)
        .map(|i| {
            let within = residual[i]
                .iter()
                .zip(&sigma[i].sigma)
                .filter(|(r, s)| r.abs() <= 2.0 * **s)
                .count();
            json!({
                "sensor": names[i],
                "depth_m": set.positions[i],
                "mean_sigma_k": sigma[i].mean,
                "max_abs_residual_k": residual[i].iter().fold(0.0f64, |m, r| m.max(r.abs())),
                "within_two_sigma": within as f64 / set.len() as f64,
            })
        })
        .collect();
    manifest.summary = json!({ "samples": set.len(), "sensors": sensors });
    finish(ctx, manifest, vec![timing])
}

/// Reads a manifest written by a previous command.
pub fn read_manifest(dir: &Path) -> CliResult<RunManifest> {
    RunManifest::read(dir)
}
