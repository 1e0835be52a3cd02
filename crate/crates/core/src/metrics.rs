//! Error functionals and CPU-time ratios.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bases::{self, ApproximationBasis};
use crate::error::{check_len, invalid, Result};
use crate::fdm::FieldSeries;

/// Maximum over time of the per-step RMSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub value: f64,
    pub trace: Vec<f64>,
    pub argmax: usize,
}

impl ErrorReport {
    fn from_trace(trace: Vec<f64>) -> Self {
        let (argmax, value) = trace
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0), |best, (i, v)| if v > best.1 { (i, v) } else { best });
        Self { value, trace, argmax }
    }
}

pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (s / a.len() as f64).sqrt()
}

fn profiles_rmse(reference: &[Vec<f64>], candidate: &[Vec<f64>]) -> Result<ErrorReport> {
    check_len("time samples", reference.len(), candidate.len())?;
    if reference.is_empty() {
        return Err(invalid("cannot compare empty series"));
    }
    let mut trace = Vec::with_capacity(reference.len());
    for (r, c) in reference.iter().zip(candidate) {
        check_len("profile length", r.len(), c.len())?;
        trace.push(rmse(r, c));
    }
    Ok(ErrorReport::from_trace(trace))
}

pub fn max_rmse(reference: &FieldSeries, candidate: &FieldSeries) -> Result<ErrorReport> {
    if reference.grid != candidate.grid {
        return Err(invalid("series live on different grids"));
    }
    check_len("time samples", reference.len(), candidate.len())?;
    if reference
        .times
        .iter()
        .zip(&candidate.times)
        .any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
    {
        return Err(invalid("series have different time stamps"));
    }
    profiles_rmse(&reference.profiles, &candidate.profiles)
}

/// Projection error of the source profiles on `basis`.
pub fn mu(reference: &FieldSeries, basis: &ApproximationBasis) -> Result<ErrorReport> {
    let rec = reference
        .profiles
        .iter()
        .map(|p| basis.reconstruct(&basis.project(p)?))
        .collect::<Result<Vec<_>>>()?;
    profiles_rmse(&reference.profiles, &rec)
}

/// Projection error once the normalized coefficients are snapped to a grid
/// of spacing `delta_zeta`.
pub fn nu(reference: &FieldSeries, basis: &ApproximationBasis, delta_zeta: f64) -> Result<ErrorReport> {
    let ranges = basis
        .ranges()
        .ok_or_else(|| invalid("the basis has no coefficient ranges"))?;
    if !(delta_zeta > 0.0) {
        return Err(invalid(format!("coefficient spacing must be positive, got {delta_zeta}")));
    }
    let rec = reference
        .profiles
        .iter()
        .map(|p| {
            let z = bases::normalize(&basis.project(p)?, ranges)?;
            let q = bases::quantize(&z.values, delta_zeta);
            basis.reconstruct(&bases::denormalize(&q, ranges)?)
        })
        .collect::<Result<Vec<_>>>()?;
    profiles_rmse(&reference.profiles, &rec)
}

/// Error of a simulated series against the reference.
pub fn epsilon(reference: &FieldSeries, simulated: &FieldSeries) -> Result<ErrorReport> {
    max_rmse(reference, simulated)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpuRatio {
    pub t_cpu: f64,
    pub t0: f64,
    pub rho: f64,
}

impl CpuRatio {
    pub fn new(t_cpu: f64, t0: f64) -> Result<Self> {
        if !(t_cpu >= 0.0 && t0 > 0.0) {
            return Err(invalid(format!("invalid timing {t_cpu} / {t0}")));
        }
        Ok(Self {
            t_cpu,
            t0,
            rho: t_cpu / t0,
        })
    }
}

/// Wall-clock duration of one labelled block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub label: String,
    pub seconds: f64,
}

pub fn time_block<T>(label: &str, f: impl FnOnce() -> T) -> (T, Timing) {
    let start = Instant::now();
    let out = f();
    let elapsed: Duration = start.elapsed();
    (
        out,
        Timing {
            label: label.to_owned(),
            seconds: elapsed.as_secs_f64(),
        },
    )
}

/// Ratios against the slowest block, which gets `rho = 1`.
pub fn cpu_ratios(timings: &[Timing]) -> Result<Vec<CpuRatio>> {
    let t0 = timings.iter().map(|t| t.seconds).fold(0.0, f64::max);
    // a block can finish below the clock resolution
    let t0 = if t0 > 0.0 { t0 } else { f64::MIN_POSITIVE };
    timings.iter().map(|t| CpuRatio::new(t.seconds, t0)).collect()
}
