//! Spatial grids on the polynomial interval `[-1, 1]`.
//!
//! Every grid stores its nodes ascending and in `[-1, 1]`. The physical
//! (dimensionless) wall coordinate lives in `[0, 1]`; conversions happen only
//! where data enters or leaves the crate.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Uniform,
    ChebyshevLobatto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    kind: GridKind,
    nodes: Vec<f64>,
    n_intervals: usize,
}

/// Grid description used by the JSON documents; nodes are rebuilt on load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: GridKind,
    pub n_intervals: usize,
}

impl SpatialGrid {
    /// `n + 1` equispaced nodes on `[-1, 1]`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("uniform grid needs at least one interval"));
        }
        let nodes = (0..=n)
            .map(|i| {
                if i == n {
                    1.0
                } else {
                    -1.0 + 2.0 * i as f64 / n as f64
                }
            })
            .collect();
        Ok(Self {
            kind: GridKind::Uniform,
            nodes,
            n_intervals: n,
        })
    }

    /// Chebyshev points of the second kind, `cos(j pi / n)` for `j = 0..=n`,
    /// returned ascending.
    pub fn chebyshev_points(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("chebyshev grid needs at least one interval"));
        }
        // sin(pi (2i - n) / 2n) == -cos(i pi / n), and is exactly odd in i.
        let nodes = (0..=n)
            .map(|i| {
                let m = 2 * i as i64 - n as i64;
                (PI * m as f64 / (2 * n) as f64).sin()
            })
            .collect();
        Ok(Self {
            kind: GridKind::ChebyshevLobatto,
            nodes,
            n_intervals: n,
        })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        match spec.kind {
            GridKind::Uniform => Self::uniform(spec.n_intervals),
            GridKind::ChebyshevLobatto => Self::chebyshev_points(spec.n_intervals),
        }
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            kind: self.kind,
            n_intervals: self.n_intervals,
        }
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    /// Node coordinates mapped to the wall interval `[0, 1]`.
    pub fn physical_nodes(&self) -> Vec<f64> {
        self.nodes.iter().map(|&x| 0.5 * (x + 1.0)).collect()
    }

    /// Node spacing on `[0, 1]`, for uniform grids only.
    pub fn physical_spacing(&self) -> Option<f64> {
        match self.kind {
            GridKind::Uniform => Some(1.0 / self.n_intervals as f64),
            GridKind::ChebyshevLobatto => None,
        }
    }

    /// Piecewise-linear interpolation of `values` (sampled on this grid) at
    /// the nodes of `target`.
    pub fn interpolate_to(&self, values: &[f64], target: &SpatialGrid) -> Vec<f64> {
        target
            .nodes
            .iter()
            .map(|&x| interp_linear(&self.nodes, values, x))
            .collect()
    }
}

/// Linear interpolation on ascending abscissae with constant extrapolation.
pub(crate) fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let t = (x - x0) / (x1 - x0);
    (1.0 - t) * ys[i - 1] + t * ys[i]
}

/// Maps a wall coordinate in `[0, 1]` to `[-1, 1]`.
pub fn to_poly_interval(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("coordinate {x} outside [0, 1]")));
    }
    Ok(2.0 * x - 1.0)
}

/// Maps a polynomial coordinate in `[-1, 1]` back to `[0, 1]`.
pub fn from_poly_interval(x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(invalid(format!("coordinate {x} outside [-1, 1]")));
    }
    Ok(0.5 * (x + 1.0))
}
