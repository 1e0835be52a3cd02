//! Wall definition, nondimensionalization and the per-step boundary value
//! problem obtained from implicit time discretization.
//!
//! Dimensionless conventions:
//!
//! * temperatures `v -> v / u0 - 1`, fluxes `q -> q L / (k u0)`;
//! * time `t -> t / t_ref` with `t_ref = c L^2 / k`, which pins `Fo = 1`;
//! * `x = 0` is the outside surface, `x = 1` the inside surface.
//!
//! Each implicit step turns into `y - a y'' = b` with
//! `y'(0) = Bi_out y - b_out` and `y'(1) = -Bi_in y + b_in`, where
//! `b_out = Bi_out u_out + q` and `b_in = Bi_in u_in`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, invalid, Result};
use crate::grid::SpatialGrid;

pub const KELVIN_OFFSET: f64 = 273.15;

pub fn celsius_to_kelvin(c: f64) -> f64 {
    c + KELVIN_OFFSET
}

pub fn kelvin_to_celsius(k: f64) -> f64 {
    k - KELVIN_OFFSET
}

/// A homogeneous wall layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallLayer {
    /// Thickness `L` (m).
    pub thickness: f64,
    /// Thermal conductivity `k` (W/m/K).
    pub conductivity: f64,
    /// Volumetric heat capacity `c` (J/m^3/K).
    pub heat_capacity: f64,
}

impl WallLayer {
    pub fn new(thickness: f64, conductivity: f64, heat_capacity: f64) -> Result<Self> {
        let w = Self {
            thickness,
            conductivity,
            heat_capacity,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("thickness", self.thickness),
            ("conductivity", self.conductivity),
            ("heat capacity", self.heat_capacity),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("wall {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvectiveEnvironment {
    /// Inside convective coefficient (W/m^2/K).
    pub h_in: f64,
    /// Outside convective coefficient (W/m^2/K).
    pub h_out: f64,
    /// Initial uniform temperature, also the reference temperature (K).
    pub u0: f64,
}

impl ConvectiveEnvironment {
    pub fn new(h_in: f64, h_out: f64, u0: f64) -> Result<Self> {
        let e = Self { h_in, h_out, u0 };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("h_in", self.h_in), ("h_out", self.h_out), ("u0", self.u0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessProblem {
    pub fourier: f64,
    pub bi_in: f64,
    pub bi_out: f64,
    /// Reference time (s).
    pub t_ref: f64,
    /// Dimensionless horizon.
    pub gamma: f64,
}

/// Builds the dimensionless problem for a wall exposed over `horizon` seconds.
pub fn nondimensionalize(
    wall: &WallLayer,
    env: &ConvectiveEnvironment,
    horizon: f64,
) -> Result<DimensionlessProblem> {
    wall.validate()?;
    env.validate()?;
    if !(horizon > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    let WallLayer {
        thickness: l,
        conductivity: k,
        heat_capacity: c,
    } = *wall;
    let t_ref = c * l * l / k;
    Ok(DimensionlessProblem {
        fourier: 1.0,
        bi_in: env.h_in * l / k,
        bi_out: env.h_out * l / k,
        t_ref,
        gamma: horizon / t_ref,
    })
}

/// Boundary signals sampled on a shared, strictly increasing time grid (s).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySignals {
    pub times: Vec<f64>,
    /// Outside air temperature (K).
    pub u_out: Vec<f64>,
    /// Inside air temperature (K).
    pub u_in: Vec<f64>,
    /// Net radiative flux on the outside surface (W/m^2).
    pub q: Vec<f64>,
}

impl BoundarySignals {
    pub fn new(times: Vec<f64>, u_out: Vec<f64>, u_in: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        check_len("u_out samples", times.len(), u_out.len())?;
        check_len("u_in samples", times.len(), u_in.len())?;
        check_len("q samples", times.len(), q.len())?;
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("signal time grid must be strictly increasing"));
        }
        Ok(Self {
            times,
            u_out,
            u_in,
            q,
        })
    }

    /// Samples closed-form signals on `times`.
    pub fn sample(
        times: &[f64],
        mut f: impl FnMut(f64) -> (f64, f64, f64),
    ) -> Result<Self> {
        let mut u_out = Vec::with_capacity(times.len());
        let mut u_in = Vec::with_capacity(times.len());
        let mut q = Vec::with_capacity(times.len());
        for &t in times {
            let (o, i, r) = f(t);
            u_out.push(o);
            u_in.push(i);
            q.push(r);
        }
        Self::new(times.to_vec(), u_out, u_in, q)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Boundary signals in dimensionless units, on a dimensionless time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionlessSignals {
    pub times: Vec<f64>,
    pub u_out: Vec<f64>,
    pub u_in: Vec<f64>,
    pub q: Vec<f64>,
}

impl DimensionlessSignals {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(b_in, b_out)` at sample `n`.
    pub fn boundary_coefficients(&self, problem: &DimensionlessProblem, n: usize) -> (f64, f64) {
        (
            problem.bi_in * self.u_in[n],
            problem.bi_out * self.u_out[n] + self.q[n],
        )
    }
}

pub fn dimensionless_temperature(v: f64, u0: f64) -> f64 {
    v / u0 - 1.0
}

pub fn dimensionless_flux(q: f64, wall: &WallLayer, u0: f64) -> f64 {
    q * wall.thickness / (wall.conductivity * u0)
}

pub fn dimensionless_signals(
    signals: &BoundarySignals,
    env: &ConvectiveEnvironment,
    wall: &WallLayer,
) -> Result<DimensionlessSignals> {
    env.validate()?;
    wall.validate()?;
    let t_ref = wall.heat_capacity * wall.thickness.powi(2) / wall.conductivity;
    let u0 = env.u0;
    Ok(DimensionlessSignals {
        times: signals.times.iter().map(|t| t / t_ref).collect(),
        u_out: signals
            .u_out
            .iter()
            .map(|&v| dimensionless_temperature(v, u0))
            .collect(),
        u_in: signals
            .u_in
            .iter()
            .map(|&v| dimensionless_temperature(v, u0))
            .collect(),
        q: signals
            .q
            .iter()
            .map(|&v| dimensionless_flux(v, wall, u0))
            .collect(),
    })
}

/// One implicit step written as a boundary value problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BvpInstance {
    pub a: f64,
    pub source: Vec<f64>,
    pub b_in: f64,
    pub b_out: f64,
}

/// Builds the step problem from the previous profile and the boundary data
/// at the new time level.
pub fn semi_discretize(
    problem: &DimensionlessProblem,
    grid: &SpatialGrid,
    prev: &[f64],
    dt: f64,
    u_out_n: f64,
    u_in_n: f64,
    q_n: f64,
) -> Result<BvpInstance> {
    if !(dt > 0.0) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    check_len("source field", grid.len(), prev.len())?;
    Ok(BvpInstance {
        a: dt * problem.fourier,
        source: prev.to_vec(),
        b_in: problem.bi_in * u_in_n,
        b_out: problem.bi_out * u_out_n + q_n,
    })
}

/// Maps a dimensionless field back to Kelvin.
pub fn redimensionalize(field: &[f64], u0: f64) -> Vec<f64> {
    field.iter().map(|&v| u0 * (v + 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn concrete() -> (WallLayer, ConvectiveEnvironment) {
        (
            WallLayer::new(0.1, 1.75, 2.2e6).unwrap(),
            ConvectiveEnvironment::new(8.7, 23.2, 293.15).unwrap(),
        )
    }

    #[test]
    fn concrete_wall_numbers() {
        let (wall, env) = concrete();
        let p = nondimensionalize(&wall, &env, 3.0 * 86400.0).unwrap();
        assert!((p.bi_in - 0.4971).abs() < 5e-5);
        assert!((p.bi_out - 1.32571).abs() < 5e-5);
        assert!((p.t_ref - 1.2571e4).abs() < 1.0);
        assert_eq!(p.fourier, 1.0);
    }

    #[test]
    fn unit_case_and_insulation() {
        let wall = WallLayer::new(1.0, 1.0, 1.0).unwrap();
        let env = ConvectiveEnvironment::new(1.0, 1.0, 300.0).unwrap();
        let p = nondimensionalize(&wall, &env, 0.5).unwrap();
        assert_eq!((p.bi_in, p.bi_out, p.t_ref), (1.0, 1.0, 1.0));
        // horizons shorter than t_ref are fine
        assert_eq!(p.gamma, 0.5);

        let eps = WallLayer::new(0.10, 0.04, 30e3).unwrap();
        let p = nondimensionalize(&eps, &env, 1.0).unwrap();
        assert!((p.t_ref - 7.5e3).abs() < 1e-9);
    }

    #[test]
    fn rejects_nonpositive_inputs() {
        assert!(WallLayer::new(0.0, 1.0, 1.0).is_err());
        assert!(WallLayer::new(1.0, -1.0, 1.0).is_err());
        assert!(ConvectiveEnvironment::new(1.0, 1.0, 0.0).is_err());
        let (wall, env) = concrete();
        assert!(nondimensionalize(&wall, &env, 0.0).is_err());
    }

    #[test]
    fn signal_mapping() {
        let (wall, env) = concrete();
        let s = BoundarySignals::new(
            vec![0.0, 60.0],
            vec![2.0 * env.u0, env.u0],
            vec![env.u0, env.u0],
            vec![0.0, 0.0],
        )
        .unwrap();
        let d = dimensionless_signals(&s, &env, &wall).unwrap();
        assert_eq!(d.u_out, vec![1.0, 0.0]);
        assert_eq!(d.u_in, vec![0.0, 0.0]);
        assert_eq!(d.q, vec![0.0, 0.0]);
        assert!(BoundarySignals::new(vec![1.0, 1.0], vec![0.0; 2], vec![0.0; 2], vec![0.0; 2]).is_err());
    }

    #[test]
    fn step_coefficients() {
        let (wall, env) = concrete();
        let p = nondimensionalize(&wall, &env, 1.0).unwrap();
        let g = SpatialGrid::uniform(4).unwrap();
        let prev = vec![0.0; 5];
        let inst = semi_discretize(&p, &g, &prev, 1e-3, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(inst.a, 1e-3);
        assert_eq!(inst.b_out, 0.0);
        assert!((inst.b_in - 0.4971).abs() < 5e-5);
        assert!(semi_discretize(&p, &g, &prev[..4], 1e-3, 0.0, 0.0, 0.0).is_err());
        assert!(semi_discretize(&p, &g, &prev, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn redimensionalize_values() {
        assert_eq!(redimensionalize(&[0.0, 1.0], 293.15), vec![293.15, 586.30]);
    }

    proptest! {
        #[test]
        fn constant_field_round_trip(v in 200.0f64..400.0, u0 in 250.0f64..320.0) {
            let d = dimensionless_temperature(v, u0);
            let back = redimensionalize(&[d], u0)[0];
            prop_assert!(((back - v) / v).abs() < 1e-12);
        }

        #[test]
        fn boundary_terms_are_linear(
            uo1 in -1.0f64..1.0, uo2 in -1.0f64..1.0,
            ui1 in -1.0f64..1.0, ui2 in -1.0f64..1.0,
            q1 in -1.0f64..1.0, q2 in -1.0f64..1.0,
            s in -3.0f64..3.0,
        ) {
            let (wall, env) = concrete();
            let p = nondimensionalize(&wall, &env, 1.0).unwrap();
            let g = SpatialGrid::uniform(2).unwrap();
            let z = vec![0.0; 3];
            let a = semi_discretize(&p, &g, &z, 1e-3, uo1, ui1, q1).unwrap();
            let b = semi_discretize(&p, &g, &z, 1e-3, uo2, ui2, q2).unwrap();
            let c = semi_discretize(&p, &g, &z, 1e-3, uo1 + s * uo2, ui1 + s * ui2, q1 + s * q2).unwrap();
            prop_assert!((c.b_out - (a.b_out + s * b.b_out)).abs() < 1e-12);
            prop_assert!((c.b_in - (a.b_in + s * b.b_in)).abs() < 1e-12);
        }
    }
}
