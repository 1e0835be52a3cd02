//! Implicit Euler finite differences for the dimensionless wall problem.
//!
//! Space is discretized with second-order central differences on a uniform
//! grid; Fourier (Robin) boundaries use a ghost node, which keeps the scheme
//! second order up to the boundary. Written row by row and scaled with the
//! trapezoid weights, the system reads
//!
//! ```text
//! w_i y_i + a (S y)_i + a Bi y_i [boundary rows] = w_i b_i + a g [boundary rows]
//! ```
//!
//! i.e. linear elements with a lumped mass, which is the discrete operator the
//! PGD solver reuses.

use std::path::Path;

use crate::error::{check_len, invalid, Error, Result};
use crate::grid::{GridKind, SpatialGrid};
use crate::io;
use crate::linalg::{trapezoid_weights, Tridiagonal, TridiagonalLu};
use crate::physics::{dimensionless_flux, BvpInstance, ConvectiveEnvironment, DimensionlessProblem, WallLayer};

pub const STEFAN_BOLTZMANN: f64 = 5.67e-8;

/// Temperature profiles over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSeries {
    pub grid: SpatialGrid,
    pub times: Vec<f64>,
    pub profiles: Vec<Vec<f64>>,
}

impl FieldSeries {
    pub fn new(grid: SpatialGrid, times: Vec<f64>, profiles: Vec<Vec<f64>>) -> Result<Self> {
        check_len("profiles", times.len(), profiles.len())?;
        for p in &profiles {
            check_len("profile length", grid.len(), p.len())?;
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("series times must be strictly increasing"));
        }
        Ok(Self {
            grid,
            times,
            profiles,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation of every profile onto `grid`.
    pub fn resample(&self, grid: &SpatialGrid) -> FieldSeries {
        FieldSeries {
            grid: grid.clone(),
            times: self.times.clone(),
            profiles: self
                .profiles
                .iter()
                .map(|p| self.grid.interpolate_to(p, grid))
                .collect(),
        }
    }

    /// Keeps the samples with `lo <= t <= hi` (with a small tolerance).
    pub fn window(&self, lo: f64, hi: f64) -> FieldSeries {
        let tol = 1e-9 * (hi.abs() + lo.abs()).max(1.0);
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.times[i] >= lo - tol && self.times[i] <= hi + tol)
            .collect();
        FieldSeries {
            grid: self.grid.clone(),
            times: keep.iter().map(|&i| self.times[i]).collect(),
            profiles: keep.iter().map(|&i| self.profiles[i].clone()).collect(),
        }
    }

    /// Time trace at the node nearest to the wall coordinate `x` in `[0, 1]`.
    pub fn trace_at(&self, x: f64) -> Vec<f64> {
        let phys = self.grid.physical_nodes();
        self.profiles
            .iter()
            .map(|p| crate::grid::interp_linear(&phys, p, x))
            .collect()
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> FieldSeries {
        FieldSeries {
            grid: self.grid.clone(),
            times: self.times.clone(),
            profiles: self
                .profiles
                .iter()
                .map(|p| p.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }

    /// CSV with a `time` column followed by one column per node; the header
    /// carries the wall coordinates in `[0, 1]`.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut header = vec!["time".to_string()];
        header.extend(self.grid.physical_nodes().iter().map(|x| format!("{x}")));
        let rows = self.times.iter().zip(&self.profiles).map(|(t, p)| {
            let mut r = Vec::with_capacity(p.len() + 1);
            r.push(*t);
            r.extend_from_slice(p);
            r
        });
        io::write_table(path, &header, rows)
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let table = io::read_table(path)?;
        let coords = table.header[1..]
            .iter()
            .map(|h| {
                h.parse::<f64>().map_err(|_| Error::Parse {
                    line: 1,
                    msg: format!("header coordinate '{h}' is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let grid = grid_from_coordinates(&coords)?;
        if table.rows.is_empty() {
            return Err(Error::Parse {
                line: 2,
                msg: "no data rows".into(),
            });
        }
        let times = table.rows.iter().map(|r| r[0]).collect();
        let profiles = table.rows.iter().map(|r| r[1..].to_vec()).collect();
        Self::new(grid, times, profiles)
    }
}

/// Recognizes a uniform or Chebyshev grid from wall coordinates in `[0, 1]`.
pub fn grid_from_coordinates(coords: &[f64]) -> Result<SpatialGrid> {
    if coords.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            msg: "need at least two node coordinates".into(),
        });
    }
    let n = coords.len() - 1;
    for g in [SpatialGrid::uniform(n)?, SpatialGrid::chebyshev_points(n)?] {
        if g
            .physical_nodes()
            .iter()
            .zip(coords)
            .all(|(a, b)| (a - b).abs() < 1e-9)
        {
            return Ok(g);
        }
    }
    Err(Error::Parse {
        line: 1,
        msg: "node coordinates match neither a uniform nor a Chebyshev grid".into(),
    })
}

/// Boundary condition on one side of the wall, with one value per time
/// sample of the run (index `n + 1` is used to reach time level `n + 1`).
#[derive(Debug, Clone, PartialEq)]
pub enum BcKind {
    /// `du/dn = -Bi (u - air) + flux` with `n` the outward normal and `flux`
    /// the incoming flux.
    Fourier {
        bi: f64,
        air: Vec<f64>,
        flux: Vec<f64>,
    },
    Dirichlet { surface: Vec<f64> },
}

impl BcKind {
    fn samples(&self) -> usize {
        match self {
            BcKind::Fourier { air, .. } => air.len(),
            BcKind::Dirichlet { surface } => surface.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        if let BcKind::Fourier { bi, air, flux } = self {
            if !(*bi > 0.0) {
                return Err(invalid(format!("Biot number must be positive, got {bi}")));
            }
            check_len("boundary flux samples", air.len(), flux.len())?;
        }
        Ok(())
    }

    fn row_type(&self) -> RowType {
        match self {
            BcKind::Fourier { bi, .. } => RowType::Robin(*bi),
            BcKind::Dirichlet { .. } => RowType::Fixed,
        }
    }

    /// Value entering the boundary row at sample `n`.
    fn forcing(&self, n: usize) -> f64 {
        match self {
            BcKind::Fourier { bi, air, flux } => bi * air[n] + flux[n],
            BcKind::Dirichlet { surface } => surface[n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum RowType {
    Robin(f64),
    Fixed,
}

/// Factorized implicit step `y - a y'' = b` on a uniform grid.
#[derive(Debug, Clone)]
pub struct StepOperator {
    a: f64,
    weights: Vec<f64>,
    left: RowType,
    right: RowType,
    lu: TridiagonalLu,
}

pub(crate) fn uniform_spacing(grid: &SpatialGrid) -> Result<f64> {
    if grid.kind() != GridKind::Uniform {
        return Err(invalid("finite differences need a uniform grid"));
    }
    if grid.len() < 3 {
        return Err(invalid("finite differences need at least three nodes"));
    }
    Ok(grid.physical_spacing().expect("uniform grid"))
}

/// Symmetric weak-form matrix for two Robin ends: lumped mass plus `a` times
/// stiffness plus the boundary terms.
pub(crate) fn robin_matrix(n: usize, h: f64, a: f64, bi_left: f64, bi_right: f64) -> Tridiagonal {
    let w = trapezoid_weights(n, h);
    let mut t = Tridiagonal::zeros(n);
    for i in 0..n {
        t.diag[i] = w[i];
    }
    let k = a / h;
    for i in 0..n - 1 {
        t.diag[i] += k;
        t.diag[i + 1] += k;
        t.lower[i] = -k;
        t.upper[i] = -k;
    }
    t.diag[0] += a * bi_left;
    t.diag[n - 1] += a * bi_right;
    t
}

impl StepOperator {
    pub(crate) fn new(grid: &SpatialGrid, a: f64, left: RowType, right: RowType) -> Result<Self> {
        if !(a > 0.0) {
            return Err(invalid(format!("step coefficient must be positive, got {a}")));
        }
        let h = uniform_spacing(grid)?;
        let n = grid.len();
        let bi = |r: RowType| match r {
            RowType::Robin(b) => b,
            RowType::Fixed => 0.0,
        };
        let mut t = robin_matrix(n, h, a, bi(left), bi(right));
        if left == RowType::Fixed {
            t.diag[0] = 1.0;
            t.upper[0] = 0.0;
        }
        if right == RowType::Fixed {
            t.diag[n - 1] = 1.0;
            t.lower[n - 2] = 0.0;
        }
        let lu = t
            .factorize()
            .map_err(|e| Error::Numerical(format!("step matrix: {e}")))?;
        Ok(Self {
            a,
            weights: trapezoid_weights(n, h),
            left,
            right,
            lu,
        })
    }

    /// Advances one step from `prev` with boundary forcings `g_left`,
    /// `g_right` (Robin: `Bi * air + flux`; fixed: the surface value).
    pub fn step(&self, prev: &[f64], g_left: f64, g_right: f64) -> Vec<f64> {
        let n = self.weights.len();
        let mut rhs: Vec<f64> = self.weights.iter().zip(prev).map(|(w, b)| w * b).collect();
        match self.left {
            RowType::Robin(_) => rhs[0] += self.a * g_left,
            RowType::Fixed => rhs[0] = g_left,
        }
        match self.right {
            RowType::Robin(_) => rhs[n - 1] += self.a * g_right,
            RowType::Fixed => rhs[n - 1] = g_right,
        }
        self.lu.solve_in_place(&mut rhs);
        rhs
    }
}

/// Marches `u^{n+1} - a u''^{n+1} = u^n` from `initial`; the number of steps
/// is one less than the number of boundary samples.
pub fn solve_transient(
    problem: &DimensionlessProblem,
    bc_left: &BcKind,
    bc_right: &BcKind,
    dt: f64,
    grid: &SpatialGrid,
    initial: &[f64],
) -> Result<FieldSeries> {
    if !(dt > 0.0) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    check_len("initial field", grid.len(), initial.len())?;
    bc_left.validate()?;
    bc_right.validate()?;
    let samples = bc_left.samples();
    check_len("boundary samples", samples, bc_right.samples())?;
    if samples == 0 {
        return Err(invalid("boundary signals are empty"));
    }
    let op = StepOperator::new(grid, dt * problem.fourier, bc_left.row_type(), bc_right.row_type())?;

    let mut profiles = Vec::with_capacity(samples);
    profiles.push(initial.to_vec());
    for n in 1..samples {
        let next = op.step(&profiles[n - 1], bc_left.forcing(n), bc_right.forcing(n));
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite value at step {n}")));
        }
        profiles.push(next);
    }
    let times = (0..samples).map(|n| n as f64 * dt).collect();
    FieldSeries::new(grid.clone(), times, profiles)
}

/// Solves `y - a y'' = b` with `y'(0) = Bi_out y - b_out` and
/// `y'(1) = -Bi_in y + b_in`.
pub fn solve_bvp(instance: &BvpInstance, bi_in: f64, bi_out: f64, grid: &SpatialGrid) -> Result<Vec<f64>> {
    check_len("source field", grid.len(), instance.source.len())?;
    if !(bi_in > 0.0 && bi_out > 0.0) {
        return Err(invalid("Biot numbers must be positive"));
    }
    let op = StepOperator::new(grid, instance.a, RowType::Robin(bi_out), RowType::Robin(bi_in))?;
    Ok(op.step(&instance.source, instance.b_out, instance.b_in))
}

/// Residual of the ghost-node discrete equations for a candidate `y`.
pub fn bvp_residual(
    instance: &BvpInstance,
    bi_in: f64,
    bi_out: f64,
    grid: &SpatialGrid,
    y: &[f64],
) -> Result<Vec<f64>> {
    let h = uniform_spacing(grid)?;
    let n = grid.len();
    check_len("candidate", n, y.len())?;
    let a = instance.a;
    let b = &instance.source;
    let mut r = vec![0.0; n];
    for i in 1..n - 1 {
        r[i] = y[i] - a * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h) - b[i];
    }
    let ghost_l = y[1] - 2.0 * h * (bi_out * y[0] - instance.b_out);
    r[0] = y[0] - a * (ghost_l - 2.0 * y[0] + y[1]) / (h * h) - b[0];
    let ghost_r = y[n - 2] + 2.0 * h * (-bi_in * y[n - 1] + instance.b_in);
    r[n - 1] = y[n - 1] - a * (y[n - 2] - 2.0 * y[n - 1] + ghost_r) / (h * h) - b[n - 1];
    Ok(r)
}

/// Net long-wave exchange of the inside surface at `t_surface` with the
/// surrounding walls (`u_w`) and the floor (`u_g`), all in Kelvin. Positive
/// when the surface is warmer than its surroundings.
pub fn qin_flux(
    t_surface: f64,
    u_w: f64,
    u_g: f64,
    f_w: f64,
    f_g: f64,
    eps_w: f64,
    eps_g: f64,
) -> Result<f64> {
    for (name, v) in [("surface", t_surface), ("walls", u_w), ("floor", u_g)] {
        if !(v > 0.0) {
            return Err(invalid(format!("{name} temperature must be positive Kelvin, got {v}")));
        }
    }
    let t4 = t_surface.powi(4);
    Ok(f_w * eps_w * STEFAN_BOLTZMANN * 4.0 * (t4 - u_w.powi(4))
        + f_g * eps_g * STEFAN_BOLTZMANN * (t4 - u_g.powi(4)))
}

/// Model error `e = u - u~` caused by dropping the inside radiative flux
/// `qin` (W/m^2, one value per time sample). Returned in Kelvin.
pub fn solve_model_error(
    problem: &DimensionlessProblem,
    wall: &WallLayer,
    env: &ConvectiveEnvironment,
    qin: &[f64],
    dt: f64,
    grid: &SpatialGrid,
) -> Result<FieldSeries> {
    let zeros = vec![0.0; qin.len()];
    let left = BcKind::Fourier {
        bi: problem.bi_out,
        air: zeros.clone(),
        flux: zeros.clone(),
    };
    let right = BcKind::Fourier {
        bi: problem.bi_in,
        air: zeros,
        flux: qin.iter().map(|&q| -dimensionless_flux(q, wall, env.u0)).collect(),
    };
    let e = solve_transient(problem, &left, &right, dt, grid, &vec![0.0; grid.len()])?;
    Ok(e.map_values(|v| v * env.u0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use std::f64::consts::PI;

    fn problem(bi_in: f64, bi_out: f64) -> DimensionlessProblem {
        DimensionlessProblem {
            fourier: 1.0,
            bi_in,
            bi_out,
            t_ref: 1.0,
            gamma: 1.0,
        }
    }

    fn fourier(bi: f64, air: f64, flux: f64, samples: usize) -> BcKind {
        BcKind::Fourier {
            bi,
            air: vec![air; samples],
            flux: vec![flux; samples],
        }
    }

    #[test]
    fn homogeneous_run_stays_zero() {
        let g = SpatialGrid::uniform(20).unwrap();
        let p = problem(0.5, 1.3);
        let s = solve_transient(&p, &fourier(1.3, 0.0, 0.0, 50), &fourier(0.5, 0.0, 0.0, 50), 1e-3, &g, &[0.0; 21]).unwrap();
        assert!(s.profiles.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn dirichlet_constant_is_steady() {
        let g = SpatialGrid::uniform(10).unwrap();
        let p = problem(1.0, 1.0);
        let c = 0.37;
        let bc = BcKind::Dirichlet { surface: vec![c; 200] };
        let s = solve_transient(&p, &bc, &bc, 1e-2, &g, &[c; 11]).unwrap();
        for prof in &s.profiles {
            for v in prof {
                assert!((v - c).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn steady_state_matches_two_film_profile() {
        let (bi_in, bi_out, u_out, u_in) = (0.4971, 1.3314, -0.05, 0.02);
        let g = SpatialGrid::uniform(40).unwrap();
        let p = problem(bi_in, bi_out);
        let samples = 400;
        let s = solve_transient(
            &p,
            &fourier(bi_out, u_out, 0.0, samples),
            &fourier(bi_in, u_in, 0.0, samples),
            0.1,
            &g,
            &[0.0; 41],
        )
        .unwrap();
        // series resistances 1/Bi_out + 1 + 1/Bi_in in dimensionless form
        let flux = (u_in - u_out) / (1.0 / bi_out + 1.0 + 1.0 / bi_in);
        let u0 = u_out + flux / bi_out;
        let last = s.profiles.last().unwrap();
        for (x, v) in g.physical_nodes().iter().zip(last) {
            assert!((v - (u0 + flux * x)).abs() < 1e-8, "{v} vs {}", u0 + flux * x);
        }
    }

    #[test]
    fn bvp_matches_one_transient_step_and_dense_solve() {
        let g = SpatialGrid::uniform(30).unwrap();
        let (bi_in, bi_out) = (0.7, 2.1);
        let prev: Vec<f64> = g.physical_nodes().iter().map(|x| (3.0 * x).sin() * 0.1).collect();
        let inst = BvpInstance {
            a: 2e-3,
            source: prev.clone(),
            b_in: bi_in * 0.03,
            b_out: bi_out * -0.02 + 0.01,
        };
        let y = solve_bvp(&inst, bi_in, bi_out, &g).unwrap();

        let p = problem(bi_in, bi_out);
        let s = solve_transient(&p, &fourier(bi_out, -0.02, 0.01, 2), &fourier(bi_in, 0.03, 0.0, 2), 2e-3, &g, &prev).unwrap();
        for (a, b) in y.iter().zip(&s.profiles[1]) {
            assert!((a - b).abs() < 1e-12);
        }

        // dense assembly of the ghost-node equations
        let n = g.len();
        let h = 1.0 / 30.0;
        let c = inst.a / (h * h);
        let mut m = DMatrix::zeros(n, n);
        let mut rhs = DVector::from_vec(prev.clone());
        for i in 1..n - 1 {
            m[(i, i - 1)] = -c;
            m[(i, i)] = 1.0 + 2.0 * c;
            m[(i, i + 1)] = -c;
        }
        m[(0, 0)] = 1.0 + 2.0 * c + 2.0 * h * c * bi_out;
        m[(0, 1)] = -2.0 * c;
        rhs[0] += 2.0 * h * c * inst.b_out;
        m[(n - 1, n - 1)] = 1.0 + 2.0 * c + 2.0 * h * c * bi_in;
        m[(n - 1, n - 2)] = -2.0 * c;
        rhs[n - 1] += 2.0 * h * c * inst.b_in;
        let dense = m.lu().solve(&rhs).unwrap();
        for i in 0..n {
            assert!((dense[i] - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_data_gives_zero_and_large_a_residual_is_small() {
        let g = SpatialGrid::uniform(50).unwrap();
        let zero = BvpInstance {
            a: 1e-3,
            source: vec![0.0; 51],
            b_in: 0.0,
            b_out: 0.0,
        };
        assert!(solve_bvp(&zero, 0.5, 1.3, &g).unwrap().iter().all(|&v| v == 0.0));

        let src: Vec<f64> = g.nodes().iter().map(|x| 1.0 + x * x).collect();
        let inst = BvpInstance {
            a: 1e6,
            source: src,
            b_in: 0.0,
            b_out: 0.0,
        };
        let y = solve_bvp(&inst, 0.5, 1.3, &g).unwrap();
        let r = bvp_residual(&inst, 0.5, 1.3, &g, &y).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-10), "{:?}", r.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }

    #[test]
    fn discrete_maximum_principle() {
        let g = SpatialGrid::uniform(60).unwrap();
        let src: Vec<f64> = g.nodes().iter().map(|x| (5.0 * x).cos().abs() + if *x > 0.3 { 1.0 } else { 0.0 }).collect();
        let inst = BvpInstance {
            a: 0.05,
            source: src,
            b_in: 0.0,
            b_out: 0.0,
        };
        assert!(solve_bvp(&inst, 0.5, 1.3, &g).unwrap().iter().all(|&v| v >= 0.0));
    }

    fn manufactured_error(n: usize) -> f64 {
        let g = SpatialGrid::uniform(n).unwrap();
        let (a, bi_in, bi_out) = (0.05, 0.5, 1.3);
        // y = cos(pi xh), xh = 2x - 1, so y'' = -4 pi^2 y in wall coordinates
        let exact: Vec<f64> = g.nodes().iter().map(|xh| (PI * xh).cos()).collect();
        let source = exact.iter().map(|y| y + a * 4.0 * PI * PI * y).collect();
        // y'(0) = y'(1) = 0
        let inst = BvpInstance {
            a,
            source,
            b_in: bi_in * -1.0,
            b_out: bi_out * -1.0,
        };
        let y = solve_bvp(&inst, bi_in, bi_out, &g).unwrap();
        y.iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    #[test]
    fn manufactured_solution_converges_second_order() {
        let ns = [20, 40, 80, 160];
        let errs: Vec<f64> = ns.iter().map(|&n| manufactured_error(n)).collect();
        for w in errs.windows(2) {
            let slope = (w[1] / w[0]).log2();
            assert!((slope + 2.0).abs() < 0.2, "slope {slope}");
        }
    }

    #[test]
    fn first_order_in_time() {
        let g = SpatialGrid::uniform(40).unwrap();
        let p = problem(0.5, 1.3);
        let horizon = 0.4;
        let run = |dt: f64| {
            let steps = (horizon / dt).round() as usize;
            let t: Vec<f64> = (0..=steps).map(|n| n as f64 * dt).collect();
            let left = BcKind::Fourier {
                bi: 1.3,
                air: t.iter().map(|t| 0.1 * (6.0 * t).sin()).collect(),
                flux: vec![0.0; steps + 1],
            };
            let right = fourier(0.5, 0.0, 0.0, steps + 1);
            solve_transient(&p, &left, &right, dt, &g, &[0.0; 41]).unwrap().profiles.pop().unwrap()
        };
        let fine = run(1e-5);
        let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&dt| run(dt).iter().zip(&fine).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
            .collect();
        let slope = (errs[2] / errs[0]).log2() / -2.0;
        assert!((slope - 1.0).abs() < 0.2, "slope {slope}");
    }

    #[test]
    fn qin_values() {
        assert_eq!(qin_flux(293.15, 293.15, 293.15, 0.2, 0.2, 0.9, 0.9).unwrap(), 0.0);
        let q = qin_flux(295.15, 293.15, 296.15, 0.2, 0.2, 0.9, 0.9).unwrap();
        let expect = 0.2 * 0.9 * 5.67e-8 * (4.0 * (295.15f64.powi(4) - 293.15f64.powi(4)) + (295.15f64.powi(4) - 296.15f64.powi(4)));
        assert!((q - expect).abs() < 1e-12);
        assert!(q > 0.0);
        assert!(qin_flux(-1.0, 293.0, 293.0, 0.2, 0.2, 0.9, 0.9).is_err());
    }

    #[test]
    fn model_error_vanishes_without_flux() {
        let g = SpatialGrid::uniform(20).unwrap();
        let wall = WallLayer::new(0.1, 1.75, 2.2e6).unwrap();
        let env = ConvectiveEnvironment::new(8.7, 23.2, 293.15).unwrap();
        let p = crate::physics::nondimensionalize(&wall, &env, 1e4).unwrap();
        let e = solve_model_error(&p, &wall, &env, &[0.0; 30], 1e-3, &g).unwrap();
        assert!(e.profiles.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn series_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let g = SpatialGrid::uniform(4).unwrap();
        let s = FieldSeries::new(g, vec![0.0, 0.5], vec![vec![0.1, 0.2, 0.3, 0.4, 0.5], vec![1.0 / 3.0; 5]]).unwrap();
        s.write_csv(&path).unwrap();
        assert_eq!(FieldSeries::read_csv(&path).unwrap(), s);
    }
}
