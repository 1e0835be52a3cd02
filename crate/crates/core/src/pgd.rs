//! Separated-representation solution of the parametric step problem.
//!
//! The unknown `u(x, b_in, b_out, zeta_bar_1..zeta_bar_N)` solves, for every
//! parameter tuple, the weak form of `y - a y'' = b` with
//! `b = sum_j Psi_j (min_j + (max_j - min_j) zeta_bar_j)`. It is approximated
//! by `sum_m X_m(x) E_m(b_in) F_m(b_out) prod_j G_m^j(zeta_bar_j)`, built one
//! product at a time. Each product is found by alternating directions: every
//! factor is updated by its own small Galerkin problem with the others frozen.
//!
//! In space the discrete operator is the one of [`crate::fdm`]; parameter
//! integrals use trapezoid quadrature on uniform grids.

use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bases::{self, ApproximationBasis, BasisDocument};
use crate::error::{check_len, invalid, Error, Result};
use crate::fdm::{robin_matrix, uniform_spacing, FieldSeries, RowType, StepOperator};
use crate::grid::SpatialGrid;
use crate::linalg::{dot, trapezoid_weights, weighted_dot, TridiagonalLu};
use crate::physics::{DimensionlessProblem, DimensionlessSignals};

pub const FORMAT_VERSION: u32 = 1;

/// Uniform grid `lo, lo + delta, ...` over a parameter interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterDomain {
    pub lo: f64,
    pub hi: f64,
    pub delta: f64,
}

impl ParameterDomain {
    pub fn new(lo: f64, hi: f64, delta: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(format!("parameter domain needs lo < hi, got [{lo}, {hi}]")));
        }
        if !(delta > 0.0) {
            return Err(invalid(format!("parameter spacing must be positive, got {delta}")));
        }
        let d = Self { lo, hi, delta };
        if d.len() < 2 {
            return Err(invalid(format!(
                "spacing {delta} leaves fewer than two nodes in [{lo}, {hi}]"
            )));
        }
        Ok(d)
    }

    /// The unit interval used for normalized coefficients.
    pub fn unit(delta: f64) -> Result<Self> {
        Self::new(0.0, 1.0, delta)
    }

    /// `[min, max]` widened by `margin` times its width on each side, then
    /// extended upward to a whole number of cells.
    pub fn covering(min: f64, max: f64, margin: f64, delta: f64) -> Result<Self> {
        if !(min <= max) || !(margin >= 0.0) || !(delta > 0.0) {
            return Err(invalid(format!(
                "cannot cover [{min}, {max}] with margin {margin} and spacing {delta}"
            )));
        }
        let pad = (margin * (max - min)).max(0.5 * delta);
        let lo = min - pad;
        let cells = ((max + pad - lo) / delta).ceil().max(1.0);
        Self::new(lo, lo + cells * delta, delta)
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.delta + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.delta
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    fn weights(&self) -> Vec<f64> {
        trapezoid_weights(self.len(), self.delta)
    }

    /// Cell index and weight of the right node for `v`, with `v` clamped.
    fn locate(&self, v: f64) -> (usize, f64, bool) {
        let last = self.len() - 1;
        let top = self.node(last);
        let clamped = v < self.lo || v > top;
        let s = ((v.clamp(self.lo, top) - self.lo) / self.delta).max(0.0);
        let k = (s.floor() as usize).min(last - 1);
        (k, (s - k as f64).clamp(0.0, 1.0), clamped)
    }
}

/// All parameter domains of a model, `zeta` being one per basis mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgdDomains {
    pub b_in: ParameterDomain,
    pub b_out: ParameterDomain,
    pub zeta: Vec<ParameterDomain>,
}

impl PgdDomains {
    /// Boundary domains as given; normalized coefficients on `[0, 1]` at
    /// spacing `delta_zeta`.
    pub fn with_unit_zeta(b_in: ParameterDomain, b_out: ParameterDomain, n: usize, delta_zeta: f64) -> Result<Self> {
        let z = ParameterDomain::unit(delta_zeta)?;
        Ok(Self {
            b_in,
            b_out,
            zeta: vec![z; n],
        })
    }

    fn all(&self) -> Vec<ParameterDomain> {
        let mut v = vec![self.b_in, self.b_out];
        v.extend(self.zeta.iter().copied());
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoppingCriteria {
    pub eps_fixed_point: f64,
    pub eps_enrichment: f64,
    pub max_fixed_point_iters: usize,
    pub max_modes: usize,
}

impl Default for StoppingCriteria {
    fn default() -> Self {
        Self {
            eps_fixed_point: 1e-6,
            eps_enrichment: 1e-8,
            max_fixed_point_iters: 100,
            max_modes: 1000,
        }
    }
}

impl StoppingCriteria {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("fixed point tolerance", self.eps_fixed_point),
            ("enrichment tolerance", self.eps_enrichment),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.max_fixed_point_iters == 0 || self.max_modes == 0 {
            return Err(invalid("iteration caps must be at least 1"));
        }
        Ok(())
    }
}

/// Condition on one face of the wall. A Robin edge is driven by
/// `b = Bi * air + flux`; a Dirichlet edge by the surface value itself and is
/// imposed weakly through a penalty Biot number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Edge {
    Robin { bi: f64 },
    Dirichlet,
}

pub const DIRICHLET_PENALTY: f64 = 1e7;

impl Edge {
    fn bi(self) -> f64 {
        match self {
            Edge::Robin { bi } => bi,
            Edge::Dirichlet => DIRICHLET_PENALTY,
        }
    }

    /// Factor between the edge parameter and the boundary load.
    fn load(self) -> f64 {
        match self {
            Edge::Robin { .. } => 1.0,
            Edge::Dirichlet => DIRICHLET_PENALTY,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Edge::Robin { bi } if !(bi > 0.0 && bi.is_finite()) => {
                Err(invalid(format!("Biot number must be positive, got {bi}")))
            }
            _ => Ok(()),
        }
    }
}

/// One separated product; `factors[0]` is over `b_in`, `factors[1]` over
/// `b_out`, `factors[2 + j]` over `zeta_bar_j`. Each parameter factor is
/// affine in its coordinate, `f(z) = c[0] + c[1] * z`, and is stored by its
/// two coefficients; its table on the domain nodes is generated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct PgdMode {
    pub x: Vec<f64>,
    pub factors: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildMetadata {
    pub seed: u64,
    pub criteria: StoppingCriteria,
    /// Alternating-direction sweeps spent on each mode.
    pub iterations: Vec<usize>,
    /// Whether each mode met the fixed-point tolerance before the cap.
    pub converged: Vec<bool>,
    /// Spatial L2 norm of each mode.
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Linear,
    /// Value at the closest tabulated node.
    Nearest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgdModel {
    pub a: f64,
    pub inside: Edge,
    pub outside: Edge,
    pub domains: PgdDomains,
    pub basis: ApproximationBasis,
    pub modes: Vec<PgdMode>,
    pub meta: BuildMetadata,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub field: Vec<f64>,
    /// Number of parameters that fell outside their domain.
    pub clamped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub series: FieldSeries,
    /// Coefficients clamped during normalization, summed over steps.
    pub clamped_coefficients: usize,
    /// Parameters clamped to their domains, summed over steps.
    pub clamped_parameters: usize,
}

/// Affine function `c[0] + c[1] * z` of a parameter coordinate.
type Affine = [f64; 2];

const ONES: Affine = [1.0, 0.0];
const COORD: Affine = [0.0, 1.0];

/// A separated right-hand-side term: spatial load vector and, per
/// parameter dimension, either a constant or the coordinate itself.
struct LoadTerm {
    x: Vec<f64>,
    p: Vec<Affine>,
}

/// Trapezoid Gram matrix of `{1, z}` on a parameter grid.
struct Dim {
    nodes: Vec<f64>,
    q: Vec<f64>,
    g: [[f64; 2]; 2],
}

impl Dim {
    fn new(d: &ParameterDomain) -> Self {
        let nodes = d.nodes();
        let q = d.weights();
        let g00 = q.iter().sum();
        let g01 = weighted_dot(&q, &nodes, &vec![1.0; nodes.len()]);
        let g11 = weighted_dot(&q, &nodes, &nodes);
        Self {
            nodes,
            q,
            g: [[g00, g01], [g01, g11]],
        }
    }

    fn inner(&self, a: &Affine, b: &Affine) -> f64 {
        a[0] * (self.g[0][0] * b[0] + self.g[0][1] * b[1]) + a[1] * (self.g[1][0] * b[0] + self.g[1][1] * b[1])
    }
}

/// Parameter factor of the product being computed. Before its first update
/// it holds the random start; every update is a combination of `1`, `z` and
/// earlier factors, so from then on it is affine.
enum Factor {
    Start { moments: Affine, sq: f64 },
    Affine(Affine),
}

impl Factor {
    fn random(dim: &Dim, rng: &mut ChaCha8Rng) -> Self {
        let mut values: Vec<f64> = (0..dim.nodes.len()).map(|_| rng.gen::<f64>()).collect();
        let n = weighted_dot(&dim.q, &values, &values).sqrt();
        values.iter_mut().for_each(|v| *v /= n);
        let moments = [dot(&dim.q, &values), weighted_dot(&dim.q, &dim.nodes, &values)];
        let sq = weighted_dot(&dim.q, &values, &values);
        Factor::Start { moments, sq }
    }

    fn inner_affine(&self, dim: &Dim, b: &Affine) -> f64 {
        match self {
            Factor::Start { moments, .. } => moments[0] * b[0] + moments[1] * b[1],
            Factor::Affine(a) => dim.inner(a, b),
        }
    }

    fn self_inner(&self, dim: &Dim) -> f64 {
        match self {
            Factor::Start { sq, .. } => *sq,
            Factor::Affine(a) => dim.inner(a, a),
        }
    }
}

fn load_terms(basis: &ApproximationBasis, a: f64, edges: (Edge, Edge), w: &[f64], n_dims: usize) -> Result<Vec<LoadTerm>> {
    let ranges = basis
        .ranges()
        .ok_or_else(|| invalid("the basis needs coefficient ranges to build a model"))?;
    let nx = w.len();
    let ones = vec![ONES; n_dims];
    let mut terms = Vec::with_capacity(basis.n_modes() + 3);

    let mut offset = vec![0.0; nx];
    for (j, m) in basis.modes().iter().enumerate() {
        for i in 0..nx {
            offset[i] += ranges.min[j] * m[i];
        }
    }
    terms.push(LoadTerm {
        x: offset.iter().zip(w).map(|(b, w)| b * w).collect(),
        p: ones.clone(),
    });
    for (j, m) in basis.modes().iter().enumerate() {
        let width = ranges.width(j);
        let mut p = ones.clone();
        p[2 + j] = COORD;
        terms.push(LoadTerm {
            x: m.iter().zip(w).map(|(v, w)| v * w * width).collect(),
            p,
        });
    }
    let mut inside = vec![0.0; nx];
    inside[nx - 1] = a * edges.0.load();
    let mut p = ones.clone();
    p[0] = COORD;
    terms.push(LoadTerm { x: inside, p });
    let mut outside = vec![0.0; nx];
    outside[0] = a * edges.1.load();
    let mut p = ones;
    p[1] = COORD;
    terms.push(LoadTerm { x: outside, p });
    Ok(terms)
}

/// Greedy construction of the separated solution for two Robin faces.
pub fn build(
    a: f64,
    bi_in: f64,
    bi_out: f64,
    basis: &ApproximationBasis,
    domains: &PgdDomains,
    criteria: &StoppingCriteria,
    seed: u64,
) -> Result<PgdModel> {
    build_with_edges(a, Edge::Robin { bi: bi_in }, Edge::Robin { bi: bi_out }, basis, domains, criteria, seed)
}

pub fn build_with_edges(
    a: f64,
    inside: Edge,
    outside: Edge,
    basis: &ApproximationBasis,
    domains: &PgdDomains,
    criteria: &StoppingCriteria,
    seed: u64,
) -> Result<PgdModel> {
    criteria.validate()?;
    if !(a > 0.0) {
        return Err(invalid(format!("step coefficient must be positive, got {a}")));
    }
    inside.validate()?;
    outside.validate()?;
    check_len("coefficient domains", basis.n_modes(), domains.zeta.len())?;
    let grid = basis.grid();
    let h = uniform_spacing(grid)?;
    let nx = grid.len();
    let w = trapezoid_weights(nx, h);
    let k = robin_matrix(nx, h, a, outside.bi(), inside.bi());
    let lu: TridiagonalLu = k
        .factorize()
        .map_err(|e| Error::Numerical(format!("spatial operator: {e}")))?;

    let dims: Vec<Dim> = domains.all().iter().map(Dim::new).collect();
    let n_dims = dims.len();
    let terms = load_terms(basis, a, (inside, outside), &w, n_dims)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // accepted products: spatial factor, its image under K, affine factors
    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut kxs: Vec<Vec<f64>> = Vec::new();
    let mut coeffs: Vec<Vec<Affine>> = Vec::new();
    let mut meta = BuildMetadata {
        seed,
        criteria: *criteria,
        iterations: Vec::new(),
        converged: Vec::new(),
        amplitudes: Vec::new(),
    };

    while xs.len() < criteria.max_modes {
        let mut s: Vec<Factor> = dims.iter().map(|d| Factor::random(d, &mut rng)).collect();
        // term_dots[t][p] = <f_t^p, s_p>, mode_dots[m][p] = <S_m^p, s_p>
        let mut term_dots = vec![vec![0.0; n_dims]; terms.len()];
        let mut mode_dots = vec![vec![0.0; n_dims]; xs.len()];
        let mut self_dots = vec![0.0; n_dims];
        let refresh = |p: usize, f: &Factor, term_dots: &mut [Vec<f64>], mode_dots: &mut [Vec<f64>], self_dots: &mut [f64]| {
            for (t, term) in terms.iter().enumerate() {
                term_dots[t][p] = f.inner_affine(&dims[p], &term.p[p]);
            }
            for (m, c) in coeffs.iter().enumerate() {
                mode_dots[m][p] = f.inner_affine(&dims[p], &c[p]);
            }
            self_dots[p] = f.self_inner(&dims[p]);
        };
        for p in 0..n_dims {
            refresh(p, &s[p], &mut term_dots, &mut mode_dots, &mut self_dots);
        }

        let mut x_prev: Option<Vec<f64>> = None;
        let mut x = vec![0.0; nx];
        let mut iterations = 0;
        let mut converged = false;
        let mut degenerate = false;
        for it in 0..=criteria.max_fixed_point_iters {
            // spatial factor: alpha K X = sum_t c_t f_t^x - sum_m c_m K X_m
            let alpha: f64 = self_dots.iter().product();
            let mut rhs = vec![0.0; nx];
            for (t, term) in terms.iter().enumerate() {
                let c: f64 = term_dots[t].iter().product();
                for i in 0..nx {
                    rhs[i] += c * term.x[i];
                }
            }
            for (m, km) in kxs.iter().enumerate() {
                let c: f64 = mode_dots[m].iter().product();
                for i in 0..nx {
                    rhs[i] -= c * km[i];
                }
            }
            lu.solve_in_place(&mut rhs);
            rhs.iter_mut().for_each(|v| *v /= alpha);
            x = rhs;
            iterations = it;

            if let Some(prev) = &x_prev {
                let nrm = dot(&x, &x).sqrt();
                let diff = x.iter().zip(prev).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                if nrm == 0.0 || diff <= criteria.eps_fixed_point * nrm {
                    converged = true;
                    break;
                }
            }
            if it == criteria.max_fixed_point_iters {
                break;
            }

            let kx = k.mul_vec(&x);
            let xkx = dot(&x, &kx);
            if !(xkx > 0.0) {
                degenerate = true;
                break;
            }
            let x_terms: Vec<f64> = terms.iter().map(|t| dot(&x, &t.x)).collect();
            let x_modes: Vec<f64> = xs.iter().map(|xm| dot(&kx, xm)).collect();

            for p in 0..n_dims {
                let others = |row: &[f64]| -> f64 {
                    row.iter()
                        .enumerate()
                        .filter(|&(q, _)| q != p)
                        .map(|(_, v)| v)
                        .product()
                };
                let denom = xkx * others(&self_dots);
                let mut c = [0.0; 2];
                for (t, term) in terms.iter().enumerate() {
                    let v = x_terms[t] * others(&term_dots[t]);
                    c[0] += v * term.p[p][0];
                    c[1] += v * term.p[p][1];
                }
                for (m, cm) in coeffs.iter().enumerate() {
                    let v = x_modes[m] * others(&mode_dots[m]);
                    c[0] -= v * cm[p][0];
                    c[1] -= v * cm[p][1];
                }
                // the update is c / denom; only its direction is kept
                let n = dims[p].inner(&c, &c).sqrt();
                if !(n > 0.0 && n.is_finite() && denom != 0.0) {
                    degenerate = true;
                    break;
                }
                let scale = denom.signum() / n;
                s[p] = Factor::Affine([c[0] * scale, c[1] * scale]);
                refresh(p, &s[p], &mut term_dots, &mut mode_dots, &mut self_dots);
            }
            if degenerate {
                break;
            }
            x_prev = Some(x.clone());
        }

        let amp = weighted_dot(&w, &x, &x).sqrt();
        let first = meta.amplitudes.first().copied();
        if degenerate || !(amp > 0.0) || !amp.is_finite() {
            if xs.is_empty() {
                // homogeneous problem: keep a single zero product
                xs.push(vec![0.0; nx]);
                coeffs.push(vec![ONES; n_dims]);
                meta.iterations.push(iterations);
                meta.converged.push(converged);
                meta.amplitudes.push(0.0);
            }
            break;
        }
        if !converged {
            log::debug!(
                "mode {} did not reach the fixed-point tolerance in {} sweeps",
                xs.len() + 1,
                criteria.max_fixed_point_iters
            );
        }
        let c: Vec<Affine> = s
            .iter()
            .map(|f| match f {
                Factor::Affine(c) => *c,
                Factor::Start { .. } => unreachable!("every factor is updated before acceptance"),
            })
            .collect();
        kxs.push(k.mul_vec(&x));
        xs.push(x);
        coeffs.push(c);
        meta.iterations.push(iterations);
        meta.converged.push(converged);
        meta.amplitudes.push(amp);
        if let Some(a1) = first {
            if amp < criteria.eps_enrichment * a1 {
                break;
            }
        }
    }

    let capped = meta.converged.iter().filter(|&&c| !c).count();
    if capped > 0 {
        log::info!(
            "{capped} of {} modes stopped at the cap of {} alternating-direction sweeps",
            meta.converged.len(),
            criteria.max_fixed_point_iters
        );
    }
    if xs.len() == criteria.max_modes {
        log::warn!("enrichment stopped at the cap of {} modes", criteria.max_modes);
    }
    let modes = xs
        .into_iter()
        .zip(coeffs)
        .map(|(x, factors)| PgdMode { x, factors })
        .collect();
    Ok(PgdModel {
        a,
        inside,
        outside,
        domains: domains.clone(),
        basis: basis.clone(),
        modes,
        meta,
    })
}

impl PgdModel {
    pub fn grid(&self) -> &SpatialGrid {
        self.basis.grid()
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Values of factor `dim` of mode `m` on its domain nodes.
    pub fn factor_table(&self, m: usize, dim: usize) -> Result<Vec<f64>> {
        let mode = self
            .modes
            .get(m)
            .ok_or_else(|| invalid(format!("mode {m} out of range")))?;
        let domains = self.domains.all();
        let d = domains
            .get(dim)
            .ok_or_else(|| invalid(format!("parameter dimension {dim} out of range")))?;
        let c = mode.factors[dim];
        Ok(d.nodes().iter().map(|z| c[0] + c[1] * z).collect())
    }

    /// The same model keeping only its first `m` products.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.n_modes() {
            return Err(invalid(format!("cannot keep {m} of {} modes", self.n_modes())));
        }
        let mut out = self.clone();
        out.modes.truncate(m);
        Ok(out)
    }

    /// Sum of the tabulated products at one parameter tuple.
    pub fn evaluate(&self, b_in: f64, b_out: f64, zeta_bar: &[f64], interp: Interpolation) -> Result<Evaluation> {
        check_len("normalized coefficients", self.domains.zeta.len(), zeta_bar.len())?;
        let mut params = Vec::with_capacity(zeta_bar.len() + 2);
        params.push(b_in);
        params.push(b_out);
        params.extend_from_slice(zeta_bar);
        let mut clamped = 0;
        let domains = self.domains.all();
        let stencils: Vec<(usize, f64)> = domains
            .iter()
            .zip(&params)
            .map(|(d, &v)| {
                let (k, t, c) = d.locate(v);
                clamped += c as usize;
                match interp {
                    Interpolation::Linear => (k, t),
                    Interpolation::Nearest => (k + (t >= 0.5) as usize, 0.0),
                }
            })
            .collect();
        let nx = self.grid().len();
        let mut field = vec![0.0; nx];
        for mode in &self.modes {
            let mut c = 1.0;
            for ((f, &(k, t)), d) in mode.factors.iter().zip(&stencils).zip(&domains) {
                let at = |k: usize| f[0] + f[1] * d.node(k);
                c *= if t == 0.0 { at(k) } else { (1.0 - t) * at(k) + t * at(k + 1) };
            }
            for (o, x) in field.iter_mut().zip(&mode.x) {
                *o += c * x;
            }
        }
        Ok(Evaluation { field, clamped })
    }

    /// Full-order solution of the step problem the table approximates, with
    /// Dirichlet edges imposed exactly.
    pub fn oracle(&self, b_in: f64, b_out: f64, zeta_bar: &[f64]) -> Result<Vec<f64>> {
        check_len("normalized coefficients", self.domains.zeta.len(), zeta_bar.len())?;
        let ranges = self
            .basis
            .ranges()
            .ok_or_else(|| invalid("model basis has no coefficient ranges"))?;
        let source = self.basis.reconstruct(&bases::denormalize(zeta_bar, ranges)?)?;
        let row = |e: Edge| match e {
            Edge::Robin { bi } => RowType::Robin(bi),
            Edge::Dirichlet => RowType::Fixed,
        };
        let op = StepOperator::new(self.grid(), self.a, row(self.outside), row(self.inside))?;
        Ok(op.step(&source, b_out, b_in))
    }

    /// Online time marching for two Robin faces driven by `signals`; the
    /// step to sample `n` reads the boundary data at sample `n`.
    pub fn simulate(
        &self,
        problem: &DimensionlessProblem,
        signals: &DimensionlessSignals,
        dt: f64,
        initial: &[f64],
        interp: Interpolation,
    ) -> Result<Simulation> {
        if !(dt > 0.0) {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        let a = dt * problem.fourier;
        if (a - self.a).abs() > 1e-9 * self.a {
            return Err(invalid(format!(
                "model was built for a = {}, simulation asks for {a}",
                self.a
            )));
        }
        let (b_in, b_out): (Vec<f64>, Vec<f64>) = (0..signals.len())
            .map(|n| signals.boundary_coefficients(problem, n))
            .unzip();
        self.simulate_driven(&b_in, &b_out, dt, initial, interp)
    }

    /// Online time marching: project, normalize, quantize, read the table.
    /// `inside[n]`, `outside[n]` are the edge parameters at sample `n`.
    pub fn simulate_driven(
        &self,
        inside: &[f64],
        outside: &[f64],
        dt: f64,
        initial: &[f64],
        interp: Interpolation,
    ) -> Result<Simulation> {
        let grid = self.grid();
        check_len("initial field", grid.len(), initial.len())?;
        check_len("boundary samples", inside.len(), outside.len())?;
        if inside.is_empty() {
            return Err(invalid("boundary signals are empty"));
        }
        let ranges = self
            .basis
            .ranges()
            .ok_or_else(|| invalid("model basis has no coefficient ranges"))?;
        let deltas: Vec<f64> = self.domains.zeta.iter().map(|d| d.delta).collect();

        let mut profiles = Vec::with_capacity(inside.len());
        profiles.push(initial.to_vec());
        let (mut clamped_coefficients, mut clamped_parameters) = (0, 0);
        for n in 1..inside.len() {
            let zeta = self.basis.project(&profiles[n - 1])?;
            let norm = bases::normalize(&zeta, ranges)?;
            clamped_coefficients += norm.clamped;
            let zeta_bar: Vec<f64> = norm
                .values
                .iter()
                .zip(&deltas)
                .map(|(&v, &d)| bases::quantize(&[v], d)[0])
                .collect();
            let ev = self.evaluate(inside[n], outside[n], &zeta_bar, interp)?;
            clamped_parameters += ev.clamped;
            profiles.push(ev.field);
        }
        if clamped_parameters > 0 {
            log::warn!("{clamped_parameters} parameter values were clamped to the model domains");
        }
        let times = (0..inside.len()).map(|n| n as f64 * dt).collect();
        Ok(Simulation {
            series: FieldSeries::new(grid.clone(), times, profiles)?,
            clamped_coefficients,
            clamped_parameters,
        })
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            format_version: FORMAT_VERSION,
            a: self.a,
            inside: self.inside,
            outside: self.outside,
            domains: self.domains.clone(),
            basis: self.basis.to_document(),
            meta: self.meta.clone(),
            modes: self
                .modes
                .iter()
                .map(|m| EncodedMode {
                    x: encode(&m.x),
                    factors: encode(&m.factors.concat()),
                })
                .collect(),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Version {
                found: file.format_version,
                expected: FORMAT_VERSION,
            });
        }
        let basis = ApproximationBasis::from_document(file.basis)?;
        let nx = basis.grid().len();
        let n_dims = file.domains.zeta.len() + 2;
        if file.domains.zeta.len() != basis.n_modes() {
            return Err(Error::Corrupt("domain count does not match the basis".into()));
        }
        let modes = file
            .modes
            .iter()
            .map(|m| {
                let x = decode(&m.x, nx)?;
                let factors = decode(&m.factors, 2 * n_dims)?
                    .chunks_exact(2)
                    .map(|c| [c[0], c[1]])
                    .collect();
                Ok(PgdMode { x, factors })
            })
            .collect::<Result<Vec<_>>>()?;
        if modes.is_empty() {
            return Err(Error::Corrupt("model has no modes".into()));
        }
        Ok(Self {
            a: file.a,
            inside: file.inside,
            outside: file.outside,
            domains: file.domains,
            basis,
            modes,
            meta: file.meta,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Corrupt(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        crate::io::write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// On-disk model: metadata in JSON, vectors as base64 little-endian `f64`
/// arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub a: f64,
    pub inside: Edge,
    pub outside: Edge,
    pub domains: PgdDomains,
    pub basis: BasisDocument,
    pub meta: BuildMetadata,
    pub modes: Vec<EncodedMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedMode {
    pub x: String,
    /// Affine coefficients of all parameter factors, two per dimension.
    pub factors: String,
}

fn encode(v: &[f64]) -> String {
    let bytes: Vec<u8> = v.iter().flat_map(|x| x.to_le_bytes()).collect();
    B64.encode(bytes)
}

fn decode(s: &str, expected: usize) -> Result<Vec<f64>> {
    let bytes = B64
        .decode(s)
        .map_err(|e| Error::Corrupt(format!("bad factor encoding: {e}")))?;
    if bytes.len() != 8 * expected {
        return Err(Error::Corrupt(format!(
            "encoded array holds {} bytes, expected {}",
            bytes.len(),
            8 * expected
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}
