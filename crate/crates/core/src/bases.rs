//! Approximation bases for the source term and the coefficient normalization.
//!
//! A basis is a set of mode shapes sampled on a grid. Projection is a discrete
//! least-squares fit on the grid values (thin QR), the same for every kind of
//! basis.
//!
//! POD modes are the leading eigenvectors of the spatial correlation matrix
//! `S S^T` of the snapshot matrix `S`, i.e. its left singular vectors, with
//! the Euclidean inner product on grid values. Directions whose singular value
//! is below roughly `1e-8` of the largest one are not resolved by this route
//! and only span noise, which caps the attainable POD accuracy.

use std::path::Path;

use nalgebra::{DMatrix, DVector, SVD};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, invalid, Error, Result};
use crate::fdm::FieldSeries;
use crate::grid::{GridSpec, SpatialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Chebyshev,
    Legendre,
    Pod,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Chebyshev => "chebyshev",
            BasisKind::Legendre => "legendre",
            BasisKind::Pod => "pod",
        }
    }
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chebyshev" | "cheb" => Ok(BasisKind::Chebyshev),
            "legendre" | "leg" => Ok(BasisKind::Legendre),
            "pod" => Ok(BasisKind::Pod),
            other => Err(invalid(format!("unknown basis kind '{other}'"))),
        }
    }
}

/// Per-mode extrema of the projection coefficients over a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRanges {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl CoefficientRanges {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        check_len("coefficient ranges", min.len(), max.len())?;
        if min.iter().zip(&max).any(|(lo, hi)| !(lo <= hi)) {
            return Err(invalid("coefficient range with min > max"));
        }
        Ok(Self { min, max })
    }

    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }

    pub fn width(&self, j: usize) -> f64 {
        self.max[j] - self.min[j]
    }
}

/// Source-term samples, one column per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    pub times: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
}

impl SnapshotMatrix {
    pub fn new(times: Vec<f64>, columns: Vec<Vec<f64>>) -> Result<Self> {
        check_len("snapshot times", columns.len(), times.len())?;
        if columns.is_empty() {
            return Err(invalid("snapshot set is empty"));
        }
        let n = columns[0].len();
        for c in &columns {
            check_len("snapshot column", n, c.len())?;
        }
        Ok(Self { times, columns })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let rows = self.rows();
        DMatrix::from_fn(rows, self.len(), |i, j| self.columns[j][i])
    }

    /// Same layout as [`FieldSeries::write_csv`].
    pub fn write_csv<P: AsRef<Path>>(&self, grid: &SpatialGrid, path: P) -> Result<()> {
        FieldSeries::new(grid.clone(), self.times.clone(), self.columns.clone())?.write_csv(path)
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<(Self, SpatialGrid)> {
        let s = FieldSeries::read_csv(path)?;
        let grid = s.grid.clone();
        Ok((s.into(), grid))
    }
}

impl From<FieldSeries> for SnapshotMatrix {
    fn from(s: FieldSeries) -> Self {
        Self {
            times: s.times,
            columns: s.profiles,
        }
    }
}

impl From<&FieldSeries> for SnapshotMatrix {
    fn from(s: &FieldSeries) -> Self {
        Self {
            times: s.times.clone(),
            columns: s.profiles.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ApproximationBasis {
    kind: BasisKind,
    grid: SpatialGrid,
    modes: Vec<Vec<f64>>,
    ranges: Option<CoefficientRanges>,
    /// Least-squares operator `R^{-1} Q^T`, `N x nodes`.
    projector: DMatrix<f64>,
}

impl PartialEq for ApproximationBasis {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.grid == other.grid
            && self.modes == other.modes
            && self.ranges == other.ranges
    }
}

fn check_modes(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("a basis needs at least one mode"));
    }
    Ok(())
}

/// Values of `T_0..T_{n-1}` at `x`.
pub fn chebyshev_values(n: usize, x: f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(n);
    for j in 0..n {
        let v = match j {
            0 => 1.0,
            1 => x,
            _ => 2.0 * x * t[j - 1] - t[j - 2],
        };
        t.push(v);
    }
    t
}

/// Values of `P_0..P_{n-1}` at `x`.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut p: Vec<f64> = Vec::with_capacity(n);
    for j in 0..n {
        let v = match j {
            0 => 1.0,
            1 => x,
            _ => {
                let k = (j - 1) as f64;
                ((2.0 * k + 1.0) * x * p[j - 1] - k * p[j - 2]) / (k + 1.0)
            }
        };
        p.push(v);
    }
    p
}

fn polynomial_modes(n: usize, grid: &SpatialGrid, f: fn(usize, f64) -> Vec<f64>) -> Vec<Vec<f64>> {
    let values: Vec<Vec<f64>> = grid.nodes().iter().map(|&x| f(n, x)).collect();
    (0..n).map(|j| values.iter().map(|v| v[j]).collect()).collect()
}

impl ApproximationBasis {
    fn from_modes(kind: BasisKind, grid: SpatialGrid, modes: Vec<Vec<f64>>) -> Result<Self> {
        check_modes(modes.len())?;
        for m in &modes {
            check_len("mode length", grid.len(), m.len())?;
        }
        if modes.len() > grid.len() {
            return Err(invalid(format!(
                "{} modes exceed the {} grid nodes",
                modes.len(),
                grid.len()
            )));
        }
        let projector = least_squares_operator(&modes, grid.len())?;
        Ok(Self {
            kind,
            grid,
            modes,
            ranges: None,
            projector,
        })
    }

    /// `T_0..T_{n-1}` evaluated on the grid nodes.
    pub fn chebyshev(n: usize, grid: &SpatialGrid) -> Result<Self> {
        check_modes(n)?;
        Self::from_modes(BasisKind::Chebyshev, grid.clone(), polynomial_modes(n, grid, chebyshev_values))
    }

    /// `P_0..P_{n-1}` evaluated on the grid nodes.
    pub fn legendre(n: usize, grid: &SpatialGrid) -> Result<Self> {
        check_modes(n)?;
        Self::from_modes(BasisKind::Legendre, grid.clone(), polynomial_modes(n, grid, legendre_values))
    }

    /// The `n` leading left singular vectors of the snapshot matrix, largest
    /// entry of each made positive.
    pub fn pod(snapshots: &SnapshotMatrix, n: usize, grid: &SpatialGrid) -> Result<Self> {
        check_modes(n)?;
        if snapshots.is_empty() {
            return Err(invalid("snapshot set is empty"));
        }
        check_len("snapshot column", grid.len(), snapshots.rows())?;
        let bound = grid.len().min(snapshots.len());
        if n > bound {
            return Err(invalid(format!(
                "{n} POD modes requested but at most {bound} available"
            )));
        }
        let modes = pod_modes(snapshots, n);
        Self::from_modes(BasisKind::Pod, grid.clone(), modes)
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[Vec<f64>] {
        &self.modes
    }

    pub fn ranges(&self) -> Option<&CoefficientRanges> {
        self.ranges.as_ref()
    }

    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    pub fn mode_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.grid.len(), self.n_modes(), |i, j| self.modes[j][i])
    }

    pub fn with_ranges(mut self, ranges: CoefficientRanges) -> Result<Self> {
        check_len("coefficient ranges", self.n_modes(), ranges.len())?;
        self.ranges = Some(ranges);
        Ok(self)
    }

    /// The first `n` modes. Ranges are dropped: least-squares coefficients of
    /// a non-orthogonal basis change with truncation.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        check_modes(n)?;
        if n > self.n_modes() {
            return Err(invalid(format!(
                "cannot truncate {} modes to {n}",
                self.n_modes()
            )));
        }
        Self::from_modes(self.kind, self.grid.clone(), self.modes[..n].to_vec())
    }

    /// Least-squares coefficients of `b`.
    pub fn project(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len("source field", self.grid.len(), b.len())?;
        let z = &self.projector * DVector::from_column_slice(b);
        Ok(z.iter().copied().collect())
    }

    pub fn reconstruct(&self, zeta: &[f64]) -> Result<Vec<f64>> {
        check_len("coefficients", self.n_modes(), zeta.len())?;
        let mut out = vec![0.0; self.grid.len()];
        for (m, z) in self.modes.iter().zip(zeta) {
            for (o, v) in out.iter_mut().zip(m) {
                *o += z * v;
            }
        }
        Ok(out)
    }

    pub fn to_document(&self) -> BasisDocument {
        BasisDocument {
            kind: self.kind,
            n_modes: self.n_modes(),
            grid: self.grid.spec(),
            modes: self.modes.clone(),
            ranges: self.ranges.clone(),
        }
    }

    pub fn from_document(doc: BasisDocument) -> Result<Self> {
        check_len("mode count", doc.n_modes, doc.modes.len())?;
        let grid = SpatialGrid::from_spec(doc.grid)?;
        let basis = Self::from_modes(doc.kind, grid, doc.modes)?;
        match doc.ranges {
            Some(r) => basis.with_ranges(CoefficientRanges::new(r.min, r.max)?),
            None => Ok(basis),
        }
    }

    pub fn save_json<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_document())?;
        crate::io::write_atomic(path, text.as_bytes())
    }

    pub fn load_json<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_document(serde_json::from_str(&text)?)
    }
}

/// Serialized form of a basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDocument {
    pub kind: BasisKind,
    pub n_modes: usize,
    pub grid: GridSpec,
    pub modes: Vec<Vec<f64>>,
    pub ranges: Option<CoefficientRanges>,
}

fn least_squares_operator(modes: &[Vec<f64>], rows: usize) -> Result<DMatrix<f64>> {
    let n = modes.len();
    let psi = DMatrix::from_fn(rows, n, |i, j| modes[j][i]);
    let qr = psi.qr();
    let r = qr.r();
    let scale = (0..n).fold(0.0f64, |m, i| m.max(r[(i, i)].abs()));
    for i in 0..n {
        if !(r[(i, i)].abs() > 1e-13 * scale) {
            return Err(Error::Singular(format!(
                "basis is rank deficient (mode {i} is dependent on the others)"
            )));
        }
    }
    let qt = qr.q().transpose();
    r.solve_upper_triangular(&qt)
        .ok_or_else(|| Error::Singular("triangular factor is singular".into()))
}

fn pod_modes(snapshots: &SnapshotMatrix, n: usize) -> Vec<Vec<f64>> {
    let s = snapshots.to_matrix();
    // left singular vectors of S; with many snapshots those of R^T, where
    // S^T = QR, which avoids forming S S^T and squaring its conditioning
    let core = if s.ncols() > s.nrows() {
        s.transpose().qr().r().transpose()
    } else {
        s
    };
    let svd = SVD::new(core, true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order
        .into_iter()
        .take(n)
        .map(|k| {
            let mut v: Vec<f64> = u.column(k).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect()
}

/// Projects every snapshot and records per-mode extrema.
pub fn coefficient_ranges(snapshots: &SnapshotMatrix, basis: &ApproximationBasis) -> Result<CoefficientRanges> {
    if snapshots.len() < 2 {
        return Err(invalid("coefficient ranges need at least two snapshots"));
    }
    check_len("snapshot column", basis.grid().len(), snapshots.rows())?;
    let z = basis.projector() * snapshots.to_matrix();
    let (min, max) = (0..basis.n_modes())
        .into_par_iter()
        .map(|j| {
            z.row(j)
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
        })
        .unzip();
    CoefficientRanges::new(min, max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub values: Vec<f64>,
    /// Number of coefficients that fell outside their range and were clamped.
    pub clamped: usize,
}

/// Maps coefficients onto `[0, 1]` per mode. A degenerate range maps to 0.5.
pub fn normalize(zeta: &[f64], ranges: &CoefficientRanges) -> Result<Normalized> {
    check_len("coefficients", ranges.len(), zeta.len())?;
    let mut clamped = 0;
    let values = zeta
        .iter()
        .enumerate()
        .map(|(j, &z)| {
            let w = ranges.width(j);
            if w <= 0.0 {
                if z != ranges.min[j] {
                    clamped += 1;
                }
                return 0.5;
            }
            let v = (z - ranges.min[j]) / w;
            if !(0.0..=1.0).contains(&v) {
                clamped += 1;
            }
            v.clamp(0.0, 1.0)
        })
        .collect();
    Ok(Normalized { values, clamped })
}

pub fn denormalize(zeta_bar: &[f64], ranges: &CoefficientRanges) -> Result<Vec<f64>> {
    check_len("normalized coefficients", ranges.len(), zeta_bar.len())?;
    Ok(zeta_bar
        .iter()
        .enumerate()
        .map(|(j, &v)| ranges.min[j] + ranges.width(j) * v)
        .collect())
}

/// Snaps each value to the nearest multiple of `delta`.
pub fn quantize(zeta_bar: &[f64], delta: f64) -> Vec<f64> {
    let cells = (1.0 / delta).round();
    let integral = cells >= 1.0 && (cells * delta - 1.0).abs() < 1e-9;
    zeta_bar
        .iter()
        .map(|&v| {
            if integral {
                // k / n is the correctly rounded node value
                (v * cells).round() / cells
            } else {
                (v / delta).round() * delta
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn grid() -> SpatialGrid {
        SpatialGrid::uniform(40).unwrap()
    }

    #[test]
    fn polynomial_values() {
        assert!((chebyshev_values(3, 0.5)[2] + 0.5).abs() < 1e-15);
        assert_eq!(chebyshev_values(4, 1.0)[3], 1.0);
        assert_eq!(legendre_values(3, 0.0)[2], -0.5);
        assert_eq!(legendre_values(3, 1.0)[2], 1.0);
        assert_eq!(legendre_values(2, 0.3)[1], 0.3);
        let b = ApproximationBasis::chebyshev(3, &grid()).unwrap();
        assert!(b.modes()[0].iter().all(|&v| v == 1.0));
        assert!(ApproximationBasis::chebyshev(0, &grid()).is_err());
        assert!(ApproximationBasis::legendre(0, &grid()).is_err());
    }

    #[test]
    fn recurrences_match_closed_forms() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x: f64 = rng.gen_range(-1.0..=1.0);
            let t = chebyshev_values(4, x);
            let closed_t = [1.0, x, 2.0 * x * x - 1.0, 4.0 * x.powi(3) - 3.0 * x];
            let p = legendre_values(4, x);
            let closed_p = [1.0, x, 1.5 * x * x - 0.5, 2.5 * x.powi(3) - 1.5 * x];
            for j in 0..4 {
                assert!((t[j] - closed_t[j]).abs() < 1e-13);
                assert!((p[j] - closed_p[j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn projection_cases() {
        let g = grid();
        let b = ApproximationBasis::chebyshev(5, &g).unwrap();
        let z = b.project(&vec![0.7; g.len()]).unwrap();
        assert!((z[0] - 0.7).abs() < 1e-12);
        assert!(z[1..].iter().all(|v| v.abs() < 1e-12));

        let z = b.project(&b.modes()[3]).unwrap();
        for (j, v) in z.iter().enumerate() {
            assert!((v - if j == 3 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }

        let cubic: Vec<f64> = g.nodes().iter().map(|x| x.powi(3)).collect();
        let b4 = ApproximationBasis::chebyshev(4, &g).unwrap();
        let rec = b4.reconstruct(&b4.project(&cubic).unwrap()).unwrap();
        assert!(rec.iter().zip(&cubic).all(|(a, b)| (a - b).abs() < 1e-12));

        assert!(b.reconstruct(&[0.0; 5]).unwrap().iter().all(|&v| v == 0.0));
        let lin = b.reconstruct(&[0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(lin, g.nodes());
        assert!(b.reconstruct(&[0.0; 4]).is_err());
        assert!(b.project(&[0.0; 3]).is_err());
    }

    #[test]
    fn rank_deficient_basis_is_singular() {
        let g = SpatialGrid::uniform(3).unwrap();
        let r = ApproximationBasis::from_modes(BasisKind::Pod, g, vec![vec![1.0; 4], vec![2.0; 4]]);
        assert!(matches!(r, Err(Error::Singular(_))));
    }

    fn random_snapshots(rows: usize, cols: usize, seed: u64) -> SnapshotMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let columns = (0..cols)
            .map(|_| (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        SnapshotMatrix::new((0..cols).map(|t| t as f64).collect(), columns).unwrap()
    }

    #[test]
    fn pod_rank_one_and_identity() {
        let g = SpatialGrid::uniform(9).unwrap();
        let shape: Vec<f64> = g.nodes().iter().map(|x| (2.0 * x).sin() + 0.3).collect();
        let cols: Vec<Vec<f64>> = [1.0, -2.0, 0.5, 3.0]
            .iter()
            .map(|s| shape.iter().map(|v| v * s).collect())
            .collect();
        let snaps = SnapshotMatrix::new(vec![0.0, 1.0, 2.0, 3.0], cols.clone()).unwrap();
        let b = ApproximationBasis::pod(&snaps, 1, &g).unwrap();
        for c in &cols {
            let rec = b.reconstruct(&b.project(c).unwrap()).unwrap();
            assert!(rec.iter().zip(c).all(|(a, b)| (a - b).abs() < 1e-10));
        }

        let n = g.len();
        let eye = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let snaps = SnapshotMatrix::new((0..n).map(|t| t as f64).collect(), eye).unwrap();
        let b = ApproximationBasis::pod(&snaps, n, &g).unwrap();
        let v: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let rec = b.reconstruct(&b.project(&v).unwrap()).unwrap();
        assert!(rec.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-10));

        assert!(ApproximationBasis::pod(&snaps, n + 1, &g).is_err());
        assert!(ApproximationBasis::pod(&snaps, 0, &g).is_err());
    }

    #[test]
    fn pod_is_orthonormal_and_signed() {
        let g = SpatialGrid::uniform(30).unwrap();
        let snaps = random_snapshots(31, 60, 3);
        let b = ApproximationBasis::pod(&snaps, 12, &g).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let d: f64 = b.modes()[i].iter().zip(&b.modes()[j]).map(|(a, b)| a * b).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
            let lead = b.modes()[i].iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn pod_error_non_increasing() {
        let g = SpatialGrid::uniform(30).unwrap();
        let snaps = random_snapshots(31, 45, 11);
        let full = ApproximationBasis::pod(&snaps, 31, &g).unwrap();
        let mut prev = f64::INFINITY;
        for n in 1..=31 {
            let b = full.truncated(n).unwrap();
            let err: f64 = snaps
                .columns
                .iter()
                .map(|c| {
                    let r = b.reconstruct(&b.project(c).unwrap()).unwrap();
                    r.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                })
                .sum();
            assert!(err <= prev + 1e-12);
            prev = err;
        }
    }

    #[test]
    fn ranges_cases() {
        let g = grid();
        let b = ApproximationBasis::legendre(4, &g).unwrap();
        let col: Vec<f64> = g.nodes().iter().map(|x| (x * 1.7).exp()).collect();
        let same = SnapshotMatrix::new(vec![0.0, 1.0], vec![col.clone(), col.clone()]).unwrap();
        let r = coefficient_ranges(&same, &b).unwrap();
        assert_eq!(r.min, r.max);

        let neg: Vec<f64> = col.iter().map(|v| -v).collect();
        let pm = SnapshotMatrix::new(vec![0.0, 1.0], vec![col.clone(), neg]).unwrap();
        let r = coefficient_ranges(&pm, &b).unwrap();
        for j in 0..4 {
            assert!((r.min[j] + r.max[j]).abs() < 1e-12);
        }

        let single = SnapshotMatrix::new(vec![0.0], vec![col]).unwrap();
        assert!(coefficient_ranges(&single, &b).is_err());
    }

    #[test]
    fn normalization_cases() {
        let r = CoefficientRanges::new(vec![-1.0, 2.0, 5.0], vec![3.0, 4.0, 5.0]).unwrap();
        let n = normalize(&[-1.0, 4.0, 5.0], &r).unwrap();
        assert_eq!(n.values, vec![0.0, 1.0, 0.5]);
        assert_eq!(n.clamped, 0);
        assert_eq!(normalize(&[1.0, 3.0, 5.0], &r).unwrap().values[..2], [0.5, 0.5]);
        let n = normalize(&[-2.0, 9.0, 6.0], &r).unwrap();
        assert_eq!(n.values, vec![0.0, 1.0, 0.5]);
        assert_eq!(n.clamped, 3);
        assert_eq!(denormalize(&[0.5, 0.5, 0.5], &r).unwrap(), vec![1.0, 3.0, 5.0]);
        assert!(CoefficientRanges::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn quantize_cases() {
        assert_eq!(quantize(&[0.123], 1e-2), vec![0.12]);
        assert_eq!(quantize(&[0.123456], 1e-6), vec![0.123456]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for delta in [1e-2, 1e-3, 0.3] {
            for _ in 0..1000 {
                let v: f64 = rng.gen();
                let q = quantize(&[v], delta)[0];
                assert!((q - v).abs() <= delta / 2.0 + 1e-15);
            }
        }
    }

    #[test]
    fn document_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.json");
        let g = grid();
        let b = ApproximationBasis::chebyshev(4, &g)
            .unwrap()
            .with_ranges(CoefficientRanges::new(vec![0.0; 4], vec![0.1, 0.2, 0.3, 1.0 / 3.0]).unwrap())
            .unwrap();
        b.save_json(&p).unwrap();
        assert_eq!(ApproximationBasis::load_json(&p).unwrap(), b);
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(vals in proptest::collection::vec(-1.0f64..1.0, 41), n in 1usize..12) {
            let b = ApproximationBasis::legendre(n, &grid()).unwrap();
            let once = b.reconstruct(&b.project(&vals).unwrap()).unwrap();
            let twice = b.reconstruct(&b.project(&once).unwrap()).unwrap();
            prop_assert!(once.iter().zip(&twice).all(|(a, b)| (a - b).abs() < 1e-10));
        }

        #[test]
        fn normalize_round_trip(z in proptest::collection::vec(0.0f64..1.0, 4)) {
            let r = CoefficientRanges::new(vec![-2.0, 0.0, 1e-3, 7.0], vec![1.0, 5.0, 2e-3, 7.5]).unwrap();
            let zeta = denormalize(&z, &r).unwrap();
            let back = normalize(&zeta, &r).unwrap();
            let again = denormalize(&back.values, &r).unwrap();
            prop_assert!(zeta.iter().zip(&again).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }
}
