//! The concentration operator of a hyperbolic disc, discretized on a polar
//! grid as `M_ij = sqrt(w_i) p(z_i, z_j) sqrt(w_j)` with the projection
//! kernel `p`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{kernel, KernelSpec, Normalization};
use crate::quadrature::{disc_grid, QuadratureGrid};
use crate::{Disc, Point};

/// Largest grid accepted for a dense operator (the matrix alone takes `16 N^2` bytes).
pub const MAX_NODES: usize = 4096;

/// Discretized concentration operator with its spectral decomposition.
#[derive(Debug, Clone)]
pub struct ConcentrationOperator {
    spec: KernelSpec,
    region: Disc,
    grid: QuadratureGrid,
    matrix: DMatrix<Complex64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    clamp: f64,
    residual: f64,
}

/// Trace statistics of the operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Traces {
    /// `tr M`, the expected number of points.
    pub expected: f64,
    /// `tr M^2`.
    pub trace_sq: f64,
    /// `tr M - tr M^2`, the number variance.
    pub variance: f64,
    #[serde(rename = "N_Omega")]
    pub n_omega: usize,
}

impl Traces {
    fn new(expected: f64, trace_sq: f64) -> Self {
        Self { expected, trace_sq, variance: expected - trace_sq, n_omega: expected.max(0.0).floor() as usize }
    }
}

/// Value of the reduced kernel; `empty` is set when `N_Omega = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedValue {
    pub value: Complex64,
    pub empty: bool,
}

fn projection(spec: &KernelSpec) -> KernelSpec {
    spec.clone().with_normalization(Normalization::Projection)
}

fn check_size(region: &Disc, depth: u32, len: usize) -> Result<()> {
    if len <= MAX_NODES {
        return Ok(());
    }
    let fits = (1..depth)
        .rev()
        .find(|&d| disc_grid(region.center, region.radius, d).map(|g| g.len() <= MAX_NODES).unwrap_or(false));
    Err(Error::Resource(match fits {
        Some(d) => format!("{len} nodes exceed the dense budget of {MAX_NODES}; use depth {d} or less"),
        None => format!("{len} nodes exceed the dense budget of {MAX_NODES} at every depth; use a smaller radius"),
    }))
}

/// Hermitian matrix `sqrt(w_i) p(z_i, z_j) sqrt(w_j)`; only the upper triangle is evaluated.
pub fn assemble(spec: &KernelSpec, grid: &QuadratureGrid) -> Result<DMatrix<Complex64>> {
    let spec = projection(spec);
    let n = grid.len();
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| kernel(&spec, grid.nodes[i], grid.nodes[j]).map(|v| v * sw[i] * sw[j]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            let j = i + k;
            if i == j {
                m[(i, i)] = Complex64::new(v.re, 0.0);
            } else {
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
    }
    Ok(m)
}

/// Builds and diagonalizes the operator of `spec` on `region`.
pub fn build_operator(spec: &KernelSpec, region: &Disc, depth: u32) -> Result<ConcentrationOperator> {
    let grid = disc_grid(region.center, region.radius, depth)?;
    check_size(region, depth, grid.len())?;
    let matrix = assemble(spec, &grid)?;
    ConcentrationOperator::from_parts(projection(spec), *region, grid, matrix)
}

impl ConcentrationOperator {
    /// Diagonalizes a given Hermitian matrix on a grid. Used by
    /// [`build_operator`] and by tests that need operators with a prescribed
    /// spectrum.
    pub fn from_parts(spec: KernelSpec, region: Disc, grid: QuadratureGrid, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = grid.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Domain(format!("matrix is {}x{}, grid has {n} nodes", matrix.nrows(), matrix.ncols())));
        }
        if n == 0 {
            return Err(Error::Domain("empty grid".into()));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut vectors = DMatrix::zeros(n, n);
        let mut raw = Vec::with_capacity(n);
        for (k, &j) in order.iter().enumerate() {
            vectors.set_column(k, &eig.eigenvectors.column(j));
            raw.push(eig.eigenvalues[j]);
        }
        let norm = matrix.norm();
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, raw.iter().map(|&l| Complex64::new(l, 0.0))));
        let residual = (&matrix * &vectors - &vectors * lam).column_iter().map(|c| c.norm()).fold(0.0, f64::max)
            / norm.max(f64::MIN_POSITIVE);
        let clamp = raw.iter().map(|&l| (-l).max(l - 1.0).max(0.0)).fold(0.0, f64::max);
        let eigenvalues = raw.iter().map(|l| l.clamp(0.0, 1.0)).collect();
        Ok(Self { spec, region, grid, matrix, eigenvalues, eigenvectors: vectors, clamp, residual })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn region(&self) -> &Disc {
        &self.region
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Eigenvalues in descending order, clamped to `[0, 1]`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, matching [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    /// Largest distance of a computed eigenvalue from `[0, 1]` before clamping.
    pub fn clamp_magnitude(&self) -> f64 {
        self.clamp
    }

    /// `max_j |M v_j - lambda_j v_j| / |M|_F` before clamping.
    pub fn eigen_residual(&self) -> f64 {
        self.residual
    }

    /// `max |M - M^*|` (zero by construction for assembled operators).
    pub fn hermitian_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Nyström extension `phi_j(z) = lambda_j^{-1} sum_i p(z, z_i) sqrt(w_i) v_j[i]`
    /// of eigenvector `j`, normalized in `L^2(dmu+)`.
    pub fn eigenfunction(&self, j: usize, z: Point) -> Result<Complex64> {
        let lam = self.eigenvalues[j];
        if !(lam > 0.0) {
            return Err(Error::Domain(format!("eigenvalue {j} vanishes; no extension")));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, (&zi, &wi)) in self.grid.nodes.iter().zip(&self.grid.weights).enumerate() {
            acc += kernel(&self.spec, z, zi)? * wi.sqrt() * self.eigenvectors[(i, j)];
        }
        Ok(acc / lam)
    }

    /// Eigenvalues as CSV (`index,eigenvalue`).
    pub fn eigenvalue_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (k, l) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{k},{l:.17e}\n"));
        }
        out
    }
}

/// Expected count, `tr M^2` and variance of a built operator.
pub fn traces(op: &ConcentrationOperator) -> Traces {
    let expected = (0..op.matrix.nrows()).map(|i| op.matrix[(i, i)].re).sum();
    Traces::new(expected, op.matrix.norm_squared())
}

/// The same traces computed without storing or diagonalizing the matrix,
/// so that finer grids stay affordable.
pub fn grid_traces(spec: &KernelSpec, region: &Disc, depth: u32) -> Result<Traces> {
    let spec = projection(spec);
    let grid = disc_grid(region.center, region.radius, depth)?;
    let n = grid.len();
    let parts = (0..n)
        .into_par_iter()
        .map(|i| {
            let (zi, wi) = (grid.nodes[i], grid.weights[i]);
            let diag = kernel(&spec, zi, zi)?.re * wi;
            let mut off = 0.0;
            for j in i + 1..n {
                off += kernel(&spec, zi, grid.nodes[j])?.norm_sqr() * wi * grid.weights[j];
            }
            Ok((diag, diag * diag + 2.0 * off))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (expected, trace_sq) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(Traces::new(expected, trace_sq))
}

/// `sum_{j < N_Omega} phi_j(z) conj(phi_j(w))` over the leading eigenfunctions.
pub fn reduced_kernel(op: &ConcentrationOperator, z: Point, w: Point) -> Result<ReducedValue> {
    let n_omega = traces(op).n_omega;
    if n_omega == 0 {
        return Ok(ReducedValue { value: Complex64::new(0.0, 0.0), empty: true });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n_omega.min(op.eigenvalues.len()) {
        acc += op.eigenfunction(j, z)? * op.eigenfunction(j, w)?.conj();
    }
    Ok(ReducedValue { value: acc, empty: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::disc_area;

    #[test]
    fn trace_is_density_times_area() {
        let spec = KernelSpec::maass_landau(3.5, 0).unwrap();
        let disc = Disc::new(Point::i(), 0.5).unwrap();
        let op = build_operator(&spec, &disc, 1).unwrap();
        let t = traces(&op);
        let expect = disc_area(0.5).unwrap() * 6.0 / (4.0 * std::f64::consts::PI);
        assert!((t.expected - expect).abs() < 1e-9 * expect);
        let s: f64 = op.eigenvalues().iter().sum();
        assert!((s - t.expected).abs() < 1e-8);
        assert!(t.variance >= 0.0 && t.variance <= t.expected);
        assert_eq!(op.hermitian_defect(), 0.0);
        assert!(op.eigen_residual() < 1e-10);
    }

    #[test]
    fn matrix_free_traces_agree() {
        let spec = KernelSpec::laguerre_mode(4.0, 1).unwrap();
        let disc = Disc::new(Point::new(0.5, 2.0).unwrap(), 0.6).unwrap();
        let op = build_operator(&spec, &disc, 1).unwrap();
        let a = traces(&op);
        let b = grid_traces(&spec, &disc, 1).unwrap();
        assert!((a.expected - b.expected).abs() < 1e-10);
        assert!((a.trace_sq - b.trace_sq).abs() < 1e-10);
    }

    #[test]
    fn resource_guard() {
        let spec = KernelSpec::maass_landau(3.5, 0).unwrap();
        let disc = Disc::new(Point::i(), 0.99).unwrap();
        assert!(matches!(build_operator(&spec, &disc, 4), Err(Error::Resource(_))));
    }

    #[test]
    fn alpha_zero_level_has_no_operator() {
        let spec = KernelSpec::maass_landau(3.5, 3).unwrap();
        let disc = Disc::new(Point::i(), 0.5).unwrap();
        assert!(matches!(build_operator(&spec, &disc, 1), Err(Error::Admissibility(_))));
    }
}
