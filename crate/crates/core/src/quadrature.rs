//! Quadrature against the hyperbolic measure `dmu+ = ds dx / s^2`.
//!
//! Grids are polar in geodesic coordinates about a center: Gauss–Legendre in
//! the hyperbolic radius `d`, uniform in angle, with the area element
//! `sinh(d) dd dtheta`. This equals the disc-model density
//! `4 (1 - |u|^2)^{-2}` after the substitution `|u| = tanh(d/2)`. Nodes are
//! produced in the disc model, pulled back through the inverse Cayley map and
//! translated to the center by the affine group action (an isometry).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauss::{gauss_legendre, GaussRule};
use crate::geometry::{
    cayley, cayley_inv, check_radius, group_inv, group_mul, radius_to_dist, rho, DiskPoint,
    HalfPlanePoint,
};

type Point = HalfPlanePoint<f64>;

/// Default truncation radius for integrals over the whole half-plane.
pub const DEFAULT_R_MAX: f64 = 0.999;

/// Geodesic node spacing at depth 1; halves with every depth increment.
const BASE_SPACING: f64 = 0.8;
/// Pseudohyperbolic radii closer to 1 than this cannot be resolved in `f64`.
const MIN_ONE_MINUS_R: f64 = 1e-9;

/// Region covered by a [`QuadratureGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Disc { center: Point, radius: f64 },
    /// The disc `D(i, r_max)` standing in for the whole half-plane.
    HalfplaneTruncated { r_max: f64 },
    /// `D(center, outer) \ D(center, inner)`.
    Annulus { center: Point, inner: f64, outer: f64 },
}

impl Region {
    pub fn contains(&self, w: Point) -> bool {
        match *self {
            Region::Disc { center, radius } => rho(w, center) < radius,
            Region::HalfplaneTruncated { r_max } => rho(w, Point::i()) < r_max,
            Region::Annulus { center, inner, outer } => {
                let r = rho(w, center);
                r >= inner && r < outer
            }
        }
    }
}

/// Nodes and positive weights for integrals against `dmu+`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub region: Region,
    pub depth: u32,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Geodesic spacing used at a given depth.
pub fn spacing(depth: u32) -> f64 {
    BASE_SPACING * 0.5f64.powi(depth as i32 - 1)
}

fn check_depth(depth: u32) -> Result<()> {
    if depth == 0 {
        return Err(Error::Domain("grid depth must be at least 1".into()));
    }
    if depth > 12 {
        return Err(Error::Resource(format!("grid depth {depth} is beyond any sensible budget; use <= 12")));
    }
    Ok(())
}

fn check_resolvable(r: f64, depth: u32) -> Result<()> {
    if 1.0 - r < MIN_ONE_MINUS_R {
        return Err(Error::Resolution(format!(
            "radius {r} is too close to 1 for depth {depth}: the hyperbolic weights overflow; \
             use a smaller radius or a higher depth"
        )));
    }
    Ok(())
}

/// Polar rings `(d, weight_per_unit_angle, angular_count)` between two geodesic radii.
fn rings(d_in: f64, d_out: f64, depth: u32) -> Vec<(f64, f64, usize)> {
    let h = spacing(depth);
    let n_r = 4 + ((d_out - d_in) / h).ceil() as usize;
    let cap = 64usize << depth;
    let min = 8usize;
    let rule: GaussRule<f64> = gauss_legendre(n_r);
    rule.mapped(d_in, d_out)
        .map(|(d, w)| {
            let want = (std::f64::consts::TAU * d.sinh() / h).ceil() as usize;
            let n_theta = want.clamp(min, cap).div_ceil(4) * 4;
            (d, w * d.sinh(), n_theta)
        })
        .collect()
}

fn polar_grid(center: Point, d_in: f64, d_out: f64, depth: u32, region: Region) -> QuadratureGrid {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (d, w_ring, n_theta) in rings(d_in, d_out, depth) {
        let r = (0.5 * d).tanh();
        let dtheta = std::f64::consts::TAU / n_theta as f64;
        for j in 0..n_theta {
            let theta = (j as f64 + 0.5) * dtheta;
            let u = DiskPoint { u: Complex64::from_polar(r, theta) };
            nodes.push(group_mul(center, cayley_inv(u)));
            weights.push(w_ring * dtheta);
        }
    }
    QuadratureGrid { nodes, weights, region, depth }
}

/// Grid on the disc `D(center, r)`; the node count grows geometrically with `depth`.
pub fn disc_grid(center: Point, r: f64, depth: u32) -> Result<QuadratureGrid> {
    check_radius(r)?;
    check_depth(depth)?;
    check_resolvable(r, depth)?;
    Ok(polar_grid(center, 0.0, radius_to_dist(r), depth, Region::Disc { center, radius: r }))
}

/// Grid on `D(i, r_max)`, a truncation of the whole half-plane.
///
/// Integrands must decay toward the boundary; compare two values of `r_max`
/// to estimate the neglected tail.
pub fn halfplane_grid(r_max: f64, depth: u32) -> Result<QuadratureGrid> {
    check_radius(r_max)?;
    check_depth(depth)?;
    check_resolvable(r_max, depth)?;
    Ok(polar_grid(Point::i(), 0.0, radius_to_dist(r_max), depth, Region::HalfplaneTruncated { r_max }))
}

/// Grid on `D(center, outer) \ D(center, inner)`.
pub fn annulus_grid(center: Point, inner: f64, outer: f64, depth: u32) -> Result<QuadratureGrid> {
    check_radius(inner)?;
    check_radius(outer)?;
    check_depth(depth)?;
    check_resolvable(outer, depth)?;
    if inner >= outer {
        return Err(Error::Domain(format!("annulus needs inner < outer, got {inner} >= {outer}")));
    }
    Ok(polar_grid(
        center,
        radius_to_dist(inner),
        radius_to_dist(outer),
        depth,
        Region::Annulus { center, inner, outer },
    ))
}

/// `sum f(node) weight`, evaluated in parallel and reduced in node order.
pub fn integrate<F>(f: F, grid: &QuadratureGrid) -> Result<Complex64>
where
    F: Fn(Point) -> Complex64 + Sync,
{
    let values: Vec<Complex64> = grid.nodes.par_iter().map(|&z| f(z)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for ((v, w), z) in values.iter().zip(&grid.weights).zip(&grid.nodes) {
        if !v.is_finite() {
            return Err(Error::Evaluation(format!("integrand is {v} at node ({}, {})", z.x, z.s)));
        }
        acc += v * w;
    }
    Ok(acc)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(f: F, grid: &QuadratureGrid) -> Result<f64>
where
    F: Fn(Point) -> f64 + Sync,
{
    integrate(|z| Complex64::new(f(z), 0.0), grid).map(|v| v.re)
}

/// `int_0^t 4 r / (1 - r^2)^2 dr`, the hyperbolic area per unit angle within disc-model radius `t`.
fn radial_area(t: f64) -> f64 {
    2.0 * t * t / (1.0 - t * t)
}

/// Hyperbolic area of `D(w, R) \ D(i, R)`.
///
/// The polar grid on `D(w, R)` integrates the indicator of the complement of
/// `D(i, R)` exactly along each ray (the boundary circle meets a ray in at
/// most one interval), so only the angular direction is discretized. Angular
/// panels are split at the tangent rays and at the rays through the two
/// boundary intersections, and a cosine substitution absorbs the square-root
/// behaviour at tangency. The angular rule size follows `depth + 2`.
pub fn lens_area(w: Point, r: f64, depth: u32) -> Result<f64> {
    check_radius(r)?;
    check_depth(depth)?;
    check_resolvable(r, depth)?;
    // move w to i; the base point i goes to w^{-1}
    let xi = cayley(group_inv(w)).u;
    let xi_abs2 = xi.norm_sqr();
    if xi_abs2 == 0.0 {
        return Ok(0.0);
    }
    let r2 = r * r;
    // Euclidean circle bounding the pseudohyperbolic disc D(xi, r) of the unit disc
    let scale = 1.0 / (1.0 - r2 * xi_abs2);
    let c_abs = xi_abs2.sqrt() * (1.0 - r2) * scale;
    let rho_e = r * (1.0 - xi_abs2) * scale;
    let full = radial_area(r);

    // integrand in the angle phi measured from the direction of the circle center
    let g = |phi: f64| -> f64 {
        let b = c_abs * phi.cos();
        let disc = b * b - c_abs * c_abs + rho_e * rho_e;
        if disc <= 0.0 {
            return full;
        }
        let sq = disc.sqrt();
        let lo = (b - sq).max(0.0);
        let hi = (b + sq).min(r);
        if hi <= lo {
            full
        } else {
            full - (radial_area(hi) - radial_area(lo))
        }
    };

    let mut breaks = vec![0.0, std::f64::consts::PI];
    if c_abs > rho_e {
        breaks.push((rho_e / c_abs).asin());
    }
    if c_abs > 0.0 {
        let cos_gamma = (r2 + c_abs * c_abs - rho_e * rho_e) / (2.0 * r * c_abs);
        if cos_gamma.abs() < 1.0 {
            breaks.push(cos_gamma.acos());
        }
    }
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let rule: GaussRule<f64> = gauss_legendre(4usize << (depth + 1).min(10));
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut total = 0.0;
    for win in breaks.windows(2) {
        let (a, b) = (win[0], win[1]);
        // phi = a + (b - a)(1 - cos(pi tau)) / 2, tau in [0, 1]
        total += rule.integrate(0.0, 1.0, |tau| {
            let s = (std::f64::consts::PI * tau).sin_cos();
            let phi = a + (b - a) * 0.5 * (1.0 - s.1);
            g(phi) * (b - a) * half_pi * s.0
        });
    }
    // the integrand is even in phi
    Ok(2.0 * total)
}

/// Polynomial (Neville) extrapolation of samples `(x_k, y_k)` to `x = 0`.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    p[0]
}

/// Radii used to extrapolate `(1 - R^2) f(R)` toward `R = 1`.
pub const ASYMPTOTIC_RADII: [f64; 4] = [0.9, 0.95, 0.975, 0.99];

/// Result of fitting `lim (1 - R^2) lens_area(w, R) = kappa * arccos(1 - 2 rho(w, i)^2)`.
#[derive(Debug, Clone, Serialize)]
pub struct LensFit {
    pub kappa: f64,
    pub r_squared: f64,
    /// `(rho(w, i), arccos(1 - 2 rho^2), extrapolated limit)` per center.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Sample centers for the lens fit: pseudohyperbolic distances spread over
/// `[0.05, 0.95]` at scattered angles.
pub fn lens_fit_centers(count: usize) -> Vec<Point> {
    (0..count)
        .map(|k| {
            let rr = 0.05 + 0.9 * k as f64 / (count.max(2) - 1) as f64;
            let theta = 2.399_963_229_728_653 * k as f64;
            cayley_inv(DiskPoint { u: Complex64::from_polar(rr, theta) })
        })
        .collect()
}

/// Measures the lens constant `kappa` by extrapolating `(1 - R^2) lens_area`
/// over [`ASYMPTOTIC_RADII`] at each center and fitting through the origin.
pub fn fit_lens_constant(centers: &[Point], depth: u32) -> Result<LensFit> {
    let xs: Vec<f64> = ASYMPTOTIC_RADII.iter().map(|r| 1.0 - r * r).collect();
    let samples = centers
        .par_iter()
        .map(|&w| {
            let ys = ASYMPTOTIC_RADII
                .iter()
                .zip(&xs)
                .map(|(&r, &x)| lens_area(w, r, depth).map(|a| a * x))
                .collect::<Result<Vec<f64>>>()?;
            let rr = rho(w, Point::i());
            Ok((rr, (1.0 - 2.0 * rr * rr).acos(), extrapolate_to_zero(&xs, &ys)))
        })
        .collect::<Result<Vec<_>>>()?;
    let sxy: f64 = samples.iter().map(|s| s.1 * s.2).sum();
    let sxx: f64 = samples.iter().map(|s| s.1 * s.1).sum();
    let kappa = sxy / sxx;
    let mean = samples.iter().map(|s| s.2).sum::<f64>() / samples.len() as f64;
    let ss_tot: f64 = samples.iter().map(|s| (s.2 - mean).powi(2)).sum();
    let ss_res: f64 = samples.iter().map(|s| (s.2 - kappa * s.1).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LensFit { kappa, r_squared, samples })
}
