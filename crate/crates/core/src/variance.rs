//! Number variance of the ensemble in a disc `D(i, R)`, computed three ways:
//!
//! * geometric: `int |K(i, w)|^2 |D(w, R) \ D(i, R)|_h dmu+(w)`,
//! * double: `int_{D(i,R)} int_{D(i,R)^c} |K(z, w)|^2 dmu+(w) dmu+(z)`,
//! * trace: `tr T - tr T^2` of the discretized concentration operator.
//!
//! All three are quadratic in the kernel, so they scale by `C_psi^{-2}`
//! between the unit-diagonal and projection normalizations.

use std::f64::consts::PI;

use serde::Serialize;

use crate::concentration::grid_traces;
use crate::error::{Error, Result};
use crate::geometry::{check_radius, disc_area, radius_to_dist, rho};
use crate::kernels::{admissibility, kernel, KernelSpec, Normalization};
use crate::quadrature::{
    annulus_grid, disc_grid, extrapolate_to_zero, fit_lens_constant, halfplane_grid, integrate_real, lens_area,
    lens_fit_centers, ASYMPTOTIC_RADII, DEFAULT_R_MAX,
};
use crate::{Disc, Point};

/// Default radii of a variance report.
pub const DEFAULT_RADII: [f64; 3] = [0.5, 0.7, 0.9];
/// Default grid depth of a variance report.
pub const DEFAULT_DEPTH: u32 = 2;
/// Radii of the empirical lower-bound sweep.
pub const LOWER_BOUND_RADII: [f64; 7] = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
/// Number of lens centers used to measure `kappa`.
pub const LENS_FIT_CENTERS: usize = 20;
/// Truncation radii compared for the tail estimate of half-plane integrals.
pub const TAIL_RADII: (f64, f64) = (0.99, DEFAULT_R_MAX);
/// Largest tail-to-value ratio accepted.
pub const TAIL_TOL: f64 = 0.01;
/// Hyperbolic margins beyond `D(i, R)` for the outer integral of [`variance_double`],
/// divided by `alpha`: the tail of `|K|^2 dmu+` beyond distance `m` decays like `e^{-alpha m}`.
const DOUBLE_MARGINS: (f64, f64) = (14.4, 28.2);

fn unit(spec: &KernelSpec) -> KernelSpec {
    spec.clone().with_normalization(Normalization::Diagonal1)
}

/// `scale^2` converting a unit-diagonal quadratic quantity to the kernel's normalization.
fn quadratic_scale(spec: &KernelSpec) -> Result<f64> {
    match spec.normalization() {
        Normalization::Diagonal1 => Ok(1.0),
        Normalization::Projection => Ok(admissibility(spec)?.powi(-2)),
    }
}

fn check_tail(what: &str, near: f64, far: f64) -> Result<f64> {
    let tail = (far - near).abs();
    if tail > TAIL_TOL * far.abs() {
        return Err(Error::Resolution(format!(
            "{what}: truncation tail {tail:.3e} exceeds {}% of the value {far:.6e}; the kernel decays too slowly",
            TAIL_TOL * 100.0
        )));
    }
    Ok(far)
}

/// `int |K(i, w)|^2 dmu+(w)` over `D(i, r_max)` for the unit-diagonal kernel.
pub fn kernel_mass(spec: &KernelSpec, r_max: f64, depth: u32) -> Result<f64> {
    let spec = unit(spec);
    let grid = halfplane_grid(r_max, depth)?;
    integrate_real(|w| kernel(&spec, Point::i(), w).map(|v| v.norm_sqr()).unwrap_or(f64::NAN), &grid)
}

fn geometric_at(spec: &KernelSpec, r: f64, r_max: f64, depth: u32) -> Result<f64> {
    let grid = halfplane_grid(r_max, depth)?;
    integrate_real(
        |w| {
            let k = kernel(spec, Point::i(), w).map(|v| v.norm_sqr()).unwrap_or(f64::NAN);
            if k == 0.0 {
                return 0.0;
            }
            k * lens_area(w, r, depth).unwrap_or(f64::NAN)
        },
        &grid,
    )
}

/// Variance from the lens-area formula, in the kernel's normalization.
pub fn variance_geometric(spec: &KernelSpec, r: f64, depth: u32) -> Result<f64> {
    check_radius(r)?;
    let u = unit(spec);
    let near = geometric_at(&u, r, TAIL_RADII.0, depth)?;
    let far = geometric_at(&u, r, TAIL_RADII.1, depth)?;
    Ok(check_tail("geometric variance", near, far)? * quadratic_scale(spec)?)
}

fn double_at(spec: &KernelSpec, r: f64, outer: f64, depth: u32) -> Result<f64> {
    let inner = disc_grid(Point::i(), r, depth)?;
    let ann = annulus_grid(Point::i(), r, outer, depth)?;
    integrate_real(
        |z| {
            let mut acc = 0.0;
            for (&w, &wt) in ann.nodes.iter().zip(&ann.weights) {
                match kernel(spec, z, w) {
                    Ok(v) => acc += v.norm_sqr() * wt,
                    Err(_) => return f64::NAN,
                }
            }
            acc
        },
        &inner,
    )
}

/// Variance from the double integral over `D(i, R) x D(i, R)^c`, in the kernel's normalization.
///
/// The complement is truncated at two hyperbolic margins beyond the disc and
/// the difference serves as the tail estimate.
pub fn variance_double(spec: &KernelSpec, r: f64, depth: u32) -> Result<f64> {
    check_radius(r)?;
    let u = unit(spec);
    let d = radius_to_dist(r);
    // generic profiles have no closed-form decay rate; they keep the alpha = 6 margins
    let alpha = spec.alpha_n().map_or(6.0, |(a, _)| a);
    let outer = |m: f64| (0.5 * (d + m / alpha)).tanh();
    let near = double_at(&u, r, outer(DOUBLE_MARGINS.0), depth)?;
    let far = double_at(&u, r, outer(DOUBLE_MARGINS.1), depth)?;
    Ok(check_tail("double-integral variance", near, far)? * quadratic_scale(spec)?)
}

/// Variance `tr T - tr T^2` of the discretized concentration operator, in the kernel's normalization.
pub fn variance_trace(spec: &KernelSpec, r: f64, depth: u32) -> Result<f64> {
    let disc = Disc::new(Point::i(), r)?;
    let t = grid_traces(spec, &disc, depth)?;
    let c = admissibility(spec)?;
    let to_spec = match spec.normalization() {
        Normalization::Projection => 1.0,
        Normalization::Diagonal1 => c * c,
    };
    Ok(t.variance * to_spec)
}

/// Expected number of points in `D(i, R)`, `|D|_h / C_psi`.
pub fn expected_count(spec: &KernelSpec, r: f64) -> Result<f64> {
    Ok(disc_area(r)? / admissibility(spec)?)
}

/// The asymptotic variance constant measured two ways.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticConstant {
    /// Limit of `(1 - R^2) V(R)` extrapolated from [`ASYMPTOTIC_RADII`].
    pub c_extrapolated: f64,
    /// `kappa int |K(i, w)|^2 arccos(1 - 2 rho(w, i)^2) dmu+(w)`.
    pub c_integral: f64,
    pub kappa: f64,
    pub kappa_r_squared: f64,
    /// `(R, (1 - R^2) V(R))`.
    pub sequence: Vec<(f64, f64)>,
    /// Whether the sequence increases toward its limit.
    pub increasing: bool,
    pub normalization: Normalization,
}

/// Measures `kappa` and the constant of `V(R) ~ c / (1 - R^2)`.
pub fn asymptotic_constant(spec: &KernelSpec, depth: u32) -> Result<AsymptoticConstant> {
    let scale = quadratic_scale(spec)?;
    let u = unit(spec);
    let fit = fit_lens_constant(&lens_fit_centers(LENS_FIT_CENTERS), depth)?;
    let sequence = ASYMPTOTIC_RADII
        .iter()
        .map(|&r| Ok((r, (1.0 - r * r) * geometric_at(&u, r, DEFAULT_R_MAX, depth)? * scale)))
        .collect::<Result<Vec<_>>>()?;
    let diffs: Vec<f64> = sequence.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let increasing = diffs.iter().all(|&d| d > 0.0);
    if !increasing && !diffs.iter().all(|&d| d < 0.0) {
        return Err(Error::Convergence(format!(
            "(1 - R^2) V(R) is not monotone over {ASYMPTOTIC_RADII:?}: {:?}",
            sequence.iter().map(|s| s.1).collect::<Vec<_>>()
        )));
    }
    let xs: Vec<f64> = sequence.iter().map(|s| 1.0 - s.0 * s.0).collect();
    let ys: Vec<f64> = sequence.iter().map(|s| s.1).collect();
    let c_extrapolated = extrapolate_to_zero(&xs, &ys);
    let grid = halfplane_grid(DEFAULT_R_MAX, depth)?;
    let integral = integrate_real(
        |w| {
            let r = rho(w, Point::i());
            kernel(&u, Point::i(), w).map(|v| v.norm_sqr()).unwrap_or(f64::NAN) * (1.0 - 2.0 * r * r).acos()
        },
        &grid,
    )?;
    Ok(AsymptoticConstant {
        c_extrapolated,
        c_integral: fit.kappa * integral * scale,
        kappa: fit.kappa,
        kappa_r_squared: fit.r_squared,
        sequence,
        increasing,
        normalization: spec.normalization(),
    })
}

/// Which variance evaluations to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Methods {
    pub geometric: bool,
    pub double: bool,
    pub trace: bool,
}

impl Methods {
    pub const ALL: Methods = Methods { geometric: true, double: true, trace: true };
}

/// The two upper bounds on the variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    /// `|D(i, R)|_h`.
    #[serde(rename = "bound_area")]
    pub upper_area: f64,
    /// `C_psi |D(i, R)|_h` for the unit-diagonal kernel, times `C_psi^{-2}` under projection.
    #[serde(rename = "bound_admissible")]
    pub upper_admissible: f64,
}

/// One row of a variance report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub v_geometric: Option<f64>,
    pub v_double: Option<f64>,
    pub v_trace: Option<f64>,
    /// Expected count `|D|_h / C_psi` (the projection normalization).
    pub expected: f64,
    pub bounds: Bounds,
    pub normalization: Normalization,
    pub c_estimate: Option<f64>,
    pub kappa: Option<f64>,
}

/// Column order of [`VarianceReport::csv_row`].
pub const CSV_HEADER: &str = "R,v_geometric,v_double,v_trace,expected,bound_area,bound_admissible,normalization";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12e}")).unwrap_or_default()
}

impl VarianceReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.12e},{:.12e},{:.12e},{}",
            self.r,
            opt(self.v_geometric),
            opt(self.v_double),
            opt(self.v_trace),
            self.expected,
            self.bounds.upper_area,
            self.bounds.upper_admissible,
            self.normalization
        )
    }

    /// The variances that were computed.
    pub fn values(&self) -> Vec<f64> {
        [self.v_geometric, self.v_double, self.v_trace].into_iter().flatten().collect()
    }
}

/// Rows as CSV with [`CSV_HEADER`].
pub fn reports_csv(rows: &[VarianceReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Variance and bounds at one radius.
pub fn variance_report(spec: &KernelSpec, r: f64, depth: u32, methods: Methods) -> Result<VarianceReport> {
    check_radius(r)?;
    let c = admissibility(spec)?;
    let area = disc_area(r)?;
    let v_geometric = methods.geometric.then(|| variance_geometric(spec, r, depth)).transpose()?;
    let v_double = methods.double.then(|| variance_double(spec, r, depth)).transpose()?;
    let v_trace = methods.trace.then(|| variance_trace(spec, r, depth)).transpose()?;
    let upper_admissible = match spec.normalization() {
        Normalization::Diagonal1 => c * area,
        Normalization::Projection => area / c,
    };
    Ok(VarianceReport {
        r,
        v_geometric,
        v_double,
        v_trace,
        expected: area / c,
        bounds: Bounds { upper_area: area, upper_admissible },
        normalization: spec.normalization(),
        c_estimate: None,
        kappa: None,
    })
}

/// Bound checks at one radius, all in the projection normalization where the
/// process is a genuine determinantal process.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub report: VarianceReport,
    /// Largest of the computed variances, projection normalization.
    pub variance: f64,
    pub expected: f64,
    /// `variance <= expected`.
    pub below_expected: bool,
    /// `C_psi^2 variance <= C_psi |D|_h`, the unit-diagonal form of the admissible bound.
    pub below_admissible: bool,
    pub admissible_margin: f64,
    /// `variance <= |D|_h`, the area bound taken literally.
    pub below_area: bool,
    pub area_margin: f64,
    /// `(R', variance / expected)` over [`LOWER_BOUND_RADII`].
    pub lower_ratios: Vec<(f64, f64)>,
}

/// Evaluates the variance by all methods and checks the upper bounds.
pub fn bounds_report(spec: &KernelSpec, r: f64, depth: u32) -> Result<BoundsReport> {
    let proj = spec.clone().with_normalization(Normalization::Projection);
    let report = variance_report(&proj, r, depth, Methods::ALL)?;
    let c = admissibility(spec)?;
    let variance = report.values().into_iter().fold(0.0, f64::max);
    let area = report.bounds.upper_area;
    let unit_variance = c * c * variance;
    let lower_ratios = LOWER_BOUND_RADII
        .iter()
        .map(|&rr| Ok((rr, variance_trace(&proj, rr, depth)? / expected_count(&proj, rr)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundsReport {
        r,
        variance,
        expected: report.expected,
        below_expected: variance <= report.expected,
        below_admissible: unit_variance <= c * area,
        admissible_margin: c * area - unit_variance,
        below_area: variance <= area,
        area_margin: area - variance,
        lower_ratios,
        report,
    })
}

/// `pi kappa C_psi`, an upper bound for the unit-diagonal asymptotic constant.
pub fn asymptotic_upper_bound(spec: &KernelSpec, kappa: f64) -> Result<f64> {
    Ok(PI * kappa * admissibility(spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_disc_has_small_variance() {
        let spec = KernelSpec::maass_landau(3.5, 0).unwrap();
        let v = variance_double(&spec, 0.05, 1).unwrap();
        let bound = admissibility(&spec).unwrap() * disc_area(0.05).unwrap();
        assert!(v >= 0.0 && v <= bound, "{v} vs {bound}");
    }

    #[test]
    fn csv_row_layout() {
        let spec = KernelSpec::laguerre_mode(6.0, 0).unwrap();
        let rep = variance_report(&spec, 0.5, 1, Methods { geometric: false, double: false, trace: true }).unwrap();
        let row = rep.csv_row();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.ends_with("diagonal1"));
        assert!(row.starts_with("0.5,,,"));
    }

    #[test]
    fn projection_scaling_of_trace_variance() {
        let d = KernelSpec::laguerre_mode(6.0, 0).unwrap();
        let p = d.clone().with_normalization(Normalization::Projection);
        let a = variance_trace(&d, 0.5, 1).unwrap();
        let b = variance_trace(&p, 0.5, 1).unwrap();
        let c = admissibility(&d).unwrap();
        assert!((a / (c * c) - b).abs() < 1e-12 * b);
    }
}
