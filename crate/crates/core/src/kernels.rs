//! Affine-ensemble correlation kernels.
//!
//! The mother wavelet of level `(alpha, n)` has the frequency profile
//! `psi(xi) = c xi^{alpha/2} e^{-xi} L_n^alpha(2 xi)` on `xi > 0`, with `c`
//! chosen so that `int |psi|^2 = 1`. Its kernel
//!
//! ```text
//! K(z, w) = sqrt(s s') int_0^inf psi(s' xi) conj(psi(s xi)) e^{i (x - x') xi} dxi
//! ```
//!
//! has a closed form in terms of a terminating hypergeometric series, used by
//! [`kernel_closed`]; [`kernel_quadrature`] evaluates the integral directly
//! and also handles sampled profiles.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::{Complex, Complex64};

use crate::error::{domain, Error, Result};
use crate::gauss::{gauss_legendre, GaussRule};
use crate::geometry::{cayley_inv, group_mul, DiskPoint, HalfPlanePoint};
use crate::real::Real;
use crate::specfun::{gamma_ratio, hyp2f1_terminating, laguerre_unchecked, ln_gamma};
use crate::spline::CubicSpline;

type Point = HalfPlanePoint<f64>;

/// Which scaling of the kernel is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `K(z, z) = 1`.
    #[default]
    Diagonal1,
    /// `p = K / C_psi`, the kernel of an orthogonal projection.
    Projection,
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::Diagonal1 => "diagonal1",
            Normalization::Projection => "projection",
        })
    }
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "diagonal1" | "diagonal" => Ok(Normalization::Diagonal1),
            "projection" => Ok(Normalization::Projection),
            _ => Err(Error::Parse(format!("unknown normalization '{s}' (expected diagonal1 or projection)"))),
        }
    }
}

/// Sampled frequency profile `xi -> fhat(xi)` on `xi > 0`.
///
/// Real and imaginary parts are natural cubic splines in `log xi`. Below the
/// first sample the profile continues as `fhat(xi_0) (xi / xi_0)^p` with the
/// small-frequency exponent `p`; above the last sample it is zero.
#[derive(Debug, Clone)]
pub struct WaveletProfile {
    xi: Vec<f64>,
    re: CubicSpline,
    im: CubicSpline,
    first: Complex64,
    exponent: f64,
    norm_sq: f64,
}

/// Fewest samples accepted in a profile.
pub const MIN_PROFILE_SAMPLES: usize = 64;

impl WaveletProfile {
    /// Builds a profile from samples. Without a declared `exponent` the
    /// small-frequency power is estimated from the first two samples.
    pub fn new(xi: Vec<f64>, values: Vec<Complex64>, exponent: Option<f64>) -> Result<Self> {
        if xi.len() != values.len() {
            return Err(Error::Parse("profile needs one value per frequency".into()));
        }
        if xi.len() < MIN_PROFILE_SAMPLES {
            return Err(Error::Parse(format!(
                "profile needs at least {MIN_PROFILE_SAMPLES} samples, got {}",
                xi.len()
            )));
        }
        if !(xi[0] > 0.0) || xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("profile frequencies must be finite and positive".into()));
        }
        if let Some(k) = xi.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Parse(format!("profile frequencies must increase strictly (row {})", k + 2)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("profile values must be finite".into()));
        }
        let exponent = match exponent {
            Some(p) if p.is_finite() => p,
            Some(p) => return Err(Error::Parse(format!("small-frequency exponent must be finite, got {p}"))),
            None => {
                let (a, b) = (values[0].norm(), values[1].norm());
                if a == 0.0 || b == 0.0 {
                    return Err(Error::Parse(
                        "cannot infer the small-frequency exponent from a vanishing first sample; declare it".into(),
                    ));
                }
                (b / a).ln() / (xi[1] / xi[0]).ln()
            }
        };
        let lx: Vec<f64> = xi.iter().map(|v| v.ln()).collect();
        let re = CubicSpline::new(lx.clone(), values.iter().map(|v| v.re).collect());
        let im = CubicSpline::new(lx, values.iter().map(|v| v.im).collect());
        let mut p = Self { first: values[0], xi, re, im, exponent, norm_sq: 0.0 };
        p.norm_sq = p.weighted_mass(1.0);
        if !(p.norm_sq > 0.0) || !p.norm_sq.is_finite() {
            return Err(Error::Parse("profile has zero or infinite L2 norm".into()));
        }
        Ok(p)
    }

    /// Parses whitespace- or comma-separated rows `xi value` or `xi re im`.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str, exponent: Option<f64>) -> Result<Self> {
        let mut xi = Vec::new();
        let mut vals = Vec::new();
        let mut width = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|c| !c.is_empty())
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("line {}: '{c}' is not a number", lineno + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            if cols.len() != 2 && cols.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 2 or 3 columns, got {}", lineno + 1, cols.len())));
            }
            if *width.get_or_insert(cols.len()) != cols.len() {
                return Err(Error::Parse(format!("line {}: column count changes", lineno + 1)));
            }
            xi.push(cols[0]);
            vals.push(Complex64::new(cols[1], cols.get(2).copied().unwrap_or(0.0)));
        }
        Self::new(xi, vals, exponent)
    }

    /// Samples `f` at `count` log-spaced frequencies in `[lo, hi]`.
    pub fn sample<F: Fn(f64) -> Complex64>(f: F, lo: f64, hi: f64, count: usize, exponent: Option<f64>) -> Result<Self> {
        let step = (hi / lo).ln() / (count.max(2) - 1) as f64;
        let xi: Vec<f64> = (0..count).map(|k| lo * (step * k as f64).exp()).collect();
        let vals = xi.iter().map(|&x| f(x)).collect();
        Self::new(xi, vals, exponent)
    }

    pub fn value(&self, xi: f64) -> Complex64 {
        let (lo, hi) = (self.xi[0], *self.xi.last().unwrap());
        if !(xi > 0.0) || xi > hi {
            return Complex64::new(0.0, 0.0);
        }
        if xi < lo {
            return self.first * (xi / lo).powf(self.exponent);
        }
        let l = xi.ln();
        Complex64::new(self.re.eval(l), self.im.eval(l))
    }

    pub fn knots(&self) -> &[f64] {
        &self.xi
    }

    pub fn support_end(&self) -> f64 {
        *self.xi.last().unwrap()
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `int_0^inf |fhat|^2 dxi`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `int_0^inf |fhat|^2 xi^{k-1} dxi`, with an analytic head below the first sample.
    fn weighted_mass(&self, k: f64) -> f64 {
        let x0 = self.xi[0];
        let q = 2.0 * self.exponent + k;
        let head = if q > 0.0 { self.first.norm_sqr() * x0.powf(k) / q } else { f64::INFINITY };
        let rule = rule_cache(1);
        let mut body = 0.0;
        for w in self.xi.windows(2) {
            body += rule.integrate(w[0].ln(), w[1].ln(), |l| {
                let x = l.exp();
                self.value(x).norm_sqr() * x.powf(k)
            });
        }
        head + body
    }

    /// `2 pi int |fhat|^2 / xi dxi / int |fhat|^2 dxi`.
    pub fn admissibility(&self) -> Result<f64> {
        if !(self.exponent > 0.0) {
            return Err(Error::Admissibility(format!(
                "int |fhat|^2 / xi diverges at 0: the profile behaves like xi^{} there",
                self.exponent
            )));
        }
        Ok(2.0 * PI * self.weighted_mass(0.0) / self.norm_sq)
    }
}

/// The kernel family.
#[derive(Debug, Clone)]
pub enum KernelVariant {
    /// Landau level `n` of the Maass Laplacian with field strength `b`.
    MaassLandau { b: f64, n: usize },
    LaguerreMode { alpha: f64, n: usize },
    GenericWavelet(Arc<WaveletProfile>),
}

/// A kernel together with its normalization.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    variant: KernelVariant,
    normalization: Normalization,
}

/// Serializable description of a [`KernelSpec`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct KernelSummary {
    pub variant: &'static str,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub normalization: Normalization,
}

impl KernelSpec {
    /// Level `n` of the Maass Laplacian, `alpha = 2(b - n) - 1`.
    ///
    /// Needs `b > 1/2` and `n <= floor(b - 1/2)`. The top level can have
    /// `alpha = 0`; its kernel is defined but not square integrable, so
    /// [`admissibility`] and the projection normalization reject it.
    pub fn maass_landau(b: f64, n: usize) -> Result<Self> {
        if !b.is_finite() || !(b > 0.5) {
            return domain(format!("field strength must satisfy B > 1/2, got {b}"));
        }
        let top = (b - 0.5).floor();
        if n as f64 > top {
            return domain(format!("level n = {n} exceeds floor(B - 1/2) = {top} for B = {b}"));
        }
        Ok(Self { variant: KernelVariant::MaassLandau { b, n }, normalization: Normalization::Diagonal1 })
    }

    pub fn laguerre_mode(alpha: f64, n: usize) -> Result<Self> {
        if !alpha.is_finite() || !(alpha > 0.0) {
            return domain(format!("Laguerre mode needs alpha > 0, got {alpha}"));
        }
        Ok(Self { variant: KernelVariant::LaguerreMode { alpha, n }, normalization: Normalization::Diagonal1 })
    }

    /// A sampled profile; it must be admissible.
    pub fn generic(profile: WaveletProfile) -> Result<Self> {
        profile.admissibility()?;
        Ok(Self { variant: KernelVariant::GenericWavelet(Arc::new(profile)), normalization: Normalization::Diagonal1 })
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn variant(&self) -> &KernelVariant {
        &self.variant
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// `(alpha, n)` for the closed-form families.
    pub fn alpha_n(&self) -> Option<(f64, usize)> {
        match self.variant {
            KernelVariant::MaassLandau { b, n } => Some((2.0 * (b - n as f64) - 1.0, n)),
            KernelVariant::LaguerreMode { alpha, n } => Some((alpha, n)),
            KernelVariant::GenericWavelet(_) => None,
        }
    }

    pub fn summary(&self) -> KernelSummary {
        let (variant, b, n) = match self.variant {
            KernelVariant::MaassLandau { b, n } => ("maass_landau", Some(b), Some(n)),
            KernelVariant::LaguerreMode { n, .. } => ("laguerre_mode", None, Some(n)),
            KernelVariant::GenericWavelet(_) => ("generic_wavelet", None, None),
        };
        KernelSummary { variant, b, n, alpha: self.alpha_n().map(|p| p.0), normalization: self.normalization }
    }

    /// Factor turning the unit-diagonal kernel into this normalization.
    pub fn scale(&self) -> Result<f64> {
        match self.normalization {
            Normalization::Diagonal1 => Ok(1.0),
            Normalization::Projection => Ok(1.0 / admissibility(self)?),
        }
    }

    /// The normalized frequency profile at `xi`.
    pub fn profile_value(&self, xi: f64) -> Complex64 {
        match &self.variant {
            KernelVariant::GenericWavelet(p) => p.value(xi) / p.norm_sq().sqrt(),
            _ => {
                let (alpha, n) = self.alpha_n().unwrap();
                Complex64::new(mother_profile(alpha, n, xi), 0.0)
            }
        }
    }
}

/// `sqrt(2^{alpha+1} n! / Gamma(n+alpha+1)) xi^{alpha/2} e^{-xi} L_n^alpha(2 xi)`, zero for `xi <= 0`.
pub fn mother_profile(alpha: f64, n: usize, xi: f64) -> f64 {
    if !(xi > 0.0) {
        return 0.0;
    }
    let nf = n as f64;
    let log_c = 0.5 * ((alpha + 1.0) * std::f64::consts::LN_2 + ln_gamma(nf + 1.0) - ln_gamma(nf + alpha + 1.0));
    (log_c + 0.5 * alpha * xi.ln() - xi).exp() * laguerre_unchecked(n, alpha, 2.0 * xi)
}

/// The unimodular factor `(conj(z) - w) / (conj(w) - z)` of the closed form.
pub fn cocycle_base<T: Real>(z: HalfPlanePoint<T>, w: HalfPlanePoint<T>) -> Complex<T> {
    (z.z().conj() - w.z()) / (w.z().conj() - z.z())
}

/// Unit-diagonal kernel of level `(alpha, n)` in closed form:
/// `(-1)^n gamma_ratio(n, alpha) t^a u^{a+n} F(n+alpha+1, -n; 1+alpha; t)` with
/// `a = (alpha+1)/2`, `t = 4 s s' / |z - conj(w)|^2` and `u` from [`cocycle_base`].
///
/// With `q = z - conj(w)` we have `u = -conj(q)/q`; since `Im q > 0` its
/// principal argument is `pi - 2 arg q`, strictly inside `(-pi, pi)`.
pub fn laguerre_kernel<T: Real>(alpha: T, n: usize, z: HalfPlanePoint<T>, w: HalfPlanePoint<T>) -> Complex<T> {
    let one = T::one();
    let two = one + one;
    let dx = z.x - w.x;
    let ss = z.s + w.s;
    let t = (T::lit(4.0) * z.s * w.s / (dx * dx + ss * ss)).min(one);
    let a = (alpha + one) / two;
    let nf = T::from_usize_lossy(n);
    let theta = T::PI() - two * ss.atan2(dx);
    // c = 1 + alpha > 0, so the series never meets a zero denominator
    let f = hyp2f1_terminating(nf + alpha + one, n, one + alpha, t).unwrap_or_else(|_| T::nan());
    let sign = if n % 2 == 0 { one } else { -one };
    let modulus = sign * gamma_ratio(n, alpha) * t.powf(a) * f;
    Complex::from_polar(one, (a + nf) * theta) * modulus
}

fn check_point(z: Point, name: &str) -> Result<()> {
    if !(z.s > 0.0) || !z.s.is_finite() || !z.x.is_finite() {
        return domain(format!("{name} = ({}, {}) is not in the upper half-plane", z.x, z.s));
    }
    Ok(())
}

/// Closed-form kernel in the kernel's normalization.
pub fn kernel_closed(spec: &KernelSpec, z: Point, w: Point) -> Result<Complex64> {
    check_point(z, "z")?;
    check_point(w, "w")?;
    let Some((alpha, n)) = spec.alpha_n() else {
        return domain("no closed form for a sampled wavelet profile; use kernel_quadrature");
    };
    Ok(laguerre_kernel(alpha, n, z, w) * spec.scale()?)
}

/// Kernel from the frequency integral, divided by its value at `z = w`.
pub fn kernel_quadrature(spec: &KernelSpec, z: Point, w: Point) -> Result<Complex64> {
    check_point(z, "z")?;
    check_point(w, "w")?;
    let (s, sp) = (z.s, w.s);
    let omega = z.x - w.x;
    let (cutoff, scale, knots) = match &spec.variant {
        KernelVariant::GenericWavelet(p) => {
            let mut k: Vec<f64> = p.knots().iter().map(|x| x / s).collect();
            k.extend(p.knots().iter().map(|x| x / sp));
            (p.support_end() / s.max(sp), 1.0 / (s + sp), k)
        }
        _ => {
            let (alpha, n) = spec.alpha_n().unwrap();
            let m = alpha + 2.0 * n as f64;
            ((2.0 * m + 60.0) / (s + sp), 1.0 / (s + sp), Vec::new())
        }
    };
    let breaks = panel_breaks(cutoff, scale, omega, &knots);
    let v = half_line_integral(|xi| spec.profile_value(sp * xi) * spec.profile_value(s * xi).conj(), omega, &breaks)?;
    Ok(v * (s * sp).sqrt() * spec.scale()?)
}

/// Closed form where available, quadrature otherwise.
pub fn kernel(spec: &KernelSpec, z: Point, w: Point) -> Result<Complex64> {
    match spec.variant {
        KernelVariant::GenericWavelet(_) => kernel_quadrature(spec, z, w),
        _ => kernel_closed(spec, z, w),
    }
}

/// The admissibility constant `C_psi = 2 pi int |psi|^2 / xi dxi` of the unit-norm profile.
///
/// Equal to `4 pi / alpha` for the Laguerre levels, independent of `n`.
pub fn admissibility(spec: &KernelSpec) -> Result<f64> {
    match &spec.variant {
        KernelVariant::GenericWavelet(p) => p.admissibility(),
        _ => {
            let (alpha, _) = spec.alpha_n().unwrap();
            if alpha > 0.0 {
                Ok(4.0 * PI / alpha)
            } else {
                Err(Error::Admissibility(format!(
                    "alpha = {alpha}: int |psi|^2 / xi diverges and the level is not square integrable"
                )))
            }
        }
    }
}

/// Density of states `1 / C_psi`, the diagonal of the projection kernel.
pub fn density_of_states(spec: &KernelSpec) -> Result<f64> {
    admissibility(spec).map(|c| 1.0 / c)
}

/// Wavelet transform `W f(z) = sqrt(s) int f(xi) e^{i x xi} conj(psi(s xi)) dxi`
/// against the unit-norm profile of `spec`, so that `W psi(z) = K(z, i)`.
pub fn wavelet_transform(fhat: &WaveletProfile, spec: &KernelSpec, z: Point) -> Result<Complex64> {
    check_point(z, "z")?;
    let s = z.s;
    let mut knots: Vec<f64> = fhat.knots().to_vec();
    let (cutoff, scale) = match &spec.variant {
        KernelVariant::GenericWavelet(p) => {
            knots.extend(p.knots().iter().map(|x| x / s));
            (fhat.support_end().min(p.support_end() / s), 1.0 / (1.0 + s))
        }
        _ => {
            let (alpha, n) = spec.alpha_n().unwrap();
            let m = alpha + 2.0 * n as f64;
            (fhat.support_end().min((2.0 * m + 60.0) / s), 1.0 / (1.0 + s))
        }
    };
    let breaks = panel_breaks(cutoff, scale, z.x, &knots);
    let v = half_line_integral(|xi| fhat.value(xi) * spec.profile_value(s * xi).conj(), z.x, &breaks)?;
    Ok(v * s.sqrt())
}

const ORDERS: [usize; 4] = [8, 16, 32, 64];
const REL_TOL: f64 = 1e-9;
const ABS_FLOOR: f64 = 1e-13;
const GRADED_LEVELS: i32 = 24;

fn rule_cache(k: usize) -> &'static GaussRule<f64> {
    static RULES: OnceLock<Vec<GaussRule<f64>>> = OnceLock::new();
    &RULES.get_or_init(|| ORDERS.iter().map(|&m| gauss_legendre(m)).collect())[k]
}

/// Panel breakpoints: geometric grading toward 0, then uniform panels no
/// wider than the decay scale or an eighth of the oscillation period.
fn panel_breaks(cutoff: f64, scale: f64, omega: f64, extra: &[f64]) -> Vec<f64> {
    let first = scale.min(cutoff);
    let mut b = vec![0.0];
    b.extend((1..=GRADED_LEVELS).rev().map(|k| first * 0.5f64.powi(k)));
    let width = if omega != 0.0 { scale.min(PI / (4.0 * omega.abs())) } else { scale };
    let count = ((cutoff - first) / width).ceil().max(0.0) as usize;
    b.extend((0..=count).map(|j| first + (cutoff - first) * j as f64 / count.max(1) as f64));
    b.extend(extra.iter().copied().filter(|&x| x > 0.0 && x < cutoff));
    b.sort_by(|x, y| x.total_cmp(y));
    b.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs().max(1e-300));
    b
}

/// `int g(xi) e^{i omega xi} dxi` over the panels, with Gauss–Legendre
/// orders doubled from 8 to 64 until successive values agree.
fn half_line_integral<G: Fn(f64) -> Complex64>(g: G, omega: f64, breaks: &[f64]) -> Result<Complex64> {
    let mut prev = Complex64::new(f64::NAN, f64::NAN);
    let mut sum = prev;
    for k in 0..ORDERS.len() {
        let rule = rule_cache(k);
        prev = sum;
        sum = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for p in breaks.windows(2) {
            for (xi, wt) in rule.mapped(p[0], p[1]) {
                let v = g(xi) * wt;
                mass += v.norm();
                sum += v * Complex64::from_polar(1.0, omega * xi);
            }
        }
        if !sum.is_finite() {
            return Err(Error::Evaluation(format!("frequency integrand is not finite (order {})", ORDERS[k])));
        }
        if k > 0 && (sum - prev).norm() <= REL_TOL * sum.norm() + ABS_FLOOR * mass {
            return Ok(sum);
        }
    }
    Err(Error::Resolution(format!(
        "oscillatory quadrature did not settle: order {} gave {prev}, order {} gave {sum}",
        ORDERS[ORDERS.len() - 2],
        ORDERS[ORDERS.len() - 1],
    )))
}

/// Landau level energy `(B - n)(1 - B + n)`.
pub fn landau_energy(b: f64, n: usize) -> f64 {
    let m = b - n as f64;
    m * (1.0 - m)
}

/// Test points for [`maass_residual`]: pseudohyperbolic distances 0.2 and 0.5
/// from `w0` at four angles each.
pub fn maass_test_points(w0: Point) -> Vec<Point> {
    let mut pts = Vec::with_capacity(8);
    for &r in &[0.2, 0.5] {
        for k in 0..4 {
            let u = Complex64::from_polar(r, 0.3 + k as f64 * PI / 2.0);
            pts.push(group_mul(w0, cayley_inv(DiskPoint { u })));
        }
    }
    pts
}

/// Relative residual of the Landau eigen-equation for `z -> K(z, w0)`.
///
/// Applies the second-order central difference discretization of the Maass
/// Laplacian `-s^2 (d_xx + d_ss) + 2 i B s d_x` (the nonnegative sign
/// convention, whose point spectrum is the Landau energies) and returns
/// `max |L K - eps K| / |K|` over [`maass_test_points`].
pub fn maass_residual(spec: &KernelSpec, w0: Point, h: f64) -> Result<f64> {
    let KernelVariant::MaassLandau { b, n } = spec.variant else {
        return domain("the Landau eigen-check applies to Maass-Landau kernels only");
    };
    check_point(w0, "w0")?;
    if !(h > 0.0) || !h.is_finite() {
        return domain(format!("step must be positive, got {h}"));
    }
    let alpha = 2.0 * (b - n as f64) - 1.0;
    let eps = landau_energy(b, n);
    let pts = maass_test_points(w0);
    if let Some(z) = pts.iter().find(|z| z.s - h <= 0.0) {
        return domain(format!("stencil of width {h} at ({}, {}) leaves the half-plane", z.x, z.s));
    }
    let k = |x: f64, s: f64| laguerre_kernel(alpha, n, Point { x, s }, w0);
    let mut worst: f64 = 0.0;
    for z in pts {
        let c = k(z.x, z.s);
        let (xp, xm) = (k(z.x + h, z.s), k(z.x - h, z.s));
        let (sp, sm) = (k(z.x, z.s + h), k(z.x, z.s - h));
        let lap = (xp + xm + sp + sm - c * 4.0) / (h * h);
        let dx = (xp - xm) / (2.0 * h);
        let l = -lap * z.s * z.s + Complex64::new(0.0, 2.0 * b * z.s) * dx;
        worst = worst.max((l - c * eps).norm() / c.norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, s: f64) -> Point {
        Point::new(x, s).unwrap()
    }

    #[test]
    fn diagonal_is_one() {
        for (alpha, n) in [(6.0, 0), (3.0, 2), (1.0, 1), (0.5, 4)] {
            let z = p(0.3, 1.7);
            let v = laguerre_kernel(alpha, n, z, z);
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12, "{alpha} {n}: {v}");
        }
    }

    #[test]
    fn spec_validation() {
        assert!(KernelSpec::maass_landau(0.6, 1).is_err());
        assert!(KernelSpec::maass_landau(0.5, 0).is_err());
        assert!(KernelSpec::maass_landau(3.5, 3).is_ok());
        assert!(KernelSpec::maass_landau(3.5, 4).is_err());
        assert!(KernelSpec::laguerre_mode(0.0, 1).is_err());
        let top = KernelSpec::maass_landau(3.5, 3).unwrap();
        assert!(matches!(admissibility(&top), Err(Error::Admissibility(_))));
    }

    #[test]
    fn admissibility_constant() {
        let k = KernelSpec::laguerre_mode(6.0, 0).unwrap();
        assert!((admissibility(&k).unwrap() - 4.0 * PI / 6.0).abs() < 1e-15);
        let m = KernelSpec::maass_landau(3.5, 0).unwrap();
        assert_eq!(admissibility(&m).unwrap(), admissibility(&k).unwrap());
    }

    #[test]
    fn projection_scaling() {
        let d = KernelSpec::laguerre_mode(6.0, 1).unwrap();
        let pr = d.clone().with_normalization(Normalization::Projection);
        let (z, w) = (p(0.1, 0.8), p(-0.4, 1.3));
        let a = kernel_closed(&d, z, w).unwrap();
        let b = kernel_closed(&pr, z, w).unwrap();
        assert!((a * (6.0 / (4.0 * PI)) - b).norm() < 1e-15);
    }

    #[test]
    fn quadrature_matches_closed_form_at_a_pair() {
        let spec = KernelSpec::laguerre_mode(3.0, 2).unwrap();
        let (z, w) = (p(0.4, 0.7), p(-0.5, 1.9));
        let c = kernel_closed(&spec, z, w).unwrap();
        let q = kernel_quadrature(&spec, z, w).unwrap();
        assert!((c - q).norm() < 1e-9 * c.norm(), "{c} vs {q}");
    }

    #[test]
    fn maass_check_small_residual() {
        let spec = KernelSpec::maass_landau(3.5, 0).unwrap();
        let r = maass_residual(&spec, p(0.3, 1.4), 1e-3).unwrap();
        assert!(r < 1e-3, "{r}");
        assert!(maass_residual(&spec, p(0.0, 0.001), 1e-2).is_err());
        let lm = KernelSpec::laguerre_mode(6.0, 0).unwrap();
        assert!(maass_residual(&lm, p(0.0, 1.0), 1e-3).is_err());
    }

    #[test]
    fn profile_parse_rejects_malformed() {
        assert!(WaveletProfile::parse("1 2\n2 3\n", None).is_err());
        let rows: String = (1..=70).map(|k| format!("{} {}\n", 71 - k, 1.0)).collect();
        assert!(WaveletProfile::parse(&rows, Some(1.0)).is_err());
        let rows: String = (1..=70).map(|k| format!("{} 1 0\n", k)).collect();
        assert!(WaveletProfile::parse(&rows, Some(1.0)).is_ok());
        let bad = format!("{rows}71 1\n");
        assert!(WaveletProfile::parse(&bad, Some(1.0)).is_err());
    }

    #[test]
    fn landau_energies() {
        assert_eq!(landau_energy(3.5, 0), -8.75);
        assert_eq!(landau_energy(3.5, 3), 0.25);
    }
}
