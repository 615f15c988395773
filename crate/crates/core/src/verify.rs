//! Runtime self-checks, grouped by module.
//!
//! Each check compares a computed quantity with an independent value and a
//! tolerance. The strict profile divides tolerances by ten and refines grids
//! by one level.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::concentration::{build_operator, traces};
use crate::error::Result;
use crate::gauss::{gauss_laguerre, gauss_legendre};
use crate::geometry::{
    cayley, cayley_inv, disc_area, group_inv, group_mul, hyp_dist, mobius, rho, DiskPoint, MobiusMap,
};
use crate::kernels::{
    admissibility, kernel_closed, kernel_quadrature, maass_residual, mother_profile, KernelSpec, Normalization,
    WaveletProfile,
};
use crate::quadrature::{
    disc_grid, fit_lens_constant, halfplane_grid, integrate_real, lens_area, lens_fit_centers, DEFAULT_R_MAX,
};
use crate::sampler::{batch_stats, poisson_binomial, sample, total_variation};
use crate::specfun::{gamma_ratio, hyp2f1_terminating, jacobi, jacobi_recurrence, laguerre, ln_gamma, PolyParams};
use crate::variance::{asymptotic_constant, kernel_mass, variance_double, variance_geometric, variance_trace};
use crate::{Disc, Point};

/// Tolerance profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    #[default]
    Default,
    Strict,
}

impl Profile {
    fn tol(self, t: f64) -> f64 {
        match self {
            Profile::Default => t,
            Profile::Strict => t / 10.0,
        }
    }

    fn depth(self, d: u32) -> u32 {
        match self {
            Profile::Default => d,
            Profile::Strict => d + 1,
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Profile::Default),
            "strict" => Ok(Profile::Strict),
            _ => Err(crate::Error::Parse(format!("unknown tolerance profile '{s}' (expected default or strict)"))),
        }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: String,
    pub passed: bool,
    /// The measured error or statistic.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

/// Module names accepted by [`run`].
pub const MODULES: [&str; 7] = ["specfun", "geometry", "quadrature", "kernels", "concentration", "sampler", "variance"];

fn check(module: &'static str, name: &str, value: f64, tolerance: f64, detail: String) -> Check {
    Check { module, name: name.to_string(), passed: value.is_finite() && value <= tolerance, value, tolerance, detail }
}

fn failed(module: &'static str, name: &str, err: crate::Error) -> Check {
    Check { module, name: name.to_string(), passed: false, value: f64::NAN, tolerance: 0.0, detail: err.to_string() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_point(rng: &mut ChaCha8Rng) -> Point {
    Point { x: rng.random_range(-2.0..2.0), s: rng.random_range(-1.5f64..1.5).exp() }
}

/// Runs the checks of the modules in `only` (all modules when empty).
pub fn run(profile: Profile, only: &[String]) -> Vec<Check> {
    let want = |m: &str| only.is_empty() || only.iter().any(|o| o == m);
    let mut out = Vec::new();
    if want("specfun") {
        out.extend(specfun_checks(profile));
    }
    if want("geometry") {
        out.extend(geometry_checks(profile));
    }
    if want("quadrature") {
        out.extend(quadrature_checks(profile));
    }
    if want("kernels") {
        out.extend(kernel_checks(profile));
    }
    if want("concentration") {
        out.extend(concentration_checks(profile));
    }
    if want("sampler") {
        out.extend(sampler_checks(profile));
    }
    if want("variance") {
        out.extend(variance_checks(profile));
    }
    out
}

/// `sum_k |(a)_k (-n)_k x^k / (k! (c)_k)|`, the scale of the cancellation in
/// the terminating series.
fn series_magnitude(a: f64, n: usize, c: f64, x: f64) -> f64 {
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for k in 0..n {
        let kf = k as f64;
        term *= ((a + kf) * (kf - n as f64) * x / ((kf + 1.0) * (c + kf))).abs();
        sum += term;
    }
    sum
}

/// `int t^{alpha-1} e^{-2t} L_n^alpha(2t)^2 dt` by Gauss–Laguerre rules with
/// parameter `alpha - 1`, doubling the node count until the relative change
/// falls below `1e-10`.
pub fn weighted_norm_integral(n: usize, alpha: f64) -> Result<f64> {
    let eval = |m: usize| -> Result<f64> {
        let rule = gauss_laguerre(m, alpha - 1.0)?;
        Ok(rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| w * (-t).exp() * laguerre(PolyParams::laguerre(n, alpha).unwrap(), 2.0 * t).unwrap().powi(2))
            .sum())
    };
    let mut m = 16;
    let mut prev = eval(m)?;
    while m < 512 {
        m *= 2;
        let next = eval(m)?;
        if rel(next, prev) < 1e-10 {
            return Ok(next);
        }
        prev = next;
    }
    Err(crate::Error::Convergence(format!("norm integral for n = {n}, alpha = {alpha} did not settle")))
}

fn specfun_checks(p: Profile) -> Vec<Check> {
    let mut out = Vec::new();
    let mut worst: f64 = 0.0;
    for &alpha in &[0.5, 2.0, 6.0] {
        let rule = gauss_laguerre(40, alpha).unwrap();
        for n in 0..=6 {
            for m in 0..=6 {
                let v: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&t, &w)| {
                        let a = laguerre(PolyParams::laguerre(n, alpha).unwrap(), t).unwrap();
                        let b = laguerre(PolyParams::laguerre(m, alpha).unwrap(), t).unwrap();
                        w * a * b
                    })
                    .sum();
                let norm = (ln_gamma(n as f64 + alpha + 1.0) - ln_gamma(n as f64 + 1.0)).exp();
                let err = if n == m { rel(v, norm) } else { v.abs() / norm };
                worst = worst.max(err);
            }
        }
    }
    out.push(check("specfun", "laguerre orthogonality", worst, p.tol(1e-8), "n, m <= 6, alpha in {0.5, 2, 6}".into()));

    let mut worst: f64 = 0.0;
    let mut detail = String::from("n <= 6, alpha in {0.5, 2, 6}");
    for &alpha in &[0.5, 2.0, 6.0] {
        for n in 0..=6 {
            let exact = (ln_gamma(n as f64 + alpha + 1.0) - ln_gamma(n as f64 + 1.0)).exp() / (2f64.powf(alpha) * alpha);
            match weighted_norm_integral(n, alpha) {
                Ok(v) => worst = worst.max(rel(v, exact)),
                Err(e) => {
                    worst = f64::INFINITY;
                    detail = e.to_string();
                }
            }
        }
    }
    out.push(check("specfun", "weighted norm integral", worst, p.tol(1e-8), detail));

    let mut worst: f64 = 0.0;
    for n in 0..=20 {
        for &(a, b) in &[(0.5, 0.0), (2.0, 0.0), (1.0, 1.5), (3.0, -0.5)] {
            for k in 0..9 {
                let x = -1.0 + 0.25 * k as f64;
                let pp = PolyParams::new(n, a, b).unwrap();
                let (u, v) = (jacobi(pp, x).unwrap(), jacobi_recurrence(pp, x).unwrap());
                let scale = gamma_ratio(n, a) * series_magnitude(n as f64 + a + b + 1.0, n, 1.0 + a, 0.5 * (1.0 - x));
                worst = worst.max((u - v).abs() / scale.max(v.abs()));
            }
        }
    }
    out.push(check(
        "specfun",
        "jacobi: series vs recurrence",
        worst,
        p.tol(1e-12),
        "n <= 20, error relative to the summed absolute series terms".into(),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(0..12usize);
        let alpha = rng.random_range(-0.9..8.0);
        let v = hyp2f1_terminating(n as f64 + alpha + 1.0, n, 1.0 + alpha, 1.0).unwrap();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let exact = sign / gamma_ratio(n, alpha);
        let scale = series_magnitude(n as f64 + alpha + 1.0, n, 1.0 + alpha, 1.0);
        worst = worst.max((v - exact).abs() / scale);
    }
    out.push(check(
        "specfun",
        "chu-vandermonde at x = 1",
        worst,
        p.tol(1e-13),
        "50 random (n, alpha), error relative to the summed absolute series terms".into(),
    ));
    out
}

/// `int_D f(cayley_inv u) 4 (1 - |u|^2)^{-2} du` by a tensor rule in polar coordinates.
fn disc_model_integral<F: Fn(Point) -> f64>(f: F) -> f64 {
    let radial = gauss_legendre::<f64>(400);
    let n_theta = 512;
    let mut acc = 0.0;
    for (r, wr) in radial.mapped(0.0, 1.0) {
        let mut ring = 0.0;
        for j in 0..n_theta {
            let u = Complex64::from_polar(r, 2.0 * PI * j as f64 / n_theta as f64);
            ring += f(cayley_inv(DiskPoint { u }));
        }
        acc += wr * r * 4.0 / (1.0 - r * r).powi(2) * ring * 2.0 * PI / n_theta as f64;
    }
    acc
}

/// Smooth integrands decaying toward the boundary, for measure checks.
pub fn measure_test_functions() -> Vec<(&'static str, Box<dyn Fn(Point) -> f64 + Sync>)> {
    let c = Point { x: 0.4, s: 1.3 };
    vec![
        ("(1 - rho(z, i)^2)^4", Box::new(|z: Point| (1.0 - rho(z, Point::i()).powi(2)).powi(4))),
        ("(1 - rho(z, c)^2)^5", Box::new(move |z: Point| (1.0 - rho(z, c).powi(2)).powi(5))),
        ("sech(d(z, i))^6", Box::new(|z: Point| (1.0 / hyp_dist(z, Point::i()).cosh()).powi(6))),
        ("x^2 (1 - rho^2)^6", Box::new(|z: Point| z.x * z.x * (1.0 - rho(z, Point::i()).powi(2)).powi(6))),
        ("s (1 - rho(z, c)^2)^6", Box::new(move |z: Point| z.s * (1.0 - rho(z, c).powi(2)).powi(6))),
    ]
}

fn geometry_checks(p: Profile) -> Vec<Check> {
    let mut out = Vec::new();
    let depth = p.depth(2);
    let mut worst: f64 = 0.0;
    for &r in &[0.3, 0.5, 0.8] {
        let g = disc_grid(Point::i(), r, depth).unwrap();
        worst = worst.max(rel(g.total_weight(), 4.0 * PI * r * r / (1.0 - r * r)));
    }
    out.push(check("geometry", "disc area by quadrature", worst, p.tol(1e-3), "R in {0.3, 0.5, 0.8}".into()));

    let grid = halfplane_grid(DEFAULT_R_MAX, p.depth(3)).unwrap();
    let mut worst: f64 = 0.0;
    for (_, f) in measure_test_functions() {
        let a = integrate_real(|z| f(z), &grid).unwrap();
        let b = disc_model_integral(|z| f(z));
        worst = worst.max(rel(a, b));
    }
    out.push(check("geometry", "measure transport", worst, p.tol(1e-6), "5 integrands, half-plane vs disc model".into()));

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut e1, mut e2, mut e3): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..10_000 {
        let (z, w) = (random_point(&mut rng), random_point(&mut rng));
        e1 = e1.max((rho(group_inv(z), Point::i()) - rho(Point::i(), z)).abs());
        e2 = e2.max((rho(group_mul(z, w), Point::i()) - rho(w, group_inv(z))).abs());
        let (u, v) = (cayley(z), cayley(w));
        let cr = (u.u - v.u).norm() / (Complex64::new(1.0, 0.0) - u.u * v.u.conj()).norm();
        e3 = e3.max((cr - rho(z, w)).abs());
    }
    out.push(check("geometry", "rho(z^-1, i) = rho(i, z)", e1, p.tol(1e-12), "10^4 random z".into()));
    out.push(check("geometry", "rho(zw, i) = rho(w, z^-1)", e2, p.tol(1e-12), "10^4 random pairs".into()));
    out.push(check("geometry", "cayley preserves rho", e3, p.tol(1e-12), "10^4 random pairs".into()));

    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = loop {
            let c: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            if c[0] * c[3] - c[1] * c[2] > 0.1 {
                break MobiusMap::new(c[0], c[1], c[2], c[3]).unwrap();
            }
        };
        let (z, w) = (random_point(&mut rng), random_point(&mut rng));
        let d = hyp_dist(z, w);
        let dm = hyp_dist(mobius(m, z).unwrap(), mobius(m, w).unwrap());
        worst = worst.max((d - dm).abs() / d.max(1.0));
    }
    out.push(check("geometry", "mobius isometry", worst, p.tol(1e-11), "100 random maps".into()));
    out
}

fn quadrature_checks(p: Profile) -> Vec<Check> {
    let mut out = Vec::new();
    let depth = p.depth(2);
    match fit_lens_constant(&lens_fit_centers(20), depth) {
        Ok(fit) => out.push(check(
            "quadrature",
            "lens asymptotics fit",
            1.0 - fit.r_squared,
            p.tol(1e-3),
            format!("kappa = {:.6}, R^2 = {:.9}", fit.kappa, fit.r_squared),
        )),
        Err(e) => out.push(failed("quadrature", "lens asymptotics fit", e)),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    let mut over: f64 = 0.0;
    for _ in 0..100 {
        let w = random_point(&mut rng);
        let r = rng.random_range(0.2..0.9);
        let a = lens_area(w, r, depth).unwrap();
        let b = lens_area(group_inv(w), r, depth).unwrap();
        worst = worst.max((a - b).abs() / disc_area(r).unwrap());
        over = over.max(a / disc_area(r).unwrap() - 1.0);
    }
    out.push(check("quadrature", "lens invariant under w -> w^-1", worst, p.tol(1e-9), "100 random w".into()));
    out.push(check("quadrature", "lens <= disc area", over.max(0.0), 1e-12, "100 random w".into()));

    let spec = KernelSpec::laguerre_mode(6.0, 0).unwrap();
    let a = kernel_mass(&spec, DEFAULT_R_MAX, depth).unwrap();
    let b = kernel_mass(&spec, DEFAULT_R_MAX, depth + 1).unwrap();
    out.push(check("quadrature", "self-convergence of |K|^2 mass", rel(a, b), p.tol(1e-4), format!("{a} vs {b}")));
    out
}

fn kernel_checks(p: Profile) -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let levels = [(6.0, 0), (3.0, 2), (1.0, 1)];
    let (mut diag, mut herm, mut mob): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &(alpha, n) in &levels {
        let spec = KernelSpec::laguerre_mode(alpha, n).unwrap();
        for _ in 0..100 {
            let (z, w) = (random_point(&mut rng), random_point(&mut rng));
            diag = diag.max((kernel_closed(&spec, z, z).unwrap() - 1.0).norm());
            herm = herm.max((kernel_closed(&spec, z, w).unwrap() - kernel_closed(&spec, w, z).unwrap().conj()).norm());
            let th = rng.random_range(0.0..2.0 * PI);
            let m = MobiusMap::rotation_about_i(th);
            let g = MobiusMap::from_group(random_point(&mut rng));
            let (mz, mw) = (mobius(g, mobius(m, z).unwrap()).unwrap(), mobius(g, mobius(m, w).unwrap()).unwrap());
            let a = kernel_closed(&spec, z, w).unwrap().norm();
            let b = kernel_closed(&spec, mz, mw).unwrap().norm();
            mob = mob.max((a - b).abs());
        }
    }
    out.push(check("kernels", "unit diagonal", diag, p.tol(1e-10), "3 levels x 100 points".into()));
    out.push(check("kernels", "hermitian symmetry", herm, p.tol(1e-12), "3 levels x 100 pairs".into()));
    out.push(check("kernels", "mobius modulus invariance", mob, p.tol(1e-10), "3 levels x 100 maps".into()));

    let mut worst: f64 = 0.0;
    for &(alpha, n) in &levels {
        let spec = KernelSpec::laguerre_mode(alpha, n).unwrap();
        for _ in 0..10 {
            let z = random_point(&mut rng);
            let w = group_mul(z, cayley_inv(DiskPoint { u: Complex64::from_polar(rng.random_range(0.0..0.8), rng.random_range(0.0..6.3)) }));
            let a = kernel_closed(&spec, z, w).unwrap();
            match kernel_quadrature(&spec, z, w) {
                Ok(b) => worst = worst.max((a - b).norm() / a.norm()),
                Err(_) => worst = f64::INFINITY,
            }
        }
    }
    out.push(check("kernels", "closed form vs quadrature", worst, p.tol(1e-6), "3 levels x 10 pairs".into()));

    let mut worst: f64 = 0.0;
    for &(b, n) in &[(1.5, 0), (2.75, 1), (3.5, 0)] {
        let spec = KernelSpec::maass_landau(b, n).unwrap();
        let m = kernel_mass(&spec, DEFAULT_R_MAX, p.depth(2)).unwrap();
        worst = worst.max(rel(m, admissibility(&spec).unwrap()));
    }
    out.push(check("kernels", "total mass = 4 pi / alpha", worst, p.tol(1e-3), "(B, n) in {(1.5,0), (2.75,1), (3.5,0)}".into()));

    let mut worst: f64 = 0.0;
    for n in [0, 3] {
        let spec = KernelSpec::maass_landau(3.5, n).unwrap();
        worst = worst.max(maass_residual(&spec, Point { x: 0.3, s: 1.4 }, 1e-3).unwrap_or(f64::INFINITY));
    }
    out.push(check("kernels", "landau eigen-equation residual", worst, p.tol(1e-3), "B = 3.5, n in {0, 3}, h = 1e-3".into()));

    let prof = WaveletProfile::sample(|x| Complex64::new(mother_profile(2.0, 1, x), 0.0), 1e-4, 60.0, 2000, Some(1.0));
    match prof.and_then(KernelSpec::generic) {
        Ok(g) => {
            let c = admissibility(&g).unwrap();
            out.push(check("kernels", "sampled profile admissibility", rel(c, 2.0 * PI), p.tol(1e-3), format!("C = {c}")));
        }
        Err(e) => out.push(failed("kernels", "sampled profile admissibility", e)),
    }
    out
}

fn concentration_checks(p: Profile) -> Vec<Check> {
    let mut out = Vec::new();
    let spec = KernelSpec::maass_landau(3.5, 0).unwrap();
    let disc = Disc::new(Point::i(), 0.8).unwrap();
    let op = match build_operator(&spec, &disc, p.depth(2)) {
        Ok(op) => op,
        Err(e) => return vec![failed("concentration", "build operator", e)],
    };
    let t = traces(&op);
    out.push(check("concentration", "trace = density x area", rel(t.expected, 6.0 * 0.64 / 0.36), p.tol(1e-6), format!("tr = {}", t.expected)));
    let sum: f64 = op.eigenvalues().iter().sum();
    out.push(check("concentration", "sum of eigenvalues = trace", (sum - t.expected).abs(), 1e-8, String::new()));
    out.push(check("concentration", "hermitian defect", op.hermitian_defect(), 1e-12, String::new()));
    out.push(check("concentration", "eigen residual", op.eigen_residual(), 1e-10, String::new()));
    out.push(check("concentration", "eigenvalue clamp", op.clamp_magnitude(), 1e-8, String::new()));
    out.push(check(
        "concentration",
        "0 <= variance <= expected",
        if t.variance >= 0.0 && t.variance <= t.expected { 0.0 } else { 1.0 },
        0.0,
        format!("variance = {}", t.variance),
    ));
    out
}

fn sampler_checks(p: Profile) -> Vec<Check> {
    let mut out = Vec::new();
    let spec = KernelSpec::maass_landau(3.5, 0).unwrap();
    let disc = Disc::new(Point::i(), 0.8).unwrap();
    let op = match build_operator(&spec, &disc, p.depth(2)) {
        Ok(op) => op,
        Err(e) => return vec![failed("sampler", "build operator", e)],
    };
    let same = sample(&op, 5) == sample(&op, 5);
    out.push(check("sampler", "determinism", if same { 0.0 } else { 1.0 }, 0.0, String::new()));
    let t = traces(&op);
    let st = batch_stats(&op, 1000, 0);
    out.push(check("sampler", "mean count (standard errors)", (st.mean - t.expected).abs() / st.mean_se, 3.0, format!("{} vs {}", st.mean, t.expected)));
    out.push(check("sampler", "count variance (standard errors)", (st.var - t.variance).abs() / st.var_se, 5.0, format!("{} vs {}", st.var, t.variance)));
    let tv = total_variation(&st.counts, &poisson_binomial(op.eigenvalues()));
    out.push(check("sampler", "count law total variation", tv, 0.05, "1000 samples".into()));
    out
}

fn variance_checks(p: Profile) -> Vec<Check> {
    let mut out = Vec::new();
    let depth = p.depth(2);
    let spec = KernelSpec::maass_landau(3.5, 0).unwrap();
    for &r in &[0.5, 0.7] {
        let name = format!("methods agree at R = {r}");
        let v = (|| -> Result<(f64, f64, f64)> {
            Ok((variance_geometric(&spec, r, depth)?, variance_double(&spec, r, depth)?, variance_trace(&spec, r, depth)?))
        })();
        match v {
            Ok((g, d, t)) => {
                let spread = rel(g, d).max(rel(t, d));
                out.push(check("variance", &name, spread, p.tol(1e-2), format!("{g:.8} / {d:.8} / {t:.8}")));
            }
            Err(e) => out.push(failed("variance", &name, e)),
        }
    }
    match asymptotic_constant(&spec, depth) {
        Ok(a) => out.push(check(
            "variance",
            "asymptotic constant: extrapolated vs integral",
            rel(a.c_extrapolated, a.c_integral),
            p.tol(2e-2),
            format!("{} vs {} (kappa {})", a.c_extrapolated, a.c_integral, a.kappa),
        )),
        Err(e) => out.push(failed("variance", "asymptotic constant", e)),
    }
    let proj = spec.clone().with_normalization(Normalization::Projection);
    match variance_trace(&proj, 0.8, depth) {
        Ok(v) => {
            let e = disc_area(0.8).unwrap() / admissibility(&spec).unwrap();
            out.push(check("variance", "variance <= expected", (v - e).max(0.0), 0.0, format!("{v} <= {e}")));
        }
        Err(e) => out.push(failed("variance", "variance <= expected", e)),
    }
    out
}
