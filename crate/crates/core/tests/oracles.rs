//! Independent oracles for the numerical routines.

use std::f64::consts::PI;

use affine_ensemble::concentration::{build_operator, reduced_kernel, traces};
use affine_ensemble::geometry::{disc_area, hyp_dist, rho};
use affine_ensemble::kernels::{
    admissibility, kernel_closed, mother_profile, wavelet_transform, KernelSpec, WaveletProfile,
};
use affine_ensemble::quadrature::{disc_grid, halfplane_grid, integrate_real, lens_area, DEFAULT_R_MAX};
use affine_ensemble::sampler::{sample_indices, stream};
use affine_ensemble::specfun::{hyp2f1_terminating, jacobi, laguerre, ln_gamma, PolyParams};
use affine_ensemble::{Disc, Point};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Generalized binomial `y (y-1) ... (y-k+1) / k!`.
fn binom(y: &BigRational, k: usize) -> BigRational {
    let mut acc = BigRational::one();
    for j in 0..k {
        acc = acc * (y - q(j as i64, 1)) / q(j as i64 + 1, 1);
    }
    acc
}

/// `P_n^(a,b)(x) = sum_s C(n+a, n-s) C(n+b, s) ((x-1)/2)^s ((x+1)/2)^(n-s)`, exactly.
fn jacobi_exact(n: usize, a: &BigRational, b: &BigRational, x: &BigRational) -> BigRational {
    let nq = q(n as i64, 1);
    let lo = (x - q(1, 1)) / q(2, 1);
    let hi = (x + q(1, 1)) / q(2, 1);
    let mut acc = BigRational::zero();
    for s in 0..=n {
        let mut t = binom(&(&nq + a), n - s) * binom(&(&nq + b), s);
        for _ in 0..s {
            t *= &lo;
        }
        for _ in 0..n - s {
            t *= &hi;
        }
        acc += t;
    }
    acc
}

fn to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap()
}

/// `sum_k |(a)_k (-n)_k x^k / (k! (c)_k)|`: rounding in the alternating series
/// is proportional to this, not to the value.
fn series_magnitude(a: f64, n: usize, c: f64, x: f64) -> f64 {
    let (mut t, mut sum) = (1.0f64, 1.0f64);
    for k in 0..n {
        let kf = k as f64;
        t *= ((a + kf) * (kf - n as f64) * x / ((kf + 1.0) * (c + kf))).abs();
        sum += t;
    }
    sum
}

const SERIES_TOL: f64 = 1e-14;

#[test]
fn jacobi_matches_exact_rational_sum() {
    let params = [((1, 2), (0, 1)), ((3, 1), (-1, 3)), ((6, 1), (0, 1)), ((-1, 3), (5, 2))];
    let xs = [(-3, 5), (1, 4), (0, 1), (9, 10)];
    for ((an, ad), (bn, bd)) in params {
        for (xn, xd) in xs {
            for n in 0..=10 {
                let exact = jacobi_exact(n, &q(an, ad), &q(bn, bd), &q(xn, xd));
                let p = PolyParams::new(n, an as f64 / ad as f64, bn as f64 / bd as f64).unwrap();
                let x = xn as f64 / xd as f64;
                let v = jacobi(p, x).unwrap();
                let e = to_f64(&exact);
                let (a, b) = (p.alpha, p.beta);
                let prefactor = (1..=n).fold(1.0, |acc, k| acc * (a + k as f64) / k as f64);
                let scale = prefactor.abs() * series_magnitude(n as f64 + a + b + 1.0, n, 1.0 + a, 0.5 * (1.0 - x));
                assert!((v - e).abs() <= SERIES_TOL * scale.max(e.abs()), "n {n} a {an}/{ad} b {bn}/{bd} x {xn}/{xd}: {v} vs {e}");
            }
        }
    }
}

#[test]
fn chu_vandermonde_exact() {
    // 2F1(a, -n; c; 1) = (c - a)_n / (c)_n
    let poch = |x: &BigRational, n: usize| (0..n).fold(BigRational::one(), |acc, k| acc * (x + q(k as i64, 1)));
    for &(a, c) in &[((1, 2), (3, 2)), ((7, 3), (5, 4)), ((-5, 2), (2, 1)), ((4, 1), (1, 3))] {
        let (aq, cq) = (q(a.0, a.1), q(c.0, c.1));
        for n in 0..=8 {
            let exact = to_f64(&(poch(&(&cq - &aq), n) / poch(&cq, n)));
            let (af, cf) = (a.0 as f64 / a.1 as f64, c.0 as f64 / c.1 as f64);
            let v = hyp2f1_terminating(af, n, cf, 1.0).unwrap();
            assert!((v - exact).abs() <= SERIES_TOL * series_magnitude(af, n, cf, 1.0), "{a:?} {c:?} {n}: {v} vs {exact}");
        }
    }
}

#[test]
fn ln_gamma_matches_statrs() {
    for k in 1..400 {
        let x = 0.05 * k as f64 + 0.013 * (k % 7) as f64;
        let a = ln_gamma(x);
        let b = statrs::function::gamma::ln_gamma(x);
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "x = {x}: {a} vs {b}");
    }
}

#[test]
fn laguerre_cubic_explicit() {
    // L_3^a(x) = (-x^3 + 3(a+3) x^2 - 3(a+2)(a+3) x + (a+1)(a+2)(a+3)) / 6
    let l3 = |a: f64, x: f64| (-x.powi(3) + 3.0 * (a + 3.0) * x * x - 3.0 * (a + 2.0) * (a + 3.0) * x + (a + 1.0) * (a + 2.0) * (a + 3.0)) / 6.0;
    let v = laguerre(PolyParams::laguerre(3, 0.5).unwrap(), 2.0).unwrap();
    assert!((v - l3(0.5, 2.0)).abs() < 1e-14);
    assert!((v + 5.375 / 6.0).abs() < 1e-14);
    for &(a, x) in &[(0.0, 0.3), (2.5, 7.0), (6.0, 11.0)] {
        let v = laguerre(PolyParams::laguerre(3, a).unwrap(), x).unwrap();
        assert!((v - l3(a, x)).abs() < 1e-12 * l3(a, x).abs().max(1.0));
    }
}

/// `|D(w, R) \ D(i, R)|` from Gauss–Bonnet: the intersection of two discs of
/// geodesic radius `r` is twice a circular segment cut at distance `d/2`.
fn lens_gauss_bonnet(w: Point, big_r: f64) -> f64 {
    let r = 2.0 * big_r.atanh();
    let area = 2.0 * PI * (r.cosh() - 1.0);
    let d = hyp_dist(w, Point::i());
    if d >= 2.0 * r {
        return area;
    }
    let a = 0.5 * d;
    let phi = (a.tanh() / r.tanh()).acos();
    let h = (r.sinh() * phi.sin()).asinh();
    let beta = (h.tanh() / r.tanh()).min(1.0).acos();
    let segment = 2.0 * phi * (r.cosh() - 1.0) - 2.0 * (0.5 * PI - phi - beta);
    area - 2.0 * segment
}

#[test]
fn lens_area_matches_gauss_bonnet() {
    let mut worst: f64 = 0.0;
    for &big_r in &[0.2, 0.5, 0.8, 0.95] {
        for &(x, s) in &[(0.0, 1.0001), (0.05, 1.0), (0.3, 1.4), (-1.0, 0.7), (2.0, 3.0), (0.0, 20.0), (-0.2, 0.9)] {
            let w = Point { x, s };
            let a = lens_area(w, big_r, 3).unwrap();
            let b = lens_gauss_bonnet(w, big_r);
            worst = worst.max((a - b).abs() / disc_area(big_r).unwrap());
        }
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn disc_areas_at_any_center() {
    for &(x, s) in &[(0.0, 1.0), (3.0, 0.1), (-2.0, 5.0)] {
        for &r in &[0.3, 0.5, 0.8] {
            let g = disc_grid(Point { x, s }, r, 2).unwrap();
            let exact = 4.0 * PI * r * r / (1.0 - r * r);
            assert!((g.total_weight() - exact).abs() < 1e-3 * exact);
        }
    }
}

#[test]
fn measure_integrals_in_closed_form() {
    // int (1 - rho(z, c)^2)^k dmu+ = 4 pi / (k - 1) for every center c
    let grid = halfplane_grid(DEFAULT_R_MAX, 3).unwrap();
    for k in [3, 4, 6] {
        let exact = 4.0 * PI / (k as f64 - 1.0);
        for c in [Point::i(), Point { x: 0.2, s: 1.5 }] {
            let v = integrate_real(|z| (1.0 - rho(z, c).powi(2)).powi(k), &grid).unwrap();
            let tol = if k == 3 { 2e-3 } else { 1e-6 };
            assert!((v - exact).abs() < tol * exact, "k {k}, c {c:?}: {v} vs {exact}");
        }
    }
}

#[test]
fn ground_level_is_the_weighted_bergman_kernel() {
    // alpha (4 Im z Im w)^((alpha+1)/2) (-i (z - conj w))^-(alpha+1) = alpha K(z, w)
    for &alpha in &[1.0, 2.5, 6.0] {
        let spec = KernelSpec::laguerre_mode(alpha, 0).unwrap();
        for &(z, w) in &[
            (Point { x: 0.0, s: 1.0 }, Point { x: 0.7, s: 2.0 }),
            (Point { x: -1.3, s: 0.4 }, Point { x: 0.2, s: 0.9 }),
            (Point { x: 5.0, s: 3.0 }, Point { x: -2.0, s: 0.1 }),
        ] {
            let base = Complex64::new(0.0, -1.0) * (z.z() - w.z().conj());
            let bergman = alpha * (4.0 * z.s * w.s).powf(0.5 * (alpha + 1.0)) * base.powf(-(alpha + 1.0));
            let ours = alpha * kernel_closed(&spec, z, w).unwrap();
            assert!((bergman - ours).norm() < 1e-12 * bergman.norm().max(1e-300), "{bergman} vs {ours}");
        }
    }
}

#[test]
fn transform_of_the_mother_wavelet_is_the_kernel() {
    let spec = KernelSpec::laguerre_mode(2.0, 1).unwrap();
    let psi = WaveletProfile::sample(|x| Complex64::new(mother_profile(2.0, 1, x), 0.0), 1e-5, 80.0, 4000, Some(1.0)).unwrap();
    for &(x, s) in &[(0.0, 1.0), (0.4, 1.3), (-1.5, 0.6), (2.0, 3.0)] {
        let z = Point { x, s };
        let a = wavelet_transform(&psi, &spec, z).unwrap();
        let b = kernel_closed(&spec, z, Point::i()).unwrap();
        assert!((a - b).norm() < 1e-6, "z = {z:?}: {a} vs {b}");
    }
}

#[test]
fn reproducing_identity() {
    // int |W f|^2 dmu+ = C_psi int |f^|^2 with f^(xi) = xi^2 e^-xi, int |f^|^2 = 3/4
    let spec = KernelSpec::maass_landau(1.5, 0).unwrap();
    let f = WaveletProfile::sample(|x| Complex64::new(x * x * (-x).exp(), 0.0), 1e-5, 60.0, 3000, Some(2.0)).unwrap();
    let grid = halfplane_grid(DEFAULT_R_MAX, 2).unwrap();
    let lhs = integrate_real(|z| wavelet_transform(&f, &spec, z).unwrap().norm_sqr(), &grid).unwrap();
    let rhs = admissibility(&spec).unwrap() * 0.75;
    assert!((lhs - rhs).abs() < 5e-3 * rhs, "{lhs} vs {rhs}");
}

#[test]
fn reduced_kernel_diagonal_integrates_to_n_omega() {
    let spec = KernelSpec::maass_landau(3.5, 0).unwrap();
    let op = build_operator(&spec, &Disc::new(Point::i(), 0.8).unwrap(), 2).unwrap();
    let n = traces(&op).n_omega as f64;
    let g = op.grid();
    let total: f64 = g
        .nodes
        .iter()
        .zip(&g.weights)
        .map(|(&z, &w)| w * reduced_kernel(&op, z, z).unwrap().value.re)
        .sum();
    assert!((total - n).abs() < 0.01 * n, "{total} vs {n}");
}

#[test]
fn rank_one_sampler_follows_the_squared_vector() {
    let m = 20;
    let raw: Vec<Complex64> = (0..m).map(|i| Complex64::from_polar(((i + 1) as f64).sqrt(), 0.7 * i as f64)).collect();
    let norm = raw.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let v = DMatrix::from_fn(m, m, |i, j| if j == 0 { raw[i] / norm } else { Complex64::new(0.0, 0.0) });
    let mut eig = vec![0.0; m];
    eig[0] = 1.0;
    let draws = 20_000;
    let mut counts = vec![0usize; m];
    let mut rng = stream(2024);
    for _ in 0..draws {
        let s = sample_indices(&eig, &v, &mut rng);
        assert_eq!(s.len(), 1);
        counts[s[0]] += 1;
    }
    let chi2: f64 = (0..m)
        .map(|i| {
            let e = draws as f64 * (raw[i].norm_sqr() / (norm * norm));
            (counts[i] as f64 - e).powi(2) / e
        })
        .sum();
    let p = 1.0 - ChiSquared::new((m - 1) as f64).unwrap().cdf(chi2);
    assert!(p > 1e-3, "chi2 = {chi2}, p = {p}");
}
