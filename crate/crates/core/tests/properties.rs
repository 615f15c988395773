use std::f64::consts::PI;

use affine_ensemble::geometry::{
    cayley, cayley_inv, disc_area, group_inv, group_mul, hyp_dist, mobius, rho, MobiusMap,
};
use affine_ensemble::kernels::{kernel_closed, KernelSpec, Normalization};
use affine_ensemble::quadrature::lens_area;
use affine_ensemble::sampler::poisson_binomial;
use affine_ensemble::specfun::{jacobi_recurrence, PolyParams};
use affine_ensemble::spline::CubicSpline;
use affine_ensemble::variance::variance_trace;
use affine_ensemble::Point;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Point> {
    (-3.0f64..3.0, -2.0f64..2.0).prop_map(|(x, l)| Point { x, s: l.exp() })
}

fn mobius_map() -> impl Strategy<Value = MobiusMap<f64>> {
    (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0)
        .prop_filter("det > 0.1", |(a, b, c, d)| a * d - b * c > 0.1)
        .prop_map(|(a, b, c, d)| MobiusMap::new(a, b, c, d).unwrap())
}

fn level() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (0usize..3).prop_map(|n| KernelSpec::maass_landau(3.5, n).unwrap()),
        (0.3f64..8.0, 0usize..4).prop_map(|(a, n)| KernelSpec::laguerre_mode(a, n).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn triangle_inequality(a in point(), b in point(), c in point()) {
        prop_assert!(hyp_dist(a, c) <= hyp_dist(a, b) + hyp_dist(b, c) + 1e-9);
    }

    #[test]
    fn rho_is_a_bounded_symmetric_gauge(a in point(), b in point()) {
        let r = rho(a, b);
        prop_assert!((0.0..1.0).contains(&r));
        prop_assert!((r - rho(b, a)).abs() < 1e-15);
        prop_assert!(rho(a, a) < 1e-12);
    }

    #[test]
    fn mobius_maps_are_isometries(m in mobius_map(), a in point(), b in point()) {
        let (ma, mb) = (mobius(m, a).unwrap(), mobius(m, b).unwrap());
        prop_assert!((rho(ma, mb) - rho(a, b)).abs() < 1e-10);
    }

    #[test]
    fn group_law(a in point(), b in point(), c in point()) {
        let e = group_mul(a, group_inv(a));
        prop_assert!((e.x).abs() < 1e-12 && (e.s - 1.0).abs() < 1e-12);
        let l = group_mul(group_mul(a, b), c);
        let r = group_mul(a, group_mul(b, c));
        prop_assert!(hyp_dist(l, r) < 1e-9);
        // left translations are isometries
        prop_assert!((rho(group_mul(c, a), group_mul(c, b)) - rho(a, b)).abs() < 1e-12);
    }

    #[test]
    fn cayley_round_trip(a in point()) {
        let back = cayley_inv(cayley(a));
        prop_assert!((back.x - a.x).abs() < 1e-9 * (1.0 + a.x.abs()) && (back.s / a.s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unit_diagonal(spec in level(), z in point()) {
        prop_assert!((kernel_closed(&spec, z, z).unwrap() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn hermitian_symmetry(spec in level(), z in point(), w in point()) {
        let a = kernel_closed(&spec, z, w).unwrap();
        let b = kernel_closed(&spec, w, z).unwrap().conj();
        prop_assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn modulus_is_mobius_invariant(spec in level(), m in mobius_map(), z in point(), w in point()) {
        let a = kernel_closed(&spec, z, w).unwrap().norm();
        let b = kernel_closed(&spec, mobius(m, z).unwrap(), mobius(m, w).unwrap()).unwrap().norm();
        prop_assert!((a - b).abs() < 1e-10);
        prop_assert!(a <= 1.0 + 1e-12);
    }

    #[test]
    fn projection_diagonal_is_density(spec in level(), z in point()) {
        let p = spec.clone().with_normalization(Normalization::Projection);
        let (alpha, _) = spec.alpha_n().unwrap();
        let d = kernel_closed(&p, z, z).unwrap();
        prop_assert!((d.re - alpha / (4.0 * PI)).abs() < 1e-12 && d.im.abs() < 1e-12);
    }

    #[test]
    fn jacobi_reflection(n in 0usize..12, a in -0.9f64..5.0, b in -0.9f64..5.0, x in -1.0f64..1.0) {
        let p = jacobi_recurrence(PolyParams::new(n, a, b).unwrap(), -x).unwrap();
        let q = jacobi_recurrence(PolyParams::new(n, b, a).unwrap(), x).unwrap();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((p - sign * q).abs() < 1e-11 * (1.0 + q.abs()));
    }

    #[test]
    fn poisson_binomial_is_a_law(probs in prop::collection::vec(0.0f64..1.0, 0..40)) {
        let law = poisson_binomial(&probs);
        prop_assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mean: f64 = law.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        prop_assert!((mean - probs.iter().sum::<f64>()).abs() < 1e-10);
        prop_assert!(law.iter().all(|&p| p >= -1e-15));
    }

    #[test]
    fn spline_interpolates(ys in prop::collection::vec(-5.0f64..5.0, 3..20)) {
        let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64 * 0.7).collect();
        let s = CubicSpline::new(xs.clone(), ys.clone());
        for (x, y) in xs.iter().zip(&ys) {
            prop_assert!((s.eval(*x) - y).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lens_is_bounded_by_area(w in point(), r in 0.1f64..0.95) {
        let a = lens_area(w, r, 2).unwrap();
        prop_assert!(a >= 0.0 && a <= disc_area(r).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn lens_is_symmetric_under_inversion(w in point(), r in 0.1f64..0.95) {
        let a = lens_area(w, r, 2).unwrap();
        let b = lens_area(group_inv(w), r, 2).unwrap();
        prop_assert!((a - b).abs() < 1e-9 * disc_area(r).unwrap());
    }

    #[test]
    fn lens_grows_with_distance(x in -1.0f64..1.0, r in 0.2f64..0.9) {
        let near = lens_area(Point { x: 0.1 * x, s: 1.05 }, r, 2).unwrap();
        let far = lens_area(Point { x, s: 2.5 }, r, 2).unwrap();
        prop_assert!(near < far);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn variance_scales_by_inverse_square_admissibility(r in 0.2f64..0.6, n in 0usize..2) {
        let spec = KernelSpec::maass_landau(3.5, n).unwrap();
        let a = variance_trace(&spec, r, 1).unwrap();
        let b = variance_trace(&spec.clone().with_normalization(Normalization::Projection), r, 1).unwrap();
        let alpha = 2.0 * (3.5 - n as f64) - 1.0;
        let factor = (alpha / (4.0 * PI)).powi(2);
        prop_assert!((b / a - factor).abs() < 1e-10 * factor);
    }
}
