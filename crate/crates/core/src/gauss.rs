//! Gauss–Legendre and generalized Gauss–Laguerre rules.

use crate::error::{Error, Result};
use crate::real::Real;
use crate::specfun::ln_gamma;

/// Nodes and weights of a Gaussian rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` over `[a, b]`, assuming this is a rule on `[-1, 1]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = T::lit(0.5);
        let (mid, rad) = ((a + b) * half, (b - a) * half);
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(mid + rad * x))
            * rad
    }

    /// Rule nodes mapped affinely to `[a, b]`, with scaled weights.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = T::lit(0.5);
        let (mid, rad) = ((a + b) * half, (b - a) * half);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + rad * x, w * rad))
    }
}

const MAX_NEWTON: usize = 100;

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre<T: Real>(n: usize) -> GaussRule<T> {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let one = T::one();
    let two = one + one;
    let nf = T::from_usize_lossy(n);
    let eps = T::epsilon() * T::lit(4.0);
    for i in 0..n.div_ceil(2) {
        let fi = T::from_usize_lossy(i);
        let mut z = (T::PI() * (fi + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut dp = one;
        for _ in 0..MAX_NEWTON {
            let (mut p0, mut p1) = (one, z);
            for j in 2..=n {
                let jf = T::from_usize_lossy(j);
                let p2 = ((two * jf - one) * z * p1 - (jf - one) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - one);
            let dz = p1 / dp;
            z = z - dz;
            if dz.abs() <= eps {
                break;
            }
        }
        let w = two / ((one - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    GaussRule { nodes, weights }
}

/// `(L_n, L_{n-1}, L_n', log_scale)` at `z`, with both values divided by
/// `exp(log_scale)` to keep large degrees representable.
fn laguerre_eval<T: Real>(n: usize, alpha: T, z: T) -> (T, T, T, T) {
    let one = T::one();
    let big = T::lit(1e30);
    let (mut p1, mut q2, mut log_scale) = (one, T::zero(), T::zero());
    for j in 1..=n {
        let jf = T::from_usize_lossy(j);
        let p3 = q2;
        q2 = p1;
        p1 = ((jf + jf - one + alpha - z) * q2 - (jf - one + alpha) * p3) / jf;
        if p1.abs() > big {
            p1 = p1 / big;
            q2 = q2 / big;
            log_scale = log_scale + big.ln();
        }
    }
    let nf = T::from_usize_lossy(n);
    let pp = (nf * p1 - (nf + alpha) * q2) / z;
    (p1, q2, pp, log_scale)
}

/// `n`-point generalized Gauss–Laguerre rule for the weight `t^alpha e^{-t}` on `(0, inf)`.
pub fn gauss_laguerre<T: Real>(n: usize, alpha: T) -> Result<GaussRule<T>> {
    if !(alpha > -T::one()) {
        return Err(Error::Domain(format!("Gauss-Laguerre needs alpha > -1, got {alpha}")));
    }
    let one = T::one();
    let nf = T::from_usize_lossy(n);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let log_norm = ln_gamma(alpha + nf) - ln_gamma(nf);
    let mut z = T::zero();
    for i in 0..n {
        z = match i {
            0 => (one + alpha) * (T::lit(3.0) + T::lit(0.92) * alpha) / (one + T::lit(2.4) * nf + T::lit(1.8) * alpha),
            1 => z + (T::lit(15.0) + T::lit(6.25) * alpha) / (one + T::lit(0.9) * alpha + T::lit(2.5) * nf),
            _ => {
                let ai = T::from_usize_lossy(i - 1);
                let step = (one + T::lit(2.55) * ai) / (T::lit(1.9) * ai)
                    + T::lit(1.26) * ai * alpha / (one + T::lit(3.5) * ai);
                z + step * (z - nodes[i - 2]) / (one + T::lit(0.3) * alpha)
            }
        };
        let mut converged = false;
        for _ in 0..MAX_NEWTON {
            let (p1, _, pp, _) = laguerre_eval(n, alpha, z);
            let z1 = z;
            z = z1 - p1 / pp;
            // the recurrence carries roundoff growing with the degree
            if (z - z1).abs() <= T::epsilon() * (T::lit(64.0) + T::lit(4.0) * nf) * z.abs().max(one) {
                converged = true;
                break;
            }
        }
        if !converged || !z.is_finite() {
            return Err(Error::Convergence(format!("Gauss-Laguerre node {i} of {n} did not converge")));
        }
        nodes[i] = z;
        // weights from the converged node, not the last Newton iterate
        let (_, p2, pp, log_scale) = laguerre_eval(n, alpha, z);
        weights[i] = -(log_norm - log_scale - log_scale).exp() / (pp * nf * p2);
    }
    Ok(GaussRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre::<f64>(6);
        // degree 11 is exact for 6 nodes
        let v = rule.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-10);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_odd_and_single_point() {
        let r1 = gauss_legendre::<f64>(1);
        assert_eq!(r1.nodes, vec![0.0]);
        assert!((r1.weights[0] - 2.0).abs() < 1e-15);
        let r5 = gauss_legendre::<f64>(5);
        assert!((r5.integrate(-1.0, 1.0, |x| x.powi(8)) - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn laguerre_moments() {
        for &alpha in &[-0.5, 0.0, 0.5, 2.0, 6.0] {
            let rule = gauss_laguerre::<f64>(12, alpha).unwrap();
            for k in 0..8 {
                let v: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(k)).sum();
                let exact = ln_gamma(alpha + 1.0 + k as f64).exp();
                assert!((v - exact).abs() < 1e-11 * exact, "alpha {alpha} k {k}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn laguerre_large_rule_converges() {
        let rule = gauss_laguerre::<f64>(200, 0.5).unwrap();
        let v: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * (-x).exp()).sum();
        // int t^0.5 e^{-2t} = Gamma(1.5) / 2^1.5
        let exact = ln_gamma(1.5f64).exp() / 2f64.powf(1.5);
        assert!((v - exact).abs() < 1e-12);
    }
}
