//! Classical special functions: generalized Laguerre and Jacobi polynomials,
//! the terminating Gauss hypergeometric series and the gamma ratio that
//! prefixes the closed-form kernels.
//!
//! Polynomials are evaluated by recurrences and products only. Gamma function
//! quotients overflow long before the parameter ranges used by the Landau
//! level kernels become interesting, so they are never formed directly.

use crate::error::{domain, Result};
use crate::real::Real;

/// Degree and parameters of a classical orthogonal polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyParams<T> {
    pub n: usize,
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> PolyParams<T> {
    pub fn new(n: usize, alpha: T, beta: T) -> Result<Self> {
        let p = Self { n, alpha, beta };
        p.check()?;
        Ok(p)
    }

    /// Laguerre parameters (`beta` is unused and set to zero).
    pub fn laguerre(n: usize, alpha: T) -> Result<Self> {
        Self::new(n, alpha, T::zero())
    }

    fn check(&self) -> Result<()> {
        if !(self.alpha > -T::one()) || !self.alpha.is_finite() {
            return domain(format!("alpha must exceed -1, got {}", self.alpha));
        }
        if !self.beta.is_finite() {
            return domain("beta must be finite");
        }
        Ok(())
    }
}

/// Running sum with Kahan compensation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> KahanSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }

    pub fn add(&mut self, v: T) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum
    }
}

/// Generalized Laguerre polynomial `L_n^alpha(t)` via the three-term recurrence.
pub fn laguerre<T: Real>(p: PolyParams<T>, t: T) -> Result<T> {
    p.check()?;
    Ok(laguerre_unchecked(p.n, p.alpha, t))
}

pub(crate) fn laguerre_unchecked<T: Real>(n: usize, alpha: T, t: T) -> T {
    let one = T::one();
    if n == 0 {
        return one;
    }
    let mut prev = one;
    let mut cur = one + alpha - t;
    for k in 1..n {
        let kf = T::from_usize_lossy(k);
        let two_k1 = kf + kf + one;
        let next = ((two_k1 + alpha - t) * cur - (kf + alpha) * prev) / (kf + one);
        prev = cur;
        cur = next;
    }
    cur
}

/// `Gamma(n+1+alpha) / (n! Gamma(1+alpha))`, as the product of `(alpha+k)/k`.
pub fn gamma_ratio<T: Real>(n: usize, alpha: T) -> T {
    (1..=n).fold(T::one(), |acc, k| {
        let kf = T::from_usize_lossy(k);
        acc * (alpha + kf) / kf
    })
}

/// The terminating series `2F1(a, -n; c; x) = sum_{k<=n} (a)_k (-n)_k x^k / (k! (c)_k)`.
///
/// Terms are generated by their ratio and accumulated with Kahan summation,
/// since `(-n)_k` alternates in sign.
pub fn hyp2f1_terminating<T: Real>(a: T, n: usize, c: T, x: T) -> Result<T> {
    let mut sum = KahanSum::new();
    let mut term = T::one();
    sum.add(term);
    let nf = T::from_usize_lossy(n);
    for k in 0..n {
        let kf = T::from_usize_lossy(k);
        let denom = (kf + T::one()) * (c + kf);
        if denom == T::zero() {
            return domain(format!("2F1 denominator vanishes: c + {k} = 0 with c = {c}"));
        }
        term = term * (a + kf) * (kf - nf) * x / denom;
        sum.add(term);
    }
    Ok(sum.value())
}

/// Jacobi polynomial `P_n^(alpha,beta)(x)` from its terminating hypergeometric form.
pub fn jacobi<T: Real>(p: PolyParams<T>, x: T) -> Result<T> {
    p.check()?;
    let one = T::one();
    let nf = T::from_usize_lossy(p.n);
    let f = hyp2f1_terminating(nf + p.alpha + p.beta + one, p.n, one + p.alpha, (one - x) / (one + one))?;
    Ok(gamma_ratio(p.n, p.alpha) * f)
}

/// Jacobi polynomial from the standard three-term recurrence in the degree.
///
/// Kept alongside [`jacobi`] as a second, algebraically unrelated evaluation
/// route.
pub fn jacobi_recurrence<T: Real>(p: PolyParams<T>, x: T) -> Result<T> {
    p.check()?;
    let (a, b) = (p.alpha, p.beta);
    let one = T::one();
    let two = one + one;
    if p.n == 0 {
        return Ok(one);
    }
    let mut prev = one;
    let mut cur = (a + one) + (a + b + two) * (x - one) / two;
    for k in 1..p.n {
        let kf = T::from_usize_lossy(k);
        let s = two * kf + a + b;
        let c0 = two * (kf + one) * (kf + a + b + one) * s;
        let c1 = (s + one) * ((s + two) * s * x + a * a - b * b);
        let c2 = two * (kf + a) * (kf + b) * (s + two);
        let next = (c1 * cur - c2 * prev) / c0;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the gamma function for positive arguments (Lanczos).
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // reflection
        let pi = T::PI();
        return (pi / (pi * x).sin()).abs().ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_usize_lossy(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::TAU()).ln() + (x + half) * t.ln() - t + acc.ln()
}
