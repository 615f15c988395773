//! Poincaré half-plane geometry.
//!
//! A point `x + is` of the upper half-plane doubles as an element `(x, s)` of
//! the affine group acting by `t -> s t + x`. The hyperbolic measure
//! `ds dx / s^2` is its left Haar measure.

use num_complex::Complex;

use crate::error::{domain, Result};
use crate::real::Real;

/// A point `z = x + is` with `s > 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HalfPlanePoint<T> {
    pub x: T,
    pub s: T,
}

impl<T: Real> HalfPlanePoint<T> {
    pub fn new(x: T, s: T) -> Result<Self> {
        if !x.is_finite() || !s.is_finite() {
            return domain(format!("point coordinates must be finite, got ({x}, {s})"));
        }
        if !(s > T::zero()) {
            return domain(format!("point must lie in the upper half-plane, got Im = {s}"));
        }
        Ok(Self { x, s })
    }

    /// The base point `i`, which is also the group identity.
    pub fn i() -> Self {
        Self { x: T::zero(), s: T::one() }
    }

    pub fn from_complex(z: Complex<T>) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn z(&self) -> Complex<T> {
        Complex::new(self.x, self.s)
    }
}

/// A point of the open unit disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint<T> {
    pub u: Complex<T>,
}

impl<T: Real> DiskPoint<T> {
    pub fn new(u: Complex<T>) -> Result<Self> {
        if !(u.norm_sqr() < T::one()) {
            return domain(format!("disc point must satisfy |u| < 1, got |u| = {}", u.norm()));
        }
        Ok(Self { u })
    }
}

/// A real fractional linear map `z -> (az + b) / (cz + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap<T> {
    a: T,
    b: T,
    c: T,
    d: T,
}

impl<T: Real> MobiusMap<T> {
    /// Builds the map, rescaling the coefficients so that `|ad - bc| = 1`.
    pub fn new(a: T, b: T, c: T, d: T) -> Result<Self> {
        let det = a * d - b * c;
        if !det.is_finite() || det == T::zero() {
            return domain("Mobius map needs a nonzero finite determinant");
        }
        let k = det.abs().sqrt();
        Ok(Self { a: a / k, b: b / k, c: c / k, d: d / k })
    }

    /// Left multiplication by the affine group element `g`.
    pub fn from_group(g: HalfPlanePoint<T>) -> Self {
        Self::new(g.s, g.x, T::zero(), T::one()).expect("s > 0")
    }

    /// Elliptic rotation by `theta` about `i`.
    pub fn rotation_about_i(theta: T) -> Self {
        let (sn, cs) = (theta * T::lit(0.5)).sin_cos();
        Self { a: cs, b: sn, c: -sn, d: cs }
    }

    pub fn coefficients(&self) -> [T; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }
}

/// The pseudohyperbolic disc `{w : rho(w, center) < radius}`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HyperbolicDisc<T> {
    pub center: HalfPlanePoint<T>,
    pub radius: T,
}

impl<T: Real> HyperbolicDisc<T> {
    pub fn new(center: HalfPlanePoint<T>, radius: T) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self { center, radius })
    }

    pub fn contains(&self, w: HalfPlanePoint<T>) -> bool {
        rho(w, self.center) < self.radius
    }

    pub fn area(&self) -> T {
        area_unchecked(self.radius)
    }

    /// Hyperbolic radius `2 atanh(R)`.
    pub fn hyperbolic_radius(&self) -> T {
        radius_to_dist(self.radius)
    }
}

/// Checks `0 < r < 1`.
pub fn check_radius<T: Real>(r: T) -> Result<()> {
    if !(r > T::zero() && r < T::one()) {
        return domain(format!("pseudohyperbolic radius must lie in (0, 1), got {r}"));
    }
    Ok(())
}

/// Affine group product `(x, s)(x', s') = (x + s x', s s')`.
pub fn group_mul<T: Real>(g1: HalfPlanePoint<T>, g2: HalfPlanePoint<T>) -> HalfPlanePoint<T> {
    HalfPlanePoint { x: g1.x + g1.s * g2.x, s: g1.s * g2.s }
}

/// Affine group inverse `(-x/s, 1/s)`.
pub fn group_inv<T: Real>(g: HalfPlanePoint<T>) -> HalfPlanePoint<T> {
    HalfPlanePoint { x: -g.x / g.s, s: T::one() / g.s }
}

/// Pseudohyperbolic distance `|z1 - z2| / |z1 - conj(z2)|`.
pub fn rho<T: Real>(z1: HalfPlanePoint<T>, z2: HalfPlanePoint<T>) -> T {
    let dx = z1.x - z2.x;
    let num = dx.hypot(z1.s - z2.s);
    let den = dx.hypot(z1.s + z2.s);
    num / den
}

/// Hyperbolic distance `log((1 + rho) / (1 - rho))`.
///
/// Evaluated as `2 asinh(|z1 - z2| / (2 sqrt(s1 s2)))`, which is the same
/// quantity without the cancellation in `1 - rho` for distant points.
pub fn hyp_dist<T: Real>(z1: HalfPlanePoint<T>, z2: HalfPlanePoint<T>) -> T {
    let two = T::lit(2.0);
    let chord = (z1.x - z2.x).hypot(z1.s - z2.s);
    two * (chord / (two * (z1.s * z2.s).sqrt())).asinh()
}

/// Hyperbolic distance corresponding to a pseudohyperbolic radius.
pub fn radius_to_dist<T: Real>(r: T) -> T {
    T::lit(2.0) * r.atanh()
}

/// Cayley transform `(z - i) / (z + i)` onto the unit disc.
pub fn cayley<T: Real>(z: HalfPlanePoint<T>) -> DiskPoint<T> {
    let zc = z.z();
    let i = Complex::new(T::zero(), T::one());
    DiskPoint { u: (zc - i) / (zc + i) }
}

/// Inverse Cayley transform `i (1 + u) / (1 - u)`.
pub fn cayley_inv<T: Real>(u: DiskPoint<T>) -> HalfPlanePoint<T> {
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let den = one - u.u;
    let z = i * (one + u.u) / den;
    // Im z = (1 - |u|^2) / |1 - u|^2, computed without cancellation
    let s = (T::one() - u.u.norm_sqr()) / den.norm_sqr();
    HalfPlanePoint { x: z.re, s }
}

/// Pseudohyperbolic distance between two points of the unit disc.
pub fn disk_rho<T: Real>(u: DiskPoint<T>, v: DiskPoint<T>) -> T {
    let one = Complex::new(T::one(), T::zero());
    (u.u - v.u).norm() / (one - u.u * v.u.conj()).norm()
}

/// Image of `z` under an orientation-preserving Möbius map.
pub fn mobius<T: Real>(m: MobiusMap<T>, z: HalfPlanePoint<T>) -> Result<HalfPlanePoint<T>> {
    if !(m.det() > T::zero()) {
        return domain("Mobius map must have positive determinant to preserve the half-plane");
    }
    let zc = z.z();
    let den = zc * m.c + m.d;
    let w = (zc * m.a + m.b) / den;
    // Im w = det * Im z / |cz + d|^2
    let s = m.det() * z.s / den.norm_sqr();
    HalfPlanePoint::new(w.re, s)
}

/// Hyperbolic area `4 pi R^2 / (1 - R^2)` of a disc of pseudohyperbolic radius `R`.
pub fn disc_area<T: Real>(r: T) -> Result<T> {
    check_radius(r)?;
    Ok(area_unchecked(r))
}

fn area_unchecked<T: Real>(r: T) -> T {
    let r2 = r * r;
    T::lit(4.0) * T::PI() * r2 / (T::one() - r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, s: f64) -> HalfPlanePoint<f64> {
        HalfPlanePoint::new(x, s).unwrap()
    }

    #[test]
    fn group_law_examples() {
        assert_eq!(group_mul(p(1.0, 2.0), p(3.0, 4.0)), p(7.0, 8.0));
        assert_eq!(group_mul(HalfPlanePoint::i(), p(1.5, 0.2)), p(1.5, 0.2));
        assert_eq!(group_inv(p(1.0, 2.0)), p(-0.5, 0.5));
        assert_eq!(group_inv(HalfPlanePoint::<f64>::i()), HalfPlanePoint::i());
    }

    #[test]
    fn distance_examples() {
        let i = HalfPlanePoint::<f64>::i();
        assert_eq!(rho(i, i), 0.0);
        assert!((rho(p(0.0, 2.0), i) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(hyp_dist(i, i), 0.0);
        assert!((hyp_dist(p(0.0, 2.0), i) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn cayley_examples() {
        assert!(cayley(HalfPlanePoint::<f64>::i()).u.norm() < 1e-16);
        let u = cayley(p(0.0, 2.0)).u;
        assert!((u - Complex::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn invalid_inputs() {
        assert!(HalfPlanePoint::new(0.0, 0.0).is_err());
        assert!(HalfPlanePoint::new(f64::NAN, 1.0).is_err());
        assert!(DiskPoint::new(Complex::new(1.0, 0.0)).is_err());
        assert!(disc_area(1.0).is_err());
        assert!(disc_area(0.0).is_err());
        assert!(MobiusMap::new(1.0, 2.0, 2.0, 4.0).is_err());
        let flip = MobiusMap::new(-1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(mobius(flip, p(0.0, 1.0)).is_err());
    }

    #[test]
    fn mobius_examples() {
        let z = p(0.3, 0.7);
        let id = MobiusMap::new(1.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(mobius(id, z).unwrap(), z);
        let tr = MobiusMap::new(1.0f64, 2.5, 0.0, 1.0).unwrap();
        let w = mobius(tr, HalfPlanePoint::i()).unwrap();
        assert!((w.x - 2.5).abs() < 1e-15 && (w.s - 1.0).abs() < 1e-15);
        let m = MobiusMap::new(2.0f64, 1.0, 1.0, 3.0).unwrap();
        assert!((m.det() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_fixes_i() {
        let m = MobiusMap::rotation_about_i(1.1f64);
        let w = mobius(m, HalfPlanePoint::i()).unwrap();
        assert!(w.x.abs() < 1e-15 && (w.s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn disc_area_half() {
        assert!((disc_area(0.5f64).unwrap() - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn single_precision_geometry() {
        let a = HalfPlanePoint::new(0.5f32, 1.5).unwrap();
        let b = HalfPlanePoint::new(-0.25f32, 0.5).unwrap();
        let d32 = hyp_dist(a, b) as f64;
        let d64 = hyp_dist(p(0.5, 1.5), p(-0.25, 0.5));
        assert!((d32 - d64).abs() < 1e-5);
    }
}
