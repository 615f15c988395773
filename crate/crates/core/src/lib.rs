//! Determinantal point processes on the Poincaré upper half-plane whose
//! correlation kernels come from continuous wavelet transforms over the
//! affine group.
//!
//! Geometry and special functions are generic over [`Real`]; the discretized
//! operators, the sampler and the variance estimators use `f64`.

pub mod concentration;
pub mod error;
pub mod gauss;
pub mod geometry;
pub mod kernels;
pub mod quadrature;
pub mod real;
pub mod sampler;
pub mod specfun;
pub mod spline;
pub mod variance;
pub mod verify;

pub use error::{Error, Result};
pub use kernels::{KernelSpec, KernelVariant, Normalization, WaveletProfile};
pub use quadrature::QuadratureGrid;
pub use real::Real;

/// A point of the upper half-plane in double precision.
pub type Point = geometry::HalfPlanePoint<f64>;
/// A point of the unit disc in double precision.
pub type Disk = geometry::DiskPoint<f64>;
pub type Mobius = geometry::MobiusMap<f64>;
/// A pseudohyperbolic disc in double precision.
pub type Disc = geometry::HyperbolicDisc<f64>;
