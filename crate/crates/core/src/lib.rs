//! Limiting zero distributions of random fewnomials.
//!
//! A random n-nomial of degree N is a polynomial with a uniformly random
//! n-element exponent set and independent Gaussian coefficients normalized so
//! the full ensemble (n = N+1) is rotation invariant. As N grows, the expected
//! radial distribution of its zeros, in the coordinate ρ = log|z|², converges
//! to an explicit density built from a convex potential on the unit simplex.
//! This crate evaluates that density family and everything underneath it, and
//! ships a Monte Carlo lab that samples actual polynomials, finds their roots,
//! and compares.
//!
//! The layers, bottom to top:
//!
//! * [`simplex`]: the simplex Δ, the softmax-style moment map μ(ρ) with its
//!   derivative tensors, and mass-one quadrature rules on the facets of Δ.
//! * [`potential`]: the potential b(λ,ρ), its restriction B to segments from
//!   μ(ρ) to boundary points, the inverse function h(t,ρ,x), and their
//!   derivatives with all boundary extensions.
//! * [`distribution`]: the sublevel-set distribution D(t,ρ) = P{b ≤ t} with
//!   derivatives and an independent Monte Carlo oracle.
//! * [`density`]: the potential F_n, the integral G_n, gradients and Hessians
//!   (two independent routes), and the radial/determinant densities.
//! * [`roots`] and [`ensemble`]: polynomial sampling, Aberth–Ehrlich root
//!   finding, radial histograms, and exact expected-span combinatorics.
//!
//! All numeric kernels are generic over [`scalar::Real`] (`f64` or `f32`);
//! the `f64` instantiation is the tested contract and has aliases at the
//! crate root.

pub mod density;
pub mod distribution;
pub mod ensemble;
pub mod matrix;
pub mod potential;
pub mod quad;
pub mod roots;
pub mod scalar;
pub mod simplex;

pub use scalar::Real;

/// `f64` instantiations of the core types: the tested contract.
pub type RadialPoint = simplex::RadialPoint<f64>;
pub type SimplexPoint = simplex::SimplexPoint<f64>;
pub type BoundaryPoint = simplex::BoundaryPoint<f64>;
pub type FacetRule = simplex::FacetRule<f64>;
pub type Segment = potential::Segment<f64>;
pub type DistCache = distribution::DistCache<f64>;
pub type Matrix = matrix::Matrix<f64>;

/// `f32` instantiations, provided to keep the kernels honestly generic.
pub type RadialPoint32 = simplex::RadialPoint<f32>;
pub type SimplexPoint32 = simplex::SimplexPoint<f32>;
pub type Segment32 = potential::Segment<f32>;
