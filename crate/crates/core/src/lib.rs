//! Sub-Laplacian spectra of pseudo-Hermitian structures on the CR sphere.
//!
//! Contact forms `θ = f·θ₀` on `S^{2n+1} ⊂ C^{n+1}` are handled through a
//! Galerkin discretization on restricted polynomials, together with the
//! CR automorphisms of the sphere and conformal balancing of measures.

pub mod balance;
pub mod basis;
pub mod error;
pub mod factor;
pub mod geometry;
pub mod linalg;
pub mod moebius;
pub mod poly;
pub mod quadrature;
pub mod spectral;

pub use balance::{balanced_test_energy, barycenter, holder_bound, solve_balance, BalancePoint, WeightedMeasure};
pub use basis::{monomial_basis, restricted_dimension, BidegreeLabel};
pub use error::{Error, Result};
pub use factor::{ConformalFactor, FactorSpec};
pub use geometry::{SpherePoint, Unitary};
pub use moebius::{compose, pullback_residual, CrAutomorphism, CrMap};
pub use poly::RealPolynomial;
pub use quadrature::{QuadratureRule, RuleDescriptor};
pub use spectral::{assemble, invariant_report, solve, SpectralProblem, SpectralResult};
