//! Numerical laboratory for Toeplitz operators on Fock spaces with doubling
//! weights.
//!
//! The crate builds everything from a subharmonic potential phi whose
//! Laplacian is a doubling measure: the radius function rho and the geometry
//! it induces ([`potential`]), truncated orthonormal bases and reproducing
//! kernels ([`basis`]), positive symbol measures and their averaging
//! transforms ([`symbol`], [`transforms`]), Toeplitz matrices with their
//! spectra and Schatten norms ([`toeplitz`]), and (r, phi)-lattices
//! ([`lattice`]). All integrals run through [`quadrature`].

pub mod basis;
pub mod error;
pub mod lattice;
pub mod potential;
pub mod quadrature;
pub mod symbol;
pub mod toeplitz;
pub mod transforms;

pub use basis::{build_basis, KernelEvaluator, OrthonormalBasis};
pub use error::{FockError, Result};
pub use potential::{Potential, PotentialKind, RadiusField};
pub use symbol::SymbolMeasure;
