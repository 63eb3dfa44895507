//! Numerical verification toolkit for free-boundary minimal surfaces in the
//! Riemannian Schwarzschild manifold: Jacobi-operator spectra of the plane
//! through the origin, its maximal stable radius, and the monotonicity and
//! boundary-length identities for horizon-orthogonal minimal surfaces.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod cli;
pub mod error;
pub mod fd_oracle;
pub mod geometry;
pub mod mode_odes;
pub mod numerics;
pub mod spectral;
pub mod surfaces;

pub use error::{Error, Result};
pub use geometry::{ArealRadius, HorizonDistance, IsotropicRadius, SchwarzschildModel};
