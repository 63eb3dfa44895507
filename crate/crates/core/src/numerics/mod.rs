//! Low-level numerical building blocks shared by the geometric and spectral modules.

pub mod ode;
pub mod quad;
pub mod roots;
