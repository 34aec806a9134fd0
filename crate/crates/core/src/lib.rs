//! Numerical laboratory for higher-order mean curvature of hypersurface
//! graphs and of explicit codimension-one foliations of space forms.
//!
//! Module map:
//! - [`field`]: scalar-field expressions `u: Rⁿ → R` and builtin families
//! - [`jet`]: exact second-order jets and a finite-difference oracle
//! - [`curvature`]: graph frames, Newton tensors, support functions, `L_r`
//! - [`analysis`]: integrability, Hessian growth, flux, nullity and
//!   classification diagnostics
//! - [`foliation`]: foliation families and the divergence identities of
//!   `P_r(X)` on leaves and in the ambient space

pub mod curvature;
pub mod error;
pub mod field;
pub mod jet;
pub mod linalg;
pub mod quadrature;

pub mod analysis;
pub mod foliation;
#[cfg(test)]
mod properties;

pub use error::{Error, Result};
