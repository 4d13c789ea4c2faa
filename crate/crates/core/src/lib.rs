//! Numerical verification of conformal flatness for non-Abelian
//! Kaluza-Klein geometries.
//!
//! Metrics, frames and gauge fields are evaluated on order-3 jets so every
//! curvature quantity up to the Cotton tensor is exact to rounding.

pub mod cli;
pub mod geom;
pub mod jet;
pub mod kk;
pub mod models;
pub mod reduce;
pub mod rng;
pub mod tensor;
pub mod verify;
