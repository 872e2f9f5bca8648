//! Uniform meshes, Gauss–Legendre rules, and the modal Legendre DG space.

pub mod basis;
mod dg;
mod mesh;
mod quadrature;

pub use dg::{DGCoefficients, Side};
pub use mesh::Mesh1D;
pub use quadrature::{gauss_rule, Adaptive, QuadRule, MAX_NODES};
