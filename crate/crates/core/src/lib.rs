//! Local discontinuous Galerkin solver for the one-dimensional time-tempered
//! fractional diffusion equation
//!
//! ```text
//! C_D_t^{alpha,lambda} u = kappa u_xx + f,   0 < alpha < 1,  lambda >= 0,
//! ```
//!
//! discretized in space by LDG with alternating fluxes and in time by order-q
//! tempered convolution quadrature.
//!
//! The numerical kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

pub mod error;
pub mod frac_calculus;
pub mod harness;
pub mod ldg;
pub mod linalg;
pub mod march;
pub mod mesh_quadrature;
pub mod problems;
pub mod projections;
pub mod scalar;

pub use error::{Error, Result};
pub use frac_calculus::TemperedParams;
pub use ldg::BoundaryCondition;
pub use scalar::Scalar;

pub type Mesh = mesh_quadrature::Mesh1D<f64>;
pub type QuadRule = mesh_quadrature::QuadRule<f64>;
pub type DGCoefficients = mesh_quadrature::DGCoefficients<f64>;
pub type ConvolutionWeights = frac_calculus::ConvolutionWeights<f64>;
pub type LdgSystem = ldg::LdgSystem<f64>;
pub type StepSolver = ldg::StepSolver<f64>;
pub type MarchState = march::MarchState<f64>;
pub type RunOutput = march::RunOutput<f64>;
